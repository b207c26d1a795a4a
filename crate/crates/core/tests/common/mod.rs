#![allow(dead_code)]

use ca_conserve::lattice::{Configuration, Neighborhood, Point, Symbol};
use ca_conserve::quantity::Quantity;
use ca_conserve::rules::{pattern_count, Alphabet, LocalRule};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

pub const PPCA: [u32; 5] = [170, 184, 204, 226, 240];

pub fn w(n: u32) -> LocalRule {
    LocalRule::from_wolfram(n).unwrap()
}

pub fn random_rule(rng: &mut impl Rng, alphabet: usize, radius: usize) -> LocalRule {
    let nbhd = Neighborhood::interval(radius);
    let n = pattern_count(alphabet, nbhd.len()).unwrap();
    let table = (0..n).map(|_| rng.gen_range(0..alphabet) as Symbol).collect();
    LocalRule::new(Alphabet::new(alphabet).unwrap(), nbhd, table).unwrap()
}

pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Values `p/q` with small numerators and denominators.
pub fn random_rational_phi(rng: &mut impl Rng, alphabet: usize) -> Quantity {
    Quantity::rational(
        (0..alphabet)
            .map(|_| rational(rng.gen_range(-6..=6), rng.gen_range(1..=4)))
            .collect(),
    )
    .unwrap()
}

/// Random rational combination of the given quantities (all rational).
pub fn random_combination(rng: &mut impl Rng, basis: &[Quantity]) -> Quantity {
    let a = basis[0].alphabet_size();
    let mut values = vec![rational(0, 1); a];
    for phi in basis {
        let c = rational(rng.gen_range(-5..=5), rng.gen_range(1..=3));
        for (v, coords) in values.iter_mut().zip(phi.rational_coords().unwrap()) {
            *v += &c * &coords[0];
        }
    }
    Quantity::rational(values).unwrap()
}

pub fn random_word(rng: &mut impl Rng, alphabet: usize, len: usize) -> Vec<Symbol> {
    (0..len).map(|_| rng.gen_range(0..alphabet) as Symbol).collect()
}

pub fn random_finite(rng: &mut impl Rng, alphabet: usize, max_len: usize) -> Configuration {
    let len = rng.gen_range(1..=max_len);
    let start = rng.gen_range(-10..=10);
    Configuration::from_word(0, start, &random_word(rng, alphabet, len))
}

/// Elementary rule by its bit: `F(a)_x = bit (4 a_{x-1} + 2 a_x + a_{x+1})`.
pub fn elementary_image(n: u32, a: &Configuration, x: i64) -> Symbol {
    use ca_conserve::lattice::Sites;
    let s = |y: i64| a.symbol_at(&Point::at(y)) as u32;
    ((n >> (4 * s(x - 1) + 2 * s(x) + s(x + 1))) & 1) as Symbol
}
