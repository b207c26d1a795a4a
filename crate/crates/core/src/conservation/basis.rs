//! The space of all conserved cell-wise quantities of a rule.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::finitary::constraint_rows;
use crate::error::{Error, Result};
use crate::linalg::{canonical_basis, coordinates_in_hnf, hnf, integer_kernel, nullspace, to_rational, ZMatrix};
use crate::quantity::{Domain, Quantity, Value};
use crate::rules::LocalRule;

/// Generators of `{φ : φ conserved}`. The first vector is the constant
/// quantity; the rest span the solutions with `φ(0) = 0`, in reduced echelon
/// form over `Q`, or as reduced Hermite rows over `Z/m`.
#[derive(Clone, Debug)]
pub struct ConservationBasis {
    pub alphabet: usize,
    pub domain: Domain,
    pub vectors: Vec<Quantity>,
    pub trivial: Vec<bool>,
    /// Size of the solution module over `Z/m`.
    pub order: Option<BigUint>,
    /// Lifted lattice `{x in Z^A : x mod m solves, x_0 = 0} + mZ^A` in
    /// Hermite form (modular domains only).
    lattice: Option<ZMatrix>,
}

impl ConservationBasis {
    /// Over `Q` the vector-space dimension. Over `Z/m` the number of
    /// generators; for prime `m` this is the `F_m` dimension.
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    /// Whether `φ` lies in the span (componentwise for `Q^K`).
    pub fn contains(&self, phi: &Quantity) -> bool {
        if phi.alphabet_size() != self.alphabet {
            return false;
        }
        match (self.domain, phi.domain()) {
            (Domain::Mod(m), Domain::Mod(m2)) if m == m2 => {
                let lattice = self.lattice.as_ref().expect("modular basis keeps its lattice");
                let residues: Vec<i64> = phi
                    .values()
                    .iter()
                    .map(|v| match v {
                        Value::Mod { residue, .. } => *residue as i64,
                        _ => unreachable!(),
                    })
                    .collect();
                let shifted: Vec<BigInt> = residues
                    .iter()
                    .map(|&r| BigInt::from(r - residues[0]))
                    .collect();
                coordinates_in_hnf(lattice, &shifted).is_some()
            }
            (Domain::Rational, Domain::Rational | Domain::Vector(_)) => {
                let coords = phi.rational_coords().expect("ordered domain");
                let basis: Vec<Vec<BigRational>> = self
                    .vectors
                    .iter()
                    .map(|q| q.rational_coords().unwrap().into_iter().map(|c| c[0].clone()).collect())
                    .collect();
                (0..phi.components()).all(|k| {
                    let v: Vec<BigRational> = coords.iter().map(|c| c[k].clone()).collect();
                    in_span(&basis, &v, self.alphabet)
                })
            }
            _ => false,
        }
    }
}

fn in_span(basis: &[Vec<BigRational>], v: &[BigRational], cols: usize) -> bool {
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    crate::linalg::rank(&with, cols) == crate::linalg::rank(&basis.to_vec(), cols)
}

/// Basis of the conserved quantities of `rule` over `Q` (also used for
/// `Q^K`, which is componentwise) or `Z/m`.
pub fn conservation_basis(rule: &LocalRule, domain: Domain) -> Result<ConservationBasis> {
    let a = rule.alphabet_size();
    let rows = constraint_rows(rule)?;
    log::debug!("{} distinct constraint rows", rows.len());
    match domain {
        Domain::Rational | Domain::Vector(_) => rational_basis(a, &rows),
        Domain::Mod(m) if m >= 2 => modular_basis(a, m, &rows),
        Domain::Mod(m) => Err(Error::Quantity(format!("modulus {m} must be at least 2"))),
    }
}

fn rational_basis(a: usize, rows: &[Vec<i64>]) -> Result<ConservationBasis> {
    let mut system = to_rational(rows);
    let mut pin = vec![BigRational::zero(); a];
    pin[0] = BigRational::one();
    system.push(pin);
    let reduced = canonical_basis(&nullspace(&system, a), a);
    let mut vectors = vec![Quantity::rational(vec![BigRational::one(); a])?];
    for v in reduced {
        vectors.push(Quantity::rational(v)?);
    }
    let mut trivial = vec![false; vectors.len()];
    trivial[0] = true;
    Ok(ConservationBasis {
        alphabet: a,
        domain: Domain::Rational,
        vectors,
        trivial,
        order: None,
        lattice: None,
    })
}

fn modular_basis(a: usize, m: u64, rows: &[Vec<i64>]) -> Result<ConservationBasis> {
    let big_m = BigInt::from(m);
    let as_z: ZMatrix = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut reduced = hnf(&as_z, a);
    let mut pin = vec![BigInt::zero(); a];
    pin[0] = BigInt::one();
    reduced.push(pin);
    // x solves R x = 0 mod m  iff  (x, y) is in the kernel of [R | -m I].
    let r = reduced.len();
    let augmented: ZMatrix = reduced
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut out = row.clone();
            out.extend((0..r).map(|j| if i == j { -big_m.clone() } else { BigInt::zero() }));
            out
        })
        .collect();
    let kernel = integer_kernel(&augmented, a + r);
    let mut gens: ZMatrix = kernel.iter().map(|v| v[..a].to_vec()).collect();
    for i in 0..a {
        let mut row = vec![BigInt::zero(); a];
        row[i] = big_m.clone();
        gens.push(row);
    }
    let lattice = hnf(&gens, a);
    let det = lattice
        .iter()
        .enumerate()
        .fold(BigInt::one(), |acc, (i, row)| acc * &row[i]);
    let full = BigInt::from(m).pow(a as u32);
    let order = (full / det * &big_m).to_biguint().expect("positive order");

    let to_residues = |row: &[BigInt]| -> Vec<i64> {
        row.iter()
            .map(|x| x.mod_floor(&big_m).to_i64().expect("residue fits"))
            .collect()
    };
    let mut vectors = vec![Quantity::modular(m, &vec![1; a])?];
    for row in &lattice {
        let res = to_residues(row);
        if res.iter().any(|&x| x != 0) {
            vectors.push(Quantity::modular(m, &res)?);
        }
    }
    let mut trivial = vec![false; vectors.len()];
    trivial[0] = true;
    Ok(ConservationBasis {
        alphabet: a,
        domain: Domain::Mod(m),
        vectors,
        trivial,
        order: Some(order),
        lattice: Some(lattice),
    })
}
