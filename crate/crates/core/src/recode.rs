//! Recoding rational quantities as nonnegative ones and as particle counts
//! in `N^K'`. Both maps are affine with injective linear part, so they
//! preserve conservation for every rule.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::Symbol;
use crate::linalg::{coordinates_in_hnf, hnf, ZMatrix};
use crate::quantity::{Domain, Quantity};

fn ordered_coords(phi: &Quantity) -> Result<Vec<Vec<BigRational>>> {
    phi.rational_coords()
        .ok_or_else(|| Error::Unsupported("recoding needs a rational or vector quantity".into()))
}

fn rebuild(domain: Domain, rows: Vec<Vec<BigRational>>) -> Result<Quantity> {
    match domain {
        Domain::Vector(k) => Quantity::vector(k, rows),
        _ => Quantity::rational(rows.into_iter().map(|mut r| r.remove(0)).collect()),
    }
}

/// `φ - min φ`, componentwise for vectors.
pub fn recode_nonneg(phi: &Quantity) -> Result<Quantity> {
    let coords = ordered_coords(phi)?;
    let k = phi.components();
    let mins: Vec<BigRational> = (0..k)
        .map(|j| coords.iter().map(|c| c[j].clone()).min().expect("nonempty alphabet"))
        .collect();
    let shifted = coords
        .into_iter()
        .map(|c| c.into_iter().zip(&mins).map(|(x, m)| x - m).collect())
        .collect();
    rebuild(phi.domain(), shifted)
}

#[derive(Clone, Debug)]
pub struct IntegerRecoding {
    /// Values in `N^K'` (rational domain when `K' = 1`).
    pub quantity: Quantity,
    /// Rank `K'` of the subgroup generated by the values of `φ`.
    pub rank: usize,
    /// Basis of that subgroup inside `Q^K`: `φ(s) = Σ_i (c_i(s) + shift_i) basis_i`.
    pub basis: Vec<Vec<BigRational>>,
    pub shift: Vec<BigInt>,
    pub vacuum_before: Vec<Symbol>,
    pub vacuum_after: Vec<Symbol>,
}

/// Integer coordinates of `φ` in a Hermite basis of the group its values
/// generate, shifted so every coordinate is nonnegative. Expects a
/// nonnegative quantity; the result generates `Z^K'` either way.
pub fn recode_integer(phi: &Quantity) -> Result<IntegerRecoding> {
    let coords = ordered_coords(phi)?;
    let k = phi.components();
    let denom = coords
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: ZMatrix = coords
        .iter()
        .map(|c| c.iter().map(|q| q.numer() * (&denom / q.denom())).collect())
        .collect();
    let basis = hnf(&ints, k);
    let rank = basis.len();
    let vacuum_before = phi.vacuum_set();
    if rank == 0 {
        let zero = Quantity::rational(vec![BigRational::zero(); coords.len()])?;
        return Ok(IntegerRecoding {
            vacuum_after: zero.vacuum_set(),
            quantity: zero,
            rank,
            basis: Vec::new(),
            shift: Vec::new(),
            vacuum_before,
        });
    }
    let lattice_coords: Vec<Vec<BigInt>> = ints
        .iter()
        .map(|row| coordinates_in_hnf(&basis, row).expect("generator lies in its own lattice"))
        .collect();
    let shift: Vec<BigInt> = (0..rank)
        .map(|i| lattice_coords.iter().map(|c| c[i].clone()).min().expect("nonempty"))
        .collect();
    let values: Vec<Vec<BigRational>> = lattice_coords
        .iter()
        .map(|c| {
            c.iter()
                .zip(&shift)
                .map(|(x, m)| BigRational::from_integer(x - m))
                .collect()
        })
        .collect();
    let quantity = if rank == 1 {
        rebuild(Domain::Rational, values)?
    } else {
        rebuild(Domain::Vector(rank), values)?
    };
    let basis_q = basis
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| BigRational::new(x.clone(), denom.clone()))
                .collect()
        })
        .collect();
    Ok(IntegerRecoding {
        vacuum_after: quantity.vacuum_set(),
        quantity,
        rank,
        basis: basis_q,
        shift,
        vacuum_before,
    })
}
