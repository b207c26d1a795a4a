//! Measure-theoretic tests: the uniform-Bernoulli sum identity and, in one
//! dimension, pairing against shift-consistent word marginals.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{integer_kernel, ZMatrix};
use crate::quantity::{Quantity, Value};
use crate::rules::{decode, pattern_count, LocalRule};

#[derive(Clone, Debug, PartialEq)]
pub struct UniformSumReport {
    pub holds: bool,
    /// `Σ_{a in A^B} φ(f(a))`
    pub image_sum: Value,
    /// `A^{|B|-1} Σ_{s in A} φ(s)`
    pub expected: Value,
}

/// Necessary condition for conservation: under the uniform Bernoulli
/// measure the expected value of `φ` must not change.
pub fn uniform_sum_filter(rule: &LocalRule, phi: &Quantity) -> Result<UniformSumReport> {
    let a = rule.alphabet_size();
    if phi.alphabet_size() != a {
        return Err(Error::Quantity("quantity and rule alphabets differ".into()));
    }
    let mut counts = vec![0u64; a];
    for &s in rule.table() {
        counts[s as usize] += 1;
    }
    let mut image_sum = Value::zero(phi.domain());
    for (s, &n) in counts.iter().enumerate() {
        image_sum.add_assign(&phi.values()[s].scaled(&BigInt::from(n)));
    }
    let weight = BigInt::from(a).pow(rule.nbhd().len() as u32 - 1);
    let mut all = Value::zero(phi.domain());
    for v in phi.values() {
        all.add_assign(v);
    }
    let expected = all.scaled(&weight);
    Ok(UniformSumReport {
        holds: image_sum == expected,
        image_sum,
        expected,
    })
}

/// Integer basis of signed weightings `ν` on words of length `w` over an
/// alphabet of size `A` with `Σ_s ν(s·u) = Σ_s ν(u·s)` for every word `u` of
/// length `w - 1`. These are the circulations on the de Bruijn graph, so the
/// integer kernel is generated by cycles.
#[derive(Clone, Debug)]
pub struct MarginalSpace {
    pub alphabet: usize,
    pub word_len: usize,
    pub basis: ZMatrix,
}

impl MarginalSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Rows of the left/right consistency system, one per word of length `w-1`.
pub fn consistency_rows(alphabet: usize, word_len: usize) -> Result<Vec<Vec<i64>>> {
    if word_len == 0 {
        return Err(Error::Unsupported("word length must be positive".into()));
    }
    let words = pattern_count(alphabet, word_len)
        .ok_or_else(|| Error::Unsupported("too many words".into()))?;
    let prefixes = words / alphabet;
    let high = prefixes;
    Ok((0..prefixes)
        .map(|u| {
            let mut row = vec![0i64; words];
            for s in 0..alphabet {
                row[s * high + u] += 1;
                row[u * alphabet + s] -= 1;
            }
            row
        })
        .collect())
}

pub fn marginal_constraint_space(alphabet: usize, word_len: usize) -> Result<MarginalSpace> {
    let rows = consistency_rows(alphabet, word_len)?;
    let words = pattern_count(alphabet, word_len).expect("checked above");
    let z: ZMatrix = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    Ok(MarginalSpace {
        alphabet,
        word_len,
        basis: integer_kernel(&z, words),
    })
}

#[derive(Clone, Debug)]
pub struct MarginalReport {
    pub holds: bool,
    pub dimension: usize,
    /// Index into the basis of the first `ν` with `⟨ðφ, ν⟩ ≠ 0`.
    pub failing: Option<usize>,
    pub pairing: Option<Value>,
}

/// `⟨ðφ, ν⟩ = Σ_w ν(w)(φ(f(w)) - φ(w_center))` for every basis element `ν`.
pub fn marginal_invariance_check(rule: &LocalRule, phi: &Quantity) -> Result<MarginalReport> {
    if rule.dim() != 1 {
        return Err(Error::NotOneDimensional);
    }
    let a = rule.alphabet_size();
    if phi.alphabet_size() != a {
        return Err(Error::Quantity("quantity and rule alphabets differ".into()));
    }
    let width = rule.nbhd().len();
    let space = marginal_constraint_space(a, width)?;
    let center = rule.nbhd().origin_index();
    let defect: Vec<Value> = (0..rule.table().len())
        .map(|i| {
            let word = decode(a, i, width);
            phi.value(rule.table()[i]).sub(phi.value(word[center]))
        })
        .collect();
    for (k, nu) in space.basis.iter().enumerate() {
        let mut acc = Value::zero(phi.domain());
        for (weight, d) in nu.iter().zip(&defect) {
            if !weight.is_zero() {
                acc.add_assign(&d.scaled(weight));
            }
        }
        if !acc.is_zero() {
            return Ok(MarginalReport {
                holds: false,
                dimension: space.dimension(),
                failing: Some(k),
                pairing: Some(acc),
            });
        }
    }
    Ok(MarginalReport {
        holds: true,
        dimension: space.dimension(),
        failing: None,
        pairing: None,
    })
}
