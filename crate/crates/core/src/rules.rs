//! Alphabets, local rule tables and the JSON rule format.
//!
//! Patterns over a neighborhood are indexed by their mixed-radix encoding:
//! digits follow the canonical (lexicographic) offset order, most
//! significant first. For elementary rules this makes `table[k]` bit `k` of
//! the Wolfram number, with `k = 4 a_{-1} + 2 a_0 + a_1`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Neighborhood, Point, Symbol};

pub const MAX_ALPHABET: usize = 256;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Alphabet {
    size: usize,
    names: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_ALPHABET {
            return Err(Error::Rule(format!(
                "alphabet size must be in 1..={MAX_ALPHABET}, got {size}"
            )));
        }
        Ok(Alphabet { size, names: None })
    }

    pub fn with_names(names: Vec<String>) -> Result<Self> {
        let mut a = Alphabet::new(names.len())?;
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::Rule("symbol names must be distinct".into()));
        }
        a.names = Some(names);
        Ok(a)
    }

    pub fn binary() -> Self {
        Alphabet {
            size: 2,
            names: None,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn name(&self, s: Symbol) -> String {
        match &self.names {
            Some(n) => n[s as usize].clone(),
            None => s.to_string(),
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.size).map(|s| s as Symbol)
    }
}

/// `A^n`, or `None` on overflow.
pub fn pattern_count(alphabet: usize, len: usize) -> Option<usize> {
    alphabet.checked_pow(u32::try_from(len).ok()?)
}

/// Mixed-radix encoding, most significant digit first.
pub fn encode(alphabet: usize, digits: &[Symbol]) -> usize {
    digits
        .iter()
        .fold(0usize, |acc, &d| acc * alphabet + d as usize)
}

/// Inverse of [`encode`] for a fixed length.
pub fn decode(alphabet: usize, mut index: usize, len: usize) -> Vec<Symbol> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (index % alphabet) as Symbol;
        index /= alphabet;
    }
    out
}

/// Local map `f: A^B -> A`.
#[derive(Clone, Debug)]
pub struct LocalRule {
    alphabet: Alphabet,
    nbhd: Neighborhood,
    table: Vec<Symbol>,
    /// Positions inside `B + B` of `v + b` for every `v, b` in `B`.
    patch_taps: Vec<Vec<usize>>,
}

impl PartialEq for LocalRule {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet.size == other.alphabet.size
            && self.nbhd == other.nbhd
            && self.table == other.table
    }
}

impl Eq for LocalRule {}

impl LocalRule {
    pub fn new(alphabet: Alphabet, nbhd: Neighborhood, table: Vec<Symbol>) -> Result<Self> {
        let expected = pattern_count(alphabet.size, nbhd.len())
            .ok_or_else(|| Error::Rule("rule table too large".into()))?;
        if table.len() != expected {
            return Err(Error::Rule(format!(
                "table length {} != {}^{} = {expected}",
                table.len(),
                alphabet.size,
                nbhd.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&s| s as usize >= alphabet.size) {
            return Err(Error::Rule(format!(
                "table entry {bad} outside alphabet of size {}",
                alphabet.size
            )));
        }
        let outer = nbhd.double();
        let patch_taps = nbhd
            .taps(nbhd.offsets(), &outer)
            .expect("B + B contains every v + b");
        Ok(LocalRule {
            alphabet,
            nbhd,
            table,
            patch_taps,
        })
    }

    pub fn from_fn(
        alphabet: Alphabet,
        nbhd: Neighborhood,
        f: impl Fn(&[Symbol]) -> Symbol,
    ) -> Result<Self> {
        let n = pattern_count(alphabet.size, nbhd.len())
            .ok_or_else(|| Error::Rule("rule table too large".into()))?;
        let table = (0..n)
            .map(|i| f(&decode(alphabet.size, i, nbhd.len())))
            .collect();
        LocalRule::new(alphabet, nbhd, table)
    }

    /// Rule given on an arbitrary offset list (any order, not necessarily
    /// symmetric or containing the origin). The table is read against the
    /// sorted offsets and the rule is re-indexed onto the smallest valid
    /// neighborhood containing them.
    pub fn from_raw(
        alphabet: Alphabet,
        dim: usize,
        raw_offsets: &[Point],
        table: Vec<Symbol>,
    ) -> Result<Self> {
        let mut sorted = raw_offsets.to_vec();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Neighborhood("duplicate offsets".into()));
        }
        if let Some(p) = sorted.iter().find(|p| p.dim() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                found: p.dim(),
            });
        }
        let expected = pattern_count(alphabet.size, sorted.len())
            .ok_or_else(|| Error::Rule("rule table too large".into()))?;
        if table.len() != expected {
            return Err(Error::Rule(format!(
                "table length {} != {}^{} = {expected}",
                table.len(),
                alphabet.size,
                sorted.len()
            )));
        }
        let nbhd = Neighborhood::hull(dim, &sorted)?;
        if nbhd.offsets() == sorted.as_slice() {
            return LocalRule::new(alphabet, nbhd, table);
        }
        let positions: Vec<usize> = sorted
            .iter()
            .map(|p| nbhd.index_of(p).expect("hull contains raw offsets"))
            .collect();
        let a = alphabet.size;
        LocalRule::from_fn(alphabet, nbhd, |digits| {
            let sub: Vec<Symbol> = positions.iter().map(|&i| digits[i]).collect();
            table[encode(a, &sub)]
        })
    }

    /// Elementary rule: `A = {0,1}`, `B = [-1..1]`, output bit `k` of the
    /// number for `k = 4 a_{-1} + 2 a_0 + a_1`.
    pub fn from_wolfram(number: u32) -> Result<Self> {
        if number > 255 {
            return Err(Error::WolframRange(number));
        }
        let table = (0..8).map(|k| ((number >> k) & 1) as Symbol).collect();
        LocalRule::new(Alphabet::binary(), Neighborhood::interval(1), table)
    }

    pub fn to_wolfram(&self) -> Option<u8> {
        if self.alphabet.size != 2 || self.nbhd != Neighborhood::interval(1) {
            return None;
        }
        Some(
            self.table
                .iter()
                .enumerate()
                .map(|(k, &b)| b << k)
                .sum(),
        )
    }

    /// The shift `σ^k`, `F(a)_x = a_{x+k}`, on `[-|k|..|k|]`.
    pub fn shift(k: i64, alphabet: Alphabet) -> Result<Self> {
        let r = k.unsigned_abs() as usize;
        let idx = (k + r as i64) as usize;
        LocalRule::from_fn(alphabet, Neighborhood::interval(r), |d| d[idx])
    }

    pub fn identity(alphabet: Alphabet, nbhd: Neighborhood) -> Result<Self> {
        let o = nbhd.origin_index();
        LocalRule::from_fn(alphabet, nbhd, |d| d[o])
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.size
    }

    pub fn nbhd(&self) -> &Neighborhood {
        &self.nbhd
    }

    pub fn dim(&self) -> usize {
        self.nbhd.dim()
    }

    pub fn table(&self) -> &[Symbol] {
        &self.table
    }

    pub fn encode(&self, pattern: &[Symbol]) -> usize {
        encode(self.alphabet.size, pattern)
    }

    /// `f(pattern)`, pattern indexed by `B` in canonical order.
    #[inline]
    pub fn apply_local(&self, pattern: &[Symbol]) -> Symbol {
        debug_assert_eq!(pattern.len(), self.nbhd.len());
        self.table[self.encode(pattern)]
    }

    /// Images `F(a)_v` for every `v` in `B`, given `a` on `B + B` (both in
    /// canonical order).
    pub fn apply_patch(&self, pattern: &[Symbol]) -> Vec<Symbol> {
        let a = self.alphabet.size;
        self.patch_taps
            .iter()
            .map(|taps| {
                let idx = taps
                    .iter()
                    .fold(0usize, |acc, &t| acc * a + pattern[t] as usize);
                self.table[idx]
            })
            .collect()
    }

    /// Same map expressed on a larger neighborhood.
    pub fn pad_to(&self, nbhd: &Neighborhood) -> Result<Self> {
        if !self.nbhd.is_subset_of(nbhd) {
            return Err(Error::Neighborhood(
                "target neighborhood must contain the rule's neighborhood".into(),
            ));
        }
        let positions: Vec<usize> = self
            .nbhd
            .offsets()
            .iter()
            .map(|p| nbhd.index_of(p).expect("subset"))
            .collect();
        LocalRule::from_fn(self.alphabet.clone(), nbhd.clone(), |digits| {
            let sub: Vec<Symbol> = positions.iter().map(|&i| digits[i]).collect();
            self.apply_local(&sub)
        })
    }

    /// Sort key matching the canonical table encoding `Σ table[k] A^k`.
    pub fn canonical_key(&self) -> Vec<Symbol> {
        self.table.iter().rev().copied().collect()
    }

    pub fn to_document(&self) -> RuleDocument {
        RuleDocument {
            dimension: self.dim(),
            alphabet: self.alphabet.size,
            offsets: self.nbhd.offsets().iter().map(|p| p.0.clone()).collect(),
            table: self.table.iter().map(|&s| s as u32).collect(),
            meta: Some(RuleMeta {
                name: None,
                wolfram: self.to_wolfram().map(u32::from),
            }),
        }
    }

    pub fn from_document(doc: &RuleDocument) -> Result<Self> {
        let alphabet = Alphabet::new(doc.alphabet)?;
        let offsets: Vec<Point> = doc.offsets.iter().cloned().map(Point).collect();
        let table = doc
            .table
            .iter()
            .map(|&s| {
                Symbol::try_from(s)
                    .map_err(|_| Error::Rule(format!("table entry {s} outside alphabet")))
            })
            .collect::<Result<Vec<_>>>()?;
        LocalRule::from_raw(alphabet, doc.dimension, &offsets, table)
    }
}

/// On-disk rule format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleDocument {
    pub dimension: usize,
    pub alphabet: usize,
    pub offsets: Vec<Vec<i64>>,
    pub table: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<RuleMeta>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wolfram: Option<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wolfram_184_table() {
        let r = LocalRule::from_wolfram(184).unwrap();
        let by_k_desc: Vec<Symbol> = (0..8).rev().map(|k| r.table()[k]).collect();
        assert_eq!(by_k_desc, vec![1, 0, 1, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn wolfram_204_is_identity_and_150_is_parity() {
        let id = LocalRule::from_wolfram(204).unwrap();
        let parity = LocalRule::from_wolfram(150).unwrap();
        for k in 0..8 {
            let p = decode(2, k, 3);
            assert_eq!(id.apply_local(&p), p[1]);
            assert_eq!(parity.apply_local(&p), p[0] ^ p[1] ^ p[2]);
        }
        assert_eq!(parity.apply_local(&[1, 1, 1]), 1);
    }

    #[test]
    fn apply_local_reads_bit_k() {
        let r = LocalRule::from_wolfram(184).unwrap();
        // k = 6 and bit 6 of 184 = 0b1011_1000 is clear
        assert_eq!(r.apply_local(&[1, 1, 0]), 0);
        assert_eq!(r.apply_local(&[1, 0, 0]), 1);
    }

    #[test]
    fn wolfram_range() {
        assert!(matches!(
            LocalRule::from_wolfram(256),
            Err(Error::WolframRange(256))
        ));
        for n in 0..=255u32 {
            assert_eq!(
                LocalRule::from_wolfram(n).unwrap().to_wolfram(),
                Some(n as u8)
            );
        }
    }

    #[test]
    fn apply_patch_identity_and_184() {
        let id = LocalRule::from_wolfram(204).unwrap();
        assert_eq!(id.apply_patch(&[1, 0, 1, 1, 0]), vec![0, 1, 1]);
        let r = LocalRule::from_wolfram(184).unwrap();
        // sliding window over (a_{-2}, ..., a_2) = (0,1,0,0,0)
        assert_eq!(r.apply_patch(&[0, 1, 0, 0, 0]), vec![0, 1, 0]);
        assert_eq!(r.apply_patch(&[0; 5]), vec![0, 0, 0]);
    }

    #[test]
    fn wrong_table_length_rejected() {
        let doc = RuleDocument {
            dimension: 1,
            alphabet: 2,
            offsets: vec![vec![-1], vec![0], vec![1]],
            table: vec![0; 7],
            meta: None,
        };
        assert!(LocalRule::from_document(&doc).is_err());
    }

    #[test]
    fn raw_offsets_are_padded() {
        // f(a_0, a_1) = a_1 on {0, 1} is the left shift
        let r = LocalRule::from_raw(
            Alphabet::binary(),
            1,
            &[Point::at(1), Point::at(0)],
            vec![0, 0, 1, 1],
        )
        .unwrap();
        // sorted offsets [0, 1]; table[2*a0 + a1]: (0,0)->0 (0,1)->0 (1,0)->1 (1,1)->1
        // so f = a_0 on the sorted reading
        assert_eq!(r.nbhd(), &Neighborhood::interval(1));
        assert_eq!(r.to_wolfram(), Some(204));
        let shift = LocalRule::from_raw(
            Alphabet::binary(),
            1,
            &[Point::at(0), Point::at(1)],
            vec![0, 1, 0, 1],
        )
        .unwrap();
        assert_eq!(shift.to_wolfram(), Some(170));
    }

    #[test]
    fn shifts_are_170_and_240() {
        assert_eq!(
            LocalRule::shift(1, Alphabet::binary()).unwrap().to_wolfram(),
            Some(170)
        );
        assert_eq!(
            LocalRule::shift(-1, Alphabet::binary()).unwrap().to_wolfram(),
            Some(240)
        );
    }

    #[test]
    fn document_roundtrip() {
        let r = LocalRule::from_wolfram(110).unwrap();
        let json = serde_json::to_string(&r.to_document()).unwrap();
        let back: RuleDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(LocalRule::from_document(&back).unwrap(), r);
        assert_eq!(back.meta.unwrap().wolfram, Some(110));
    }
}
