//! Brute force on finite tori `(Z/M_1) x … x (Z/M_D)`.
//!
//! When every modulus exceeds the extent of `B + B`, a quantity is conserved
//! on `Z^D` exactly when it is conserved by the induced map on the torus, so
//! these sweeps serve as an independent oracle for the pattern-level test.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Symbol, TorusConfig};
use crate::linalg::bareiss_rank;
use crate::quantity::Quantity;
use crate::rules::LocalRule;

pub const DEFAULT_TORUS_CAP: u128 = 1 << 24;
const CHUNK: usize = 1 << 12;

#[derive(Clone, Copy, Debug)]
pub enum TorusMode {
    /// Every configuration, refusing if there are more than `cap`.
    Exhaustive { cap: u128 },
    /// `n` uniformly random configurations from a seeded generator.
    Sampled { n: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct TorusReport {
    pub conserved: bool,
    pub checked: u64,
    pub counterexample: Option<TorusConfig>,
}

/// Flat neighbor indices: `cells[site * |B| + j]` is the site at offset
/// `b_j` from `site`.
struct Stencil {
    width: usize,
    cells: Vec<usize>,
    size: usize,
}

impl Stencil {
    fn new(rule: &LocalRule, moduli: &[usize]) -> Result<Self> {
        let probe = TorusConfig::uniform(moduli.to_vec(), 0)?;
        let size = probe.len();
        let offsets = rule.nbhd().offsets();
        let mut cells = Vec::with_capacity(size * offsets.len());
        for i in 0..size {
            let x = probe.point_of(i);
            for b in offsets {
                cells.push(probe.index_of(&x.add(b)));
            }
        }
        Ok(Stencil {
            width: offsets.len(),
            cells,
            size,
        })
    }

    #[inline]
    fn image(&self, rule: &LocalRule, a: &[Symbol], out: &mut [Symbol]) {
        let base = rule.alphabet_size();
        let table = rule.table();
        for (site, o) in out.iter_mut().enumerate() {
            let nbrs = &self.cells[site * self.width..(site + 1) * self.width];
            let idx = nbrs.iter().fold(0usize, |acc, &j| acc * base + a[j] as usize);
            *o = table[idx];
        }
    }
}

fn config_count(alphabet: usize, size: usize) -> Option<u128> {
    (alphabet as u128).checked_pow(size as u32)
}

/// Fills `cells` with the base-`A` digits of `index` (last cell fastest).
fn decode_into(alphabet: usize, mut index: u128, cells: &mut [Symbol]) {
    for c in cells.iter_mut().rev() {
        *c = (index % alphabet as u128) as Symbol;
        index /= alphabet as u128;
    }
}

fn increment(alphabet: usize, cells: &mut [Symbol]) {
    for c in cells.iter_mut().rev() {
        if (*c as usize) + 1 < alphabet {
            *c += 1;
            return;
        }
        *c = 0;
    }
}

/// Runs `visit` on every configuration of the torus (in index order within
/// each chunk) and returns the first hit in global index order.
fn sweep<T: Send>(
    alphabet: usize,
    size: usize,
    total: u128,
    visit: impl Fn(&[Symbol]) -> Option<T> + Sync,
) -> Option<T> {
    let chunks = total.div_ceil(CHUNK as u128) as usize;
    (0..chunks).into_par_iter().find_map_first(|k| {
        let start = k as u128 * CHUNK as u128;
        let end = (start + CHUNK as u128).min(total);
        let mut cells = vec![0 as Symbol; size];
        decode_into(alphabet, start, &mut cells);
        for _ in start..end {
            if let Some(t) = visit(&cells) {
                return Some(t);
            }
            increment(alphabet, &mut cells);
        }
        None
    })
}

/// One step of the rule preserves `Σφ` on the torus for all (or `n` sampled)
/// configurations.
pub fn torus_conserved(
    rule: &LocalRule,
    phi: &Quantity,
    moduli: &[usize],
    mode: TorusMode,
) -> Result<TorusReport> {
    TorusConfig::validate_for(moduli, rule.nbhd())?;
    let a = rule.alphabet_size();
    if phi.alphabet_size() != a {
        return Err(Error::Quantity("quantity and rule alphabets differ".into()));
    }
    let scaled = phi
        .scaled_integers()
        .ok_or_else(|| Error::Unsupported("quantity values exceed 128-bit range".into()))?;
    let stencil = Stencil::new(rule, moduli)?;
    let size = stencil.size;
    let violates = |cells: &[Symbol], image: &mut [Symbol]| -> bool {
        stencil.image(rule, cells, image);
        (0..scaled.comps).any(|k| {
            let before: i128 = cells.iter().map(|&s| scaled.get(s, k)).sum();
            let after: i128 = image.iter().map(|&s| scaled.get(s, k)).sum();
            !scaled.is_zero(after - before)
        })
    };
    let (hit, checked) = match mode {
        TorusMode::Exhaustive { cap } => {
            let total = config_count(a, size)
                .filter(|&t| t <= cap)
                .ok_or_else(|| Error::CapExceeded {
                    needed: format!("{a}^{size}"),
                    cap,
                })?;
            let hit = sweep(a, size, total, |cells| {
                let mut image = vec![0; size];
                violates(cells, &mut image).then(|| cells.to_vec())
            });
            (hit, total as u64)
        }
        TorusMode::Sampled { n, seed } => {
            let hit = (0..n).into_par_iter().find_map_first(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let cells: Vec<Symbol> = (0..size).map(|_| rng.gen_range(0..a) as Symbol).collect();
                let mut image = vec![0; size];
                violates(&cells, &mut image).then_some(cells)
            });
            (hit, n as u64)
        }
    };
    Ok(TorusReport {
        conserved: hit.is_none(),
        checked,
        counterexample: hit
            .map(|cells| TorusConfig::new(moduli.to_vec(), cells))
            .transpose()?,
    })
}

/// Dimension over `Q` of `{φ : Σφ is invariant on every listed torus}`,
/// from the symbol-count differences `count(F̃x) - count(x)` of every torus
/// configuration, ranked by fraction-free elimination.
pub fn torus_invariant_dimension(rule: &LocalRule, tori: &[Vec<usize>], cap: u128) -> Result<usize> {
    let a = rule.alphabet_size();
    let mut rows: BTreeSet<Vec<i64>> = BTreeSet::new();
    for moduli in tori {
        TorusConfig::validate_for(moduli, rule.nbhd())?;
        let stencil = Stencil::new(rule, moduli)?;
        let size = stencil.size;
        let total = config_count(a, size)
            .filter(|&t| t <= cap)
            .ok_or_else(|| Error::CapExceeded {
                needed: format!("{a}^{size}"),
                cap,
            })?;
        let chunks = total.div_ceil(CHUNK as u128) as usize;
        let found: BTreeSet<Vec<i64>> = (0..chunks)
            .into_par_iter()
            .fold(BTreeSet::new, |mut set, k| {
                let start = k as u128 * CHUNK as u128;
                let end = (start + CHUNK as u128).min(total);
                let mut cells = vec![0 as Symbol; size];
                let mut image = vec![0 as Symbol; size];
                decode_into(a, start, &mut cells);
                for _ in start..end {
                    stencil.image(rule, &cells, &mut image);
                    let mut row = vec![0i64; a];
                    for (&x, &y) in cells.iter().zip(&image) {
                        row[y as usize] += 1;
                        row[x as usize] -= 1;
                    }
                    if row.iter().any(|&v| v != 0) {
                        set.insert(row);
                    }
                    increment(a, &mut cells);
                }
                set
            })
            .reduce(BTreeSet::new, |mut x, y| {
                x.extend(y);
                x
            });
        rows.extend(found);
    }
    let matrix: Vec<Vec<BigInt>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(BigInt::from).collect())
        .collect();
    Ok(a - bareiss_rank(&matrix, a))
}

/// Random torus configuration, for property tests and the CLI.
pub fn random_torus(moduli: &[usize], alphabet: usize, rng: &mut impl Rng) -> Result<TorusConfig> {
    let size: usize = moduli.iter().product();
    let cells = (0..size).map(|_| rng.gen_range(0..alphabet) as Symbol).collect();
    TorusConfig::new(moduli.to_vec(), cells)
}
