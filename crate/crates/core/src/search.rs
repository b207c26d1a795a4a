//! Enumeration of all local rules on a fixed neighborhood that conserve a
//! given quantity.
//!
//! Small rule spaces are scanned exhaustively with the uniform-sum filter in
//! front of the full pattern test. Larger ones are searched by backtracking
//! over table entries, checking each single-site constraint as soon as every
//! entry it reads is assigned.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::conservation::FinitaryChecker;
use crate::error::{Error, Result};
use crate::lattice::{Neighborhood, Symbol};
use crate::quantity::{Quantity, ScaledQuantity};
use crate::rules::{pattern_count, Alphabet, LocalRule};

/// Largest rule space scanned exhaustively unless overridden.
pub const DEFAULT_SEARCH_CAP: u128 = 1 << 24;

/// Environment variable overriding exhaustive-scan caps.
pub const CAP_ENV: &str = "CA_CONSERVE_CAP";

/// `CA_CONSERVE_CAP` if set and parseable, else `default`.
pub fn cap_from_env(default: u128) -> u128 {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(default)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    /// Exhaustive when the space fits under the cap, backtracking otherwise.
    Auto,
    Exhaustive,
    Backtracking,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub mode: SearchMode,
    /// Bound on the number of tables scanned exhaustively, and on the number
    /// of rules returned by backtracking.
    pub cap: u128,
    /// Worker threads; `None` uses the global pool.
    pub shards: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            mode: SearchMode::Auto,
            cap: DEFAULT_SEARCH_CAP,
            shards: None,
        }
    }
}

/// `A^{A^|B|}`, the number of rule tables.
pub fn rule_space_size(alphabet: usize, nbhd: &Neighborhood) -> BigUint {
    let entries = BigUint::from(alphabet).pow(nbhd.len() as u32);
    match entries.to_u32() {
        Some(e) => BigUint::from(alphabet).pow(e),
        // only reached for absurd neighborhoods; any cap is exceeded
        None => BigUint::from(u128::MAX) + 1u32,
    }
}

fn table_len(alphabet: usize, nbhd: &Neighborhood) -> Result<usize> {
    pattern_count(alphabet, nbhd.len())
        .ok_or_else(|| Error::Unsupported("rule table too large".into()))
}

fn check_alphabet(alphabet: &Alphabet, phi: &Quantity) -> Result<()> {
    if phi.alphabet_size() != alphabet.size() {
        return Err(Error::Quantity(format!(
            "quantity has {} values, alphabet has {}",
            phi.alphabet_size(),
            alphabet.size()
        )));
    }
    Ok(())
}

fn with_pool<T: Send>(shards: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match shards {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Smallest prefix length giving at least `4 * threads` shards.
fn prefix_len(alphabet: usize, entries: usize) -> usize {
    let want = 4 * rayon::current_num_threads().max(1);
    let mut k = 0;
    let mut shards = 1usize;
    while k < entries && shards < want {
        k += 1;
        shards *= alphabet;
    }
    k
}

/// The uniform-sum identity evaluated on raw tables.
struct SumFilter {
    phi: ScaledQuantity,
    expected: Vec<i128>,
}

impl SumFilter {
    fn new(alphabet: usize, width: usize, phi: &ScaledQuantity) -> Self {
        let weight = (alphabet as i128).pow(width as u32 - 1);
        let expected = (0..phi.comps)
            .map(|k| weight * (0..alphabet).map(|s| phi.get(s as Symbol, k)).sum::<i128>())
            .collect();
        SumFilter {
            phi: phi.clone(),
            expected,
        }
    }

    fn passes(&self, table: &[Symbol]) -> bool {
        (0..self.phi.comps).all(|k| {
            let sum: i128 = table.iter().map(|&s| self.phi.get(s, k)).sum();
            self.phi.is_zero(sum - self.expected[k])
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PrefilterStats {
    pub total: u64,
    pub passed_filter: u64,
    pub conserving: u64,
    /// Conserving tables the filter rejected; nonzero would mean the filter
    /// is unsound.
    pub conserving_rejected: u64,
}

#[derive(Default)]
struct Counters {
    total: AtomicU64,
    passed: AtomicU64,
    conserving: AtomicU64,
    rejected: AtomicU64,
}

/// Scans every table with prefix-sharded workers. With `stats` the full
/// test also runs on tables the filter rejects.
fn scan(
    alphabet: usize,
    nbhd: &Neighborhood,
    phi: &Quantity,
    cap: u128,
    stats: bool,
) -> Result<(Vec<Vec<Symbol>>, PrefilterStats)> {
    let size = rule_space_size(alphabet, nbhd);
    if size > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            needed: size.to_string(),
            cap,
        });
    }
    let n = table_len(alphabet, nbhd)?;
    let checker = FinitaryChecker::new(alphabet, nbhd, phi)?;
    let filter = SumFilter::new(alphabet, nbhd.len(), checker.scaled());
    // shard on the most significant entries, table[n-k..n]
    let k = prefix_len(alphabet, n);
    let shards = alphabet.pow(k as u32);
    let inner = alphabet.pow((n - k) as u32);
    let counters = Counters::default();
    let found: Vec<Vec<Vec<Symbol>>> = (0..shards)
        .into_par_iter()
        .map(|prefix| {
            let mut table = vec![0 as Symbol; n];
            let mut p = prefix;
            for slot in table[n - k..].iter_mut() {
                *slot = (p % alphabet) as Symbol;
                p /= alphabet;
            }
            let mut hits = Vec::new();
            let (mut total, mut passed, mut conserving, mut rejected) = (0, 0, 0, 0);
            for step in 0..inner {
                if step > 0 {
                    // odometer on table[0..n-k], lowest entry fastest
                    for slot in table[..n - k].iter_mut() {
                        *slot += 1;
                        if (*slot as usize) < alphabet {
                            break;
                        }
                        *slot = 0;
                    }
                }
                total += 1;
                let pass = filter.passes(&table);
                if pass {
                    passed += 1;
                }
                if (pass || stats) && checker.holds(&table) {
                    conserving += 1;
                    if pass {
                        hits.push(table.clone());
                    } else {
                        rejected += 1;
                    }
                }
            }
            counters.total.fetch_add(total, Ordering::Relaxed);
            counters.passed.fetch_add(passed, Ordering::Relaxed);
            counters.conserving.fetch_add(conserving, Ordering::Relaxed);
            counters.rejected.fetch_add(rejected, Ordering::Relaxed);
            hits
        })
        .collect();
    let stats = PrefilterStats {
        total: counters.total.into_inner(),
        passed_filter: counters.passed.into_inner(),
        conserving: counters.conserving.into_inner(),
        conserving_rejected: counters.rejected.into_inner(),
    };
    Ok((found.into_iter().flatten().collect(), stats))
}

/// One single-site constraint with shared entries cancelled:
/// `Σ φ(t[plus]) - Σ φ(t[minus]) = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Constraint {
    plus: Vec<usize>,
    minus: Vec<usize>,
    rhs: Vec<i128>,
}

impl Constraint {
    fn last_entry(&self) -> Option<usize> {
        self.plus.iter().chain(&self.minus).max().copied()
    }

    fn holds(&self, table: &[Symbol], phi: &ScaledQuantity) -> bool {
        self.rhs.iter().enumerate().all(|(k, &r)| {
            let p: i128 = self.plus.iter().map(|&i| phi.get(table[i], k)).sum();
            let m: i128 = self.minus.iter().map(|&i| phi.get(table[i], k)).sum();
            phi.is_zero(p - m - r)
        })
    }
}

struct Backtracker {
    alphabet: usize,
    entries: usize,
    phi: ScaledQuantity,
    /// constraints grouped by the highest table entry they read
    buckets: Vec<Vec<Constraint>>,
    infeasible: bool,
}

impl Backtracker {
    fn new(alphabet: usize, nbhd: &Neighborhood, phi: &Quantity) -> Result<Self> {
        let checker = FinitaryChecker::new(alphabet, nbhd, phi)?;
        let geom = checker.geometry();
        let scaled = checker.scaled().clone();
        let entries = table_len(alphabet, nbhd)?;
        let width = nbhd.len();
        let weights = geom.center_weights();
        let mut set = BTreeSet::new();
        let mut base = vec![0usize; width];
        for ctx in 0..geom.contexts() {
            geom.base_indices(ctx, &mut base);
            for s in 1..alphabet {
                let mut plus: Vec<usize> = base.iter().zip(weights).map(|(b, w)| b + s * w).collect();
                let mut minus = base.clone();
                plus.sort_unstable();
                minus.sort_unstable();
                let (plus, minus) = cancel(&plus, &minus);
                let rhs = (0..scaled.comps)
                    .map(|k| scaled.get(s as Symbol, k) - scaled.get(0, k))
                    .collect();
                set.insert(Constraint { plus, minus, rhs });
            }
        }
        let mut buckets = vec![Vec::new(); entries];
        let mut infeasible = false;
        for c in set {
            match c.last_entry() {
                Some(i) => buckets[i].push(c),
                None => infeasible |= !c.rhs.iter().all(|&r| scaled.is_zero(r)),
            }
        }
        Ok(Backtracker {
            alphabet,
            entries,
            phi: scaled,
            buckets,
            infeasible,
        })
    }

    fn consistent(&self, table: &[Symbol], i: usize) -> bool {
        self.buckets[i].iter().all(|c| c.holds(table, &self.phi))
    }

    fn descend(&self, table: &mut [Symbol], i: usize, out: &mut Vec<Vec<Symbol>>, cap: u128) -> Result<()> {
        if i == self.entries {
            out.push(table.to_vec());
            if out.len() as u128 > cap {
                return Err(Error::CapExceeded {
                    needed: format!("more than {cap} rules"),
                    cap,
                });
            }
            return Ok(());
        }
        for s in 0..self.alphabet {
            table[i] = s as Symbol;
            if self.consistent(table, i) {
                self.descend(table, i + 1, out, cap)?;
            }
        }
        table[i] = 0;
        Ok(())
    }

    fn run(&self, cap: u128) -> Result<Vec<Vec<Symbol>>> {
        if self.infeasible {
            return Ok(Vec::new());
        }
        let k = prefix_len(self.alphabet, self.entries);
        let shards = self.alphabet.pow(k as u32);
        let parts = (0..shards)
            .into_par_iter()
            .map(|prefix| {
                let mut table = vec![0 as Symbol; self.entries];
                let mut p = prefix;
                for i in (0..k).rev() {
                    table[i] = (p % self.alphabet) as Symbol;
                    p /= self.alphabet;
                }
                let mut out = Vec::new();
                if (0..k).all(|i| self.consistent(&table, i)) {
                    self.descend(&mut table, k, &mut out, cap)?;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let all: Vec<Vec<Symbol>> = parts.into_iter().flatten().collect();
        if all.len() as u128 > cap {
            return Err(Error::CapExceeded {
                needed: all.len().to_string(),
                cap,
            });
        }
        Ok(all)
    }
}

/// Removes entries common to both sorted lists.
fn cancel(plus: &[usize], minus: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let (mut p, mut m) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < plus.len() && j < minus.len() {
        match plus[i].cmp(&minus[j]) {
            std::cmp::Ordering::Less => {
                p.push(plus[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                m.push(minus[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    p.extend_from_slice(&plus[i..]);
    m.extend_from_slice(&minus[j..]);
    (p, m)
}

fn into_rules(alphabet: &Alphabet, nbhd: &Neighborhood, tables: Vec<Vec<Symbol>>) -> Result<Vec<LocalRule>> {
    let mut rules = tables
        .into_iter()
        .map(|t| LocalRule::new(alphabet.clone(), nbhd.clone(), t))
        .collect::<Result<Vec<_>>>()?;
    rules.sort_by_key(|r| r.canonical_key());
    Ok(rules)
}

/// Every rule on `nbhd` conserving `φ`, sorted by canonical table encoding.
pub fn enumerate_conserving(
    alphabet: &Alphabet,
    nbhd: &Neighborhood,
    phi: &Quantity,
    options: &SearchOptions,
) -> Result<Vec<LocalRule>> {
    check_alphabet(alphabet, phi)?;
    let a = alphabet.size();
    let fits = rule_space_size(a, nbhd) <= BigUint::from(options.cap);
    let exhaustive = match options.mode {
        SearchMode::Exhaustive => true,
        SearchMode::Backtracking => false,
        SearchMode::Auto => fits,
    };
    log::info!(
        "searching {} rules on |B| = {} ({})",
        rule_space_size(a, nbhd),
        nbhd.len(),
        if exhaustive { "exhaustive" } else { "backtracking" }
    );
    let tables = with_pool(options.shards, || {
        if exhaustive {
            scan(a, nbhd, phi, options.cap, false).map(|(t, _)| t)
        } else {
            Backtracker::new(a, nbhd, phi)?.run(options.cap)
        }
    })??;
    into_rules(alphabet, nbhd, tables)
}

/// Filter and full-test counts over the whole rule space.
pub fn prefilter_stats(
    alphabet: &Alphabet,
    nbhd: &Neighborhood,
    phi: &Quantity,
    cap: u128,
) -> Result<PrefilterStats> {
    check_alphabet(alphabet, phi)?;
    scan(alphabet.size(), nbhd, phi, cap, true).map(|(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conservation::{finitary_holds, torus_conserved, TorusMode};
    use crate::lattice::Point;

    fn wolfram(rules: &[LocalRule]) -> Vec<u8> {
        rules.iter().map(|r| r.to_wolfram().unwrap()).collect()
    }

    fn run(phi: &Quantity, nbhd: &Neighborhood, mode: SearchMode) -> Vec<LocalRule> {
        let alphabet = Alphabet::new(phi.alphabet_size()).unwrap();
        let opts = SearchOptions {
            mode,
            ..SearchOptions::default()
        };
        enumerate_conserving(&alphabet, nbhd, phi, &opts).unwrap()
    }

    #[test]
    fn five_elementary_particle_rules() {
        let id = Quantity::identity(2);
        let found = run(&id, &Neighborhood::interval(1), SearchMode::Exhaustive);
        assert_eq!(wolfram(&found), vec![170, 184, 204, 226, 240]);
        let bt = run(&id, &Neighborhood::interval(1), SearchMode::Backtracking);
        assert_eq!(found, bt);
    }

    #[test]
    fn single_cell_neighborhood() {
        let id = Quantity::identity(2);
        let single = Neighborhood::new(1, vec![Point::at(0)]).unwrap();
        let found = run(&id, &single, SearchMode::Auto);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].table(), &[0, 1]);
        let stats = prefilter_stats(&Alphabet::binary(), &single, &id, 16).unwrap();
        // tables 00, 01, 10, 11: sums 0, 1, 1, 2 against 1
        assert_eq!(stats.total, 4);
        assert_eq!(stats.passed_filter, 2);
        assert_eq!(stats.conserving, 1);
    }

    #[test]
    fn parity_rules_contain_known_examples() {
        let parity = Quantity::modular(2, &[0, 1]).unwrap();
        let found = run(&parity, &Neighborhood::interval(1), SearchMode::Exhaustive);
        let numbers = wolfram(&found);
        for n in [150, 204, 170, 240, 184, 226] {
            assert!(numbers.contains(&n), "{n}");
        }
        let oracle: Vec<u8> = (0..=255u32)
            .filter(|&n| finitary_holds(&LocalRule::from_wolfram(n).unwrap(), &parity).unwrap().holds)
            .map(|n| n as u8)
            .collect();
        assert_eq!(numbers, oracle);
        assert_eq!(found, run(&parity, &Neighborhood::interval(1), SearchMode::Backtracking));
    }

    #[test]
    fn filter_is_sound_and_strict() {
        let id = Quantity::identity(2);
        let stats = prefilter_stats(&Alphabet::binary(), &Neighborhood::interval(1), &id, 1 << 10).unwrap();
        assert_eq!(stats.total, 256);
        assert_eq!(stats.conserving, 5);
        assert_eq!(stats.conserving_rejected, 0);
        // tables with exactly four ones
        assert_eq!(stats.passed_filter, 70);
        let zero = Quantity::from_ints(&[0, 0]).unwrap();
        let stats = prefilter_stats(&Alphabet::binary(), &Neighborhood::interval(1), &zero, 1 << 10).unwrap();
        assert_eq!(stats.passed_filter, 256);
        assert_eq!(stats.conserving, 256);
    }

    #[test]
    fn ternary_single_cell_modes_agree() {
        let single = Neighborhood::new(1, vec![Point::at(0)]).unwrap();
        for values in [[0, 1, 1], [0, 1, 2], [0, 0, 1]] {
            let phi = Quantity::from_ints(&values).unwrap();
            let ex = run(&phi, &single, SearchMode::Exhaustive);
            assert_eq!(ex, run(&phi, &single, SearchMode::Backtracking));
            for r in &ex {
                assert!(finitary_holds(r, &phi).unwrap().holds);
            }
        }
    }

    #[test]
    fn found_rules_pass_torus_check() {
        let phi = Quantity::from_ints(&[0, 2]).unwrap();
        for r in run(&phi, &Neighborhood::interval(1), SearchMode::Auto) {
            let rep = torus_conserved(&r, &phi, &[6], TorusMode::Sampled { n: 200, seed: 9 }).unwrap();
            assert!(rep.conserved);
        }
    }

    #[test]
    fn caps_are_enforced() {
        let id = Quantity::identity(2);
        let opts = SearchOptions {
            mode: SearchMode::Exhaustive,
            cap: 100,
            shards: Some(2),
        };
        assert!(matches!(
            enumerate_conserving(&Alphabet::binary(), &Neighborhood::interval(1), &id, &opts),
            Err(Error::CapExceeded { .. })
        ));
        let zero = Quantity::from_ints(&[0, 0]).unwrap();
        let opts = SearchOptions {
            mode: SearchMode::Backtracking,
            cap: 10,
            shards: None,
        };
        assert!(enumerate_conserving(&Alphabet::binary(), &Neighborhood::interval(1), &zero, &opts).is_err());
    }

    #[test]
    fn alphabet_mismatch_rejected() {
        let phi = Quantity::identity(3);
        assert!(enumerate_conserving(&Alphabet::binary(), &Neighborhood::interval(1), &phi, &SearchOptions::default()).is_err());
    }
}
