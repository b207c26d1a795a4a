//! Single-site perturbation test over `B + B`.
//!
//! For patterns `a`, `c` on `B + B` that agree off the origin, a conserved
//! `φ` must satisfy `ΣφF(c) - ΣφF(a) = φ(c_O) - φ(a_O)` where the image sums
//! run over `B`. Enumeration goes context by context: the origin digit is
//! fixed to each symbol in turn and every other cell ranges freely.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::engine::{embed, step_finite};
use crate::error::{Error, Result};
use crate::lattice::{Configuration, Neighborhood, Pattern, Symbol};
use crate::quantity::{Quantity, ScaledQuantity, Value};
use crate::rules::{decode, pattern_count, LocalRule};

const PARALLEL_CONTEXTS: usize = 1 << 12;
const PRECOMPUTE_LIMIT: usize = 1 << 22;

/// Index arithmetic for patterns on `B + B` and their `|B|` sub-patterns.
#[derive(Clone, Debug)]
pub struct PatchGeometry {
    alphabet: usize,
    nbhd: Neighborhood,
    outer: Neighborhood,
    taps: Vec<Vec<usize>>,
    origin: usize,
    origin_weight: usize,
    center_weights: Vec<usize>,
    contexts: usize,
}

impl PatchGeometry {
    pub fn new(alphabet: usize, nbhd: &Neighborhood) -> Result<Self> {
        let outer = nbhd.double();
        let taps = nbhd
            .taps(nbhd.offsets(), &outer)
            .expect("B + B contains every v + b");
        let n = outer.len();
        let contexts = pattern_count(alphabet, n - 1).ok_or_else(|| {
            Error::Unsupported(format!("{alphabet}^{} patterns do not fit in memory", n))
        })?;
        pattern_count(alphabet, n).ok_or_else(|| {
            Error::Unsupported(format!("{alphabet}^{n} patterns do not fit in memory"))
        })?;
        let origin = outer.origin_index();
        let origin_weight = alphabet.pow((n - 1 - origin) as u32);
        let center_weights = taps
            .iter()
            .map(|t| {
                let k = t.iter().position(|&i| i == origin).expect("B is symmetric");
                alphabet.pow((t.len() - 1 - k) as u32)
            })
            .collect();
        Ok(PatchGeometry {
            alphabet,
            nbhd: nbhd.clone(),
            outer,
            taps,
            origin,
            origin_weight,
            center_weights,
            contexts,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn nbhd(&self) -> &Neighborhood {
        &self.nbhd
    }

    /// `B + B`.
    pub fn outer(&self) -> &Neighborhood {
        &self.outer
    }

    /// Number of patterns on `B + B` with the origin cell fixed.
    pub fn contexts(&self) -> usize {
        self.contexts
    }

    /// Index (over `B + B`) of context `ctx` with origin symbol `s`.
    pub fn pattern_index(&self, ctx: usize, s: Symbol) -> usize {
        let hi = ctx / self.origin_weight;
        let lo = ctx % self.origin_weight;
        (hi * self.alphabet + s as usize) * self.origin_weight + lo
    }

    pub fn decode_outer(&self, index: usize) -> Vec<Symbol> {
        decode(self.alphabet, index, self.outer.len())
    }

    pub fn origin_position(&self) -> usize {
        self.origin
    }

    /// Table indices `f`-inputs at every `v` in `B` for context `ctx` with
    /// origin symbol 0.
    pub fn base_indices(&self, ctx: usize, out: &mut [usize]) {
        let digits = self.decode_outer(self.pattern_index(ctx, 0));
        for (o, t) in out.iter_mut().zip(&self.taps) {
            *o = t
                .iter()
                .fold(0usize, |acc, &i| acc * self.alphabet + digits[i] as usize);
        }
    }

    /// Offset added to the table index at `v` when the origin symbol goes
    /// from 0 to 1.
    pub fn center_weights(&self) -> &[usize] {
        &self.center_weights
    }
}

/// Reusable checker for one `(A, B, φ)` triple across many tables.
pub struct FinitaryChecker {
    geom: PatchGeometry,
    phi: ScaledQuantity,
    base: Option<Vec<usize>>,
}

impl FinitaryChecker {
    pub fn new(alphabet: usize, nbhd: &Neighborhood, phi: &Quantity) -> Result<Self> {
        if phi.alphabet_size() != alphabet {
            return Err(Error::Quantity(format!(
                "quantity has {} values, alphabet has {alphabet}",
                phi.alphabet_size()
            )));
        }
        let phi = phi
            .scaled_integers()
            .ok_or_else(|| Error::Unsupported("quantity values exceed 128-bit range".into()))?;
        let geom = PatchGeometry::new(alphabet, nbhd)?;
        let width = nbhd.len();
        let base = (geom.contexts.saturating_mul(width) <= PRECOMPUTE_LIMIT).then(|| {
            let mut all = vec![0usize; geom.contexts * width];
            all.par_chunks_mut(width)
                .enumerate()
                .for_each(|(ctx, chunk)| geom.base_indices(ctx, chunk));
            all
        });
        Ok(FinitaryChecker { geom, phi, base })
    }

    pub fn geometry(&self) -> &PatchGeometry {
        &self.geom
    }

    pub fn scaled(&self) -> &ScaledQuantity {
        &self.phi
    }

    /// First violating `(context, origin symbol)` in enumeration order.
    pub fn first_violation(&self, table: &[Symbol]) -> Option<(usize, Symbol)> {
        let contexts = self.geom.contexts;
        if contexts >= PARALLEL_CONTEXTS {
            (0..contexts)
                .into_par_iter()
                .find_map_first(|ctx| self.check_context(table, ctx).map(|s| (ctx, s)))
        } else {
            (0..contexts).find_map(|ctx| self.check_context(table, ctx).map(|s| (ctx, s)))
        }
    }

    pub fn holds(&self, table: &[Symbol]) -> bool {
        self.first_violation(table).is_none()
    }

    fn check_context(&self, table: &[Symbol], ctx: usize) -> Option<Symbol> {
        let width = self.geom.nbhd.len();
        let mut local = [0usize; 64];
        let owned;
        let base: &[usize] = match &self.base {
            Some(all) => &all[ctx * width..(ctx + 1) * width],
            None if width <= local.len() => {
                self.geom.base_indices(ctx, &mut local[..width]);
                &local[..width]
            }
            None => {
                let mut v = vec![0usize; width];
                self.geom.base_indices(ctx, &mut v);
                owned = v;
                &owned
            }
        };
        let weights = &self.geom.center_weights;
        let comps = self.phi.comps;
        for k in 0..comps {
            let reference = self.delta(table, base, weights, 0, k);
            for s in 1..self.geom.alphabet as Symbol {
                let d = self.delta(table, base, weights, s, k);
                if !self.phi.is_zero(d - reference) {
                    return Some(s);
                }
            }
        }
        None
    }

    /// `Σ_v φ(F(a)_v) - φ(s)` with origin symbol `s`, component `k`.
    #[inline]
    fn delta(&self, table: &[Symbol], base: &[usize], weights: &[usize], s: Symbol, k: usize) -> i128 {
        let mut acc = -self.phi.get(s, k);
        for (b, w) in base.iter().zip(weights) {
            acc += self.phi.get(table[b + s as usize * w], k);
        }
        acc
    }
}

/// A finite configuration whose total changes in one step.
#[derive(Clone, Debug)]
pub struct Witness {
    pub initial: Configuration,
    pub image: Configuration,
    pub before: Value,
    pub after: Value,
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    /// `B + B`, the index set of `a` and `c`.
    pub window: Neighborhood,
    pub a: Vec<Symbol>,
    pub c: Vec<Symbol>,
    /// `ΣφF(c) - ΣφF(a)` over `B`.
    pub image_difference: Value,
    /// `φ(c_O) - φ(a_O)`.
    pub value_difference: Value,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug)]
pub struct FinitaryReport {
    pub holds: bool,
    /// `φ` has no vacuum state; the identity above is then taken as the
    /// definition of conservation.
    pub vacuum_empty: bool,
    pub counterexample: Option<Counterexample>,
}

pub fn finitary_holds(rule: &LocalRule, phi: &Quantity) -> Result<FinitaryReport> {
    let checker = FinitaryChecker::new(rule.alphabet_size(), rule.nbhd(), phi)?;
    let vacuum_empty = phi.vacuum_set().is_empty();
    let Some((ctx, s)) = checker.first_violation(rule.table()) else {
        return Ok(FinitaryReport {
            holds: true,
            vacuum_empty,
            counterexample: None,
        });
    };
    let geom = checker.geometry();
    let a = geom.decode_outer(geom.pattern_index(ctx, 0));
    let c = geom.decode_outer(geom.pattern_index(ctx, s));
    let image_difference = phi
        .total_symbols(&rule.apply_patch(&c))
        .sub(&phi.total_symbols(&rule.apply_patch(&a)));
    let value_difference = phi.value(s).sub(phi.value(0));
    let witness = finite_witness(rule, phi, geom.outer(), &a)
        .or_else(|| finite_witness(rule, phi, geom.outer(), &c));
    Ok(FinitaryReport {
        holds: false,
        vacuum_empty,
        counterexample: Some(Counterexample {
            window: geom.outer().clone(),
            a,
            c,
            image_difference,
            value_difference,
            witness,
        }),
    })
}

fn finite_witness(
    rule: &LocalRule,
    phi: &Quantity,
    window: &Neighborhood,
    symbols: &[Symbol],
) -> Option<Witness> {
    let pattern = Pattern::new(
        window
            .offsets()
            .iter()
            .cloned()
            .zip(symbols.iter().copied())
            .collect(),
    );
    let initial = embed(&pattern, phi).ok()?;
    let image = step_finite(rule, &initial).ok()?;
    let before = phi.total(&initial).ok()?;
    let after = phi.total(&image).ok()?;
    (before != after).then_some(Witness {
        initial,
        image,
        before,
        after,
    })
}

/// Deduplicated integer rows of the linear system in the unknowns
/// `φ(0), …, φ(A-1)`: for each context and origin symbol `s ≥ 1`, the row
/// `(n_s - e_s) - (n_0 - e_0)` where `n_s` counts image symbols over `B`.
pub fn constraint_rows(rule: &LocalRule) -> Result<Vec<Vec<i64>>> {
    let a = rule.alphabet_size();
    let geom = PatchGeometry::new(a, rule.nbhd())?;
    let width = rule.nbhd().len();
    let table = rule.table();
    let rows_for = |ctx: usize, set: &mut BTreeSet<Vec<i64>>| {
        let mut base = vec![0usize; width];
        geom.base_indices(ctx, &mut base);
        let counts = |s: usize| {
            let mut n = vec![0i64; a];
            for (b, w) in base.iter().zip(geom.center_weights()) {
                n[table[b + s * w] as usize] += 1;
            }
            n[s] -= 1;
            n
        };
        let n0 = counts(0);
        for s in 1..a {
            let row: Vec<i64> = counts(s).iter().zip(&n0).map(|(x, y)| x - y).collect();
            if row.iter().any(|&x| x != 0) {
                set.insert(row);
            }
        }
    };
    let set = if geom.contexts() >= PARALLEL_CONTEXTS {
        (0..geom.contexts())
            .into_par_iter()
            .fold(BTreeSet::new, |mut set, ctx| {
                rows_for(ctx, &mut set);
                set
            })
            .reduce(BTreeSet::new, |mut x, y| {
                x.extend(y);
                x
            })
    } else {
        let mut set = BTreeSet::new();
        for ctx in 0..geom.contexts() {
            rows_for(ctx, &mut set);
        }
        set
    };
    Ok(set.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Point;

    fn w(n: u32) -> LocalRule {
        LocalRule::from_wolfram(n).unwrap()
    }

    /// Direct evaluation over every pair of patterns, no index tricks.
    fn naive(rule: &LocalRule, phi: &Quantity) -> bool {
        let outer = rule.nbhd().double();
        let a = rule.alphabet_size();
        let n = outer.len();
        let o = outer.origin_index();
        (0..pattern_count(a, n).unwrap()).all(|p| {
            let pa = decode(a, p, n);
            (0..a as Symbol).all(|s| {
                let mut pc = pa.clone();
                pc[o] = s;
                let lhs = phi
                    .total_symbols(&rule.apply_patch(&pc))
                    .sub(&phi.total_symbols(&rule.apply_patch(&pa)));
                lhs == phi.value(s).sub(phi.value(pa[o]))
            })
        })
    }

    #[test]
    fn elementary_rules_match_naive_enumeration() {
        let id = Quantity::identity(2);
        let parity = Quantity::modular(2, &[0, 1]).unwrap();
        for n in 0..256 {
            let r = w(n);
            assert_eq!(finitary_holds(&r, &id).unwrap().holds, naive(&r, &id), "rule {n}");
            assert_eq!(
                finitary_holds(&r, &parity).unwrap().holds,
                naive(&r, &parity),
                "rule {n} mod 2"
            );
        }
    }

    #[test]
    fn known_verdicts() {
        let id = Quantity::identity(2);
        assert!(finitary_holds(&w(184), &id).unwrap().holds);
        assert!(!finitary_holds(&w(110), &id).unwrap().holds);
        let parity = Quantity::modular(2, &[0, 1]).unwrap();
        assert!(finitary_holds(&w(150), &parity).unwrap().holds);
    }

    #[test]
    fn rule_150_counterexample_has_finite_witness() {
        let id = Quantity::identity(2);
        let report = finitary_holds(&w(150), &id).unwrap();
        assert!(!report.holds);
        let cx = report.counterexample.unwrap();
        assert_eq!(cx.a, vec![0, 0, 0, 0, 0]);
        assert_eq!(cx.c, vec![0, 0, 1, 0, 0]);
        let wit = cx.witness.unwrap();
        assert_eq!(wit.before, Value::integer(1));
        assert_eq!(wit.after, Value::integer(3));
        assert_eq!(wit.initial, Configuration::from_word(0, 0, &[1]));
        assert_eq!(
            wit.image.support().points(),
            vec![Point::at(-1), Point::at(0), Point::at(1)]
        );
    }

    #[test]
    fn constant_quantity_always_conserved() {
        let ones = Quantity::from_ints(&[1, 1]).unwrap();
        for n in [0, 30, 90, 110, 255] {
            let report = finitary_holds(&w(n), &ones).unwrap();
            assert!(report.holds);
            assert!(report.vacuum_empty);
        }
    }

    #[test]
    fn constraint_rows_annihilate_constants() {
        // binary rows are multiples of (-1, 1): nothing left when id is conserved
        assert!(constraint_rows(&w(184)).unwrap().is_empty());
        let rows = constraint_rows(&w(110)).unwrap();
        assert!(!rows.is_empty());
        for r in &rows {
            assert_eq!(r[0] + r[1], 0);
        }
    }

    #[test]
    fn geometry_index_layout() {
        let g = PatchGeometry::new(2, &Neighborhood::interval(1)).unwrap();
        assert_eq!(g.contexts(), 16);
        // origin is the middle of five digits, weight 2^2
        assert_eq!(g.pattern_index(0, 1), 4);
        assert_eq!(g.pattern_index(0b1111, 1), 0b11111);
        assert_eq!(g.center_weights(), &[1, 2, 4]);
    }
}
