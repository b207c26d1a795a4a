//! One-dimensional flux of a conserved particle count, particle
//! displacement rules built from it, and the reverse construction of rules
//! from a displacement table.
//!
//! Throughout, `B = [-r..r]`, `φ` takes values in `N` and is conserved.
//! The flux `I→_z(a)` across the bond `(z, z+1)` depends only on
//! `a|[z-r..z+r]`, so it is evaluated on the embedding of that word into
//! the designated vacuum and cached per word.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conservation::finitary_holds;
use crate::engine::image_at;
use crate::error::{Error, Result};
use crate::lattice::{Configuration, Neighborhood, Point, Sites, Symbol};
use crate::quantity::Quantity;
use crate::rules::{decode, encode, pattern_count, Alphabet, LocalRule};

fn radius_of(rule: &LocalRule) -> Result<usize> {
    rule.nbhd().interval_radius().ok_or(Error::NotOneDimensional)
}

/// `φ` as naturals, plus the designated vacuum.
fn particle_counts(phi: &Quantity) -> Result<(Vec<i64>, Symbol)> {
    let values = phi
        .natural_values()
        .ok_or_else(|| Error::Hypothesis("quantity must take values in N".into()))?;
    let vacuum = phi.designated_vacuum().ok_or(Error::EmptyVacuum)?;
    Ok((values, vacuum))
}

fn require_conserved(rule: &LocalRule, phi: &Quantity) -> Result<()> {
    if finitary_holds(rule, phi)?.holds {
        Ok(())
    } else {
        Err(Error::Hypothesis("quantity is not conserved by the rule".into()))
    }
}

fn word_at(a: &impl Sites, z: i64, r: usize) -> Vec<Symbol> {
    let r = r as i64;
    (z - r..=z + r).map(|y| a.symbol_at(&Point::at(y))).collect()
}

/// `Σ_{y=-r}^{0} φ(w_y) - Σ_{y=-2r}^{0} φ(b'_y)` where `b` is `w` on
/// `[-r..r]` and vacuum elsewhere. Further left `b'` sees only vacuum and
/// carries no mass.
fn local_flux(rule: &LocalRule, phi: &[i64], vacuum: Symbol, word: &[Symbol]) -> i64 {
    let r = (word.len() - 1) / 2;
    let a = rule.alphabet_size();
    let table = rule.table();
    // ext[i] is b at position i - 3r, for positions -3r..=r
    let mut ext = vec![vacuum; 4 * r + 1];
    ext[2 * r..].copy_from_slice(word);
    let before: i64 = word[..=r].iter().map(|&s| phi[s as usize]).sum();
    let after: i64 = (0..=2 * r)
        .map(|i| {
            let idx = ext[i..=i + 2 * r]
                .iter()
                .fold(0usize, |acc, &s| acc * a + s as usize);
            phi[table[idx] as usize]
        })
        .sum();
    before - after
}

/// Rightward flux across `(z, z+1)`.
pub fn flux_right(rule: &LocalRule, phi: &Quantity, a: &impl Sites, z: i64) -> Result<i64> {
    let r = radius_of(rule)?;
    let (values, vacuum) = particle_counts(phi)?;
    require_conserved(rule, phi)?;
    Ok(local_flux(rule, &values, vacuum, &word_at(a, z, r)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluxValue {
    /// `I→_z`
    pub right: i64,
    /// `I←_z = -I→_{z-1}`
    pub left: i64,
    /// `I↔_z = I←_z + I→_z`
    pub out: i64,
}

/// Flux per word of length `2r+1`.
#[derive(Clone, Debug)]
pub struct FluxTable {
    radius: usize,
    alphabet: usize,
    phi: Vec<i64>,
    values: Vec<i64>,
}

impl FluxTable {
    pub fn new(rule: &LocalRule, phi: &Quantity) -> Result<Self> {
        let r = radius_of(rule)?;
        let (values, vacuum) = particle_counts(phi)?;
        require_conserved(rule, phi)?;
        let a = rule.alphabet_size();
        let words = pattern_count(a, 2 * r + 1)
            .ok_or_else(|| Error::Unsupported("flux table too large".into()))?;
        let table: Vec<i64> = (0..words)
            .into_par_iter()
            .map(|i| local_flux(rule, &values, vacuum, &decode(a, i, 2 * r + 1)))
            .collect();
        Ok(FluxTable {
            radius: r,
            alphabet: a,
            phi: values,
            values: table,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn phi(&self) -> &[i64] {
        &self.phi
    }

    /// `I→_0` of a word on `[-r..r]`.
    pub fn of_word(&self, word: &[Symbol]) -> i64 {
        self.values[encode(self.alphabet, word)]
    }

    pub fn right(&self, a: &impl Sites, z: i64) -> i64 {
        self.of_word(&word_at(a, z, self.radius))
    }

    pub fn value(&self, a: &impl Sites, z: i64) -> FluxValue {
        let right = self.right(a, z);
        let left = -self.right(a, z - 1);
        FluxValue {
            right,
            left,
            out: left + right,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

impl Bound {
    fn new(lhs: i64, rhs: i64) -> Self {
        Bound {
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FluxIdentities {
    pub site: i64,
    pub flux: FluxValue,
    /// `φ(a'_z) - φ(a_z)`
    pub dt_phi: i64,
    /// `I↔_z = -∂_t φ_z`
    pub balance_holds: bool,
    /// `I→_z ≤ Σ_{z-r}^{z} φ(a_y)`
    pub bound_i: Bound,
    /// `I→_z ≤ Σ_{z}^{z+r} φ(a'_y)`
    pub bound_ii: Bound,
    /// `I←_z ≤ Σ_{z}^{z+r} φ(a_y)`
    pub bound_iii: Bound,
    /// `I←_z ≤ Σ_{z-r}^{z} φ(a'_y)`
    pub bound_iv: Bound,
    pub holds: bool,
}

pub fn flux_identities_check(
    rule: &LocalRule,
    phi: &Quantity,
    a: &impl Sites,
    z: i64,
) -> Result<FluxIdentities> {
    let table = FluxTable::new(rule, phi)?;
    Ok(identities_with(&table, rule, a, z))
}

/// Same as [`flux_identities_check`] with a prebuilt table.
pub fn identities_with(table: &FluxTable, rule: &LocalRule, a: &impl Sites, z: i64) -> FluxIdentities {
    let r = table.radius as i64;
    let phi = &table.phi;
    let now = |y: i64| phi[a.symbol_at(&Point::at(y)) as usize];
    let next = |y: i64| phi[image_at(rule, a, &Point::at(y)) as usize];
    let flux = table.value(a, z);
    let dt_phi = next(z) - now(z);
    let bound_i = Bound::new(flux.right, (z - r..=z).map(now).sum());
    let bound_ii = Bound::new(flux.right, (z..=z + r).map(next).sum());
    let bound_iii = Bound::new(flux.left, (z..=z + r).map(now).sum());
    let bound_iv = Bound::new(flux.left, (z - r..=z).map(next).sum());
    let balance_holds = flux.out == -dt_phi;
    let holds = balance_holds
        && bound_i.holds
        && bound_ii.holds
        && bound_iii.holds
        && bound_iv.holds;
    FluxIdentities {
        site: z,
        flux,
        dt_phi,
        balance_holds,
        bound_i,
        bound_ii,
        bound_iii,
        bound_iv,
        holds,
    }
}

/// `d: A^{[-2r..2r]} -> N^{[-r..r]}`: how many particles at the origin go
/// to each offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisplacementRule {
    radius: usize,
    alphabet: usize,
    counts: Vec<Vec<u64>>,
}

impl DisplacementRule {
    pub fn new(radius: usize, alphabet: usize, counts: Vec<Vec<u64>>) -> Result<Self> {
        let expected = pattern_count(alphabet, 4 * radius + 1)
            .ok_or_else(|| Error::Unsupported("displacement table too large".into()))?;
        if counts.len() != expected || counts.iter().any(|c| c.len() != 2 * radius + 1) {
            return Err(Error::Parse(format!(
                "displacement table needs {expected} rows of {} counts",
                2 * radius + 1
            )));
        }
        Ok(DisplacementRule {
            radius,
            alphabet,
            counts,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn patterns(&self) -> usize {
        self.counts.len()
    }

    /// Counts at offsets `-r..=r` for the pattern with this index.
    pub fn counts(&self, pattern: usize) -> &[u64] {
        &self.counts[pattern]
    }

    /// `d_{0->y}` for a pattern on `[-2r..2r]`.
    pub fn get(&self, pattern: &[Symbol], y: i64) -> u64 {
        self.counts[encode(self.alphabet, pattern)][(y + self.radius as i64) as usize]
    }

    /// `d_{x->x+y}(a)`.
    pub fn at(&self, a: &impl Sites, x: i64, y: i64) -> u64 {
        let r2 = 2 * self.radius as i64;
        let pattern: Vec<Symbol> = (x - r2..=x + r2).map(|p| a.symbol_at(&Point::at(p))).collect();
        self.get(&pattern, y)
    }

    pub fn set(&mut self, pattern: usize, y: i64, value: u64) {
        self.counts[pattern][(y + self.radius as i64) as usize] = value;
    }

    pub fn to_document(&self) -> PdrDocument {
        let r = self.radius as i64;
        let entries = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().any(|&x| x > 0))
            .map(|(i, c)| PdrEntry {
                pattern: decode(self.alphabet, i, 4 * self.radius + 1)
                    .into_iter()
                    .map(u32::from)
                    .collect(),
                d: c.iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0)
                    .map(|(k, &x)| ((k as i64 - r).to_string(), x))
                    .collect(),
            })
            .collect();
        PdrDocument {
            b: self.radius,
            alphabet: self.alphabet,
            entries,
        }
    }

    /// Patterns absent from the document have all counts zero.
    pub fn from_document(doc: &PdrDocument) -> Result<Self> {
        let r = doc.b;
        let n = pattern_count(doc.alphabet, 4 * r + 1)
            .ok_or_else(|| Error::Unsupported("displacement table too large".into()))?;
        let mut counts = vec![vec![0u64; 2 * r + 1]; n];
        for e in &doc.entries {
            if e.pattern.len() != 4 * r + 1 || e.pattern.iter().any(|&s| s as usize >= doc.alphabet) {
                return Err(Error::Parse(format!("bad pattern {:?}", e.pattern)));
            }
            let symbols: Vec<Symbol> = e.pattern.iter().map(|&s| s as Symbol).collect();
            let row = &mut counts[encode(doc.alphabet, &symbols)];
            for (k, &v) in &e.d {
                let y: i64 = k
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad offset {k:?}")))?;
                if y.unsigned_abs() as usize > r {
                    return Err(Error::Parse(format!("offset {y} outside [-{r}..{r}]")));
                }
                row[(y + r as i64) as usize] = v;
            }
        }
        DisplacementRule::new(r, doc.alphabet, counts)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdrEntry {
    pub pattern: Vec<u32>,
    pub d: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdrDocument {
    #[serde(rename = "B")]
    pub b: usize,
    pub alphabet: usize,
    pub entries: Vec<PdrEntry>,
}

/// Cumulative capacities `S(k) = Σ_{0<j≤k} φ(a'_{±j})` moving outward.
fn cumulative(caps: impl Iterator<Item = i64>) -> Vec<i64> {
    let mut out = vec![0];
    for c in caps {
        out.push(out.last().unwrap() + c);
    }
    out
}

/// Fills the particle slots `(lo, hi]` into destinations `1..=r` with
/// capacities given by `s` (cumulative, `s[0] = 0`).
fn fill(s: &[i64], lo: i64, hi: i64) -> Result<Vec<u64>> {
    if hi > *s.last().unwrap() {
        return Err(Error::Hypothesis(format!(
            "flux {hi} exceeds reachable capacity {}",
            s.last().unwrap()
        )));
    }
    Ok((1..s.len())
        .map(|k| (s[k].min(hi) - s[k - 1].max(lo)).max(0) as u64)
        .collect())
}

/// Displacements at the origin for one pattern on `[-2r..2r]`.
fn displacement(rule: &LocalRule, flux: &FluxTable, pattern: &[Symbol]) -> Result<Vec<u64>> {
    let r = flux.radius;
    let phi = &flux.phi;
    let image = rule.apply_patch(pattern);
    let ir = flux.of_word(&pattern[r..=3 * r]);
    let il = -flux.of_word(&pattern[r - 1..3 * r]);
    let here = phi[pattern[2 * r] as usize];
    let stay_cap = phi[image[r] as usize];
    let right = cumulative((1..=r).map(|k| phi[image[r + k] as usize]));
    let left = cumulative((1..=r).map(|k| phi[image[r - k] as usize]));
    let (to_left, to_right, stay) = if il <= 0 && ir <= 0 {
        (vec![0; r], vec![0; r], here)
    } else if il >= 0 && ir >= 0 {
        (fill(&left, 0, il)?, fill(&right, 0, ir)?, here - ir - il)
    } else if il <= 0 {
        let j1 = (-il - stay_cap).max(0);
        (vec![0; r], fill(&right, j1, ir)?, here - (ir - j1))
    } else {
        let j1 = (-ir - stay_cap).max(0);
        (fill(&left, j1, il)?, vec![0; r], here - (il - j1))
    };
    if stay < 0 {
        return Err(Error::Hypothesis(format!(
            "negative stay count {stay} for pattern {pattern:?}"
        )));
    }
    let mut out: Vec<u64> = to_left.into_iter().rev().collect();
    out.push(stay as u64);
    out.extend(to_right);
    Ok(out)
}

/// Displacement rule compatible with `rule` and `φ`, one pattern at a time
/// from the sign pattern of the two fluxes at the origin.
pub fn build_pdr(rule: &LocalRule, phi: &Quantity) -> Result<DisplacementRule> {
    let flux = FluxTable::new(rule, phi)?;
    let r = flux.radius;
    let a = rule.alphabet_size();
    let n = pattern_count(a, 4 * r + 1)
        .ok_or_else(|| Error::Unsupported("displacement table too large".into()))?;
    let counts = (0..n)
        .into_par_iter()
        .map(|i| displacement(rule, &flux, &decode(a, i, 4 * r + 1)))
        .collect::<Result<Vec<_>>>()?;
    DisplacementRule::new(r, a, counts)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PdrReport {
    pub patterns_checked: usize,
    pub c1_violations: usize,
    pub configurations_checked: usize,
    pub sites_checked: usize,
    pub c2_violations: usize,
    pub ledger_violations: usize,
    pub first_failure: Option<String>,
}

impl PdrReport {
    pub fn ok(&self) -> bool {
        self.c1_violations == 0
            && self.c2_violations == 0
            && self.ledger_violations == 0
    }

    fn note(&mut self, msg: impl FnOnce() -> String) {
        if self.first_failure.is_none() {
            self.first_failure = Some(msg());
        }
    }
}

/// Random configuration with support inside `[0, len)` over `vacuum`.
pub fn random_finite(rng: &mut impl Rng, alphabet: usize, vacuum: Symbol, max_len: usize) -> Configuration {
    let len = rng.gen_range(1..=max_len);
    let word: Vec<Symbol> = (0..len).map(|_| rng.gen_range(0..alphabet) as Symbol).collect();
    Configuration::from_word(vacuum, 0, &word)
}

/// Checks the outflow identity on every pattern, and on `trials` random
/// finite configurations the inflow identity at every affected site plus
/// the global mass ledger.
pub fn verify_pdr(
    rule: &LocalRule,
    phi: &Quantity,
    pdr: &DisplacementRule,
    trials: usize,
    seed: u64,
) -> Result<PdrReport> {
    let r = radius_of(rule)?;
    let (values, vacuum) = particle_counts(phi)?;
    if pdr.radius != r || pdr.alphabet != rule.alphabet_size() {
        return Err(Error::Parse("displacement rule does not match the rule's geometry".into()));
    }
    let a = rule.alphabet_size();
    let mut report = PdrReport::default();
    for i in 0..pdr.patterns() {
        let pattern = decode(a, i, 4 * r + 1);
        let total: u64 = pdr.counts(i).iter().sum();
        report.patterns_checked += 1;
        if total as i64 != values[pattern[2 * r] as usize] {
            report.c1_violations += 1;
            report.note(|| format!("outflow {total} != φ(a_0) for pattern {pattern:?}"));
        }
    }
    let ri = r as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let config = random_finite(&mut rng, a, vacuum, 6 * r + 6);
        report.configurations_checked += 1;
        let keys = config.overrides().keys();
        let lo = keys.clone().next().map_or(0, |p| p.0[0]);
        let hi = keys.last().map_or(0, |p| p.0[0]);
        let span = lo - 3 * ri..=hi + 3 * ri;

        let mut sent = 0i64;
        let mut received = 0i64;
        let mut mass = 0i64;
        let mut mass_after = 0i64;
        for x in span.clone() {
            let p = Point::at(x);
            mass += values[config.symbol_at(&p) as usize];
            let after = values[image_at(rule, &config, &p) as usize];
            mass_after += after;
            let inflow: i64 = (-ri..=ri).map(|v| pdr.at(&config, x - v, v) as i64).sum();
            sent += (-ri..=ri).map(|y| pdr.at(&config, x, y) as i64).sum::<i64>();
            received += inflow;
            report.sites_checked += 1;
            if inflow != after {
                report.c2_violations += 1;
                report.note(|| format!("inflow {inflow} != φ(a'_{x}) = {after} in {config:?}"));
            }
        }
        if sent != mass || received != mass_after {
            report.ledger_violations += 1;
            report.note(|| format!("ledger sent {sent}/{mass}, received {received}/{mass_after}"));
        }
    }
    Ok(report)
}

/// All rules compatible with a displacement rule: at each pattern the image
/// must carry `m = Σ_{x∈B} d_{x->0}` particles, any symbol of `φ^{-1}{m}`.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    alphabet: Alphabet,
    nbhd: Neighborhood,
    /// particle total per pattern on `nbhd`
    totals: Vec<i64>,
    /// symbols carrying each total
    classes: BTreeMap<i64, Vec<Symbol>>,
}

impl Reconstruction {
    pub fn nbhd(&self) -> &Neighborhood {
        &self.nbhd
    }

    pub fn totals(&self) -> &[i64] {
        &self.totals
    }

    /// Number of compatible rules on this neighborhood.
    pub fn count(&self) -> BigUint {
        self.totals
            .iter()
            .fold(BigUint::one(), |acc, m| acc * BigUint::from(self.classes[m].len()))
    }

    /// Patterns with more than one admissible image.
    pub fn free_patterns(&self) -> usize {
        self.totals.iter().filter(|m| self.classes[m].len() > 1).count()
    }

    /// Every compatible rule, refusing if there are more than `cap`.
    pub fn rules(&self, cap: u128) -> Result<Vec<LocalRule>> {
        let count = self.count();
        if count > BigUint::from(cap) {
            return Err(Error::CapExceeded {
                needed: count.to_string(),
                cap,
            });
        }
        let choices: Vec<&Vec<Symbol>> = self.totals.iter().map(|m| &self.classes[m]).collect();
        let mut digits = vec![0usize; choices.len()];
        let mut out = Vec::new();
        loop {
            let table = digits.iter().zip(&choices).map(|(&d, c)| c[d]).collect();
            out.push(LocalRule::new(self.alphabet.clone(), self.nbhd.clone(), table)?);
            let mut k = digits.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < choices[k].len() {
                    break;
                }
                digits[k] = 0;
            }
        }
    }
}

/// Inflow totals on `[-3r..3r]` patterns, narrowed to the smallest of
/// `[-r..r]`, `[-2r..2r]`, `[-3r..3r]` they depend on.
pub fn reconstruct(phi: &Quantity, pdr: &DisplacementRule) -> Result<Reconstruction> {
    let (values, _) = particle_counts(phi)?;
    let a = pdr.alphabet;
    if phi.alphabet_size() != a {
        return Err(Error::Quantity("quantity and displacement alphabets differ".into()));
    }
    let r = pdr.radius;
    let wide = 6 * r + 1;
    let n = pattern_count(a, wide)
        .ok_or_else(|| Error::Unsupported("reconstruction window too large".into()))?;
    let totals: Vec<i64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = decode(a, i, wide);
            // source x = 3r + v sends to the origin with displacement -v
            (0..=2 * r)
                .map(|k| {
                    let v = k as i64 - r as i64;
                    let center = (3 * r as i64 + v) as usize;
                    let window = &p[center - 2 * r..=center + 2 * r];
                    pdr.get(window, -v) as i64
                })
                .sum()
        })
        .collect();
    let mut classes: BTreeMap<i64, Vec<Symbol>> = BTreeMap::new();
    for (s, &v) in values.iter().enumerate() {
        classes.entry(v).or_default().push(s as Symbol);
    }
    for m in &totals {
        if !classes.contains_key(m) {
            return Err(Error::IncompatibleTotals(*m));
        }
    }
    let alphabet = Alphabet::new(a)?;
    for radius in [r, 2 * r] {
        if let Some(narrow) = narrow_totals(&totals, a, 3 * r, radius) {
            return Ok(Reconstruction {
                alphabet,
                nbhd: Neighborhood::interval(radius),
                totals: narrow,
                classes,
            });
        }
    }
    Ok(Reconstruction {
        alphabet,
        nbhd: Neighborhood::interval(3 * r),
        totals,
        classes,
    })
}

/// Restriction of a function on `[-wide..wide]` words to `[-radius..radius]`
/// if it only depends on those cells.
fn narrow_totals(totals: &[i64], a: usize, wide: usize, radius: usize) -> Option<Vec<i64>> {
    let margin = wide - radius;
    let inner = pattern_count(a, 2 * radius + 1)?;
    let low = a.pow(margin as u32);
    let mut out: Vec<Option<i64>> = vec![None; inner];
    for (i, &m) in totals.iter().enumerate() {
        let key = (i / low) % inner;
        match out[key] {
            None => out[key] = Some(m),
            Some(prev) if prev != m => return None,
            _ => {}
        }
    }
    out.into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct ReconstructReport {
    pub nbhd: Neighborhood,
    pub count: BigUint,
    pub rules: Vec<LocalRule>,
    /// Enumerated rules that failed the conservation check (expected empty).
    pub rejected: usize,
}

/// Enumerates the compatible rules (up to `cap`) and re-checks each with the
/// pattern-level conservation test.
pub fn reconstruct_ca(phi: &Quantity, pdr: &DisplacementRule, cap: u128) -> Result<ReconstructReport> {
    let rec = reconstruct(phi, pdr)?;
    let all = rec.rules(cap)?;
    let total = all.len();
    let mut rules = Vec::with_capacity(total);
    for rule in all {
        if finitary_holds(&rule, phi)?.holds {
            rules.push(rule);
        }
    }
    Ok(ReconstructReport {
        nbhd: rec.nbhd.clone(),
        count: rec.count(),
        rejected: total - rules.len(),
        rules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Alphabet;

    fn w(n: u32) -> LocalRule {
        LocalRule::from_wolfram(n).unwrap()
    }

    fn id() -> Quantity {
        Quantity::identity(2)
    }

    #[test]
    fn shift_by_five_example() {
        let rule = LocalRule::shift(5, Alphabet::binary()).unwrap();
        let left = [1, 0, 1, 1, 1, 1, 0];
        let right = [1, 1, 0, 1, 0, 0, 1, 0, 1];
        let mut word = left.to_vec();
        word.push(0);
        word.extend(right);
        let a = Configuration::from_word(0, -(left.len() as i64), &word);
        let table = FluxTable::new(&rule, &id()).unwrap();
        assert_eq!(table.value(&a, 0).left, 3);
        let ones = crate::lattice::TorusConfig::uniform(vec![40], 1).unwrap();
        assert_eq!(table.value(&ones, 0).left, 5);
    }

    #[test]
    fn rule_184_flux() {
        let t = FluxTable::new(&w(184), &id()).unwrap();
        assert_eq!(t.of_word(&[0, 1, 0]), 1);
        assert_eq!(t.of_word(&[1, 1, 0]), 1);
        assert_eq!(t.of_word(&[0, 1, 1]), 0);
        assert_eq!(t.of_word(&[1, 1, 1]), 0);
        assert_eq!(t.of_word(&[1, 0, 0]), 0);
    }

    #[test]
    fn identity_has_no_flux() {
        let t = FluxTable::new(&w(204), &id()).unwrap();
        assert!(t.values.iter().all(|&v| v == 0));
    }

    #[test]
    fn flux_rejects_non_conserved() {
        assert!(matches!(FluxTable::new(&w(110), &id()), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn pdr_of_184() {
        let pdr = build_pdr(&w(184), &id()).unwrap();
        // a_0 = 1, a_1 = 0: hop right
        assert_eq!(pdr.get(&[0, 0, 1, 0, 0], 1), 1);
        assert_eq!(pdr.get(&[0, 0, 1, 0, 0], 0), 0);
        // a_0 = 1, a_1 = 1: stay
        assert_eq!(pdr.get(&[0, 0, 1, 1, 0], 0), 1);
        assert_eq!(pdr.get(&[1, 1, 1, 1, 1], 0), 1);
        let report = verify_pdr(&w(184), &id(), &pdr, 300, 1).unwrap();
        assert!(report.ok(), "{report:?}");
    }

    #[test]
    fn pdr_of_identity_is_trivial() {
        let pdr = build_pdr(&w(204), &id()).unwrap();
        for i in 0..pdr.patterns() {
            let p = decode(2, i, 5);
            assert_eq!(pdr.counts(i), &[0, p[2] as u64, 0]);
        }
        assert!(verify_pdr(&w(204), &id(), &pdr, 100, 2).unwrap().ok());
    }

    #[test]
    fn corrupted_pdr_detected() {
        let mut pdr = build_pdr(&w(184), &id()).unwrap();
        let idx = encode(2, &[0, 0, 1, 0, 0]);
        pdr.set(idx, 1, 2);
        let report = verify_pdr(&w(184), &id(), &pdr, 300, 3).unwrap();
        assert!(!report.ok());
        assert!(report.c1_violations > 0);
    }

    #[test]
    fn round_trip_elementary() {
        for n in [170, 184, 204, 226, 240] {
            let pdr = build_pdr(&w(n), &id()).unwrap();
            let rec = reconstruct_ca(&id(), &pdr, 16).unwrap();
            assert_eq!(rec.rules, vec![w(n)], "rule {n}");
            assert_eq!(rec.rejected, 0);
        }
    }

    #[test]
    fn document_round_trip() {
        let pdr = build_pdr(&w(226), &id()).unwrap();
        let doc = pdr.to_document();
        let json = serde_json::to_string(&doc).unwrap();
        let back: PdrDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(DisplacementRule::from_document(&back).unwrap(), pdr);
        assert!(doc.entries.iter().all(|e| e.d.values().all(|&v| v > 0)));
    }

    #[test]
    fn internal_states_multiply_reconstructions() {
        // symbols 1 and 2 are both one particle; move like 184 on the indicator
        let alphabet = Alphabet::new(3).unwrap();
        let rule = LocalRule::from_fn(alphabet, Neighborhood::interval(1), |d| {
            let p: Vec<u32> = d.iter().map(|&s| (s > 0) as u32).collect();
            let k = 4 * p[0] + 2 * p[1] + p[2];
            ((184u32 >> k) & 1) as Symbol
        })
        .unwrap();
        let phi = Quantity::from_ints(&[0, 1, 1]).unwrap();
        let pdr = build_pdr(&rule, &phi).unwrap();
        assert!(verify_pdr(&rule, &phi, &pdr, 200, 4).unwrap().ok());
        let rec = reconstruct(&phi, &pdr).unwrap();
        assert_eq!(rec.nbhd().len(), 3);
        let ones = (0..27)
            .filter(|&i| {
                let p: Vec<u32> = decode(3, i, 3).iter().map(|&s| (s > 0) as u32).collect();
                (184u32 >> (4 * p[0] + 2 * p[1] + p[2])) & 1 == 1
            })
            .count();
        assert_eq!(rec.free_patterns(), ones);
        assert_eq!(rec.count(), BigUint::from(2u32).pow(ones as u32));
        let report = reconstruct_ca(&phi, &pdr, 1 << 20).unwrap();
        assert_eq!(report.rules.len() as u64, 1u64 << ones);
        assert_eq!(report.rejected, 0);
        assert!(report.rules.contains(&rule));
    }
}
