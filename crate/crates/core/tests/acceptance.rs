//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use ca_conserve::conservation::{
    cesaro_average, conservation_basis, finitary_holds, marginal_constraint_space,
    marginal_invariance_check, sandwich_check, torus_invariant_dimension, uniform_sum_filter,
    EventuallyPeriodic,
};
use ca_conserve::engine::step_finite;
use ca_conserve::fluxpdr::{build_pdr, reconstruct_ca, verify_pdr, FluxTable};
use ca_conserve::lattice::{Configuration, Neighborhood, TorusConfig, Window};
use ca_conserve::quantity::{Domain, Quantity, Value};
use ca_conserve::recode::{recode_integer, recode_nonneg};
use ca_conserve::rules::{pattern_count, Alphabet, LocalRule};
use ca_conserve::search::{enumerate_conserving, SearchMode, SearchOptions};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn census() -> Outcome {
    let start = Instant::now();
    let rules = enumerate_conserving(
        &Alphabet::binary(),
        &Neighborhood::interval(1),
        &Quantity::identity(2),
        &SearchOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let numbers: Vec<u8> = rules.iter().filter_map(LocalRule::to_wolfram).collect();
    ensure(numbers == [170, 184, 204, 226, 240], || format!("found {numbers:?}"))?;
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("{numbers:?} in {elapsed:?}"))
}

fn parity() -> Outcome {
    let rule = w(150);
    let parity = Quantity::modular(2, &[0, 1]).unwrap();
    let report = finitary_holds(&rule, &parity).map_err(|e| e.to_string())?;
    ensure(report.holds, || "parity not conserved".into())?;
    let basis = conservation_basis(&rule, Domain::Mod(2)).map_err(|e| e.to_string())?;
    ensure(basis.contains(&parity), || "parity outside Z/2 basis".into())?;

    let id = Quantity::identity(2);
    let report = finitary_holds(&rule, &id).map_err(|e| e.to_string())?;
    ensure(!report.holds, || "identity reported conserved over Q".into())?;
    let cx = report.counterexample.ok_or("no counterexample")?;
    let witness = cx.witness.ok_or("no finite witness")?;
    // recompute the witness totals from scratch
    let image = step_finite(&rule, &witness.initial).map_err(|e| e.to_string())?;
    let before = id.total(&witness.initial).map_err(|e| e.to_string())?;
    let after = id.total(&image).map_err(|e| e.to_string())?;
    ensure(image == witness.image && before != after, || {
        format!("witness does not change the total: {before} -> {after}")
    })?;
    Ok(format!(
        "Z/2 conserved; Q counterexample {:?} with total {before} -> {after}",
        witness.initial.overrides().keys().collect::<Vec<_>>()
    ))
}

fn uniform_sums() -> Outcome {
    let id = Quantity::identity(2);
    for n in PPCA {
        let r = uniform_sum_filter(&w(n), &id).map_err(|e| e.to_string())?;
        // Σ_a f(a) is the number of ones in the rule number
        ensure(n.count_ones() == 4, || format!("rule {n} has {} ones", n.count_ones()))?;
        ensure(r.holds && r.image_sum == Value::integer(4) && r.expected == Value::integer(4), || {
            format!("rule {n}: {} vs {}", r.image_sum, r.expected)
        })?;
    }
    let r = uniform_sum_filter(&w(110), &id).map_err(|e| e.to_string())?;
    ensure(!r.holds && r.image_sum == Value::integer(5), || format!("rule 110 sum {}", r.image_sum))?;
    Ok("five rules sum to 4, rule 110 sums to 5".into())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut rules: Vec<LocalRule> = (0..1000)
        .map(|i| random_rule(&mut rng, if i % 2 == 0 { 2 } else { 3 }, 1))
        .collect();
    // random tables almost never conserve more than constants, so add
    // every elementary rule and ternary rules with known nontrivial laws
    rules.extend((0..256).map(w));
    for values in [[0, 1, 1], [0, 1, 2]] {
        let phi = Quantity::from_ints(&values).unwrap();
        let opts = SearchOptions {
            mode: SearchMode::Backtracking,
            ..SearchOptions::default()
        };
        let found = enumerate_conserving(&Alphabet::new(3).unwrap(), &Neighborhood::interval(1), &phi, &opts)
            .map_err(|e| e.to_string())?;
        rules.extend(found.into_iter().take(200));
    }
    let tori = [vec![5], vec![6], vec![7]];
    let mut dims = [0usize; 4];
    for rule in &rules {
        let solver = conservation_basis(rule, Domain::Rational)
            .map_err(|e| e.to_string())?
            .dimension();
        let oracle = torus_invariant_dimension(rule, &tori, 1 << 24).map_err(|e| e.to_string())?;
        ensure(solver == oracle, || {
            format!("rule {:?}: solver {solver}, torus {oracle}", rule.table())
        })?;
        dims[solver.min(3)] += 1;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!(
        "{} rules agree, dimension histogram {dims:?}, {elapsed:?}",
        rules.len()
    ))
}

fn sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let quantities = [
        Quantity::identity(2),
        Quantity::from_ints(&[1, 1]).unwrap(),
        Quantity::from_ints(&[2, 5]).unwrap(),
    ];
    let mut trials = 0;
    for n in PPCA {
        for phi in &quantities {
            for t in 0..10_000 {
                let lo = rng.gen_range(-12..12);
                let wdw = Window::interval(lo, lo + rng.gen_range(0..14));
                let r = if phi.is_vacuum(0) && t % 2 == 0 {
                    let a = random_finite(&mut rng, 2, 20);
                    sandwich_check(&w(n), phi, &a, &wdw)
                } else {
                    let m = rng.gen_range(5..24);
                    let a = TorusConfig::new(vec![m], random_word(&mut rng, 2, m)).unwrap();
                    sandwich_check(&w(n), phi, &a, &wdw)
                }
                .map_err(|e| e.to_string())?;
                trials += 1;
                ensure(r.holds, || format!("rule {n}, window {wdw:?}: {r:?}"))?;
            }
        }
    }
    let id = Quantity::identity(2);
    let mut found = None;
    for t in 0..10_000 {
        let a = random_finite(&mut rng, 2, 20);
        let lo = rng.gen_range(-12..12);
        let wdw = Window::interval(lo, lo + rng.gen_range(0..14));
        if !sandwich_check(&w(110), &id, &a, &wdw).map_err(|e| e.to_string())?.holds {
            found = Some(t + 1);
            break;
        }
    }
    let found = found.ok_or("rule 110 never violated the bounds")?;
    Ok(format!("{trials} trials without violation; rule 110 violated after {found}"))
}

fn flux_examples() -> Outcome {
    let id = Quantity::identity(2);
    let shift = LocalRule::shift(5, Alphabet::binary()).map_err(|e| e.to_string())?;
    let table = FluxTable::new(&shift, &id).map_err(|e| e.to_string())?;
    let mut word = vec![1, 0, 1, 1, 1, 1, 0, 0];
    word.extend([1, 1, 0, 1, 0, 0, 1, 0, 1]);
    let a = Configuration::from_word(0, -7, &word);
    let printed = table.value(&a, 0).left;
    ensure(printed == 3, || format!("printed configuration gives {printed}"))?;
    let ones = TorusConfig::uniform(vec![40], 1).unwrap();
    let full = table.value(&ones, 0).left;
    ensure(full == 5, || format!("all ones gives {full}"))?;

    let t184 = FluxTable::new(&w(184), &id).map_err(|e| e.to_string())?;
    for left in [0, 1] {
        let hop = t184.of_word(&[left, 1, 0]);
        let jam = t184.of_word(&[left, 1, 1]);
        ensure(hop == 1 && jam == 0, || format!("rule 184 fluxes {hop}, {jam}"))?;
    }
    Ok("shift: 3 and 5; rule 184: 1 and 0".into())
}

fn pdr_round_trip() -> Outcome {
    let id = Quantity::identity(2);
    for n in PPCA {
        let rule = w(n);
        let pdr = build_pdr(&rule, &id).map_err(|e| e.to_string())?;
        let report = verify_pdr(&rule, &id, &pdr, 1000, n as u64).map_err(|e| e.to_string())?;
        ensure(report.patterns_checked == 32 && report.c1_violations == 0, || {
            format!("rule {n}: {report:?}")
        })?;
        ensure(
            report.configurations_checked == 1000
                && report.c2_violations == 0
                && report.ledger_violations == 0,
            || format!("rule {n}: {report:?}"),
        )?;
        let rec = reconstruct_ca(&id, &pdr, 1 << 10).map_err(|e| e.to_string())?;
        ensure(rec.rules == vec![rule.clone()], || {
            format!("rule {n} reconstructs to {:?}", rec.rules.iter().map(|r| r.table().to_vec()).collect::<Vec<_>>())
        })?;
    }
    Ok("five rules round-trip; outflow on 32 patterns, inflow on 1000 configurations each".into())
}

fn recoding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut conserved = 0;
    for i in 0..100 {
        let rule = if i % 2 == 0 {
            w(rng.gen_range(0..256))
        } else {
            random_rule(&mut rng, 3, 1)
        };
        // half the quantities come from the solution space so both verdicts occur
        let phi = if i % 4 < 2 {
            let basis = conservation_basis(&rule, Domain::Rational).map_err(|e| e.to_string())?;
            random_combination(&mut rng, &basis.vectors)
        } else {
            random_rational_phi(&mut rng, rule.alphabet_size())
        };
        let tilde = recode_nonneg(&phi).map_err(|e| e.to_string())?;
        let hat = recode_integer(&tilde).map_err(|e| e.to_string())?.quantity;
        let verdicts = [&phi, &tilde, &hat].map(|q| finitary_holds(&rule, q).map(|r| r.holds));
        let [a, b, c] = verdicts.map(|v| v.unwrap_or(false));
        ensure(a == b && b == c, || format!("instance {i}: {a} {b} {c}"))?;
        conserved += a as usize;
    }
    Ok(format!("100 instances agree ({conserved} conserved)"))
}

/// Rank over Q by fraction-free elimination on small integer rows.
fn brute_rank(mut rows: Vec<Vec<i128>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != 0 {
                let (f, g) = (rows[rank][c], rows[r][c]);
                for k in 0..cols {
                    rows[r][k] = rows[r][k] * f - rows[rank][k] * g;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn marginals() -> Outcome {
    let id = Quantity::identity(2);
    for n in 0..256 {
        let r = w(n);
        let m = marginal_invariance_check(&r, &id).map_err(|e| e.to_string())?.holds;
        let f = finitary_holds(&r, &id).map_err(|e| e.to_string())?.holds;
        ensure(m == f, || format!("rule {n}: marginal {m}, finitary {f}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..100 {
        let r = w(rng.gen_range(0..256));
        let phi = if i % 2 == 0 {
            let basis = conservation_basis(&r, Domain::Rational).map_err(|e| e.to_string())?;
            random_combination(&mut rng, &basis.vectors)
        } else {
            random_rational_phi(&mut rng, 2)
        };
        let m = marginal_invariance_check(&r, &phi).map_err(|e| e.to_string())?.holds;
        let f = finitary_holds(&r, &phi).map_err(|e| e.to_string())?.holds;
        ensure(m == f, || format!("random instance {i}: marginal {m}, finitary {f}"))?;
    }
    // oracle: rank of the consistency equations written out word by word
    let words = pattern_count(2, 3).unwrap();
    let mut rows = Vec::new();
    for u in 0..4usize {
        let mut row = vec![0i128; words];
        for s in 0..2usize {
            row[(s << 2) | u] += 1; // s·u
            row[(u << 1) | s] -= 1; // u·s
        }
        rows.push(row);
    }
    let oracle = words - brute_rank(rows);
    // circulations on the binary de Bruijn graph of order 2: edges - vertices + 1
    ensure(oracle == 8 - 4 + 1, || format!("oracle rank gives {oracle}"))?;
    let dim = marginal_constraint_space(2, 3).map_err(|e| e.to_string())?.dimension();
    ensure(dim == oracle, || format!("constraint space dimension {dim}, oracle {oracle}"))?;
    Ok(format!("256 + 100 instances agree; dimension {dim}"))
}

fn cesaro() -> Outcome {
    let id = Quantity::identity(2);
    let half = Value::Rational(rational(1, 2));
    let mut a = EventuallyPeriodic::periodic(vec![1, 0]).map_err(|e| e.to_string())?;
    for t in 0..=100 {
        let avg = cesaro_average(&id, &a).map_err(|e| e.to_string())?;
        ensure(avg == half, || format!("step {t}: density {avg}"))?;
        if t < 100 {
            a = a.step(&w(184)).map_err(|e| e.to_string())?;
        }
    }
    Ok("density 1/2 at every step 0..=100".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("elementary particle-rule census", census),
        ("parity law for rule 150", parity),
        ("uniform-sum identity", uniform_sums),
        ("solver vs torus oracle", oracle_equivalence),
        ("sandwich bounds", sandwich),
        ("flux example values", flux_examples),
        ("displacement round trip", pdr_round_trip),
        ("recoding equivalence", recoding),
        ("marginal test agreement", marginals),
        ("Cesaro density invariance", cesaro),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name} ({elapsed:.2?}): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
