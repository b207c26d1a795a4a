//! Command-line front end. Every subcommand prints one JSON document on
//! stdout; logs go to stderr.
//!
//! Exit codes: 0 success or property true, 1 property false, 2 bad input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::conservation::{
    conservation_basis, finitary_holds, marginal_invariance_check, torus_conserved,
    torus_invariant_dimension, uniform_sum_filter, Counterexample, TorusMode,
};
use crate::conservation::torus::DEFAULT_TORUS_CAP;
use crate::engine::{AnyConfig, ConfigDocument};
use crate::error::{Error, Result};
use crate::fluxpdr::{build_pdr, identities_with, reconstruct, verify_pdr, DisplacementRule, FluxTable, PdrDocument};
use crate::lattice::{Configuration, Neighborhood};
use crate::quantity::{format_rational, Domain, Quantity, QuantityDocument};
use crate::recode::{recode_integer, recode_nonneg};
use crate::rules::{Alphabet, LocalRule, RuleDocument};
use crate::search::{cap_from_env, enumerate_conserving, prefilter_stats, SearchMode, SearchOptions, DEFAULT_SEARCH_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "ca-conserve", version, about = "Conservation laws of cellular automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// A rule is a JSON rule file, an elementary rule number (`184` or
/// `wolfram:184`), or a binary shift (`shift:-1`).
#[derive(Subcommand, Debug)]
pub enum Command {
    /// Conservation basis plus consistency checks.
    Analyze {
        rule: Option<String>,
        #[arg(long, conflicts_with = "rule")]
        wolfram: Option<u32>,
        /// Solve over Z/m instead of Q.
        #[arg(long = "mod")]
        modulus: Option<u64>,
    },
    /// Decide whether `phi` is conserved; exit 1 if not.
    Check {
        rule: String,
        phi: String,
        /// Reduce an integer-valued `phi` modulo m.
        #[arg(long = "mod")]
        modulus: Option<u64>,
    },
    /// All rules on `[-r..r]` conserving `phi`.
    Search {
        #[arg(long)]
        alphabet: usize,
        #[arg(long)]
        radius: usize,
        phi: String,
        /// Worker threads.
        #[arg(long)]
        shards: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Report filter statistics instead of the rules.
        #[arg(long)]
        stats: bool,
    },
    /// Flux across the bond to the right of a site.
    Flux {
        rule: String,
        phi: String,
        config: String,
        #[arg(long, allow_hyphen_values = true)]
        site: i64,
    },
    /// Particle displacement rules.
    Pdr {
        #[command(subcommand)]
        action: PdrCommand,
    },
    /// Evolve a configuration, recording the total of `phi` per step.
    Simulate {
        rule: String,
        config: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        phi: Option<String>,
    },
    /// Nonnegative and integer particle-count forms of `phi`.
    Recode {
        phi: String,
        /// Alphabet size, needed when `phi` is `id`.
        #[arg(long)]
        alphabet: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum PdrCommand {
    Build {
        rule: String,
        phi: String,
    },
    Verify {
        rule: String,
        phi: String,
        pdr: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Reconstruct {
        phi: String,
        pdr: String,
        /// Largest number of rules to list.
        #[arg(long, default_value_t = 1 << 16)]
        cap: u128,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exhaustive,
    Backtracking,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => SearchMode::Auto,
            ModeArg::Exhaustive => SearchMode::Exhaustive,
            ModeArg::Backtracking => SearchMode::Backtracking,
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(Error::Parse(format!("{path} is empty")));
    }
    Ok(serde_json::from_str(&text)?)
}

pub fn parse_rule(arg: &str) -> Result<LocalRule> {
    if Path::new(arg).is_file() {
        let doc: RuleDocument = read_json(arg)?;
        return LocalRule::from_document(&doc);
    }
    let number = |s: &str| -> Result<u32> {
        s.parse()
            .map_err(|_| Error::Parse(format!("not a rule file or rule number: {arg:?}")))
    };
    if let Some(k) = arg.strip_prefix("shift:") {
        let k: i64 = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad shift {k:?}")))?;
        return LocalRule::shift(k, Alphabet::binary());
    }
    let n = number(arg.strip_prefix("wolfram:").unwrap_or(arg))?;
    LocalRule::from_wolfram(n)
}

/// `id` (needs the alphabet size), a JSON quantity file, or inline integers
/// such as `0,1,1`.
pub fn parse_phi(arg: &str, alphabet: Option<usize>) -> Result<Quantity> {
    if arg == "id" {
        let a = alphabet.ok_or_else(|| Error::Parse("`id` needs a known alphabet size".into()))?;
        return Ok(Quantity::identity(a));
    }
    let phi = if Path::new(arg).is_file() {
        let doc: QuantityDocument = read_json(arg)?;
        Quantity::from_document(&doc)?
    } else {
        let values = arg
            .split(',')
            .map(|v| v.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse(format!("not a quantity file or integer list: {arg:?}")))?;
        Quantity::from_ints(&values)?
    };
    if let Some(a) = alphabet {
        if phi.alphabet_size() != a {
            return Err(Error::Quantity(format!(
                "quantity has {} values, alphabet has {a}",
                phi.alphabet_size()
            )));
        }
    }
    Ok(phi)
}

fn parse_config(path: &str, alphabet: usize) -> Result<AnyConfig> {
    let doc: ConfigDocument = read_json(path)?;
    let config = AnyConfig::from_document(&doc)?;
    if config.max_symbol() as usize >= alphabet {
        return Err(Error::Configuration(format!(
            "symbol {} outside alphabet of size {alphabet}",
            config.max_symbol()
        )));
    }
    Ok(config)
}

/// An integer-valued quantity read modulo `m`.
fn reduce_mod(phi: &Quantity, m: u64) -> Result<Quantity> {
    let coords = phi
        .rational_coords()
        .filter(|_| phi.components() == 1)
        .ok_or_else(|| Error::Quantity("only scalar rational quantities can be reduced".into()))?;
    let ints = coords
        .iter()
        .map(|c| {
            if c[0].is_integer() {
                num_traits::ToPrimitive::to_i64(&c[0].to_integer())
                    .ok_or_else(|| Error::Quantity("value out of range".into()))
            } else {
                Err(Error::Quantity("non-integer value cannot be reduced".into()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Quantity::modular(m, &ints)
}

fn config_json(c: &Configuration) -> Json {
    serde_json::to_value(AnyConfig::Finite(c.clone()).to_document()).unwrap_or(Json::Null)
}

fn counterexample_json(c: &Counterexample) -> Json {
    json!({
        "window": c.window.offsets().iter().map(|p| p.0.clone()).collect::<Vec<_>>(),
        "a": c.a,
        "c": c.c,
        "image_difference": c.image_difference.to_json(),
        "value_difference": c.value_difference.to_json(),
        "witness": c.witness.as_ref().map(|w| json!({
            "initial": config_json(&w.initial),
            "image": config_json(&w.image),
            "before": w.before.to_json(),
            "after": w.after.to_json(),
        })),
    })
}

fn torus_moduli(rule: &LocalRule) -> Option<Vec<Vec<usize>>> {
    let r = rule.nbhd().interval_radius()?;
    let m = 4 * r + 1;
    Some((m..m + 3).map(|k| vec![k]).collect())
}

fn analyze(rule: &LocalRule, modulus: Option<u64>) -> Result<Json> {
    let a = rule.alphabet_size();
    let domain = modulus.map_or(Domain::Rational, Domain::Mod);
    let basis = conservation_basis(rule, domain)?;
    let cap = cap_from_env(DEFAULT_TORUS_CAP);
    let mut all_pass = true;
    let mut checks = Vec::new();
    for phi in &basis.vectors {
        let finitary = finitary_holds(rule, phi)?.holds;
        let sum = uniform_sum_filter(rule, phi)?;
        let marginal = if rule.dim() == 1 {
            Some(marginal_invariance_check(rule, phi)?.holds)
        } else {
            None
        };
        let torus = match torus_moduli(rule) {
            Some(tori) => Some(
                torus_conserved(rule, phi, &tori[0], TorusMode::Sampled { n: 2000, seed: 0 })?.conserved,
            ),
            None => None,
        };
        let pass = finitary && sum.holds && marginal.unwrap_or(true) && torus.unwrap_or(true);
        all_pass &= pass;
        checks.push(json!({
            "finitary": finitary,
            "uniform_sum": {
                "holds": sum.holds,
                "image_sum": sum.image_sum.to_json(),
                "expected": sum.expected.to_json(),
            },
            "marginal": marginal,
            "torus_sampled": torus,
        }));
    }
    let torus_dimension = match (domain, torus_moduli(rule)) {
        (Domain::Rational, Some(tori)) => match torus_invariant_dimension(rule, &tori, cap) {
            Ok(d) => Some(d),
            Err(Error::CapExceeded { .. }) => None,
            Err(e) => return Err(e),
        },
        _ => None,
    };
    if let Some(d) = torus_dimension {
        all_pass &= d == basis.dimension();
    }
    let identity = Quantity::identity(a);
    let identity = match modulus {
        Some(m) => reduce_mod(&identity, m)?,
        None => identity,
    };
    Ok(json!({
        "rule": rule.to_document(),
        "domain": domain.to_string(),
        "dimension": basis.dimension(),
        "basis": basis.vectors.iter().map(Quantity::to_document).collect::<Vec<_>>(),
        "trivial": basis.trivial,
        "order": basis.order.as_ref().map(|o| o.to_string()),
        "identity_conserved": basis.contains(&identity),
        "checks": checks,
        "torus_dimension": torus_dimension,
        "all_checks_pass": all_pass,
    }))
}

fn run_pdr(action: PdrCommand) -> Result<(i32, Json)> {
    match action {
        PdrCommand::Build { rule, phi } => {
            let rule = parse_rule(&rule)?;
            let phi = parse_phi(&phi, Some(rule.alphabet_size()))?;
            let pdr = build_pdr(&rule, &phi)?;
            Ok((EXIT_OK, serde_json::to_value(pdr.to_document())?))
        }
        PdrCommand::Verify {
            rule,
            phi,
            pdr,
            trials,
            seed,
        } => {
            let rule = parse_rule(&rule)?;
            let phi = parse_phi(&phi, Some(rule.alphabet_size()))?;
            let doc: PdrDocument = read_json(&pdr)?;
            let pdr = DisplacementRule::from_document(&doc)?;
            let report = verify_pdr(&rule, &phi, &pdr, trials, seed)?;
            let code = if report.ok() { EXIT_OK } else { EXIT_FALSE };
            let mut out = serde_json::to_value(&report)?;
            out["ok"] = json!(report.ok());
            Ok((code, out))
        }
        PdrCommand::Reconstruct { phi, pdr, cap } => {
            let doc: PdrDocument = read_json(&pdr)?;
            let pdr = DisplacementRule::from_document(&doc)?;
            let phi = parse_phi(&phi, Some(pdr.alphabet()))?;
            let rec = reconstruct(&phi, &pdr)?;
            let count = rec.count();
            let rules = match rec.rules(cap) {
                Ok(rules) => {
                    let mut kept = Vec::new();
                    for r in rules {
                        if finitary_holds(&r, &phi)?.holds {
                            kept.push(r.to_document());
                        }
                    }
                    Some(kept)
                }
                Err(Error::CapExceeded { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok((
                EXIT_OK,
                json!({
                    "neighborhood": rec.nbhd().offsets().iter().map(|p| p.0.clone()).collect::<Vec<_>>(),
                    "count": count.to_string(),
                    "rules": rules,
                }),
            ))
        }
    }
}

/// Runs one parsed command, returning the exit code and the JSON output.
pub fn run(cli: Cli) -> Result<(i32, Json)> {
    match cli.command {
        Command::Analyze {
            rule,
            wolfram,
            modulus,
        } => {
            let rule = match (rule, wolfram) {
                (Some(arg), None) => parse_rule(&arg)?,
                (None, Some(n)) => LocalRule::from_wolfram(n)?,
                _ => return Err(Error::Parse("give a rule or --wolfram N".into())),
            };
            Ok((EXIT_OK, analyze(&rule, modulus)?))
        }
        Command::Check { rule, phi, modulus } => {
            let rule = parse_rule(&rule)?;
            let mut phi = parse_phi(&phi, Some(rule.alphabet_size()))?;
            if let Some(m) = modulus {
                phi = reduce_mod(&phi, m)?;
            }
            let report = finitary_holds(&rule, &phi)?;
            let code = if report.holds { EXIT_OK } else { EXIT_FALSE };
            Ok((
                code,
                json!({
                    "conserved": report.holds,
                    "domain": phi.domain().to_string(),
                    "vacuum_empty": report.vacuum_empty,
                    "counterexample": report.counterexample.as_ref().map(counterexample_json),
                }),
            ))
        }
        Command::Search {
            alphabet,
            radius,
            phi,
            shards,
            mode,
            stats,
        } => {
            let phi = parse_phi(&phi, Some(alphabet))?;
            let alphabet = Alphabet::new(alphabet)?;
            let nbhd = Neighborhood::interval(radius);
            let cap = cap_from_env(DEFAULT_SEARCH_CAP);
            if stats {
                let s = prefilter_stats(&alphabet, &nbhd, &phi, cap)?;
                return Ok((EXIT_OK, serde_json::to_value(s)?));
            }
            let options = SearchOptions {
                mode: mode.into(),
                cap,
                shards,
            };
            let rules = enumerate_conserving(&alphabet, &nbhd, &phi, &options)?;
            let docs: Vec<RuleDocument> = rules.iter().map(LocalRule::to_document).collect();
            Ok((EXIT_OK, serde_json::to_value(docs)?))
        }
        Command::Flux {
            rule,
            phi,
            config,
            site,
        } => {
            let rule = parse_rule(&rule)?;
            let phi = parse_phi(&phi, Some(rule.alphabet_size()))?;
            let config = parse_config(&config, rule.alphabet_size())?;
            let table = FluxTable::new(&rule, &phi)?;
            let ids = identities_with(&table, &rule, &config, site);
            let mut out = serde_json::to_value(ids.flux)?;
            out["site"] = json!(site);
            out["identities"] = serde_json::to_value(&ids)?;
            Ok((EXIT_OK, out))
        }
        Command::Pdr { action } => run_pdr(action),
        Command::Simulate {
            rule,
            config,
            steps,
            phi,
        } => {
            let rule = parse_rule(&rule)?;
            let phi = phi
                .map(|p| parse_phi(&p, Some(rule.alphabet_size())))
                .transpose()?;
            let mut a = parse_config(&config, rule.alphabet_size())?;
            let mut ledger = Vec::with_capacity(steps + 1);
            let mut totals = Vec::new();
            for t in 0..=steps {
                if t > 0 {
                    a = a.step(&rule)?;
                }
                let total = phi.as_ref().map(|p| a.total(p)).transpose()?;
                ledger.push(json!({"t": t, "total": total.as_ref().map(|v| v.to_json())}));
                if let Some(v) = total {
                    totals.push(v);
                }
            }
            let constant = phi.as_ref().map(|_| totals.windows(2).all(|w| w[0] == w[1]));
            Ok((
                EXIT_OK,
                json!({
                    "ledger": ledger,
                    "constant": constant,
                    "final": a.to_document(),
                }),
            ))
        }
        Command::Recode { phi, alphabet } => {
            let phi = parse_phi(&phi, alphabet)?;
            let nonneg = recode_nonneg(&phi)?;
            let int = recode_integer(&nonneg)?;
            Ok((
                EXIT_OK,
                json!({
                    "nonneg": nonneg.to_document(),
                    "integer": {
                        "quantity": int.quantity.to_document(),
                        "rank": int.rank,
                        "basis": int.basis.iter()
                            .map(|row| row.iter().map(format_rational).collect::<Vec<_>>())
                            .collect::<Vec<_>>(),
                        "shift": int.shift.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                        "vacuum_before": int.vacuum_before,
                        "vacuum_after": int.vacuum_after,
                    },
                }),
            ))
        }
    }
}

/// Parses arguments, runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok((code, out)) => {
            let text = serde_json::to_string_pretty(&out).expect("JSON values serialize");
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            code
        }
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_specs() {
        assert_eq!(parse_rule("184").unwrap(), LocalRule::from_wolfram(184).unwrap());
        assert_eq!(parse_rule("wolfram:90").unwrap(), LocalRule::from_wolfram(90).unwrap());
        assert_eq!(
            parse_rule("shift:1").unwrap().pad_to(&Neighborhood::interval(1)).unwrap(),
            LocalRule::from_wolfram(170).unwrap()
        );
        assert!(parse_rule("nonsense").is_err());
        assert!(parse_rule("256").is_err());
    }

    #[test]
    fn phi_specs() {
        assert_eq!(parse_phi("id", Some(3)).unwrap(), Quantity::identity(3));
        assert_eq!(parse_phi("0,1,1", None).unwrap(), Quantity::from_ints(&[0, 1, 1]).unwrap());
        assert!(parse_phi("id", None).is_err());
        assert!(parse_phi("0,1", Some(3)).is_err());
    }

    #[test]
    fn parity_reduction() {
        let p = reduce_mod(&Quantity::identity(2), 2).unwrap();
        assert_eq!(p, Quantity::modular(2, &[0, 1]).unwrap());
    }
}
