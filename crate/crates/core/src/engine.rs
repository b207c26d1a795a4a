//! Global evolution of a local rule on sparse and toroidal configurations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Pattern, Point, Sites, Symbol, TorusConfig};
use crate::quantity::Quantity;
use crate::rules::{decode, pattern_count, LocalRule};

const PARALLEL_THRESHOLD: usize = 1 << 14;

/// True iff `f` maps every all-vacuum pattern to a vacuum state.
pub fn is_vacuum_preserving(rule: &LocalRule, phi: &Quantity) -> bool {
    let vacuum = phi.vacuum_set();
    if vacuum.is_empty() {
        return true;
    }
    let n = rule.nbhd().len();
    let count = pattern_count(vacuum.len(), n).expect("vacuum patterns enumerable");
    (0..count).all(|i| {
        let digits: Vec<Symbol> = decode(vacuum.len(), i, n)
            .into_iter()
            .map(|d| vacuum[d as usize])
            .collect();
        phi.is_vacuum(rule.apply_local(&digits))
    })
}

/// `F(a)_x = f(a|_{x+B})`.
pub fn image_at(rule: &LocalRule, a: &impl Sites, x: &Point) -> Symbol {
    let a_size = rule.alphabet_size();
    let idx = rule.nbhd().offsets().iter().fold(0usize, |acc, b| {
        acc * a_size + a.symbol_at(&x.add(b)) as usize
    });
    rule.table()[idx]
}

/// One step on a finite-support configuration. The background must be a
/// fixed point of the rule.
pub fn step_finite(rule: &LocalRule, a: &Configuration) -> Result<Configuration> {
    if a.dim() != rule.dim() {
        return Err(Error::Dimension {
            expected: rule.dim(),
            found: a.dim(),
        });
    }
    let bg = a.background();
    if bg as usize >= rule.alphabet_size() || a.max_symbol() as usize >= rule.alphabet_size() {
        return Err(Error::Configuration("symbol outside rule alphabet".into()));
    }
    let uniform = vec![bg; rule.nbhd().len()];
    let image = rule.apply_local(&uniform);
    if image != bg {
        return Err(Error::BackgroundNotQuiescent(bg as usize, image as usize));
    }
    let sites = a.support().closure(rule.nbhd()).points();
    let updates: Vec<(Point, Symbol)> = if sites.len() >= PARALLEL_THRESHOLD {
        sites
            .into_par_iter()
            .map(|x| {
                let s = image_at(rule, a, &x);
                (x, s)
            })
            .collect()
    } else {
        sites
            .into_iter()
            .map(|x| {
                let s = image_at(rule, a, &x);
                (x, s)
            })
            .collect()
    };
    Configuration::from_overrides(a.dim(), bg, updates)
}

/// One step on a torus, wrapping around every axis.
pub fn step_torus(rule: &LocalRule, a: &TorusConfig) -> Result<TorusConfig> {
    if a.dim() != rule.dim() {
        return Err(Error::Dimension {
            expected: rule.dim(),
            found: a.dim(),
        });
    }
    let cell = |i: usize| image_at(rule, a, &a.point_of(i));
    let cells: Vec<Symbol> = if a.len() >= PARALLEL_THRESHOLD {
        (0..a.len()).into_par_iter().map(cell).collect()
    } else {
        (0..a.len()).map(cell).collect()
    };
    TorusConfig::new(a.moduli().to_vec(), cells)
}

/// `⟨p⟩`: the pattern on its window, the designated vacuum elsewhere.
pub fn embed(pattern: &Pattern, phi: &Quantity) -> Result<Configuration> {
    let vac = phi.designated_vacuum().ok_or(Error::EmptyVacuum)?;
    let dim = pattern
        .cells()
        .keys()
        .next()
        .map(Point::dim)
        .unwrap_or(1);
    Configuration::from_overrides(
        dim,
        vac,
        pattern.cells().iter().map(|(p, &s)| (p.clone(), s)),
    )
}

/// Either kind of configuration, as read from a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyConfig {
    Finite(Configuration),
    Torus(TorusConfig),
}

impl AnyConfig {
    pub fn max_symbol(&self) -> Symbol {
        match self {
            AnyConfig::Finite(c) => c.max_symbol(),
            AnyConfig::Torus(t) => t.cells().iter().copied().max().unwrap_or(0),
        }
    }

    pub fn step(&self, rule: &LocalRule) -> Result<AnyConfig> {
        Ok(match self {
            AnyConfig::Finite(c) => AnyConfig::Finite(step_finite(rule, c)?),
            AnyConfig::Torus(t) => AnyConfig::Torus(step_torus(rule, t)?),
        })
    }

    pub fn total(&self, phi: &Quantity) -> Result<crate::quantity::Value> {
        match self {
            AnyConfig::Finite(c) => phi.total(c),
            AnyConfig::Torus(t) => Ok(phi.total_symbols(t.cells())),
        }
    }

    pub fn to_document(&self) -> ConfigDocument {
        match self {
            AnyConfig::Finite(c) => ConfigDocument::Finite {
                dimension: Some(c.dim()),
                background: c.background() as u32,
                overrides: c
                    .overrides()
                    .iter()
                    .map(|(p, &s)| p.0.iter().copied().chain([s as i64]).collect())
                    .collect(),
            },
            AnyConfig::Torus(t) => ConfigDocument::Torus {
                moduli: t.moduli().to_vec(),
                cells: t.cells().iter().map(|&s| s as u32).collect(),
            },
        }
    }

    pub fn from_document(doc: &ConfigDocument) -> Result<Self> {
        let symbol = |s: i64| {
            Symbol::try_from(s).map_err(|_| Error::Configuration(format!("bad symbol {s}")))
        };
        match doc {
            ConfigDocument::Torus { moduli, cells } => {
                let cells = cells
                    .iter()
                    .map(|&s| symbol(s as i64))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyConfig::Torus(TorusConfig::new(moduli.clone(), cells)?))
            }
            ConfigDocument::Finite {
                dimension,
                background,
                overrides,
            } => {
                let dim = dimension
                    .or_else(|| overrides.first().map(|o| o.len().saturating_sub(1)))
                    .unwrap_or(1);
                if dim == 0 {
                    return Err(Error::Configuration("override needs coordinates".into()));
                }
                let cells = overrides
                    .iter()
                    .map(|o| {
                        let (s, x) = o
                            .split_last()
                            .ok_or_else(|| Error::Configuration("empty override".into()))?;
                        Ok((Point(x.to_vec()), symbol(*s)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyConfig::Finite(Configuration::from_overrides(
                    dim,
                    symbol(*background as i64)?,
                    cells,
                )?))
            }
        }
    }
}

impl Sites for AnyConfig {
    fn dim(&self) -> usize {
        match self {
            AnyConfig::Finite(c) => c.dim(),
            AnyConfig::Torus(t) => t.dim(),
        }
    }

    fn symbol_at(&self, p: &Point) -> Symbol {
        match self {
            AnyConfig::Finite(c) => c.symbol_at(p),
            AnyConfig::Torus(t) => t.symbol_at(p),
        }
    }
}

/// On-disk configuration: `{"background", "overrides": [[x.., s], ..]}` or
/// `{"moduli", "cells"}` for a torus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigDocument {
    Torus {
        moduli: Vec<usize>,
        cells: Vec<u32>,
    },
    Finite {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dimension: Option<usize>,
        background: u32,
        #[serde(default)]
        overrides: Vec<Vec<i64>>,
    },
}
