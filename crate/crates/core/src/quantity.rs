//! Cell-wise quantities `φ: A -> Z` with exact coefficient domains and their
//! totals over configurations and windows.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Sites, Symbol, Window};

/// Coefficient domain of a quantity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Domain {
    Rational,
    /// `Q^K`.
    Vector(usize),
    /// `Z/m`.
    Mod(u64),
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Rational => write!(f, "rational"),
            Domain::Vector(k) => write!(f, "vector({k})"),
            Domain::Mod(m) => write!(f, "mod({m})"),
        }
    }
}

/// An exact value in some [`Domain`]; also used for totals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Value {
    Rational(BigRational),
    Vector(Vec<BigRational>),
    Mod { residue: u64, modulus: u64 },
}

pub type TotalValue = Value;

impl Value {
    pub fn zero(domain: Domain) -> Value {
        match domain {
            Domain::Rational => Value::Rational(BigRational::zero()),
            Domain::Vector(k) => Value::Vector(vec![BigRational::zero(); k]),
            Domain::Mod(m) => Value::Mod {
                residue: 0,
                modulus: m,
            },
        }
    }

    pub fn integer(n: i64) -> Value {
        Value::Rational(BigRational::from_integer(n.into()))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Rational(q) => q.is_zero(),
            Value::Vector(v) => v.iter().all(Zero::is_zero),
            Value::Mod { residue, .. } => *residue == 0,
        }
    }

    pub fn add_assign(&mut self, other: &Value) {
        match (self, other) {
            (Value::Rational(a), Value::Rational(b)) => *a += b,
            (Value::Vector(a), Value::Vector(b)) => {
                assert_eq!(a.len(), b.len(), "vector length mismatch");
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            (
                Value::Mod { residue, modulus },
                Value::Mod {
                    residue: r,
                    modulus: m,
                },
            ) => {
                assert_eq!(modulus, m, "modulus mismatch");
                *residue = ((*residue as u128 + *r as u128) % *m as u128) as u64;
            }
            _ => panic!("domain mismatch"),
        }
    }

    pub fn neg(&self) -> Value {
        match self {
            Value::Rational(a) => Value::Rational(-a),
            Value::Vector(a) => Value::Vector(a.iter().map(|x| -x).collect()),
            Value::Mod { residue, modulus } => Value::Mod {
                residue: (modulus - residue) % modulus,
                modulus: *modulus,
            },
        }
    }

    pub fn sub(&self, other: &Value) -> Value {
        let mut out = self.clone();
        out.add_assign(&other.neg());
        out
    }

    pub fn scaled(&self, k: &BigInt) -> Value {
        match self {
            Value::Rational(a) => Value::Rational(a * BigRational::from_integer(k.clone())),
            Value::Vector(a) => Value::Vector(
                a.iter()
                    .map(|x| x * BigRational::from_integer(k.clone()))
                    .collect(),
            ),
            Value::Mod { residue, modulus } => {
                let m = BigInt::from(*modulus);
                let r = (BigInt::from(*residue) * k).mod_floor(&m);
                Value::Mod {
                    residue: r.to_u64().expect("reduced residue fits"),
                    modulus: *modulus,
                }
            }
        }
    }

    /// Componentwise comparison for ordered domains; `None` for `Z/m`.
    pub fn le(&self, other: &Value) -> Option<bool> {
        match (self, other) {
            (Value::Rational(a), Value::Rational(b)) => Some(a <= b),
            (Value::Vector(a), Value::Vector(b)) => Some(a.iter().zip(b).all(|(x, y)| x <= y)),
            _ => None,
        }
    }

    /// JSON form: rationals as `"p/q"` strings, residues as integers.
    pub fn to_json(&self) -> Json {
        match self {
            Value::Rational(q) => Json::String(format_rational(q)),
            Value::Vector(v) => Json::Array(
                v.iter()
                    .map(|q| Json::String(format_rational(q)))
                    .collect(),
            ),
            Value::Mod { residue, .. } => Json::from(*residue),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(q) => write!(f, "{}", format_rational(q)),
            Value::Vector(v) => {
                let parts: Vec<String> = v.iter().map(format_rational).collect();
                write!(f, "({})", parts.join(", "))
            }
            Value::Mod { residue, modulus } => write!(f, "{residue} mod {modulus}"),
        }
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn rational_from_json(v: &Json) -> Result<BigRational> {
    match v {
        Json::String(s) => parse_rational(s),
        Json::Number(n) => match n.as_i64() {
            Some(i) => Ok(BigRational::from_integer(i.into())),
            None => Err(Error::Parse(format!(
                "non-integer JSON number {n}; write rationals as \"p/q\""
            ))),
        },
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

/// A cell-wise valuation `φ: A -> Z`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quantity {
    domain: Domain,
    values: Vec<Value>,
}

impl Quantity {
    pub fn rational(values: Vec<BigRational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Quantity("no values".into()));
        }
        Ok(Quantity {
            domain: Domain::Rational,
            values: values.into_iter().map(Value::Rational).collect(),
        })
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Quantity::rational(
            values
                .iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect(),
        )
    }

    /// `φ(s) = s` as a rational.
    pub fn identity(alphabet: usize) -> Self {
        let vals: Vec<i64> = (0..alphabet as i64).collect();
        Quantity::from_ints(&vals).expect("non-empty alphabet")
    }

    pub fn vector(k: usize, values: Vec<Vec<BigRational>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Quantity("no values".into()));
        }
        if k == 0 {
            return Err(Error::Quantity("vector dimension must be positive".into()));
        }
        if let Some(v) = values.iter().find(|v| v.len() != k) {
            return Err(Error::Quantity(format!(
                "vector value of length {} but K = {k}",
                v.len()
            )));
        }
        Ok(Quantity {
            domain: Domain::Vector(k),
            values: values.into_iter().map(Value::Vector).collect(),
        })
    }

    pub fn modular(m: u64, values: &[i64]) -> Result<Self> {
        if m < 2 {
            return Err(Error::Quantity("modulus must be at least 2".into()));
        }
        if values.is_empty() {
            return Err(Error::Quantity("no values".into()));
        }
        Ok(Quantity {
            domain: Domain::Mod(m),
            values: values
                .iter()
                .map(|&v| Value::Mod {
                    residue: v.rem_euclid(m as i64) as u64,
                    modulus: m,
                })
                .collect(),
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value(&self, s: Symbol) -> &Value {
        &self.values[s as usize]
    }

    pub fn alphabet_size(&self) -> usize {
        self.values.len()
    }

    /// Number of coordinates (`K` for vectors, 1 otherwise).
    pub fn components(&self) -> usize {
        match self.domain {
            Domain::Vector(k) => k,
            _ => 1,
        }
    }

    /// Rational coordinates of each symbol's value; `None` for `Z/m`.
    pub fn rational_coords(&self) -> Option<Vec<Vec<BigRational>>> {
        self.values
            .iter()
            .map(|v| match v {
                Value::Rational(q) => Some(vec![q.clone()]),
                Value::Vector(v) => Some(v.clone()),
                Value::Mod { .. } => None,
            })
            .collect()
    }

    /// `φ^{-1}{0}`.
    pub fn vacuum_set(&self) -> Vec<Symbol> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_zero())
            .map(|(s, _)| s as Symbol)
            .collect()
    }

    /// Smallest-index vacuum symbol.
    pub fn designated_vacuum(&self) -> Option<Symbol> {
        self.vacuum_set().first().copied()
    }

    pub fn is_vacuum(&self, s: Symbol) -> bool {
        self.values[s as usize].is_zero()
    }

    pub fn is_nonnegative(&self) -> bool {
        match self.domain {
            Domain::Mod(_) => false,
            _ => self
                .rational_coords()
                .expect("ordered domain")
                .iter()
                .flatten()
                .all(|q| !q.is_negative()),
        }
    }

    /// Values as naturals when `φ` is rational with nonnegative integer values.
    pub fn natural_values(&self) -> Option<Vec<i64>> {
        self.values
            .iter()
            .map(|v| match v {
                Value::Rational(q) if q.is_integer() && !q.is_negative() => q.numer().to_i64(),
                _ => None,
            })
            .collect()
    }

    /// `Σφ(a)` over a configuration whose background is a vacuum state.
    pub fn total(&self, a: &Configuration) -> Result<Value> {
        let bg = a.background();
        self.check_symbol(bg)?;
        if !self.is_vacuum(bg) {
            return Err(Error::DivergentTotal(bg as usize));
        }
        let mut acc = Value::zero(self.domain);
        for &s in a.overrides().values() {
            self.check_symbol(s)?;
            acc.add_assign(self.value(s));
        }
        Ok(acc)
    }

    /// `Σφ(a)|_W`.
    pub fn total_window(&self, a: &impl Sites, w: &Window) -> Value {
        let mut acc = Value::zero(self.domain);
        for p in w.points() {
            acc.add_assign(self.value(a.symbol_at(&p)));
        }
        acc
    }

    /// Sum of `φ` over a list of symbols.
    pub fn total_symbols(&self, symbols: &[Symbol]) -> Value {
        let mut acc = Value::zero(self.domain);
        for &s in symbols {
            acc.add_assign(self.value(s));
        }
        acc
    }

    fn check_symbol(&self, s: Symbol) -> Result<()> {
        if (s as usize) < self.values.len() {
            Ok(())
        } else {
            Err(Error::Quantity(format!(
                "symbol {s} outside alphabet of size {}",
                self.values.len()
            )))
        }
    }

    /// Integer image `L·φ` (with `L` the common denominator) for fast exact
    /// comparisons. `None` if a scaled value does not fit in `i128`.
    pub fn scaled_integers(&self) -> Option<ScaledQuantity> {
        let comps = self.components();
        match self.domain {
            Domain::Mod(m) => Some(ScaledQuantity {
                comps: 1,
                values: self
                    .values
                    .iter()
                    .map(|v| match v {
                        Value::Mod { residue, .. } => *residue as i128,
                        _ => unreachable!(),
                    })
                    .collect(),
                modulus: Some(m as i128),
            }),
            _ => {
                let coords = self.rational_coords()?;
                let lcm = coords
                    .iter()
                    .flatten()
                    .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
                let mut values = Vec::with_capacity(coords.len() * comps);
                for c in &coords {
                    for q in c {
                        let scaled = q.numer() * (&lcm / q.denom());
                        values.push(scaled.to_i128()?);
                    }
                }
                Some(ScaledQuantity {
                    comps,
                    values,
                    modulus: None,
                })
            }
        }
    }

    pub fn to_document(&self) -> QuantityDocument {
        let (domain, m, k) = match self.domain {
            Domain::Rational => ("rational", None, None),
            Domain::Vector(k) => ("vector", None, Some(k)),
            Domain::Mod(m) => ("mod", Some(m), None),
        };
        QuantityDocument {
            domain: domain.to_string(),
            m,
            k,
            values: self.values.iter().map(Value::to_json).collect(),
        }
    }

    pub fn from_document(doc: &QuantityDocument) -> Result<Self> {
        match doc.domain.as_str() {
            "rational" => Quantity::rational(
                doc.values
                    .iter()
                    .map(rational_from_json)
                    .collect::<Result<_>>()?,
            ),
            "vector" => {
                let rows = doc
                    .values
                    .iter()
                    .map(|v| match v {
                        Json::Array(items) => items.iter().map(rational_from_json).collect(),
                        other => Err(Error::Parse(format!("expected array, got {other}"))),
                    })
                    .collect::<Result<Vec<Vec<BigRational>>>>()?;
                let k = match doc.k {
                    Some(k) => k,
                    None => rows.first().map(Vec::len).unwrap_or(0),
                };
                Quantity::vector(k, rows)
            }
            "mod" => {
                let m = doc
                    .m
                    .ok_or_else(|| Error::Quantity("mod domain requires \"m\"".into()))?;
                let vals = doc
                    .values
                    .iter()
                    .map(|v| {
                        v.as_i64()
                            .ok_or_else(|| Error::Parse(format!("expected integer, got {v}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Quantity::modular(m, &vals)
            }
            other => Err(Error::Quantity(format!("unknown domain {other:?}"))),
        }
    }
}

/// Integer-scaled values, symbol-major: `values[s * comps + k]`.
#[derive(Clone, Debug)]
pub struct ScaledQuantity {
    pub comps: usize,
    pub values: Vec<i128>,
    pub modulus: Option<i128>,
}

impl ScaledQuantity {
    #[inline]
    pub fn get(&self, s: Symbol, k: usize) -> i128 {
        self.values[s as usize * self.comps + k]
    }

    #[inline]
    pub fn is_zero(&self, x: i128) -> bool {
        match self.modulus {
            Some(m) => x.rem_euclid(m) == 0,
            None => x == 0,
        }
    }
}

/// On-disk quantity format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityDocument {
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub values: Vec<Json>,
}
