//! Exact spatial averages on configurations whose limits are computable:
//! eventually periodic lines and tori.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::engine::image_at;
use crate::error::{Error, Result};
use crate::lattice::{Point, Sites, Symbol, TorusConfig};
use crate::quantity::{Quantity, Value};
use crate::rules::LocalRule;

/// A 1-D configuration that is periodic to the left of `start` with period
/// `left`, equal to `middle` on `[start, start + |middle|)`, and periodic to
/// the right with period `right`.
///
/// Left of `start`, `a_x = left[(x - start) mod |left|]`; right of the middle
/// block, `a_x = right[(x - end) mod |right|]` with `end = start + |middle|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventuallyPeriodic {
    left: Vec<Symbol>,
    start: i64,
    middle: Vec<Symbol>,
    right: Vec<Symbol>,
}

impl EventuallyPeriodic {
    pub fn new(left: Vec<Symbol>, start: i64, middle: Vec<Symbol>, right: Vec<Symbol>) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::Configuration("periodic tails must be nonempty".into()));
        }
        Ok(EventuallyPeriodic {
            left,
            start,
            middle,
            right,
        }
        .normalized())
    }

    /// The bi-infinite repetition of `period`, phase-aligned so that
    /// `a_0 = period[0]`.
    pub fn periodic(period: Vec<Symbol>) -> Result<Self> {
        Self::new(period.clone(), 0, Vec::new(), period)
    }

    pub fn left(&self) -> &[Symbol] {
        &self.left
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn middle(&self) -> &[Symbol] {
        &self.middle
    }

    pub fn right(&self) -> &[Symbol] {
        &self.right
    }

    fn end(&self) -> i64 {
        self.start + self.middle.len() as i64
    }

    /// Absorbs middle cells that already agree with the adjacent tail.
    fn normalized(mut self) -> Self {
        while !self.middle.is_empty() && self.middle[0] == self.left[0] {
            self.middle.remove(0);
            self.left.rotate_left(1);
            self.start += 1;
        }
        while let Some(&last) = self.middle.last() {
            if last != self.right[self.right.len() - 1] {
                break;
            }
            self.middle.pop();
            self.right.rotate_right(1);
        }
        self
    }

    /// One step of a 1-D rule.
    pub fn step(&self, rule: &LocalRule) -> Result<Self> {
        let r = rule
            .nbhd()
            .interval_radius()
            .ok_or(Error::NotOneDimensional)? as i64;
        let start = self.start - r;
        let end = self.end() + r;
        let l = self.left.len() as i64;
        let rl = self.right.len() as i64;
        let at = |x: i64| image_at(rule, self, &Point::at(x));
        let left = (0..l).map(|j| at(start - l + j)).collect();
        let middle = (start..end).map(at).collect();
        let right = (0..rl).map(|j| at(end + j)).collect();
        Ok(EventuallyPeriodic {
            left,
            start,
            middle,
            right,
        }
        .normalized())
    }
}

impl Sites for EventuallyPeriodic {
    fn dim(&self) -> usize {
        1
    }

    fn symbol_at(&self, p: &Point) -> Symbol {
        let x = p.0[0];
        if x < self.start {
            self.left[(x - self.start).rem_euclid(self.left.len() as i64) as usize]
        } else if x < self.end() {
            self.middle[(x - self.start) as usize]
        } else {
            self.right[(x - self.end()).rem_euclid(self.right.len() as i64) as usize]
        }
    }
}

fn divide(v: &Value, n: usize) -> Result<Value> {
    let d = BigRational::from_integer(BigInt::from(n));
    match v {
        Value::Rational(q) => Ok(Value::Rational(q / &d)),
        Value::Vector(c) => Ok(Value::Vector(c.iter().map(|q| q / &d).collect())),
        Value::Mod { .. } => Err(Error::Unsupported("averages need an ordered field".into())),
    }
}

/// `lim (1/|I_n|) Σ_{i in I_n} φ(a_i)` over `I_n = [0..n]`: the mean of `φ`
/// over the right period.
pub fn cesaro_average(phi: &Quantity, a: &EventuallyPeriodic) -> Result<Value> {
    divide(&phi.total_symbols(a.right()), a.right().len())
}

/// Mean of `φ` over the torus, the average of its periodic lift.
pub fn cesaro_average_torus(phi: &Quantity, a: &TorusConfig) -> Result<Value> {
    divide(&phi.total_symbols(a.cells()), a.len())
}

/// `(1/(n+1)) Σ_{i=0}^{n} φ(a_i)` for finite `n`.
pub fn partial_average(phi: &Quantity, a: &impl Sites, n: usize) -> Result<Value> {
    let mut acc = Value::zero(phi.domain());
    for i in 0..=n as i64 {
        acc.add_assign(phi.value(a.symbol_at(&Point::at(i))));
    }
    divide(&acc, n + 1)
}
