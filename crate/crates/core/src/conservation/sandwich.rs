//! Window bounds for nonnegative conserved quantities:
//! `Σφ(a)|int W ≤ Σφ(F a)|W ≤ Σφ(a)|cl W`.

use crate::engine::image_at;
use crate::error::{Error, Result};
use crate::lattice::{Sites, Window};
use crate::quantity::{Quantity, Value};
use crate::rules::LocalRule;

#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub holds: bool,
    pub lower_holds: bool,
    pub upper_holds: bool,
    /// `Σφ(a)|int W`
    pub interior_total: Value,
    /// `Σφ(F a)|W`
    pub window_total: Value,
    /// `Σφ(a)|cl W`
    pub closure_total: Value,
}

pub fn sandwich_check(
    rule: &LocalRule,
    phi: &Quantity,
    a: &impl Sites,
    w: &Window,
) -> Result<SandwichReport> {
    if !phi.is_nonnegative() {
        return Err(Error::NegativeQuantity);
    }
    if a.dim() != rule.dim() || w.dim() != rule.dim() {
        return Err(Error::Dimension {
            expected: rule.dim(),
            found: a.dim(),
        });
    }
    let nbhd = rule.nbhd();
    let interior_total = phi.total_window(a, &w.interior(nbhd));
    let closure_total = phi.total_window(a, &w.closure(nbhd));
    let mut window_total = Value::zero(phi.domain());
    for x in w.points() {
        window_total.add_assign(phi.value(image_at(rule, a, &x)));
    }
    let lower_holds = interior_total.le(&window_total).expect("ordered domain");
    let upper_holds = window_total.le(&closure_total).expect("ordered domain");
    Ok(SandwichReport {
        holds: lower_holds && upper_holds,
        lower_holds,
        upper_holds,
        interior_total,
        window_total,
        closure_total,
    })
}
