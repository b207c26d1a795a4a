//! Lattice geometry on `Z^D`: points, neighborhoods, finite windows, sparse
//! configurations and toroidal quotients.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a symbol in a finite alphabet.
pub type Symbol = u8;

/// A point of `Z^D`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn origin(dim: usize) -> Self {
        Point(vec![0; dim])
    }

    /// One-dimensional point.
    pub fn at(x: i64) -> Self {
        Point(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Point {
        Point(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<i64> for Point {
    fn from(x: i64) -> Self {
        Point::at(x)
    }
}

impl From<Vec<i64>> for Point {
    fn from(v: Vec<i64>) -> Self {
        Point(v)
    }
}

/// Finite neighborhood of the origin, kept in lexicographic order.
///
/// Always symmetric (`b` in `B` iff `-b` in `B`) and always contains the
/// origin.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Neighborhood {
    dim: usize,
    offsets: Vec<Point>,
}

impl Neighborhood {
    pub fn new(dim: usize, offsets: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Neighborhood("dimension must be positive".into()));
        }
        if let Some(p) = offsets.iter().find(|p| p.dim() != dim) {
            return Err(Error::Neighborhood(format!(
                "offset {p:?} does not have dimension {dim}"
            )));
        }
        let set: BTreeSet<Point> = offsets.iter().cloned().collect();
        if set.len() != offsets.len() {
            return Err(Error::Neighborhood("duplicate offsets".into()));
        }
        if !set.contains(&Point::origin(dim)) {
            return Err(Error::Neighborhood("origin missing".into()));
        }
        if let Some(p) = set.iter().find(|p| !set.contains(&p.neg())) {
            return Err(Error::Neighborhood(format!(
                "not symmetric: {p:?} present but its negation is not"
            )));
        }
        Ok(Neighborhood {
            dim,
            offsets: set.into_iter().collect(),
        })
    }

    /// Smallest valid neighborhood containing `offsets`: adds the origin and
    /// all negations.
    pub fn hull(dim: usize, offsets: &[Point]) -> Result<Self> {
        let mut set: BTreeSet<Point> = offsets.iter().cloned().collect();
        set.extend(offsets.iter().map(Point::neg));
        set.insert(Point::origin(dim));
        Neighborhood::new(dim, set.into_iter().collect())
    }

    /// The one-dimensional interval `[-r..r]`.
    pub fn interval(radius: usize) -> Self {
        let r = radius as i64;
        Neighborhood {
            dim: 1,
            offsets: (-r..=r).map(Point::at).collect(),
        }
    }

    /// The box `[-r..r]^D`.
    pub fn moore(dim: usize, radius: usize) -> Self {
        let r = radius as i64;
        let lo = vec![-r; dim];
        let hi = vec![r; dim];
        Neighborhood {
            dim,
            offsets: box_points(&lo, &hi),
        }
    }

    /// `{0, ±e_i}`.
    pub fn von_neumann(dim: usize) -> Self {
        let mut pts = vec![Point::origin(dim)];
        for axis in 0..dim {
            for s in [-1, 1] {
                let mut p = vec![0; dim];
                p[axis] = s;
                pts.push(Point(p));
            }
        }
        pts.sort();
        Neighborhood { dim, offsets: pts }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offsets(&self) -> &[Point] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.offsets.binary_search(p).ok()
    }

    pub fn origin_index(&self) -> usize {
        self.index_of(&Point::origin(self.dim))
            .expect("neighborhood contains the origin")
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.index_of(p).is_some()
    }

    /// Minkowski sum `B + B`.
    pub fn double(&self) -> Neighborhood {
        self.sum(self)
    }

    /// Minkowski sum `B + C`.
    pub fn sum(&self, other: &Neighborhood) -> Neighborhood {
        let set: BTreeSet<Point> = self
            .offsets
            .iter()
            .flat_map(|a| other.offsets.iter().map(move |b| a.add(b)))
            .collect();
        Neighborhood {
            dim: self.dim,
            offsets: set.into_iter().collect(),
        }
    }

    /// Per-axis bounding box `(min, max)`.
    pub fn bounds(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = vec![0; self.dim];
        let mut hi = vec![0; self.dim];
        for p in &self.offsets {
            for (i, &c) in p.0.iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        (lo, hi)
    }

    /// True when the neighborhood is exactly its bounding box.
    pub fn is_box(&self) -> bool {
        let (lo, hi) = self.bounds();
        let volume: i64 = lo.iter().zip(&hi).map(|(l, h)| h - l + 1).product();
        volume == self.offsets.len() as i64
    }

    /// `Some(r)` when this is the 1-D interval `[-r..r]`.
    pub fn interval_radius(&self) -> Option<usize> {
        if self.dim != 1 || !self.is_box() {
            return None;
        }
        Some(self.bounds().1[0] as usize)
    }

    pub fn is_subset_of(&self, other: &Neighborhood) -> bool {
        self.offsets.iter().all(|p| other.contains(p))
    }

    /// For each center `v` in `centers`, the positions in `frame` of the
    /// points `v + b` (b in canonical order). `None` if some point falls
    /// outside `frame`.
    pub fn taps(&self, centers: &[Point], frame: &Neighborhood) -> Option<Vec<Vec<usize>>> {
        centers
            .iter()
            .map(|v| {
                self.offsets
                    .iter()
                    .map(|b| frame.index_of(&v.add(b)))
                    .collect::<Option<Vec<_>>>()
            })
            .collect()
    }
}

fn box_points(lo: &[i64], hi: &[i64]) -> Vec<Point> {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = lo.to_vec();
    loop {
        out.push(Point(cur.clone()));
        let mut axis = lo.len();
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if cur[axis] < hi[axis] {
                cur[axis] += 1;
                break;
            }
            cur[axis] = lo[axis];
        }
    }
}

#[derive(Clone, Debug)]
enum WindowRepr {
    Box { lo: Vec<i64>, hi: Vec<i64> },
    Points(BTreeSet<Point>),
}

/// A finite subset of `Z^D`.
///
/// Boxes are kept symbolically so that closure and interior against box
/// neighborhoods reduce to interval arithmetic.
#[derive(Clone, Debug)]
pub struct Window {
    dim: usize,
    repr: WindowRepr,
}

impl Window {
    pub fn empty(dim: usize) -> Self {
        Window {
            dim,
            repr: WindowRepr::Points(BTreeSet::new()),
        }
    }

    /// The 1-D interval `[lo..hi]` (empty when `lo > hi`).
    pub fn interval(lo: i64, hi: i64) -> Self {
        Window::boxed(vec![lo], vec![hi])
    }

    pub fn boxed(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        let dim = lo.len();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Window::empty(dim);
        }
        Window {
            dim,
            repr: WindowRepr::Box { lo, hi },
        }
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = Point>) -> Self {
        let set: BTreeSet<Point> = points.into_iter().collect();
        debug_assert!(set.iter().all(|p| p.dim() == dim));
        Window {
            dim,
            repr: WindowRepr::Points(set),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            WindowRepr::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| (h - l + 1) as usize)
                .product(),
            WindowRepr::Points(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, p: &Point) -> bool {
        match &self.repr {
            WindowRepr::Box { lo, hi } => p
                .0
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(c, (l, h))| l <= c && c <= h),
            WindowRepr::Points(s) => s.contains(p),
        }
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> Vec<Point> {
        match &self.repr {
            WindowRepr::Box { lo, hi } => box_points(lo, hi),
            WindowRepr::Points(s) => s.iter().cloned().collect(),
        }
    }

    /// `cl[W] = B + W`.
    pub fn closure(&self, nbhd: &Neighborhood) -> Window {
        if let WindowRepr::Box { lo, hi } = &self.repr {
            if nbhd.is_box() {
                let (blo, bhi) = nbhd.bounds();
                return Window::boxed(
                    lo.iter().zip(&blo).map(|(a, b)| a + b).collect(),
                    hi.iter().zip(&bhi).map(|(a, b)| a + b).collect(),
                );
            }
        }
        let pts = self.points();
        Window::from_points(
            self.dim,
            pts.iter()
                .flat_map(|w| nbhd.offsets().iter().map(move |b| w.add(b))),
        )
    }

    /// `int[W] = { w in W : B + w ⊂ W }`.
    pub fn interior(&self, nbhd: &Neighborhood) -> Window {
        if let WindowRepr::Box { lo, hi } = &self.repr {
            if nbhd.is_box() {
                let (blo, bhi) = nbhd.bounds();
                return Window::boxed(
                    lo.iter().zip(&blo).map(|(a, b)| a - b).collect(),
                    hi.iter().zip(&bhi).map(|(a, b)| a - b).collect(),
                );
            }
        }
        let pts = self.points();
        Window::from_points(
            self.dim,
            pts.into_iter()
                .filter(|w| nbhd.offsets().iter().all(|b| self.contains(&w.add(b)))),
        )
    }

    pub fn union(&self, other: &Window) -> Window {
        Window::from_points(self.dim, self.points().into_iter().chain(other.points()))
    }

    pub fn difference(&self, other: &Window) -> Window {
        Window::from_points(
            self.dim,
            self.points().into_iter().filter(|p| !other.contains(p)),
        )
    }

    pub fn is_subset_of(&self, other: &Window) -> bool {
        self.points().iter().all(|p| other.contains(p))
    }
}

impl PartialEq for Window {
    fn eq(&self, other: &Self) -> bool {
        if let (WindowRepr::Box { lo: a, hi: b }, WindowRepr::Box { lo: c, hi: d }) =
            (&self.repr, &other.repr)
        {
            return a == c && b == d;
        }
        self.dim == other.dim && self.points() == other.points()
    }
}

impl Eq for Window {}

/// Read access to the symbol at each site of `Z^D`.
pub trait Sites {
    fn dim(&self) -> usize;
    fn symbol_at(&self, p: &Point) -> Symbol;
}

/// Symbols on a finite window.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Pattern {
    cells: BTreeMap<Point, Symbol>,
}

impl Pattern {
    pub fn new(cells: BTreeMap<Point, Symbol>) -> Self {
        Pattern { cells }
    }

    /// 1-D pattern with `symbols[i]` at site `start + i`.
    pub fn from_word(start: i64, symbols: &[Symbol]) -> Self {
        Pattern {
            cells: symbols
                .iter()
                .enumerate()
                .map(|(i, &s)| (Point::at(start + i as i64), s))
                .collect(),
        }
    }

    pub fn get(&self, p: &Point) -> Option<Symbol> {
        self.cells.get(p).copied()
    }

    pub fn cells(&self) -> &BTreeMap<Point, Symbol> {
        &self.cells
    }

    /// Symbols in lexicographic site order.
    pub fn symbols(&self) -> Vec<Symbol> {
        self.cells.values().copied().collect()
    }

    pub fn window(&self, dim: usize) -> Window {
        Window::from_points(dim, self.cells.keys().cloned())
    }
}

/// `a|_W`.
pub fn restrict(a: &impl Sites, w: &Window) -> Pattern {
    Pattern {
        cells: w
            .points()
            .into_iter()
            .map(|p| {
                let s = a.symbol_at(&p);
                (p, s)
            })
            .collect(),
    }
}

/// Sparse configuration: a uniform background plus finitely many overrides.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Configuration {
    dim: usize,
    background: Symbol,
    overrides: BTreeMap<Point, Symbol>,
}

impl Configuration {
    pub fn uniform(dim: usize, background: Symbol) -> Self {
        Configuration {
            dim,
            background,
            overrides: BTreeMap::new(),
        }
    }

    pub fn from_overrides(
        dim: usize,
        background: Symbol,
        overrides: impl IntoIterator<Item = (Point, Symbol)>,
    ) -> Result<Self> {
        let mut c = Configuration::uniform(dim, background);
        for (p, s) in overrides {
            if p.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: p.dim(),
                });
            }
            c.set(p, s);
        }
        Ok(c)
    }

    /// 1-D configuration with `word[i]` at site `start + i`.
    pub fn from_word(background: Symbol, start: i64, word: &[Symbol]) -> Self {
        let mut c = Configuration::uniform(1, background);
        for (i, &s) in word.iter().enumerate() {
            c.set(Point::at(start + i as i64), s);
        }
        c
    }

    pub fn set(&mut self, p: Point, s: Symbol) {
        if s == self.background {
            self.overrides.remove(&p);
        } else {
            self.overrides.insert(p, s);
        }
    }

    pub fn background(&self) -> Symbol {
        self.background
    }

    pub fn overrides(&self) -> &BTreeMap<Point, Symbol> {
        &self.overrides
    }

    /// Sites differing from the background.
    pub fn support(&self) -> Window {
        Window::from_points(self.dim, self.overrides.keys().cloned())
    }

    pub fn restrict(&self, w: &Window) -> Pattern {
        restrict(self, w)
    }

    pub fn max_symbol(&self) -> Symbol {
        self.overrides
            .values()
            .copied()
            .fold(self.background, Symbol::max)
    }
}

impl Sites for Configuration {
    fn dim(&self) -> usize {
        self.dim
    }

    fn symbol_at(&self, p: &Point) -> Symbol {
        self.overrides.get(p).copied().unwrap_or(self.background)
    }
}

/// Configuration on the torus `Z/M_1 x ... x Z/M_D`, stored row-major (last
/// axis fastest).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TorusConfig {
    moduli: Vec<usize>,
    cells: Vec<Symbol>,
}

impl TorusConfig {
    pub fn new(moduli: Vec<usize>, cells: Vec<Symbol>) -> Result<Self> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(Error::Configuration(
                "torus moduli must be non-empty and positive".into(),
            ));
        }
        let n: usize = moduli.iter().product();
        if n != cells.len() {
            return Err(Error::Configuration(format!(
                "torus has {n} sites but {} cells given",
                cells.len()
            )));
        }
        Ok(TorusConfig { moduli, cells })
    }

    pub fn uniform(moduli: Vec<usize>, s: Symbol) -> Result<Self> {
        let n = moduli.iter().product();
        TorusConfig::new(moduli, vec![s; n])
    }

    /// Checks that the doubled neighborhood embeds injectively: every modulus
    /// must exceed the diameter of `B + B` along its axis.
    pub fn validate_for(moduli: &[usize], nbhd: &Neighborhood) -> Result<()> {
        if moduli.len() != nbhd.dim() {
            return Err(Error::Dimension {
                expected: nbhd.dim(),
                found: moduli.len(),
            });
        }
        let (lo, hi) = nbhd.bounds();
        for (axis, &m) in moduli.iter().enumerate() {
            let diameter = (2 * (hi[axis] - lo[axis])) as usize;
            if m <= diameter {
                return Err(Error::TorusModulus {
                    axis,
                    modulus: m,
                    min_exclusive: diameter,
                });
            }
        }
        Ok(())
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    pub fn cells(&self) -> &[Symbol] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_of(&self, p: &Point) -> usize {
        let mut idx = 0usize;
        for (c, &m) in p.0.iter().zip(&self.moduli) {
            idx = idx * m + c.rem_euclid(m as i64) as usize;
        }
        idx
    }

    pub fn point_of(&self, mut idx: usize) -> Point {
        let mut coords = vec![0i64; self.moduli.len()];
        for axis in (0..self.moduli.len()).rev() {
            coords[axis] = (idx % self.moduli[axis]) as i64;
            idx /= self.moduli[axis];
        }
        Point(coords)
    }

    /// `σ^u`: the configuration `b` with `b_x = a_{x+u}`.
    pub fn shifted(&self, u: &Point) -> TorusConfig {
        let cells = (0..self.len())
            .map(|i| self.symbol_at(&self.point_of(i).add(u)))
            .collect();
        TorusConfig {
            moduli: self.moduli.clone(),
            cells,
        }
    }

    /// Window covering one fundamental domain.
    pub fn full_window(&self) -> Window {
        Window::boxed(
            vec![0; self.moduli.len()],
            self.moduli.iter().map(|&m| m as i64 - 1).collect(),
        )
    }
}

impl Sites for TorusConfig {
    fn dim(&self) -> usize {
        self.moduli.len()
    }

    fn symbol_at(&self, p: &Point) -> Symbol {
        self.cells[self.index_of(p)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[i64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::at(x)).collect()
    }

    #[test]
    fn double_of_interval() {
        let b = Neighborhood::interval(1);
        assert_eq!(b.double().offsets(), pts(&[-2, -1, 0, 1, 2]).as_slice());
        let zero = Neighborhood::interval(0);
        assert_eq!(zero.double(), zero);
        let sq = Neighborhood::moore(2, 1);
        assert_eq!(sq.double(), Neighborhood::moore(2, 2));
    }

    #[test]
    fn rejects_asymmetric_or_originless() {
        assert!(Neighborhood::new(1, pts(&[0, 1])).is_err());
        assert!(Neighborhood::new(1, pts(&[-1, 1])).is_err());
        assert!(Neighborhood::new(1, pts(&[0, 0])).is_err());
        let h = Neighborhood::hull(1, &pts(&[1])).unwrap();
        assert_eq!(h, Neighborhood::interval(1));
    }

    #[test]
    fn closure_and_interior_of_intervals() {
        let b = Neighborhood::interval(1);
        let w = Window::interval(0, 4);
        assert_eq!(w.closure(&b), Window::interval(-1, 5));
        assert_eq!(w.interior(&b), Window::interval(1, 3));
        let e = Window::empty(1);
        assert!(e.closure(&b).is_empty());
        assert!(e.interior(&b).is_empty());
        assert!(Window::interval(0, 1).interior(&b).is_empty());
    }

    #[test]
    fn box_fast_path_matches_general_path() {
        let b = Neighborhood::moore(2, 1);
        let boxed = Window::boxed(vec![0, -1], vec![3, 2]);
        let general = Window::from_points(2, boxed.points());
        assert_eq!(boxed.closure(&b).points(), general.closure(&b).points());
        assert_eq!(boxed.interior(&b).points(), general.interior(&b).points());
    }

    #[test]
    fn restrict_fills_background() {
        let a = Configuration::from_overrides(1, 0, [(Point::at(3), 1)]).unwrap();
        let p = a.restrict(&Window::interval(2, 4));
        assert_eq!(p.symbols(), vec![0, 1, 0]);
        let c = Configuration::uniform(1, 2);
        assert_eq!(c.restrict(&Window::interval(-3, 3)).symbols(), vec![2; 7]);
        let ex = Configuration::from_word(0, 0, &[1, 1]);
        assert_eq!(ex.restrict(&Window::interval(-1, 1)).symbols(), vec![0, 1, 1]);
    }

    #[test]
    fn overrides_never_hold_background() {
        let mut a = Configuration::uniform(1, 0);
        a.set(Point::at(1), 1);
        a.set(Point::at(1), 0);
        assert!(a.overrides().is_empty());
    }

    #[test]
    fn torus_modulus_validation() {
        let b = Neighborhood::interval(1);
        assert!(TorusConfig::validate_for(&[4], &b).is_err());
        assert!(TorusConfig::validate_for(&[5], &b).is_ok());
        assert!(TorusConfig::validate_for(&[5, 4], &Neighborhood::moore(2, 1)).is_err());
    }

    #[test]
    fn torus_indexing_wraps() {
        let t = TorusConfig::new(vec![2, 3], vec![0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(t.symbol_at(&Point(vec![1, 2])), 5);
        assert_eq!(t.symbol_at(&Point(vec![-1, -1])), 5);
        assert_eq!(t.point_of(4), Point(vec![1, 1]));
        let s = t.shifted(&Point(vec![0, 1]));
        assert_eq!(s.cells(), &[1, 2, 0, 4, 5, 3]);
    }
}
