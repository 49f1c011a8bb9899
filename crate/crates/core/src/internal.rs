//! Internal space of a cut & project scheme.
//!
//! The internal group is a finite product of Euclidean axes, finite cyclic
//! groups and depth-truncated odometers (`Z_p` modulo `p^D`). A [`Window`] is
//! stored as a map from compact residue tuples ("atoms") to a finite union of
//! axis-aligned boxes over the Euclidean axes. Compact atoms are clopen, so
//! every boundary question reduces to the Euclidean boxes of one atom.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::QuadRational;

/// Upper bound on the number of compact residues enumerated by any operation.
pub const MAX_COMPACT_ELEMENTS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InternalError {
    #[error("point or window does not live on this internal group: {0}")]
    GroupMismatch(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("compact part has {0} elements, above the enumeration cap")]
    TooLarge(u64),
    #[error("not a subgroup of the compact part: {0}")]
    NotASubgroup(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Component {
    Euclidean,
    Cyclic { order: u64 },
    /// `Z_p` truncated to residues modulo `p^depth`.
    Odometer { prime: u64, depth: u32 },
}

impl Component {
    /// Order of the finite quotient this component is modelled by.
    pub fn modulus(&self) -> Option<u64> {
        match self {
            Component::Euclidean => None,
            Component::Cyclic { order } => Some(*order),
            Component::Odometer { prime, depth } => Some(prime.pow(*depth)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InternalGroup {
    components: Vec<Component>,
}

impl InternalGroup {
    pub fn new(components: Vec<Component>) -> Result<Self, InternalError> {
        for c in &components {
            match c {
                Component::Euclidean => {}
                Component::Cyclic { order } if *order >= 2 => {}
                Component::Odometer { prime, depth } if is_prime(*prime) && *depth >= 1 => {
                    if prime.checked_pow(*depth).is_none() {
                        return Err(InternalError::TooLarge(u64::MAX));
                    }
                }
                other => {
                    return Err(InternalError::InvalidWindow(format!("bad component {other:?}")));
                }
            }
        }
        let g = InternalGroup { components };
        g.compact_size()?;
        Ok(g)
    }

    pub fn trivial() -> Self {
        InternalGroup { components: vec![] }
    }

    pub fn euclidean(dim: usize) -> Self {
        InternalGroup {
            components: vec![Component::Euclidean; dim],
        }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn euclid_dim(&self) -> usize {
        self.components.iter().filter(|c| **c == Component::Euclidean).count()
    }

    pub fn compact_components(&self) -> Vec<&Component> {
        self.components.iter().filter(|c| c.modulus().is_some()).collect()
    }

    pub fn compact_moduli(&self) -> Vec<u64> {
        self.components.iter().filter_map(|c| c.modulus()).collect()
    }

    pub fn compact_size(&self) -> Result<u64, InternalError> {
        let mut n: u64 = 1;
        for m in self.compact_moduli() {
            n = n.checked_mul(m).ok_or(InternalError::TooLarge(u64::MAX))?;
        }
        Ok(n)
    }

    pub fn zero(&self) -> InternalPoint {
        InternalPoint {
            real: vec![QuadRational::zero(); self.euclid_dim()],
            residues: vec![0; self.compact_moduli().len()],
        }
    }

    /// All elements of the compact part, in lexicographic order.
    pub fn compact_elements(&self) -> Result<Vec<Vec<u64>>, InternalError> {
        let size = self.compact_size()?;
        if size > MAX_COMPACT_ELEMENTS {
            return Err(InternalError::TooLarge(size));
        }
        Ok(product_of(&self.compact_moduli().iter().map(|&m| (0..m).collect()).collect::<Vec<_>>()))
    }

    pub fn check_point(&self, x: &InternalPoint) -> Result<(), InternalError> {
        let moduli = self.compact_moduli();
        if x.real.len() != self.euclid_dim() || x.residues.len() != moduli.len() {
            return Err(InternalError::GroupMismatch(format!(
                "point has {} real and {} compact coordinates",
                x.real.len(),
                x.residues.len()
            )));
        }
        if x.residues.iter().zip(&moduli).any(|(r, m)| r >= m) {
            return Err(InternalError::GroupMismatch("residue out of range".into()));
        }
        Ok(())
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

pub(crate) fn product_of(sets: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = vec![vec![]];
    for set in sets {
        let mut next = Vec::with_capacity(out.len() * set.len());
        for prefix in &out {
            for &v in set {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// A point of the internal group: real coordinates for the Euclidean axes and
/// residues for the compact components, each list in component order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InternalPoint {
    pub real: Vec<QuadRational>,
    pub residues: Vec<u64>,
}

/// One coordinate in the textual/JSON form of an internal point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Residue(u64),
    Real(QuadRational),
}

impl InternalPoint {
    pub fn new(real: Vec<QuadRational>, residues: Vec<u64>) -> Self {
        InternalPoint { real, residues }
    }

    pub fn real(x: QuadRational) -> Self {
        InternalPoint {
            real: vec![x],
            residues: vec![],
        }
    }

    pub fn add(&self, other: &Self, group: &InternalGroup) -> Self {
        let moduli = group.compact_moduli();
        InternalPoint {
            real: self.real.iter().zip(&other.real).map(|(a, b)| a + b).collect(),
            residues: self
                .residues
                .iter()
                .zip(&other.residues)
                .zip(&moduli)
                .map(|((a, b), m)| (a + b) % m)
                .collect(),
        }
    }

    pub fn neg(&self, group: &InternalGroup) -> Self {
        let moduli = group.compact_moduli();
        InternalPoint {
            real: self.real.iter().map(|a| -a).collect(),
            residues: self.residues.iter().zip(&moduli).map(|(a, m)| (m - a % m) % m).collect(),
        }
    }

    pub fn sub(&self, other: &Self, group: &InternalGroup) -> Self {
        self.add(&other.neg(group), group)
    }

    /// Integer multiple `n * self`.
    pub fn mul_int(&self, n: i64, group: &InternalGroup) -> Self {
        let moduli = group.compact_moduli();
        let q = QuadRational::int(n);
        InternalPoint {
            real: self.real.iter().map(|a| a * &q).collect(),
            residues: self
                .residues
                .iter()
                .zip(&moduli)
                .map(|(a, &m)| ((*a as i128 * n as i128).rem_euclid(m as i128)) as u64)
                .collect(),
        }
    }

    pub fn to_coords(&self, group: &InternalGroup) -> Vec<Coord> {
        let (mut ri, mut ci) = (0, 0);
        group
            .components()
            .iter()
            .map(|c| match c {
                Component::Euclidean => {
                    ri += 1;
                    Coord::Real(self.real[ri - 1].clone())
                }
                _ => {
                    ci += 1;
                    Coord::Residue(self.residues[ci - 1])
                }
            })
            .collect()
    }

    pub fn from_coords(coords: &[Coord], group: &InternalGroup) -> Result<Self, InternalError> {
        if coords.len() != group.components().len() {
            return Err(InternalError::GroupMismatch(format!(
                "expected {} coordinates, got {}",
                group.components().len(),
                coords.len()
            )));
        }
        let mut p = InternalPoint::new(vec![], vec![]);
        for (c, comp) in coords.iter().zip(group.components()) {
            match (comp, c) {
                (Component::Euclidean, Coord::Real(x)) => p.real.push(x.clone()),
                (Component::Euclidean, Coord::Residue(n)) => p.real.push(QuadRational::int(*n as i64)),
                (other, Coord::Residue(r)) => {
                    let m = other.modulus().expect("compact component");
                    p.residues.push(r % m);
                }
                (_, Coord::Real(x)) if x.is_integer() => {
                    let m = comp.modulus().expect("compact component") as i128;
                    let v: i128 = x.floor().try_into().map_err(|_| {
                        InternalError::GroupMismatch("residue too large".into())
                    })?;
                    p.residues.push(v.rem_euclid(m) as u64);
                }
                (_, Coord::Real(x)) => {
                    return Err(InternalError::GroupMismatch(format!(
                        "compact coordinate must be an integer, got {x}"
                    )));
                }
            }
        }
        Ok(p)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.real.iter().map(|x| x.to_f64()).collect()
    }
}

/// Membership semantics for window predicates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    /// Closure of the window.
    Closure,
    /// Topological interior of the window.
    Interior,
    /// The window exactly as declared, honoring its endpoint flags.
    Declared,
    /// `lim W + eps*v` for `eps -> 0+`, with `v` given by one sign per
    /// Euclidean axis. Always lies between interior and closure.
    Limit(Vec<i8>),
}

/// Interval of one Euclidean axis. `lo == hi` only for closed single points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub lo: QuadRational,
    pub hi: QuadRational,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: QuadRational, hi: QuadRational, lo_closed: bool, hi_closed: bool) -> Option<Self> {
        let iv = Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        };
        iv.is_nonempty().then_some(iv)
    }

    pub fn closed(lo: QuadRational, hi: QuadRational) -> Self {
        Interval::new(lo, hi, true, true).expect("lo <= hi")
    }

    pub fn half_open(lo: QuadRational, hi: QuadRational) -> Self {
        Interval::new(lo, hi, true, false).expect("lo < hi")
    }

    pub fn point(x: QuadRational) -> Self {
        Interval::closed(x.clone(), x)
    }

    fn is_nonempty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Equal => self.lo_closed && self.hi_closed,
            std::cmp::Ordering::Greater => false,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn length(&self) -> QuadRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &QuadRational) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    pub fn closure_contains(&self, x: &QuadRational) -> bool {
        *x >= self.lo && *x <= self.hi
    }

    /// Whether `x + eps*sigma` lies in the interval for all small `eps > 0`.
    fn covers_germ(&self, x: &QuadRational, sigma: i8) -> bool {
        match sigma {
            0 => self.contains(x),
            s if s > 0 => *x >= self.lo && *x < self.hi,
            _ => *x > self.lo && *x <= self.hi,
        }
    }

    pub fn closure(&self) -> Self {
        Interval {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn shift(&self, by: &QuadRational) -> Self {
        Interval {
            lo: &self.lo + by,
            hi: &self.hi + by,
            ..self.clone()
        }
    }

    pub fn negate(&self) -> Self {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
            lo_closed: self.hi_closed,
            hi_closed: self.lo_closed,
        }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_closed),
            std::cmp::Ordering::Less => (other.lo.clone(), other.lo_closed),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_closed),
            std::cmp::Ordering::Greater => (other.hi.clone(), other.hi_closed),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }

    /// `self \ other` as at most two intervals.
    pub fn difference(&self, other: &Self) -> Vec<Self> {
        let mut out = Vec::new();
        // part strictly left of other.lo
        let left = match other.lo.cmp(&self.hi) {
            std::cmp::Ordering::Less => Interval::new(self.lo.clone(), other.lo.clone(), self.lo_closed, !other.lo_closed),
            std::cmp::Ordering::Equal => Interval::new(
                self.lo.clone(),
                self.hi.clone(),
                self.lo_closed,
                self.hi_closed && !other.lo_closed,
            ),
            std::cmp::Ordering::Greater => Some(self.clone()),
        };
        if let Some(l) = left {
            out.push(l);
        }
        let right = match other.hi.cmp(&self.lo) {
            std::cmp::Ordering::Greater => Interval::new(other.hi.clone(), self.hi.clone(), !other.hi_closed, self.hi_closed),
            std::cmp::Ordering::Equal => Interval::new(
                self.lo.clone(),
                self.hi.clone(),
                self.lo_closed && !other.hi_closed,
                self.hi_closed,
            ),
            std::cmp::Ordering::Less => Some(self.clone()),
        };
        if let Some(r) = right {
            // when `other` lies entirely to one side, both pieces equal `self`
            if out.first() != Some(&r) {
                out.push(r);
            }
        }
        out
    }

    pub fn minkowski_sum(&self, other: &Self) -> Self {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
            lo_closed: self.lo_closed && other.lo_closed,
            hi_closed: self.hi_closed && other.hi_closed,
        }
    }
}

/// Axis-aligned box over the Euclidean axes (empty list in dimension 0).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(pub Vec<Interval>);

impl Cell {
    fn contains(&self, x: &[QuadRational]) -> bool {
        self.0.iter().zip(x).all(|(iv, v)| iv.contains(v))
    }

    fn closure_contains(&self, x: &[QuadRational]) -> bool {
        self.0.iter().zip(x).all(|(iv, v)| iv.closure_contains(v))
    }

    fn covers_germ(&self, x: &[QuadRational], sigma: &[i8]) -> bool {
        self.0.iter().zip(x).zip(sigma).all(|((iv, v), &s)| iv.covers_germ(v, s))
    }

    fn is_degenerate(&self) -> bool {
        self.0.iter().any(Interval::is_degenerate)
    }

    fn closure(&self) -> Self {
        Cell(self.0.iter().map(Interval::closure).collect())
    }

    fn intersect(&self, other: &Self) -> Option<Self> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.intersect(b))
            .collect::<Option<Vec<_>>>()
            .map(Cell)
    }

    fn difference(&self, other: &Self) -> Vec<Self> {
        if self.intersect(other).is_none() {
            return vec![self.clone()];
        }
        let mut pieces = Vec::new();
        let mut core = self.clone();
        for axis in 0..self.0.len() {
            for piece in core.0[axis].difference(&other.0[axis]) {
                let mut c = core.clone();
                c.0[axis] = piece;
                pieces.push(c);
            }
            core.0[axis] = core.0[axis].intersect(&other.0[axis]).expect("checked overlap");
        }
        pieces
    }

    fn contains_cell(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| {
            let lo_ok = a.lo < b.lo || (a.lo == b.lo && (a.lo_closed || !b.lo_closed));
            let hi_ok = a.hi > b.hi || (a.hi == b.hi && (a.hi_closed || !b.hi_closed));
            lo_ok && hi_ok
        })
    }
}

/// Finite union of boxes, kept normalized. In dimension <= 1 the normalized
/// form is canonical (sorted, maximal, disjoint intervals).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxUnion(Vec<Cell>);

fn mergeable(a: &Interval, b: &Interval) -> bool {
    // a.lo <= b.lo assumed
    b.lo < a.hi || (b.lo == a.hi && (a.hi_closed || b.lo_closed))
}

fn merge_into(a: &mut Interval, b: &Interval) {
    if b.lo == a.lo {
        a.lo_closed |= b.lo_closed;
    }
    match b.hi.cmp(&a.hi) {
        std::cmp::Ordering::Greater => {
            a.hi = b.hi.clone();
            a.hi_closed = b.hi_closed;
        }
        std::cmp::Ordering::Equal => a.hi_closed |= b.hi_closed,
        std::cmp::Ordering::Less => {}
    }
}

impl BoxUnion {
    pub fn empty() -> Self {
        BoxUnion(vec![])
    }

    pub fn from_cells(dim: usize, cells: Vec<Cell>) -> Self {
        debug_assert!(cells.iter().all(|c| c.0.len() == dim));
        let mut u = BoxUnion(cells);
        u.normalize(dim);
        u
    }

    pub fn cells(&self) -> &[Cell] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn normalize(&mut self, dim: usize) {
        match dim {
            0 => {
                if !self.0.is_empty() {
                    self.0 = vec![Cell(vec![])];
                }
            }
            1 => {
                let mut ivs: Vec<Interval> = self.0.drain(..).map(|c| c.0.into_iter().next().unwrap()).collect();
                ivs.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
                let mut merged: Vec<Interval> = Vec::new();
                for iv in ivs {
                    match merged.last_mut() {
                        Some(last) if mergeable(last, &iv) => merge_into(last, &iv),
                        _ => merged.push(iv),
                    }
                }
                self.0 = merged.into_iter().map(|iv| Cell(vec![iv])).collect();
            }
            _ => {
                let mut cells: Vec<Cell> = std::mem::take(&mut self.0);
                loop {
                    cells.sort();
                    cells.dedup();
                    let mut changed = false;
                    // drop boxes contained in another one
                    let mut keep = vec![true; cells.len()];
                    for i in 0..cells.len() {
                        for j in 0..cells.len() {
                            if i != j && keep[j] && cells[j].contains_cell(&cells[i]) {
                                keep[i] = false;
                                changed = true;
                                break;
                            }
                        }
                    }
                    let mut next: Vec<Cell> = cells.iter().zip(&keep).filter(|(_, k)| **k).map(|(c, _)| c.clone()).collect();
                    // merge boxes differing along a single axis
                    'outer: for i in 0..next.len() {
                        for j in (i + 1)..next.len() {
                            let diff: Vec<usize> = (0..dim).filter(|&a| next[i].0[a] != next[j].0[a]).collect();
                            if diff.len() == 1 {
                                let a = diff[0];
                                let (x, y) = if next[i].0[a].lo <= next[j].0[a].lo {
                                    (next[i].0[a].clone(), next[j].0[a].clone())
                                } else {
                                    (next[j].0[a].clone(), next[i].0[a].clone())
                                };
                                if mergeable(&x, &y) {
                                    let mut m = x;
                                    merge_into(&mut m, &y);
                                    next[i].0[a] = m;
                                    next.remove(j);
                                    changed = true;
                                    break 'outer;
                                }
                            }
                        }
                    }
                    cells = next;
                    if !changed {
                        break;
                    }
                }
                cells.sort();
                self.0 = cells;
            }
        }
    }

    pub fn contains(&self, x: &[QuadRational], mode: &Membership) -> bool {
        match mode {
            Membership::Declared => self.0.iter().any(|c| c.contains(x)),
            Membership::Closure => self.0.iter().any(|c| c.closure_contains(x)),
            Membership::Limit(v) => {
                let sigma: Vec<i8> = v.iter().map(|s| -s.signum()).collect();
                self.0.iter().any(|c| c.covers_germ(x, &sigma))
            }
            Membership::Interior => {
                let dim = x.len();
                let sigmas = product_of(&vec![vec![0u64, 1, 2]; dim]);
                sigmas.iter().all(|s| {
                    let sigma: Vec<i8> = s.iter().map(|&v| v as i8 - 1).collect();
                    self.0.iter().any(|c| c.covers_germ(x, &sigma))
                })
            }
        }
    }

    fn intersect(&self, other: &Self, dim: usize) -> Self {
        let mut cells = Vec::new();
        for a in &self.0 {
            for b in &other.0 {
                if let Some(c) = a.intersect(b) {
                    cells.push(c);
                }
            }
        }
        BoxUnion::from_cells(dim, cells)
    }

    fn difference(&self, other: &Self, dim: usize) -> Self {
        let mut current: Vec<Cell> = self.0.clone();
        for b in &other.0 {
            current = current.iter().flat_map(|a| a.difference(b)).collect();
        }
        BoxUnion::from_cells(dim, current)
    }

    fn union(&self, other: &Self, dim: usize) -> Self {
        BoxUnion::from_cells(dim, self.0.iter().chain(&other.0).cloned().collect())
    }

    fn map_cells(&self, dim: usize, f: impl Fn(&Cell) -> Cell) -> Self {
        BoxUnion::from_cells(dim, self.0.iter().map(f).collect())
    }

    fn closure(&self, dim: usize) -> Self {
        self.map_cells(dim, Cell::closure)
    }

    /// Interior as a union of open boxes; exact for dimension <= 1.
    fn interior(&self, dim: usize) -> Self {
        let cells = self
            .0
            .iter()
            .filter(|c| !c.is_degenerate())
            .map(|c| {
                Cell(
                    c.0.iter()
                        .map(|iv| Interval {
                            lo: iv.lo.clone(),
                            hi: iv.hi.clone(),
                            lo_closed: false,
                            hi_closed: false,
                        })
                        .collect(),
                )
            })
            .collect();
        BoxUnion::from_cells(dim, cells)
    }

    fn is_regular(&self, dim: usize) -> bool {
        if dim == 0 {
            return true;
        }
        let closed = self.closure(dim);
        let (degenerate, solid): (Vec<Cell>, Vec<Cell>) = closed.0.into_iter().partition(Cell::is_degenerate);
        if degenerate.is_empty() {
            return true;
        }
        let solid = BoxUnion(solid);
        degenerate.into_iter().all(|d| BoxUnion(vec![d]).difference(&solid, dim).is_empty())
    }
}

/// Serialized form of the compact factor of a window cell: a residue subset for
/// a cyclic component, a cylinder for an odometer component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CompactPiece {
    Subset(Vec<u64>),
    Cylinder { residue: u64, depth: u32 },
}

/// Serialized window cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCell {
    pub intervals: Vec<Interval>,
    pub compact: Vec<CompactPiece>,
}

/// A subset of the internal group given as a finite union of cells.
///
/// Windows of a scheme must be topologically regular; the same type also
/// carries feasible regions, which may be degenerate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Window {
    group: InternalGroup,
    atoms: BTreeMap<Vec<u64>, BoxUnion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinkowskiOp {
    Sum,
    Difference,
}

impl Window {
    pub fn empty(group: &InternalGroup) -> Self {
        Window {
            group: group.clone(),
            atoms: BTreeMap::new(),
        }
    }

    /// The whole of a group without Euclidean axes, or a box on its compact part.
    pub fn full_compact(group: &InternalGroup) -> Result<Self, InternalError> {
        if group.euclid_dim() != 0 {
            return Err(InternalError::Unsupported("unbounded window".into()));
        }
        let atoms = group
            .compact_elements()?
            .into_iter()
            .map(|k| (k, BoxUnion(vec![Cell(vec![])])))
            .collect();
        Ok(Window {
            group: group.clone(),
            atoms,
        })
    }

    /// Window on a purely Euclidean group from intervals (one axis).
    pub fn intervals(group: &InternalGroup, ivs: Vec<Interval>) -> Result<Self, InternalError> {
        Window::from_cells(
            group,
            ivs.into_iter()
                .map(|iv| WindowCell {
                    intervals: vec![iv],
                    compact: vec![],
                })
                .collect(),
        )
    }

    pub fn from_cells(group: &InternalGroup, cells: Vec<WindowCell>) -> Result<Self, InternalError> {
        let dim = group.euclid_dim();
        let compact: Vec<&Component> = group.compact_components();
        let mut raw: BTreeMap<Vec<u64>, Vec<Cell>> = BTreeMap::new();
        let mut total: u64 = 0;
        for cell in cells {
            if cell.intervals.len() != dim || cell.compact.len() != compact.len() {
                return Err(InternalError::GroupMismatch(format!(
                    "cell has {} intervals and {} compact pieces",
                    cell.intervals.len(),
                    cell.compact.len()
                )));
            }
            for iv in &cell.intervals {
                if !iv.is_nonempty() {
                    return Err(InternalError::InvalidWindow(format!("empty interval [{}, {}]", iv.lo, iv.hi)));
                }
            }
            let mut sets = Vec::new();
            for (piece, comp) in cell.compact.iter().zip(&compact) {
                sets.push(expand_piece(piece, comp)?);
            }
            let keys = product_of(&sets);
            total += keys.len() as u64;
            if total > MAX_COMPACT_ELEMENTS {
                return Err(InternalError::TooLarge(total));
            }
            for k in keys {
                raw.entry(k).or_default().push(Cell(cell.intervals.clone()));
            }
        }
        let atoms = raw
            .into_iter()
            .map(|(k, cells)| (k, BoxUnion::from_cells(dim, cells)))
            .filter(|(_, u)| !u.is_empty())
            .collect();
        Ok(Window {
            group: group.clone(),
            atoms,
        })
    }

    fn from_atoms(group: &InternalGroup, atoms: BTreeMap<Vec<u64>, BoxUnion>) -> Self {
        Window {
            group: group.clone(),
            atoms: atoms.into_iter().filter(|(_, u)| !u.is_empty()).collect(),
        }
    }

    pub fn group(&self) -> &InternalGroup {
        &self.group
    }

    pub fn atoms(&self) -> &BTreeMap<Vec<u64>, BoxUnion> {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Canonical cell decomposition used for serialization.
    pub fn to_cells(&self) -> Vec<WindowCell> {
        let compact: Vec<&Component> = self.group.compact_components();
        let mut by_boxes: BTreeMap<&BoxUnion, BTreeSet<Vec<u64>>> = BTreeMap::new();
        for (k, u) in &self.atoms {
            by_boxes.entry(u).or_default().insert(k.clone());
        }
        let mut out = Vec::new();
        for (boxes, keys) in by_boxes {
            let pieces = decompose_keys(&keys, &compact);
            for cell in boxes.cells() {
                for p in &pieces {
                    out.push(WindowCell {
                        intervals: cell.0.clone(),
                        compact: p.clone(),
                    });
                }
            }
        }
        out
    }

    fn check_same_group(&self, other: &Window) -> Result<(), InternalError> {
        if self.group != other.group {
            return Err(InternalError::GroupMismatch("windows on different groups".into()));
        }
        Ok(())
    }

    pub fn contains(&self, x: &InternalPoint, mode: &Membership) -> Result<bool, InternalError> {
        self.group.check_point(x)?;
        if let Membership::Limit(v) = mode {
            if v.len() != self.group.euclid_dim() {
                return Err(InternalError::GroupMismatch("limit direction has wrong dimension".into()));
            }
        }
        Ok(self.atoms.get(&x.residues).is_some_and(|u| u.contains(&x.real, mode)))
    }

    /// True iff `x` lies on the boundary of the window.
    pub fn boundary_hit(&self, x: &InternalPoint) -> Result<bool, InternalError> {
        Ok(self.contains(x, &Membership::Closure)? && !self.contains(x, &Membership::Interior)?)
    }

    pub fn has_empty_boundary(&self) -> bool {
        self.group.euclid_dim() == 0
    }

    /// Closure of the interior equals the closure of the set: no lower
    /// dimensional pieces survive once touching cells are merged.
    pub fn is_topologically_regular(&self) -> bool {
        let dim = self.group.euclid_dim();
        self.atoms.values().all(|u| u.is_regular(dim))
    }

    pub fn closure(&self) -> Window {
        let dim = self.group.euclid_dim();
        Window::from_atoms(&self.group, self.atoms.iter().map(|(k, u)| (k.clone(), u.closure(dim))).collect())
    }

    pub fn interior(&self) -> Window {
        let dim = self.group.euclid_dim();
        Window::from_atoms(&self.group, self.atoms.iter().map(|(k, u)| (k.clone(), u.interior(dim))).collect())
    }

    pub fn translate(&self, w: &InternalPoint) -> Result<Window, InternalError> {
        self.group.check_point(w)?;
        let moduli = self.group.compact_moduli();
        let dim = self.group.euclid_dim();
        let atoms = self
            .atoms
            .iter()
            .map(|(k, u)| {
                let key: Vec<u64> = k.iter().zip(&w.residues).zip(&moduli).map(|((a, b), m)| (a + b) % m).collect();
                let boxes = u.map_cells(dim, |c| Cell(c.0.iter().zip(&w.real).map(|(iv, s)| iv.shift(s)).collect()));
                (key, boxes)
            })
            .collect();
        Ok(Window::from_atoms(&self.group, atoms))
    }

    /// `-W`.
    pub fn negate(&self) -> Window {
        let moduli = self.group.compact_moduli();
        let dim = self.group.euclid_dim();
        let atoms = self
            .atoms
            .iter()
            .map(|(k, u)| {
                let key: Vec<u64> = k.iter().zip(&moduli).map(|(a, m)| (m - a % m) % m).collect();
                (key, u.map_cells(dim, |c| Cell(c.0.iter().map(Interval::negate).collect())))
            })
            .collect();
        Window::from_atoms(&self.group, atoms)
    }

    pub fn intersect(&self, other: &Window) -> Result<Window, InternalError> {
        self.check_same_group(other)?;
        let dim = self.group.euclid_dim();
        let atoms = self
            .atoms
            .iter()
            .filter_map(|(k, u)| other.atoms.get(k).map(|v| (k.clone(), u.intersect(v, dim))))
            .collect();
        Ok(Window::from_atoms(&self.group, atoms))
    }

    pub fn difference(&self, other: &Window) -> Result<Window, InternalError> {
        self.check_same_group(other)?;
        let dim = self.group.euclid_dim();
        let atoms = self
            .atoms
            .iter()
            .map(|(k, u)| match other.atoms.get(k) {
                Some(v) => (k.clone(), u.difference(v, dim)),
                None => (k.clone(), u.clone()),
            })
            .collect();
        Ok(Window::from_atoms(&self.group, atoms))
    }

    pub fn union(&self, other: &Window) -> Result<Window, InternalError> {
        self.check_same_group(other)?;
        let dim = self.group.euclid_dim();
        let mut atoms = self.atoms.clone();
        for (k, v) in &other.atoms {
            let merged = match atoms.get(k) {
                Some(u) => u.union(v, dim),
                None => v.clone(),
            };
            atoms.insert(k.clone(), merged);
        }
        Ok(Window::from_atoms(&self.group, atoms))
    }

    /// Exact set equality.
    pub fn set_eq(&self, other: &Window) -> bool {
        if self.group != other.group {
            return false;
        }
        if self.group.euclid_dim() <= 1 {
            return self.atoms == other.atoms;
        }
        self.difference(other).is_ok_and(|d| d.is_empty()) && other.difference(self).is_ok_and(|d| d.is_empty())
    }

    /// Cellwise Minkowski sum `W1 + W2` or difference `W1 - W2`.
    pub fn minkowski(&self, other: &Window, op: MinkowskiOp) -> Result<Window, InternalError> {
        self.check_same_group(other)?;
        let rhs = match op {
            MinkowskiOp::Sum => other.clone(),
            MinkowskiOp::Difference => other.negate(),
        };
        let moduli = self.group.compact_moduli();
        let dim = self.group.euclid_dim();
        let mut raw: BTreeMap<Vec<u64>, Vec<Cell>> = BTreeMap::new();
        for (k1, u1) in &self.atoms {
            for (k2, u2) in &rhs.atoms {
                let key: Vec<u64> = k1.iter().zip(k2).zip(&moduli).map(|((a, b), m)| (a + b) % m).collect();
                let entry = raw.entry(key).or_default();
                for c1 in u1.cells() {
                    for c2 in u2.cells() {
                        entry.push(Cell(c1.0.iter().zip(&c2.0).map(|(a, b)| a.minkowski_sum(b)).collect()));
                    }
                }
            }
        }
        let atoms = raw.into_iter().map(|(k, cells)| (k, BoxUnion::from_cells(dim, cells))).collect();
        Ok(Window::from_atoms(&self.group, atoms))
    }

    /// Per-axis hull of the Euclidean part, `None` for an empty window.
    pub fn euclid_bbox(&self) -> Option<Vec<(QuadRational, QuadRational)>> {
        let dim = self.group.euclid_dim();
        let mut bbox: Option<Vec<(QuadRational, QuadRational)>> = None;
        for u in self.atoms.values() {
            for c in u.cells() {
                let b = bbox.get_or_insert_with(|| c.0.iter().map(|iv| (iv.lo.clone(), iv.hi.clone())).collect());
                for (axis, iv) in c.0.iter().enumerate().take(dim) {
                    if iv.lo < b[axis].0 {
                        b[axis].0 = iv.lo.clone();
                    }
                    if iv.hi > b[axis].1 {
                        b[axis].1 = iv.hi.clone();
                    }
                }
            }
        }
        bbox
    }

    /// Euclidean diameter of the window (0 for compact-only groups).
    pub fn diameter(&self) -> f64 {
        match self.euclid_bbox() {
            None => 0.0,
            Some(b) => b.iter().map(|(lo, hi)| (hi - lo).to_f64().powi(2)).sum::<f64>().sqrt(),
        }
    }

    /// Exact diameter for at most one Euclidean axis.
    pub fn diameter_exact(&self) -> Option<QuadRational> {
        match self.group.euclid_dim() {
            0 => Some(QuadRational::zero()),
            1 => self.euclid_bbox().map(|b| &b[0].1 - &b[0].0),
            _ => None,
        }
    }

    /// Deterministic representative point: the first cell in canonical order
    /// with a nonempty interior (else the first cell), the simplest rational
    /// inside each open interval, the lower endpoint of degenerate ones, and
    /// the residue tuple of the atom.
    pub fn representative(&self) -> Option<InternalPoint> {
        let cells = || self.atoms.iter().flat_map(|(k, u)| u.cells().iter().map(move |c| (k, c)));
        let (key, cell) = cells().find(|(_, c)| !c.is_degenerate()).or_else(|| cells().next())?;
        let real = cell
            .0
            .iter()
            .map(|iv| {
                if iv.lo < iv.hi {
                    QuadRational::rational(crate::exact::simplest_between(&iv.lo, &iv.hi))
                } else {
                    iv.lo.clone()
                }
            })
            .collect();
        Some(InternalPoint::new(real, key.clone()))
    }
}

fn expand_piece(piece: &CompactPiece, comp: &Component) -> Result<Vec<u64>, InternalError> {
    match (piece, comp) {
        (CompactPiece::Subset(rs), Component::Cyclic { order }) => {
            let mut v: Vec<u64> = rs.iter().map(|r| r % order).collect();
            v.sort_unstable();
            v.dedup();
            Ok(v)
        }
        (CompactPiece::Cylinder { residue, depth }, Component::Odometer { prime, depth: max_depth }) => {
            if depth > max_depth {
                return Err(InternalError::InvalidWindow(format!(
                    "cylinder depth {depth} exceeds odometer depth {max_depth}"
                )));
            }
            let step = prime.pow(*depth);
            if *residue >= step {
                return Err(InternalError::InvalidWindow(format!("residue {residue} >= {prime}^{depth}")));
            }
            let n = prime.pow(*max_depth);
            Ok((0..n / step).map(|i| residue + i * step).collect())
        }
        (CompactPiece::Subset(rs), Component::Odometer { prime, depth }) => {
            // explicit residues modulo p^D are accepted as depth-D cylinders
            let n = prime.pow(*depth);
            let mut v: Vec<u64> = rs.iter().map(|r| r % n).collect();
            v.sort_unstable();
            v.dedup();
            Ok(v)
        }
        (p, c) => Err(InternalError::GroupMismatch(format!("piece {p:?} does not fit component {c:?}"))),
    }
}

fn pieces_for(residues: &BTreeSet<u64>, comp: &Component) -> Vec<CompactPiece> {
    match comp {
        Component::Odometer { prime, depth } => {
            let n = prime.pow(*depth);
            let mut covered: BTreeSet<u64> = BTreeSet::new();
            let mut out = Vec::new();
            for j in 0..=*depth {
                let step = prime.pow(j);
                for r in 0..step {
                    if covered.contains(&r) {
                        continue;
                    }
                    let members: Vec<u64> = (0..n / step).map(|i| r + i * step).collect();
                    if members.iter().all(|x| residues.contains(x)) {
                        covered.extend(members);
                        out.push(CompactPiece::Cylinder { residue: r, depth: j });
                    }
                }
            }
            out
        }
        _ => vec![CompactPiece::Subset(residues.iter().copied().collect())],
    }
}

fn decompose_keys(keys: &BTreeSet<Vec<u64>>, comps: &[&Component]) -> Vec<Vec<CompactPiece>> {
    if comps.is_empty() {
        return vec![vec![]];
    }
    let mut by_rest: BTreeMap<Vec<u64>, BTreeSet<u64>> = BTreeMap::new();
    for k in keys {
        by_rest.entry(k[1..].to_vec()).or_default().insert(k[0]);
    }
    let mut by_firsts: BTreeMap<BTreeSet<u64>, BTreeSet<Vec<u64>>> = BTreeMap::new();
    for (rest, firsts) in by_rest {
        by_firsts.entry(firsts).or_default().insert(rest);
    }
    let mut out = Vec::new();
    for (firsts, rests) in by_firsts {
        let heads = pieces_for(&firsts, comps[0]);
        let tails = decompose_keys(&rests, &comps[1..]);
        for h in &heads {
            for t in &tails {
                let mut v = vec![h.clone()];
                v.extend(t.iter().cloned());
                out.push(v);
            }
        }
    }
    out
}

/// All compact translations `r` with `W_i + r = W_i` for every window.
/// Euclidean coordinates of the result are zero.
pub fn redundancy_group(windows: &[Window]) -> Result<Vec<InternalPoint>, InternalError> {
    let Some(first) = windows.first() else {
        return Err(InternalError::Unsupported("no windows".into()));
    };
    let group = first.group().clone();
    for w in windows {
        first.check_same_group(w)?;
    }
    let moduli = group.compact_moduli();
    let candidates: Vec<Vec<u64>> = match windows.iter().find(|w| !w.is_empty()) {
        None => group.compact_elements()?,
        Some(w) => {
            let k0 = w.atoms.keys().next().unwrap();
            w.atoms
                .keys()
                .map(|k| k.iter().zip(k0).zip(&moduli).map(|((a, b), m)| (a + m - b) % m).collect())
                .collect()
        }
    };
    let mut out: Vec<InternalPoint> = Vec::new();
    for r in candidates {
        let shift = InternalPoint::new(vec![QuadRational::zero(); group.euclid_dim()], r);
        let invariant = windows
            .iter()
            .all(|w| w.translate(&shift).map(|t| t.set_eq(w)).unwrap_or(false));
        if invariant {
            out.push(shift);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Data of the quotient map `H -> H / R`: per compact component of `H`, the
/// modulus it is reduced to (1 means the component disappears).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientMap {
    pub reduced_moduli: Vec<u64>,
}

impl QuotientMap {
    pub fn project(&self, x: &InternalPoint) -> InternalPoint {
        InternalPoint::new(
            x.real.clone(),
            x.residues
                .iter()
                .zip(&self.reduced_moduli)
                .filter(|(_, &g)| g > 1)
                .map(|(r, g)| r % g)
                .collect(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct Quotient {
    pub group: InternalGroup,
    pub windows: Vec<Window>,
    pub map: QuotientMap,
}

/// Quotient of the internal group and windows by a redundancy subgroup.
/// Only product subgroups (one cyclic subgroup per compact component) are
/// supported; those are exactly the kernels of coordinatewise reductions.
pub fn quotient_by_redundancy(
    group: &InternalGroup,
    windows: &[Window],
    redundancies: &[InternalPoint],
) -> Result<Quotient, InternalError> {
    let moduli = group.compact_moduli();
    let set: BTreeSet<Vec<u64>> = redundancies.iter().map(|r| r.residues.clone()).collect();
    for r in redundancies {
        group.check_point(r)?;
        if r.real.iter().any(|x| !x.is_zero()) {
            return Err(InternalError::NotASubgroup("Euclidean coordinates must vanish".into()));
        }
    }
    let zero = vec![0u64; moduli.len()];
    if !set.contains(&zero) {
        return Err(InternalError::NotASubgroup("identity missing".into()));
    }
    for a in &set {
        for b in &set {
            let s: Vec<u64> = a.iter().zip(b).zip(&moduli).map(|((x, y), m)| (x + y) % m).collect();
            if !set.contains(&s) {
                return Err(InternalError::NotASubgroup("not closed under addition".into()));
            }
        }
    }
    // per-component generators g_c: the subgroup on axis c is <g_c>, quotient Z/g_c
    let mut reduced = Vec::with_capacity(moduli.len());
    let mut product_size: u64 = 1;
    for (c, &m) in moduli.iter().enumerate() {
        let axis: Vec<u64> = set
            .iter()
            .filter(|k| k.iter().enumerate().all(|(j, &v)| j == c || v == 0))
            .map(|k| k[c])
            .filter(|&v| v != 0)
            .collect();
        let g = axis.iter().copied().min().unwrap_or(m);
        if m % g != 0 || axis.len() as u64 + 1 != m / g {
            return Err(InternalError::NotASubgroup(format!("component {c} subgroup is not cyclic")));
        }
        product_size *= m / g;
        reduced.push(g);
    }
    if product_size != set.len() as u64 {
        return Err(InternalError::Unsupported(
            "redundancy subgroup is not a product of per-component subgroups".into(),
        ));
    }
    let mut comps = Vec::new();
    let mut ci = 0;
    for comp in group.components() {
        match comp {
            Component::Euclidean => comps.push(Component::Euclidean),
            Component::Cyclic { .. } => {
                let g = reduced[ci];
                ci += 1;
                if g > 1 {
                    comps.push(Component::Cyclic { order: g });
                }
            }
            Component::Odometer { prime, .. } => {
                let g = reduced[ci];
                ci += 1;
                if g > 1 {
                    let mut depth = 0;
                    let mut x = g;
                    while x > 1 {
                        x /= prime;
                        depth += 1;
                    }
                    comps.push(Component::Odometer { prime: *prime, depth });
                }
            }
        }
    }
    let qgroup = InternalGroup::new(comps)?;
    let map = QuotientMap { reduced_moduli: reduced };
    let mut qwindows = Vec::new();
    for w in windows {
        let mut atoms: BTreeMap<Vec<u64>, BoxUnion> = BTreeMap::new();
        for (k, u) in w.atoms() {
            let pk = map.project(&InternalPoint::new(vec![], k.clone())).residues;
            match atoms.get(&pk) {
                Some(existing) if existing != u => {
                    return Err(InternalError::NotASubgroup("windows are not invariant under the subgroup".into()));
                }
                _ => {
                    atoms.insert(pk, u.clone());
                }
            }
        }
        qwindows.push(Window::from_atoms(&qgroup, atoms));
    }
    Ok(Quotient {
        group: qgroup,
        windows: qwindows,
        map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> QuadRational {
        s.parse().unwrap()
    }

    fn line() -> InternalGroup {
        InternalGroup::euclidean(1)
    }

    fn pt(x: &str) -> InternalPoint {
        InternalPoint::real(q(x))
    }

    #[test]
    fn contains_endpoint_and_interior() {
        let w = Window::intervals(&line(), vec![Interval::half_open(q("0"), q("1"))]).unwrap();
        assert!(w.contains(&pt("0"), &Membership::Closure).unwrap());
        assert!(!w.contains(&pt("0"), &Membership::Interior).unwrap());
        assert!(w.contains(&pt("1/2"), &Membership::Closure).unwrap());
        assert!(w.contains(&pt("1/2"), &Membership::Interior).unwrap());
        assert!(w.contains(&pt("0"), &Membership::Declared).unwrap());
        assert!(!w.contains(&pt("1"), &Membership::Declared).unwrap());
        // limit from the right-shifted window includes the right endpoint
        assert!(w.contains(&pt("1"), &Membership::Limit(vec![1])).unwrap());
        assert!(!w.contains(&pt("0"), &Membership::Limit(vec![1])).unwrap());
    }

    #[test]
    fn odometer_cylinder_is_clopen() {
        let g = InternalGroup::new(vec![Component::Odometer { prime: 2, depth: 5 }]).unwrap();
        let w = Window::from_cells(
            &g,
            vec![WindowCell {
                intervals: vec![],
                compact: vec![CompactPiece::Cylinder { residue: 0, depth: 1 }],
            }],
        )
        .unwrap();
        let x = InternalPoint::new(vec![], vec![6]);
        assert!(w.contains(&x, &Membership::Closure).unwrap());
        assert!(w.contains(&x, &Membership::Interior).unwrap());
        for r in 0..32 {
            assert!(!w.boundary_hit(&InternalPoint::new(vec![], vec![r])).unwrap());
        }
        assert!(w.is_topologically_regular());
    }

    #[test]
    fn boundary_examples() {
        let w = Window::intervals(&line(), vec![Interval::half_open(q("0"), q("1"))]).unwrap();
        assert!(w.boundary_hit(&pt("1")).unwrap());
        assert!(!w.boundary_hit(&pt("1/2")).unwrap());
        assert!(w.contains(&InternalPoint::new(vec![], vec![]), &Membership::Closure).is_err());
    }

    #[test]
    fn regularity_examples() {
        let touching = Window::intervals(
            &line(),
            vec![Interval::half_open(q("0"), q("1")), Interval::closed(q("1"), q("2"))],
        )
        .unwrap();
        assert!(touching.is_topologically_regular());
        assert_eq!(touching.to_cells().len(), 1);
        let with_point =
            Window::intervals(&line(), vec![Interval::closed(q("0"), q("1")), Interval::point(q("3"))]).unwrap();
        assert!(!with_point.is_topologically_regular());
        // a point glued onto an interval endpoint is harmless
        let glued = Window::intervals(&line(), vec![Interval::half_open(q("0"), q("1")), Interval::point(q("1"))]).unwrap();
        assert!(glued.is_topologically_regular());
    }

    #[test]
    fn regularity_in_two_dimensions() {
        let g = InternalGroup::euclidean(2);
        let sq = |a: &str, b: &str, c: &str, d: &str| WindowCell {
            intervals: vec![Interval::closed(q(a), q(b)), Interval::closed(q(c), q(d))],
            compact: vec![],
        };
        let w = Window::from_cells(&g, vec![sq("0", "1", "0", "1"), sq("1", "2", "0", "1")]).unwrap();
        assert!(w.is_topologically_regular());
        let x = InternalPoint::new(vec![q("1"), q("1/2")], vec![]);
        assert!(w.contains(&x, &Membership::Interior).unwrap());
        let segment = Window::from_cells(&g, vec![sq("0", "1", "0", "1"), sq("1", "3", "2", "2")]).unwrap();
        assert!(!segment.is_topologically_regular());
    }

    #[test]
    fn minkowski_examples() {
        let unit = Window::intervals(&line(), vec![Interval::closed(q("0"), q("1"))]).unwrap();
        let d = unit.minkowski(&unit, MinkowskiOp::Difference).unwrap();
        assert!(d.set_eq(&Window::intervals(&line(), vec![Interval::closed(q("-1"), q("1"))]).unwrap()));
        let zero = Window::intervals(&line(), vec![Interval::point(q("0"))]).unwrap();
        assert!(unit.minkowski(&zero, MinkowskiOp::Sum).unwrap().set_eq(&unit));
    }

    #[test]
    fn minkowski_union_matches_dense_sampling() {
        let a = Window::intervals(
            &line(),
            vec![Interval::closed(q("0"), q("1")), Interval::closed(q("2"), q("3"))],
        )
        .unwrap();
        let unit = Window::intervals(&line(), vec![Interval::closed(q("0"), q("1"))]).unwrap();
        let s = a.minkowski(&unit, MinkowskiOp::Sum).unwrap();
        assert_eq!(s.to_cells().len(), 1);
        // brute force: x in A + B iff some sampled a in A has x - a in B
        for i in -20..=100 {
            let x = QuadRational::frac(i, 20);
            let brute = (0..=60).any(|j| {
                let a_pt = QuadRational::frac(j, 20);
                a.contains(&InternalPoint::real(a_pt.clone()), &Membership::Closure).unwrap()
                    && unit.contains(&InternalPoint::real(&x - &a_pt), &Membership::Closure).unwrap()
            });
            assert_eq!(brute, s.contains(&InternalPoint::real(x), &Membership::Closure).unwrap());
        }
    }

    fn r_z2() -> InternalGroup {
        InternalGroup::new(vec![Component::Euclidean, Component::Cyclic { order: 2 }]).unwrap()
    }

    fn z2_cell(lo: &str, hi: &str, set: Vec<u64>) -> WindowCell {
        WindowCell {
            intervals: vec![Interval::closed(q(lo), q(hi))],
            compact: vec![CompactPiece::Subset(set)],
        }
    }

    #[test]
    fn redundancy_examples() {
        let w = Window::intervals(&line(), vec![Interval::closed(q("0"), q("1"))]).unwrap();
        assert_eq!(redundancy_group(&[w]).unwrap(), vec![line().zero()]);

        let g = r_z2();
        let sym = Window::from_cells(&g, vec![z2_cell("0", "1", vec![0]), z2_cell("0", "1", vec![1])]).unwrap();
        let r = redundancy_group(std::slice::from_ref(&sym)).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].residues, vec![1]);

        let lone = Window::from_cells(&g, vec![z2_cell("0", "1", vec![0])]).unwrap();
        assert_eq!(redundancy_group(&[lone]).unwrap().len(), 1);

        let quot = quotient_by_redundancy(&g, &[sym], &r).unwrap();
        assert_eq!(quot.group, line());
        assert!(quot.windows[0].set_eq(&Window::intervals(&line(), vec![Interval::closed(q("0"), q("1"))]).unwrap()));
    }

    #[test]
    fn trivial_quotient_is_identity() {
        let g = r_z2();
        let lone = Window::from_cells(&g, vec![z2_cell("0", "1", vec![0])]).unwrap();
        let quot = quotient_by_redundancy(&g, std::slice::from_ref(&lone), &[g.zero()]).unwrap();
        assert_eq!(quot.group, g);
        assert!(quot.windows[0].set_eq(&lone));
    }

    #[test]
    fn odometer_depth_reduction() {
        let g = InternalGroup::new(vec![Component::Odometer { prime: 2, depth: 3 }]).unwrap();
        // residues {1, 5, 2, 6}: invariant under +4
        let w = Window::from_cells(
            &g,
            vec![WindowCell {
                intervals: vec![],
                compact: vec![CompactPiece::Subset(vec![1, 2, 5, 6])],
            }],
        )
        .unwrap();
        let r = redundancy_group(std::slice::from_ref(&w)).unwrap();
        assert_eq!(r.iter().map(|p| p.residues[0]).collect::<Vec<_>>(), vec![0, 4]);
        let quot = quotient_by_redundancy(&g, std::slice::from_ref(&w), &r).unwrap();
        assert_eq!(quot.group.components(), &[Component::Odometer { prime: 2, depth: 2 }]);
        for x in 0..8u64 {
            let full = w.contains(&InternalPoint::new(vec![], vec![x]), &Membership::Declared).unwrap();
            let proj = quot.windows[0]
                .contains(&quot.map.project(&InternalPoint::new(vec![], vec![x])), &Membership::Declared)
                .unwrap();
            assert_eq!(full, proj, "residue {x}");
        }
    }

    #[test]
    fn non_subgroup_rejected() {
        let g = InternalGroup::new(vec![Component::Cyclic { order: 4 }]).unwrap();
        let w = Window::full_compact(&g).unwrap();
        let bad = vec![g.zero(), InternalPoint::new(vec![], vec![1])];
        assert!(quotient_by_redundancy(&g, &[w], &bad).is_err());
    }

    #[test]
    fn cylinder_serialization_is_canonical() {
        let g = InternalGroup::new(vec![Component::Odometer { prime: 2, depth: 4 }]).unwrap();
        let w = Window::from_cells(
            &g,
            vec![WindowCell {
                intervals: vec![],
                compact: vec![CompactPiece::Subset(vec![1, 3, 5, 7, 9, 11, 13, 15, 2])],
            }],
        )
        .unwrap();
        let cells = w.to_cells();
        assert_eq!(
            cells.iter().map(|c| c.compact[0].clone()).collect::<Vec<_>>(),
            vec![
                CompactPiece::Cylinder { residue: 1, depth: 1 },
                CompactPiece::Cylinder { residue: 2, depth: 4 }
            ]
        );
        let back = Window::from_cells(&g, cells.clone()).unwrap();
        assert_eq!(back.to_cells(), cells);
        let too_deep = WindowCell {
            intervals: vec![],
            compact: vec![CompactPiece::Cylinder { residue: 0, depth: 5 }],
        };
        assert!(Window::from_cells(&g, vec![too_deep]).is_err());
    }

    #[test]
    fn interval_difference_cases() {
        let a = Interval::closed(q("0"), q("2"));
        let hole = Interval::new(q("1/2"), q("1"), false, false).unwrap();
        let d = a.difference(&hole);
        assert_eq!(d.len(), 2);
        assert!(d[0].contains(&q("1/2")) && d[1].contains(&q("1")));
        assert_eq!(a.difference(&Interval::closed(q("3"), q("4"))), vec![a.clone()]);
        assert!(a.difference(&Interval::closed(q("-1"), q("3"))).is_empty());
        let right = a.difference(&Interval::new(q("1"), q("5"), false, true).unwrap());
        assert_eq!(right, vec![Interval::closed(q("0"), q("1"))]);
    }

    fn arb_window() -> impl Strategy<Value = Window> {
        prop::collection::vec((-6i64..6, 1i64..5, any::<bool>(), any::<bool>(), 0u64..2), 1..4).prop_map(|cells| {
            let g = r_z2();
            let cells = cells
                .into_iter()
                .map(|(lo, len, lc, hc, z)| WindowCell {
                    intervals: vec![Interval::new(QuadRational::frac(lo, 2), QuadRational::frac(lo + len, 2), lc, hc).unwrap()],
                    compact: vec![CompactPiece::Subset(vec![z])],
                })
                .collect();
            Window::from_cells(&g, cells).unwrap()
        })
    }

    proptest! {
        #[test]
        fn interior_implies_closure(w in arb_window(), x in -16i64..16, z in 0u64..2) {
            let p = InternalPoint::new(vec![QuadRational::frac(x, 4)], vec![z]);
            let inner = w.contains(&p, &Membership::Interior).unwrap();
            let closed = w.contains(&p, &Membership::Closure).unwrap();
            prop_assert!(!inner || closed);
            prop_assert_eq!(w.boundary_hit(&p).unwrap(), closed && !inner);
            let declared = w.contains(&p, &Membership::Declared).unwrap();
            prop_assert!(!inner || declared);
            prop_assert!(!declared || closed);
        }

        #[test]
        fn redundancy_is_a_subgroup(w in arb_window()) {
            let g = r_z2();
            let r = redundancy_group(std::slice::from_ref(&w)).unwrap();
            prop_assert!(r.contains(&g.zero()));
            for a in &r {
                for b in &r {
                    prop_assert!(r.contains(&a.add(b, &g)));
                }
                let shifted = w.translate(a).unwrap();
                for x in -16i64..16 {
                    for z in 0..2 {
                        let p = InternalPoint::new(vec![QuadRational::frac(x, 4)], vec![z]);
                        prop_assert_eq!(
                            shifted.contains(&p, &Membership::Declared).unwrap(),
                            w.contains(&p, &Membership::Declared).unwrap()
                        );
                    }
                }
            }
        }

        #[test]
        fn serialization_roundtrip(w in arb_window()) {
            let back = Window::from_cells(w.group(), w.to_cells()).unwrap();
            prop_assert_eq!(&back, &w);
            prop_assert_eq!(back.to_cells(), w.to_cells());
        }

        #[test]
        fn difference_and_intersection_partition(a in arb_window(), b in arb_window(), x in -16i64..16, z in 0u64..2) {
            let p = InternalPoint::new(vec![QuadRational::frac(x, 4)], vec![z]);
            let inter = a.intersect(&b).unwrap();
            let diff = a.difference(&b).unwrap();
            let ina = a.contains(&p, &Membership::Declared).unwrap();
            let inb = b.contains(&p, &Membership::Declared).unwrap();
            prop_assert_eq!(inter.contains(&p, &Membership::Declared).unwrap(), ina && inb);
            prop_assert_eq!(diff.contains(&p, &Membership::Declared).unwrap(), ina && !inb);
        }
    }
}
