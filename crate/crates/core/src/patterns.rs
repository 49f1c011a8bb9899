//! Finite multi-colored point patterns and their finite-scale predicates.
//!
//! A [`MultiPattern`] is a finite piece of a Delone multiple set: points with
//! symbols, known to be complete inside the closed ball `B(0, region_radius)`.
//! Everything here is exact in dimension 1. In dimension 2 distances are
//! compared exactly, while empty-circle and repetitivity searches are
//! float-guided and flagged as approximate.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{ExactError, QuadRational};

type Q = QuadRational;

/// Cap on the size of intermediate difference sets.
pub const MAX_DIFFERENCES: usize = 2_000_000;

/// Default cap on `|F|` in [`meyer_witness`].
pub const MEYER_F_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },
    #[error("point {0} lies outside the region ball")]
    OutOfRegion(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("patterns carry different symbol sets")]
    SymbolMismatch,
    #[error("need at least {needed} points, have {have}")]
    TooFewPoints { needed: usize, have: usize },
    #[error("symbol {0:?} has no points")]
    EmptySymbol(String),
    #[error("patch ball around {center} of radius {radius} leaves the region")]
    Boundary { center: String, radius: String },
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("only dimensions 1 and 2 are supported, got {0}")]
    UnsupportedDim(usize),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("malformed pattern file: {0}")]
    Parse(String),
}

pub fn norm_sq(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |acc, x| &acc + &(x * x))
}

pub fn vsub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vadd(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vneg(a: &[Q]) -> Vec<Q> {
    a.iter().map(|x| -x).collect()
}

/// `|v| <= r`, decided exactly.
pub fn within(v: &[Q], r: &Q) -> bool {
    r.sign() >= 0 && within_sq(v, r.to_f64(), &(r * r))
}

/// `|v|^2 <= r_sq`; the float test only settles points clearly off the sphere.
fn within_sq(v: &[Q], r: f64, r_sq: &Q) -> bool {
    let n = norm_f64(v);
    if n.is_finite() && r.is_finite() {
        let slack = 1e-9 * (1.0 + r);
        if n < r - slack {
            return true;
        }
        if n > r + slack {
            return false;
        }
    }
    norm_sq(v) <= *r_sq
}

pub fn norm_f64(v: &[Q]) -> f64 {
    v.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt()
}

/// Exact Euclidean norm where it is representable (dimension 1).
pub fn norm_exact(v: &[Q]) -> Option<Q> {
    (v.len() == 1).then(|| v[0].abs())
}

fn fmt_point(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// A finite multi-colored point pattern, complete inside `B(0, region_radius)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPattern {
    dim: usize,
    symbols: Vec<String>,
    region_radius: Q,
    points: Vec<(Vec<Q>, usize)>,
}

impl MultiPattern {
    pub fn new(dim: usize, symbols: Vec<String>, region_radius: Q, points: Vec<(Vec<Q>, usize)>) -> Result<Self, PatternError> {
        if dim == 0 || dim > 2 {
            return Err(PatternError::UnsupportedDim(dim));
        }
        let mut pts = points;
        for (c, s) in &pts {
            if c.len() != dim {
                return Err(PatternError::Dim {
                    expected: dim,
                    got: c.len(),
                });
            }
            if *s >= symbols.len() {
                return Err(PatternError::UnknownSymbol(format!("#{s}")));
            }
            if !within(c, &region_radius) {
                return Err(PatternError::OutOfRegion(fmt_point(c)));
            }
        }
        pts.sort();
        pts.dedup();
        Ok(MultiPattern {
            dim,
            symbols,
            region_radius,
            points: pts,
        })
    }

    pub fn empty(dim: usize, symbols: Vec<String>, region_radius: Q) -> Self {
        MultiPattern::new(dim, symbols, region_radius, vec![]).expect("empty pattern is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }

    pub fn region_radius(&self) -> &Q {
        &self.region_radius
    }

    pub fn points(&self) -> &[(Vec<Q>, usize)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points carrying symbol `i`, sorted.
    pub fn points_of(&self, i: usize) -> Vec<Vec<Q>> {
        self.points.iter().filter(|(_, s)| *s == i).map(|(c, _)| c.clone()).collect()
    }

    /// Distinct positions regardless of symbol, sorted.
    pub fn support(&self) -> Vec<Vec<Q>> {
        let mut v: Vec<Vec<Q>> = self.points.iter().map(|(c, _)| c.clone()).collect();
        v.dedup();
        v
    }

    pub fn contains(&self, coords: &[Q], symbol: usize) -> bool {
        self.points
            .binary_search_by(|(c, s)| c.as_slice().cmp(coords).then(s.cmp(&symbol)))
            .is_ok()
    }

    /// `(self - s) ∩ B(0, radius)` with the given region radius.
    pub fn shifted(&self, s: &[Q], radius: Q) -> Result<Self, PatternError> {
        if s.len() != self.dim {
            return Err(PatternError::Dim {
                expected: self.dim,
                got: s.len(),
            });
        }
        if radius.sign() < 0 {
            return MultiPattern::new(self.dim, self.symbols.clone(), radius, vec![]);
        }
        let r_sq = &radius * &radius;
        let r = radius.to_f64();
        // translation keeps the lexicographic order
        let points = self
            .points
            .iter()
            .map(|(c, i)| (vsub(c, s), *i))
            .filter(|(c, _)| within_sq(c, r, &r_sq))
            .collect();
        Ok(MultiPattern {
            dim: self.dim,
            symbols: self.symbols.clone(),
            region_radius: radius,
            points,
        })
    }

    /// Restriction to a smaller ball around the origin.
    pub fn restrict(&self, radius: Q) -> Result<Self, PatternError> {
        self.shifted(&vec![Q::zero(); self.dim], radius)
    }

    /// Same points viewed with the symbol list of `other`, matched by name.
    pub fn relabel(&self, symbols: &[String]) -> Result<Self, PatternError> {
        let map: Vec<usize> = self
            .symbols
            .iter()
            .map(|s| symbols.iter().position(|t| t == s).ok_or_else(|| PatternError::UnknownSymbol(s.clone())))
            .collect::<Result<_, _>>()?;
        let pts = self.points.iter().map(|(c, i)| (c.clone(), map[*i])).collect();
        MultiPattern::new(self.dim, symbols.to_vec(), self.region_radius.clone(), pts)
    }

    /// `self_i ⊆ other_i` for every symbol.
    pub fn is_subpattern_of(&self, other: &MultiPattern) -> bool {
        self.points.iter().all(|(c, i)| match other.symbol_index(&self.symbols[*i]) {
            Some(j) => other.contains(c, j),
            None => false,
        })
    }

    /// Support point closest to the origin (ties broken lexicographically).
    pub fn nearest_to_origin(&self) -> Option<Vec<Q>> {
        let support = self.support();
        min_norm_sq(support.iter(), None).map(|(v, _)| v.clone())
    }

    pub fn to_file(&self) -> PatternFile {
        PatternFile {
            dim: self.dim,
            symbols: self.symbols.clone(),
            region_radius: self.region_radius.clone(),
            points: self
                .points
                .iter()
                .map(|(c, i)| PointEntry {
                    coords: c.clone(),
                    symbol: self.symbols[*i].clone(),
                })
                .collect(),
        }
    }

    pub fn from_file(f: PatternFile) -> Result<Self, PatternError> {
        let mut seen = BTreeSet::new();
        if f.symbols.iter().any(|s| !seen.insert(s.clone())) {
            return Err(PatternError::Parse("duplicate symbol".into()));
        }
        let pts = f
            .points
            .into_iter()
            .map(|p| {
                let i = f
                    .symbols
                    .iter()
                    .position(|s| *s == p.symbol)
                    .ok_or_else(|| PatternError::UnknownSymbol(p.symbol.clone()))?;
                Ok((p.coords, i))
            })
            .collect::<Result<Vec<_>, PatternError>>()?;
        MultiPattern::new(f.dim, f.symbols, f.region_radius, pts)
    }

    /// Canonical JSON text (points sorted, trailing newline).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, PatternError> {
        let f: PatternFile = serde_json::from_str(text).map_err(|e| PatternError::Parse(e.to_string()))?;
        MultiPattern::from_file(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointEntry {
    pub coords: Vec<Q>,
    pub symbol: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternFile {
    pub dim: usize,
    pub symbols: Vec<String>,
    pub region_radius: Q,
    pub points: Vec<PointEntry>,
}

/// A length known through its exact square, and exactly when `d = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Length {
    pub squared: Q,
    pub exact: Option<Q>,
    pub approx: f64,
}

impl Length {
    fn from_vector(v: &[Q]) -> Self {
        let squared = norm_sq(v);
        Length {
            approx: squared.to_f64().sqrt(),
            exact: norm_exact(v),
            squared,
        }
    }
}

/// Minimum distance between distinct support points. The open-ball radius
/// of uniform discreteness is half of it.
pub fn min_gap(pattern: &MultiPattern) -> Result<Length, PatternError> {
    let support = pattern.support();
    if support.len() < 2 {
        return Err(PatternError::TooFewPoints {
            needed: 2,
            have: support.len(),
        });
    }
    Ok(Length::from_vector(&min_gap_vector(&support)))
}

/// Difference vector realizing the minimum distance of a sorted point list.
fn min_gap_vector(sorted: &[Vec<Q>]) -> Vec<Q> {
    if sorted[0].len() == 1 {
        return sorted
            .windows(2)
            .map(|w| vsub(&w[1], &w[0]))
            .min()
            .expect("at least two points");
    }
    // float sweep along the first axis, exact comparison of survivors
    let approx: Vec<Vec<f64>> = sorted.iter().map(|p| p.iter().map(Q::to_f64).collect()).collect();
    let mut order: Vec<usize> = (0..sorted.len()).collect();
    order.sort_by(|&a, &b| approx[a][0].total_cmp(&approx[b][0]));
    let mut best: Option<(Q, Vec<Q>)> = None;
    let mut best_f = f64::INFINITY;
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            let dx = approx[j][0] - approx[i][0];
            if dx > best_f * (1.0 + 1e-9) + 1e-9 {
                break;
            }
            let df: f64 = approx[i].iter().zip(&approx[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if df > best_f * (1.0 + 1e-9) + 1e-9 {
                continue;
            }
            let v = vsub(&sorted[j], &sorted[i]);
            let sq = norm_sq(&v);
            if best.as_ref().is_none_or(|(b, _)| sq < *b) {
                best_f = sq.to_f64().sqrt();
                best = Some((sq, v));
            }
        }
    }
    best.expect("at least two points").1
}

/// Covering radius estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRadius {
    pub symbol: Option<String>,
    /// Exact value in dimension 1.
    pub exact: Option<Q>,
    pub approx: f64,
    /// Distance from the region boundary below which candidate balls were discarded.
    pub margin: f64,
}

/// Radius `R0` such that every open ball of that radius meets the class, per
/// symbol or for the whole support.
pub fn relative_density_radius(pattern: &MultiPattern, per_symbol: bool) -> Result<Vec<DensityRadius>, PatternError> {
    let classes: Vec<(Option<String>, Vec<Vec<Q>>)> = if per_symbol {
        (0..pattern.symbols().len())
            .map(|i| (Some(pattern.symbols()[i].clone()), pattern.points_of(i)))
            .collect()
    } else {
        vec![(None, pattern.support())]
    };
    let mut out = Vec::new();
    for (name, pts) in classes {
        if pts.is_empty() {
            return Err(PatternError::EmptySymbol(name.unwrap_or_default()));
        }
        if pattern.dim() == 1 {
            if pts.len() < 2 {
                return Err(PatternError::TooFewPoints { needed: 2, have: pts.len() });
            }
            let gap = pts.windows(2).map(|w| &w[1][0] - &w[0][0]).max().expect("two points");
            let half = gap.scale(&num_rational::BigRational::new(1.into(), 2.into()));
            out.push(DensityRadius {
                symbol: name,
                approx: half.to_f64(),
                exact: Some(half),
                margin: 0.0,
            });
        } else {
            let (r, margin) = largest_empty_circle(&pts, pattern.region_radius().to_f64());
            out.push(DensityRadius {
                symbol: name,
                exact: None,
                approx: r,
                margin,
            });
        }
    }
    Ok(out)
}

/// Largest empty circle among circumcenters of nearby triples whose ball
/// stays inside the region.
fn largest_empty_circle(pts: &[Vec<Q>], region: f64) -> (f64, f64) {
    let p: Vec<(f64, f64)> = pts.iter().map(|v| (v[0].to_f64(), v[1].to_f64())).collect();
    let nearest = |c: (f64, f64)| p.iter().map(|q| ((q.0 - c.0).powi(2) + (q.1 - c.1).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
    const K: usize = 8;
    let mut best: f64 = 0.0;
    let mut margin = 0.0f64;
    for (i, &a) in p.iter().enumerate() {
        let mut nb: Vec<(f64, usize)> = p
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(j, q)| ((q.0 - a.0).powi(2) + (q.1 - a.1).powi(2), j))
            .collect();
        nb.sort_by(|x, y| x.0.total_cmp(&y.0));
        nb.truncate(K);
        for x in 0..nb.len() {
            for y in (x + 1)..nb.len() {
                let (b, c) = (p[nb[x].1], p[nb[y].1]);
                let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
                if d.abs() < 1e-12 {
                    continue;
                }
                let sa = a.0 * a.0 + a.1 * a.1;
                let sb = b.0 * b.0 + b.1 * b.1;
                let sc = c.0 * c.0 + c.1 * c.1;
                let ux = (sa * (b.1 - c.1) + sb * (c.1 - a.1) + sc * (a.1 - b.1)) / d;
                let uy = (sa * (c.0 - b.0) + sb * (a.0 - c.0) + sc * (b.0 - a.0)) / d;
                let r = nearest((ux, uy));
                let slack = region - (ux * ux + uy * uy).sqrt() - r;
                if slack >= -1e-9 && r > best {
                    best = r;
                    margin = slack.max(0.0);
                }
            }
        }
    }
    (best, margin)
}

/// `Λ - Λ ± Λ ± ... ± Λ` with `k + 1` terms over the support.
#[derive(Debug, Clone)]
pub struct DifferenceSet {
    pub depth: usize,
    pub points: Vec<Vec<Q>>,
    /// Largest norm among the combinations.
    pub radius: f64,
}

pub fn difference_set(pattern: &MultiPattern, depth: usize) -> Result<DifferenceSet, PatternError> {
    if depth == 0 {
        return Err(PatternError::ResourceCap("depth must be at least 1".into()));
    }
    let support = pattern.support();
    let mut current: HashSet<Vec<Q>> = HashSet::new();
    for a in &support {
        for b in &support {
            current.insert(vsub(a, b));
        }
    }
    for _ in 1..depth {
        if current.len().saturating_mul(support.len()).saturating_mul(2) > MAX_DIFFERENCES * 8 {
            return Err(PatternError::ResourceCap(format!(
                "{} combinations times {} points",
                current.len(),
                support.len()
            )));
        }
        let mut next = HashSet::with_capacity(current.len() * 4);
        for d in &current {
            for p in &support {
                next.insert(vadd(d, p));
                next.insert(vsub(d, p));
            }
            if next.len() > MAX_DIFFERENCES {
                return Err(PatternError::ResourceCap(format!("more than {MAX_DIFFERENCES} differences")));
            }
        }
        current = next;
    }
    let mut points: Vec<Vec<Q>> = current.into_iter().collect();
    points.sort();
    let radius = points.iter().map(|p| norm_f64(p)).fold(0.0, f64::max);
    Ok(DifferenceSet { depth, points, radius })
}

/// Minimum distance of a difference set (positive iff uniformly discrete at this scale).
pub fn difference_min_gap(set: &DifferenceSet) -> Option<Length> {
    (set.points.len() >= 2).then(|| Length::from_vector(&min_gap_vector(&set.points)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MeyerOutcome {
    Found {
        f: Vec<Vec<Q>>,
        checked_differences: usize,
        restriction_radius: Q,
    },
    Failed {
        offending_difference: Vec<Q>,
        reason: String,
        restriction_radius: Q,
    },
}

/// Greedy search for a finite `F` with `Λ - Λ ⊆ Λ + F` on `B(0, region/2)`.
pub fn meyer_witness(pattern: &MultiPattern, cap: usize) -> Result<MeyerOutcome, PatternError> {
    let support = pattern.support();
    if support.is_empty() {
        return Err(PatternError::TooFewPoints { needed: 1, have: 0 });
    }
    let half = pattern.region_radius().scale(&num_rational::BigRational::new(1.into(), 2.into()));
    let diffs = difference_set(pattern, 1)?;
    let restricted: Vec<&Vec<Q>> = diffs.points.iter().filter(|d| within(d, &half)).collect();
    let mut f: BTreeSet<Vec<Q>> = BTreeSet::new();
    for d in &restricted {
        let nearest = nearest_point(&support, d);
        f.insert(vsub(d, &nearest));
        if f.len() > cap {
            return Ok(MeyerOutcome::Failed {
                offending_difference: (*d).clone(),
                reason: format!("|F| exceeds cap {cap}"),
                restriction_radius: half,
            });
        }
    }
    // exhaustive re-verification: every difference is a support point plus some f
    let support_set: HashSet<&Vec<Q>> = support.iter().collect();
    for d in &restricted {
        if !f.iter().any(|x| support_set.contains(&vsub(d, x))) {
            return Ok(MeyerOutcome::Failed {
                offending_difference: (*d).clone(),
                reason: "difference not covered by support + F".into(),
                restriction_radius: half,
            });
        }
    }
    Ok(MeyerOutcome::Found {
        f: f.into_iter().collect(),
        checked_differences: restricted.len(),
        restriction_radius: half,
    })
}

/// Closest support point to `x`; ties go to the lexicographically smaller one.
fn nearest_point(sorted_support: &[Vec<Q>], x: &[Q]) -> Vec<Q> {
    if x.len() == 1 {
        let i = sorted_support.partition_point(|p| p[0] < x[0]);
        let mut cands: Vec<&Vec<Q>> = Vec::new();
        if i > 0 {
            cands.push(&sorted_support[i - 1]);
        }
        if i < sorted_support.len() {
            cands.push(&sorted_support[i]);
        }
        return cands
            .into_iter()
            .min_by(|a, b| norm_sq(&vsub(a, x)).cmp(&norm_sq(&vsub(b, x))).then(a.cmp(b)))
            .expect("nonempty support")
            .clone();
    }
    sorted_support
        .iter()
        .min_by(|a, b| norm_sq(&vsub(a, x)).cmp(&norm_sq(&vsub(b, x))).then(a.cmp(b)))
        .expect("nonempty support")
        .clone()
}

/// Canonical patch: points translated so the center sits at the origin, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Patch {
    pub radius: Q,
    pub points: Vec<(Vec<Q>, usize)>,
}

impl Patch {
    pub fn to_pattern(&self, dim: usize, symbols: &[String]) -> Result<MultiPattern, PatternError> {
        MultiPattern::new(dim, symbols.to_vec(), self.radius.clone(), self.points.clone())
    }

    pub fn from_pattern(p: &MultiPattern) -> Patch {
        Patch {
            radius: p.region_radius().clone(),
            points: p.points().to_vec(),
        }
    }
}

/// `(Λ - center) ∩ B(0, r)` in canonical form.
pub fn extract_patch(pattern: &MultiPattern, center: &[Q], r: &Q) -> Result<Patch, PatternError> {
    let room = pattern.region_radius() - r;
    if room.sign() < 0 || !within(center, &room) {
        return Err(PatternError::Boundary {
            center: fmt_point(center),
            radius: r.to_string(),
        });
    }
    Ok(patch_unchecked(pattern, center, r))
}

fn patch_unchecked(pattern: &MultiPattern, center: &[Q], r: &Q) -> Patch {
    let mut points: Vec<(Vec<Q>, usize)> = if pattern.dim() == 1 {
        let lo = &center[0] - r;
        let hi = &center[0] + r;
        let pts = pattern.points();
        let start = pts.partition_point(|(c, _)| c[0] < lo);
        pts[start..]
            .iter()
            .take_while(|(c, _)| c[0] <= hi)
            .map(|(c, s)| (vsub(c, center), *s))
            .collect()
    } else {
        let rf = r.to_f64();
        let cf: Vec<f64> = center.iter().map(Q::to_f64).collect();
        pattern
            .points()
            .iter()
            .filter(|(c, _)| c.iter().zip(&cf).all(|(x, y)| (x.to_f64() - y).abs() <= rf + 1e-9))
            .map(|(c, s)| (vsub(c, center), *s))
            .filter(|(v, _)| within(v, r))
            .collect()
    };
    points.sort();
    Patch {
        radius: r.clone(),
        points,
    }
}

/// Patch classifier for all support centers of one pattern.
///
/// In dimension 1 a ball patch is a contiguous run of support points, so its
/// class is keyed by interned symbol sets and interned gaps; this is exact and
/// avoids building coordinate vectors. Dimension 2 keys on canonical patches.
pub struct PatchIndex<'a> {
    pattern: &'a MultiPattern,
    support: Vec<Vec<Q>>,
    approx: Vec<f64>,
    tokens: Vec<u32>,
    gaps: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum PatchKey {
    Runs(Vec<u32>),
    Exact(Patch),
}

impl<'a> PatchIndex<'a> {
    pub fn new(pattern: &'a MultiPattern) -> Self {
        let support = pattern.support();
        let mut token_ids: HashMap<Vec<usize>, u32> = HashMap::new();
        let mut sets: BTreeMap<Vec<Q>, Vec<usize>> = BTreeMap::new();
        for (c, s) in pattern.points() {
            sets.entry(c.clone()).or_default().push(*s);
        }
        let tokens = support
            .iter()
            .map(|c| {
                let n = token_ids.len() as u32;
                *token_ids.entry(sets[c].clone()).or_insert(n)
            })
            .collect();
        let mut gap_ids: HashMap<Q, u32> = HashMap::new();
        let gaps = if pattern.dim() == 1 {
            support
                .windows(2)
                .map(|w| {
                    let n = gap_ids.len() as u32;
                    *gap_ids.entry(&w[1][0] - &w[0][0]).or_insert(n)
                })
                .collect()
        } else {
            vec![]
        };
        let approx = support.iter().map(|c| c[0].to_f64()).collect();
        PatchIndex {
            pattern,
            support,
            approx,
            tokens,
            gaps,
        }
    }

    pub fn pattern(&self) -> &MultiPattern {
        self.pattern
    }

    pub fn support(&self) -> &[Vec<Q>] {
        &self.support
    }

    pub fn position(&self, c: &[Q]) -> Option<usize> {
        self.support.binary_search_by(|p| p.as_slice().cmp(c)).ok()
    }

    /// Support indices whose `r`-ball lies inside `B(0, fraction * region)`.
    pub fn safe_centers(&self, r: &Q, fraction: &Q) -> Vec<usize> {
        let room = &(fraction * self.pattern.region_radius()) - r;
        if room.sign() < 0 {
            return vec![];
        }
        (0..self.support.len()).filter(|&i| within(&self.support[i], &room)).collect()
    }

    fn key(&self, i: usize, r: &Q) -> PatchKey {
        if self.pattern.dim() != 1 {
            return PatchKey::Exact(patch_unchecked(self.pattern, &self.support[i], r));
        }
        let x = &self.support[i][0];
        let lo = self.first_not_below(&(x - r), false);
        let hi = self.first_not_below(&(x + r), true);
        let mut key = Vec::with_capacity(2 * (hi - lo) + 1);
        key.push((i - lo) as u32);
        key.extend_from_slice(&self.tokens[lo..hi]);
        key.extend_from_slice(&self.gaps[lo..hi - 1]);
        PatchKey::Runs(key)
    }

    /// First index whose coordinate is `>= t` (or `> t` when `strict`) in
    /// dimension 1. Floats locate the neighborhood, exact comparisons decide.
    fn first_not_below(&self, t: &Q, strict: bool) -> usize {
        let tf = t.to_f64();
        let slack = 1e-9 * (1.0 + tf.abs());
        let below = |j: usize| if strict { self.support[j][0] <= *t } else { self.support[j][0] < *t };
        let mut j = self.approx.partition_point(|&v| v < tf - slack);
        while j < self.support.len() && below(j) {
            j += 1;
        }
        j
    }

    /// Class id per center, ids assigned by first appearance.
    pub fn classes(&self, centers: &[usize], r: &Q) -> (Vec<usize>, usize) {
        let mut ids: HashMap<PatchKey, usize> = HashMap::new();
        let out = centers
            .iter()
            .map(|&i| {
                let n = ids.len();
                *ids.entry(self.key(i, r)).or_insert(n)
            })
            .collect();
        (out, ids.len())
    }

    pub fn patch(&self, i: usize, r: &Q) -> Patch {
        patch_unchecked(self.pattern, &self.support[i], r)
    }

    pub fn same_patch(&self, i: usize, j: usize, r: &Q) -> bool {
        self.key(i, r) == self.key(j, r)
    }

    /// Words of `n` consecutive support points (dimension 1): symbol sets and
    /// the `n - 1` gaps between them.
    pub fn consecutive_classes(&self, n: usize) -> Vec<(Vec<u32>, usize)> {
        assert_eq!(self.pattern.dim(), 1, "consecutive coding needs dimension 1");
        let mut counts: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        if n == 0 || n > self.support.len() {
            return vec![];
        }
        for s in 0..=(self.support.len() - n) {
            let mut key = self.tokens[s..s + n].to_vec();
            key.extend_from_slice(&self.gaps[s..s + n - 1]);
            *counts.entry(key).or_default() += 1;
        }
        counts.into_iter().collect()
    }
}

#[derive(Debug, Clone)]
pub struct LanguageEntry {
    pub patch: Patch,
    pub occurrences: Vec<Vec<Q>>,
}

#[derive(Debug, Clone)]
pub struct PatchLanguage {
    pub radius: Q,
    pub entries: Vec<LanguageEntry>,
    pub centers: usize,
    /// Distinct patches found using centers inside 1/4, 1/2, 3/4 and all of the region.
    pub pass_counts: Vec<usize>,
    pub flc_suspect: bool,
}

impl PatchLanguage {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, p: &Patch) -> bool {
        self.entries.iter().any(|e| e.patch == *p)
    }
}

/// All `r`-patches centered at support points whose ball stays in the region.
pub fn language(pattern: &MultiPattern, r: &Q) -> PatchLanguage {
    let index = PatchIndex::new(pattern);
    let centers = index.safe_centers(r, &Q::one());
    let (classes, count) = index.classes(&centers, r);
    let mut entries: Vec<Option<LanguageEntry>> = vec![None; count];
    for (&c, &k) in centers.iter().zip(&classes) {
        let e = entries[k].get_or_insert_with(|| LanguageEntry {
            patch: index.patch(c, r),
            occurrences: vec![],
        });
        e.occurrences.push(index.support()[c].clone());
    }
    let mut entries: Vec<LanguageEntry> = entries.into_iter().map(|e| e.expect("every class seen")).collect();
    entries.sort_by(|a, b| a.patch.cmp(&b.patch));

    let pass_counts: Vec<usize> = (1..=4)
        .map(|k| {
            let cs = index.safe_centers(r, &Q::frac(k, 4));
            index.classes(&cs, r).1
        })
        .collect();
    let strictly_growing = pass_counts.windows(2).all(|w| w[1] > w[0]);
    let flc_suspect = strictly_growing && 2 * count > centers.len();
    PatchLanguage {
        radius: r.clone(),
        entries,
        centers: centers.len(),
        pass_counts,
        flc_suspect,
    }
}

/// Number of distinct runs of `n` consecutive points (dimension 1).
pub fn consecutive_complexity(pattern: &MultiPattern, n: usize) -> usize {
    PatchIndex::new(pattern).consecutive_classes(n).len()
}

#[derive(Debug, Clone)]
pub struct Repetitivity {
    pub radius: Q,
    /// Largest gap between consecutive occurrences of any patch; exact in d = 1.
    pub bound_exact: Option<Q>,
    pub bound: f64,
    /// Patches seen fewer than twice, so no gap could be measured.
    pub inconclusive: Vec<Patch>,
}

pub fn repetitivity_bound(pattern: &MultiPattern, r: &Q) -> Repetitivity {
    let lang = language(pattern, r);
    let mut inconclusive = Vec::new();
    let mut best_exact: Option<Q> = None;
    let mut best: f64 = 0.0;
    for e in &lang.entries {
        if e.occurrences.len() < 2 {
            inconclusive.push(e.patch.clone());
            continue;
        }
        if pattern.dim() == 1 {
            let mut occ: Vec<&Q> = e.occurrences.iter().map(|c| &c[0]).collect();
            occ.sort();
            for w in occ.windows(2) {
                let g = w[1] - w[0];
                if best_exact.as_ref().is_none_or(|b| g > *b) {
                    best = g.to_f64();
                    best_exact = Some(g);
                }
            }
        } else {
            // nearest-occurrence proxy for the return radius
            let pts: Vec<(f64, f64)> = e.occurrences.iter().map(|c| (c[0].to_f64(), c[1].to_f64())).collect();
            for (i, a) in pts.iter().enumerate() {
                let nn = pts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, b)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                best = best.max(nn);
            }
        }
    }
    Repetitivity {
        radius: r.clone(),
        bound_exact: best_exact,
        bound: best,
        inconclusive,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    /// Square of the agreement radius behind `value`.
    pub radius_squared: Q,
    /// No disagreement inside the common region.
    pub indistinguishable: bool,
}

fn symmetric_difference_min(p1: &MultiPattern, p2: &MultiPattern, cap_sq: &Q) -> Option<Q> {
    let a: HashSet<(&Vec<Q>, &String)> = p1.points().iter().map(|(c, s)| (c, &p1.symbols()[*s])).collect();
    let b: HashSet<(&Vec<Q>, &String)> = p2.points().iter().map(|(c, s)| (c, &p2.symbols()[*s])).collect();
    let diff: Vec<&Vec<Q>> = a.symmetric_difference(&b).map(|(c, _)| *c).collect();
    min_norm_sq(diff.into_iter(), Some(cap_sq)).map(|(_, n)| n)
}

/// Exact minimum of `|v|^2` (at most `cap_sq`), with exact work only for
/// vectors whose float norm is near the float minimum.
fn min_norm_sq<'a>(vs: impl Iterator<Item = &'a Vec<Q>>, cap_sq: Option<&Q>) -> Option<(&'a Vec<Q>, Q)> {
    let cap = cap_sq.map_or(f64::INFINITY, |c| c.to_f64().sqrt());
    let slack = |x: f64| 1e-9 * (1.0 + x);
    let normed: Vec<(&Vec<Q>, f64)> = vs.map(|v| (v, norm_f64(v))).filter(|(_, n)| !(*n > cap + slack(cap))).collect();
    let fmin = normed.iter().map(|(_, n)| *n).filter(|n| !n.is_nan()).fold(f64::INFINITY, f64::min);
    normed
        .into_iter()
        .filter(|(_, n)| !(*n > fmin + slack(fmin)))
        .map(|(v, _)| (v, norm_sq(v)))
        .filter(|(_, n)| cap_sq.is_none_or(|c| n <= c))
        .min_by(|x, y| x.1.cmp(&y.1).then(x.0.cmp(y.0)))
}

fn check_compatible(p1: &MultiPattern, p2: &MultiPattern) -> Result<(), PatternError> {
    if p1.dim() != p2.dim() {
        return Err(PatternError::Dim {
            expected: p1.dim(),
            got: p2.dim(),
        });
    }
    let s1: BTreeSet<&String> = p1.symbols().iter().collect();
    let s2: BTreeSet<&String> = p2.symbols().iter().collect();
    if s1 != s2 {
        return Err(PatternError::SymbolMismatch);
    }
    Ok(())
}

/// Exact-agreement ultrametric `1/(1+R*)`, `R*` the first disagreement
/// radius (capped by the smaller region).
pub fn combinatoric_distance(p1: &MultiPattern, p2: &MultiPattern) -> Result<MetricValue, PatternError> {
    check_compatible(p1, p2)?;
    let cap = p1.region_radius().clone().min(p2.region_radius().clone());
    let cap_sq = &cap * &cap;
    let (sq, indistinguishable) = match symmetric_difference_min(p1, p2, &cap_sq) {
        Some(sq) => (sq, false),
        None => (cap_sq, true),
    };
    Ok(MetricValue {
        value: 1.0 / (1.0 + sq.to_f64().sqrt()),
        radius_squared: sq,
        indistinguishable,
    })
}

/// Upper bound for the shift-tolerant metric: symmetric shifts `±s/2` for
/// `s = 0` and for differences between points nearest the origin.
pub fn local_distance(p1: &MultiPattern, p2: &MultiPattern) -> Result<MetricValue, PatternError> {
    check_compatible(p1, p2)?;
    let mut best = combinatoric_distance(p1, p2)?;
    let (Some(a), Some(_)) = (p1.nearest_to_origin(), p2.nearest_to_origin()) else {
        return Ok(best);
    };
    let reach = norm_f64(&a) + 2.0;
    let half = num_rational::BigRational::new(1.into(), 2.into());
    for b in p2.support() {
        if norm_f64(&b) > reach {
            continue;
        }
        let s = vsub(&a, &b);
        let s_len = norm_f64(&s);
        if s_len == 0.0 || s_len >= 2.0 {
            continue;
        }
        let t: Vec<Q> = s.iter().map(|x| x.scale(&half)).collect();
        let t_len = norm_f64(&t);
        let r1 = p1.region_radius().to_f64() - t_len;
        let r2 = p2.region_radius().to_f64() - t_len;
        if r1 <= 0.0 || r2 <= 0.0 {
            continue;
        }
        // (Λ - t) vs (Λ' + t), each complete on its shrunken ball
        let cap = Q::rational(simple_below(r1.min(r2)));
        let q1 = p1.shifted(&t, cap.clone())?;
        let q2 = p2.shifted(&vneg(&t), cap.clone())?;
        let cap_sq = &cap * &cap;
        let (sq, indist) = match symmetric_difference_min(&q1, &q2, &cap_sq) {
            Some(sq) => (sq, false),
            None => (cap_sq, true),
        };
        let agree = sq.to_f64().sqrt();
        // shifts must satisfy |t| < 1/(1+R)
        let r_shift = 1.0 / t_len - 1.0;
        let r = agree.min(r_shift);
        let value = 1.0 / (1.0 + r);
        if value < best.value {
            best = MetricValue {
                value,
                radius_squared: sq,
                indistinguishable: indist && agree <= r_shift,
            };
        }
    }
    Ok(best)
}

/// A rational slightly below a positive float, used to keep shifted balls inside regions.
fn simple_below(x: f64) -> num_rational::BigRational {
    let scaled = (x * 1024.0).floor() as i64 - 1;
    num_rational::BigRational::new(scaled.max(0).into(), 1024.into())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    pub fn integers(r: i64) -> MultiPattern {
        MultiPattern::new(1, vec!["x".into()], Q::int(r), (-r..=r).map(|n| (vec![Q::int(n)], 0)).collect()).unwrap()
    }

    /// Fibonacci word from a -> ab, b -> a, laid out with tiles phi (a) and 1 (b).
    pub fn fibonacci_oracle(radius: i64) -> MultiPattern {
        let phi = q("1/2 + 1/2*sqrt(5)");
        let mut right = vec![0u8];
        let mut left = vec![1u8];
        let sub = |w: &[u8]| -> Vec<u8> { w.iter().flat_map(|&c| if c == 0 { vec![0, 1] } else { vec![0] }).collect() };
        while right.len() < (radius as usize) * 2 {
            right = sub(&right);
            left = sub(&sub(&left));
        }
        let len = |c: u8| if c == 0 { phi.clone() } else { Q::one() };
        let r = Q::int(radius);
        let mut pts = Vec::new();
        let mut x = Q::zero();
        for &c in &right {
            if x > r {
                break;
            }
            pts.push((vec![x.clone()], c as usize));
            x = &x + &len(c);
        }
        let mut x = Q::zero();
        for &c in left.iter().rev() {
            x = &x - &len(c);
            if x < -&r {
                break;
            }
            pts.push((vec![x.clone()], c as usize));
        }
        MultiPattern::new(1, vec!["a".into(), "b".into()], r, pts).unwrap()
    }

    #[test]
    fn min_gap_examples() {
        assert_eq!(min_gap(&integers(10)).unwrap().exact, Some(Q::one()));
        let phi = q("1/2 + 1/2*sqrt(5)");
        let p = MultiPattern::new(1, vec!["x".into()], Q::int(2), vec![(vec![Q::zero()], 0), (vec![phi.clone()], 0)]).unwrap();
        assert_eq!(min_gap(&p).unwrap().exact, Some(phi));
        assert_eq!(min_gap(&fibonacci_oracle(30)).unwrap().exact, Some(Q::one()));
        assert!(min_gap(&integers(0)).is_err());
    }

    #[test]
    fn density_radius_examples() {
        let z = relative_density_radius(&integers(10), false).unwrap();
        assert_eq!(z[0].exact, Some(Q::frac(1, 2)));
        let fib = relative_density_radius(&fibonacci_oracle(60), true).unwrap();
        let phi_sq_half = q("3/4 + 1/4*sqrt(5)");
        assert_eq!(fib[0].exact, Some(phi_sq_half));
    }

    #[test]
    fn density_radius_grid_matches_brute_force() {
        let mut pts = Vec::new();
        for x in -8..=8i64 {
            for y in -8..=8i64 {
                if x * x + y * y <= 64 {
                    pts.push((vec![Q::int(x), Q::int(y)], 0));
                }
            }
        }
        let p = MultiPattern::new(2, vec!["x".into()], Q::int(8), pts).unwrap();
        let r = relative_density_radius(&p, false).unwrap()[0].approx;
        // brute force: sample centers on a fine grid inside B(0, 6)
        let mut brute: f64 = 0.0;
        for i in -60..=60 {
            for j in -60..=60 {
                let c = (i as f64 / 10.0, j as f64 / 10.0);
                if (c.0 * c.0 + c.1 * c.1).sqrt() > 6.0 {
                    continue;
                }
                let nn = p
                    .points()
                    .iter()
                    .map(|(v, _)| ((v[0].to_f64() - c.0).powi(2) + (v[1].to_f64() - c.1).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                brute = brute.max(nn);
            }
        }
        assert!((r - brute).abs() < 1e-9, "{r} vs {brute}");
        assert!((r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn difference_set_examples() {
        let d = difference_set(&integers(5), 1).unwrap();
        assert_eq!(d.points, (-10..=10).map(|n| vec![Q::int(n)]).collect::<Vec<_>>());
        let fib = fibonacci_oracle(30);
        let d1 = difference_set(&fib, 1).unwrap();
        assert!(d1.points.contains(&vec![Q::zero()]));
        for p in &d1.points {
            assert!(d1.points.binary_search(&vneg(p)).is_ok());
        }
        let d2 = difference_set(&fib, 2).unwrap();
        assert!(difference_min_gap(&d2).unwrap().squared.sign() > 0);
    }

    #[test]
    fn meyer_examples() {
        match meyer_witness(&integers(20), MEYER_F_CAP).unwrap() {
            MeyerOutcome::Found { f, .. } => assert_eq!(f, vec![vec![Q::zero()]]),
            other => panic!("{other:?}"),
        }
        let mut pts: Vec<(Vec<Q>, usize)> = (-20..=19).map(|n| (vec![Q::int(n)], 0)).collect();
        pts.extend((-20..=19).map(|n| (vec![&Q::int(n) + &Q::frac(1, 3)], 0)));
        let p = MultiPattern::new(1, vec!["x".into()], Q::int(20), pts).unwrap();
        let allowed: Vec<Q> = ["0", "1/3", "-1/3", "2/3", "-2/3"].iter().map(|s| q(s)).collect();
        match meyer_witness(&p, MEYER_F_CAP).unwrap() {
            MeyerOutcome::Found { f, .. } => assert!(f.iter().all(|x| allowed.contains(&x[0]))),
            other => panic!("{other:?}"),
        }
        match meyer_witness(&fibonacci_oracle(50), MEYER_F_CAP).unwrap() {
            MeyerOutcome::Found { f, .. } => assert!(f.len() <= 6, "{}", f.len()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn patch_examples() {
        let z = integers(10);
        let p = extract_patch(&z, &[Q::int(3)], &Q::frac(1, 2)).unwrap();
        assert_eq!(p.points, vec![(vec![Q::zero()], 0)]);
        let whole = extract_patch(&z, &[Q::zero()], &Q::int(10)).unwrap();
        assert_eq!(whole.points.len(), 21);
        assert!(extract_patch(&z, &[Q::int(9)], &Q::int(2)).is_err());
    }

    /// Distinct factors of the substitution word whose geometric span fits.
    fn fib_word_factors(word: &[u8], n: usize) -> usize {
        word.windows(n).collect::<BTreeSet<_>>().len()
    }

    #[test]
    fn fibonacci_consecutive_complexity() {
        let fib = fibonacci_oracle(300);
        let mut word = vec![0u8];
        while word.len() < 10_000 {
            word = word.iter().flat_map(|&c| if c == 0 { vec![0, 1] } else { vec![0] }).collect();
        }
        for n in 1..=12 {
            assert_eq!(fib_word_factors(&word, n), n + 1);
            assert_eq!(consecutive_complexity(&fib, n), n + 1, "n = {n}");
        }
    }

    #[test]
    fn language_examples() {
        assert_eq!(language(&integers(20), &Q::int(3)).len(), 1);
        // ball patches of radius 3 at all centers: equals factor count of the
        // windows of points within distance 3
        let fib = fibonacci_oracle(200);
        let lang = language(&fib, &Q::int(3));
        assert!(!lang.flc_suspect);
        let idx = PatchIndex::new(&fib);
        let centers = idx.safe_centers(&Q::int(3), &Q::one());
        let brute: BTreeSet<Patch> = centers.iter().map(|&c| extract_patch(&fib, &idx.support()[c], &Q::int(3)).unwrap()).collect();
        assert_eq!(lang.len(), brute.len());
    }

    #[test]
    fn non_flc_is_flagged() {
        // integers with offsets 1/(|n|+2) accumulate towards the lattice
        let pts = (-40..=39i64).map(|n| (vec![&Q::int(n) + &Q::frac(1, n.abs() + 2)], 0)).collect();
        let p = MultiPattern::new(1, vec!["x".into()], Q::int(40), pts).unwrap();
        assert!(language(&p, &Q::int(2)).flc_suspect);
    }

    #[test]
    fn repetitivity_examples() {
        let r = repetitivity_bound(&integers(20), &Q::one());
        assert_eq!(r.bound_exact, Some(Q::one()));
        assert!(r.inconclusive.is_empty());
        let fib = repetitivity_bound(&fibonacci_oracle(200), &Q::int(2));
        assert!(fib.inconclusive.is_empty());
        assert!(fib.bound_exact.is_some());
        let mut pts: Vec<(Vec<Q>, usize)> = (-20..=20).map(|n| (vec![Q::int(n)], 0)).collect();
        pts.push((vec![Q::frac(1, 2)], 1));
        let marked = MultiPattern::new(1, vec!["x".into(), "y".into()], Q::int(20), pts).unwrap();
        assert!(!repetitivity_bound(&marked, &Q::one()).inconclusive.is_empty());
    }

    #[test]
    fn metric_examples() {
        let fib = fibonacci_oracle(40);
        let same = combinatoric_distance(&fib, &fib).unwrap();
        assert!(same.indistinguishable);
        assert!((same.value - 1.0 / 41.0).abs() < 1e-12);
        let z = integers(10);
        let mut shifted_pts = z.points().to_vec();
        shifted_pts.retain(|(c, _)| !c[0].is_zero());
        let holed = MultiPattern::new(1, vec!["x".into()], Q::int(10), shifted_pts).unwrap();
        assert_eq!(combinatoric_distance(&z, &holed).unwrap().value, 1.0);
        assert_eq!(local_distance(&fib, &fib).unwrap().value, same.value);
    }

    #[test]
    fn tiny_shift_is_close_in_local_metric() {
        let z = integers(20);
        let s = Q::frac(1, 100);
        let moved = z.shifted(std::slice::from_ref(&s), Q::int(19)).unwrap();
        let d = local_distance(&z, &moved).unwrap();
        // bounded by the region floor 1/(1+19) once the shift is undone
        assert!(d.value <= 1.0 / 19.9, "{}", d.value);
        assert!(combinatoric_distance(&z, &moved).unwrap().value == 1.0);
    }

    #[test]
    fn json_roundtrip_is_byte_exact() {
        let fib = fibonacci_oracle(10);
        let text = fib.to_json();
        let back = MultiPattern::from_json(&text).unwrap();
        assert_eq!(back, fib);
        assert_eq!(back.to_json(), text);
    }

    fn translate_pair() -> impl Strategy<Value = (i64, i64)> {
        (-30i64..30, -30i64..30)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ultrametric_and_local_below_combinatoric((a, b) in translate_pair(), c in -30i64..30) {
            let base = fibonacci_oracle(120);
            // translates by support points keep the pattern inside the hull
            let support = base.support();
            let pick = |k: i64| support[(support.len() as i64 / 2 + k) as usize].clone();
            let x = base.shifted(&pick(a), Q::int(50)).unwrap();
            let y = base.shifted(&pick(b), Q::int(50)).unwrap();
            let z = base.shifted(&pick(c), Q::int(50)).unwrap();
            let dxz = combinatoric_distance(&x, &z).unwrap().value;
            let dxy = combinatoric_distance(&x, &y).unwrap().value;
            let dyz = combinatoric_distance(&y, &z).unwrap().value;
            prop_assert!(dxz <= dxy.max(dyz) + 1e-12);
            prop_assert!(local_distance(&x, &y).unwrap().value <= dxy + 1e-12);
        }

        #[test]
        fn patches_are_translation_invariant(k in -40i64..40) {
            let base = fibonacci_oracle(100);
            let support = base.support();
            let s = support[(support.len() as i64 / 2 + k) as usize].clone();
            let moved = base.shifted(&s, Q::int(50)).unwrap();
            let r = Q::int(4);
            let far = &support[(support.len() as i64 / 2 + k + 3) as usize];
            let p1 = extract_patch(&base, far, &r).unwrap();
            let p2 = extract_patch(&moved, &vsub(far, &s), &r).unwrap();
            prop_assert_eq!(p1, p2);
        }

    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn language_grows_with_radius(r in 1i64..8) {
            let fib = fibonacci_oracle(120);
            let a = language(&fib, &Q::int(r)).len();
            let b = language(&fib, &Q::int(r + 1)).len();
            prop_assert!(a <= b);
        }
    }
}
