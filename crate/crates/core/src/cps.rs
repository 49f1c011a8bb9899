//! Cut & project schemes over real quadratic fields.
//!
//! A scheme is given by `k` generators `(v_j, s_j)` of the lattice
//! `Σ ⊂ R^d × H`, where `v_j ∈ K^d` spans the structure group `Γ` and
//! `s_j = v_j*` is its internal image. The Euclidean part of `Σ` must be a
//! full lattice in `R^{d+e}`, so `k = d + e` and the real generator matrix
//! `M` (physical rows over internal Euclidean rows) is invertible. All
//! lattice enumeration runs through `M^{-1}` with exact floors.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{self, ExactError, QuadRational, Rational};
use crate::internal::{
    self, Coord, InternalError, InternalGroup, InternalPoint, Membership, Quotient, Window, WindowCell,
};
use crate::patterns::{norm_sq, vsub, within, MultiPattern, PatternError};

type Q = QuadRational;

/// Hard cap on enumerated lattice candidates per call.
pub const MAX_CANDIDATES: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpsError {
    #[error("malformed scheme: {0}")]
    Parse(String),
    #[error("invalid scheme: {0}")]
    Invalid(String),
    #[error("{0} is not in the structure group")]
    NotInStructureGroup(String),
    #[error("pattern is not from this scheme: {0}")]
    NotFromScheme(String),
    #[error("pattern has no points")]
    EmptyPattern,
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Internal(#[from] InternalError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub physical: Vec<Q>,
    pub internal: InternalPoint,
}

/// `(w, t)`: internal translate of the windows and physical translate of the pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeParameter {
    pub w: InternalPoint,
    pub t: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub physical: Vec<Q>,
    pub internal: Vec<Coord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset_name: Option<String>,
    pub physical_dim: usize,
    pub field_m: u32,
    /// Density of `Γ*` in `H` as declared by the author; never verified.
    #[serde(default)]
    pub declared_dense: bool,
    pub internal: InternalGroup,
    pub generators: Vec<GeneratorEntry>,
    pub windows: BTreeMap<String, Vec<WindowCell>>,
}

#[derive(Debug, Clone)]
pub struct CutProjectScheme {
    preset_name: Option<String>,
    physical_dim: usize,
    field_m: u32,
    declared_dense: bool,
    internal: InternalGroup,
    generators: Vec<Generator>,
    symbols: Vec<String>,
    windows: Vec<Window>,
    /// Columns are generators; rows are the physical coordinates followed by
    /// the Euclidean internal coordinates.
    matrix: Vec<Vec<Q>>,
    inverse: Vec<Vec<Q>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Singularity {
    /// No `Γ*` point meets any translated window boundary.
    Nonsingular { exact: bool },
    Singular { gamma: Vec<Q>, star: InternalPoint, symbol: String },
    /// Nothing found with `|γ| <= bound`, and no exact argument was available.
    Undecided { bound: Q },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocateMode {
    /// Parameters for which the input is an inter-model pattern on its region.
    Exact,
    /// Parameters whose closed windows select a superset of the input.
    Containment,
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub w: InternalPoint,
    pub mode: Option<LocateMode>,
    pub delta: MultiPattern,
    pub contained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvalue {
    pub beta: Vec<Q>,
    pub kappa: Vec<Q>,
    /// Character of the compact part, one residue per compact component.
    pub eta: Vec<u64>,
    pub norm: f64,
}

impl Eigenvalue {
    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta.iter().map(Q::to_f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientCheck {
    pub redundancy_size: usize,
    pub redundancy: Vec<Vec<Coord>>,
    pub index: usize,
    pub equal: bool,
    /// Quotient eigenvalues coincide with the scheme's characters trivial on
    /// the redundancy group, compared up to `compared_radius`.
    pub quotient_consistent: bool,
    pub compared_radius: f64,
    pub compared_count: usize,
}

fn q_int(n: i64) -> Q {
    Q::int(n)
}

fn bigint_to_i64(b: num_bigint::BigInt) -> Result<i64, CpsError> {
    b.to_i64().ok_or_else(|| CpsError::ResourceCap("coordinate exceeds 64-bit range".into()))
}

impl CutProjectScheme {
    pub fn new(
        physical_dim: usize,
        field_m: u32,
        internal: InternalGroup,
        generators: Vec<Generator>,
        windows: Vec<(String, Window)>,
    ) -> Result<Self, CpsError> {
        if !(1..=2).contains(&physical_dim) {
            return Err(CpsError::Invalid(format!("physical dimension {physical_dim} not in 1..=2")));
        }
        if !exact::is_squarefree(field_m as u64) {
            return Err(CpsError::Invalid(format!("field_m = {field_m} is not squarefree > 1")));
        }
        let e = internal.euclid_dim();
        let k = generators.len();
        if k != physical_dim + e {
            return Err(CpsError::Invalid(format!(
                "{k} generators, expected physical_dim + Euclidean internal dim = {}",
                physical_dim + e
            )));
        }
        let field_ok = |x: &Q| x.field() == 1 || x.field() == field_m;
        for g in &generators {
            if g.physical.len() != physical_dim {
                return Err(CpsError::Invalid("generator has wrong physical dimension".into()));
            }
            internal.check_point(&g.internal)?;
            if !g.physical.iter().chain(&g.internal.real).all(field_ok) {
                return Err(CpsError::Invalid(format!("generator scalar outside Q(sqrt({field_m}))")));
            }
        }
        let mut seen = BTreeSet::new();
        for (name, w) in &windows {
            if !seen.insert(name.clone()) {
                return Err(CpsError::Invalid(format!("duplicate symbol {name:?}")));
            }
            if w.group() != &internal {
                return Err(CpsError::Invalid(format!("window {name:?} lives on another group")));
            }
            if !w.is_topologically_regular() {
                return Err(CpsError::Invalid(format!("window {name:?} is not topologically regular")));
            }
            for u in w.atoms().values() {
                for c in u.cells() {
                    for iv in &c.0 {
                        if !field_ok(&iv.lo) || !field_ok(&iv.hi) {
                            return Err(CpsError::Invalid(format!("window {name:?} endpoint outside the field")));
                        }
                    }
                }
            }
        }
        if windows.is_empty() {
            return Err(CpsError::Invalid("no windows".into()));
        }
        let matrix: Vec<Vec<Q>> = (0..physical_dim)
            .map(|i| generators.iter().map(|g| g.physical[i].clone()).collect())
            .chain((0..e).map(|i| generators.iter().map(|g| g.internal.real[i].clone()).collect()))
            .collect();
        let inverse = exact::invert_matrix(&matrix)
            .ok_or_else(|| CpsError::Invalid("generator matrix is singular: Σ is not a lattice".into()))?;
        // the physical projection must be injective on the generated group
        let phys_rows: Vec<Vec<Rational>> = (0..physical_dim)
            .flat_map(|i| {
                let gens = &generators;
                [
                    gens.iter().map(|g| g.physical[i].rational_part().clone()).collect::<Vec<_>>(),
                    gens.iter().map(|g| g.physical[i].surd_part().clone()).collect::<Vec<_>>(),
                ]
            })
            .collect();
        if exact::rational_rank(&phys_rows) != k {
            return Err(CpsError::Invalid("γ ↦ γ is not injective on the generated group".into()));
        }
        let (symbols, windows): (Vec<String>, Vec<Window>) = windows.into_iter().unzip();
        Ok(CutProjectScheme {
            preset_name: None,
            physical_dim,
            field_m,
            declared_dense: false,
            internal,
            generators,
            symbols,
            windows,
            matrix,
            inverse,
        })
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.preset_name = Some(name.to_string());
        self
    }

    pub fn with_declared_dense(mut self, dense: bool) -> Self {
        self.declared_dense = dense;
        self
    }

    pub fn preset_name(&self) -> Option<&str> {
        self.preset_name.as_deref()
    }

    pub fn physical_dim(&self) -> usize {
        self.physical_dim
    }

    pub fn field_m(&self) -> u32 {
        self.field_m
    }

    pub fn declared_dense(&self) -> bool {
        self.declared_dense
    }

    pub fn internal(&self) -> &InternalGroup {
        &self.internal
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn window(&self, symbol: &str) -> Option<&Window> {
        self.symbols.iter().position(|s| s == symbol).map(|i| &self.windows[i])
    }

    pub fn matrix(&self) -> &[Vec<Q>] {
        &self.matrix
    }

    pub fn to_file(&self) -> SchemeFile {
        SchemeFile {
            preset_name: self.preset_name.clone(),
            physical_dim: self.physical_dim,
            field_m: self.field_m,
            declared_dense: self.declared_dense,
            internal: self.internal.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorEntry {
                    physical: g.physical.clone(),
                    internal: g.internal.to_coords(&self.internal),
                })
                .collect(),
            windows: self.symbols.iter().cloned().zip(self.windows.iter().map(Window::to_cells)).collect(),
        }
    }

    pub fn from_file(f: SchemeFile) -> Result<Self, CpsError> {
        let internal = InternalGroup::new(f.internal.components().to_vec())?;
        let generators = f
            .generators
            .iter()
            .map(|g| {
                Ok(Generator {
                    physical: g.physical.clone(),
                    internal: InternalPoint::from_coords(&g.internal, &internal)?,
                })
            })
            .collect::<Result<Vec<_>, CpsError>>()?;
        let windows = f
            .windows
            .into_iter()
            .map(|(name, cells)| Ok((name, Window::from_cells(&internal, cells)?)))
            .collect::<Result<Vec<_>, CpsError>>()?;
        let mut s = CutProjectScheme::new(f.physical_dim, f.field_m, internal, generators, windows)?;
        s.preset_name = f.preset_name;
        s.declared_dense = f.declared_dense;
        Ok(s)
    }

    /// Canonical JSON text (trailing newline).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CpsError> {
        let f: SchemeFile = serde_json::from_str(text).map_err(|e| CpsError::Parse(e.to_string()))?;
        CutProjectScheme::from_file(f)
    }

    /// Internal image of the integer combination `Σ n_j s_j`.
    pub fn star_of_coefficients(&self, n: &[i64]) -> InternalPoint {
        let mut acc = self.internal.zero();
        for (g, &c) in self.generators.iter().zip(n) {
            if c != 0 {
                acc = acc.add(&g.internal.mul_int(c, &self.internal), &self.internal);
            }
        }
        acc
    }

    pub fn physical_of_coefficients(&self, n: &[i64]) -> Vec<Q> {
        (0..self.physical_dim)
            .map(|i| {
                self.generators
                    .iter()
                    .zip(n)
                    .fold(Q::zero(), |acc, (g, &c)| &acc + &(&g.physical[i] * &q_int(c)))
            })
            .collect()
    }

    /// Generator coordinates of `γ`, if `γ ∈ Γ`.
    pub fn coefficients(&self, gamma: &[Q]) -> Result<Vec<i64>, CpsError> {
        let shown = || gamma.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        if gamma.len() != self.physical_dim {
            return Err(CpsError::NotInStructureGroup(format!("({}) has wrong dimension", shown())));
        }
        if gamma.iter().any(|x| x.field() != 1 && x.field() != self.field_m) {
            return Err(CpsError::NotInStructureGroup(format!("({})", shown())));
        }
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (i, g_i) in gamma.iter().enumerate() {
            rows.push(self.generators.iter().map(|g| g.physical[i].rational_part().clone()).collect::<Vec<_>>());
            rhs.push(g_i.rational_part().clone());
            rows.push(self.generators.iter().map(|g| g.physical[i].surd_part().clone()).collect::<Vec<_>>());
            rhs.push(g_i.surd_part().clone());
        }
        match exact::solve_rational(&rows, &rhs) {
            Some(Ok(x)) if x.iter().all(|v| v.is_integer()) => {
                x.into_iter().map(|v| bigint_to_i64(v.to_integer())).collect()
            }
            _ => Err(CpsError::NotInStructureGroup(format!("({})", shown()))),
        }
    }

    /// The *-map `γ ↦ γ*`.
    pub fn star(&self, gamma: &[Q]) -> Result<InternalPoint, CpsError> {
        Ok(self.star_of_coefficients(&self.coefficients(gamma)?))
    }

    /// Visits every lattice point `(γ, γ*)` with `|γ - center| <= radius` whose
    /// Euclidean internal coordinates lie in `internal_box` (one closed
    /// interval per axis).
    pub fn enumerate(
        &self,
        center: &[Q],
        radius: &Q,
        internal_box: &[(Q, Q)],
        mut visit: impl FnMut(&[i64], Vec<Q>, InternalPoint) -> Result<(), CpsError>,
    ) -> Result<(), CpsError> {
        let d = self.physical_dim;
        let k = self.generators.len();
        if internal_box.len() != k - d {
            return Err(CpsError::Invalid("internal box has wrong dimension".into()));
        }
        if radius.sign() < 0 || internal_box.iter().any(|(lo, hi)| lo > hi) {
            return Ok(());
        }
        let lo: Vec<Q> = center.iter().map(|c| c - radius).chain(internal_box.iter().map(|b| b.0.clone())).collect();
        let hi: Vec<Q> = center.iter().map(|c| c + radius).chain(internal_box.iter().map(|b| b.1.clone())).collect();
        // range of each coefficient over the box, through M^{-1}
        let mut ranges = Vec::with_capacity(k);
        for row in &self.inverse {
            let (mut mn, mut mx) = (Q::zero(), Q::zero());
            for (i, a) in row.iter().enumerate() {
                let (x, y) = (a * &lo[i], a * &hi[i]);
                let (small, big) = if x <= y { (x, y) } else { (y, x) };
                mn = &mn + &small;
                mx = &mx + &big;
            }
            ranges.push((bigint_to_i64(mn.ceil())?, bigint_to_i64(mx.floor())?));
        }
        if ranges.iter().any(|(a, b)| a > b) {
            return Ok(());
        }
        let outer: u64 = ranges[..k - 1].iter().map(|(a, b)| (b - a + 1) as u64).try_fold(1u64, |acc, n| acc.checked_mul(n)).unwrap_or(u64::MAX);
        if outer > MAX_CANDIDATES {
            return Err(CpsError::ResourceCap(format!("{outer} lattice candidates exceed {MAX_CANDIDATES}")));
        }
        let last = k - 1;
        let mut n: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        loop {
            // innermost coefficient from the row constraints, exactly
            let mut lo_n = ranges[last].0;
            let mut hi_n = ranges[last].1;
            let mut feasible = true;
            for i in 0..k {
                let partial = (0..last).fold(Q::zero(), |acc, j| &acc + &(&self.matrix[i][j] * &q_int(n[j])));
                let a = &self.matrix[i][last];
                let l = &lo[i] - &partial;
                let h = &hi[i] - &partial;
                if a.is_zero() {
                    if l.sign() > 0 || h.sign() < 0 {
                        feasible = false;
                        break;
                    }
                    continue;
                }
                let (x, y) = (l.checked_div(a)?, h.checked_div(a)?);
                let (x, y) = if a.sign() > 0 { (x, y) } else { (y, x) };
                lo_n = lo_n.max(bigint_to_i64(x.ceil())?);
                hi_n = hi_n.min(bigint_to_i64(y.floor())?);
                if lo_n > hi_n {
                    feasible = false;
                    break;
                }
            }
            if feasible {
                for v in lo_n..=hi_n {
                    n[last] = v;
                    let gamma = self.physical_of_coefficients(&n);
                    if !within(&vsub(&gamma, center), radius) {
                        continue;
                    }
                    let star = self.star_of_coefficients(&n);
                    if star.real.iter().zip(internal_box).all(|(x, (a, b))| x >= a && x <= b) {
                        visit(&n, gamma, star)?;
                    }
                }
            }
            // advance the outer odometer
            let mut j = last;
            loop {
                if j == 0 {
                    return Ok(());
                }
                j -= 1;
                if n[j] < ranges[j].1 {
                    n[j] += 1;
                    for (jj, r) in ranges.iter().enumerate().take(last).skip(j + 1) {
                        n[jj] = r.0;
                    }
                    break;
                }
            }
        }
    }

    /// Hull of the Euclidean parts of all windows translated by `w`.
    fn window_box(&self, w: &InternalPoint, windows: &[&Window]) -> Option<Vec<(Q, Q)>> {
        let mut out: Option<Vec<(Q, Q)>> = None;
        for win in windows {
            if let Some(b) = win.euclid_bbox() {
                let b: Vec<(Q, Q)> = b.into_iter().zip(&w.real).map(|((l, h), s)| (&l + s, &h + s)).collect();
                match &mut out {
                    None => out = Some(b),
                    Some(o) => {
                        for (x, y) in o.iter_mut().zip(b) {
                            if y.0 < x.0 {
                                x.0 = y.0;
                            }
                            if y.1 > x.1 {
                                x.1 = y.1;
                            }
                        }
                    }
                }
            } else if !win.is_empty() {
                out.get_or_insert_with(Vec::new);
            }
        }
        out
    }

    /// `𝔓(W_i + w) - t` restricted to `B(0, R)`, per symbol.
    pub fn generate(&self, param: &SchemeParameter, radius: &Q, mode: &Membership) -> Result<MultiPattern, CpsError> {
        self.internal.check_point(&param.w)?;
        if param.t.len() != self.physical_dim {
            return Err(CpsError::Invalid("t has wrong dimension".into()));
        }
        if radius.sign() <= 0 {
            return Err(CpsError::Invalid("region radius must be positive".into()));
        }
        let all: Vec<&Window> = self.windows.iter().collect();
        let mut points = Vec::new();
        if let Some(bx) = self.window_box(&param.w, &all) {
            self.enumerate(&param.t, radius, &bx, |_, gamma, star| {
                let x = star.sub(&param.w, &self.internal);
                for (i, win) in self.windows.iter().enumerate() {
                    if win.contains(&x, mode)? {
                        points.push((vsub(&gamma, &param.t), i));
                    }
                }
                Ok(())
            })?;
        }
        Ok(MultiPattern::new(self.physical_dim, self.symbols.clone(), radius.clone(), points)?)
    }

    pub fn generate_at(&self, w: &InternalPoint, radius: &Q, mode: &Membership) -> Result<MultiPattern, CpsError> {
        let param = SchemeParameter {
            w: w.clone(),
            t: vec![Q::zero(); self.physical_dim],
        };
        self.generate(&param, radius, mode)
    }

    /// Decides whether some `γ*` lies on `∂W_i + w`.
    pub fn is_nonsingular(&self, w: &InternalPoint, bound: &Q) -> Result<Singularity, CpsError> {
        self.internal.check_point(w)?;
        if self.windows.iter().all(Window::has_empty_boundary) {
            return Ok(Singularity::Nonsingular { exact: true });
        }
        let hit = |gamma: Vec<Q>, star: InternalPoint| -> Result<Option<Singularity>, CpsError> {
            let x = star.sub(w, &self.internal);
            for (i, win) in self.windows.iter().enumerate() {
                if win.boundary_hit(&x)? {
                    return Ok(Some(Singularity::Singular {
                        gamma,
                        star,
                        symbol: self.symbols[i].clone(),
                    }));
                }
            }
            Ok(None)
        };
        let origin = vec![Q::zero(); self.physical_dim];
        if self.internal.euclid_dim() != 1 {
            let all: Vec<&Window> = self.windows.iter().collect();
            let Some(bx) = self.window_box(w, &all) else {
                return Ok(Singularity::Nonsingular { exact: true });
            };
            let mut found = None;
            self.enumerate(&origin, bound, &bx, |_, gamma, star| {
                if found.is_none() {
                    found = hit(gamma, star)?;
                }
                Ok(())
            })?;
            return Ok(found.unwrap_or(Singularity::Undecided { bound: bound.clone() }));
        }
        // one Euclidean axis: the boundary is the finite set of interval endpoints
        let mut endpoints: BTreeSet<Q> = BTreeSet::new();
        for win in &self.windows {
            for u in win.atoms().values() {
                for c in u.cells() {
                    endpoints.insert(c.0[0].lo.clone());
                    endpoints.insert(c.0[0].hi.clone());
                }
            }
        }
        let rows: Vec<Vec<Rational>> = vec![
            self.generators.iter().map(|g| g.internal.real[0].rational_part().clone()).collect(),
            self.generators.iter().map(|g| g.internal.real[0].surd_part().clone()).collect(),
        ];
        let mut undecided = false;
        let mut witnesses: Vec<Singularity> = Vec::new();
        for b in endpoints {
            let target = &b + &w.real[0];
            if target.field() != 1 && target.field() != self.field_m {
                continue;
            }
            let rhs = vec![target.rational_part().clone(), target.surd_part().clone()];
            match exact::solve_rational(&rows, &rhs) {
                None => {}
                Some(Ok(x)) => {
                    if x.iter().all(|v| v.is_integer()) {
                        let n: Vec<i64> = x.into_iter().map(|v| bigint_to_i64(v.to_integer())).collect::<Result<_, _>>()?;
                        if let Some(s) = hit(self.physical_of_coefficients(&n), self.star_of_coefficients(&n))? {
                            witnesses.push(s);
                        }
                    }
                }
                Some(Err(_)) => {
                    let mut found = None;
                    self.enumerate(&origin, bound, &[(target.clone(), target.clone())], |_, gamma, star| {
                        if found.is_none() {
                            found = hit(gamma, star)?;
                        }
                        Ok(())
                    })?;
                    match found {
                        Some(s) => witnesses.push(s),
                        None => undecided = true,
                    }
                }
            }
        }
        // smallest witness first, for reproducible reports
        witnesses.sort_by(|a, b| match (a, b) {
            (Singularity::Singular { gamma: g1, .. }, Singularity::Singular { gamma: g2, .. }) => {
                norm_sq(g1).cmp(&norm_sq(g2)).then(g1.cmp(g2))
            }
            _ => std::cmp::Ordering::Equal,
        });
        if let Some(s) = witnesses.into_iter().next() {
            return Ok(s);
        }
        Ok(if undecided {
            Singularity::Undecided { bound: bound.clone() }
        } else {
            Singularity::Nonsingular { exact: true }
        })
    }

    fn symbol_map(&self, pattern: &MultiPattern) -> Result<Vec<usize>, CpsError> {
        if pattern.dim() != self.physical_dim {
            return Err(CpsError::NotFromScheme(format!("pattern dimension {} vs scheme {}", pattern.dim(), self.physical_dim)));
        }
        pattern
            .symbols()
            .iter()
            .map(|s| {
                self.symbols
                    .iter()
                    .position(|t| t == s)
                    .ok_or_else(|| CpsError::NotFromScheme(format!("unknown symbol {s:?}")))
            })
            .collect()
    }

    /// Region of internal parameters `w` compatible with the pattern (taken
    /// with `t = 0`), as a finite union of cells.
    pub fn locate_window(&self, pattern: &MultiPattern, mode: LocateMode) -> Result<Window, CpsError> {
        let map = self.symbol_map(pattern)?;
        if pattern.is_empty() {
            return Err(CpsError::EmptyPattern);
        }
        let neg_closed: Vec<Window> = self.windows.iter().map(|w| w.closure().negate()).collect();
        let mut feasible: Option<Window> = None;
        let mut members: Vec<HashSet<Vec<Q>>> = vec![HashSet::new(); self.symbols.len()];
        for (gamma, s) in pattern.points() {
            let i = map[*s];
            members[i].insert(gamma.clone());
            let star = self.star(gamma).map_err(|e| CpsError::NotFromScheme(e.to_string()))?;
            let c = neg_closed[i].translate(&star)?;
            let next = match feasible {
                None => c,
                Some(f) => f.intersect(&c)?,
            };
            if next.is_empty() {
                return Err(CpsError::NotFromScheme("no parameter selects all points".into()));
            }
            feasible = Some(next);
        }
        let mut f = feasible.expect("nonempty pattern");
        if mode == LocateMode::Containment {
            return Ok(f);
        }
        let origin = vec![Q::zero(); self.physical_dim];
        for (i, win) in self.windows.iter().enumerate() {
            let neg_int = win.interior().negate();
            if neg_int.is_empty() {
                continue;
            }
            let Some(fb) = f.euclid_bbox().or_else(|| (!f.is_empty()).then(Vec::new)) else {
                break;
            };
            let wb = win.euclid_bbox().unwrap_or_default();
            let bx: Vec<(Q, Q)> = fb.iter().zip(&wb).map(|(a, b)| (&a.0 + &b.0, &a.1 + &b.1)).collect();
            let mut excluded = Vec::new();
            self.enumerate(&origin, pattern.region_radius(), &bx, |_, gamma, star| {
                if !members[i].contains(&gamma) {
                    excluded.push(star);
                }
                Ok(())
            })?;
            for star in excluded {
                f = f.difference(&neg_int.translate(&star)?)?;
                if f.is_empty() {
                    return Err(CpsError::NotFromScheme(format!(
                        "absent points force symbol {:?} out of every parameter",
                        self.symbols[i]
                    )));
                }
            }
        }
        Ok(f)
    }

    /// A model pattern `Δ` of this scheme with `Λ_i ⊆ Δ_i` on the pattern's region.
    pub fn embed(&self, pattern: &MultiPattern) -> Result<Embedding, CpsError> {
        let map = self.symbol_map(pattern)?;
        let (w, mode) = if pattern.is_empty() {
            (self.internal.zero(), None)
        } else {
            let (region, mode) = match self.locate_window(pattern, LocateMode::Exact) {
                Ok(f) => (f, LocateMode::Exact),
                Err(CpsError::NotFromScheme(_)) => (self.locate_window(pattern, LocateMode::Containment)?, LocateMode::Containment),
                Err(e) => return Err(e),
            };
            (region.representative().expect("nonempty region"), Some(mode))
        };
        let delta = self.generate_at(&w, pattern.region_radius(), &Membership::Closure)?;
        let contained = pattern.points().iter().all(|(c, s)| delta.contains(c, map[*s]));
        Ok(Embedding {
            w,
            mode,
            delta,
            contained,
        })
    }

    /// `φ_j(η) = Σ_c η_c s_{j,c} / N_c`, the compact phase of generator `j`.
    fn compact_phase(&self, eta: &[u64]) -> Vec<Rational> {
        let moduli = self.internal.compact_moduli();
        self.generators
            .iter()
            .map(|g| {
                g.internal
                    .residues
                    .iter()
                    .zip(eta)
                    .zip(&moduli)
                    .fold(Rational::from_integer(0.into()), |acc, ((&s, &e), &m)| {
                        acc + Rational::new(((s as u128 * e as u128) % m as u128).into(), m.into())
                    })
            })
            .collect()
    }

    /// All characters of `H × R^d` trivial on `Σ` whose `(β, κ)` has norm at most `r`.
    pub fn eigenvalues_within(&self, r: f64) -> Result<Vec<Eigenvalue>, CpsError> {
        let d = self.physical_dim;
        let k = self.generators.len();
        let etas = self.internal.compact_elements()?;
        // z = M^T (β, κ) + φ, so |z_j - φ_j| <= |column j of M| * r
        let col_norm: Vec<f64> = (0..k)
            .map(|j| self.matrix.iter().map(|row| row[j].to_f64().powi(2)).sum::<f64>().sqrt())
            .collect();
        let span: Vec<i64> = col_norm.iter().map(|c| (c * r).ceil() as i64 + 2).collect();
        let boxes: u64 = span.iter().map(|s| (2 * s + 1) as u64).product::<u64>().saturating_mul(etas.len() as u64);
        if boxes > MAX_CANDIDATES {
            return Err(CpsError::ResourceCap(format!("{boxes} dual lattice candidates")));
        }
        let mut out: Vec<Eigenvalue> = Vec::new();
        let mut seen: HashSet<Vec<Q>> = HashSet::new();
        for eta in &etas {
            let phase = self.compact_phase(eta);
            let ranges: Vec<Vec<u64>> = span.iter().map(|&s| (0..=(2 * s) as u64).collect()).collect();
            for offs in internal::product_of(&ranges) {
                let z: Vec<Q> = offs
                    .iter()
                    .zip(&span)
                    .zip(&phase)
                    .map(|((&o, &s), p)| Q::rational(Rational::from_integer((o as i64 - s).into()) - p))
                    .collect();
                // (β, κ) = M^{-T} z
                let x: Vec<Q> = (0..k)
                    .map(|i| (0..k).fold(Q::zero(), |acc, j| &acc + &(&self.inverse[j][i] * &z[j])))
                    .collect();
                let norm = x.iter().map(|v| v.to_f64().powi(2)).sum::<f64>().sqrt();
                if norm > r * (1.0 + 1e-12) {
                    continue;
                }
                let beta = x[..d].to_vec();
                if seen.insert(beta.clone()) {
                    out.push(Eigenvalue {
                        beta,
                        kappa: x[d..].to_vec(),
                        eta: eta.clone(),
                        norm,
                    });
                }
            }
        }
        out.sort_by(|a, b| a.norm.total_cmp(&b.norm).then_with(|| a.beta.cmp(&b.beta)));
        Ok(out)
    }

    /// The `count` characters of smallest `(β, κ)` norm; `β` are the
    /// topological eigenvalues of the model sets of this scheme.
    pub fn model_eigenvalues(&self, count: usize) -> Result<Vec<Eigenvalue>, CpsError> {
        let mut r = 1.0f64;
        loop {
            let all = self.eigenvalues_within(r)?;
            if all.len() >= count {
                // the count-th norm is inside the ball, so nothing smaller is missing
                return Ok(all.into_iter().take(count).collect());
            }
            r *= 2.0;
        }
    }

    pub fn redundancy(&self) -> Result<Vec<InternalPoint>, CpsError> {
        Ok(internal::redundancy_group(&self.windows)?)
    }

    /// The scheme over `H / R` with projected generators and windows.
    pub fn quotient(&self) -> Result<(CutProjectScheme, Quotient), CpsError> {
        let r = self.redundancy()?;
        let quot = internal::quotient_by_redundancy(&self.internal, &self.windows, &r)?;
        let generators = self
            .generators
            .iter()
            .map(|g| Generator {
                physical: g.physical.clone(),
                internal: quot.map.project(&g.internal),
            })
            .collect();
        let windows = self.symbols.iter().cloned().zip(quot.windows.iter().cloned()).collect();
        let mut s = CutProjectScheme::new(self.physical_dim, self.field_m, quot.group.clone(), generators, windows)?;
        s.declared_dense = self.declared_dense;
        s.preset_name = self.preset_name.as_ref().map(|n| format!("{n}/quotient"));
        Ok((s, quot))
    }

    /// Compares the eigenvalue groups of the scheme and of its redundancy quotient.
    pub fn eigenvalue_quotient_check(&self) -> Result<QuotientCheck, CpsError> {
        let r = self.redundancy()?;
        let moduli = self.internal.compact_moduli();
        let lcm = moduli.iter().fold(1u64, |a, &m| num_integer::lcm(a, m));
        // distinct restrictions of compact characters to R
        let mut restrictions: HashSet<Vec<u64>> = HashSet::new();
        for eta in self.internal.compact_elements()? {
            let v: Vec<u64> = r
                .iter()
                .map(|p| {
                    p.residues
                        .iter()
                        .zip(&eta)
                        .zip(&moduli)
                        .map(|((&x, &e), &m)| (x as u128 * e as u128 % m as u128) as u64 * (lcm / m))
                        .sum::<u64>()
                        % lcm
                })
                .collect();
            restrictions.insert(v);
        }
        let index = restrictions.len();
        let (quotient, quot) = self.quotient()?;
        let radius = 3.0;
        let mine = self.eigenvalues_within(radius)?;
        let trivial_on_r = |eta: &[u64]| {
            r.iter().all(|p| {
                p.residues
                    .iter()
                    .zip(eta)
                    .zip(&moduli)
                    .map(|((&x, &e), &m)| (x as u128 * e as u128 % m as u128) as u64 * (lcm / m))
                    .sum::<u64>()
                    % lcm
                    == 0
            })
        };
        let expected: BTreeSet<Vec<Q>> = mine.iter().filter(|e| trivial_on_r(&e.eta)).map(|e| e.beta.clone()).collect();
        let got: BTreeSet<Vec<Q>> = quotient.eigenvalues_within(radius)?.into_iter().map(|e| e.beta).collect();
        let _ = quot;
        Ok(QuotientCheck {
            redundancy_size: r.len(),
            redundancy: r.iter().map(|p| p.to_coords(&self.internal)).collect(),
            index,
            equal: index == r.len(),
            quotient_consistent: expected == got,
            compared_radius: radius,
            compared_count: got.len(),
        })
    }

    /// Windows are pairwise disjoint and cover the compact internal group
    /// (only meaningful without Euclidean axes).
    pub fn windows_partition_compact_group(&self) -> Result<bool, CpsError> {
        if self.internal.euclid_dim() != 0 {
            return Ok(false);
        }
        let mut union = Window::empty(&self.internal);
        for (i, a) in self.windows.iter().enumerate() {
            for b in &self.windows[i + 1..] {
                if !a.intersect(b)?.is_empty() {
                    return Ok(false);
                }
            }
            union = union.union(a)?;
        }
        Ok(union.set_eq(&Window::full_compact(&self.internal)?))
    }
}

/// Translates the support point nearest the origin to `0` and shrinks the
/// region so the result stays complete: `Λ - a` on `B(0, R - |a|)`.
pub fn anchor_at_nearest(pattern: &MultiPattern) -> Result<(MultiPattern, Vec<Q>), CpsError> {
    let Some(a) = pattern.nearest_to_origin() else {
        return Ok((pattern.clone(), vec![Q::zero(); pattern.dim()]));
    };
    let r = match crate::patterns::norm_exact(&a) {
        Some(n) => pattern.region_radius() - &n,
        None => {
            let f = norm_sq(&a).to_f64().sqrt();
            pattern.region_radius() - &Q::rational(rational_above(f))
        }
    };
    if r.sign() <= 0 {
        return Err(CpsError::Pattern(PatternError::Boundary {
            center: format!("{a:?}"),
            radius: pattern.region_radius().to_string(),
        }));
    }
    Ok((pattern.shifted(&a, r)?, a))
}

fn rational_above(x: f64) -> Rational {
    Rational::new((((x * 1024.0).ceil() as i64) + 1).into(), 1024.into())
}
