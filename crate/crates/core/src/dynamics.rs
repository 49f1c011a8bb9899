//! Finite-scale dynamical predicates on a master pattern: strong regional
//! proximality search and topological eigenvalue defects.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cps::{CpsError, CutProjectScheme, QuotientCheck, Singularity};
use crate::exact::{self, QuadRational, Rational};
use crate::internal::{InternalPoint, Membership};
use crate::patterns::{extract_patch, norm_f64, norm_sq, vadd, vsub, within, MultiPattern, Patch, PatchIndex, PatternError};

type Q = QuadRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Cps(#[from] CpsError),
}

/// Search bounds for [`srp_check`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrpCaps {
    /// Occurrences of each patch tried, in support order.
    pub max_occurrences: usize,
    /// Largest connector length `|t|`.
    pub max_connector: Q,
    /// Total patch comparisons.
    pub max_checks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrpWitness {
    pub radius: Q,
    pub u: Vec<Q>,
    pub u_prime: Vec<Q>,
    pub t: Vec<Q>,
    pub patch_a: Patch,
    pub patch_b: Patch,
    /// Common patch of the master at `u + t` and `u' + t`.
    pub common: Patch,
}

impl SrpWitness {
    /// Re-checks the three patch equalities directly on the master.
    pub fn verify(&self, master: &MultiPattern) -> bool {
        let r = &self.radius;
        let at = |c: &[Q]| extract_patch(master, c, r).ok();
        at(&self.u).as_ref() == Some(&self.patch_a)
            && at(&self.u_prime).as_ref() == Some(&self.patch_b)
            && at(&vadd(&self.u, &self.t)).as_ref() == Some(&self.common)
            && at(&vadd(&self.u_prime, &self.t)).as_ref() == Some(&self.common)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SrpOutcome {
    Found(SrpWitness),
    /// Nothing within the exhausted bounds; says nothing beyond them.
    NotFound {
        radius: Q,
        occurrences_a: usize,
        occurrences_b: usize,
        connector_bound: Q,
        checks: u64,
        check_cap_hit: bool,
    },
}

fn restrict_patch(p: &Patch, r: &Q) -> Patch {
    Patch {
        radius: r.clone(),
        points: p.points.iter().filter(|(c, _)| within(c, r)).cloned().collect(),
    }
}

/// Searches occurrences `u`, `u'` of the two patches in the master and a
/// connector `t` with equal `R`-patches at `u + t` and `u' + t`.
///
/// Both patches must contain the origin, so occurrences are support points.
/// Connectors are differences of master points, tried by increasing length.
pub fn srp_check(master: &MultiPattern, pa: &Patch, pb: &Patch, r: &Q, caps: &SrpCaps) -> Result<SrpOutcome, DynamicsError> {
    if pa.radius != pb.radius {
        return Err(DynamicsError::InvalidInput("patches have different radii".into()));
    }
    if r.sign() <= 0 || *r > pa.radius {
        return Err(DynamicsError::InvalidInput(format!("scale {r} must lie in (0, {}]", pa.radius)));
    }
    let pa = restrict_patch(pa, r);
    let pb = restrict_patch(pb, r);
    let origin = vec![Q::zero(); master.dim()];
    for (name, p) in [("A", &pa), ("B", &pb)] {
        if !p.points.iter().any(|(c, _)| *c == origin) {
            return Err(DynamicsError::InvalidInput(format!("patch {name} is not centered at one of its points")));
        }
    }
    let index = PatchIndex::new(master);
    let safe = index.safe_centers(r, &Q::one());
    let (ids, _) = index.classes(&safe, r);
    let class_of: HashMap<usize, usize> = safe.iter().copied().zip(ids.iter().copied()).collect();
    let occurrences = |p: &Patch, name: &str| -> Result<Vec<usize>, DynamicsError> {
        let mut rep: HashMap<usize, bool> = HashMap::new();
        let mut out = Vec::new();
        for (&i, &k) in safe.iter().zip(&ids) {
            let hit = *rep.entry(k).or_insert_with(|| index.patch(i, r) == *p);
            if hit {
                out.push(i);
            }
        }
        if out.is_empty() {
            return Err(DynamicsError::InvalidInput(format!("patch {name} does not occur in the master at scale {r}")));
        }
        Ok(out)
    };
    let mut occ_a = occurrences(&pa, "A")?;
    let mut occ_b = occurrences(&pb, "B")?;
    occ_a.truncate(caps.max_occurrences);
    occ_b.truncate(caps.max_occurrences);
    let support = index.support();
    let mut checks = 0u64;
    for &ia in &occ_a {
        let u = &support[ia];
        let mut connectors: Vec<(Q, usize)> = safe
            .iter()
            .map(|&c| (norm_sq(&vsub(&support[c], u)), c))
            .filter(|(n, _)| *n <= &caps.max_connector * &caps.max_connector)
            .collect();
        connectors.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| support[a.1].cmp(&support[b.1])));
        for &ib in &occ_b {
            let delta = vsub(&support[ib], u);
            for (_, c) in &connectors {
                if checks >= caps.max_checks {
                    return Ok(not_found(r, &occ_a, &occ_b, caps, checks, true));
                }
                checks += 1;
                let Some(j) = index.position(&vadd(&support[*c], &delta)) else {
                    continue;
                };
                let (Some(k1), Some(k2)) = (class_of.get(c), class_of.get(&j)) else {
                    continue;
                };
                if k1 == k2 {
                    let w = SrpWitness {
                        radius: r.clone(),
                        u: u.clone(),
                        u_prime: support[ib].clone(),
                        t: vsub(&support[*c], u),
                        patch_a: pa.clone(),
                        patch_b: pb.clone(),
                        common: index.patch(*c, r),
                    };
                    if !w.verify(master) {
                        return Err(DynamicsError::InvalidInput("witness failed re-verification".into()));
                    }
                    return Ok(SrpOutcome::Found(w));
                }
            }
        }
    }
    Ok(not_found(r, &occ_a, &occ_b, caps, checks, false))
}

fn not_found(r: &Q, a: &[usize], b: &[usize], caps: &SrpCaps, checks: u64, hit: bool) -> SrpOutcome {
    SrpOutcome::NotFound {
        radius: r.clone(),
        occurrences_a: a.len(),
        occurrences_b: b.len(),
        connector_bound: caps.max_connector.clone(),
        checks,
        check_cap_hit: hit,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Final defect below this passes.
    pub pass: f64,
    /// Defects above this over the last `sustained` radii fail.
    pub fail: f64,
    pub sustained: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectPoint {
    pub rho: Q,
    pub defect: f64,
    /// Support points whose `rho`-ball fits in the master region.
    pub centers: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub beta: Vec<Q>,
    pub curve: Vec<DefectPoint>,
    pub verdict: Verdict,
    /// Bound on the float error of each phase.
    pub phase_error: f64,
    pub thresholds: Thresholds,
}

/// Phase `β·γ mod 1`: exact when the scalars share a field, float otherwise.
fn phase(beta: &[Q], gamma: &[Q]) -> (f64, f64) {
    let mut acc = Q::zero();
    for (b, g) in beta.iter().zip(gamma) {
        match b.checked_mul(g).and_then(|x| acc.checked_add(&x)) {
            Ok(v) => acc = v,
            Err(_) => {
                let x: f64 = beta.iter().zip(gamma).map(|(b, g)| b.to_f64() * g.to_f64()).sum();
                let err = norm_f64(beta) * norm_f64(gamma) * 4.0 * f64::EPSILON;
                return (x.rem_euclid(1.0), err);
            }
        }
    }
    let frac = &acc - &Q::big_int(acc.floor());
    (frac.to_f64(), 2.0 * f64::EPSILON)
}

/// Largest circular distance between two phases in `[0, 1)`.
fn max_circular_spread(phases: &mut [f64]) -> f64 {
    if phases.len() < 2 {
        return 0.0;
    }
    phases.sort_by(f64::total_cmp);
    let mut best: f64 = 0.0;
    for &p in phases.iter() {
        let target = (p + 0.5).rem_euclid(1.0);
        let i = phases.partition_point(|&x| x < target);
        for j in [i.wrapping_sub(1), i, 0, phases.len() - 1] {
            if let Some(&x) = phases.get(j) {
                let d = (x - p).rem_euclid(1.0);
                best = best.max(d.min(1.0 - d));
            }
        }
    }
    best
}

pub(crate) fn defect_on_centers(index: &PatchIndex, centers: &[usize], beta: &[Q], rho: &Q) -> (f64, usize, f64) {
    let (ids, count) = index.classes(centers, rho);
    let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); count];
    let mut err: f64 = 0.0;
    for (&c, &k) in centers.iter().zip(&ids) {
        let (p, e) = phase(beta, &index.support()[c]);
        err = err.max(e);
        per_class[k].push(p);
    }
    let spread = per_class.iter_mut().map(|v| max_circular_spread(v)).fold(0.0, f64::max);
    ((2.0 * (std::f64::consts::PI * spread).sin()).clamp(0.0, 2.0), count, err)
}

/// `max |exp(2πi β·(γ - γ')) - 1|` over support pairs with identical
/// `ρ`-patches, for each `ρ` in increasing order.
pub fn eigenvalue_defect(master: &MultiPattern, beta: &[Q], rhos: &[Q], thresholds: &Thresholds) -> Result<EigenReport, DynamicsError> {
    if beta.len() != master.dim() {
        return Err(DynamicsError::InvalidInput("β has wrong dimension".into()));
    }
    if rhos.windows(2).any(|w| w[0] >= w[1]) || rhos.iter().any(|r| r.sign() <= 0) {
        return Err(DynamicsError::InvalidInput("radii must be positive and strictly increasing".into()));
    }
    let index = PatchIndex::new(master);
    let mut curve = Vec::with_capacity(rhos.len());
    let mut phase_error: f64 = 0.0;
    for rho in rhos {
        let centers = index.safe_centers(rho, &Q::one());
        let (defect, classes, err) = defect_on_centers(&index, &centers, beta, rho);
        phase_error = phase_error.max(err);
        curve.push(DefectPoint {
            rho: rho.clone(),
            defect,
            centers: centers.len(),
            classes,
        });
    }
    let verdict = judge(&curve, thresholds, phase_error);
    Ok(EigenReport {
        beta: beta.to_vec(),
        curve,
        verdict,
        phase_error,
        thresholds: *thresholds,
    })
}

fn judge(curve: &[DefectPoint], th: &Thresholds, err: f64) -> Verdict {
    let slack = 8.0 * std::f64::consts::PI * err + 1e-12;
    let Some(last) = curve.last() else {
        return Verdict::Inconclusive;
    };
    let monotone = curve.windows(2).all(|w| w[1].defect <= w[0].defect + slack);
    if monotone && last.defect < th.pass {
        return Verdict::Pass;
    }
    let tail = &curve[curve.len().saturating_sub(th.sustained)..];
    if tail.len() == th.sustained && tail.iter().all(|p| p.defect > th.fail) {
        return Verdict::Fail;
    }
    Verdict::Inconclusive
}

/// Exact test for `β` being a topological eigenvalue of the scheme's model
/// sets. `None` when the integer system is underdetermined.
pub fn is_model_eigenvalue(scheme: &CutProjectScheme, beta: &[Q]) -> Result<Option<bool>, DynamicsError> {
    let d = scheme.physical_dim();
    let k = scheme.generators().len();
    // β·v_j + κ·s_j + φ_j(η) = z_j; eliminate κ through the physical rows of M^{-T}
    let inv = exact::invert_matrix(scheme.matrix()).expect("validated scheme");
    for eta in scheme.internal().compact_elements().map_err(CpsError::from)? {
        let phase: Vec<Rational> = compact_phase(scheme, &eta);
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (i, b) in beta.iter().enumerate().take(d) {
            // β_i = Σ_j inv[j][i] (z_j - φ_j)
            let coeffs: Vec<&Q> = (0..k).map(|j| &inv[j][i]).collect();
            let shift = coeffs.iter().zip(&phase).fold(Q::zero(), |acc, (c, p)| &acc + &c.scale(p));
            let target = b + &shift;
            if target.field() != 1 && target.field() != scheme.field_m() {
                return Ok(Some(false));
            }
            rows.push(coeffs.iter().map(|c| c.rational_part().clone()).collect::<Vec<_>>());
            rhs.push(target.rational_part().clone());
            rows.push(coeffs.iter().map(|c| c.surd_part().clone()).collect::<Vec<_>>());
            rhs.push(target.surd_part().clone());
        }
        match exact::solve_rational(&rows, &rhs) {
            None => {}
            Some(Ok(z)) => {
                if z.iter().all(|v| v.is_integer()) {
                    return Ok(Some(true));
                }
            }
            Some(Err(_)) => return Ok(None),
        }
    }
    Ok(Some(false))
}

fn compact_phase(scheme: &CutProjectScheme, eta: &[u64]) -> Vec<Rational> {
    let moduli = scheme.internal().compact_moduli();
    scheme
        .generators()
        .iter()
        .map(|g| {
            g.internal.residues.iter().zip(eta).zip(&moduli).fold(Rational::from_integer(0.into()), |acc, ((&s, &e), &m)| {
                acc + Rational::new((((s as u128 * e as u128) % m as u128) as u64).into(), m.into())
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaVerdict {
    pub beta: Vec<Q>,
    pub verdict: Verdict,
    pub final_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    pub count: usize,
    pub samples: usize,
    pub master_radius: Q,
    pub rhos: Vec<Q>,
    pub thresholds: Thresholds,
    pub seed: u64,
    pub nonsingular_bound: Q,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub parameter: Vec<crate::internal::Coord>,
    pub predicted: Vec<BetaVerdict>,
    pub all_predicted_pass: bool,
    pub sampled: Vec<BetaVerdict>,
    pub all_sampled_fail: bool,
    pub quotient: QuotientCheck,
    pub index_relation_holds: bool,
    pub config: ConsistencyConfig,
}

/// A parameter certified non-singular, drawn from small rationals.
pub fn generic_parameter(scheme: &CutProjectScheme, rng: &mut impl Rng, bound: &Q) -> Result<InternalPoint, DynamicsError> {
    let e = scheme.internal().euclid_dim();
    let residues = vec![0; scheme.internal().compact_moduli().len()];
    for _ in 0..256 {
        let real: Vec<Q> = (0..e)
            .map(|_| {
                let den = rng.gen_range(3..=97i64);
                Q::frac(rng.gen_range(-den..=den), den)
            })
            .collect();
        let w = InternalPoint::new(real, residues.clone());
        if let Singularity::Nonsingular { .. } = scheme.is_nonsingular(&w, bound)? {
            return Ok(w);
        }
    }
    Err(DynamicsError::InvalidInput("no certified non-singular parameter among 256 draws".into()))
}

/// Predicted eigenvalues must pass the defect test on a generated master,
/// sampled non-eigenvalues must fail, and the redundancy index must match.
pub fn eigen_consistency(scheme: &CutProjectScheme, cfg: &ConsistencyConfig) -> Result<ConsistencyReport, DynamicsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w = generic_parameter(scheme, &mut rng, &cfg.nonsingular_bound)?;
    let master = scheme.generate_at(&w, &cfg.master_radius, &Membership::Declared)?;
    let d = scheme.physical_dim();
    let run = |beta: Vec<Q>| -> Result<BetaVerdict, DynamicsError> {
        let rep = eigenvalue_defect(&master, &beta, &cfg.rhos, &cfg.thresholds)?;
        Ok(BetaVerdict {
            final_defect: rep.curve.last().map_or(0.0, |p| p.defect),
            verdict: rep.verdict,
            beta,
        })
    };
    let predicted = scheme
        .model_eigenvalues(cfg.count)?
        .into_iter()
        .map(|e| run(e.beta))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sampled = Vec::new();
    let mut attempts = 0;
    while sampled.len() < cfg.samples && attempts < 1000 {
        attempts += 1;
        let beta: Vec<Q> = (0..d)
            .map(|_| {
                let den = rng.gen_range(3..=29i64);
                Q::frac(rng.gen_range(1..den), den)
            })
            .collect();
        if is_model_eigenvalue(scheme, &beta)? == Some(false) {
            sampled.push(run(beta)?);
        }
    }
    let quotient = scheme.eigenvalue_quotient_check()?;
    Ok(ConsistencyReport {
        parameter: w.to_coords(scheme.internal()),
        all_predicted_pass: predicted.iter().all(|b| b.verdict == Verdict::Pass),
        all_sampled_fail: sampled.iter().all(|b| b.verdict == Verdict::Fail),
        predicted,
        sampled,
        index_relation_holds: quotient.equal && quotient.quotient_consistent,
        quotient,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cps::LocateMode;
    use crate::patterns::tests::{fibonacci_oracle, integers, q};
    use crate::presets;
    use proptest::prelude::*;

    fn th() -> Thresholds {
        Thresholds {
            pass: 1e-2,
            fail: 0.3,
            sustained: 3,
        }
    }

    fn caps() -> SrpCaps {
        SrpCaps {
            max_occurrences: 12,
            max_connector: Q::int(200),
            max_checks: 2_000_000,
        }
    }

    fn rhos(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| Q::int(x)).collect()
    }

    /// Brute force over all pairs, straight from the definition.
    fn brute_defect(master: &MultiPattern, beta: f64, rho: &Q) -> f64 {
        let index = PatchIndex::new(master);
        let centers = index.safe_centers(rho, &Q::one());
        let patches: Vec<Patch> = centers.iter().map(|&c| index.patch(c, rho)).collect();
        let mut best: f64 = 0.0;
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                if patches[i] == patches[j] {
                    let x = beta * (index.support()[centers[i]][0].to_f64() - index.support()[centers[j]][0].to_f64());
                    let a = 2.0 * std::f64::consts::PI * x;
                    best = best.max(((a.cos() - 1.0).powi(2) + a.sin().powi(2)).sqrt());
                }
            }
        }
        best
    }

    #[test]
    fn defect_trivial_cases() {
        let z = integers(60);
        for beta in ["0", "1", "-3"] {
            let r = eigenvalue_defect(&z, &[q(beta)], &rhos(&[2, 5, 10]), &th()).unwrap();
            assert!(r.curve.iter().all(|p| p.defect == 0.0));
            assert_eq!(r.verdict, Verdict::Pass);
        }
        let fib = fibonacci_oracle(200);
        let r = eigenvalue_defect(&fib, &[Q::zero()], &rhos(&[5, 10]), &th()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn defect_matches_pairwise_brute_force() {
        let fib = fibonacci_oracle(120);
        for beta in ["1/3", "2/7", "1/2 + 1/10*sqrt(5)"] {
            let b = q(beta);
            for rho in [2, 6, 11] {
                let r = eigenvalue_defect(&fib, std::slice::from_ref(&b), &rhos(&[rho]), &th()).unwrap();
                let brute = brute_defect(&fib, b.to_f64(), &Q::int(rho));
                assert!((r.curve[0].defect - brute).abs() < 1e-9, "{beta} {rho}: {} vs {brute}", r.curve[0].defect);
            }
        }
    }

    #[test]
    fn non_eigenvalue_fails_on_fibonacci() {
        let fib = fibonacci_oracle(1000);
        let r = eigenvalue_defect(&fib, &[Q::frac(1, 3)], &rhos(&[5, 10, 20, 30]), &th()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.curve.iter().all(|p| p.defect > 0.5));
    }

    #[test]
    fn dual_lattice_defect_decreases() {
        let fib = fibonacci_oracle(1000);
        let beta = (&Q::one() + &q("1/2 + 1/2*sqrt(5)")).checked_div(&q("sqrt(5)")).unwrap();
        let r = eigenvalue_defect(&fib, &[beta], &rhos(&[5, 10, 20, 30, 60, 100]), &th()).unwrap();
        assert!(r.curve.windows(2).all(|w| w[1].defect <= w[0].defect + 1e-12));
        assert!(r.curve.last().unwrap().defect < 0.05);
    }

    #[test]
    fn model_eigenvalue_membership() {
        let fib = presets::fibonacci();
        for e in fib.model_eigenvalues(6).unwrap() {
            assert_eq!(is_model_eigenvalue(&fib, &e.beta).unwrap(), Some(true));
        }
        assert_eq!(is_model_eigenvalue(&fib, &[Q::frac(1, 3)]).unwrap(), Some(false));
        let pd = presets::period_doubling();
        assert_eq!(is_model_eigenvalue(&pd, &[Q::frac(5, 256)]).unwrap(), Some(true));
        assert_eq!(is_model_eigenvalue(&pd, &[Q::frac(1, 512)]).unwrap(), Some(false));
        let z = presets::integer_lattice();
        assert_eq!(is_model_eigenvalue(&z, &[Q::int(4)]).unwrap(), Some(true));
    }

    #[test]
    fn circular_spread() {
        assert_eq!(max_circular_spread(&mut [0.1]), 0.0);
        assert!((max_circular_spread(&mut [0.05, 0.95]) - 0.1).abs() < 1e-12);
        assert!((max_circular_spread(&mut [0.0, 0.5, 0.25]) - 0.5).abs() < 1e-12);
    }

    fn patch_at_origin(p: &MultiPattern, r: i64) -> Patch {
        extract_patch(p, &[Q::zero()], &Q::int(r)).unwrap()
    }

    #[test]
    fn srp_reflexive() {
        let fib = fibonacci_oracle(300);
        let p = patch_at_origin(&fib, 10);
        match srp_check(&fib, &p, &p, &Q::int(10), &caps()).unwrap() {
            SrpOutcome::Found(w) => {
                assert_eq!(w.u, w.u_prime);
                assert_eq!(w.t, vec![Q::zero()]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn srp_singular_pair() {
        let s = presets::fibonacci();
        let w = InternalPoint::real(Q::zero());
        assert!(matches!(s.is_nonsingular(&w, &Q::int(10)).unwrap(), Singularity::Singular { .. }));
        let master = s.generate_at(&InternalPoint::real(Q::frac(1, 3)), &Q::int(500), &Membership::Declared).unwrap();
        let left = s.generate_at(&w, &Q::int(25), &Membership::Limit(vec![-1])).unwrap();
        let right = s.generate_at(&w, &Q::int(25), &Membership::Limit(vec![1])).unwrap();
        assert_ne!(left, right);
        for r in [5, 10, 20] {
            let pa = patch_at_origin(&left, r);
            let pb = patch_at_origin(&right, r);
            let found = srp_check(&master, &pa, &pb, &Q::int(r), &caps()).unwrap();
            let SrpOutcome::Found(wit) = found else { panic!("R = {r}: {found:?}") };
            assert!(wit.verify(&master));
            // symmetric: the swapped witness also holds
            let swapped = SrpWitness {
                u: wit.u_prime.clone(),
                u_prime: wit.u.clone(),
                patch_a: wit.patch_b.clone(),
                patch_b: wit.patch_a.clone(),
                ..wit.clone()
            };
            assert!(swapped.verify(&master));
            assert!(matches!(srp_check(&master, &pb, &pa, &Q::int(r), &caps()).unwrap(), SrpOutcome::Found(_)));
        }
    }

    #[test]
    fn srp_separated_patches_not_found() {
        let s = presets::fibonacci();
        let master = s.generate_at(&InternalPoint::real(Q::frac(1, 3)), &Q::int(500), &Membership::Declared).unwrap();
        let r = Q::int(10);
        let lang = crate::patterns::language(&master, &r);
        let region = |p: &Patch| s.locate_window(&p.to_pattern(1, master.symbols()).unwrap(), LocateMode::Exact).unwrap();
        let regions: Vec<_> = lang.entries.iter().map(|e| region(&e.patch)).collect();
        let widest = regions.iter().map(|w| w.diameter()).fold(0.0, f64::max);
        // the pair of patches whose feasible regions are farthest apart
        let lo = |w: &crate::internal::Window| w.euclid_bbox().unwrap()[0].0.to_f64();
        let hi = |w: &crate::internal::Window| w.euclid_bbox().unwrap()[0].1.to_f64();
        let a = (0..regions.len()).min_by(|&i, &j| hi(&regions[i]).total_cmp(&hi(&regions[j]))).unwrap();
        let b = (0..regions.len()).max_by(|&i, &j| lo(&regions[i]).total_cmp(&lo(&regions[j]))).unwrap();
        let gap = lo(&regions[b]) - hi(&regions[a]);
        assert!(gap > widest, "gap {gap} vs widest {widest}");
        let out = srp_check(&master, &lang.entries[a].patch, &lang.entries[b].patch, &r, &caps()).unwrap();
        assert!(matches!(out, SrpOutcome::NotFound { check_cap_hit: false, .. }), "{out:?}");
    }

    #[test]
    fn srp_rejects_foreign_patch() {
        let fib = fibonacci_oracle(100);
        let z = integers(20);
        let p = patch_at_origin(&z, 5);
        let p = Patch {
            points: p.points.into_iter().map(|(c, _)| (c, 0)).collect(),
            ..p
        };
        assert!(matches!(srp_check(&fib, &p, &p, &Q::int(5), &caps()), Err(DynamicsError::InvalidInput(_))));
    }

    #[test]
    fn consistency_on_lattice_and_z2() {
        let cfg = ConsistencyConfig {
            count: 5,
            samples: 3,
            master_radius: Q::int(200),
            rhos: rhos(&[2, 5, 10]),
            thresholds: th(),
            seed: 7,
            nonsingular_bound: Q::int(1000),
        };
        let z = eigen_consistency(&presets::integer_lattice(), &cfg).unwrap();
        assert!(z.all_predicted_pass && z.all_sampled_fail && z.index_relation_holds);
        let r2 = eigen_consistency(&presets::z2_redundant(), &ConsistencyConfig { count: 1, ..cfg.clone() }).unwrap();
        assert_eq!(r2.quotient.index, 2);
        assert!(r2.index_relation_holds);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn defect_translation_invariant(sn in -40i64..40, bn in 1i64..20) {
            let fib = fibonacci_oracle(400);
            let s = vec![&Q::int(sn) + &q(&format!("{}/2 + 1/2*sqrt(5)", sn % 3))];
            let moved = fib.shifted(&s, Q::int(300)).unwrap();
            let (i1, i2) = (PatchIndex::new(&fib), PatchIndex::new(&moved));
            let c1: Vec<usize> = (0..i1.support().len()).filter(|&i| within(&i1.support()[i], &Q::int(100))).collect();
            let c2: Vec<usize> = c1.iter().map(|&i| i2.position(&vsub(&i1.support()[i], &s)).unwrap()).collect();
            let beta = [Q::frac(bn, 23)];
            for rho in [3, 9, 20] {
                let a = defect_on_centers(&i1, &c1, &beta, &Q::int(rho)).0;
                let b = defect_on_centers(&i2, &c2, &beta, &Q::int(rho)).0;
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn defect_non_increasing(bn in -50i64..50, bd in 1i64..40) {
            let fib = fibonacci_oracle(300);
            let r = eigenvalue_defect(&fib, &[Q::frac(bn, bd)], &rhos(&[1, 3, 6, 12, 24]), &th()).unwrap();
            prop_assert!(r.curve.windows(2).all(|w| w[1].defect <= w[0].defect + 1e-12));
        }
    }
}
