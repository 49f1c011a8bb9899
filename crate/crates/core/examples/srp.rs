//! Strong regional proximality: the two limit patterns at a singular
//! parameter of the Fibonacci scheme are joined by a common patch of a
//! generic master pattern.

use modelset::dynamics::{srp_check, SrpOutcome};
use modelset::exact::QuadRational as Q;
use modelset::internal::{InternalPoint, Membership};
use modelset::patterns::extract_patch;
use modelset::{defaults, presets};

fn main() {
    let scheme = presets::fibonacci();
    let zero = InternalPoint::real(Q::zero());
    let left = scheme.generate_at(&zero, &Q::int(25), &Membership::Limit(vec![-1])).unwrap();
    let right = scheme.generate_at(&zero, &Q::int(25), &Membership::Limit(vec![1])).unwrap();
    let master = scheme
        .generate_at(&InternalPoint::real(Q::frac(1, 3)), &Q::int(500), &Membership::Declared)
        .unwrap();
    for r in [5, 10, 20] {
        let r = Q::int(r);
        let pa = extract_patch(&left, &[Q::zero()], &r).unwrap();
        let pb = extract_patch(&right, &[Q::zero()], &r).unwrap();
        match srp_check(&master, &pa, &pb, &r, &defaults::srp_caps()).unwrap() {
            SrpOutcome::Found(w) => {
                println!("R = {r}: u = {}, u' = {}, t = {}, common patch of {} points", w.u[0], w.u_prime[0], w.t[0], w.common.points.len());
            }
            SrpOutcome::NotFound { checks, .. } => println!("R = {r}: no witness after {checks} checks"),
        }
    }
}
