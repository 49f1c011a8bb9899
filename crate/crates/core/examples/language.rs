//! Patch language and factor complexity of the Fibonacci model set.

use modelset::exact::QuadRational as Q;
use modelset::internal::{InternalPoint, Membership};
use modelset::patterns;
use modelset::presets;

fn main() {
    let scheme = presets::fibonacci();
    let p = scheme
        .generate_at(&InternalPoint::real(Q::frac(2, 5)), &Q::int(400), &Membership::Declared)
        .unwrap();
    for n in 1..=10 {
        println!("runs of {n:>2} consecutive points: {} classes", patterns::consecutive_complexity(&p, n));
    }
    for r in [2, 4, 8] {
        let lang = patterns::language(&p, &Q::int(r));
        let rep = patterns::repetitivity_bound(&p, &Q::int(r));
        println!("radius {r}: {} patches from {} centers, repetitivity bound {:.3}", lang.len(), lang.centers, rep.bound);
    }
}
