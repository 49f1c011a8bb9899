//! Check the Meyer property of a silver-mean pattern: uniform discreteness of
//! iterated difference sets and a finite set `F` with `Λ - Λ ⊂ Λ + F`.

use modelset::exact::QuadRational as Q;
use modelset::internal::{InternalPoint, Membership};
use modelset::patterns::{self, MeyerOutcome};
use modelset::presets;

fn main() {
    let scheme = presets::silver_mean();
    let p = scheme
        .generate_at(&InternalPoint::real(Q::frac(1, 7)), &Q::int(50), &Membership::Declared)
        .unwrap();
    println!("silver-mean pattern: {} points", p.len());
    println!("minimal gap: {:.6}", patterns::min_gap(&p).unwrap().approx);
    for depth in 1..=3 {
        let set = patterns::difference_set(&p, depth).unwrap();
        let gap = patterns::difference_min_gap(&set).map(|g| g.approx);
        println!("depth {depth}: {} differences within {:.1}, minimal gap {gap:?}", set.points.len(), set.radius);
    }
    match patterns::meyer_witness(&p, patterns::MEYER_F_CAP).unwrap() {
        MeyerOutcome::Found { f, checked_differences, .. } => {
            println!("witness F with {} elements, {checked_differences} differences checked", f.len());
        }
        MeyerOutcome::Failed { reason, .. } => println!("no witness: {reason}"),
    }
}
