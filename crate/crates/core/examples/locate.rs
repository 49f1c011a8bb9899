//! Recover the window parameter of a finite pattern, then embed a pattern
//! generated from smaller windows into the full Fibonacci model set.

use modelset::cps::{CutProjectScheme, LocateMode};
use modelset::exact::QuadRational as Q;
use modelset::internal::{InternalPoint, Interval, Membership, Window};
use modelset::presets;

fn main() {
    let scheme = presets::fibonacci();
    let w = InternalPoint::real(Q::frac(3, 11));
    for r in [5, 10, 20, 40] {
        let p = scheme.generate_at(&w, &Q::int(r), &Membership::Declared).unwrap();
        let region = scheme.locate_window(&p, LocateMode::Exact).unwrap();
        let inside = region.contains(&w, &Membership::Closure).unwrap();
        println!("R = {r:>2}: feasible diameter {:.6}, contains w: {inside}", region.diameter());
    }

    let g = scheme.internal().clone();
    let small = vec![
        ("a".to_string(), Window::intervals(&g, vec![Interval::closed(Q::frac(-1, 2), Q::frac(1, 2))]).unwrap()),
        ("b".to_string(), Window::empty(&g)),
    ];
    let sub = CutProjectScheme::new(1, 5, g, scheme.generators().to_vec(), small).unwrap();
    let p = sub
        .generate_at(&InternalPoint::real(Q::frac(1, 9)), &Q::int(30), &Membership::Declared)
        .unwrap();
    let e = scheme.embed(&p).unwrap();
    println!(
        "sub-window pattern of {} points embeds in a pattern of {} points: {} (mode {:?})",
        p.len(),
        e.delta.len(),
        e.contained,
        e.mode
    );
}
