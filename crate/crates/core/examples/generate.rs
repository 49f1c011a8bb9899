//! Generate a Fibonacci model set from the built-in preset and compare the
//! interior and closure selections at a generic and a singular parameter.

use modelset::cps::Singularity;
use modelset::exact::QuadRational as Q;
use modelset::internal::{InternalPoint, Membership};
use modelset::presets;

fn main() {
    let scheme = presets::fibonacci();
    let radius = Q::int(12);

    let generic = InternalPoint::real(Q::frac(1, 3));
    let p = scheme.generate_at(&generic, &radius, &Membership::Declared).unwrap();
    println!("{} points on [-12, 12] at w = 1/3:", p.len());
    for (c, sym) in p.points() {
        println!("  {:>8.4}  {}  ({})", c[0].to_f64(), p.symbols()[*sym], c[0]);
    }

    let zero = InternalPoint::real(Q::zero());
    match scheme.is_nonsingular(&zero, &Q::int(100)).unwrap() {
        Singularity::Singular { gamma, symbol, .. } => {
            println!("w = 0 is singular: {} sits on a boundary of window {symbol}", gamma[0]);
        }
        other => println!("w = 0: {other:?}"),
    }
    let interior = scheme.generate_at(&zero, &radius, &Membership::Interior).unwrap();
    let closure = scheme.generate_at(&zero, &radius, &Membership::Closure).unwrap();
    println!("interior selects {} points, closure selects {}", interior.len(), closure.len());
    for sign in [-1, 1] {
        let limit = scheme.generate_at(&zero, &radius, &Membership::Limit(vec![sign])).unwrap();
        println!("limit from side {sign:+}: {} points", limit.len());
    }
}
