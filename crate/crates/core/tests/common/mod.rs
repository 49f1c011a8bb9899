#![allow(dead_code)]

use modelset::exact::QuadRational as Q;
use modelset::patterns::MultiPattern;

pub fn q(s: &str) -> Q {
    s.parse().unwrap()
}

pub fn phi() -> Q {
    q("1/2 + 1/2*sqrt(5)")
}

/// Fibonacci word by substitution a -> ab, b -> a, as symbol indices (a = 0).
pub fn fibonacci_word(min_len: usize) -> Vec<u8> {
    let mut w = vec![0u8];
    while w.len() < min_len {
        w = w.iter().flat_map(|&c| if c == 0 { vec![0, 1] } else { vec![0] }).collect();
    }
    w
}

/// The bi-infinite Fibonacci point set on `[-r, r]`: the right half reads the
/// fixed point of `a`, the left half reads an even iterate of `b` backwards,
/// tiles have length `φ` (a) and `1` (b).
pub fn fibonacci_points(r: i64) -> MultiPattern {
    let phi = phi();
    let need = 2 * r as usize + 4;
    let right = fibonacci_word(need);
    let mut left = vec![1u8];
    while left.len() < need {
        left = left.iter().flat_map(|&c| if c == 0 { vec![0, 1] } else { vec![0] }).collect();
        left = left.iter().flat_map(|&c| if c == 0 { vec![0, 1] } else { vec![0] }).collect();
    }
    let len = |c: u8| if c == 0 { phi.clone() } else { Q::one() };
    let radius = Q::int(r);
    let mut pts = Vec::new();
    let mut x = Q::zero();
    for &c in &right {
        if x > radius {
            break;
        }
        pts.push((vec![x.clone()], c as usize));
        x = &x + &len(c);
    }
    let mut x = Q::zero();
    for &c in left.iter().rev() {
        x = &x - &len(c);
        if x < -&radius {
            break;
        }
        pts.push((vec![x.clone()], c as usize));
    }
    MultiPattern::new(1, vec!["a".into(), "b".into()], radius, pts).unwrap()
}

/// Runs the command line in-process; returns (exit code, stdout, stderr).
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("modelset").chain(args.iter().copied()).collect();
    let code = modelset::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
