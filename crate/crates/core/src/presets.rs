//! Built-in schemes. Each one is also shipped as canonical JSON under `presets/`.

use crate::cps::{CutProjectScheme, Generator};
use crate::exact::QuadRational;
use crate::internal::{CompactPiece, Component, InternalGroup, InternalPoint, Interval, Window, WindowCell};

type Q = QuadRational;

pub const NAMES: [&str; 5] = ["fibonacci", "silver-mean", "period-doubling-toeplitz", "z2-redundant", "integer-lattice"];

fn q(s: &str) -> Q {
    s.parse().expect("preset literal")
}

fn gen(physical: &str, real: &[&str], residues: &[u64]) -> Generator {
    Generator {
        physical: vec![q(physical)],
        internal: InternalPoint::new(real.iter().map(|s| q(s)).collect(), residues.to_vec()),
    }
}

fn interval_window(g: &InternalGroup, lo: &str, hi: &str) -> Window {
    Window::intervals(g, vec![Interval::half_open(q(lo), q(hi))]).expect("preset window")
}

/// `a ↦ ab, b ↦ a` with tiles `φ` and `1`.
pub fn fibonacci() -> CutProjectScheme {
    let g = InternalGroup::euclidean(1);
    CutProjectScheme::new(
        1,
        5,
        g.clone(),
        vec![gen("1", &["1"], &[]), gen("1/2 + 1/2*sqrt(5)", &["1/2 - 1/2*sqrt(5)"], &[])],
        vec![
            ("a".into(), interval_window(&g, "-3/2 + 1/2*sqrt(5)", "-1/2 + 1/2*sqrt(5)")),
            ("b".into(), interval_window(&g, "-1", "-3/2 + 1/2*sqrt(5)")),
        ],
    )
    .expect("fibonacci preset")
    .with_name("fibonacci")
    .with_declared_dense(true)
}

/// `a ↦ aab, b ↦ a` with tiles `1 + √2` and `1`.
pub fn silver_mean() -> CutProjectScheme {
    let g = InternalGroup::euclidean(1);
    CutProjectScheme::new(
        1,
        2,
        g.clone(),
        vec![gen("1", &["1"], &[]), gen("1 + sqrt(2)", &["1 - sqrt(2)"], &[])],
        vec![
            ("a".into(), interval_window(&g, "-2 + sqrt(2)", "-1 + sqrt(2)")),
            ("b".into(), interval_window(&g, "-1", "-2 + sqrt(2)")),
        ],
    )
    .expect("silver-mean preset")
    .with_name("silver-mean")
    .with_declared_dense(true)
}

/// Depth of the 2-adic odometer truncation in [`period_doubling`].
pub const TOEPLITZ_DEPTH: u32 = 8;

/// Period doubling word on `Z`: `n` carries `a` iff the 2-adic valuation of
/// `n + 1` is even, with every valuation `>= 8` folded into `a`.
pub fn period_doubling() -> CutProjectScheme {
    let depth = TOEPLITZ_DEPTH;
    let g = InternalGroup::new(vec![Component::Odometer { prime: 2, depth }]).expect("odometer");
    let cells = |parity: u32| -> Vec<WindowCell> {
        let mut out: Vec<WindowCell> = (0..depth)
            .filter(|k| k % 2 == parity)
            .map(|k| WindowCell {
                intervals: vec![],
                compact: vec![CompactPiece::Cylinder {
                    residue: (1u64 << k) - 1,
                    depth: k + 1,
                }],
            })
            .collect();
        if parity == 0 {
            out.push(WindowCell {
                intervals: vec![],
                compact: vec![CompactPiece::Cylinder {
                    residue: (1u64 << depth) - 1,
                    depth,
                }],
            });
        }
        out
    };
    CutProjectScheme::new(
        1,
        2,
        g.clone(),
        vec![gen("1", &[], &[1])],
        vec![
            ("a".into(), Window::from_cells(&g, cells(0)).expect("toeplitz window")),
            ("b".into(), Window::from_cells(&g, cells(1)).expect("toeplitz window")),
        ],
    )
    .expect("period-doubling preset")
    .with_name("period-doubling-toeplitz")
    .with_declared_dense(true)
}

/// Fibonacci windows times the whole of `Z/2`: the `Z/2` factor is redundant.
pub fn z2_redundant() -> CutProjectScheme {
    let g = InternalGroup::new(vec![Component::Euclidean, Component::Cyclic { order: 2 }]).expect("group");
    let cell = |lo: &str, hi: &str| {
        Window::from_cells(
            &g,
            vec![WindowCell {
                intervals: vec![Interval::half_open(q(lo), q(hi))],
                compact: vec![CompactPiece::Subset(vec![0, 1])],
            }],
        )
        .expect("z2 window")
    };
    CutProjectScheme::new(
        1,
        5,
        g.clone(),
        vec![gen("1", &["1"], &[0]), gen("1/2 + 1/2*sqrt(5)", &["1/2 - 1/2*sqrt(5)"], &[1])],
        vec![
            ("a".into(), cell("-3/2 + 1/2*sqrt(5)", "-1/2 + 1/2*sqrt(5)")),
            ("b".into(), cell("-1", "-3/2 + 1/2*sqrt(5)")),
        ],
    )
    .expect("z2-redundant preset")
    .with_name("z2-redundant")
    .with_declared_dense(true)
}

/// `Z` itself, with trivial internal group.
pub fn integer_lattice() -> CutProjectScheme {
    let g = InternalGroup::trivial();
    CutProjectScheme::new(
        1,
        5,
        g.clone(),
        vec![gen("1", &[], &[])],
        vec![("x".into(), Window::full_compact(&g).expect("trivial window"))],
    )
    .expect("integer-lattice preset")
    .with_name("integer-lattice")
    .with_declared_dense(true)
}

pub fn build(name: &str) -> Option<CutProjectScheme> {
    Some(match name {
        "fibonacci" => fibonacci(),
        "silver-mean" => silver_mean(),
        "period-doubling-toeplitz" => period_doubling(),
        "z2-redundant" => z2_redundant(),
        "integer-lattice" => integer_lattice(),
        _ => return None,
    })
}

/// Shipped JSON text of a preset.
pub fn json(name: &str) -> Option<&'static str> {
    Some(match name {
        "fibonacci" => include_str!("../presets/fibonacci.json"),
        "silver-mean" => include_str!("../presets/silver-mean.json"),
        "period-doubling-toeplitz" => include_str!("../presets/period-doubling-toeplitz.json"),
        "z2-redundant" => include_str!("../presets/z2-redundant.json"),
        "integer-lattice" => include_str!("../presets/integer-lattice.json"),
        _ => return None,
    })
}

pub fn all() -> Vec<CutProjectScheme> {
    NAMES.iter().map(|n| build(n).expect("known preset")).collect()
}
