//! Every numeric default used by the command line, in one table.
//!
//! | name | value | used by |
//! |---|---|---|
//! | `GENERATE_RADIUS` | 30 | `generate` |
//! | `VERIFY_DEPTHS` | 1, 2, 3 | `verify` (difference-set depths) |
//! | `VERIFY_PATCH_RADIUS` | 5 | `verify` (language, repetitivity) |
//! | `MEYER_F_CAP` | 64 | `verify` |
//! | `LANGUAGE_RADIUS` | 5 | `language` |
//! | `LANGUAGE_CONSECUTIVE` | 20 | `language` |
//! | `NONSINGULAR_BOUND` | 10000 | `eigen` |
//! | `SRP_OCCURRENCES` | 12 | `srp` |
//! | `SRP_CONNECTOR` | 200 | `srp` |
//! | `SRP_CHECKS` | 2000000 | `srp` |
//! | `PASS_THRESHOLD` | 0.01 | `eigen` |
//! | `FAIL_THRESHOLD` | 0.3 | `eigen` |
//! | `FAIL_SUSTAINED` | 3 | `eigen` |
//! | `EIGEN_RHOS` | 5, 10, 15, 20, 25, 30 | `eigen` |
//! | `EIGEN_COUNT` | 10 | `eigen` |
//! | `EIGEN_SAMPLES` | 3 | `eigen` |
//! | `EIGEN_MASTER_RADIUS` | 1000 | `eigen` |
//! | `SEED` | 0 | all sampled checks |

use crate::dynamics::{SrpCaps, Thresholds};
use crate::exact::QuadRational;

pub const GENERATE_RADIUS: i64 = 30;
pub const VERIFY_DEPTHS: [usize; 3] = [1, 2, 3];
pub const VERIFY_PATCH_RADIUS: i64 = 5;
pub const MEYER_F_CAP: usize = crate::patterns::MEYER_F_CAP;
pub const LANGUAGE_RADIUS: i64 = 5;
pub const LANGUAGE_CONSECUTIVE: usize = 20;
pub const NONSINGULAR_BOUND: i64 = 10_000;
pub const SRP_OCCURRENCES: usize = 12;
pub const SRP_CONNECTOR: i64 = 200;
pub const SRP_CHECKS: u64 = 2_000_000;
pub const PASS_THRESHOLD: f64 = 1e-2;
pub const FAIL_THRESHOLD: f64 = 0.3;
pub const FAIL_SUSTAINED: usize = 3;
pub const EIGEN_RHOS: [i64; 6] = [5, 10, 15, 20, 25, 30];
pub const EIGEN_COUNT: usize = 10;
pub const EIGEN_SAMPLES: usize = 3;
pub const EIGEN_MASTER_RADIUS: i64 = 1000;
pub const SEED: u64 = 0;

pub fn thresholds() -> Thresholds {
    Thresholds {
        pass: PASS_THRESHOLD,
        fail: FAIL_THRESHOLD,
        sustained: FAIL_SUSTAINED,
    }
}

pub fn srp_caps() -> SrpCaps {
    SrpCaps {
        max_occurrences: SRP_OCCURRENCES,
        max_connector: QuadRational::int(SRP_CONNECTOR),
        max_checks: SRP_CHECKS,
    }
}

pub fn eigen_rhos() -> Vec<QuadRational> {
    EIGEN_RHOS.iter().map(|&r| QuadRational::int(r)).collect()
}

/// The table above as `(name, value)` rows.
pub fn table() -> Vec<(&'static str, String)> {
    let join = |v: Vec<String>| v.join(", ");
    vec![
        ("GENERATE_RADIUS", GENERATE_RADIUS.to_string()),
        ("VERIFY_DEPTHS", join(VERIFY_DEPTHS.iter().map(|x| x.to_string()).collect())),
        ("VERIFY_PATCH_RADIUS", VERIFY_PATCH_RADIUS.to_string()),
        ("MEYER_F_CAP", MEYER_F_CAP.to_string()),
        ("LANGUAGE_RADIUS", LANGUAGE_RADIUS.to_string()),
        ("LANGUAGE_CONSECUTIVE", LANGUAGE_CONSECUTIVE.to_string()),
        ("NONSINGULAR_BOUND", NONSINGULAR_BOUND.to_string()),
        ("SRP_OCCURRENCES", SRP_OCCURRENCES.to_string()),
        ("SRP_CONNECTOR", SRP_CONNECTOR.to_string()),
        ("SRP_CHECKS", SRP_CHECKS.to_string()),
        ("PASS_THRESHOLD", PASS_THRESHOLD.to_string()),
        ("FAIL_THRESHOLD", FAIL_THRESHOLD.to_string()),
        ("FAIL_SUSTAINED", FAIL_SUSTAINED.to_string()),
        ("EIGEN_RHOS", join(EIGEN_RHOS.iter().map(|x| x.to_string()).collect())),
        ("EIGEN_COUNT", EIGEN_COUNT.to_string()),
        ("EIGEN_SAMPLES", EIGEN_SAMPLES.to_string()),
        ("EIGEN_MASTER_RADIUS", EIGEN_MASTER_RADIUS.to_string()),
        ("SEED", SEED.to_string()),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn doc_table_matches_values() {
        let doc = include_str!("defaults.rs");
        for (name, value) in super::table() {
            let row = format!("//! | `{name}` | {value} |");
            assert!(doc.lines().any(|l| l.starts_with(&row)), "{row}");
        }
    }
}
