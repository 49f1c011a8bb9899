//! Redundant internal components and the Toeplitz odometer scheme.

use modelset::exact::QuadRational as Q;
use modelset::internal::{InternalPoint, Membership};
use modelset::presets;

fn main() {
    let z2 = presets::z2_redundant();
    let check = z2.eigenvalue_quotient_check().unwrap();
    println!(
        "z2-redundant: |R| = {}, eigenvalue index {}, quotient consistent {}",
        check.redundancy_size, check.index, check.quotient_consistent
    );

    let toeplitz = presets::period_doubling();
    println!("Toeplitz windows partition the odometer: {}", toeplitz.windows_partition_compact_group().unwrap());
    let p = toeplitz
        .generate_at(&InternalPoint::new(vec![], vec![0]), &Q::int(31), &Membership::Declared)
        .unwrap();
    let word: String = p.points().iter().map(|(_, s)| p.symbols()[*s].as_str()).collect();
    println!("period-doubling word on [-31, 31]: {word}");
}
