//! Topological eigenvalues of the Fibonacci model set: predicted values from
//! the scheme against the finite-scale phase defect of a generated pattern.

use modelset::dynamics::eigenvalue_defect;
use modelset::exact::QuadRational as Q;
use modelset::internal::{InternalPoint, Membership};
use modelset::{defaults, presets};

fn main() {
    let scheme = presets::fibonacci();
    let master = scheme
        .generate_at(&InternalPoint::real(Q::frac(1, 5)), &Q::int(600), &Membership::Declared)
        .unwrap();
    let rhos: Vec<Q> = [10, 25, 50, 100].iter().map(|&r| Q::int(r)).collect();
    let th = defaults::thresholds();
    let mut betas: Vec<Q> = scheme.model_eigenvalues(5).unwrap().into_iter().map(|e| e.beta[0].clone()).collect();
    betas.push(Q::frac(1, 3));
    for beta in betas {
        let report = eigenvalue_defect(&master, std::slice::from_ref(&beta), &rhos, &th).unwrap();
        let curve: Vec<String> = report.curve.iter().map(|p| format!("{:.4}", p.defect)).collect();
        println!("beta = {beta:<20} defect [{}] {:?}", curve.join(", "), report.verdict);
    }
}
