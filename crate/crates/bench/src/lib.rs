//! Shared fixtures for the criterion benchmarks.

use lempertkit::{c64, CVector, DomainSpec, SolverConfig, StationaryProblem};

pub fn point(xs: &[(f64, f64)]) -> CVector {
    CVector::new(xs.iter().map(|&(a, b)| c64(a, b)).collect()).expect("finite point")
}

pub fn perturbed() -> DomainSpec {
    DomainSpec::perturbed_ball(2, 0.1).expect("valid domain")
}

/// Boundary problem at the exit point of the ray through (1, 0.3+0.1i).
pub fn boundary_problem(domain: &DomainSpec) -> StationaryProblem {
    let p = domain.radial_projection(&point(&[(1.0, 0.0), (0.3, 0.1)])).expect("projectable");
    let nu = domain.unit_normal(&p).expect("normal");
    let v = lempertkit::ball::phase_align(&(&nu + &point(&[(0.0, 0.0), (0.5, 0.0)])), &nu).expect("transversal");
    StationaryProblem::Boundary { p, v }
}

pub fn config() -> SolverConfig {
    SolverConfig::default()
}
