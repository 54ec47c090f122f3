//! Numerical complex geodesics on strongly linearly convex domains in ℂⁿ.
//!
//! The crate computes Lempert stationary discs with their dual maps, the
//! associated left inverses and retractions, the boundary spherical
//! representation Ψ_p, the pluricomplex Poisson kernel and Green function,
//! and verifies the identities these objects satisfy.

// Guards such as `!(x > 0.0)` are written negated on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ball;
pub mod contour;
pub mod cvec;
pub mod disc;
pub mod domain;
pub mod error;
pub mod geodesics;
pub mod hardy;
pub mod limit;
pub mod rep;
pub mod rigidity;
pub mod lsq;
pub mod ma;
pub mod spectral;
pub mod verify;

pub use cvec::{c64, hermitian_inner, CVector, C64};
pub use disc::{mobius_automorphism, parabolic_automorphism, poincare_distance, poisson_kernel, DiscAutomorphism, StolzRegion};
pub use error::{Error, Result};
pub use hardy::{HardyMap, Projection};
pub use limit::{angular_limit, angular_limit_map, LimitEstimate, LimitOptions};
pub use ball::{ball_geodesic, ball_invert, ball_kobayashi, BoundaryDirection, Horosphere, HorosphereShape};
pub use domain::{DefiningFunction, DomainDescriptor, DomainKind, DomainSpec, NontangentialRegion};
pub use geodesics::{
    dual_map, geodesic_certificate, kobayashi_distance, kobayashi_metric, preferred_normalize, solve_stationary,
    Certificate, GeodesicPair, LeftInverse, SolverConfig, StationaryProblem,
};
pub use rep::{busemann, spherical_rep, spherical_rep_inverse, BusemannLimit, BusemannReport, RepPoint, SphericalRep};
pub use ma::{
    boundary_asymptotics, green_function, ma_defaults, ma_verify, pluricomplex_poisson, slice_check, FdOptions, GreenField, KernelField,
    MaReport, MaTolerances,
};
pub use rigidity::{
    contact_family, shoikhet_counterexample, third_derivative_at_one, verify_bk_inequalities, DiscGrid, SelfMap,
    SelfMapSpec,
};
pub use verify::{run_suite, Check, Suite, SuiteOptions, SuiteReport};
