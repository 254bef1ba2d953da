//! Inelastic piecewise-linear Filippov systems whose switching manifold is a
//! torus of revolution.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: the torus as an implicit and a parameterised surface, and
//!   its exact sections by meridian planes, horizontal planes and spheres.
//! * [`fields`]: linear fields, Lie derivatives of the torus function, the
//!   inelastic constraint and the Filippov region split.
//! * [`sliding`]: the sliding vector field and its closed orbits.
//! * [`tangency`]: analytic classification of the tangency set with a
//!   marching-squares fallback.
//! * [`dynamics`]: hybrid trajectories (exact free flight, event location,
//!   projected sliding integration).
//! * [`equivalence`]: genericity checks and the orbit-equivalence verdict.

pub mod dynamics;
pub mod equivalence;
mod error;
pub mod fields;
pub mod geometry;
pub mod poly;
pub mod sliding;
pub mod tangency;

pub use error::{Error, Result};

pub use dynamics::{
    free_flight, orbit_closure_check, simulate, slide_flow, Mode, OrbitClosure, SegmentFlag,
    TerminalEvent, Trajectory, TrajectorySegment,
};
pub use equivalence::{
    equivalence_check, genericity_report, Criterion, EquivalenceReport, GenericityReport,
    Homeomorphism, OrientationRelation,
};
pub use fields::{
    classify_region, derive_inelastic_b, is_inelastic, lie_derivative_h, q2_q4_decompose,
    region_map, tangency_order, LieDecomposition, LinearField, PiecewiseSystem, QuadraticForm,
    RegionKind, RegionSample, TangencyKind, TangencyOrder,
};
pub use geometry::{CurveComponent, Projection, Side, TorusSpec};
pub use sliding::{
    filippov_sliding, sliding_closed_form, sliding_orbit_through, ClosedOrbit, SlidingClosedForm,
};
pub use tangency::{
    classify_tangency_set, classify_tangency_set_with_grid, numerical_tangency_contours,
    ContourSet, Polyline, TangencyCase, TangencyClassification,
};

/// A point or vector in R³.
pub type Point = nalgebra::Vector3<f64>;
/// A real 3×3 matrix.
pub type Matrix = nalgebra::Matrix3<f64>;

/// Absolute threshold for on-surface membership, `|h(p)| < EPS_SURFACE`.
pub const EPS_SURFACE: f64 = 1e-9;
/// Absolute threshold for sign tests on (exactly computed) Lie derivatives.
pub const EPS_SIGN: f64 = 1e-9;
