//! Fixed systems shared by the benchmarks.

use torus_filippov::{Matrix, PiecewiseSystem, Point, TorusSpec};

/// Contracting spiral onto the outer equator; falls back to contouring.
pub fn spiral() -> PiecewiseSystem {
    let a = Matrix::new(-1.0, -4.0, 0.0, 4.0, -1.0, 0.0, 0.0, 0.0, -1.0);
    PiecewiseSystem::inelastic(a, 0.0, TorusSpec::canonical())
}

/// A system in the `xz` lemma case with sliding speed 1.5.
pub fn xz_case() -> PiecewiseSystem {
    let a = Matrix::new(0.0, -4.0, 1.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    PiecewiseSystem::inelastic(a, -1.0, TorusSpec::canonical())
}

pub fn spiral_start() -> Point {
    Point::new(4.0, 0.0, 0.0)
}

/// A point on the canonical torus below the outer equator.
pub fn torus_point() -> Point {
    Point::new(2.5, 0.0, -(3f64.sqrt()) / 2.0)
}
