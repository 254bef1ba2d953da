use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid torus: need 0 < r < R, got R = {major}, r = {minor}")]
    InvalidTorus { major: f64, minor: f64 },
    #[error("point is not on the torus (|h| = {residual:e})")]
    NotOnSurface { residual: f64 },
    #[error("Lie derivative order must be 1, 2 or 3 (got {0})")]
    InvalidOrder(u8),
    #[error("system is not inelastic over the torus")]
    NotInelastic,
    #[error("sliding field denominator vanishes (tangency point)")]
    DegenerateDenominator,
    #[error("sliding angular velocity is zero; every torus point is an equilibrium")]
    DegenerateOmega,
    #[error("grid too coarse: need at least 16 cells per dimension, got {n_u}x{n_v}")]
    GridTooCoarse { n_u: usize, n_v: usize },
    #[error("analytic tangency classification needs the canonical torus (R = 2, r = 1)")]
    NonCanonicalTorus,
    #[error("crossing region detected on an inelastic system at {point:?}")]
    CrossingOnInelastic { point: [f64; 3] },
}
