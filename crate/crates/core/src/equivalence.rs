//! Genericity of inelastic pairs and the orbit-equivalence verdict between
//! two of them.
//!
//! The sliding field of every inelastic pair is a rotation about the z-axis,
//! so its orbits are the horizontal circles of the torus. Two pairs with
//! nonzero angular velocities are equivalent through the identity when the
//! velocities have the same sign and through `(x, y, z) ↦ (x, −y, z)` when
//! they do not.

use serde::{Deserialize, Serialize};

use crate::fields::is_inelastic;
use crate::sliding::{sliding_orbit_through, ClosedOrbit, OMEGA_EPS};
use crate::tangency::match_case;
use crate::{Error, Matrix, PiecewiseSystem, Point, Result, TangencyCase};

/// Real parts at or below this in magnitude make a spectrum non-hyperbolic.
pub const EPS_EIG: f64 = 1e-9;
/// Number of sliding orbits compared by [`equivalence_check`].
pub const ORBIT_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Criterion {
    /// Lemma-case coefficient pattern and `ω ≠ 0`.
    #[default]
    Relaxed,
    /// Additionally requires hyperbolic spectra for both fields.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub in_lemma_case: bool,
    pub case: TangencyCase,
    pub hyperbolic_interior: bool,
    pub hyperbolic_exterior: bool,
    pub omega: f64,
    pub omega_nonzero: bool,
    pub in_frak_z_strict: bool,
    pub in_frak_z_relaxed: bool,
    /// `(re, im)` pairs, sorted.
    pub eigenvalues_interior: Vec<[f64; 2]>,
    pub eigenvalues_exterior: Vec<[f64; 2]>,
}

impl GenericityReport {
    pub fn passes(&self, criterion: Criterion) -> bool {
        match criterion {
            Criterion::Relaxed => self.in_frak_z_relaxed,
            Criterion::Strict => self.in_frak_z_strict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrientationRelation {
    SameOrientation,
    Reversed,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Homeomorphism {
    Identity,
    /// `(x, y, z) ↦ (x, −y, z)`.
    ReflectionY,
}

impl Homeomorphism {
    pub fn apply(&self, p: &Point) -> Point {
        match self {
            Homeomorphism::Identity => *p,
            Homeomorphism::ReflectionY => Point::new(p.x, -p.y, p.z),
        }
    }

    /// Sign relating the angular velocity of the pushed-forward rotation.
    fn orientation(&self) -> f64 {
        match self {
            Homeomorphism::Identity => 1.0,
            Homeomorphism::ReflectionY => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub criterion: Criterion,
    pub orientation_relation: OrientationRelation,
    pub homeomorphism_descriptor: Option<Homeomorphism>,
    /// Largest Hausdorff distance between an image orbit and the matching orbit.
    pub orbit_match_error: Option<f64>,
    /// Largest `|Dφ·Z₁(p) − Z_rot(±ω₁)(φ(p))|` over the sampled points.
    pub conjugacy_residual: Option<f64>,
}

fn spectrum(m: &Matrix) -> Vec<[f64; 2]> {
    let mut ev: Vec<[f64; 2]> = m
        .complex_eigenvalues()
        .iter()
        .map(|c| [c.re, c.im])
        .collect();
    ev.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    ev
}

fn hyperbolic(ev: &[[f64; 2]]) -> bool {
    ev.iter().all(|l| l[0].abs() > EPS_EIG)
}

pub fn genericity_report(sys: &PiecewiseSystem) -> Result<GenericityReport> {
    if !is_inelastic(sys) {
        return Err(Error::NotInelastic);
    }
    let case = match_case(sys.exterior.matrix()).unwrap_or(TangencyCase::NumericalFallback);
    let in_lemma_case = case != TangencyCase::NumericalFallback;
    let eigenvalues_exterior = spectrum(sys.exterior.matrix());
    let eigenvalues_interior = spectrum(sys.interior.matrix());
    let hyperbolic_exterior = hyperbolic(&eigenvalues_exterior);
    let hyperbolic_interior = hyperbolic(&eigenvalues_interior);
    let omega = sys.omega();
    let omega_nonzero = omega.abs() > OMEGA_EPS;
    let in_frak_z_relaxed = in_lemma_case && omega_nonzero;
    Ok(GenericityReport {
        in_lemma_case,
        case,
        hyperbolic_interior,
        hyperbolic_exterior,
        omega,
        omega_nonzero,
        in_frak_z_strict: in_frak_z_relaxed && hyperbolic_exterior && hyperbolic_interior,
        in_frak_z_relaxed,
        eigenvalues_interior,
        eigenvalues_exterior,
    })
}

/// [`equivalence_check_with`] under the relaxed criterion.
pub fn equivalence_check(sys1: &PiecewiseSystem, sys2: &PiecewiseSystem) -> Result<EquivalenceReport> {
    equivalence_check_with(sys1, sys2, Criterion::Relaxed)
}

pub fn equivalence_check_with(
    sys1: &PiecewiseSystem,
    sys2: &PiecewiseSystem,
    criterion: Criterion,
) -> Result<EquivalenceReport> {
    let g1 = genericity_report(sys1)?;
    let g2 = genericity_report(sys2)?;
    let rejected = EquivalenceReport {
        equivalent: false,
        criterion,
        orientation_relation: OrientationRelation::NotApplicable,
        homeomorphism_descriptor: None,
        orbit_match_error: None,
        conjugacy_residual: None,
    };
    if !g1.passes(criterion) || !g2.passes(criterion) || sys1.torus != sys2.torus {
        return Ok(rejected);
    }

    let (w1, w2) = (sys1.omega(), sys2.omega());
    let (phi, relation) = if w1.signum() == w2.signum() {
        (Homeomorphism::Identity, OrientationRelation::SameOrientation)
    } else {
        (Homeomorphism::ReflectionY, OrientationRelation::Reversed)
    };

    let mut orbit_error: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut horizontal = true;
    let (m1, m2) = (sys1.mean_matrix(), sys2.mean_matrix());
    for p in sample_points(sys1) {
        let q = phi.apply(&p);
        let o1 = sliding_orbit_through(sys1, &p)?;
        let o2 = sliding_orbit_through(sys2, &q)?;
        orbit_error = orbit_error.max(image_hausdorff(&o1, &o2, phi));

        let z1 = m1 * p;
        let z2 = m2 * q;
        horizontal &= z1.z.abs() <= 1e-12 * z1.norm().max(1.0)
            && z2.z.abs() <= 1e-12 * z2.norm().max(1.0);
        let pushed = phi.apply(&z1);
        let w = phi.orientation() * w1;
        let target = Point::new(-w * q.y, w * q.x, 0.0);
        residual = residual.max((pushed - target).norm());
    }

    if !horizontal {
        return Ok(rejected);
    }
    Ok(EquivalenceReport {
        equivalent: true,
        criterion,
        orientation_relation: relation,
        homeomorphism_descriptor: Some(phi),
        orbit_match_error: Some(orbit_error),
        conjugacy_residual: Some(residual),
    })
}

/// Deterministic, well-spread torus points.
fn sample_points(sys: &PiecewiseSystem) -> Vec<Point> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..ORBIT_SAMPLES)
        .map(|k| {
            let u = std::f64::consts::TAU * (k as f64 * golden).fract();
            let v = std::f64::consts::TAU * (k as f64 + 0.5) / ORBIT_SAMPLES as f64;
            sys.torus.point_at(u, v)
        })
        .collect()
}

/// Hausdorff distance between `φ(o1)` and `o2`. Both maps preserve `z` and
/// the axial distance, so the image of a horizontal circle is the circle
/// through the image of any one of its points.
fn image_hausdorff(o1: &ClosedOrbit, o2: &ClosedOrbit, phi: Homeomorphism) -> f64 {
    let q = phi.apply(&o1.point(0.0));
    (q.x.hypot(q.y) - o2.radius).hypot(q.z - o2.z_level)
}
