//! The torus of revolution about the z-axis and its exact plane/sphere sections.
//!
//! The torus with major radius `R` and minor radius `r` is the zero set of
//!
//! ```text
//! h(x, y, z) = (x² + y² + z² + R² − r²)² − 4R²(x² + y²)
//! ```
//!
//! which is negative inside the solid ring and positive outside. Every
//! section returned here is a circle in R³; [`CurveComponent`] keeps the
//! descriptive parameters alongside so reports can print them.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

/// Degenerate-section tolerance (e.g. `|c| = r` for horizontal planes).
const SECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    #[serde(rename = "R")]
    major: f64,
    #[serde(rename = "r")]
    minor: f64,
}

impl Default for TorusSpec {
    fn default() -> Self {
        Self::canonical()
    }
}

impl TorusSpec {
    pub fn new(major: f64, minor: f64) -> Result<Self> {
        if !(major.is_finite() && minor.is_finite() && minor > 0.0 && minor < major) {
            return Err(Error::InvalidTorus { major, minor });
        }
        Ok(Self { major, minor })
    }

    /// `R = 2`, `r = 1`: `h = (x²+y²+z²+3)² − 16(x²+y²)`.
    pub const fn canonical() -> Self {
        Self {
            major: 2.0,
            minor: 1.0,
        }
    }

    pub fn major(&self) -> f64 {
        self.major
    }

    pub fn minor(&self) -> f64 {
        self.minor
    }

    pub fn is_canonical(&self) -> bool {
        self.major == 2.0 && self.minor == 1.0
    }

    /// `R² − r²`, the constant inside the squared bracket of `h`.
    pub(crate) fn offset(&self) -> f64 {
        self.major * self.major - self.minor * self.minor
    }

    pub fn h_value(&self, p: &Point) -> f64 {
        let rho2 = p.x * p.x + p.y * p.y;
        let s = rho2 + p.z * p.z + self.offset();
        s * s - 4.0 * self.major * self.major * rho2
    }

    pub fn h_gradient(&self, p: &Point) -> Point {
        let s = p.norm_squared() + self.offset();
        let k = 8.0 * self.major * self.major;
        Point::new(
            4.0 * p.x * s - k * p.x,
            4.0 * p.y * s - k * p.y,
            4.0 * p.z * s,
        )
    }

    /// Standard angular parameterisation; `u` turns about the z-axis, `v`
    /// around the tube.
    pub fn point_at(&self, u: f64, v: f64) -> Point {
        let w = self.major + self.minor * v.cos();
        Point::new(w * u.cos(), w * u.sin(), self.minor * v.sin())
    }

    /// Partial derivatives of [`point_at`](Self::point_at) with respect to `u` and `v`.
    pub fn chart_tangents(&self, u: f64, v: f64) -> (Point, Point) {
        let w = self.major + self.minor * v.cos();
        let du = Point::new(-w * u.sin(), w * u.cos(), 0.0);
        let dv = Point::new(
            -self.minor * v.sin() * u.cos(),
            -self.minor * v.sin() * u.sin(),
            self.minor * v.cos(),
        );
        (du, dv)
    }

    /// Chart coordinates `(u, v)` in `[0, 2π)²` of the torus point nearest to `p`.
    pub fn chart_coords(&self, p: &Point) -> (f64, f64) {
        let u = p.y.atan2(p.x).rem_euclid(TAU);
        let rho = p.x.hypot(p.y);
        let v = p.z.atan2(rho - self.major).rem_euclid(TAU);
        (u, v)
    }

    /// Newton projection onto `h = 0` along the gradient direction.
    pub fn project(&self, p: &Point) -> Point {
        let mut q = *p;
        for _ in 0..8 {
            let hv = self.h_value(&q);
            let g = self.h_gradient(&q);
            let g2 = g.norm_squared();
            if g2 == 0.0 {
                break;
            }
            let step = g * (hv / g2);
            q -= step;
            if step.norm() < 1e-16 * (1.0 + q.norm()) {
                break;
            }
        }
        q
    }

    pub fn contains(&self, p: &Point, eps: f64) -> bool {
        self.h_value(p).abs() < eps
    }

    /// Intersection with the vertical plane through the z-axis spanned by
    /// `(cos θ, sin θ, 0)` and `(0, 0, 1)`: two meridian circles of radius `r`.
    pub fn plane_section(&self, theta: f64) -> [CurveComponent; 2] {
        let theta = theta.rem_euclid(PI);
        let dir = Point::new(theta.cos(), theta.sin(), 0.0);
        let (projection, lateral) = if dir.y.abs() >= dir.x.abs() - SECTION_TOL {
            (Projection::Yz, dir.y.abs())
        } else {
            (Projection::Xz, dir.x.abs())
        };
        let make = |side: Side| {
            let center = dir * (side.sign() * self.major);
            CurveComponent::MeridianSection {
                theta,
                side,
                center: center.into(),
                radius: self.minor,
                projection,
                semi_axes: (self.minor * lateral, self.minor),
            }
        };
        [make(Side::Tilde), make(Side::Bar)]
    }

    /// Intersection with the plane `z = c`: zero, one (`|c| = r`) or two
    /// horizontal circles, inner first.
    pub fn horizontal_section(&self, c: f64) -> Vec<CurveComponent> {
        let (r, big_r) = (self.minor, self.major);
        if c.abs() > r + SECTION_TOL {
            return Vec::new();
        }
        if (c.abs() - r).abs() <= SECTION_TOL {
            return vec![CurveComponent::HorizontalCircle {
                z: c,
                radius: big_r,
            }];
        }
        let d = (r * r - c * c).sqrt();
        vec![
            CurveComponent::HorizontalCircle {
                z: c,
                radius: big_r - d,
            },
            CurveComponent::HorizontalCircle {
                z: c,
                radius: big_r + d,
            },
        ]
    }

    /// Intersection with the origin-centred sphere `x² + y² + z² = γ`.
    ///
    /// On the canonical torus the circles sit at `z = ±√(−(γ−9)(γ−1))/4`
    /// with radius `(γ+3)/4`; they exist for `γ ∈ [1, 9]` and merge into a
    /// single circle at the endpoints.
    pub fn sphere_section(&self, gamma: f64) -> Vec<CurveComponent> {
        let lo = (self.major - self.minor).powi(2);
        let hi = (self.major + self.minor).powi(2);
        if !gamma.is_finite() || gamma < lo - SECTION_TOL || gamma > hi + SECTION_TOL {
            return Vec::new();
        }
        let radius = (gamma + self.offset()) / (2.0 * self.major);
        let z2 = gamma - radius * radius;
        if (gamma - lo).abs() <= SECTION_TOL || (gamma - hi).abs() <= SECTION_TOL || z2 <= 0.0 {
            return vec![CurveComponent::SphereCircle {
                gamma,
                z_sign: 1,
                z: 0.0,
                radius,
            }];
        }
        let z = z2.sqrt();
        vec![
            CurveComponent::SphereCircle {
                gamma,
                z_sign: 1,
                z,
                radius,
            },
            CurveComponent::SphereCircle {
                gamma,
                z_sign: -1,
                z: -z,
                radius,
            },
        ]
    }
}

/// Which side of the z-axis a meridian circle lies on: `Tilde` is the
/// `+(cos θ, sin θ)` side, `Bar` the opposite one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Tilde,
    Bar,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Tilde => 1.0,
            Side::Bar => -1.0,
        }
    }
}

/// Coordinate plane a meridian circle is projected onto when described as an
/// ellipse (`x = αy` planes project to (y, z), `y = βx` planes to (x, z)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    Yz,
    Xz,
}

/// One circle of a torus section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CurveComponent {
    HorizontalCircle {
        z: f64,
        radius: f64,
    },
    /// Meridian circle in the vertical plane at angle `theta`. `semi_axes`
    /// are the (horizontal, z) semi-axes of its projection onto `projection`.
    MeridianSection {
        theta: f64,
        side: Side,
        center: [f64; 3],
        radius: f64,
        projection: Projection,
        semi_axes: (f64, f64),
    },
    SphereCircle {
        gamma: f64,
        z_sign: i8,
        z: f64,
        radius: f64,
    },
}

/// A circle in R³ given by centre, unit normal and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle3 {
    pub center: Point,
    pub normal: Point,
    pub radius: f64,
    /// Unit vectors spanning the circle's plane.
    pub axes: (Point, Point),
}

impl Circle3 {
    pub fn point(&self, t: f64) -> Point {
        self.center + (self.axes.0 * t.cos() + self.axes.1 * t.sin()) * self.radius
    }

    pub fn distance(&self, p: &Point) -> f64 {
        let d = p - self.center;
        let axial = d.dot(&self.normal);
        let planar = (d - self.normal * axial).norm();
        (planar - self.radius).hypot(axial)
    }
}

impl CurveComponent {
    pub fn circle(&self) -> Circle3 {
        let ez = Point::z();
        match *self {
            CurveComponent::HorizontalCircle { z, radius }
            | CurveComponent::SphereCircle { z, radius, .. } => Circle3 {
                center: Point::new(0.0, 0.0, z),
                normal: ez,
                radius,
                axes: (Point::x(), Point::y()),
            },
            CurveComponent::MeridianSection {
                theta,
                center,
                radius,
                ..
            } => {
                let dir = Point::new(theta.cos(), theta.sin(), 0.0);
                Circle3 {
                    center: Point::from(center),
                    normal: Point::new(-theta.sin(), theta.cos(), 0.0),
                    radius,
                    axes: (dir, ez),
                }
            }
        }
    }

    /// `n` equally spaced points along the component.
    pub fn sample(&self, n: usize) -> Vec<Point> {
        let c = self.circle();
        (0..n).map(|k| c.point(TAU * k as f64 / n as f64)).collect()
    }

    pub fn distance(&self, p: &Point) -> f64 {
        self.circle().distance(p)
    }

    pub fn length(&self) -> f64 {
        TAU * self.circle().radius
    }

    /// Symmetric Hausdorff distance to another component, estimated from
    /// `n` samples on each side against the exact circle distance.
    pub fn hausdorff(&self, other: &CurveComponent, n: usize) -> f64 {
        let a = self.circle();
        let b = other.circle();
        let ab = self
            .sample(n)
            .iter()
            .map(|p| b.distance(p))
            .fold(0.0, f64::max);
        let ba = other
            .sample(n)
            .iter()
            .map(|p| a.distance(p))
            .fold(0.0, f64::max);
        ab.max(ba)
    }

    pub fn label(&self) -> &'static str {
        match self {
            CurveComponent::HorizontalCircle { .. } => "HorizontalCircle",
            CurveComponent::MeridianSection { .. } => "MeridianSection",
            CurveComponent::SphereCircle { .. } => "SphereCircle",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon() -> TorusSpec {
        TorusSpec::canonical()
    }

    fn fd_gradient(t: &TorusSpec, p: &Point, step: f64) -> Point {
        let mut g = Point::zeros();
        for i in 0..3 {
            let mut a = *p;
            let mut b = *p;
            a[i] += step;
            b[i] -= step;
            g[i] = (t.h_value(&a) - t.h_value(&b)) / (2.0 * step);
        }
        g
    }

    #[test]
    fn h_value_examples() {
        let t = canon();
        assert_eq!(t.h_value(&Point::new(3.0, 0.0, 0.0)), 0.0);
        assert_eq!(t.h_value(&Point::new(0.0, 0.0, 0.0)), 9.0);
        assert_eq!(t.h_value(&Point::new(2.0, 0.0, 1.0)), 0.0);
        assert!(t.h_value(&Point::new(2.0, 0.0, 0.0)) < 0.0);
        assert!(t.h_value(&Point::new(5.0, 0.0, 0.0)) > 0.0);
    }

    #[test]
    fn gradient_examples_match_finite_differences() {
        let t = canon();
        for (p, expected) in [
            (Point::new(3.0, 0.0, 0.0), Point::new(48.0, 0.0, 0.0)),
            (Point::new(0.0, 0.0, 0.0), Point::zeros()),
            (Point::new(2.0, 0.0, 1.0), Point::new(0.0, 0.0, 32.0)),
        ] {
            let fd = fd_gradient(&t, &p, 1e-5);
            assert!((fd - expected).norm() < 1e-5, "oracle {fd:?}");
            assert!((t.h_gradient(&p) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn canonical_gradient_has_closed_form() {
        let t = canon();
        let p = Point::new(0.3, -1.2, 0.7);
        let s = p.norm_squared();
        let closed = Point::new(4.0 * p.x * (s - 5.0), 4.0 * p.y * (s - 5.0), 4.0 * p.z * (s + 3.0));
        assert!((t.h_gradient(&p) - closed).norm() < 1e-12);
    }

    #[test]
    fn parameterisation_examples() {
        let t = canon();
        assert!((t.point_at(0.0, 0.0) - Point::new(3.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((t.point_at(PI / 2.0, PI / 2.0) - Point::new(0.0, 2.0, 1.0)).norm() < 1e-15);
        assert!((t.point_at(0.0, PI) - Point::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn chart_coords_invert_parameterisation() {
        let t = TorusSpec::new(3.0, 0.5).unwrap();
        for (u, v) in [(0.1, 0.2), (2.0, 4.0), (5.5, 3.0)] {
            let (uu, vv) = t.chart_coords(&t.point_at(u, v));
            assert!((uu - u).abs() < 1e-12 && (vv - v).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_tori_are_rejected() {
        assert!(TorusSpec::new(1.0, 1.0).is_err());
        assert!(TorusSpec::new(1.0, 2.0).is_err());
        assert!(TorusSpec::new(1.0, 0.0).is_err());
        assert!(TorusSpec::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn meridian_sections_of_coordinate_planes() {
        let t = canon();
        // x = 0: z² + (y ∓ 2)² = 1
        let [a, b] = t.plane_section(PI / 2.0);
        for p in a.sample(64) {
            assert!(p.x.abs() < 1e-12);
            assert!((p.z * p.z + (p.y - 2.0).powi(2) - 1.0).abs() < 1e-12);
        }
        for p in b.sample(64) {
            assert!((p.z * p.z + (p.y + 2.0).powi(2) - 1.0).abs() < 1e-12);
        }
        // y = 0: z² + (x ∓ 2)² = 1
        let [a, b] = t.plane_section(0.0);
        for p in a.sample(64) {
            assert!((p.z * p.z + (p.x - 2.0).powi(2) - 1.0).abs() < 1e-12);
        }
        for p in b.sample(64) {
            assert!((p.z * p.z + (p.x + 2.0).powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_plane_projects_to_the_printed_ellipse() {
        // x = y (α = 1): z²/2 + (y ∓ √2)² = 1/2
        let t = canon();
        let [a, b] = t.plane_section(PI / 4.0);
        let s2 = 2f64.sqrt();
        for p in a.sample(64) {
            assert!((p.x - p.y).abs() < 1e-12);
            assert!((p.z * p.z / 2.0 + (p.y - s2).powi(2) - 0.5).abs() < 1e-12);
        }
        for p in b.sample(64) {
            assert!((p.z * p.z / 2.0 + (p.y + s2).powi(2) - 0.5).abs() < 1e-12);
        }
        match a {
            CurveComponent::MeridianSection {
                projection,
                semi_axes,
                ..
            } => {
                assert_eq!(projection, Projection::Yz);
                assert!((semi_axes.0 - 1.0 / s2).abs() < 1e-15);
                assert_eq!(semi_axes.1, 1.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn sphere_sections() {
        let t = canon();
        let c = t.sphere_section(5.0);
        assert_eq!(c.len(), 2);
        for comp in &c {
            match *comp {
                CurveComponent::SphereCircle { z, radius, .. } => {
                    assert!((z.abs() - 1.0).abs() < 1e-15);
                    assert!((radius - 2.0).abs() < 1e-15);
                }
                _ => unreachable!(),
            }
        }
        assert!(t.sphere_section(0.5).is_empty());
        assert!(t.sphere_section(9.5).is_empty());
        let one = t.sphere_section(1.0);
        assert_eq!(one.len(), 1);
        assert_eq!(
            one[0],
            CurveComponent::SphereCircle {
                gamma: 1.0,
                z_sign: 1,
                z: 0.0,
                radius: 1.0
            }
        );
        assert_eq!(t.sphere_section(9.0).len(), 1);
    }

    #[test]
    fn sphere_section_matches_closed_form() {
        let t = canon();
        for gamma in [1.5f64, 3.0, 7.25, 8.9] {
            let z = (-(gamma - 9.0) * (gamma - 1.0)).sqrt() / 4.0;
            for comp in t.sphere_section(gamma) {
                let c = comp.circle();
                assert!((c.center.z.abs() - z).abs() < 1e-12);
                assert!((c.radius - (gamma + 3.0) / 4.0).abs() < 1e-12);
                for p in comp.sample(64) {
                    assert!(t.h_value(&p).abs() < 1e-9);
                    assert!((p.norm_squared() - gamma).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn horizontal_sections() {
        let t = canon();
        let c0 = t.horizontal_section(0.0);
        let radii: Vec<f64> = c0.iter().map(|c| c.circle().radius).collect();
        assert_eq!(radii, vec![1.0, 3.0]);
        let c1 = t.horizontal_section(1.0);
        assert_eq!(c1.len(), 1);
        assert_eq!(c1[0].circle().radius, 2.0);
        assert!(t.horizontal_section(2.0).is_empty());
        assert!(t.horizontal_section(-1.5).is_empty());
    }

    #[test]
    fn general_torus_sections_lie_on_the_surface() {
        let t = TorusSpec::new(3.5, 1.25).unwrap();
        let mut comps = Vec::new();
        comps.extend(t.plane_section(1.1));
        comps.extend(t.horizontal_section(0.4));
        comps.extend(t.sphere_section(12.0));
        assert_eq!(comps.len(), 6);
        for c in comps {
            for p in c.sample(64) {
                assert!(t.h_value(&p).abs() < 1e-9, "{c:?}");
            }
        }
    }

    #[test]
    fn projection_lands_on_surface() {
        let t = canon();
        let p = t.project(&Point::new(3.1, 0.2, -0.05));
        assert!(t.h_value(&p).abs() < 1e-12);
    }

    #[test]
    fn circle_distance_is_exact_for_known_points() {
        let c = CurveComponent::HorizontalCircle { z: 1.0, radius: 2.0 }.circle();
        assert!((c.distance(&Point::new(0.0, 0.0, 1.0)) - 2.0).abs() < 1e-15);
        assert!((c.distance(&Point::new(2.0, 0.0, 2.0)) - 1.0).abs() < 1e-15);
    }
}
