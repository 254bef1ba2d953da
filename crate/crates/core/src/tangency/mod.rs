//! The tangency set `{X₊h = 0} ∩ T²` of an inelastic linear pair.
//!
//! For the coefficient patterns with a known factorisation of `X₊h` the set
//! is assembled exactly from meridian, horizontal and sphere sections of the
//! canonical torus. Every other pattern goes through
//! [`numerical_tangency_contours`].
//!
//! On the canonical torus `X₊h = q₂ + 4(S + 3)Q₂` with `S = x² + y² + z²`;
//! the analytic cases and the factors they reduce to are:
//!
//! | case             | pattern                                   | zero set                       |
//! |------------------|-------------------------------------------|--------------------------------|
//! | `SkewQ4Zero`     | `Q₂ ≡ 0`                                  | `z = 0`, `a₃₁x + a₃₂y = 0`     |
//! | `XZCase`         | `Q₂ = (a₁₃+a₃₁)xz`, `a₃₂ = 0`             | `x = 0`, `z = 0`, `S = γ`      |
//! | `YZCase`         | `Q₂ = (a₂₃+a₃₂)yz`, `a₃₁ = 0`             | `y = 0`, `z = 0`, `S = γ`      |
//! | `Q4OnlyLinear`   | `Q₂ = a₃₁xz + a₃₂yz`, `a₁₃ = a₂₃ = 0`     | `z = 0`, `a₃₁x + a₃₂y = 0`     |
//! | `Q2OnlyLinear`   | `Q₂ = a₁₃xz + a₂₃yz`, `a₃₁ = a₃₂ = 0`     | `S = 5`, `z = 0`, `a₁₃x + a₂₃y = 0` |
//! | `ZSquared`       | `Q₂ = a₃₃z²`, `a₃₁ = a₃₂ = 0`             | `z = 0`                        |
//! | `PlanarQuadratic`| `Q₂ = a₁₁x² + a₂₂y² + (a₁₂+a₂₁)xy`, `a₁₃ = a₂₃ = 0` | `S = 5`, lines of the binary form |

mod contour;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fields::is_inelastic;
use crate::poly::Poly3;
use crate::{CurveComponent, Error, Matrix, PiecewiseSystem, Point, Result, TorusSpec};

use contour::{trace, Grid};

/// Coefficient-pattern tolerance for case dispatch.
const PATTERN_TOL: f64 = 1e-12;
/// Components closer than this (Hausdorff) are the same curve.
const DEDUP_TOL: f64 = 1e-7;
/// Grid used when a pattern falls back to contouring.
pub const DEFAULT_GRID: usize = 256;
/// Minimum number of cells per chart dimension.
pub const MIN_GRID: usize = 16;
/// A derivative field is skipped when it is this small relative to `max |g|`.
const FLAT_FIELD_REL: f64 = 1e-9;
/// A critical contour belongs to the zero set when `|g| ≤ this · max |g|` on all vertices.
const DOUBLE_ZERO_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TangencyCase {
    SkewQ4Zero,
    XZCase,
    YZCase,
    Q4OnlyLinear,
    Q2OnlyLinear,
    ZSquared,
    PlanarQuadratic,
    NumericalFallback,
}

impl TangencyCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            TangencyCase::SkewQ4Zero => "SkewQ4Zero",
            TangencyCase::XZCase => "XZCase",
            TangencyCase::YZCase => "YZCase",
            TangencyCase::Q4OnlyLinear => "Q4OnlyLinear",
            TangencyCase::Q2OnlyLinear => "Q2OnlyLinear",
            TangencyCase::ZSquared => "ZSquared",
            TangencyCase::PlanarQuadratic => "PlanarQuadratic",
            TangencyCase::NumericalFallback => "NumericalFallback",
        }
    }

    /// Component counts an analytic case can produce.
    pub fn admissible_counts(&self) -> &'static [usize] {
        match self {
            TangencyCase::SkewQ4Zero | TangencyCase::Q4OnlyLinear => &[4],
            TangencyCase::XZCase | TangencyCase::YZCase | TangencyCase::Q2OnlyLinear => &[4, 6],
            TangencyCase::ZSquared => &[2],
            TangencyCase::PlanarQuadratic => &[2, 4, 6],
            TangencyCase::NumericalFallback => &[],
        }
    }
}

/// A closed contour of the numerical fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    /// Chart coordinates in `[0, 2π)²`.
    pub uv: Vec<(f64, f64)>,
    pub points: Vec<[f64; 3]>,
    pub closed: bool,
}

impl Polyline {
    fn from_chart(torus: &TorusSpec, uv: Vec<(f64, f64)>) -> Self {
        let points = uv
            .iter()
            .map(|&(u, v)| torus.point_at(u, v).into())
            .collect();
        Self {
            uv,
            points,
            closed: true,
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        self.points.iter().map(|p| Point::from(*p))
    }

    fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |k| {
            (
                Point::from(self.points[k]),
                Point::from(self.points[(k + 1) % n]),
            )
        })
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Distance from `p` to the polyline (segments, not just vertices).
    pub fn distance(&self, p: &Point) -> f64 {
        if self.points.len() == 1 {
            return (Point::from(self.points[0]) - p).norm();
        }
        self.segments()
            .map(|(a, b)| segment_distance(p, &a, &b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric Hausdorff distance to another polyline.
    pub fn hausdorff(&self, other: &Polyline) -> f64 {
        let ab = self.vertices().map(|p| other.distance(&p)).fold(0.0, f64::max);
        let ba = other.vertices().map(|p| self.distance(&p)).fold(0.0, f64::max);
        ab.max(ba)
    }

    /// Symmetric Hausdorff distance to an analytic component sampled at `n` points.
    pub fn hausdorff_to_component(&self, comp: &CurveComponent, n: usize) -> f64 {
        let circle = comp.circle();
        let ab = self.vertices().map(|p| circle.distance(&p)).fold(0.0, f64::max);
        let ba = comp
            .sample(n)
            .iter()
            .map(|p| self.distance(p))
            .fold(0.0, f64::max);
        ab.max(ba)
    }
}

fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Result of contouring the tangency function on the torus chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContourSet {
    Polylines(Vec<Polyline>),
    /// `X₊h ≡ 0` on the torus: every point is a tangency point.
    DegenerateEverywhereTangent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangencyClassification {
    pub case: TangencyCase,
    /// Exact components (analytic cases).
    pub components: Vec<CurveComponent>,
    /// Contours (fallback only).
    pub polylines: Vec<Polyline>,
    /// The `γ` of the sphere branch `S = γ`, when the case has one.
    pub gamma: Option<f64>,
    /// `X₊h` vanishes on the whole torus.
    pub everywhere_tangent: bool,
}

impl TangencyClassification {
    pub fn component_count(&self) -> usize {
        match self.case {
            TangencyCase::NumericalFallback => self.polylines.len(),
            _ => self.components.len(),
        }
    }

    pub fn is_lemma_case(&self) -> bool {
        self.case != TangencyCase::NumericalFallback
    }
}

pub fn classify_tangency_set(sys: &PiecewiseSystem) -> Result<TangencyClassification> {
    classify_tangency_set_with_grid(sys, DEFAULT_GRID)
}

/// As [`classify_tangency_set`], with the fallback grid size given.
pub fn classify_tangency_set_with_grid(
    sys: &PiecewiseSystem,
    grid: usize,
) -> Result<TangencyClassification> {
    if !is_inelastic(sys) {
        return Err(Error::NotInelastic);
    }
    if !sys.torus.is_canonical() {
        return Err(Error::NonCanonicalTorus);
    }
    if let Some(analytic) = classify_matrix(sys.exterior.matrix(), &sys.torus) {
        return Ok(analytic);
    }
    let (polylines, everywhere_tangent) = match numerical_tangency_contours(sys, grid, grid)? {
        ContourSet::Polylines(p) => (p, false),
        ContourSet::DegenerateEverywhereTangent => (Vec::new(), true),
    };
    Ok(TangencyClassification {
        case: TangencyCase::NumericalFallback,
        components: Vec::new(),
        polylines,
        gamma: None,
        everywhere_tangent,
    })
}

/// The analytic case matched by the coefficient pattern of `a`, if any.
pub fn match_case(a: &Matrix) -> Option<TangencyCase> {
    classify_matrix(a, &TorusSpec::canonical()).map(|c| c.case)
}

fn zero(x: f64) -> bool {
    x.abs() <= PATTERN_TOL
}

/// Angle of the vertical plane `a·x + b·y = 0`.
fn plane_angle(a: f64, b: f64) -> f64 {
    a.atan2(-b).rem_euclid(PI)
}

/// Analytic classification of the tangency set of the field `a` on the
/// canonical torus. Symmetric under `a ↦ −a`, so the interior partner of an
/// inelastic pair lands in the same case with the same components.
pub(crate) fn classify_matrix(a: &Matrix, torus: &TorusSpec) -> Option<TangencyClassification> {
    let (a11, a12, a13) = (a[(0, 0)], a[(0, 1)], a[(0, 2)]);
    let (a21, a22, a23) = (a[(1, 0)], a[(1, 1)], a[(1, 2)]);
    let (a31, a32, a33) = (a[(2, 0)], a[(2, 1)], a[(2, 2)]);
    let (p12, p13, p23) = (a12 + a21, a13 + a31, a23 + a32);
    let diag_zero = zero(a11) && zero(a22) && zero(a33);

    let z_plane = || torus.horizontal_section(0.0);
    let meridians = |a: f64, b: f64| torus.plane_section(plane_angle(a, b)).to_vec();

    let mut gamma = None;
    let mut everywhere_tangent = false;
    let mut comps: Vec<CurveComponent> = Vec::new();

    let case = if diag_zero && zero(p12) && zero(p13) && zero(p23) {
        // X₊h = −32(a₁₃xz + a₂₃yz) = 32z(a₃₁x + a₃₂y)
        if zero(a31) && zero(a32) {
            everywhere_tangent = true;
        } else {
            comps.extend(z_plane());
            comps.extend(meridians(a31, a32));
        }
        TangencyCase::SkewQ4Zero
    } else if diag_zero && zero(p12) && zero(p23) && zero(a32) && zero(a23) {
        // X₊h = 4xz[(a₁₃+a₃₁)S − 5a₁₃ + 3a₃₁]
        let g = (5.0 * a13 - 3.0 * a31) / p13;
        gamma = Some(g);
        comps.extend(meridians(1.0, 0.0));
        comps.extend(z_plane());
        comps.extend(torus.sphere_section(g));
        TangencyCase::XZCase
    } else if diag_zero && zero(p12) && zero(p13) && zero(a31) && zero(a13) {
        // X₊h = 4yz[(a₂₃+a₃₂)S − 5a₂₃ + 3a₃₂]
        let g = (5.0 * a23 - 3.0 * a32) / p23;
        gamma = Some(g);
        comps.extend(meridians(0.0, 1.0));
        comps.extend(z_plane());
        comps.extend(torus.sphere_section(g));
        TangencyCase::YZCase
    } else if diag_zero && zero(p12) && zero(a13) && zero(a23) {
        // X₊h = 4(S+3)z(a₃₁x + a₃₂y)
        comps.extend(z_plane());
        comps.extend(meridians(a31, a32));
        TangencyCase::Q4OnlyLinear
    } else if diag_zero && zero(p12) && zero(a31) && zero(a32) {
        // X₊h = 4(S−5)z(a₁₃x + a₂₃y)
        gamma = Some(5.0);
        comps.extend(torus.sphere_section(5.0));
        comps.extend(z_plane());
        comps.extend(meridians(a13, a23));
        TangencyCase::Q2OnlyLinear
    } else if zero(a11)
        && zero(a22)
        && zero(p12)
        && zero(a13)
        && zero(a23)
        && zero(a31)
        && zero(a32)
    {
        // X₊h = 4a₃₃z²(S+3)
        comps.extend(z_plane());
        TangencyCase::ZSquared
    } else if zero(a33) && zero(a13) && zero(a23) && zero(a31) && zero(a32) {
        // X₊h = 4(S−5)(a₁₁x² + a₂₂y² + (a₁₂+a₂₁)xy)
        gamma = Some(5.0);
        comps.extend(torus.sphere_section(5.0));
        for (dx, dy) in binary_form_lines(a11, a22, p12) {
            comps.extend(torus.plane_section(dy.atan2(dx)));
        }
        TangencyCase::PlanarQuadratic
    } else {
        return None;
    };

    Some(TangencyClassification {
        case,
        components: dedup(comps),
        polylines: Vec::new(),
        gamma,
        everywhere_tangent,
    })
}

/// Directions `(dx, dy)` of the real lines on which `a x² + b y² + c xy`
/// vanishes (a repeated factor yields one line).
fn binary_form_lines(a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let (a, b, c) = (a / scale, b / scale, c / scale);
    let disc = c * c - 4.0 * a * b;
    if disc < -PATTERN_TOL {
        return Vec::new();
    }
    if zero(a) {
        // y (c x + b y)
        let mut lines = vec![(1.0, 0.0)];
        if !zero(c) {
            lines.push((-b, c));
        }
        return lines;
    }
    // x/y = t with a t² + c t + b = 0
    if disc.abs() <= PATTERN_TOL {
        return vec![(-c / (2.0 * a), 1.0)];
    }
    let sq = disc.sqrt();
    let q = -0.5 * (c + c.signum().max(0.0).mul_add(2.0, -1.0) * sq);
    let t1 = q / a;
    let t2 = if q == 0.0 { -t1 } else { b / q };
    vec![(t1, 1.0), (t2, 1.0)]
}

fn dedup(comps: Vec<CurveComponent>) -> Vec<CurveComponent> {
    let mut out: Vec<CurveComponent> = Vec::with_capacity(comps.len());
    for c in comps {
        if !out.iter().any(|k| k.hausdorff(&c, 64) < DEDUP_TOL) {
            out.push(c);
        }
    }
    out
}

/// Zero contours of `g(u, v) = X₊h(point_at(u, v))` on an `n_u × n_v`
/// periodic grid, longest first.
///
/// Sign changes of `g` are contoured directly. Zero curves of even
/// multiplicity (where `g` touches zero without changing sign) are recovered
/// from the contours of `∂g/∂u` and `∂g/∂v` along which `g` itself vanishes.
pub fn numerical_tangency_contours(
    sys: &PiecewiseSystem,
    n_u: usize,
    n_v: usize,
) -> Result<ContourSet> {
    if n_u < MIN_GRID || n_v < MIN_GRID {
        return Err(Error::GridTooCoarse { n_u, n_v });
    }
    let torus = sys.torus;
    let lie = Poly3::torus(&torus).lie_derivative(sys.exterior.matrix());
    let lie_grad = lie.gradient();

    let g = |u: f64, v: f64| lie.eval(&torus.point_at(u, v));
    let grad_chart = |u: f64, v: f64| {
        let p = torus.point_at(u, v);
        let grad = Point::new(lie_grad[0].eval(&p), lie_grad[1].eval(&p), lie_grad[2].eval(&p));
        let (tu, tv) = torus.chart_tangents(u, v);
        (grad.dot(&tu), grad.dot(&tv))
    };
    let g_u = |u: f64, v: f64| grad_chart(u, v).0;
    let g_v = |u: f64, v: f64| grad_chart(u, v).1;

    let grid = Grid { n_u, n_v };
    let values = grid.sample(&g);
    let g_max = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if g_max <= 1e-12 * lie.max_coeff().max(1.0) || lie.is_zero() {
        return Ok(ContourSet::DegenerateEverywhereTangent);
    }

    let mut polylines: Vec<Polyline> = trace(&grid, &values, &g)
        .into_iter()
        .map(|uv| Polyline::from_chart(&torus, uv))
        .collect();

    let spacing = (grid.du() * (torus.major() - torus.minor())).min(grid.dv() * torus.minor());
    let same_curve = 0.25 * spacing;
    for field in [&g_u as &(dyn Fn(f64, f64) -> f64 + Sync), &g_v] {
        let dvalues = grid.sample(field);
        let d_max = dvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if d_max <= FLAT_FIELD_REL * g_max {
            continue;
        }
        for uv in trace(&grid, &dvalues, field) {
            let on_zero_set = uv.iter().all(|&(u, v)| g(u, v).abs() <= DOUBLE_ZERO_REL * g_max);
            if !on_zero_set {
                continue;
            }
            let candidate = Polyline::from_chart(&torus, uv);
            if polylines.iter().all(|p| p.hausdorff(&candidate) >= same_curve) {
                polylines.push(candidate);
            }
        }
    }

    polylines.sort_by(|a, b| b.length().total_cmp(&a.length()));
    Ok(ContourSet::Polylines(polylines))
}
