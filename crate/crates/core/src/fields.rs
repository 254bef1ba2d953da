//! Linear fields, their Lie derivatives against the torus function, the
//! inelastic constraint, and the Filippov region split on the torus.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::poly::Poly3;
use crate::{Error, Matrix, Point, Result, TorusSpec, EPS_SIGN, EPS_SURFACE};

/// Relative tolerance of the coefficient-level inelastic test.
const INELASTIC_TOL: f64 = 1e-12;

/// The linear vector field `p ↦ M·p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearField(pub Matrix);

impl LinearField {
    pub fn new(m: Matrix) -> Self {
        Self(m)
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Self(Matrix::from_fn(|i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn apply(&self, p: &Point) -> Point {
        self.0 * p
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self(self.0 * k)
    }

    /// `[Xh, X²h, X³h]` as exact polynomials.
    pub fn lie_tower(&self, torus: &TorusSpec) -> [Poly3; 3] {
        let h = Poly3::torus(torus);
        let first = h.lie_derivative(&self.0);
        let second = first.lie_derivative(&self.0);
        let third = second.lie_derivative(&self.0);
        [first, second, third]
    }
}

/// `X₋` acts where `h < 0` (inside the ring), `X₊` where `h > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSystem {
    pub interior: LinearField,
    pub exterior: LinearField,
    pub torus: TorusSpec,
}

impl PiecewiseSystem {
    pub fn new(interior: LinearField, exterior: LinearField, torus: TorusSpec) -> Self {
        Self {
            interior,
            exterior,
            torus,
        }
    }

    /// Builds the inelastic partner of `X₊ = A` with free entry `b₂,₁`.
    pub fn inelastic(a: Matrix, b21: f64, torus: TorusSpec) -> Self {
        Self::new(
            LinearField(derive_inelastic_b(&a, b21)),
            LinearField(a),
            torus,
        )
    }

    /// `½(a₂,₁ + b₂,₁)`, the angular velocity of the sliding rotation.
    pub fn omega(&self) -> f64 {
        0.5 * (self.exterior.0[(1, 0)] + self.interior.0[(1, 0)])
    }

    /// `½(A + B)`, the smooth extension of the sliding field for inelastic pairs.
    pub fn mean_matrix(&self) -> Matrix {
        (self.exterior.0 + self.interior.0) * 0.5
    }

    pub fn exterior_lie(&self, p: &Point) -> f64 {
        self.exterior.apply(p).dot(&self.torus.h_gradient(p))
    }

    pub fn interior_lie(&self, p: &Point) -> f64 {
        self.interior.apply(p).dot(&self.torus.h_gradient(p))
    }
}

/// `Xᵏh(p)` for `k = order ∈ {1, 2, 3}`, by exact polynomial differentiation.
pub fn lie_derivative_h(x: &LinearField, p: &Point, torus: &TorusSpec, order: u8) -> Result<f64> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    let h = Poly3::torus(torus);
    let mut d = h.lie_derivative(&x.0);
    for _ in 1..order {
        d = d.lie_derivative(&x.0);
    }
    Ok(d.eval(p))
}

/// The unique `B` making `(A, B)` inelastic over the torus, given the free entry `b₂,₁`.
pub fn derive_inelastic_b(a: &Matrix, b21: f64) -> Matrix {
    let mut b = -a;
    b[(1, 0)] = b21;
    b[(0, 1)] = -a[(0, 1)] - a[(1, 0)] - b21;
    b
}

/// Coefficient test: `X₊h + X₋h` vanishes identically iff `A + B` is zero
/// except for an antisymmetric (1,2)/(2,1) block.
pub fn is_inelastic(sys: &PiecewiseSystem) -> bool {
    let a = sys.exterior.0;
    let b = sys.interior.0;
    let scale = a.amax().max(b.amax()).max(1.0);
    let tol = INELASTIC_TOL * scale;
    let s = a + b;
    let relations = [
        s[(0, 0)],
        s[(1, 1)],
        s[(2, 2)],
        s[(0, 1)] + s[(1, 0)],
        s[(0, 2)] + s[(2, 0)],
        s[(1, 2)] + s[(2, 1)],
        s[(0, 2)],
        s[(1, 2)],
    ];
    relations.iter().all(|r| r.abs() <= tol)
}

/// Coefficients of a quadratic form in `x, y, z`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl QuadraticForm {
    pub fn eval(&self, p: &Point) -> f64 {
        self.xx * p.x * p.x
            + self.yy * p.y * p.y
            + self.zz * p.z * p.z
            + self.xy * p.x * p.y
            + self.xz * p.x * p.z
            + self.yz * p.y * p.z
    }

    /// The symmetric form `pᵀ M p`.
    pub fn of_matrix(m: &Matrix) -> Self {
        Self {
            xx: m[(0, 0)],
            yy: m[(1, 1)],
            zz: m[(2, 2)],
            xy: m[(0, 1)] + m[(1, 0)],
            xz: m[(0, 2)] + m[(2, 0)],
            yz: m[(1, 2)] + m[(2, 1)],
        }
    }
}

/// `X₊h = q₂ + q₄` on the canonical torus, with `q₄ = 4(S + 3)·Q₂` and
/// `S = x² + y² + z²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieDecomposition {
    pub q2: QuadraticForm,
    pub big_q2: QuadraticForm,
}

impl LieDecomposition {
    pub fn q4(&self, p: &Point) -> f64 {
        4.0 * (p.norm_squared() + 3.0) * self.big_q2.eval(p)
    }

    pub fn eval(&self, p: &Point) -> f64 {
        self.q2.eval(p) + self.q4(p)
    }
}

pub fn q2_q4_decompose(a: &Matrix) -> LieDecomposition {
    let q2 = QuadraticForm {
        xx: -32.0 * a[(0, 0)],
        yy: -32.0 * a[(1, 1)],
        zz: 0.0,
        xy: -32.0 * (a[(0, 1)] + a[(1, 0)]),
        xz: -32.0 * a[(0, 2)],
        yz: -32.0 * a[(1, 2)],
    };
    LieDecomposition {
        q2,
        big_q2: QuadraticForm::of_matrix(a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    Crossing,
    Sliding,
    Escaping,
    Tangency,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::Crossing => "crossing",
            RegionKind::Sliding => "sliding",
            RegionKind::Escaping => "escaping",
            RegionKind::Tangency => "tangency",
        }
    }
}

fn require_on_surface(torus: &TorusSpec, p: &Point) -> Result<()> {
    let residual = torus.h_value(p).abs();
    if residual < EPS_SURFACE {
        Ok(())
    } else {
        Err(Error::NotOnSurface { residual })
    }
}

pub(crate) fn region_from_lie(plus: f64, minus: f64) -> RegionKind {
    if plus < -EPS_SIGN && minus > EPS_SIGN {
        RegionKind::Sliding
    } else if plus > EPS_SIGN && minus < -EPS_SIGN {
        RegionKind::Escaping
    } else if plus * minus > EPS_SIGN * EPS_SIGN {
        RegionKind::Crossing
    } else {
        RegionKind::Tangency
    }
}

pub fn classify_region(sys: &PiecewiseSystem, p: &Point) -> Result<RegionKind> {
    require_on_surface(&sys.torus, p)?;
    Ok(region_from_lie(sys.exterior_lie(p), sys.interior_lie(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSample {
    pub u: f64,
    pub v: f64,
    pub region: RegionKind,
}

/// Region labels on the `n × n` chart grid `u = 2πi/n`, `v = 2πj/n`, ordered
/// with `u` varying slowest.
pub fn region_map(sys: &PiecewiseSystem, n: usize) -> Result<Vec<RegionSample>> {
    if n < 16 {
        return Err(Error::GridTooCoarse { n_u: n, n_v: n });
    }
    let step = TAU / n as f64;
    (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (u, v) = ((k / n) as f64 * step, (k % n) as f64 * step);
            let p = sys.torus.point_at(u, v);
            classify_region(sys, &p).map(|region| RegionSample { u, v, region })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TangencyKind {
    NotTangent,
    Fold,
    Cusp,
    HigherOrder,
}

impl TangencyKind {
    /// Classifies from `[Xh, X²h, X³h]`.
    pub fn from_derivatives(d: [f64; 3]) -> Self {
        let [d1, d2, d3] = d.map(f64::abs);
        if d1 > EPS_SIGN {
            TangencyKind::NotTangent
        } else if d2 > EPS_SIGN {
            TangencyKind::Fold
        } else if d3 > EPS_SIGN {
            TangencyKind::Cusp
        } else {
            TangencyKind::HigherOrder
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencyOrder {
    pub kind: TangencyKind,
    /// `[Xh, X²h, X³h]` at the point.
    pub derivatives: [f64; 3],
}

pub fn tangency_order(x: &LinearField, p: &Point, torus: &TorusSpec) -> Result<TangencyOrder> {
    require_on_surface(torus, p)?;
    let derivatives = x.lie_tower(torus).map(|d| d.eval(p));
    Ok(TangencyOrder {
        kind: TangencyKind::from_derivatives(derivatives),
        derivatives,
    })
}
