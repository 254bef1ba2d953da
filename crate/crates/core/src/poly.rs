//! Sparse real polynomials in `x, y, z`.
//!
//! `h` is a quartic and a linear field preserves polynomial degree under the
//! Lie derivative, so iterated derivatives `Xᵏh` are exact quartics.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::{Matrix, Point, TorusSpec};

type Exponents = [u32; 3];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly3 {
    terms: BTreeMap<Exponents, f64>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(exps: [u32; 3], c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(exps, c);
        p
    }

    /// The coordinate function `x`, `y` or `z` for `axis` 0, 1, 2.
    pub fn var(axis: usize) -> Self {
        let mut e = [0; 3];
        e[axis] = 1;
        Self::monomial(e, 1.0)
    }

    /// The implicit function of `torus`.
    pub fn torus(torus: &TorusSpec) -> Self {
        let x2 = Self::monomial([2, 0, 0], 1.0);
        let y2 = Self::monomial([0, 2, 0], 1.0);
        let z2 = Self::monomial([0, 0, 2], 1.0);
        let rho2 = &x2 + &y2;
        let s = &(&rho2 + &z2) + &Self::constant(torus.offset());
        let r2 = torus.major() * torus.major();
        &(&s * &s) - &rho2.scale(4.0 * r2)
    }

    fn add_term(&mut self, exps: Exponents, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(exps).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn coeff(&self, exps: [u32; 3]) -> f64 {
        self.terms.get(&exps).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = ([u32; 3], f64)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            out.add_term(*e, c * k);
        }
        out
    }

    pub fn partial(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut d = *e;
                d[axis] -= 1;
                out.add_term(d, c * e[axis] as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> [Poly3; 3] {
        [self.partial(0), self.partial(1), self.partial(2)]
    }

    /// Lie derivative along the linear field `p ↦ M·p`:
    /// `Σᵢ (M·p)ᵢ ∂ᵢP`.
    pub fn lie_derivative(&self, m: &Matrix) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            let di = self.partial(i);
            if di.is_zero() {
                continue;
            }
            let mut comp = Self::zero();
            for j in 0..3 {
                comp.add_term(
                    {
                        let mut e = [0; 3];
                        e[j] = 1;
                        e
                    },
                    m[(i, j)],
                );
            }
            out = &out + &(&comp * &di);
        }
        out
    }

    pub fn eval(&self, p: &Point) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * p.x.powi(e[0] as i32) * p.y.powi(e[1] as i32) * p.z.powi(e[2] as i32))
            .sum()
    }

    /// Largest absolute coefficient.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &Poly3 {
    type Output = Poly3;
    fn add(self, rhs: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Sub for &Poly3 {
    type Output = Poly3;
    fn sub(self, rhs: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -*c);
        }
        out
    }
}

impl Neg for &Poly3 {
    type Output = Poly3;
    fn neg(self) -> Poly3 {
        self.scale(-1.0)
    }
}

impl Mul for &Poly3 {
    type Output = Poly3;
    fn mul(self, rhs: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_torus_polynomial_matches_h() {
        let t = TorusSpec::canonical();
        let h = Poly3::torus(&t);
        assert_eq!(h.degree(), 4);
        assert_eq!(h.coeff([0, 0, 0]), 9.0);
        assert_eq!(h.coeff([2, 0, 0]), -10.0);
        assert_eq!(h.coeff([0, 0, 2]), 6.0);
        for p in [Point::new(0.3, -1.1, 2.0), Point::new(3.0, 0.0, 0.0)] {
            assert!((h.eval(&p) - t.h_value(&p)).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_agrees_with_closed_form() {
        let t = TorusSpec::new(2.5, 0.75).unwrap();
        let g = Poly3::torus(&t).gradient();
        let p = Point::new(-0.4, 1.9, 0.6);
        let exact = t.h_gradient(&p);
        for i in 0..3 {
            assert!((g[i].eval(&p) - exact[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn lie_derivative_of_linear_form() {
        // X = (z, 0, 0), P = x² → X P = 2xz
        let m = Matrix::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let p = Poly3::monomial([2, 0, 0], 1.0);
        let d = p.lie_derivative(&m);
        assert_eq!(d, Poly3::monomial([1, 0, 1], 2.0));
    }

    #[test]
    fn arithmetic_cancels_exactly() {
        let a = &Poly3::var(0) + &Poly3::var(1);
        let sq = &a * &a;
        let back = &(&sq - &Poly3::monomial([2, 0, 0], 1.0)) - &Poly3::monomial([0, 2, 0], 1.0);
        assert_eq!(back, Poly3::monomial([1, 1, 0], 2.0));
        assert!((&back - &back).is_zero());
    }
}
