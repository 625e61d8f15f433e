//! Second-order jets: value, gradient, and Hessian of a scalar function of
//! `(x, y)`, propagated exactly through sums, products, and scalar chains.
//!
//! Every prediction path in the crate flows through [`Jet2`]: the PDE
//! residual needs `∇p` and `∇²p`, so fields, networks, and boundary
//! interpolants all evaluate to jets. The mixed partial is stored once;
//! symmetry holds by construction.

use core::ops::{Add, Mul, Neg, Sub};

/// Value, first, and second derivatives with respect to `(x, y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub gx: f64,
    pub gy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl Jet2 {
    /// Constant function: value `c`, all derivatives zero.
    pub const fn constant(c: f64) -> Self {
        Self {
            v: c,
            gx: 0.0,
            gy: 0.0,
            hxx: 0.0,
            hxy: 0.0,
            hyy: 0.0,
        }
    }

    /// The coordinate function `x` seeded at value `x`.
    pub const fn seed_x(x: f64) -> Self {
        Self {
            v: x,
            gx: 1.0,
            gy: 0.0,
            hxx: 0.0,
            hxy: 0.0,
            hyy: 0.0,
        }
    }

    /// The coordinate function `y` seeded at value `y`.
    pub const fn seed_y(y: f64) -> Self {
        Self {
            v: y,
            gx: 0.0,
            gy: 1.0,
            hxx: 0.0,
            hxy: 0.0,
            hyy: 0.0,
        }
    }

    /// Trace of the Hessian.
    pub fn laplacian(&self) -> f64 {
        self.hxx + self.hyy
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.gx.is_finite()
            && self.gy.is_finite()
            && self.hxx.is_finite()
            && self.hxy.is_finite()
            && self.hyy.is_finite()
    }

    /// Scalar chain rule through second order: replaces the jet of `u` with
    /// the jet of `s(u)` given `s(u.v)`, `s'(u.v)`, `s''(u.v)`.
    pub fn chain(&self, s0: f64, s1: f64, s2: f64) -> Self {
        Self {
            v: s0,
            gx: s1 * self.gx,
            gy: s1 * self.gy,
            hxx: s1 * self.hxx + s2 * self.gx * self.gx,
            hxy: s1 * self.hxy + s2 * self.gx * self.gy,
            hyy: s1 * self.hyy + s2 * self.gy * self.gy,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            v: c * self.v,
            gx: c * self.gx,
            gy: c * self.gy,
            hxx: c * self.hxx,
            hxy: c * self.hxy,
            hyy: c * self.hyy,
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + rhs.v,
            gx: self.gx + rhs.gx,
            gy: self.gy + rhs.gy,
            hxx: self.hxx + rhs.hxx,
            hxy: self.hxy + rhs.hxy,
            hyy: self.hyy + rhs.hyy,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

/// Product rule through second order.
impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, b: Jet2) -> Jet2 {
        let a = self;
        Jet2 {
            v: a.v * b.v,
            gx: a.gx * b.v + a.v * b.gx,
            gy: a.gy * b.v + a.v * b.gy,
            hxx: a.hxx * b.v + 2.0 * a.gx * b.gx + a.v * b.hxx,
            hxy: a.hxy * b.v + a.gx * b.gy + a.gy * b.gx + a.v * b.hxy,
            hyy: a.hyy * b.v + 2.0 * a.gy * b.gy + a.v * b.hyy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Jet of `x²y + 3x` at `(x, y)`, written by hand.
    fn poly_jet(x: f64, y: f64) -> Jet2 {
        Jet2 {
            v: x * x * y + 3.0 * x,
            gx: 2.0 * x * y + 3.0,
            gy: x * x,
            hxx: 2.0 * y,
            hxy: 2.0 * x,
            hyy: 0.0,
        }
    }

    #[test]
    fn product_rule_matches_hand_expansion() {
        let (x, y) = (0.7, -1.3);
        let jx = Jet2::seed_x(x);
        let jy = Jet2::seed_y(y);
        // x·x·y + 3x assembled from seeds
        let built = jx * jx * jy + jx.scale(3.0);
        let expect = poly_jet(x, y);
        assert!((built.v - expect.v).abs() < 1e-14);
        assert!((built.gx - expect.gx).abs() < 1e-14);
        assert!((built.gy - expect.gy).abs() < 1e-14);
        assert!((built.hxx - expect.hxx).abs() < 1e-14);
        assert!((built.hxy - expect.hxy).abs() < 1e-14);
        assert!((built.hyy - expect.hyy).abs() < 1e-14);
    }

    #[test]
    fn chain_on_square() {
        // s(u) = u² applied to u = x + 2y
        let (x, y) = (0.3, 0.9);
        let u = Jet2::seed_x(x) + Jet2::seed_y(y).scale(2.0);
        let sq = u.chain(u.v * u.v, 2.0 * u.v, 2.0);
        let direct = u * u;
        assert!((sq.v - direct.v).abs() < 1e-14);
        assert!((sq.hxx - direct.hxx).abs() < 1e-14);
        assert!((sq.hxy - direct.hxy).abs() < 1e-14);
        assert!((sq.hyy - direct.hyy).abs() < 1e-14);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let c = Jet2::constant(4.2);
        assert_eq!(c.gx, 0.0);
        assert_eq!(c.laplacian(), 0.0);
    }
}
