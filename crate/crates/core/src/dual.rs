//! Forward-mode first derivatives.
//!
//! Generating functions are evaluated on [`Dual`] values whose derivative
//! parts come from the implicit-differentiation identities for the
//! characteristic roots, so `X'(z)` follows from the product and chain rules
//! applied to the closed form of `X(z)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed by the closed-form kernels.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn ipow(self, k: i64) -> Self;
    fn value(self) -> f64;
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn ipow(self, k: i64) -> Self {
        pow_i64(self, k)
    }
    fn value(self) -> f64 {
        self
    }
}

/// `v + d·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let v = self.v / o.v;
        Dual::new(v, (self.d - v * o.d) / o.v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl Scalar for Dual {
    fn cst(v: f64) -> Self {
        Dual::new(v, 0.0)
    }
    fn ipow(self, k: i64) -> Self {
        if k == 0 {
            return Dual::new(1.0, 0.0);
        }
        let vk = pow_i64(self.v, k);
        let dk = if self.v == 0.0 {
            if k == 1 {
                self.d
            } else {
                0.0
            }
        } else {
            self.d * (k as f64) * vk / self.v
        };
        Dual::new(vk, dk)
    }
    fn value(self) -> f64 {
        self.v
    }
}

/// Integer power with exponents beyond the `i32` range clamped (the result
/// has long since under- or overflowed by then).
pub(crate) fn pow_i64(x: f64, k: i64) -> f64 {
    let k = k.clamp(i32::MIN as i64 + 1, i32::MAX as i64) as i32;
    x.powi(k)
}
