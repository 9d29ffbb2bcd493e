//! Dual numbers with a single derivative channel.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// `value + derivative·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub value: f64,
    pub derivative: f64,
}

impl Dual {
    pub const fn new(value: f64, derivative: f64) -> Self {
        Dual { value, derivative }
    }

    pub const fn constant(value: f64) -> Self {
        Dual::new(value, 0.0)
    }

    /// A seeded variable: derivative channel set to one.
    pub const fn variable(value: f64) -> Self {
        Dual::new(value, 1.0)
    }

    // A zero derivative channel never contributes, even where the local
    // derivative factor is infinite (sqrt at 0, 0^p for p < 1).
    #[inline]
    fn chain(self, value: f64, local: f64) -> Dual {
        let derivative = if self.derivative == 0.0 {
            0.0
        } else {
            local * self.derivative
        };
        Dual::new(value, derivative)
    }

    pub fn sin(self) -> Dual {
        self.chain(self.value.sin(), self.value.cos())
    }

    pub fn cos(self) -> Dual {
        self.chain(self.value.cos(), -self.value.sin())
    }

    pub fn exp(self) -> Dual {
        let e = self.value.exp();
        self.chain(e, e)
    }

    pub fn ln(self) -> Dual {
        self.chain(self.value.ln(), self.value.recip())
    }

    pub fn sqrt(self) -> Dual {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r)
    }

    /// `self^rhs` for a general dual exponent.
    ///
    /// When the exponent carries no derivative the power rule is used, so
    /// negative bases with integral exponents stay well defined. Otherwise
    /// `d(a^b) = b·a^(b-1)·a' + a^b·ln(a)·b'`, which needs `a > 0`.
    pub fn pow(self, rhs: Dual) -> Dual {
        let value = self.value.powf(rhs.value);
        let base_part = if self.derivative == 0.0 || rhs.value == 0.0 {
            0.0
        } else {
            rhs.value * self.value.powf(rhs.value - 1.0) * self.derivative
        };
        let exp_part = if rhs.derivative == 0.0 {
            0.0
        } else {
            value * self.value.ln() * rhs.derivative
        };
        Dual::new(value, base_part + exp_part)
    }

    pub fn is_finite(self) -> bool {
        self.value.is_finite() && self.derivative.is_finite()
    }
}

impl From<f64> for Dual {
    fn from(v: f64) -> Self {
        Dual::constant(v)
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.derivative + rhs.derivative)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.derivative - rhs.derivative)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.derivative * rhs.value + self.value * rhs.derivative,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        let value = self.value / rhs.value;
        Dual::new(
            value,
            (self.derivative - value * rhs.derivative) / rhs.value,
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.derivative)
    }
}
