use std::ops::{Add, Div, Mul, Neg, Sub};

/// Second-order truncated Taylor number: value, first and second derivative
/// with respect to the single variable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Dual2 {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub const fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }

    /// The independent variable seeded at `x`.
    pub const fn variable(x: f64) -> Self {
        Self::new(x, 1.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }

    /// Composition `f(self)` given `f`, `f'` and `f''` at `self.value`.
    #[inline]
    pub fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Self::new(f, df * self.d1, ddf * self.d1 * self.d1 + df * self.d2)
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn powi(self, n: u32) -> Self {
        match n {
            0 => Self::constant(1.0),
            1 => self,
            _ => {
                let x = self.value;
                let nf = n as f64;
                let xm2 = x.powi(n as i32 - 2);
                let xm1 = xm2 * x;
                self.chain(xm1 * x, nf * xm1, nf * (nf - 1.0) * xm2)
            }
        }
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn cosh(self) -> Self {
        let ch = self.value.cosh();
        self.chain(ch, self.value.sinh(), ch)
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

impl Div for Dual2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for Dual2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.d1, -self.d2)
    }
}
