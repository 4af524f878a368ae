use num_complex::Complex64;
use rug::{Assign, Float};

/// Complex number with MPFR components of a common precision.
#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        BigComplex {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn one(prec: u32) -> Self {
        BigComplex {
            re: Float::with_val(prec, 1),
            im: Float::new(prec),
        }
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        BigComplex {
            re: Float::with_val(prec, &self.re),
            im: Float::with_val(prec, &self.im),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn mul(&self, other: &BigComplex) -> BigComplex {
        let prec = self.prec();
        BigComplex {
            re: Float::with_val(
                prec,
                self.re.mul_sub_mul_ref(&other.re, &self.im, &other.im),
            ),
            im: Float::with_val(
                prec,
                self.re.mul_add_mul_ref(&other.im, &self.im, &other.re),
            ),
        }
    }

    /// `self += a * b`, using `scratch` to avoid allocation.
    pub fn add_product(&mut self, a: &BigComplex, b: &BigComplex, scratch: &mut Float) {
        scratch.assign(a.re.mul_sub_mul_ref(&b.re, &a.im, &b.im));
        self.re += &*scratch;
        scratch.assign(a.re.mul_add_mul_ref(&b.im, &a.im, &b.re));
        self.im += &*scratch;
    }

    pub fn add_assign(&mut self, other: &BigComplex) {
        self.re += &other.re;
        self.im += &other.im;
    }

    pub fn scale_u32(&mut self, k: u32) {
        self.re *= k;
        self.im *= k;
    }

    pub fn abs(&self, prec: u32) -> Float {
        Float::with_val(prec, self.re.hypot_ref(&self.im))
    }

    /// log2 |z|, `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        let m = self.abs(64);
        if m.is_zero() {
            f64::NEG_INFINITY
        } else {
            m.log2().to_f64()
        }
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}
