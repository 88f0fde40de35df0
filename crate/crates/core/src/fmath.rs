//! Scalar math routed through `std` when available and `libm` otherwise.

#[cfg(feature = "std")]
mod imp {
    #[inline(always)]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline(always)]
    pub fn cosh(x: f64) -> f64 {
        x.cosh()
    }
    #[inline(always)]
    pub fn sinh(x: f64) -> f64 {
        x.sinh()
    }
    #[inline(always)]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline(always)]
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    #[inline(always)]
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
    #[inline(always)]
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    #[inline(always)]
    pub fn powi(x: f64, n: i32) -> f64 {
        x.powi(n)
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline(always)]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline(always)]
    pub fn cosh(x: f64) -> f64 {
        libm::cosh(x)
    }
    #[inline(always)]
    pub fn sinh(x: f64) -> f64 {
        libm::sinh(x)
    }
    #[inline(always)]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline(always)]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    #[inline(always)]
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    #[inline(always)]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    pub fn powi(x: f64, n: i32) -> f64 {
        let mut acc = 1.0;
        let mut base = if n < 0 { 1.0 / x } else { x };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
}

pub use imp::*;

/// Logistic sigmoid 1/(1+e^-x), saturating cleanly for large |x|.
#[inline(always)]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// sech(x) = 1/cosh(x).
#[inline(always)]
pub fn sech(x: f64) -> f64 {
    1.0 / cosh(x)
}

#[inline(always)]
pub fn hypot2(a: f64, b: f64) -> f64 {
    sqrt(a * a + b * b)
}

/// Wrap a phase-like value into [0, 1).
#[inline(always)]
pub fn wrap01(x: f64) -> f64 {
    let y = x - floor(x);
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Wrapped distance on the circle of circumference 1.
#[inline(always)]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = abs(wrap01(a) - wrap01(b));
    if d > 0.5 {
        1.0 - d
    } else {
        d
    }
}
