//! Truncated power and Laurent series with complex coefficients.

use num_complex::Complex;

use crate::scalar::Real;

/// `Σ_{n ≥ low} c[n−low] εⁿ`, truncated after `c.len()` terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Laurent<T> {
    pub low: i32,
    pub c: Vec<Complex<T>>,
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> Laurent<T> {
    pub fn taylor(c: Vec<Complex<T>>) -> Self {
        Laurent { low: 0, c }
    }

    /// Highest order represented, exclusive.
    pub fn high(&self) -> i32 {
        self.low + self.c.len() as i32
    }

    /// Coefficient of `εⁿ`, zero outside the stored window.
    pub fn coeff(&self, n: i32) -> Complex<T> {
        let k = n - self.low;
        if k < 0 || k as usize >= self.c.len() {
            zero()
        } else {
            self.c[k as usize]
        }
    }

    /// Product truncated at the smaller relative precision of the factors.
    pub fn mul(&self, o: &Self) -> Self {
        let len = self.c.len().min(o.c.len());
        let mut c = vec![zero(); len];
        for (i, &x) in self.c.iter().enumerate().take(len) {
            for (j, &y) in o.c.iter().enumerate().take(len - i) {
                c[i + j] = c[i + j] + x * y;
            }
        }
        Laurent {
            low: self.low + o.low,
            c,
        }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Laurent {
            low: self.low,
            c: self.c.iter().map(|&x| x * s).collect(),
        }
    }

    /// Sum over the common window `[max(low), min(high))`.
    pub fn add(&self, o: &Self) -> Self {
        let low = self.low.min(o.low);
        let high = self.high().min(o.high());
        Laurent {
            low,
            c: (low..high).map(|n| self.coeff(n) + o.coeff(n)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(Complex::new(-T::one(), T::zero())))
    }
}

/// Reciprocal of a power series with nonzero constant term.
pub fn inverse<T: Real>(a: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = a.len();
    let mut b = vec![zero::<T>(); n];
    b[0] = a[0].inv();
    for k in 1..n {
        let mut s = zero::<T>();
        for j in 1..=k {
            s = s + a[j] * b[k - j];
        }
        b[k] = -s * b[0];
    }
    b
}

/// Square root of a power series with `a[0] = 1`, branch with value 1 at 0.
pub fn sqrt_unit<T: Real>(a: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = a.len();
    let mut b = vec![zero::<T>(); n];
    b[0] = Complex::new(T::one(), T::zero());
    let two = T::lit(2.0);
    for k in 1..n {
        let mut s = a[k];
        for j in 1..k {
            s = s - b[j] * b[k - j];
        }
        b[k] = s / two;
    }
    b
}

/// Taylor coefficients of the polynomial `Σ p_k λ^k` about `λ = z`.
pub fn shift_poly<T: Real>(p: &[Complex<T>], z: Complex<T>, n: usize) -> Vec<Complex<T>> {
    let mut c = p.to_vec();
    let deg = c.len();
    let mut out = vec![zero::<T>(); n];
    // repeated synthetic division yields the shifted coefficients
    for slot in out.iter_mut().take(deg.min(n)) {
        let mut acc = zero::<T>();
        let m = c.len();
        let mut q = vec![zero::<T>(); m.saturating_sub(1)];
        for k in (0..m).rev() {
            acc = acc * z + c[k];
            if k > 0 {
                q[k - 1] = acc;
            }
        }
        *slot = acc;
        c = q;
    }
    out
}

/// Taylor coefficients of `(z + ε)^k` for any integer `k`, `z ≠ 0` when `k < 0`.
pub fn binomial_power<T: Real>(z: Complex<T>, k: i32, n: usize) -> Vec<Complex<T>> {
    let mut out = vec![zero::<T>(); n];
    if k >= 0 {
        let mut poly = vec![zero::<T>(); k as usize + 1];
        poly[k as usize] = Complex::new(T::one(), T::zero());
        return shift_poly(&poly, z, n);
    }
    // z^k (1 + ε/z)^k
    let mut term = z.powi(k);
    let zi = z.inv();
    let kk = T::from_i32(k).unwrap();
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = term;
        let jf = T::from_usize(j).unwrap();
        term = term * zi * ((kk - jf) / (jf + T::one()));
    }
    out
}

/// Evaluates a power series at `ε`.
pub fn eval<T: Real>(c: &[Complex<T>], eps: Complex<T>) -> Complex<T> {
    c.iter().rev().fold(zero::<T>(), |acc, &x| acc * eps + x)
}
