//! Compensated accumulation and tail bounds for `sum n^{-(1+alpha)}`.

use num_complex::Complex;

use crate::Scalar;

/// Neumaier (improved Kahan-Babuska) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.carry);
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of complex values, real and imaginary parts separately.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum<T> {
    re: CompensatedSum<T>,
    im: CompensatedSum<T>,
}

impl<T: Scalar> ComplexSum<T> {
    pub fn new() -> Self {
        Self { re: CompensatedSum::new(), im: CompensatedSum::new() }
    }

    #[inline]
    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}

impl<T: Scalar> FromIterator<Complex<T>> for ComplexSum<T> {
    fn from_iter<I: IntoIterator<Item = Complex<T>>>(iter: I) -> Self {
        let mut acc = Self::new();
        for z in iter {
            acc.add(z);
        }
        acc
    }
}

/// Sums a slice in index order with compensation.
pub fn compensated_sum<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().collect::<CompensatedSum<T>>().value()
}

/// Upper bound `(R-1)^{-alpha} / alpha` for `sum_{n >= R} n^{-(1+alpha)}`,
/// from comparison with `int_{R-1}^inf t^{-(1+alpha)} dt`.
///
/// Requires `alpha > 0` and `R >= 2`.
pub fn tail_sum_bound<T: Scalar>(alpha: T, r: T) -> T {
    assert!(alpha > T::zero(), "alpha must be positive");
    assert!(r >= T::lit(2.0), "R must be at least 2");
    (r - T::one()).powf(-alpha) / alpha
}
