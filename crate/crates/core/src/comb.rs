//! Weighted dense Dirac combs `omega = sum_{x in L} f(x*) delta_x`.
//!
//! Sums over the dense module are cut off at an internal radius `s`
//! chosen from the weight's decay certificate; the resulting truncation
//! bound is returned with every value.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::cps::{Ball, CutProjectScheme, LatticePoint};
use crate::error::{Error, Result};
use crate::numerics::{tail_sum_bound, ComplexSum};
use crate::scalar::{ball_volume, unit_ball_volume};
use crate::weight::WeightFunction;
use crate::Scalar;

/// Smallest internal cutoff ever used.
pub const MIN_CUTOFF: usize = 3;
/// Largest internal cutoff `truncation_radius` will return.
pub const MAX_CUTOFF: usize = 10_000_000;
/// Relative internal tolerance used when none is given.
pub const DEFAULT_INTERNAL_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// `p` in `|y|^p |f(y)| <= C`.
    pub exponent: f64,
    pub constant: f64,
    /// `(radius, max |y|^p |f(y)| on the sampled sphere)`.
    pub samples: Vec<(f64, f64)>,
    pub pass: bool,
}

impl DecayReport {
    pub fn worst(&self) -> Option<(f64, f64)> {
        self.samples.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Radii probed when no explicit list is given: 20 per decade from
/// `1e-2` to `1e4`.
pub fn default_decay_radii() -> Vec<f64> {
    (0..=120).map(|i| 10f64.powf(-2.0 + i as f64 / 20.0)).collect()
}

/// Checks `|y|^(m+1+alpha) |f(y)| <= C` on spheres of the given radii.
pub fn decay_check<T: Scalar>(f: &WeightFunction<T>, radii: &[T]) -> DecayReport {
    decay_check_exponent(f, radii, f.dim())
}

/// As [`decay_check`] with `m` replaced by `dim`.
pub fn decay_check_exponent<T: Scalar>(f: &WeightFunction<T>, radii: &[T], dim: usize) -> DecayReport {
    let p = T::int(dim as i64) + T::one() + f.decay_alpha();
    let samples: Vec<(f64, f64)> = radii.iter().map(|&r| (r.as_f64(), f.sphere_moment(r, p).as_f64())).collect();
    let c = f.decay_c().as_f64();
    DecayReport { exponent: p.as_f64(), constant: c, pass: samples.iter().all(|&(_, v)| v <= c), samples }
}

/// Cutoff `s` and the bound it guarantees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation<T> {
    pub s: T,
    pub bound: T,
}

/// `2 c C vol (s-2)^-alpha / alpha` with `c = 2 S_m / |det L~|`, which
/// bounds `sum |f(x*)|` over `x in L` with `x` in a direct region of
/// volume `vol` and `|x*| > s`.
pub fn truncation_bound<T: Scalar>(s: &CutProjectScheme<T>, f: &WeightFunction<T>, window_volume: T, cutoff: T) -> T {
    if f.decay_c() == T::zero() {
        return T::zero();
    }
    let c = T::lit(2.0) * unit_ball_volume::<T>(s.dim_internal()) / s.covolume();
    T::lit(2.0) * c * f.decay_c() * window_volume * tail_sum_bound(f.decay_alpha(), cutoff - T::one())
}

/// Smallest integer `s >= 3` whose [`truncation_bound`] is below `epsilon`.
pub fn truncation_radius<T: Scalar>(
    s: &CutProjectScheme<T>,
    f: &WeightFunction<T>,
    epsilon: T,
    window_volume: T,
) -> Result<Truncation<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument("truncation tolerance must be positive".into()));
    }
    let min = T::int(MIN_CUTOFF as i64);
    let bound = |cut: T| truncation_bound(s, f, window_volume, cut);
    if bound(min) < epsilon {
        return Ok(Truncation { s: min, bound: bound(min) });
    }
    // (s-2)^alpha > K / epsilon, K = 2 c C vol / alpha
    let alpha = f.decay_alpha();
    let k = bound(min);
    let x = (k / epsilon).powf(alpha.recip());
    if !(x < T::int(MAX_CUTOFF as i64)) {
        return Err(Error::ToleranceUnreachable(format!(
            "internal cutoff for tolerance {epsilon:e} exceeds {MAX_CUTOFF}"
        )));
    }
    let mut cut = (x.floor() + T::lit(3.0)).max(min);
    while cut > min && bound(cut - T::one()) < epsilon {
        cut -= T::one();
    }
    while !(bound(cut) < epsilon) {
        cut += T::one();
    }
    Ok(Truncation { s: cut, bound: bound(cut) })
}

/// A value together with its certified truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedValue<T> {
    pub value: Complex<T>,
    pub truncation_bound: T,
    pub internal_radius: T,
    pub points: usize,
}

/// A wavevector for the limiting Fourier-Bohr coefficient. Module
/// membership is structural: dual-module points come as integer
/// coordinates; anything else is declared off the module by the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum Wavevector<T> {
    Dual(LatticePoint),
    OffModule(Vec<T>),
}

#[derive(Clone)]
pub struct DenseComb<T> {
    scheme: CutProjectScheme<T>,
    weight: WeightFunction<T>,
    rho: Complex<T>,
    rho_error: T,
    rho_bound: T,
}

impl<T: Scalar> std::fmt::Debug for DenseComb<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DenseComb")
            .field("scheme", &self.scheme.name())
            .field("weight", &self.weight)
            .field("rho", &self.rho)
            .finish()
    }
}

impl<T: Scalar> DenseComb<T> {
    /// Requires a certified scheme, matching internal dimension and a
    /// decay certificate that survives [`default_decay_radii`] with the
    /// exponent `max(d, m) + 1 + alpha`.
    pub fn new(scheme: CutProjectScheme<T>, weight: WeightFunction<T>) -> Result<Self> {
        scheme.require_certified()?;
        if weight.dim() != scheme.dim_internal() {
            return Err(Error::DimensionMismatch { expected: scheme.dim_internal(), got: weight.dim() });
        }
        let radii: Vec<T> = default_decay_radii().into_iter().map(T::lit).collect();
        let exponent_dim = scheme.dim_direct().max(scheme.dim_internal());
        let report = decay_check_exponent(&weight, &radii, exponent_dim);
        if !report.pass {
            let (r, v) = report.worst().unwrap_or((0.0, 0.0));
            return Err(Error::Uncertified(format!(
                "weight `{}` violates its decay certificate: |y|^{} |f| = {v:e} > C = {:e} at |y| = {r:e}",
                weight.name(),
                report.exponent,
                report.constant
            )));
        }
        let cov = scheme.covolume();
        let (integral, err) = weight.integral()?;
        let rho_bound = weight.l1_norm()? / cov;
        Ok(Self { rho: integral / cov, rho_error: err / cov, rho_bound, scheme, weight })
    }

    pub fn scheme(&self) -> &CutProjectScheme<T> {
        &self.scheme
    }

    pub fn weight(&self) -> &WeightFunction<T> {
        &self.weight
    }

    /// Weighted density `(1/|det L~|) int f`.
    pub fn rho(&self) -> Complex<T> {
        self.rho
    }

    pub fn rho_error(&self) -> T {
        self.rho_error
    }

    /// `(1/|det L~|) int |f|`, which bounds every Fourier-Bohr coefficient.
    pub fn rho_bound(&self) -> T {
        self.rho_bound
    }

    /// Default internal tolerance for normalized sums.
    pub fn default_internal_tol(&self) -> T {
        let t = T::lit(DEFAULT_INTERNAL_REL_TOL) * self.rho_bound;
        if t > T::zero() {
            t
        } else {
            T::lit(DEFAULT_INTERNAL_REL_TOL)
        }
    }

    /// `(k, k*)` for a dual-module point.
    pub fn dual_position(&self, k: &LatticePoint) -> Result<(Vec<T>, Vec<T>)> {
        let dual = self.scheme.dual()?;
        Ok((dual.project_direct(k)?, dual.star(k)?))
    }

    /// Evaluates the normalized sum
    /// `(1/vol(B_r)) sum_{x in L cap B_r(a), |x*| <= s} f(x*) e^{-2 pi i k.x}`.
    pub fn finite_sum(&self, k: Option<&[T]>, r: T, a: &[T], cutoff: T) -> Result<TruncatedValue<T>> {
        let d = self.scheme.dim_direct();
        if a.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: a.len() });
        }
        if let Some(k) = k {
            if k.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: k.len() });
            }
        }
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidArgument("radius must be positive and finite".into()));
        }
        let volume = ball_volume::<T>(d, r);
        let bound = truncation_bound(&self.scheme, &self.weight, T::one(), cutoff);
        if self.weight.is_zero() {
            return Ok(TruncatedValue { value: Complex::new(T::zero(), T::zero()), truncation_bound: bound, internal_radius: cutoff, points: 0 });
        }
        let points = self.scheme.enumerate(&Ball::new(a.to_vec(), r), &Ball::centered(self.scheme.dim_internal(), cutoff))?;
        let two_pi = T::lit(2.0) * T::PI();
        let terms: Vec<Complex<T>> = points
            .par_iter()
            .map(|p| {
                let x = self.scheme.position(p).expect("dimension checked");
                let v = self.weight.eval(&x[d..]);
                match k {
                    None => v,
                    Some(k) => {
                        let dot = k.iter().zip(&x[..d]).fold(T::zero(), |acc, (a, b)| acc + *a * *b);
                        v * Complex::from_polar(T::one(), -two_pi * dot)
                    }
                }
            })
            .collect();
        let sum = terms.into_iter().collect::<ComplexSum<T>>().value();
        Ok(TruncatedValue { value: sum / volume, truncation_bound: bound, internal_radius: cutoff, points: points.len() })
    }

    fn cutoff(&self, internal_tol: Option<T>) -> Result<T> {
        let eps = internal_tol.unwrap_or_else(|| self.default_internal_tol());
        Ok(truncation_radius(&self.scheme, &self.weight, eps, T::one())?.s)
    }
}

/// Weyl average over the dense module, `c_r(0)`.
pub fn weyl_dense<T: Scalar>(comb: &DenseComb<T>, r: T, a: &[T]) -> Result<TruncatedValue<T>> {
    weyl_dense_tol(comb, r, a, None)
}

pub fn weyl_dense_tol<T: Scalar>(comb: &DenseComb<T>, r: T, a: &[T], internal_tol: Option<T>) -> Result<TruncatedValue<T>> {
    let s = comb.cutoff(internal_tol)?;
    comb.finite_sum(None, r, a, s)
}

/// Finite-volume Fourier-Bohr coefficient `c_r(k)` for a direct-space `k`.
/// `k = 0` goes through the same path as [`weyl_dense`].
pub fn fourier_bohr_finite<T: Scalar>(comb: &DenseComb<T>, k: &[T], r: T, a: &[T]) -> Result<TruncatedValue<T>> {
    fourier_bohr_finite_tol(comb, k, r, a, None)
}

pub fn fourier_bohr_finite_tol<T: Scalar>(
    comb: &DenseComb<T>,
    k: &[T],
    r: T,
    a: &[T],
    internal_tol: Option<T>,
) -> Result<TruncatedValue<T>> {
    let s = comb.cutoff(internal_tol)?;
    if k.iter().all(|&v| v == T::zero()) {
        return comb.finite_sum(None, r, a, s);
    }
    comb.finite_sum(Some(k), r, a, s)
}

/// Limiting coefficient: `(1/|det L~|) f^(-k*)` on the dual module, zero
/// off it. Returns the value and its quadrature error bound.
pub fn fourier_bohr<T: Scalar>(comb: &DenseComb<T>, k: &Wavevector<T>) -> Result<(Complex<T>, T)> {
    match k {
        Wavevector::OffModule(v) => {
            if v.len() != comb.scheme.dim_direct() {
                return Err(Error::DimensionMismatch { expected: comb.scheme.dim_direct(), got: v.len() });
            }
            Ok((Complex::new(T::zero(), T::zero()), T::zero()))
        }
        Wavevector::Dual(p) => {
            let (_, kstar) = comb.dual_position(p)?;
            let neg: Vec<T> = kstar.iter().map(|&v| -v).collect();
            let (v, err) = comb.weight.transform(&neg)?;
            let cov = comb.scheme.covolume();
            Ok((v / cov, err / cov))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_comb() -> DenseComb<f64> {
        DenseComb::new(CutProjectScheme::fibonacci(), WeightFunction::gaussian(1, 1.0)).unwrap()
    }

    #[test]
    fn decay_check_examples() {
        let radii: Vec<f64> = (1..4000).map(|i| i as f64 * 1e-3).collect();
        // C = 1, alpha = 1: max |y|^3 e^{-pi y^2} = 0.0736157 (scipy) <= 1
        let g = WeightFunction::<f64>::custom("g", 1, |y| Complex::new((-std::f64::consts::PI * y[0] * y[0]).exp(), 0.0), 1.0, 1.0, 1.0);
        let rep = decay_check(&g, &radii);
        assert!(rep.pass);
        assert!((rep.worst().unwrap().1 - 0.073_615_7).abs() < 1e-4);
        assert!(decay_check(&WeightFunction::<f64>::zero(1), &radii).pass);
        let l = decay_check(&WeightFunction::<f64>::lorentzian(), &[1e3]);
        assert!(!l.pass);
        assert!(l.samples[0].1 > 900.0);
        assert!(DenseComb::<f64>::new(CutProjectScheme::fibonacci(), WeightFunction::lorentzian()).is_err());
    }

    #[test]
    fn truncation_radius_examples() {
        let s = CutProjectScheme::<f64>::fibonacci();
        let f = WeightFunction::<f64>::custom("c1", 1, |_| Complex::new(0.0, 0.0), 1.0, 1.0, 1.0);
        // 2 (4/sqrt 5) * 1 * 2 / (s-2) < 1e-3  <=>  s - 2 > 7155.4175...
        let t = truncation_radius(&s, &f, 1e-3, 2.0).unwrap();
        assert_eq!(t.s, 7158.0);
        assert!(t.bound < 1e-3);
        assert!(truncation_bound(&s, &f, 2.0, t.s - 1.0) >= 1e-3);
        assert_eq!(truncation_radius(&s, &f, f64::INFINITY, 2.0).unwrap().s, 3.0);
        assert!(truncation_radius(&s, &f, 1e-12, 2.0).is_err());
        let mut prev = 0.0;
        for i in 0..20 {
            let cut = truncation_radius(&s, &f, 0.5f64.powi(i), 2.0).unwrap().s;
            assert!(cut >= prev);
            prev = cut;
        }
    }

    #[test]
    fn rho_and_bound() {
        let c = gaussian_comb();
        assert!((c.rho().re - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((c.rho_bound() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn small_weyl_sum_and_honest_truncation() {
        let c = gaussian_comb();
        let v = weyl_dense(&c, 500.0, &[0.0]).unwrap();
        assert!((v.value.re - 1.0 / 5f64.sqrt()).abs() < 0.01 / 5f64.sqrt());
        let wide = c.finite_sum(None, 500.0, &[0.0], 2.0 * v.internal_radius).unwrap();
        assert!((wide.value - v.value).norm() <= v.truncation_bound);
        let k0 = fourier_bohr_finite(&c, &[0.0], 500.0, &[0.0]).unwrap();
        assert_eq!(k0.value, v.value);
    }

    #[test]
    fn zero_weight_sums_vanish() {
        let c = DenseComb::new(CutProjectScheme::<f64>::fibonacci(), WeightFunction::zero(1)).unwrap();
        let v = weyl_dense(&c, 1000.0, &[0.0]).unwrap();
        assert_eq!(v.value, Complex::new(0.0, 0.0));
        assert_eq!(v.truncation_bound, 0.0);
    }

    #[test]
    fn limiting_coefficients() {
        let c = gaussian_comb();
        let (v0, _) = fourier_bohr(&c, &Wavevector::Dual(LatticePoint::origin(2))).unwrap();
        assert!((v0 - c.rho()).norm() < 1e-15);
        let k = LatticePoint::new(vec![1, 1]);
        let (kd, ks) = c.dual_position(&k).unwrap();
        let tau = <f64 as Scalar>::golden();
        assert!((kd[0] - tau / 5f64.sqrt()).abs() < 1e-15);
        let (v, _) = fourier_bohr(&c, &Wavevector::Dual(k)).unwrap();
        assert!((v.re - (-std::f64::consts::PI * ks[0] * ks[0]).exp() / 5f64.sqrt()).abs() < 1e-15);
        let (z, _) = fourier_bohr(&c, &Wavevector::OffModule(vec![(-1f64).exp()])).unwrap();
        assert_eq!(z, Complex::new(0.0, 0.0));
    }
}
