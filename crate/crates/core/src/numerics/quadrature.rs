//! Adaptive Gauss-Kronrod quadrature with explicit error bounds, and
//! integration over `R^m` of integrands carrying a decay certificate.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::unit_sphere_area;
use crate::Scalar;

/// Default cap on integrand evaluations for a single integral.
pub const DEFAULT_MAX_EVALUATIONS: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    pub value: Complex<T>,
    pub error_bound: T,
    pub evaluations: usize,
}

/// `|g(y)| <= c / (1 + |y|)^(m + beta)` on `R^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCertificate<T> {
    pub c: T,
    pub beta: T,
}

impl<T: Scalar> DecayCertificate<T> {
    /// Bound on `int_{|y| > radius} |g|` over `R^m`.
    pub fn tail_bound(&self, dim: usize, radius: T) -> T {
        if self.c == T::zero() {
            return T::zero();
        }
        unit_sphere_area::<T>(dim) * self.c * radius.powf(-self.beta) / self.beta
    }

    /// Smallest radius whose tail bound is at most `target`.
    pub fn radius_for(&self, dim: usize, target: T) -> T {
        let a = unit_sphere_area::<T>(dim);
        (a * self.c / (self.beta * target)).powf(self.beta.recip())
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: Complex<T>,
    error: T,
}

impl<T: Scalar> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Scalar> Eq for Panel<T> {}
impl<T: Scalar> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

// QUADPACK-style rescaling of the raw |K - G| difference.
fn rescale<T: Scalar>(diff: T, resabs: T, resasc: T) -> T {
    let mut err = diff.abs();
    if resasc != T::zero() && err != T::zero() {
        let scale = (T::lit(200.0) * err / resasc).powf(T::lit(1.5));
        err = if scale < T::one() { resasc * scale } else { resasc };
    }
    let floor = T::lit(50.0) * T::epsilon() * resabs;
    if resabs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) && floor > err {
        err = floor;
    }
    err
}

fn gk21<T: Scalar, F: Fn(T) -> Complex<T>>(g: &F, a: T, b: T) -> Panel<T> {
    let half = (b - a) * T::lit(0.5);
    let center = (a + b) * T::lit(0.5);
    let fc = g(center);
    let mut kron = fc * T::lit(WGK[10]);
    let mut gauss = Complex::new(T::zero(), T::zero());
    let mut abs_re = fc.re.abs() * T::lit(WGK[10]);
    let mut abs_im = fc.im.abs() * T::lit(WGK[10]);
    let mut pairs = [(Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero())); 10];
    for (j, pair) in pairs.iter_mut().enumerate() {
        let dx = half * T::lit(XGK[j]);
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        let w = T::lit(WGK[j]);
        kron = kron + (f1 + f2) * w;
        abs_re += w * (f1.re.abs() + f2.re.abs());
        abs_im += w * (f1.im.abs() + f2.im.abs());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * T::lit(WG[j / 2]);
        }
        *pair = (f1, f2);
    }
    let mean = kron * T::lit(0.5);
    let mut asc_re = T::lit(WGK[10]) * (fc.re - mean.re).abs();
    let mut asc_im = T::lit(WGK[10]) * (fc.im - mean.im).abs();
    for (j, (f1, f2)) in pairs.iter().enumerate() {
        let w = T::lit(WGK[j]);
        asc_re += w * ((f1.re - mean.re).abs() + (f2.re - mean.re).abs());
        asc_im += w * ((f1.im - mean.im).abs() + (f2.im - mean.im).abs());
    }
    let h = half.abs();
    let err_re = rescale((kron.re - gauss.re) * h, abs_re * h, asc_re * h);
    let err_im = rescale((kron.im - gauss.im) * h, abs_im * h, asc_im * h);
    Panel { a, b, value: kron * half, error: err_re + err_im }
}

/// Adaptive GK21 quadrature of a complex integrand over `[a, b]`.
///
/// The interval is first cut into `initial_panels` equal pieces; the
/// panel with the largest error estimate is bisected until the summed
/// estimate drops below `tol` or the evaluation cap is hit.
pub fn integrate_interval<T, F>(
    g: F,
    a: T,
    b: T,
    tol: T,
    initial_panels: usize,
    max_evaluations: usize,
) -> Result<QuadratureResult<T>>
where
    T: Scalar,
    F: Fn(T) -> Complex<T>,
{
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    if a == b {
        return Ok(QuadratureResult { value: Complex::new(T::zero(), T::zero()), error_bound: T::zero(), evaluations: 0 });
    }
    let n0 = initial_panels.max(1);
    let width = (b - a) / T::int(n0 as i64);
    let mut heap = BinaryHeap::with_capacity(4 * n0);
    let mut evaluations = 0usize;
    for i in 0..n0 {
        let lo = a + width * T::int(i as i64);
        let hi = if i + 1 == n0 { b } else { a + width * T::int(i as i64 + 1) };
        heap.push(gk21(&g, lo, hi));
        evaluations += 21;
    }
    loop {
        let total_err: T = heap.iter().map(|p| p.error).fold(T::zero(), |s, e| s + e);
        if total_err <= tol {
            return Ok(finish(heap, evaluations));
        }
        if evaluations + 42 > max_evaluations {
            return Err(Error::Quadrature { bound: total_err.as_f64(), evaluations });
        }
        let worst = heap.pop().expect("nonempty panel set");
        let mid = (worst.a + worst.b) * T::lit(0.5);
        if mid <= worst.a || mid >= worst.b {
            // interval no longer divisible; keep its estimate
            heap.push(worst);
            return Err(Error::Quadrature { bound: total_err.as_f64(), evaluations });
        }
        heap.push(gk21(&g, worst.a, mid));
        heap.push(gk21(&g, mid, worst.b));
        evaluations += 42;
    }
}

fn finish<T: Scalar>(heap: BinaryHeap<Panel<T>>, evaluations: usize) -> QuadratureResult<T> {
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
    let mut re = super::CompensatedSum::new();
    let mut im = super::CompensatedSum::new();
    let mut err = T::zero();
    for p in &panels {
        re.add(p.value.re);
        im.add(p.value.im);
        err += p.error;
    }
    QuadratureResult { value: Complex::new(re.value(), im.value()), error_bound: err, evaluations }
}

/// Integrates `g` over the box `[-half_width, half_width]^dim` by nested
/// one-dimensional adaptive quadrature.
pub fn integrate_cube<T, F>(g: &F, dim: usize, half_width: T, tol: T, max_evaluations: usize) -> Result<QuadratureResult<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Complex<T>,
{
    let mut point = vec![T::zero(); dim];
    let evals = Cell::new(0usize);
    let failed = Cell::new(None::<Error>);
    let res = nested(g, &mut point, 0, half_width, tol, max_evaluations, &evals, &failed);
    if let Some(e) = failed.take() {
        return Err(e);
    }
    let mut r = res?;
    r.evaluations = evals.get().max(r.evaluations);
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn nested<T, F>(
    g: &F,
    point: &mut Vec<T>,
    axis: usize,
    y: T,
    tol: T,
    max_evaluations: usize,
    evals: &Cell<usize>,
    failed: &Cell<Option<Error>>,
) -> Result<QuadratureResult<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Complex<T>,
{
    let dim = point.len();
    if axis + 1 == dim {
        let base = point.clone();
        let r = integrate_interval(
            |t| {
                let mut p = base.clone();
                p[axis] = t;
                g(&p)
            },
            -y,
            y,
            tol,
            8,
            max_evaluations.saturating_sub(evals.get()),
        )?;
        evals.set(evals.get() + r.evaluations);
        return Ok(r);
    }
    // inner tolerance: the inner errors integrate over a segment of length 2y
    let inner_tol = tol / (T::lit(4.0) * y);
    let worst_inner = Cell::new(T::zero());
    let base = point.clone();
    let outer = integrate_interval(
        |t| {
            let mut p = base.clone();
            p[axis] = t;
            match nested(g, &mut p, axis + 1, y, inner_tol, max_evaluations, evals, failed) {
                Ok(r) => {
                    if r.error_bound > worst_inner.get() {
                        worst_inner.set(r.error_bound);
                    }
                    r.value
                }
                Err(e) => {
                    failed.set(Some(e));
                    Complex::new(T::zero(), T::zero())
                }
            }
        },
        -y,
        y,
        tol * T::lit(0.5),
        4,
        max_evaluations,
    )?;
    Ok(QuadratureResult {
        value: outer.value,
        error_bound: outer.error_bound + T::lit(2.0) * y * worst_inner.get(),
        evaluations: evals.get(),
    })
}

/// Integrates `g` over all of `R^dim`, where `g` satisfies `cert`.
///
/// The domain is cut at the radius where the certified tail drops to
/// `tol / 2`; the remaining budget goes to the quadrature on the cube.
pub fn integrate_decaying<T, F>(g: F, dim: usize, cert: DecayCertificate<T>, tol: T) -> Result<QuadratureResult<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Complex<T>,
{
    integrate_decaying_capped(g, dim, cert, tol, DEFAULT_MAX_EVALUATIONS)
}

pub fn integrate_decaying_capped<T, F>(
    g: F,
    dim: usize,
    cert: DecayCertificate<T>,
    tol: T,
    max_evaluations: usize,
) -> Result<QuadratureResult<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Complex<T>,
{
    if dim == 0 {
        return Err(Error::InvalidArgument("integration dimension must be at least 1".into()));
    }
    if !(cert.beta > T::zero()) || cert.c < T::zero() {
        return Err(Error::InvalidArgument("decay certificate needs c >= 0 and beta > 0".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("quadrature tolerance must be positive".into()));
    }
    if cert.c == T::zero() {
        return Ok(QuadratureResult { value: Complex::new(T::zero(), T::zero()), error_bound: T::zero(), evaluations: 0 });
    }
    let half = tol * T::lit(0.5);
    let y = cert.radius_for(dim, half).max(T::one());
    let tail = cert.tail_bound(dim, y);
    let inner = if dim == 1 {
        integrate_interval(|t| g(&[t]), -y, y, half, 16, max_evaluations)?
    } else {
        integrate_cube(&g, dim, y, half, max_evaluations)?
    };
    Ok(QuadratureResult { value: inner.value, error_bound: inner.error_bound + tail, evaluations: inner.evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real<T: Scalar>(x: T) -> Complex<T> {
        Complex::new(x, T::zero())
    }

    fn gaussian_cert() -> DecayCertificate<f64> {
        // max_y (1+y)^11 exp(-pi y^2) ~= 91.6
        DecayCertificate { c: 100.0, beta: 10.0 }
    }

    #[test]
    fn gaussian_integral_is_one() {
        let r = integrate_decaying(|y: &[f64]| real((-std::f64::consts::PI * y[0] * y[0]).exp()), 1, gaussian_cert(), 1e-13)
            .unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-12, "{:?}", r);
        assert!(r.error_bound >= (r.value.re - 1.0).abs());
        assert!(r.error_bound < 1e-13);
    }

    #[test]
    fn half_width_gaussian() {
        // max_y (1+y)^11 exp(-y^2/2) ~= 4.8e4
        let cert = DecayCertificate { c: 5.0e4, beta: 10.0 };
        let r = integrate_decaying(|y: &[f64]| real((-y[0] * y[0] / 2.0).exp()), 1, cert, 1e-11).unwrap();
        let want = (2.0 * std::f64::consts::PI).sqrt();
        assert!((r.value.re - want).abs() < 1e-10);
        assert!(r.error_bound >= (r.value.re - want).abs());
    }

    #[test]
    fn zero_integrand_zero_bound() {
        let r = integrate_decaying(|_: &[f64]| real(0.0), 1, DecayCertificate { c: 0.0, beta: 1.0 }, 1e-9).unwrap();
        assert_eq!(r.value, real(0.0));
        assert_eq!(r.error_bound, 0.0);
        let r = integrate_decaying(|_: &[f64]| real(0.0), 1, DecayCertificate { c: 1.0, beta: 1.0 }, 1e-6).unwrap();
        assert_eq!(r.value, real(0.0));
        assert!(r.error_bound <= 1e-6);
    }

    #[test]
    fn refining_tolerance_does_not_grow_bound() {
        let g = |y: &[f64]| real(1.0 / (1.0 + y[0] * y[0]).powi(2));
        let cert = DecayCertificate { c: 4.0, beta: 3.0 };
        let mut prev = f64::INFINITY;
        for tol in [1e-4, 1e-6, 1e-8, 1e-10] {
            let r = integrate_decaying(g, 1, cert, tol).unwrap();
            assert!(r.error_bound <= prev);
            assert!((r.value.re - std::f64::consts::PI / 2.0).abs() <= r.error_bound);
            prev = r.error_bound;
        }
    }

    #[test]
    fn two_dimensional_gaussian() {
        let g = |y: &[f64]| real((-std::f64::consts::PI * (y[0] * y[0] + y[1] * y[1])).exp());
        let cert = DecayCertificate { c: 200.0, beta: 10.0 };
        let r = integrate_decaying(g, 2, cert, 1e-8).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-8, "{:?}", r);
    }

    #[test]
    fn complex_oscillatory_interval() {
        // int_0^1 e^{2 pi i 3 t} dt = 0
        let r = integrate_interval(
            |t: f64| Complex::new(0.0, 2.0 * std::f64::consts::PI * 3.0 * t).exp(),
            0.0,
            1.0,
            1e-12,
            1,
            100_000,
        )
        .unwrap();
        assert!(r.value.norm() < 1e-12);
    }

    #[test]
    fn evaluation_cap_is_reported() {
        let r = integrate_interval(|t: f64| real(t.abs().sqrt().recip()), -1.0, 1.0, 1e-14, 1, 200);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
