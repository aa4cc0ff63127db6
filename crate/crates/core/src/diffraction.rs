//! Autocorrelation coefficients, the pure point diffraction spectrum and
//! the generalized Poisson summation check for dense combs.
//!
//! Autocorrelation coefficients are `eta(z) = (1/|det L~|) int f(u) conj f(u - z*) du`
//! for `z in L`; the diffraction measure is
//! `sum_{k in L*} |c(k)|^2 delta_k` with `c(k) = f^(-k*) / |det L~|`.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use serde_json::json;

use crate::comb::{truncation_bound, DenseComb, TruncatedValue};
use crate::cps::{Ball, CutProjectScheme, LatticePoint};
use crate::error::{Error, Result};
use crate::model_set::{check_support, Window};
use crate::numerics::linalg::hermitian_min_eigenvalue;
use crate::numerics::{ComplexSum, CompensatedSum};
use crate::scalar::ball_volume;
use crate::weight::{Envelope, WeightFunction};
use crate::Scalar;

/// Autocorrelation values below this magnitude are flushed to zero.
pub const FLUSH_THRESHOLD: f64 = 1e-300;
/// Default direct-space radius for spectrum enumeration.
pub const DEFAULT_K_RADIUS: f64 = 10.0;
/// Largest truncation radius the Poisson check will try.
pub const MAX_POISSON_RADIUS: usize = 100_000;

fn czero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Upper bound on the diameter of a fundamental cell: the sum of the
/// basis column norms.
pub fn cell_diameter<T: Scalar>(s: &CutProjectScheme<T>) -> T {
    let n = s.dim();
    let b = s.basis();
    (0..n)
        .map(|j| (0..n).fold(T::zero(), |acc, i| acc + b[i * n + j] * b[i * n + j]).sqrt())
        .fold(T::zero(), |acc, v| acc + v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutocorrValue<T> {
    pub value: Complex<T>,
    pub error: T,
    /// True when `|eta| < FLUSH_THRESHOLD` and the value was set to zero.
    pub flushed: bool,
}

/// Closed-form coefficient `eta(z)`, by the weight's self-convolution.
pub fn autocorr<T: Scalar>(comb: &DenseComb<T>, z: &LatticePoint) -> Result<AutocorrValue<T>> {
    let zstar = comb.scheme().star(z)?;
    let (v, err) = comb.weight().selfconv(&zstar)?;
    let cov = comb.scheme().covolume();
    let value = v / cov;
    if value.norm() < T::lit(FLUSH_THRESHOLD) {
        return Ok(AutocorrValue { value: czero(), error: err / cov + value.norm(), flushed: !comb.weight().is_zero() });
    }
    Ok(AutocorrValue { value, error: err / cov, flushed: false })
}

/// Lattice points of `B_n(0) x B_s(0)` with their weights, indexed for
/// difference lookups.
struct PointIndex<T> {
    points: Vec<LatticePoint>,
    weights: Vec<Complex<T>>,
    lookup: HashMap<LatticePoint, usize>,
    volume: T,
}

impl<T: Scalar> PointIndex<T> {
    fn build(comb: &DenseComb<T>, n: T, cutoff: T) -> Result<Self> {
        let s = comb.scheme();
        let points = s.enumerate(&Ball::centered(s.dim_direct(), n), &Ball::centered(s.dim_internal(), cutoff))?;
        let weights: Vec<Complex<T>> = points.par_iter().map(|p| comb.weight().eval(&s.star(p).expect("dimension checked"))).collect();
        let lookup = points.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Ok(Self { points, weights, lookup, volume: ball_volume(s.dim_direct(), n) })
    }

    /// `(1/vol(B_n)) sum_{x, x-z in P} f(x*) conj f((x-z)*)`.
    fn eta(&self, z: &LatticePoint) -> Complex<T> {
        let terms: Vec<Complex<T>> = self
            .points
            .par_iter()
            .enumerate()
            .map(|(i, x)| match self.lookup.get(&(x - z)) {
                Some(&j) => self.weights[i] * self.weights[j].conj(),
                None => czero(),
            })
            .collect();
        terms.into_iter().collect::<ComplexSum<T>>().value() / self.volume
    }
}

fn finite_cutoff<T: Scalar>(comb: &DenseComb<T>) -> Result<(T, T)> {
    let eps = comb.default_internal_tol();
    let t = crate::comb::truncation_radius(comb.scheme(), comb.weight(), eps, T::one())?;
    // both factors are truncated; each neglected term is at most sup|f| |f(y*)|
    let bound = T::lit(2.0) * comb.weight().sup_norm() * truncation_bound(comb.scheme(), comb.weight(), T::one(), t.s);
    Ok((t.s, bound))
}

/// Finite-volume coefficient `eta_n(z)`; both `x` and `x - z` range over
/// `L cap B_n(0)` with stars cut off at the comb's truncation radius.
pub fn autocorr_finite<T: Scalar>(comb: &DenseComb<T>, z: &LatticePoint, n: T) -> Result<TruncatedValue<T>> {
    let table = AutocorrelationTable::finite(comb, std::slice::from_ref(z), n)?;
    Ok(TruncatedValue {
        value: table.entries[z],
        truncation_bound: table.error_bound,
        internal_radius: table.cutoff.unwrap_or(T::zero()),
        points: table.points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TableMode<T> {
    FiniteN { n: T },
    ClosedForm,
}

/// Autocorrelation coefficients keyed by integer difference vectors.
#[derive(Debug, Clone)]
pub struct AutocorrelationTable<T> {
    pub entries: BTreeMap<LatticePoint, Complex<T>>,
    pub scheme: String,
    pub weight: String,
    pub mode: TableMode<T>,
    /// Uniform error bound on every entry.
    pub error_bound: T,
    pub cutoff: Option<T>,
    pub points: usize,
    pub flushed: Vec<LatticePoint>,
}

impl<T: Scalar> AutocorrelationTable<T> {
    pub fn finite(comb: &DenseComb<T>, zs: &[LatticePoint], n: T) -> Result<Self> {
        for z in zs {
            if z.dim() != comb.scheme().dim() {
                return Err(Error::DimensionMismatch { expected: comb.scheme().dim(), got: z.dim() });
            }
        }
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidArgument("autocorrelation radius must be positive and finite".into()));
        }
        let (cutoff, bound) = finite_cutoff(comb)?;
        let index = PointIndex::build(comb, n, cutoff)?;
        let entries = zs.iter().map(|z| (z.clone(), index.eta(z))).collect();
        Ok(Self {
            entries,
            scheme: comb.scheme().name().to_string(),
            weight: comb.weight().name().to_string(),
            mode: TableMode::FiniteN { n },
            error_bound: bound,
            cutoff: Some(cutoff),
            points: index.points.len(),
            flushed: Vec::new(),
        })
    }

    pub fn closed_form(comb: &DenseComb<T>, zs: &[LatticePoint]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut flushed = Vec::new();
        let mut error = T::zero();
        for z in zs {
            let v = autocorr(comb, z)?;
            if v.flushed {
                flushed.push(z.clone());
            }
            error = error.max(v.error);
            entries.insert(z.clone(), v.value);
        }
        Ok(Self {
            entries,
            scheme: comb.scheme().name().to_string(),
            weight: comb.weight().name().to_string(),
            mode: TableMode::ClosedForm,
            error_bound: error,
            cutoff: None,
            points: 0,
            flushed,
        })
    }

    /// Table over all differences `z_i - z_j`, ready for
    /// [`gram_min_eigenvalue`](Self::gram_min_eigenvalue).
    pub fn for_gram(comb: &DenseComb<T>, zs: &[LatticePoint], mode: TableMode<T>) -> Result<Self> {
        let mut diffs: Vec<LatticePoint> = zs.iter().flat_map(|a| zs.iter().map(move |b| a - b)).collect();
        diffs.sort();
        diffs.dedup();
        match mode {
            TableMode::FiniteN { n } => Self::finite(comb, &diffs, n),
            TableMode::ClosedForm => Self::closed_form(comb, &diffs),
        }
    }

    pub fn get(&self, z: &LatticePoint) -> Option<Complex<T>> {
        self.entries.get(z).copied()
    }

    /// Smallest eigenvalue of the Hermitian matrix `[eta(z_i - z_j)]`.
    pub fn gram_min_eigenvalue(&self, zs: &[LatticePoint]) -> Result<T> {
        let n = zs.len();
        let mut re = vec![T::zero(); n * n];
        let mut im = vec![T::zero(); n * n];
        for (i, a) in zs.iter().enumerate() {
            for (j, b) in zs.iter().enumerate() {
                let d = a - b;
                let v = self.get(&d).ok_or_else(|| Error::InvalidArgument(format!("difference {d} missing from the table")))?;
                re[i * n + j] = v.re;
                im[i * n + j] = v.im;
            }
        }
        // symmetrize away rounding so the embedding is exactly symmetric
        for i in 0..n {
            for j in 0..i {
                let r = (re[i * n + j] + re[j * n + i]) / T::lit(2.0);
                let m = (im[i * n + j] - im[j * n + i]) / T::lit(2.0);
                re[i * n + j] = r;
                re[j * n + i] = r;
                im[i * n + j] = m;
                im[j * n + i] = -m;
            }
            im[i * n + i] = T::zero();
        }
        Ok(hermitian_min_eigenvalue(&re, &im, n))
    }

    /// Checks `eta(-z) = conj eta(z)`, `|eta(z)| <= eta(0)` and
    /// `eta(0) >= 0` on the stored entries, up to `tol`.
    pub fn check_invariants(&self, tol: T) -> Result<()> {
        let Some(origin) = self.entries.keys().next().map(|z| LatticePoint::origin(z.dim())) else {
            return Ok(());
        };
        let eta0 = self.get(&origin);
        if let Some(e0) = eta0 {
            if e0.re < -tol || e0.im.abs() > tol {
                return Err(Error::Uncertified(format!("eta(0) = {e0} is not a nonnegative real")));
            }
        }
        for (z, v) in &self.entries {
            if let Some(w) = self.get(&-z) {
                if (w - v.conj()).norm() > tol {
                    return Err(Error::Uncertified(format!("eta(-{z}) != conj eta({z})")));
                }
            }
            if let Some(e0) = eta0 {
                if v.norm() > e0.re + tol {
                    return Err(Error::Uncertified(format!("|eta({z})| exceeds eta(0)")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Peak<T> {
    pub k_coords: LatticePoint,
    pub k_direct: Vec<T>,
    pub k_star: Vec<T>,
    pub intensity: T,
}

/// Bragg peaks above an intensity floor inside a bounded region of the
/// dual module.
#[derive(Debug, Clone)]
pub struct DiffractionSpectrum<T> {
    pub peaks: Vec<Peak<T>>,
    pub floor: T,
    pub kstar_radius: T,
    pub k_radius: T,
    pub scheme: String,
    pub weight: String,
    /// Majorant of every intensity with `|k*| > kstar_radius`; below the floor.
    pub completeness_bound: T,
    /// Largest quadrature error of an intensity (zero with closed forms).
    pub intensity_error: T,
    /// Sum over every enumerated `k`, listed or not.
    pub region_total: T,
    pub listed_total: T,
}

fn spectrum_with<T, F>(
    s: &CutProjectScheme<T>,
    f: &WeightFunction<T>,
    floor: T,
    kstar_radius: Option<T>,
    k_radius: T,
    intensity: F,
) -> Result<DiffractionSpectrum<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<(T, T)> + Sync,
{
    if !(floor > T::zero()) {
        return Err(Error::InvalidArgument("intensity floor must be positive".into()));
    }
    if !(k_radius > T::zero()) || !k_radius.is_finite() {
        return Err(Error::InvalidArgument("k radius must be positive and finite".into()));
    }
    let cov = s.covolume();
    let envelope = f
        .transform_envelope()
        .ok_or_else(|| Error::Uncertified(format!("weight `{}` has no transform envelope; spectrum completeness cannot be certified", f.name())))?
        .squared()
        .scale((cov * cov).recip());
    let radius = match kstar_radius {
        Some(r) => {
            if !(envelope.at(r) < floor) {
                return Err(Error::InvalidArgument(format!(
                    "kstar radius {r} too small for floor {floor:e}: intensities up to {:e} lie beyond it",
                    envelope.at(r)
                )));
            }
            r
        }
        None => {
            let r = envelope.radius_below(floor).ok_or_else(|| Error::InvalidArgument("floor must be positive".into()))?;
            let mut r = r * (T::one() + T::lit(1e-9)) + T::lit(1e-12);
            while !(envelope.at(r) < floor) {
                r = r * T::lit(1.0001);
            }
            r
        }
    };
    let dual = s.dual()?;
    let pts = if radius > T::zero() {
        dual.enumerate(&Ball::centered(s.dim_direct(), k_radius), &Ball::centered(s.dim_internal(), radius))?
    } else {
        Vec::new()
    };
    let evaluated: Vec<Result<(Peak<T>, T)>> = pts
        .into_par_iter()
        .map(|k| {
            let k_direct = dual.project_direct(&k)?;
            let k_star = dual.star(&k)?;
            let (value, err) = intensity(&k_star)?;
            Ok((Peak { k_coords: k, k_direct, k_star, intensity: value }, err))
        })
        .collect();
    let mut region = CompensatedSum::new();
    let mut listed = CompensatedSum::new();
    let mut worst = T::zero();
    let mut peaks = Vec::new();
    for item in evaluated {
        let (peak, err) = item?;
        worst = worst.max(err);
        region.add(peak.intensity);
        if peak.intensity >= floor {
            listed.add(peak.intensity);
            peaks.push(peak);
        }
    }
    peaks.sort_by(|a, b| b.intensity.partial_cmp(&a.intensity).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.k_coords.cmp(&b.k_coords)));
    Ok(DiffractionSpectrum {
        peaks,
        floor,
        kstar_radius: radius,
        k_radius,
        scheme: s.name().to_string(),
        weight: f.name().to_string(),
        completeness_bound: envelope.at(radius),
        intensity_error: worst,
        region_total: region.value(),
        listed_total: listed.value(),
    })
}

/// Peaks `|c(k)|^2 = |f^(-k*)|^2 / |det L~|^2` with intensity at least
/// `floor`, over `|k| <= k_radius`. When `kstar_radius` is `None` it is
/// chosen from the transform envelope so that nothing above the floor is
/// missed in that direct range.
pub fn spectrum<T: Scalar>(comb: &DenseComb<T>, floor: T, kstar_radius: Option<T>, k_radius: T) -> Result<DiffractionSpectrum<T>> {
    let cov = comb.scheme().covolume();
    let f = comb.weight();
    spectrum_with(comb.scheme(), f, floor, kstar_radius, k_radius, |kstar| {
        let neg: Vec<T> = kstar.iter().map(|&v| -v).collect();
        let (v, err) = f.transform(&neg)?;
        let c = v.norm() / cov;
        let e = err / cov;
        Ok((c * c, e * (T::lit(2.0) * c + e)))
    })
}

/// Spectrum of the regular model set `Lambda(W)` weighted by `f`, whose
/// support must lie inside `W`.
pub fn spectrum_regular<T: Scalar>(
    s: &CutProjectScheme<T>,
    w: &Window<T>,
    f: &WeightFunction<T>,
    floor: T,
    kstar_radius: Option<T>,
    k_radius: T,
) -> Result<DiffractionSpectrum<T>> {
    s.require_certified()?;
    check_support(w, f)?;
    let cov = s.covolume();
    spectrum_with(s, f, floor, kstar_radius, k_radius, |kstar| {
        let neg: Vec<T> = kstar.iter().map(|&v| -v).collect();
        let (v, err) = f.transform(&neg)?;
        let c = v.norm() / cov;
        let e = err / cov;
        Ok((c * c, e * (T::lit(2.0) * c + e)))
    })
}

impl<T: Scalar> DiffractionSpectrum<T> {
    /// Columns `k_c0..k_c{n-1}, k0..k{d-1}, kstar0..kstar{m-1}, intensity`,
    /// numbers with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let (n, d, m) = match self.peaks.first() {
            Some(p) => (p.k_coords.dim(), p.k_direct.len(), p.k_star.len()),
            None => (0, 0, 0),
        };
        let mut header: Vec<String> = (0..n).map(|i| format!("k_c{i}")).collect();
        header.extend((0..d).map(|i| format!("k{i}")));
        header.extend((0..m).map(|i| format!("kstar{i}")));
        header.push("intensity".into());
        writeln!(out, "{}", header.join(","))?;
        for p in &self.peaks {
            let mut row: Vec<String> = p.k_coords.coords.iter().map(|c| c.to_string()).collect();
            row.extend(p.k_direct.iter().chain(&p.k_star).map(|v| format!("{:.16e}", v.as_f64())));
            row.push(format!("{:.16e}", p.intensity.as_f64()));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let peaks: Vec<serde_json::Value> = self
            .peaks
            .iter()
            .map(|p| {
                json!({
                    "k_coords": p.k_coords.coords,
                    "k": p.k_direct.iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
                    "kstar": p.k_star.iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
                    "intensity": p.intensity.as_f64(),
                })
            })
            .collect();
        json!({
            "scheme": self.scheme,
            "weight": self.weight,
            "floor": self.floor.as_f64(),
            "kstar_radius": self.kstar_radius.as_f64(),
            "k_radius": self.k_radius.as_f64(),
            "completeness_bound": self.completeness_bound.as_f64(),
            "intensity_error": self.intensity_error.as_f64(),
            "region_total": self.region_total.as_f64(),
            "listed_total": self.listed_total.as_f64(),
            "peaks": peaks,
        })
    }
}

/// Truncation radii of the two Poisson sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonRadii<T> {
    pub z_direct: T,
    pub z_internal: T,
    pub k_direct: T,
    pub k_internal: T,
}

impl<T: Scalar> PoissonRadii<T> {
    pub fn uniform(r: T) -> Self {
        Self { z_direct: r, z_internal: r, k_direct: r, k_internal: r }
    }

    pub fn scaled(&self, by: T) -> Self {
        Self {
            z_direct: self.z_direct * by,
            z_internal: self.z_internal * by,
            k_direct: self.k_direct * by,
            k_internal: self.k_internal * by,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonReport<T> {
    pub sigma: T,
    pub tol: T,
    pub lhs: Complex<T>,
    pub rhs: T,
    pub defect: T,
    /// Certified bounds on the neglected parts of each side.
    pub lhs_tail: T,
    pub rhs_tail: T,
    /// Accumulated quadrature error of the evaluated terms.
    pub lhs_quadrature: T,
    pub rhs_quadrature: T,
    pub radii: PoissonRadii<T>,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    pub pass: bool,
}

/// The two lattice-tail majorants of the Poisson sums.
struct PoissonTails<T> {
    // LHS: eta envelope on internal space, test Gaussian on direct space
    eta: Envelope<T>,
    g: Envelope<T>,
    // RHS: |c|^2 envelope on internal space, transformed Gaussian on direct space
    c2: Envelope<T>,
    ghat: Envelope<T>,
    d: usize,
    m: usize,
    cov: T,
    diam: T,
    dual_diam: T,
}

impl<T: Scalar> PoissonTails<T> {
    fn new(comb: &DenseComb<T>, sigma: T) -> Result<Self> {
        let s = comb.scheme();
        let f = comb.weight();
        let cov = s.covolume();
        let d = s.dim_direct();
        let c2 = f
            .transform_envelope()
            .ok_or_else(|| Error::Uncertified(format!("weight `{}` has no transform envelope; the dual tail cannot be bounded", f.name())))?
            .squared()
            .scale((cov * cov).recip());
        Ok(Self {
            eta: f.selfconv_envelope()?.scale(cov.recip()),
            g: Envelope::Gaussian { amp: T::one(), rate: (sigma * sigma).recip() },
            c2,
            ghat: Envelope::Gaussian { amp: sigma.powi(d as i32), rate: sigma * sigma },
            d,
            m: s.dim_internal(),
            cov,
            diam: cell_diameter(s),
            dual_diam: cell_diameter(&s.dual()?),
        })
    }

    fn floor(r: T) -> usize {
        r.floor().to_usize().unwrap_or(0)
    }

    /// Direct-side part of the LHS tail: points with `|z| > r`.
    fn lhs_direct(&self, r: T) -> Result<T> {
        let direct = self.g.shell_sum_bound(Self::floor(r), self.d, self.diam)?;
        let internal = self.eta.shell_sum_bound(0, self.m, self.diam)?;
        Ok(direct * internal / self.cov)
    }

    fn lhs_internal(&self, r: T) -> Result<T> {
        let direct = self.g.shell_sum_bound(0, self.d, self.diam)?;
        let internal = self.eta.shell_sum_bound(Self::floor(r), self.m, self.diam)?;
        Ok(direct * internal / self.cov)
    }

    fn rhs_direct(&self, r: T) -> Result<T> {
        let direct = self.ghat.shell_sum_bound(Self::floor(r), self.d, self.dual_diam)?;
        let internal = self.c2.shell_sum_bound(0, self.m, self.dual_diam)?;
        Ok(direct * internal * self.cov)
    }

    fn rhs_internal(&self, r: T) -> Result<T> {
        let direct = self.ghat.shell_sum_bound(0, self.d, self.dual_diam)?;
        let internal = self.c2.shell_sum_bound(Self::floor(r), self.m, self.dual_diam)?;
        Ok(direct * internal * self.cov)
    }

    fn lhs(&self, radii: &PoissonRadii<T>) -> Result<T> {
        Ok(self.lhs_direct(radii.z_direct)? + self.lhs_internal(radii.z_internal)?)
    }

    fn rhs(&self, radii: &PoissonRadii<T>) -> Result<T> {
        Ok(self.rhs_direct(radii.k_direct)? + self.rhs_internal(radii.k_internal)?)
    }
}

fn smallest_radius<T: Scalar>(budget: T, tail: impl Fn(T) -> Result<T>) -> Result<T> {
    for r in 1..=MAX_POISSON_RADIUS {
        let r = T::int(r as i64);
        if tail(r)? <= budget {
            return Ok(r);
        }
    }
    Err(Error::ToleranceUnreachable(format!("Poisson tail stays above {budget:e} up to radius {MAX_POISSON_RADIUS}")))
}

/// Radii for which each certified tail is at most `tol / 16`.
pub fn poisson_radii<T: Scalar>(comb: &DenseComb<T>, sigma: T, tol: T) -> Result<PoissonRadii<T>> {
    let tails = PoissonTails::new(comb, sigma)?;
    let budget = tol / T::lit(16.0);
    Ok(PoissonRadii {
        z_direct: smallest_radius(budget, |r| tails.lhs_direct(r))?,
        z_internal: smallest_radius(budget, |r| tails.lhs_internal(r))?,
        k_direct: smallest_radius(budget, |r| tails.rhs_direct(r))?,
        k_internal: smallest_radius(budget, |r| tails.rhs_internal(r))?,
    })
}

/// Compares `sum_{z in L} eta(z) g(z)` with `sum_{k in L*} |c(k)|^2 g^(k)`
/// for `g(x) = exp(-pi |x|^2 / sigma^2)`; passes iff the defect is below
/// `tol * max(|lhs|, 1)`. Radii are chosen so that the certified tails
/// stay well inside the tolerance.
pub fn poisson_check<T: Scalar>(comb: &DenseComb<T>, sigma: T, tol: T) -> Result<PoissonReport<T>> {
    if !(sigma > T::zero()) || !(tol > T::zero()) {
        return Err(Error::InvalidArgument("sigma and tol must be positive".into()));
    }
    let radii = poisson_radii(comb, sigma, tol)?;
    poisson_check_with_radii(comb, sigma, tol, radii)
}

pub fn poisson_check_with_radii<T: Scalar>(comb: &DenseComb<T>, sigma: T, tol: T, radii: PoissonRadii<T>) -> Result<PoissonReport<T>> {
    if !(sigma > T::zero()) || !(tol > T::zero()) {
        return Err(Error::InvalidArgument("sigma and tol must be positive".into()));
    }
    let s = comb.scheme();
    let f = comb.weight();
    let d = s.dim_direct();
    let m = s.dim_internal();
    let cov = s.covolume();
    let tails = PoissonTails::new(comb, sigma)?;
    let pi = T::PI();
    let s2 = sigma * sigma;

    let zs = s.enumerate(&Ball::centered(d, radii.z_direct), &Ball::centered(m, radii.z_internal))?;
    let lhs_terms: Vec<Result<(Complex<T>, T)>> = zs
        .par_iter()
        .map(|z| {
            let x = s.project_direct(z)?;
            let g = (-pi * x.iter().fold(T::zero(), |a, &v| a + v * v) / s2).exp();
            let eta = autocorr(comb, z)?;
            Ok((eta.value * g, eta.error * g))
        })
        .collect();
    let mut lhs = ComplexSum::new();
    let mut lhs_quad = CompensatedSum::new();
    for t in lhs_terms {
        let (v, e) = t?;
        lhs.add(v);
        lhs_quad.add(e);
    }

    let dual = s.dual()?;
    let ks = dual.enumerate(&Ball::centered(d, radii.k_direct), &Ball::centered(m, radii.k_internal))?;
    let rhs_terms: Vec<Result<(T, T)>> = ks
        .par_iter()
        .map(|k| {
            let kd = dual.project_direct(k)?;
            let kstar: Vec<T> = dual.star(k)?.into_iter().map(|v| -v).collect();
            let ghat = sigma.powi(d as i32) * (-pi * s2 * kd.iter().fold(T::zero(), |a, &v| a + v * v)).exp();
            let (ft, err) = f.transform(&kstar)?;
            let c = ft.norm() / cov;
            let e = err / cov;
            Ok((c * c * ghat, e * (T::lit(2.0) * c + e) * ghat))
        })
        .collect();
    let mut rhs = CompensatedSum::new();
    let mut rhs_quad = CompensatedSum::new();
    for t in rhs_terms {
        let (v, e) = t?;
        rhs.add(v);
        rhs_quad.add(e);
    }

    let lhs = lhs.value();
    let rhs = rhs.value();
    let defect = (lhs - Complex::new(rhs, T::zero())).norm();
    Ok(PoissonReport {
        sigma,
        tol,
        lhs,
        rhs,
        defect,
        lhs_tail: tails.lhs(&radii)?,
        rhs_tail: tails.rhs(&radii)?,
        lhs_quadrature: lhs_quad.value(),
        rhs_quadrature: rhs_quad.value(),
        radii,
        lhs_terms: zs.len(),
        rhs_terms: ks.len(),
        pass: defect < tol * lhs.norm().max(T::one()),
    })
}

/// Poisson check for the regular model set `Lambda(W)` weighted by `f`
/// supported in `W`: there `eta` vanishes off `Lambda - Lambda`, so the
/// sum over `L` equals the sum over the difference set.
pub fn poisson_check_regular<T: Scalar>(
    s: &CutProjectScheme<T>,
    w: &Window<T>,
    f: &WeightFunction<T>,
    sigma: T,
    tol: T,
) -> Result<PoissonReport<T>> {
    check_support(w, f)?;
    let comb = DenseComb::new(s.clone(), f.clone())?;
    poisson_check(&comb, sigma, tol)
}
