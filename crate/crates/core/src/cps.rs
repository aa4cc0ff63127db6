//! Cut-and-project schemes: a lattice in direct x internal space, its two
//! projections, the star map and the dual scheme.
//!
//! Lattice points are always held as exact integer coefficient vectors
//! with respect to the basis; real positions are derived on demand.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numerics::linalg;
use crate::scalar::ball_volume;
use crate::Scalar;

/// Absolute tolerance on norms when deciding closed-ball membership.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Largest accepted `||B||_1 ||B^-1||_1` when dualising.
pub const MAX_CONDITION: f64 = 1e12;

/// Default cap on the number of points a single enumeration may produce.
pub const DEFAULT_POINT_CAP: usize = 20_000_000;

/// A point of the embedding lattice, as integer coefficients of the basis
/// columns. Ordering is lexicographic in the coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
}

impl LatticePoint {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        Self { coords: coords.into() }
    }

    pub fn origin(dim: usize) -> Self {
        Self { coords: vec![0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_origin(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(coords: Vec<i64>) -> Self {
        Self { coords }
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(coords: [i64; N]) -> Self {
        Self { coords: coords.to_vec() }
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        LatticePoint { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        LatticePoint { coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint { coords: self.coords.iter().map(|c| -c).collect() }
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn new(center: impl Into<Vec<T>>, radius: T) -> Self {
        Self { center: center.into(), radius }
    }

    pub fn centered(dim: usize, radius: T) -> Self {
        Self { center: vec![T::zero(); dim], radius }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> T {
        ball_volume(self.dim(), self.radius)
    }

    /// Membership with the absolute boundary tolerance [`BOUNDARY_TOL`].
    pub fn contains(&self, x: &[T]) -> bool {
        distance(x, &self.center) <= self.radius + T::lit(BOUNDARY_TOL)
    }
}

pub(crate) fn distance<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(a, b)| (*a - *b) * (*a - *b)).fold(T::zero(), |s, v| s + v).sqrt()
}

/// A lattice `L~` in `R^d x R^m` given by a nonsingular basis whose columns
/// generate it. The first `d` rows are direct space, the last `m` internal.
#[derive(Debug, Clone, PartialEq)]
pub struct CutProjectScheme<T> {
    name: String,
    dim_direct: usize,
    dim_internal: usize,
    basis: Vec<T>,
    inverse: Vec<T>,
    certified: bool,
}

impl<T: Scalar> CutProjectScheme<T> {
    /// The Fibonacci scheme: `Z[tau]` embedded as `{(x, x*)}` with basis
    /// columns `(1, 1)` and `(tau, 1 - tau)`. The star map is the Galois
    /// conjugation `sqrt 5 -> -sqrt 5`.
    pub fn fibonacci() -> Self {
        let tau = T::golden();
        let basis = vec![T::one(), tau, T::one(), T::one() - tau];
        let mut s = Self::build("fibonacci", 1, 1, basis).expect("fibonacci basis is nonsingular");
        s.certified = true;
        s
    }

    /// Arbitrary basis, row-major `(d+m) x (d+m)`. The result is flagged
    /// uncertified: injectivity of the direct projection and density of the
    /// internal image cannot be decided from floating-point data.
    pub fn from_basis(name: impl Into<String>, dim_direct: usize, dim_internal: usize, basis: Vec<T>) -> Result<Self> {
        Self::build(name, dim_direct, dim_internal, basis)
    }

    fn build(name: impl Into<String>, dim_direct: usize, dim_internal: usize, basis: Vec<T>) -> Result<Self> {
        if dim_direct == 0 || dim_internal == 0 {
            return Err(Error::InvalidArgument("direct and internal dimensions must be at least 1".into()));
        }
        let n = dim_direct + dim_internal;
        if basis.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: basis.len() });
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("basis entries must be finite".into()));
        }
        let det = linalg::determinant(&basis, n);
        let col_norms = (0..n)
            .map(|j| (0..n).map(|i| basis[i * n + j] * basis[i * n + j]).fold(T::zero(), |s, v| s + v).sqrt())
            .fold(T::one(), |p, v| p * v);
        if !(det.abs() > T::lit(1e-15) * col_norms) {
            return Err(Error::SingularBasis(det.abs().as_f64()));
        }
        let inverse = linalg::inverse(&basis, n)?;
        Ok(Self { name: name.into(), dim_direct, dim_internal, basis, inverse, certified: false })
    }

    /// Marks the scheme as a valid cut-and-project scheme. The caller
    /// asserts the injectivity and density conditions.
    pub fn certify(mut self) -> Self {
        self.certified = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_direct(&self) -> usize {
        self.dim_direct
    }

    pub fn dim_internal(&self) -> usize {
        self.dim_internal
    }

    /// `d + m`.
    pub fn dim(&self) -> usize {
        self.dim_direct + self.dim_internal
    }

    /// Row-major basis matrix.
    pub fn basis(&self) -> &[T] {
        &self.basis
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn require_certified(&self) -> Result<()> {
        if self.certified {
            Ok(())
        } else {
            Err(Error::Uncertified(format!("scheme `{}` is not marked as a cut-and-project scheme", self.name)))
        }
    }

    /// `|det L~|`, the volume of a fundamental domain.
    pub fn covolume(&self) -> T {
        linalg::determinant(&self.basis, self.dim()).abs()
    }

    fn check(&self, p: &LatticePoint) -> Result<()> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        Ok(())
    }

    fn rows(&self, p: &LatticePoint, rows: std::ops::Range<usize>) -> Vec<T> {
        let n = self.dim();
        rows.map(|i| {
            p.coords
                .iter()
                .enumerate()
                .map(|(j, &c)| self.basis[i * n + j] * T::int(c))
                .fold(T::zero(), |s, v| s + v)
        })
        .collect()
    }

    /// Full embedded position `B c` in `R^(d+m)`.
    pub fn position(&self, p: &LatticePoint) -> Result<Vec<T>> {
        self.check(p)?;
        Ok(self.rows(p, 0..self.dim()))
    }

    /// Direct-space position `x = pi_1(B c)`.
    pub fn project_direct(&self, p: &LatticePoint) -> Result<Vec<T>> {
        self.check(p)?;
        Ok(self.rows(p, 0..self.dim_direct))
    }

    /// Star image `x* = pi_2(B c)`.
    pub fn star(&self, p: &LatticePoint) -> Result<Vec<T>> {
        self.check(p)?;
        Ok(self.rows(p, self.dim_direct..self.dim()))
    }

    /// Dual scheme: basis `B^{-T}`, so that `B_dual^T B = I`.
    pub fn dual(&self) -> Result<Self> {
        let n = self.dim();
        let estimate = linalg::norm_one(&self.basis, n) * linalg::norm_one(&self.inverse, n);
        if estimate.as_f64() > MAX_CONDITION {
            return Err(Error::IllConditioned { estimate: estimate.as_f64(), bound: MAX_CONDITION });
        }
        let basis = linalg::transpose(&self.inverse, n);
        let name = match self.name.strip_prefix("dual(").and_then(|s| s.strip_suffix(')')) {
            Some(inner) => inner.to_string(),
            None => format!("dual({})", self.name),
        };
        let mut dual = Self::build(name, self.dim_direct, self.dim_internal, basis)?;
        dual.certified = self.certified;
        Ok(dual)
    }

    /// Integer coefficient range per axis covering the product of balls.
    fn coefficient_box(&self, direct: &Ball<T>, internal: &Ball<T>) -> Vec<(i64, i64)> {
        let n = self.dim();
        let d = self.dim_direct;
        let center: Vec<T> = direct.center.iter().chain(&internal.center).copied().collect();
        let half: Vec<T> = (0..n).map(|j| if j < d { direct.radius } else { internal.radius }).collect();
        let slack = T::lit(1e-9);
        (0..n)
            .map(|i| {
                let mid = (0..n).map(|j| self.inverse[i * n + j] * center[j]).fold(T::zero(), |s, v| s + v);
                let ext = (0..n).map(|j| self.inverse[i * n + j].abs() * half[j]).fold(T::zero(), |s, v| s + v);
                let lo = (mid - ext - slack).ceil();
                let hi = (mid + ext + slack).floor();
                (lo.to_i64().unwrap_or(i64::MIN / 4), hi.to_i64().unwrap_or(i64::MAX / 4))
            })
            .collect()
    }

    /// Expected number of lattice points in the product region.
    pub fn expected_count(&self, direct: &Ball<T>, internal: &Ball<T>) -> T {
        direct.volume() * internal.volume() / self.covolume()
    }

    /// All lattice points whose direct position lies in `direct` and whose
    /// star lies in `internal` (closed balls), sorted lexicographically.
    pub fn enumerate(&self, direct: &Ball<T>, internal: &Ball<T>) -> Result<Vec<LatticePoint>> {
        self.enumerate_capped(direct, internal, DEFAULT_POINT_CAP)
    }

    pub fn enumerate_capped(&self, direct: &Ball<T>, internal: &Ball<T>, cap: usize) -> Result<Vec<LatticePoint>> {
        if direct.dim() != self.dim_direct {
            return Err(Error::DimensionMismatch { expected: self.dim_direct, got: direct.dim() });
        }
        if internal.dim() != self.dim_internal {
            return Err(Error::DimensionMismatch { expected: self.dim_internal, got: internal.dim() });
        }
        for r in [direct.radius, internal.radius] {
            if !(r > T::zero()) || !r.is_finite() {
                return Err(Error::InvalidArgument("ball radii must be positive and finite".into()));
            }
        }
        let expected = self.expected_count(direct, internal).as_f64();
        if expected > cap as f64 {
            return Err(Error::ResourceCap { what: "lattice enumeration", needed: expected, cap });
        }
        let n = self.dim();
        let bounds = self.coefficient_box(direct, internal);
        let outer = &bounds[..n - 1];
        let outer_count = outer.iter().map(|(lo, hi)| (hi - lo + 1).max(0) as f64).product::<f64>();
        // each outer prefix costs a couple of quadratic solves
        if outer_count > 16.0 * cap as f64 {
            return Err(Error::ResourceCap { what: "enumeration bounding box", needed: outer_count, cap: 16 * cap });
        }
        if outer.iter().any(|(lo, hi)| hi < lo) {
            return Ok(Vec::new());
        }
        let outer_count = outer_count as usize;
        let mut points: Vec<LatticePoint> = (0..outer_count)
            .into_par_iter()
            .map(|index| {
                let mut prefix = Vec::with_capacity(n);
                let mut rest = index;
                for &(lo, hi) in outer.iter().rev() {
                    let span = (hi - lo + 1) as usize;
                    prefix.push(lo + (rest % span) as i64);
                    rest /= span;
                }
                prefix.reverse();
                self.complete_prefix(&prefix, direct, internal)
            })
            .flatten_iter()
            .collect();
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        points.sort_unstable();
        if points.len() > cap {
            return Err(Error::ResourceCap { what: "lattice enumeration", needed: points.len() as f64, cap });
        }
        Ok(points)
    }

    /// Solves for the admissible range of the last coefficient given the
    /// others, then checks each candidate against both balls.
    fn complete_prefix(&self, prefix: &[i64], direct: &Ball<T>, internal: &Ball<T>) -> Vec<LatticePoint> {
        let n = self.dim();
        let d = self.dim_direct;
        let last = n - 1;
        let base: Vec<T> = (0..n)
            .map(|i| prefix.iter().enumerate().map(|(j, &c)| self.basis[i * n + j] * T::int(c)).fold(T::zero(), |s, v| s + v))
            .collect();
        let col: Vec<T> = (0..n).map(|i| self.basis[i * n + last]).collect();
        let tol = T::lit(BOUNDARY_TOL);
        let ranges = [
            solve_range(&base[..d], &col[..d], &direct.center, direct.radius + tol),
            solve_range(&base[d..], &col[d..], &internal.center, internal.radius + tol),
        ];
        let (mut lo, mut hi) = (T::neg_infinity(), T::infinity());
        for r in ranges {
            match r {
                None => return Vec::new(),
                Some((a, b)) => {
                    lo = lo.max(a);
                    hi = hi.min(b);
                }
            }
        }
        if !(lo.is_finite() && hi.is_finite()) || lo > hi + T::one() {
            return Vec::new();
        }
        let slack = T::lit(1e-9);
        let start = (lo - slack).ceil().to_i64().unwrap_or(0);
        let end = (hi + slack).floor().to_i64().unwrap_or(-1);
        let mut out = Vec::new();
        let mut coords = prefix.to_vec();
        coords.push(0);
        for s in start..=end {
            coords[last] = s;
            let x: Vec<T> = (0..n).map(|i| base[i] + col[i] * T::int(s)).collect();
            if direct.contains(&x[..d]) && internal.contains(&x[d..]) {
                out.push(LatticePoint::new(coords.clone()));
            }
        }
        out
    }
}

/// Range of `s` with `|base + s col - center| <= radius`, if any.
fn solve_range<T: Scalar>(base: &[T], col: &[T], center: &[T], radius: T) -> Option<(T, T)> {
    let mut a = T::zero();
    let mut b = T::zero();
    let mut c = -radius * radius;
    for ((&x0, &v), &m) in base.iter().zip(col).zip(center) {
        let off = x0 - m;
        a += v * v;
        b += v * off;
        c += off * off;
    }
    if a == T::zero() {
        return if c <= T::zero() { Some((T::neg_infinity(), T::infinity())) } else { None };
    }
    let disc = b * b - a * c;
    if disc < T::zero() {
        return None;
    }
    let root = disc.sqrt();
    Some(((-b - root) / a, (-b + root) / a))
}

#[derive(Debug, Deserialize)]
struct SchemeFile {
    name: String,
    d: usize,
    m: usize,
    basis: Vec<f64>,
    #[serde(default)]
    certified: bool,
}

impl<T: Scalar> CutProjectScheme<T> {
    /// Serializes as JSON with basis entries at 17 significant digits.
    pub fn to_json(&self) -> String {
        let entries: Vec<String> = self.basis.iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
        format!(
            "{{\n  \"name\": {},\n  \"d\": {},\n  \"m\": {},\n  \"basis\": [{}],\n  \"certified\": {}\n}}\n",
            serde_json::Value::String(self.name.clone()),
            self.dim_direct,
            self.dim_internal,
            entries.join(", "),
            self.certified
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SchemeFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let basis = file.basis.iter().map(|&v| T::lit(v)).collect();
        let mut s = Self::build(file.name, file.d, file.m, basis)?;
        s.certified = file.certified;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = 1.618_033_988_749_895;

    fn fib() -> CutProjectScheme<f64> {
        CutProjectScheme::fibonacci()
    }

    #[test]
    fn fibonacci_basics() {
        let s = fib();
        assert!(s.is_certified());
        assert!((s.covolume() - 5f64.sqrt()).abs() < 1e-14);
        assert_eq!(s.star(&[1, 0].into()).unwrap(), vec![1.0]);
        assert!((s.star(&[0, 1].into()).unwrap()[0] - (1.0 - TAU)).abs() < 1e-15);
        assert!((s.project_direct(&[2, 1].into()).unwrap()[0] - 3.618_033_988_749_895).abs() < 1e-14);
        assert!((s.star(&[2, 1].into()).unwrap()[0] - 1.381_966_011_250_105).abs() < 1e-14);
        assert!((s.star(&[-1, 1].into()).unwrap()[0] + TAU).abs() < 1e-14);
        assert_eq!(s.project_direct(&[0, 0].into()).unwrap(), vec![0.0]);
        assert_eq!(s.project_direct(&[1, 0].into()).unwrap(), vec![1.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let s = fib();
        assert!(matches!(s.star(&[1, 2, 3].into()), Err(Error::DimensionMismatch { .. })));
        assert!(s.project_direct(&[1].into()).is_err());
    }

    #[test]
    fn dual_is_inverse_transpose() {
        let s = fib();
        let d = s.dual().unwrap();
        assert!((d.covolume() - 1.0 / 5f64.sqrt()).abs() < 1e-14);
        let g = linalg::matmul(&linalg::transpose(d.basis(), 2), s.basis(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[i * 2 + j] - want).abs() < 1e-12);
            }
        }
        let dd = d.dual().unwrap();
        assert_eq!(dd.name(), "fibonacci");
        for (a, b) in dd.basis().iter().zip(s.basis()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn ill_conditioned_dual_is_rejected() {
        let s = CutProjectScheme::from_basis("thin", 1, 1, vec![1.0, 1.0, 1.0, 1.0 + 1e-13]).unwrap();
        assert!(matches!(s.dual(), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn covolume_scaling() {
        let id = CutProjectScheme::from_basis("id", 1, 2, vec![1.0_f64, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(!id.is_certified());
        assert!((id.covolume() - 1.0).abs() < 1e-15);
        let scaled: Vec<f64> = fib().basis().iter().map(|v| v * 3.0).collect();
        let s3 = CutProjectScheme::from_basis("s3", 1, 1, scaled).unwrap();
        assert!((s3.covolume() - 9.0 * 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn singular_basis_rejected() {
        let r = CutProjectScheme::from_basis("bad", 1, 1, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(r, Err(Error::SingularBasis(_))));
    }

    #[test]
    fn enumerate_small_region() {
        let s = fib();
        let pts = s.enumerate(&Ball::centered(1, 2.0), &Ball::centered(1, 10.0)).unwrap();
        for c in [[0, 0], [1, 0], [-1, 1], [0, 1], [2, 0], [1, -1]] {
            assert!(pts.contains(&c.into()), "missing {c:?}");
        }
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn enumerate_only_origin() {
        let s = fib();
        let pts = s.enumerate(&Ball::centered(1, 0.1), &Ball::centered(1, 0.5)).unwrap();
        assert_eq!(pts, vec![LatticePoint::origin(2)]);
    }

    #[test]
    fn enumerate_cap() {
        let s = fib();
        let r = s.enumerate_capped(&Ball::centered(1, 1e4), &Ball::centered(1, 1e4), 1000);
        assert!(matches!(r, Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn json_round_trip() {
        let s = fib();
        let text = s.to_json();
        assert!(text.contains("1.6180339887498949e0"));
        let back = CutProjectScheme::<f64>::from_json(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn works_in_single_precision() {
        let s = CutProjectScheme::<f32>::fibonacci();
        assert!((s.covolume() - 5f32.sqrt()).abs() < 1e-5);
        let pts = s.enumerate(&Ball::centered(1, 2.0), &Ball::centered(1, 10.0)).unwrap();
        assert!(pts.contains(&[1, -1].into()));
    }
}
