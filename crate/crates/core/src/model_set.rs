//! Regular model sets `Lambda(W) = { x in L : x* in W }` and the
//! finite-window averages used as oracles for the dense comb.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;

use crate::cps::{distance, Ball, CutProjectScheme, LatticePoint};
use crate::error::{Error, Result};
use crate::numerics::ComplexSum;
use crate::scalar::ball_volume;
use crate::weight::WeightFunction;
use crate::Scalar;

/// Grid resolution per dimension for the sampled support check.
pub const SUPPORT_GRID: usize = 1000;

/// One coordinate interval of a box window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Scalar> Interval<T> {
    pub fn contains(&self, y: T) -> bool {
        let above = if self.lo_closed { y >= self.lo } else { y > self.lo };
        let below = if self.hi_closed { y <= self.hi } else { y < self.hi };
        above && below
    }

    fn flags(&self) -> &'static str {
        match (self.lo_closed, self.hi_closed) {
            (true, true) => "closed-closed",
            (true, false) => "closed-open",
            (false, true) => "open-closed",
            (false, false) => "open-open",
        }
    }
}

/// Acceptance region in internal space.
#[derive(Debug, Clone, PartialEq)]
pub enum Window<T> {
    /// Closed ball.
    Ball(Ball<T>),
    /// Product of intervals with per-endpoint flags.
    Box(Vec<Interval<T>>),
}

impl<T: Scalar> Window<T> {
    pub fn interval(lo: T, hi: T, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        Self::cuboid(vec![Interval { lo, hi, lo_closed, hi_closed }])
    }

    pub fn cuboid(intervals: Vec<Interval<T>>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidWindow("a box window needs at least one interval".into()));
        }
        for iv in &intervals {
            if !(iv.lo.is_finite() && iv.hi.is_finite()) || !(iv.hi > iv.lo) {
                return Err(Error::InvalidWindow(format!("interval [{}, {}] has no interior", iv.lo, iv.hi)));
            }
        }
        Ok(Window::Box(intervals))
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        if center.is_empty() || !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidWindow("a ball window needs a positive finite radius".into()));
        }
        Ok(Window::Ball(Ball::new(center, radius)))
    }

    /// The half-open Fibonacci window `(-1, tau - 1]`, of length `tau`.
    pub fn fibonacci() -> Self {
        Window::Box(vec![Interval { lo: -T::one(), hi: T::golden() - T::one(), lo_closed: false, hi_closed: true }])
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Ball(b) => b.dim(),
            Window::Box(ivs) => ivs.len(),
        }
    }

    pub fn volume(&self) -> T {
        match self {
            Window::Ball(b) => b.volume(),
            Window::Box(ivs) => ivs.iter().fold(T::one(), |v, iv| v * (iv.hi - iv.lo)),
        }
    }

    /// Exact membership honoring the endpoint flags.
    pub fn contains(&self, y: &[T]) -> bool {
        match self {
            Window::Ball(b) => distance(y, &b.center) <= b.radius,
            Window::Box(ivs) => ivs.iter().zip(y).all(|(iv, &v)| iv.contains(v)),
        }
    }

    /// Smallest ball around the window's center containing it.
    pub fn bounding_ball(&self) -> Ball<T> {
        match self {
            Window::Ball(b) => b.clone(),
            Window::Box(ivs) => {
                let center: Vec<T> = ivs.iter().map(|iv| (iv.lo + iv.hi) / T::lit(2.0)).collect();
                let radius = ivs.iter().fold(T::zero(), |s, iv| {
                    let h = (iv.hi - iv.lo) / T::lit(2.0);
                    s + h * h
                });
                Ball::new(center, radius.sqrt() * (T::one() + T::lit(4.0) * T::epsilon()))
            }
        }
    }

    /// `W + u`.
    pub fn translated(&self, u: &[T]) -> Result<Self> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.len() });
        }
        Ok(match self {
            Window::Ball(b) => Window::Ball(Ball::new(b.center.iter().zip(u).map(|(c, s)| *c + *s).collect::<Vec<_>>(), b.radius)),
            Window::Box(ivs) => Window::Box(
                ivs.iter().zip(u).map(|(iv, &s)| Interval { lo: iv.lo + s, hi: iv.hi + s, ..*iv }).collect(),
            ),
        })
    }
}

impl<T: Scalar> fmt::Display for Window<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Ball(b) => {
                let c: Vec<String> = b.center.iter().map(|v| v.to_string()).collect();
                write!(f, "ball:{}:{}", c.join(","), b.radius)
            }
            Window::Box(ivs) => {
                let head = if ivs.len() == 1 { "interval" } else { "box" };
                write!(f, "{head}")?;
                for iv in ivs {
                    write!(f, ":{}:{}:{}", iv.lo, iv.hi, iv.flags())?;
                }
                Ok(())
            }
        }
    }
}

fn parse_num<T: Scalar>(s: &str) -> Result<T> {
    s.trim().parse::<f64>().map(T::lit).map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

fn parse_flags(s: &str) -> Result<(bool, bool)> {
    let (lo, hi) = s.split_once('-').ok_or_else(|| Error::Parse(format!("endpoint flags `{s}` must look like open-closed")))?;
    let flag = |f: &str| match f {
        "open" => Ok(false),
        "closed" => Ok(true),
        other => Err(Error::Parse(format!("endpoint flag `{other}` must be open or closed"))),
    };
    Ok((flag(lo)?, flag(hi)?))
}

/// `interval:lo:hi[:flags]`, `box:lo:hi:flags:lo:hi:flags...`,
/// `ball:c1,c2,...:radius`, or `fibonacci`. Flags are `open-closed` etc.,
/// defaulting to `closed-closed`.
impl<T: Scalar> FromStr for Window<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts[0] {
            "fibonacci" if parts.len() == 1 => Ok(Self::fibonacci()),
            "interval" | "box" => {
                let body = &parts[1..];
                if parts[0] == "interval" && (body.len() == 2 || body.len() == 3) {
                    let (lc, hc) = if body.len() == 3 { parse_flags(body[2])? } else { (true, true) };
                    return Self::interval(parse_num(body[0])?, parse_num(body[1])?, lc, hc);
                }
                if body.is_empty() || body.len() % 3 != 0 {
                    return Err(Error::Parse(format!("window `{s}` needs lo:hi:flags groups")));
                }
                let intervals = body
                    .chunks(3)
                    .map(|g| {
                        let (lo_closed, hi_closed) = parse_flags(g[2])?;
                        Ok(Interval { lo: parse_num(g[0])?, hi: parse_num(g[1])?, lo_closed, hi_closed })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::cuboid(intervals)
            }
            "ball" if parts.len() == 3 => {
                let center = parts[1].split(',').map(parse_num).collect::<Result<Vec<T>>>()?;
                Self::ball(center, parse_num(parts[2])?)
            }
            _ => Err(Error::Parse(format!("unrecognized window `{s}`"))),
        }
    }
}

fn check_window<T: Scalar>(s: &CutProjectScheme<T>, w: &Window<T>) -> Result<()> {
    s.require_certified()?;
    if w.dim() != s.dim_internal() {
        return Err(Error::DimensionMismatch { expected: s.dim_internal(), got: w.dim() });
    }
    Ok(())
}

fn direct_ball<T: Scalar>(s: &CutProjectScheme<T>, r: T, a: &[T]) -> Result<Ball<T>> {
    if a.len() != s.dim_direct() {
        return Err(Error::DimensionMismatch { expected: s.dim_direct(), got: a.len() });
    }
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidArgument("radius must be positive and finite".into()));
    }
    Ok(Ball::new(a.to_vec(), r))
}

/// `{ x in L : x in B_r(a), x* in W }`, sorted by integer coordinates.
pub fn model_set_points<T: Scalar>(s: &CutProjectScheme<T>, w: &Window<T>, r: T, a: &[T]) -> Result<Vec<LatticePoint>> {
    check_window(s, w)?;
    let direct = direct_ball(s, r, a)?;
    let candidates = s.enumerate(&direct, &w.bounding_ball())?;
    let d = s.dim_direct();
    let mut kept = Vec::with_capacity(candidates.len());
    for p in candidates {
        let x = s.position(&p)?;
        if direct.contains(&x[..d]) && w.contains(&x[d..]) {
            kept.push(p);
        }
    }
    Ok(kept)
}

/// `|Lambda(W) cap B_r(a)| / vol(B_r)`.
pub fn density_empirical<T: Scalar>(s: &CutProjectScheme<T>, w: &Window<T>, r: T, a: &[T]) -> Result<T> {
    let n = model_set_points(s, w, r, a)?.len();
    Ok(T::int(n as i64) / ball_volume(s.dim_direct(), r))
}

/// `vol(W) / |det L~|`.
pub fn density_exact<T: Scalar>(s: &CutProjectScheme<T>, w: &Window<T>) -> Result<T> {
    check_window(s, w)?;
    Ok(w.volume() / s.covolume())
}

/// Verifies by sampling that `f` vanishes off `w`.
pub fn check_support<T: Scalar>(w: &Window<T>, f: &WeightFunction<T>) -> Result<()> {
    if f.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: f.dim() });
    }
    let per_dim = if w.dim() == 1 { SUPPORT_GRID } else { (SUPPORT_GRID as f64).powf(1.0 / w.dim() as f64).ceil() as usize * 4 };
    f.check_vanishes_outside(&w.bounding_ball(), per_dim, |y| w.contains(y))
}

fn phase_sum<T: Scalar>(
    s: &CutProjectScheme<T>,
    points: &[LatticePoint],
    f: &WeightFunction<T>,
    k: Option<&[T]>,
) -> Result<Complex<T>> {
    let d = s.dim_direct();
    let two_pi = T::lit(2.0) * T::PI();
    let terms: Vec<Complex<T>> = points
        .par_iter()
        .map(|p| {
            let x = s.position(p).expect("dimension checked");
            let v = f.eval(&x[d..]);
            match k {
                None => v,
                Some(k) => {
                    let dot = k.iter().zip(&x[..d]).fold(T::zero(), |acc, (a, b)| acc + *a * *b);
                    v * Complex::from_polar(T::one(), -two_pi * dot)
                }
            }
        })
        .collect();
    Ok(terms.into_iter().collect::<ComplexSum<T>>().value())
}

/// `(1/vol(B_r)) sum_{x in Lambda(W) cap B_r(a)} f(x*)`.
pub fn weyl_average<T: Scalar>(s: &CutProjectScheme<T>, w: &Window<T>, f: &WeightFunction<T>, r: T, a: &[T]) -> Result<Complex<T>> {
    fourier_bohr_regular_finite(s, w, f, None, r, a)
}

/// `(1/vol(B_r)) sum_{x in Lambda(W) cap B_r(a)} f(x*) e^{-2 pi i k.x}`;
/// `k = None` is the Weyl average.
pub fn fourier_bohr_regular_finite<T: Scalar>(
    s: &CutProjectScheme<T>,
    w: &Window<T>,
    f: &WeightFunction<T>,
    k: Option<&[T]>,
    r: T,
    a: &[T],
) -> Result<Complex<T>> {
    check_window(s, w)?;
    check_support(w, f)?;
    if let Some(k) = k {
        if k.len() != s.dim_direct() {
            return Err(Error::DimensionMismatch { expected: s.dim_direct(), got: k.len() });
        }
    }
    let points = model_set_points(s, w, r, a)?;
    Ok(phase_sum(s, &points, f, k)? / ball_volume(s.dim_direct(), r))
}

/// Limit of the regular Fourier-Bohr sums at `k` given by its dual
/// coordinates: `(1/|det L~|) (f|_W)^(-k*)`. Since `f` vanishes off `W`
/// (checked), `f|_W = f`.
pub fn fourier_bohr_regular<T: Scalar>(
    s: &CutProjectScheme<T>,
    w: &Window<T>,
    f: &WeightFunction<T>,
    k: &LatticePoint,
) -> Result<(Complex<T>, T)> {
    check_window(s, w)?;
    check_support(w, f)?;
    let dual = s.dual()?;
    let kstar: Vec<T> = dual.star(k)?.into_iter().map(|v| -v).collect();
    let (v, err) = f.transform(&kstar)?;
    let cov = s.covolume();
    Ok((v / cov, err / cov))
}

/// CSV with columns `c0..c{n-1}, x0..x{d-1}, xstar0..xstar{m-1}`.
pub fn write_points_csv<T: Scalar, W: Write>(out: &mut W, s: &CutProjectScheme<T>, points: &[LatticePoint]) -> Result<()> {
    let n = s.dim();
    let d = s.dim_direct();
    let mut header: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    header.extend((0..d).map(|i| format!("x{i}")));
    header.extend((0..n - d).map(|i| format!("xstar{i}")));
    writeln!(out, "{}", header.join(","))?;
    for p in points {
        let pos = s.position(p)?;
        let mut row: Vec<String> = p.coords.iter().map(|c| c.to_string()).collect();
        row.extend(pos.iter().map(|v| format!("{:.16e}", v.as_f64())));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
