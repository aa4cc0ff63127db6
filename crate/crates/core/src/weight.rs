//! Internal-space weight functions `f: R^m -> C` with decay certificates.
//!
//! A weight carries everything the certified sums need: the decay pair
//! `(C, alpha)` with `|y|^(m+1+alpha) |f(y)| <= C`, a bound on `sup |f|`,
//! and, where known, closed forms for the Fourier transform
//! `f^(xi) = int e^{-2 pi i xi.y} f(y) dy` and the self-convolution
//! `u -> int f(v) conj f(v-u) dv`, together with radial majorants used to
//! bound truncated lattice sums.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;

use crate::cps::Ball;
use crate::error::{Error, Result};
use crate::numerics::{integrate_decaying, integrate_interval, tail_sum_bound, DecayCertificate, DEFAULT_MAX_EVALUATIONS};
use crate::scalar::{ball_volume, unit_sphere_area};
use crate::Scalar;

pub type PointFn<T> = Arc<dyn Fn(&[T]) -> Complex<T> + Send + Sync>;

/// Default accuracy of numerically evaluated transforms.
pub const DEFAULT_TRANSFORM_TOL: f64 = 1e-11;

/// Nonincreasing radial majorant `E(t) >= |h(y)|` for `|y| >= t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope<T> {
    /// `amp * exp(-pi * rate * t^2)`
    Gaussian { amp: T, rate: T },
    /// `min(cap, amp * t^-exponent)`
    Power { cap: T, amp: T, exponent: T },
    /// `amp` for `t <= radius`, zero beyond.
    Compact { amp: T, radius: T },
}

impl<T: Scalar> Envelope<T> {
    pub fn at(&self, t: T) -> T {
        let t = t.max(T::zero());
        match *self {
            Envelope::Gaussian { amp, rate } => amp * (-T::PI() * rate * t * t).exp(),
            Envelope::Power { cap, amp, exponent } => {
                if t == T::zero() {
                    cap
                } else {
                    cap.min(amp * t.powf(-exponent))
                }
            }
            Envelope::Compact { amp, radius } => {
                if t <= radius {
                    amp
                } else {
                    T::zero()
                }
            }
        }
    }

    pub fn scale(&self, k: T) -> Self {
        match *self {
            Envelope::Gaussian { amp, rate } => Envelope::Gaussian { amp: amp * k, rate },
            Envelope::Power { cap, amp, exponent } => Envelope::Power { cap: cap * k, amp: amp * k, exponent },
            Envelope::Compact { amp, radius } => Envelope::Compact { amp: amp * k, radius },
        }
    }

    /// Majorant of `E(t)^2`.
    pub fn squared(&self) -> Self {
        match *self {
            Envelope::Gaussian { amp, rate } => Envelope::Gaussian { amp: amp * amp, rate: rate * T::lit(2.0) },
            Envelope::Power { cap, amp, exponent } => {
                Envelope::Power { cap: cap * cap, amp: amp * amp, exponent: exponent * T::lit(2.0) }
            }
            Envelope::Compact { amp, radius } => Envelope::Compact { amp: amp * amp, radius },
        }
    }

    /// Smallest radius beyond which the envelope stays below `level`, if
    /// one exists.
    pub fn radius_below(&self, level: T) -> Option<T> {
        if !(level > T::zero()) {
            return None;
        }
        match *self {
            Envelope::Gaussian { amp, rate } => {
                if amp < level {
                    Some(T::zero())
                } else {
                    Some(((amp / level).ln() / (T::PI() * rate)).sqrt())
                }
            }
            Envelope::Power { cap, amp, exponent } => {
                if cap < level {
                    Some(T::zero())
                } else {
                    Some((amp / level).powf(exponent.recip()))
                }
            }
            Envelope::Compact { amp, radius } => Some(if amp < level { T::zero() } else { radius }),
        }
    }

    /// Upper bound on `sum_{t = from, from+1, ...} E(t) * A_k(t)` where
    /// `A_k(t) = vol_k(B_{t+1+D}) - vol_k(B_{max(t-D,0)})` bounds, up to the
    /// factor `1/covolume`, the number of lattice points whose `k`-dimensional
    /// projection has norm in `[t, t+1)`; `D` is the diameter of a
    /// fundamental cell.
    pub fn shell_sum_bound(&self, from: usize, dim: usize, cell_diameter: T) -> Result<T> {
        let shell = |t: T| {
            ball_volume::<T>(dim, t + T::one() + cell_diameter) - ball_volume::<T>(dim, (t - cell_diameter).max(T::zero()))
        };
        let mut sum = T::zero();
        let mut t = from;
        match *self {
            Envelope::Compact { amp, radius } => {
                while T::int(t as i64) <= radius {
                    sum += amp * shell(T::int(t as i64));
                    t += 1;
                }
                Ok(sum)
            }
            Envelope::Gaussian { .. } => {
                // terms eventually decrease faster than any geometric sequence
                loop {
                    let tt = T::int(t as i64);
                    let term = self.at(tt) * shell(tt);
                    let next = self.at(tt + T::one()) * shell(tt + T::one());
                    if tt > cell_diameter + T::one() && next <= term * T::lit(0.5) && next <= sum * T::epsilon() {
                        return Ok(sum + term + T::lit(2.0) * next);
                    }
                    sum += term;
                    t += 1;
                    if t > from + 10_000_000 {
                        return Err(Error::ToleranceUnreachable("gaussian shell sum did not settle".into()));
                    }
                }
            }
            Envelope::Power { cap, amp, exponent } => {
                let k = T::int(dim as i64);
                if exponent <= k {
                    return Err(Error::ToleranceUnreachable(format!(
                        "envelope decay t^-{exponent} is not summable over {dim}-dimensional shells"
                    )));
                }
                let crossover = if cap > T::zero() { (amp / cap).powf(exponent.recip()) } else { T::zero() };
                let start_tail = (cell_diameter + T::one()).max(crossover).ceil().to_usize().unwrap_or(0).max(from) + 2000;
                while t < start_tail {
                    let tt = T::int(t as i64);
                    sum += self.at(tt) * shell(tt);
                    t += 1;
                }
                // for t >= 1 + D: A_k(t) <= S_k (1 + 2D) 2^(k-1) t^(k-1)
                let coeff = amp * unit_sphere_area::<T>(dim) * (T::one() + T::lit(2.0) * cell_diameter) * T::lit(2.0).powi(dim as i32 - 1);
                Ok(sum + coeff * tail_sum_bound(exponent - k, T::int(t as i64)))
            }
        }
    }
}

/// Closed-form pieces attached to a weight.
#[derive(Clone)]
struct Analytic<T> {
    transform: Option<PointFn<T>>,
    selfconv: Option<PointFn<T>>,
    transform_envelope: Option<Envelope<T>>,
    selfconv_envelope: Option<Envelope<T>>,
    l1_norm: Option<T>,
}

impl<T> Default for Analytic<T> {
    fn default() -> Self {
        Self { transform: None, selfconv: None, transform_envelope: None, selfconv_envelope: None, l1_norm: None }
    }
}

/// A weight function on internal space.
#[derive(Clone)]
pub struct WeightFunction<T> {
    name: String,
    params: Vec<(String, f64)>,
    dim: usize,
    eval: PointFn<T>,
    decay_c: T,
    decay_alpha: T,
    sup_norm: T,
    /// `f` vanishes outside this ball.
    support: Option<Ball<T>>,
    real_valued: bool,
    analytic: Analytic<T>,
}

impl<T: Scalar> fmt::Debug for WeightFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("dim", &self.dim)
            .field("decay_c", &self.decay_c)
            .field("decay_alpha", &self.decay_alpha)
            .field("sup_norm", &self.sup_norm)
            .finish_non_exhaustive()
    }
}

fn real<T: Scalar>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

fn norm2<T: Scalar>(y: &[T]) -> T {
    y.iter().fold(T::zero(), |s, &v| s + v * v)
}

/// `max_{r >= 0} r^p exp(-pi r^2 / w^2) = (p w^2 / (2 pi e))^(p/2)`.
fn gaussian_moment_bound<T: Scalar>(p: T, width: T) -> T {
    (p * width * width / (T::lit(2.0) * T::PI() * T::E())).powf(p / T::lit(2.0)) * (T::one() + T::lit(1e-12))
}

impl<T: Scalar> WeightFunction<T> {
    /// Black-box weight. `sup_norm` must bound `|f|`.
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&[T]) -> Complex<T> + Send + Sync + 'static,
        decay_c: T,
        decay_alpha: T,
        sup_norm: T,
    ) -> Self {
        Self {
            name: name.into(),
            params: Vec::new(),
            dim,
            eval: Arc::new(eval),
            decay_c,
            decay_alpha,
            sup_norm,
            support: None,
            real_valued: false,
            analytic: Analytic::default(),
        }
    }

    /// `exp(-pi |y|^2 / w^2)` on `R^m`. Self-dual for `w = 1`; every
    /// closed form is attached. The certificate uses `alpha = 10`.
    pub fn gaussian(dim: usize, width: T) -> Self {
        Self::gaussian_with_alpha(dim, width, T::lit(10.0))
    }

    pub fn gaussian_with_alpha(dim: usize, width: T, alpha: T) -> Self {
        let m = T::int(dim as i64);
        let w2 = width * width;
        let wm = width.powi(dim as i32);
        let half_m = (width / T::lit(2.0).sqrt()).powi(dim as i32);
        let eval: PointFn<T> = Arc::new(move |y: &[T]| real((-T::PI() * norm2(y) / w2).exp()));
        let transform: PointFn<T> = Arc::new(move |k: &[T]| real(wm * (-T::PI() * w2 * norm2(k)).exp()));
        let selfconv: PointFn<T> = Arc::new(move |u: &[T]| real(half_m * (-T::PI() * norm2(u) / (T::lit(2.0) * w2)).exp()));
        Self {
            name: "gaussian".into(),
            params: vec![("width".into(), width.as_f64()), ("alpha".into(), alpha.as_f64())],
            dim,
            eval,
            decay_c: gaussian_moment_bound(m + T::one() + alpha, width),
            decay_alpha: alpha,
            sup_norm: T::one(),
            support: None,
            real_valued: true,
            analytic: Analytic {
                transform: Some(transform),
                selfconv: Some(selfconv),
                transform_envelope: Some(Envelope::Gaussian { amp: wm, rate: w2 }),
                selfconv_envelope: Some(Envelope::Gaussian { amp: half_m, rate: (T::lit(2.0) * w2).recip() }),
                l1_norm: Some(wm),
            },
        }
    }

    /// Smooth bump `exp(1 - 1/(1 - s^2))`, `s = (y - center)/half_width`,
    /// supported on `[center - h, center + h]`, peak value 1.
    pub fn bump(center: T, half_width: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::InvalidArgument("bump half-width must be positive".into()));
        }
        let h = half_width;
        let f = move |x: T| {
            let s = (x - center) / h;
            if s.abs() >= T::one() {
                T::zero()
            } else {
                (T::one() - (T::one() - s * s).recip()).exp()
            }
        };
        // f'' = f [4s^2/(1-s^2)^4 - 2/(1-s^2)^2 - 8s^2/(1-s^2)^3] / h^2
        let f2 = move |x: T| {
            let s = (x - center) / h;
            if s.abs() >= T::one() {
                return T::zero();
            }
            let q = T::one() - s * s;
            let s2 = s * s;
            f(x) * (T::lit(4.0) * s2 / q.powi(4) - T::lit(2.0) / (q * q) - T::lit(8.0) * s2 / q.powi(3)) / (h * h)
        };
        let curv = integrate_interval(|x| real(f2(x).abs()), center - h, center + h, T::lit(1e-10), 32, DEFAULT_MAX_EVALUATIONS)?;
        let l1 = integrate_interval(|x| real(f(x)), center - h, center + h, T::lit(1e-13), 16, DEFAULT_MAX_EVALUATIONS)?;
        let l1_norm = l1.value.re + l1.error_bound;
        let curvature = (curv.value.re + curv.error_bound) * T::lit(1.01);
        let alpha = T::one();
        let reach = center.abs() + h;
        Ok(Self {
            name: "bump".into(),
            params: vec![("center".into(), center.as_f64()), ("half_width".into(), h.as_f64())],
            dim: 1,
            eval: Arc::new(move |y: &[T]| real(f(y[0]))),
            decay_c: reach.powf(T::lit(2.0) + alpha),
            decay_alpha: alpha,
            sup_norm: T::one(),
            support: Some(Ball::new(vec![center], h)),
            real_valued: true,
            analytic: Analytic {
                transform: None,
                selfconv: None,
                // |f^(xi)| <= min(|f|_1, |f''|_1 / (2 pi xi)^2)
                transform_envelope: Some(Envelope::Power {
                    cap: l1_norm,
                    amp: curvature / (T::lit(4.0) * T::PI() * T::PI()),
                    exponent: T::lit(2.0),
                }),
                selfconv_envelope: Some(Envelope::Compact { amp: l1_norm, radius: T::lit(2.0) * h }),
                l1_norm: Some(l1_norm),
            },
        })
    }

    /// Triangle `max(0, 1 - |y - center| / h)`, continuous with compact
    /// support; transform `h sinc^2(pi h xi) e^{-2 pi i xi center}`.
    pub fn hat(center: T, half_width: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::InvalidArgument("hat half-width must be positive".into()));
        }
        let h = half_width;
        let eval: PointFn<T> = Arc::new(move |y: &[T]| real((T::one() - (y[0] - center).abs() / h).max(T::zero())));
        let transform: PointFn<T> = Arc::new(move |k: &[T]| {
            let x = T::PI() * h * k[0];
            let sinc = if x.abs() < T::lit(1e-8) { T::one() - x * x / T::lit(6.0) } else { x.sin() / x };
            let phase = -T::lit(2.0) * T::PI() * k[0] * center;
            Complex::from_polar(h * sinc * sinc, phase)
        });
        let selfconv: PointFn<T> = Arc::new(move |u: &[T]| {
            let t = u[0].abs() / h;
            let v = if t <= T::one() {
                T::lit(2.0) / T::lit(3.0) - t * t + t * t * t / T::lit(2.0)
            } else if t <= T::lit(2.0) {
                (T::lit(2.0) - t).powi(3) / T::lit(6.0)
            } else {
                T::zero()
            };
            real(h * v)
        });
        let alpha = T::one();
        let reach = center.abs() + h;
        Ok(Self {
            name: "hat".into(),
            params: vec![("center".into(), center.as_f64()), ("half_width".into(), h.as_f64())],
            dim: 1,
            eval,
            decay_c: reach.powf(T::lit(2.0) + alpha),
            decay_alpha: alpha,
            sup_norm: T::one(),
            support: Some(Ball::new(vec![center], h)),
            real_valued: true,
            analytic: Analytic {
                transform: Some(transform),
                selfconv: Some(selfconv),
                transform_envelope: Some(Envelope::Power { cap: h, amp: (T::PI() * T::PI() * h).recip(), exponent: T::lit(2.0) }),
                selfconv_envelope: Some(Envelope::Compact { amp: T::lit(2.0) * h / T::lit(3.0), radius: T::lit(2.0) * h }),
                l1_norm: Some(h),
            },
        })
    }

    /// `1 / (1 + y^2)` with the (false) certificate `C = 1, alpha = 1`;
    /// its decay is too slow for the theory and `decay_check` rejects it.
    pub fn lorentzian() -> Self {
        let transform: PointFn<T> =
            Arc::new(|k: &[T]| real(T::PI() * (-T::lit(2.0) * T::PI() * k[0].abs()).exp()));
        Self {
            name: "lorentzian".into(),
            params: Vec::new(),
            dim: 1,
            eval: Arc::new(|y: &[T]| real((T::one() + y[0] * y[0]).recip())),
            decay_c: T::one(),
            decay_alpha: T::one(),
            sup_norm: T::one(),
            support: None,
            real_valued: true,
            analytic: Analytic {
                transform: Some(transform),
                selfconv: None,
                transform_envelope: Some(Envelope::Power { cap: T::PI(), amp: (T::lit(2.0) * T::PI()).recip(), exponent: T::lit(2.0) }),
                selfconv_envelope: None,
                l1_norm: Some(T::PI()),
            },
        }
    }

    /// `f = 0`. Its certificate constant is zero.
    pub fn zero(dim: usize) -> Self {
        let zero: PointFn<T> = Arc::new(|_: &[T]| real(T::zero()));
        Self {
            name: "zero".into(),
            params: Vec::new(),
            dim,
            eval: zero.clone(),
            decay_c: T::zero(),
            decay_alpha: T::one(),
            sup_norm: T::zero(),
            support: None,
            real_valued: true,
            analytic: Analytic {
                transform: Some(zero.clone()),
                selfconv: Some(zero),
                transform_envelope: Some(Envelope::Compact { amp: T::zero(), radius: T::zero() }),
                selfconv_envelope: Some(Envelope::Compact { amp: T::zero(), radius: T::zero() }),
                l1_norm: Some(T::zero()),
            },
        }
    }

    /// Natural cubic spline through tabulated samples `(y, Re f, Im f)`,
    /// zero outside the sampled range.
    pub fn tabulated(name: impl Into<String>, samples: &[(T, T, T)], decay_c: T, decay_alpha: T) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument("tabulated weight needs at least two samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument("tabulated abscissae must be strictly increasing".into()));
        }
        let ys: Vec<T> = samples.iter().map(|s| s.0).collect();
        let re = Spline::natural(&ys, &samples.iter().map(|s| s.1).collect::<Vec<_>>());
        let im = Spline::natural(&ys, &samples.iter().map(|s| s.2).collect::<Vec<_>>());
        let lo = ys[0];
        let hi = ys[ys.len() - 1];
        let real_valued = samples.iter().all(|s| s.2 == T::zero());
        let re2 = re.clone();
        let im2 = im.clone();
        let eval: PointFn<T> = Arc::new(move |y: &[T]| {
            let x = y[0];
            if x < lo || x > hi {
                real(T::zero())
            } else {
                Complex::new(re2.eval(x), im2.eval(x))
            }
        });
        // spline overshoot is bounded by sampling it densely and padding
        let mut sup = T::zero();
        let n = 64 * samples.len();
        for i in 0..=n {
            let x = lo + (hi - lo) * T::int(i as i64) / T::int(n as i64);
            sup = sup.max(Complex::new(re.eval(x), im.eval(x)).norm());
        }
        let center = (lo + hi) / T::lit(2.0);
        let radius = (hi - lo) / T::lit(2.0);
        Ok(Self {
            name: name.into(),
            params: vec![("samples".into(), samples.len() as f64)],
            dim: 1,
            eval,
            decay_c,
            decay_alpha,
            sup_norm: sup * T::lit(1.05),
            support: Some(Ball::new(vec![center], radius)),
            real_valued,
            analytic: Analytic::default(),
        })
    }

    /// Reads `y, Re f, Im f` rows. Lines starting with `#` may carry the
    /// certificate as `# decay_c: <C>` and `# decay_alpha: <alpha>`; both
    /// are required.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&path.display().to_string(), &text)
    }

    pub fn parse_csv(name: &str, text: &str) -> Result<Self> {
        let mut c = None;
        let mut alpha = None;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once(':') {
                    let v = value.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
                    match key.trim() {
                        "decay_c" => c = Some(v?),
                        "decay_alpha" => alpha = Some(v?),
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                if rows.is_empty() && fields.iter().any(|f| f.parse::<f64>().is_err()) {
                    continue; // header
                }
                return Err(Error::Parse(format!("line {}: expected 3 columns", lineno + 1)));
            }
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) => rows.push((T::lit(v[0]), T::lit(v[1]), T::lit(v[2]))),
                Err(_) if rows.is_empty() => continue,
                Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
            }
        }
        let c = c.ok_or_else(|| Error::Parse("missing `# decay_c:` certificate line".into()))?;
        let alpha = alpha.ok_or_else(|| Error::Parse("missing `# decay_alpha:` certificate line".into()))?;
        if !(c >= 0.0) || !(alpha > 0.0) {
            return Err(Error::InvalidArgument("certificate needs decay_c >= 0 and decay_alpha > 0".into()));
        }
        Self::tabulated(name, &rows, T::lit(c), T::lit(alpha))
    }

    /// Parses `name[:key=value,...]`, e.g. `gaussian`, `gaussian:width=2`,
    /// `bump:center=0,half_width=0.5`, `hat:half_width=0.8`, `zero`,
    /// `lorentzian`, `file:<path>`.
    pub fn from_spec(spec: &str, dim: usize) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        if name == "file" {
            return Self::from_csv(Path::new(rest));
        }
        let mut params = std::collections::BTreeMap::new();
        for kv in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("weight parameter `{kv}` is not key=value")))?;
            let v: f64 = v.parse().map_err(|_| Error::Parse(format!("weight parameter `{kv}` is not numeric")))?;
            params.insert(k.trim().to_string(), v);
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        let known = |allowed: &[&str]| -> Result<()> {
            match params.keys().find(|k| !allowed.contains(&k.as_str())) {
                Some(k) => Err(Error::Parse(format!("unknown parameter `{k}` for weight `{name}`"))),
                None => Ok(()),
            }
        };
        let one_dim = || -> Result<()> {
            if dim != 1 {
                Err(Error::InvalidArgument(format!("weight `{name}` is only defined for internal dimension 1")))
            } else {
                Ok(())
            }
        };
        match name {
            "gaussian" => {
                known(&["width", "alpha"])?;
                Ok(Self::gaussian_with_alpha(dim, T::lit(get("width", 1.0)), T::lit(get("alpha", 10.0))))
            }
            "bump" => {
                known(&["center", "half_width"])?;
                one_dim()?;
                Self::bump(T::lit(get("center", 0.0)), T::lit(get("half_width", 0.5)))
            }
            "hat" => {
                known(&["center", "half_width"])?;
                one_dim()?;
                Self::hat(T::lit(get("center", 0.0)), T::lit(get("half_width", 0.5)))
            }
            "lorentzian" => {
                known(&[])?;
                one_dim()?;
                Ok(Self::lorentzian())
            }
            "zero" => {
                known(&[])?;
                Ok(Self::zero(dim))
            }
            other => Err(Error::Parse(format!("unknown weight `{other}`"))),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decay_c(&self) -> T {
        self.decay_c
    }

    pub fn decay_alpha(&self) -> T {
        self.decay_alpha
    }

    pub fn sup_norm(&self) -> T {
        self.sup_norm
    }

    pub fn support(&self) -> Option<&Ball<T>> {
        self.support.as_ref()
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm == T::zero()
    }

    pub fn has_analytic_transform(&self) -> bool {
        self.analytic.transform.is_some()
    }

    pub fn transform_envelope(&self) -> Option<Envelope<T>> {
        self.analytic.transform_envelope
    }

    /// Radial majorant of `|u -> int f(v) conj f(v-u) dv|`. Falls back to
    /// the bound derived from the decay certificate when no closed form
    /// is attached.
    pub fn selfconv_envelope(&self) -> Result<Envelope<T>> {
        if let Some(e) = self.analytic.selfconv_envelope {
            return Ok(e);
        }
        // |u| >= t: one of |v|, |v-u| is >= t/2, so the integral is at most
        // 2 C (2/t)^p |f|_1; always at most sup|f| |f|_1.
        let l1 = self.l1_norm()?;
        let p = T::int(self.dim as i64) + T::one() + self.decay_alpha;
        Ok(Envelope::Power {
            cap: self.sup_norm * l1,
            amp: T::lit(2.0) * self.decay_c * T::lit(2.0).powf(p) * l1,
            exponent: p,
        })
    }

    #[inline]
    pub fn eval(&self, y: &[T]) -> Complex<T> {
        (self.eval)(y)
    }

    /// Decay certificate in the form `|f(y)| <= c / (1 + |y|)^(m + beta)`
    /// used by the quadrature routines.
    pub fn quadrature_certificate(&self) -> DecayCertificate<T> {
        let p = T::int(self.dim as i64) + T::one() + self.decay_alpha;
        DecayCertificate { c: T::lit(2.0).powf(p) * self.decay_c.max(self.sup_norm), beta: T::one() + self.decay_alpha }
    }

    fn integrate(&self, g: impl Fn(&[T]) -> Complex<T>, cert_scale: T, tol: T) -> Result<(Complex<T>, T)> {
        if self.is_zero() {
            return Ok((real(T::zero()), T::zero()));
        }
        if let Some(support) = &self.support {
            if self.dim == 1 {
                let c = support.center[0];
                let r = support.radius;
                let res = integrate_interval(|x| g(&[x]), c - r, c + r, tol, 32, DEFAULT_MAX_EVALUATIONS)?;
                return Ok((res.value, res.error_bound));
            }
        }
        let mut cert = self.quadrature_certificate();
        cert.c = cert.c * cert_scale;
        let res = integrate_decaying(g, self.dim, cert, tol)?;
        Ok((res.value, res.error_bound))
    }

    /// `f^(xi) = int e^{-2 pi i xi.y} f(y) dy` with an error bound (zero
    /// when a closed form is attached).
    pub fn transform(&self, xi: &[T]) -> Result<(Complex<T>, T)> {
        self.check_dim(xi.len())?;
        if let Some(ft) = &self.analytic.transform {
            return Ok((ft(xi), T::zero()));
        }
        self.transform_numeric(xi, T::lit(DEFAULT_TRANSFORM_TOL))
    }

    pub fn transform_numeric(&self, xi: &[T], tol: T) -> Result<(Complex<T>, T)> {
        let two_pi = T::lit(2.0) * T::PI();
        self.integrate(
            |y| {
                let phase = -two_pi * y.iter().zip(xi).fold(T::zero(), |s, (a, b)| s + *a * *b);
                self.eval(y) * Complex::from_polar(T::one(), phase)
            },
            T::one(),
            tol,
        )
    }

    /// `int f(v) conj f(v - u) dv`.
    pub fn selfconv(&self, u: &[T]) -> Result<(Complex<T>, T)> {
        self.check_dim(u.len())?;
        if let Some(sc) = &self.analytic.selfconv {
            return Ok((sc(u), T::zero()));
        }
        let shifted: Vec<T> = u.to_vec();
        self.integrate(
            |v| {
                let w: Vec<T> = v.iter().zip(&shifted).map(|(a, b)| *a - *b).collect();
                self.eval(v) * self.eval(&w).conj()
            },
            self.sup_norm.max(T::lit(1e-300)),
            T::lit(DEFAULT_TRANSFORM_TOL),
        )
    }

    /// `int f`, i.e. `f^(0)`.
    pub fn integral(&self) -> Result<(Complex<T>, T)> {
        self.transform(&vec![T::zero(); self.dim])
    }

    /// `int |f|`, rounded up by its quadrature error.
    pub fn l1_norm(&self) -> Result<T> {
        if let Some(l1) = self.analytic.l1_norm {
            return Ok(l1);
        }
        let (v, err) = self.integrate(|y| real(self.eval(y).norm()), T::one(), T::lit(1e-10))?;
        Ok(v.re + err)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got });
        }
        Ok(())
    }

    /// Compares the attached closed-form transform with quadrature at
    /// `probes` frequencies in `[0, max_freq]` along the first axis.
    /// Returns the largest discrepancy.
    pub fn verify_transform(&self, probes: usize, max_freq: T) -> Result<T> {
        let Some(ft) = &self.analytic.transform else {
            return Ok(T::zero());
        };
        let mut worst = T::zero();
        for i in 0..probes {
            let mut xi = vec![T::zero(); self.dim];
            xi[0] = max_freq * T::int(i as i64) / T::int(probes.max(2) as i64 - 1);
            let (num, _) = self.transform_numeric(&xi, T::lit(1e-12))?;
            worst = worst.max((num - ft(&xi)).norm());
        }
        Ok(worst)
    }

    /// Spot-checks continuity: at each probe point, `|f(y+h) - f(y)|` must
    /// shrink as `h` runs through `1e-2, 1e-4, 1e-6`. Returns the offending
    /// point, if any.
    pub fn continuity_probe(&self, points: &[Vec<T>]) -> Option<Vec<T>> {
        for y in points {
            let mut prev = T::infinity();
            for h in [T::lit(1e-2), T::lit(1e-4), T::lit(1e-6)] {
                let mut yh = y.clone();
                yh[0] += h;
                let jump = (self.eval(&yh) - self.eval(y)).norm();
                if jump > prev * T::lit(0.5) && jump > T::lit(1e3) * T::epsilon() * self.sup_norm.max(T::one()) {
                    return Some(y.clone());
                }
                prev = jump;
            }
        }
        None
    }

    /// Checks that `f` vanishes outside `inside` by sampling a grid of
    /// `per_dim` points per axis over a box three times the window's
    /// bounding box, skipping points `inside` accepts.
    pub fn check_vanishes_outside(&self, bounding: &Ball<T>, per_dim: usize, inside: impl Fn(&[T]) -> bool) -> Result<()> {
        let m = self.dim;
        let n = per_dim.max(2);
        let half = bounding.radius * T::lit(3.0);
        let total = n.checked_pow(m as u32).ok_or(Error::ResourceCap { what: "support sampling", needed: f64::INFINITY, cap: usize::MAX })?;
        let mut y = vec![T::zero(); m];
        for index in 0..total {
            let mut rest = index;
            for (axis, coord) in y.iter_mut().enumerate() {
                let i = rest % n;
                rest /= n;
                *coord = bounding.center[axis] - half + T::lit(2.0) * half * T::int(i as i64) / T::int(n as i64 - 1);
            }
            if inside(&y) {
                continue;
            }
            let v = self.eval(&y).norm();
            if v > T::lit(1e-300) {
                return Err(Error::SupportViolation { at: y.iter().map(|v| v.as_f64()).collect(), value: v.as_f64() });
            }
        }
        Ok(())
    }

    /// Largest `|y|^exponent |f(y)|` over a fixed sample of the sphere of
    /// radius `r`.
    pub fn sphere_moment(&self, r: T, exponent: T) -> T {
        sphere_directions::<T>(self.dim)
            .iter()
            .map(|dir| {
                let y: Vec<T> = dir.iter().map(|&c| c * r).collect();
                r.powf(exponent) * self.eval(&y).norm()
            })
            .fold(T::zero(), T::max)
    }

}

/// Deterministic unit directions: coordinate axes, their negatives and
/// all sign patterns of the main diagonals (plus an angular sweep in 2-D).
fn sphere_directions<T: Scalar>(dim: usize) -> Vec<Vec<T>> {
    let mut dirs = Vec::new();
    for axis in 0..dim {
        for sign in [T::one(), -T::one()] {
            let mut v = vec![T::zero(); dim];
            v[axis] = sign;
            dirs.push(v);
        }
    }
    if dim >= 2 {
        let norm = T::int(dim as i64).sqrt().recip();
        for mask in 0..(1usize << dim.min(10)) {
            dirs.push((0..dim).map(|i| if mask >> i & 1 == 1 { -norm } else { norm }).collect());
        }
    }
    if dim == 2 {
        for i in 0..64 {
            let a = T::lit(2.0) * T::PI() * T::int(i) / T::lit(64.0);
            dirs.push(vec![a.cos(), a.sin()]);
        }
    }
    dirs
}

/// Natural cubic spline on a strictly increasing grid.
#[derive(Debug, Clone)]
struct Spline<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    second: Vec<T>,
}

impl<T: Scalar> Spline<T> {
    fn natural(xs: &[T], ys: &[T]) -> Self {
        let n = xs.len();
        let mut second = vec![T::zero(); n];
        if n > 2 {
            // tridiagonal solve for interior second derivatives
            let mut diag = vec![T::zero(); n];
            let mut rhs = vec![T::zero(); n];
            let mut upper = vec![T::zero(); n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[i] = T::lit(2.0) * (h0 + h1);
                upper[i] = h1;
                rhs[i] = T::lit(6.0) * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
                if i > 1 {
                    let lower = h0;
                    let w = lower / diag[i - 1];
                    diag[i] -= w * upper[i - 1];
                    rhs[i] = rhs[i] - w * rhs[i - 1];
                }
            }
            for i in (1..n - 1).rev() {
                let next = if i + 1 < n - 1 { upper[i] * second[i + 1] } else { T::zero() };
                second[i] = (rhs[i] - next) / diag[i];
            }
        }
        Self { xs: xs.to_vec(), ys: ys.to_vec(), second }
    }

    fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => return self.ys[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / T::lit(6.0)
    }
}
