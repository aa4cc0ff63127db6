//! Random Fibonacci tilings: i.i.d. sequences of the intervals `u`
//! (length 1) and `v` (length tau), their vertex stars, and the averaged
//! internal-space distribution compared with its asymptotic profile
//! `rho_N(y) = sqrt(tau/2N) f(y sqrt(tau/2N))`, `f(z) = 2 ierfc(|z|)`.
//!
//! Vertex `j` has Fibonacci coordinates `(#u, #v)` among the first `j`
//! tiles, so its star is `#u + #v (1 - tau)`.

use rand::distributions::{Bernoulli, Distribution};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cps::LatticePoint;
use crate::error::{Error, Result};
use crate::numerics::{ierfc, CompensatedSum};
use crate::Scalar;

/// Upper limit on `M * (N + 1)` vertices per histogram.
pub const MAX_VERTICES: u64 = 50_000_000_000;
/// Samples per parallel work unit.
const CHUNK: usize = 64;

const TAU: f64 = 1.618_033_988_749_894_8;
const ONE_MINUS_TAU: f64 = 1.0 - TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Tile {
    /// Length 1, star step `+1`.
    U,
    /// Length tau, star step `1 - tau`.
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// Independent `Bernoulli(p_u)` choice per tile.
    #[default]
    Bernoulli,
    /// Exactly `round(p_u N)` tiles `u`, uniformly permuted.
    FixedComposition,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli" => Ok(Sampler::Bernoulli),
            "fixed-composition" | "fixed" => Ok(Sampler::FixedComposition),
            other => Err(Error::Parse(format!("unknown sampler `{other}`"))),
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampler::Bernoulli => "bernoulli",
            Sampler::FixedComposition => "fixed-composition",
        })
    }
}

/// Coordinate in which vertex stars are binned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// `star_j - j * mu` with `mu` the predicted mean star step; grid
    /// centered at 0.
    #[default]
    DriftLine,
    /// Raw stars; grid centered at `N mu / 2`.
    Raw,
}

impl std::str::FromStr for Centering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drift-line" | "drift" => Ok(Centering::DriftLine),
            "raw" => Ok(Centering::Raw),
            other => Err(Error::Parse(format!("unknown centering `{other}`"))),
        }
    }
}

impl std::fmt::Display for Centering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Centering::DriftLine => "drift-line",
            Centering::Raw => "raw",
        })
    }
}

/// Frequency of `u` stated for the ensemble.
pub fn default_p_u() -> f64 {
    1.0 / TAU
}

/// Frequency of `u` in the Fibonacci model set, `1/tau^2`.
pub fn model_set_p_u() -> f64 {
    1.0 / (TAU * TAU)
}

/// Mean star step `p_u + (1 - p_u)(1 - tau)`.
pub fn predicted_mean_step(p_u: f64) -> f64 {
    p_u + (1.0 - p_u) * ONE_MINUS_TAU
}

/// Standard deviation of the pooled vertex stars about the drift line,
/// `sqrt(2N/tau)/2`.
pub fn predicted_sigma(n: usize) -> f64 {
    (2.0 * n as f64 / TAU).sqrt() / 2.0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingSample {
    pub tiles: Vec<Tile>,
}

impl TilingSample {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Fibonacci coordinates `(#u, #v)` of every vertex, starting at the
    /// origin.
    pub fn vertices(&self) -> Vec<LatticePoint> {
        let mut out = Vec::with_capacity(self.tiles.len() + 1);
        let (mut nu, mut nv) = (0i64, 0i64);
        out.push(LatticePoint::new(vec![0, 0]));
        for t in &self.tiles {
            match t {
                Tile::U => nu += 1,
                Tile::V => nv += 1,
            }
            out.push(LatticePoint::new(vec![nu, nv]));
        }
        out
    }

    /// Direct-space vertex positions `#u + #v tau`, strictly increasing.
    pub fn positions<T: Scalar>(&self) -> Vec<T> {
        let tau = T::golden();
        counts(&self.tiles).map(|(nu, nv)| T::int(nu) + T::int(nv) * tau).collect()
    }

    pub fn u_count(&self) -> usize {
        self.tiles.iter().filter(|t| **t == Tile::U).count()
    }
}

fn counts(tiles: &[Tile]) -> impl Iterator<Item = (i64, i64)> + '_ {
    std::iter::once((0, 0)).chain(tiles.iter().scan((0i64, 0i64), |st, t| {
        match t {
            Tile::U => st.0 += 1,
            Tile::V => st.1 += 1,
        }
        Some(*st)
    }))
}

fn check_p(p_u: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p_u) {
        return Err(Error::InvalidArgument(format!("p_u = {p_u} is not a probability")));
    }
    Ok(())
}

/// Generator for sample `index` under master `seed`: the ChaCha stream
/// number is the sample index, so samples are independent of scheduling.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_tiles(n: usize, p_u: f64, sampler: Sampler, rng: &mut ChaCha8Rng) -> Result<Vec<Tile>> {
    check_p(p_u)?;
    Ok(match sampler {
        Sampler::Bernoulli => {
            let coin = Bernoulli::new(p_u).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            (0..n).map(|_| if coin.sample(rng) { Tile::U } else { Tile::V }).collect()
        }
        Sampler::FixedComposition => {
            let nu = (p_u * n as f64).round() as usize;
            let mut tiles: Vec<Tile> = (0..n).map(|i| if i < nu { Tile::U } else { Tile::V }).collect();
            tiles.shuffle(rng);
            tiles
        }
    })
}

/// `N` tiles with i.i.d. `Bernoulli(p_u)` choice of `u`.
pub fn sample(n: usize, p_u: f64, seed: u64) -> Result<TilingSample> {
    sample_with(n, p_u, seed, 0, Sampler::Bernoulli)
}

/// Sample number `index` of the ensemble seeded by `seed`.
pub fn sample_with(n: usize, p_u: f64, seed: u64, index: u64, sampler: Sampler) -> Result<TilingSample> {
    let mut rng = sample_rng(seed, index);
    Ok(TilingSample { tiles: draw_tiles(n, p_u, sampler, &mut rng)? })
}

/// Stars of all vertices: partial sums of `+1` (u) and `1 - tau` (v),
/// evaluated from the integer counts.
pub fn internal_walk<T: Scalar>(sample: &TilingSample) -> Vec<T> {
    let step = T::one() - T::golden();
    counts(&sample.tiles).map(|(nu, nv)| T::int(nu) + T::int(nv) * step).collect()
}

/// `f(z) = 2 (e^{-z^2}/sqrt(pi) - |z| erfc|z|)`.
pub fn profile_shape<T: Scalar>(z: T) -> T {
    T::lit(2.0) * ierfc(z.abs())
}

/// `rho_N(y) = sqrt(tau/2N) f(y sqrt(tau/2N))`.
pub fn asymptotic_profile<T: Scalar>(y: T, n: usize) -> T {
    let scale = (T::golden() / (T::lit(2.0) * T::int(n.max(1) as i64))).sqrt();
    scale * profile_shape(y * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct HistogramOptions {
    pub sampler: Sampler,
    pub centering: Centering,
}

/// Averaged vertex-star distribution on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub bin_width: f64,
    /// Raw vertex counts per bin, summed over samples.
    pub counts: Vec<u64>,
    /// `counts / (M (N+1) bin_width)`.
    pub density: Vec<f64>,
    pub n_samples: usize,
    pub n_tiles: usize,
    pub p_u: f64,
    pub seed: u64,
    pub options: HistogramOptions,
    /// Vertices that fell outside the grid.
    pub outside: u64,
    /// Empirical mean of the binned coordinate; the profile is compared
    /// after shifting by it.
    pub center_offset: f64,
    /// Empirical standard deviation of the binned coordinate.
    pub std_dev: f64,
    /// Empirical mean star step per tile, and its standard error.
    pub mean_step: f64,
    pub mean_step_se: f64,
    pub u_frequency: f64,
}

#[derive(Default)]
struct ChunkStats {
    counts: Vec<u64>,
    outside: u64,
    // per sample, in sample order
    sums: Vec<(f64, f64, f64, u64)>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.bins()).map(|i| self.lo + self.bin_width * i as f64).collect()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        (0..self.bins()).map(|i| self.lo + self.bin_width * (i as f64 + 0.5)).collect()
    }

    /// `sum density * bin_width`.
    pub fn integral(&self) -> f64 {
        self.density.iter().map(|d| d * self.bin_width).collect::<CompensatedSum<f64>>().value()
    }

    /// A histogram whose densities are the asymptotic profile at the bin
    /// centers of the standard grid.
    pub fn from_profile(n: usize, bins: usize) -> Self {
        let (lo, bw) = grid(n, bins, 0.0);
        let density: Vec<f64> = (0..bins).map(|i| asymptotic_profile(lo + bw * (i as f64 + 0.5), n)).collect();
        Self {
            lo,
            bin_width: bw,
            counts: vec![0; bins],
            density,
            n_samples: 0,
            n_tiles: n,
            p_u: default_p_u(),
            seed: 0,
            options: HistogramOptions::default(),
            outside: 0,
            center_offset: 0.0,
            std_dev: predicted_sigma(n),
            mean_step: predicted_mean_step(default_p_u()),
            mean_step_se: 0.0,
            u_frequency: default_p_u(),
        }
    }
}

/// `bins` uniform bins over `center +- 6 sigma_pred`.
fn grid(n: usize, bins: usize, center: f64) -> (f64, f64) {
    let half = 6.0 * predicted_sigma(n).max(0.5);
    (center - half, 2.0 * half / bins as f64)
}

/// Accumulates the vertex stars of `m` independent samples of `n` tiles.
pub fn averaged_histogram(m: usize, n: usize, p_u: f64, bins: usize, seed: u64) -> Result<Histogram> {
    averaged_histogram_with(m, n, p_u, bins, seed, HistogramOptions::default())
}

pub fn averaged_histogram_with(m: usize, n: usize, p_u: f64, bins: usize, seed: u64, options: HistogramOptions) -> Result<Histogram> {
    if m == 0 || n == 0 || bins == 0 {
        return Err(Error::InvalidArgument("samples, tiles and bins must be at least 1".into()));
    }
    check_p(p_u)?;
    let vertices = (m as u64).saturating_mul(n as u64 + 1);
    if vertices > MAX_VERTICES {
        return Err(Error::ResourceCap { what: "random tiling vertices", needed: vertices as f64, cap: MAX_VERTICES as usize });
    }
    let mu = predicted_mean_step(p_u);
    let center = match options.centering {
        Centering::DriftLine => 0.0,
        Centering::Raw => n as f64 * mu / 2.0,
    };
    let (lo, bw) = grid(n, bins, center);
    let coin = Bernoulli::new(p_u).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let chunks: Vec<ChunkStats> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut st = ChunkStats { counts: vec![0; bins], ..Default::default() };
            let mut tiles = Vec::new();
            for index in c * CHUNK..((c + 1) * CHUNK).min(m) {
                let mut rng = sample_rng(seed, index as u64);
                if options.sampler == Sampler::FixedComposition {
                    tiles = draw_tiles(n, p_u, options.sampler, &mut rng).expect("p_u checked");
                }
                let (mut nu, mut nv) = (0i64, 0i64);
                let mut sum = 0.0;
                let mut sum2 = 0.0;
                for j in 0..=n {
                    if j > 0 {
                        let is_u = match options.sampler {
                            Sampler::Bernoulli => coin.sample(&mut rng),
                            Sampler::FixedComposition => tiles[j - 1] == Tile::U,
                        };
                        if is_u {
                            nu += 1;
                        } else {
                            nv += 1;
                        }
                    }
                    let star = nu as f64 + nv as f64 * ONE_MINUS_TAU;
                    let y = match options.centering {
                        Centering::DriftLine => star - j as f64 * mu,
                        Centering::Raw => star,
                    };
                    sum += y;
                    sum2 += y * y;
                    let t = ((y - lo) / bw).floor();
                    if t >= 0.0 && (t as usize) < bins {
                        st.counts[t as usize] += 1;
                    } else {
                        st.outside += 1;
                    }
                }
                let final_star = nu as f64 + nv as f64 * ONE_MINUS_TAU;
                st.sums.push((sum, sum2, final_star, nu as u64));
            }
            st
        })
        .collect();

    let mut counts = vec![0u64; bins];
    let mut outside = 0u64;
    let mut s1 = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    let mut steps = CompensatedSum::new();
    let mut steps2 = CompensatedSum::new();
    let mut nu_total = 0u64;
    for ch in &chunks {
        for (a, b) in counts.iter_mut().zip(&ch.counts) {
            *a += b;
        }
        outside += ch.outside;
        for &(sum, sum2, fin, nu) in &ch.sums {
            s1.add(sum);
            s2.add(sum2);
            let per_tile = fin / n as f64;
            steps.add(per_tile);
            steps2.add(per_tile * per_tile);
            nu_total += nu;
        }
    }
    let total = vertices as f64;
    let mean = s1.value() / total;
    let var = (s2.value() / total - mean * mean).max(0.0);
    let mean_step = steps.value() / m as f64;
    let norm = total * bw;
    let sd_step = (p_u * (1.0 - p_u)).sqrt() * TAU;
    Ok(Histogram {
        lo,
        bin_width: bw,
        density: counts.iter().map(|&c| c as f64 / norm).collect(),
        counts,
        n_samples: m,
        n_tiles: n,
        p_u,
        seed,
        options,
        outside,
        center_offset: mean,
        std_dev: var.sqrt(),
        mean_step,
        mean_step_se: sd_step / ((m * n) as f64).sqrt(),
        u_frequency: nu_total as f64 / (m as f64 * n as f64),
    })
}

/// `sum_bins |density - rho_N(center - offset)| * bin_width`, after
/// recentering at the histogram's empirical mean.
pub fn profile_distance(h: &Histogram, n: usize) -> Result<f64> {
    if h.n_tiles != n {
        return Err(Error::InvalidArgument(format!("histogram was built with N = {}, not {n}", h.n_tiles)));
    }
    Ok(h.bin_centers()
        .iter()
        .zip(&h.density)
        .map(|(&c, &d)| (d - asymptotic_profile(c - h.center_offset, n)).abs() * h.bin_width)
        .collect::<CompensatedSum<f64>>()
        .value())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthFit {
    pub n_tiles: Vec<usize>,
    pub std_devs: Vec<f64>,
    /// Least-squares slope of `ln sd` against `ln N`.
    pub exponent: f64,
}

/// Fits the growth exponent of the vertex-star spread over several
/// system sizes.
pub fn width_scaling(m: usize, ns: &[usize], p_u: f64, bins: usize, seed: u64, options: HistogramOptions) -> Result<WidthFit> {
    if ns.len() < 2 {
        return Err(Error::InvalidArgument("width fit needs at least two system sizes".into()));
    }
    let mut sds = Vec::with_capacity(ns.len());
    for &n in ns {
        sds.push(averaged_histogram_with(m, n, p_u, bins, seed, options)?.std_dev);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = sds.iter().map(|s| s.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(WidthFit { n_tiles: ns.to_vec(), std_devs: sds, exponent: cov / var })
}

/// Summary emitted next to the histogram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TilingReport {
    pub n_samples: usize,
    pub n_tiles: usize,
    pub p_u: f64,
    pub bins: usize,
    pub seed: u64,
    pub sampler: Sampler,
    pub centering: Centering,
    pub l1_distance: f64,
    pub center_offset: f64,
    pub outside: u64,
    pub u_frequency: f64,
    pub mean_step: f64,
    pub predicted_mean_step: f64,
    pub mean_step_se: f64,
    pub std_dev: f64,
    pub predicted_std_dev: f64,
    /// Vertices per unit length, `1 / (p_u + (1 - p_u) tau)`.
    pub vertex_density: f64,
    /// Density of the Fibonacci model set, `tau / sqrt 5`.
    pub model_set_density: f64,
    pub width_fit: Option<WidthFit>,
}

impl TilingReport {
    pub fn new(h: &Histogram, width_fit: Option<WidthFit>) -> Result<Self> {
        Ok(Self {
            n_samples: h.n_samples,
            n_tiles: h.n_tiles,
            p_u: h.p_u,
            bins: h.bins(),
            seed: h.seed,
            sampler: h.options.sampler,
            centering: h.options.centering,
            l1_distance: profile_distance(h, h.n_tiles)?,
            center_offset: h.center_offset,
            outside: h.outside,
            u_frequency: h.u_frequency,
            mean_step: h.mean_step,
            predicted_mean_step: predicted_mean_step(h.p_u),
            mean_step_se: h.mean_step_se,
            std_dev: h.std_dev,
            predicted_std_dev: predicted_sigma(h.n_tiles),
            vertex_density: 1.0 / (h.p_u + (1.0 - h.p_u) * TAU),
            model_set_density: TAU / 5f64.sqrt(),
            width_fit,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_and_replayed_samples() {
        let s = sample(1, 1.0, 7).unwrap();
        assert_eq!(s.tiles, vec![Tile::U]);
        assert_eq!(internal_walk::<f64>(&s), vec![0.0, 1.0]);
        assert_eq!(sample(500, 0.3, 99).unwrap(), sample(500, 0.3, 99).unwrap());
        assert_ne!(sample(500, 0.3, 99).unwrap(), sample(500, 0.3, 100).unwrap());
        assert!(sample(3, 1.5, 0).is_err());
    }

    #[test]
    fn walks() {
        let s = TilingSample { tiles: vec![Tile::U, Tile::V] };
        let w = internal_walk::<f64>(&s);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 1.0);
        assert!((w[2] - 0.381_966_011_250_105_1).abs() < 1e-15);
        let all_u = TilingSample { tiles: vec![Tile::U; 3] };
        assert_eq!(internal_walk::<f64>(&all_u), vec![0.0, 1.0, 2.0, 3.0]);
        let all_v = TilingSample { tiles: vec![Tile::V; 2] };
        let w = internal_walk::<f64>(&all_v);
        assert!((w[1] - (1.0 - TAU)).abs() < 1e-15 && (w[2] - (2.0 - 2.0 * TAU)).abs() < 1e-15);
        let pos = s.positions::<f64>();
        assert!(pos.windows(2).all(|p| p[1] > p[0]));
        assert_eq!(s.vertices()[0], LatticePoint::origin(2));
    }

    #[test]
    fn profile_values() {
        assert!((profile_shape(0.0_f64) - 1.128_379_167_095_512_6).abs() < 1e-15);
        // sqrt(tau/200) * 2/sqrt(pi) = 0.10149248393851476 (mpmath)
        assert!((asymptotic_profile(0.0_f64, 100) - 0.101_492_483_938_514_76).abs() < 1e-16);
        let mut prev = f64::INFINITY;
        for i in 0..400 {
            let v = profile_shape(i as f64 * 0.025);
            assert!(v >= 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn unit_mass_split() {
        let opts = HistogramOptions { centering: Centering::Raw, ..Default::default() };
        let h = averaged_histogram_with(1, 1, 1.0, 12, 3, opts).unwrap();
        assert_eq!(h.outside, 0);
        assert_eq!(h.counts.iter().sum::<u64>(), 2);
        let i0 = ((0.0 - h.lo) / h.bin_width).floor() as usize;
        let i1 = ((1.0 - h.lo) / h.bin_width).floor() as usize;
        assert_ne!(i0, i1);
        assert_eq!((h.counts[i0], h.counts[i1]), (1, 1));
        assert!((h.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn profile_histogram_has_zero_distance() {
        let h = Histogram::from_profile(1000, 50);
        assert_eq!(profile_distance(&h, 1000).unwrap(), 0.0);
        assert!(profile_distance(&h, 100).is_err());
    }

    #[test]
    fn histogram_is_thread_count_independent() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| averaged_histogram(300, 200, default_p_u(), 40, 11).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn fixed_composition_has_exact_frequency() {
        let s = sample_with(1000, default_p_u(), 5, 2, Sampler::FixedComposition).unwrap();
        assert_eq!(s.u_count(), 618);
    }
}
