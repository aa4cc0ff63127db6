use quasidiff::comb::fourier_bohr_finite;
use quasidiff::diffraction::{poisson_check_regular, spectrum, spectrum_regular, DEFAULT_K_RADIUS};
use quasidiff::model_set::{density_empirical, density_exact, fourier_bohr_regular, fourier_bohr_regular_finite, weyl_average};
use quasidiff::random_tiling::{
    self, averaged_histogram, averaged_histogram_with, internal_walk, profile_distance, sample, Histogram, HistogramOptions, Sampler,
};
use quasidiff::{Comb, Complex64, LatticePoint, Scheme, Weight, Window};

const TAU: f64 = 1.618_033_988_749_894_8;

fn gaussian_comb() -> Comb {
    Comb::new(Scheme::fibonacci(), Weight::gaussian(1, 1.0)).unwrap()
}

#[test]
fn density_converges_with_radius() {
    let s = Scheme::fibonacci();
    let w: Window<f64> = Window::fibonacci();
    let exact = density_exact(&s, &w).unwrap();
    let errs: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&r| (density_empirical(&s, &w, r, &[0.0]).unwrap() - exact).abs())
        .collect();
    // discrepancy is O(log r / r); allow a constant factor between radii
    assert!(errs[2] <= errs[0], "{errs:?}");
    assert!(errs[2] < 1e-3, "{errs:?}");
}

#[test]
fn regular_weyl_and_fourier_bohr_with_hat() {
    let s = Scheme::fibonacci();
    let w: Window<f64> = Window::fibonacci();
    let f = Weight::hat(-0.1, 0.7).unwrap();
    let v = weyl_average(&s, &w, &f, 1e4, &[0.0]).unwrap();
    let want = 0.7 / 5f64.sqrt();
    assert!((v - Complex64::new(want, 0.0)).norm() < 0.01 * want);
    for (p, q) in [(1, 0), (0, 1), (2, -1)] {
        let k = LatticePoint::new(vec![p, q]);
        let (limit, err) = fourier_bohr_regular(&s, &w, &f, &k).unwrap();
        let dual = s.dual().unwrap();
        let kd = dual.project_direct(&k).unwrap();
        let finite = fourier_bohr_regular_finite(&s, &w, &f, Some(&kd), 1e4, &[0.0]).unwrap();
        assert!((finite - limit).norm() < 0.02 * want + err, "{p},{q}: {finite} vs {limit}");
    }
}

#[test]
fn spectrum_is_symmetric_and_bounded() {
    let c = gaussian_comb();
    let sp = spectrum(&c, 1e-4, None, DEFAULT_K_RADIUS).unwrap();
    for p in &sp.peaks {
        let neg = LatticePoint::new(p.k_coords.coords.iter().map(|v| -v).collect::<Vec<_>>());
        let mirror = sp.peaks.iter().find(|q| q.k_coords == neg).expect("mirror peak listed");
        assert!((mirror.intensity - p.intensity).abs() <= 1e-15);
        assert!(p.intensity >= sp.floor && p.intensity <= 0.2 + 1e-15);
    }
    assert!(sp.listed_total <= sp.region_total);
    let listed: f64 = sp.peaks.iter().map(|p| p.intensity).sum();
    assert!((listed - sp.listed_total).abs() <= 1e-12);
    assert!(sp.completeness_bound < sp.floor);
    let empty = spectrum(&c, 0.3, None, DEFAULT_K_RADIUS).unwrap();
    assert!(empty.peaks.is_empty());
}

#[test]
fn regular_spectrum_and_poisson_with_hat() {
    let s = Scheme::fibonacci();
    let w: Window<f64> = Window::fibonacci();
    let f = Weight::hat(-0.1, 0.7).unwrap();
    let sp = spectrum_regular(&s, &w, &f, 1e-3, None, DEFAULT_K_RADIUS).unwrap();
    let top = &sp.peaks[0];
    assert!(top.k_coords.is_origin());
    assert!((top.intensity - 0.49 / 5.0).abs() < 1e-8, "{}", top.intensity);
    let rep = poisson_check_regular(&s, &w, &f, 1.0, 1e-3).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn off_module_coefficients_decay() {
    let c = gaussian_comb();
    let k = [1.0 / std::f64::consts::E];
    let small = fourier_bohr_finite(&c, &k, 1e2, &[0.0]).unwrap().value.norm();
    let large = fourier_bohr_finite(&c, &k, 1e4, &[0.0]).unwrap().value.norm();
    assert!(large < small);
    assert!(large < 1e-2 / 5f64.sqrt());
}

#[test]
fn walk_examples() {
    let all_u = sample(3, 1.0, 0).unwrap();
    assert_eq!(internal_walk::<f64>(&all_u), vec![0.0, 1.0, 2.0, 3.0]);
    let all_v = sample(2, 0.0, 0).unwrap();
    let stars = internal_walk::<f64>(&all_v);
    assert_eq!(stars.len(), 3);
    assert!((stars[2] - (2.0 - 2.0 * TAU)).abs() < 1e-12);
}

#[test]
fn u_frequency_within_three_standard_errors() {
    let p = random_tiling::default_p_u();
    let n = 100_000;
    let t = sample(n, p, 99).unwrap();
    let freq = t.u_count() as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((freq - p).abs() <= 3.0 * se, "{freq}");
    assert_eq!(sample(n, p, 99).unwrap(), t);
}

#[test]
fn histogram_normalization_and_profile_identity() {
    let h = averaged_histogram(500, 200, random_tiling::default_p_u(), 40, 1).unwrap();
    let expected = 1.0 - h.outside as f64 / (500.0 * 201.0);
    assert!((h.integral() - expected).abs() < 1e-12);
    let exact = Histogram::from_profile(200, 40);
    assert_eq!(profile_distance(&exact, 200).unwrap(), 0.0);
    assert!(profile_distance(&exact, 300).is_err());
}

#[test]
fn profile_distance_shrinks_with_tiles() {
    let p = random_tiling::default_p_u();
    let opts = HistogramOptions::default();
    let small = profile_distance(&averaged_histogram_with(2000, 100, p, 60, 3, opts).unwrap(), 100).unwrap();
    let large = profile_distance(&averaged_histogram_with(2000, 10_000, p, 60, 3, opts).unwrap(), 10_000).unwrap();
    assert!(large <= small, "{large} > {small}");
}

#[test]
fn fixed_composition_has_exact_frequency() {
    let p = random_tiling::default_p_u();
    let opts = HistogramOptions { sampler: Sampler::FixedComposition, ..HistogramOptions::default() };
    let h = averaged_histogram_with(300, 1000, p, 60, 8, opts).unwrap();
    assert!((h.u_frequency - (p * 1000.0).round() / 1000.0).abs() < 1e-12);
    // the endpoint is pinned, so the walk is a bridge and spreads less
    let free = averaged_histogram_with(300, 1000, p, 60, 8, HistogramOptions::default()).unwrap();
    assert!(h.std_dev < free.std_dev, "{} vs {}", h.std_dev, free.std_dev);
    let mean = random_tiling::predicted_mean_step(p);
    assert!((h.mean_step - mean).abs() < 1e-3);
}
