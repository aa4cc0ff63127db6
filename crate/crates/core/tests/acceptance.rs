//! Acceptance suite for the library, criteria 1 to 8. Prints one PASS/FAIL
//! line per criterion and exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use quasidiff::comb::{fourier_bohr_finite, weyl_dense};
use quasidiff::diffraction::{autocorr_finite, poisson_check, poisson_check_with_radii, spectrum, AutocorrelationTable, TableMode};
use quasidiff::model_set::{density_empirical, density_exact};
use quasidiff::numerics::{erfc, integrate_decaying, tail_sum_bound, DecayCertificate};
use quasidiff::random_tiling::{self, averaged_histogram_with, profile_distance, width_scaling, HistogramOptions};
use quasidiff::diffraction::PoissonRadii;
use quasidiff::{Comb, Complex64, LatticePoint, Scheme, Weight, Window};

const TAU: f64 = 1.618_033_988_749_894_8;

fn sqrt5() -> f64 {
    5f64.sqrt()
}

fn gaussian_comb() -> Comb {
    Comb::new(Scheme::fibonacci(), Weight::gaussian(1, 1.0)).unwrap()
}

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let s = Scheme::fibonacci();
    let base: Window<f64> = Window::fibonacci();
    let exact = TAU / sqrt5();
    assert!((density_exact(&s, &base).unwrap() - exact).abs() < 1e-15);
    let mut worst = 0.0f64;
    for a in [0.0, 17.3, -253.9] {
        for u in [0.0, 0.1, 0.37] {
            let w = base.translated(&[u]).unwrap();
            let d = density_empirical(&s, &w, 1e4, &[a]).unwrap();
            worst = worst.max((d - exact).abs() / exact);
        }
    }
    check(worst < 0.01, format!("worst relative deviation {worst:.2e} over 9 (a, u) pairs"))
}

fn criterion_2() -> Outcome {
    let c = gaussian_comb();
    let want = 1.0 / sqrt5();
    let mut worst = 0.0f64;
    for a in [0.0, 4321.5] {
        let v = weyl_dense(&c, 1e4, &[a]).unwrap();
        worst = worst.max((v.value - Complex64::new(want, 0.0)).norm() / want);
    }
    check(worst < 0.01, format!("worst relative deviation {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let c = gaussian_comb();
    let scale = 1.0 / sqrt5();
    let dual: [(i64, i64); 10] = [(1, 0), (0, 1), (1, 1), (2, 0), (-1, 0), (0, -1), (1, -1), (2, -1), (1, -2), (3, 2)];
    let mut worst = 0.0f64;
    for (p, q) in dual {
        let (k, kstar) = c.dual_position(&LatticePoint::new(vec![p, q])).unwrap();
        assert!(kstar[0].abs() <= 2.0);
        let want = scale * (-PI * kstar[0] * kstar[0]).exp();
        let got = fourier_bohr_finite(&c, &k, 1e4, &[0.0]).unwrap().value;
        worst = worst.max((got - Complex64::new(want, 0.0)).norm());
    }
    let mut monotone = true;
    let mut decays = Vec::new();
    for k in [0.1, 0.37, 2f64.sqrt() / 3.0, PI / 7.0, 0.777] {
        let mags: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&r| fourier_bohr_finite(&c, &[k], r, &[0.0]).unwrap().value.norm()).collect();
        monotone &= mags[1] <= 2.0 * mags[0] && mags[2] <= 2.0 * mags[1] && mags[2] < mags[0];
        decays.push(mags[2] / mags[0]);
    }
    let worst_decay = decays.iter().cloned().fold(0.0, f64::max);
    check(
        worst <= 0.02 * scale && monotone,
        format!("dual points: worst |c_r - c| = {worst:.2e} (limit {:.2e}); off-module |c_1e4|/|c_1e2| <= {worst_decay:.2e}", 0.02 * scale),
    )
}

fn criterion_4() -> Outcome {
    let c = gaussian_comb();
    let s = Scheme::fibonacci();
    let eta0 = 1.0 / 10f64.sqrt();
    let zs: Vec<LatticePoint> = [(0, 0), (1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (-1, 2), (3, 2), (-2, -1), (5, 3)]
        .iter()
        .map(|&(a, b)| LatticePoint::new(vec![a, b]))
        .collect();
    let mut worst = 0.0f64;
    for z in &zs {
        let zs_ = s.star(z).unwrap()[0];
        let want = (-PI * zs_ * zs_ / 2.0).exp() / 10f64.sqrt();
        let got = autocorr_finite(&c, z, 1e4).unwrap().value;
        worst = worst.max((got - Complex64::new(want, 0.0)).norm());
    }
    let table = AutocorrelationTable::for_gram(&c, &zs, TableMode::FiniteN { n: 1e4 }).unwrap();
    let min_eig = table.gram_min_eigenvalue(&zs).unwrap();
    check(
        worst <= 0.02 * eta0 && min_eig >= -1e-8 * eta0,
        format!("worst |eta_n - eta| = {worst:.2e} (limit {:.2e}); Gram min eigenvalue {min_eig:.3e}", 0.02 * eta0),
    )
}

fn criterion_5() -> Outcome {
    let c = gaussian_comb();
    let sp = spectrum(&c, 1e-3, None, quasidiff::diffraction::DEFAULT_K_RADIUS).unwrap();
    let mut identity = 0.0f64;
    for p in &sp.peaks {
        let want = 0.2 * (-2.0 * PI * p.k_star[0] * p.k_star[0]).exp();
        identity = identity.max((p.intensity - want).abs());
    }
    let top = &sp.peaks[0];
    let origin_ok = top.k_coords.is_origin() && (top.intensity - 0.2).abs() <= 1e-12;
    let mut finite_worst = 0.0f64;
    for p in sp.peaks.iter().take(5) {
        let cr = fourier_bohr_finite(&c, &p.k_direct, 1e4, &[0.0]).unwrap().value.norm();
        finite_worst = finite_worst.max((cr * cr - p.intensity).abs() / p.intensity);
    }
    check(
        identity <= 1e-10 && origin_ok && finite_worst <= 0.02,
        format!(
            "{} peaks; identity error {identity:.2e}; I(0) = {:.17}; top-5 vs |c_r|^2 worst relative {finite_worst:.2e}",
            sp.peaks.len(),
            top.intensity
        ),
    )
}

fn criterion_6() -> Outcome {
    let c = gaussian_comb();
    let rep = poisson_check(&c, 1.0, 1e-3).unwrap();
    let small = poisson_check_with_radii(&c, 1.0, 1e-3, PoissonRadii::uniform(1.0)).unwrap();
    let doubled = poisson_check_with_radii(&c, 1.0, 1e-3, PoissonRadii::uniform(2.0)).unwrap();
    check(
        rep.pass && doubled.defect < small.defect,
        format!(
            "defect {:.2e} with tails {:.2e}/{:.2e}; radii 1 -> 2 shrinks defect {:.2e} -> {:.2e}",
            rep.defect, rep.lhs_tail, rep.rhs_tail, small.defect, doubled.defect
        ),
    )
}

fn criterion_7() -> Outcome {
    let opts = HistogramOptions::default();
    let p = random_tiling::default_p_u();
    let h = averaged_histogram_with(10_000, 1000, p, 60, 20_261_016, opts).unwrap();
    let l1 = profile_distance(&h, 1000).unwrap();
    let fit = width_scaling(2000, &[100, 1000, 10_000], p, 60, 7, opts).unwrap();
    // |f(z)| <= 425 / (1 + |z|)^11 (max of (1+z)^11 f(z) is 424.84)
    let cert = DecayCertificate { c: 500.0, beta: 10.0 };
    let q = integrate_decaying(|z: &[f64]| Complex64::new(random_tiling::profile_shape(z[0]), 0.0), 1, cert, 1e-10).unwrap();
    let integral_err = (q.value.re - 1.0).abs();
    let drift_z = (h.mean_step - random_tiling::predicted_mean_step(p)).abs() / h.mean_step_se;
    check(
        l1 < 0.05 && (fit.exponent - 0.5).abs() <= 0.05 && integral_err <= 1e-8 && drift_z <= 3.0,
        format!(
            "L1 = {l1:.4}; width exponent {:.4} (sd {:?}); |int f - 1| = {integral_err:.1e}; mean step off by {drift_z:.2} SE",
            fit.exponent,
            fit.std_devs.iter().map(|s| (s * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    )
}

fn criterion_8() -> Outcome {
    let e1 = erfc(1.0f64);
    let erfc_err = (e1 - 0.157_299_207_050_285_13).abs();
    // sum_{n >= R} n^{-(1+alpha)} = zeta(1 + alpha, R), from mpmath
    let hurwitz = [
        (0.5, 10.0, 0.648_661_631_941_570_4),
        (0.5, 100.0, 0.200_501_249_981_771_9),
        (0.5, 1000.0, 0.063_261_368_544_514_93),
        (1.0, 10.0, 0.105_166_335_681_685_75),
        (1.0, 100.0, 0.010_050_166_663_333_571),
        (1.0, 1000.0, 0.001_000_500_166_666_633_3),
        (2.0, 10.0, 0.005_524_917_485_401_034),
        (2.0, 100.0, 5.050_249_991_667_5e-5),
        (2.0, 1000.0, 5.005_002_499_999_167e-7),
    ];
    let mut dominated = true;
    for (alpha, r, exact) in hurwitz {
        let b = tail_sum_bound(alpha, r);
        let partial: f64 = (r as u64..r as u64 * 1000).map(|n| (n as f64).powf(-(1.0 + alpha))).sum();
        dominated &= b >= exact && b >= partial;
    }
    let cert = DecayCertificate { c: 100.0, beta: 10.0 };
    let g = integrate_decaying(|y: &[f64]| Complex64::new((-PI * y[0] * y[0]).exp(), 0.0), 1, cert, 1e-13).unwrap();
    let gauss_err = (g.value.re - 1.0).abs();
    check(
        erfc_err <= 1e-10 && dominated && gauss_err <= 1e-12,
        format!("|erfc(1) - ref| = {erfc_err:.1e}; tail bound dominates on 9 (alpha, R); |int e^(-pi y^2) - 1| = {gauss_err:.1e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("density formula", criterion_1),
        ("Weyl average of the dense comb", criterion_2),
        ("Fourier-Bohr coefficients", criterion_3),
        ("autocorrelation", criterion_4),
        ("diffraction formula", criterion_5),
        ("generalized Poisson summation", criterion_6),
        ("random tiling profile", criterion_7),
        ("numerics kernels", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (verdict, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} ({name}): {verdict} [{detail}; {:.1}s]", i + 1, start.elapsed().as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
