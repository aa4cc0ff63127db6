//! Dispatch of a resolved [`ExperimentConfig`] to the library, and the
//! text of every emitted file.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use quasidiff::comb::{fourier_bohr, fourier_bohr_finite_tol, weyl_dense_tol};
use quasidiff::diffraction::{self, autocorr, autocorr_finite, cell_diameter, poisson_check, poisson_check_regular};
use quasidiff::model_set::{self, density_empirical, density_exact, model_set_points};
use quasidiff::random_tiling::{self, HistogramOptions, TilingReport};
use quasidiff::{ball_volume, Comb, Complex64, LatticePoint, PoissonReport, Scheme, Spectrum, TruncatedValue, Wavevector, Weight, Window};

use crate::config::{CommandKind, ExperimentConfig, Format};
use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Text of the files a run produces.
pub struct Outcome {
    pub main: String,
    /// Standalone JSON summary (random tiling in CSV mode).
    pub summary: Option<String>,
    /// A check command ran to completion but its tolerance was not met.
    pub check_failure: Option<String>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(cells: impl IntoIterator<Item = String>) -> String {
    let mut s = cells.into_iter().collect::<Vec<_>>().join(",");
    s.push('\n');
    s
}

/// A table together with the metadata that makes it self-describing.
struct Emission {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    truncation: Value,
    result: Value,
    summary: Option<Value>,
}

impl Emission {
    fn render(&self, cfg: &ExperimentConfig) -> String {
        match cfg.format {
            Format::Csv => {
                let mut out = String::new();
                writeln!(out, "# quasidiff {VERSION}").unwrap();
                writeln!(out, "# config: {}", cfg.to_json()).unwrap();
                writeln!(out, "# truncation: {}", self.truncation).unwrap();
                if let Some(s) = &self.summary {
                    writeln!(out, "# summary: {s}").unwrap();
                }
                out.push_str(&row(self.header.iter().cloned()));
                for r in &self.rows {
                    out.push_str(&row(r.iter().cloned()));
                }
                out
            }
            Format::Json => {
                let mut doc = json!({
                    "quasidiff": VERSION,
                    "config": serde_json::to_value(cfg).expect("config serializes"),
                    "truncation": self.truncation,
                    "result": self.result,
                });
                if let Some(s) = &self.summary {
                    doc["summary"] = s.clone();
                }
                let mut text = serde_json::to_string_pretty(&doc).expect("json");
                text.push('\n');
                text
            }
        }
    }
}

fn load_scheme(name: &str) -> Result<Scheme, Failure> {
    if name == "fibonacci" {
        return Ok(Scheme::fibonacci());
    }
    let path = name.strip_prefix("file:").unwrap_or(name);
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| Failure::Validation(format!("scheme `{name}` is neither `fibonacci` nor a readable file: {e}")))?;
    Ok(Scheme::from_json(&text)?)
}

struct Inputs {
    scheme: Scheme,
    weight: Option<Weight>,
    window: Option<Window<f64>>,
    a: Vec<f64>,
}

fn inputs(cfg: &ExperimentConfig) -> Result<Inputs, Failure> {
    let scheme = load_scheme(cfg.scheme.as_deref().unwrap_or("fibonacci"))?;
    let weight = cfg.weight.as_deref().map(|w| Weight::from_spec(w, scheme.dim_internal())).transpose()?;
    let window = cfg.window.as_deref().map(str::parse::<Window<f64>>).transpose()?;
    let a = cfg.a.clone().unwrap_or_else(|| vec![0.0; scheme.dim_direct()]);
    Ok(Inputs { scheme, weight, window, a })
}

fn comb(inp: &Inputs) -> Result<Comb, Failure> {
    Ok(Comb::new(inp.scheme.clone(), inp.weight.clone().expect("weight resolved"))?)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    let inp = inputs(cfg)?;
    let mut check_failure = None;
    let emission = match cfg.command {
        CommandKind::SchemeInfo => scheme_info(&inp)?,
        CommandKind::Modelset => modelset(cfg, &inp)?,
        CommandKind::Density => density(cfg, &inp)?,
        CommandKind::Weyl => weyl(cfg, &inp)?,
        CommandKind::FourierBohr => fourier(cfg, &inp)?,
        CommandKind::Autocorr => autocorrelation(cfg, &inp)?,
        CommandKind::Diffract => diffract(cfg, &inp)?,
        CommandKind::PoissonCheck => {
            let (e, report) = poisson(cfg, &inp)?;
            if !report.pass {
                check_failure = Some(format!(
                    "Poisson identity not met: defect {:e} exceeds tol {:e} times max(|lhs|, 1) (certified tails {:e} and {:e})",
                    report.defect, report.tol, report.lhs_tail, report.rhs_tail
                ));
            }
            e
        }
        CommandKind::Randomtile => randomtile(cfg)?,
    };
    let summary = match (cfg.command, cfg.format, &emission.summary) {
        (CommandKind::Randomtile, Format::Csv, Some(s)) => Some(serde_json::to_string_pretty(s).expect("json") + "\n"),
        _ => None,
    };
    Ok(Outcome { main: emission.render(cfg), summary, check_failure })
}

fn scheme_info(inp: &Inputs) -> Result<Emission, Failure> {
    let s = &inp.scheme;
    let dual = s.dual()?;
    let result = json!({
        "name": s.name(),
        "d": s.dim_direct(),
        "m": s.dim_internal(),
        "basis": s.basis(),
        "certified": s.is_certified(),
        "covolume": s.covolume(),
        "dual_basis": dual.basis(),
        "dual_covolume": dual.covolume(),
        "cell_diameter": cell_diameter(s),
        "dual_cell_diameter": cell_diameter(&dual),
    });
    let mut rows = vec![
        vec!["name".into(), s.name().to_string()],
        vec!["d".into(), s.dim_direct().to_string()],
        vec!["m".into(), s.dim_internal().to_string()],
        vec!["certified".into(), s.is_certified().to_string()],
        vec!["covolume".into(), num(s.covolume())],
        vec!["dual_covolume".into(), num(dual.covolume())],
        vec!["cell_diameter".into(), num(cell_diameter(s))],
        vec!["dual_cell_diameter".into(), num(cell_diameter(&dual))],
    ];
    rows.extend(s.basis().iter().enumerate().map(|(i, v)| vec![format!("basis{i}"), num(*v)]));
    rows.extend(dual.basis().iter().enumerate().map(|(i, v)| vec![format!("dual_basis{i}"), num(*v)]));
    Ok(Emission {
        header: vec!["key".into(), "value".into()],
        rows,
        truncation: json!({ "truncation_bound": 0.0 }),
        result,
        summary: None,
    })
}

fn window_of(inp: &Inputs) -> &Window<f64> {
    inp.window.as_ref().expect("window resolved")
}

fn modelset(cfg: &ExperimentConfig, inp: &Inputs) -> Result<Emission, Failure> {
    let s = &inp.scheme;
    let r = cfg.r.expect("r resolved");
    let points = model_set_points(s, window_of(inp), r, &inp.a)?;
    let mut buf = Vec::new();
    model_set::write_points_csv(&mut buf, s, &points)?;
    let text = String::from_utf8(buf).expect("utf8");
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    let d = s.dim_direct();
    let list: Vec<Value> = points
        .iter()
        .map(|p| {
            let x = s.position(p).expect("dimension checked");
            json!({ "coords": p.coords, "x": &x[..d], "xstar": &x[d..] })
        })
        .collect();
    Ok(Emission {
        header,
        rows,
        truncation: json!({ "truncation_bound": 0.0, "count": points.len() }),
        result: json!({ "count": points.len(), "points": list }),
        summary: None,
    })
}

fn density(cfg: &ExperimentConfig, inp: &Inputs) -> Result<Emission, Failure> {
    let s = &inp.scheme;
    let w = window_of(inp);
    let r = cfg.r.expect("r resolved");
    let emp = density_empirical(s, w, r, &inp.a)?;
    let exact = density_exact(s, w)?;
    let vol = ball_volume(s.dim_direct(), r);
    let count = (emp * vol).round();
    let rel = (emp - exact).abs() / exact;
    Ok(Emission {
        header: ["count", "ball_volume", "density_empirical", "density_exact", "relative_error"].map(String::from).to_vec(),
        rows: vec![vec![format!("{count}"), num(vol), num(emp), num(exact), num(rel)]],
        truncation: json!({ "truncation_bound": 0.0 }),
        result: json!({
            "count": count,
            "ball_volume": vol,
            "density_empirical": emp,
            "density_exact": exact,
            "relative_error": rel,
        }),
        summary: None,
    })
}

/// Finite sum and limit, as a two-row table.
fn finite_and_limit(finite: Complex64, finite_bound: f64, limit: Complex64, limit_error: f64, truncation: Value) -> Emission {
    Emission {
        header: ["quantity", "re", "im", "bound"].map(String::from).to_vec(),
        rows: vec![
            vec!["finite".into(), num(finite.re), num(finite.im), num(finite_bound)],
            vec!["limit".into(), num(limit.re), num(limit.im), num(limit_error)],
        ],
        result: json!({
            "finite": complex_json(finite),
            "finite_bound": finite_bound,
            "limit": complex_json(limit),
            "limit_error": limit_error,
        }),
        truncation,
        summary: None,
    }
}

fn truncated_json(v: &TruncatedValue<f64>) -> Value {
    json!({
        "truncation_bound": v.truncation_bound,
        "internal_radius": v.internal_radius,
        "points": v.points,
    })
}

fn weyl(cfg: &ExperimentConfig, inp: &Inputs) -> Result<Emission, Failure> {
    let r = cfg.r.expect("r resolved");
    match &inp.window {
        None => {
            let c = comb(inp)?;
            let v = weyl_dense_tol(&c, r, &inp.a, cfg.internal_tol)?;
            Ok(finite_and_limit(v.value, v.truncation_bound, c.rho(), c.rho_error(), truncated_json(&v)))
        }
        Some(w) => {
            let f = inp.weight.as_ref().expect("weight resolved");
            let v = model_set::weyl_average(&inp.scheme, w, f, r, &inp.a)?;
            let (integral, err) = f.integral()?;
            let cov = inp.scheme.covolume();
            Ok(finite_and_limit(v, 0.0, integral / cov, err / cov, json!({ "truncation_bound": 0.0 })))
        }
    }
}

fn fourier(cfg: &ExperimentConfig, inp: &Inputs) -> Result<Emission, Failure> {
    let r = cfg.r.expect("r resolved");
    let s = &inp.scheme;
    let dual_point = cfg.k.as_ref().map(|k| LatticePoint::new(k.clone()));
    let k_direct = match (&dual_point, &cfg.k_direct) {
        (Some(p), _) => s.dual()?.project_direct(p)?,
        (None, Some(v)) => v.clone(),
        (None, None) => unreachable!("resolve requires k"),
    };
    match &inp.window {
        None => {
            let c = comb(inp)?;
            let v = fourier_bohr_finite_tol(&c, &k_direct, r, &inp.a, cfg.internal_tol)?;
            let wave = match dual_point {
                Some(p) => Wavevector::Dual(p),
                None => Wavevector::OffModule(k_direct),
            };
            let (limit, err) = fourier_bohr(&c, &wave)?;
            Ok(finite_and_limit(v.value, v.truncation_bound, limit, err, truncated_json(&v)))
        }
        Some(w) => {
            let f = inp.weight.as_ref().expect("weight resolved");
            let v = model_set::fourier_bohr_regular_finite(s, w, f, Some(&k_direct), r, &inp.a)?;
            let (limit, err) = match &dual_point {
                Some(p) => model_set::fourier_bohr_regular(s, w, f, p)?,
                None => (Complex64::new(0.0, 0.0), 0.0),
            };
            Ok(finite_and_limit(v, 0.0, limit, err, json!({ "truncation_bound": 0.0 })))
        }
    }
}

fn autocorrelation(cfg: &ExperimentConfig, inp: &Inputs) -> Result<Emission, Failure> {
    let c = comb(inp)?;
    let s = &inp.scheme;
    let zs: Vec<LatticePoint> = cfg.z.as_ref().expect("z resolved").iter().map(|z| LatticePoint::new(z.clone())).collect();
    let mut header: Vec<String> = (0..s.dim()).map(|i| format!("z_c{i}")).collect();
    header.extend((0..s.dim_internal()).map(|i| format!("zstar{i}")));
    header.extend(["eta_re", "eta_im", "eta_error", "flushed"].map(String::from));
    if cfg.n.is_some() {
        header.extend(["finite_re", "finite_im", "finite_bound"].map(String::from));
    }
    let mut rows = Vec::with_capacity(zs.len());
    let mut entries = Vec::with_capacity(zs.len());
    let mut worst_bound = 0.0f64;
    for z in &zs {
        let zstar = s.star(z)?;
        let eta = autocorr(&c, z)?;
        let mut cells: Vec<String> = z.coords.iter().map(|v| v.to_string()).collect();
        cells.extend(zstar.iter().map(|v| num(*v)));
        cells.extend([num(eta.value.re), num(eta.value.im), num(eta.error), eta.flushed.to_string()]);
        let mut entry = json!({
            "z": z.coords,
            "zstar": zstar,
            "eta": complex_json(eta.value),
            "eta_error": eta.error,
            "flushed": eta.flushed,
        });
        if let Some(n) = cfg.n {
            let fin = autocorr_finite(&c, z, n)?;
            worst_bound = worst_bound.max(fin.truncation_bound);
            cells.extend([num(fin.value.re), num(fin.value.im), num(fin.truncation_bound)]);
            entry["finite"] = complex_json(fin.value);
            entry["finite_bound"] = json!(fin.truncation_bound);
        }
        rows.push(cells);
        entries.push(entry);
    }
    let truncation = match cfg.n {
        Some(_) => json!({ "truncation_bound": worst_bound }),
        None => json!({ "truncation_bound": 0.0 }),
    };
    Ok(Emission { header, rows, truncation, result: json!({ "entries": entries }), summary: None })
}

fn spectrum_emission(sp: &Spectrum) -> Result<Emission, Failure> {
    let mut buf = Vec::new();
    sp.write_csv(&mut buf)?;
    let text = String::from_utf8(buf).expect("utf8");
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    Ok(Emission {
        header,
        rows,
        truncation: json!({
            "completeness_bound": sp.completeness_bound,
            "intensity_error": sp.intensity_error,
            "kstar_radius": sp.kstar_radius,
            "k_radius": sp.k_radius,
            "region_total": sp.region_total,
            "listed_total": sp.listed_total,
        }),
        result: sp.to_json(),
        summary: None,
    })
}

fn diffract(cfg: &ExperimentConfig, inp: &Inputs) -> Result<Emission, Failure> {
    let floor = cfg.floor.expect("floor resolved");
    let k_radius = cfg.k_radius.expect("k_radius resolved");
    let sp = match &inp.window {
        None => diffraction::spectrum(&comb(inp)?, floor, cfg.kstar_radius, k_radius)?,
        Some(w) => {
            let f = inp.weight.as_ref().expect("weight resolved");
            diffraction::spectrum_regular(&inp.scheme, w, f, floor, cfg.kstar_radius, k_radius)?
        }
    };
    spectrum_emission(&sp)
}

fn poisson(cfg: &ExperimentConfig, inp: &Inputs) -> Result<(Emission, PoissonReport<f64>), Failure> {
    let sigma = cfg.sigma.expect("sigma resolved");
    let tol = cfg.tol.expect("tol resolved");
    eprintln!("quasidiff: poisson-check sigma={sigma:e} tol={tol:e}");
    let rep = match &inp.window {
        None => poisson_check(&comb(inp)?, sigma, tol)?,
        Some(w) => poisson_check_regular(&inp.scheme, w, inp.weight.as_ref().expect("weight resolved"), sigma, tol)?,
    };
    let radii = json!({
        "z_direct": rep.radii.z_direct,
        "z_internal": rep.radii.z_internal,
        "k_direct": rep.radii.k_direct,
        "k_internal": rep.radii.k_internal,
    });
    let header = [
        "lhs_re", "lhs_im", "rhs", "defect", "lhs_tail", "rhs_tail", "lhs_quadrature", "rhs_quadrature", "lhs_terms", "rhs_terms",
        "pass",
    ]
    .map(String::from)
    .to_vec();
    let rows = vec![vec![
        num(rep.lhs.re),
        num(rep.lhs.im),
        num(rep.rhs),
        num(rep.defect),
        num(rep.lhs_tail),
        num(rep.rhs_tail),
        num(rep.lhs_quadrature),
        num(rep.rhs_quadrature),
        rep.lhs_terms.to_string(),
        rep.rhs_terms.to_string(),
        rep.pass.to_string(),
    ]];
    let result = json!({
        "lhs": complex_json(rep.lhs),
        "rhs": rep.rhs,
        "defect": rep.defect,
        "lhs_tail": rep.lhs_tail,
        "rhs_tail": rep.rhs_tail,
        "lhs_quadrature": rep.lhs_quadrature,
        "rhs_quadrature": rep.rhs_quadrature,
        "lhs_terms": rep.lhs_terms,
        "rhs_terms": rep.rhs_terms,
        "pass": rep.pass,
    });
    let truncation = json!({
        "lhs_tail": rep.lhs_tail,
        "rhs_tail": rep.rhs_tail,
        "lhs_quadrature": rep.lhs_quadrature,
        "rhs_quadrature": rep.rhs_quadrature,
        "radii": radii,
    });
    Ok((Emission { header, rows, truncation, result, summary: None }, rep))
}

fn randomtile(cfg: &ExperimentConfig) -> Result<Emission, Failure> {
    let n = cfg.tiles.expect("tiles resolved");
    let m = cfg.samples.expect("samples resolved");
    let bins = cfg.bins.expect("bins resolved");
    let p = cfg.p_u.expect("p_u resolved");
    let seed = cfg.seed.expect("seed resolved");
    let options = HistogramOptions {
        sampler: cfg.sampler.as_deref().unwrap_or("bernoulli").parse()?,
        centering: cfg.centering.as_deref().unwrap_or("drift-line").parse()?,
    };
    eprintln!("quasidiff: randomtile M={m} N={n} p_u={p} seed={seed}");
    let h = random_tiling::averaged_histogram_with(m, n, p, bins, seed, options)?;
    let fit = match &cfg.width_fit {
        Some(ns) => {
            eprintln!("quasidiff: width fit over N = {ns:?}");
            Some(random_tiling::width_scaling(m, ns, p, bins, seed, options)?)
        }
        None => None,
    };
    let report = TilingReport::new(&h, fit)?;
    let centers = h.bin_centers();
    let profile: Vec<f64> = centers.iter().map(|&c| random_tiling::asymptotic_profile(c - h.center_offset, n)).collect();
    let rows = centers.iter().zip(&h.density).zip(&profile).map(|((c, d), f)| vec![num(*c), num(*d), num(*f)]).collect();
    let total = (m as f64) * (n as f64 + 1.0);
    let summary = serde_json::to_value(&report).expect("report serializes");
    Ok(Emission {
        header: ["bin_center", "empirical_density", "profile_value"].map(String::from).to_vec(),
        rows,
        truncation: json!({
            "outside": h.outside,
            "outside_fraction": h.outside as f64 / total,
            "lo": h.lo,
            "bin_width": h.bin_width,
        }),
        result: json!({
            "bin_center": centers,
            "empirical_density": h.density,
            "profile_value": profile,
            "counts": h.counts,
        }),
        summary: Some(summary),
    })
}
