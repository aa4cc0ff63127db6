//! Experiment configuration: what the command line parses into, what every
//! output file carries in its metadata block, and what `--config` replays.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use quasidiff::random_tiling::{self, Centering, Sampler};

use crate::Failure;

pub const MAX_RADIUS: f64 = 1e7;
pub const MAX_KSTAR_RADIUS: f64 = 1e3;
pub const MAX_K_RADIUS: f64 = 1e6;
pub const MAX_TILES: usize = 100_000_000;
pub const MAX_SAMPLES: usize = 100_000_000;
pub const MAX_BINS: usize = 1_000_000;
pub const MAX_Z: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    SchemeInfo,
    Modelset,
    Density,
    Weyl,
    FourierBohr,
    Autocorr,
    Diffract,
    PoissonCheck,
    Randomtile,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("unit enum");
        write!(f, "{}", v.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One experiment. Unset options take per-command defaults in
/// [`ExperimentConfig::resolve`]; the resolved form is what gets emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_direct: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub internal_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kstar_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centering: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_fit: Option<Vec<usize>>,
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn positive(name: &str, v: f64, cap: f64) -> Result<f64, Failure> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(format!("--{name} must be positive and finite, got {v}")));
    }
    if v > cap {
        return Err(invalid(format!("--{name} = {v:e} exceeds the cap {cap:e}")));
    }
    Ok(v)
}

fn count(name: &str, v: usize, cap: usize) -> Result<usize, Failure> {
    if v == 0 || v > cap {
        return Err(invalid(format!("--{name} must lie in 1..={cap}, got {v}")));
    }
    Ok(v)
}

impl ExperimentConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            format: Format::Csv,
            scheme: None,
            weight: None,
            window: None,
            r: None,
            a: None,
            n: None,
            k: None,
            k_direct: None,
            z: None,
            internal_tol: None,
            floor: None,
            kstar_radius: None,
            k_radius: None,
            sigma: None,
            tol: None,
            tiles: None,
            samples: None,
            p_u: None,
            bins: None,
            seed: None,
            sampler: None,
            centering: None,
            width_fit: None,
        }
    }

    /// Names of the options that are set.
    fn present(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut mark = |set: bool, name: &'static str| {
            if set {
                v.push(name);
            }
        };
        mark(self.scheme.is_some(), "scheme");
        mark(self.weight.is_some(), "weight");
        mark(self.window.is_some(), "window");
        mark(self.r.is_some(), "r");
        mark(self.a.is_some(), "a");
        mark(self.n.is_some(), "n");
        mark(self.k.is_some(), "k");
        mark(self.k_direct.is_some(), "k-direct");
        mark(self.z.is_some(), "z");
        mark(self.internal_tol.is_some(), "internal-tol");
        mark(self.floor.is_some(), "floor");
        mark(self.kstar_radius.is_some(), "kstar-radius");
        mark(self.k_radius.is_some(), "k-radius");
        mark(self.sigma.is_some(), "sigma");
        mark(self.tol.is_some(), "tol");
        mark(self.tiles.is_some(), "tiles");
        mark(self.samples.is_some(), "samples");
        mark(self.p_u.is_some(), "p-u");
        mark(self.bins.is_some(), "bins");
        mark(self.seed.is_some(), "seed");
        mark(self.sampler.is_some(), "sampler");
        mark(self.centering.is_some(), "centering");
        mark(self.width_fit.is_some(), "width-fit");
        v
    }

    fn allowed(&self) -> &'static [&'static str] {
        match self.command {
            CommandKind::SchemeInfo => &["scheme"],
            CommandKind::Modelset | CommandKind::Density => &["scheme", "window", "r", "a"],
            CommandKind::Weyl => &["scheme", "weight", "window", "r", "a", "internal-tol"],
            CommandKind::FourierBohr => &["scheme", "weight", "window", "r", "a", "k", "k-direct", "internal-tol"],
            CommandKind::Autocorr => &["scheme", "weight", "z", "n"],
            CommandKind::Diffract => &["scheme", "weight", "window", "floor", "kstar-radius", "k-radius"],
            CommandKind::PoissonCheck => &["scheme", "weight", "window", "sigma", "tol"],
            CommandKind::Randomtile => {
                &["tiles", "samples", "p-u", "bins", "seed", "sampler", "centering", "width-fit"]
            }
        }
    }

    /// Checks ranges and fills every default, so that the emitted config
    /// pins the run completely.
    pub fn resolve(mut self) -> Result<Self, Failure> {
        let allowed = self.allowed();
        if let Some(bad) = self.present().into_iter().find(|p| !allowed.contains(p)) {
            return Err(invalid(format!("--{bad} is not used by `{}`", self.command)));
        }
        use CommandKind::*;
        let cmd = self.command;
        if cmd != Randomtile {
            self.scheme.get_or_insert_with(|| "fibonacci".into());
        }
        if matches!(cmd, Weyl | FourierBohr | Autocorr | Diffract | PoissonCheck) {
            self.weight.get_or_insert_with(|| "gaussian".into());
        }
        if matches!(cmd, Modelset | Density) {
            self.window.get_or_insert_with(|| "fibonacci".into());
        }
        if matches!(cmd, Modelset | Density | Weyl | FourierBohr) {
            let default = if cmd == Modelset { 10.0 } else { 1e4 };
            positive("r", *self.r.get_or_insert(default), MAX_RADIUS)?;
        }
        if let Some(t) = self.internal_tol {
            positive("internal-tol", t, 1.0)?;
        }
        match cmd {
            FourierBohr => match (&self.k, &self.k_direct) {
                (Some(_), Some(_)) => return Err(invalid("give either --k (dual coordinates) or --k-direct, not both")),
                (None, None) => return Err(invalid("fourier-bohr needs --k or --k-direct")),
                (_, Some(kd)) if kd.iter().any(|v| !v.is_finite()) => return Err(invalid("--k-direct must be finite")),
                _ => {}
            },
            Autocorr => {
                let z = self.z.get_or_insert_with(|| vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
                if z.is_empty() || z.len() > MAX_Z {
                    return Err(invalid(format!("--z needs between 1 and {MAX_Z} vectors")));
                }
                if let Some(n) = self.n {
                    positive("n", n, MAX_RADIUS)?;
                }
            }
            Diffract => {
                positive("floor", *self.floor.get_or_insert(1e-3), f64::MAX)?;
                positive("k-radius", *self.k_radius.get_or_insert(quasidiff::diffraction::DEFAULT_K_RADIUS), MAX_K_RADIUS)?;
                if let Some(kr) = self.kstar_radius {
                    positive("kstar-radius", kr, MAX_KSTAR_RADIUS)?;
                }
            }
            PoissonCheck => {
                positive("sigma", *self.sigma.get_or_insert(1.0), 1e3)?;
                positive("tol", *self.tol.get_or_insert(1e-3), 1.0)?;
            }
            Randomtile => {
                if self.seed.is_none() {
                    return Err(invalid("randomtile needs an explicit --seed"));
                }
                count("tiles", *self.tiles.get_or_insert(1000), MAX_TILES)?;
                count("samples", *self.samples.get_or_insert(1000), MAX_SAMPLES)?;
                count("bins", *self.bins.get_or_insert(60), MAX_BINS)?;
                let p = *self.p_u.get_or_insert_with(random_tiling::default_p_u);
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(format!("--p-u must lie in [0, 1], got {p}")));
                }
                let sampler: Sampler = self.sampler.get_or_insert_with(|| "bernoulli".into()).parse().map_err(|e| invalid(format!("{e}")))?;
                self.sampler = Some(sampler.to_string());
                let centering: Centering =
                    self.centering.get_or_insert_with(|| "drift-line".into()).parse().map_err(|e| invalid(format!("{e}")))?;
                self.centering = Some(centering.to_string());
                if let Some(ns) = &self.width_fit {
                    if ns.len() < 2 {
                        return Err(invalid("--width-fit needs at least two system sizes"));
                    }
                    for &n in ns {
                        count("width-fit", n, MAX_TILES)?;
                    }
                }
            }
            _ => {}
        }
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Reads a config from a bare JSON config, a JSON output (its `config`
/// member), or a CSV output (its `# config:` line).
pub fn load(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(trimmed).map_err(|e| e.to_string())?;
        let inner = match value.get("config") {
            Some(c) if value.get("command").is_none() => c.clone(),
            _ => value,
        };
        return serde_json::from_value(inner).map_err(|e| e.to_string());
    }
    let line = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# config:"))
        .ok_or("no `# config:` line in the metadata block")?;
    serde_json::from_str(line.trim()).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolved_config_round_trips() {
        let mut c = ExperimentConfig::new(CommandKind::Randomtile);
        c.seed = Some(7);
        let c = c.resolve().unwrap();
        assert_eq!(c.p_u, Some(random_tiling::default_p_u()));
        let back = parse(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.p_u.unwrap().to_bits(), c.p_u.unwrap().to_bits());
        let csv = format!("# quasidiff 0.1.0\n# config: {}\nbin_center\n", c.to_json());
        assert_eq!(parse(&csv).unwrap(), c);
        let wrapped = format!("{{\"quasidiff\":\"0.1.0\",\"config\":{}}}", c.to_json());
        assert_eq!(parse(&wrapped).unwrap(), c);
    }

    #[test]
    fn validation() {
        assert!(matches!(ExperimentConfig::new(CommandKind::Randomtile).resolve(), Err(Failure::Validation(_))));
        let mut c = ExperimentConfig::new(CommandKind::Weyl);
        c.sigma = Some(1.0);
        assert!(c.resolve().is_err());
        let mut c = ExperimentConfig::new(CommandKind::Density);
        c.r = Some(-1.0);
        assert!(c.resolve().is_err());
        let mut c = ExperimentConfig::new(CommandKind::Density);
        c.r = Some(1e9);
        assert!(c.resolve().is_err());
        assert!(ExperimentConfig::new(CommandKind::FourierBohr).resolve().is_err());
        assert!(parse("{\"command\":\"weyl\",\"bogus\":1}").is_err());
    }
}
