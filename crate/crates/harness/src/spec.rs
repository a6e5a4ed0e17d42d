//! Experiment configuration: defaults, `key=value` files and flag overrides.
//!
//! Flags and config files share one vocabulary, so a file line `mstar=30`
//! and the flag `--mstar 30` are interchangeable. List values use commas
//! (`alpha=0.9,1,1.1`); seeds also accept ranges (`0..20`, `3..=7`).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gapcs::synth::MatrixKind;

use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    MStarSweep,
    KSweep,
    NoiseEstimation,
    TheoryGrid,
    Image,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::MStarSweep => "m_star_sweep",
            ExperimentKind::KSweep => "k_sweep",
            ExperimentKind::NoiseEstimation => "noise_estimation",
            ExperimentKind::TheoryGrid => "theory_grid",
            ExperimentKind::Image => "image",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub matrix_kind: MatrixKind,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// Defaults to `k`.
    pub m_star: Option<usize>,
    pub alphas: Vec<f64>,
    /// SNR of the noisy condition, where the experiment has one.
    pub snr_db: Option<f64>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub max_iters: usize,
    /// Swept `m*` values or swept `K` values.
    pub sweep_values: Vec<usize>,
    /// Noise standard deviations for the estimation experiment.
    pub noise_stds: Vec<f64>,
    /// Grid points per axis for the theory grid (`points³` tuples in total, capped by the m* list).
    pub grid_points: usize,
    /// Random subsets used when `δ` must be sampled.
    pub delta_samples: usize,
    pub image: Option<PathBuf>,
    /// Side of the synthetic scene when no image is given.
    pub image_size: usize,
    pub rate: f64,
    pub patch: usize,
    pub stride: usize,
}

impl ExperimentSpec {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let (alphas, snr_db, seeds, sweep_values) = match experiment {
            ExperimentKind::Convergence => (vec![0.9, 1.0, 1.1], Some(60.0), 0..20, vec![]),
            ExperimentKind::MStarSweep => (vec![1.0], None, 0..20, (1..=10).map(|i| 10 * i).collect()),
            ExperimentKind::KSweep => (vec![1.0], None, 0..20, (2..=9).map(|i| 5 * i).collect()),
            ExperimentKind::NoiseEstimation => (vec![1.0], None, 0..20, vec![]),
            ExperimentKind::TheoryGrid => (vec![1.0], None, 0..1, vec![]),
            ExperimentKind::Image => (vec![1.0], Some(60.0), 0..5, vec![]),
        };
        Self {
            experiment,
            matrix_kind: MatrixKind::Gaussian,
            m: 300,
            n: 512,
            k: 20,
            m_star: None,
            alphas,
            snr_db,
            seeds: seeds.collect(),
            output_dir: PathBuf::from("out"),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            max_iters: 500,
            sweep_values,
            noise_stds: vec![1e-4, 1e-3, 1e-2, 1e-1],
            grid_points: 10,
            delta_samples: 2000,
            image: None,
            image_size: 64,
            rate: 0.10,
            patch: 8,
            stride: 4,
        }
    }

    pub fn m_star(&self) -> usize {
        self.m_star.unwrap_or(self.k)
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let value = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "m" => self.m = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "mstar" | "m-star" => self.m_star = Some(parse(key, value)?),
            "alpha" | "alphas" => self.alphas = parse_list(key, value)?,
            "snr-db" => {
                self.snr_db = match value {
                    "none" | "" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "matrix" | "matrix-kind" => {
                self.matrix_kind = value
                    .parse()
                    .map_err(|_| usage(format!("unknown matrix kind `{value}`")))?
            }
            "seeds" => self.seeds = parse_seeds(value)?,
            "out" | "output-dir" => self.output_dir = PathBuf::from(value),
            "workers" => self.workers = parse(key, value)?,
            "max-iters" => self.max_iters = parse(key, value)?,
            "values" => self.sweep_values = parse_list(key, value)?,
            "stds" => self.noise_stds = parse_list(key, value)?,
            "grid-points" => self.grid_points = parse(key, value)?,
            "delta-samples" => self.delta_samples = parse(key, value)?,
            "image" => self.image = Some(PathBuf::from(value)),
            "size" | "image-size" => self.image_size = parse(key, value)?,
            "rate" => self.rate = parse(key, value)?,
            "patch" => self.patch = parse(key, value)?,
            "stride" => self.stride = parse(key, value)?,
            other => return Err(usage(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    /// Applies settings in order; later entries win.
    pub fn apply<'a, I>(&mut self, pairs: I) -> Result<(), HarnessError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<(), HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let pairs = parse_config(&text)?;
        self.apply(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.m == 0 || self.k == 0 {
            return Err(usage("m and k must be positive"));
        }
        if self.m >= self.n {
            return Err(usage(format!("need m < n, got m={} n={}", self.m, self.n)));
        }
        if self.m_star() == 0 || self.m_star() > self.n {
            return Err(usage(format!("m* must lie in 1..={}", self.n)));
        }
        if self.k > self.n {
            return Err(usage("k exceeds n"));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| *a <= 0.0 || !a.is_finite()) {
            return Err(usage("alphas must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(usage("at least one seed is required"));
        }
        if self.workers == 0 {
            return Err(usage("workers must be positive"));
        }
        if self.max_iters == 0 {
            return Err(usage("max-iters must be positive"));
        }
        if matches!(self.snr_db, Some(s) if s.is_nan()) {
            return Err(usage("snr-db must be a number"));
        }
        match self.experiment {
            ExperimentKind::MStarSweep | ExperimentKind::KSweep if self.sweep_values.is_empty() => {
                Err(usage("sweep needs at least one value"))
            }
            ExperimentKind::KSweep if self.sweep_values.iter().any(|&k| k == 0 || k > self.n) => {
                Err(usage("swept K must lie in 1..=n"))
            }
            ExperimentKind::MStarSweep
                if self.sweep_values.iter().any(|&v| v == 0 || v > self.n) =>
            {
                Err(usage("swept m* must lie in 1..=n"))
            }
            ExperimentKind::NoiseEstimation
                if self.noise_stds.is_empty() || self.noise_stds.iter().any(|s| s.is_nan() || *s < 0.0) =>
            {
                Err(usage("noise stds must be nonnegative"))
            }
            ExperimentKind::Image
                if !(self.rate > 0.0 && self.rate <= 1.0) || self.patch == 0 || self.stride == 0 =>
            {
                Err(usage("image needs 0 < rate <= 1 and positive patch/stride"))
            }
            ExperimentKind::TheoryGrid if self.grid_points < 2 => {
                Err(usage("grid-points must be at least 2"))
            }
            _ => Ok(()),
        }
    }
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .parse()
        .map_err(|_| usage(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, HarnessError> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s.trim()))
        .collect()
}

/// `"1,2,5"`, `"0..20"` (exclusive) or `"3..=7"`, possibly mixed: `"0..3,10"`.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>, HarnessError> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..=") {
            let (lo, hi): (u64, u64) = (parse("seeds", lo)?, parse("seeds", hi)?);
            out.extend(lo..=hi);
        } else if let Some((lo, hi)) = part.split_once("..") {
            let (lo, hi): (u64, u64) = (parse("seeds", lo)?, parse("seeds", hi)?);
            out.extend(lo..hi);
        } else {
            out.push(parse("seeds", part)?);
        }
    }
    if out.is_empty() {
        return Err(usage(format!("no seeds in `{value}`")));
    }
    Ok(out)
}

/// Flat `key=value` lines; `#` starts a comment. Repeated keys accumulate
/// for `alpha`, mirroring the repeatable flag.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, HarnessError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", i + 1)))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k == "alpha" {
            if let Some(prev) = out.iter_mut().find(|(pk, _)| pk == "alpha") {
                prev.1 = format!("{},{}", prev.1, v);
                continue;
            }
        }
        out.push((k, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_reference_setup() {
        let s = ExperimentSpec::defaults(ExperimentKind::Convergence);
        assert_eq!((s.m, s.n, s.k, s.m_star()), (300, 512, 20, 20));
        assert_eq!(s.alphas, vec![0.9, 1.0, 1.1]);
        assert_eq!(s.snr_db, Some(60.0));
        assert_eq!(s.seeds.len(), 20);
        s.validate().unwrap();
    }

    #[test]
    fn seeds_syntax() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("3..=5,9").unwrap(), vec![3, 4, 5, 9]);
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn config_then_flags() {
        let mut s = ExperimentSpec::defaults(ExperimentKind::MStarSweep);
        let cfg = parse_config("# comment\nm = 100\nn=200\nalpha=0.5\nalpha=0.7 # trailing\nmatrix=binary\n").unwrap();
        s.apply(cfg.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!((s.m, s.n), (100, 200));
        assert_eq!(s.alphas, vec![0.5, 0.7]);
        assert_eq!(s.matrix_kind, MatrixKind::Binary);
        s.apply([("m", "50"), ("snr_db", "30")]).unwrap();
        assert_eq!(s.m, 50);
        assert_eq!(s.snr_db, Some(30.0));
    }

    #[test]
    fn invalid_settings() {
        let mut s = ExperimentSpec::defaults(ExperimentKind::KSweep);
        assert!(matches!(s.set("bogus", "1"), Err(HarnessError::Usage(_))));
        assert!(s.set("m", "abc").is_err());
        assert!(parse_config("novalue").is_err());
        s.set("m", "600").unwrap();
        assert!(s.validate().is_err());
    }
}
