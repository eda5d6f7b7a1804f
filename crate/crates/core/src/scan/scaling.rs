use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::TimeGrid;
use crate::channel::BathSpec;
use crate::error::{Error, Result};
use crate::metrology::{peak_from_curve, qfi_at, qfi_curve, refine_peak};
use crate::states::StateSpec;

/// Fits whose largest residual is below this are exact; no slope error is reported.
pub const EXACT_FIT_RESIDUAL: f64 = 1e-9;

fn default_n_min() -> usize {
    1
}

fn default_n_max() -> usize {
    6
}

fn default_refine() -> usize {
    4
}

fn default_gamma() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    beta: f64,
    #[serde(default = "default_gamma")]
    gamma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScaling {
    #[serde(default = "default_n_min")]
    n_min: usize,
    #[serde(default = "default_n_max")]
    n_max: usize,
    bath: RawBath,
    #[serde(default)]
    time: TimeGrid,
    #[serde(default = "default_refine")]
    refine: usize,
    states: Vec<toml::Table>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledState {
    pub label: String,
    /// Family and parameters; `n_qubits` is replaced for each N.
    pub spec: StateSpec,
}

/// The fixed-t* N-scaling protocol: t* is the QFI argmax at the largest N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub bath: BathSpec,
    pub time: TimeGrid,
    /// Density factor of the second peak search around the coarse argmax.
    pub refine: usize,
    pub states: Vec<LabeledState>,
}

impl ScalingConfig {
    /// Parses TOML with `n_min`, `n_max`, `[bath]`, optional `[time]` and a
    /// `[[states]]` list; each entry holds a `label` plus the state fields
    /// without `n_qubits`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawScaling = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let bath = BathSpec::new(raw.bath.beta, raw.bath.gamma)
            .map_err(|e| Error::Config(format!("bath: {e}")))?;
        let mut states = Vec::with_capacity(raw.states.len());
        for (k, mut table) in raw.states.into_iter().enumerate() {
            let label = match table.remove("label") {
                Some(toml::Value::String(s)) => s,
                Some(_) => return Err(Error::Config(format!("states[{k}].label must be a string"))),
                None => table
                    .get("family")
                    .and_then(|f| f.as_str())
                    .map(String::from)
                    .unwrap_or_else(|| format!("state{k}")),
            };
            if table.contains_key("n_qubits") {
                return Err(Error::Config(format!(
                    "states[{k}] (`{label}`): n_qubits is set by n_min..n_max"
                )));
            }
            table.insert("n_qubits".into(), toml::Value::Integer(raw.n_max as i64));
            let spec: StateSpec = toml::Value::Table(table)
                .try_into()
                .map_err(|e: toml::de::Error| Error::Config(format!("states[{k}] (`{label}`): {e}")))?;
            states.push(LabeledState { label, spec });
        }
        let cfg = ScalingConfig { n_min: raw.n_min, n_max: raw.n_max, bath, time: raw.time, refine: raw.refine, states };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_max < 2 || self.n_min >= self.n_max {
            return Err(Error::Config(format!(
                "need 1 <= n_min < n_max and n_max >= 2, got {}..{}",
                self.n_min, self.n_max
            )));
        }
        if self.n_max > 10 {
            return Err(Error::Config(format!("n_max = {} exceeds the supported 10 qubits", self.n_max)));
        }
        if self.states.is_empty() {
            return Err(Error::Config("no [[states]] to fit".into()));
        }
        if self.refine < 1 {
            return Err(Error::Config("refine must be at least 1".into()));
        }
        self.bath.validate().map_err(|e| Error::Config(format!("bath: {e}")))?;
        self.time.resolve(&[self.bath])?;
        for s in &self.states {
            self.accepted_n(s)?;
        }
        Ok(())
    }

    /// Qubit counts in range that the family accepts, and those it rejects.
    fn accepted_n(&self, state: &LabeledState) -> Result<(Vec<usize>, Vec<usize>)> {
        let (mut ok, mut skipped) = (Vec::new(), Vec::new());
        for n in self.n_min..=self.n_max {
            match state.spec.with_param("n_qubits", n as f64)?.build() {
                Ok(_) => ok.push(n),
                Err(Error::Domain(_)) => skipped.push(n),
                Err(e) => return Err(Error::Config(format!("`{}` at N = {n}: {e}", state.label))),
            }
        }
        if ok.len() < 2 {
            return Err(Error::Config(format!(
                "`{}` is defined for fewer than two qubit counts in {}..{}",
                state.label, self.n_min, self.n_max
            )));
        }
        Ok((ok, skipped))
    }
}

/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; `None` for exact fits or two points.
    pub slope_stderr: Option<f64>,
    pub max_abs_residual: f64,
}

pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let m = x.len();
    if m != y.len() || m < 2 {
        return Err(Error::Domain(format!("fit needs two or more (x, y) pairs, got {m} and {}", y.len())));
    }
    let mf = m as f64;
    let (xm, ym) = (x.iter().sum::<f64>() / mf, y.iter().sum::<f64>() / mf);
    let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("fit abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - intercept - slope * a).collect();
    let max_abs_residual = residuals.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    let slope_stderr = if m > 2 && max_abs_residual > EXACT_FIT_RESIDUAL {
        let ssr: f64 = residuals.iter().map(|r| r * r).sum();
        Some((ssr / (mf - 2.0) / sxx).sqrt())
    } else {
        None
    };
    Ok(LinearFit { slope, intercept, slope_stderr, max_abs_residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub label: String,
    pub family: String,
    pub n: Vec<usize>,
    pub qfi: Vec<f64>,
    /// Refined time of the QFI maximum at the largest N.
    pub t_star: f64,
    /// Same maximum located on the configured grid alone.
    pub t_star_grid: f64,
    /// `|t_star − t_star_grid| / t_star_grid`
    pub t_star_shift: f64,
    /// `t_star` reaches `20/|λ|`.
    pub thermalized_at_t_star: bool,
    #[serde(flatten)]
    pub fit: LinearFit,
    /// Qubit counts the family does not define (GHZ at N = 1).
    pub skipped_n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub tool_version: String,
    pub units: String,
    pub config: ScalingConfig,
    pub thermalization_time: f64,
    pub fits: Vec<ScalingFit>,
}

impl ScalingReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn fit(&self, label: &str) -> Option<&ScalingFit> {
        self.fits.iter().find(|f| f.label == label)
    }
}

fn fit_state(cfg: &ScalingConfig, state: &LabeledState, times: &[f64]) -> Result<ScalingFit> {
    let (ns, skipped) = cfg.accepted_n(state)?;
    let n_top = *ns.last().expect("two or more accepted N");
    let top = state.spec.with_param("n_qubits", n_top as f64)?.build()?;
    let values = times
        .par_iter()
        .map(|&t| qfi_curve(&top, &cfg.bath, &[t]).map(|v| v[0]))
        .collect::<Result<Vec<f64>>>()?;
    let coarse = peak_from_curve(&top, &cfg.bath, times, &values)?;
    let fine = refine_peak(&top, &cfg.bath, times, &coarse, cfg.refine)?;
    let t_star = fine.t_peak;
    let t_star_shift = if coarse.t_peak > 0.0 { (t_star - coarse.t_peak).abs() / coarse.t_peak } else { 0.0 };

    let qfi = ns
        .par_iter()
        .map(|&n| qfi_at(&state.spec.with_param("n_qubits", n as f64)?, &cfg.bath, t_star))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(bad) = qfi.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("`{}`: QFI {bad} at t* = {t_star}", state.label)));
    }
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let fit = ols_fit(&x, &qfi)?;
    Ok(ScalingFit {
        label: state.label.clone(),
        family: state.spec.family().to_string(),
        n: ns,
        qfi,
        t_star,
        t_star_grid: coarse.t_peak,
        t_star_shift,
        thermalized_at_t_star: t_star >= cfg.bath.thermalization_time() * (1.0 - 1e-12),
        fit,
        skipped_n: skipped,
    })
}

/// For each state: t* from the largest-N time scan, QFI at t* for every N,
/// and a free-intercept least-squares line through those values.
pub fn run_n_scaling(cfg: &ScalingConfig) -> Result<ScalingReport> {
    cfg.validate()?;
    let times = cfg.time.resolve(&[cfg.bath])?;
    let fits = cfg.states.iter().map(|s| fit_state(cfg, s, &times)).collect::<Result<Vec<_>>>()?;
    Ok(ScalingReport {
        tool_version: format!("qthermo {}", env!("CARGO_PKG_VERSION")),
        units: super::UNITS_NOTE.to_string(),
        config: cfg.clone(),
        thermalization_time: cfg.bath.thermalization_time(),
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
n_min = 1
n_max = 3

[bath]
beta = 0.5

[time]
points = 80

[[states]]
label = "ground"
family = "ground"

[[states]]
label = "ghz"
family = "ghz"

[[states]]
family = "maximally_mixed"
"#;

    #[test]
    fn ols_recovers_lines_and_stderr() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let f = ols_fit(&x, &[1.5, 2.5, 3.5, 4.5]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-15 && (f.intercept - 0.5).abs() < 1e-15);
        assert!(f.slope_stderr.is_none());
        // y = x + (+e, −e, −e, +e): slope 1, intercept 0, stderr = sqrt(4e²/2 / 5)
        let e = 0.1;
        let f = ols_fit(&x, &[1.0 + e, 2.0 - e, 3.0 - e, 4.0 + e]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-14);
        assert!((f.slope_stderr.unwrap() - (4.0 * e * e / 2.0 / 5.0f64).sqrt()).abs() < 1e-14);
        assert!(ols_fit(&[1.0], &[1.0]).is_err());
        assert!(ols_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn parses_and_defaults_labels() {
        let c = ScalingConfig::from_toml(SMALL).unwrap();
        assert_eq!(c.states.len(), 3);
        assert_eq!(c.states[2].label, "maximally_mixed");
        assert_eq!(c.refine, 4);
        assert!(ScalingConfig::from_toml(&SMALL.replace("n_max = 3", "n_max = 1")).is_err());
        assert!(ScalingConfig::from_toml(&SMALL.replace("family = \"ghz\"", "family = \"ghz\"\nn_qubits = 2")).is_err());
        assert!(ScalingConfig::from_toml(&SMALL.replace("family = \"ground\"", "family = \"ground\"\neta = 1.0")).is_err());
    }

    #[test]
    fn small_scaling_run() {
        let c = ScalingConfig::from_toml(SMALL).unwrap();
        let r = run_n_scaling(&c).unwrap();
        let g = r.fit("ground").unwrap();
        assert_eq!(g.n, vec![1, 2, 3]);
        assert!(g.fit.max_abs_residual <= EXACT_FIT_RESIDUAL);
        assert!(g.fit.slope_stderr.is_none());
        let ghz = r.fit("ghz").unwrap();
        assert_eq!(ghz.n, vec![2, 3]);
        assert_eq!(ghz.skipped_n, vec![1]);
        let mm = r.fit("maximally_mixed").unwrap();
        assert!(mm.thermalized_at_t_star);
        assert!(g.fit.slope > mm.fit.slope);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(json["fits"][0]["slope"].is_f64());
        assert!(json["fits"][0]["slope_stderr"].is_null());
    }
}
