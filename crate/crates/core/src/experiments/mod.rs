//! Figure datasets, trend checks and the cross-engine verification suite.

pub mod output;
pub mod quadrature;
pub mod sweep;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::McEstimate;
use output::{format_f64, format_opt, format_opt_f64, TableRow};

pub use quadrature::quadrature_pr_best_is;
pub use sweep::{
    dt_intercept_at_outage, mer_ordering_check, scheme_ordering_check, sweep_intercept_vs_n,
    sweep_outage_vs_n, sweep_srt_curve, SweepOutput,
};
pub use verify::{verify_suite, VerifyOptions, VerifyRecord, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    SrtCurve,
    OutageVsN,
    InterceptVsN,
    Verify,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::SrtCurve => "srt_curve",
            SweepKind::OutageVsN => "outage_vs_n",
            SweepKind::InterceptVsN => "intercept_vs_n",
            SweepKind::Verify => "verify",
        }
    }
}

/// Evaluation route of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Subset enumeration with per-link gains.
    AnalyticGeneral,
    /// i.i.d. closed forms (finite `n`).
    AnalyticIid,
    /// Large-`n` closed forms.
    Asymptotic,
    /// Event simulation.
    Mc,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::AnalyticGeneral => "analytic_general",
            Engine::AnalyticIid => "analytic_iid",
            Engine::Asymptotic => "asymptotic",
            Engine::Mc => "mc",
        }
    }

    pub fn all() -> [Engine; 4] {
        [
            Engine::AnalyticGeneral,
            Engine::AnalyticIid,
            Engine::Asymptotic,
            Engine::Mc,
        ]
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Engine::all()
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown engine '{s}'")))
    }
}

/// Where an (outage, intercept) pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Mc,
    Asymptotic,
}

/// Paired outage and intercept probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrtPoint {
    pub p_out: f64,
    pub p_int: f64,
    pub provenance: Provenance,
}

/// Parameters of a sweep. Which fields matter depends on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// `delta / sigma_m2` for SRT curves, relay counts for the `n` sweeps.
    pub grid: Vec<f64>,
    pub mer_db: f64,
    /// Relay counts drawn on SRT curves.
    pub n_relays: Vec<usize>,
    /// Intercept constraint for `outage_vs_n`, outage constraint for `intercept_vs_n`.
    pub constraint: Option<f64>,
    /// Data rate used to express thresholds as an SNR.
    pub rate: f64,
    pub engines: Vec<Engine>,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

pub const DEFAULT_RATE: f64 = 1.0;
pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 42;

impl SweepSpec {
    pub fn new(kind: SweepKind, grid: Vec<f64>, mer_db: f64) -> Self {
        SweepSpec {
            kind,
            grid,
            mer_db,
            n_relays: vec![2, 4, 6],
            constraint: None,
            rate: DEFAULT_RATE,
            engines: match kind {
                SweepKind::OutageVsN | SweepKind::InterceptVsN => {
                    vec![Engine::AnalyticIid, Engine::Asymptotic]
                }
                _ => vec![
                    Engine::AnalyticGeneral,
                    Engine::AnalyticIid,
                    Engine::Asymptotic,
                ],
            },
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::domain("sweep grid must not be empty"));
        }
        if !self.grid.iter().all(|g| g.is_finite()) {
            return Err(Error::domain("sweep grid values must be finite"));
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::domain("sweep grid must be strictly increasing"));
        }
        if !self.mer_db.is_finite() {
            return Err(Error::domain("mer_db must be finite"));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::domain("rate must be positive"));
        }
        match self.kind {
            SweepKind::SrtCurve => {
                if self.grid[0] <= 0.0 {
                    return Err(Error::domain("threshold grid must be positive"));
                }
            }
            SweepKind::OutageVsN | SweepKind::InterceptVsN => {
                if !self.grid.iter().all(|&g| g >= 1.0 && g.fract() == 0.0) {
                    return Err(Error::domain(
                        "relay-count grid must hold positive integers",
                    ));
                }
                match self.constraint {
                    Some(c) if c > 0.0 && c < 1.0 => {}
                    Some(c) => {
                        return Err(Error::domain(format!(
                            "constraint must lie in (0, 1), got {c}"
                        )))
                    }
                    None => return Err(Error::domain("this sweep needs a constraint value")),
                }
            }
            SweepKind::Verify => {}
        }
        Ok(())
    }
}

/// `points` values spaced evenly in log scale over `[min, max]`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && points >= 2) {
        if points == 1 && min > 0.0 && max == min {
            return Ok(vec![min]);
        }
        return Err(Error::domain(format!(
            "log grid needs 0 < min < max and at least 2 points, got [{min}, {max}] x {points}"
        )));
    }
    let (lmin, lmax) = (min.ln(), max.ln());
    Ok((0..points)
        .map(|k| {
            if k == 0 {
                min
            } else if k == points - 1 {
                max
            } else {
                (lmin + (lmax - lmin) * k as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

/// Distinct integers from a log-spaced grid over `[min, max]`.
pub fn integer_log_grid(min: usize, max: usize, points: usize) -> Result<Vec<f64>> {
    if min == 0 {
        return Err(Error::domain("relay-count grid must start at 1 or more"));
    }
    let mut out: Vec<f64> = log_grid(min as f64, max as f64, points)?
        .into_iter()
        .map(f64::round)
        .collect();
    out.dedup();
    Ok(out)
}

/// One line of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_kind: String,
    pub n_relays: Option<usize>,
    pub mer_db: Option<f64>,
    pub rate: Option<f64>,
    pub snr_db: Option<f64>,
    pub delta: Option<f64>,
    pub engine: String,
    pub p_out: Option<f64>,
    pub p_int: Option<f64>,
    pub ci_out: Option<f64>,
    pub ci_int: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub status: String,
}

impl ResultRow {
    pub fn new(kind: &str, engine: &str) -> Self {
        ResultRow {
            sweep_kind: kind.to_string(),
            n_relays: None,
            mer_db: None,
            rate: None,
            snr_db: None,
            delta: None,
            engine: engine.to_string(),
            p_out: None,
            p_int: None,
            ci_out: None,
            ci_int: None,
            trials: None,
            seed: None,
            status: "ok".to_string(),
        }
    }

    pub fn with_values(mut self, p_out: f64, p_int: f64) -> Self {
        self.p_out = Some(p_out);
        self.p_int = Some(p_int);
        self
    }

    pub fn with_mc(mut self, outage: &McEstimate, intercept: &McEstimate) -> Self {
        self.p_out = Some(outage.p_hat);
        self.p_int = Some(intercept.p_hat);
        self.ci_out = Some(outage.ci_half_width);
        self.ci_int = Some(intercept.ci_half_width);
        self.trials = Some(outage.trials);
        self.seed = Some(outage.seed);
        if outage.degenerate_ci || intercept.degenerate_ci {
            self.status = "ok:degenerate_ci".to_string();
        }
        self
    }

    pub fn with_error(mut self, err: &Error) -> Self {
        self.status = match err {
            Error::Infeasible(_) => format!("infeasible: {err}"),
            _ => format!("error: {err}"),
        };
        self
    }

    /// Fill `rate`/`snr_db` so that the two-slot threshold equals `delta`
    /// (unit main-link gain).
    pub fn with_threshold(mut self, rate: f64, delta: f64) -> Self {
        self.delta = Some(delta);
        if delta > 0.0 && delta.is_finite() {
            if let Ok(cfg) = crate::model::SystemConfig::from_rate_and_delta(rate, delta) {
                self.rate = Some(rate);
                self.snr_db = Some(cfg.snr_db());
            }
        }
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status.starts_with("ok")
    }
}

impl TableRow for ResultRow {
    fn header() -> &'static [&'static str] {
        &[
            "sweep_kind",
            "n_relays",
            "mer_db",
            "rate",
            "snr_db",
            "delta",
            "engine",
            "p_out",
            "p_int",
            "ci_out",
            "ci_int",
            "trials",
            "seed",
            "status",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.sweep_kind.clone(),
            format_opt(self.n_relays),
            format_opt_f64(self.mer_db),
            format_opt_f64(self.rate),
            format_opt_f64(self.snr_db),
            format_opt_f64(self.delta),
            self.engine.clone(),
            format_opt_f64(self.p_out),
            format_opt_f64(self.p_int),
            format_opt_f64(self.ci_out),
            format_opt_f64(self.ci_int),
            format_opt(self.trials),
            format_opt(self.seed),
            self.status.clone(),
        ]
    }
}

/// Machine-checked postcondition of a sweep or figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl TableRow for TrendCheck {
    fn header() -> &'static [&'static str] {
        &["name", "passed", "detail"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            self.passed.to_string(),
            self.detail.clone(),
        ]
    }
}

pub(crate) fn fmt_vals(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format_f64(*v))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = log_grid(1e-4, 10.0, 6).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!((g[0], g[5]), (1e-4, 10.0));
        assert!((g[1] - 1e-3).abs() < 1e-15);
        let n = integer_log_grid(1, 10_000, 30).unwrap();
        assert_eq!(n[0], 1.0);
        assert_eq!(*n.last().unwrap(), 10_000.0);
        assert!(n.windows(2).all(|w| w[0] < w[1]));
        assert!(log_grid(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = SweepSpec::new(SweepKind::OutageVsN, vec![1.0, 2.0], 5.0);
        assert!(s.validate().is_err());
        s.constraint = Some(0.1);
        assert!(s.validate().is_ok());
        s.grid = vec![2.0, 1.0];
        assert!(s.validate().is_err());
        s.grid = vec![1.5];
        assert!(s.validate().is_err());
        let s = SweepSpec::new(SweepKind::SrtCurve, vec![], 5.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn engine_names_round_trip() {
        for e in Engine::all() {
            assert_eq!(e.as_str().parse::<Engine>().unwrap(), e);
        }
        assert!("quantum".parse::<Engine>().is_err());
    }
}
