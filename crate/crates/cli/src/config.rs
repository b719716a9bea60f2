//! Flat JSON configuration and its merge with command-line flags.
//!
//! Every key is optional in the file; each subcommand states which keys it
//! needs and all missing ones are reported together. Recognised keys:
//!
//! | key | type | meaning |
//! |-----|------|---------|
//! | `rate` | number | data rate in bit/s/Hz (default 1) |
//! | `snr`, `snr_db` | number | transmit SNR, linear or dB (at most one) |
//! | `mer`, `mer_db` | number | main-to-eavesdropper ratio, linear or dB (at most one) |
//! | `n_relays` | integer or array | relay count(s) |
//! | `sigma_sd2`, `sigma_se2` | number | direct and source wiretap gains |
//! | `sigma_si2`, `sigma_id2`, `sigma_ie2` | array | per-relay gains |
//! | `gains_file` | string | JSON file holding the five gain keys above |
//! | `delta` | number | two-slot threshold, overrides the rate/SNR route |
//! | `p_int`, `p_out` | number | constraint for tradeoff queries |
//! | `trials`, `seed`, `workers` | integer | simulation controls |
//! | `grid_min`, `grid_max`, `grid_points` | number | sweep grid |
//! | `kind` | string | `srt-curve`, `outage-vs-n` or `intercept-vs-n` |
//! | `engines` | array of strings | sweep engines |
//! | `out`, `format` | string | artifact path and `csv`/`json` |
//! | `inject_fault` | number | relative gain perturbation for `verify` |

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<usize> {
        match self {
            OneOrMany::One(n) => vec![n],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub rate: Option<f64>,
    pub snr: Option<f64>,
    pub snr_db: Option<f64>,
    pub mer: Option<f64>,
    pub mer_db: Option<f64>,
    pub n_relays: Option<OneOrMany>,
    pub sigma_sd2: Option<f64>,
    pub sigma_se2: Option<f64>,
    pub sigma_si2: Option<Vec<f64>>,
    pub sigma_id2: Option<Vec<f64>>,
    pub sigma_ie2: Option<Vec<f64>>,
    pub gains_file: Option<PathBuf>,
    pub delta: Option<f64>,
    pub p_int: Option<f64>,
    pub p_out: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_points: Option<usize>,
    pub kind: Option<String>,
    pub engines: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub inject_fault: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GainsFile {
    sigma_sd2: Option<f64>,
    sigma_se2: Option<f64>,
    sigma_si2: Option<Vec<f64>>,
    sigma_id2: Option<Vec<f64>>,
    sigma_ie2: Option<Vec<f64>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    /// `self` overridden by every key set in `over`. The linear/dB pairs are
    /// replaced as a unit so a flag in one form hides the file's other form.
    pub fn overridden_by(self, over: Settings) -> Settings {
        let (snr, snr_db) = if over.snr.is_some() || over.snr_db.is_some() {
            (over.snr, over.snr_db)
        } else {
            (self.snr, self.snr_db)
        };
        let (mer, mer_db) = if over.mer.is_some() || over.mer_db.is_some() {
            (over.mer, over.mer_db)
        } else {
            (self.mer, self.mer_db)
        };
        Settings {
            rate: over.rate.or(self.rate),
            snr,
            snr_db,
            mer,
            mer_db,
            n_relays: over.n_relays.or(self.n_relays),
            sigma_sd2: over.sigma_sd2.or(self.sigma_sd2),
            sigma_se2: over.sigma_se2.or(self.sigma_se2),
            sigma_si2: over.sigma_si2.or(self.sigma_si2),
            sigma_id2: over.sigma_id2.or(self.sigma_id2),
            sigma_ie2: over.sigma_ie2.or(self.sigma_ie2),
            gains_file: over.gains_file.or(self.gains_file),
            delta: over.delta.or(self.delta),
            p_int: over.p_int.or(self.p_int),
            p_out: over.p_out.or(self.p_out),
            trials: over.trials.or(self.trials),
            seed: over.seed.or(self.seed),
            workers: over.workers.or(self.workers),
            grid_min: over.grid_min.or(self.grid_min),
            grid_max: over.grid_max.or(self.grid_max),
            grid_points: over.grid_points.or(self.grid_points),
            kind: over.kind.or(self.kind),
            engines: over.engines.or(self.engines),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            inject_fault: over.inject_fault.or(self.inject_fault),
        }
    }

    /// Load the gains file, if any, over the inline gain keys.
    pub fn with_gains_file(mut self) -> Result<Settings, CliError> {
        let Some(path) = self.gains_file.clone() else {
            return Ok(self);
        };
        let g: GainsFile = read_json(&path)?;
        self.sigma_sd2 = g.sigma_sd2.or(self.sigma_sd2);
        self.sigma_se2 = g.sigma_se2.or(self.sigma_se2);
        self.sigma_si2 = g.sigma_si2.or(self.sigma_si2);
        self.sigma_id2 = g.sigma_id2.or(self.sigma_id2);
        self.sigma_ie2 = g.sigma_ie2.or(self.sigma_ie2);
        Ok(self)
    }

    pub fn check_exclusive(&self) -> Result<(), CliError> {
        if self.snr.is_some() && self.snr_db.is_some() {
            return Err(CliError::Config("give snr or snr_db, not both".into()));
        }
        if self.mer.is_some() && self.mer_db.is_some() {
            return Err(CliError::Config("give mer or mer_db, not both".into()));
        }
        Ok(())
    }

    pub fn has_gain_arrays(&self) -> bool {
        self.sigma_si2.is_some() || self.sigma_id2.is_some() || self.sigma_ie2.is_some()
    }
}

/// Collects the names of required keys that are absent.
#[derive(Debug, Default)]
pub struct Missing(Vec<String>);

impl Missing {
    pub fn need<T: Clone>(&mut self, name: &str, value: &Option<T>) -> Option<T> {
        if value.is_none() {
            self.0.push(name.to_string());
        }
        value.clone()
    }

    pub fn add(&mut self, name: &str) {
        self.0.push(name.to_string());
    }

    pub fn finish(self) -> Result<(), CliError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(CliError::Missing(self.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: Settings =
            serde_json::from_str(r#"{"rate": 2, "mer_db": 10, "n_relays": 4}"#).unwrap();
        let flags = Settings {
            rate: Some(1.5),
            mer: Some(3.0),
            ..Settings::default()
        };
        let s = file.overridden_by(flags);
        assert_eq!(s.rate, Some(1.5));
        assert_eq!((s.mer, s.mer_db), (Some(3.0), None));
        assert_eq!(s.n_relays, Some(OneOrMany::One(4)));
        s.check_exclusive().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<Settings>(r#"{"rate": 1, "snrdb": 10}"#).unwrap_err();
        assert!(err.to_string().contains("snrdb"));
    }

    #[test]
    fn both_forms_rejected() {
        let s: Settings = serde_json::from_str(r#"{"snr": 10, "snr_db": 10}"#).unwrap();
        assert!(s.check_exclusive().is_err());
    }

    #[test]
    fn relay_list_or_scalar() {
        let s: Settings = serde_json::from_str(r#"{"n_relays": [2, 4]}"#).unwrap();
        assert_eq!(s.n_relays.unwrap().into_vec(), vec![2, 4]);
    }

    #[test]
    fn missing_lists_every_name() {
        let mut m = Missing::default();
        m.need::<f64>("delta", &None);
        m.need("rate", &Some(1.0));
        m.add("mer");
        match m.finish() {
            Err(CliError::Missing(names)) => assert_eq!(names, vec!["delta", "mer"]),
            other => panic!("{other:?}"),
        }
    }
}
