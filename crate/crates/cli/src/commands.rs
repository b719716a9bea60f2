//! Subcommand bodies: resolve settings, call the engines, emit rows.

use srt_core::analytic_dt::{dt_intercept_from_outage, dt_outage_from_intercept, dt_srt};
use srt_core::analytic_iid::{
    iid_intercept, iid_outage, intercept_asymptotic, intercept_from_outage_finite,
    outage_from_intercept_asymptotic, solve_outage_given_intercept_finite, theta_from_outage,
};
use srt_core::analytic_ors::ors_srt;
use srt_core::experiments::sweep::SOLVER_TOL;
use srt_core::experiments::{
    integer_log_grid, log_grid, sweep_intercept_vs_n, sweep_outage_vs_n, sweep_srt_curve,
    verify_suite, Engine, ResultRow, SweepKind, SweepSpec, VerifyOptions, DEFAULT_RATE,
    DEFAULT_SEED, DEFAULT_TRIALS,
};
use srt_core::model::{delta_threshold, linear_to_db, mer_from_db, SystemConfig};
use srt_core::montecarlo::{simulate_dt_at, simulate_ors_at, McOptions};
use srt_core::{ChannelProfile, IidProfile};

use crate::config::{Missing, Settings};
use crate::{CliError, Sink};

pub fn dispatch(name: &str, s: &Settings, sink: &Sink) -> Result<bool, CliError> {
    match name {
        "dt-srt" => sink.write(&dt_srt_rows(s)?).map(|_| true),
        "ors-exact" => sink.write(&ors_exact_rows(s)?).map(|_| true),
        "ors-iid" => sink.write(&ors_iid_rows(s)?).map(|_| true),
        "solve" => sink.write(&solve_rows(s)?).map(|_| true),
        "mc" => sink.write(&mc_rows(s)?).map(|_| true),
        "sweep" => sweep(s, sink),
        "verify" => verify(s, sink),
        other => Err(CliError::Config(format!("unknown subcommand {other}"))),
    }
}

fn rate(s: &Settings) -> f64 {
    s.rate.unwrap_or(DEFAULT_RATE)
}

fn mer(s: &Settings) -> Option<f64> {
    s.mer.or(s.mer_db.map(mer_from_db))
}

fn mer_db(s: &Settings) -> Option<f64> {
    s.mer_db.or(s.mer.map(linear_to_db))
}

fn snr(s: &Settings) -> Option<f64> {
    s.snr.or(s.snr_db.map(srt_core::model::db_to_linear))
}

/// Two-slot threshold from `delta`, or from rate and SNR.
fn threshold(s: &Settings, missing: &mut Missing) -> Result<Option<f64>, CliError> {
    match (s.delta, snr(s)) {
        (Some(_), Some(_)) => Err(CliError::Config("give delta or an SNR, not both".into())),
        (Some(d), None) => Ok(Some(d)),
        (None, Some(g)) => Ok(Some(delta_threshold(rate(s), g)?)),
        (None, None) => {
            missing.add("delta or snr/snr_db");
            Ok(None)
        }
    }
}

/// Single-slot threshold matching a two-slot threshold at the configured rate.
fn alpha_for(s: &Settings, delta: f64) -> Result<f64, CliError> {
    let cfg = match snr(s) {
        Some(g) => SystemConfig::new(rate(s), g)?,
        None => SystemConfig::from_rate_and_delta(rate(s), delta)?,
    };
    Ok(cfg.thresholds().alpha)
}

fn single_n(s: &Settings, missing: &mut Missing) -> Result<Option<usize>, CliError> {
    match s.n_relays.clone().map(|n| n.into_vec()) {
        None => {
            missing.add("n_relays");
            Ok(None)
        }
        Some(v) if v.len() == 1 => Ok(Some(v[0])),
        Some(v) => Err(CliError::Config(format!(
            "this subcommand takes one relay count, got {}",
            v.len()
        ))),
    }
}

fn relay_counts(s: &Settings, missing: &mut Missing) -> Vec<usize> {
    match s.n_relays.clone() {
        Some(n) => n.into_vec(),
        None => {
            missing.add("n_relays");
            Vec::new()
        }
    }
}

/// Relay network from explicit per-link gains, or i.i.d. links from MER and
/// a relay count. Unspecified direct-link gains default to one.
fn profile(
    s: &Settings,
    missing: &mut Missing,
) -> Result<Option<(ChannelProfile, Option<f64>)>, CliError> {
    if s.has_gain_arrays() {
        let se = missing.need("sigma_se2", &s.sigma_se2);
        let si = missing.need("sigma_si2", &s.sigma_si2);
        let id = missing.need("sigma_id2", &s.sigma_id2);
        let ie = missing.need("sigma_ie2", &s.sigma_ie2);
        return match (se, si, id, ie) {
            (Some(se), Some(si), Some(id), Some(ie)) => Ok(Some((
                ChannelProfile::new(s.sigma_sd2.unwrap_or(1.0), se, si, id, ie)?,
                None,
            ))),
            _ => Ok(None),
        };
    }
    let m = mer(s);
    if m.is_none() {
        missing.add("mer/mer_db or gain arrays");
    }
    let n = single_n(s, missing)?;
    match (m, n) {
        (Some(m), Some(n)) => Ok(Some((IidProfile::from_mer(m, n)?.expand(), mer_db(s)))),
        _ => Ok(None),
    }
}

fn mc_options(s: &Settings) -> McOptions {
    McOptions::new(
        s.trials.unwrap_or(DEFAULT_TRIALS),
        s.seed.unwrap_or(DEFAULT_SEED),
    )
    .with_workers(s.workers.unwrap_or(0))
}

fn dt_srt_rows(s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    let mut missing = Missing::default();
    let (sd, se, db) = match (s.sigma_sd2, s.sigma_se2) {
        (Some(sd), Some(se)) => (sd, se, linear_to_db(sd / se)),
        _ => match mer(s) {
            Some(m) => (1.0, 1.0 / m, mer_db(s).unwrap_or_else(|| linear_to_db(m))),
            None => {
                missing.add("mer/mer_db or sigma_sd2 and sigma_se2");
                (f64::NAN, f64::NAN, f64::NAN)
            }
        },
    };
    let mut row = ResultRow::new("dt_srt", "dt_analytic");
    row.mer_db = Some(db);
    match (s.p_int, s.p_out) {
        (Some(_), Some(_)) => return Err(CliError::Config("give p_int or p_out, not both".into())),
        (Some(p_int), None) => {
            missing.finish()?;
            row = row.with_values(dt_outage_from_intercept(p_int, se, sd)?, p_int);
        }
        (None, Some(p_out)) => {
            missing.finish()?;
            row = row.with_values(p_out, dt_intercept_from_outage(p_out, se, sd)?);
        }
        (None, None) => {
            let delta = threshold(s, &mut missing)?;
            missing.finish()?;
            let delta = delta.expect("checked above");
            let r = dt_srt(sd, se, alpha_for(s, delta)?)?;
            row = row
                .with_threshold(rate(s), delta)
                .with_values(r.p_out, r.p_int);
        }
    }
    Ok(vec![row])
}

fn ors_exact_rows(s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    let mut missing = Missing::default();
    let p = profile(s, &mut missing)?;
    let delta = threshold(s, &mut missing)?;
    missing.finish()?;
    let ((p, db), delta) = (p.expect("checked above"), delta.expect("checked above"));
    let (p_out, p_int) = ors_srt(&p, delta)?;
    let mut row = ResultRow::new("ors_exact", Engine::AnalyticGeneral.as_str())
        .with_threshold(rate(s), delta)
        .with_values(p_out, p_int);
    row.n_relays = Some(p.n_relays());
    row.mer_db = db;
    Ok(vec![row])
}

fn iid_inputs(s: &Settings, missing: &mut Missing) -> (Option<f64>, Vec<usize>) {
    let m = mer(s);
    if m.is_none() {
        missing.add("mer/mer_db");
    }
    (m, relay_counts(s, missing))
}

fn ors_iid_rows(s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    let mut missing = Missing::default();
    let (m, ns) = iid_inputs(s, &mut missing);
    let delta = threshold(s, &mut missing)?;
    missing.finish()?;
    let (m, delta) = (m.expect("checked above"), delta.expect("checked above"));
    let mut rows = Vec::new();
    for n in ns {
        let base = |engine: Engine| {
            let mut r = ResultRow::new("ors_iid", engine.as_str()).with_threshold(rate(s), delta);
            r.n_relays = Some(n);
            r.mer_db = Some(linear_to_db(m));
            r
        };
        let p_out = iid_outage(n, 1.0, delta)?;
        rows.push(
            base(Engine::AnalyticIid).with_values(p_out, iid_intercept(n, 1.0, 1.0 / m, delta)?),
        );
        let asym = if p_out > 0.0 && p_out < 1.0 {
            intercept_asymptotic(p_out, n, m)
                .map(|p_int| base(Engine::Asymptotic).with_values(p_out, p_int))
        } else {
            Err(srt_core::Error::Domain(format!(
                "asymptotic law needs p_out in (0, 1), got {p_out}"
            )))
        };
        rows.push(asym.unwrap_or_else(|e| base(Engine::Asymptotic).with_error(&e)));
    }
    Ok(rows)
}

/// Threshold implied by `theta = exp(-2 delta)` on unit main links.
fn delta_of_theta(theta: f64) -> f64 {
    -0.5 * theta.ln()
}

fn solve_rows(s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    let mut missing = Missing::default();
    let (m, ns) = iid_inputs(s, &mut missing);
    if s.p_int.is_none() && s.p_out.is_none() {
        missing.add("p_int or p_out");
    }
    missing.finish()?;
    let m = m.expect("checked above");
    let mut rows = Vec::new();
    for n in ns {
        let base = |engine: Engine| {
            let mut r = ResultRow::new("solve", engine.as_str());
            r.n_relays = Some(n);
            r.mer_db = Some(linear_to_db(m));
            r
        };
        let rate = rate(s);
        let (finite, asym) = match (s.p_int, s.p_out) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give p_int or p_out, not both".into()))
            }
            (Some(p_int), None) => (
                solve_outage_given_intercept_finite(p_int, n, m, SOLVER_TOL).map(|sol| {
                    base(Engine::AnalyticIid)
                        .with_threshold(rate, delta_of_theta(sol.theta))
                        .with_values(sol.p_out, sol.p_int)
                }),
                outage_from_intercept_asymptotic(p_int, n, m).map(|p_out| {
                    base(Engine::Asymptotic)
                        .with_threshold(rate, delta_of_theta(theta_from_outage(p_out, n)))
                        .with_values(p_out, p_int)
                }),
            ),
            (None, Some(p_out)) => {
                let delta = delta_of_theta(theta_from_outage(p_out, n));
                (
                    intercept_from_outage_finite(p_out, n, m).map(|p_int| {
                        base(Engine::AnalyticIid)
                            .with_threshold(rate, delta)
                            .with_values(p_out, p_int)
                    }),
                    intercept_asymptotic(p_out, n, m).map(|p_int| {
                        base(Engine::Asymptotic)
                            .with_threshold(rate, delta)
                            .with_values(p_out, p_int)
                    }),
                )
            }
            (None, None) => unreachable!("checked above"),
        };
        for (engine, r) in [(Engine::AnalyticIid, finite), (Engine::Asymptotic, asym)] {
            rows.push(match r {
                Ok(row) => row,
                Err(e @ srt_core::Error::Infeasible(_)) => base(engine).with_error(&e),
                Err(e) => return Err(e.into()),
            });
        }
    }
    Ok(rows)
}

fn mc_rows(s: &Settings) -> Result<Vec<ResultRow>, CliError> {
    let mut missing = Missing::default();
    let p = profile(s, &mut missing)?;
    let delta = threshold(s, &mut missing)?;
    missing.finish()?;
    let ((p, db), delta) = (p.expect("checked above"), delta.expect("checked above"));
    let opts = mc_options(s);
    let alpha = alpha_for(s, delta)?;
    let row = |engine: &str, relays: bool| {
        let mut r = ResultRow::new("mc", engine).with_threshold(rate(s), delta);
        r.mer_db = db;
        if relays {
            r.n_relays = Some(p.n_relays());
        }
        r
    };

    let dt = simulate_dt_at(&p, alpha, &opts)?;
    let dt_exact = dt_srt(p.sigma_sd2(), p.sigma_se2(), alpha)?;
    let ors = simulate_ors_at(&p, delta, &opts)?;
    let ors_exact = match ors_srt(&p, delta) {
        Ok((o, i)) => row(Engine::AnalyticGeneral.as_str(), true).with_values(o, i),
        Err(e @ srt_core::Error::Capacity { .. }) => {
            row(Engine::AnalyticGeneral.as_str(), true).with_error(&e)
        }
        Err(e) => return Err(e.into()),
    };
    Ok(vec![
        row("dt_analytic", false).with_values(dt_exact.p_out, dt_exact.p_int),
        row("dt_mc", false).with_mc(&dt.outage, &dt.intercept),
        ors_exact,
        row(Engine::Mc.as_str(), true).with_mc(&ors.outage, &ors.intercept),
    ])
}

fn parse_kind(kind: &str) -> Result<SweepKind, CliError> {
    match kind.replace('_', "-").as_str() {
        "srt-curve" => Ok(SweepKind::SrtCurve),
        "outage-vs-n" => Ok(SweepKind::OutageVsN),
        "intercept-vs-n" => Ok(SweepKind::InterceptVsN),
        other => Err(CliError::Config(format!(
            "unknown sweep kind '{other}', expected srt-curve, outage-vs-n or intercept-vs-n"
        ))),
    }
}

fn sweep(s: &Settings, sink: &Sink) -> Result<bool, CliError> {
    let mut missing = Missing::default();
    let kind = missing.need("kind", &s.kind);
    let db = mer_db(s);
    if db.is_none() {
        missing.add("mer/mer_db");
    }
    let kind = kind.map(|k| parse_kind(&k)).transpose()?;
    match kind {
        Some(SweepKind::OutageVsN) => {
            missing.need("p_int", &s.p_int);
        }
        Some(SweepKind::InterceptVsN) => {
            missing.need("p_out", &s.p_out);
        }
        _ => {}
    }
    missing.finish()?;
    let kind = kind.expect("checked above");
    let grid = match kind {
        SweepKind::SrtCurve => log_grid(
            s.grid_min.unwrap_or(1e-4),
            s.grid_max.unwrap_or(10.0),
            s.grid_points.unwrap_or(41),
        )?,
        _ => {
            let max_default = if kind == SweepKind::OutageVsN {
                1024.0
            } else {
                1e4
            };
            integer_log_grid(
                s.grid_min.unwrap_or(1.0) as usize,
                s.grid_max.unwrap_or(max_default) as usize,
                s.grid_points.unwrap_or(21),
            )?
        }
    };
    let mut spec = SweepSpec::new(kind, grid, db.expect("checked above"));
    if let Some(n) = &s.n_relays {
        spec.n_relays = n.clone().into_vec();
    }
    if let Some(engines) = &s.engines {
        spec.engines = engines
            .iter()
            .map(|e| e.parse::<Engine>())
            .collect::<Result<_, _>>()?;
    }
    spec.constraint = match kind {
        SweepKind::OutageVsN => s.p_int,
        SweepKind::InterceptVsN => s.p_out,
        _ => None,
    };
    spec.rate = rate(s);
    spec.trials = s.trials.unwrap_or(DEFAULT_TRIALS);
    spec.seed = s.seed.unwrap_or(DEFAULT_SEED);
    spec.workers = s.workers.unwrap_or(0);
    let out = match kind {
        SweepKind::SrtCurve => sweep_srt_curve(&spec)?,
        SweepKind::OutageVsN => sweep_outage_vs_n(&spec)?,
        _ => sweep_intercept_vs_n(&spec)?,
    };
    sink.write(&out.rows)?;
    sink.write_companion("checks", &out.checks)?;
    if sink.is_file() {
        for c in &out.checks {
            eprintln!("{} {}", if c.passed { "pass" } else { "FAIL" }, c.name);
        }
    }
    Ok(true)
}

fn verify(s: &Settings, sink: &Sink) -> Result<bool, CliError> {
    let mut opts = VerifyOptions::new(
        s.seed.unwrap_or(DEFAULT_SEED),
        s.trials.unwrap_or(DEFAULT_TRIALS),
    );
    opts.workers = s.workers.unwrap_or(0);
    opts.fault = s.inject_fault;
    let report = verify_suite(&opts)?;
    sink.write(&report.records)?;
    for r in report.summaries() {
        eprintln!(
            "{} {} ({} cases, {} failures)",
            if r.passed { "pass" } else { "FAIL" },
            r.check,
            r.cases.unwrap_or(0),
            r.failures.unwrap_or(0)
        );
    }
    Ok(report.passed())
}
