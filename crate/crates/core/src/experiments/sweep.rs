//! Sweeps that regenerate the tradeoff curves and the relay-count studies.

use rayon::prelude::*;

use super::{fmt_vals, Engine, ResultRow, SweepKind, SweepSpec, TrendCheck};
use crate::analytic_dt::{dt_intercept_from_outage, dt_outage_from_intercept, dt_srt};
use crate::analytic_iid::{
    iid_intercept, iid_outage, intercept_asymptotic, outage_from_intercept_asymptotic,
    solve_outage_given_intercept_finite, IidSrtQuery,
};
use crate::analytic_ors::{ors_intercept, ors_outage};
use crate::error::{Error, Result};
use crate::model::{mer_from_db, ChannelProfile, IidProfile};
use crate::montecarlo::{simulate_dt_at, simulate_ors_at, McOptions};

/// Bisection tolerance used by the relay-count sweeps.
pub const SOLVER_TOL: f64 = 1e-12;

/// Rows of a sweep plus the trend postconditions evaluated on them.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub checks: Vec<TrendCheck>,
}

impl SweepOutput {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub(crate) fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn expect_kind(spec: &SweepSpec, kind: SweepKind) -> Result<()> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(Error::domain(format!(
            "sweep kind {} cannot run as {}",
            spec.kind.as_str(),
            kind.as_str()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum SrtJob {
    Dt {
        delta: f64,
        mc: bool,
    },
    Ors {
        delta: f64,
        n: usize,
        engine: Engine,
    },
}

/// Outage/intercept pairs along a sweep of the two-slot threshold.
///
/// The grid holds `delta / sigma_m2`; main links have unit gain and wiretap
/// links gain `1 / mer`. Direct transmission is evaluated at the single-slot
/// threshold of the same rate and SNR.
pub fn sweep_srt_curve(spec: &SweepSpec) -> Result<SweepOutput> {
    expect_kind(spec, SweepKind::SrtCurve)?;
    let mer = mer_from_db(spec.mer_db);
    let analytic = spec.engines.iter().any(|e| *e != Engine::Mc);
    let mc = spec.engines.contains(&Engine::Mc);

    let mut jobs = Vec::new();
    for &delta in &spec.grid {
        if analytic {
            jobs.push(SrtJob::Dt { delta, mc: false });
        }
        if mc {
            jobs.push(SrtJob::Dt { delta, mc: true });
        }
        for &n in &spec.n_relays {
            for &engine in &spec.engines {
                jobs.push(SrtJob::Ors { delta, n, engine });
            }
        }
    }

    let rows = in_pool(spec.workers, || {
        jobs.par_iter()
            .map(|job| srt_row(spec, mer, *job))
            .collect::<Vec<_>>()
    })?;

    let mut checks = Vec::new();
    let mut series: Vec<(String, Option<usize>)> = Vec::new();
    for r in &rows {
        let key = (r.engine.clone(), r.n_relays);
        if !series.contains(&key) {
            series.push(key);
        }
    }
    for (engine, n) in series {
        if engine.ends_with("mc") {
            continue;
        }
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.engine == engine && r.n_relays == n && r.is_ok())
            .filter_map(|r| Some((r.p_out?, r.p_int?)))
            .collect();
        let out_up = pts.windows(2).all(|w| w[1].0 >= w[0].0);
        let int_down = pts.windows(2).all(|w| w[1].1 <= w[0].1);
        checks.push(TrendCheck {
            name: format!(
                "srt_monotone:{engine}:n={}",
                n.map_or("dt".to_string(), |v| v.to_string())
            ),
            passed: out_up && int_down,
            detail: format!(
                "{} points; outage nondecreasing={out_up}, intercept nonincreasing={int_down}",
                pts.len()
            ),
        });
    }

    // Direct transmission must sit on the rate-free parametric curve.
    let sigma_se2 = 1.0 / mer;
    let worst = rows
        .iter()
        .filter(|r| r.engine == "dt_analytic" && r.is_ok())
        .filter_map(|r| {
            let p = dt_outage_from_intercept(r.p_int?, sigma_se2, 1.0).ok()?;
            let o = r.p_out?;
            Some(if o == 0.0 {
                p.abs()
            } else {
                ((p - o) / o).abs()
            })
        })
        .fold(0.0, f64::max);
    if analytic {
        checks.push(TrendCheck {
            name: "dt_parametric_curve".into(),
            passed: worst <= 1e-12,
            detail: format!("max relative gap {worst:e}"),
        });
    }

    Ok(SweepOutput { rows, checks })
}

fn srt_row(spec: &SweepSpec, mer: f64, job: SrtJob) -> ResultRow {
    let kind = SweepKind::SrtCurve.as_str();
    let sigma_e2 = 1.0 / mer;
    let mc_opts = McOptions::new(spec.trials, spec.seed);
    match job {
        SrtJob::Dt { delta, mc } => {
            // alpha / delta = (2^R - 1) / (2^{2R} - 1) = 1 / (2^R + 1)
            let alpha = delta / (spec.rate.exp2() + 1.0);
            let engine = if mc { "dt_mc" } else { "dt_analytic" };
            let mut row = ResultRow::new(kind, engine).with_threshold(spec.rate, delta);
            row.mer_db = Some(spec.mer_db);
            let res = if mc {
                ChannelProfile::new(1.0, sigma_e2, vec![], vec![], vec![])
                    .and_then(|p| simulate_dt_at(&p, alpha, &mc_opts))
                    .map(|r| row.clone().with_mc(&r.outage, &r.intercept))
            } else {
                dt_srt(1.0, sigma_e2, alpha).map(|r| row.clone().with_values(r.p_out, r.p_int))
            };
            res.unwrap_or_else(|e| row.with_error(&e))
        }
        SrtJob::Ors { delta, n, engine } => {
            let mut row = ResultRow::new(kind, engine.as_str()).with_threshold(spec.rate, delta);
            row.mer_db = Some(spec.mer_db);
            row.n_relays = Some(n);
            let res = IidProfile::new(1.0, sigma_e2, n).and_then(|iid| match engine {
                Engine::AnalyticGeneral => {
                    let p = iid.expand();
                    Ok(row
                        .clone()
                        .with_values(ors_outage(&p, delta)?, ors_intercept(&p, delta)?))
                }
                Engine::AnalyticIid => Ok(row.clone().with_values(
                    iid_outage(n, 1.0, delta)?,
                    iid_intercept(n, 1.0, sigma_e2, delta)?,
                )),
                Engine::Asymptotic => {
                    let p_out = iid_outage(n, 1.0, delta)?;
                    Ok(row
                        .clone()
                        .with_values(p_out, intercept_asymptotic(p_out, n, mer)?))
                }
                Engine::Mc => {
                    let r = simulate_ors_at(&iid.expand(), delta, &mc_opts)?;
                    Ok(row.clone().with_mc(&r.outage, &r.intercept))
                }
            });
            res.unwrap_or_else(|e| row.with_error(&e))
        }
    }
}

fn strictly_decreasing_check(
    name: String,
    rows: &[ResultRow],
    engine: &str,
    value: fn(&ResultRow) -> Option<f64>,
) -> TrendCheck {
    let vals: Vec<f64> = rows
        .iter()
        .filter(|r| r.engine == engine && r.is_ok())
        .filter_map(value)
        .collect();
    let passed = !vals.is_empty() && vals.windows(2).all(|w| w[1] < w[0]);
    TrendCheck {
        name,
        passed,
        detail: format!("{} values: {}", vals.len(), fmt_vals(&vals)),
    }
}

fn relay_count_engines(spec: &SweepSpec) -> Vec<Engine> {
    let mut engines: Vec<Engine> = spec.engines.clone();
    engines.dedup();
    engines
}

/// Minimum outage probability at each relay count under an intercept
/// constraint, from the finite-`n` inversion and the large-`n` law.
pub fn sweep_outage_vs_n(spec: &SweepSpec) -> Result<SweepOutput> {
    expect_kind(spec, SweepKind::OutageVsN)?;
    let mer = mer_from_db(spec.mer_db);
    let p_int = spec.constraint.expect("validated");
    let kind = SweepKind::OutageVsN.as_str();
    let engines = relay_count_engines(spec);
    let jobs: Vec<(usize, Engine)> = spec
        .grid
        .iter()
        .flat_map(|&n| engines.iter().map(move |&e| (n as usize, e)))
        .collect();

    let rows = in_pool(spec.workers, || {
        jobs.par_iter()
            .map(|&(n, engine)| {
                let mut row = ResultRow::new(kind, engine.as_str());
                row.n_relays = Some(n);
                row.mer_db = Some(spec.mer_db);
                let res = match engine {
                    Engine::AnalyticIid => {
                        solve_outage_given_intercept_finite(p_int, n, mer, SOLVER_TOL)
                            .map(|s| (s.p_out, s.p_int, s.theta))
                    }
                    Engine::Asymptotic => {
                        outage_from_intercept_asymptotic(p_int, n, mer).map(|p_out| {
                            let theta = -(p_out.ln() / n as f64).exp_m1();
                            (p_out, p_int, theta)
                        })
                    }
                    other => Err(Error::domain(format!(
                        "engine {} does not apply to outage_vs_n",
                        other.as_str()
                    ))),
                };
                match res {
                    Ok((p_out, achieved, theta)) => row
                        .with_values(p_out, achieved)
                        .with_threshold(spec.rate, -0.5 * theta.ln()),
                    Err(e) => row.with_error(&e),
                }
            })
            .collect::<Vec<_>>()
    })?;

    let checks = engines
        .iter()
        .filter(|e| matches!(e, Engine::AnalyticIid | Engine::Asymptotic))
        .map(|e| {
            strictly_decreasing_check(
                format!("outage_decreasing_in_n:{}:p_int={}", e.as_str(), p_int),
                &rows,
                e.as_str(),
                |r| r.p_out,
            )
        })
        .collect();
    Ok(SweepOutput { rows, checks })
}

/// Intercept probability at each relay count under an outage constraint.
pub fn sweep_intercept_vs_n(spec: &SweepSpec) -> Result<SweepOutput> {
    expect_kind(spec, SweepKind::InterceptVsN)?;
    let mer = mer_from_db(spec.mer_db);
    let p_out = spec.constraint.expect("validated");
    let kind = SweepKind::InterceptVsN.as_str();
    let engines = relay_count_engines(spec);
    let jobs: Vec<(usize, Engine)> = spec
        .grid
        .iter()
        .flat_map(|&n| engines.iter().map(move |&e| (n as usize, e)))
        .collect();

    let rows = in_pool(spec.workers, || {
        jobs.par_iter()
            .map(|&(n, engine)| {
                let mut row = ResultRow::new(kind, engine.as_str());
                row.n_relays = Some(n);
                row.mer_db = Some(spec.mer_db);
                let res = IidSrtQuery::from_outage(p_out, n, mer).and_then(|q| match engine {
                    Engine::AnalyticIid => Ok((q.intercept_finite(), q.theta)),
                    Engine::Asymptotic => Ok((q.intercept_asymptotic(), q.theta)),
                    other => Err(Error::domain(format!(
                        "engine {} does not apply to intercept_vs_n",
                        other.as_str()
                    ))),
                });
                match res {
                    Ok((p_int, theta)) => row
                        .with_values(p_out, p_int)
                        .with_threshold(spec.rate, -0.5 * theta.ln()),
                    Err(e) => row.with_error(&e),
                }
            })
            .collect::<Vec<_>>()
    })?;

    let checks = engines
        .iter()
        .filter(|e| matches!(e, Engine::AnalyticIid | Engine::Asymptotic))
        .map(|e| {
            strictly_decreasing_check(
                format!("intercept_decreasing_in_n:{}:p_out={}", e.as_str(), p_out),
                &rows,
                e.as_str(),
                |r| r.p_int,
            )
        })
        .collect();
    Ok(SweepOutput { rows, checks })
}

/// Intercept probability of direct transmission at a given outage level
/// (unit main gain, wiretap gain `1 / mer`).
pub fn dt_intercept_at_outage(p_out: f64, mer: f64) -> Result<f64> {
    dt_intercept_from_outage(p_out, 1.0 / mer, 1.0)
}

/// At every outage anchor, relay selection with more relays intercepts less,
/// and every relay count beats direct transmission.
pub fn scheme_ordering_check(
    mer_db: f64,
    anchors: &[f64],
    relay_counts: &[usize],
) -> Result<TrendCheck> {
    let mer = mer_from_db(mer_db);
    let mut counts = relay_counts.to_vec();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let mut passed = true;
    let mut detail = Vec::new();
    for &p_out in anchors {
        let mut ips = counts
            .iter()
            .map(|&n| IidSrtQuery::from_outage(p_out, n, mer).map(|q| q.intercept_finite()))
            .collect::<Result<Vec<_>>>()?;
        ips.push(dt_intercept_at_outage(p_out, mer)?);
        let ok = ips.windows(2).all(|w| w[0] < w[1]);
        passed &= ok;
        detail.push(format!("p_out={p_out}: [{}]", fmt_vals(&ips)));
    }
    let order = counts
        .iter()
        .map(|n| format!("ors{n}"))
        .chain(std::iter::once("dt".to_string()))
        .collect::<Vec<_>>()
        .join("<");
    Ok(TrendCheck {
        name: format!("scheme_ordering:mer_db={mer_db}:{order}"),
        passed,
        detail: detail.join("; "),
    })
}

/// A larger main-to-eavesdropper ratio lowers the intercept probability at
/// every outage anchor, for direct transmission and relay selection.
pub fn mer_ordering_check(
    n: usize,
    low_db: f64,
    high_db: f64,
    anchors: &[f64],
) -> Result<TrendCheck> {
    let (lo, hi) = (mer_from_db(low_db), mer_from_db(high_db));
    let mut passed = true;
    let mut detail = Vec::new();
    for &p_out in anchors {
        let dt = (
            dt_intercept_at_outage(p_out, hi)?,
            dt_intercept_at_outage(p_out, lo)?,
        );
        let ors = (
            IidSrtQuery::from_outage(p_out, n, hi)?.intercept_finite(),
            IidSrtQuery::from_outage(p_out, n, lo)?.intercept_finite(),
        );
        passed &= dt.0 < dt.1 && ors.0 < ors.1;
        detail.push(format!(
            "p_out={p_out}: dt {}<{} ors {}<{}",
            dt.0, dt.1, ors.0, ors.1
        ));
    }
    Ok(TrendCheck {
        name: format!("mer_ordering:n={n}:{high_db}dB<{low_db}dB"),
        passed,
        detail: detail.join("; "),
    })
}
