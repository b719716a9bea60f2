//! Cross-engine verification suite.
//!
//! Each check group compares two independent routes to the same quantity on
//! seeded random parameters and reports the worst observed gap, plus every
//! failing case. The Monte Carlo group compares simulation against the
//! subset-enumeration closed forms inside a 99.9% confidence band.

use serde::{Deserialize, Serialize};

use super::output::{format_f64, format_opt, format_opt_f64, TableRow};
use super::quadrature::quadrature_pr_best_is;
use super::sweep::in_pool;
use crate::analytic_dt::{dt_intercept, dt_outage, dt_outage_from_intercept};
use crate::analytic_iid::{iid_intercept, iid_outage, intercept_from_outage_finite};
use crate::analytic_ors::{
    ors_intercept, ors_outage, pr_best_is, pr_eav_intercept_given_set,
    pr_eav_intercept_given_set_expanded,
};
use crate::error::{Error, Result};
use crate::model::{mer_from_db, ChannelProfile, DecodingSet, IidProfile};
use crate::montecarlo::{simulate_ors_at, McOptions, TrialStream, DEFAULT_CONFIDENCE};

pub const ROUND_TRIP_REL_TOL: f64 = 1e-12;
pub const ENGINE_EQUIVALENCE_REL_TOL: f64 = 1e-10;
pub const SELECTION_SUM_TOL: f64 = 1e-12;
pub const QUADRATURE_TOL: f64 = 1e-8;
pub const EXPANDED_FORM_TOL: f64 = 1e-12;
pub const FINITE_RELATION_REL_TOL: f64 = 1e-10;

/// Relay counts, main-to-eavesdropper ratios (dB) and normalised thresholds
/// of the fixed Monte Carlo grid.
pub const MC_GRID_N: [usize; 3] = [1, 2, 4];
pub const MC_GRID_MER_DB: [f64; 2] = [5.0, 10.0];
pub const MC_GRID_DELTA: [f64; 4] = [0.03, 0.1, 0.3, 1.0];

/// How many random cases each group draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifySizes {
    pub dt_tuples: usize,
    pub iid_cases_per_n: usize,
    pub appendix_profiles: usize,
    pub finite_relation_cases: usize,
    pub mc_random_profiles: usize,
}

impl Default for VerifySizes {
    fn default() -> Self {
        VerifySizes {
            dt_tuples: 1000,
            iid_cases_per_n: 100,
            appendix_profiles: 200,
            finite_relation_cases: 500,
            mc_random_profiles: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: u64,
    pub workers: usize,
    /// Relative perturbation applied to one gain on the second route of every
    /// pairwise comparison. Used to confirm the checks can fail.
    pub fault: Option<f64>,
    pub sizes: VerifySizes,
}

impl VerifyOptions {
    pub fn new(seed: u64, trials: u64) -> Self {
        VerifyOptions {
            seed,
            trials,
            workers: 0,
            fault: None,
            sizes: VerifySizes::default(),
        }
    }

    fn bump(&self, x: f64) -> f64 {
        self.fault.map_or(x, |f| x * (1.0 + f))
    }
}

/// Minimum trial count accepted by [`verify_suite`].
pub const MIN_TRIALS: u64 = 100_000;

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub check: String,
    /// `summary`, `worst`, `case` or `failure`.
    pub kind: String,
    pub case: String,
    pub reference: Option<f64>,
    pub observed: Option<f64>,
    pub delta: Option<f64>,
    pub tolerance: Option<f64>,
    pub cases: Option<u64>,
    pub failures: Option<u64>,
    pub passed: bool,
}

impl TableRow for VerifyRecord {
    fn header() -> &'static [&'static str] {
        &[
            "check",
            "kind",
            "case",
            "reference",
            "observed",
            "delta",
            "tolerance",
            "cases",
            "failures",
            "passed",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.check.clone(),
            self.kind.clone(),
            self.case.clone(),
            format_opt_f64(self.reference),
            format_opt_f64(self.observed),
            format_opt_f64(self.delta),
            format_opt_f64(self.tolerance),
            format_opt(self.cases),
            format_opt(self.failures),
            self.passed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub records: Vec<VerifyRecord>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.records
            .iter()
            .filter(|r| r.kind == "summary")
            .all(|r| r.passed)
    }

    pub fn summaries(&self) -> impl Iterator<Item = &VerifyRecord> {
        self.records.iter().filter(|r| r.kind == "summary")
    }

    pub fn summary(&self, check: &str) -> Option<&VerifyRecord> {
        self.summaries().find(|r| r.check == check)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Abs,
    Rel,
}

fn gap(metric: Metric, reference: f64, observed: f64) -> f64 {
    let d = (reference - observed).abs();
    match metric {
        Metric::Abs => d,
        Metric::Rel => {
            let scale = reference.abs().max(observed.abs());
            if scale == 0.0 {
                0.0
            } else {
                d / scale
            }
        }
    }
}

/// Accumulates comparisons of one check group.
struct Group {
    check: &'static str,
    metric: Metric,
    tolerance: f64,
    allowed_failures: u64,
    cases: u64,
    /// (case, reference, observed, gap, gap / tolerance)
    worst: Option<(String, f64, f64, f64, f64)>,
    failures: Vec<VerifyRecord>,
    keep_all: Vec<VerifyRecord>,
    record_all: bool,
}

impl Group {
    fn new(check: &'static str, metric: Metric, tolerance: f64) -> Self {
        Group {
            check,
            metric,
            tolerance,
            allowed_failures: 0,
            cases: 0,
            worst: None,
            failures: Vec::new(),
            keep_all: Vec::new(),
            record_all: false,
        }
    }

    fn compare(&mut self, case: String, reference: f64, observed: f64) {
        let d = gap(self.metric, reference, observed);
        self.push(case, reference, observed, d, self.tolerance);
    }

    fn push(&mut self, case: String, reference: f64, observed: f64, d: f64, tol: f64) {
        self.cases += 1;
        let passed = d <= tol;
        let record = |kind: &str| VerifyRecord {
            check: self.check.to_string(),
            kind: kind.to_string(),
            case: case.clone(),
            reference: Some(reference),
            observed: Some(observed),
            delta: Some(d),
            tolerance: Some(tol),
            cases: None,
            failures: None,
            passed,
        };
        if self.record_all {
            self.keep_all.push(record("case"));
        } else if !passed {
            self.failures.push(record("failure"));
        }
        let score = if tol > 0.0 {
            d / tol
        } else if d > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if self.worst.as_ref().is_none_or(|w| score > w.4) {
            self.worst = Some((case, reference, observed, d, score));
        }
    }

    fn finish(self, out: &mut Vec<VerifyRecord>) {
        let failures = if self.record_all {
            self.keep_all.iter().filter(|r| !r.passed).count() as u64
        } else {
            self.failures.len() as u64
        };
        let passed = failures <= self.allowed_failures;
        let worst_delta = self.worst.as_ref().map(|w| w.3);
        out.push(VerifyRecord {
            check: self.check.to_string(),
            kind: "summary".into(),
            case: format!(
                "metric={} allowed_failures={}",
                match self.metric {
                    Metric::Abs => "abs",
                    Metric::Rel => "rel",
                },
                self.allowed_failures
            ),
            reference: None,
            observed: None,
            delta: worst_delta,
            tolerance: Some(self.tolerance),
            cases: Some(self.cases),
            failures: Some(failures),
            passed,
        });
        if !self.record_all {
            if let Some((case, r, o, d, _)) = self.worst {
                out.push(VerifyRecord {
                    check: self.check.to_string(),
                    kind: "worst".into(),
                    case,
                    reference: Some(r),
                    observed: Some(o),
                    delta: Some(d),
                    tolerance: Some(self.tolerance),
                    cases: None,
                    failures: None,
                    passed: d <= self.tolerance,
                });
            }
        }
        out.extend(self.failures);
        out.extend(self.keep_all);
    }
}

/// Seeded parameter generator, independent of the simulation streams.
struct Params {
    stream: TrialStream,
}

impl Params {
    fn new(seed: u64, tag: u64) -> Self {
        Params {
            stream: TrialStream::at_trial(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15), 0, 1),
        }
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.stream.uniform()
    }

    fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform(lo.ln(), hi.ln()).exp()
    }

    fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + ((self.stream.uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo)
    }

    fn profile(&mut self, n: usize, lo: f64, hi: f64) -> Result<ChannelProfile> {
        let sd = self.log_uniform(lo, hi);
        let se = self.log_uniform(lo, hi);
        let mut lists = [Vec::new(), Vec::new(), Vec::new()];
        for list in lists.iter_mut() {
            *list = (0..n).map(|_| self.log_uniform(lo, hi)).collect();
        }
        let [si, id, ie] = lists;
        ChannelProfile::new(sd, se, si, id, ie)
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format_f64(*x))
        .collect::<Vec<_>>()
        .join("|")
}

fn describe(p: &ChannelProfile) -> String {
    format!(
        "sd={} se={} si=[{}] id=[{}] ie=[{}]",
        format_f64(p.sigma_sd2()),
        format_f64(p.sigma_se2()),
        fmt_list(p.sigma_si2()),
        fmt_list(p.sigma_id2()),
        fmt_list(p.sigma_ie2())
    )
}

/// Copy of `p` with `edit` applied to the source-to-relay gains.
fn with_source_gains(p: &ChannelProfile, edit: impl Fn(&mut Vec<f64>)) -> Result<ChannelProfile> {
    let mut si = p.sigma_si2().to_vec();
    edit(&mut si);
    ChannelProfile::new(
        p.sigma_sd2(),
        p.sigma_se2(),
        si,
        p.sigma_id2().to_vec(),
        p.sigma_ie2().to_vec(),
    )
}

/// Outage via the intercept-outage relation versus direct evaluation.
fn check_dt_round_trip(opts: &VerifyOptions, out: &mut Vec<VerifyRecord>) -> Result<()> {
    let mut g = Group::new("dt_round_trip", Metric::Rel, ROUND_TRIP_REL_TOL);
    let mut rng = Params::new(opts.seed, 1);
    for _ in 0..opts.sizes.dt_tuples {
        let sd = rng.log_uniform(1e-2, 1e2);
        let se = rng.log_uniform(1e-2, 1e2);
        // alpha is drawn relative to se so the intercept stays clear of one,
        // where it no longer determines alpha to twelve digits.
        let alpha = se * rng.log_uniform(1e-3, 30.0);
        let direct = dt_outage(sd, alpha)?;
        let via = dt_outage_from_intercept(dt_intercept(se, alpha)?, se, opts.bump(sd))?;
        g.compare(
            format!(
                "sd={} se={} alpha={}",
                format_f64(sd),
                format_f64(se),
                format_f64(alpha)
            ),
            direct,
            via,
        );
    }
    g.finish(out);
    Ok(())
}

/// Subset enumeration on an equal-gain profile versus the i.i.d. closed forms.
fn check_iid_vs_general(opts: &VerifyOptions, out: &mut Vec<VerifyRecord>) -> Result<()> {
    let mut g_out = Group::new(
        "iid_vs_general_outage",
        Metric::Rel,
        ENGINE_EQUIVALENCE_REL_TOL,
    );
    let mut g_int = Group::new(
        "iid_vs_general_intercept",
        Metric::Rel,
        ENGINE_EQUIVALENCE_REL_TOL,
    );
    let mut rng = Params::new(opts.seed, 2);
    for n in 1..=6 {
        for _ in 0..opts.sizes.iid_cases_per_n {
            let sm = rng.log_uniform(0.1, 10.0);
            let se = rng.log_uniform(0.1, 10.0);
            let delta = rng.log_uniform(1e-3, 3.0);
            let iid = IidProfile::new(sm, se, n)?;
            let general = with_source_gains(&iid.expand(), |si| si[0] = opts.bump(si[0]))?;
            let case = format!(
                "n={n} sm={} se={} delta={}",
                format_f64(sm),
                format_f64(se),
                format_f64(delta)
            );
            g_out.compare(
                case.clone(),
                iid_outage(n, sm, delta)?,
                ors_outage(&general, delta)?,
            );
            g_int.compare(
                case,
                iid_intercept(n, sm, se, delta)?,
                ors_intercept(&general, delta)?,
            );
        }
    }
    g_out.finish(out);
    g_int.finish(out);
    Ok(())
}

/// Intercept from the outage-indexed relation versus direct evaluation.
fn check_finite_relation(opts: &VerifyOptions, out: &mut Vec<VerifyRecord>) -> Result<()> {
    let mut g = Group::new("finite_relation", Metric::Rel, FINITE_RELATION_REL_TOL);
    let mut rng = Params::new(opts.seed, 3);
    for _ in 0..opts.sizes.finite_relation_cases {
        let n = rng.int(1, 10);
        let sm = rng.log_uniform(0.1, 10.0);
        let se = rng.log_uniform(0.1, 10.0);
        // Same conditioning concern: outage within a few ulps of one loses theta.
        let delta = sm * rng.log_uniform(1e-3, 2.0);
        let p_out = iid_outage(n, sm, delta)?;
        if !(p_out > 0.0 && p_out < 1.0) {
            continue;
        }
        g.compare(
            format!(
                "n={n} sm={} se={} delta={}",
                format_f64(sm),
                format_f64(se),
                format_f64(delta)
            ),
            iid_intercept(n, opts.bump(sm), se, delta)?,
            intercept_from_outage_finite(p_out, n, sm / se)?,
        );
    }
    g.finish(out);
    Ok(())
}

/// Selection-probability identities and the two forms of the eavesdropper's
/// conditional success probability.
fn check_appendix(opts: &VerifyOptions, out: &mut Vec<VerifyRecord>) -> Result<()> {
    let mut sums = Group::new("selection_sum", Metric::Abs, SELECTION_SUM_TOL);
    let mut quad = Group::new("selection_quadrature", Metric::Abs, QUADRATURE_TOL);
    let mut forms = Group::new("expanded_vs_complement", Metric::Abs, EXPANDED_FORM_TOL);
    let mut rng = Params::new(opts.seed, 4);
    let mut profiles = Vec::with_capacity(opts.sizes.appendix_profiles);
    for _ in 0..opts.sizes.appendix_profiles {
        let n = rng.int(1, 6);
        let p = rng.profile(n, 0.1, 10.0)?;
        let delta = rng.log_uniform(1e-3, 3.0);
        profiles.push((p, delta));
    }
    // Quadrature dominates the cost; evaluate profiles in parallel, merge in order.
    let per_profile: Vec<Result<Vec<AppendixCase>>> = {
        use rayon::prelude::*;
        profiles
            .par_iter()
            .map(|(p, delta)| appendix_cases(p, *delta, opts))
            .collect()
    };
    for cases in per_profile {
        for (group, case, reference, observed) in cases? {
            match group {
                0 => sums.compare(case, reference, observed),
                1 => quad.compare(case, reference, observed),
                _ => forms.compare(case, reference, observed),
            }
        }
    }
    sums.finish(out);
    quad.finish(out);
    forms.finish(out);
    Ok(())
}

/// (group index, case label, reference, observed)
type AppendixCase = (usize, String, f64, f64);

fn appendix_cases(
    p: &ChannelProfile,
    delta: f64,
    opts: &VerifyOptions,
) -> Result<Vec<AppendixCase>> {
    let n = p.n_relays();
    let id = p.sigma_id2();
    let mut bumped_id = id.to_vec();
    let mut cases = Vec::new();
    let desc = describe(p);
    for set in DecodingSet::full(n).nonempty_subsets() {
        let mut total = 0.0;
        for i in set.iter() {
            let closed = pr_best_is(set, i, id)?;
            total += closed;
            bumped_id.copy_from_slice(id);
            bumped_id[i] = opts.bump(id[i]);
            let numeric = quadrature_pr_best_is(set, i, &bumped_id)?;
            cases.push((
                1,
                format!("{desc} set={:#b} i={i}", set.mask()),
                closed,
                numeric,
            ));
        }
        cases.push((0, format!("{desc} set={:#b}", set.mask()), 1.0, total));
        let complement = pr_eav_intercept_given_set(set, p.sigma_se2(), id, p.sigma_ie2(), delta)?;
        let expanded = pr_eav_intercept_given_set_expanded(
            set,
            opts.bump(p.sigma_se2()),
            id,
            p.sigma_ie2(),
            delta,
        )?;
        cases.push((
            2,
            format!("{desc} set={:#b} delta={}", set.mask(), format_f64(delta)),
            complement,
            expanded,
        ));
    }
    Ok(cases)
}

/// Simulation estimates inside their confidence band around the closed forms.
fn check_mc(opts: &VerifyOptions, out: &mut Vec<VerifyRecord>) -> Result<()> {
    let mut cases: Vec<(String, ChannelProfile, f64)> = Vec::new();
    for &n in &MC_GRID_N {
        for &mer_db in &MC_GRID_MER_DB {
            for &delta in &MC_GRID_DELTA {
                let p = IidProfile::from_mer(mer_from_db(mer_db), n)?.expand();
                cases.push((
                    format!("grid n={n} mer_db={mer_db} delta={delta}"),
                    p,
                    delta,
                ));
            }
        }
    }
    let mut rng = Params::new(opts.seed, 5);
    for k in 0..opts.sizes.mc_random_profiles {
        let n = rng.int(1, 4);
        let p = rng.profile(n, 0.3, 3.0)?;
        let delta = rng.log_uniform(0.05, 1.0);
        cases.push((
            format!("random#{k} {} delta={}", describe(&p), format_f64(delta)),
            p,
            delta,
        ));
    }

    let mut g = Group::new("mc_containment", Metric::Abs, 0.0);
    g.record_all = true;
    let total_checks = 2 * cases.len() as u64;
    g.allowed_failures = (total_checks / 100).max(1);
    for (k, (label, p, delta)) in cases.iter().enumerate() {
        let mc_opts = McOptions {
            trials: opts.trials,
            seed: opts.seed.wrapping_add(k as u64),
            workers: 0,
            confidence: DEFAULT_CONFIDENCE,
        };
        let sim = simulate_ors_at(p, *delta, &mc_opts)?;
        let analytic = with_source_gains(p, |si| si[0] = opts.bump(si[0]))?;
        let (a_out, a_int) = (
            ors_outage(&analytic, *delta)?,
            ors_intercept(&analytic, *delta)?,
        );
        g.push(
            format!("{label} outage"),
            a_out,
            sim.outage.p_hat,
            (a_out - sim.outage.p_hat).abs(),
            sim.outage.ci_half_width,
        );
        g.push(
            format!("{label} intercept"),
            a_int,
            sim.intercept.p_hat,
            (a_int - sim.intercept.p_hat).abs(),
            sim.intercept.ci_half_width,
        );
    }
    g.finish(out);
    Ok(())
}

/// Run every check group. The report is a pure function of `seed`, `trials`,
/// `fault` and `sizes`.
pub fn verify_suite(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.trials < MIN_TRIALS {
        return Err(Error::domain(format!(
            "verification needs at least {MIN_TRIALS} trials, got {}",
            opts.trials
        )));
    }
    in_pool(opts.workers, || {
        let mut records = Vec::new();
        check_dt_round_trip(opts, &mut records)?;
        check_iid_vs_general(opts, &mut records)?;
        check_finite_relation(opts, &mut records)?;
        check_appendix(opts, &mut records)?;
        check_mc(opts, &mut records)?;
        Ok(VerifyReport { records })
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> VerifyOptions {
        let mut o = VerifyOptions::new(seed, MIN_TRIALS);
        o.sizes = VerifySizes {
            dt_tuples: 50,
            iid_cases_per_n: 5,
            appendix_profiles: 10,
            finite_relation_cases: 30,
            mc_random_profiles: 2,
        };
        o
    }

    #[test]
    fn small_suite_passes() {
        let r = verify_suite(&small(42)).unwrap();
        for s in r.summaries() {
            assert!(s.passed, "{s:?}");
        }
        assert!(r.passed());
        assert!(r.summary("mc_containment").unwrap().cases.unwrap() >= 48);
    }

    #[test]
    fn injected_fault_trips_equality_checks_only() {
        let mut o = small(7);
        o.fault = Some(1e-6);
        let r = verify_suite(&o).unwrap();
        assert!(!r.passed());
        for check in [
            "dt_round_trip",
            "iid_vs_general_outage",
            "iid_vs_general_intercept",
            "finite_relation",
            "selection_quadrature",
            "expanded_vs_complement",
        ] {
            assert!(!r.summary(check).unwrap().passed, "{check} should fail");
        }
        assert!(r.summary("mc_containment").unwrap().passed);
        assert!(r.records.iter().any(|x| x.kind == "failure"));
    }

    #[test]
    fn too_few_trials_rejected() {
        let mut o = small(1);
        o.trials = 10;
        assert!(verify_suite(&o).is_err());
    }
}
