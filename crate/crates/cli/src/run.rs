//! Scenario execution: each check dispatches into the core library and records a verdict.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use oplab_core::cone_geometry::supremum_feasibility;
use oplab_core::domination::{check_asymptotic_domination, domination_grid, Trajectory, Verdict as DomVerdict};
use oplab_core::linalg::rank;
use oplab_core::lower_bounds::{
    converge_via_lower_bounds, dominating_semigroup_convergence, find_universal_lower_bound,
    find_universal_mean_lower_bound, markov_renorm, PipelineMode, CESARO_HORIZON, LIMIT_HORIZON,
};
use oplab_core::norms::{additivity_defect, norm_functional};
use oplab_core::semigroup::{mean_ergodic_projection, strong_limit, ErgodicStatus, LimitStatus};
use oplab_core::{builders, Cone, Semigroup};
use serde::{Deserialize, Serialize};

use crate::config::{resolve, CheckKind, CheckSpec, ConfigError, Expectation, Resolved, ScenarioConfig};
use crate::report::{input_digest, RunReport, Series, ARTIFACT_VERSION};

/// Command-line overrides applied to a config before it is digested and run.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    /// Replaces the end of the observation window.
    pub horizon: Option<f64>,
    /// Replaces the default tolerance of checks without their own.
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: ScenarioConfig) -> ScenarioConfig {
        if let Some(h) = self.horizon {
            cfg.window[1] = h;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub check: CheckKind,
    pub verdict: Verdict,
    /// Verdict of the property itself, before the expectation is applied.
    pub observed: Verdict,
    pub expect: Expectation,
    pub tolerance: f64,
    /// Finite scalar metrics only.
    pub metrics: BTreeMap<String, f64>,
    pub diagnostic: String,
    pub trajectories: Vec<Series>,
}

struct Outcome {
    verdict: Verdict,
    metrics: BTreeMap<String, f64>,
    diagnostic: String,
    trajectories: Vec<Series>,
}

impl Outcome {
    fn new(verdict: Verdict, diagnostic: impl Into<String>) -> Self {
        Self {
            verdict,
            metrics: BTreeMap::new(),
            diagnostic: diagnostic.into(),
            trajectories: Vec::new(),
        }
    }

    fn judged(pass: bool, diagnostic: impl Into<String>) -> Self {
        Self::new(if pass { Verdict::Pass } else { Verdict::Fail }, diagnostic)
    }

    fn metric(mut self, key: &str, v: f64) -> Self {
        if v.is_finite() {
            self.metrics.insert(key.into(), v);
        }
        self
    }

    fn series(mut self, s: Series) -> Self {
        self.trajectories.push(s);
        self
    }
}

/// Validates, resolves and runs every check; check failures are recorded, never raised.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, ConfigError> {
    let started = Instant::now();
    let resolved = resolve(cfg)?;
    let checks: Vec<CheckResult> = cfg.checks.iter().map(|c| run_check(cfg, &resolved, c)).collect();
    let passed = checks.iter().all(|c| c.verdict == Verdict::Pass);
    Ok(RunReport {
        scenario: cfg.name.clone(),
        artifact_version: ARTIFACT_VERSION.into(),
        input_digest: input_digest(cfg),
        seed: cfg.seed,
        passed,
        checks,
        config: cfg.clone(),
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

fn run_check(cfg: &ScenarioConfig, r: &Resolved, spec: &CheckSpec) -> CheckResult {
    let tol = spec.tol.unwrap_or(cfg.tol);
    let window = (cfg.window[0], cfg.window[1]);
    let sg = |name: &Option<String>| &r.semigroups[name.as_deref().expect("validated")];
    let outcome = match evaluate(cfg, r, spec, tol, window, &sg) {
        Ok(o) => o,
        Err(e) => Outcome::new(Verdict::Inconclusive, format!("error: {e}")),
    };
    let verdict = match (spec.expect, outcome.verdict) {
        (Expectation::Holds, v) => v,
        (Expectation::Fails, Verdict::Pass) => Verdict::Fail,
        (Expectation::Fails, Verdict::Fail) => Verdict::Pass,
        (Expectation::Fails, Verdict::Inconclusive) => Verdict::Inconclusive,
    };
    CheckResult {
        name: spec.label(),
        check: spec.check,
        verdict,
        observed: outcome.verdict,
        expect: spec.expect,
        tolerance: tol,
        metrics: outcome.metrics,
        diagnostic: outcome.diagnostic,
        trajectories: outcome.trajectories,
    }
}

fn param(spec: &CheckSpec, key: &str) -> Option<f64> {
    spec.params.get(key).copied()
}

fn evaluate<'a>(
    cfg: &ScenarioConfig,
    r: &'a Resolved,
    spec: &CheckSpec,
    tol: f64,
    window: (f64, f64),
    sg: &dyn Fn(&Option<String>) -> &'a Semigroup<f64>,
) -> oplab_core::Result<Outcome> {
    Ok(match spec.check {
        CheckKind::Positivity => {
            let s = sg(&spec.target);
            let grid = domination_grid(s.kind().into(), (0.0, window.1));
            let rep = s.positivity_check(&grid, tol)?;
            match rep.witness {
                None => Outcome::judged(rep.positive, "cone is invariant on the grid"),
                Some((t, ray)) => Outcome::judged(false, format!("ray {ray:?} leaves the cone at t = {t}")),
            }
        }
        CheckKind::MeanErgodic => {
            let s = sg(&spec.target);
            let horizon = param(spec, "horizon").unwrap_or(CESARO_HORIZON);
            let res = mean_ergodic_projection(s, tol, horizon)?;
            let verdict = match res.status {
                ErgodicStatus::Converged => Verdict::Pass,
                ErgodicStatus::Diverged => Verdict::Fail,
                ErgodicStatus::Undecided => Verdict::Inconclusive,
            };
            let rank_p = res.projection.as_ref().map(|p| rank(&p.0, 1e-8) as f64);
            let rows = res
                .numeric
                .trace
                .iter()
                .map(|s| vec![s.t, s.mean_gap, s.extrapolated_gap])
                .collect();
            let mut o = Outcome::new(
                verdict,
                format!(
                    "{:?}; spectral {:?}; Cauchy gap {:.3e} at t = {}",
                    res.status, res.spectral_status, res.numeric.gap, res.numeric.t
                ),
            )
            .metric("cesaro_gap", res.numeric.gap)
            .metric("cesaro_time", res.numeric.t)
            .metric("agreement_gap", res.agreement_gap)
            .series(Series::new("cesaro", &["t", "mean_gap", "extrapolated_gap"], rows));
            if let Some(k) = rank_p {
                o = o.metric("projection_rank", k);
            }
            o
        }
        CheckKind::StrongLimit => {
            let s = sg(&spec.target);
            let horizon = param(spec, "horizon").unwrap_or(LIMIT_HORIZON);
            let rep = strong_limit(s, tol, horizon)?;
            let rows = rep.cauchy_trace.iter().map(|(t, g)| vec![*t, *g]).collect();
            let limit_rank = rep.limit.as_ref().map(|p| rank(&p.0, 1e-8));
            let mut pass = rep.status == LimitStatus::Converged;
            let mut diag = format!("{:?}: {}", rep.status, rep.diagnostic);
            if let (Some(want), Some(got)) = (param(spec, "expect_rank"), limit_rank) {
                if got as f64 != want {
                    pass = false;
                    diag = format!("{diag}; limit rank {got}, expected {want}");
                }
            }
            let verdict = match rep.status {
                LimitStatus::NotConverged => Verdict::Inconclusive,
                _ if pass => Verdict::Pass,
                _ => Verdict::Fail,
            };
            let mut o = Outcome::new(verdict, diag)
                .metric("spectral_agrees", f64::from(u8::from(rep.spectral_agrees)))
                .series(Series::new("cauchy", &["t", "gap"], rows));
            if let Some(t) = rep.limit_time {
                o = o.metric("limit_time", t);
            }
            if let Some(k) = limit_rank {
                o = o.metric("limit_rank", k as f64);
            }
            if let Some(x) = rep.projection_residual {
                o = o.metric("projection_residual", x);
            }
            if let Some(x) = rep.commutation_residual {
                o = o.metric("commutation_residual", x);
            }
            o
        }
        CheckKind::Domination | CheckKind::Equivalence => {
            let (f, g) = (sg(&spec.target), sg(&spec.against));
            let (tf, tg) = (trajectory(f)?, trajectory(g)?);
            let rep = check_asymptotic_domination(&tf, &tg, window, tol)?;
            let rows = rep.error_samples.iter().map(|s| vec![s.t, s.error_fg, s.error_gf]).collect();
            let dominated = rep.forward.verdict == DomVerdict::Dominated;
            let (verdict, what) = if spec.check == CheckKind::Domination {
                (from_domination(rep.forward.verdict), "f ⪯ g")
            } else if rep.equivalent {
                (Verdict::Pass, "f ~ g")
            } else if rep.forward.verdict == DomVerdict::NotDominated || rep.reverse.verdict == DomVerdict::NotDominated {
                (Verdict::Fail, "f ~ g")
            } else {
                (Verdict::Inconclusive, "f ~ g")
            };
            Outcome::new(
                verdict,
                format!(
                    "{what}: forward {:?} (tail sup {:.3e}), reverse {:?} (tail sup {:.3e})",
                    rep.forward.verdict, rep.forward.sup_tail, rep.reverse.verdict, rep.reverse.sup_tail
                ),
            )
            .metric("forward_sup_tail", rep.forward.sup_tail)
            .metric("reverse_sup_tail", rep.reverse.sup_tail)
            .metric("forward_trend", rep.forward.trend)
            .metric("reverse_trend", rep.reverse.trend)
            .metric("forward_dominated", f64::from(u8::from(dominated)))
            .series(Series::new("domination", &["t", "error_fg", "error_gf"], rows))
        }
        CheckKind::MixedSignDifference => {
            let (f, g) = (sg(&spec.target), sg(&spec.against));
            let t = param(spec, "t").unwrap_or(1.0);
            let d: DMatrix<f64> = f.evaluate(t)? - g.evaluate(t)?;
            let (hi, lo) = (d.max(), d.min());
            Outcome::judged(
                hi > tol && lo < -tol,
                format!("entries of f(t) − g(t) at t = {t} range over [{lo:.3e}, {hi:.3e}]"),
            )
            .metric("max_entry", hi)
            .metric("min_entry", lo)
        }
        CheckKind::UniversalLowerBound => {
            let s = sg(&spec.target);
            let min_beta = param(spec, "min_beta").unwrap_or(0.0);
            match find_universal_lower_bound(s, window, tol)? {
                Some(c) => Outcome::judged(
                    c.beta >= min_beta * (1.0 - 1e-6),
                    format!("{:?} bound with β = {:.6} over {} rays", c.kind, c.beta, c.tested_rays.len()),
                )
                .metric("beta", c.beta),
                None => Outcome::judged(false, "no universal lower bound with positive norm"),
            }
        }
        CheckKind::MeanLowerBoundOnly => {
            let s = sg(&spec.target);
            let mean = find_universal_mean_lower_bound(s, window, tol)?;
            let plain = find_universal_lower_bound(s, window, tol)?;
            let mut o = Outcome::judged(
                mean.is_some() && plain.is_none(),
                format!(
                    "mean bound {}, plain bound {}",
                    if mean.is_some() { "found" } else { "absent" },
                    if plain.is_some() { "found" } else { "absent" }
                ),
            );
            if let Some(c) = mean {
                o = o.metric("mean_beta", c.beta);
            }
            if let Some(c) = plain {
                o = o.metric("plain_beta", c.beta);
            }
            o
        }
        CheckKind::Pipeline => {
            let s = sg(&spec.target);
            let mode = spec.mode.unwrap_or(PipelineMode::Universal);
            let rep = converge_via_lower_bounds(s, mode, window, tol)?;
            pipeline_outcome(spec, &rep)
        }
        CheckKind::DominatingConvergence => {
            let (t, s) = (sg(&spec.target), sg(&spec.against));
            let rep = dominating_semigroup_convergence(t, s, window, tol)?;
            let o = pipeline_outcome(spec, &rep);
            match rep.reference_gap {
                Some(g) => o.metric("reference_gap", g),
                None => o,
            }
        }
        CheckKind::MarkovRenorm => {
            let s = sg(&spec.target);
            let phi = norm_functional(s.norm(), s.cone())?.one.vector().clone();
            let m = markov_renorm(s, &phi, window, tol)?;
            let defect = additivity_defect(&m.renorm.norm, s.cone(), 200, cfg.seed.expect("validated"))?;
            Outcome::judged(
                m.markov_defect <= tol.max(1e-8) && defect <= 1e-8,
                format!(
                    "ψ = {:?}; Markov defect {:.3e}; additivity defect {:.3e}",
                    m.psi, m.markov_defect, defect
                ),
            )
            .metric("markov_defect", m.markov_defect)
            .metric("additivity_defect", defect)
            .metric("fixed_residual", m.fixed_residual)
            .metric("cesaro_time", m.cesaro_time)
            .metric("equivalence_lower", m.renorm.lower)
            .metric("equivalence_upper", m.renorm.upper)
        }
        CheckKind::AdditiveNorm => {
            let samples = param(spec, "samples").map_or(1000, |s| s.max(1.0) as usize);
            let defect = additivity_defect(&r.norm, &r.cone, samples, cfg.seed.expect("validated"))?;
            Outcome::judged(
                defect <= tol,
                format!("{} on {}: relative additivity defect {defect:.3e}", r.norm.name(), r.cone.kind()),
            )
            .metric("defect", defect)
        }
        CheckKind::NonLattice => {
            let [a, b, u1, u2] = match &spec.points {
                Some(p) => [0, 1, 2, 3].map(|i| DVector::from_row_slice(&p[i])),
                None => builders::non_lattice_pair::<f64>(),
            };
            let bounds = [&u1, &u2]
                .iter()
                .all(|u| r.cone.contains(&(*u - &a), 1e-12).unwrap_or(false) && r.cone.contains(&(*u - &b), 1e-12).unwrap_or(false));
            if !bounds {
                return Ok(Outcome::new(Verdict::Inconclusive, "u₁, u₂ are not both upper bounds of {a, b}"));
            }
            let cert = supremum_feasibility(&r.cone, &a, &b, &u1, &u2)?;
            Outcome::judged(
                !cert.feasible && cert.farkas_verified,
                if cert.feasible {
                    format!("a common upper bound below u₁, u₂ exists: {:?}", cert.witness)
                } else {
                    format!("no upper bound of {{a, b}} below both u₁ and u₂; Farkas verified: {}", cert.farkas_verified)
                },
            )
            .metric("infeasibility", cert.infeasibility)
        }
    })
}

fn from_domination(v: DomVerdict) -> Verdict {
    match v {
        DomVerdict::Dominated => Verdict::Pass,
        DomVerdict::NotDominated => Verdict::Fail,
        DomVerdict::Inconclusive => Verdict::Inconclusive,
    }
}

/// Operator orbits on the orthant; otherwise the orbit of the cone's interior point.
fn trajectory(sg: &Semigroup<f64>) -> oplab_core::Result<Trajectory<f64>> {
    match sg.cone() {
        Cone::Orthant { .. } => Trajectory::operator_orbit(sg),
        cone => Trajectory::orbit(sg, cone.interior_point()),
    }
}

fn pipeline_outcome(spec: &CheckSpec, rep: &oplab_core::lower_bounds::ConvergencePipelineReport<f64>) -> Outcome {
    let beta = rep.certificate.as_ref().map(|c| c.beta);
    let mut pass = rep.converged;
    let mut notes = Vec::new();
    if let Some(stage) = &rep.failed_stage {
        let diag = rep.stages.last().map_or("", |s| s.diagnostic.as_str());
        notes.push(format!("failed at {stage}: {diag}"));
    } else {
        notes.push(format!("stages passed: {}", rep.stages.iter().map(|s| s.stage.as_str()).collect::<Vec<_>>().join(", ")));
    }
    if rep.converged {
        if let Some(want) = param(spec, "expect_rank") {
            if rep.limit_rank as f64 != want {
                pass = false;
                notes.push(format!("limit rank {}, expected {want}", rep.limit_rank));
            }
        }
        if let (Some(min), Some(b)) = (param(spec, "min_beta"), beta) {
            if b < min * (1.0 - 1e-6) {
                pass = false;
                notes.push(format!("β = {b} below {min}"));
            }
        }
    }
    let mut o = Outcome::judged(pass, notes.join("; ")).metric("limit_rank", rep.limit_rank as f64);
    for (k, v) in [
        ("beta", beta),
        ("gamma", rep.gamma),
        ("limit_time", rep.limit_time),
        ("projection_residual", rep.projection_residual),
        ("commutation_residual", rep.commutation_residual),
        ("markov_defect", rep.markov_defect),
        ("dual_angle", rep.dual_angle),
        ("dual_fixed_dim", rep.dual_fixed_dim.map(|d| d as f64)),
    ] {
        if let Some(v) = v {
            o = o.metric(k, v);
        }
    }
    o
}
