//! Lower bounds for positive semigroups and the convergence results they imply.
//!
//! A nonzero `h ∈ K` is a lower bound for a unit vector `f ∈ K` when the
//! constant trajectory `h` is asymptotically dominated by the orbit `T_t f`
//! (or by the Cesàro means `A_t f` for mean lower bounds).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone_geometry::lp::{LinearProgram, LpStatus, Relation};
use crate::cone_geometry::{distance_to_cone, positive_decompose, project_to_cone, Cone};
use crate::domination::{
    check_asymptotic_domination, domination_grid, error_decomposition, DominationReport, TimeDomain, Trajectory,
    Verdict,
};
use crate::error::{LabError, Result};
use crate::linalg::{norm1, nullspace, rank, Matrix};
use crate::norms::{additivity_defect, norm_functional, psi_renorm, NormSpec, PsiRenorm};
use crate::scalar::Scalar;
use crate::semigroup::{
    geometric_grid, mean_ergodic_projection, strong_limit, ErgodicStatus, LimitStatus, Semigroup,
};

/// Horizon of Cesàro Cauchy tests that run until convergence.
pub const CESARO_HORIZON: f64 = 1e12;

/// Extra sampled rays probed on cones that are not finitely generated.
pub const SAMPLED_PROBES: usize = 16;

/// Seed of the sampled probe rays.
pub const PROBE_SEED: u64 = 0x0b1a;

const UNIT_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Individual,
    Universal,
    IndividualMean,
    UniversalMean,
}

impl BoundKind {
    pub fn is_mean(self) -> bool {
        matches!(self, BoundKind::IndividualMean | BoundKind::UniversalMean)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LowerBoundCertificate<T: Scalar> {
    pub h: Vec<T>,
    pub kind: BoundKind,
    /// `‖h‖` for universal bounds, `inf_f ‖h_f‖` for families.
    pub beta: T,
    /// Tail `sup d₊(T_t f − h)` for each tested ray.
    pub residuals: Vec<f64>,
    pub tested_rays: Vec<Vec<T>>,
}

/// Verdict of [`is_lower_bound`] with the underlying domination report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    pub accepted: bool,
    pub sup_tail: f64,
    pub report: DominationReport,
}

fn unit_norm<T: Scalar>(norm: &NormSpec<T>, f: &DVector<T>) -> Result<()> {
    let n = norm.eval(f)?;
    if (n - T::one()).abs() > T::lit(UNIT_TOL) {
        return Err(LabError::Precondition(format!("‖f‖ must be 1, got {n}")));
    }
    Ok(())
}

fn orbit_trajectory<T: Scalar>(sg: &Semigroup<T>, f: &DVector<T>, mean: bool) -> Result<Trajectory<T>> {
    let tr = Trajectory::orbit(sg, f.clone())?;
    Ok(if mean { tr.cesaro() } else { tr })
}

/// Whether the constant `h` is asymptotically dominated by `T_t f` (or `A_t f` when `mean`).
pub fn is_lower_bound<T: Scalar>(
    h: &DVector<T>,
    sg: &Semigroup<T>,
    f: &DVector<T>,
    mean: bool,
    window: (f64, f64),
    tol: f64,
) -> Result<LowerBoundCheck> {
    let cone = sg.cone();
    cone.check_dim(h, "lower bound")?;
    cone.check_dim(f, "lower bound start")?;
    unit_norm(sg.norm(), f)?;
    if !cone.contains(f, T::feastol())? {
        return Err(LabError::Precondition("f must lie in the cone".into()));
    }
    if !cone.contains(h, T::feastol())? {
        return Err(LabError::Precondition("h must lie in the cone".into()));
    }
    if sg.norm().eval(h)? <= T::feastol() {
        return Err(LabError::Precondition("h must be nonzero".into()));
    }
    let constant = Trajectory::constant(h.clone(), cone.clone(), sg.norm().clone(), sg.kind().into())?;
    let orbit = orbit_trajectory(sg, f, mean)?;
    let report = check_asymptotic_domination(&constant, &orbit, window, tol)?;
    Ok(LowerBoundCheck {
        accepted: report.verdict() == Verdict::Dominated,
        sup_tail: report.sup_tail(),
        report,
    })
}

/// Unit-norm probe rays: spanning extreme rays plus sampled ones on curved cones.
pub fn unit_probe_rays<T: Scalar>(sg: &Semigroup<T>) -> Result<Vec<DVector<T>>> {
    let mut out = Vec::new();
    for g in sg.cone().probe_rays(SAMPLED_PROBES, PROBE_SEED) {
        let n = sg.norm().eval(&g)?;
        if n > T::zero() {
            out.push(g / n);
        }
    }
    Ok(out)
}

fn tail_times(domain: TimeDomain, window: (f64, f64)) -> Vec<f64> {
    let grid = domination_grid(domain, window);
    grid[grid.len() / 2..].to_vec()
}

fn tail_samples<T: Scalar>(
    sg: &Semigroup<T>,
    rays: &[DVector<T>],
    mean: bool,
    window: (f64, f64),
) -> Result<Vec<DVector<T>>> {
    let mut out = Vec::new();
    for &t in &tail_times(sg.kind().into(), window) {
        let op = if mean { sg.cesaro_pair(t)?.0 } else { sg.evaluate(t)? };
        for g in rays {
            out.push(&op * g);
        }
    }
    Ok(out)
}

/// Largest `h ∈ K` below every sample, by cone type.
fn common_lower_vector<T: Scalar>(cone: &Cone<T>, norm: &NormSpec<T>, vs: &[DVector<T>]) -> Result<DVector<T>> {
    let d = cone.dim();
    match cone {
        Cone::Orthant { .. } => {
            let mut h = DVector::from_element(d, T::lit(f64::INFINITY));
            for v in vs {
                h = h.zip_map(v, |a: T, b: T| a.min(b));
            }
            Ok(h.map(|x| x.max(T::zero())))
        }
        Cone::Polyhedral(_) | Cone::Sliced(_) => {
            let p = cone.polyhedral().expect("finitely generated");
            let g = p.generator_matrix();
            let m = g.ncols();
            let one = norm_functional(norm, cone)?.one.vector().clone();
            let mut lp = LinearProgram::new(m);
            lp.maximize((0..m).map(|j| one.dot(&g.column(j))).collect());
            for v in vs {
                for a in p.halfspaces() {
                    let coeffs: Vec<T> = (0..m).map(|j| a.dot(&g.column(j))).collect();
                    lp.constrain(coeffs, Relation::Le, a.dot(v));
                }
            }
            let sol = lp.solve()?;
            if sol.status != LpStatus::Optimal {
                return Ok(DVector::zeros(d));
            }
            Ok(&g * DVector::from_vec(sol.x))
        }
        Cone::Psd { .. } | Cone::Centred(_) => {
            // Largest multiple of the mean direction that fits below every sample.
            let c = vs.iter().fold(DVector::zeros(d), |a, v| a + v) / <T as Scalar>::from_usize(vs.len().max(1));
            let cn = norm.eval(&c)?;
            if cn <= T::feastol() {
                return Ok(DVector::zeros(d));
            }
            let c = c / cn;
            let mut hi = T::lit(f64::INFINITY);
            for v in vs {
                hi = hi.min(norm.eval(v)?);
            }
            let mut lo = T::zero();
            for _ in 0..100 {
                let mid = T::lit(0.5) * (lo + hi);
                let mut ok = true;
                for v in vs {
                    if !cone.contains(&(v - &c * mid), T::zero())? {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(c * lo)
        }
    }
}

fn require_additive<T: Scalar>(sg: &Semigroup<T>) -> Result<()> {
    let defect = additivity_defect(sg.norm(), sg.cone(), 64, PROBE_SEED)?;
    if defect > T::lit(1e-8) {
        return Err(LabError::NotAdditive {
            residual: defect.to_f64(),
        });
    }
    Ok(())
}

fn certify<T: Scalar>(
    sg: &Semigroup<T>,
    h: DVector<T>,
    rays: &[DVector<T>],
    kind: BoundKind,
    window: (f64, f64),
    tol: f64,
) -> Result<Option<LowerBoundCertificate<T>>> {
    let beta = sg.norm().eval(&h)?;
    if beta <= T::feastol() {
        return Ok(None);
    }
    let checks: Vec<LowerBoundCheck> = rays
        .par_iter()
        .map(|g| is_lower_bound(&h, sg, g, kind.is_mean(), window, tol))
        .collect::<Result<_>>()?;
    if checks.iter().any(|c| !c.accepted) {
        return Ok(None);
    }
    let residuals = checks.iter().map(|c| c.sup_tail).collect();
    Ok(Some(LowerBoundCertificate {
        h: h.iter().copied().collect(),
        kind,
        beta,
        residuals,
        tested_rays: rays.iter().map(|g| g.iter().copied().collect()).collect(),
    }))
}

fn find_universal<T: Scalar>(
    sg: &Semigroup<T>,
    mean: bool,
    window: (f64, f64),
    tol: f64,
) -> Result<Option<LowerBoundCertificate<T>>> {
    require_additive(sg)?;
    let rays = unit_probe_rays(sg)?;
    let samples = tail_samples(sg, &rays, mean, window)?;
    let h = common_lower_vector(sg.cone(), sg.norm(), &samples)? * T::lit(1.0 - tol);
    let kind = if mean { BoundKind::UniversalMean } else { BoundKind::Universal };
    certify(sg, h, &rays, kind, window, tol)
}

/// A vector `h` that is a lower bound for every unit probe ray, read off the tail orbits.
///
/// Needs a norm additive on the cone, so that the unit base is the convex hull of the rays.
pub fn find_universal_lower_bound<T: Scalar>(
    sg: &Semigroup<T>,
    window: (f64, f64),
    tol: f64,
) -> Result<Option<LowerBoundCertificate<T>>> {
    find_universal(sg, false, window, tol)
}

/// As [`find_universal_lower_bound`] for the Cesàro means `A_t`.
pub fn find_universal_mean_lower_bound<T: Scalar>(
    sg: &Semigroup<T>,
    window: (f64, f64),
    tol: f64,
) -> Result<Option<LowerBoundCertificate<T>>> {
    find_universal(sg, true, window, tol)
}

/// A lower bound `h_f` for each unit probe ray; `None` unless all are found.
///
/// The certificate's `h` is the bound of the ray attaining `beta = inf ‖h_f‖`.
pub fn find_individual_lower_bounds<T: Scalar>(
    sg: &Semigroup<T>,
    mean: bool,
    window: (f64, f64),
    tol: f64,
) -> Result<Option<(Vec<LowerBoundCertificate<T>>, LowerBoundCertificate<T>)>> {
    require_additive(sg)?;
    let rays = unit_probe_rays(sg)?;
    let kind = if mean { BoundKind::IndividualMean } else { BoundKind::Individual };
    let mut family = Vec::with_capacity(rays.len());
    for g in &rays {
        let samples = tail_samples(sg, std::slice::from_ref(g), mean, window)?;
        let h = common_lower_vector(sg.cone(), sg.norm(), &samples)? * T::lit(1.0 - tol);
        match certify(sg, h, std::slice::from_ref(g), kind, window, tol)? {
            Some(c) => family.push(c),
            None => return Ok(None),
        }
    }
    let weakest = family
        .iter()
        .min_by(|a, b| a.beta.partial_cmp(&b.beta).unwrap_or(std::cmp::Ordering::Equal))
        .cloned();
    Ok(weakest.map(|w| {
        let summary = LowerBoundCertificate {
            residuals: family.iter().flat_map(|c| c.residuals.clone()).collect(),
            tested_rays: family.iter().flat_map(|c| c.tested_rays.clone()).collect(),
            ..w
        };
        (family, summary)
    }))
}

/// Renorming that makes a semigroup Markov.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MarkovRenorm<T: Scalar> {
    /// Fixed functional `ψ = lim A_t′φ`.
    pub psi: Vec<T>,
    pub renorm: PsiRenorm<T>,
    /// Time at which the dual Cesàro means stabilized.
    pub cesaro_time: f64,
    /// `max_t ‖T_t′ψ − ψ‖_∞` over the window grid.
    pub fixed_residual: T,
    /// `max |‖T_t f‖_ψ − ‖f‖_ψ|` over sampled unit `f ∈ K` and window times.
    pub markov_defect: T,
}

impl<T: Scalar> MarkovRenorm<T> {
    pub fn apply(&self, sg: &Semigroup<T>) -> Result<Semigroup<T>> {
        sg.clone().with_norm(self.renorm.norm.clone())
    }
}

/// Number of sampled cone elements in Markov-defect checks.
pub const MARKOV_SAMPLES: usize = 200;

/// `max |‖T_t f‖ − ‖f‖|` over unit probe rays and seeded random `f ∈ K`, at the given times.
pub fn markov_defect<T: Scalar>(sg: &Semigroup<T>, norm: &NormSpec<T>, times: &[f64], seed: u64) -> Result<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fs = sg.cone().probe_rays(SAMPLED_PROBES, seed);
    while fs.len() < MARKOV_SAMPLES {
        fs.push(sg.cone().random_element(&mut rng));
    }
    let mut worst = T::zero();
    for &t in times {
        let op = sg.evaluate(t)?;
        for f in &fs {
            let nf = norm.eval(f)?;
            if nf <= T::zero() {
                continue;
            }
            let f = f / nf;
            worst = worst.max((norm.eval(&(&op * &f))? - T::one()).abs());
        }
    }
    Ok(worst)
}

/// `ψ = lim A_t′φ` and the base norm `‖·‖_ψ`, under which the semigroup is Markov.
///
/// The limit is taken along the doubling grid with the extrapolated Cauchy test of
/// [`mean_ergodic_projection`]; no limit means [`LabError::NoCesaroLimit`].
pub fn markov_renorm<T: Scalar>(
    sg: &Semigroup<T>,
    phi: &DVector<T>,
    window: (f64, f64),
    tol: f64,
) -> Result<MarkovRenorm<T>> {
    let cone = sg.cone();
    cone.check_dim(phi, "renorming functional")?;
    if !cone.dual_contains(phi, T::feastol())? {
        return Err(LabError::Precondition("φ must lie in the dual cone".into()));
    }
    let tolt = T::lit(tol);
    let dual = sg.dual();
    let mut prev_mean: Option<DMatrix<T>> = None;
    let mut prev_est: Option<DVector<T>> = None;
    let mut found: Option<(f64, DVector<T>)> = None;
    let mut last = (0.0, T::lit(f64::INFINITY));
    for (t, mean, _) in dual.cesaro_doubling()? {
        if let Some(pm) = &prev_mean {
            let est = (&mean * T::lit(2.0) - pm) * phi;
            if let Some(pe) = &prev_est {
                let gap = (&est - pe).amax();
                last = (t, gap);
                if gap < tolt {
                    found = Some((t, est));
                    break;
                }
            }
            prev_est = Some(est);
        }
        prev_mean = Some(mean);
        if t >= CESARO_HORIZON {
            break;
        }
    }
    let (cesaro_time, psi) = found.ok_or(LabError::NoCesaroLimit {
        gap: last.1.to_f64(),
        t: last.0,
    })?;
    let times = geometric_grid(window.0.max(sg.grid_start()), window.1, 2, sg.is_discrete());
    let mut fixed_residual = T::zero();
    for &t in &times {
        fixed_residual = fixed_residual.max((sg.evaluate(t)?.transpose() * &psi - &psi).amax());
    }
    if fixed_residual > T::lit(10.0) * tolt * (T::one() + psi.amax()) {
        return Err(LabError::NoCesaroLimit {
            gap: fixed_residual.to_f64(),
            t: cesaro_time,
        });
    }
    let renorm = psi_renorm(&psi, cone, sg.norm())?;
    let defect = markov_defect(sg, &renorm.norm, &times, PROBE_SEED)?;
    Ok(MarkovRenorm {
        psi: psi.iter().copied().collect(),
        renorm,
        cesaro_time,
        fixed_residual,
        markov_defect: defect,
    })
}

/// One step of the lower-bound improvement loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct IterationStep<T: Scalar> {
    pub n: usize,
    pub norm_h: T,
    /// Time at which `d₊(T_t f − h_n) < ε` was found; absent on the final record.
    pub t0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FixedPointRun<T: Scalar> {
    pub h: Vec<T>,
    pub trace: Vec<IterationStep<T>>,
    /// `1 − ‖h_f‖` for the initial oracle bound.
    pub delta: T,
}

fn check_fixed<T: Scalar>(sg: &Semigroup<T>, h: &DVector<T>) -> Result<()> {
    let s = if sg.is_discrete() { 1.0 } else { 0.5 };
    let residual = norm1(&DMatrix::from_column_slice(h.len(), 1, (sg.evaluate(s)? * h - h).as_slice()));
    if residual > T::lit(1e-8) * (T::one() + h.amax()) {
        return Err(LabError::OracleNotFixed {
            residual: residual.to_f64(),
        });
    }
    Ok(())
}

/// Raises a lower bound of `f` to norm at least `1 − ε`.
///
/// Each round finds the first grid time `t₀` with `d₊(T_{t₀}f − h_n) < ε`,
/// splits `T_{t₀}f − h_n = g_n − e_n` with `g_n, e_n ∈ K` and `‖e_n‖` small,
/// and adds `a_n = ‖g_n‖·oracle(g_n/‖g_n‖)`. Oracle outputs must be fixed
/// points of the semigroup with norm at least `beta`.
pub fn fixed_point_iteration<T: Scalar>(
    sg: &Semigroup<T>,
    f: &DVector<T>,
    oracle: &dyn Fn(&DVector<T>) -> Result<DVector<T>>,
    beta: T,
    eps: T,
    horizon: f64,
) -> Result<FixedPointRun<T>> {
    let cone = sg.cone();
    let norm = sg.norm();
    cone.check_dim(f, "iteration start")?;
    unit_norm(norm, f)?;
    if !cone.contains(f, T::feastol())? {
        return Err(LabError::Precondition("f must lie in the cone".into()));
    }
    let call = |x: &DVector<T>| -> Result<DVector<T>> {
        let h = oracle(x)?;
        cone.check_dim(&h, "oracle output")?;
        check_fixed(sg, &h)?;
        let nh = norm.eval(&h)?;
        if nh < beta - T::lit(UNIT_TOL) {
            return Err(LabError::Precondition(format!("oracle bound has norm {nh} below beta = {beta}")));
        }
        Ok(h)
    };
    let mut h = call(f)?;
    let delta = T::one() - norm.eval(&h)?;
    let grid = geometric_grid(sg.grid_start(), horizon, 4, sg.is_discrete());
    let mut trace = Vec::new();
    for n in 0..MAX_ITERATIONS {
        let nh = norm.eval(&h)?;
        if nh >= T::one() - eps {
            trace.push(IterationStep { n, norm_h: nh, t0: None });
            return Ok(FixedPointRun {
                h: h.iter().copied().collect(),
                trace,
                delta,
            });
        }
        let mut hit = None;
        for &t in &grid {
            let v = sg.apply(t, f)? - &h;
            if distance_to_cone(&v, cone, norm)? < eps {
                hit = Some((t, v));
                break;
            }
        }
        let (t0, v) = hit.ok_or(LabError::HorizonTooShort { found: 0, needed: 1 })?;
        trace.push(IterationStep {
            n,
            norm_h: nh,
            t0: Some(t0),
        });
        let proj = project_to_cone(&v, cone, norm)?;
        let split = positive_decompose(&(&v - &proj.nearest), cone, norm)?;
        let g = proj.nearest + split.y;
        let ng = norm.eval(&g)?;
        if ng <= T::zero() {
            return Err(LabError::Precondition("no positive remainder left to raise the bound".into()));
        }
        h += call(&(&g / ng))? * ng;
    }
    Err(LabError::IterationLimit)
}

/// Lower-bound oracle `f ↦ δ·⟨𝟙, f⟩·π` of a Doeblin chain with stationary vector `π`.
pub fn doeblin_oracle<T: Scalar>(delta: T, pi: DVector<T>) -> impl Fn(&DVector<T>) -> Result<DVector<T>> {
    move |f: &DVector<T>| Ok(&pi * (delta * f.sum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineMode {
    Individual,
    Universal,
    UniversalMean,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub ok: bool,
    pub diagnostic: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConvergencePipelineReport<T: Scalar> {
    pub mode: PipelineMode,
    pub stages: Vec<StageRecord>,
    pub converged: bool,
    pub failed_stage: Option<String>,
    pub certificate: Option<LowerBoundCertificate<T>>,
    pub renormed: bool,
    pub psi: Option<Vec<T>>,
    pub markov_defect: Option<T>,
    pub limit: Option<Matrix<T>>,
    /// Time from which the limit was stationary on the squaring grid.
    pub limit_time: Option<f64>,
    pub limit_rank: usize,
    /// `inf ‖Pg‖/‖g‖` over the unit probe rays.
    pub gamma: Option<T>,
    pub projection_residual: Option<T>,
    pub commutation_residual: Option<T>,
    /// Dimension of `ker(T′ − I)` (or `ker A′`).
    pub dual_fixed_dim: Option<usize>,
    /// Angle between the dual fixed space and the norm functional.
    pub dual_angle: Option<f64>,
    /// Distance to a reference limit, when one was supplied.
    pub reference_gap: Option<T>,
    /// Results the run instantiates.
    pub theorem_tags: Vec<String>,
}

impl<T: Scalar> ConvergencePipelineReport<T> {
    fn new(mode: PipelineMode) -> Self {
        Self {
            mode,
            stages: Vec::new(),
            converged: false,
            failed_stage: None,
            certificate: None,
            renormed: false,
            psi: None,
            markov_defect: None,
            limit: None,
            limit_time: None,
            limit_rank: 0,
            gamma: None,
            projection_residual: None,
            commutation_residual: None,
            dual_fixed_dim: None,
            dual_angle: None,
            reference_gap: None,
            theorem_tags: Vec::new(),
        }
    }

    fn pass(&mut self, stage: &str, diagnostic: impl Into<String>) {
        self.stages.push(StageRecord {
            stage: stage.into(),
            ok: true,
            diagnostic: diagnostic.into(),
        });
    }

    fn fail(mut self, stage: &str, diagnostic: impl Into<String>) -> Self {
        self.stages.push(StageRecord {
            stage: stage.into(),
            ok: false,
            diagnostic: diagnostic.into(),
        });
        self.failed_stage = Some(stage.into());
        self.converged = false;
        self
    }
}

/// Horizon of the squaring grid used to detect strong limits.
pub const LIMIT_HORIZON: f64 = 1e6;

/// Residual bound for reported limit projections.
pub const LIMIT_RESIDUAL_TOL: f64 = 1e-7;
/// Rank tolerance for limit projections.
pub const LIMIT_RANK_TOL: f64 = 1e-8;
/// Largest admissible angle between the dual fixed space and the norm functional.
pub const DUAL_ANGLE_TOL: f64 = 1e-6;

/// Angle between the line spanned by `a` and the vector `b`.
fn line_angle<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> f64 {
    let (an, bn) = (a.norm().to_f64(), b.norm().to_f64());
    if an == 0.0 || bn == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let c = (a.dot(b).to_f64().abs() / (an * bn)).min(1.0);
    let s = (1.0 - c * c).max(0.0).sqrt();
    s.atan2(c)
}

fn is_markov<T: Scalar>(sg: &Semigroup<T>, one: &DVector<T>, tol: T) -> bool {
    let r = if sg.is_discrete() {
        sg.matrix().transpose() * one - one
    } else {
        sg.matrix().transpose() * one
    };
    r.amax() <= tol * (T::one() + one.amax())
}

/// Verifies a limit projection `p` of `sg`: rank, `γ`, and for universal modes the dual fixed space.
fn verify_limit<T: Scalar>(
    mut report: ConvergencePipelineReport<T>,
    sg: &Semigroup<T>,
    one: &DVector<T>,
    p: DMatrix<T>,
    beta: T,
    tol: f64,
) -> Result<ConvergencePipelineReport<T>> {
    let rays = unit_probe_rays(sg)?;
    let mut gamma = T::lit(f64::INFINITY);
    for g in &rays {
        gamma = gamma.min(sg.norm().eval(&(&p * g))?);
    }
    report.gamma = Some(gamma);
    report.limit_rank = rank(&p, T::lit(LIMIT_RANK_TOL));
    report.limit = Some(Matrix(p));
    if gamma < beta - T::lit(tol) {
        return Ok(report.fail("verify", format!("γ = {gamma} is below β = {beta}")));
    }
    if report.mode != PipelineMode::Individual {
        if report.limit_rank != 1 {
            let r = report.limit_rank;
            return Ok(report.fail("verify", format!("limit rank {r} ≠ 1")));
        }
        let m = if sg.is_discrete() {
            sg.matrix().transpose() - DMatrix::identity(sg.dim(), sg.dim())
        } else {
            sg.matrix().transpose()
        };
        let k = nullspace(&m, T::lit(LIMIT_RANK_TOL));
        report.dual_fixed_dim = Some(k.ncols());
        if k.ncols() != 1 {
            return Ok(report.fail("verify", format!("dual fixed space has dimension {}", k.ncols())));
        }
        let angle = line_angle(&k.column(0).into_owned(), one);
        report.dual_angle = Some(angle);
        if angle > DUAL_ANGLE_TOL {
            return Ok(report.fail("verify", format!("dual fixed space is at angle {angle} from the norm functional")));
        }
    }
    report.pass("verify", format!("γ = {gamma} ≥ β = {beta}, rank {}", report.limit_rank));
    report.converged = true;
    Ok(report)
}

/// Certificate, Markov renorming, limit detection and verification.
pub fn converge_via_lower_bounds<T: Scalar>(
    sg: &Semigroup<T>,
    mode: PipelineMode,
    window: (f64, f64),
    tol: f64,
) -> Result<ConvergencePipelineReport<T>> {
    let mut report = ConvergencePipelineReport::new(mode);
    let cert = match mode {
        PipelineMode::Individual => find_individual_lower_bounds(sg, false, window, tol)?.map(|(_, s)| s),
        PipelineMode::Universal => find_universal_lower_bound(sg, window, tol)?,
        PipelineMode::UniversalMean => find_universal_mean_lower_bound(sg, window, tol)?,
    };
    let cert = match cert {
        Some(c) => c,
        None => return Ok(report.fail("certificate", "no lower bound with positive norm was certified on every probe ray")),
    };
    let beta = cert.beta;
    report.pass("certificate", format!("{:?} lower bound with β = {beta}", cert.kind));
    report.certificate = Some(cert);

    let one = norm_functional(sg.norm(), sg.cone())?.one.vector().clone();
    let tolt = T::lit(tol);
    let (work, one) = if is_markov(sg, &one, tolt) {
        report.pass("markov", "semigroup is Markov for the given norm");
        (sg.clone(), one)
    } else {
        match markov_renorm(sg, &one, window, tol) {
            Ok(r) => {
                report.renormed = true;
                report.psi = Some(r.psi.clone());
                report.markov_defect = Some(r.markov_defect);
                if r.markov_defect > T::lit(10.0) * tolt {
                    return Ok(report.fail("markov", format!("Markov defect {} after renorming", r.markov_defect)));
                }
                report.pass("markov", format!("renormed by ψ with Markov defect {}", r.markov_defect));
                report.theorem_tags.push("markov-renorm".into());
                let psi = DVector::from_vec(r.psi.clone());
                (r.apply(sg)?, psi)
            }
            Err(e) => return Ok(report.fail("markov", e.to_string())),
        }
    };

    let p = match mode {
        PipelineMode::Individual | PipelineMode::Universal => {
            let lim = strong_limit(&work, tolt, LIMIT_HORIZON.max(window.1))?;
            report.projection_residual = lim.projection_residual;
            report.commutation_residual = lim.commutation_residual;
            match (lim.status, lim.limit) {
                (LimitStatus::Converged, Some(p)) => {
                    report.limit_time = lim.limit_time;
                    report.pass("limit", lim.diagnostic);
                    p.0
                }
                (status, _) => return Ok(report.fail("limit", format!("{status:?}: {}", lim.diagnostic))),
            }
        }
        PipelineMode::UniversalMean => {
            let me = mean_ergodic_projection(&work, tolt, CESARO_HORIZON)?;
            match (me.status, me.projection) {
                (ErgodicStatus::Converged, Some(p)) => {
                    let pr = norm1(&(&p.0 * &p.0 - &p.0));
                    let s = if work.is_discrete() { 1.0 } else { 0.5 };
                    let cr = norm1(&(work.evaluate(s)? * &p.0 - &p.0));
                    report.projection_residual = Some(pr);
                    report.commutation_residual = Some(cr);
                    report.pass("limit", "mean ergodic projection");
                    p.0
                }
                (status, _) => return Ok(report.fail("limit", format!("mean ergodicity {status:?}"))),
            }
        }
    };
    let lim_tol = T::lit(LIMIT_RESIDUAL_TOL);
    if report.projection_residual.is_some_and(|r| r >= lim_tol) || report.commutation_residual.is_some_and(|r| r >= lim_tol) {
        return Ok(report.fail("verify", "limit is not an invariant projection"));
    }
    report.theorem_tags.push(
        match mode {
            PipelineMode::Individual => "individual-lower-bounds-strong-convergence",
            PipelineMode::Universal => "universal-lower-bound-rank-one-limit",
            PipelineMode::UniversalMean => "universal-mean-lower-bound-rank-one-projection",
        }
        .into(),
    );
    verify_limit(report, &work, &one, p, beta, tol)
}

/// Outcome of [`dominated_constant_convergence`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantConvergence {
    pub converged: bool,
    /// `(t, ‖f(t) − x‖, ‖f(t)‖ − ‖x‖ + 2‖r(t)‖ + tol)` over the tail.
    pub trace: Vec<(f64, f64, f64)>,
    pub max_excess: f64,
}

/// Convergence of `f(t)` to a unit vector `x` it asymptotically dominates, with norms tending to 1.
pub fn dominated_constant_convergence<T: Scalar>(
    f: &Trajectory<T>,
    x: &DVector<T>,
    window: (f64, f64),
    tol: f64,
) -> Result<ConstantConvergence> {
    let norm = f.norm();
    let nx = norm.eval(x)?;
    if (nx - T::one()).abs() > T::lit(UNIT_TOL) {
        return Err(LabError::Precondition(format!("‖x‖ must be 1, got {nx}")));
    }
    let tail = tail_times(f.domain(), window);
    let mut sup = 0.0f64;
    for &t in &tail {
        sup = sup.max(norm.eval(&f.sample(t)?)?.to_f64());
    }
    if sup > 1.0 + tol {
        return Err(LabError::Precondition(format!("tail sup of ‖f(t)‖ is {sup} > 1 + {tol}")));
    }
    let c = Trajectory::constant(x.clone(), f.cone().clone(), norm.clone(), f.domain())?;
    let rep = check_asymptotic_domination(&c, f, window, tol)?;
    if rep.verdict() != Verdict::Dominated {
        return Err(LabError::Precondition(format!(
            "x is not asymptotically dominated by f (tail sup {})",
            rep.sup_tail()
        )));
    }
    let mut trace = Vec::with_capacity(tail.len());
    let mut max_excess = f64::NEG_INFINITY;
    for &t in &tail {
        let ft = f.sample(t)?;
        let r = error_decomposition(&c, f, t)?;
        let lhs = norm.eval(&(&ft - x))?.to_f64();
        let rhs = (norm.eval(&ft)? - nx + T::lit(2.0) * norm.eval(&r)?).to_f64() + tol;
        max_excess = max_excess.max(lhs - rhs);
        trace.push((t, lhs, rhs));
    }
    let last = trace.last().map_or(f64::INFINITY, |e| e.1);
    Ok(ConstantConvergence {
        converged: max_excess <= 0.0 && last <= 10.0 * tol,
        trace,
        max_excess,
    })
}

/// Strong convergence of `S` from that of a semigroup `T` it asymptotically dominates.
pub fn dominating_semigroup_convergence<T: Scalar>(
    t_sg: &Semigroup<T>,
    s_sg: &Semigroup<T>,
    window: (f64, f64),
    tol: f64,
) -> Result<ConvergencePipelineReport<T>> {
    let mut report = ConvergencePipelineReport::new(PipelineMode::Individual);
    let tolt = T::lit(tol);
    let horizon = LIMIT_HORIZON.max(window.1);
    let lt = strong_limit(t_sg, tolt, horizon)?;
    let pt = match (lt.status, lt.limit) {
        (LimitStatus::Converged, Some(p)) => p.0,
        (status, _) => return Ok(report.fail("reference-limit", format!("{status:?}: {}", lt.diagnostic))),
    };
    let rays = unit_probe_rays(t_sg)?;
    let mut beta = T::lit(f64::INFINITY);
    for g in &rays {
        beta = beta.min(t_sg.norm().eval(&(&pt * g))?);
    }
    if beta <= T::feastol() {
        return Ok(report.fail("reference-limit", format!("inf ‖P_T g‖ = {beta} over unit rays")));
    }
    report.pass("reference-limit", format!("T converges with inf ‖P_T g‖ = {beta}"));

    for g in &rays {
        let ft = Trajectory::orbit(t_sg, g.clone())?;
        let fs = Trajectory::orbit(s_sg, g.clone())?;
        let rep = check_asymptotic_domination(&ft, &fs, window, tol)?;
        if rep.verdict() != Verdict::Dominated {
            return Ok(report.fail(
                "domination",
                format!("S does not dominate T along a probe ray (tail sup {})", rep.sup_tail()),
            ));
        }
    }
    report.pass("domination", "S dominates T along every probe ray");

    let s1 = s_sg.evaluate(if s_sg.is_discrete() { 1.0 } else { 0.5 })?;
    for g in &rays {
        let v = &pt * g;
        let r = (&s1 * &v - &v).amax();
        if r > T::lit(10.0) * tolt * (T::one() + v.amax()) {
            return Ok(report.fail("fixed-points", format!("P_T g is not fixed by S (residual {r})")));
        }
    }
    report.pass("fixed-points", "P_T g is fixed by S for every probe ray");

    let ls = strong_limit(s_sg, tolt, horizon)?;
    report.projection_residual = ls.projection_residual;
    report.commutation_residual = ls.commutation_residual;
    let ps = match (ls.status, ls.limit) {
        (LimitStatus::Converged, Some(p)) => p.0,
        (status, _) => return Ok(report.fail("limit", format!("{status:?}: {}", ls.diagnostic))),
    };
    report.limit_time = ls.limit_time;
    report.reference_gap = Some(norm1(&(&ps - &pt)));
    report.pass("limit", ls.diagnostic);
    report.theorem_tags.push("dominating-semigroup-convergence".into());
    let one = norm_functional(s_sg.norm(), s_sg.cone())?.one.vector().clone();
    verify_limit(report, s_sg, &one, ps, beta, tol)
}
