//! Asymptotic domination between trajectories in an ordered space.
//!
//! `f ⪯ₐ g` means `d₊(g(t) − f(t)) → 0`, where `d₊` is the distance to the cone.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cone_geometry::{distance_to_cone, positive_decompose, project_to_cone, Cone};
use crate::error::{LabError, Result};
use crate::linalg::fitted_slope;
use crate::norms::NormSpec;
use crate::scalar::Scalar;
use crate::semigroup::{geometric_grid, Semigroup, SemigroupKind};

/// Default tolerance of domination verdicts.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Grid points per doubling of time in domination checks.
pub const POINTS_PER_DOUBLING: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeDomain {
    Discrete,
    Continuous,
}

impl From<SemigroupKind> for TimeDomain {
    fn from(k: SemigroupKind) -> Self {
        match k {
            SemigroupKind::Discrete => TimeDomain::Discrete,
            SemigroupKind::Continuous => TimeDomain::Continuous,
        }
    }
}

pub type SampleFn<T> = Arc<dyn Fn(f64) -> DVector<T> + Send + Sync>;

#[derive(Clone)]
pub enum Sampler<T: Scalar> {
    /// `t ↦ T_t x`.
    Orbit { sg: Semigroup<T>, x: DVector<T> },
    /// `t ↦ T_t`, flattened row-major.
    OperatorOrbit { sg: Semigroup<T> },
    Constant(DVector<T>),
    /// Linear interpolation between strictly increasing sample times.
    Table { times: Vec<f64>, values: Vec<DVector<T>> },
    Function(SampleFn<T>),
    /// Cesàro means `(1/t)Σ_{k<t} f(k)` or `(1/t)∫_0^t f(s) ds`.
    Cesaro(Box<Trajectory<T>>),
}

impl<T: Scalar> fmt::Debug for Sampler<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampler::Orbit { sg, .. } => write!(f, "Orbit({})", sg.label()),
            Sampler::OperatorOrbit { sg } => write!(f, "OperatorOrbit({})", sg.label()),
            Sampler::Constant(x) => write!(f, "Constant({:?})", x.as_slice()),
            Sampler::Table { times, .. } => write!(f, "Table({} samples)", times.len()),
            Sampler::Function(_) => write!(f, "Function"),
            Sampler::Cesaro(inner) => write!(f, "Cesaro({:?})", inner.sampler),
        }
    }
}

/// A map from times to elements of an ordered space.
#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    sampler: Sampler<T>,
    domain: TimeDomain,
    cone: Cone<T>,
    norm: NormSpec<T>,
    /// When set, every sample is checked for membership in the cone.
    positive: bool,
    label: String,
}

fn flatten_rows<T: Scalar>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

/// Five-point Gauss–Legendre nodes and weights on `[-1, 1]`.
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Panels per unit time in continuous Cesàro quadrature.
const PANELS_PER_UNIT: f64 = 8.0;
const MAX_PANELS: usize = 200_000;

/// `∫_a^b φ(s) ds` by composite Gauss–Legendre, or `Σ_{a≤k<b} φ(k)` over integers.
fn time_integral<V>(
    domain: TimeDomain,
    (a, b): (f64, f64),
    mut acc: V,
    mut phi: impl FnMut(f64) -> Result<V>,
    add: impl Fn(V, V, f64) -> V,
) -> Result<V> {
    match domain {
        TimeDomain::Discrete => {
            let mut k = a.ceil();
            while k < b {
                acc = add(acc, phi(k)?, 1.0);
                k += 1.0;
            }
        }
        TimeDomain::Continuous => {
            if b > a {
                let panels = (((b - a) * PANELS_PER_UNIT).ceil() as usize).clamp(8, MAX_PANELS);
                let h = (b - a) / panels as f64;
                for p in 0..panels {
                    let mid = a + (p as f64 + 0.5) * h;
                    for (x, w) in GL5 {
                        acc = add(acc, phi(mid + 0.5 * h * x)?, 0.5 * h * w);
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// `(1/t)∫_0^t φ(s) ds`, or `(1/t)Σ_{k<t} φ(k)` for integer `t`.
fn time_average<V>(
    domain: TimeDomain,
    t: f64,
    zero: V,
    phi: impl FnMut(f64) -> Result<V>,
    add: impl Fn(V, V, f64) -> V,
) -> Result<V> {
    if t <= 0.0 {
        return Err(LabError::Precondition("Cesàro mean needs t > 0".into()));
    }
    if domain == TimeDomain::Discrete && t.fract() != 0.0 {
        return Err(LabError::Precondition(format!("discrete time must be an integer, got {t}")));
    }
    let scale = 1.0 / t;
    time_integral(domain, (0.0, t), zero, phi, move |acc, v, w| add(acc, v, w * scale))
}

impl<T: Scalar> Trajectory<T> {
    fn build(sampler: Sampler<T>, domain: TimeDomain, cone: Cone<T>, norm: NormSpec<T>, label: String) -> Self {
        Self {
            sampler,
            domain,
            cone,
            norm,
            positive: false,
            label,
        }
    }

    /// `t ↦ T_t x`; flagged positive when the semigroup is verified positive and `x ∈ K`.
    pub fn orbit(sg: &Semigroup<T>, x: DVector<T>) -> Result<Self> {
        sg.cone().check_dim(&x, "orbit start")?;
        let positive = sg.positivity_verified() == Some(true) && sg.cone().contains(&x, T::feastol())?;
        let label = format!("{}·x", sg.label());
        let mut tr = Self::build(
            Sampler::Orbit { sg: sg.clone(), x },
            sg.kind().into(),
            sg.cone().clone(),
            sg.norm().clone(),
            label,
        );
        tr.positive = positive;
        Ok(tr)
    }

    /// `t ↦ T_t` as an element of the orthant of `d×d` matrices with the entrywise ℓ1 norm.
    pub fn operator_orbit(sg: &Semigroup<T>) -> Result<Self> {
        if !matches!(sg.cone(), Cone::Orthant { .. }) {
            return Err(LabError::Precondition(
                "operator orbits are ordered entrywise and need an orthant semigroup".into(),
            ));
        }
        let d = sg.dim();
        let mut tr = Self::build(
            Sampler::OperatorOrbit { sg: sg.clone() },
            sg.kind().into(),
            Cone::orthant(d * d)?,
            NormSpec::L1,
            sg.label().to_string(),
        );
        tr.positive = sg.positivity_verified() == Some(true);
        Ok(tr)
    }

    /// Cesàro means of the orbit `t ↦ T_t x`.
    pub fn cesaro_orbit(sg: &Semigroup<T>, x: DVector<T>) -> Result<Self> {
        Ok(Self::orbit(sg, x)?.cesaro())
    }

    pub fn constant(x: DVector<T>, cone: Cone<T>, norm: NormSpec<T>, domain: TimeDomain) -> Result<Self> {
        cone.check_dim(&x, "constant trajectory")?;
        norm.check_dim(cone.dim())?;
        Ok(Self::build(Sampler::Constant(x), domain, cone, norm, "const".into()))
    }

    pub fn table(
        times: Vec<f64>,
        values: Vec<DVector<T>>,
        cone: Cone<T>,
        norm: NormSpec<T>,
        domain: TimeDomain,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(LabError::Precondition("table needs equally many times and values".into()));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) || !times.iter().all(|t| t.is_finite()) {
            return Err(LabError::Precondition("table times must be finite and strictly increasing".into()));
        }
        for v in &values {
            cone.check_dim(v, "table value")?;
        }
        norm.check_dim(cone.dim())?;
        Ok(Self::build(Sampler::Table { times, values }, domain, cone, norm, "table".into()))
    }

    pub fn function(
        f: impl Fn(f64) -> DVector<T> + Send + Sync + 'static,
        cone: Cone<T>,
        norm: NormSpec<T>,
        domain: TimeDomain,
    ) -> Result<Self> {
        norm.check_dim(cone.dim())?;
        Ok(Self::build(Sampler::Function(Arc::new(f)), domain, cone, norm, "fn".into()))
    }

    /// The trajectory of Cesàro means of `self`.
    pub fn cesaro(self) -> Self {
        let domain = self.domain;
        let cone = self.cone.clone();
        let norm = self.norm.clone();
        let positive = self.positive;
        let label = format!("A[{}]", self.label);
        let mut tr = Self::build(Sampler::Cesaro(Box::new(self)), domain, cone, norm, label);
        tr.positive = positive;
        tr
    }

    /// Requires every sample to lie in the cone.
    pub fn assume_positive(mut self) -> Self {
        self.positive = true;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_norm(mut self, norm: NormSpec<T>) -> Result<Self> {
        norm.check_dim(self.cone.dim())?;
        self.norm = norm;
        Ok(self)
    }

    pub fn domain(&self) -> TimeDomain {
        self.domain
    }

    pub fn cone(&self) -> &Cone<T> {
        &self.cone
    }

    pub fn norm(&self) -> &NormSpec<T> {
        &self.norm
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.cone.dim()
    }

    /// First time of default grids: 1 (discrete) or 0.5 (continuous).
    pub fn grid_start(&self) -> f64 {
        match self.domain {
            TimeDomain::Discrete => 1.0,
            TimeDomain::Continuous => 0.5,
        }
    }

    fn raw_sample(&self, t: f64) -> Result<DVector<T>> {
        if !t.is_finite() || t < 0.0 {
            return Err(LabError::Precondition(format!("time must be finite and non-negative, got {t}")));
        }
        if self.domain == TimeDomain::Discrete && t.fract() != 0.0 {
            return Err(LabError::Precondition(format!("discrete time must be an integer, got {t}")));
        }
        match &self.sampler {
            Sampler::Orbit { sg, x } => sg.apply(t, x),
            Sampler::OperatorOrbit { sg } => Ok(flatten_rows(&sg.evaluate(t)?)),
            Sampler::Constant(x) => Ok(x.clone()),
            Sampler::Table { times, values } => interpolate(times, values, t),
            Sampler::Function(f) => {
                let v = f(t);
                self.cone.check_dim(&v, "function sample")?;
                Ok(v)
            }
            Sampler::Cesaro(inner) => inner.cesaro_sample(t),
        }
    }

    /// Cesàro mean of this trajectory at time `t`.
    fn cesaro_sample(&self, t: f64) -> Result<DVector<T>> {
        match &self.sampler {
            Sampler::Orbit { sg, x } => Ok(sg.cesaro_pair(t)?.0 * x),
            Sampler::OperatorOrbit { sg } => Ok(flatten_rows(&sg.cesaro_pair(t)?.0)),
            Sampler::Constant(x) => {
                if t <= 0.0 {
                    return Err(LabError::Precondition("Cesàro mean needs t > 0".into()));
                }
                Ok(x.clone())
            }
            Sampler::Table { times, values } if self.domain == TimeDomain::Continuous => {
                trapezoid_mean(times, values, t)
            }
            _ => time_average(
                self.domain,
                t,
                DVector::zeros(self.dim()),
                |s| self.sample(s),
                |acc, v, w| acc + v * T::lit(w),
            ),
        }
    }

    /// The value at time `t`; errors if the trajectory is flagged positive and the sample leaves the cone.
    pub fn sample(&self, t: f64) -> Result<DVector<T>> {
        let v = self.raw_sample(t)?;
        if !v.iter().all(|x| x.finite()) {
            return Err(LabError::NonFinite("trajectory sample"));
        }
        if self.positive {
            let tol = T::feastol() * (T::one() + v.amax());
            if !self.cone.contains(&v, tol)? {
                return Err(LabError::Precondition(format!(
                    "trajectory '{}' flagged positive leaves the cone at t = {t}",
                    self.label
                )));
            }
        }
        Ok(v)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(LabError::DimensionMismatch {
                context: "trajectory pair",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if self.domain != other.domain {
            return Err(LabError::Precondition("trajectories live on different time domains".into()));
        }
        if self.cone != other.cone {
            return Err(LabError::Precondition("trajectories live in different ordered spaces".into()));
        }
        Ok(())
    }
}

fn interpolate<T: Scalar>(times: &[f64], values: &[DVector<T>], t: f64) -> Result<DVector<T>> {
    let last = *times.last().expect("non-empty table");
    if t < times[0] || t > last {
        return Err(LabError::Precondition(format!(
            "time {t} outside the table range [{}, {last}]",
            times[0]
        )));
    }
    let i = times.partition_point(|s| *s <= t);
    if i == 0 {
        return Ok(values[0].clone());
    }
    if i == times.len() {
        return Ok(values[i - 1].clone());
    }
    let (a, b) = (times[i - 1], times[i]);
    let w = (t - a) / (b - a);
    Ok(&values[i - 1] * T::lit(1.0 - w) + &values[i] * T::lit(w))
}

/// `(1/t)∫_0^t` of the piecewise-linear interpolant; the table must start at 0.
fn trapezoid_mean<T: Scalar>(times: &[f64], values: &[DVector<T>], t: f64) -> Result<DVector<T>> {
    if times[0] != 0.0 {
        return Err(LabError::Precondition("continuous Cesàro mean of a table needs a sample at t = 0".into()));
    }
    if t <= 0.0 {
        return Err(LabError::Precondition("Cesàro mean needs t > 0".into()));
    }
    let end = interpolate(times, values, t)?;
    let mut acc = DVector::zeros(values[0].len());
    let mut prev = (times[0], values[0].clone());
    for (s, v) in times.iter().zip(values).skip(1) {
        let (s, v) = if *s >= t { (t, end.clone()) } else { (*s, v.clone()) };
        acc += (&prev.1 + &v) * T::lit(0.5 * (s - prev.0));
        prev = (s, v);
        if s >= t {
            break;
        }
    }
    Ok(acc / T::lit(t))
}

/// `d₊(g(t) − f(t))` in the norm of `f`.
pub fn domination_error<T: Scalar>(f: &Trajectory<T>, g: &Trajectory<T>, t: f64) -> Result<T> {
    f.check_compatible(g)?;
    distance_to_cone(&(g.sample(t)? - f.sample(t)?), &f.cone, &f.norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Dominated,
    NotDominated,
    Inconclusive,
}

/// One grid point: `error_fg = d₊(g − f)`, `error_gf = d₊(f − g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub t: f64,
    pub error_fg: f64,
    pub error_gf: f64,
}

/// Tail statistics for one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionSummary {
    pub sup_tail: f64,
    /// Fitted decay exponent `−d ln(err)/dt` over the tail.
    pub trend: f64,
    pub verdict: Verdict,
}

/// Asymptotic domination of `f` by `g`, with the reverse direction alongside.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominationReport {
    pub window: (f64, f64),
    pub tol: f64,
    pub error_samples: Vec<ErrorSample>,
    /// Index of the first tail sample.
    pub tail_start: usize,
    /// `f ⪯ₐ g`.
    pub forward: DirectionSummary,
    /// `g ⪯ₐ f`.
    pub reverse: DirectionSummary,
    pub equivalent: bool,
}

impl DominationReport {
    pub fn verdict(&self) -> Verdict {
        self.forward.verdict
    }

    pub fn sup_tail(&self) -> f64 {
        self.forward.sup_tail
    }

    pub fn trend(&self) -> f64 {
        self.forward.trend
    }
}

fn summarize(ts: &[f64], errs: &[f64], tol: f64) -> DirectionSummary {
    let sup_tail = errs.iter().fold(0.0f64, |a, b| a.max(*b));
    let min_tail = errs.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    let logs: Vec<f64> = errs.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let slope = fitted_slope(ts, &logs);
    let verdict = if sup_tail < tol {
        Verdict::Dominated
    } else if min_tail > tol && slope >= -1e-9 {
        Verdict::NotDominated
    } else {
        Verdict::Inconclusive
    };
    DirectionSummary {
        sup_tail,
        trend: -slope,
        verdict,
    }
}

/// Domination grid on `window`: geometric, [`POINTS_PER_DOUBLING`] points per doubling.
pub fn domination_grid(domain: TimeDomain, window: (f64, f64)) -> Vec<f64> {
    let discrete = domain == TimeDomain::Discrete;
    let floor = if discrete { 1.0 } else { 1e-3 };
    geometric_grid(window.0.max(floor), window.1, POINTS_PER_DOUBLING, discrete)
}

/// Samples `d₊(g − f)` and `d₊(f − g)` over the window; the tail is the last half of the grid.
pub fn check_asymptotic_domination<T: Scalar>(
    f: &Trajectory<T>,
    g: &Trajectory<T>,
    window: (f64, f64),
    tol: f64,
) -> Result<DominationReport> {
    f.check_compatible(g)?;
    let (t0, t1) = window;
    if !(t0.is_finite() && t1.is_finite() && t0 >= 0.0 && t1 > t0) {
        return Err(LabError::Precondition(format!("invalid window ({t0}, {t1})")));
    }
    let grid = domination_grid(f.domain, window);
    let mut samples = Vec::with_capacity(grid.len());
    for &t in &grid {
        let diff = g.sample(t)? - f.sample(t)?;
        let fg = distance_to_cone(&diff, &f.cone, &f.norm)?.to_f64();
        let gf = distance_to_cone(&(-diff), &f.cone, &f.norm)?.to_f64();
        samples.push(ErrorSample {
            t,
            error_fg: fg,
            error_gf: gf,
        });
    }
    let tail_start = samples.len() / 2;
    let tail = &samples[tail_start..];
    let ts: Vec<f64> = tail.iter().map(|s| s.t).collect();
    let fg: Vec<f64> = tail.iter().map(|s| s.error_fg).collect();
    let gf: Vec<f64> = tail.iter().map(|s| s.error_gf).collect();
    let forward = summarize(&ts, &fg, tol);
    let reverse = summarize(&ts, &gf, tol);
    Ok(DominationReport {
        window,
        tol,
        error_samples: samples,
        tail_start,
        forward,
        reverse,
        equivalent: forward.verdict == Verdict::Dominated && reverse.verdict == Verdict::Dominated,
    })
}

/// `r(t) ∈ K` with `f(t) ≤ g(t) + r(t)`.
///
/// `g − f` is split as nearest cone point plus residual `w`; then
/// `w = y − z` with `y, z ∈ K` and `r = z`, so `g + r − f = p + y ∈ K`.
pub fn error_decomposition<T: Scalar>(f: &Trajectory<T>, g: &Trajectory<T>, t: f64) -> Result<DVector<T>> {
    f.check_compatible(g)?;
    if !f.cone.is_generating() {
        return Err(LabError::Infeasible("error decomposition needs a generating cone".into()));
    }
    let v = g.sample(t)? - f.sample(t)?;
    let proj = project_to_cone(&v, &f.cone, &f.norm)?;
    let w = &v - &proj.nearest;
    let dec = positive_decompose(&w, &f.cone, &f.norm)?;
    Ok(dec.z)
}

/// Times `t_k` with `‖r(t_k)‖ ≤ 2^{−k}` and the dominating slack `q = Σ r(t_k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SummableSubsequence<T: Scalar> {
    pub times: Vec<f64>,
    /// `‖r(t_k)‖` at the selected times.
    pub residual_norms: Vec<T>,
    pub q: Vec<T>,
    /// `max_k d₊(g(t_k) + q − f(t_k))`.
    pub max_violation: T,
    pub verified: bool,
}

/// Maximum number of selected times.
pub const MAX_SUBSEQUENCE: usize = 64;
const SCAN_STEP: f64 = 1.0 / 16.0;
const BISECTIONS: usize = 40;

/// Selects `t_0 < t_1 < …` up to `horizon` with `‖r(t_k)‖ ≤ 2^{−k}` and verifies
/// `f(t_k) ≤ g(t_k) + q` for `q = Σ_k r(t_k)`.
///
/// Requires a dominated verdict on the window `(horizon/2, horizon)`.
pub fn extract_summable_subsequence<T: Scalar>(
    f: &Trajectory<T>,
    g: &Trajectory<T>,
    horizon: f64,
) -> Result<SummableSubsequence<T>> {
    f.check_compatible(g)?;
    let start = f.grid_start();
    if !(horizon > start) {
        return Err(LabError::HorizonTooShort { found: 0, needed: 3 });
    }
    let pre = check_asymptotic_domination(f, g, ((0.5 * horizon).max(start), horizon), DEFAULT_TOL)?;
    if pre.verdict() != Verdict::Dominated {
        return Err(LabError::Precondition(format!(
            "f is not asymptotically dominated by g on the horizon (verdict {:?})",
            pre.verdict()
        )));
    }
    let rnorm = |t: f64| -> Result<(T, DVector<T>)> {
        let r = error_decomposition(f, g, t)?;
        Ok((f.norm.eval(&r)?, r))
    };

    let mut times = Vec::new();
    let mut residual_norms = Vec::new();
    let mut rs = Vec::new();
    let mut cursor = 0.0f64;
    for k in 0..MAX_SUBSEQUENCE {
        let bound = T::lit(0.5f64.powi(k as i32));
        let ok = |t: f64| -> Result<Option<(T, DVector<T>)>> {
            let (n, r) = rnorm(t)?;
            Ok((n <= bound).then_some((n, r)))
        };
        let found = match f.domain {
            TimeDomain::Discrete => {
                let mut t = if k == 0 { cursor } else { cursor + 1.0 };
                let mut hit = None;
                while t <= horizon {
                    if let Some(v) = ok(t)? {
                        hit = Some((t, v));
                        break;
                    }
                    t += 1.0;
                }
                hit
            }
            TimeDomain::Continuous => {
                let mut lo = cursor;
                let mut t = if k == 0 { cursor } else { cursor + SCAN_STEP };
                let mut hit = None;
                while t <= horizon {
                    if let Some(v) = ok(t)? {
                        hit = Some((t, v));
                        break;
                    }
                    lo = t;
                    t += SCAN_STEP;
                }
                // Earliest admissible time in (lo, t]; assumes the criterion holds on the upper part.
                if let Some((mut hi, mut best)) = hit.take() {
                    if k > 0 || hi > lo {
                        for _ in 0..BISECTIONS {
                            let mid = 0.5 * (lo + hi);
                            if mid <= lo || mid >= hi {
                                break;
                            }
                            match ok(mid)? {
                                Some(v) => {
                                    hi = mid;
                                    best = v;
                                }
                                None => lo = mid,
                            }
                        }
                    }
                    hit = Some((hi, best));
                }
                hit
            }
        };
        match found {
            Some((t, (n, r))) => {
                times.push(t);
                residual_norms.push(n);
                rs.push(r);
                cursor = t;
            }
            None => break,
        }
    }
    if times.len() < 3 {
        return Err(LabError::HorizonTooShort {
            found: times.len(),
            needed: 3,
        });
    }
    let q = rs.iter().fold(DVector::zeros(f.dim()), |a, r| a + r);
    let mut max_violation = T::zero();
    for &t in &times {
        let slack = g.sample(t)? + &q - f.sample(t)?;
        max_violation = max_violation.max(distance_to_cone(&slack, &f.cone, &f.norm)?);
    }
    Ok(SummableSubsequence {
        times,
        residual_norms,
        q: q.iter().copied().collect(),
        verified: max_violation <= T::feastol(),
        max_violation,
    })
}

/// `d₊` of the Cesàro-mean difference against the Cesàro mean of the pointwise errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub t: f64,
    /// `d₊(A_t g − A_t f)`.
    pub lhs: f64,
    /// Time average of `d₊(g(s) − f(s))` over `[0, t]`.
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CesaroInheritance {
    pub report: DominationReport,
    pub bound_checks: Vec<BoundCheck>,
    /// `max(lhs − rhs)`; non-positive up to quadrature error.
    pub max_excess: f64,
}

/// Domination of the Cesàro means of `f` by those of `g`, with the averaging bound checked on the grid.
pub fn cesaro_inheritance<T: Scalar>(
    f: &Trajectory<T>,
    g: &Trajectory<T>,
    window: (f64, f64),
    tol: f64,
) -> Result<CesaroInheritance> {
    f.check_compatible(g)?;
    let af = f.clone().cesaro();
    let ag = g.clone().cesaro();
    let report = check_asymptotic_domination(&af, &ag, window, tol)?;
    let mut bound_checks = Vec::with_capacity(report.error_samples.len());
    let mut max_excess = f64::NEG_INFINITY;
    let mut integral = 0.0f64;
    let mut reached = 0.0f64;
    for s in &report.error_samples {
        integral = time_integral(
            f.domain,
            (reached, s.t),
            integral,
            |u| Ok(domination_error(f, g, u)?.to_f64()),
            |a, v, w| a + v * w,
        )?;
        reached = s.t;
        let rhs = integral / s.t;
        max_excess = max_excess.max(s.error_fg - rhs);
        bound_checks.push(BoundCheck {
            t: s.t,
            lhs: s.error_fg,
            rhs,
        });
    }
    Ok(CesaroInheritance {
        report,
        bound_checks,
        max_excess,
    })
}
