//! Long-time behaviour: mean ergodicity, strong limits, peripheral projections.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spectral::{cabs, eigen_clusters, spectral_bound, spectral_projection, spectral_radius, EigenCluster, CLUSTER_TOL};
use super::{geometric_grid, Semigroup};
use crate::cone_geometry::lp::{LinearProgram, LpStatus, Relation};
use crate::cone_geometry::{distance_to_cone, Cone};
use crate::error::{LabError, Result};
use crate::linalg::{norm1, nullspace, smat, svec, sym_eig, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErgodicStatus {
    Converged,
    Diverged,
    Undecided,
}

/// One doubling step of the Cesàro Cauchy test.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CauchyStep<T: Scalar> {
    /// The later time `2t`.
    pub t: f64,
    /// `‖A_{2t} − A_t‖`.
    pub mean_gap: T,
    /// `‖R_{2t} − R_t‖` with `R_t = 2A_{2t} − A_t`.
    pub extrapolated_gap: T,
}

/// Outcome of the Cesàro Cauchy test on the extrapolated means.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NumericEvidence<T: Scalar> {
    pub converged: bool,
    /// Last time reached.
    pub t: f64,
    /// Last extrapolated gap.
    pub gap: T,
    pub trace: Vec<CauchyStep<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ErgodicResult<T: Scalar> {
    pub status: ErgodicStatus,
    /// Spectral projection onto the fixed space; present only when converged.
    pub projection: Option<Matrix<T>>,
    pub spectral_evidence: Vec<EigenCluster<T>>,
    pub spectral_status: ErgodicStatus,
    pub numeric: NumericEvidence<T>,
    /// `‖R_t − P‖` between the last extrapolated mean and the spectral projection.
    pub agreement_gap: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitStatus {
    Converged,
    /// Bounded but not convergent, e.g. a periodic orbit.
    Oscillating,
    /// Norms grow without bound.
    Divergent,
    /// No Cauchy success before the horizon and no growth detected.
    NotConverged,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ConvergenceReport<T: Scalar> {
    pub status: LimitStatus,
    pub limit: Option<Matrix<T>>,
    /// First grid time `t` with `‖T_{2t} − T_t‖ < tol`.
    pub limit_time: Option<f64>,
    /// `(2t, ‖T_{2t} − T_t‖)` along the squaring grid.
    pub cauchy_trace: Vec<(f64, T)>,
    /// `‖P² − P‖`.
    pub projection_residual: Option<T>,
    /// `max_s ‖T_s P − P‖`.
    pub commutation_residual: Option<T>,
    pub diagnostic: String,
    /// Whether the spectral criterion (peripheral spectrum `{1}`, semisimple) agrees.
    pub spectral_agrees: bool,
}

/// Dominating vector for a tail orbit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OrderBound<T: Scalar> {
    pub y: Vec<T>,
    /// `max_t d₊(y − T_t x)` over the validation part of the window.
    pub residual: T,
}

/// Identifies the peripheral and the fixed eigenvalues for both semigroup kinds.
struct SpectralView<T: Scalar> {
    clusters: Vec<EigenCluster<T>>,
    discrete: bool,
}

impl<T: Scalar> SpectralView<T> {
    fn new(sg: &Semigroup<T>) -> Self {
        Self {
            clusters: eigen_clusters(sg.matrix()),
            discrete: sg.is_discrete(),
        }
    }

    fn stol(c: &EigenCluster<T>) -> T {
        T::lit(CLUSTER_TOL) * c.modulus().max(T::one())
    }

    /// Growth exponent: spectral radius minus one, or spectral bound.
    fn growth(&self) -> T {
        if self.discrete {
            spectral_radius(&self.clusters) - T::one()
        } else {
            spectral_bound(&self.clusters)
        }
    }

    fn bounded_growth(&self) -> bool {
        self.clusters.is_empty() || self.growth() <= T::lit(CLUSTER_TOL)
    }

    fn is_peripheral(&self, c: &EigenCluster<T>) -> bool {
        if self.discrete {
            (c.modulus() - T::one()).abs() <= Self::stol(c)
        } else {
            c.re.abs() <= Self::stol(c)
        }
    }

    fn is_fixed(&self, c: &EigenCluster<T>) -> bool {
        let target = if self.discrete { T::one() } else { T::zero() };
        cabs(c.value() - nalgebra::Complex::new(target, T::zero())) <= Self::stol(c)
    }

    /// `Some(true)` if every peripheral cluster is semisimple, `None` if any is undecided.
    fn peripheral_semisimple(&self) -> Option<bool> {
        let mut out = Some(true);
        for c in self.clusters.iter().filter(|c| self.is_peripheral(c)) {
            match c.semisimple {
                Some(false) => return Some(false),
                None => out = None,
                Some(true) => {}
            }
        }
        out
    }

    fn power_bounded(&self) -> ErgodicStatus {
        if !self.bounded_growth() {
            return ErgodicStatus::Diverged;
        }
        match self.peripheral_semisimple() {
            Some(true) => ErgodicStatus::Converged,
            Some(false) => ErgodicStatus::Diverged,
            None => ErgodicStatus::Undecided,
        }
    }

    fn only_fixed_peripheral(&self) -> bool {
        self.clusters
            .iter()
            .filter(|c| self.is_peripheral(c))
            .all(|c| self.is_fixed(c))
    }
}

/// Mean-ergodic projection decided by agreement of the Cesàro Cauchy test and
/// the spectral criterion.
pub fn mean_ergodic_projection<T: Scalar>(sg: &Semigroup<T>, tol: T, horizon: f64) -> Result<ErgodicResult<T>> {
    let view = SpectralView::new(sg);
    let spectral_status = view.power_bounded();
    let p_spec = spectral_projection(sg.matrix(), &view.clusters, |c| view.is_fixed(c));

    let mut numeric = NumericEvidence {
        converged: false,
        t: sg.cesaro_grid_start(),
        gap: T::lit(f64::INFINITY),
        trace: Vec::new(),
    };
    // R_t = 2A_{2t} − A_t has the same limit along the doubling grid, since
    // A_{2t} = (A_t + R_t)/2, and cancels the 1/t term of A_t − P.
    let mut last_estimate: Option<DMatrix<T>> = None;
    let mut prev_mean: Option<DMatrix<T>> = None;
    for (t, mean, _) in sg.cesaro_doubling()? {
        if let Some(pm) = &prev_mean {
            let mean_gap = norm1(&(&mean - pm));
            let estimate = &mean * T::lit(2.0) - pm;
            if let Some(pe) = &last_estimate {
                let gap = norm1(&(&estimate - pe));
                numeric.trace.push(CauchyStep { t, mean_gap, extrapolated_gap: gap });
                numeric.gap = gap;
                numeric.t = t;
                if gap < tol {
                    numeric.converged = true;
                    last_estimate = Some(estimate);
                    break;
                }
            }
            last_estimate = Some(estimate);
        }
        prev_mean = Some(mean);
        if t >= horizon {
            break;
        }
    }
    let agreement_gap = last_estimate
        .as_ref()
        .map(|m| norm1(&(m - &p_spec)))
        .unwrap_or(T::lit(f64::INFINITY));

    let status = match (numeric.converged, spectral_status) {
        (true, ErgodicStatus::Converged) if agreement_gap <= T::lit(10.0) * tol => ErgodicStatus::Converged,
        (false, ErgodicStatus::Diverged) => ErgodicStatus::Diverged,
        _ => ErgodicStatus::Undecided,
    };
    Ok(ErgodicResult {
        status,
        projection: (status == ErgodicStatus::Converged).then_some(Matrix(p_spec)),
        spectral_evidence: view.clusters,
        spectral_status,
        numeric,
        agreement_gap,
    })
}

/// Orthonormal basis (columns) of `ker(T − I)` or `ker A`.
pub fn fixed_space<T: Scalar>(sg: &Semigroup<T>, tol: T) -> DMatrix<T> {
    let m = if sg.is_discrete() {
        sg.matrix() - DMatrix::identity(sg.dim(), sg.dim())
    } else {
        sg.matrix().clone()
    };
    nullspace(&m, tol)
}

fn commutation_times(discrete: bool) -> [f64; 3] {
    if discrete {
        [1.0, 2.0, 3.0]
    } else {
        [0.5, 1.0, 2.5]
    }
}

/// Limit of `T_t` as `t → ∞` by a Cauchy test along `t_0·2^k`.
pub fn strong_limit<T: Scalar>(sg: &Semigroup<T>, tol: T, horizon: f64) -> Result<ConvergenceReport<T>> {
    let view = SpectralView::new(sg);
    let spectral_converges = view.bounded_growth()
        && view.peripheral_semisimple() == Some(true)
        && view.only_fixed_peripheral();

    let mut t = sg.grid_start();
    let mut op = sg.evaluate(t)?;
    let mut trace = Vec::new();
    let mut norms = vec![norm1(&op)];
    let mut found: Option<(f64, DMatrix<T>)> = None;
    while t < horizon {
        let next = &op * &op;
        if !next.iter().all(|v| v.finite()) {
            break;
        }
        let gap = norm1(&(&next - &op));
        trace.push((2.0 * t, gap));
        norms.push(norm1(&next));
        if gap < tol {
            found = Some((t, next));
            break;
        }
        op = next;
        t *= 2.0;
    }

    let mut report = ConvergenceReport {
        status: LimitStatus::NotConverged,
        limit: None,
        limit_time: None,
        cauchy_trace: trace,
        projection_residual: None,
        commutation_residual: None,
        diagnostic: String::new(),
        spectral_agrees: false,
    };
    match found {
        Some((t, p)) => {
            let pr = norm1(&(&p * &p - &p));
            let mut cr = T::zero();
            for s in commutation_times(sg.is_discrete()) {
                cr = cr.max(norm1(&(sg.evaluate(s)? * &p - &p)));
            }
            report.projection_residual = Some(pr);
            report.commutation_residual = Some(cr);
            let bound = T::lit(10.0) * tol;
            if pr < bound && cr < bound {
                report.status = LimitStatus::Converged;
                report.limit = Some(Matrix(p));
                report.limit_time = Some(t);
                report.diagnostic = format!("Cauchy gap below tolerance at t = {t}");
            } else {
                report.status = LimitStatus::Oscillating;
                report.diagnostic = format!(
                    "squaring grid is stationary from t = {t} but T_s P ≠ P (residual {cr}): periodic orbit"
                );
            }
        }
        None => {
            let n = norms.len();
            let grows = n >= 3 && norms[n - 1] > norms[n - 2] && norms[n - 1] > T::lit(2.0) * norms[n / 2].max(T::one());
            if grows || !view.bounded_growth() && view.growth() > T::lit(CLUSTER_TOL) {
                report.status = LimitStatus::Divergent;
                report.diagnostic = format!("operator norm grows to {} by t = {t}", norms[n - 1]);
            } else if view.bounded_growth() && !view.only_fixed_peripheral() {
                report.status = LimitStatus::Oscillating;
                report.diagnostic = "bounded orbit with peripheral eigenvalues other than the fixed one".into();
            } else {
                report.diagnostic = format!("Cauchy gap not below tolerance by horizon {horizon}");
            }
        }
    }
    report.spectral_agrees = spectral_converges == (report.status == LimitStatus::Converged);
    Ok(report)
}

/// Spectral projection onto the eigenspaces of the peripheral eigenvalues.
pub fn jdlg_reversible_projection<T: Scalar>(sg: &Semigroup<T>, _tol: T) -> Result<DMatrix<T>> {
    let view = SpectralView::new(sg);
    let radius = if sg.is_discrete() {
        spectral_radius(&view.clusters)
    } else {
        spectral_bound(&view.clusters).exp()
    };
    if !view.bounded_growth() {
        return Err(LabError::Unbounded { radius: radius.to_f64() });
    }
    match view.peripheral_semisimple() {
        Some(true) => {}
        Some(false) => return Err(LabError::Unbounded { radius: radius.to_f64() }),
        None => {
            return Err(LabError::Precondition(
                "semisimplicity of a peripheral eigenvalue is numerically undecided".into(),
            ))
        }
    }
    Ok(spectral_projection(sg.matrix(), &view.clusters, |c| view.is_peripheral(c)))
}

/// Smallest `y ∈ K` dominating a set of vectors, by cone type.
fn dominating_vector<T: Scalar>(cone: &Cone<T>, vs: &[DVector<T>]) -> Result<Option<DVector<T>>> {
    let d = cone.dim();
    if vs.is_empty() {
        return Ok(Some(DVector::zeros(d)));
    }
    match cone {
        Cone::Orthant { .. } => {
            let mut y = DVector::zeros(d);
            for v in vs {
                y = y.zip_map(v, |a: T, b: T| a.max(b));
            }
            Ok(Some(y))
        }
        Cone::Psd { n } => {
            let mut c = T::zero();
            for v in vs {
                let (vals, _) = sym_eig(&smat(v, *n));
                c = vals.iter().fold(c, |a, b| a.max(*b));
            }
            Ok(Some(svec(&DMatrix::identity(*n, *n)) * c))
        }
        Cone::Centred(cc) => {
            let mut c = T::zero();
            for v in vs {
                let (a, w) = cc.split(v);
                c = c.max(a + w.norm());
            }
            Ok(Some(cc.u() * c))
        }
        Cone::Polyhedral(_) | Cone::Sliced(_) => {
            let p = cone.polyhedral().expect("finitely generated");
            let g = p.generator_matrix();
            let m = g.ncols();
            let mut lp = LinearProgram::new(m);
            lp.minimize(vec![T::one(); m]);
            for v in vs {
                for h in p.halfspaces() {
                    let coeffs: Vec<T> = (0..m).map(|j| h.dot(&g.column(j))).collect();
                    lp.constrain(coeffs, Relation::Ge, h.dot(v));
                }
            }
            let sol = lp.solve()?;
            if sol.status != LpStatus::Optimal {
                return Ok(None);
            }
            Ok(Some(&g * DVector::from_vec(sol.x)))
        }
    }
}

/// Searches `y ∈ K` with `T_t x ≤ y + r(t)` and small `‖r(t)‖` over the window.
///
/// `y` is fitted on the first half of the window and validated on the second;
/// `None` when the validation residual exceeds `1e-6·max(1, ‖y‖)`.
pub fn asymptotic_order_bound<T: Scalar>(
    sg: &Semigroup<T>,
    x: &DVector<T>,
    window: (f64, f64),
) -> Result<Option<OrderBound<T>>> {
    let cone = sg.cone();
    cone.check_dim(x, "asymptotic order bound")?;
    if !cone.contains(x, T::feastol())? {
        return Err(LabError::Precondition("orbit start must lie in the cone".into()));
    }
    let (t0, t1) = window;
    if !(t0 >= 0.0 && t1 > t0) {
        return Err(LabError::Precondition(format!("invalid window ({t0}, {t1})")));
    }
    let grid = geometric_grid(t0.max(sg.grid_start()), t1, 4, sg.is_discrete());
    let split = 0.5 * (t0 + t1);
    let mut fit = Vec::new();
    let mut check = Vec::new();
    for &t in &grid {
        let v = match sg.apply(t, x) {
            Ok(v) => v,
            Err(LabError::Overflow { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        if t <= split {
            fit.push(v);
        } else {
            check.push(v);
        }
    }
    let y = match dominating_vector(cone, &fit)? {
        Some(y) => y,
        None => return Ok(None),
    };
    let mut residual = T::zero();
    for v in check.iter().chain(fit.iter()) {
        residual = residual.max(distance_to_cone(&(&y - v), cone, sg.norm())?);
    }
    let budget = T::lit(1e-6) * sg.norm().eval(&y)?.max(T::one());
    if residual > budget {
        return Ok(None);
    }
    Ok(Some(OrderBound {
        y: y.iter().copied().collect(),
        residual,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn m(r: usize, xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, r, xs)
    }

    fn disc(t: DMatrix<f64>) -> Semigroup<f64> {
        let d = t.nrows();
        Semigroup::discrete(t, Cone::orthant(d).unwrap()).unwrap()
    }

    const H: f64 = 1e12;

    #[test]
    fn swap_is_mean_ergodic_but_has_no_strong_limit() {
        let sg = disc(m(2, &[0.0, 1.0, 1.0, 0.0]));
        let r = mean_ergodic_projection(&sg, 1e-9, H).unwrap();
        assert_eq!(r.status, ErgodicStatus::Converged);
        assert_relative_eq!(*r.projection.unwrap(), m(2, &[0.5; 4]), epsilon = 1e-12);
        let s = strong_limit(&sg, 1e-9, H).unwrap();
        assert_eq!(s.status, LimitStatus::Oscillating);
        assert!(s.spectral_agrees);
        assert_relative_eq!(jdlg_reversible_projection(&sg, 1e-9).unwrap(), DMatrix::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn cycles_beside_a_primitive_block_converge_quickly() {
        let mut t = DMatrix::zeros(7, 7);
        t.view_mut((0, 0), (2, 2)).copy_from(&m(2, &[0.7, 0.4, 0.3, 0.6]));
        t.view_mut((2, 2), (3, 3)).copy_from(&m(3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]));
        t.view_mut((5, 5), (2, 2)).copy_from(&m(2, &[0.0, 1.0, 1.0, 0.0]));
        let sg = disc(t);
        assert_eq!(sg.cesaro_grid_start(), 420.0);
        let r = mean_ergodic_projection(&sg, 1e-10, H).unwrap();
        assert_eq!(r.status, ErgodicStatus::Converged);
        assert!(r.numeric.t < 1e5);
        let p = r.projection.unwrap();
        assert_relative_eq!(p[(2, 3)], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(p[(5, 6)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn contraction_has_zero_projection() {
        let sg = disc(DMatrix::identity(2, 2) * 0.5);
        let r = mean_ergodic_projection(&sg, 1e-9, H).unwrap();
        assert_eq!(r.status, ErgodicStatus::Converged);
        assert_eq!(*r.projection.unwrap(), DMatrix::zeros(2, 2));
        assert_eq!(jdlg_reversible_projection(&sg, 1e-9).unwrap(), DMatrix::zeros(2, 2));
        assert_eq!(fixed_space(&sg, 1e-9).ncols(), 0);
    }

    #[test]
    fn jordan_block_diverges() {
        let sg = disc(m(2, &[1.0, 1.0, 0.0, 1.0]));
        let r = mean_ergodic_projection(&sg, 1e-9, 1e6).unwrap();
        assert_eq!(r.status, ErgodicStatus::Diverged);
        assert!(r.projection.is_none());
        assert!(matches!(jdlg_reversible_projection(&sg, 1e-9), Err(LabError::Unbounded { .. })));
        assert_eq!(strong_limit(&sg, 1e-9, 1e6).unwrap().status, LimitStatus::Divergent);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        assert!(asymptotic_order_bound(&sg, &e2, (10.0, 1000.0)).unwrap().is_none());
    }

    #[test]
    fn doubly_stochastic_strong_limit() {
        let sg = Semigroup::continuous(m(2, &[-1.0, 1.0, 1.0, -1.0]), Cone::orthant(2).unwrap()).unwrap();
        let s = strong_limit(&sg, 1e-9, 1e6).unwrap();
        assert_eq!(s.status, LimitStatus::Converged);
        assert!(s.spectral_agrees);
        assert_relative_eq!(*s.limit.unwrap(), m(2, &[0.5; 4]), epsilon = 1e-9);
        let fs = fixed_space(&sg, 1e-9);
        assert_eq!(fs.ncols(), 1);
        assert_relative_eq!(fs[(0, 0)].abs(), fs[(1, 0)].abs(), epsilon = 1e-12);
        let me = mean_ergodic_projection(&sg, 1e-9, H).unwrap();
        assert_eq!(me.status, ErgodicStatus::Converged);
    }

    #[test]
    fn primitive_stochastic_limits_are_rank_one_perron_projections() {
        let t = m(3, &[0.5, 0.2, 0.3, 0.3, 0.6, 0.3, 0.2, 0.2, 0.4]);
        let sg = disc(t.clone());
        // Perron vector by power iteration oracle.
        let mut pi = DVector::from_element(3, 1.0 / 3.0);
        for _ in 0..500 {
            pi = &t * pi;
        }
        let expected = &pi * DVector::from_element(3, 1.0).transpose();
        let s = strong_limit(&sg, 1e-10, 1e6).unwrap();
        assert_relative_eq!(*s.limit.unwrap(), expected, epsilon = 1e-9);
        assert_relative_eq!(jdlg_reversible_projection(&sg, 1e-9).unwrap(), expected, epsilon = 1e-9);
        let fs = fixed_space(&sg, 1e-9);
        assert_eq!(fs.ncols(), 1);
        let v = fs.column(0).into_owned() / fs.column(0).sum();
        assert_relative_eq!(v, pi, epsilon = 1e-9);
        let b = asymptotic_order_bound(&sg, &DVector::from_vec(vec![1.0, 0.0, 0.0]), (20.0, 200.0))
            .unwrap()
            .unwrap();
        for i in 0..3 {
            assert!(b.y[i] >= pi[i] - 1e-9 && b.y[i] <= pi[i] + 1e-6);
        }
    }

    #[test]
    fn identity_order_bound_is_the_start() {
        let sg = disc(DMatrix::identity(3, 3));
        let x = DVector::from_vec(vec![0.2, 1.0, 0.0]);
        let b = asymptotic_order_bound(&sg, &x, (1.0, 64.0)).unwrap().unwrap();
        assert_eq!(b.y, vec![0.2, 1.0, 0.0]);
        assert_eq!(b.residual, 0.0);
        assert_eq!(fixed_space(&sg, 1e-9).ncols(), 3);
    }

    #[test]
    fn order_bounds_on_psd_and_polyhedral_cones() {
        let psd = Semigroup::discrete(DMatrix::identity(3, 3) * 0.9, Cone::psd(2).unwrap()).unwrap();
        let x = svec(&m(2, &[1.0, 0.0, 0.0, 0.0]));
        assert!(asymptotic_order_bound(&psd, &x, (1.0, 50.0)).unwrap().is_some());
        let cone = Cone::from_generators(
            2,
            vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![1.0, 1.0])],
        )
        .unwrap();
        let rot = Semigroup::discrete(DMatrix::identity(2, 2), cone).unwrap();
        let b = asymptotic_order_bound(&rot, &DVector::from_vec(vec![2.0, 1.0]), (1.0, 16.0))
            .unwrap()
            .unwrap();
        assert_relative_eq!(b.y[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(b.y[1], 1.0, epsilon = 1e-9);
    }

    fn primitive(seed: &[f64], d: usize) -> DMatrix<f64> {
        let mut t = DMatrix::from_fn(d, d, |i, j| seed[i * 6 + j] + 0.05);
        for j in 0..d {
            let s = t.column(j).sum();
            t.column_mut(j).unscale_mut(s);
        }
        t
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn jdlg_projection_is_an_invariant_idempotent(seed in proptest::collection::vec(0.0f64..1.0, 36), d in 2usize..6) {
            let t = primitive(&seed, d);
            let sg = disc(t.clone());
            let p = jdlg_reversible_projection(&sg, 1e-9).unwrap();
            prop_assert!((&p * &p - &p).amax() < 1e-8);
            prop_assert!((&t * &p - &p * &t).amax() < 1e-8);
        }

        #[test]
        fn powers_of_mean_ergodic_stay_mean_ergodic(seed in proptest::collection::vec(0.0f64..1.0, 36), d in 2usize..6) {
            let sg = disc(primitive(&seed, d));
            let r = mean_ergodic_projection(&sg, 1e-8, H).unwrap();
            prop_assert_eq!(r.status, ErgodicStatus::Converged);
            for k in 2..=5 {
                let rk = mean_ergodic_projection(&sg.power(k).unwrap(), 1e-8, H).unwrap();
                prop_assert_eq!(rk.status, ErgodicStatus::Converged);
            }
        }

        #[test]
        fn order_bounds_on_all_rays_imply_mean_ergodicity(seed in proptest::collection::vec(0.0f64..1.0, 36), d in 2usize..5, scale in 0.3f64..1.0) {
            let sg = disc(primitive(&seed, d) * scale);
            let all = Cone::<f64>::orthant(d).unwrap().spanning_rays().iter()
                .all(|g| asymptotic_order_bound(&sg, g, (8.0, 256.0)).unwrap().is_some());
            if all {
                prop_assert_eq!(mean_ergodic_projection(&sg, 1e-8, H).unwrap().status, ErgodicStatus::Converged);
            }
        }

        #[test]
        fn orbit_integral_over_t_vanishes(seed in proptest::collection::vec(0.0f64..1.0, 9), x in proptest::collection::vec(0.0f64..1.0, 3)) {
            let a = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { seed[3 * i + j] + 0.1 });
            let a = DMatrix::from_fn(3, 3, |i, j| if i == j { -(a.column(j).sum()) } else { a[(i, j)] });
            let sg = Semigroup::continuous(a, Cone::orthant(3).unwrap()).unwrap();
            let x = DVector::from_vec(x);
            let inner = sg.cesaro_integral(1.0).unwrap() * &x;
            let mut last = f64::INFINITY;
            for t in [10.0, 100.0, 1000.0, 10000.0] {
                let v = (sg.evaluate(t).unwrap() * &inner / t).norm();
                prop_assert!(v <= last + 1e-12);
                last = v;
            }
            prop_assert!(last < 1e-3);
        }
    }
}
