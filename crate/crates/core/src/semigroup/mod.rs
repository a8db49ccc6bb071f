//! Discrete (`T^n`) and continuous (`e^{tA}`) matrix semigroups acting on an
//! ordered space.

mod ergodic;
pub mod spectral;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cone_geometry::Cone;
use crate::error::{LabError, Result};
use crate::linalg::{ensure_square, expm, expm_with_integral, mat_pow, Matrix};
use crate::norms::NormSpec;
use crate::scalar::Scalar;

pub use ergodic::{
    asymptotic_order_bound, fixed_space, CauchyStep, jdlg_reversible_projection, mean_ergodic_projection, strong_limit,
    ConvergenceReport, ErgodicResult, ErgodicStatus, LimitStatus, NumericEvidence, OrderBound,
};
pub use spectral::EigenCluster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupKind {
    /// `t ↦ T^t` on the naturals.
    Discrete,
    /// `t ↦ e^{tA}` on `[0, ∞)`.
    Continuous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
struct SemigroupSpec<T: Scalar> {
    kind: SemigroupKind,
    matrix: Matrix<T>,
    cone: Cone<T>,
    #[serde(default)]
    norm: Option<NormSpec<T>>,
    #[serde(default)]
    label: String,
}

/// A matrix semigroup with its ambient cone and norm.
///
/// For `Discrete` the stored matrix is `T`; for `Continuous` it is the generator `A`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "", try_from = "SemigroupSpec<T>", into = "SemigroupSpec<T>")]
pub struct Semigroup<T: Scalar> {
    kind: SemigroupKind,
    matrix: DMatrix<T>,
    cone: Cone<T>,
    norm: NormSpec<T>,
    label: String,
    /// Result of the last positivity check, if one was run.
    positive: Option<bool>,
}

impl<T: Scalar> TryFrom<SemigroupSpec<T>> for Semigroup<T> {
    type Error = LabError;
    fn try_from(s: SemigroupSpec<T>) -> Result<Self> {
        let mut sg = Semigroup::new(s.kind, s.matrix.0, s.cone)?;
        if let Some(n) = s.norm {
            sg = sg.with_norm(n)?;
        }
        Ok(sg.with_label(s.label))
    }
}

impl<T: Scalar> From<Semigroup<T>> for SemigroupSpec<T> {
    fn from(s: Semigroup<T>) -> Self {
        SemigroupSpec {
            kind: s.kind,
            matrix: Matrix(s.matrix),
            cone: s.cone,
            norm: Some(s.norm),
            label: s.label,
        }
    }
}

/// Result of a positivity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PositivityReport<T: Scalar> {
    pub positive: bool,
    /// Time and cone ray whose image leaves the cone.
    pub witness: Option<(f64, Vec<T>)>,
}

/// Cesàro mean `A_t` together with `‖T_t‖/t`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CesaroState<T: Scalar> {
    pub t: f64,
    pub mean: Matrix<T>,
    pub tail_norm: T,
}

/// Geometric time grid from `t0` to `t1` with `per_doubling` points per factor of two.
///
/// Discrete grids are rounded to distinct integers; `t1` is always included.
pub fn geometric_grid(t0: f64, t1: f64, per_doubling: usize, discrete: bool) -> Vec<f64> {
    let ratio = 2f64.powf(1.0 / per_doubling.max(1) as f64);
    let mut out: Vec<f64> = Vec::new();
    let mut t = t0;
    let push = |x: f64, out: &mut Vec<f64>| {
        let x = if discrete { x.round() } else { x };
        if out.last().is_none_or(|l| x > *l) {
            out.push(x);
        }
    };
    while t < t1 * (1.0 - 1e-12) {
        push(t, &mut out);
        t *= ratio;
    }
    push(t1, &mut out);
    out
}

impl<T: Scalar> Semigroup<T> {
    pub fn new(kind: SemigroupKind, matrix: DMatrix<T>, cone: Cone<T>) -> Result<Self> {
        ensure_square(&matrix, "semigroup matrix")?;
        if matrix.nrows() != cone.dim() {
            return Err(LabError::DimensionMismatch {
                context: "semigroup matrix vs cone",
                expected: cone.dim(),
                found: matrix.nrows(),
            });
        }
        let norm = NormSpec::default_for(&cone);
        Ok(Self {
            kind,
            matrix,
            cone,
            norm,
            label: String::new(),
            positive: None,
        })
    }

    pub fn discrete(t: DMatrix<T>, cone: Cone<T>) -> Result<Self> {
        Self::new(SemigroupKind::Discrete, t, cone)
    }

    pub fn continuous(generator: DMatrix<T>, cone: Cone<T>) -> Result<Self> {
        Self::new(SemigroupKind::Continuous, generator, cone)
    }

    pub fn with_norm(mut self, norm: NormSpec<T>) -> Result<Self> {
        norm.check_dim(self.cone.dim())?;
        self.norm = norm;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn kind(&self) -> SemigroupKind {
        self.kind
    }

    pub fn is_discrete(&self) -> bool {
        self.kind == SemigroupKind::Discrete
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `T` for discrete semigroups, the generator `A` for continuous ones.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn cone(&self) -> &Cone<T> {
        &self.cone
    }

    pub fn norm(&self) -> &NormSpec<T> {
        &self.norm
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Default first time of geometric grids: 1 (discrete) or 0.5 (continuous).
    pub fn grid_start(&self) -> f64 {
        if self.is_discrete() {
            1.0
        } else {
            0.5
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < 0.0 {
            return Err(LabError::Precondition(format!("time must be finite and non-negative, got {t}")));
        }
        if self.is_discrete() && t.fract() != 0.0 {
            return Err(LabError::Precondition(format!("discrete time must be an integer, got {t}")));
        }
        Ok(())
    }

    /// `T_t`.
    pub fn evaluate(&self, t: f64) -> Result<DMatrix<T>> {
        self.check_time(t)?;
        let m = match self.kind {
            SemigroupKind::Discrete => mat_pow(&self.matrix, t as u64),
            SemigroupKind::Continuous => {
                expm(&(&self.matrix * T::lit(t))).map_err(|_| LabError::Overflow { t })?
            }
        };
        if !m.iter().all(|v| v.finite()) {
            return Err(LabError::Overflow { t });
        }
        Ok(m)
    }

    /// `T_t x`.
    pub fn apply(&self, t: f64, x: &DVector<T>) -> Result<DVector<T>> {
        self.cone.check_dim(x, "semigroup orbit")?;
        Ok(self.evaluate(t)? * x)
    }

    /// The dual semigroup `(T_t')`, acting by transposes.
    pub fn dual(&self) -> Self {
        Self {
            kind: self.kind,
            matrix: self.matrix.transpose(),
            cone: self.cone.clone(),
            norm: self.norm.clone(),
            label: format!("{}'", self.label),
            positive: None,
        }
    }

    /// `T^r` (discrete) or `e^{rA}` sampled at integer times, as a discrete semigroup.
    pub fn power(&self, r: u64) -> Result<Self> {
        let m = self.evaluate(r as f64)?;
        Ok(Self {
            kind: SemigroupKind::Discrete,
            matrix: m,
            cone: self.cone.clone(),
            norm: self.norm.clone(),
            label: format!("{}^{}", self.label, r),
            positive: self.positive.filter(|p| *p),
        })
    }

    /// Outcome of [`Semigroup::verify_positivity`]; `None` if never checked.
    pub fn positivity_verified(&self) -> Option<bool> {
        self.positive
    }

    /// Runs [`Semigroup::positivity_check`] and records the verdict.
    pub fn verify_positivity(mut self, grid: &[f64], tol: T) -> Result<Self> {
        self.positive = Some(self.positivity_check(grid, tol)?.positive);
        Ok(self)
    }

    /// Whether every operator of the semigroup maps the cone into itself.
    ///
    /// Continuous semigroups on the orthant are checked through the Metzler
    /// property of the generator; all other cases map probe rays over `grid`.
    pub fn positivity_check(&self, grid: &[f64], tol: T) -> Result<PositivityReport<T>> {
        let rays = self.cone.probe_rays(32, 29);
        let fail = |t: f64, g: &DVector<T>| PositivityReport {
            positive: false,
            witness: Some((t, g.iter().copied().collect())),
        };
        match (self.kind, &self.cone) {
            (SemigroupKind::Continuous, Cone::Orthant { dim }) => {
                for j in 0..*dim {
                    for i in 0..*dim {
                        if i != j && self.matrix[(i, j)] < -tol {
                            let mut e = DVector::zeros(*dim);
                            e[j] = T::one();
                            let t = grid.iter().copied().find(|t| *t > 0.0).unwrap_or(1.0);
                            return Ok(fail(t, &e));
                        }
                    }
                }
            }
            (SemigroupKind::Discrete, _) => {
                for g in &rays {
                    if !self.cone.contains(&(&self.matrix * g), tol)? {
                        return Ok(fail(1.0, g));
                    }
                }
            }
            (SemigroupKind::Continuous, _) => {
                for &t in grid {
                    let m = self.evaluate(t)?;
                    for g in &rays {
                        if !self.cone.contains(&(&m * g), tol)? {
                            return Ok(fail(t, g));
                        }
                    }
                }
            }
        }
        Ok(PositivityReport {
            positive: true,
            witness: None,
        })
    }

    /// `(Σ_{k<n} T^k, T^n)` by binary splitting.
    fn discrete_sum(&self, n: u64) -> (DMatrix<T>, DMatrix<T>) {
        let d = self.dim();
        let mut sum = DMatrix::zeros(d, d);
        let mut pow = DMatrix::identity(d, d);
        if n == 0 {
            return (sum, pow);
        }
        let bits = 64 - n.leading_zeros();
        for b in (0..bits).rev() {
            // (S(m), T^m) -> (S(2m), T^{2m})
            sum = &sum + &pow * &sum;
            pow = &pow * &pow;
            if (n >> b) & 1 == 1 {
                sum += &pow;
                pow = &pow * &self.matrix;
            }
        }
        (sum, pow)
    }

    /// `(A_t, T_t)`: Cesàro mean and the semigroup at time `t > 0`.
    pub fn cesaro_pair(&self, t: f64) -> Result<(DMatrix<T>, DMatrix<T>)> {
        self.check_time(t)?;
        if t <= 0.0 {
            return Err(LabError::Precondition("Cesàro mean needs t > 0".into()));
        }
        match self.kind {
            SemigroupKind::Discrete => {
                let (s, p) = self.discrete_sum(t as u64);
                Ok((s / T::lit(t), p))
            }
            SemigroupKind::Continuous => {
                let (e, i) = expm_with_integral(&self.matrix, T::lit(t))?;
                Ok((i / T::lit(t), e))
            }
        }
    }

    /// Unnormalized Cesàro sum `t·A_t` (`Σ_{k<t} T^k` or `∫_0^t e^{sA} ds`).
    pub fn cesaro_integral(&self, t: f64) -> Result<DMatrix<T>> {
        if t == 0.0 {
            return Ok(DMatrix::zeros(self.dim(), self.dim()));
        }
        Ok(self.cesaro_pair(t)?.0 * T::lit(t))
    }

    pub fn cesaro_mean(&self, t: f64) -> Result<CesaroState<T>> {
        let (mean, tt) = self.cesaro_pair(t)?;
        let tail_norm = self.norm.operator_norm(&tt, &self.cone)? / T::lit(t);
        Ok(CesaroState {
            t,
            mean: Matrix(mean),
            tail_norm,
        })
    }

    /// Start of the Cesàro doubling grid.
    ///
    /// In discrete time this is `lcm(1, …, min(d, 12))`: peripheral eigenvalues of
    /// a nonnegative `d×d` matrix are roots of unity of order at most `d`, and
    /// their Cesàro sums vanish at every multiple of the order.
    pub fn cesaro_grid_start(&self) -> f64 {
        if !self.is_discrete() {
            return self.grid_start();
        }
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        (1..=self.dim().clamp(1, 12) as u64).fold(1u64, |l, k| l / gcd(l, k) * k) as f64
    }

    /// Iterator over `(t, A_t, T_t)` along `t0·2^k` with `t0` the Cesàro grid start.
    pub fn cesaro_doubling(&self) -> Result<CesaroDoubling<T>> {
        let t0 = self.cesaro_grid_start();
        let (mean, op) = self.cesaro_pair(t0)?;
        Ok(CesaroDoubling {
            t: t0,
            sum: mean * T::lit(t0),
            op,
            started: false,
        })
    }
}

/// State of the Cesàro doubling recursion `S_{2t} = S_t + T_t S_t`, `T_{2t} = T_t²`.
pub struct CesaroDoubling<T: Scalar> {
    t: f64,
    sum: DMatrix<T>,
    op: DMatrix<T>,
    started: bool,
}

impl<T: Scalar> Iterator for CesaroDoubling<T> {
    /// `(t, A_t, T_t)`.
    type Item = (f64, DMatrix<T>, DMatrix<T>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.started {
            self.sum = &self.sum + &self.op * &self.sum;
            self.op = &self.op * &self.op;
            self.t *= 2.0;
        }
        self.started = true;
        if !self.op.iter().all(|v| v.finite()) || !self.sum.iter().all(|v| v.finite()) {
            return None;
        }
        Some((self.t, &self.sum / T::lit(self.t), self.op.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn m(r: usize, xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, r, xs)
    }

    fn doubly_stochastic(alpha: f64) -> Semigroup<f64> {
        Semigroup::continuous(m(2, &[-alpha, alpha, alpha, -alpha]), Cone::orthant(2).unwrap()).unwrap()
    }

    #[test]
    fn doubly_stochastic_closed_form() {
        let sg = doubly_stochastic(1.0);
        for t in [0.0, 0.3, 1.0, 7.5, 50.0] {
            let e = sg.evaluate(t).unwrap();
            let a = 0.5 * (1.0 + (-2.0 * t).exp());
            let b = 0.5 * (1.0 - (-2.0 * t).exp());
            assert_relative_eq!(e, m(2, &[a, b, b, a]), epsilon = 1e-12);
        }
    }

    #[test]
    fn discrete_evaluation_edge_cases() {
        let swap = Semigroup::discrete(m(2, &[0.0, 1.0, 1.0, 0.0]), Cone::orthant(2).unwrap()).unwrap();
        assert_eq!(swap.evaluate(0.0).unwrap(), DMatrix::identity(2, 2));
        assert_eq!(swap.evaluate(7.0).unwrap(), *swap.matrix());
        assert!(swap.evaluate(1.5).is_err());
        assert!(swap.evaluate(-1.0).is_err());
    }

    #[test]
    fn positivity_checks() {
        assert!(doubly_stochastic(1.0).positivity_check(&[1.0], 1e-12).unwrap().positive);
        let v = doubly_stochastic(1.0).verify_positivity(&[1.0], 1e-12).unwrap();
        assert_eq!(v.positivity_verified(), Some(true));
        let flip = Semigroup::discrete(m(2, &[1.0, 0.0, 0.0, -1.0]), Cone::orthant(2).unwrap()).unwrap();
        let r = flip.positivity_check(&[1.0], 1e-12).unwrap();
        assert!(!r.positive);
        assert_eq!(r.witness.unwrap().1, vec![0.0, 1.0]);
        let non_metzler = Semigroup::continuous(m(2, &[-1.0, -0.5, 1.0, -1.0]), Cone::orthant(2).unwrap()).unwrap();
        assert!(!non_metzler.positivity_check(&[1.0], 1e-12).unwrap().positive);
    }

    #[test]
    fn cesaro_means_of_swap_and_identity() {
        let swap = Semigroup::discrete(m(2, &[0.0, 1.0, 1.0, 0.0]), Cone::orthant(2).unwrap()).unwrap();
        for n in [2.0, 10.0, 64.0] {
            assert_relative_eq!(*swap.cesaro_mean(n).unwrap().mean, m(2, &[0.5; 4]), epsilon = 1e-15);
        }
        let id = Semigroup::<f64>::discrete(DMatrix::identity(3, 3), Cone::orthant(3).unwrap()).unwrap();
        assert_relative_eq!(*id.cesaro_mean(37.0).unwrap().mean, DMatrix::identity(3, 3), epsilon = 1e-14);
    }

    #[test]
    fn discrete_cesaro_sum_matches_running_sum() {
        let t = m(3, &[0.5, 0.2, 0.1, 0.3, 0.6, 0.2, 0.2, 0.2, 0.7]);
        let sg = Semigroup::discrete(t.clone(), Cone::orthant(3).unwrap()).unwrap();
        let mut acc = DMatrix::zeros(3, 3);
        let mut p = DMatrix::identity(3, 3);
        for _ in 0..23 {
            acc += &p;
            p = &p * &t;
        }
        assert_relative_eq!(*sg.cesaro_mean(23.0).unwrap().mean, acc / 23.0, epsilon = 1e-14);
    }

    #[test]
    fn continuous_cesaro_tends_to_the_averaging_projection() {
        let sg = doubly_stochastic(1.0);
        let mean = sg.cesaro_mean(1e6).unwrap().mean;
        assert_relative_eq!(*mean, m(2, &[0.5; 4]), epsilon = 1e-6);
        // Closed form: (1/t)∫ ½(1+e^{-2s}) ds.
        let t = 3.0;
        let expected = 0.5 + (1.0 - (-2.0f64 * t).exp()) / (4.0 * t);
        assert_relative_eq!(sg.cesaro_mean(t).unwrap().mean[(0, 0)], expected, epsilon = 1e-13);
    }

    #[test]
    fn doubling_iterator_matches_direct_means() {
        let sg = doubly_stochastic(0.7);
        for (t, a, _) in sg.cesaro_doubling().unwrap().take(8) {
            assert_relative_eq!(a, *sg.cesaro_mean(t).unwrap().mean, epsilon = 1e-12);
        }
    }

    #[test]
    fn grids_are_increasing_and_end_at_t1() {
        let g = geometric_grid(1.0, 100.0, 4, true);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.last().unwrap(), 100.0);
        let g = geometric_grid(0.5, 50.0, 1, false);
        assert_eq!(g[..3], [0.5, 1.0, 2.0]);
    }

    #[test]
    fn json_round_trip_keeps_matrix_and_kind() {
        let sg: Semigroup<f64> = doubly_stochastic(2.0).with_label("s2");
        let s = serde_json::to_string(&sg).unwrap();
        let back: Semigroup<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back.kind(), SemigroupKind::Continuous);
        assert_eq!(back.matrix(), sg.matrix());
        assert_eq!(back.label(), "s2");
        let bad = r#"{"kind":"discrete","matrix":[[1.0,0.0],[0.0,1.0]],"cone":{"type":"orthant","dim":3}}"#;
        assert!(serde_json::from_str::<Semigroup<f64>>(bad).is_err());
    }

    proptest! {
        #[test]
        fn semigroup_law_holds(seed in proptest::collection::vec(0.0f64..1.0, 9), s in 0.0f64..3.0, t in 0.0f64..3.0) {
            let a = DMatrix::from_fn(3, 3, |i, j| if i == j { -seed[3 * i + j] - 1.0 } else { seed[3 * i + j] });
            let sg = Semigroup::continuous(a.clone(), Cone::orthant(3).unwrap()).unwrap();
            let lhs = sg.evaluate(s + t).unwrap();
            let rhs = sg.evaluate(s).unwrap() * sg.evaluate(t).unwrap();
            prop_assert!((lhs - rhs).amax() < 1e-9);
            let dsg = Semigroup::discrete(a / 3.0, Cone::orthant(3).unwrap()).unwrap();
            let (si, ti) = ((s * 3.0).floor(), (t * 3.0).floor());
            let lhs = dsg.evaluate(si + ti).unwrap();
            let rhs = dsg.evaluate(si).unwrap() * dsg.evaluate(ti).unwrap();
            prop_assert!((lhs - rhs).amax() < 1e-9);
        }

        #[test]
        fn generator_times_integral_is_increment(seed in proptest::collection::vec(0.0f64..1.0, 9), t in 0.1f64..20.0) {
            let a = DMatrix::from_fn(3, 3, |i, j| if i == j { -seed[3 * i + j] - 0.5 } else { seed[3 * i + j] });
            let sg = Semigroup::continuous(a.clone(), Cone::orthant(3).unwrap()).unwrap();
            let integral = sg.cesaro_integral(t).unwrap();
            let lhs = &a * integral;
            let rhs = sg.evaluate(t).unwrap() - DMatrix::identity(3, 3);
            prop_assert!((lhs - rhs).amax() < 1e-9);
        }
    }
}
