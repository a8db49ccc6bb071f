//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Variables carry optional lower/upper bounds (default `x ≥ 0`); free
//! variables are split, finite upper bounds become rows. Rows are flipped so
//! every right-hand side is non-negative, and each row owns one column that is
//! the identity in the initial tableau, so `B⁻¹` can be read off at the end.

use crate::error::{LabError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
struct Row<T> {
    coeffs: Vec<T>,
    rel: Relation,
    rhs: T,
}

#[derive(Debug, Clone, Copy)]
struct Bound<T> {
    lower: Option<T>,
    upper: Option<T>,
}

/// A linear program over `n` variables.
#[derive(Debug, Clone)]
pub struct LinearProgram<T: Scalar> {
    n: usize,
    objective: Vec<T>,
    maximize: bool,
    rows: Vec<Row<T>>,
    bounds: Vec<Bound<T>>,
    max_iter: usize,
}

/// Farkas multipliers `y` for the standardized system `A x = b, x ≥ 0`:
/// `yᵀA ≤ 0` and `yᵀb > 0`.
#[derive(Debug, Clone)]
pub struct InfeasibilityCertificate<T> {
    pub multipliers: Vec<T>,
    /// `yᵀb`, equal to the phase-one optimum.
    pub gap: T,
    /// `max_j yᵀA_j`, non-positive up to rounding.
    pub max_violation: T,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    pub objective: T,
    /// One multiplier per user constraint; sensitivity of the objective to its rhs.
    pub duals: Vec<T>,
    /// `max_k |y_k (a_k·x − b_k)|` over user constraints.
    pub complementarity: T,
    /// `max_k` violation of a user constraint at `x`.
    pub primal_residual: T,
    pub certificate: Option<InfeasibilityCertificate<T>>,
}

struct VarMap<T> {
    offset: T,
    terms: Vec<(usize, T)>,
}

struct Tableau<T> {
    m: usize,
    width: usize,
    a: Vec<T>,
    basis: Vec<usize>,
}

impl<T: Scalar> Tableau<T> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> T {
        self.a[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> T {
        self.a[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [T]) {
        let w = self.width;
        let p = self.at(r, c);
        for j in 0..w {
            self.a[r * w + j] /= p;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * w + c];
            if f != T::zero() {
                for j in 0..w {
                    let v = self.a[r * w + j];
                    self.a[i * w + j] -= f * v;
                }
            }
        }
        let f = obj[c];
        if f != T::zero() {
            for j in 0..w {
                obj[j] -= f * self.a[r * w + j];
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule on columns `< allowed`. Returns `false` on unboundedness.
    fn optimize(&mut self, obj: &mut [T], allowed: usize, iter_budget: &mut usize) -> Result<bool> {
        let tol = T::pivtol();
        loop {
            let entering = (0..allowed).find(|&j| obj[j] < -tol);
            let Some(c) = entering else { return Ok(true) };
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.m {
                let aic = self.at(i, c);
                if aic > tol {
                    let ratio = self.rhs(i).max(T::zero()) / aic;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= tol * (T::one() + br.abs());
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = best else { return Ok(false) };
            if *iter_budget == 0 {
                return Err(LabError::IterationLimit);
            }
            *iter_budget -= 1;
            self.pivot(r, c, obj);
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    /// A program over `n` non-negative variables with zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            objective: vec![T::zero(); n],
            maximize: false,
            rows: Vec::new(),
            bounds: vec![
                Bound {
                    lower: Some(T::zero()),
                    upper: None
                };
                n
            ],
            max_iter: 50_000,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn minimize(&mut self, c: Vec<T>) -> &mut Self {
        assert_eq!(c.len(), self.n, "objective length");
        self.objective = c;
        self.maximize = false;
        self
    }

    pub fn maximize(&mut self, c: Vec<T>) -> &mut Self {
        assert_eq!(c.len(), self.n, "objective length");
        self.objective = c;
        self.maximize = true;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<T>, rel: Relation, rhs: T) -> &mut Self {
        assert_eq!(coeffs.len(), self.n, "constraint length");
        self.rows.push(Row { coeffs, rel, rhs });
        self
    }

    /// Sets `lower ≤ x_j ≤ upper`; `None` means unbounded on that side.
    pub fn bound(&mut self, j: usize, lower: Option<T>, upper: Option<T>) -> &mut Self {
        self.bounds[j] = Bound { lower, upper };
        self
    }

    pub fn free(&mut self, j: usize) -> &mut Self {
        self.bound(j, None, None)
    }

    /// Solves the program, returning `Err` only for non-finite input or iteration exhaustion.
    pub fn solve(&self) -> Result<LpSolution<T>> {
        let zero = T::zero();
        let one = T::one();
        if !self.objective.iter().all(|v| v.finite())
            || !self
                .rows
                .iter()
                .all(|r| r.rhs.finite() && r.coeffs.iter().all(|v| v.finite()))
        {
            return Err(LabError::NonFinite("linear program"));
        }

        // Standard-form variables.
        let mut maps = Vec::with_capacity(self.n);
        let mut ns = 0usize;
        let mut extra_rows: Vec<(usize, T)> = Vec::new();
        for b in &self.bounds {
            match (b.lower, b.upper) {
                (Some(l), u) => {
                    maps.push(VarMap {
                        offset: l,
                        terms: vec![(ns, one)],
                    });
                    if let Some(u) = u {
                        extra_rows.push((ns, u - l));
                    }
                    ns += 1;
                }
                (None, Some(u)) => {
                    maps.push(VarMap {
                        offset: u,
                        terms: vec![(ns, -one)],
                    });
                    ns += 1;
                }
                (None, None) => {
                    maps.push(VarMap {
                        offset: zero,
                        terms: vec![(ns, one), (ns + 1, -one)],
                    });
                    ns += 2;
                }
            }
        }

        let mut std_rows: Vec<(Vec<T>, Relation, T)> = Vec::new();
        for r in &self.rows {
            let mut a = vec![zero; ns];
            let mut rhs = r.rhs;
            for (j, coef) in r.coeffs.iter().enumerate() {
                if *coef == zero {
                    continue;
                }
                rhs -= *coef * maps[j].offset;
                for (k, s) in &maps[j].terms {
                    a[*k] += *coef * *s;
                }
            }
            std_rows.push((a, r.rel, rhs));
        }
        for (k, cap) in &extra_rows {
            let mut a = vec![zero; ns];
            a[*k] = one;
            std_rows.push((a, Relation::Le, *cap));
        }
        let m = std_rows.len();
        let mut flip = vec![one; m];
        for (i, row) in std_rows.iter_mut().enumerate() {
            if row.2 < zero {
                flip[i] = -one;
                for v in row.0.iter_mut() {
                    *v = -*v;
                }
                row.2 = -row.2;
                row.1 = match row.1 {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        // Columns: structural | slacks | artificials | rhs.
        let n_slack = std_rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = std_rows.iter().filter(|r| r.1 != Relation::Le).count();
        let art_start = ns + n_slack;
        let width = art_start + n_art + 1;
        let mut tab = Tableau {
            m,
            width,
            a: vec![zero; m * width],
            basis: vec![0; m],
        };
        let mut identity_col = vec![0usize; m];
        let mut slack = ns;
        let mut art = art_start;
        for (i, (a, rel, rhs)) in std_rows.iter().enumerate() {
            tab.a[i * width..i * width + ns].copy_from_slice(a);
            tab.a[i * width + width - 1] = *rhs;
            match rel {
                Relation::Le => {
                    tab.a[i * width + slack] = one;
                    identity_col[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    tab.a[i * width + slack] = -one;
                    slack += 1;
                    tab.a[i * width + art] = one;
                    identity_col[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    tab.a[i * width + art] = one;
                    identity_col[i] = art;
                    art += 1;
                }
            }
            tab.basis[i] = identity_col[i];
        }

        let mut budget = self.max_iter;
        let bscale = one + std_rows.iter().fold(zero, |s, r| s.max(r.2));

        // Phase one.
        let mut obj1 = vec![zero; width];
        for j in art_start..width - 1 {
            obj1[j] = one;
        }
        for i in 0..m {
            if tab.basis[i] >= art_start {
                for j in 0..width {
                    obj1[j] -= tab.at(i, j);
                }
            }
        }
        tab.optimize(&mut obj1, art_start, &mut budget)?;
        let infeas = -obj1[width - 1];
        if infeas > T::feastol() * bscale {
            let y: Vec<T> = (0..m)
                .map(|i| {
                    let c = identity_col[i];
                    let cost = if c >= art_start { one } else { zero };
                    cost - obj1[c]
                })
                .collect();
            let mut max_violation = T::min_value().unwrap_or(-one);
            for j in 0..art_start {
                let mut s = zero;
                for (i, row) in std_rows.iter().enumerate() {
                    let aij = if j < ns {
                        row.0[j]
                    } else {
                        tab_initial_slack(&std_rows, i, j - ns)
                    };
                    s += y[i] * aij;
                }
                max_violation = max_violation.max(s);
            }
            let gap = y.iter().zip(&std_rows).fold(zero, |s, (yi, r)| s + *yi * r.2);
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![zero; self.n],
                objective: zero,
                duals: vec![zero; self.rows.len()],
                complementarity: zero,
                primal_residual: infeas,
                certificate: Some(InfeasibilityCertificate {
                    multipliers: y,
                    gap,
                    max_violation,
                }),
            });
        }
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| tab.at(i, j).abs() > T::pivtol()) {
                    tab.pivot(i, j, &mut obj1);
                }
            }
        }

        // Phase two.
        let sign = if self.maximize { -one } else { one };
        let mut cost = vec![zero; width];
        for (j, map) in maps.iter().enumerate() {
            for (k, s) in &map.terms {
                cost[*k] += sign * self.objective[j] * *s;
            }
        }
        let mut obj2 = cost.clone();
        for i in 0..m {
            let cb = cost[tab.basis[i]];
            if cb != zero {
                for j in 0..width {
                    obj2[j] -= cb * tab.at(i, j);
                }
            }
        }
        let bounded = tab.optimize(&mut obj2, art_start, &mut budget)?;
        if !bounded {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: vec![zero; self.n],
                objective: if self.maximize {
                    T::max_value().unwrap_or(one)
                } else {
                    T::min_value().unwrap_or(-one)
                },
                duals: vec![zero; self.rows.len()],
                complementarity: zero,
                primal_residual: zero,
                certificate: None,
            });
        }

        let mut xs = vec![zero; width - 1];
        for i in 0..m {
            xs[tab.basis[i]] = tab.rhs(i).max(zero);
        }
        let x: Vec<T> = maps
            .iter()
            .map(|mp| mp.terms.iter().fold(mp.offset, |s, (k, c)| s + *c * xs[*k]))
            .collect();
        let objective = self
            .objective
            .iter()
            .zip(&x)
            .fold(zero, |s, (c, v)| s + *c * *v);
        let mut duals = Vec::with_capacity(self.rows.len());
        let mut complementarity = zero;
        let mut primal_residual = zero;
        for (k, r) in self.rows.iter().enumerate() {
            let y = sign * flip[k] * (-obj2[identity_col[k]]);
            let ax = r.coeffs.iter().zip(&x).fold(zero, |s, (a, v)| s + *a * *v);
            let gap = ax - r.rhs;
            let viol = match r.rel {
                Relation::Le => gap.max(zero),
                Relation::Ge => (-gap).max(zero),
                Relation::Eq => gap.abs(),
            };
            primal_residual = primal_residual.max(viol);
            complementarity = complementarity.max((y * gap).abs());
            duals.push(y);
        }
        Ok(LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            duals,
            complementarity,
            primal_residual,
            certificate: None,
        })
    }

    /// Solves and converts non-optimal outcomes into errors.
    pub fn solve_optimal(&self, what: &str) -> Result<LpSolution<T>> {
        let s = self.solve()?;
        match s.status {
            LpStatus::Optimal => Ok(s),
            LpStatus::Infeasible => Err(LabError::Infeasible(what.to_string())),
            LpStatus::Unbounded => Err(LabError::LpUnbounded),
        }
    }
}

/// Coefficient of slack number `s` in standardized row `i` of the initial tableau.
fn tab_initial_slack<T: Scalar>(rows: &[(Vec<T>, Relation, T)], i: usize, s: usize) -> T {
    let mut idx = 0;
    for (k, r) in rows.iter().enumerate() {
        if r.1 == Relation::Eq {
            continue;
        }
        if idx == s {
            return if k != i {
                T::zero()
            } else if r.1 == Relation::Le {
                T::one()
            } else {
                -T::one()
            };
        }
        idx += 1;
    }
    T::zero()
}
