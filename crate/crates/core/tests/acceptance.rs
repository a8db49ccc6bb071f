//! Acceptance suite: one PASS/FAIL line per criterion, then a determinism rerun.
//!
//! Runs without the libtest harness so the verdict lines always reach stdout.

mod common;

use std::process::ExitCode;

use nalgebra::{DMatrix, DVector};
use oplab_core::builders;
use oplab_core::cone_geometry::{distance_to_cone, in_order_interval, supremum_feasibility};
use oplab_core::domination::{
    cesaro_inheritance, check_asymptotic_domination, extract_summable_subsequence, TimeDomain, Trajectory,
};
use oplab_core::linalg::{norm1, rank, smat, spectral_norm, svec, sym_eig};
use oplab_core::lower_bounds::{
    converge_via_lower_bounds, doeblin_oracle, dominating_semigroup_convergence, find_individual_lower_bounds,
    find_universal_lower_bound, find_universal_mean_lower_bound, fixed_point_iteration, markov_renorm, PipelineMode,
};
use oplab_core::norms::additivity_defect;
use oplab_core::semigroup::spectral::eigen_clusters;
use oplab_core::semigroup::{geometric_grid, jdlg_reversible_projection, mean_ergodic_projection, ErgodicStatus};
use oplab_core::{Cone, NormSpec, Semigroup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SEED: u64 = 20_240_601;
const WINDOW: (f64, f64) = (10.0, 200.0);

struct Outcome {
    pass: bool,
    summary: String,
    metrics: Value,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(xs)
}

fn unit(d: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(d, |j, _| f64::from(i == j))
}

/// Operator norm when the library computes it exactly, otherwise the bound of the construction.
fn exact_operator_norm(pair: &common::Pair, m: &DMatrix<f64>, bound: f64) -> f64 {
    let exact = match &pair.norm {
        NormSpec::L1 | NormSpec::L2 | NormSpec::Linf | NormSpec::WeightedL1 { .. } | NormSpec::Trace => true,
        NormSpec::PsiBase { cone, .. } => cone.is_finitely_generated(),
        NormSpec::CentredMax { .. } => false,
    };
    if exact {
        pair.norm.operator_norm(m, &pair.cone).unwrap()
    } else {
        bound
    }
}

fn distance_calculus(seed: u64) -> Outcome {
    let tol = 1e-8;
    let mut worst = Vec::new();
    let mut pass = true;
    for (k, pair) in common::dispatch_table().iter().enumerate() {
        let mut rng = rng_for(seed, k as u64);
        let d = pair.cone.dim();
        let dist = |x: &DVector<f64>| distance_to_cone(x, &pair.cone, &pair.norm).unwrap();
        let (mut hom, mut sub, mut lip, mut op) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for _ in 0..1000 {
            let x = common::random_vector(d, 2.0, &mut rng);
            let y = common::random_vector(d, 2.0, &mut rng);
            let alpha = 10.0 * rng.random::<f64>();
            let (dx, dy) = (dist(&x), dist(&y));
            hom = hom.max((dist(&(&x * alpha)) - alpha * dx).abs());
            sub = sub.max(dist(&(&x + &y)) - dx - dy);
            lip = lip.max((dx - dy).abs() - pair.norm.eval(&(&x - &y)).unwrap());
            let (m, bound) = common::positive_operator(&pair.cone, &pair.norm, &mut rng);
            let t_norm = exact_operator_norm(pair, &m, bound);
            op = op.max(dist(&(&m * &x)) - t_norm * dx);
        }
        let ok = hom < tol && sub <= tol && lip <= tol && op <= tol;
        pass &= ok;
        worst.push(json!({"pair": pair.name, "homogeneity": hom, "subadditivity": sub, "lipschitz": lip, "operator": op, "ok": ok}));
    }
    let orthant = Cone::orthant(4).unwrap();
    let generated = Cone::from_generators(4, (0..4).map(|i| unit(4, i)).collect()).unwrap();
    let mut rng = rng_for(seed, 99);
    let mut lp_gap = 0.0f64;
    for _ in 0..1000 {
        let x = common::random_vector(4, 2.0, &mut rng);
        let a = distance_to_cone(&x, &orthant, &NormSpec::L1).unwrap();
        let b = distance_to_cone(&x, &generated, &NormSpec::L1).unwrap();
        let oracle: f64 = x.iter().map(|t| (-t).max(0.0)).sum();
        lp_gap = lp_gap.max((b - oracle).abs()).max((a - oracle).abs());
    }
    pass &= lp_gap <= 1e-9;
    Outcome {
        pass,
        summary: format!("{} cone/norm pairs × 1000 cases; LP vs positive-part gap {lp_gap:.1e}", worst.len()),
        metrics: json!({"pairs": worst, "lp_gap": lp_gap}),
    }
}

fn doubly_stochastic_example(_seed: u64) -> Outcome {
    let closed = |alpha: f64, t: f64| {
        let e = (-2.0 * alpha * t).exp();
        DMatrix::from_row_slice(2, 2, &[1.0 + e, 1.0 - e, 1.0 - e, 1.0 + e]) * 0.5
    };
    let sa = builders::doubly_stochastic::<f64>(1.0).unwrap();
    let sb = builders::doubly_stochastic::<f64>(2.0).unwrap();
    let mut closed_gap = 0.0f64;
    for i in 0..=200 {
        let t = 0.25 * i as f64;
        closed_gap = closed_gap.max((sa.evaluate(t).unwrap() - closed(1.0, t)).amax());
        closed_gap = closed_gap.max((sb.evaluate(t).unwrap() - closed(2.0, t)).amax());
    }
    let fa = Trajectory::operator_orbit(&sa).unwrap();
    let fb = Trajectory::operator_orbit(&sb).unwrap();
    let rep = check_asymptotic_domination(&fa, &fb, WINDOW, 1e-6).unwrap();
    let tail_max = rep
        .error_samples
        .iter()
        .filter(|s| s.t >= 10.0)
        .map(|s| s.error_fg.max(s.error_gf))
        .fold(0.0f64, f64::max);
    let diff = sa.evaluate(1.0).unwrap() - sb.evaluate(1.0).unwrap();
    let mixed = diff.iter().any(|x| *x > 0.0) && diff.iter().any(|x| *x < 0.0);
    let pass = closed_gap < 1e-10 && rep.equivalent && tail_max < 1e-6 && mixed;
    Outcome {
        pass,
        summary: format!("closed-form gap {closed_gap:.1e}; tail errors {tail_max:.1e}; mixed signs at t=1: {mixed}"),
        metrics: json!({"closed_gap": closed_gap, "equivalent": rep.equivalent, "tail_max": tail_max,
            "difference_at_1": diff.iter().copied().collect::<Vec<_>>()}),
    }
}

fn powers_stay_mean_ergodic(seed: u64) -> Outcome {
    let mut converged = 0;
    let mut agree = 0;
    let mut worst_gap = 0.0f64;
    for i in 0..100u64 {
        let mut rng = rng_for(seed, 300 + i);
        let d = 2 + (i as usize % 5);
        let t = builders::random_primitive_stochastic::<f64, _>(d, 0.05, &mut rng);
        let sg = Semigroup::discrete(t, Cone::orthant(d).unwrap()).unwrap();
        let mut all = true;
        let mut all_agree = true;
        for r in 1..=5 {
            let res = mean_ergodic_projection(&sg.power(r).unwrap(), 1e-8, 1e12).unwrap();
            all &= res.status == ErgodicStatus::Converged;
            all_agree &= res.spectral_status == ErgodicStatus::Converged && res.numeric.converged;
            worst_gap = worst_gap.max(res.agreement_gap);
        }
        converged += usize::from(all);
        agree += usize::from(all_agree);
    }
    Outcome {
        pass: converged == 100 && agree == 100,
        summary: format!("{converged}/100 with all powers converged; evidence agrees in {agree}/100"),
        metrics: json!({"converged": converged, "agree": agree, "agreement_gap": worst_gap}),
    }
}

fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let d: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(d, d);
    let mut o = 0;
    for b in blocks {
        m.view_mut((o, o), b.shape()).copy_from(b);
        o += b.nrows();
    }
    m
}

fn dominated_pairs(seed: u64) -> Outcome {
    let tol = 1e-8;
    let mut failures = Vec::new();
    let mut cases = Vec::new();
    for i in 0..20u64 {
        let mut rng = rng_for(seed, 400 + i);
        let mut blocks = Vec::new();
        let mut weights = Vec::new();
        for b in 0..3 {
            let kind = rng.random_range(0..4);
            let block = match kind {
                0 => builders::random_primitive_stochastic::<f64, _>(2, 0.1, &mut rng),
                1 => builders::random_primitive_stochastic::<f64, _>(3, 0.1, &mut rng),
                2 => builders::cyclic_shift::<f64>(3),
                _ => builders::swap::<f64>().unwrap().matrix().clone(),
            };
            let keep = b == 0 || rng.random::<f64>() < 0.5;
            for _ in 0..block.nrows() {
                weights.push(if keep { 1.0 } else { 0.9 * rng.random::<f64>() });
            }
            blocks.push(block);
        }
        let t = Semigroup::discrete(block_diag(&blocks), Cone::orthant(weights.len()).unwrap()).unwrap();
        let s = builders::dominated_by(&t, &weights).unwrap();
        let mt = mean_ergodic_projection(&t, tol, 1e12).unwrap();
        let ms = mean_ergodic_projection(&s, tol, 1e12).unwrap();
        let ok_status = mt.status == ErgodicStatus::Converged && ms.status == ErgodicStatus::Converged;
        let (pt, ps) = match (mt.projection, ms.projection) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => {
                failures.push(i);
                cases.push(json!({"dim": weights.len(), "status_t": format!("{:?}", mt.status),
                    "status_s": format!("{:?}", ms.status), "ok": false}));
                continue;
            }
        };
        let order = ps.iter().all(|x| *x >= -tol) && (&pt - &ps).iter().all(|x| *x >= -tol);
        let ranks = (rank(&ps, 1e-8), rank(&pt, 1e-8));
        let jt = jdlg_reversible_projection(&t, tol).unwrap();
        let js = jdlg_reversible_projection(&s, tol).unwrap();
        let jorder = js.iter().all(|x| *x >= -tol) && (&jt - &js).iter().all(|x| *x >= -tol);
        let ok = ok_status && order && ranks.0 <= ranks.1 && jorder;
        if !ok {
            failures.push(i);
        }
        cases.push(json!({"dim": weights.len(), "rank_s": ranks.0, "rank_t": ranks.1, "order": order,
            "jdlg_order": jorder, "ok": ok}));
    }
    Outcome {
        pass: failures.is_empty(),
        summary: format!("{}/20 constructed pairs satisfy the projection order", 20 - failures.len()),
        metrics: json!({"cases": cases, "failures": failures}),
    }
}

fn decaying_family() -> (Trajectory<f64>, Trajectory<f64>) {
    let x = v(&[1.0, 2.0]);
    let cone = Cone::orthant(2).unwrap();
    let xf = x.clone();
    let f = Trajectory::function(
        move |t| {
            let mut y = xf.clone();
            y[0] += (-t).exp();
            y
        },
        cone.clone(),
        NormSpec::L1,
        TimeDomain::Continuous,
    )
    .unwrap();
    let g = Trajectory::constant(x, cone, NormSpec::L1, TimeDomain::Continuous).unwrap();
    (f, g)
}

fn cesaro_and_subsequence(_seed: u64) -> Outcome {
    let (f, g) = decaying_family();
    let inh = cesaro_inheritance(&f, &g, (1.0, 100.0), 1e-1).unwrap();
    let excess = inh
        .bound_checks
        .iter()
        .map(|b| b.lhs - (1.0 - (-b.t).exp()) / b.t)
        .fold(f64::NEG_INFINITY, f64::max);
    let sub = extract_summable_subsequence(&f, &g, 40.0).unwrap();
    let q = DVector::from_vec(sub.q.clone());
    let mut exact = true;
    for &t in &sub.times {
        let gap = g.sample(t).unwrap() + &q - f.sample(t).unwrap();
        exact &= gap.iter().all(|x| *x >= 0.0);
    }
    let increasing = sub.times.windows(2).all(|w| w[0] < w[1]);
    let pass = excess <= 1e-9 && exact && increasing && sub.verified;
    Outcome {
        pass,
        summary: format!(
            "Cesàro excess over (1−e^−t)/t: {excess:.1e}; {} selected times, inequality exact: {exact}",
            sub.times.len()
        ),
        metrics: json!({"excess": excess, "times": sub.times, "q": sub.q, "exact": exact}),
    }
}

/// `e^{t(Φ − I)}` for a random trace-preserving completely positive `Φ` on real symmetric 2×2 matrices.
fn channel_generator(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = 2;
    let gs: Vec<DMatrix<f64>> = (0..2).map(|_| DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5)).collect();
    let s = gs.iter().fold(DMatrix::zeros(n, n), |a, g| a + g.transpose() * g);
    let (vals, vecs) = sym_eig(&s);
    let inv_sqrt = &vecs * DMatrix::from_diagonal(&vals.map(|l| 1.0 / l.sqrt())) * vecs.transpose();
    let ks: Vec<DMatrix<f64>> = gs.iter().map(|g| g * &inv_sqrt).collect();
    let dim = 3;
    let mut phi = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let rho = smat(&unit(dim, j), n);
        let out = ks.iter().fold(DMatrix::zeros(n, n), |a, k| a + k * &rho * k.transpose());
        phi.set_column(j, &svec(&out));
    }
    phi - DMatrix::identity(dim, dim)
}

fn growth_over_time(seed: u64) -> Outcome {
    let mut cases = Vec::new();
    let mut pass = true;
    for i in 0..20u64 {
        let mut rng = rng_for(seed, 600 + i);
        let sg = if i < 15 {
            let d = 2 + (i as usize % 4);
            let a = builders::random_markov_generator::<f64, _>(d, 0.05, &mut rng);
            Semigroup::continuous(a, Cone::orthant(d).unwrap()).unwrap()
        } else {
            let a = channel_generator(&mut rng);
            Semigroup::continuous(a, Cone::psd(2).unwrap()).unwrap().with_norm(NormSpec::Trace).unwrap()
        };
        let me = mean_ergodic_projection(&sg, 1e-8, 1e12).unwrap();
        let gap = eigen_clusters(sg.matrix())
            .iter()
            .filter(|c| c.modulus() > 1e-9)
            .map(|c| -c.re)
            .fold(f64::INFINITY, f64::min);
        let knee = (1.0 / gap).max(1.0);
        let grid = geometric_grid(1.0, 200.0, 4, false);
        let ratios: Vec<(f64, f64)> = grid
            .iter()
            .map(|&t| (t, sg.norm().operator_norm(&sg.evaluate(t).unwrap(), sg.cone()).unwrap() / t))
            .collect();
        let sup = ratios.iter().map(|r| r.1).fold(0.0f64, f64::max);
        let beyond: Vec<&(f64, f64)> = ratios.iter().filter(|r| r.0 >= knee).collect();
        let left_max = beyond.windows(2).all(|w| w[0].1 >= w[1].1)
            && beyond.first().is_some_and(|first| beyond.iter().all(|r| r.1 <= first.1));
        let ok = me.status == ErgodicStatus::Converged && sup.is_finite() && left_max;
        pass &= ok;
        cases.push(json!({"cone": sg.cone().kind(), "knee": knee, "sup": sup, "ok": ok}));
    }
    Outcome {
        pass,
        summary: "20 mean-ergodic continuous semigroups; sup ‖T_t‖/t finite, maximal at the knee".into(),
        metrics: json!({"cases": cases}),
    }
}

fn doeblin_iteration(_seed: u64) -> Outcome {
    let sg = builders::doeblin_chain::<f64>(0.1).unwrap();
    let pi = builders::stationary_vector(sg.matrix()).unwrap();
    let beta = 0.1;
    let oracle = doeblin_oracle(beta, pi);
    let mut pass = true;
    let mut runs = Vec::new();
    for eps in [1e-2, 1e-4] {
        for i in 0..3 {
            let f = unit(3, i);
            let run = fixed_point_iteration(&sg, &f, &oracle, beta, eps, 1000.0).unwrap();
            let dprime = run.delta;
            let law = run
                .trace
                .iter()
                .all(|s| s.norm_h >= 1.0 - dprime * (1.0 - beta).powi(s.n as i32) - 1e-8);
            let h = DVector::from_vec(run.h.clone());
            let t_start = run.trace.iter().filter_map(|s| s.t0).fold(1.0f64, f64::max);
            let tail = geometric_grid(t_start, 1000.0, 4, true);
            let orbit: Vec<DVector<f64>> = tail.iter().map(|&t| sg.apply(t, &f).unwrap()).collect();
            let dplus = orbit
                .iter()
                .map(|x| distance_to_cone(&(x - &h), sg.cone(), sg.norm()).unwrap())
                .fold(0.0f64, f64::max);
            let mut osc = 0.0f64;
            for a in &orbit {
                for b in &orbit {
                    osc = osc.max(norm1(&DMatrix::from_column_slice(3, 1, (a - b).as_slice())));
                }
            }
            let ok = law && dplus <= eps && osc < 8.0 * eps + 1e-8;
            pass &= ok;
            runs.push(json!({"eps": eps, "start": i, "steps": run.trace.len(), "tail_dplus": dplus, "oscillation": osc, "ok": ok}));
        }
    }
    Outcome {
        pass,
        summary: "Doeblin chain δ=0.1: norm law, tail d₊ ≤ ε and oscillation < 8ε for ε ∈ {1e-2, 1e-4}".into(),
        metrics: json!({"runs": runs}),
    }
}

/// Upper bound on the induced operator norm of a difference of semigroup operators.
fn difference_norm(sg: &Semigroup<f64>, m: &DMatrix<f64>) -> f64 {
    match sg.cone() {
        Cone::Psd { n } => (*n as f64).sqrt() * spectral_norm(m),
        _ => norm1(m),
    }
}

fn universal_pipeline(_seed: u64) -> Outcome {
    let mut pass = true;
    let mut rows = Vec::new();
    let cases = [
        (builders::doeblin_chain::<f64>(0.1).unwrap(), WINDOW),
        (builders::depolarizing_channel::<f64>(0.3, 2).unwrap(), (10.0, 100.0)),
    ];
    for (sg, window) in cases {
        let cert = find_universal_lower_bound(&sg, window, 1e-6).unwrap();
        let beta = cert.as_ref().map_or(0.0, |c| c.beta);
        let r = converge_via_lower_bounds(&sg, PipelineMode::Universal, window, 1e-10).unwrap();
        let reached = r.limit.as_ref().and_then(|p| {
            (1..=200).find(|&t| difference_norm(&sg, &(sg.evaluate(t as f64).unwrap() - &p.0)) < 1e-8)
        });
        let gamma = r.gamma.unwrap_or(0.0);
        let ok = beta >= 0.3 * (1.0 - 1e-6)
            && r.converged
            && reached.is_some_and(|t| t <= 60)
            && r.limit_rank == 1
            && gamma >= beta - 1e-6;
        pass &= ok;
        rows.push(json!({"scenario": sg.label(), "beta": beta, "reached": reached, "rank": r.limit_rank, "gamma": gamma, "ok": ok}));
    }
    let guard = builders::scaled_bounds::<f64>().unwrap();
    let none_universal = find_universal_lower_bound(&guard, WINDOW, 1e-6).unwrap().is_none();
    let none_family = find_individual_lower_bounds(&guard, false, WINDOW, 1e-6).unwrap().is_none();
    let r = converge_via_lower_bounds(&guard, PipelineMode::Individual, WINDOW, 1e-10).unwrap();
    let guarded = none_universal && none_family && !r.converged && r.failed_stage.as_deref() == Some("certificate");
    pass &= guarded;
    Outcome {
        pass,
        summary: format!("Doeblin and depolarizing converge to rank-1 limits; scaled-bounds guard holds: {guarded}"),
        metrics: json!({"cases": rows, "guard": guarded}),
    }
}

fn markov_renorming(seed: u64) -> Outcome {
    let mut pass = true;
    let mut cases = Vec::new();
    for i in 0..20u64 {
        let mut rng = rng_for(seed, 900 + i);
        let d = 2 + (i as usize % 5);
        let sg = builders::random_similar_chain::<f64, _>(d, &mut rng).unwrap();
        let ones = DVector::from_element(d, 1.0);
        let mass = find_universal_lower_bound(&sg, WINDOW, 1e-6)
            .unwrap()
            .map_or(0.0, |c| ones.dot(&DVector::from_vec(c.h)));
        let r = markov_renorm(&sg, &ones, WINDOW, 1e-10).unwrap();
        let additivity = additivity_defect(&r.renorm.norm, sg.cone(), 1000, seed ^ i).unwrap();
        let psi = DVector::from_vec(r.psi.clone());
        let bound = 2.0 * r.renorm.decomposition_constant * sg.norm().dual(&psi).unwrap();
        let mut equivalent = (r.renorm.upper - bound).abs() <= 1e-12 * bound.max(1.0);
        for _ in 0..1000 {
            let f = common::random_vector(d, 1.0, &mut rng);
            let (n, np) = (sg.norm().eval(&f).unwrap(), r.renorm.norm.eval(&f).unwrap());
            equivalent &= r.renorm.lower * n <= np + 1e-10 && np <= bound * n + 1e-10;
        }
        let ok = mass > 0.0 && r.markov_defect < 1e-8 && additivity < 1e-10 && equivalent;
        pass &= ok;
        cases.push(json!({"dim": d, "mass": mass, "markov_defect": r.markov_defect, "additivity": additivity, "ok": ok}));
    }
    Outcome {
        pass,
        summary: "20 non-Markov similar chains renormed to Markov with additive, equivalent norms".into(),
        metrics: json!({"cases": cases}),
    }
}

struct MeanOnly {
    mean_bound: Option<f64>,
    plain_bound: Option<f64>,
    converged: bool,
    rank: usize,
    dual_dim: Option<usize>,
    dual_angle: Option<f64>,
}

fn mean_only_instance(p: f64) -> MeanOnly {
    let sg = builders::mixed_cyclic::<f64>(p).unwrap();
    let mean_bound = find_universal_mean_lower_bound(&sg, WINDOW, 1e-6).unwrap().map(|c| c.beta);
    let plain_bound = find_universal_lower_bound(&sg, WINDOW, 1e-6).unwrap().map(|c| c.beta);
    let me = mean_ergodic_projection(&sg, 1e-9, 1e12).unwrap();
    let rank_me = me.projection.as_ref().map_or(0, |m| rank(&m.0, 1e-8));
    let pipe = converge_via_lower_bounds(&sg, PipelineMode::UniversalMean, WINDOW, 1e-9).unwrap();
    MeanOnly {
        mean_bound,
        plain_bound,
        converged: me.status == ErgodicStatus::Converged && pipe.converged,
        rank: rank_me,
        dual_dim: pipe.dual_fixed_dim,
        dual_angle: pipe.dual_angle,
    }
}

impl MeanOnly {
    fn holds(&self) -> bool {
        self.mean_bound.is_some()
            && self.plain_bound.is_none()
            && self.converged
            && self.rank == 1
            && self.dual_dim == Some(1)
            && self.dual_angle.is_some_and(|a| a <= 1e-6)
    }

    fn json(&self, p: f64) -> Value {
        json!({"p": p, "mean_bound": self.mean_bound, "plain_bound": self.plain_bound, "converged": self.converged,
            "rank": self.rank, "dual_dim": self.dual_dim, "dual_angle": self.dual_angle})
    }
}

fn mean_lower_bound_only(_seed: u64) -> Outcome {
    let main = mean_only_instance(0.2);
    let summary = match main.plain_bound {
        Some(beta) => format!(
            "p = 0.2: a non-mean universal lower bound exists (β = {beta:.4}); every entry of T is ≥ p·min v > 0"
        ),
        None => format!("p = 0.2: mean bound {:?}, rank {}", main.mean_bound, main.rank),
    };
    Outcome {
        pass: main.holds(),
        summary,
        metrics: main.json(0.2),
    }
}

fn mean_lower_bound_only_pure_cycle(_seed: u64) -> Outcome {
    let r = mean_only_instance(0.0);
    Outcome {
        pass: r.holds(),
        summary: format!(
            "p = 0: mean bound β = {:.4}, no plain bound, rank {}, dual angle {:.1e}",
            r.mean_bound.unwrap_or(0.0),
            r.rank,
            r.dual_angle.unwrap_or(f64::NAN)
        ),
        metrics: r.json(0.0),
    }
}

fn dominating_convergence(_seed: u64) -> Outcome {
    let (t, s) = builders::dominating_pair::<f64>(0.1, 0.3).unwrap();
    let r = dominating_semigroup_convergence(&t, &s, WINDOW, 1e-10).unwrap();
    let gap = r.reference_gap.unwrap_or(f64::INFINITY);
    Outcome {
        pass: r.converged && gap < 1e-7,
        summary: format!("dominating chain converges; ‖P_S − P_T‖₁ = {gap:.1e}"),
        metrics: json!({"converged": r.converged, "gap": gap, "failed_stage": r.failed_stage}),
    }
}

fn centred_and_non_lattice(seed: u64) -> Outcome {
    let s5 = 0.84 + 0.12 + 0.06;
    let centres = [
        (v(&[1.5, 0.5, 0.0]), v(&[0.6, 0.2, 0.1])),
        (v(&[1.2, 0.4, 0.3, 0.0, 0.1]), v(&[0.7, 0.3, 0.2, 0.1, 0.0]) / s5),
    ];
    let mut defects = Vec::new();
    for (u, up) in centres {
        let cone = Cone::centred(u, up).unwrap();
        let norm = NormSpec::centred_max(&cone).unwrap();
        defects.push(additivity_defect(&norm, &cone, 1000, seed).unwrap());
    }
    let additive = defects.iter().all(|d| *d < 1e-12);

    let cone = builders::sliced_non_lattice_cone::<f64>().unwrap();
    let [a, b, u1, u2] = builders::non_lattice_pair::<f64>();
    let bounds = [&u1, &u2]
        .iter()
        .all(|u| cone.contains(&(*u - &a), 1e-12).unwrap() && cone.contains(&(*u - &b), 1e-12).unwrap());
    let cert = supremum_feasibility(&cone, &a, &b, &u1, &u2).unwrap();
    let orthant = Cone::orthant(3).unwrap();
    let mut rng = rng_for(seed, 1200);
    let mut contained = true;
    let mut tested = 0;
    for _ in 0..200 {
        let lo = common::random_vector(3, 1.0, &mut rng);
        let hi = &lo + cone.random_element(&mut rng);
        for _ in 0..10 {
            let z = &lo + (&hi - &lo) * rng.random::<f64>() + common::random_vector(3, 0.2, &mut rng);
            if in_order_interval(&cone, &lo, &hi, &z, 0.0).unwrap() {
                tested += 1;
                contained &= in_order_interval(&orthant, &lo, &hi, &z, 0.0).unwrap();
            }
        }
    }
    let pass = additive && bounds && !cert.feasible && cert.farkas_verified && contained && tested > 0;
    Outcome {
        pass,
        summary: format!(
            "centred-max defects {:.1e}/{:.1e}; no supremum (Farkas verified: {}); {tested} interval points contained",
            defects[0], defects[1], cert.farkas_verified
        ),
        metrics: json!({"defects": defects, "bounds": bounds, "feasible": cert.feasible, "tested": tested, "contained": contained}),
    }
}

type Criterion = (&'static str, fn(u64) -> Outcome);

const CRITERIA: [Criterion; 12] = [
    ("distance-to-cone calculus", distance_calculus),
    ("doubly stochastic example", doubly_stochastic_example),
    ("powers of mean-ergodic chains", powers_stay_mean_ergodic),
    ("dominated pairs order their projections", dominated_pairs),
    ("Cesàro bound and summable subsequence", cesaro_and_subsequence),
    ("growth of mean-ergodic continuous semigroups", growth_over_time),
    ("lower-bound iteration on the Doeblin chain", doeblin_iteration),
    ("universal lower bound pipeline", universal_pipeline),
    ("Markov renorming", markov_renorming),
    ("mean lower bound without a plain one", mean_lower_bound_only),
    ("dominating semigroup convergence", dominating_convergence),
    ("centred norms and the non-lattice cone", centred_and_non_lattice),
];

/// Criteria that cannot hold as stated; each must still fail for the recorded reason.
const KNOWN_RED: [usize; 1] = [10];

fn run_all(seed: u64) -> Vec<(bool, String, String)> {
    CRITERIA
        .iter()
        .map(|(_, f)| {
            let o = f(seed);
            (o.pass, o.summary, serde_json::to_string(&json!({"pass": o.pass, "metrics": o.metrics})).unwrap())
        })
        .collect()
}

fn main() -> ExitCode {
    let first = run_all(SEED);
    if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
        for (i, r) in first.iter().enumerate() {
            println!("criterion {} metrics: {}", i + 1, r.2);
        }
    }
    let mut unexpected = Vec::new();
    for (i, ((name, _), (pass, summary, _))) in CRITERIA.iter().zip(&first).enumerate() {
        let n = i + 1;
        println!("criterion {n:2} {} {name}: {summary}", if *pass { "PASS" } else { "FAIL" });
        if !*pass && !KNOWN_RED.contains(&n) {
            unexpected.push(n);
        }
    }
    let red_ok = !first[9].0 && first[9].2.contains("\"plain_bound\":0.");
    if !first[9].0 && !red_ok {
        unexpected.push(10);
    }
    let pure = mean_lower_bound_only_pure_cycle(SEED);
    println!(
        "criterion 10 (p = 0 instance) {}: {}",
        if pure.pass { "PASS" } else { "FAIL" },
        pure.summary
    );
    if !pure.pass {
        unexpected.push(10);
    }
    let second = run_all(SEED);
    let identical = first.iter().zip(&second).all(|(a, b)| a.2 == b.2)
        && serde_json::to_string(&pure.metrics).unwrap()
            == serde_json::to_string(&mean_lower_bound_only_pure_cycle(SEED).metrics).unwrap();
    println!(
        "criterion 13 {} determinism: criteria 1-12 rerun {}",
        if identical { "PASS" } else { "FAIL" },
        if identical { "byte-identically" } else { "with differences" }
    );
    if !identical {
        unexpected.push(13);
    }
    let passed = first.iter().filter(|r| r.0).count() + usize::from(identical);
    println!("{passed}/13 criteria pass; expected red: {KNOWN_RED:?}; unexpected failures: {unexpected:?}");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
