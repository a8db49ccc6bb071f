//! Builtin scenarios. Builders are expanded to matrix literals so every config is self-contained.

use std::collections::BTreeMap;

use oplab_core::lower_bounds::PipelineMode;
use oplab_core::{builders, NormSpec, Semigroup};

use crate::config::{CheckKind, CheckSpec, ScenarioConfig, SemigroupSource, DEFAULT_TOL, DEFAULT_WINDOW};

pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    make: fn() -> ScenarioConfig,
}

impl Builtin {
    pub fn config(&self) -> ScenarioConfig {
        (self.make)()
    }
}

pub const BUILTINS: [Builtin; 10] = [
    Builtin {
        name: "doubly-stochastic",
        summary: "two-state generators α[[−1,1],[1,−1]] for α = 1, 2: convergence and asymptotic equivalence",
        make: doubly_stochastic,
    },
    Builtin {
        name: "doeblin-chain",
        summary: "three-state chain with every entry ≥ 0.1: universal lower bound and rank-one limit",
        make: doeblin_chain,
    },
    Builtin {
        name: "swap-matrix",
        summary: "[[0,1],[1,0]]: mean ergodic, but powers oscillate (the strong-limit check fails)",
        make: swap_matrix,
    },
    Builtin {
        name: "jordan-block",
        summary: "[[1,1],[0,1]]: unbounded powers, not mean ergodic",
        make: jordan_block,
    },
    Builtin {
        name: "centred-cone",
        summary: "contraction on a tilted ice-cream cone with its additive max-norm",
        make: centred_cone,
    },
    Builtin {
        name: "sliced-AL-non-lattice",
        summary: "sub-cone {x ≥ 0 : x₁ + x₂ ≥ x₃}: additive norm, no suprema, relaxing semigroup",
        make: sliced_non_lattice,
    },
    Builtin {
        name: "depolarizing-channel",
        summary: "qubit depolarizing channel (p = 0.3) on 2×2 symmetric matrices with the trace norm",
        make: depolarizing,
    },
    Builtin {
        name: "mean-lower-bound-only",
        summary: "cyclic shift on three states: a universal mean lower bound exists, a plain one does not",
        make: mean_lower_bound_only,
    },
    Builtin {
        name: "dominating-converges",
        summary: "S = (1 − ε)T + επ𝟙ᵀ dominates the Doeblin chain T asymptotically and inherits its limit",
        make: dominating_converges,
    },
    Builtin {
        name: "scaled-bounds-counterexample-guard",
        summary: "diag(1, 1/2): convergent, yet lower bounds degenerate and no certificate may be issued",
        make: scaled_bounds_guard,
    },
];

/// Alternate names accepted on the command line.
const ALIASES: [(&str, &str); 2] = [("doeblin-d3", "doeblin-chain"), ("sliced-non-lattice", "sliced-AL-non-lattice")];

pub fn builtin(name: &str) -> Option<&'static Builtin> {
    let name = ALIASES.iter().find(|(a, _)| *a == name).map_or(name, |(_, n)| *n);
    BUILTINS.iter().find(|b| b.name == name)
}

fn config(
    name: &str,
    description: &str,
    semigroups: Vec<(&str, Semigroup<f64>)>,
    norm: Option<NormSpec<f64>>,
    checks: Vec<CheckSpec>,
) -> ScenarioConfig {
    let cone = semigroups[0].1.cone().spec();
    ScenarioConfig {
        name: name.into(),
        description: description.into(),
        cone,
        norm,
        semigroups: semigroups
            .into_iter()
            .map(|(n, sg)| (n.to_string(), SemigroupSource::literal(sg.kind(), sg.matrix())))
            .collect::<BTreeMap<_, _>>(),
        checks,
        window: DEFAULT_WINDOW,
        tol: DEFAULT_TOL,
        seed: None,
    }
}

fn doubly_stochastic() -> ScenarioConfig {
    let a = builders::doubly_stochastic(1.0).expect("builtin");
    let b = builders::doubly_stochastic(2.0).expect("builtin");
    let mut cfg = config(
        "doubly-stochastic",
        "Doubly stochastic semigroups with rates 1 and 2: same limit, no pointwise order.",
        vec![("S1", a), ("S2", b)],
        Some(NormSpec::L1),
        vec![
            CheckSpec::new(CheckKind::Positivity).on("S1"),
            CheckSpec::new(CheckKind::Positivity).on("S2"),
            CheckSpec::new(CheckKind::MeanErgodic).on("S1").tol(1e-8),
            CheckSpec::new(CheckKind::StrongLimit).on("S1").tol(1e-10).param("expect_rank", 1.0),
            CheckSpec::new(CheckKind::Equivalence).on("S1").against("S2"),
            CheckSpec::new(CheckKind::MixedSignDifference).on("S1").against("S2").param("t", 1.0),
        ],
    );
    cfg.window = [10.0, 50.0];
    cfg
}

fn doeblin_chain() -> ScenarioConfig {
    let t = builders::doeblin_chain(0.1).expect("builtin");
    config(
        "doeblin-chain",
        "Doeblin chain with δ = 0.1 on three states.",
        vec![("T", t)],
        Some(NormSpec::L1),
        vec![
            CheckSpec::new(CheckKind::Positivity).on("T"),
            CheckSpec::new(CheckKind::MeanErgodic).on("T").tol(1e-8),
            CheckSpec::new(CheckKind::StrongLimit).on("T").tol(1e-10).param("expect_rank", 1.0),
            CheckSpec::new(CheckKind::UniversalLowerBound).on("T").param("min_beta", 0.3),
            CheckSpec::new(CheckKind::Pipeline)
                .on("T")
                .mode(PipelineMode::Universal)
                .tol(1e-9)
                .param("expect_rank", 1.0)
                .param("min_beta", 0.3),
        ],
    )
}

fn swap_matrix() -> ScenarioConfig {
    config(
        "swap-matrix",
        "The swap is mean ergodic but its powers alternate forever.",
        vec![("T", builders::swap().expect("builtin"))],
        Some(NormSpec::L1),
        vec![
            CheckSpec::new(CheckKind::MeanErgodic).on("T").tol(1e-8),
            CheckSpec::new(CheckKind::StrongLimit).on("T").tol(1e-10),
        ],
    )
}

fn jordan_block() -> ScenarioConfig {
    config(
        "jordan-block",
        "Unipotent Jordan block: Cesàro means grow linearly.",
        vec![("T", builders::jordan_block().expect("builtin"))],
        Some(NormSpec::L1),
        vec![
            CheckSpec::new(CheckKind::Positivity).on("T"),
            CheckSpec::new(CheckKind::MeanErgodic).on("T").tol(1e-8).expect_failure(),
        ],
    )
}

fn centred_cone() -> ScenarioConfig {
    let sg = builders::centred_contraction(&[1.5, 0.5, 0.0], &[0.6, 0.2, 0.1], 0.5).expect("builtin");
    let norm = sg.norm().clone();
    let mut cfg = config(
        "centred-cone",
        "Contraction toward u on the cone ⟨u′, y⟩ ≥ ‖Qy‖ with the max-type norm.",
        vec![("T", sg)],
        Some(norm),
        vec![
            CheckSpec::new(CheckKind::AdditiveNorm).tol(1e-10),
            CheckSpec::new(CheckKind::Positivity).on("T"),
            CheckSpec::new(CheckKind::StrongLimit).on("T").tol(1e-10).param("expect_rank", 1.0),
            CheckSpec::new(CheckKind::MarkovRenorm).on("T").tol(1e-8),
        ],
    );
    cfg.seed = Some(7);
    cfg
}

fn sliced_non_lattice() -> ScenarioConfig {
    let sg = builders::sliced_relaxation(1.0).expect("builtin");
    let mut cfg = config(
        "sliced-AL-non-lattice",
        "Sliced orthant {x ≥ 0 : x₁ + x₂ ≥ x₃} with ℓ1: additive but not a lattice.",
        vec![("T", sg)],
        Some(NormSpec::L1),
        vec![
            CheckSpec::new(CheckKind::AdditiveNorm).tol(1e-10),
            CheckSpec::new(CheckKind::NonLattice),
            CheckSpec::new(CheckKind::Positivity).on("T"),
            CheckSpec::new(CheckKind::StrongLimit).on("T").tol(1e-10).param("expect_rank", 1.0),
        ],
    );
    cfg.seed = Some(11);
    cfg
}

fn depolarizing() -> ScenarioConfig {
    let sg = builders::depolarizing_channel(0.3, 2).expect("builtin");
    config(
        "depolarizing-channel",
        "Depolarizing channel ρ ↦ 0.7ρ + 0.3·tr(ρ)I/2.",
        vec![("T", sg)],
        Some(NormSpec::Trace),
        vec![
            CheckSpec::new(CheckKind::Positivity).on("T"),
            CheckSpec::new(CheckKind::StrongLimit).on("T").tol(1e-10).param("expect_rank", 1.0),
            CheckSpec::new(CheckKind::Pipeline)
                .on("T")
                .mode(PipelineMode::Universal)
                .tol(1e-9)
                .param("expect_rank", 1.0)
                .param("min_beta", 0.3),
        ],
    )
}

fn mean_lower_bound_only() -> ScenarioConfig {
    let sg = builders::mixed_cyclic(0.0).expect("builtin");
    config(
        "mean-lower-bound-only",
        "Cyclic shift: Cesàro means converge to the uniform projection, orbits do not.",
        vec![("T", sg)],
        Some(NormSpec::L1),
        vec![
            CheckSpec::new(CheckKind::MeanLowerBoundOnly).on("T"),
            CheckSpec::new(CheckKind::MeanErgodic).on("T").tol(1e-8),
            CheckSpec::new(CheckKind::Pipeline)
                .on("T")
                .mode(PipelineMode::UniversalMean)
                .tol(1e-9)
                .param("expect_rank", 1.0),
        ],
    )
}

fn dominating_converges() -> ScenarioConfig {
    let (t, s) = builders::dominating_pair(0.1, 0.3).expect("builtin");
    config(
        "dominating-converges",
        "A chain that asymptotically dominates a convergent one converges to the same limit.",
        vec![("T", t), ("S", s)],
        Some(NormSpec::L1),
        vec![
            CheckSpec::new(CheckKind::Domination).on("T").against("S"),
            CheckSpec::new(CheckKind::DominatingConvergence).on("T").against("S").tol(1e-10),
        ],
    )
}

fn scaled_bounds_guard() -> ScenarioConfig {
    let sg = builders::scaled_bounds().expect("builtin");
    config(
        "scaled-bounds-counterexample-guard",
        "diag(1, 1/2) converges, but lower bounds of e₂ vanish: certification must refuse.",
        vec![("T", sg)],
        Some(NormSpec::L1),
        vec![
            CheckSpec::new(CheckKind::StrongLimit).on("T").tol(1e-10),
            CheckSpec::new(CheckKind::UniversalLowerBound).on("T").expect_failure(),
            CheckSpec::new(CheckKind::Pipeline)
                .on("T")
                .mode(PipelineMode::Universal)
                .tol(1e-9)
                .expect_failure(),
        ],
    )
}
