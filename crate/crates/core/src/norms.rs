//! Norms on ordered spaces: evaluation, duals, operator norms, additivity and
//! renormings by strictly positive functionals.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone_geometry::decompose::{base_norm, centred_psi_scale, decomposition_constant, psd_sqrt_pair};
use crate::cone_geometry::{positive_decompose, Cone, Functional};
use crate::error::{LabError, Result};
use crate::linalg::{lstsq, norm1, norm_inf, smat, spectral_norm, svec_order, sym_eig};
use crate::scalar::Scalar;

/// A norm on the ambient space.
///
/// `Trace` acts on symmetric vectorizations. `CentredMax` is
/// `max(‖u‖₂·|⟨u′,x⟩|, ‖x − ⟨u′,x⟩u‖₂)`. `PsiBase` is the base norm
/// `inf{⟨ψ, y + z⟩ : x = y − z, y, z ∈ K}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum NormSpec<T: Scalar> {
    L1,
    L2,
    Linf,
    WeightedL1 { weights: Vec<T> },
    Trace,
    CentredMax { u: Vec<T>, u_prime: Vec<T> },
    PsiBase { psi: Vec<T>, cone: Cone<T> },
}

impl<T: Scalar> NormSpec<T> {
    pub fn name(&self) -> &'static str {
        match self {
            NormSpec::L1 => "l1",
            NormSpec::L2 => "l2",
            NormSpec::Linf => "linf",
            NormSpec::WeightedL1 { .. } => "weighted-l1",
            NormSpec::Trace => "trace",
            NormSpec::CentredMax { .. } => "centred-max",
            NormSpec::PsiBase { .. } => "psi-base",
        }
    }

    /// The max-type norm adapted to a centred cone.
    pub fn centred_max(cone: &Cone<T>) -> Result<Self> {
        match cone {
            Cone::Centred(c) => Ok(NormSpec::CentredMax {
                u: c.u().iter().copied().collect(),
                u_prime: c.u_prime().iter().copied().collect(),
            }),
            _ => Err(LabError::InvalidNorm("centred-max needs a centred cone".into())),
        }
    }

    pub fn psi_base(psi: DVector<T>, cone: Cone<T>) -> Result<Self> {
        cone.check_dim(&psi, "base-norm functional")?;
        Ok(NormSpec::PsiBase {
            psi: psi.iter().copied().collect(),
            cone,
        })
    }

    /// Natural default norm for a cone.
    pub fn default_for(cone: &Cone<T>) -> Self {
        match cone {
            Cone::Psd { .. } => NormSpec::Trace,
            Cone::Centred(_) => NormSpec::centred_max(cone).expect("centred"),
            _ => NormSpec::L1,
        }
    }

    /// Validates the norm's own data against the ambient dimension.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let mismatch = |found| LabError::DimensionMismatch {
            context: "norm",
            expected: dim,
            found,
        };
        match self {
            NormSpec::WeightedL1 { weights } => {
                if weights.len() != dim {
                    return Err(mismatch(weights.len()));
                }
                if weights.iter().any(|w| !(*w > T::zero()) || !w.finite()) {
                    return Err(LabError::InvalidNorm("weights must be positive and finite".into()));
                }
            }
            NormSpec::Trace => {
                if svec_order(dim).is_none() {
                    return Err(LabError::InvalidNorm(format!(
                        "trace norm needs a symmetric-vectorized dimension, got {dim}"
                    )));
                }
            }
            NormSpec::CentredMax { u, u_prime } => {
                if u.len() != dim {
                    return Err(mismatch(u.len()));
                }
                if u_prime.len() != dim {
                    return Err(mismatch(u_prime.len()));
                }
            }
            NormSpec::PsiBase { psi, cone } => {
                if psi.len() != dim {
                    return Err(mismatch(psi.len()));
                }
                if cone.dim() != dim {
                    return Err(mismatch(cone.dim()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn eval(&self, x: &DVector<T>) -> Result<T> {
        self.check_dim(x.len())?;
        Ok(match self {
            NormSpec::L1 => x.iter().fold(T::zero(), |s, v| s + v.abs()),
            NormSpec::L2 => x.norm(),
            NormSpec::Linf => x.iter().fold(T::zero(), |s, v| s.max(v.abs())),
            NormSpec::WeightedL1 { weights } => x
                .iter()
                .zip(weights)
                .fold(T::zero(), |s, (v, w)| s + v.abs() * *w),
            NormSpec::Trace => {
                let n = svec_order(x.len()).expect("checked");
                let (vals, _) = sym_eig(&smat(x, n));
                vals.iter().fold(T::zero(), |s, v| s + v.abs())
            }
            NormSpec::CentredMax { u, u_prime } => {
                let u = DVector::from_row_slice(u);
                let up = DVector::from_row_slice(u_prime);
                let a = up.dot(x);
                (u.norm() * a.abs()).max((x - &u * a).norm())
            }
            NormSpec::PsiBase { psi, cone } => base_norm(x, cone, &DVector::from_row_slice(psi))?,
        })
    }

    /// Dual norm `sup{⟨φ,x⟩ : ‖x‖ ≤ 1}` of a functional.
    pub fn dual(&self, phi: &DVector<T>) -> Result<T> {
        self.check_dim(phi.len())?;
        Ok(match self {
            NormSpec::L1 => phi.iter().fold(T::zero(), |s, v| s.max(v.abs())),
            NormSpec::L2 => phi.norm(),
            NormSpec::Linf => phi.iter().fold(T::zero(), |s, v| s + v.abs()),
            NormSpec::WeightedL1 { weights } => phi
                .iter()
                .zip(weights)
                .fold(T::zero(), |s, (v, w)| s.max(v.abs() / *w)),
            NormSpec::Trace => {
                let n = svec_order(phi.len()).expect("checked");
                spectral_norm(&smat(phi, n))
            }
            NormSpec::CentredMax { u, u_prime } => {
                let u = DVector::from_row_slice(u);
                let up = DVector::from_row_slice(u_prime);
                let proj = phi - &up * (phi.dot(&up) / up.norm_squared());
                phi.dot(&u).abs() / u.norm() + proj.norm()
            }
            NormSpec::PsiBase { psi, cone } => {
                let psi = DVector::from_row_slice(psi);
                match cone {
                    Cone::Psd { n } => {
                        let (_, si) = psd_sqrt_pair(&psi, *n)?;
                        spectral_norm(&(&si * smat(phi, *n) * &si))
                    }
                    Cone::Centred(c) => {
                        let scale = centred_psi_scale(c, &psi).ok_or_else(|| LabError::UnsupportedPair {
                            cone: "centred".into(),
                            norm: "psi-base".into(),
                        })?;
                        let up = c.u_prime();
                        let proj = phi - up * (phi.dot(up) / up.norm_squared());
                        (phi.dot(c.u()).abs() + proj.norm()) / scale
                    }
                    _ => {
                        let p = cone.polyhedral().expect("finitely generated");
                        p.generators()
                            .iter()
                            .map(|g| phi.dot(g).abs() / psi.dot(g))
                            .fold(T::zero(), |a, b| a.max(b))
                    }
                }
            }
        })
    }

    /// Induced operator norm of a linear map.
    ///
    /// Exact for ℓ1, ℓ2, ℓ∞, weighted ℓ1, base norms over finitely generated
    /// cones, and the trace norm of positive maps. Otherwise a maximum over
    /// sampled extreme points of the unit ball, which bounds the norm from below.
    pub fn operator_norm(&self, m: &DMatrix<T>, cone: &Cone<T>) -> Result<T> {
        let d = cone.dim();
        self.check_dim(d)?;
        if m.nrows() != d || m.ncols() != d {
            return Err(LabError::DimensionMismatch {
                context: "operator norm",
                expected: d,
                found: m.nrows(),
            });
        }
        match self {
            NormSpec::L1 => return Ok(norm1(m)),
            NormSpec::Linf => return Ok(norm_inf(m)),
            NormSpec::L2 => return Ok(spectral_norm(m)),
            NormSpec::WeightedL1 { weights } => {
                let w = DVector::from_row_slice(weights);
                let scaled = DMatrix::from_fn(d, d, |i, j| w[i] * m[(i, j)] / w[j]);
                return Ok(norm1(&scaled));
            }
            NormSpec::Trace => {
                if let Cone::Psd { n } = cone {
                    let positive = cone
                        .probe_rays(4 * d, 11)
                        .iter()
                        .all(|r| cone.contains(&(m * r), T::lit(1e-10)).unwrap_or(false));
                    if positive {
                        let id = crate::linalg::svec(&DMatrix::<T>::identity(*n, *n));
                        let adj = m.transpose() * id;
                        let (vals, _) = sym_eig(&smat(&adj, *n));
                        return Ok(vals.iter().fold(T::zero(), |a, b| a.max(*b)));
                    }
                }
            }
            _ => {}
        }
        // Extreme points of the unit ball.
        let points: Vec<DVector<T>> = match self {
            NormSpec::CentredMax { u, u_prime } => {
                let c = crate::cone_geometry::CentredCone::new(DVector::from_row_slice(u), DVector::from_row_slice(u_prime))?;
                let uh = c.u() / c.u().norm();
                let mut pts = Vec::new();
                let dirs = Cone::Centred(c.clone()).sampled_rays(256, 5);
                for b in c.kernel_basis().column_iter() {
                    pts.push(&uh + b);
                    pts.push(&uh - b);
                }
                for r in dirs {
                    let (_, w) = c.split(&r);
                    if w.norm() > T::zero() {
                        pts.push(&uh + &w / w.norm());
                    }
                }
                pts
            }
            NormSpec::PsiBase { psi, cone: base_cone } => {
                let psi = DVector::from_row_slice(psi);
                base_cone
                    .probe_rays(256, 5)
                    .into_iter()
                    .map(|g| {
                        let s = psi.dot(&g);
                        g / s
                    })
                    .collect()
            }
            _ => {
                let mut pts = Vec::new();
                for g in cone.probe_rays(256, 5) {
                    let s = self.eval(&g)?;
                    pts.push(g / s);
                }
                pts
            }
        };
        let mut best = T::zero();
        for p in points {
            let np = self.eval(&p)?;
            if np > T::zero() {
                best = best.max(self.eval(&(m * &p))? / np);
            }
        }
        Ok(best)
    }
}

/// Largest relative violation of `‖y + z‖ = ‖y‖ + ‖z‖` over sampled `y, z ∈ K`.
pub fn additivity_defect<T: Scalar>(norm: &NormSpec<T>, cone: &Cone<T>, samples: usize, seed: u64) -> Result<T> {
    norm.check_dim(cone.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rays = cone.probe_rays(8, seed);
    let mut worst = T::zero();
    let mut check = |y: &DVector<T>, z: &DVector<T>| -> Result<()> {
        let ny = norm.eval(y)?;
        let nz = norm.eval(z)?;
        let denom = ny + nz;
        if denom > T::zero() {
            let d = (norm.eval(&(y + z))? - denom).abs() / denom;
            worst = worst.max(d);
        }
        Ok(())
    };
    for i in 0..rays.len() {
        for j in i + 1..rays.len().min(i + 4) {
            check(&rays[i], &rays[j])?;
        }
    }
    for _ in 0..samples {
        let y = cone.random_element(&mut rng);
        let z = cone.random_element(&mut rng);
        check(&y, &z)?;
    }
    Ok(worst)
}

/// The norm functional `𝟙` and how well it reproduces the norm on the cone.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormFunctionalResult<T: Scalar> {
    pub one: Functional<T>,
    /// `max |⟨𝟙,g⟩ − ‖g‖|` over probe rays, combined with the sampled additivity defect.
    pub residual: T,
}

/// The functional `𝟙 ∈ K*` with `⟨𝟙, x⟩ = ‖x‖` on the cone.
///
/// Fails with [`LabError::NotAdditive`] when no such functional fits.
pub fn norm_functional<T: Scalar>(norm: &NormSpec<T>, cone: &Cone<T>) -> Result<NormFunctionalResult<T>> {
    norm.check_dim(cone.dim())?;
    let tol = T::lit(1e-8);
    let rays = cone.probe_rays(16, 7);
    let fit = |phi: DVector<T>| -> Result<NormFunctionalResult<T>> {
        let mut residual = T::zero();
        for g in &rays {
            residual = residual.max((phi.dot(g) - norm.eval(g)?).abs());
        }
        Ok(NormFunctionalResult {
            one: Functional::new(phi)?,
            residual,
        })
    };
    match (norm, cone) {
        (NormSpec::PsiBase { psi, .. }, _) => return fit(DVector::from_row_slice(psi)),
        (NormSpec::CentredMax { u, u_prime }, Cone::Centred(_)) => {
            let un = DVector::from_row_slice(u).norm();
            if un < T::one() - tol {
                return Err(LabError::NotAdditive {
                    residual: (T::one() - un).to_f64(),
                });
            }
            return fit(DVector::from_row_slice(u_prime) * un);
        }
        _ => {}
    }
    let r = DMatrix::from_fn(rays.len(), cone.dim(), |i, j| rays[i][j]);
    let vals = DVector::from_iterator(rays.len(), rays.iter().map(|g| norm.eval(g).unwrap_or(T::zero())));
    let phi = lstsq(&r, &vals);
    let defect = additivity_defect(norm, cone, 64, 13)?;
    let mut out = fit(phi)?;
    out.residual = out.residual.max(defect);
    if out.residual > tol {
        return Err(LabError::NotAdditive {
            residual: out.residual.to_f64(),
        });
    }
    Ok(out)
}

/// `inf{‖y‖ + ‖z‖ : x = y − z, y, z ∈ K}`.
pub fn base_norm_value<T: Scalar>(x: &DVector<T>, cone: &Cone<T>, norm: &NormSpec<T>) -> Result<T> {
    Ok(positive_decompose(x, cone, norm)?.cost)
}

/// Result of renorming by a strictly positive functional.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PsiRenorm<T: Scalar> {
    pub norm: NormSpec<T>,
    /// `m = inf{⟨ψ,x⟩ : x ∈ K, ‖x‖ = 1}`; `m‖x‖ ≤ ‖x‖_ψ`.
    pub lower: T,
    /// `2C‖ψ‖_*` with `C` the sampled decomposition constant; `‖x‖_ψ ≤ upper·‖x‖`.
    pub upper: T,
    pub decomposition_constant: T,
}

/// Margin `inf{⟨ψ,x⟩ : x ∈ K, ‖x‖ = 1}` of `ψ` on the cone.
///
/// Exact for finitely generated cones and for the PSD cone with the trace
/// norm; a minimum over sampled extreme rays otherwise.
pub fn psi_margin<T: Scalar>(psi: &DVector<T>, cone: &Cone<T>, norm: &NormSpec<T>) -> Result<T> {
    cone.check_dim(psi, "renorming functional")?;
    if let (Cone::Psd { n }, NormSpec::Trace) = (cone, norm) {
        let (vals, _) = sym_eig(&smat(psi, *n));
        return Ok(vals.iter().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(*b)));
    }
    let mut m = T::max_value().unwrap_or(T::one());
    for g in cone.probe_rays(128, 17) {
        let ng = norm.eval(&g)?;
        m = m.min(psi.dot(&g) / ng);
    }
    Ok(m)
}

/// Base norm `‖·‖_ψ` for a strictly positive `ψ`, with equivalence constants.
pub fn psi_renorm<T: Scalar>(psi: &DVector<T>, cone: &Cone<T>, norm: &NormSpec<T>) -> Result<PsiRenorm<T>> {
    norm.check_dim(cone.dim())?;
    let m = psi_margin(psi, cone, norm)?;
    if m <= T::feastol() * psi.norm().max(T::one()) {
        return Err(LabError::DegeneratePsi { margin: m.to_f64() });
    }
    if let Cone::Centred(c) = cone {
        if centred_psi_scale(c, psi).is_none() {
            return Err(LabError::UnsupportedPair {
                cone: "centred".into(),
                norm: "psi-base with a functional not parallel to the centring functional".into(),
            });
        }
    }
    let c = decomposition_constant(cone, norm, 64, 23)?;
    let upper = T::lit(2.0) * c * norm.dual(psi)?;
    Ok(PsiRenorm {
        norm: NormSpec::psi_base(psi.clone(), cone.clone())?,
        lower: m,
        upper,
        decomposition_constant: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svec;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn dual_norm_pairs_are_tight() {
        let x = v(&[0.5, -2.0, 1.0]);
        for norm in [NormSpec::L1, NormSpec::L2, NormSpec::Linf] {
            // Hölder: |⟨x,x⟩| ≤ ‖x‖·‖x‖_*.
            assert!(x.dot(&x) <= norm.eval(&x).unwrap() * norm.dual(&x).unwrap() + 1e-12);
        }
        assert_eq!(NormSpec::L1.dual(&x).unwrap(), 2.0);
        assert_eq!(NormSpec::Linf.dual(&x).unwrap(), 3.5);
    }

    #[test]
    fn trace_dual_is_spectral() {
        let phi = svec(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -3.0]));
        assert!((NormSpec::<f64>::Trace.dual(&phi).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norms_of_a_stochastic_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.1, 0.8]);
        let cone = Cone::orthant(2).unwrap();
        assert!((NormSpec::<f64>::L1.operator_norm(&m, &cone).unwrap() - 1.0).abs() < 1e-14);
        assert!((NormSpec::<f64>::Linf.operator_norm(&m, &cone).unwrap() - 1.1).abs() < 1e-14);
    }

    #[test]
    fn trace_operator_norm_of_depolarizing_map_is_one() {
        let p = 0.3;
        let id = svec(&DMatrix::<f64>::identity(2, 2));
        let m = DMatrix::identity(3, 3) * (1.0 - p) + (&id * 0.5) * id.transpose() * p;
        let cone = Cone::psd(2).unwrap();
        assert!((NormSpec::Trace.operator_norm(&m, &cone).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn additive_norms_have_functionals() {
        let orth = Cone::orthant(3).unwrap();
        assert!((norm_functional(&NormSpec::L1, &orth).unwrap().one.vector() - v(&[1.0, 1.0, 1.0])).norm() < 1e-10);
        let psd = Cone::psd(2).unwrap();
        let one = norm_functional(&NormSpec::Trace, &psd).unwrap().one.vector().clone();
        assert!((one - svec(&DMatrix::<f64>::identity(2, 2))).norm() < 1e-10);
        assert!(matches!(norm_functional(&NormSpec::L2, &orth), Err(LabError::NotAdditive { .. })));
        assert!(matches!(norm_functional(&NormSpec::Linf, &orth), Err(LabError::NotAdditive { .. })));
    }

    #[test]
    fn centred_max_is_additive_only_for_long_centres() {
        let long = Cone::centred(v(&[2.0, 0.0, 0.0]), v(&[0.5, 0.0, 0.0])).unwrap();
        let n = NormSpec::centred_max(&long).unwrap();
        assert!(additivity_defect(&n, &long, 200, 1).unwrap() < 1e-12);
        assert!((norm_functional(&n, &long).unwrap().one.vector() - v(&[1.0, 0.0, 0.0])).norm() < 1e-12);
        let short = Cone::centred(v(&[0.5, 0.0, 0.0]), v(&[2.0, 0.0, 0.0])).unwrap();
        let n = NormSpec::centred_max(&short).unwrap();
        assert!(additivity_defect(&n, &short, 200, 1).unwrap() > 1e-3);
        assert!(norm_functional(&n, &short).is_err());
    }

    #[test]
    fn psi_renorm_rejects_boundary_functionals() {
        let cone = Cone::orthant(2).unwrap();
        assert!(matches!(
            psi_renorm(&v(&[1.0, 0.0]), &cone, &NormSpec::L1),
            Err(LabError::DegeneratePsi { .. })
        ));
        let r = psi_renorm(&v(&[1.0, 2.0]), &cone, &NormSpec::L1).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-14);
        assert!((r.norm.eval(&v(&[1.0, -1.0])).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn norm_json_round_trip() {
        let n = NormSpec::psi_base(v(&[1.0, 2.0]), Cone::orthant(2).unwrap()).unwrap();
        let s = serde_json::to_string(&n).unwrap();
        let back: NormSpec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n);
        let l1: NormSpec<f64> = serde_json::from_str(r#"{"type":"l1"}"#).unwrap();
        assert_eq!(l1, NormSpec::L1);
    }
}
