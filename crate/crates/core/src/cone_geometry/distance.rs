//! Distance to the cone, `d₊(x) = inf_{y ∈ K} ‖x − y‖`, with a minimizer.

use nalgebra::DVector;

use super::cone::{Cone, PolyhedralCone};
use super::decompose::{centred_psi_scale, psd_sqrt_pair};
use super::lp::{LinearProgram, Relation};
use crate::error::{LabError, Result};
use crate::linalg::{smat, svec, sym_parts};
use crate::norms::NormSpec;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Projection<T: Scalar> {
    pub distance: T,
    /// A point of the cone attaining `distance`.
    pub nearest: DVector<T>,
}

fn unsupported<T: Scalar>(cone: &Cone<T>, norm: &NormSpec<T>) -> LabError {
    LabError::UnsupportedPair {
        cone: cone.kind().into(),
        norm: norm.name().into(),
    }
}

/// LP over generators for ℓ1, weighted ℓ1 and ℓ∞.
fn polyhedral_projection<T: Scalar>(p: &PolyhedralCone<T>, x: &DVector<T>, norm: &NormSpec<T>) -> Result<DVector<T>> {
    let g = p.generator_matrix();
    let (d, k) = g.shape();
    let (nt, weights): (usize, Vec<T>) = match norm {
        NormSpec::L1 => (d, vec![T::one(); d]),
        NormSpec::WeightedL1 { weights } => (d, weights.clone()),
        NormSpec::Linf => (1, vec![T::one()]),
        _ => unreachable!("caller checks the norm"),
    };
    let nv = k + nt;
    let mut lp = LinearProgram::new(nv);
    let mut c = vec![T::zero(); nv];
    c[k..].copy_from_slice(&weights);
    lp.minimize(c);
    for i in 0..d {
        let ti = if nt == 1 { k } else { k + i };
        for sign in [T::one(), -T::one()] {
            let mut row = vec![T::zero(); nv];
            for j in 0..k {
                row[j] = sign * g[(i, j)];
            }
            row[ti] = T::one();
            lp.constrain(row, Relation::Ge, sign * x[i]);
        }
    }
    let s = lp.solve_optimal("distance program")?;
    Ok(&g * DVector::from_row_slice(&s.x[..k]))
}

/// Nearest point of the cone and the distance to it.
pub fn project_to_cone<T: Scalar>(x: &DVector<T>, cone: &Cone<T>, norm: &NormSpec<T>) -> Result<Projection<T>> {
    cone.check_dim(x, "distance to cone")?;
    norm.check_dim(cone.dim())?;
    let nearest = match (cone, norm) {
        (Cone::Orthant { .. }, NormSpec::L1 | NormSpec::L2 | NormSpec::Linf | NormSpec::WeightedL1 { .. }) => {
            x.map(|v| v.max(T::zero()))
        }
        (Cone::Orthant { .. }, NormSpec::PsiBase { psi, .. }) => {
            if psi.iter().any(|p| *p <= T::zero()) {
                return Err(LabError::DegeneratePsi { margin: 0.0 });
            }
            x.map(|v| v.max(T::zero()))
        }
        (Cone::Psd { n }, NormSpec::Trace | NormSpec::L2) => svec(&sym_parts(&smat(x, *n)).0),
        (Cone::Psd { n }, NormSpec::PsiBase { psi, .. }) => {
            let psi = DVector::from_row_slice(psi);
            let (s, si) = psd_sqrt_pair(&psi, *n)?;
            let (_, neg) = sym_parts(&(&s * smat(x, *n) * &s));
            x + svec(&(&si * neg * &si))
        }
        (Cone::Centred(c), NormSpec::L2) => {
            if !c.is_circular() {
                return Err(LabError::UnsupportedPair {
                    cone: "centred (functional not parallel to the centre)".into(),
                    norm: "l2".into(),
                });
            }
            let un = c.u().norm();
            let uhat = c.u() / un;
            let a = uhat.dot(x);
            let w = x - &uhat * a;
            let wn = w.norm();
            let kappa = un;
            if a >= kappa * wn {
                x.clone()
            } else if kappa * a <= -wn {
                DVector::zeros(x.len())
            } else {
                // Boundary ray direction (κ, ŵ)/√(1+κ²) in the (û, ŵ) plane.
                let s = T::one() + kappa * kappa;
                let coef = (kappa * a + wn) / s;
                let what = if wn > T::zero() { &w / wn } else { DVector::zeros(x.len()) };
                (&uhat * kappa + what) * coef
            }
        }
        (Cone::Centred(c), NormSpec::CentredMax { .. }) => {
            let (a, w) = c.split(x);
            let wn = w.norm();
            if a >= wn {
                x.clone()
            } else {
                let kappa = c.u().norm();
                let s = ((wn + kappa * a) / (T::one() + kappa)).max(T::zero());
                let what = if wn > T::zero() { &w / wn } else { DVector::zeros(x.len()) };
                c.u() * s + what * s.min(wn)
            }
        }
        (Cone::Centred(c), NormSpec::PsiBase { psi, .. }) => {
            let psi = DVector::from_row_slice(psi);
            centred_psi_scale(c, &psi).ok_or_else(|| unsupported(cone, norm))?;
            // ‖x − y‖_ψ = c·max(|a − s|, ‖w − w_y‖); the CentredMax construction with κ = 1.
            let (a, w) = c.split(x);
            let wn = w.norm();
            if a >= wn {
                x.clone()
            } else {
                let s = ((wn + a) * T::lit(0.5)).max(T::zero());
                let what = if wn > T::zero() { &w / wn } else { DVector::zeros(x.len()) };
                c.u() * s + what * s.min(wn)
            }
        }
        (Cone::Polyhedral(_) | Cone::Sliced(_), NormSpec::L1 | NormSpec::Linf | NormSpec::WeightedL1 { .. }) => {
            let p = cone.polyhedral().expect("finitely generated");
            polyhedral_projection(&p, x, norm)?
        }
        (Cone::Polyhedral(_) | Cone::Sliced(_), NormSpec::PsiBase { psi, .. }) => {
            let p = cone.polyhedral().expect("finitely generated");
            let psi = DVector::from_row_slice(psi);
            let g = p.generator_matrix();
            let (d, k) = g.shape();
            // x + Gβ = Gλ, minimize ⟨ψ, Gβ⟩.
            let mut lp = LinearProgram::new(2 * k);
            let mut c = vec![T::zero(); 2 * k];
            for j in 0..k {
                c[k + j] = psi.dot(&g.column(j));
            }
            lp.minimize(c);
            for i in 0..d {
                let mut row = vec![T::zero(); 2 * k];
                for j in 0..k {
                    row[j] = g[(i, j)];
                    row[k + j] = -g[(i, j)];
                }
                lp.constrain(row, Relation::Eq, x[i]);
            }
            let s = lp.solve_optimal("vector is outside the span of the cone")?;
            &g * DVector::from_row_slice(&s.x[..k])
        }
        _ => return Err(unsupported(cone, norm)),
    };
    let distance = norm.eval(&(x - &nearest))?;
    Ok(Projection { distance, nearest })
}

/// `d₊(x)`: distance from `x` to the cone.
pub fn distance_to_cone<T: Scalar>(x: &DVector<T>, cone: &Cone<T>, norm: &NormSpec<T>) -> Result<T> {
    project_to_cone(x, cone, norm).map(|p| p.distance)
}
