//! Splitting vectors into differences of cone elements, and the base norms
//! induced by strictly positive functionals.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cone::{CentredCone, Cone, PolyhedralCone};
use super::lp::{LinearProgram, Relation};
use crate::error::{LabError, Result};
use crate::linalg::{smat, svec, sym_apply, sym_parts};
use crate::norms::NormSpec;
use crate::scalar::Scalar;

/// `x = y − z` with `y, z ∈ K`.
#[derive(Debug, Clone)]
pub struct Decomposition<T: Scalar> {
    pub y: DVector<T>,
    pub z: DVector<T>,
    /// `‖y‖ + ‖z‖` in the requested norm.
    pub cost: T,
    /// Whether `cost` is the infimum over all decompositions.
    pub exact: bool,
}

fn unsupported<T: Scalar>(cone: &Cone<T>, norm: &NormSpec<T>) -> LabError {
    LabError::UnsupportedPair {
        cone: cone.kind().into(),
        norm: norm.name().into(),
    }
}

/// Centred split minimizing `⟨u′, y + z⟩`, which equals `max(|a|, ‖w‖)`.
pub(crate) fn centred_split<T: Scalar>(c: &CentredCone<T>, x: &DVector<T>) -> (DVector<T>, DVector<T>) {
    let (a, w) = c.split(x);
    let wn = w.norm();
    let d = x.len();
    if a >= wn {
        (x.clone(), DVector::zeros(d))
    } else if -a >= wn {
        (DVector::zeros(d), -x)
    } else {
        let what = &w / wn;
        let half = T::lit(0.5);
        let y = (c.u() + &what) * ((wn + a) * half);
        let z = (c.u() - &what) * ((wn - a) * half);
        (y, z)
    }
}

/// `Ψ^{1/2}` and `Ψ^{-1/2}` for a positive definite `Ψ`.
pub(crate) fn psd_sqrt_pair<T: Scalar>(psi: &DVector<T>, n: usize) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let p = smat(psi, n);
    let (vals, _) = crate::linalg::sym_eig(&p);
    let lmin = vals.iter().fold(T::max_value().unwrap_or(T::one()), |m, v| m.min(*v));
    if lmin <= T::feastol() {
        return Err(LabError::DegeneratePsi { margin: lmin.to_f64() });
    }
    Ok((
        sym_apply(&p, |l| l.sqrt()),
        sym_apply(&p, |l| T::one() / l.sqrt()),
    ))
}

/// `c` with `ψ = c·u′`, if such `c > 0` exists.
pub(crate) fn centred_psi_scale<T: Scalar>(c: &CentredCone<T>, psi: &DVector<T>) -> Option<T> {
    let s = psi.dot(c.u());
    let resid = (psi - c.u_prime() * s).norm();
    (s > T::zero() && resid <= T::lit(1e-9) * (T::one() + psi.norm())).then_some(s)
}

/// LP decomposition over generators minimizing `Σ cⱼ(λⱼ + μⱼ)`.
fn generator_split<T: Scalar>(
    p: &PolyhedralCone<T>,
    x: &DVector<T>,
    weights: &[T],
) -> Result<(DVector<T>, DVector<T>, T)> {
    let g = p.generator_matrix();
    let (d, k) = g.shape();
    let mut lp = LinearProgram::new(2 * k);
    let mut c = weights.to_vec();
    c.extend_from_slice(weights);
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
    let lam = DVector::from_row_slice(&s.x[..k]);
    let mu = DVector::from_row_slice(&s.x[k..]);
    Ok((&g * lam, &g * mu, s.objective))
}

/// Exact LP split for ℓ1, weighted ℓ1 and ℓ∞ norms over a polyhedral cone.
fn polyhedral_norm_split<T: Scalar>(
    p: &PolyhedralCone<T>,
    x: &DVector<T>,
    norm: &NormSpec<T>,
) -> Result<(DVector<T>, DVector<T>)> {
    let g = p.generator_matrix();
    let (d, k) = g.shape();
    let (ns, weights): (usize, Vec<T>) = match norm {
        NormSpec::L1 => (d, vec![T::one(); d]),
        NormSpec::WeightedL1 { weights } => (d, weights.clone()),
        NormSpec::Linf => (1, vec![T::one()]),
        _ => unreachable!("caller checks the norm"),
    };
    // Variables: λ (k), μ (k), s_y (ns), s_z (ns).
    let nv = 2 * k + 2 * ns;
    let mut lp = LinearProgram::new(nv);
    let mut c = vec![T::zero(); nv];
    for i in 0..ns {
        c[2 * k + i] = weights[i];
        c[2 * k + ns + i] = weights[i];
    }
    lp.minimize(c);
    for i in 0..d {
        let mut row = vec![T::zero(); nv];
        for j in 0..k {
            row[j] = g[(i, j)];
            row[k + j] = -g[(i, j)];
        }
        lp.constrain(row, Relation::Eq, x[i]);
        for (block, sblock) in [(0, 2 * k), (k, 2 * k + ns)] {
            let si = if ns == 1 { sblock } else { sblock + i };
            for sign in [T::one(), -T::one()] {
                let mut row = vec![T::zero(); nv];
                for j in 0..k {
                    row[block + j] = sign * g[(i, j)];
                }
                row[si] = -T::one();
                lp.constrain(row, Relation::Le, T::zero());
            }
        }
    }
    let s = lp.solve_optimal("vector is outside the span of the cone")?;
    let lam = DVector::from_row_slice(&s.x[..k]);
    let mu = DVector::from_row_slice(&s.x[k..2 * k]);
    Ok((&g * lam, &g * mu))
}

/// Minimal-cost decomposition `x = y − z`, `y, z ∈ K`.
pub fn positive_decompose<T: Scalar>(x: &DVector<T>, cone: &Cone<T>, norm: &NormSpec<T>) -> Result<Decomposition<T>> {
    cone.check_dim(x, "positive decomposition")?;
    norm.check_dim(cone.dim())?;
    let finish = |y: DVector<T>, z: DVector<T>, exact: bool| -> Result<Decomposition<T>> {
        let cost = norm.eval(&y)? + norm.eval(&z)?;
        Ok(Decomposition { y, z, cost, exact })
    };
    match (cone, norm) {
        (
            Cone::Orthant { .. },
            NormSpec::L1 | NormSpec::L2 | NormSpec::Linf | NormSpec::WeightedL1 { .. } | NormSpec::PsiBase { .. },
        ) => {
            let y = x.map(|v| v.max(T::zero()));
            let z = x.map(|v| (-v).max(T::zero()));
            finish(y, z, true)
        }
        (Cone::Psd { n }, NormSpec::Trace | NormSpec::L2) => {
            let (p, m) = sym_parts(&smat(x, *n));
            finish(svec(&p), svec(&m), true)
        }
        (Cone::Psd { n }, NormSpec::PsiBase { psi, .. }) => {
            let psi = DVector::from_row_slice(psi);
            let (s, si) = psd_sqrt_pair(&psi, *n)?;
            let xt = &s * smat(x, *n) * &s;
            let (p, m) = sym_parts(&xt);
            finish(svec(&(&si * p * &si)), svec(&(&si * m * &si)), true)
        }
        (Cone::Centred(c), NormSpec::CentredMax { .. } | NormSpec::L2) => {
            let (y, z) = centred_split(c, x);
            let exact = matches!(norm, NormSpec::CentredMax { .. }) && c.u().norm() >= T::one();
            finish(y, z, exact)
        }
        (Cone::Centred(c), NormSpec::PsiBase { psi, .. }) => {
            let psi = DVector::from_row_slice(psi);
            if centred_psi_scale(c, &psi).is_none() {
                return Err(unsupported(cone, norm));
            }
            let (y, z) = centred_split(c, x);
            finish(y, z, true)
        }
        (
            Cone::Polyhedral(_) | Cone::Sliced(_),
            NormSpec::L1 | NormSpec::Linf | NormSpec::WeightedL1 { .. },
        ) => {
            let p = cone.polyhedral().expect("finitely generated");
            let (y, z) = polyhedral_norm_split(&p, x, norm)?;
            finish(y, z, true)
        }
        (Cone::Polyhedral(_) | Cone::Sliced(_), NormSpec::PsiBase { psi, .. }) => {
            let p = cone.polyhedral().expect("finitely generated");
            let psi = DVector::from_row_slice(psi);
            let w: Vec<T> = p.generators().iter().map(|g| psi.dot(g)).collect();
            let (y, z, _) = generator_split(&p, x, &w)?;
            finish(y, z, true)
        }
        _ => Err(unsupported(cone, norm)),
    }
}

/// `inf {⟨ψ, y + z⟩ : x = y − z, y, z ∈ K}`.
pub fn base_norm<T: Scalar>(x: &DVector<T>, cone: &Cone<T>, psi: &DVector<T>) -> Result<T> {
    cone.check_dim(x, "base norm")?;
    cone.check_dim(psi, "base norm functional")?;
    match cone {
        Cone::Orthant { .. } => Ok(x.iter().zip(psi.iter()).fold(T::zero(), |s, (a, p)| s + a.abs() * *p)),
        Cone::Psd { n } => {
            let (s, _) = psd_sqrt_pair(psi, *n)?;
            let xt = &s * smat(x, *n) * &s;
            let (vals, _) = crate::linalg::sym_eig(&xt);
            Ok(vals.iter().fold(T::zero(), |a, v| a + v.abs()))
        }
        Cone::Centred(c) => {
            let scale = centred_psi_scale(c, psi).ok_or_else(|| LabError::UnsupportedPair {
                cone: "centred".into(),
                norm: "psi-base with a functional not parallel to the centring functional".into(),
            })?;
            let (a, w) = c.split(x);
            Ok(scale * a.abs().max(w.norm()))
        }
        Cone::Polyhedral(_) | Cone::Sliced(_) => {
            let p = cone.polyhedral().expect("finitely generated");
            let w: Vec<T> = p.generators().iter().map(|g| psi.dot(g)).collect();
            Ok(generator_split(&p, x, &w)?.2)
        }
    }
}

/// Sampled `max(‖y‖, ‖z‖) / ‖x‖` over minimal decompositions of random vectors.
pub fn decomposition_constant<T: Scalar>(cone: &Cone<T>, norm: &NormSpec<T>, samples: usize, seed: u64) -> Result<T> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = cone.dim();
    let mut worst = T::one();
    let mut probes: Vec<DVector<T>> = Vec::new();
    for r in cone.spanning_rays() {
        probes.push(r.clone());
        probes.push(-r);
    }
    for _ in 0..samples {
        probes.push(DVector::from_fn(d, |_, _| T::lit(rng.random::<f64>() * 2.0 - 1.0)));
    }
    for x in probes {
        let nx = norm.eval(&x)?;
        if nx <= T::feastol() {
            continue;
        }
        let dec = positive_decompose(&x, cone, norm)?;
        let m = norm.eval(&dec.y)?.max(norm.eval(&dec.z)?);
        worst = worst.max(m / nx);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn centred_split_attains_closed_form_cost() {
        let c = CentredCone::new(v(&[1.0, 0.0, 0.0]), v(&[1.0, 0.0, 0.0])).unwrap();
        let x = v(&[0.2, 0.6, -0.8]);
        let (y, z) = centred_split(&c, &x);
        assert!((&y - &z - &x).norm() < 1e-14);
        assert!(c.contains(&y, 1e-12) && c.contains(&z, 1e-12));
        assert!((y[0] + z[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sliced_cone_decomposition_is_feasible_and_minimal() {
        let cone = Cone::sliced(Cone::orthant(3).unwrap(), v(&[1.0, 1.0, -1.0])).unwrap();
        let x = v(&[0.3, -0.7, 0.2]);
        let d = positive_decompose(&x, &cone, &NormSpec::L1).unwrap();
        assert!((&d.y - &d.z - &x).norm() < 1e-9);
        assert!(cone.contains(&d.y, 1e-9).unwrap() && cone.contains(&d.z, 1e-9).unwrap());
        // Never better than the unconstrained lattice split.
        assert!(d.cost >= x.abs().sum() - 1e-9);
    }

    #[test]
    fn base_norm_of_orthant_is_weighted_l1() {
        let cone = Cone::orthant(3).unwrap();
        let psi = v(&[1.0, 2.0, 3.0]);
        assert!((base_norm(&v(&[1.0, -1.0, 1.0]), &cone, &psi).unwrap() - 6.0).abs() < 1e-14);
        let poly = Cone::from_generators(3, vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])]).unwrap();
        assert!((base_norm(&v(&[1.0, -1.0, 1.0]), &poly, &psi).unwrap() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn psd_base_norm_with_identity_is_trace_norm() {
        let cone = Cone::psd(2).unwrap();
        let psi = svec(&DMatrix::<f64>::identity(2, 2));
        let x = svec(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]));
        let expected = 2.0 * 5f64.sqrt();
        assert!((base_norm(&x, &cone, &psi).unwrap() - expected).abs() < 1e-12);
    }
}
