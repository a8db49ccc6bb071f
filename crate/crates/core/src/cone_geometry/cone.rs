use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dd;
use crate::error::{LabError, Result};
use crate::linalg::{nullspace, rank, smat, svec, svec_len, sym_eig};
use crate::scalar::Scalar;

/// Serializable description of a cone: only the defining data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ConeSpec<T: Scalar> {
    Orthant {
        dim: usize,
    },
    Polyhedral {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<Vec<T>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        halfspaces: Option<Vec<Vec<T>>>,
    },
    Centred {
        u: Vec<T>,
        u_prime: Vec<T>,
    },
    Psd {
        n: usize,
    },
    Sliced {
        base: Box<ConeSpec<T>>,
        phi: Vec<T>,
    },
}

/// Finitely generated pointed cone, kept in both descriptions.
///
/// Generators are the extreme rays at unit Euclidean length; halfspaces are
/// unit facet normals, `K = {x : h·x ≥ 0 ∀h}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralCone<T: Scalar> {
    dim: usize,
    generators: Vec<DVector<T>>,
    halfspaces: Vec<DVector<T>>,
}

impl<T: Scalar> PolyhedralCone<T> {
    pub fn from_generators(dim: usize, generators: Vec<DVector<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidCone("dimension must be positive".into()));
        }
        let mut gens = Vec::new();
        for g in generators {
            if g.len() != dim {
                return Err(LabError::DimensionMismatch {
                    context: "cone generator",
                    expected: dim,
                    found: g.len(),
                });
            }
            if !g.iter().all(|x| x.finite()) {
                return Err(LabError::NonFinite("cone generator"));
            }
            if g.norm() > T::feastol() {
                gens.push(g);
            }
        }
        if gens.is_empty() {
            return Err(LabError::InvalidCone("no non-zero generators".into()));
        }
        let halfspaces = dd::halfspaces_of_generators(dim, &gens)?;
        Self::from_halfspaces(dim, halfspaces)
    }

    pub fn from_halfspaces(dim: usize, halfspaces: Vec<DVector<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidCone("dimension must be positive".into()));
        }
        for h in &halfspaces {
            if !h.iter().all(|x| x.finite()) {
                return Err(LabError::NonFinite("cone halfspace"));
            }
        }
        let hs: Vec<DVector<T>> = halfspaces
            .into_iter()
            .filter(|h| h.norm() > T::feastol())
            .map(|h| h.normalize())
            .collect();
        let m = DMatrix::from_fn(hs.len(), dim, |i, j| hs[i][j]);
        if hs.is_empty() || rank(&m, T::lit(1e-9)) < dim {
            return Err(LabError::InvalidCone("cone is not pointed".into()));
        }
        let generators = dd::rays_of_halfspaces(dim, &hs)?;
        if generators.is_empty() {
            return Err(LabError::InvalidCone("cone is {0}".into()));
        }
        let halfspaces = dd::halfspaces_of_generators(dim, &generators)?;
        Ok(Self {
            dim,
            generators,
            halfspaces,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[DVector<T>] {
        &self.generators
    }

    pub fn halfspaces(&self) -> &[DVector<T>] {
        &self.halfspaces
    }

    /// Generators as the columns of a `dim x k` matrix.
    pub fn generator_matrix(&self) -> DMatrix<T> {
        DMatrix::from_columns(&self.generators)
    }

    pub fn contains(&self, x: &DVector<T>, tol: T) -> bool {
        self.halfspaces.iter().all(|h| h.dot(x) >= -tol)
    }

    pub fn dual_contains(&self, phi: &DVector<T>, tol: T) -> bool {
        self.generators.iter().all(|g| g.dot(phi) >= -tol)
    }

    pub fn is_generating(&self) -> bool {
        rank(&self.generator_matrix(), T::lit(1e-9)) == self.dim
    }
}

/// `{x : ⟨u′,x⟩ ≥ ‖x − ⟨u′,x⟩u‖₂}` for `⟨u′,u⟩ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentredCone<T: Scalar> {
    u: DVector<T>,
    u_prime: DVector<T>,
    /// Orthonormal basis of `ker u′`, one column per vector.
    kernel: DMatrix<T>,
}

impl<T: Scalar> CentredCone<T> {
    pub fn new(u: DVector<T>, u_prime: DVector<T>) -> Result<Self> {
        if u.len() != u_prime.len() {
            return Err(LabError::DimensionMismatch {
                context: "centred cone",
                expected: u.len(),
                found: u_prime.len(),
            });
        }
        if u.is_empty() {
            return Err(LabError::InvalidCone("dimension must be positive".into()));
        }
        if !u.iter().chain(u_prime.iter()).all(|x| x.finite()) {
            return Err(LabError::NonFinite("centred cone"));
        }
        let pairing = u_prime.dot(&u);
        let scale = T::one() + u.norm() * u_prime.norm();
        if (pairing - T::one()).abs() > T::lit(1e-9) * scale {
            return Err(LabError::InvalidCone(format!(
                "centre and functional must pair to 1, got {}",
                pairing
            )));
        }
        let row = DMatrix::from_row_slice(1, u.len(), u_prime.as_slice());
        let kernel = nullspace(&row, T::lit(1e-12));
        Ok(Self { u, u_prime, kernel })
    }

    pub fn u(&self) -> &DVector<T> {
        &self.u
    }

    pub fn u_prime(&self) -> &DVector<T> {
        &self.u_prime
    }

    pub fn kernel_basis(&self) -> &DMatrix<T> {
        &self.kernel
    }

    /// `(⟨u′,x⟩, x − ⟨u′,x⟩u)`.
    pub fn split(&self, x: &DVector<T>) -> (T, DVector<T>) {
        let a = self.u_prime.dot(x);
        (a, x - &self.u * a)
    }

    /// Whether `u′` is a multiple of `u`, so that `ker u′ ⟂ u`.
    pub fn is_circular(&self) -> bool {
        let un = self.u.norm();
        let target = &self.u / (un * un);
        (&self.u_prime - target).norm() <= T::lit(1e-9) * (T::one() + self.u_prime.norm())
    }

    pub fn contains(&self, x: &DVector<T>, tol: T) -> bool {
        let (a, w) = self.split(x);
        a >= w.norm() - tol
    }

    pub fn dual_contains(&self, phi: &DVector<T>, tol: T) -> bool {
        let up2 = self.u_prime.norm_squared();
        let proj = phi - &self.u_prime * (phi.dot(&self.u_prime) / up2);
        phi.dot(&self.u) >= proj.norm() - tol
    }
}

/// Sub-cone `{x ∈ base : ⟨φ,x⟩ ≥ 0}` of a finitely generated base cone.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedCone<T: Scalar> {
    base: Box<Cone<T>>,
    phi: DVector<T>,
    poly: PolyhedralCone<T>,
}

impl<T: Scalar> SlicedCone<T> {
    pub fn new(base: Cone<T>, phi: DVector<T>) -> Result<Self> {
        let base_poly = base
            .polyhedral()
            .ok_or_else(|| LabError::InvalidCone("sliced cone needs a finitely generated base".into()))?;
        if phi.len() != base.dim() {
            return Err(LabError::DimensionMismatch {
                context: "slicing functional",
                expected: base.dim(),
                found: phi.len(),
            });
        }
        let mut hs = base_poly.halfspaces().to_vec();
        hs.push(phi.clone());
        let poly = PolyhedralCone::from_halfspaces(base.dim(), hs)?;
        Ok(Self {
            base: Box::new(base),
            phi,
            poly,
        })
    }

    pub fn base(&self) -> &Cone<T> {
        &self.base
    }

    pub fn phi(&self) -> &DVector<T> {
        &self.phi
    }

    pub fn polyhedral(&self) -> &PolyhedralCone<T> {
        &self.poly
    }
}

/// A closed convex proper cone of a finite-dimensional real space.
///
/// PSD cones live on the symmetric vectorization of `n x n` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(try_from = "ConeSpec<T>", into = "ConeSpec<T>")]
pub enum Cone<T: Scalar> {
    Orthant { dim: usize },
    Polyhedral(PolyhedralCone<T>),
    Centred(CentredCone<T>),
    Psd { n: usize },
    Sliced(SlicedCone<T>),
}

impl<T: Scalar> Cone<T> {
    pub fn orthant(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidCone("dimension must be positive".into()));
        }
        Ok(Cone::Orthant { dim })
    }

    pub fn psd(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::InvalidCone("matrix order must be positive".into()));
        }
        Ok(Cone::Psd { n })
    }

    pub fn from_generators(dim: usize, generators: Vec<DVector<T>>) -> Result<Self> {
        PolyhedralCone::from_generators(dim, generators).map(Cone::Polyhedral)
    }

    pub fn from_halfspaces(dim: usize, halfspaces: Vec<DVector<T>>) -> Result<Self> {
        PolyhedralCone::from_halfspaces(dim, halfspaces).map(Cone::Polyhedral)
    }

    pub fn centred(u: DVector<T>, u_prime: DVector<T>) -> Result<Self> {
        CentredCone::new(u, u_prime).map(Cone::Centred)
    }

    pub fn sliced(base: Cone<T>, phi: DVector<T>) -> Result<Self> {
        SlicedCone::new(base, phi).map(Cone::Sliced)
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::Orthant { dim } => *dim,
            Cone::Polyhedral(p) => p.dim(),
            Cone::Centred(c) => c.u.len(),
            Cone::Psd { n } => svec_len(*n),
            Cone::Sliced(s) => s.poly.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Cone::Orthant { .. } => "orthant",
            Cone::Polyhedral(_) => "polyhedral",
            Cone::Centred(_) => "centred",
            Cone::Psd { .. } => "psd",
            Cone::Sliced(_) => "sliced",
        }
    }

    pub fn check_dim(&self, x: &DVector<T>, context: &'static str) -> Result<()> {
        if x.len() != self.dim() {
            return Err(LabError::DimensionMismatch {
                context,
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !x.iter().all(|v| v.finite()) {
            return Err(LabError::NonFinite(context));
        }
        Ok(())
    }

    /// Generator and halfspace description for finitely generated cones.
    pub fn polyhedral(&self) -> Option<PolyhedralCone<T>> {
        match self {
            Cone::Orthant { dim } => {
                let basis: Vec<DVector<T>> = (0..*dim)
                    .map(|i| {
                        let mut e = DVector::zeros(*dim);
                        e[i] = T::one();
                        e
                    })
                    .collect();
                Some(PolyhedralCone {
                    dim: *dim,
                    generators: basis.clone(),
                    halfspaces: basis,
                })
            }
            Cone::Polyhedral(p) => Some(p.clone()),
            Cone::Sliced(s) => Some(s.poly.clone()),
            Cone::Centred(_) | Cone::Psd { .. } => None,
        }
    }

    pub fn is_finitely_generated(&self) -> bool {
        matches!(self, Cone::Orthant { .. } | Cone::Polyhedral(_) | Cone::Sliced(_))
    }

    pub fn is_generating(&self) -> bool {
        match self {
            Cone::Orthant { .. } | Cone::Centred(_) | Cone::Psd { .. } => true,
            Cone::Polyhedral(p) => p.is_generating(),
            Cone::Sliced(s) => s.poly.is_generating(),
        }
    }

    /// Membership with absolute tolerance `tol`.
    pub fn contains(&self, x: &DVector<T>, tol: T) -> Result<bool> {
        self.check_dim(x, "cone membership")?;
        Ok(match self {
            Cone::Orthant { .. } => x.iter().all(|v| *v >= -tol),
            Cone::Polyhedral(p) => p.contains(x, tol),
            Cone::Sliced(s) => s.poly.contains(x, tol),
            Cone::Centred(c) => c.contains(x, tol),
            Cone::Psd { n } => {
                let (vals, _) = sym_eig(&smat(x, *n));
                vals.iter().all(|v| *v >= -tol)
            }
        })
    }

    /// Membership of `φ` in the dual cone `K* = {φ : ⟨φ,x⟩ ≥ 0 ∀x ∈ K}`.
    pub fn dual_contains(&self, phi: &DVector<T>, tol: T) -> Result<bool> {
        self.check_dim(phi, "dual cone membership")?;
        Ok(match self {
            Cone::Orthant { .. } => phi.iter().all(|v| *v >= -tol),
            Cone::Polyhedral(p) => p.dual_contains(phi, tol),
            Cone::Sliced(s) => s.poly.dual_contains(phi, tol),
            Cone::Centred(c) => c.dual_contains(phi, tol),
            Cone::Psd { n } => {
                let (vals, _) = sym_eig(&smat(phi, *n));
                vals.iter().all(|v| *v >= -tol)
            }
        })
    }

    /// Unit-length extreme rays spanning the ambient space.
    ///
    /// For finitely generated cones these are all the extreme rays.
    pub fn spanning_rays(&self) -> Vec<DVector<T>> {
        match self {
            Cone::Orthant { .. } | Cone::Polyhedral(_) | Cone::Sliced(_) => {
                self.polyhedral().expect("finitely generated").generators
            }
            Cone::Centred(c) => {
                let mut out = Vec::new();
                for b in c.kernel.column_iter() {
                    out.push((&c.u + b).normalize());
                    out.push((&c.u - b).normalize());
                }
                if out.is_empty() {
                    out.push(c.u.normalize());
                }
                out
            }
            Cone::Psd { n } => {
                let n = *n;
                let mut out = Vec::new();
                for i in 0..n {
                    let mut e = DMatrix::zeros(n, n);
                    e[(i, i)] = T::one();
                    out.push(svec(&e));
                }
                for i in 0..n {
                    for j in i + 1..n {
                        for s in [T::one(), -T::one()] {
                            let mut v = DVector::zeros(n);
                            v[i] = T::one();
                            v[j] = s;
                            out.push(svec(&(&v * v.transpose())).normalize());
                        }
                    }
                }
                out
            }
        }
    }

    /// Deterministic sample of `count` unit extreme rays (empty for finitely generated cones).
    pub fn sampled_rays(&self, count: usize, seed: u64) -> Vec<DVector<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Cone::Centred(c) => (0..count)
                .map(|_| {
                    let k = c.kernel.ncols();
                    if k == 0 {
                        return c.u.normalize();
                    }
                    let z = DVector::from_fn(k, |_, _| T::lit(rng.random::<f64>() * 2.0 - 1.0));
                    let b = &c.kernel * z.normalize();
                    (&c.u + b).normalize()
                })
                .collect(),
            Cone::Psd { n } => (0..count)
                .map(|_| {
                    let v = DVector::from_fn(*n, |_, _| T::lit(rng.random::<f64>() * 2.0 - 1.0)).normalize();
                    svec(&(&v * v.transpose()))
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Spanning rays followed by `extra` sampled extreme rays.
    pub fn probe_rays(&self, extra: usize, seed: u64) -> Vec<DVector<T>> {
        let mut out = self.spanning_rays();
        out.extend(self.sampled_rays(extra, seed));
        out
    }

    /// Random element of the cone.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> DVector<T> {
        let mut unif = || T::lit(rng.random::<f64>());
        match self {
            Cone::Orthant { dim } => DVector::from_fn(*dim, |_, _| unif()),
            Cone::Polyhedral(_) | Cone::Sliced(_) => {
                let p = self.polyhedral().expect("finitely generated");
                p.generators
                    .iter()
                    .fold(DVector::zeros(p.dim), |acc, g| acc + g * unif())
            }
            Cone::Centred(c) => {
                let k = c.kernel.ncols();
                let z = DVector::from_fn(k, |_, _| unif() * T::lit(2.0) - T::one());
                let w = &c.kernel * z;
                let s = w.norm() + unif();
                &c.u * s + w
            }
            Cone::Psd { n } => {
                let g = DMatrix::from_fn(*n, *n, |_, _| unif() * T::lit(2.0) - T::one());
                svec(&(&g * g.transpose()))
            }
        }
    }

    /// A point of the relative interior.
    pub fn interior_point(&self) -> DVector<T> {
        match self {
            Cone::Orthant { dim } => DVector::from_element(*dim, T::one()),
            Cone::Centred(c) => c.u.clone(),
            Cone::Psd { n } => svec(&DMatrix::identity(*n, *n)),
            _ => {
                let p = self.polyhedral().expect("finitely generated");
                p.generators.iter().fold(DVector::zeros(p.dim), |a, g| a + g)
            }
        }
    }

    pub fn spec(&self) -> ConeSpec<T> {
        self.clone().into()
    }
}

fn to_vecs<T: Scalar>(rows: Vec<Vec<T>>) -> Vec<DVector<T>> {
    rows.into_iter().map(DVector::from_vec).collect()
}

fn from_vecs<T: Scalar>(vs: &[DVector<T>]) -> Vec<Vec<T>> {
    vs.iter().map(|v| v.iter().copied().collect()).collect()
}

impl<T: Scalar> TryFrom<ConeSpec<T>> for Cone<T> {
    type Error = LabError;

    fn try_from(spec: ConeSpec<T>) -> Result<Self> {
        match spec {
            ConeSpec::Orthant { dim } => Cone::orthant(dim),
            ConeSpec::Psd { n } => Cone::psd(n),
            ConeSpec::Polyhedral {
                dim,
                generators,
                halfspaces,
            } => match (generators, halfspaces) {
                (Some(g), _) => Cone::from_generators(dim, to_vecs(g)),
                (None, Some(h)) => Cone::from_halfspaces(dim, to_vecs(h)),
                (None, None) => Err(LabError::InvalidCone(
                    "polyhedral cone needs generators or halfspaces".into(),
                )),
            },
            ConeSpec::Centred { u, u_prime } => {
                Cone::centred(DVector::from_vec(u), DVector::from_vec(u_prime))
            }
            ConeSpec::Sliced { base, phi } => {
                let base = Cone::try_from(*base)?;
                Cone::sliced(base, DVector::from_vec(phi))
            }
        }
    }
}

impl<T: Scalar> From<Cone<T>> for ConeSpec<T> {
    fn from(c: Cone<T>) -> Self {
        match c {
            Cone::Orthant { dim } => ConeSpec::Orthant { dim },
            Cone::Psd { n } => ConeSpec::Psd { n },
            Cone::Polyhedral(p) => ConeSpec::Polyhedral {
                dim: p.dim,
                generators: Some(from_vecs(&p.generators)),
                halfspaces: None,
            },
            Cone::Centred(c) => ConeSpec::Centred {
                u: c.u.iter().copied().collect(),
                u_prime: c.u_prime.iter().copied().collect(),
            },
            Cone::Sliced(s) => ConeSpec::Sliced {
                base: Box::new((*s.base).into()),
                phi: s.phi.iter().copied().collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn centred_cone_requires_unit_pairing() {
        assert!(Cone::centred(v(&[1.0, 0.0]), v(&[2.0, 0.0])).is_err());
        let c = Cone::centred(v(&[1.0, 0.0, 0.0]), v(&[1.0, 0.0, 0.0])).unwrap();
        assert!(c.contains(&v(&[1.0, 0.6, 0.8]), 1e-12).unwrap());
        assert!(!c.contains(&v(&[1.0, 0.7, 0.8]), 1e-12).unwrap());
    }

    #[test]
    fn centred_dual_is_self_dual_for_circular_unit_cone() {
        let c = Cone::centred(v(&[1.0, 0.0, 0.0]), v(&[1.0, 0.0, 0.0])).unwrap();
        for x in [v(&[1.0, 0.6, 0.8]), v(&[1.0, 1.0, 0.0]), v(&[2.0, -0.3, 0.1])] {
            assert_eq!(c.contains(&x, 1e-12).unwrap(), c.dual_contains(&x, 1e-12).unwrap());
        }
    }

    #[test]
    fn spanning_rays_lie_in_cone_and_span() {
        let cones = vec![
            Cone::orthant(3).unwrap(),
            Cone::psd(3).unwrap(),
            Cone::centred(v(&[1.0, 0.5, 0.0]), v(&[0.8, 0.4, 0.0])).unwrap(),
            Cone::from_generators(3, vec![v(&[1.0, 0.0, 1.0]), v(&[0.0, 1.0, 1.0]), v(&[-1.0, 0.0, 1.0]), v(&[0.0, -1.0, 1.0])]).unwrap(),
        ];
        for c in &cones {
            let rays = c.probe_rays(8, 3);
            for r in &rays {
                assert!(c.contains(r, 1e-9).unwrap(), "{} ray outside", c.kind());
            }
            let m = DMatrix::from_columns(&rays);
            assert_eq!(rank(&m, 1e-9), c.dim());
        }
    }

    #[test]
    fn sliced_orthant_is_not_a_lattice_cone() {
        let base = Cone::orthant(3).unwrap();
        let s = Cone::sliced(base, v(&[1.0, 1.0, -1.0])).unwrap();
        assert_eq!(s.polyhedral().unwrap().generators().len(), 4);
        assert!(s.is_generating());
        assert!(s.contains(&v(&[1.0, 0.0, 1.0]), 1e-12).unwrap());
        assert!(!s.contains(&v(&[0.0, 0.0, 1.0]), 1e-12).unwrap());
    }

    #[test]
    fn non_pointed_generators_are_rejected() {
        assert!(Cone::from_generators(2, vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0])]).is_err());
    }

    #[test]
    fn spec_round_trip_through_json() {
        let cones = vec![
            Cone::orthant(2).unwrap(),
            Cone::psd(2).unwrap(),
            Cone::centred(v(&[1.0, 0.0]), v(&[1.0, 0.0])).unwrap(),
            Cone::sliced(Cone::orthant(3).unwrap(), v(&[1.0, 1.0, -1.0])).unwrap(),
        ];
        for c in cones {
            let s = serde_json::to_string(&c).unwrap();
            let back: Cone<f64> = serde_json::from_str(&s).unwrap();
            assert_eq!(back.dim(), c.dim());
            assert_eq!(back.kind(), c.kind());
            if let (Some(a), Some(b)) = (back.polyhedral(), c.polyhedral()) {
                assert_eq!(a.generators().len(), b.generators().len());
            }
        }
        let bad = r#"{"type":"centred","u":[1.0,0.0],"u_prime":[3.0,0.0]}"#;
        assert!(serde_json::from_str::<Cone<f64>>(bad).is_err());
    }
}
