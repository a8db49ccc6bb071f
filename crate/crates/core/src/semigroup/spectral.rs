//! Eigenvalue clusters, semisimplicity and Riesz spectral projections.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::linalg::{complex_nullity, least_singular_vectors, spectral_norm};
use crate::scalar::Scalar;

/// Relative radius within which computed eigenvalues are merged.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Rank tolerance for the geometric multiplicity; repeated at ten times this value.
pub const RANK_TOL: f64 = 1e-8;

/// One eigenvalue with its multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EigenCluster<T: Scalar> {
    pub re: T,
    pub im: T,
    pub algebraic: usize,
    /// Dimension of the eigenspace; absent when the two rank tolerances disagree.
    pub geometric: Option<usize>,
    /// `geometric == algebraic`; absent when undecided.
    pub semisimple: Option<bool>,
}

impl<T: Scalar> EigenCluster<T> {
    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re, self.im)
    }

    pub fn modulus(&self) -> T {
        cabs(self.value())
    }
}

/// Modulus of a complex number.
pub fn cabs<T: Scalar>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Eigenvalue clusters of `m`, sorted by decreasing modulus then decreasing real part.
pub fn eigen_clusters<T: Scalar>(m: &DMatrix<T>) -> Vec<EigenCluster<T>> {
    let d = m.nrows();
    if d == 0 {
        return Vec::new();
    }
    let eig: Vec<Complex<T>> = m.clone().complex_eigenvalues().iter().copied().collect();
    let mut groups: Vec<Vec<Complex<T>>> = Vec::new();
    'outer: for z in eig {
        for g in groups.iter_mut() {
            let c = g[0];
            if cabs(z - c) <= T::lit(CLUSTER_TOL) * cabs(c).max(T::one()) {
                g.push(z);
                continue 'outer;
            }
        }
        groups.push(vec![z]);
    }
    let scale = spectral_norm(m).max(T::one());
    let mc = m.map(|v| Complex::new(v, T::zero()));
    let mut out: Vec<EigenCluster<T>> = groups
        .into_iter()
        .map(|g| {
            let k = g.len();
            let mean = g.iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b) / <T as Scalar>::from_usize(k);
            // Snap near-real means onto the real axis so conjugate pairs stay paired.
            let mean = if mean.im.abs() <= T::lit(CLUSTER_TOL) * cabs(mean).max(T::one()) {
                Complex::new(mean.re, T::zero())
            } else {
                mean
            };
            let shifted = &mc - DMatrix::<Complex<T>>::identity(d, d) * mean;
            let n1 = complex_nullity(&shifted, T::lit(RANK_TOL) * scale);
            let n2 = complex_nullity(&shifted, T::lit(10.0 * RANK_TOL) * scale);
            let geometric = if n1 == n2 { Some(n1.min(k)) } else { None };
            EigenCluster {
                re: mean.re,
                im: mean.im,
                algebraic: k,
                geometric,
                semisimple: geometric.map(|g| g == k),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.modulus()
            .partial_cmp(&a.modulus())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal))
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    out
}

/// Largest eigenvalue modulus.
pub fn spectral_radius<T: Scalar>(clusters: &[EigenCluster<T>]) -> T {
    clusters.iter().fold(T::zero(), |a, c| a.max(c.modulus()))
}

/// Largest real part.
pub fn spectral_bound<T: Scalar>(clusters: &[EigenCluster<T>]) -> T {
    clusters.iter().fold(T::lit(f64::NEG_INFINITY), |a, c| a.max(c.re))
}

/// Riesz projection onto the generalized eigenspaces of the selected clusters.
///
/// The selection must be closed under complex conjugation.
pub fn spectral_projection<T: Scalar>(
    m: &DMatrix<T>,
    clusters: &[EigenCluster<T>],
    select: impl Fn(&EigenCluster<T>) -> bool,
) -> DMatrix<T> {
    let d = m.nrows();
    let chosen: Vec<&EigenCluster<T>> = clusters.iter().filter(|c| select(c)).collect();
    let k: usize = chosen.iter().map(|c| c.algebraic).sum();
    if k == 0 {
        return DMatrix::zeros(d, d);
    }
    if k >= d {
        return DMatrix::identity(d, d);
    }
    let id = DMatrix::<T>::identity(d, d);
    let mut q = id.clone();
    for c in &chosen {
        // Conjugate pairs contribute one real quadratic factor, taken from the upper member.
        let factor = if c.im > T::zero() {
            let two = T::lit(2.0);
            m * m - m * (two * c.re) + &id * (c.re * c.re + c.im * c.im)
        } else if c.im < T::zero() {
            continue;
        } else {
            m - &id * c.re
        };
        for _ in 0..c.algebraic {
            q = &q * &factor;
            let s = q.amax();
            if s > T::zero() {
                q /= s;
            }
        }
    }
    let v = least_singular_vectors(&q, k);
    let w = least_singular_vectors(&q.transpose(), k);
    let gram = w.transpose() * &v;
    match gram.try_inverse() {
        Some(inv) => &v * inv * w.transpose(),
        None => DMatrix::zeros(d, d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(r: usize, xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, r, xs)
    }

    #[test]
    fn jordan_block_is_not_semisimple() {
        let c = eigen_clusters(&m(2, &[1.0, 1.0, 0.0, 1.0]));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].algebraic, 2);
        assert_eq!(c[0].semisimple, Some(false));
    }

    #[test]
    fn identity_is_semisimple() {
        let c = eigen_clusters(&DMatrix::<f64>::identity(3, 3));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].geometric, Some(3));
    }

    #[test]
    fn rotation_has_a_conjugate_pair() {
        let c = eigen_clusters(&m(3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]));
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|e| (e.modulus() - 1.0).abs() < 1e-12 && e.semisimple == Some(true)));
        let p = spectral_projection(&m(3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]), &c, |e| e.im.abs() > 0.5);
        // Complement of the averaging projection.
        assert_relative_eq!(p, DMatrix::identity(3, 3) - DMatrix::from_element(3, 3, 1.0 / 3.0), epsilon = 1e-10);
    }

    #[test]
    fn projection_onto_unit_eigenvalue_of_stochastic_matrix() {
        let t = m(2, &[0.9, 0.2, 0.1, 0.8]);
        let c = eigen_clusters(&t);
        let p = spectral_projection(&t, &c, |e| (e.re - 1.0).abs() < 1e-6);
        let pi = [2.0 / 3.0, 1.0 / 3.0];
        assert_relative_eq!(p, m(2, &[pi[0], pi[0], pi[1], pi[1]]), epsilon = 1e-10);
    }

    #[test]
    fn projection_handles_a_jordan_block_inside_the_selection() {
        let t = m(3, &[1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.5]);
        let c = eigen_clusters(&t);
        let p = spectral_projection(&t, &c, |e| e.re > 0.75);
        assert_relative_eq!(p, m(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]), epsilon = 1e-8);
    }
}
