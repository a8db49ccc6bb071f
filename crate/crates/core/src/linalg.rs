//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{LabError, Result};
use crate::scalar::Scalar;

/// Induced 1-norm: maximum absolute column sum.
pub fn norm1<T: Scalar>(a: &DMatrix<T>) -> T {
    a.column_iter()
        .map(|c| c.iter().fold(T::zero(), |s, v| s + v.abs()))
        .fold(T::zero(), |m, v| m.max(v))
}

/// Induced infinity-norm: maximum absolute row sum.
pub fn norm_inf<T: Scalar>(a: &DMatrix<T>) -> T {
    a.row_iter()
        .map(|r| r.iter().fold(T::zero(), |s, v| s + v.abs()))
        .fold(T::zero(), |m, v| m.max(v))
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(a: &DMatrix<T>) -> T {
    if a.is_empty() {
        return T::zero();
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(T::zero(), |m, v| m.max(*v))
}

pub fn all_finite<T: Scalar>(xs: impl IntoIterator<Item = T>) -> bool {
    xs.into_iter().all(|v| v.finite())
}

pub fn ensure_square<T: Scalar>(a: &DMatrix<T>, context: &'static str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(LabError::DimensionMismatch {
            context,
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if !all_finite(a.iter().copied()) {
        return Err(LabError::NonFinite(context));
    }
    Ok(())
}

pub fn matrix_from_rows<T: Scalar>(rows: &[Vec<T>], context: &'static str) -> Result<DMatrix<T>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    for r in rows {
        if r.len() != nc {
            return Err(LabError::DimensionMismatch {
                context,
                expected: nc,
                found: r.len(),
            });
        }
    }
    let m = DMatrix::from_fn(nr, nc, |i, j| rows[i][j]);
    if !all_finite(m.iter().copied()) {
        return Err(LabError::NonFinite(context));
    }
    Ok(m)
}

pub fn matrix_to_rows<T: Scalar>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// `a^n` by repeated squaring.
pub fn mat_pow<T: Scalar>(a: &DMatrix<T>, mut n: u64) -> DMatrix<T> {
    let mut result = DMatrix::identity(a.nrows(), a.ncols());
    let mut base = a.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [f64; 5] = [
    1.495585217958292e-2,
    2.539_398_330_063_23e-1,
    9.504178996162932e-1,
    2.097847961257068,
    5.371920351148152,
];

fn pade<T: Scalar>(a: &DMatrix<T>, b: &[f64]) -> Result<DMatrix<T>> {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = DMatrix::<T>::identity(n, n);
    let mut u_inner = DMatrix::<T>::zeros(n, n);
    let mut v = DMatrix::<T>::zeros(n, n);
    for k in 0..b.len().div_ceil(2) {
        if k > 0 {
            power = &power * &a2;
        }
        v += &power * T::lit(b[2 * k]);
        if 2 * k + 1 < b.len() {
            u_inner += &power * T::lit(b[2 * k + 1]);
        }
    }
    let u = a * u_inner;
    let lhs = &v - &u;
    let rhs = &v + &u;
    lhs.lu()
        .solve(&rhs)
        .ok_or(LabError::Overflow { t: f64::NAN })
}

/// Matrix exponential by scaling and squaring with diagonal Padé approximants.
pub fn expm<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    ensure_square(a, "matrix exponential")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let nrm = norm1(a).to_f64();
    let tables: [&[f64]; 4] = [&PADE3, &PADE5, &PADE7, &PADE9];
    for (table, theta) in tables.iter().zip(THETA.iter()) {
        if nrm <= *theta {
            return pade(a, table);
        }
    }
    let s = (nrm / THETA[4]).log2().ceil().max(0.0) as i32;
    let scaled = a * T::lit(0.5f64.powi(s));
    let mut r = pade(&scaled, &PADE13)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !all_finite(r.iter().copied()) {
        return Err(LabError::Overflow { t: 1.0 });
    }
    Ok(r)
}

/// Returns `(e^{tA}, ∫_0^t e^{sA} ds)` from one block exponential.
pub fn expm_with_integral<T: Scalar>(a: &DMatrix<T>, t: T) -> Result<(DMatrix<T>, DMatrix<T>)> {
    ensure_square(a, "matrix exponential")?;
    let n = a.nrows();
    let mut block = DMatrix::<T>::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(a * t));
    for i in 0..n {
        block[(i, n + i)] = t;
    }
    let e = expm(&block).map_err(|_| LabError::Overflow { t: t.to_f64() })?;
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, n)).into_owned(),
    ))
}

/// Orthonormal basis (as columns) of the numerical kernel of `m`.
///
/// Singular values at or below `rel_tol * max(1, σ_max)` count as zero.
pub fn nullspace<T: Scalar>(m: &DMatrix<T>, rel_tol: T) -> DMatrix<T> {
    let (r, c) = m.shape();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    let sq = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().fold(T::zero(), |a, b| a.max(*b));
    let thresh = rel_tol * smax.max(T::one());
    let mut cols = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= thresh {
            cols.push(vt.row(k).transpose());
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Numerical rank with the same threshold convention as [`nullspace`].
pub fn rank<T: Scalar>(m: &DMatrix<T>, rel_tol: T) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(T::zero(), |a, b| a.max(*b));
    let thresh = rel_tol * smax.max(T::one());
    sv.iter().filter(|s| **s > thresh).count()
}

/// Number of singular values of a complex matrix at or below `abs_tol`.
pub fn complex_nullity<T: Scalar>(m: &DMatrix<Complex<T>>, abs_tol: T) -> usize {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s <= abs_tol)
        .count()
}

/// Least-squares solution of `a x = b` via SVD.
pub fn lstsq<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>) -> DVector<T> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(T::zero(), |m, v| m.max(*v));
    let eps = smax * T::lit(1e-12);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Length of the symmetric-vectorization of an `n x n` matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Inverse of [`svec_len`].
pub fn svec_order(len: usize) -> Option<usize> {
    let n = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (svec_len(n) == len).then_some(n)
}

/// Symmetric vectorization: upper triangle row-major, off-diagonals scaled by √2.
///
/// Isometric between the Frobenius and Euclidean inner products.
pub fn svec<T: Scalar>(x: &DMatrix<T>) -> DVector<T> {
    let n = x.nrows();
    let r2 = T::lit(std::f64::consts::SQRT_2);
    let mut out = Vec::with_capacity(svec_len(n));
    for i in 0..n {
        for j in i..n {
            if i == j {
                out.push(x[(i, i)]);
            } else {
                out.push((x[(i, j)] + x[(j, i)]) * T::lit(0.5) * r2);
            }
        }
    }
    DVector::from_vec(out)
}

/// Inverse of [`svec`].
pub fn smat<T: Scalar>(v: &DVector<T>, n: usize) -> DMatrix<T> {
    let r2 = T::lit(std::f64::consts::SQRT_2);
    let mut x = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                x[(i, i)] = v[k];
            } else {
                x[(i, j)] = v[k] / r2;
                x[(j, i)] = v[k] / r2;
            }
            k += 1;
        }
    }
    x
}

/// Symmetric eigen-decomposition `(eigenvalues, eigenvectors)`.
pub fn sym_eig<T: Scalar>(x: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let sym = (x + x.transpose()) * T::lit(0.5);
    let e = sym.symmetric_eigen();
    (e.eigenvalues, e.eigenvectors)
}

/// Positive and negative parts `(X₊, X₋)` of a symmetric matrix, `X = X₊ − X₋`.
pub fn sym_parts<T: Scalar>(x: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let (vals, vecs) = sym_eig(x);
    let n = x.nrows();
    let mut pos = DMatrix::zeros(n, n);
    let mut neg = DMatrix::zeros(n, n);
    for k in 0..n {
        let v = vecs.column(k);
        let outer = v * v.transpose();
        if vals[k] > T::zero() {
            pos += outer * vals[k];
        } else {
            neg -= outer * vals[k];
        }
    }
    (pos, neg)
}

/// Symmetric matrix function `f(X)` through the eigen-decomposition.
pub fn sym_apply<T: Scalar>(x: &DMatrix<T>, f: impl Fn(T) -> T) -> DMatrix<T> {
    let (vals, vecs) = sym_eig(x);
    let d = DMatrix::from_diagonal(&vals.map(f));
    &vecs * d * vecs.transpose()
}

/// Least-squares slope of `ys` against `xs`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..n {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn expm_of_diagonal_matches_scalar_exponentials() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-3.0, 0.5, 12.0]));
        let e = expm(&a).unwrap();
        for (i, x) in [-3.0f64, 0.5, 12.0].iter().enumerate() {
            assert_relative_eq!(e[(i, i)], x.exp(), max_relative = 1e-13);
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 2.3f64;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&a).unwrap();
        assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-13);
        assert_relative_eq!(e[(1, 0)], t.sin(), epsilon = 1e-13);
    }

    #[test]
    fn expm_of_nilpotent_is_polynomial() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 40.0, 0.0, 0.0, 0.0, 40.0, 0.0, 0.0, 0.0]);
        let e = expm(&a).unwrap();
        assert_relative_eq!(e[(0, 1)], 40.0, max_relative = 1e-12);
        assert_relative_eq!(e[(0, 2)], 800.0, max_relative = 1e-12);
    }

    #[test]
    fn integral_block_matches_closed_form() {
        let a = DMatrix::from_row_slice(1, 1, &[-2.0]);
        let (e, i) = expm_with_integral(&a, 1.5).unwrap();
        assert_relative_eq!(e[(0, 0)], (-3.0f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(i[(0, 0)], (1.0 - (-3.0f64).exp()) / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn svec_is_an_isometry() {
        let x = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, -1.0, 2.0, 0.5, 3.0, -1.0, 3.0, -2.0]);
        let v = svec(&x);
        assert_eq!(v.len(), 6);
        assert_relative_eq!(v.norm(), x.norm(), max_relative = 1e-14);
        assert_relative_eq!(smat(&v, 3), x, epsilon = 1e-14);
        assert_eq!(svec_order(6), Some(3));
        assert_eq!(svec_order(5), None);
    }

    #[test]
    fn nullspace_of_rank_deficient_matrix() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let k = nullspace(&m, 1e-10);
        assert_eq!(k.ncols(), 1);
        assert!((&m * &k).norm() < 1e-12);
        assert_eq!(rank(&m, 1e-10), 2);
    }

    #[test]
    fn mat_pow_agrees_with_repeated_product() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.25, 0.5, 0.75]);
        let mut p = DMatrix::identity(2, 2);
        for _ in 0..13 {
            p = &p * &a;
        }
        assert_relative_eq!(mat_pow(&a, 13), p, epsilon = 1e-14);
    }
}

/// Right singular vectors (as columns) of the `k` smallest singular values.
pub fn least_singular_vectors<T: Scalar>(m: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let (r, c) = m.shape();
    let sq = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|a, b| {
        svd.singular_values[*a]
            .partial_cmp(&svd.singular_values[*b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let cols: Vec<DVector<T>> = idx.iter().take(k).map(|&i| vt.row(i).transpose()).collect();
    if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Dense matrix serialized as a row-major list of rows.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound = "")]
#[serde(try_from = "Vec<Vec<T>>", into = "Vec<Vec<T>>")]
pub struct Matrix<T: Scalar>(pub DMatrix<T>);

impl<T: Scalar> std::ops::Deref for Matrix<T> {
    type Target = DMatrix<T>;
    fn deref(&self) -> &DMatrix<T> {
        &self.0
    }
}

impl<T: Scalar> TryFrom<Vec<Vec<T>>> for Matrix<T> {
    type Error = LabError;
    fn try_from(rows: Vec<Vec<T>>) -> Result<Self> {
        matrix_from_rows(&rows, "matrix").map(Matrix)
    }
}

impl<T: Scalar> From<Matrix<T>> for Vec<Vec<T>> {
    fn from(m: Matrix<T>) -> Self {
        matrix_to_rows(&m.0)
    }
}

impl<T: Scalar> From<DMatrix<T>> for Matrix<T> {
    fn from(m: DMatrix<T>) -> Self {
        Matrix(m)
    }
}
