//! Named semigroups, cones and instances used by scenarios and tests.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::cone_geometry::Cone;
use crate::error::{LabError, Result};
use crate::linalg::{nullspace, svec};
use crate::norms::NormSpec;
use crate::scalar::Scalar;
use crate::semigroup::Semigroup;

fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}

fn from_rows<T: Scalar>(d: usize, xs: &[f64]) -> DMatrix<T> {
    DMatrix::from_row_slice(d, d, xs).map(lit)
}

/// Continuous semigroup with generator `α[[−1, 1], [1, −1]]` on the plane.
///
/// `e^{tA} = ½[[1 + e^{−2αt}, 1 − e^{−2αt}], [1 − e^{−2αt}, 1 + e^{−2αt}]]`.
pub fn doubly_stochastic<T: Scalar>(alpha: f64) -> Result<Semigroup<T>> {
    let a = from_rows(2, &[-alpha, alpha, alpha, -alpha]);
    Ok(Semigroup::continuous(a, Cone::orthant(2)?)?.with_label(format!("doubly-stochastic(α={alpha})")))
}

/// `T = [[0, 1], [1, 0]]`.
pub fn swap<T: Scalar>() -> Result<Semigroup<T>> {
    Ok(Semigroup::discrete(from_rows(2, &[0.0, 1.0, 1.0, 0.0]), Cone::orthant(2)?)?.with_label("swap"))
}

/// `T = [[1, 1], [0, 1]]`.
pub fn jordan_block<T: Scalar>() -> Result<Semigroup<T>> {
    Ok(Semigroup::discrete(from_rows(2, &[1.0, 1.0, 0.0, 1.0]), Cone::orthant(2)?)?.with_label("jordan-block"))
}

/// Column-stochastic mixing matrix of the three-state Doeblin chain.
const DOEBLIN_MIX: [f64; 9] = [0.6, 0.2, 0.5, 0.3, 0.5, 0.1, 0.1, 0.3, 0.4];

/// Three-state column-stochastic chain `δJ + (1 − 3δ)M` with every entry at least `δ`.
pub fn doeblin_chain<T: Scalar>(delta: f64) -> Result<Semigroup<T>> {
    if !(delta > 0.0 && 3.0 * delta <= 1.0) {
        return Err(LabError::Precondition(format!("Doeblin constant must lie in (0, 1/3], got {delta}")));
    }
    let m = DMatrix::from_row_slice(3, 3, &DOEBLIN_MIX);
    let t = DMatrix::from_element(3, 3, delta) + m * (1.0 - 3.0 * delta);
    Ok(Semigroup::discrete(t.map(lit), Cone::orthant(3)?)?.with_label(format!("doeblin(δ={delta})")))
}

/// Stationary vector `π ≥ 0`, `Σπ = 1`, of a column-stochastic matrix with one-dimensional fixed space.
pub fn stationary_vector<T: Scalar>(t: &DMatrix<T>) -> Result<DVector<T>> {
    let d = t.nrows();
    let k = nullspace(&(t - DMatrix::identity(d, d)), T::lit(1e-10));
    if k.ncols() != 1 {
        return Err(LabError::Precondition(format!("fixed space has dimension {}", k.ncols())));
    }
    let v = k.column(0).into_owned();
    Ok(&v / v.sum())
}

/// Depolarizing channel `ρ ↦ (1 − p)ρ + p·tr(ρ)·I/n` on symmetric `n×n` matrices, with the trace norm.
pub fn depolarizing_channel<T: Scalar>(p: f64, n: usize) -> Result<Semigroup<T>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LabError::Precondition(format!("depolarizing parameter must lie in [0, 1], got {p}")));
    }
    let id = DMatrix::<T>::identity(n, n);
    let s = svec(&id);
    let m = DMatrix::identity(s.len(), s.len()) * lit::<T>(1.0 - p) + (&s / <T as Scalar>::from_usize(n)) * s.transpose() * lit::<T>(p);
    Ok(Semigroup::discrete(m, Cone::psd(n)?)?
        .with_norm(NormSpec::Trace)?
        .with_label(format!("depolarizing(p={p}, n={n})")))
}

/// `T = diag(1, 1/2)`: every orbit converges, yet orbits of `e₂` vanish, so
/// lower bounds of unit vectors have infimum norm zero.
pub fn scaled_bounds<T: Scalar>() -> Result<Semigroup<T>> {
    Ok(Semigroup::discrete(from_rows(2, &[1.0, 0.0, 0.0, 0.5]), Cone::orthant(2)?)?.with_label("scaled-bounds"))
}

/// Cyclic shift `e_i ↦ e_{i+1 mod d}`.
pub fn cyclic_shift<T: Scalar>(d: usize) -> DMatrix<T> {
    DMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { T::one() } else { T::zero() })
}

/// Distribution mixed into the cyclic shift by [`mixed_cyclic`].
pub const MIXED_CYCLIC_V: [f64; 3] = [0.5, 0.3, 0.2];

/// `T = (1 − p)·C + p·v𝟙ᵀ` on three states with `C` the cyclic shift.
pub fn mixed_cyclic<T: Scalar>(p: f64) -> Result<Semigroup<T>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LabError::Precondition(format!("mixing weight must lie in [0, 1], got {p}")));
    }
    let v = DVector::from_row_slice(&MIXED_CYCLIC_V).map(lit::<T>);
    let ones = DVector::<T>::from_element(3, T::one());
    let t = cyclic_shift::<T>(3) * lit::<T>(1.0 - p) + v * ones.transpose() * lit::<T>(p);
    Ok(Semigroup::discrete(t, Cone::orthant(3)?)?.with_label(format!("mixed-cyclic(p={p})")))
}

/// `(T, S)` with `T` the Doeblin chain and `S = (1 − ε)T + ε·π𝟙ᵀ`.
pub fn dominating_pair<T: Scalar>(delta: f64, eps: f64) -> Result<(Semigroup<T>, Semigroup<T>)> {
    let t = doeblin_chain::<T>(delta)?;
    let pi = stationary_vector(t.matrix())?;
    let ones = DVector::<T>::from_element(3, T::one());
    let s = t.matrix() * lit::<T>(1.0 - eps) + pi * ones.transpose() * lit::<T>(eps);
    let s = Semigroup::discrete(s, Cone::orthant(3)?)?.with_label(format!("dominating(ε={eps})"));
    Ok((t, s))
}

/// `S = T·K` for a diagonal `K` with entries in `[0, 1]`, so `0 ≤ S ≤ T` entrywise.
pub fn dominated_by<T: Scalar>(t: &Semigroup<T>, k: &[f64]) -> Result<Semigroup<T>> {
    if k.len() != t.dim() || !k.iter().all(|x| (0.0..=1.0).contains(x)) {
        return Err(LabError::Precondition("contraction weights must be d values in [0, 1]".into()));
    }
    let kd = DMatrix::from_diagonal(&DVector::from_row_slice(k).map(lit::<T>));
    Semigroup::new(t.kind(), t.matrix() * kd, t.cone().clone())
}

/// `u u′ + c(I − u u′)` on the centred cone of `(u, u′)`; positive for `|c| ≤ 1`.
pub fn centred_contraction<T: Scalar>(u: &[f64], u_prime: &[f64], c: f64) -> Result<Semigroup<T>> {
    let uv = DVector::from_row_slice(u).map(lit::<T>);
    let upv = DVector::from_row_slice(u_prime).map(lit::<T>);
    let cone = Cone::centred(uv.clone(), upv.clone())?;
    let norm = NormSpec::centred_max(&cone)?;
    let d = uv.len();
    let p = &uv * upv.transpose();
    let m = &p + (DMatrix::identity(d, d) - &p) * lit::<T>(c);
    Ok(Semigroup::discrete(m, cone)?.with_norm(norm)?.with_label(format!("centred-contraction(c={c})")))
}

/// Sub-cone `{x ≥ 0 : x₁ + x₂ ≥ x₃}` of the orthant in ℝ³.
pub fn sliced_non_lattice_cone<T: Scalar>() -> Result<Cone<T>> {
    Cone::sliced(Cone::orthant(3)?, DVector::from_row_slice(&[1.0, 1.0, -1.0]).map(lit))
}

/// `(a, b, u₁, u₂)`: `u₁, u₂` are minimal upper bounds of `{a, b}` in the sliced cone
/// with no common lower upper bound, so `{a, b}` has no supremum.
pub fn non_lattice_pair<T: Scalar>() -> [DVector<T>; 4] {
    [
        DVector::zeros(3),
        DVector::from_row_slice(&[-1.0, 0.0, 1.0]).map(lit),
        DVector::from_row_slice(&[1.0, 0.0, 1.0]).map(lit),
        DVector::from_row_slice(&[0.0, 1.0, 1.0]).map(lit),
    ]
}

/// Continuous Markov semigroup on the sliced cone: the generator mixes toward
/// `(1, 1, 1)/3` and preserves `x₁ + x₂ − x₃ ≥ 0` along the way.
pub fn sliced_relaxation<T: Scalar>(rate: f64) -> Result<Semigroup<T>> {
    let cone = sliced_non_lattice_cone::<T>()?;
    let target = DVector::<T>::from_element(3, lit(1.0 / 3.0));
    let ones = DVector::<T>::from_element(3, T::one());
    let a = (target * ones.transpose() - DMatrix::identity(3, 3)) * lit::<T>(rate);
    Ok(Semigroup::continuous(a, cone)?.with_label(format!("sliced-relaxation(rate={rate})")))
}

/// Column-stochastic matrix with entries at least `floor/(d·(1 + floor))`.
pub fn random_primitive_stochastic<T: Scalar, R: Rng>(d: usize, floor: f64, rng: &mut R) -> DMatrix<T> {
    let mut m = DMatrix::from_fn(d, d, |_, _| rng.random::<f64>() + floor);
    for j in 0..d {
        let s = m.column(j).sum();
        m.column_mut(j).unscale_mut(s);
    }
    m.map(lit)
}

/// Generator of a continuous Markov semigroup: non-negative off-diagonal rates, zero column sums.
pub fn random_markov_generator<T: Scalar, R: Rng>(d: usize, min_rate: f64, rng: &mut R) -> DMatrix<T> {
    let mut a = DMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { rng.random::<f64>() + min_rate });
    for j in 0..d {
        let s = a.column(j).sum();
        a[(j, j)] = -s;
    }
    a.map(lit)
}

/// `D S D⁻¹` for a random primitive stochastic `S` and positive diagonal `D`:
/// positive and bounded but not Markov for the ℓ1 norm.
pub fn random_similar_chain<T: Scalar, R: Rng>(d: usize, rng: &mut R) -> Result<Semigroup<T>> {
    let s: DMatrix<f64> = random_primitive_stochastic(d, 0.1, rng);
    let diag: Vec<f64> = (0..d).map(|_| 0.5 + 1.5 * rng.random::<f64>()).collect();
    let m = DMatrix::from_fn(d, d, |i, j| diag[i] * s[(i, j)] / diag[j]);
    Ok(Semigroup::discrete(m.map(lit), Cone::orthant(d)?)?.with_label("similar-chain"))
}
