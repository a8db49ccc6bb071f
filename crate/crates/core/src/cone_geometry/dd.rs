//! Double-description conversion between halfspace and generator descriptions.
//!
//! `{x : aₖ·x ≥ 0}` is converted to its extreme rays (plus `±` a basis of its
//! lineality space). Applying the same routine to the generators yields the
//! facet normals of the generated cone.

use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};
use crate::linalg::{nullspace, rank};
use crate::scalar::Scalar;

struct Ray<T: Scalar> {
    v: DVector<T>,
    zeros: Vec<bool>,
}

fn rel_tol<T: Scalar>() -> T {
    T::lit(1e-9).max(T::feastol())
}

/// Rays of `{x : aₖ·x ≥ 0}`.
///
/// Returns extreme rays normalized to unit Euclidean length, followed by
/// `±b` for an orthonormal basis `b` of the lineality space.
pub fn rays_of_halfspaces<T: Scalar>(dim: usize, halfspaces: &[DVector<T>]) -> Result<Vec<DVector<T>>> {
    for h in halfspaces {
        if h.len() != dim {
            return Err(LabError::DimensionMismatch {
                context: "halfspace",
                expected: dim,
                found: h.len(),
            });
        }
    }
    let rows: Vec<DVector<T>> = halfspaces
        .iter()
        .filter(|h| h.norm() > T::feastol())
        .map(|h| h.normalize())
        .collect();
    let a = if rows.is_empty() {
        DMatrix::zeros(0, dim)
    } else {
        DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j])
    };
    let lineal = if rows.is_empty() {
        DMatrix::identity(dim, dim)
    } else {
        nullspace(&a, rel_tol::<T>())
    };
    let mut out = Vec::new();
    if lineal.ncols() < dim {
        // Work in the orthogonal complement of the lineality space.
        let basis = if lineal.ncols() == 0 {
            DMatrix::identity(dim, dim)
        } else {
            nullspace(&lineal.transpose(), rel_tol::<T>())
        };
        let reduced: Vec<DVector<T>> = rows.iter().map(|h| basis.transpose() * h).collect();
        for z in pointed_rays(basis.ncols(), &reduced)? {
            let v = &basis * z;
            out.push(v.normalize());
        }
    }
    for c in lineal.column_iter() {
        out.push(c.into_owned());
        out.push(-c.into_owned());
    }
    Ok(dedupe(out))
}

/// Facet normals of `cone(generators)` (plus `±` a basis of its orthogonal complement).
pub fn halfspaces_of_generators<T: Scalar>(dim: usize, generators: &[DVector<T>]) -> Result<Vec<DVector<T>>> {
    rays_of_halfspaces(dim, generators)
}

fn pointed_rays<T: Scalar>(d: usize, rows: &[DVector<T>]) -> Result<Vec<DVector<T>>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    let tol = rel_tol::<T>();
    // Greedy choice of d independent rows.
    let mut chosen: Vec<usize> = Vec::new();
    for (k, _) in rows.iter().enumerate() {
        let mut trial: Vec<&DVector<T>> = chosen.iter().map(|&i| &rows[i]).collect();
        trial.push(&rows[k]);
        let m = DMatrix::from_fn(trial.len(), d, |i, j| trial[i][j]);
        if rank(&m, tol) == trial.len() {
            chosen.push(k);
            if chosen.len() == d {
                break;
            }
        }
    }
    if chosen.len() < d {
        return Err(LabError::InvalidCone("halfspaces do not define a pointed cone".into()));
    }
    let ak = DMatrix::from_fn(d, d, |i, j| rows[chosen[i]][j]);
    let inv = ak
        .try_inverse()
        .ok_or_else(|| LabError::InvalidCone("singular initial halfspace system".into()))?;
    let nrows = rows.len();
    let mut processed = vec![false; nrows];
    for &k in &chosen {
        processed[k] = true;
    }
    let eval_zeros = |v: &DVector<T>, processed: &[bool]| -> Vec<bool> {
        let vn = v.norm();
        rows.iter()
            .enumerate()
            .map(|(k, h)| processed[k] && h.dot(v).abs() <= tol * vn)
            .collect()
    };
    let mut rays: Vec<Ray<T>> = inv
        .column_iter()
        .map(|c| {
            let v = c.into_owned().normalize();
            let zeros = eval_zeros(&v, &processed);
            Ray { v, zeros }
        })
        .collect();

    for k in 0..nrows {
        if processed[k] {
            continue;
        }
        let h = &rows[k];
        let vals: Vec<T> = rays.iter().map(|r| h.dot(&r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > tol).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -tol).collect();
        processed[k] = true;
        if neg.is_empty() {
            for (i, r) in rays.iter_mut().enumerate() {
                r.zeros[k] = vals[i].abs() <= tol;
            }
            continue;
        }
        let mut next: Vec<Ray<T>> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common: Vec<bool> = rays[p]
                    .zeros
                    .iter()
                    .zip(&rays[n].zeros)
                    .map(|(a, b)| *a && *b)
                    .collect();
                let count = common.iter().filter(|b| **b).count();
                if count + 2 < d {
                    continue;
                }
                let adjacent = rays.iter().enumerate().all(|(i, r)| {
                    i == p
                        || i == n
                        || !common
                            .iter()
                            .zip(&r.zeros)
                            .all(|(c, z)| !*c || *z)
                });
                if !adjacent {
                    continue;
                }
                let v = (&rays[n].v * vals[p] - &rays[p].v * vals[n]).normalize();
                let zeros = eval_zeros(&v, &processed);
                next.push(Ray { v, zeros });
            }
        }
        let mut kept: Vec<Ray<T>> = Vec::new();
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i] >= -tol {
                r.zeros[k] = vals[i].abs() <= tol;
                kept.push(r);
            }
        }
        kept.extend(next);
        rays = kept;
    }
    Ok(rays.into_iter().map(|r| r.v).collect())
}

fn dedupe<T: Scalar>(rays: Vec<DVector<T>>) -> Vec<DVector<T>> {
    let tol = T::lit(1e-7);
    let mut out: Vec<DVector<T>> = Vec::new();
    for r in rays {
        if !out.iter().any(|o| (o - &r).norm() <= tol) {
            out.push(r);
        }
    }
    out
}
