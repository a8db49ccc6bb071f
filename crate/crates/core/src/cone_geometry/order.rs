//! Order-theoretic queries: upper bounds, suprema and order intervals.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::cone::Cone;
use super::lp::{LinearProgram, LpStatus, Relation};
use crate::error::{LabError, Result};
use crate::scalar::Scalar;

/// Outcome of the search for a common upper bound `z` of `{a, b}` below two given upper bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FeasibilityCertificate<T: Scalar> {
    pub feasible: bool,
    /// A feasible `z` when one exists.
    pub witness: Option<Vec<T>>,
    /// Minimal total constraint violation found by phase one (zero when feasible).
    pub infeasibility: T,
    /// Farkas multipliers proving infeasibility of the standardized system.
    pub farkas: Option<Vec<T>>,
    /// Whether the multipliers were checked to satisfy `yᵀA ≤ 0 < yᵀb`.
    pub farkas_verified: bool,
}

/// Decides whether some `z` satisfies `a, b ≤ z ≤ upper1, upper2` in the cone order.
///
/// Infeasibility means `{a, b}` has no supremum: any supremum would lie below both upper bounds.
pub fn supremum_feasibility<T: Scalar>(
    cone: &Cone<T>,
    a: &DVector<T>,
    b: &DVector<T>,
    upper1: &DVector<T>,
    upper2: &DVector<T>,
) -> Result<FeasibilityCertificate<T>> {
    for (v, name) in [(a, "a"), (b, "b"), (upper1, "upper1"), (upper2, "upper2")] {
        cone.check_dim(v, "supremum feasibility").map_err(|e| match e {
            LabError::DimensionMismatch { expected, found, .. } => LabError::Precondition(format!(
                "{name} has dimension {found}, expected {expected}"
            )),
            other => other,
        })?;
    }
    let tol = T::lit(1e-9);
    for (u, un) in [(upper1, "upper1"), (upper2, "upper2")] {
        for (x, xn) in [(a, "a"), (b, "b")] {
            if !cone.contains(&(u - x), tol)? {
                return Err(LabError::Precondition(format!("{un} is not an upper bound of {xn}")));
            }
        }
    }
    let p = cone
        .polyhedral()
        .ok_or_else(|| LabError::NoGenerators(cone.kind().into()))?;
    let g = p.generator_matrix();
    let (d, k) = g.shape();
    // Variables: z (free, d) then four blocks of generator weights.
    let nv = d + 4 * k;
    let mut lp = LinearProgram::new(nv);
    for j in 0..d {
        lp.free(j);
    }
    let blocks: [(&DVector<T>, T, T); 4] = [
        (a, T::one(), -T::one()),
        (b, T::one(), -T::one()),
        (upper1, T::one(), T::one()),
        (upper2, T::one(), T::one()),
    ];
    for (blk, (rhs, zsign, gsign)) in blocks.iter().enumerate() {
        for i in 0..d {
            let mut row = vec![T::zero(); nv];
            row[i] = *zsign;
            for j in 0..k {
                row[d + blk * k + j] = *gsign * g[(i, j)];
            }
            lp.constrain(row, Relation::Eq, rhs[i]);
        }
    }
    let sol = lp.solve()?;
    match sol.status {
        LpStatus::Optimal => Ok(FeasibilityCertificate {
            feasible: true,
            witness: Some(sol.x[..d].to_vec()),
            infeasibility: T::zero(),
            farkas: None,
            farkas_verified: false,
        }),
        _ => {
            let cert = sol.certificate;
            let verified = cert
                .as_ref()
                .map(|c| c.gap > T::feastol() && c.max_violation <= T::lit(1e-9))
                .unwrap_or(false);
            Ok(FeasibilityCertificate {
                feasible: false,
                witness: None,
                infeasibility: sol.primal_residual,
                farkas: cert.map(|c| c.multipliers),
                farkas_verified: verified,
            })
        }
    }
}

/// Whether `z` lies in the order interval `[a, b] = {z : a ≤ z ≤ b}`.
pub fn in_order_interval<T: Scalar>(cone: &Cone<T>, a: &DVector<T>, b: &DVector<T>, z: &DVector<T>, tol: T) -> Result<bool> {
    Ok(cone.contains(&(z - a), tol)? && cone.contains(&(b - z), tol)?)
}
