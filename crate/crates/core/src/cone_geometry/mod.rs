//! Cones, membership, duality, distance to the cone and positive decompositions.

mod cone;
pub mod dd;
pub mod decompose;
mod distance;
mod element;
pub mod lp;
mod order;

pub use cone::{CentredCone, Cone, ConeSpec, PolyhedralCone, SlicedCone};
pub use decompose::{base_norm, decomposition_constant, positive_decompose, Decomposition};
pub use distance::{distance_to_cone, project_to_cone, Projection};
pub use element::{Element, Functional};
pub use order::{in_order_interval, supremum_feasibility, FeasibilityCertificate};
pub use lp::{LinearProgram, LpSolution, LpStatus, Relation};
