#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use oplab_core::{Cone, NormSpec};
use rand::Rng;

pub struct Pair {
    pub name: String,
    pub cone: Cone<f64>,
    pub norm: NormSpec<f64>,
}

fn pair(cone: &Cone<f64>, norm: NormSpec<f64>) -> Pair {
    Pair {
        name: format!("{}/{}", cone.kind(), norm.name()),
        cone: cone.clone(),
        norm,
    }
}

pub fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(xs)
}

pub fn polyhedral_cone() -> Cone<f64> {
    Cone::from_generators(3, vec![v(&[1.0, 0.0, 1.0]), v(&[0.0, 1.0, 1.0]), v(&[-1.0, 0.0, 1.0]), v(&[0.0, -1.0, 1.0])])
        .unwrap()
}

pub fn sliced_cone() -> Cone<f64> {
    Cone::sliced(Cone::orthant(3).unwrap(), v(&[1.0, 1.0, -1.0])).unwrap()
}

pub fn circular_cone() -> Cone<f64> {
    Cone::centred(v(&[1.0, 0.0, 0.0]), v(&[1.0, 0.0, 0.0])).unwrap()
}

pub fn tilted_cone() -> Cone<f64> {
    Cone::centred(v(&[1.5, 0.5, 0.0]), v(&[0.6, 0.2, 0.1])).unwrap()
}

/// Every cone/norm pair the distance routine supports.
pub fn dispatch_table() -> Vec<Pair> {
    let orthant = Cone::orthant(4).unwrap();
    let psd = Cone::psd(2).unwrap();
    let poly = polyhedral_cone();
    let sliced = sliced_cone();
    let circ = circular_cone();
    let tilted = tilted_cone();
    let psi_orthant = NormSpec::psi_base(v(&[1.0, 2.0, 0.5, 1.5]), orthant.clone()).unwrap();
    let psi_psd = NormSpec::psi_base(v(&[2.0, 0.5, 1.0]), psd.clone()).unwrap();
    let psi_poly = NormSpec::psi_base(v(&[0.2, 0.1, 1.0]), poly.clone()).unwrap();
    let psi_sliced = NormSpec::psi_base(v(&[1.0, 1.0, 0.5]), sliced.clone()).unwrap();
    let psi_centred = NormSpec::psi_base(v(&[0.6, 0.2, 0.1]), tilted.clone()).unwrap();
    vec![
        pair(&orthant, NormSpec::L1),
        pair(&orthant, NormSpec::L2),
        pair(&orthant, NormSpec::Linf),
        pair(&orthant, NormSpec::WeightedL1 { weights: vec![1.0, 2.0, 0.5, 3.0] }),
        pair(&orthant, psi_orthant),
        pair(&psd, NormSpec::Trace),
        pair(&psd, NormSpec::L2),
        pair(&psd, psi_psd),
        pair(&circ, NormSpec::L2),
        pair(&circ, NormSpec::centred_max(&circ).unwrap()),
        pair(&tilted, NormSpec::centred_max(&tilted).unwrap()),
        pair(&tilted, psi_centred),
        pair(&poly, NormSpec::L1),
        pair(&poly, NormSpec::Linf),
        pair(&poly, NormSpec::WeightedL1 { weights: vec![1.0, 0.5, 2.0] }),
        pair(&poly, psi_poly),
        pair(&sliced, NormSpec::L1),
        pair(&sliced, NormSpec::Linf),
        pair(&sliced, NormSpec::WeightedL1 { weights: vec![2.0, 1.0, 0.5] }),
        pair(&sliced, psi_sliced),
    ]
}

pub fn random_vector<R: Rng>(d: usize, scale: f64, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(d, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0))
}

/// A strictly positive functional on the cone.
pub fn dual_element(cone: &Cone<f64>) -> DVector<f64> {
    match cone {
        Cone::Orthant { .. } | Cone::Psd { .. } => cone.interior_point(),
        Cone::Centred(c) => c.u_prime().clone(),
        _ => cone
            .polyhedral()
            .unwrap()
            .halfspaces()
            .iter()
            .fold(DVector::zeros(cone.dim()), |a, h| a + h),
    }
}

/// Positive map `c·I + v⊗φ` and an upper bound for its operator norm.
pub fn positive_operator<R: Rng>(cone: &Cone<f64>, norm: &NormSpec<f64>, rng: &mut R) -> (DMatrix<f64>, f64) {
    let d = cone.dim();
    let c = rng.random::<f64>();
    let w = cone.random_element(rng);
    let phi = dual_element(cone) * rng.random::<f64>();
    let m = DMatrix::identity(d, d) * c + &w * phi.transpose();
    let bound = c + norm.eval(&w).unwrap() * norm.dual(&phi).unwrap();
    (m, bound)
}
