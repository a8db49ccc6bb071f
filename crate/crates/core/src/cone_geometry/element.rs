use std::ops::Deref;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Scalar;

/// A finite vector of the ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
pub struct Element<T: Scalar>(DVector<T>);

impl<T: Scalar> Element<T> {
    pub fn new(v: DVector<T>) -> Result<Self> {
        if v.iter().all(|x| x.finite()) {
            Ok(Self(v))
        } else {
            Err(LabError::NonFinite("element"))
        }
    }

    pub fn from_slice(xs: &[T]) -> Result<Self> {
        Self::new(DVector::from_row_slice(xs))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = T::one();
        Self(v)
    }

    /// Checks the length against an expected dimension.
    pub fn expect_dim(&self, dim: usize, context: &'static str) -> Result<&Self> {
        if self.0.len() == dim {
            Ok(self)
        } else {
            Err(LabError::DimensionMismatch {
                context,
                expected: dim,
                found: self.0.len(),
            })
        }
    }

    pub fn vector(&self) -> &DVector<T> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<T> {
        self.0
    }
}

impl<T: Scalar> Deref for Element<T> {
    type Target = DVector<T>;
    fn deref(&self) -> &DVector<T> {
        &self.0
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for Element<T> {
    type Error = LabError;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(DVector::from_vec(v))
    }
}

impl<T: Scalar> From<Element<T>> for Vec<T> {
    fn from(e: Element<T>) -> Vec<T> {
        e.0.iter().copied().collect()
    }
}

/// A linear functional, stored by its coefficient vector in the standard pairing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
#[serde(try_from = "Vec<T>", into = "Vec<T>")]
pub struct Functional<T: Scalar>(DVector<T>);

impl<T: Scalar> Functional<T> {
    pub fn new(v: DVector<T>) -> Result<Self> {
        if v.iter().all(|x| x.finite()) {
            Ok(Self(v))
        } else {
            Err(LabError::NonFinite("functional"))
        }
    }

    pub fn pair(&self, x: &DVector<T>) -> Result<T> {
        if x.len() != self.0.len() {
            return Err(LabError::DimensionMismatch {
                context: "functional pairing",
                expected: self.0.len(),
                found: x.len(),
            });
        }
        Ok(self.0.dot(x))
    }

    pub fn vector(&self) -> &DVector<T> {
        &self.0
    }
}

impl<T: Scalar> Deref for Functional<T> {
    type Target = DVector<T>;
    fn deref(&self) -> &DVector<T> {
        &self.0
    }
}

impl<T: Scalar> TryFrom<Vec<T>> for Functional<T> {
    type Error = LabError;
    fn try_from(v: Vec<T>) -> Result<Self> {
        Self::new(DVector::from_vec(v))
    }
}

impl<T: Scalar> From<Functional<T>> for Vec<T> {
    fn from(e: Functional<T>) -> Vec<T> {
        e.0.iter().copied().collect()
    }
}
