//! JSON form `{"rows": n, "cols": m, "data": [[re, im], ...]}`, row-major.

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Matrix;
use crate::scalar::Real;

#[derive(Serialize, Deserialize)]
struct Repr {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl<T: Real> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        Repr {
            rows: self.rows(),
            cols: self.cols(),
            data: self.data().iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = Repr::deserialize(deserializer)?;
        let data = repr.data.iter().map(|[re, im]| Complex::new(T::lit(*re), T::lit(*im))).collect();
        Matrix::new(repr.rows, repr.cols, data).map_err(serde::de::Error::custom)
    }
}
