use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

/// Per-dimension z-scoring with training statistics; constant dimensions get σ = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &Matrix) -> Self {
        Self::fit_masked(x, &vec![true; x.data().len()])
    }

    /// Column statistics over the cells where `mask` is set. A column with
    /// no observed cell gets mean 0 and unit scale.
    pub fn fit_masked(x: &Matrix, mask: &[bool]) -> Self {
        let d = x.cols();
        let mut count = vec![0usize; d];
        let mut mean = vec![0.0; d];
        for (k, (&v, &o)) in x.data().iter().zip(mask).enumerate() {
            if o {
                mean[k % d] += v;
                count[k % d] += 1;
            }
        }
        mean.iter_mut().zip(&count).for_each(|(m, &c)| *m /= c.max(1) as f64);
        let mut var = vec![0.0; d];
        for (k, (&v, &o)) in x.data().iter().zip(mask).enumerate() {
            if o {
                var[k % d] += (v - mean[k % d]).powi(2);
            }
        }
        let std = var
            .into_iter()
            .zip(&count)
            .map(|(s, &c)| {
                let sd = (s / c.max(1) as f64).sqrt();
                if sd > 1e-12 * (1.0 + sd) && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Scaler { mean, std }
    }

    /// Maps standardized values back to the original scale.
    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.mean).zip(&self.std).map(|((z, m), s)| z * s + m).collect()
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn transform_matrix(&self, x: &Matrix) -> Matrix {
        let rows: Vec<f64> = x.iter_rows().flat_map(|r| self.transform(r)).collect();
        Matrix::from_vec(x.rows(), x.cols(), rows)
    }
}
