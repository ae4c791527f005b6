//! Masked nonnegative matrix factorization with multiplicative updates.
//!
//! Minimizes `½ Σ_{(i,j) observed} (P_ij − (U Vᵀ)_ij)²` subject to `U, V ≥ 0`.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;

const DENOM_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Nmf {
    pub u: Matrix,
    pub v: Matrix,
    /// Objective after every iteration (entry 0 is the initial value).
    pub objective: Vec<f64>,
}

fn masked_residual_objective(p: &Matrix, mask: &[bool], u: &Matrix, v: &Matrix) -> f64 {
    let recon = u.matmul_t(v);
    p.data()
        .iter()
        .zip(recon.data())
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|((a, b), _)| 0.5 * (a - b) * (a - b))
        .sum()
}

/// `W ⊙ M` with unobserved cells zeroed.
fn masked(m: &Matrix, mask: &[bool]) -> Matrix {
    let mut out = m.clone();
    for (v, &keep) in out.data_mut().iter_mut().zip(mask) {
        if !keep {
            *v = 0.0;
        }
    }
    out
}

pub fn nmf(p: &Matrix, mask: &[bool], rank: usize, seed: u64, max_iter: usize) -> Result<Nmf> {
    let (n, m) = p.shape();
    if mask.len() != n * m {
        return Err(Error::invalid("nmf mask shape mismatch"));
    }
    if rank == 0 {
        return Err(Error::invalid("nmf rank must be positive"));
    }
    if p.data().iter().zip(mask).any(|(&v, &o)| o && !(v >= 0.0)) {
        return Err(Error::invalid("nmf needs nonnegative observed values"));
    }
    let observed: Vec<f64> = p.data().iter().zip(mask).filter(|(_, &o)| o).map(|(&v, _)| v).collect();
    let mean = if observed.is_empty() { 0.0 } else { observed.iter().sum::<f64>() / observed.len() as f64 };
    let scale = (mean.max(1e-3) / rank as f64).sqrt();

    let mut r = rng::seeded(seed);
    let mut init = |rows: usize| Matrix::from_vec(rows, rank, (0..rows * rank).map(|_| scale * r.gen_range(0.5..1.5)).collect());
    let mut u = init(n);
    let mut v = init(m);
    let wp = masked(p, mask);

    let mut objective = vec![masked_residual_objective(p, mask, &u, &v)];
    for _ in 0..max_iter {
        let recon = masked(&u.matmul_t(&v), mask);
        let num = wp.matmul(&v);
        let den = recon.matmul(&v);
        for ((x, a), b) in u.data_mut().iter_mut().zip(num.data()).zip(den.data()) {
            *x *= a / (b + DENOM_EPS);
        }
        let recon = masked(&u.matmul_t(&v), mask);
        let num = wp.t_matmul(&u);
        let den = recon.t_matmul(&u);
        for ((x, a), b) in v.data_mut().iter_mut().zip(num.data()).zip(den.data()) {
            *x *= a / (b + DENOM_EPS);
        }
        let obj = masked_residual_objective(p, mask, &u, &v);
        let prev = *objective.last().expect("initial objective");
        objective.push(obj);
        if prev - obj <= 1e-15 * prev.max(1e-300) {
            break;
        }
    }
    Ok(Nmf { u, v, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted(n: usize, m: usize, rank: usize, seed: u64) -> Matrix {
        let mut r = rng::seeded(seed);
        let a = Matrix::from_vec(n, rank, (0..n * rank).map(|_| r.gen_range(0.1..1.0)).collect());
        let b = Matrix::from_vec(m, rank, (0..m * rank).map(|_| r.gen_range(0.1..1.0)).collect());
        a.matmul_t(&b)
    }

    fn rmse(p: &Matrix, f: &Nmf) -> f64 {
        let recon = f.u.matmul_t(&f.v);
        let ss: f64 = p.data().iter().zip(recon.data()).map(|(a, b)| (a - b).powi(2)).sum();
        (ss / p.data().len() as f64).sqrt()
    }

    #[test]
    fn recovers_planted_rank_two() {
        let p = planted(15, 10, 2, 4);
        let f = nmf(&p, &[true; 150], 2, 1, 5000).unwrap();
        assert!(rmse(&p, &f) < 1e-3, "rmse {}", rmse(&p, &f));
    }

    #[test]
    fn objective_monotone_and_factors_nonnegative() {
        let p = planted(12, 9, 3, 2);
        let mut r = rng::seeded(9);
        let mask: Vec<bool> = (0..108).map(|_| r.gen_bool(0.6)).collect();
        let f = nmf(&p, &mask, 3, 5, 300).unwrap();
        for w in f.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].max(1.0), "{} > {}", w[1], w[0]);
        }
        assert!(f.u.data().iter().chain(f.v.data()).all(|&x| x >= 0.0));
    }

    #[test]
    fn rejects_negative_values() {
        let p = Matrix::from_rows(&[vec![1.0, -0.5]]);
        assert!(nmf(&p, &[true, true], 1, 0, 10).is_err());
        // negative but unobserved is fine
        assert!(nmf(&p, &[true, false], 1, 0, 10).is_ok());
    }
}
