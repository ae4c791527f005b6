//! Lloyd's k-means with k-means++ seeding.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};
use crate::rng;

#[derive(Clone, Debug)]
pub struct KMeans {
    pub centroids: Matrix,
    pub assignments: Vec<usize>,
    /// Inertia after every assignment step.
    pub inertia: Vec<f64>,
}

/// Index of the nearest centroid (lowest index on ties) and its squared distance.
pub fn nearest(centroids: &Matrix, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.iter_rows().enumerate() {
        let d = squared_distance(row, x);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(x: &Matrix, k: usize, rng: &mut rng::Rng) -> Vec<usize> {
    let n = x.rows();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| squared_distance(x.row(i), x.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    if target < w {
                        pick = Some(i);
                        break;
                    }
                    target -= w;
                }
            }
            // rounding can run past the end; fall back to the last positive weight
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            // only duplicates remain
            (0..n).find(|i| !chosen.contains(i)).expect("n >= k")
        };
        chosen.push(pick);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(squared_distance(x.row(i), x.row(pick)));
        }
    }
    chosen
}

pub fn kmeans(x: &Matrix, k: usize, seed: u64, max_iter: usize) -> Result<KMeans> {
    let n = x.rows();
    if k == 0 || n < k {
        return Err(Error::invalid(format!("k-means needs 1 <= k <= n, got k={k}, n={n}")));
    }
    let mut rng = rng::seeded(seed);
    let mut centroids = x.select_rows(&plus_plus_init(x, k, &mut rng));
    let mut assignments = vec![usize::MAX; n];
    let mut inertia = Vec::new();

    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        let mut dist = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest(&centroids, x.row(i));
            dist[i] = d;
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        inertia.push(dist.iter().sum());
        if !changed {
            break;
        }

        let mut sums = Matrix::zeros(k, x.cols());
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assignments[i]] += 1;
            for (s, v) in sums.row_mut(assignments[i]).iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (dst, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // reseed to the point farthest from its centroid
                let far = (0..n)
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .expect("n >= 1");
                centroids.row_mut(c).copy_from_slice(x.row(far));
                dist[far] = 0.0;
            }
        }
    }
    Ok(KMeans {
        centroids,
        assignments,
        inertia,
    })
}
