//! Sampling paths of a chain to check its stationary distribution.

use rand::Rng;

use crate::chain::SparseMatrix;

/// Cumulative rows for inverse-transform sampling.
pub struct PathSampler {
    rows: Vec<(Vec<usize>, Vec<f64>)>,
}

impl PathSampler {
    pub fn new(p: &SparseMatrix) -> Self {
        let rows = (0..p.dim())
            .map(|i| {
                let mut cols = Vec::new();
                let mut cum = Vec::new();
                let mut acc = 0.0;
                for (j, v) in p.row(i) {
                    acc += v;
                    cols.push(j);
                    cum.push(acc);
                }
                (cols, cum)
            })
            .collect();
        Self { rows }
    }

    pub fn step<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> usize {
        let (cols, cum) = &self.rows[i];
        let u = rng.random::<f64>() * cum.last().copied().unwrap_or(1.0);
        let k = cum.partition_point(|c| *c <= u).min(cols.len() - 1);
        cols[k]
    }

    /// Fraction of `steps` spent in each state after a burn-in.
    pub fn occupancy<R: Rng + ?Sized>(&self, start: usize, burn_in: u64, steps: u64, rng: &mut R) -> Vec<f64> {
        let mut s = start;
        for _ in 0..burn_in {
            s = self.step(s, rng);
        }
        let mut counts = vec![0u64; self.rows.len()];
        for _ in 0..steps {
            s = self.step(s, rng);
            counts[s] += 1;
        }
        counts.iter().map(|c| *c as f64 / steps as f64).collect()
    }
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn two_state_occupancy() {
        let m = SparseMatrix::from_dense(&[vec![0.9, 0.1], vec![0.2, 0.8]]);
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let occ = PathSampler::new(&m).occupancy(0, 100, 200_000, &mut rng);
        assert!(total_variation(&occ, &[2.0 / 3.0, 1.0 / 3.0]) < 0.01);
    }
}
