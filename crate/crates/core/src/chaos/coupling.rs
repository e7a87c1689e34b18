use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::stream_rng;
use crate::{Error, Result};

/// Real symmetric traceless coupling operator `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    q: DMatrix<f64>,
    seed: u64,
    stream: u64,
}

impl CouplingMatrix {
    /// Wrap an explicit matrix. It must be square and symmetric; the trace is
    /// projected out.
    pub fn from_matrix(mut q: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() < 2 {
            return Err(Error::InvalidSize(format!(
                "coupling must be square with size >= 2, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if q != q.transpose() {
            return Err(Error::InvalidParameter("coupling must be symmetric".into()));
        }
        remove_trace(&mut q);
        Ok(CouplingMatrix { q, seed: 0, stream: 0 })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn trace(&self) -> f64 {
        self.q.trace()
    }

    /// `c·Q`.
    pub fn scaled(&self, c: f64) -> Self {
        CouplingMatrix {
            q: &self.q * c,
            ..self.clone()
        }
    }

    /// `|Q_{m,m+1}|²` for `m = 0..M−1`.
    pub fn near_diagonal_sq(&self) -> Vec<f64> {
        (0..self.dim() - 1).map(|m| self.q[(m, m + 1)].powi(2)).collect()
    }
}

fn remove_trace(q: &mut DMatrix<f64>) {
    let n = q.nrows();
    let shift = q.trace() / n as f64;
    for i in 0..n {
        q[(i, i)] -= shift;
    }
}

/// Gaussian coupling: off-diagonal variance 1, diagonal variance 2, then
/// trace-projected. Uses stream 1 of `seed`.
pub fn sample_coupling(m: usize, seed: u64) -> Result<CouplingMatrix> {
    sample_coupling_stream(m, seed, 1)
}

pub(crate) fn sample_coupling_stream(m: usize, seed: u64, stream: u64) -> Result<CouplingMatrix> {
    if m < 2 {
        return Err(Error::InvalidSize(format!("coupling size must be >= 2, got {m}")));
    }
    let mut rng = stream_rng(seed, stream);
    let mut q = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            let g: f64 = rng.sample(StandardNormal);
            if i == j {
                q[(i, i)] = g * std::f64::consts::SQRT_2;
            } else {
                q[(i, j)] = g;
                q[(j, i)] = g;
            }
        }
    }
    remove_trace(&mut q);
    Ok(CouplingMatrix { q, seed, stream })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_traceless() {
        let q = sample_coupling(300, 4).unwrap();
        assert_eq!(q.matrix(), &q.matrix().transpose());
        assert!(q.trace().abs() < 1e-10);
    }

    #[test]
    fn near_diagonal_variance() {
        // One M = 1000 draw has sd ≈ 4.5% on this mean, so pool ten.
        let v: Vec<f64> = (0..10).flat_map(|s| sample_coupling(1000, s).unwrap().near_diagonal_sq()).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn explicit_matrix_checks() {
        assert!(CouplingMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0])).is_err());
        let q = CouplingMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 1.0])).unwrap();
        assert_eq!(q.matrix()[(0, 0)], 1.0);
        assert_eq!(q.matrix()[(1, 1)], -1.0);
    }
}
