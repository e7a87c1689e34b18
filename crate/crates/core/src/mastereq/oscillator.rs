use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{CMatrix, Potential};
use crate::{Error, Result};

/// Position and momentum on the lowest `n` levels of a reference oscillator.
///
/// `X = (a + a†)/√(2mω)`, `P = i√(mω/2)(a† − a)`; the canonical commutator
/// holds on the leading `(n−1)×(n−1)` block only.
#[derive(Debug, Clone)]
pub struct OscillatorOperators {
    n: usize,
    mass: f64,
    omega: f64,
    x: CMatrix,
    p: CMatrix,
    nodes: Vec<f64>,
    eigvecs: DMatrix<f64>,
}

impl OscillatorOperators {
    pub fn new(n: usize, mass: f64, omega: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(format!("truncation must be >= 2, got {n}")));
        }
        if !(mass > 0.0 && omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference mass and frequency must be > 0, got ({mass}, {omega})"
            )));
        }
        let xs = (1.0 / (2.0 * mass * omega)).sqrt();
        let ps = (mass * omega / 2.0).sqrt();
        let mut xr = DMatrix::<f64>::zeros(n, n);
        let mut x = CMatrix::zeros(n, n);
        let mut p = CMatrix::zeros(n, n);
        for k in 1..n {
            let s = (k as f64).sqrt();
            xr[(k - 1, k)] = xs * s;
            xr[(k, k - 1)] = xs * s;
            x[(k - 1, k)] = Complex64::new(xs * s, 0.0);
            x[(k, k - 1)] = Complex64::new(xs * s, 0.0);
            // a_{k-1,k} = √k, so (a† − a)_{k-1,k} = −√k and (a† − a)_{k,k-1} = √k
            p[(k - 1, k)] = Complex64::new(0.0, -ps * s);
            p[(k, k - 1)] = Complex64::new(0.0, ps * s);
        }

        let eig = xr.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let nodes: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut eigvecs = DMatrix::<f64>::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            // Fix the sign by the ground-state component for reproducibility.
            let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
            eigvecs.set_column(col, &(v * sign));
        }

        Ok(OscillatorOperators {
            n,
            mass,
            omega,
            x,
            p,
            nodes,
            eigvecs,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn reference_mass(&self) -> f64 {
        self.mass
    }

    pub fn reference_omega(&self) -> f64 {
        self.omega
    }

    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    pub fn p(&self) -> &CMatrix {
        &self.p
    }

    /// Eigenvalues of the truncated `X`, ascending.
    pub fn position_nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `max |[X, P] − i·1|` over the leading `(n−1)×(n−1)` block.
    pub fn commutator_defect(&self) -> f64 {
        let c = &self.x * &self.p - &self.p * &self.x;
        let m = self.n - 1;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let target = if i == j { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((c[(i, j)] - target).norm());
            }
        }
        worst
    }

    fn unitary(&self) -> CMatrix {
        self.eigvecs.map(|v| Complex64::new(v, 0.0))
    }

    /// `V(X)` through the spectral decomposition of the truncated `X`.
    pub fn potential_matrix(&self, v: &Potential) -> CMatrix {
        let u = self.unitary();
        let d = DVector::from_iterator(self.n, self.nodes.iter().map(|&x| Complex64::new(v.eval(x), 0.0)));
        &u * CMatrix::from_diagonal(&d) * u.adjoint()
    }

    /// `ρ` expressed in the eigenbasis of the truncated `X`.
    pub fn to_position_basis(&self, rho: &CMatrix) -> CMatrix {
        let u = self.unitary();
        u.adjoint() * rho * u
    }

    /// `|ψ⟩⟨ψ|` for normalized Fock amplitudes.
    pub fn pure_state(&self, amps: &[Complex64]) -> Result<CMatrix> {
        if amps.len() != self.n {
            return Err(Error::InvalidSize(format!(
                "expected {} amplitudes, got {}",
                self.n,
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("state vector vanishes".into()));
        }
        let v = DVector::from_iterator(self.n, amps.iter().map(|a| a / norm.sqrt()));
        Ok(&v * v.adjoint())
    }

    pub fn ground_state(&self) -> CMatrix {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.n];
        amps[0] = Complex64::new(1.0, 0.0);
        self.pure_state(&amps).expect("ground state is normalized")
    }

    /// Truncated, renormalized coherent state `|α⟩`.
    pub fn coherent_state(&self, alpha: Complex64) -> Result<CMatrix> {
        self.pure_state(&coherent_amplitudes(alpha, self.n))
    }

    /// Truncated, renormalized even cat `|α⟩ + |−α⟩`.
    pub fn cat_state(&self, alpha: Complex64) -> Result<CMatrix> {
        let a = coherent_amplitudes(alpha, self.n);
        let b = coherent_amplitudes(-alpha, self.n);
        let amps: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        self.pure_state(&amps)
    }
}

fn coherent_amplitudes(alpha: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for k in 0..n {
        if k > 0 {
            c = c * alpha / (k as f64).sqrt();
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_commutator_on_leading_block() {
        let ops = OscillatorOperators::new(12, 2.0, 0.5).unwrap();
        assert!(ops.commutator_defect() < 1e-13);
        let c = ops.x() * ops.p() - ops.p() * ops.x();
        // the last diagonal entry carries the truncation error −i(n−1)
        assert!((c[(11, 11)] - Complex64::new(0.0, -11.0)).norm() < 1e-12);
    }

    #[test]
    fn operators_are_hermitian() {
        let ops = OscillatorOperators::new(8, 1.0, 1.0).unwrap();
        assert!(super::super::hermiticity_defect(ops.x()) == 0.0);
        assert!(super::super::hermiticity_defect(ops.p()) == 0.0);
    }

    #[test]
    fn position_nodes_are_hermite_roots() {
        // roots of H_3: 0, ±√(3/2)
        let ops = OscillatorOperators::new(3, 1.0, 1.0).unwrap();
        let r = 1.5f64.sqrt();
        let nodes = ops.position_nodes();
        assert!((nodes[0] + r).abs() < 1e-14 && nodes[1].abs() < 1e-14 && (nodes[2] - r).abs() < 1e-14);
    }

    #[test]
    fn potential_of_harmonic_is_truncated_square() {
        let ops = OscillatorOperators::new(10, 1.0, 1.0).unwrap();
        let v = ops.potential_matrix(&Potential::harmonic(1.0, 1.0));
        let direct = ops.x() * ops.x() * Complex64::new(0.5, 0.0);
        let diff = (&v - &direct).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn position_basis_round_trip_preserves_trace() {
        let ops = OscillatorOperators::new(10, 1.0, 1.0).unwrap();
        let rho = ops.cat_state(Complex64::new(1.2, 0.0)).unwrap();
        let px = ops.to_position_basis(&rho);
        assert!((super::super::trace_re(&px) - 1.0).abs() < 1e-13);
    }
}
