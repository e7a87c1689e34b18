use super::CMatrix;
use num_complex::Complex64;

/// One classical fourth-order Runge-Kutta step for `dρ/dt = f(ρ)`.
pub(crate) fn step<F>(rho: &CMatrix, h: f64, f: &F) -> CMatrix
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let k1 = f(rho);
    let k2 = f(&(rho + &k1 * half));
    let k3 = f(&(rho + &k2 * half));
    let k4 = f(&(rho + &k3 * full));
    rho + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0)
}

/// Split `[0, t]` into equal steps no longer than `dt`.
pub(crate) fn schedule(t: f64, dt: f64) -> (usize, f64) {
    if t == 0.0 {
        return (0, 0.0);
    }
    let n = (t / dt - 1e-9).ceil().max(1.0) as usize;
    (n, t / n as f64)
}
