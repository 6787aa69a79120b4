//! Orthonormal 1D harmonic-oscillator eigenfunctions (Hermite functions)
//! in the dimensionless coordinate xi = x / b.
//!
//! u_n(xi) = pi^{-1/4} (2^n n!)^{-1/2} H_n(xi) exp(-xi^2/2), so that
//! int u_m u_n dxi = delta_mn. Physical oscillator states are
//! chi_n(x) = u_n(x/b) / sqrt(b).

/// Values u_0..u_nmax at xi (upward recurrence; Hermite functions stay
/// bounded, so this is stable for all n).
pub fn hermite_values(nmax: usize, xi: f64) -> Vec<f64> {
    let mut u = vec![0.0; nmax + 1];
    u[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if nmax == 0 {
        return u;
    }
    u[1] = 2f64.sqrt() * xi * u[0];
    for n in 1..nmax {
        u[n + 1] = (2.0 / (n as f64 + 1.0)).sqrt() * xi * u[n]
            - (n as f64 / (n as f64 + 1.0)).sqrt() * u[n - 1];
    }
    u
}

/// Values, first and second xi-derivatives of u_0..u_nmax at xi.
///
/// u_n' = sqrt(n/2) u_{n-1} - sqrt((n+1)/2) u_{n+1};
/// u_n'' = (xi^2 - (2n+1)) u_n from the oscillator equation.
pub fn hermite_values_derivs(nmax: usize, xi: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let ext = hermite_values(nmax + 1, xi);
    let mut val = vec![0.0; nmax + 1];
    let mut d1 = vec![0.0; nmax + 1];
    let mut d2 = vec![0.0; nmax + 1];
    for n in 0..=nmax {
        val[n] = ext[n];
        let lower = if n == 0 { 0.0 } else { (n as f64 / 2.0).sqrt() * ext[n - 1] };
        d1[n] = lower - ((n as f64 + 1.0) / 2.0).sqrt() * ext[n + 1];
        d2[n] = (xi * xi - (2.0 * n as f64 + 1.0)) * ext[n];
    }
    (val, d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{integrate, QuadratureSpec};

    #[test]
    fn matches_explicit_low_orders() {
        let norm = std::f64::consts::PI.powf(-0.25);
        for &xi in &[-2.3, 0.0, 0.7, 1.9] {
            let u = hermite_values(3, xi);
            let g = (-0.5f64 * xi * xi).exp();
            // H_2(x) = 4x^2 - 2, normalisation 1/sqrt(2^2 2!) = 1/(2 sqrt(2))
            let u2 = norm * (4.0 * xi * xi - 2.0) / (2.0 * 2f64.sqrt()) * g;
            assert!((u[2] - u2).abs() < 1e-14, "u_2({xi}) = {} vs {}", u[2], u2);
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        for (m, n) in [(0usize, 0usize), (3, 3), (7, 7), (2, 6), (5, 9)] {
            let r = integrate(
                |xi: f64| {
                    let u = hermite_values(9, xi);
                    u[m] * u[n]
                },
                -12.0,
                12.0,
                QuadratureSpec::default(),
            )
            .unwrap();
            let want = if m == n { 1.0 } else { 0.0 };
            assert!(
                (r.value - want).abs() < 1e-10,
                "<u_{m}|u_{n}> = {}, want {want}",
                r.value
            );
        }
    }

    #[test]
    fn oscillator_equation_residual() {
        // -u'' + xi^2 u = (2n+1) u
        for n in [0usize, 4, 11] {
            for &xi in &[-1.7, 0.4, 2.9] {
                let (u, _, u2) = hermite_values_derivs(n, xi);
                let lhs = -u2[n] + xi * xi * u[n];
                let rhs = (2.0 * n as f64 + 1.0) * u[n];
                assert!(
                    (lhs - rhs).abs() < 1e-12 * rhs.abs().max(1e-3),
                    "ODE residual at n={n}, xi={xi}"
                );
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-6;
        for &xi in &[-0.9, 1.3] {
            let (_, d1, _) = hermite_values_derivs(8, xi);
            let up = hermite_values(8, xi + h);
            let dn = hermite_values(8, xi - h);
            for n in 0..=8 {
                let fd = (up[n] - dn[n]) / (2.0 * h);
                assert!(
                    (d1[n] - fd).abs() < 1e-8,
                    "u_{n}'({xi}) = {} vs fd {}",
                    d1[n],
                    fd
                );
            }
        }
    }
}
