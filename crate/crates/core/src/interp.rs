//! Periodic cubic Hermite interpolation on a uniform grid.
//!
//! Orbits and phase-response samples come with exact derivatives (the vector
//! field, or the adjoint right-hand side), so a local Hermite interpolant is
//! both cheaper and better conditioned than a global spline: it is C^1,
//! overshoot-free on this data, and its derivative is available in closed
//! form and agrees exactly with the stored derivatives at the nodes.

use alloc::vec::Vec;

use crate::fmath;

/// Uniformly sampled 1-periodic (in `t/period`) vector-valued function with
/// stored derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicHermite {
    period: f64,
    n: usize,
    dim: usize,
    /// Row-major: sample k occupies `[k*dim, (k+1)*dim)`.
    values: Vec<f64>,
    /// dValues/dt at the samples, same layout.
    derivs: Vec<f64>,
}

impl PeriodicHermite {
    pub fn new(period: f64, dim: usize, values: Vec<f64>, derivs: Vec<f64>) -> Self {
        assert!(period > 0.0);
        assert!(dim > 0);
        assert_eq!(values.len(), derivs.len());
        assert_eq!(values.len() % dim, 0);
        let n = values.len() / dim;
        assert!(n >= 2);
        PeriodicHermite { period, n, dim, values, derivs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn value_at_node(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.dim + i]
    }

    pub fn deriv_at_node(&self, k: usize, i: usize) -> f64 {
        self.derivs[k * self.dim + i]
    }

    pub fn node_values(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn node_derivs(&self, k: usize) -> &[f64] {
        &self.derivs[k * self.dim..(k + 1) * self.dim]
    }

    #[inline]
    fn locate(&self, t: f64) -> (usize, usize, f64) {
        let u = fmath::wrap01(t / self.period) * self.n as f64;
        let mut k = u as usize;
        if k >= self.n {
            k = self.n - 1;
        }
        let frac = u - k as f64;
        let k1 = if k + 1 == self.n { 0 } else { k + 1 };
        (k, k1, frac)
    }

    /// Interpolated value of every component at time `t` (any real number).
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let (k0, k1, u) = self.locate(t);
        let dt = self.period / self.n as f64;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let a = k0 * self.dim;
        let b = k1 * self.dim;
        for i in 0..self.dim {
            out[i] = h00 * self.values[a + i]
                + h10 * dt * self.derivs[a + i]
                + h01 * self.values[b + i]
                + h11 * dt * self.derivs[b + i];
        }
    }

    pub fn eval_component(&self, t: f64, i: usize) -> f64 {
        let (k0, k1, u) = self.locate(t);
        let dt = self.period / self.n as f64;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.values[k0 * self.dim + i]
            + h10 * dt * self.derivs[k0 * self.dim + i]
            + h01 * self.values[k1 * self.dim + i]
            + h11 * dt * self.derivs[k1 * self.dim + i]
    }

    /// Derivative of the interpolant (exactly the stored derivative at the
    /// nodes).
    pub fn eval_deriv_component(&self, t: f64, i: usize) -> f64 {
        let (k0, k1, u) = self.locate(t);
        let dt = self.period / self.n as f64;
        let u2 = u * u;
        let dh00 = 6.0 * u2 - 6.0 * u;
        let dh10 = 3.0 * u2 - 4.0 * u + 1.0;
        let dh01 = -6.0 * u2 + 6.0 * u;
        let dh11 = 3.0 * u2 - 2.0 * u;
        (dh00 * self.values[k0 * self.dim + i]
            + dh10 * dt * self.derivs[k0 * self.dim + i]
            + dh01 * self.values[k1 * self.dim + i]
            + dh11 * dt * self.derivs[k1 * self.dim + i])
            / dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn sine_table(n: usize) -> PeriodicHermite {
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            values.push(t.sin());
            derivs.push(t.cos());
        }
        PeriodicHermite::new(2.0 * PI, 1, values, derivs)
    }

    #[test]
    fn reproduces_nodes_exactly() {
        let table = sine_table(64);
        for k in 0..64 {
            let t = 2.0 * PI * k as f64 / 64.0;
            assert_eq!(table.eval_component(t, 0), table.value_at_node(k, 0));
        }
    }

    #[test]
    fn quartic_accuracy_on_smooth_data() {
        let coarse = sine_table(64);
        let fine = sine_table(128);
        let mut worst_coarse: f64 = 0.0;
        let mut worst_fine: f64 = 0.0;
        for j in 0..1000 {
            let t = 2.0 * PI * (j as f64 + 0.31) / 1000.0;
            worst_coarse = worst_coarse.max((coarse.eval_component(t, 0) - t.sin()).abs());
            worst_fine = worst_fine.max((fine.eval_component(t, 0) - t.sin()).abs());
        }
        assert!(worst_coarse < 1e-6);
        // Hermite interpolation converges like h^4.
        let ratio = worst_coarse / worst_fine;
        assert!(ratio > 8.0, "convergence ratio {ratio}");
    }

    #[test]
    fn wraps_periodically() {
        let table = sine_table(32);
        let t = 1.234;
        let a = table.eval_component(t, 0);
        let b = table.eval_component(t + 2.0 * PI, 0);
        let c = table.eval_component(t - 4.0 * PI, 0);
        assert!((a - b).abs() < 1e-15);
        assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_nodes_and_analytic() {
        let table = sine_table(128);
        for k in [0usize, 17, 127] {
            let t = 2.0 * PI * k as f64 / 128.0;
            let d = table.eval_deriv_component(t, 0);
            assert!((d - t.cos()).abs() < 1e-12);
        }
        let t = 0.777;
        assert!((table.eval_deriv_component(t, 0) - t.cos()).abs() < 1e-5);
    }
}
