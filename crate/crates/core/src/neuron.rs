//! Single bursting-neuron dynamics: a 4-ODE conductance model with a fast
//! potassium gate `m`, a slow potassium gate `w`, and a synaptic release
//! variable `s`. One cell drives one leg; a burst is the swing phase.

use alloc::format;

use crate::error::{CoreError, Result};
use crate::fmath;

/// State dimension of one cell: (v, m, w, s).
pub const DIM: usize = 4;

/// Constant parameters of the bursting neuron model.
///
/// Units follow the usual conductance-model conventions (mV, ms, mS, uA);
/// the gains `k_*` are 1/mV and `a_syn`, `gamma`, `delta` are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronParams {
    /// Membrane capacitance C.
    pub cap: f64,
    pub g_ca: f64,
    pub g_k: f64,
    pub g_ks: f64,
    pub g_l: f64,
    /// Synaptic strength applied to every network connection.
    pub g_syn: f64,
    pub e_ca: f64,
    pub e_k: f64,
    pub e_ks: f64,
    pub e_l: f64,
    pub e_s_post: f64,
    pub e_s_pre: f64,
    pub k_ca: f64,
    pub k_k: f64,
    pub k_ks: f64,
    pub k_s: f64,
    pub v_ca: f64,
    pub v_k: f64,
    pub v_ks: f64,
    /// Synapse activation scale `a`.
    pub a_syn: f64,
    /// Fast-gate rate multiplier.
    pub gamma: f64,
    /// Slow-gate rate multiplier; sets the burst/quiescence alternation.
    pub delta: f64,
    /// Synapse time constant (ms).
    pub tau_s: f64,
    /// Baseline external drive; the speed parameter of the model.
    pub i_ext: f64,
}

/// Bursting operating range of the baseline drive.
pub const I_EXT_MIN: f64 = 35.65;
pub const I_EXT_MAX: f64 = 37.7;

impl Default for NeuronParams {
    fn default() -> Self {
        NeuronParams {
            cap: 1.2,
            g_ca: 4.4,
            g_k: 9.0,
            g_ks: 0.5,
            g_l: 2.0,
            g_syn: 0.01,
            e_ca: 120.0,
            e_k: -80.0,
            e_ks: -80.0,
            e_l: -60.0,
            e_s_post: -70.0,
            e_s_pre: 2.0,
            k_ca: 0.056,
            k_k: 0.1,
            k_ks: 0.8,
            k_s: 0.11,
            v_ca: -1.2,
            v_k: 2.0,
            v_ks: -26.0,
            a_syn: 444.48,
            gamma: 5.0,
            delta: 0.027,
            tau_s: 5.56,
            i_ext: I_EXT_MIN,
        }
    }
}

impl NeuronParams {
    /// Default parameters at a given baseline drive.
    pub fn with_i_ext(i_ext: f64) -> Self {
        NeuronParams { i_ext, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("cap", self.cap),
            ("g_ca", self.g_ca),
            ("g_k", self.g_k),
            ("g_ks", self.g_ks),
            ("g_l", self.g_l),
            ("tau_s", self.tau_s),
            ("delta", self.delta),
        ];
        for (name, value) in positives {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CoreError::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        if !self.i_ext.is_finite() {
            return Err(CoreError::InvalidParams(format!("i_ext must be finite, got {}", self.i_ext)));
        }
        Ok(())
    }

    // Steady-state activations and voltage-dependent time scales.

    #[inline(always)]
    pub fn n_inf(&self, v: f64) -> f64 {
        fmath::sigmoid(2.0 * self.k_ca * (v - self.v_ca))
    }

    #[inline(always)]
    pub fn m_inf(&self, v: f64) -> f64 {
        fmath::sigmoid(2.0 * self.k_k * (v - self.v_k))
    }

    #[inline(always)]
    pub fn w_inf(&self, v: f64) -> f64 {
        fmath::sigmoid(2.0 * self.k_ks * (v - self.v_ks))
    }

    #[inline(always)]
    pub fn s_inf(&self, v: f64) -> f64 {
        self.a_syn * fmath::sigmoid(2.0 * self.k_s * (v - self.e_s_pre))
    }

    #[inline(always)]
    pub fn tau_m(&self, v: f64) -> f64 {
        fmath::sech(self.k_k * (v - self.v_k))
    }

    #[inline(always)]
    pub fn tau_w(&self, v: f64) -> f64 {
        fmath::sech(self.k_ks * (v - self.v_ks))
    }
}

/// Phase-space point of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NeuronState {
    pub v: f64,
    pub m: f64,
    pub w: f64,
    pub s: f64,
}

impl NeuronState {
    pub fn new(v: f64, m: f64, w: f64, s: f64) -> Self {
        NeuronState { v, m, w, s }
    }

    pub fn to_array(self) -> [f64; DIM] {
        [self.v, self.m, self.w, self.s]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        NeuronState { v: y[0], m: y[1], w: y[2], s: y[3] }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.m.is_finite() && self.w.is_finite() && self.s.is_finite()
    }
}

/// Right-hand side of the single-cell ODEs with an extra drive current added
/// to the baseline on the voltage equation.
///
/// Writes (v', m', w', s') into `dy`.
#[inline]
pub fn vector_field_into(y: &[f64], p: &NeuronParams, i_extra: f64, dy: &mut [f64]) {
    let (v, m, w, s) = (y[0], y[1], y[2], y[3]);
    let i_ca = p.g_ca * p.n_inf(v) * (v - p.e_ca);
    let i_k = p.g_k * m * (v - p.e_k);
    let i_ks = p.g_ks * w * (v - p.e_ks);
    let i_l = p.g_l * (v - p.e_l);
    dy[0] = (-(i_ca + i_k + i_ks + i_l) + p.i_ext + i_extra) / p.cap;
    // gamma / tau_m(v) = gamma * cosh(k_k (v - v_k)), likewise for w.
    dy[1] = p.gamma * fmath::cosh(p.k_k * (v - p.v_k)) * (p.m_inf(v) - m);
    dy[2] = p.delta * fmath::cosh(p.k_ks * (v - p.v_ks)) * (p.w_inf(v) - w);
    dy[3] = (p.s_inf(v) * (1.0 - s) - s) / p.tau_s;
}

/// Typed wrapper over [`vector_field_into`]; rejects non-finite states.
pub fn vector_field(state: &NeuronState, p: &NeuronParams, i_extra: f64) -> Result<NeuronState> {
    if !state.is_finite() {
        return Err(CoreError::NonFiniteState { t: f64::NAN });
    }
    let y = state.to_array();
    let mut dy = [0.0; DIM];
    vector_field_into(&y, p, i_extra, &mut dy);
    Ok(NeuronState::from_slice(&dy))
}

/// Single cell as an ODE system, with a constant extra drive on top of the
/// baseline.
pub struct NeuronCell<'a> {
    pub params: &'a NeuronParams,
    pub i_extra: f64,
}

impl<'a> NeuronCell<'a> {
    pub fn new(params: &'a NeuronParams) -> Self {
        NeuronCell { params, i_extra: 0.0 }
    }
}

impl crate::ode::OdeSystem for NeuronCell<'_> {
    fn dim(&self) -> usize {
        DIM
    }
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
        vector_field_into(y, self.params, self.i_extra, dydt);
    }
}

/// Jacobian of the single-cell field at `y`, row-major 4x4.
///
/// The synaptic drive is self-contained (`s` does not feed back into `v`),
/// so column 3 only touches the `s` row.
pub fn jacobian(y: &[f64], p: &NeuronParams) -> [[f64; DIM]; DIM] {
    let (v, m, w, s) = (y[0], y[1], y[2], y[3]);
    let mut j = [[0.0; DIM]; DIM];

    let n = p.n_inf(v);
    let dn = 2.0 * p.k_ca * n * (1.0 - n);
    // d/dv of -(I_Ca + I_K + I_KS + I_L)/C
    j[0][0] = -(p.g_ca * (dn * (v - p.e_ca) + n) + p.g_k * m + p.g_ks * w + p.g_l) / p.cap;
    j[0][1] = -p.g_k * (v - p.e_k) / p.cap;
    j[0][2] = -p.g_ks * (v - p.e_ks) / p.cap;

    let mi = p.m_inf(v);
    let dmi = 2.0 * p.k_k * mi * (1.0 - mi);
    let ck = fmath::cosh(p.k_k * (v - p.v_k));
    let sk = fmath::sinh(p.k_k * (v - p.v_k));
    j[1][0] = p.gamma * (p.k_k * sk * (mi - m) + ck * dmi);
    j[1][1] = -p.gamma * ck;

    let wi = p.w_inf(v);
    let dwi = 2.0 * p.k_ks * wi * (1.0 - wi);
    let cks = fmath::cosh(p.k_ks * (v - p.v_ks));
    let sks = fmath::sinh(p.k_ks * (v - p.v_ks));
    j[2][0] = p.delta * (p.k_ks * sks * (wi - w) + cks * dwi);
    j[2][2] = -p.delta * cks;

    let si = p.s_inf(v);
    let dsi = 2.0 * p.k_s * si * (1.0 - si / p.a_syn);
    j[3][0] = dsi * (1.0 - s) / p.tau_s;
    j[3][3] = -(si + 1.0) / p.tau_s;

    j
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_constants() {
        let p = NeuronParams::default();
        assert_eq!(p.g_ca, 4.4);
        assert_eq!(p.g_k, 9.0);
        assert_eq!(p.g_ks, 0.5);
        assert_eq!(p.g_l, 2.0);
        assert_eq!(p.g_syn, 0.01);
        assert_eq!(p.e_ca, 120.0);
        assert_eq!(p.e_k, -80.0);
        assert_eq!(p.e_ks, -80.0);
        assert_eq!(p.e_l, -60.0);
        assert_eq!(p.e_s_post, -70.0);
        assert_eq!(p.e_s_pre, 2.0);
        assert_eq!(p.k_ca, 0.056);
        assert_eq!(p.k_k, 0.1);
        assert_eq!(p.k_ks, 0.8);
        assert_eq!(p.k_s, 0.11);
        assert_eq!(p.v_ca, -1.2);
        assert_eq!(p.v_k, 2.0);
        assert_eq!(p.v_ks, -26.0);
        assert_eq!(p.a_syn, 444.48);
        assert_eq!(p.cap, 1.2);
        assert_eq!(p.gamma, 5.0);
        assert_eq!(p.tau_s, 5.56);
        assert_eq!(p.delta, 0.027);
        p.validate().unwrap();
    }

    #[test]
    fn gate_midpoints() {
        let p = NeuronParams::default();
        // At the half-activation voltage the sigmoids sit at 1/2 and the
        // sech time scales at 1.
        assert_eq!(p.m_inf(p.v_k), 0.5);
        assert_eq!(p.tau_m(p.v_k), 1.0);
        assert_eq!(p.w_inf(p.v_ks), 0.5);
        assert_eq!(p.tau_w(p.v_ks), 1.0);
        assert_eq!(p.s_inf(p.e_s_pre), p.a_syn / 2.0);
    }

    #[test]
    fn vdot_matches_term_by_term_sum() {
        // Independent term-by-term evaluation of the voltage equation at a
        // fixed reference state, written out with no shared helpers.
        let p = NeuronParams::with_i_ext(35.9);
        let (v, m, w, s) = (-31.25, 0.0375, 0.2093, 0.0561);
        let state = NeuronState::new(v, m, w, s);

        let n_inf = 1.0 / (1.0 + (-2.0 * 0.056 * (v - (-1.2))).exp());
        let i_ca = 4.4 * n_inf * (v - 120.0);
        let i_k = 9.0 * m * (v - (-80.0));
        let i_ks = 0.5 * w * (v - (-80.0));
        let i_l = 2.0 * (v - (-60.0));
        let expected_vdot = (-(i_ca + i_k + i_ks + i_l) + 35.9) / 1.2;

        let dy = vector_field(&state, &p, 0.0).unwrap();
        assert!(
            ((dy.v - expected_vdot) / expected_vdot).abs() < 1e-12,
            "vdot {} vs oracle {}",
            dy.v,
            expected_vdot
        );
    }

    #[test]
    fn extra_drive_adds_to_baseline() {
        let p = NeuronParams::with_i_ext(35.9);
        let state = NeuronState::new(-40.0, 0.1, 0.3, 0.05);
        let base = vector_field(&state, &p, 0.0).unwrap();
        let driven = vector_field(&state, &p, 0.6).unwrap();
        assert!((driven.v - base.v - 0.6 / p.cap).abs() < 1e-14);
        assert_eq!(driven.m, base.m);
        assert_eq!(driven.w, base.w);
        assert_eq!(driven.s, base.s);
    }

    #[test]
    fn rejects_non_finite_state() {
        let p = NeuronParams::default();
        let state = NeuronState::new(f64::NAN, 0.0, 0.0, 0.0);
        assert!(vector_field(&state, &p, 0.0).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = NeuronParams::with_i_ext(36.2);
        let y = [-28.0, 0.22, 0.31, 0.4];
        let j = jacobian(&y, &p);
        let h = 1e-6;
        for col in 0..DIM {
            let mut yp = y;
            let mut ym = y;
            yp[col] += h;
            ym[col] -= h;
            let mut fp = [0.0; DIM];
            let mut fm = [0.0; DIM];
            vector_field_into(&yp, &p, 0.0, &mut fp);
            vector_field_into(&ym, &p, 0.0, &mut fm);
            for row in 0..DIM {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                let scale = 1.0 + fd.abs();
                assert!(
                    (j[row][col] - fd).abs() / scale < 1e-6,
                    "J[{row}][{col}] = {} vs fd {}",
                    j[row][col],
                    fd
                );
            }
        }
    }

    #[test]
    fn validate_rejects_bad_params() {
        let mut p = NeuronParams::default();
        p.tau_s = 0.0;
        assert!(p.validate().is_err());
        let mut p = NeuronParams::default();
        p.cap = -1.0;
        assert!(p.validate().is_err());
    }
}
