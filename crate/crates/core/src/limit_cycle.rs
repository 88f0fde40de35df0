//! Limit-cycle location for the bursting cell: burst-onset event detection,
//! period convergence by successive onset-to-onset times, and resampling of
//! the orbit onto a uniform grid anchored at burst onset (phase 0).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::fmath;
use crate::interp::PeriodicHermite;
use crate::neuron::{self, NeuronCell, NeuronParams, NeuronState, DIM, I_EXT_MAX, I_EXT_MIN};
use crate::ode::{
    integrate_recorded, DenseStep, OdeSystem, StepControl, StepObserver, Stepper, StepperOptions,
    Tolerances, Trajectory,
};

/// Default membrane threshold separating quiescence from spiking (mV).
pub const BURST_V_THRESHOLD: f64 = -20.0;

/// A burst starts with an upward voltage crossing preceded by at least this
/// fraction of the period spent continuously below threshold.
pub const QUIESCENCE_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy)]
pub struct LimitCycleOptions {
    /// Number of uniform samples stored over one period.
    pub grid_n: usize,
    pub tol: Tolerances,
    /// Relative agreement required between successive period estimates.
    pub period_rtol: f64,
    pub v_threshold: f64,
    pub quiescence_fraction: f64,
    /// Estimated periods discarded before period measurement starts.
    pub transient_periods: f64,
    pub max_period_iters: usize,
    /// Length of the initial event-bootstrap window (ms).
    pub bootstrap_window: f64,
    /// Reject drives outside the bursting operating range unless disabled.
    pub enforce_range: bool,
    pub initial_state: NeuronState,
}

impl Default for LimitCycleOptions {
    fn default() -> Self {
        LimitCycleOptions {
            grid_n: 1 << 12,
            tol: Tolerances::default(),
            period_rtol: 1e-6,
            v_threshold: BURST_V_THRESHOLD,
            quiescence_fraction: QUIESCENCE_FRACTION,
            transient_periods: 10.0,
            max_period_iters: 64,
            bootstrap_window: 3000.0,
            enforce_range: true,
            initial_state: NeuronState::new(-50.0, 0.0, 0.0, 0.0),
        }
    }
}

/// One located periodic orbit, sampled uniformly with burst onset at index 0.
#[derive(Debug, Clone)]
pub struct LimitCycle {
    pub i_ext: f64,
    pub period: f64,
    pub grid_n: usize,
    /// Per-coordinate closure error of the resampled orbit.
    pub seam_error: [f64; DIM],
    orbit: PeriodicHermite,
}

impl LimitCycle {
    /// Stepping frequency in the [0,1) phase convention: omega = 1/T.
    pub fn frequency(&self) -> f64 {
        1.0 / self.period
    }

    pub fn orbit(&self) -> &PeriodicHermite {
        &self.orbit
    }

    /// Orbit state at time `t` (any real number; wrapped mod T).
    pub fn state_at_time(&self, t: f64) -> [f64; DIM] {
        let mut out = [0.0; DIM];
        self.orbit.eval(t, &mut out);
        out
    }

    /// Orbit state at phase in [0,1) (phase 0 = burst onset).
    pub fn state_at_phase(&self, phase: f64) -> [f64; DIM] {
        self.state_at_time(phase * self.period)
    }

    pub fn node_state(&self, k: usize) -> &[f64] {
        self.orbit.node_values(k)
    }

    pub fn node_deriv(&self, k: usize) -> &[f64] {
        self.orbit.node_derivs(k)
    }
}

/// Upward threshold crossing together with the quiescent interval that
/// preceded it and the step data needed to re-refine it later.
#[derive(Debug, Clone)]
struct Crossing {
    t: f64,
    /// Time spent continuously below threshold before this crossing.
    gap: f64,
    /// Start of the integration step containing the crossing.
    step_t0: f64,
    step_y0: Vec<f64>,
}

/// Watches component `v_index` for upward crossings of the threshold and
/// keeps track of how long the trace has been below it.
struct CrossingObserver {
    v_index: usize,
    threshold: f64,
    below_since: Option<f64>,
    crossings: Vec<Crossing>,
    /// Halt at the first crossing whose quiescent gap reaches this value.
    halt_gap: Option<f64>,
}

impl CrossingObserver {
    fn new(v_index: usize, threshold: f64, t0: f64, v0: f64, halt_gap: Option<f64>) -> Self {
        CrossingObserver {
            v_index,
            threshold,
            below_since: if v0 < threshold { Some(t0) } else { None },
            crossings: Vec::new(),
            halt_gap,
        }
    }
}

impl StepObserver for CrossingObserver {
    fn on_step(&mut self, step: &DenseStep<'_>) -> StepControl {
        let v0 = step.y0[self.v_index];
        let v1 = step.y1[self.v_index];
        let th = self.threshold;
        if v0 < th && v1 >= th {
            if let Some(t_cross) = step.bisect_component(self.v_index, th, true) {
                let gap = match self.below_since {
                    Some(since) => t_cross - since,
                    None => 0.0,
                };
                self.below_since = None;
                let qualifies = self.halt_gap.map(|g| gap >= g).unwrap_or(true);
                if qualifies {
                    self.crossings.push(Crossing {
                        t: t_cross,
                        gap,
                        step_t0: step.t0,
                        step_y0: step.y0.to_vec(),
                    });
                    if self.halt_gap.is_some() {
                        return StepControl::Halt;
                    }
                }
            }
        } else if v0 >= th && v1 < th {
            if let Some(t_cross) = step.bisect_component(self.v_index, th, false) {
                self.below_since = Some(t_cross);
            }
        }
        StepControl::Continue
    }
}

/// Newton-polish an onset event: starting from the recorded step start,
/// re-integrate short intervals at a tightened tolerance and solve
/// `v(t) = threshold` using the field for the derivative.
///
/// Returns the event time measured from `step_t0` and the state there.
fn polish_onset<S: OdeSystem + ?Sized>(
    sys: &S,
    step_y0: &[f64],
    dt_guess: f64,
    threshold: f64,
    tol: Tolerances,
) -> Result<(f64, Vec<f64>)> {
    let tight = Tolerances::new((tol.rtol * 1e-3).max(1e-13), (tol.atol * 1e-3).max(1e-14));
    let opts = StepperOptions { tol: tight, ..Default::default() };
    let mut dt = dt_guess.max(0.0);
    let mut y = vec![0.0; sys.dim()];
    let mut f = vec![0.0; sys.dim()];
    for _ in 0..8 {
        let mut stepper = Stepper::new(sys, 0.0, step_y0, opts);
        stepper.advance_to(dt, &mut crate::ode::NoObserver)?;
        y.copy_from_slice(stepper.y());
        let g = y[0] - threshold;
        sys.eval(dt, &y, &mut f);
        let gdot = f[0];
        if gdot == 0.0 {
            break;
        }
        let delta = g / gdot;
        dt -= delta;
        if fmath::abs(g) < 1e-11 * (1.0 + fmath::abs(threshold)) || fmath::abs(delta) < 1e-15 {
            dt = dt.max(0.0);
            let mut stepper = Stepper::new(sys, 0.0, step_y0, opts);
            stepper.advance_to(dt, &mut crate::ode::NoObserver)?;
            return Ok((dt, stepper.y().to_vec()));
        }
        if dt < 0.0 {
            dt = 0.0;
        }
    }
    Ok((dt, y))
}

/// Run forward until the next qualifying burst onset; returns the raw
/// crossing. `max_time` bounds the search.
fn next_onset<S: OdeSystem + ?Sized>(
    stepper: &mut Stepper<'_, S>,
    min_gap: f64,
    threshold: f64,
    max_time: f64,
) -> Result<Option<Crossing>> {
    let t0 = stepper.t();
    let v0 = stepper.y()[0];
    let mut obs = CrossingObserver::new(0, threshold, t0, v0, Some(min_gap));
    let outcome = stepper.advance_to(t0 + max_time, &mut obs)?;
    match outcome {
        crate::ode::AdvanceOutcome::Halted => Ok(obs.crossings.pop()),
        crate::ode::AdvanceOutcome::ReachedEnd => Ok(None),
    }
}

/// Locate the attracting bursting orbit at the given parameters.
pub fn find_limit_cycle(params: &NeuronParams, opts: &LimitCycleOptions) -> Result<LimitCycle> {
    params.validate()?;
    if opts.enforce_range && !(I_EXT_MIN..=I_EXT_MAX).contains(&params.i_ext) {
        return Err(CoreError::OutsideOperatingRange { i_ext: params.i_ext });
    }
    let cell = NeuronCell::new(params);
    let sopts = StepperOptions { tol: opts.tol, ..Default::default() };

    // Bootstrap: collect threshold crossings over a widening window and
    // classify burst onsets by their quiescent gaps.
    let y0 = opts.initial_state.to_array();
    let mut window = opts.bootstrap_window;
    let mut stepper = Stepper::new(&cell, 0.0, &y0, sopts);
    let mut onsets: Vec<Crossing> = Vec::new();
    for _ in 0..5 {
        let t_start = stepper.t();
        let v_start = stepper.y()[0];
        let mut obs = CrossingObserver::new(0, opts.v_threshold, t_start, v_start, None);
        stepper.advance_to(t_start + window, &mut obs)?;
        let max_gap = obs.crossings.iter().fold(0.0f64, |acc, c| acc.max(c.gap));
        if max_gap > 0.0 {
            onsets = obs.crossings.into_iter().filter(|c| c.gap >= 0.5 * max_gap).collect();
            if onsets.len() >= 3 {
                break;
            }
        }
        window *= 2.0;
    }
    if onsets.len() < 3 {
        return Err(CoreError::NoBurstDetected);
    }
    let n_onsets = onsets.len();
    let mut t_est = onsets[n_onsets - 1].t - onsets[n_onsets - 2].t;

    // Discard a transient, then iterate onset-to-onset times until two
    // successive period estimates agree to the requested relative tolerance.
    let settle_end = stepper.t() + opts.transient_periods * t_est;
    stepper.advance_to(settle_end, &mut crate::ode::NoObserver)?;

    let mut last_onset: Option<Crossing> = None;
    let mut prev_estimate = t_est;
    let mut converged = false;
    let mut estimates = 0usize;
    for _ in 0..opts.max_period_iters {
        let min_gap = opts.quiescence_fraction * t_est;
        let found = next_onset(&mut stepper, min_gap, opts.v_threshold, 3.0 * t_est)?;
        let crossing = match found {
            Some(c) => c,
            None => {
                return Err(CoreError::PeriodNoConvergence {
                    last_estimates: (prev_estimate, t_est),
                })
            }
        };
        if let Some(prev) = &last_onset {
            let estimate = crossing.t - prev.t;
            estimates += 1;
            prev_estimate = t_est;
            t_est = estimate;
            if estimates >= 3
                && fmath::abs(estimate - prev_estimate) <= opts.period_rtol * fmath::abs(estimate)
            {
                last_onset = Some(crossing);
                converged = true;
                break;
            }
        }
        last_onset = Some(crossing);
    }
    if !converged {
        return Err(CoreError::PeriodNoConvergence { last_estimates: (prev_estimate, t_est) });
    }

    // Polish the final onset to machine accuracy, take one settling lap and
    // re-anchor, then measure the period over a second polished lap.
    let last = last_onset.expect("converged with an onset");
    let (_, anchor0) =
        polish_onset(&cell, &last.step_y0, last.t - last.step_t0, opts.v_threshold, opts.tol)?;
    let (anchor, period) = polished_lap(&cell, &anchor0, t_est, opts)?;
    let (_, period2) = polished_lap(&cell, &anchor, period, opts)?;
    let period = period2;

    // Resample one period onto the uniform grid, hitting each node exactly.
    let n = opts.grid_n;
    let times: Vec<f64> = (0..=n).map(|k| period * k as f64 / n as f64).collect();
    let sampled = crate::ode::integrate_sampled(&cell, 0.0, &anchor, &times, sopts)?;
    let mut values = Vec::with_capacity(n * DIM);
    let mut derivs = Vec::with_capacity(n * DIM);
    let mut dy = [0.0; DIM];
    let mut scale = [0.0f64; DIM];
    for k in 0..n {
        let y = sampled.state(k);
        neuron::vector_field_into(y, params, 0.0, &mut dy);
        values.extend_from_slice(y);
        derivs.extend_from_slice(&dy);
        for i in 0..DIM {
            scale[i] = scale[i].max(fmath::abs(y[i]));
        }
    }
    let closing = sampled.state(n);
    let mut seam_error = [0.0; DIM];
    for i in 0..DIM {
        seam_error[i] = fmath::abs(closing[i] - anchor[i]);
        let bound = 10.0 * (opts.tol.atol + opts.tol.rtol * scale[i]);
        if seam_error[i] > bound {
            return Err(CoreError::SeamMismatch { max_err: seam_error[i], bound });
        }
    }

    Ok(LimitCycle {
        i_ext: params.i_ext,
        period,
        grid_n: n,
        seam_error,
        orbit: PeriodicHermite::new(period, DIM, values, derivs),
    })
}

/// From a polished onset state, find and polish the next onset; returns the
/// arrival state and the lap time.
fn polished_lap(
    cell: &NeuronCell<'_>,
    anchor: &[f64],
    t_est: f64,
    opts: &LimitCycleOptions,
) -> Result<(Vec<f64>, f64)> {
    let sopts = StepperOptions { tol: opts.tol, ..Default::default() };
    let mut stepper = Stepper::new(cell, 0.0, anchor, sopts);
    let min_gap = opts.quiescence_fraction * t_est;
    let crossing = next_onset(&mut stepper, min_gap, opts.v_threshold, 3.0 * t_est)?
        .ok_or(CoreError::PeriodNoConvergence { last_estimates: (t_est, t_est) })?;
    let (dt, state) =
        polish_onset(cell, &crossing.step_y0, crossing.t - crossing.step_t0, opts.v_threshold, opts.tol)?;
    Ok((state, crossing.step_t0 + dt))
}

/// Integrate the single cell and record the trajectory (the basic
/// simulation entry point for one neuron).
pub fn neuron_trajectory(
    initial: &NeuronState,
    params: &NeuronParams,
    i_extra: f64,
    duration: f64,
    tol: Tolerances,
) -> Result<Trajectory> {
    params.validate()?;
    if !initial.is_finite() {
        return Err(CoreError::NonFiniteState { t: 0.0 });
    }
    let cell = NeuronCell { params, i_extra };
    integrate_recorded(&cell, 0.0, &initial.to_array(), duration, StepperOptions::with_tol(tol))
}

/// One row of the frequency-versus-drive table.
#[derive(Debug, Clone)]
pub struct FrequencyPoint {
    pub i_ext: f64,
    /// Period and frequency, or the per-row failure.
    pub result: Result<(f64, f64)>,
}

/// Stepping frequency across a grid of drives. Failed rows are marked, not
/// fatal.
pub fn frequency_curve(
    params: &NeuronParams,
    i_ext_grid: &[f64],
    opts: &LimitCycleOptions,
) -> Vec<FrequencyPoint> {
    i_ext_grid
        .iter()
        .map(|&i_ext| {
            let p = NeuronParams { i_ext, ..*params };
            let result = find_limit_cycle(&p, opts).map(|lc| (lc.period, lc.frequency()));
            FrequencyPoint { i_ext, result }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_opts() -> LimitCycleOptions {
        LimitCycleOptions {
            grid_n: 1 << 10,
            tol: Tolerances::new(1e-7, 1e-9),
            period_rtol: 1e-5,
            ..Default::default()
        }
    }

    #[test]
    fn zero_duration_trajectory_is_initial_state() {
        let p = NeuronParams::default();
        let s0 = NeuronState::new(-40.0, 0.1, 0.2, 0.05);
        let traj = neuron_trajectory(&s0, &p, 0.0, 0.0, Tolerances::default()).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.state(0), &s0.to_array());
    }

    #[test]
    fn trajectory_tolerance_halving_self_convergence() {
        let p = NeuronParams::with_i_ext(35.9);
        let s0 = NeuronState::new(-50.0, 0.0, 0.0, 0.0);
        let loose = Tolerances::new(2e-8, 2e-10);
        let tight = Tolerances::new(1e-8, 1e-10);
        let a = neuron_trajectory(&s0, &p, 0.0, 50.0, loose).unwrap();
        let b = neuron_trajectory(&s0, &p, 0.0, 50.0, tight).unwrap();
        let fa = a.final_state();
        let fb = b.final_state();
        for i in 0..DIM {
            let scale = 1.0 + fb[i].abs();
            assert!(
                (fa[i] - fb[i]).abs() / scale < 10.0 * loose.rtol,
                "component {i}: {} vs {}",
                fa[i],
                fb[i]
            );
        }
    }

    #[test]
    fn bursting_orbit_has_spikes_and_quiescence() {
        let p = NeuronParams::with_i_ext(35.9);
        let lc = find_limit_cycle(&p, &fast_opts()).unwrap();
        // Count upward threshold crossings over one period: a multi-spike
        // burst crosses more than once. Also require a substantial
        // quiescent fraction.
        let n = lc.grid_n;
        let mut ups = 0;
        let mut below = 0usize;
        for k in 0..n {
            let v0 = lc.node_state(k)[0];
            let v1 = lc.node_state((k + 1) % n)[0];
            if v0 < BURST_V_THRESHOLD && v1 >= BURST_V_THRESHOLD {
                ups += 1;
            }
            if v0 < BURST_V_THRESHOLD {
                below += 1;
            }
        }
        assert!(ups >= 2, "expected a multi-spike burst, found {ups} crossings");
        let quiescent_fraction = below as f64 / n as f64;
        assert!(quiescent_fraction > 0.25, "quiescent fraction {quiescent_fraction}");
    }

    #[test]
    fn gating_variables_stay_in_unit_interval() {
        let p = NeuronParams::with_i_ext(36.5);
        let s0 = NeuronState::new(-45.0, 0.5, 0.5, 0.1);
        let traj = neuron_trajectory(&s0, &p, 0.0, 400.0, Tolerances::default()).unwrap();
        for k in 0..traj.len() {
            let y = traj.state(k);
            assert!(y[1] >= -1e-6 && y[1] <= 1.0 + 1e-6, "m out of bounds: {}", y[1]);
            assert!(y[2] >= -1e-6 && y[2] <= 1.0 + 1e-6, "w out of bounds: {}", y[2]);
            assert!(y[3] >= 0.0, "s negative: {}", y[3]);
        }
    }

    #[test]
    fn deterministic_replay() {
        let p = NeuronParams::with_i_ext(35.9);
        let s0 = NeuronState::new(-50.0, 0.0, 0.0, 0.0);
        let run = || {
            let t = neuron_trajectory(&s0, &p, 0.0, 120.0, Tolerances::default()).unwrap();
            t.final_state().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn range_guard_rejects_and_can_be_overridden() {
        let p = NeuronParams::with_i_ext(20.0);
        let err = find_limit_cycle(&p, &LimitCycleOptions::default()).unwrap_err();
        assert!(matches!(err, CoreError::OutsideOperatingRange { .. }));
    }

    #[test]
    fn anchor_sits_at_burst_onset() {
        let p = NeuronParams::with_i_ext(35.9);
        let lc = find_limit_cycle(&p, &fast_opts()).unwrap();
        let y0 = lc.node_state(0);
        assert!((y0[0] - BURST_V_THRESHOLD).abs() < 1e-6, "anchor v = {}", y0[0]);
        // Phase 0 is the onset: voltage must be rising there.
        assert!(lc.node_deriv(0)[0] > 0.0);
    }

    #[test]
    fn frequency_curve_single_point() {
        let p = NeuronParams::default();
        let rows = frequency_curve(&p, &[35.9], &fast_opts());
        assert_eq!(rows.len(), 1);
        let (period, omega) = rows[0].result.as_ref().unwrap();
        assert!((omega - 1.0 / period).abs() < 1e-15);
    }

    #[test]
    fn frequency_curve_marks_failed_rows() {
        let p = NeuronParams::default();
        let rows = frequency_curve(&p, &[35.9, 10.0], &fast_opts());
        assert!(rows[0].result.is_ok());
        assert!(rows[1].result.is_err());
    }
}
