//! Adaptive embedded Runge-Kutta 5(4) integration (Dormand-Prince pair)
//! with continuous step output and a step-observer hook.
//!
//! The model family here is only mildly stiff, so an explicit pair with
//! PI step-size control is sufficient and keeps every run deterministic:
//! identical inputs and tolerances produce bit-identical step sequences.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::fmath;

/// Right-hand side of an ODE system, possibly time-dependent.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

impl<F: Fn(f64, &[f64], &mut [f64])> OdeSystem for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (self.1)(t, y, dydt)
    }
}

/// Relative/absolute error tolerances for the embedded error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-8, atol: 1e-10 }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Tolerances { rtol, atol }
    }

    pub fn tighter(self, factor: f64) -> Self {
        Tolerances { rtol: self.rtol * factor, atol: self.atol * factor }
    }
}

/// Integrator settings beyond the tolerances.
#[derive(Debug, Clone, Copy)]
pub struct StepperOptions {
    pub tol: Tolerances,
    pub h_max: f64,
    pub max_steps: u64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions { tol: Tolerances::default(), h_max: f64::INFINITY, max_steps: 50_000_000 }
    }
}

impl StepperOptions {
    pub fn with_tol(tol: Tolerances) -> Self {
        StepperOptions { tol, ..Default::default() }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2; // largest step growth divisor
const FAC_MAX: f64 = 10.0;

/// One accepted step with its quartic interpolant.
pub struct DenseStep<'a> {
    pub t0: f64,
    pub h: f64,
    pub y0: &'a [f64],
    pub y1: &'a [f64],
    /// Derivative at `(t1, y1)` (the first-same-as-last stage).
    pub f1: &'a [f64],
    cont: &'a [f64],
    dim: usize,
}

impl<'a> DenseStep<'a> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Evaluate the interpolant at `t` in [t0, t1].
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let n = self.dim;
        for i in 0..n {
            let c0 = self.cont[i];
            let c1 = self.cont[n + i];
            let c2 = self.cont[2 * n + i];
            let c3 = self.cont[3 * n + i];
            let c4 = self.cont[4 * n + i];
            out[i] = c0 + theta * (c1 + theta1 * (c2 + theta * (c3 + theta1 * c4)));
        }
    }

    pub fn eval_component(&self, t: f64, i: usize) -> f64 {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let n = self.dim;
        let c0 = self.cont[i];
        let c1 = self.cont[n + i];
        let c2 = self.cont[2 * n + i];
        let c3 = self.cont[3 * n + i];
        let c4 = self.cont[4 * n + i];
        c0 + theta * (c1 + theta1 * (c2 + theta * (c3 + theta1 * c4)))
    }

    /// Locate `y_i(t) == target` inside the step by bisection, assuming a
    /// single crossing between the endpoints. Returns the crossing time.
    pub fn bisect_component(&self, i: usize, target: f64, rising: bool) -> Option<f64> {
        let g0 = self.y0[i] - target;
        let g1 = self.y1[i] - target;
        if rising {
            if !(g0 < 0.0 && g1 >= 0.0) {
                return None;
            }
        } else if !(g0 > 0.0 && g1 <= 0.0) {
            return None;
        }
        let mut lo = self.t0;
        let mut hi = self.t1();
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            let g = self.eval_component(mid, i) - target;
            let low_side = if rising { g < 0.0 } else { g > 0.0 };
            if low_side {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// What an observer wants the driver to do after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    Halt,
}

/// Callback run on every accepted step.
pub trait StepObserver {
    fn on_step(&mut self, step: &DenseStep<'_>) -> StepControl;
    /// Observers that never interpolate can skip the interpolant setup.
    fn needs_dense(&self) -> bool {
        true
    }
}

/// No-op observer.
pub struct NoObserver;

impl StepObserver for NoObserver {
    fn on_step(&mut self, _step: &DenseStep<'_>) -> StepControl {
        StepControl::Continue
    }
    fn needs_dense(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvanceOutcome {
    ReachedEnd,
    Halted,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evals: u64,
}

/// Stateful forward-time driver. Keeps the first-same-as-last stage across
/// steps and across segment boundaries so that chained `advance_to` calls
/// behave like one long integration with forced stops.
pub struct Stepper<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    opts: StepperOptions,
    t: f64,
    y: Vec<f64>,
    k1: Vec<f64>,
    k: [Vec<f64>; 6], // stages 2..7
    ysti: Vec<f64>,
    cont: Vec<f64>,
    h: f64,
    facold: f64,
    k1_fresh: bool,
    pub stats: StepStats,
}

impl<'a, S: OdeSystem + ?Sized> Stepper<'a, S> {
    pub fn new(sys: &'a S, t0: f64, y0: &[f64], opts: StepperOptions) -> Self {
        let dim = sys.dim();
        assert_eq!(y0.len(), dim);
        Stepper {
            sys,
            opts,
            t: t0,
            y: y0.to_vec(),
            k1: vec![0.0; dim],
            k: core::array::from_fn(|_| vec![0.0; dim]),
            ysti: vec![0.0; dim],
            cont: vec![0.0; 5 * dim],
            h: 0.0,
            facold: 1e-4,
            k1_fresh: false,
            stats: StepStats::default(),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Replace the current state, discarding stage caches.
    pub fn reset(&mut self, t: f64, y: &[f64]) {
        self.t = t;
        self.y.copy_from_slice(y);
        self.k1_fresh = false;
        self.h = 0.0;
    }

    fn error_scale(&self, i: usize, y1_i: f64) -> f64 {
        self.opts.tol.atol + self.opts.tol.rtol * fmath::abs(self.y[i]).max(fmath::abs(y1_i))
    }

    fn initial_step(&mut self, t_end: f64) -> f64 {
        let dim = self.y.len();
        let tol = self.opts.tol;
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..dim {
            let sk = tol.atol + tol.rtol * fmath::abs(self.y[i]);
            d0 += (self.y[i] / sk) * (self.y[i] / sk);
            d1 += (self.k1[i] / sk) * (self.k1[i] / sk);
        }
        let (d0, d1) = (fmath::sqrt(d0 / dim as f64), fmath::sqrt(d1 / dim as f64));
        let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(t_end - self.t).min(self.opts.h_max);
        // One explicit Euler probe to estimate the second derivative.
        for i in 0..dim {
            self.ysti[i] = self.y[i] + h0 * self.k1[i];
        }
        self.sys.eval(self.t + h0, &self.ysti, &mut self.k[0]);
        self.stats.evals += 1;
        let mut d2: f64 = 0.0;
        for i in 0..dim {
            let sk = tol.atol + tol.rtol * fmath::abs(self.y[i]);
            let dd = (self.k[0][i] - self.k1[i]) / sk;
            d2 += dd * dd;
        }
        let d2 = fmath::sqrt(d2 / dim as f64) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            fmath::powf(0.01 / dmax, 0.2)
        };
        (100.0 * h0).min(h1).min(t_end - self.t).min(self.opts.h_max)
    }

    /// Integrate forward until `t_end` (hit exactly) or until the observer
    /// halts. The observer sees every accepted step.
    pub fn advance_to<O: StepObserver>(&mut self, t_end: f64, obs: &mut O) -> Result<AdvanceOutcome> {
        let dim = self.y.len();
        if t_end <= self.t {
            return Ok(AdvanceOutcome::ReachedEnd);
        }
        if !self.k1_fresh {
            self.sys.eval(self.t, &self.y, &mut self.k1);
            self.stats.evals += 1;
            self.k1_fresh = true;
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(t_end);
        }
        let needs_dense = obs.needs_dense();

        loop {
            if self.t >= t_end {
                return Ok(AdvanceOutcome::ReachedEnd);
            }
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(CoreError::MaxStepsExceeded { t: self.t });
            }
            let mut h = self.h.min(self.opts.h_max);
            let mut clamped = false;
            if self.t + h >= t_end {
                h = t_end - self.t;
                clamped = true;
            }
            let h_floor = 1e-14 * fmath::abs(self.t).max(1.0);
            if h < h_floor {
                return Err(CoreError::StepSizeUnderflow { t: self.t, h });
            }

            // Stages 2..6, the order-5 solution, and the FSAL stage.
            let t = self.t;
            {
                let Stepper { sys, y, k1, k, ysti, .. } = self;
                for i in 0..dim {
                    ysti[i] = y[i] + h * A21 * k1[i];
                }
                sys.eval(t + C[1] * h, ysti, &mut k[0]);
                for i in 0..dim {
                    ysti[i] = y[i] + h * (A31 * k1[i] + A32 * k[0][i]);
                }
                sys.eval(t + C[2] * h, ysti, &mut k[1]);
                for i in 0..dim {
                    ysti[i] = y[i] + h * (A41 * k1[i] + A42 * k[0][i] + A43 * k[1][i]);
                }
                sys.eval(t + C[3] * h, ysti, &mut k[2]);
                for i in 0..dim {
                    ysti[i] =
                        y[i] + h * (A51 * k1[i] + A52 * k[0][i] + A53 * k[1][i] + A54 * k[2][i]);
                }
                sys.eval(t + C[4] * h, ysti, &mut k[3]);
                for i in 0..dim {
                    ysti[i] = y[i]
                        + h * (A61 * k1[i]
                            + A62 * k[0][i]
                            + A63 * k[1][i]
                            + A64 * k[2][i]
                            + A65 * k[3][i]);
                }
                sys.eval(t + C[5] * h, ysti, &mut k[4]);
                // 5th-order solution into ysti.
                for i in 0..dim {
                    ysti[i] = y[i]
                        + h * (A71 * k1[i]
                            + A73 * k[1][i]
                            + A74 * k[2][i]
                            + A75 * k[3][i]
                            + A76 * k[4][i]);
                }
                sys.eval(t + h, ysti, &mut k[5]);
            }
            self.stats.evals += 6;

            // Weighted RMS error of the embedded 4th-order difference.
            let mut err: f64 = 0.0;
            let mut finite = true;
            for i in 0..dim {
                let e = h
                    * (E1 * self.k1[i]
                        + E3 * self.k[1][i]
                        + E4 * self.k[2][i]
                        + E5 * self.k[3][i]
                        + E6 * self.k[4][i]
                        + E7 * self.k[5][i]);
                let sk = self.error_scale(i, self.ysti[i]);
                let r = e / sk;
                err += r * r;
                if !self.ysti[i].is_finite() {
                    finite = false;
                }
            }
            err = fmath::sqrt(err / dim as f64);
            if !finite || !err.is_finite() {
                // Retry with a much smaller step; blow up if it keeps failing.
                self.stats.rejected += 1;
                self.h = h * 0.1;
                if self.h < h_floor {
                    return Err(CoreError::NonFiniteState { t: self.t });
                }
                continue;
            }

            let fac11 = fmath::powf(err, EXPO1);
            if err <= 1.0 {
                // Accepted.
                self.facold = err.max(1e-4);
                self.stats.accepted += 1;

                if needs_dense {
                    let n = dim;
                    for i in 0..dim {
                        let ydiff = self.ysti[i] - self.y[i];
                        let bspl = h * self.k1[i] - ydiff;
                        self.cont[i] = self.y[i];
                        self.cont[n + i] = ydiff;
                        self.cont[2 * n + i] = bspl;
                        self.cont[3 * n + i] = ydiff - h * self.k[5][i] - bspl;
                        self.cont[4 * n + i] = h
                            * (D1 * self.k1[i]
                                + D3 * self.k[1][i]
                                + D4 * self.k[2][i]
                                + D5 * self.k[3][i]
                                + D6 * self.k[4][i]
                                + D7 * self.k[5][i]);
                    }
                }

                let t0 = self.t;
                self.t = if clamped { t_end } else { self.t + h };
                core::mem::swap(&mut self.y, &mut self.ysti);
                // FSAL: last stage is the derivative at the new point.
                self.k1.copy_from_slice(&self.k[5]);

                let fac = (fac11 / fmath::powf(self.facold, BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let h_new = h / fac;
                if !clamped {
                    self.h = h_new;
                } else {
                    self.h = self.h.max(h_new.min(self.opts.h_max));
                }

                // After the swap `ysti` holds the pre-step state; `cont` is
                // only meaningful when the observer asked for it.
                let step = DenseStep {
                    t0,
                    h,
                    y0: &self.ysti,
                    y1: &self.y,
                    f1: &self.k1,
                    cont: &self.cont,
                    dim,
                };
                if obs.on_step(&step) == StepControl::Halt {
                    return Ok(AdvanceOutcome::Halted);
                }
            } else {
                // Rejected.
                self.stats.rejected += 1;
                self.h = h / (fac11 / SAFE).min(1.0 / FAC_MIN);
            }
        }
    }
}

/// Integrate from `(t0, y0)` to `t_end` and return the end state.
pub fn integrate_to<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: StepperOptions,
) -> Result<Vec<f64>> {
    let mut stepper = Stepper::new(sys, t0, y0, opts);
    stepper.advance_to(t_end, &mut NoObserver)?;
    Ok(stepper.y().to_vec())
}

/// A trajectory sampled exactly at caller-supplied times (each sample is a
/// true step endpoint, not an interpolated value).
#[derive(Debug, Clone, Default)]
pub struct SampledTrajectory {
    pub times: Vec<f64>,
    /// Row-major samples, `dim` entries per time.
    pub states: Vec<f64>,
    pub dim: usize,
}

impl SampledTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }
}

/// A trajectory recorded at the integrator's own accepted steps, with the
/// derivative kept at each sample so intermediate values can be recovered by
/// piecewise-cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    states: Vec<f64>,
    derivs: Vec<f64>,
    dim: usize,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn deriv(&self, k: usize) -> &[f64] {
        &self.derivs[k * self.dim..(k + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Hermite-interpolated value at `t` (clamped to the recorded range).
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let n = self.len();
        if t <= self.times[0] {
            out.copy_from_slice(self.state(0));
            return;
        }
        if t >= self.times[n - 1] {
            out.copy_from_slice(self.state(n - 1));
            return;
        }
        let hi = self.times.partition_point(|&tk| tk <= t);
        let (k0, k1) = (hi - 1, hi);
        let dt = self.times[k1] - self.times[k0];
        let u = (t - self.times[k0]) / dt;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let (a, b) = (k0 * self.dim, k1 * self.dim);
        for i in 0..self.dim {
            out[i] = h00 * self.states[a + i]
                + h10 * dt * self.derivs[a + i]
                + h01 * self.states[b + i]
                + h11 * dt * self.derivs[b + i];
        }
    }
}

/// Integrate over `[t0, t0 + duration]` recording every accepted step.
/// A zero-length interval yields just the initial sample.
pub fn integrate_recorded<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    duration: f64,
    opts: StepperOptions,
) -> Result<Trajectory> {
    struct Recorder<'t> {
        traj: &'t mut Trajectory,
    }
    impl StepObserver for Recorder<'_> {
        fn on_step(&mut self, step: &DenseStep<'_>) -> StepControl {
            self.traj.times.push(step.t1());
            self.traj.states.extend_from_slice(step.y1);
            self.traj.derivs.extend_from_slice(step.f1);
            StepControl::Continue
        }
        fn needs_dense(&self) -> bool {
            false
        }
    }

    let dim = sys.dim();
    let mut traj = Trajectory { times: Vec::new(), states: Vec::new(), derivs: Vec::new(), dim };
    traj.times.push(t0);
    traj.states.extend_from_slice(y0);
    let mut f0 = vec![0.0; dim];
    sys.eval(t0, y0, &mut f0);
    traj.derivs.extend_from_slice(&f0);
    if duration > 0.0 {
        let mut stepper = Stepper::new(sys, t0, y0, opts);
        stepper.advance_to(t0 + duration, &mut Recorder { traj: &mut traj })?;
    }
    Ok(traj)
}

/// Integrate and record the state at each of `times` (strictly increasing,
/// first entry may equal `t0`).
pub fn integrate_sampled<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    times: &[f64],
    opts: StepperOptions,
) -> Result<SampledTrajectory> {
    let dim = sys.dim();
    let mut out = SampledTrajectory {
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len() * dim),
        dim,
    };
    let mut stepper = Stepper::new(sys, t0, y0, opts);
    for &tk in times {
        if tk > stepper.t() {
            stepper.advance_to(tk, &mut NoObserver)?;
        }
        out.times.push(tk);
        out.states.extend_from_slice(stepper.y());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;

    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
            dydt[0] = -y[0];
        }
    }

    struct Oscillator;

    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) {
            dydt[0] = y[1];
            dydt[1] = -y[0];
        }
    }

    #[test]
    fn exponential_decay_accuracy() {
        let y = integrate_to(&Decay, 0.0, &[1.0], 5.0, StepperOptions::default()).unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_full_turn() {
        let opts = StepperOptions::with_tol(Tolerances::new(1e-10, 1e-12));
        let y = integrate_to(&Oscillator, 0.0, &[1.0, 0.0], 2.0 * core::f64::consts::PI, opts)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn tolerance_halving_self_convergence() {
        let loose = StepperOptions::with_tol(Tolerances::new(2e-8, 2e-10));
        let tight = StepperOptions::with_tol(Tolerances::new(1e-8, 1e-10));
        let t_end = 2.0 * core::f64::consts::PI;
        let y_loose = integrate_to(&Oscillator, 0.0, &[1.0, 0.0], t_end, loose).unwrap();
        let y_tight = integrate_to(&Oscillator, 0.0, &[1.0, 0.0], t_end, tight).unwrap();
        let diff = ((y_loose[0] - y_tight[0]).powi(2) + (y_loose[1] - y_tight[1]).powi(2)).sqrt();
        assert!(diff < 10.0 * 2e-8, "self-convergence diff {diff}");
    }

    #[test]
    fn dense_output_matches_endpoints_and_interior() {
        struct Capture {
            worst: f64,
        }
        impl StepObserver for Capture {
            fn on_step(&mut self, step: &DenseStep<'_>) -> StepControl {
                let mut buf = [0.0; 2];
                step.eval(step.t0, &mut buf);
                let e0 = (buf[0] - step.y0[0]).abs();
                step.eval(step.t1(), &mut buf);
                let e1 = (buf[0] - step.y1[0]).abs();
                // interior point against the analytic solution
                let tm = step.t0 + 0.37 * step.h;
                step.eval(tm, &mut buf);
                let em = (buf[0] - tm.cos()).abs();
                self.worst = self.worst.max(e0).max(e1).max(em);
                StepControl::Continue
            }
        }
        let mut cap = Capture { worst: 0.0 };
        let mut st = Stepper::new(&Oscillator, 0.0, &[1.0, 0.0], StepperOptions::default());
        st.advance_to(3.0, &mut cap).unwrap();
        assert!(cap.worst < 1e-8, "dense output worst error {}", cap.worst);
    }

    #[test]
    fn sampled_endpoints_are_exact_times() {
        let times = [0.0, 0.5, 1.25, 2.0];
        let traj = integrate_sampled(&Decay, 0.0, &[1.0], &times, StepperOptions::default()).unwrap();
        assert_eq!(traj.len(), 4);
        for (k, &tk) in times.iter().enumerate() {
            assert_eq!(traj.times[k], tk);
            assert!((traj.state(k)[0] - (-tk).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_length_interval_is_identity() {
        let mut st = Stepper::new(&Decay, 1.0, &[0.7], StepperOptions::default());
        let out = st.advance_to(1.0, &mut NoObserver).unwrap();
        assert_eq!(out, AdvanceOutcome::ReachedEnd);
        assert_eq!(st.y()[0], 0.7);
    }

    #[test]
    fn bisect_finds_crossing() {
        struct Find {
            hit: Option<f64>,
        }
        impl StepObserver for Find {
            fn on_step(&mut self, step: &DenseStep<'_>) -> StepControl {
                if let Some(t) = step.bisect_component(0, 0.5, false) {
                    self.hit = Some(t);
                    return StepControl::Halt;
                }
                StepControl::Continue
            }
        }
        let mut find = Find { hit: None };
        let mut st = Stepper::new(&Decay, 0.0, &[1.0], StepperOptions::default());
        let out = st.advance_to(5.0, &mut find).unwrap();
        assert_eq!(out, AdvanceOutcome::Halted);
        let t = find.hit.unwrap();
        assert!((t - core::f64::consts::LN_2).abs() < 1e-9, "crossing at {t}");
    }

    #[test]
    fn determinism_bit_identical() {
        let run = || {
            let mut st = Stepper::new(&Oscillator, 0.0, &[1.0, 0.0], StepperOptions::default());
            st.advance_to(10.0, &mut NoObserver).unwrap();
            (st.y()[0].to_bits(), st.y()[1].to_bits(), st.stats.accepted)
        };
        assert_eq!(run(), run());
    }
}
