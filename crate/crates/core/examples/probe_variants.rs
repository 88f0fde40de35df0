// Scratch: m lagging (rate = gamma*sech), w slow with various rate forms.
use hexgait_core::ode::*;

#[derive(Clone, Copy)]
enum WRate { Const, Sech, CoshSmall(f64), SechHalf }

struct Sys { w_rate: WRate, i_ext: f64 }
impl OdeSystem for Sys {
    fn dim(&self) -> usize { 4 }
    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let (v, m, w, s) = (y[0], y[1], y[2], y[3]);
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let n_inf = sig(2.0 * 0.056 * (v + 1.2));
        let m_inf = sig(2.0 * 0.1 * (v - 2.0));
        let w_inf = sig(2.0 * 0.8 * (v + 26.0));
        let s_inf = 444.48 * sig(2.0 * 0.11 * (v - 2.0));
        let i_ca = 4.4 * n_inf * (v - 120.0);
        let i_k = 9.0 * m * (v + 80.0);
        let i_ks = 0.5 * w * (v + 80.0);
        let i_l = 2.0 * (v + 60.0);
        dy[0] = (-(i_ca + i_k + i_ks + i_l) + self.i_ext) / 1.2;
        dy[1] = 5.0 / (0.1 * (v - 2.0)).cosh() * (m_inf - m);   // m lags: rate = gamma*sech
        let rw = match self.w_rate {
            WRate::Const => 0.027,
            WRate::Sech => 0.027 / (0.8 * (v + 26.0)).cosh(),
            WRate::CoshSmall(k) => 0.027 * (k * (v + 26.0)).cosh(),
            WRate::SechHalf => 0.027 / (0.4 * (v + 26.0)).cosh(),
        };
        dy[2] = rw * (w_inf - w);
        dy[3] = (s_inf * (1.0 - s) - s) / 5.56;
    }
}

fn main() {
    for (name, wr) in [
        ("w const      ", WRate::Const),
        ("w sech(0.8..)", WRate::Sech),
        ("w sech(0.4..)", WRate::SechHalf),
        ("w cosh(0.1..)", WRate::CoshSmall(0.1)),
        ("w cosh(0.056)", WRate::CoshSmall(0.056)),
    ] {
        let mut ic = vec![-20.0, 0.0, 0.0, 0.0];
        for &i_ext in &[37.7, 36.7, 35.9, 35.65] {
            let sys = Sys { w_rate: wr, i_ext };
            let opts = StepperOptions::with_tol(Tolerances::new(1e-8, 1e-10));
            let Ok(y) = integrate_to(&sys, 0.0, &ic, 4000.0, opts) else { println!("{name} I={i_ext} settle ERR"); continue };
            let Ok(traj) = integrate_recorded(&sys, 0.0, &y, 2000.0, opts) else { println!("{name} I={i_ext} rec ERR"); continue };
            ic = traj.final_state().to_vec();
            let mut crossings = vec![];
            for k in 1..traj.len() {
                if traj.state(k - 1)[0] < -20.0 && traj.state(k)[0] >= -20.0 { crossings.push(traj.times[k]); }
            }
            let mut vmin: f64 = 1e9; let mut vmax: f64 = -1e9; let mut wmin: f64 = 1e9; let mut wmax: f64 = -1e9;
            for k in 0..traj.len() {
                vmin = vmin.min(traj.state(k)[0]); vmax = vmax.max(traj.state(k)[0]);
                wmin = wmin.min(traj.state(k)[2]); wmax = wmax.max(traj.state(k)[2]);
            }
            if crossings.len() < 3 { println!("{name} I={i_ext:5.2}: {} crossings  v:[{vmin:6.1},{vmax:6.1}]", crossings.len()); continue; }
            let gaps: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
            let maxgap = gaps.iter().cloned().fold(0.0f64, f64::max);
            let nbursts = 1 + gaps.iter().filter(|&&g| g >= 0.5 * maxgap && maxgap > 3.0 * gaps.iter().cloned().fold(f64::MAX, f64::min)).count();
            let period = if nbursts >= 2 { (crossings[crossings.len()-1] - crossings[0]) / (nbursts as f64 - 0.99) } else { f64::NAN };
            println!("{name} I={i_ext:5.2}: v:[{vmin:6.1},{vmax:6.1}] w:[{wmin:.3},{wmax:.3}] spikes={} bursts~{nbursts} T~{period:7.1} maxgap={maxgap:6.1} mingap={:.1}",
                crossings.len(), gaps.iter().cloned().fold(f64::MAX, f64::min));
        }
        println!();
    }
}
