use hexgait_core::limit_cycle::*;
use hexgait_core::neuron::*;
use hexgait_core::ode::Tolerances;

fn main() {
    for i_ext in [35.65, 35.9, 37.7] {
        let t0 = std::time::Instant::now();
        let p = NeuronParams::with_i_ext(i_ext);
        let opts = LimitCycleOptions::default();
        match find_limit_cycle(&p, &opts) {
            Ok(lc) => {
                let n = lc.grid_n;
                let mut vmin = f64::MAX; let mut vmax = f64::MIN;
                let mut maxima = 0; let mut below = 0;
                for k in 0..n {
                    let v = lc.node_state(k)[0];
                    let vp = lc.node_state((k + n - 1) % n)[0];
                    let vn = lc.node_state((k + 1) % n)[0];
                    if v > vp && v >= vn && v > -30.0 { maxima += 1; }
                    if v < -20.0 { below += 1; }
                    vmin = vmin.min(v); vmax = vmax.max(v);
                }
                println!("I_ext={:6.2}  T={:.9} ms  omega={:.6e}  v in [{:.2},{:.2}]  maxima={}  below_frac={:.3}  seam={:?}  ({:.2?})",
                    i_ext, lc.period, lc.frequency(), vmin, vmax, maxima, below as f64 / n as f64, lc.seam_error, t0.elapsed());
                // sample a few points
                for k in (0..n).step_by(n/16) {
                    let y = lc.node_state(k);
                    println!("  k={:5}  t={:8.3}  v={:8.3} m={:.4} w={:.4} s={:.4}", k, lc.period * k as f64 / n as f64, y[0], y[1], y[2], y[3]);
                }
            }
            Err(e) => println!("I_ext={i_ext}: ERROR {e}"),
        }
    }
}
