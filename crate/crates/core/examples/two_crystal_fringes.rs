//! Coincidence rate of the two-crystal interferometer as the signal-path
//! phase is swept, next to the closed form `2|D|²|rt|²(1 + cos θ)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use spdc_vacuum::correlations::two_crystal_rate_at;
use spdc_vacuum::model::BeamSplitter;

fn main() -> spdc_vacuum::Result<()> {
    let gain = Complex64::new(0.1, 0.0);
    let alpha = Complex64::new(1.0, 0.0);
    let bs = BeamSplitter::balanced();
    let rt = (bs.r() * bs.t()).norm_sqr();

    println!("{:>8} {:>14} {:>14}", "theta", "R_AB", "closed form");
    for k in 0..=12 {
        let theta = TAU * k as f64 / 12.0;
        let rate = two_crystal_rate_at(gain, alpha, &bs, theta)?;
        let closed = 2.0 * gain.norm_sqr() * rt * (1.0 + theta.cos());
        println!("{theta:8.4} {rate:14.6e} {closed:14.6e}");
    }
    Ok(())
}
