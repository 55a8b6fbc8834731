//! The same two-crystal rate from three routes: Heisenberg vacuum values,
//! the pathway-amplitude formula and the perturbative two-photon state.

use std::f64::consts::PI;

use num_complex::Complex64;
use spdc_vacuum::correlations::{
    amplitude_method_rate, coincidence_rate, perturbative_state, state_coincidence_rate,
};
use spdc_vacuum::model::{two_crystal_detector_fields, BeamSplitter, CrystalParams, PathDelay};

fn main() -> spdc_vacuum::Result<()> {
    let gain = Complex64::new(0.1, 0.0);
    let alpha = Complex64::from_polar(0.6, 0.3);
    let bs = BeamSplitter::symmetric(0.4)?;
    let (c1, c2) = CrystalParams::two_identical(gain, alpha)?;
    let (g1, g2) = (c1.effective_gain(), c2.effective_gain());
    let state = perturbative_state(g1, g2);

    println!(
        "{:>6} {:>14} {:>14} {:>14}",
        "theta", "heisenberg", "amplitude", "state"
    );
    for k in 0..8 {
        let theta = PI * k as f64 / 4.0;
        let (ea, eb) = two_crystal_detector_fields(
            &c1,
            &c2,
            &bs,
            &bs,
            PathDelay::new(theta)?,
            PathDelay::zero(),
        )?;
        let heisenberg = coincidence_rate(&ea, &eb)?.value();
        let amplitude = amplitude_method_rate(g1, g2, theta, 0.0, bs.r(), bs.t());
        let from_state = state_coincidence_rate(&state, &ea, &eb)?;
        println!("{theta:6.3} {heisenberg:14.8e} {amplitude:14.8e} {from_state:14.8e}");
    }
    Ok(())
}
