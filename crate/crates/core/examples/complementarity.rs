//! Visibility and distinguishability as the second crystal's pump amplitude
//! changes; the visibility is also read off a phase scan of the rate.

use num_complex::Complex64;
use spdc_vacuum::correlations::{phase_scan_visibility, visibility_distinguishability};
use spdc_vacuum::model::BeamSplitter;

fn main() -> spdc_vacuum::Result<()> {
    let bs = BeamSplitter::balanced();
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>12}",
        "|alpha|", "V", "K", "K^2+V^2", "V from scan"
    );
    for alpha in [0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 3.0] {
        let alpha = Complex64::new(alpha, 0.0);
        let pair = visibility_distinguishability(alpha);
        let scanned = phase_scan_visibility(Complex64::new(0.05, 0.0), alpha, &bs, 36)?;
        println!(
            "{:>6.2} {:>10.6} {:>10.6} {:>10.6} {:>12.9}",
            alpha.norm(),
            pair.visibility,
            pair.distinguishability,
            pair.sum_of_squares(),
            scanned
        );
    }
    Ok(())
}
