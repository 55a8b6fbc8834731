//! Hong-Ou-Mandel dip: coincidences behind a symmetric beam splitter as its
//! transmittance is swept, in units of |D|².

use num_complex::Complex64;
use spdc_vacuum::correlations::coincidence_rate;
use spdc_vacuum::model::{hom_detector_fields, BeamSplitter, CrystalParams};

fn main() -> spdc_vacuum::Result<()> {
    let gain = Complex64::new(0.1, 0.0);
    let crystal = CrystalParams::single(gain)?;
    for k in 0..=10 {
        let t2 = k as f64 / 10.0;
        let bs = BeamSplitter::symmetric(t2)?;
        let (ea, eb) = hom_detector_fields(&crystal, &bs);
        let rate = coincidence_rate(&ea, &eb)?.in_gain_units(gain);
        let bar = "#".repeat((rate * 40.0).round() as usize);
        println!("|t|^2 = {t2:.1}  R/|D|^2 = {rate:.4}  {bar}");
    }
    Ok(())
}
