//! With one crystal pumped, the coincidence rate equals a correlation
//! between the down-converted signal at A and the vacuum idler field at B.

use num_complex::Complex64;
use spdc_vacuum::correlations::{coincidence_rate, vacuum_decomposition_rate};
use spdc_vacuum::model::{
    field_component_split, two_crystal_detector_fields, BeamSplitter, CrystalParams, PathDelay,
};

fn main() -> spdc_vacuum::Result<()> {
    let (c1, c2) =
        CrystalParams::two_identical(Complex64::new(0.1, 0.02), Complex64::new(0.0, 0.0))?;
    let bs = BeamSplitter::symmetric(0.3)?;
    let (ea, eb) =
        two_crystal_detector_fields(&c1, &c2, &bs, &bs, PathDelay::new(0.4)?, PathDelay::zero())?;

    let (generated, vacuum) = field_component_split(&ea);
    println!("E_A generated part:\n{}", generated.to_text());
    println!("E_A vacuum part:\n{}", vacuum.to_text());
    println!(
        "full rate          {:e}",
        coincidence_rate(&ea, &eb)?.value()
    );
    println!(
        "signal x vacuum    {:e}",
        vacuum_decomposition_rate(&ea, &eb)?.value()
    );
    Ok(())
}
