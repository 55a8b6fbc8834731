//! Normal-orders a few operator products and checks each vacuum value
//! against the truncated Fock-space oracle.

use spdc_vacuum::algebra::{normal_order, vacuum_expectation};
use spdc_vacuum::oracle::FockOracle;
use spdc_vacuum::{ModeId, OperatorPoly};

fn main() -> spdc_vacuum::Result<()> {
    let s = ModeId::new("s")?;
    let i = ModeId::new("i")?;
    let (a, ad) = (OperatorPoly::annihilate(&s), OperatorPoly::create(&s));
    let (b, bd) = (OperatorPoly::annihilate(&i), OperatorPoly::create(&i));

    let products = [
        ("a a+", &a * &ad),
        ("a a+ a a+", &a * &ad * &a * &ad),
        ("a b+ b a+", &a * &bd * &b * &ad),
        ("(a + b+)(a+ + b)", (&a + &bd) * (&ad + &b)),
    ];
    for (label, p) in &products {
        let normal = normal_order(p);
        let oracle = FockOracle::covering(p)?.expectation(p)?;
        println!("{label}");
        print!("{}", normal.to_text());
        println!(
            "  <vac|.|vac> = {}  (oracle {})\n",
            vacuum_expectation(p),
            oracle
        );
    }
    Ok(())
}
