use levyqft::hsc::*;
use levyqft::testfn::TestFunction;
use levyqft::wightman::DensityParams;
use std::time::Instant;

fn main() {
    let p = DensityParams::new(0.25, 1.0, 1).unwrap();
    let f = TestFunction::gaussian(vec![-2.2, 0.3, 0.4, 1.6, 1.8, -1.9], 0.35).unwrap();
    for tol in [1e-2, 3e-3, 1e-3, 3e-4, 1e-4] {
        let t = Instant::now();
        let r = pairing(&p, 3, 1.0, &f, PairingOptions { rel_tol: tol, max_evals: 60_000_000 });
        println!("tol {tol:>8.0e}: {:?}  in {:.2?}", r, t.elapsed());
    }
}
