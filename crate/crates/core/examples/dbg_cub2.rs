use levyqft::quad::*;
use levyqft::testfn::TestFunction;
use levyqft::wightman::{wightman_truncated_density_clamped, DensityParams, MinkowskiMomentum};

fn main() {
    let p = DensityParams::new(0.25, 1.0, 1).unwrap();
    let f = TestFunction::gaussian(vec![-2.2, 0.3, 0.4, 1.6, 1.8, -1.9], 0.35).unwrap();
    let (lo, hi) = f.support_box(9.0);
    println!("box lo {:?} hi {:?}", lo, hi);
    let mut worst_seen: Vec<(f64, Vec<f64>, Vec<f64>)> = vec![];
    let est = integrate_box_debug(
        |x| {
            let k1 = MinkowskiMomentum::new(x[0], vec![x[1]]);
            let k2 = MinkowskiMomentum::new(x[2], vec![x[3]]);
            let k3 = k1.add(&k2).neg();
            let d = wightman_truncated_density_clamped(&p, 1.0, &[k1, k2, k3.clone()]);
            d * f.eval(&[x[0], x[1], x[2], x[3], k3.k0, k3.kvec[0]])
        },
        &lo, &hi, 1e-4, 1e-300, 3_000_000, &mut worst_seen,
    );
    println!("{:?}", est);
    for (e, c, h) in worst_seen.iter().take(8) {
        println!("err {:.3e} center {:?} half {:?}", e, c, h);
    }
}
