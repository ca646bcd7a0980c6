//! Sod shock tube with the limited scheme, compared with the exact
//! Riemann solution.
//!
//! cargo run --release --example sod_tube

use aprd::cases::{get_case, Overrides};
use aprd::cli::measure_error;
use aprd::model::primitive_1d;
use aprd::verify::exact_riemann;

fn main() -> aprd::Result<()> {
    let case = get_case("sod_1d")?;
    let exact = exact_riemann([1.0, 0.0, 1.0], [0.125, 0.0, 0.1], 1.4)?;
    println!("p* = {:.5}, u* = {:.5}", exact.p_star, exact.u_star);
    for degree in 1..=3 {
        let sim = case.simulate(case.build_mesh(128)?, degree, &Overrides::default(), &[])?;
        let err = measure_error(&case, &sim, None)?;
        println!("B{degree} N=128: L1 density error {:.3e}", err.l1[0]);
        if degree == 3 {
            let t = sim.stats.t;
            let values = sim.op.disc.point_values(&sim.stats.u, 3);
            for (i, p) in sim.op.disc.positions().iter().enumerate().step_by(24) {
                let w = primitive_1d([values[3 * i], values[3 * i + 1], values[3 * i + 2]], 1.4)?;
                let e = exact.sample((p[0] - 0.5) / t);
                println!("  x={:.3} rho={:.4} exact={:.4}", p[0], w[0], e[0]);
            }
        }
    }
    Ok(())
}
