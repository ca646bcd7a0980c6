//! Sine wave steepening into a shock under Burgers' equation with a stiff
//! relaxation (ε = 1e-9) and a time step set by the macroscopic CFL only.
//!
//! cargo run --release --example burgers_shock

use aprd::cases::{get_case, Overrides};

fn main() -> aprd::Result<()> {
    let case = get_case("burgers_sine")?;
    let sim = case.simulate(case.build_mesh(64)?, 2, &Overrides::default(), &[])?;
    let disc = &sim.op.disc;
    let values = disc.point_values(&sim.stats.u, 1);
    let mut pts: Vec<(f64, f64)> = disc.positions().iter().map(|p| p[0]).zip(values).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    println!("t = {} after {} steps", sim.stats.t, sim.stats.steps);
    for (x, u) in pts.iter().step_by(4) {
        let bar = ((u + 1.0) * 30.0).round().max(0.0) as usize;
        println!("{x:6.3} {u:+.4} {}", "#".repeat(bar));
    }
    Ok(())
}
