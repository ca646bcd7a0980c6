//! Steady isentropic vortex on the disk, measured against the exact state.
//!
//! cargo run --release --example vortex_2d

use aprd::cases::{get_case, Overrides};
use aprd::cli::convergence_sweep;

fn main() -> aprd::Result<()> {
    let case = get_case("vortex_2d")?;
    let rings = [4, 8, 16];
    for degree in 1..=2 {
        for row in convergence_sweep(&case, degree, &rings, &Overrides::default())? {
            let rate = row.eoc.map(|e| format!("{:.2}", e[1])).unwrap_or_default();
            println!(
                "B{degree} rings={:2} dofs={:5} L2(rho)={:.3e} {rate}",
                row.cells, row.report.dofs, row.report.l2[0]
            );
        }
    }
    Ok(())
}
