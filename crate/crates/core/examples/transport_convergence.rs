//! Convergence table for the periodic Gaussian transport case.
//!
//! cargo run --release --example transport_convergence

use aprd::cases::{get_case, Overrides};
use aprd::cli::{convergence_csv, convergence_sweep};
use aprd::verify::eoc_fit;

fn main() -> aprd::Result<()> {
    let case = get_case("transport_gaussian")?;
    let cells = [32, 64, 128, 256];
    let mut rows = Vec::new();
    for degree in 1..=2 {
        let sweep = convergence_sweep(&case, degree, &cells, &Overrides::default())?;
        let errs: Vec<f64> = sweep.iter().map(|r| r.report.l2[0]).collect();
        let hs: Vec<f64> = sweep.iter().map(|r| r.report.h).collect();
        println!("B{degree}: fitted L2 rate {:.2}", eoc_fit(&errs, &hs)?);
        rows.extend(sweep);
    }
    print!("{}", convergence_csv(&rows));
    Ok(())
}
