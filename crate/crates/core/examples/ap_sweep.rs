//! Transport errors across relaxation parameters, from the stiff limit to
//! ε = 1.
//!
//! cargo run --release --example ap_sweep

use aprd::cases::{get_case, Overrides};
use aprd::cli::{ap_csv, ap_study};

fn main() -> aprd::Result<()> {
    let case = get_case("transport_gaussian")?;
    let rows = ap_study(
        &case,
        1,
        &[1e-9, 1e-6, 1e-3, 1.0],
        &[32, 64, 128],
        &Overrides::default(),
    )?;
    print!("{}", ap_csv(&rows));
    Ok(())
}
