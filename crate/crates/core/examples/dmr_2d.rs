//! Mach 10 wedge reflection at reduced resolution. Writes a VTK snapshot
//! and a slice CSV to the output directory (`APRD_OUT_DIR` or `aprd_out`).
//!
//! cargo run --release --example dmr_2d

use std::path::PathBuf;

use aprd::cases::{get_case, Overrides};
use aprd::cli::output::{slice_csv, snapshot_vtk, write_file};
use aprd::cli::OUT_DIR_ENV;

fn main() -> aprd::Result<()> {
    let case = get_case("dmr_2d")?;
    let out = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| "aprd_out".into());
    let sim = case.simulate(case.build_mesh(8)?, 1, &Overrides::default(), &[])?;
    let disc = &sim.op.disc;
    println!("{} triangles, {} steps", disc.n_elements(), sim.stats.steps);
    let vtk = snapshot_vtk(disc, &sim.stats.u, 4, "dmr_2d B1");
    let slice = slice_csv(disc, &sim.stats.u, 4, case.slice_y(), 201);
    println!("wrote {}", write_file(&out, "dmr_example.vtk", &vtk)?.display());
    println!("wrote {}", write_file(&out, "dmr_example_slice.csv", &slice)?.display());
    Ok(())
}
