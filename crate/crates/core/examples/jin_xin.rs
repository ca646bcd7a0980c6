//! The 1D relaxation system in Jin-Xin variables `u = f_1 + f_2`,
//! `v = λ (f_2 - f_1)`: near equilibrium `v` tracks the flux `A(u)`.
//!
//! cargo run --release --example jin_xin

use aprd::cases::{get_case, Overrides};
use aprd::kinetic::{jin_xin_inverse, jin_xin_map, KineticField};
use aprd::model::flux_burgers;

fn main() -> aprd::Result<()> {
    let case = get_case("burgers_sine")?;
    for eps in [1e-9, 1e-2] {
        let ov = Overrides {
            eps: Some(eps),
            t_final: Some(0.2),
            ..Overrides::default()
        };
        let sim = case.simulate(case.build_mesh(64)?, 1, &ov, &[])?;
        let drm = &sim.op.drm;
        let f = KineticField {
            n_dofs: sim.op.disc.n_dofs(),
            n_blocks: 2,
            n_components: 1,
            data: sim.stats.f.clone(),
        };
        let (u, v) = jin_xin_map(drm, &f)?;
        let gap = u
            .iter()
            .zip(&v)
            .map(|(u, v)| (v - flux_burgers(*u)).abs())
            .fold(0.0, f64::max);
        let back = jin_xin_inverse(drm, &u, &v)?;
        let round = back
            .data
            .iter()
            .zip(&f.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("eps={eps:e}: max |v - A(u)| = {gap:.3e}, round trip error {round:.1e}");
    }
    Ok(())
}
