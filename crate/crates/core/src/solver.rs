//! Time loop: CFL step size, boundary conditions and output scheduling.

use rayon::prelude::*;

use crate::dec::{DecConfig, DecSolver, DecWorkspace, Dirichlet};
use crate::error::{Error, Result};
use crate::kinetic::DrmModel;
use crate::mesh::BoundaryTag;
use crate::residual::{SpatialOperator, Variant};
use crate::space::Discretization;

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    Periodic,
    Outflow,
    /// Imposed macroscopic state, converted to `f = M(u)`.
    Inflow(Vec<f64>),
    Wall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub cfl: f64,
    pub t_final: f64,
    /// Times at which snapshots are reported, in addition to `0` and `t_final`.
    pub output_times: Vec<f64>,
    pub dec: DecConfig,
    /// State held on inflow-tagged boundaries.
    pub inflow: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0) || !self.cfl.is_finite() {
            return Err(Error::config(format!("CFL must be positive, got {}", self.cfl)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::config(format!("final time must be >= 0, got {}", self.t_final)));
        }
        if self.dec.corrections == 0 || self.dec.subtimesteps == 0 {
            return Err(Error::config("corrections and subtimesteps must be >= 1"));
        }
        Ok(())
    }
}

/// `Δt = CFL h_min / λ`; the relaxation parameter plays no role.
pub fn compute_dt(h_min: f64, lambda: f64, cfl: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::config("relaxation speed must be positive"));
    }
    Ok(cfl * h_min / lambda)
}

/// Step sizes from `0` to `t_final` with raw size `dt`, landing exactly on
/// every stop in `stops`.
pub fn schedule(dt: f64, t_final: f64, stops: &[f64]) -> Vec<f64> {
    let mut targets: Vec<f64> = stops.iter().copied().filter(|&s| s > 0.0 && s < t_final).collect();
    targets.push(t_final);
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let mut steps = Vec::new();
    let mut t = 0.0;
    let tol = 1e-12 * t_final.max(1.0);
    for target in targets {
        while t < target - tol {
            let step = if target - t <= dt + tol { target - t } else { dt };
            steps.push(step);
            t = if step == target - t { target } else { t + step };
        }
        t = target;
    }
    steps
}

/// Resolves boundary tags into strongly imposed DoF sets.
pub fn apply_bc(disc: &Discretization, drm: &DrmModel, inflow: Option<&[f64]>) -> Result<Vec<Dirichlet>> {
    let dofs = disc.boundary_dofs(BoundaryTag::Inflow);
    if dofs.is_empty() {
        return Ok(Vec::new());
    }
    let state = inflow.ok_or_else(|| Error::config("mesh has inflow boundaries but no inflow state was given"))?;
    Ok(vec![Dirichlet::new(drm, dofs, state)?])
}

/// What the time loop reports after the initial state and after every step.
pub struct StepInfo<'a> {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub u: &'a [f64],
    pub f: &'a [f64],
    /// DeC iteration increments of this step (empty for the initial report).
    pub increments: &'a [f64],
    /// True at `0`, `t_final` and requested output times.
    pub is_output: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
}

/// Advances `f0` to `config.t_final`, calling `observe` on the initial state
/// and after each step.
pub fn time_loop<F>(op: &SpatialOperator, f0: Vec<f64>, config: &RunConfig, mut observe: F) -> Result<RunStats>
where
    F: FnMut(&StepInfo) -> Result<()>,
{
    config.validate()?;
    let dirichlet = apply_bc(&op.disc, &op.drm, config.inflow.as_deref())?;
    let dec = DecSolver::new(op, config.dec, dirichlet)?;
    let mut ws: DecWorkspace = dec.workspace();
    let mut f = f0;
    for d in &dec.dirichlet {
        d.apply_f(&mut f);
    }
    let mut u = op.drm_project(&f);
    observe(&StepInfo {
        step: 0,
        t: 0.0,
        dt: 0.0,
        u: &u,
        f: &f,
        increments: &[],
        is_output: true,
    })?;
    let dt = compute_dt(op.disc.h_min(), op.drm.lambda, config.cfl)?;
    let steps = schedule(dt, config.t_final, &config.output_times);
    let mut stops: Vec<f64> = config.output_times.clone();
    stops.push(config.t_final);
    let mut t = 0.0;
    for (i, h) in steps.iter().enumerate() {
        let (un, fnew) = dec.dec_step(&mut ws, &f, *h).map_err(|e| e.at_time(t))?;
        t += h;
        if let Some(s) = stops.iter().find(|s| (*s - t).abs() <= 1e-12 * config.t_final.max(1.0)) {
            t = *s;
        }
        u = un;
        f = fnew;
        let is_output = stops.contains(&t);
        observe(&StepInfo {
            step: i + 1,
            t,
            dt: *h,
            u: &u,
            f: &f,
            increments: &ws.increments,
            is_output,
        })?;
    }
    Ok(RunStats {
        steps: steps.len(),
        t,
        u,
        f,
    })
}

impl SpatialOperator {
    /// `P f` for a whole field.
    pub fn drm_project(&self, f: &[f64]) -> Vec<f64> {
        let k = self.drm.n_components();
        let w = self.width();
        let mut u = vec![0.0; f.len() / w * k];
        for (fi, ui) in f.chunks_exact(w).zip(u.chunks_exact_mut(k)) {
            self.drm.project_dof(fi, ui);
        }
        u
    }

    /// True when Maxwellians are evaluated at the control-point values and
    /// interpolated back: the unlimited scheme at `d >= 2`, where Maxwellians
    /// of the Bernstein coefficients would only be second-order accurate. The
    /// limited scheme keeps them per coefficient, so that every kinetic
    /// coefficient stays the Maxwellian of an admissible state.
    pub fn interpolated_maxwellian(&self) -> bool {
        self.disc.degree > 1 && self.scheme.variant == Variant::GalerkinJump
    }

    /// Equilibrium field `M(u)` for macroscopic coefficients `u`. Failures
    /// are tagged with the DoF and its position.
    pub fn maxwellian_field(&self, u: &[f64]) -> Result<Vec<f64>> {
        let k = self.drm.n_components();
        let w = self.width();
        let interpolated = self.interpolated_maxwellian();
        let values = if interpolated {
            self.disc.point_values(u, k)
        } else {
            u.to_vec()
        };
        let mut out = vec![0.0; values.len() / k * w];
        out.par_chunks_mut(w)
            .zip(values.par_chunks(k))
            .enumerate()
            .try_for_each(|(i, (m, ui))| {
                self.drm
                    .maxwellian(ui, m)
                    .map_err(|e| e.at_dof(i, Some(self.disc.positions()[i])))
            })?;
        if interpolated {
            return Ok(self.disc.from_point_values(&out, w));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dt_examples() {
        assert_relative_eq!(compute_dt(0.25, 2.0, 0.1).unwrap(), 0.0125);
        let s = schedule(0.0125, 0.02, &[]);
        assert_eq!(s.len(), 2);
        assert_relative_eq!(s[0], 0.0125);
        assert_relative_eq!(s[1], 0.0075, epsilon = 1e-15);
        assert!(schedule(0.1, 0.0, &[]).is_empty());
        let s = schedule(0.3, 1.0, &[0.5]);
        assert_eq!(s.len(), 4);
        assert_relative_eq!(s.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(s[0] + s[1], 0.5, epsilon = 1e-15);
    }
}
