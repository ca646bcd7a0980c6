//! IMEX deferred correction in time: an explicit first-order prediction
//! followed by corrections that each raise the order by one.
//!
//! The relaxation parameter only enters through `ε/(ε+Δt^m)` and
//! `Δt^m/(ε+Δt^m)`, so every update stays finite for `ε = 0`.

use crate::basis::dense_inverse;
use crate::error::{Error, Result};
use crate::kinetic::DrmModel;
use crate::residual::{SpatialOperator, StageCache, Variant};

/// Equispaced subtimesteps `t^{n,m} = t^n + (m/M) Δt` and their integration weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtimeGrid {
    pub m: usize,
    /// Node positions as fractions of the step.
    pub nodes: Vec<f64>,
    /// `w[m][r] = ∫_0^{t_m} ℓ_r / Δt`; row 0 is zero.
    pub weights: Vec<Vec<f64>>,
}

impl SubtimeGrid {
    pub fn new(m: usize) -> Result<Self> {
        Ok(SubtimeGrid {
            m,
            nodes: (0..=m).map(|i| i as f64 / m as f64).collect(),
            weights: quad_weights(m)?,
        })
    }
}

/// Integrals of the Lagrange basis on `M + 1` equispaced nodes in `[0, 1]`
/// from 0 to each node.
pub fn quad_weights(m: usize) -> Result<Vec<Vec<f64>>> {
    if !(1..=3).contains(&m) {
        return Err(Error::config(format!(
            "unsupported subtimestep count {m} (use 1, 2 or 3)"
        )));
    }
    let nodes: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
    // vandermonde[r][p] = t_r^p; columns of its inverse are the Lagrange coefficients
    let v: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&t| (0..=m).map(|p| t.powi(p as i32)).collect())
        .collect();
    let coeffs = dense_inverse(&v);
    Ok(nodes
        .iter()
        .map(|&t| {
            (0..=m)
                .map(|r| {
                    (0..=m)
                        .map(|p| coeffs[p][r] * t.powi(p as i32 + 1) / (p + 1) as f64)
                        .sum()
                })
                .collect()
        })
        .collect())
}

/// DoFs whose values are imposed strongly after every update.
#[derive(Debug, Clone, PartialEq)]
pub struct Dirichlet {
    pub dofs: Vec<usize>,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
}

impl Dirichlet {
    pub fn new(drm: &DrmModel, dofs: Vec<usize>, u: &[f64]) -> Result<Self> {
        Ok(Dirichlet {
            dofs,
            u: u[..drm.n_components()].to_vec(),
            f: drm.maxwellian_vec(u)?,
        })
    }

    pub fn apply_u(&self, u: &mut [f64]) {
        let k = self.u.len();
        for &g in &self.dofs {
            u[g * k..(g + 1) * k].copy_from_slice(&self.u);
        }
    }

    pub fn apply_f(&self, f: &mut [f64]) {
        let w = self.f.len();
        for &g in &self.dofs {
            f[g * w..(g + 1) * w].copy_from_slice(&self.f);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecConfig {
    pub subtimesteps: usize,
    /// Total iterations: one prediction plus `corrections - 1` correction sweeps.
    pub corrections: usize,
}

impl DecConfig {
    /// `M = d` subtimesteps and `K = d + 1` iterations.
    pub fn for_degree(degree: usize) -> Self {
        DecConfig {
            subtimesteps: degree,
            corrections: degree + 1,
        }
    }
}

/// Subtimestep data of the current and previous iteration.
#[derive(Debug, Clone)]
pub struct DecWorkspace {
    pub grid: SubtimeGrid,
    pub u: Vec<Vec<f64>>,
    pub f: Vec<Vec<f64>>,
    /// Assembled advective residuals `Σ_K φ^K(f^m)`.
    pub residual: Vec<Vec<f64>>,
    /// Max-norm of `f^{M,(k+1)} - f^{M,(k)}` for each iteration of the last step.
    pub increments: Vec<f64>,
}

impl DecWorkspace {
    pub fn new(grid: SubtimeGrid, n_dofs: usize, k: usize, w: usize) -> Self {
        let m = grid.m;
        DecWorkspace {
            grid,
            u: vec![vec![0.0; n_dofs * k]; m + 1],
            f: vec![vec![0.0; n_dofs * w]; m + 1],
            residual: vec![vec![0.0; n_dofs * w]; m + 1],
            increments: Vec::new(),
        }
    }
}

/// Regular and relaxation parts of the high-order defect at one subtimestep.
/// The full kinetic defect is `f_regular - f_relax / ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Defect {
    pub u: Vec<f64>,
    pub f_regular: Vec<f64>,
    pub f_relax: Vec<f64>,
}

/// Time integrator bound to a spatial operator.
pub struct DecSolver<'a> {
    pub op: &'a SpatialOperator,
    pub config: DecConfig,
    pub dirichlet: Vec<Dirichlet>,
}

impl<'a> DecSolver<'a> {
    pub fn new(op: &'a SpatialOperator, config: DecConfig, dirichlet: Vec<Dirichlet>) -> Result<Self> {
        if config.corrections == 0 {
            return Err(Error::config("at least one DeC iteration is required"));
        }
        SubtimeGrid::new(config.subtimesteps)?;
        Ok(DecSolver { op, config, dirichlet })
    }

    pub fn workspace(&self) -> DecWorkspace {
        let grid = SubtimeGrid::new(self.config.subtimesteps).expect("validated in new");
        DecWorkspace::new(grid, self.op.disc.n_dofs(), self.op.drm.n_components(), self.op.width())
    }

    fn drm(&self) -> &DrmModel {
        &self.op.drm
    }

    fn lumped(&self) -> &[f64] {
        &self.op.disc.lumped
    }

    fn project(&self, f: &[f64]) -> Vec<f64> {
        let k = self.drm().n_components();
        let w = self.op.width();
        let mut u = vec![0.0; f.len() / w * k];
        for (fi, ui) in f.chunks_exact(w).zip(u.chunks_exact_mut(k)) {
            self.drm().project_dof(fi, ui);
        }
        u
    }

    /// Maxwellians of the macroscopic coefficients `u`.
    pub fn maxwellians(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.op.maxwellian_field(u)
    }

    fn impose_u(&self, u: &mut [f64]) {
        for d in &self.dirichlet {
            d.apply_u(u);
        }
    }

    fn impose_f(&self, f: &mut [f64]) {
        for d in &self.dirichlet {
            d.apply_f(f);
        }
    }

    /// Explicit macroscopic update `u^m = P f^0 - Δt^m/|C_σ| Σ_K P φ^K(f^0)`.
    pub fn l1_update_u(&self, f0: &[f64], residual0: &[f64], dt_m: f64) -> Vec<f64> {
        let mut u = self.project(f0);
        let pr = self.project(residual0);
        let k = self.drm().n_components();
        for (i, c) in self.lumped().iter().enumerate() {
            for j in 0..k {
                u[i * k + j] -= dt_m / c * pr[i * k + j];
            }
        }
        self.impose_u(&mut u);
        u
    }

    /// IMEX kinetic update, explicit because `u^m` is already known.
    pub fn l1_update_f(&self, f0: &[f64], residual0: &[f64], um: &[f64], dt_m: f64) -> Result<Vec<f64>> {
        let eps = self.drm().eps;
        let w = self.op.width();
        let keep = eps / (eps + dt_m);
        let relax = dt_m / (eps + dt_m);
        let mut f = self.maxwellians(um)?;
        for (i, c) in self.lumped().iter().enumerate() {
            let adv = eps * dt_m / (c * (eps + dt_m));
            for j in i * w..(i + 1) * w {
                f[j] = keep * f0[j] - adv * residual0[j] + relax * f[j];
            }
        }
        self.impose_f(&mut f);
        Ok(f)
    }

    /// High-order defect of subtimestep `m` for the data in `ws`, given the
    /// Maxwellians of `ws.u` and refreshed residuals. With a stage cache
    /// (limited variant) the limiter acts on the whole space-time defect of
    /// each element instead.
    pub fn l2_defect(
        &self,
        ws: &DecWorkspace,
        maxw: &[Vec<f64>],
        cache: Option<&StageCache>,
        m: usize,
        dt: f64,
    ) -> Result<L2Defect> {
        let k = self.drm().n_components();
        let w = self.op.width();
        let n = self.op.disc.n_dofs();
        let row = &ws.grid.weights[m];
        let df: Vec<f64> = ws.f[m].iter().zip(&ws.f[0]).map(|(a, b)| a - b).collect();

        let mut f_relax = vec![0.0; n * w];
        for (r, wr) in row.iter().enumerate() {
            let s = dt * wr;
            if s == 0.0 {
                continue;
            }
            for (i, c) in self.lumped().iter().enumerate() {
                for j in i * w..(i + 1) * w {
                    f_relax[j] += s * c * (maxw[r][j] - ws.f[r][j]);
                }
            }
        }

        if let Some(cache) = cache {
            let scales: Vec<f64> = row.iter().map(|wr| dt * wr).collect();
            let mut f_regular = vec![0.0; n * w];
            self.op.space_time_residual(&df, &scales, cache, &ws.f, &mut f_regular);
            return Ok(L2Defect {
                u: self.project(&f_regular),
                f_regular,
                f_relax,
            });
        }

        let du: Vec<f64> = ws.u[m].iter().zip(&ws.u[0]).map(|(a, b)| a - b).collect();
        let mut mass_u = vec![0.0; n * k];
        let mut f_regular = vec![0.0; n * w];
        self.op.disc.apply_mass(&du, k, &mut mass_u);
        self.op.disc.apply_mass(&df, w, &mut f_regular);
        for (r, wr) in row.iter().enumerate() {
            let s = dt * wr;
            if s == 0.0 {
                continue;
            }
            for (j, v) in f_regular.iter_mut().enumerate() {
                *v += s * ws.residual[r][j];
            }
        }
        let mut u = mass_u;
        for (r, wr) in row.iter().enumerate() {
            let s = dt * wr;
            if s == 0.0 {
                continue;
            }
            let pr = self.project(&ws.residual[r]);
            for (v, p) in u.iter_mut().zip(&pr) {
                *v += s * p;
            }
        }
        Ok(L2Defect { u, f_regular, f_relax })
    }

    /// One correction sweep over all subtimesteps: every `u^m` first, then every `f^m`.
    /// Residuals in `ws` must correspond to `ws.f`.
    pub fn dec_correct(&self, ws: &mut DecWorkspace, dt: f64) -> Result<()> {
        let eps = self.drm().eps;
        let mm = ws.grid.m;
        let maxw_old: Vec<Vec<f64>> = ws.u.iter().map(|u| self.maxwellians(u)).collect::<Result<_>>()?;
        let cache = match self.op.scheme.variant {
            Variant::LxfBlend => Some(self.op.stage_cache(&ws.f)?),
            Variant::GalerkinJump => None,
        };
        let defects: Vec<L2Defect> = (1..=mm)
            .map(|m| self.l2_defect(ws, &maxw_old, cache.as_ref(), m, dt))
            .collect::<Result<_>>()?;

        let mut new_u = Vec::with_capacity(mm);
        for m in 1..=mm {
            let d = &defects[m - 1];
            let k = self.drm().n_components();
            let mut u = ws.u[m].clone();
            for (i, c) in self.lumped().iter().enumerate() {
                for j in i * k..(i + 1) * k {
                    u[j] -= d.u[j] / c;
                }
            }
            self.impose_u(&mut u);
            new_u.push(u);
        }
        let w = self.op.width();
        for m in 1..=mm {
            let dt_m = ws.grid.nodes[m] * dt;
            let d = &defects[m - 1];
            let maxw_new = self.maxwellians(&new_u[m - 1])?;
            let relax = dt_m / (eps + dt_m);
            let keep = eps / (eps + dt_m);
            let inv = 1.0 / (eps + dt_m);
            let f = &mut ws.f[m];
            for (i, c) in self.lumped().iter().enumerate() {
                for j in i * w..(i + 1) * w {
                    f[j] += relax * (maxw_new[j] - maxw_old[m][j]) - keep * d.f_regular[j] / c + inv * d.f_relax[j] / c;
                }
            }
            self.impose_f(f);
        }
        for (m, u) in new_u.into_iter().enumerate() {
            ws.u[m + 1] = u;
        }
        Ok(())
    }

    /// Recomputes the advective residuals of subtimesteps `1..=M`.
    pub fn refresh_residuals(&self, ws: &mut DecWorkspace) -> Result<()> {
        for m in 1..=ws.grid.m {
            let (f, r) = (&ws.f[m], &mut ws.residual[m]);
            self.op.advective_residual(f, r)?;
        }
        Ok(())
    }

    /// Advances `f` by `dt`: prediction for every subtimestep, then
    /// `corrections - 1` correction sweeps. Returns `(u, f)` at the new time.
    pub fn dec_step(&self, ws: &mut DecWorkspace, f: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mm = ws.grid.m;
        ws.f[0].copy_from_slice(f);
        ws.u[0] = self.project(f);
        let (f0, r0) = (&ws.f[0], &mut ws.residual[0]);
        self.op.advective_residual(f0, r0)?;
        for m in 1..=mm {
            let dt_m = ws.grid.nodes[m] * dt;
            let u = self.l1_update_u(&ws.f[0], &ws.residual[0], dt_m);
            let fm = self.l1_update_f(&ws.f[0], &ws.residual[0], &u, dt_m)?;
            ws.u[m] = u;
            ws.f[m] = fm;
        }
        ws.increments.clear();
        ws.increments.push(max_diff(&ws.f[mm], &ws.f[0]));
        for _ in 1..self.config.corrections {
            // the limited defect rebuilds its own element residuals
            if self.op.scheme.variant == Variant::GalerkinJump {
                self.refresh_residuals(ws)?;
            }
            let before = ws.f[mm].clone();
            self.dec_correct(ws, dt)?;
            ws.increments.push(max_diff(&ws.f[mm], &before));
        }
        Ok((ws.u[mm].clone(), ws.f[mm].clone()))
    }
}

pub(crate) fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::KineticField;
    use crate::mesh::{build_uniform_1d, Mesh};
    use crate::model::HyperbolicModel;
    use crate::residual::{SchemeConfig, Variant};
    use crate::space::Discretization;
    use approx::assert_relative_eq;

    #[test]
    fn weights_examples() {
        let w = quad_weights(1).unwrap();
        assert_eq!(w[0], vec![0.0, 0.0]);
        assert_relative_eq!(w[1][0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(w[1][1], 0.5, epsilon = 1e-15);
        let w = quad_weights(2).unwrap();
        for (a, b) in w[1].iter().zip([5.0 / 24.0, 8.0 / 24.0, -1.0 / 24.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        for (a, b) in w[2].iter().zip([1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        for m in 1..=3 {
            let w = quad_weights(m).unwrap();
            for (i, row) in w.iter().enumerate() {
                assert_relative_eq!(row.iter().sum::<f64>(), i as f64 / m as f64, epsilon = 1e-14);
                // exact on t^m
                let nodes: Vec<f64> = (0..=m).map(|r| r as f64 / m as f64).collect();
                let q: f64 = row.iter().zip(&nodes).map(|(w, t)| w * t.powi(m as i32)).sum();
                let t = nodes[i];
                assert_relative_eq!(q, t.powi(m as i32 + 1) / (m + 1) as f64, epsilon = 1e-14);
            }
        }
        assert!(quad_weights(0).is_err());
        assert!(quad_weights(4).is_err());
    }

    /// Operator for spatially constant data, where every advective residual
    /// vanishes and each DoF follows `f' = (M(u) - f)/ε`.
    fn still(eps: f64, d: usize) -> SpatialOperator {
        let mesh = Mesh::Interval(build_uniform_1d(0.0, 1.0, 4, true).unwrap());
        let disc = Discretization::new(mesh, d).unwrap();
        let drm = DrmModel::new(HyperbolicModel::Transport { speed: 0.0 }, 1.0, eps).unwrap();
        SpatialOperator::new(disc, drm, SchemeConfig::new(Variant::GalerkinJump, d, &[]).unwrap()).unwrap()
    }

    #[test]
    fn relaxation_ode_surrogate() {
        // constant field: g = f - M(u) obeys g' = -g/ε with ε = 1
        let op = still(1.0, 1);
        let solver = DecSolver::new(
            &op,
            DecConfig {
                subtimesteps: 1,
                corrections: 2,
            },
            vec![],
        )
        .unwrap();
        let mut ws = solver.workspace();
        let n = op.disc.n_dofs();
        let f: Vec<f64> = (0..n).flat_map(|_| [1.0, 0.0]).collect();
        // u = 1, M(u) = (1/2, 1/2) for zero flux, so g(0) = (1/2, -1/2)
        for dt in [0.1, 0.05, 0.025] {
            let (_, f1) = solver.dec_step(&mut ws, &f, dt).unwrap();
            let g = f1[0] - 0.5;
            let expect = 0.5 * (1.0 + dt - dt * dt / 2.0) / ((1.0 + dt) * (1.0 + dt));
            assert_relative_eq!(g, expect, epsilon = 1e-14);
            let taylor = 0.5 * (1.0 - dt + dt * dt / 2.0);
            assert!((g - taylor).abs() < 0.5 * dt.powi(3));
        }
    }

    #[test]
    fn l1_examples() {
        let op = still(0.1, 1);
        let solver = DecSolver::new(&op, DecConfig::for_degree(1), vec![]).unwrap();
        let n = op.disc.n_dofs();
        let u0: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let f0 = KineticField::equilibrium(&op.drm, &u0).unwrap().data;
        let zero = vec![0.0; f0.len()];
        let u = solver.l1_update_u(&f0, &zero, 0.1);
        for (a, b) in u.iter().zip(&u0) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
        let f = solver.l1_update_f(&f0, &zero, &u, 0.1).unwrap();
        for (a, b) in f.iter().zip(&f0) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
        // ε = Δt^m: half way to the Maxwellian
        let off: Vec<f64> = (0..n).flat_map(|_| [1.0, 0.0]).collect();
        let f = solver.l1_update_f(&off, &zero, &vec![1.0; n], 0.1).unwrap();
        assert_relative_eq!(f[0], 0.75, epsilon = 1e-15);
        assert_relative_eq!(f[1], 0.25, epsilon = 1e-15);

        // single-DoF arithmetic with a hand-built residual: P φ = 0.2 at a DoF with |C| = 0.5
        let mut r = zero.clone();
        r[0] = 0.2;
        let mut f1 = f0.clone();
        f1[0] = 1.0 - f1[1];
        let mesh = Mesh::Interval(build_uniform_1d(0.0, 2.0, 4, true).unwrap());
        let disc = Discretization::new(mesh, 1).unwrap();
        assert_relative_eq!(disc.lumped[0], 0.5);
        let op2 = SpatialOperator::new(disc, op.drm, op.scheme.clone()).unwrap();
        let s2 = DecSolver::new(&op2, DecConfig::for_degree(1), vec![]).unwrap();
        let u = s2.l1_update_u(&f1, &r, 0.1);
        assert_relative_eq!(u[0], 0.96, epsilon = 1e-15);
    }

    #[test]
    fn eps_zero_limit_is_maxwellian() {
        // well-prepared data stays on the equilibrium manifold at ε = 0
        let mesh = Mesh::Interval(build_uniform_1d(0.0, 1.0, 8, true).unwrap());
        let disc = Discretization::new(mesh, 2).unwrap();
        let drm = DrmModel::new(HyperbolicModel::Burgers, 2.0, 0.0).unwrap();
        let op = SpatialOperator::new(disc, drm, SchemeConfig::new(Variant::LxfBlend, 2, &[1.0]).unwrap()).unwrap();
        let solver = DecSolver::new(&op, DecConfig::for_degree(2), vec![]).unwrap();
        let mut ws = solver.workspace();
        let u0 = op
            .disc
            .interpolate(1, |p| vec![(2.0 * std::f64::consts::PI * p[0]).sin()]);
        let f = KineticField::equilibrium(&drm, &u0).unwrap().data;
        let (u, f1) = solver.dec_step(&mut ws, &f, 0.01).unwrap();
        assert!(max_diff(&u, &u0) > 1e-4);
        let m = KineticField::equilibrium(&drm, &u).unwrap().data;
        assert!(max_diff(&f1, &m) < 1e-14, "{}", max_diff(&f1, &m));
        assert!(f1.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn equilibrium_constant_state_is_fixed() {
        let mesh = Mesh::Interval(build_uniform_1d(0.0, 1.0, 8, true).unwrap());
        let disc = Discretization::new(mesh, 3).unwrap();
        let drm = DrmModel::new(HyperbolicModel::Euler1D { gamma: 1.4 }, 2.0, 1e-9).unwrap();
        let op =
            SpatialOperator::new(disc, drm, SchemeConfig::new(Variant::LxfBlend, 3, &[2.5, 4.0]).unwrap()).unwrap();
        let solver = DecSolver::new(&op, DecConfig::for_degree(3), vec![]).unwrap();
        let mut ws = solver.workspace();
        let n = op.disc.n_dofs();
        let u0: Vec<f64> = (0..n).flat_map(|_| [1.0, 0.5, 2.5]).collect();
        let f = KineticField::equilibrium(&drm, &u0).unwrap().data;
        let (u, f1) = solver.dec_step(&mut ws, &f, 0.01).unwrap();
        assert!(max_diff(&u, &u0) < 1e-14, "{}", max_diff(&u, &u0));
        assert!(max_diff(&f1, &f) < 1e-14);
    }
}
