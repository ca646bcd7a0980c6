//! Benchmark catalogue: models, domains, initial data and per-degree
//! parameters.

use std::f64::consts::PI;

use crate::dec::DecConfig;
use crate::error::{Error, Result};
use crate::kinetic::{DrmModel, KineticField, Subcharacteristic};
use crate::mesh::generate::{disk_rings, polygon};
use crate::mesh::{build_uniform_1d, BoundaryTag, Mesh, SimplexMesh};
use crate::model::{conservative_1d, conservative_2d, HyperbolicModel};
use crate::residual::{SchemeConfig, SpatialOperator, Variant};
use crate::solver::{time_loop, RunConfig, RunStats, StepInfo};
use crate::space::Discretization;
use crate::verify::exact_riemann;

pub const CASE_NAMES: [&str; 9] = [
    "burgers_sine",
    "transport_gaussian",
    "euler_isentropic",
    "sod_1d",
    "woodward_colella",
    "shu_osher",
    "vortex_2d",
    "sod_2d",
    "dmr_2d",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshRecipe {
    Interval {
        a: f64,
        b: f64,
        periodic: bool,
    },
    /// Structured rings; the cell count is the number of rings.
    Disk {
        radius: f64,
        tag: BoundaryTag,
    },
    /// Wedge channel; the cell count is the number of cells per unit length.
    Wedge,
}

/// Corners and side tags of the double Mach reflection channel. The channel
/// is turned by 180 degrees so the post-shock flow runs along `-x`: the
/// velocity set of the 2D relaxation model carries that direction with two
/// blocks, and the kinetic Maxwellians of the Mach 10 state stay admissible
/// at the catalogue `λ`.
pub const WEDGE_CORNERS: [[f64; 2]; 5] = [[0.2, 0.0], [0.0, 0.0], [-3.0, -1.7], [-3.0, -2.2], [0.2, -2.2]];
pub const WEDGE_TAGS: [BoundaryTag; 5] = [
    BoundaryTag::Wall,
    BoundaryTag::Wall,
    BoundaryTag::Outflow,
    BoundaryTag::Wall,
    BoundaryTag::Inflow,
];

#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub name: &'static str,
    pub model: HyperbolicModel,
    pub mesh: MeshRecipe,
    pub default_cells: usize,
    pub lambda: f64,
    pub eps: f64,
    pub cfl: f64,
    pub t_final: f64,
    pub variant: Variant,
    /// Jump weights for degrees 1, 2 and 3.
    pub theta: [&'static [f64]; 3],
    /// Iterations for B3 when more than `d + 1` are needed.
    pub b3_corrections: Option<usize>,
    /// Initial data with jumps are sampled at control points instead of interpolated.
    pub discontinuous: bool,
    init: fn([f64; 2]) -> Vec<f64>,
}

pub fn get_case(name: &str) -> Result<BenchmarkCase> {
    let euler1d = HyperbolicModel::Euler1D { gamma: 1.4 };
    let euler2d = HyperbolicModel::Euler2D { gamma: 1.4 };
    let unit = MeshRecipe::Interval {
        a: 0.0,
        b: 1.0,
        periodic: false,
    };
    let case = match name {
        "burgers_sine" => BenchmarkCase {
            name: "burgers_sine",
            model: HyperbolicModel::Burgers,
            mesh: MeshRecipe::Interval {
                a: 0.0,
                b: 1.0,
                periodic: true,
            },
            default_cells: 128,
            lambda: 2.0,
            eps: 1e-9,
            cfl: 0.1,
            t_final: 0.5,
            variant: Variant::LxfBlend,
            theta: [&[1.0], &[1.0], &[1.0, 0.5]],
            b3_corrections: None,
            discontinuous: false,
            init: |x| vec![(2.0 * PI * x[0]).sin()],
        },
        "transport_gaussian" => BenchmarkCase {
            name: "transport_gaussian",
            model: HyperbolicModel::Transport { speed: 1.0 },
            mesh: MeshRecipe::Interval {
                a: 0.0,
                b: 1.0,
                periodic: true,
            },
            default_cells: 128,
            lambda: 1.5,
            eps: 1e-9,
            cfl: 0.1,
            t_final: 0.12,
            variant: Variant::GalerkinJump,
            theta: [&[1.0], &[1.0, 0.0], &[1.0, 5.0]],
            b3_corrections: Some(7),
            discontinuous: false,
            init: |x| vec![periodic_gaussian(x[0])],
        },
        "euler_isentropic" => BenchmarkCase {
            name: "euler_isentropic",
            model: HyperbolicModel::Euler1D { gamma: 3.0 },
            mesh: MeshRecipe::Interval {
                a: -1.0,
                b: 1.0,
                periodic: true,
            },
            default_cells: 128,
            lambda: 3.0,
            eps: 1e-9,
            cfl: 0.2,
            t_final: 0.1,
            variant: Variant::GalerkinJump,
            theta: [&[1.0], &[1.0, 0.0], &[1.0, 5.0]],
            b3_corrections: Some(7),
            discontinuous: false,
            init: |x| {
                let rho = 1.0 + 0.5 * (PI * x[0]).sin();
                conservative_1d(rho, 0.0, rho.powi(3), 3.0).to_vec()
            },
        },
        "sod_1d" => BenchmarkCase {
            name: "sod_1d",
            model: euler1d,
            mesh: unit,
            default_cells: 256,
            lambda: 2.0,
            eps: 1e-9,
            cfl: 0.2,
            t_final: 0.16,
            variant: Variant::LxfBlend,
            theta: [&[1.0], &[1.0, 0.5], &[2.5, 4.0]],
            b3_corrections: None,
            discontinuous: true,
            init: |x| {
                let [rho, v, p] = sod_state(x[0]);
                conservative_1d(rho, v, p, 1.4).to_vec()
            },
        },
        "woodward_colella" => BenchmarkCase {
            name: "woodward_colella",
            model: euler1d,
            mesh: unit,
            default_cells: 512,
            lambda: 20.0,
            eps: 1e-9,
            cfl: 0.1,
            t_final: 0.038,
            variant: Variant::LxfBlend,
            theta: [&[0.5], &[0.8, 1.0], &[5.0, 1.0]],
            b3_corrections: None,
            discontinuous: true,
            init: |x| {
                let p = if x[0] <= 0.1 {
                    1e3
                } else if x[0] <= 0.9 {
                    1e-2
                } else {
                    1e2
                };
                conservative_1d(1.0, 0.0, p, 1.4).to_vec()
            },
        },
        "shu_osher" => BenchmarkCase {
            name: "shu_osher",
            model: euler1d,
            mesh: MeshRecipe::Interval {
                a: -5.0,
                b: 5.0,
                periodic: false,
            },
            default_cells: 256,
            lambda: 3.0,
            eps: 1e-9,
            cfl: 0.1,
            t_final: 1.8,
            variant: Variant::LxfBlend,
            theta: [&[0.5], &[0.8, 1.0], &[3.0, 1.0]],
            b3_corrections: None,
            discontinuous: true,
            init: |x| {
                if x[0] <= -4.0 {
                    conservative_1d(3.857143, 2.629369, 10.333333, 1.4).to_vec()
                } else {
                    conservative_1d(1.0 + 0.2 * (5.0 * x[0]).sin(), 0.0, 1.0, 1.4).to_vec()
                }
            },
        },
        "vortex_2d" => BenchmarkCase {
            name: "vortex_2d",
            model: euler2d,
            mesh: MeshRecipe::Disk {
                radius: 10.0,
                tag: BoundaryTag::Outflow,
            },
            default_cells: 16,
            lambda: 1.4,
            eps: 1e-9,
            cfl: 0.1,
            t_final: 1.0,
            variant: Variant::GalerkinJump,
            theta: [&[0.1], &[0.01, 0.0], &[0.001, 0.0]],
            b3_corrections: Some(7),
            discontinuous: false,
            init: vortex_state,
        },
        "sod_2d" => BenchmarkCase {
            name: "sod_2d",
            model: euler2d,
            mesh: MeshRecipe::Disk {
                radius: 1.0,
                tag: BoundaryTag::Outflow,
            },
            default_cells: 24,
            lambda: 1.4,
            eps: 1e-9,
            cfl: 0.1,
            t_final: 0.25,
            variant: Variant::LxfBlend,
            theta: [&[0.1], &[0.1, 1e-4], &[0.01, 1e-4]],
            b3_corrections: None,
            discontinuous: true,
            init: |x| {
                if x[0] * x[0] + x[1] * x[1] < 0.25 {
                    conservative_2d(1.0, 0.0, 0.0, 1.0, 1.4).to_vec()
                } else {
                    conservative_2d(0.125, 0.0, 0.0, 0.1, 1.4).to_vec()
                }
            },
        },
        "dmr_2d" => BenchmarkCase {
            name: "dmr_2d",
            model: euler2d,
            mesh: MeshRecipe::Wedge,
            default_cells: 27,
            lambda: 15.0,
            eps: 1e-9,
            cfl: 0.1,
            t_final: 0.2,
            variant: Variant::LxfBlend,
            theta: [&[0.1], &[0.01, 1e-4], &[0.005, 1e-4]],
            b3_corrections: None,
            discontinuous: true,
            init: |x| {
                if x[0] >= 0.0 {
                    DMR_LEFT.to_vec()
                } else {
                    conservative_2d(1.4, 0.0, 0.0, 1.0, 1.4).to_vec()
                }
            },
        },
        other => {
            return Err(Error::config(format!(
                "unknown case `{other}`; available: {}",
                CASE_NAMES.join(", ")
            )))
        }
    };
    Ok(case)
}

/// Post-shock state of the wedge problem in conservative variables.
pub const DMR_LEFT: [f64; 4] = [8.0, -66.0, 0.0, 116.5 / 0.4 + 0.5 * 8.0 * 8.25 * 8.25];

/// `exp(-80 (x - 0.4)²)` summed over its periodic images in `[0, 1]`.
fn periodic_gaussian(x: f64) -> f64 {
    (-2..=2).map(|k| (-80.0 * (x - 0.4 - k as f64).powi(2)).exp()).sum()
}

fn sod_state(x: f64) -> [f64; 3] {
    if x <= 0.5 {
        [1.0, 0.0, 1.0]
    } else {
        [0.125, 0.0, 0.1]
    }
}

/// Steady isentropic vortex centred at the origin.
fn vortex_state(x: [f64; 2]) -> Vec<f64> {
    let gamma: f64 = 1.4;
    let r2 = x[0] * x[0] + x[1] * x[1];
    let s = 5.0 / (2.0 * PI);
    let g = ((1.0 - r2) / 2.0).exp();
    let t = 1.0 - (gamma - 1.0) / gamma * 0.5 * s * s * g * g;
    let rho = t.powf(1.0 / (gamma - 1.0));
    conservative_2d(rho, -s * x[1] * g, s * x[0] * g, rho.powf(gamma), gamma).to_vec()
}

/// Per-run replacements for catalogue values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub lambda: Option<f64>,
    pub eps: Option<f64>,
    pub cfl: Option<f64>,
    pub corrections: Option<usize>,
    pub variant: Option<Variant>,
    pub theta: Option<Vec<f64>>,
    pub t_final: Option<f64>,
}

pub struct Simulation {
    pub op: SpatialOperator,
    pub config: RunConfig,
    pub stats: RunStats,
    /// `(t, u)` at every output time, starting with `t = 0`.
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

impl BenchmarkCase {
    pub fn theta(&self, degree: usize) -> Result<Vec<f64>> {
        crate::basis::check_degree(degree)?;
        Ok(self.theta[degree - 1].to_vec())
    }

    pub fn dec_config(&self, degree: usize) -> DecConfig {
        let mut c = DecConfig::for_degree(degree);
        if degree == 3 {
            if let Some(k) = self.b3_corrections {
                c.corrections = k;
            }
        }
        c
    }

    /// Conservative initial state at a point.
    pub fn initial_state(&self, x: [f64; 2]) -> Vec<f64> {
        (self.init)(x)
    }

    /// Exact solution where one is known: the translated profile for
    /// transport, the Riemann solution for Sod, the steady vortex.
    pub fn exact(&self, x: [f64; 2], t: f64) -> Option<Vec<f64>> {
        match self.name {
            "transport_gaussian" => Some(vec![periodic_gaussian((x[0] - t).rem_euclid(1.0))]),
            "vortex_2d" => Some(vortex_state(x)),
            "sod_1d" => {
                let s = exact_riemann(sod_state(0.0), sod_state(1.0), 1.4).ok()?;
                let [rho, v, p] = if t > 0.0 {
                    s.sample((x[0] - 0.5) / t)
                } else {
                    sod_state(x[0])
                };
                Some(conservative_1d(rho, v, p, 1.4).to_vec())
            }
            _ => None,
        }
    }

    /// Height of the horizontal line sampled by slice output: through the
    /// centre of a disk, and 0.2 off the straight channel wall of the wedge,
    /// where the incident shock, the Mach stem and the reflected structure
    /// all cross it.
    pub fn slice_y(&self) -> f64 {
        match self.mesh {
            MeshRecipe::Wedge => WEDGE_CORNERS[3][1] + 0.2,
            _ => 0.0,
        }
    }

    /// State held on inflow boundaries.
    pub fn inflow(&self) -> Option<Vec<f64>> {
        (self.mesh == MeshRecipe::Wedge).then(|| DMR_LEFT.to_vec())
    }

    pub fn build_mesh(&self, cells: usize) -> Result<Mesh> {
        if cells == 0 {
            return Err(Error::config("cell count must be positive"));
        }
        match self.mesh {
            MeshRecipe::Interval { a, b, periodic } => Ok(Mesh::Interval(build_uniform_1d(a, b, cells, periodic)?)),
            MeshRecipe::Disk { radius, tag } => Ok(Mesh::Triangles(disk_rings(radius, cells, tag)?)),
            MeshRecipe::Wedge => Ok(Mesh::Triangles(polygon(
                &WEDGE_CORNERS,
                &WEDGE_TAGS,
                1.0 / cells as f64,
            )?)),
        }
    }

    pub fn drm(&self, lambda: Option<f64>, eps: Option<f64>) -> Result<DrmModel> {
        DrmModel::new(self.model, lambda.unwrap_or(self.lambda), eps.unwrap_or(self.eps))
    }

    /// Spatial operator on `mesh` with the catalogue scheme for `degree`.
    pub fn operator(&self, mesh: Mesh, degree: usize, eps: Option<f64>) -> Result<SpatialOperator> {
        self.operator_with(
            mesh,
            degree,
            &Overrides {
                eps,
                ..Overrides::default()
            },
        )
    }

    pub fn operator_with(&self, mesh: Mesh, degree: usize, ov: &Overrides) -> Result<SpatialOperator> {
        if mesh.dim() != self.model.dim() {
            return Err(Error::config(format!(
                "case {} needs a {}D mesh",
                self.name,
                self.model.dim()
            )));
        }
        let disc = Discretization::new(mesh, degree)?;
        let theta = match &ov.theta {
            Some(t) => t.clone(),
            None => self.theta(degree)?,
        };
        let scheme = SchemeConfig::new(ov.variant.unwrap_or(self.variant), degree, &theta)?;
        SpatialOperator::new(disc, self.drm(ov.lambda, ov.eps)?, scheme)
    }

    /// Time-loop settings for `degree`, after overrides.
    pub fn run_config(&self, degree: usize, ov: &Overrides, output_times: &[f64]) -> RunConfig {
        let mut dec = self.dec_config(degree);
        if let Some(k) = ov.corrections {
            dec.corrections = k;
        }
        RunConfig {
            cfl: ov.cfl.unwrap_or(self.cfl),
            t_final: ov.t_final.unwrap_or(self.t_final),
            output_times: output_times.to_vec(),
            dec,
            inflow: self.inflow(),
        }
    }

    /// Runs the case on `mesh`, keeping the macroscopic state at every output time.
    pub fn simulate(&self, mesh: Mesh, degree: usize, ov: &Overrides, output_times: &[f64]) -> Result<Simulation> {
        let mut snapshots = Vec::new();
        let sim = self.simulate_with(mesh, degree, ov, output_times, |s| {
            if s.is_output {
                snapshots.push((s.t, s.u.to_vec()));
            }
            Ok(())
        })?;
        Ok(Simulation { snapshots, ..sim })
    }

    /// Like [`simulate`](Self::simulate) but hands every step to `observe`
    /// and keeps no snapshots.
    pub fn simulate_with<F>(
        &self,
        mesh: Mesh,
        degree: usize,
        ov: &Overrides,
        output_times: &[f64],
        observe: F,
    ) -> Result<Simulation>
    where
        F: FnMut(&StepInfo) -> Result<()>,
    {
        let op = self.operator_with(mesh, degree, ov)?;
        let config = self.run_config(degree, ov, output_times);
        let f0 = self.initial_field(&op)?;
        let stats = time_loop(&op, f0.data, &config, observe)?;
        Ok(Simulation {
            op,
            config,
            stats,
            snapshots: Vec::new(),
        })
    }

    /// Macroscopic coefficients of the initial data.
    pub fn initial_coefficients(&self, disc: &Discretization) -> Vec<f64> {
        let k = self.model.n_components();
        if self.discontinuous {
            disc.sample_control_net(k, self.init)
        } else {
            disc.interpolate(k, self.init)
        }
    }

    /// Well-prepared initial kinetic field `f_0 = M(u_0)`.
    pub fn initial_field(&self, op: &SpatialOperator) -> Result<KineticField> {
        let u = self.initial_coefficients(&op.disc);
        Ok(KineticField {
            n_dofs: op.disc.n_dofs(),
            n_blocks: op.drm.n_blocks(),
            n_components: op.drm.n_components(),
            data: op.maxwellian_field(&u)?,
        })
    }

    /// Subcharacteristic check on the initial control values (advisory).
    pub fn subcharacteristic(&self, op: &SpatialOperator) -> Result<Subcharacteristic> {
        let u = self.initial_coefficients(&op.disc);
        let k = self.model.n_components();
        op.drm.check_subcharacteristic(u.chunks_exact(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pressure_2d, primitive_1d};
    use approx::assert_relative_eq;

    #[test]
    fn catalogue_examples() {
        let b = get_case("burgers_sine").unwrap();
        assert_eq!((b.lambda, b.eps, b.cfl, b.t_final), (2.0, 1e-9, 0.1, 0.5));
        assert_eq!(b.variant, Variant::LxfBlend);
        assert_eq!(b.theta(1).unwrap(), vec![1.0]);
        assert_eq!(b.theta(3).unwrap(), vec![1.0, 0.5]);
        assert_relative_eq!(b.initial_state([0.25, 0.0])[0], 1.0, epsilon = 1e-15);

        let t = get_case("transport_gaussian").unwrap();
        assert_eq!((t.lambda, t.cfl, t.t_final), (1.5, 0.1, 0.12));
        assert_eq!(t.variant, Variant::GalerkinJump);
        assert_eq!(t.theta(2).unwrap(), vec![1.0, 0.0]);
        assert_eq!(t.theta(3).unwrap(), vec![1.0, 5.0]);
        assert_eq!(t.dec_config(3).corrections, 7);
        assert_relative_eq!(t.initial_state([0.4, 0.0])[0], 1.0, epsilon = 1e-12);

        let s = get_case("sod_1d").unwrap();
        assert_eq!((s.lambda, s.cfl, s.t_final), (2.0, 0.2, 0.16));
        assert_eq!(s.theta(3).unwrap(), vec![2.5, 4.0]);
        let right = primitive_1d(s.initial_state([0.7, 0.0]).try_into().unwrap(), 1.4).unwrap();
        assert_relative_eq!(right[0], 0.125);
        assert_relative_eq!(right[2], 0.1, epsilon = 1e-14);

        let d = get_case("dmr_2d").unwrap();
        assert_relative_eq!(
            pressure_2d(d.inflow().unwrap().try_into().unwrap(), 1.4).unwrap(),
            116.5,
            epsilon = 1e-12
        );
        assert_eq!(d.inflow().unwrap()[1], -66.0);

        let err = get_case("nope").unwrap_err().to_string();
        assert!(err.contains("sod_1d") && err.contains("dmr_2d"));
    }

    #[test]
    fn every_case_builds_and_is_well_prepared() {
        for name in CASE_NAMES {
            let c = get_case(name).unwrap();
            let cells = if c.model.dim() == 1 { 16 } else { 4 };
            let op = c.operator(c.build_mesh(cells).unwrap(), 2, None).unwrap();
            let f = c.initial_field(&op).unwrap();
            let u = f.project();
            let u0 = c.initial_coefficients(&op.disc);
            let m = op.maxwellian_field(&u).unwrap();
            for (a, b) in m.iter().zip(&f.data) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{name}");
            }
            for (a, b) in u.iter().zip(&u0) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{name}");
            }
            assert!(c.subcharacteristic(&op).is_ok());
        }
    }

    #[test]
    fn vortex_is_steady() {
        // radial momentum balance dp/dr = ρ v²/r, checked by central differences
        let gamma = 1.4;
        for r in [0.3, 1.0, 2.0, 3.5] {
            let h = 1e-5;
            let p = |r: f64| {
                let u = vortex_state([r, 0.0]);
                pressure_2d(u.try_into().unwrap(), gamma).unwrap()
            };
            let u = vortex_state([r, 0.0]);
            let v = u[2] / u[0];
            let dp = (p(r + h) - p(r - h)) / (2.0 * h);
            assert_relative_eq!(dp, u[0] * v * v / r, max_relative = 1e-6);
        }
    }
}
