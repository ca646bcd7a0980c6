//! Macroscopic hyperbolic systems `u_t + sum_d d/dx_d A_d(u) = 0`.

use crate::error::{Error, Result};

/// Largest component count of the built-in models.
pub const MAX_COMPONENTS: usize = 4;

pub type CharMatrix = [f64; MAX_COMPONENTS * MAX_COMPONENTS];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperbolicModel {
    /// Linear advection `u_t + a u_x = 0`.
    Transport {
        speed: f64,
    },
    Burgers,
    Euler1D {
        gamma: f64,
    },
    Euler2D {
        gamma: f64,
    },
}

impl HyperbolicModel {
    /// Component count K.
    pub fn n_components(&self) -> usize {
        match self {
            HyperbolicModel::Transport { .. } | HyperbolicModel::Burgers => 1,
            HyperbolicModel::Euler1D { .. } => 3,
            HyperbolicModel::Euler2D { .. } => 4,
        }
    }

    /// Space dimension D.
    pub fn dim(&self) -> usize {
        match self {
            HyperbolicModel::Euler2D { .. } => 2,
            _ => 1,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            HyperbolicModel::Euler1D { gamma } | HyperbolicModel::Euler2D { gamma } => Some(*gamma),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HyperbolicModel::Transport { .. } => "transport",
            HyperbolicModel::Burgers => "burgers",
            HyperbolicModel::Euler1D { .. } => "euler1d",
            HyperbolicModel::Euler2D { .. } => "euler2d",
        }
    }

    /// Writes `A_d(u)` (direction `d` is 0-based) into `out`.
    pub fn flux(&self, u: &[f64], d: usize, out: &mut [f64]) -> Result<()> {
        match *self {
            HyperbolicModel::Transport { speed } => out[0] = speed * u[0],
            HyperbolicModel::Burgers => out[0] = flux_burgers(u[0]),
            HyperbolicModel::Euler1D { gamma } => out[..3].copy_from_slice(&flux_euler1d([u[0], u[1], u[2]], gamma)?),
            HyperbolicModel::Euler2D { gamma } => {
                out[..4].copy_from_slice(&flux_euler2d([u[0], u[1], u[2], u[3]], gamma, d)?)
            }
        }
        Ok(())
    }

    /// Bound on the spectral radius of `A_d'(u)` over all directions.
    pub fn max_wavespeed(&self, u: &[f64]) -> Result<f64> {
        match *self {
            HyperbolicModel::Transport { speed } => Ok(speed.abs()),
            HyperbolicModel::Burgers => Ok(u[0].abs()),
            HyperbolicModel::Euler1D { gamma } => {
                let p = pressure_1d([u[0], u[1], u[2]], gamma)?;
                Ok((u[1] / u[0]).abs() + (gamma * p / u[0]).sqrt())
            }
            HyperbolicModel::Euler2D { gamma } => {
                let p = pressure_2d([u[0], u[1], u[2], u[3]], gamma)?;
                let speed = (u[1] * u[1] + u[2] * u[2]).sqrt() / u[0];
                Ok(speed + (gamma * p / u[0]).sqrt())
            }
        }
    }

    /// Errors unless `u` is finite and (for Euler) has positive density and pressure.
    pub fn check_admissible(&self, u: &[f64]) -> Result<()> {
        if u[..self.n_components()].iter().any(|x| !x.is_finite()) {
            return Err(Error::state("non-finite value", &u[..self.n_components()]));
        }
        match *self {
            HyperbolicModel::Euler1D { gamma } => pressure_1d([u[0], u[1], u[2]], gamma).map(|_| ()),
            HyperbolicModel::Euler2D { gamma } => pressure_2d([u[0], u[1], u[2], u[3]], gamma).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Left and right eigenvectors of `n·A'(u)`, row-major with stride
    /// `MAX_COMPONENTS`; rows of the first are the left eigenvectors, columns
    /// of the second the right ones. `None` for scalar models and
    /// inadmissible states.
    pub fn eigenvectors(&self, u: &[f64], n: [f64; 2]) -> Option<(CharMatrix, CharMatrix)> {
        const S: usize = MAX_COMPONENTS;
        let (gamma, rho, vel, e) = match *self {
            HyperbolicModel::Euler1D { gamma } => (gamma, u[0], [u[1] / u[0], 0.0], u[2]),
            HyperbolicModel::Euler2D { gamma } => (gamma, u[0], [u[1] / u[0], u[2] / u[0]], u[3]),
            _ => return None,
        };
        let q2 = vel[0] * vel[0] + vel[1] * vel[1];
        let p = (gamma - 1.0) * (e - 0.5 * rho * q2);
        if !(rho > 0.0 && p > 0.0) {
            return None;
        }
        let c = (gamma * p / rho).sqrt();
        let h = (e + p) / rho;
        let b1 = (gamma - 1.0) / (c * c);
        let b2 = 0.5 * b1 * q2;
        let un = vel[0] * n[0] + vel[1] * n[1];
        let mut l = [0.0; S * S];
        let mut r = [0.0; S * S];
        if self.dim() == 1 {
            let v = vel[0];
            let rows = [
                [0.5 * (b2 + v / c), -0.5 * (b1 * v + 1.0 / c), 0.5 * b1],
                [1.0 - b2, b1 * v, -b1],
                [0.5 * (b2 - v / c), -0.5 * (b1 * v - 1.0 / c), 0.5 * b1],
            ];
            let cols = [[1.0, v - c, h - c * v], [1.0, v, 0.5 * q2], [1.0, v + c, h + c * v]];
            for i in 0..3 {
                for j in 0..3 {
                    l[i * S + j] = rows[i][j];
                    r[j * S + i] = cols[i][j];
                }
            }
        } else {
            let [nx, ny] = n;
            let [vx, vy] = vel;
            let ut = -vx * ny + vy * nx;
            let rows = [
                [
                    0.5 * (b2 + un / c),
                    -0.5 * (b1 * vx + nx / c),
                    -0.5 * (b1 * vy + ny / c),
                    0.5 * b1,
                ],
                [1.0 - b2, b1 * vx, b1 * vy, -b1],
                [-ut, -ny, nx, 0.0],
                [
                    0.5 * (b2 - un / c),
                    -0.5 * (b1 * vx - nx / c),
                    -0.5 * (b1 * vy - ny / c),
                    0.5 * b1,
                ],
            ];
            let cols = [
                [1.0, vx - c * nx, vy - c * ny, h - c * un],
                [1.0, vx, vy, 0.5 * q2],
                [0.0, -ny, nx, ut],
                [1.0, vx + c * nx, vy + c * ny, h + c * un],
            ];
            for i in 0..4 {
                for j in 0..4 {
                    l[i * S + j] = rows[i][j];
                    r[j * S + i] = cols[i][j];
                }
            }
        }
        Some((l, r))
    }

    /// Reflects the momentum across a wall with unit normal `n`; identity for scalar models.
    pub fn mirror(&self, u: &[f64], n: [f64; 2], out: &mut [f64]) {
        let k = self.n_components();
        out[..k].copy_from_slice(&u[..k]);
        match self {
            HyperbolicModel::Euler1D { .. } => out[1] = -u[1],
            HyperbolicModel::Euler2D { .. } => {
                let mn = u[1] * n[0] + u[2] * n[1];
                out[1] = u[1] - 2.0 * mn * n[0];
                out[2] = u[2] - 2.0 * mn * n[1];
            }
            _ => {}
        }
    }
}

pub fn flux_burgers(u: f64) -> f64 {
    0.5 * u * u
}

fn nonphysical(rho: f64, p: f64, values: &[f64]) -> Result<()> {
    if !(rho > 0.0) {
        return Err(Error::state("density is not positive", values));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::state("pressure is not positive", values));
    }
    Ok(())
}

/// Pressure from conservative 1D Euler variables `(rho, rho v, E)`.
pub fn pressure_1d(u: [f64; 3], gamma: f64) -> Result<f64> {
    let [rho, m, e] = u;
    if !(rho > 0.0) {
        return Err(Error::state("density is not positive", &u));
    }
    let p = (gamma - 1.0) * (e - 0.5 * m * m / rho);
    nonphysical(rho, p, &u)?;
    Ok(p)
}

/// Pressure from conservative 2D Euler variables `(rho, rho u, rho v, E)`.
pub fn pressure_2d(u: [f64; 4], gamma: f64) -> Result<f64> {
    let [rho, mx, my, e] = u;
    if !(rho > 0.0) {
        return Err(Error::state("density is not positive", &u));
    }
    let p = (gamma - 1.0) * (e - 0.5 * (mx * mx + my * my) / rho);
    nonphysical(rho, p, &u)?;
    Ok(p)
}

pub fn flux_euler1d(u: [f64; 3], gamma: f64) -> Result<[f64; 3]> {
    let p = pressure_1d(u, gamma)?;
    let v = u[1] / u[0];
    Ok([u[1], u[1] * v + p, (u[2] + p) * v])
}

/// Flux in direction `d` (0 = x, 1 = y).
pub fn flux_euler2d(u: [f64; 4], gamma: f64, d: usize) -> Result<[f64; 4]> {
    let p = pressure_2d(u, gamma)?;
    let vn = u[1 + d] / u[0];
    let mut f = [u[1 + d], u[1] * vn, u[2] * vn, (u[3] + p) * vn];
    f[1 + d] += p;
    Ok(f)
}

/// Total energy of a 1D state from primitive `(rho, v, p)`.
pub fn conservative_1d(rho: f64, v: f64, p: f64, gamma: f64) -> [f64; 3] {
    [rho, rho * v, p / (gamma - 1.0) + 0.5 * rho * v * v]
}

/// Conservative 2D state from primitive `(rho, u, v, p)`.
pub fn conservative_2d(rho: f64, u: f64, v: f64, p: f64, gamma: f64) -> [f64; 4] {
    [rho, rho * u, rho * v, p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)]
}

/// Primitive `(rho, v, p)` from a conservative 1D state.
pub fn primitive_1d(u: [f64; 3], gamma: f64) -> Result<[f64; 3]> {
    let p = pressure_1d(u, gamma)?;
    Ok([u[0], u[1] / u[0], p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn eigenvectors_are_biorthogonal() {
        let cases: [(HyperbolicModel, Vec<f64>, [f64; 2]); 3] = [
            (
                HyperbolicModel::Euler1D { gamma: 1.4 },
                conservative_1d(0.7, -1.3, 2.0, 1.4).to_vec(),
                [1.0, 0.0],
            ),
            (
                HyperbolicModel::Euler2D { gamma: 1.4 },
                conservative_2d(8.0, 8.25, -2.0, 116.5, 1.4).to_vec(),
                [0.6, 0.8],
            ),
            (
                HyperbolicModel::Euler2D { gamma: 3.0 },
                conservative_2d(1.0, 0.0, 0.0, 1.0, 3.0).to_vec(),
                [0.0, 1.0],
            ),
        ];
        for (model, u, n) in cases {
            let k = model.n_components();
            let (l, r) = model.eigenvectors(&u, n).unwrap();
            for i in 0..k {
                for j in 0..k {
                    let dot: f64 = (0..k)
                        .map(|m| l[i * MAX_COMPONENTS + m] * r[m * MAX_COMPONENTS + j])
                        .sum();
                    assert_relative_eq!(dot, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
                }
            }
        }
        assert!(HyperbolicModel::Burgers.eigenvectors(&[1.0], [1.0, 0.0]).is_none());
    }

    #[test]
    fn right_eigenvectors_match_the_flux_jacobian() {
        let model = HyperbolicModel::Euler2D { gamma: 1.4 };
        let u = conservative_2d(1.3, 0.4, -0.7, 2.0, 1.4);
        let n = [0.28, 0.96];
        let (_, r) = model.eigenvectors(&u, n).unwrap();
        let normal_flux = |u: &[f64]| -> Vec<f64> {
            let (mut a, mut b) = ([0.0; 4], [0.0; 4]);
            model.flux(u, 0, &mut a).unwrap();
            model.flux(u, 1, &mut b).unwrap();
            (0..4).map(|c| n[0] * a[c] + n[1] * b[c]).collect()
        };
        for j in 0..4 {
            let col: Vec<f64> = (0..4).map(|m| r[m * MAX_COMPONENTS + j]).collect();
            let delta = 1e-6;
            let plus: Vec<f64> = (0..4).map(|m| u[m] + delta * col[m]).collect();
            let minus: Vec<f64> = (0..4).map(|m| u[m] - delta * col[m]).collect();
            let (fp, fm) = (normal_flux(&plus), normal_flux(&minus));
            let jr: Vec<f64> = (0..4).map(|m| (fp[m] - fm[m]) / (2.0 * delta)).collect();
            // jr = mu * col for some eigenvalue mu
            let mu = jr.iter().zip(&col).map(|(a, b)| a * b).sum::<f64>() / col.iter().map(|b| b * b).sum::<f64>();
            for m in 0..4 {
                assert_relative_eq!(jr[m], mu * col[m], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn burgers_flux() {
        assert_eq!(flux_burgers(2.0), 2.0);
        assert_eq!(flux_burgers(0.0), 0.0);
        assert_eq!(flux_burgers(-3.0), 4.5);
    }

    #[test]
    fn euler1d_flux() {
        let f = flux_euler1d([1.0, 0.0, 2.5], 1.4).unwrap();
        assert_relative_eq!(f[0], 0.0);
        assert_relative_eq!(f[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(f[2], 0.0);
        let f = flux_euler1d([1.0, 1.0, 3.0], 1.4).unwrap();
        assert_relative_eq!(f[0], 1.0);
        assert_relative_eq!(f[1], 2.0, epsilon = 1e-15);
        assert_relative_eq!(f[2], 4.0, epsilon = 1e-15);
        assert!(matches!(flux_euler1d([1.0, 0.0, -1.0], 1.4), Err(Error::State { .. })));
    }

    #[test]
    fn euler2d_flux() {
        let f = flux_euler2d([1.0, 0.0, 0.0, 2.5], 1.4, 0).unwrap();
        assert_relative_eq!(f[1], 1.0, epsilon = 1e-15);
        assert_eq!([f[0], f[2], f[3]], [0.0, 0.0, 0.0]);
        let f = flux_euler2d([1.0, 1.0, 0.0, 3.0], 1.4, 1).unwrap();
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 0.0);
        assert_relative_eq!(f[2], 1.0, epsilon = 1e-15);
        assert_eq!(f[3], 0.0);
        assert!(flux_euler2d([0.0, 0.0, 0.0, 1.0], 1.4, 0).is_err());
    }

    #[test]
    fn wavespeeds() {
        assert_eq!(HyperbolicModel::Burgers.max_wavespeed(&[-1.5]).unwrap(), 1.5);
        let t = HyperbolicModel::Transport { speed: 1.0 };
        assert_eq!(t.max_wavespeed(&[7.0]).unwrap(), 1.0);
        let e = HyperbolicModel::Euler1D { gamma: 1.4 };
        assert_relative_eq!(
            e.max_wavespeed(&[1.0, 0.0, 2.5]).unwrap(),
            1.4f64.sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!(1.4f64.sqrt(), 1.1832, epsilon = 1e-4);
    }

    #[test]
    fn mirror_reflects_normal_momentum() {
        let m = HyperbolicModel::Euler2D { gamma: 1.4 };
        let mut out = [0.0; 4];
        m.mirror(&[1.0, 0.3, 0.7, 3.0], [0.0, 1.0], &mut out);
        assert_eq!(out, [1.0, 0.3, -0.7, 3.0]);
    }

    proptest! {
        #[test]
        fn eos_roundtrip(rho in 0.01f64..10.0, v in -5.0f64..5.0, p in 0.01f64..100.0, gamma in 1.1f64..3.0) {
            let u = conservative_1d(rho, v, p, gamma);
            let back = pressure_1d(u, gamma).unwrap();
            prop_assert!((back - p).abs() <= 1e-12 * p.max(0.5 * rho * v * v));
        }

        #[test]
        fn rotational_consistency(rho in 0.1f64..5.0, a in -3.0f64..3.0, b in -3.0f64..3.0, p in 0.1f64..10.0) {
            let g = 1.4;
            let u = conservative_2d(rho, a, b, p, g);
            let swapped = conservative_2d(rho, b, a, p, g);
            let fy = flux_euler2d(swapped, g, 1).unwrap();
            let fx = flux_euler2d(u, g, 0).unwrap();
            prop_assert!((fy[0] - fx[0]).abs() < 1e-12 * (1.0 + fx[0].abs()));
            prop_assert!((fy[2] - fx[1]).abs() < 1e-12 * (1.0 + fx[1].abs()));
            prop_assert!((fy[1] - fx[2]).abs() < 1e-12 * (1.0 + fx[2].abs()));
            prop_assert!((fy[3] - fx[3]).abs() < 1e-12 * (1.0 + fx[3].abs()));
        }
    }
}
