//! Diagonal relaxation wrapper: `N = D + 1` linear advection blocks relaxing
//! towards explicit Maxwellians.

use crate::error::{Error, Result};
use crate::model::{HyperbolicModel, MAX_COMPONENTS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrmModel {
    pub base: HyperbolicModel,
    pub lambda: f64,
    pub eps: f64,
}

impl DrmModel {
    pub fn new(base: HyperbolicModel, lambda: f64, eps: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::config(format!(
                "relaxation speed must be positive, got {lambda}"
            )));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::config(format!("relaxation parameter must be >= 0, got {eps}")));
        }
        Ok(DrmModel { base, lambda, eps })
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Component count K of each block.
    pub fn n_components(&self) -> usize {
        self.base.n_components()
    }

    /// Block count N = D + 1.
    pub fn n_blocks(&self) -> usize {
        self.base.dim() + 1
    }

    /// Width of one DoF in a [`KineticField`]: N * K.
    pub fn width(&self) -> usize {
        self.n_blocks() * self.n_components()
    }

    /// Component `d` of the velocity of block `n` (both 0-based): block `j < D`
    /// moves with `-lambda` along axis `j`, the last block with `+lambda` along every axis.
    pub fn velocity(&self, n: usize, d: usize) -> f64 {
        let last = self.dim();
        if n == last {
            self.lambda
        } else if n == d {
            -self.lambda
        } else {
            0.0
        }
    }

    pub fn velocity_vector(&self, n: usize) -> [f64; 2] {
        let mut a = [0.0; 2];
        for (d, ad) in a.iter_mut().enumerate().take(self.dim()) {
            *ad = self.velocity(n, d);
        }
        a
    }

    /// Writes the N Maxwellian blocks of `u` into `out` (length N * K).
    pub fn maxwellian(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        let k = self.n_components();
        let dim = self.dim();
        self.base.check_admissible(u)?;
        let mut fluxes = [[0.0; MAX_COMPONENTS]; 2];
        for (d, flux) in fluxes.iter_mut().enumerate().take(dim) {
            self.base.flux(u, d, flux)?;
        }
        let nb = dim + 1;
        let last = dim * k;
        for c in 0..k {
            let mut s = u[c];
            for flux in fluxes.iter().take(dim) {
                s += flux[c] / self.lambda;
            }
            out[last + c] = s / nb as f64;
        }
        for (j, flux) in fluxes.iter().enumerate().take(dim) {
            for c in 0..k {
                out[j * k + c] = -flux[c] / self.lambda + out[last + c];
            }
        }
        Ok(())
    }

    pub fn maxwellian_vec(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.width()];
        self.maxwellian(u, &mut out)?;
        Ok(out)
    }

    /// `P f`: sum of the blocks of one DoF.
    pub fn project_dof(&self, f: &[f64], out: &mut [f64]) {
        let k = self.n_components();
        out[..k].fill(0.0);
        for block in f.chunks_exact(k) {
            for c in 0..k {
                out[c] += block[c];
            }
        }
    }

    /// Relative defect `|sum_n lambda_n^(d) M_n(u) - A_d(u)|` per direction.
    pub fn flux_consistency_check(&self, u: &[f64]) -> Result<Vec<f64>> {
        let k = self.n_components();
        let m = self.maxwellian_vec(u)?;
        let mut out = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            let mut a = [0.0; MAX_COMPONENTS];
            self.base.flux(u, d, &mut a)?;
            let mut num: f64 = 0.0;
            let mut den: f64 = 0.0;
            for c in 0..k {
                let s: f64 = (0..self.n_blocks()).map(|n| self.velocity(n, d) * m[n * k + c]).sum();
                num = num.max((s - a[c]).abs());
                den = den.max(a[c].abs());
            }
            out.push(if den > 0.0 { num / den } else { num });
        }
        Ok(out)
    }

    /// Advisory wave-speed check: `lambda` must dominate the macroscopic
    /// wave speeds over the samples.
    pub fn check_subcharacteristic<'a, I>(&self, states: I) -> Result<Subcharacteristic>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut max_speed: f64 = 0.0;
        let mut any = false;
        for u in states {
            any = true;
            max_speed = max_speed.max(self.base.max_wavespeed(u)?);
        }
        if !any {
            return Err(Error::config("subcharacteristic check needs at least one state"));
        }
        Ok(Subcharacteristic {
            pass: self.lambda >= max_speed,
            margin: self.lambda - max_speed,
            max_speed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subcharacteristic {
    pub pass: bool,
    pub margin: f64,
    pub max_speed: f64,
}

/// Kinetic unknowns stored DoF-major as `[dof][block][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticField {
    pub n_dofs: usize,
    pub n_blocks: usize,
    pub n_components: usize,
    pub data: Vec<f64>,
}

impl KineticField {
    pub fn zeros(n_dofs: usize, n_blocks: usize, n_components: usize) -> Self {
        KineticField {
            n_dofs,
            n_blocks,
            n_components,
            data: vec![0.0; n_dofs * n_blocks * n_components],
        }
    }

    /// `f = M(u)` at every DoF; `u` holds K values per DoF.
    pub fn equilibrium(drm: &DrmModel, u: &[f64]) -> Result<Self> {
        let k = drm.n_components();
        if !u.len().is_multiple_of(k) {
            return Err(Error::Shape(format!(
                "macroscopic data length {} is not a multiple of {k}",
                u.len()
            )));
        }
        let n_dofs = u.len() / k;
        let mut f = KineticField::zeros(n_dofs, drm.n_blocks(), k);
        let w = f.width();
        for (i, (ui, fi)) in u.chunks_exact(k).zip(f.data.chunks_exact_mut(w)).enumerate() {
            drm.maxwellian(ui, fi).map_err(|e| e.at_dof(i, None))?;
        }
        Ok(f)
    }

    pub fn width(&self) -> usize {
        self.n_blocks * self.n_components
    }

    pub fn dof(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn dof_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.width();
        &mut self.data[i * w..(i + 1) * w]
    }

    pub fn block(&self, i: usize, n: usize) -> &[f64] {
        let k = self.n_components;
        let start = i * self.width() + n * k;
        &self.data[start..start + k]
    }

    /// Macroscopic `u = P f`, K values per DoF.
    pub fn project(&self) -> Vec<f64> {
        let k = self.n_components;
        let mut u = vec![0.0; self.n_dofs * k];
        for (fi, ui) in self.data.chunks_exact(self.width()).zip(u.chunks_exact_mut(k)) {
            for block in fi.chunks_exact(k) {
                for c in 0..k {
                    ui[c] += block[c];
                }
            }
        }
        u
    }
}

/// Jin-Xin variables `(u, v) = (f_1 + f_2, lambda (f_2 - f_1))` of a 1D field,
/// each with K values per DoF.
pub fn jin_xin_map(drm: &DrmModel, f: &KineticField) -> Result<(Vec<f64>, Vec<f64>)> {
    if drm.dim() != 1 || f.n_blocks != 2 {
        return Err(Error::config("the Jin-Xin map needs a one-dimensional model"));
    }
    let k = f.n_components;
    let mut u = Vec::with_capacity(f.n_dofs * k);
    let mut v = Vec::with_capacity(f.n_dofs * k);
    for i in 0..f.n_dofs {
        let (f1, f2) = (f.block(i, 0), f.block(i, 1));
        for c in 0..k {
            u.push(f1[c] + f2[c]);
            v.push(drm.lambda * (f2[c] - f1[c]));
        }
    }
    Ok((u, v))
}

/// Inverse of [`jin_xin_map`].
pub fn jin_xin_inverse(drm: &DrmModel, u: &[f64], v: &[f64]) -> Result<KineticField> {
    if drm.dim() != 1 {
        return Err(Error::config("the Jin-Xin map needs a one-dimensional model"));
    }
    let k = drm.n_components();
    if u.len() != v.len() || !u.len().is_multiple_of(k) {
        return Err(Error::Shape("Jin-Xin variables have mismatched lengths".into()));
    }
    let n = u.len() / k;
    let mut f = KineticField::zeros(n, 2, k);
    for i in 0..n {
        let fi = f.dof_mut(i);
        for c in 0..k {
            let (ui, vi) = (u[i * k + c], v[i * k + c]);
            fi[c] = 0.5 * (ui - vi / drm.lambda);
            fi[k + c] = 0.5 * (ui + vi / drm.lambda);
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::conservative_1d;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn transport() -> DrmModel {
        DrmModel::new(HyperbolicModel::Transport { speed: 1.0 }, 1.5, 1e-9).unwrap()
    }

    #[test]
    fn transport_maxwellian() {
        let m = transport().maxwellian_vec(&[1.0]).unwrap();
        assert_relative_eq!(m[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(m[1], 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_flux_splits_evenly() {
        let d = DrmModel::new(HyperbolicModel::Burgers, 2.0, 0.0).unwrap();
        assert_eq!(d.maxwellian_vec(&[0.0]).unwrap(), vec![0.0, 0.0]);
        let e = DrmModel::new(HyperbolicModel::Euler2D { gamma: 1.4 }, 3.0, 0.0).unwrap();
        // rest state still has pressure flux, so only the mass/energy rows split evenly
        let m = e.maxwellian_vec(&[1.0, 0.0, 0.0, 2.5]).unwrap();
        for n in 0..3 {
            assert_relative_eq!(m[n * 4], 1.0 / 3.0, epsilon = 1e-15);
            assert_relative_eq!(m[n * 4 + 3], 2.5 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn velocity_table() {
        let e = DrmModel::new(HyperbolicModel::Euler2D { gamma: 1.4 }, 2.0, 0.0).unwrap();
        assert_eq!(e.velocity_vector(0), [-2.0, 0.0]);
        assert_eq!(e.velocity_vector(1), [0.0, -2.0]);
        assert_eq!(e.velocity_vector(2), [2.0, 2.0]);
        let t = transport();
        assert_eq!(t.velocity_vector(0), [-1.5, 0.0]);
        assert_eq!(t.velocity_vector(1), [1.5, 0.0]);
    }

    #[test]
    fn project_examples() {
        let mut f = KineticField::zeros(1, 2, 2);
        f.data.copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.project(), vec![1.0, 1.0]);
        let d = transport();
        let g = KineticField::equilibrium(&d, &[0.3, -2.0]).unwrap();
        let u = g.project();
        assert_relative_eq!(u[0], 0.3, epsilon = 1e-15);
        assert_relative_eq!(u[1], -2.0, epsilon = 1e-15);
    }

    #[test]
    fn flux_consistency_examples() {
        assert!(transport().flux_consistency_check(&[1.0]).unwrap()[0] < 1e-15);
        let b = DrmModel::new(HyperbolicModel::Burgers, 2.0, 0.0).unwrap();
        assert_eq!(b.flux_consistency_check(&[0.0]).unwrap(), vec![0.0]);
        let e = DrmModel::new(HyperbolicModel::Euler1D { gamma: 1.4 }, 2.0, 0.0).unwrap();
        let sod = conservative_1d(1.0, 0.0, 1.0, 1.4);
        assert!(e.flux_consistency_check(&sod).unwrap()[0] < 1e-12);
    }

    #[test]
    fn subcharacteristic() {
        let b = DrmModel::new(HyperbolicModel::Burgers, 2.0, 0.0).unwrap();
        let samples: Vec<[f64; 1]> = (0..=20).map(|i| [-1.0 + 0.1 * i as f64]).collect();
        let r = b.check_subcharacteristic(samples.iter().map(|s| &s[..])).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.margin, 1.0, epsilon = 1e-14);
        let b = DrmModel::new(HyperbolicModel::Burgers, 0.5, 0.0).unwrap();
        assert!(!b.check_subcharacteristic([&[1.0][..]]).unwrap().pass);
        let r = transport().check_subcharacteristic([&[0.0][..]]).unwrap();
        assert!(r.pass);
        assert_relative_eq!(r.margin, 0.5);
    }

    #[test]
    fn jin_xin_examples() {
        let d = transport();
        let f = KineticField::equilibrium(&d, &[1.0]).unwrap();
        let (u, v) = jin_xin_map(&d, &f).unwrap();
        assert_relative_eq!(u[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(v[0], 1.0, epsilon = 1e-15);
        let e = DrmModel::new(HyperbolicModel::Euler2D { gamma: 1.4 }, 2.0, 0.0).unwrap();
        let f2 = KineticField::zeros(1, 3, 4);
        assert!(jin_xin_map(&e, &f2).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(DrmModel::new(HyperbolicModel::Burgers, 0.0, 1.0).is_err());
        assert!(DrmModel::new(HyperbolicModel::Burgers, 1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn jin_xin_roundtrip(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let d = transport();
            let mut f = KineticField::zeros(1, 2, 1);
            f.data.copy_from_slice(&[a, b]);
            let (u, v) = jin_xin_map(&d, &f).unwrap();
            let g = jin_xin_inverse(&d, &u, &v).unwrap();
            prop_assert!((g.data[0] - a).abs() <= 1e-15 * (1.0 + a.abs() + b.abs()) * 4.0);
            prop_assert!((g.data[1] - b).abs() <= 1e-15 * (1.0 + a.abs() + b.abs()) * 4.0);
        }

        #[test]
        fn maxwellian_is_lipschitz(u in -2.0f64..2.0, du in 1e-6f64..1e-3) {
            let d = DrmModel::new(HyperbolicModel::Burgers, 3.0, 0.0).unwrap();
            let m0 = d.maxwellian_vec(&[u]).unwrap();
            let m1 = d.maxwellian_vec(&[u + du]).unwrap();
            for n in 0..2 {
                let slope = (m1[n] - m0[n]).abs() / du;
                // |dM/du| <= (1 + |u|/lambda) bounded on the sample box
                prop_assert!(slope <= 1.0 + (2.0 + 1e-3) / 3.0 + 1e-6);
            }
        }
    }
}
