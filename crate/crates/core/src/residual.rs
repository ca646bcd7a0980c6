//! Element residuals of the kinetic advection operator and their distribution
//! to DoFs: Galerkin with jump stabilization, or Lax-Friedrichs with limiting
//! and blending.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinetic::DrmModel;
use crate::mesh::BoundaryTag;
use crate::model::{CharMatrix, MAX_COMPONENTS};
use crate::space::Discretization;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    GalerkinJump,
    LxfBlend,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::GalerkinJump => "galerkin_jump",
            Variant::LxfBlend => "lxf_blend",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galerkin_jump" => Ok(Variant::GalerkinJump),
            "lxf_blend" => Ok(Variant::LxfBlend),
            other => Err(Error::config(format!(
                "unknown scheme `{other}` (expected galerkin_jump or lxf_blend)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub variant: Variant,
    /// Jump weights `θ_1..θ_d`; missing entries count as zero.
    pub theta: Vec<f64>,
    pub degree: usize,
}

impl SchemeConfig {
    pub fn new(variant: Variant, degree: usize, theta: &[f64]) -> Result<Self> {
        if theta.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::config(format!("jump weights must be >= 0, got {theta:?}")));
        }
        if theta.len() > degree {
            return Err(Error::config(format!(
                "{} jump weights given for degree {degree}",
                theta.len()
            )));
        }
        let mut theta = theta.to_vec();
        theta.resize(degree, 0.0);
        Ok(SchemeConfig { variant, theta, degree })
    }
}

/// Symmetric jump-penalty matrix of one interior face over the union of the
/// DoFs of its two elements.
#[derive(Debug, Clone)]
pub struct JumpMatrix {
    pub dofs: Vec<usize>,
    pub matrix: Vec<f64>,
}

impl JumpMatrix {
    /// Adds `J f` to the per-DoF contributions (`width` values per DoF).
    fn apply(&self, f: &[f64], width: usize, out: &mut [f64]) {
        let m = self.dofs.len();
        for (a, out_a) in out.chunks_exact_mut(width).enumerate().take(m) {
            for (b, &gb) in self.dofs.iter().enumerate() {
                let w = self.matrix[a * m + b];
                if w != 0.0 {
                    let fb = &f[gb * width..(gb + 1) * width];
                    for c in 0..width {
                        out_a[c] += w * fb[c];
                    }
                }
            }
        }
    }
}

/// The assembled advective operator `Σ_K φ_σ^K(f)` of the kinetic system.
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    pub disc: Discretization,
    pub drm: DrmModel,
    pub scheme: SchemeConfig,
    /// Per element and block, `nl x nl` matrix mapping coefficients to Galerkin residuals.
    advection: Vec<f64>,
    /// Lax-Friedrichs coefficient per element and block.
    alpha: Vec<f64>,
    jumps: Vec<JumpMatrix>,
    walls: Vec<usize>,
}

impl SpatialOperator {
    pub fn new(disc: Discretization, drm: DrmModel, scheme: SchemeConfig) -> Result<Self> {
        if scheme.degree != disc.degree {
            return Err(Error::config(format!(
                "scheme degree {} does not match discretization degree {}",
                scheme.degree, disc.degree
            )));
        }
        if drm.dim() != disc.dim() {
            return Err(Error::config(format!(
                "model is {}D but the mesh is {}D",
                drm.dim(),
                disc.dim()
            )));
        }
        let nl = disc.n_local();
        let nb = drm.n_blocks();
        let lattice = disc.basis.lattice_points();
        let mut advection = vec![0.0; disc.n_elements() * nb * nl * nl];
        let mut alpha = vec![0.0; disc.n_elements() * nb];
        advection
            .par_chunks_mut(nb * nl * nl)
            .zip(alpha.par_chunks_mut(nb))
            .enumerate()
            .for_each(|(e, (adv, al))| {
                let geo = &disc.elements[e];
                for n in 0..nb {
                    let rates = geo.rates(drm.velocity_vector(n));
                    let a = &mut adv[n * nl * nl..(n + 1) * nl * nl];
                    for (i, r) in rates.iter().enumerate() {
                        for s in 0..nl {
                            for j in 0..nl {
                                a[s * nl + j] += geo.measure * r * disc.conv_ref[i][s][j];
                            }
                        }
                    }
                    let mut amax: f64 = 0.0;
                    for p in &lattice {
                        for v in disc.basis.eval_directional(p, &rates, 1) {
                            amax = amax.max(v.abs());
                        }
                    }
                    al[n] = geo.measure * amax;
                }
            });

        let jumps = if scheme.theta.iter().any(|&t| t > 0.0) {
            disc.interior_faces
                .par_iter()
                .map(|face| jump_matrix(&disc, face, &scheme.theta))
                .collect()
        } else {
            Vec::new()
        };
        let walls = disc
            .boundary_faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.tag == BoundaryTag::Wall)
            .map(|(i, _)| i)
            .collect();
        Ok(SpatialOperator {
            disc,
            drm,
            scheme,
            advection,
            alpha,
            jumps,
            walls,
        })
    }

    /// Values per DoF in a kinetic field, N * K.
    pub fn width(&self) -> usize {
        self.drm.width()
    }

    /// Element coefficients laid out `[σ][block][component]`.
    pub fn gather(&self, e: usize, f: &[f64], local: &mut [f64]) {
        let w = self.width();
        for (s, &g) in self.disc.dofmap.element_dofs[e].iter().enumerate() {
            local[s * w..(s + 1) * w].copy_from_slice(&f[g * w..(g + 1) * w]);
        }
    }

    /// Galerkin nodal residuals `∫_K φ_σ a_n · ∇f_n` of element `e`.
    pub fn galerkin_residual(&self, e: usize, local: &[f64], out: &mut [f64]) {
        let nl = self.disc.n_local();
        let k = self.drm.n_components();
        let nb = self.drm.n_blocks();
        let w = nb * k;
        let adv = &self.advection[e * nb * nl * nl..(e + 1) * nb * nl * nl];
        out[..nl * w].fill(0.0);
        for n in 0..nb {
            let a = &adv[n * nl * nl..(n + 1) * nl * nl];
            for s in 0..nl {
                for j in 0..nl {
                    let m = a[s * nl + j];
                    for c in 0..k {
                        out[s * w + n * k + c] += m * local[j * w + n * k + c];
                    }
                }
            }
        }
    }

    /// Galerkin residual plus `α_K (f_σ - f̄)`, with `f̄` the coefficient average.
    pub fn lxf_residual(&self, e: usize, local: &[f64], out: &mut [f64]) {
        self.galerkin_residual(e, local, out);
        let nl = self.disc.n_local();
        let k = self.drm.n_components();
        let nb = self.drm.n_blocks();
        let w = nb * k;
        for n in 0..nb {
            let alpha = self.alpha[e * nb + n];
            for c in 0..k {
                let col = n * k + c;
                let mean = (0..nl).map(|s| local[s * w + col]).sum::<f64>() / nl as f64;
                for s in 0..nl {
                    out[s * w + col] += alpha * (local[s * w + col] - mean);
                }
            }
        }
    }

    /// Distributed residual of one element for the configured variant,
    /// without face terms.
    pub fn element_residual(&self, e: usize, local: &[f64], out: &mut [f64]) {
        match self.scheme.variant {
            Variant::GalerkinJump => self.galerkin_residual(e, local, out),
            Variant::LxfBlend => {
                self.lxf_residual(e, local, out);
                let frame = self.characteristic_frame(local);
                let k = self.drm.n_components();
                for n in 0..self.drm.n_blocks() {
                    self.limit_group(frame.as_ref(), out, self.width(), n * k);
                }
            }
        }
    }

    /// Characteristic eigenvectors at the mean macroscopic state of the
    /// element's kinetic coefficients `local`, taken along the mean velocity
    /// (the x axis when at rest).
    fn characteristic_frame(&self, local: &[f64]) -> Option<(CharMatrix, CharMatrix)> {
        let nl = self.disc.n_local();
        let k = self.drm.n_components();
        let nb = self.drm.n_blocks();
        let w = nb * k;
        let mut u = [0.0; MAX_COMPONENTS];
        for s in 0..nl {
            for n in 0..nb {
                for c in 0..k {
                    u[c] += local[s * w + n * k + c];
                }
            }
        }
        for v in &mut u[..k] {
            *v /= nl as f64;
        }
        let mut dir = [1.0, 0.0];
        if self.drm.dim() == 2 {
            let norm = u[1].hypot(u[2]);
            if norm > 1e-12 * u[0].abs() {
                dir = [u[1] / norm, u[2] / norm];
            }
        }
        self.drm.base.eigenvectors(&u[..k], dir)
    }

    /// Limits the `k` columns starting at `offset` of the row-major residual
    /// `r` (row stride `stride`), one characteristic field at a time when a
    /// frame is given and one component at a time otherwise.
    fn limit_group(&self, frame: Option<&(CharMatrix, CharMatrix)>, r: &mut [f64], stride: usize, offset: usize) {
        const S: usize = MAX_COMPONENTS;
        let nl = self.disc.n_local();
        let k = self.drm.n_components();
        let mut chars = [[0.0; 10]; S];
        for s in 0..nl {
            let row = &r[s * stride + offset..s * stride + offset + k];
            match frame {
                Some((l, _)) => {
                    for i in 0..k {
                        chars[i][s] = (0..k).map(|c| l[i * S + c] * row[c]).sum();
                    }
                }
                None => {
                    for i in 0..k {
                        chars[i][s] = row[i];
                    }
                }
            }
        }
        for col in &mut chars[..k] {
            let total: f64 = col[..nl].iter().sum();
            limit_blend_in_place(&mut col[..nl], total);
        }
        for s in 0..nl {
            let row = &mut r[s * stride + offset..s * stride + offset + k];
            match frame {
                Some((_, rm)) => {
                    for c in 0..k {
                        row[c] = (0..k).map(|i| rm[c * S + i] * chars[i][s]).sum();
                    }
                }
                None => {
                    for c in 0..k {
                        row[c] = chars[c][s];
                    }
                }
            }
        }
    }

    /// Jump-stabilization contributions of interior face `i`, one block of
    /// `width` values per entry of the returned DoF list.
    pub fn jump_stabilization(&self, i: usize, f: &[f64]) -> (Vec<usize>, Vec<f64>) {
        let w = self.width();
        match self.jumps.get(i) {
            Some(j) => {
                let mut out = vec![0.0; j.dofs.len() * w];
                j.apply(f, w, &mut out);
                (j.dofs.clone(), out)
            }
            None => (Vec::new(), Vec::new()),
        }
    }

    /// Weak reflection `∫_e φ_σ min(a_n·n, 0) (M_n(u*) - f_n)` on wall face `i`,
    /// with `u*` the mirrored macroscopic state.
    fn wall_residual(&self, i: usize, f: &[f64], out: &mut [f64]) -> Result<()> {
        let face = &self.disc.boundary_faces[i];
        let nl = self.disc.n_local();
        let k = self.drm.n_components();
        let nb = self.drm.n_blocks();
        let w = nb * k;
        let dofs = &self.disc.dofmap.element_dofs[face.element];
        out[..nl * w].fill(0.0);
        let mut fh = [0.0; 3 * MAX_COMPONENTS];
        let mut u = [0.0; MAX_COMPONENTS];
        let mut mirrored = [0.0; MAX_COMPONENTS];
        let mut m = [0.0; 3 * MAX_COMPONENTS];
        for (weight, bary) in &face.points {
            let phi = self.disc.basis.eval(bary);
            fh[..w].fill(0.0);
            for (s, &g) in dofs.iter().enumerate() {
                for c in 0..w {
                    fh[c] += phi[s] * f[g * w + c];
                }
            }
            self.drm.project_dof(&fh[..w], &mut u);
            self.drm.base.mirror(&u, face.normal, &mut mirrored);
            self.drm.maxwellian(&mirrored[..k], &mut m[..w]).map_err(|e| {
                let pos = self.disc.elements[face.element].position(bary);
                e.at_dof(dofs[0], Some(pos))
            })?;
            for n in 0..nb {
                let a = self.drm.velocity_vector(n);
                let an = a[0] * face.normal[0] + a[1] * face.normal[1];
                if an >= 0.0 {
                    continue;
                }
                for s in 0..nl {
                    let scale = weight * phi[s] * an;
                    for c in 0..k {
                        out[s * w + n * k + c] += scale * (m[n * k + c] - fh[n * k + c]);
                    }
                }
            }
        }
        Ok(())
    }

    /// Assembled advective residual `Σ_K φ_σ^K(f)` for every DoF, gathered in
    /// a fixed order so the result does not depend on the thread count.
    pub fn advective_residual(&self, f: &[f64], out: &mut [f64]) -> Result<()> {
        let nl = self.disc.n_local();
        let w = self.width();
        let ne = self.disc.n_elements();
        let mut buf = vec![0.0; ne * nl * w];
        buf.par_chunks_mut(nl * w).enumerate().for_each(|(e, r)| {
            let mut local = [0.0; 10 * 3 * MAX_COMPONENTS];
            self.gather(e, f, &mut local[..nl * w]);
            self.element_residual(e, &local[..nl * w], r);
        });
        out.fill(0.0);
        self.scatter(&buf, 1.0, out);
        self.face_residual(f, 1.0, out)
    }

    /// Adds `scale` times the element blocks of `buf` to their global DoFs.
    fn scatter(&self, buf: &[f64], scale: f64, out: &mut [f64]) {
        let nl = self.disc.n_local();
        let w = self.width();
        for (e, r) in buf.chunks_exact(nl * w).enumerate() {
            for (s, &g) in self.disc.dofmap.element_dofs[e].iter().enumerate() {
                let o = &mut out[g * w..(g + 1) * w];
                for c in 0..w {
                    o[c] += scale * r[s * w + c];
                }
            }
        }
    }

    /// Adds `scale` times the jump and wall terms of `f` to `out`.
    pub fn face_residual(&self, f: &[f64], scale: f64, out: &mut [f64]) -> Result<()> {
        self.add_jumps(f, scale, out);
        self.add_walls(f, scale, out)
    }

    fn add_jumps(&self, f: &[f64], scale: f64, out: &mut [f64]) {
        let w = self.width();
        let stride = self.jumps.iter().map(|j| j.dofs.len()).max().unwrap_or(0) * w;
        let mut buf = vec![0.0; self.jumps.len() * stride];
        buf.par_chunks_mut(stride.max(1))
            .zip(&self.jumps)
            .for_each(|(o, j)| j.apply(f, w, o));
        for (j, o) in self.jumps.iter().zip(buf.chunks_exact(stride.max(1))) {
            for (a, &g) in j.dofs.iter().enumerate() {
                for c in 0..w {
                    out[g * w + c] += scale * o[a * w + c];
                }
            }
        }
    }

    fn add_walls(&self, f: &[f64], scale: f64, out: &mut [f64]) -> Result<()> {
        let nl = self.disc.n_local();
        let w = self.width();
        let contributions: Vec<Vec<f64>> = self
            .walls
            .par_iter()
            .map(|&i| {
                let mut o = vec![0.0; nl * w];
                self.wall_residual(i, f, &mut o).map(|_| o)
            })
            .collect::<Result<_>>()?;
        for (&i, o) in self.walls.iter().zip(&contributions) {
            let e = self.disc.boundary_faces[i].element;
            for (s, &g) in self.disc.dofmap.element_dofs[e].iter().enumerate() {
                for c in 0..w {
                    out[g * w + c] += scale * o[s * w + c];
                }
            }
        }
        Ok(())
    }

    /// Per-stage data reused by every subtimestep of a correction sweep.
    pub fn stage_cache(&self, states: &[Vec<f64>]) -> Result<StageCache> {
        let nl = self.disc.n_local();
        let w = self.width();
        let ne = self.disc.n_elements();
        let mut lxf = Vec::with_capacity(states.len());
        let mut walls = Vec::with_capacity(states.len());
        for f in states {
            let mut buf = vec![0.0; ne * nl * w];
            buf.par_chunks_mut(nl * w).enumerate().for_each(|(e, r)| {
                let mut local = [0.0; 10 * 3 * MAX_COMPONENTS];
                self.gather(e, f, &mut local[..nl * w]);
                self.lxf_residual(e, &local[..nl * w], r);
            });
            lxf.push(buf);
            if self.walls.is_empty() {
                walls.push(Vec::new());
            } else {
                let mut o = vec![0.0; f.len()];
                self.add_walls(f, 1.0, &mut o)?;
                walls.push(o);
            }
        }
        Ok(StageCache { lxf, walls })
    }

    /// Limited space-time defect of one DeC subtimestep:
    /// `∫_K φ_σ (f^m - f^0) + Σ_r s_r φ_σ^{K,LxF}(f^r)` is blended element by
    /// element, then the face terms `Σ_r s_r (jumps + walls)(f^r)` are added.
    /// `scales[r] = Δt w_{mr}` weights the stages in `cache` and `states`.
    pub fn space_time_residual(
        &self,
        df: &[f64],
        scales: &[f64],
        cache: &StageCache,
        states: &[Vec<f64>],
        out: &mut [f64],
    ) {
        let nl = self.disc.n_local();
        let w = self.width();
        let k = self.drm.n_components();
        let nb = self.drm.n_blocks();
        let ne = self.disc.n_elements();
        let mut buf = vec![0.0; ne * nl * w];
        buf.par_chunks_mut(nl * w).enumerate().for_each(|(e, r)| {
            let mut local = [0.0; 10 * 3 * MAX_COMPONENTS];
            let local = &mut local[..nl * w];
            let measure = self.disc.elements[e].measure;
            self.gather(e, df, local);
            // First-order time term: the lumped mass. Its element total equals
            // the consistent one, and the limiter below only redistributes.
            for s in 0..nl {
                let m = measure * self.disc.mass_ref[s].iter().sum::<f64>();
                for c in 0..w {
                    r[s * w + c] = m * local[s * w + c];
                }
            }
            for (&scale, stage) in scales.iter().zip(&cache.lxf) {
                if scale == 0.0 {
                    continue;
                }
                for (a, b) in r.iter_mut().zip(&stage[e * nl * w..(e + 1) * nl * w]) {
                    *a += scale * b;
                }
            }
            self.gather(e, &states[0], local);
            let frame = self.characteristic_frame(local);
            // macroscopic residual
            let mut macro_lim = [0.0; 10 * MAX_COMPONENTS];
            for s in 0..nl {
                for c in 0..k {
                    macro_lim[s * k + c] = (0..nb).map(|n| r[s * w + n * k + c]).sum();
                }
            }
            self.limit_group(frame.as_ref(), &mut macro_lim, k, 0);
            for n in 0..nb {
                self.limit_group(frame.as_ref(), r, w, n * k);
            }
            // shift the blocks evenly so they project onto the macroscopic residual
            for s in 0..nl {
                for c in 0..k {
                    let sum: f64 = (0..nb).map(|n| r[s * w + n * k + c]).sum();
                    let shift = (macro_lim[s * k + c] - sum) / nb as f64;
                    for n in 0..nb {
                        r[s * w + n * k + c] += shift;
                    }
                }
            }
        });
        out.fill(0.0);
        self.scatter(&buf, 1.0, out);
        // jumps are linear, so they act once on the weighted stage sum
        if !self.jumps.is_empty() {
            let mut combined = vec![0.0; df.len()];
            for (&scale, f) in scales.iter().zip(states) {
                for (c, v) in combined.iter_mut().zip(f) {
                    *c += scale * v;
                }
            }
            self.add_jumps(&combined, 1.0, out);
        }
        for (&scale, wall) in scales.iter().zip(&cache.walls) {
            for (o, v) in out.iter_mut().zip(wall) {
                *o += scale * v;
            }
        }
    }
}

/// Element LxF residuals (`[element][σ][block][component]`) and assembled
/// wall terms of each DeC stage.
#[derive(Debug, Clone)]
pub struct StageCache {
    pub lxf: Vec<Vec<f64>>,
    pub walls: Vec<Vec<f64>>,
}

fn jump_matrix(disc: &Discretization, face: &crate::space::InteriorFace, theta: &[f64]) -> JumpMatrix {
    let left = &disc.dofmap.element_dofs[face.left];
    let right = &disc.dofmap.element_dofs[face.right];
    let mut dofs: Vec<usize> = left.iter().chain(right).copied().collect();
    dofs.sort_unstable();
    dofs.dedup();
    let m = dofs.len();
    let index = |g: usize| dofs.binary_search(&g).expect("dof in union");
    let rl = disc.elements[face.left].rates(face.normal);
    let rr = disc.elements[face.right].rates(face.normal);
    // hp scaling of the face length; reduces to h_e for linear elements
    let h = face.h / (disc.degree as f64).powf(1.75);
    let mut matrix = vec![0.0; m * m];
    let mut g = vec![0.0; m];
    for (k, &th) in theta.iter().enumerate() {
        if th == 0.0 {
            continue;
        }
        let order = k + 1;
        let scale = th * h.powi(2 * order as i32);
        for p in &face.points {
            g.fill(0.0);
            let dl = disc.basis.eval_directional(&p.left, &rl, order);
            let dr = disc.basis.eval_directional(&p.right, &rr, order);
            for (s, &gid) in left.iter().enumerate() {
                g[index(gid)] += dl[s];
            }
            for (s, &gid) in right.iter().enumerate() {
                g[index(gid)] -= dr[s];
            }
            for a in 0..m {
                for b in 0..m {
                    matrix[a * m + b] += scale * p.weight * g[a] * g[b];
                }
            }
        }
    }
    JumpMatrix { dofs, matrix }
}

/// Limited and blended distribution of one component: `lxf` holds the
/// Lax-Friedrichs nodal residuals summing to `total`.
pub fn limit_blend(lxf: &[f64], total: f64) -> Vec<f64> {
    let mut out = lxf.to_vec();
    limit_blend_in_place(&mut out, total);
    out
}

fn limit_blend_in_place(x: &mut [f64], total: f64) {
    if total == 0.0 {
        return;
    }
    let mut pos_sum = 0.0;
    let mut abs_sum = 0.0;
    for &v in x.iter() {
        pos_sum += (v / total).max(0.0);
        abs_sum += v.abs();
    }
    if pos_sum == 0.0 || abs_sum == 0.0 {
        return;
    }
    let theta = total.abs() / abs_sum;
    for v in x.iter_mut() {
        let beta = (*v / total).max(0.0) / pos_sum;
        *v = (1.0 - theta) * beta * total + theta * *v;
    }
}

/// Lumped relaxation source `|C_σ| (M(u_σ) - f_σ) / ε` at one DoF.
pub fn source_residual(drm: &DrmModel, f: &[f64], u: &[f64], lumped: f64) -> Result<Vec<f64>> {
    if drm.eps == 0.0 {
        return Err(Error::Undefined("the relaxation source is unbounded at eps = 0".into()));
    }
    let m = drm.maxwellian_vec(u)?;
    Ok(m.iter().zip(f).map(|(mi, fi)| lumped * (mi - fi) / drm.eps).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_1d, generate::disk_rings, Mesh};
    use crate::model::HyperbolicModel;
    use approx::assert_relative_eq;

    fn op_1d(n: usize, d: usize, variant: Variant, theta: &[f64], periodic: bool) -> SpatialOperator {
        let mesh = Mesh::Interval(build_uniform_1d(0.0, 1.0, n, periodic).unwrap());
        let disc = Discretization::new(mesh, d).unwrap();
        let drm = DrmModel::new(HyperbolicModel::Transport { speed: 1.0 }, 1.5, 1e-9).unwrap();
        SpatialOperator::new(disc, drm, SchemeConfig::new(variant, d, theta).unwrap()).unwrap()
    }

    /// Residual of the single velocity `+λ` block only.
    fn plus_block(op: &SpatialOperator, e: usize, vals: &[f64], lxf: bool) -> Vec<f64> {
        let nl = op.disc.n_local();
        let mut local = vec![0.0; nl * 2];
        for s in 0..nl {
            local[s * 2 + 1] = vals[s];
        }
        let mut out = vec![0.0; nl * 2];
        if lxf {
            op.lxf_residual(e, &local, &mut out);
        } else {
            op.galerkin_residual(e, &local, &mut out);
        }
        (0..nl).map(|s| out[s * 2 + 1]).collect()
    }

    #[test]
    fn galerkin_linear_split() {
        let op = op_1d(4, 1, Variant::GalerkinJump, &[], false);
        let r = plus_block(&op, 0, &[0.0, 1.0], false);
        assert_relative_eq!(r[0], 0.75, epsilon = 1e-14);
        assert_relative_eq!(r[1], 0.75, epsilon = 1e-14);
        let c = plus_block(&op, 2, &[2.0, 2.0], false);
        assert!(c.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn lxf_linear_case_is_upwind() {
        let op = op_1d(4, 1, Variant::LxfBlend, &[], false);
        let r = plus_block(&op, 0, &[0.0, 1.0], true);
        assert_relative_eq!(r[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(r[1], 1.5, epsilon = 1e-14);
        let c = plus_block(&op, 1, &[3.0, 3.0], true);
        assert!(c.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn blend_examples() {
        let out = limit_blend(&[2.0, -1.0], 1.0);
        assert_relative_eq!(out[0], 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(out[1], -1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(limit_blend(&[0.0, 0.7, 0.0], 0.7), vec![0.0, 0.7, 0.0]);
        assert_eq!(limit_blend(&[1.0, -1.0], 0.0), vec![1.0, -1.0]);
    }

    #[test]
    fn jump_examples() {
        // slopes 1 and 3 meeting at x = 0.5 on a 2-cell mesh of width 0.5
        let op = op_1d(2, 1, Variant::GalerkinJump, &[1.0], false);
        let f: Vec<f64> = [0.0, 0.5, 2.0].iter().flat_map(|&v| [0.0, v]).collect();
        let (dofs, contrib) = op.jump_stabilization(0, &f);
        assert_eq!(dofs, vec![0, 1, 2]);
        let h: f64 = 0.5;
        let jump = 1.0 - 3.0;
        // hat at the shared vertex has normal derivative 1/h on the left, -1/h on the right
        assert_relative_eq!(contrib[2 + 1], h * h * jump * (2.0 / h), epsilon = 1e-13);
        assert_relative_eq!(contrib[1], h * h * jump * (-1.0 / h), epsilon = 1e-13);
        // globally linear data has no jump
        let lin: Vec<f64> = [0.0, 0.5, 1.0].iter().flat_map(|&v| [v, v]).collect();
        let (_, c) = op.jump_stabilization(0, &lin);
        assert!(c.iter().all(|v| v.abs() < 1e-13));
        let none = op_1d(2, 1, Variant::GalerkinJump, &[0.0], false);
        assert!(none.jump_stabilization(0, &f).1.is_empty());
    }

    #[test]
    fn source_example() {
        let drm = DrmModel::new(HyperbolicModel::Transport { speed: 1.0 }, 1.5, 0.1).unwrap();
        let r = source_residual(&drm, &[0.2, 0.8], &[1.0], 0.5).unwrap();
        assert_relative_eq!(r[0], -1.0 / 6.0, epsilon = 1e-14);
        assert_relative_eq!(r[1], 1.0 / 6.0, epsilon = 1e-14);
        let m = drm.maxwellian_vec(&[0.4]).unwrap();
        assert!(source_residual(&drm, &m, &[0.4], 2.0)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-15));
        let zero = DrmModel::new(HyperbolicModel::Transport { speed: 1.0 }, 1.5, 0.0).unwrap();
        assert!(source_residual(&zero, &m, &[0.4], 1.0).is_err());
    }

    #[test]
    fn constant_state_has_zero_residual_everywhere() {
        let mesh = Mesh::Triangles(disk_rings(1.0, 3, BoundaryTag::Wall).unwrap());
        let disc = Discretization::new(mesh, 2).unwrap();
        let drm = DrmModel::new(HyperbolicModel::Euler2D { gamma: 1.4 }, 3.0, 1e-9).unwrap();
        let op = SpatialOperator::new(
            disc,
            drm,
            SchemeConfig::new(Variant::LxfBlend, 2, &[0.1, 1e-4]).unwrap(),
        )
        .unwrap();
        // a fluid at rest is its own mirror image, so the wall term vanishes too
        let m = drm.maxwellian_vec(&[1.0, 0.0, 0.0, 2.5]).unwrap();
        let f: Vec<f64> = (0..op.disc.n_dofs()).flat_map(|_| m.clone()).collect();
        let mut out = vec![0.0; f.len()];
        op.advective_residual(&f, &mut out).unwrap();
        assert!(
            out.iter().all(|v| v.abs() < 1e-12),
            "{:?}",
            out.iter().cloned().fold(0.0, f64::max)
        );
    }
}
