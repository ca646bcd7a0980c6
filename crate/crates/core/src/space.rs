//! Geometry and reference tables of the continuous Bernstein space on a mesh.

use rayon::prelude::*;

use crate::basis::{dense_inverse, gauss_legendre, lumped_coefficient, BernsteinBasis};
use crate::error::{Error, Result};
use crate::mesh::{build_dof_map, BoundaryTag, DofMap, EdgeNeighbor, Mesh, SimplexMesh};

#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub measure: f64,
    pub coords: Vec<[f64; 2]>,
    pub bary_grads: Vec<[f64; 2]>,
}

impl ElementGeometry {
    pub fn position(&self, bary: &[f64]) -> [f64; 2] {
        let mut p = [0.0, 0.0];
        for (l, c) in bary.iter().zip(&self.coords) {
            p[0] += l * c[0];
            p[1] += l * c[1];
        }
        p
    }

    /// Rate of change of each barycentric coordinate along `n`.
    pub fn rates(&self, n: [f64; 2]) -> Vec<f64> {
        self.bary_grads.iter().map(|g| g[0] * n[0] + g[1] * n[1]).collect()
    }

    /// Barycentric coordinates of a physical point (unclipped).
    pub fn barycentric(&self, p: [f64; 2]) -> Vec<f64> {
        let c0 = self.coords[0];
        // λ_i vanishes at vertex 0 for i > 0
        let mut bary: Vec<f64> = self.bary_grads[1..]
            .iter()
            .map(|g| g[0] * (p[0] - c0[0]) + g[1] * (p[1] - c0[1]))
            .collect();
        let s: f64 = bary.iter().sum();
        bary.insert(0, 1.0 - s);
        bary
    }
}

/// Quadrature point on a face, with barycentric coordinates in each neighbor.
#[derive(Debug, Clone)]
pub struct FacePoint {
    pub weight: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct InteriorFace {
    pub left: usize,
    pub right: usize,
    /// Unit normal pointing from `left` into `right`.
    pub normal: [f64; 2],
    /// Face length scale `h_e` for the jump weights.
    pub h: f64,
    /// Points with weights summing to the face measure (1 in 1D).
    pub points: Vec<FacePoint>,
}

#[derive(Debug, Clone)]
pub struct BoundaryFace {
    pub element: usize,
    pub tag: BoundaryTag,
    /// Outward unit normal.
    pub normal: [f64; 2],
    /// `(weight, barycentric coordinates in element)`.
    pub points: Vec<(f64, Vec<f64>)>,
    /// Local indices of the DoFs lying on the face.
    pub local_dofs: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub degree: usize,
    pub basis: BernsteinBasis,
    pub dofmap: DofMap,
    /// `|C_σ|` per global DoF.
    pub lumped: Vec<f64>,
    pub elements: Vec<ElementGeometry>,
    pub interior_faces: Vec<InteriorFace>,
    pub boundary_faces: Vec<BoundaryFace>,
    /// `∫_K φ_σ φ_j = |K| mass_ref[σ][j]`.
    pub mass_ref: Vec<Vec<f64>>,
    /// `∫_K φ_σ ∂φ_j/∂λ_i = |K| conv_ref[i][σ][j]`.
    pub conv_ref: Vec<Vec<Vec<f64>>>,
    /// Maps lattice-point values to Bernstein coefficients.
    pub inv_vandermonde: Vec<Vec<f64>>,
    pub vandermonde: Vec<Vec<f64>>,
}

impl Discretization {
    pub fn new(mesh: Mesh, degree: usize) -> Result<Self> {
        let dim = mesh.dim();
        let basis = BernsteinBasis::new(dim, degree)?;
        let dofmap = build_dof_map(&mesh, degree)?;
        let lumped = lumped_coefficient(&mesh, &dofmap, degree)?;
        let elements: Vec<ElementGeometry> = (0..mesh.n_elements())
            .map(|e| element_geometry(&mesh, e))
            .collect::<Result<_>>()?;
        let (interior_faces, boundary_faces) = build_faces(&mesh, &basis)?;
        let vandermonde = basis.lattice_vandermonde();
        let inv_vandermonde = dense_inverse(&vandermonde);
        Ok(Discretization {
            mass_ref: basis.normalised_mass(),
            conv_ref: basis.normalised_convection(),
            mesh,
            degree,
            basis,
            dofmap,
            lumped,
            elements,
            interior_faces,
            boundary_faces,
            inv_vandermonde,
            vandermonde,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs
    }

    pub fn n_local(&self) -> usize {
        self.basis.n_local()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.dofmap.positions
    }

    /// Smallest CFL length over the mesh.
    pub fn h_min(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.mesh.element_cfl_length(e))
            .fold(f64::INFINITY, f64::min)
    }

    /// Bernstein coefficients interpolating `u0` at the lattice points
    /// (`k` components per DoF).
    pub fn interpolate<F>(&self, k: usize, u0: F) -> Vec<f64>
    where
        F: Fn([f64; 2]) -> Vec<f64> + Sync,
    {
        let lattice = self.basis.lattice_points();
        let nl = self.n_local();
        let local: Vec<Vec<f64>> = self
            .elements
            .par_iter()
            .map(|geo| {
                let vals: Vec<Vec<f64>> = lattice.iter().map(|b| u0(geo.position(b))).collect();
                let mut coef = vec![0.0; nl * k];
                for s in 0..nl {
                    for (j, v) in vals.iter().enumerate() {
                        for c in 0..k {
                            coef[s * k + c] += self.inv_vandermonde[s][j] * v[c];
                        }
                    }
                }
                coef
            })
            .collect();
        self.scatter_local(&local, k)
    }

    /// Coefficients set to `u0` at the control points. Only second-order
    /// accurate, but stays within the convex hull of the sampled values.
    pub fn sample_control_net<F>(&self, k: usize, u0: F) -> Vec<f64>
    where
        F: Fn([f64; 2]) -> Vec<f64> + Sync,
    {
        let mut out = vec![0.0; self.n_dofs() * k];
        for (g, p) in self.dofmap.positions.iter().enumerate() {
            out[g * k..(g + 1) * k].copy_from_slice(&u0(*p)[..k]);
        }
        out
    }

    fn scatter_local(&self, local: &[Vec<f64>], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs() * k];
        for (e, coef) in local.iter().enumerate() {
            for (s, &g) in self.dofmap.element_dofs[e].iter().enumerate() {
                out[g * k..(g + 1) * k].copy_from_slice(&coef[s * k..(s + 1) * k]);
            }
        }
        out
    }

    /// Coefficients of the function taking `values` at the DoF control
    /// points; inverse of [`point_values`](Self::point_values).
    pub fn from_point_values(&self, values: &[f64], k: usize) -> Vec<f64> {
        let nl = self.n_local();
        let local: Vec<Vec<f64>> = (0..self.n_elements())
            .into_par_iter()
            .map(|e| {
                let dofs = &self.dofmap.element_dofs[e];
                let mut coef = vec![0.0; nl * k];
                for s in 0..nl {
                    for (b, &g) in dofs.iter().enumerate() {
                        let w = self.inv_vandermonde[s][b];
                        for c in 0..k {
                            coef[s * k + c] += w * values[g * k + c];
                        }
                    }
                }
                coef
            })
            .collect();
        self.scatter_local(&local, k)
    }

    /// Values of the finite element function at the DoF control points.
    pub fn point_values(&self, coeffs: &[f64], k: usize) -> Vec<f64> {
        let nl = self.n_local();
        let local: Vec<Vec<f64>> = (0..self.n_elements())
            .into_par_iter()
            .map(|e| {
                let dofs = &self.dofmap.element_dofs[e];
                let mut v = vec![0.0; nl * k];
                for b in 0..nl {
                    for (s, &g) in dofs.iter().enumerate() {
                        let w = self.vandermonde[b][s];
                        for c in 0..k {
                            v[b * k + c] += w * coeffs[g * k + c];
                        }
                    }
                }
                v
            })
            .collect();
        self.scatter_local(&local, k)
    }

    /// Value of the finite element function at barycentric point `bary` of element `e`.
    pub fn evaluate(&self, coeffs: &[f64], k: usize, e: usize, bary: &[f64]) -> Vec<f64> {
        let phi = self.basis.eval(bary);
        let mut out = vec![0.0; k];
        for (s, &g) in self.dofmap.element_dofs[e].iter().enumerate() {
            for c in 0..k {
                out[c] += phi[s] * coeffs[g * k + c];
            }
        }
        out
    }

    /// Element containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, Vec<f64>)> {
        let tol = 1e-10;
        for (e, geo) in self.elements.iter().enumerate() {
            if self.dim() == 1 {
                let [l, r] = [geo.coords[0][0], geo.coords[1][0]];
                if p[0] < l - tol * (r - l) || p[0] > r + tol * (r - l) {
                    continue;
                }
            }
            let b = geo.barycentric(p);
            let worst = b.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst >= -tol {
                return Some((e, b.iter().map(|x| x.max(0.0)).collect()));
            }
        }
        None
    }

    /// `out_σ = Σ_K ∫_K φ_σ x_h` for `width` interleaved components.
    pub fn apply_mass(&self, x: &[f64], width: usize, out: &mut [f64]) {
        let nl = self.n_local();
        let local: Vec<Vec<f64>> = (0..self.n_elements())
            .into_par_iter()
            .map(|e| {
                let dofs = &self.dofmap.element_dofs[e];
                let m = self.elements[e].measure;
                let mut r = vec![0.0; nl * width];
                for s in 0..nl {
                    for (j, &g) in dofs.iter().enumerate() {
                        let w = m * self.mass_ref[s][j];
                        for c in 0..width {
                            r[s * width + c] += w * x[g * width + c];
                        }
                    }
                }
                r
            })
            .collect();
        out.fill(0.0);
        for (e, r) in local.iter().enumerate() {
            for (s, &g) in self.dofmap.element_dofs[e].iter().enumerate() {
                for c in 0..width {
                    out[g * width + c] += r[s * width + c];
                }
            }
        }
    }

    /// Global DoFs on faces with the given tag, sorted and deduplicated.
    pub fn boundary_dofs(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .boundary_faces
            .iter()
            .filter(|f| f.tag == tag)
            .flat_map(|f| {
                f.local_dofs
                    .iter()
                    .map(move |&l| self.dofmap.element_dofs[f.element][l])
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn element_geometry(mesh: &Mesh, e: usize) -> Result<ElementGeometry> {
    let coords = mesh.element_coords(e);
    let measure = mesh.element_measure(e);
    if !(measure > 0.0) {
        return Err(Error::mesh(format!("element {e} has non-positive measure")));
    }
    let bary_grads = if mesh.dim() == 1 {
        vec![[-1.0 / measure, 0.0], [1.0 / measure, 0.0]]
    } else {
        let [p0, p1, p2] = [coords[0], coords[1], coords[2]];
        let s = 1.0 / (2.0 * measure);
        vec![
            [(p1[1] - p2[1]) * s, (p2[0] - p1[0]) * s],
            [(p2[1] - p0[1]) * s, (p0[0] - p2[0]) * s],
            [(p0[1] - p1[1]) * s, (p1[0] - p0[0]) * s],
        ]
    };
    Ok(ElementGeometry {
        measure,
        coords,
        bary_grads,
    })
}

fn face_local_dofs(basis: &BernsteinBasis, on_face: &[usize]) -> Vec<usize> {
    basis
        .indices
        .iter()
        .enumerate()
        .filter(|(_, a)| a.iter().enumerate().all(|(i, &ai)| ai == 0 || on_face.contains(&i)))
        .map(|(l, _)| l)
        .collect()
}

fn build_faces(mesh: &Mesh, basis: &BernsteinBasis) -> Result<(Vec<InteriorFace>, Vec<BoundaryFace>)> {
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    match mesh {
        Mesh::Interval(m) => {
            let n = m.n_cells;
            let widths: Vec<f64> = m.widths().collect();
            let pairs: Vec<(usize, usize)> = if m.periodic {
                (0..n).map(|e| (e, (e + 1) % n)).filter(|(a, b)| a != b).collect()
            } else {
                (0..n.saturating_sub(1)).map(|e| (e, e + 1)).collect()
            };
            for (l, r) in pairs {
                interior.push(InteriorFace {
                    left: l,
                    right: r,
                    normal: [1.0, 0.0],
                    h: 0.5 * (widths[l] + widths[r]),
                    points: vec![FacePoint {
                        weight: 1.0,
                        left: vec![0.0, 1.0],
                        right: vec![1.0, 0.0],
                    }],
                });
            }
            if !m.periodic {
                boundary.push(BoundaryFace {
                    element: 0,
                    tag: BoundaryTag::Outflow,
                    normal: [-1.0, 0.0],
                    points: vec![(1.0, vec![1.0, 0.0])],
                    local_dofs: face_local_dofs(basis, &[0]),
                });
                boundary.push(BoundaryFace {
                    element: n - 1,
                    tag: BoundaryTag::Outflow,
                    normal: [1.0, 0.0],
                    points: vec![(1.0, vec![0.0, 1.0])],
                    local_dofs: face_local_dofs(basis, &[1]),
                });
            }
        }
        Mesh::Triangles(m) => {
            let (gp, gw) = gauss_legendre(basis.degree + 1);
            for edge in &m.edges {
                let [a, b] = edge.vertices;
                let pa = m.vertices[a];
                let pb = m.vertices[b];
                let d = [pb[0] - pa[0], pb[1] - pa[1]];
                let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let normal = [d[1] / len, -d[0] / len];
                let local_index = |t: usize, v: usize| -> Result<usize> {
                    m.triangles[t]
                        .iter()
                        .position(|&x| x == v)
                        .ok_or_else(|| Error::mesh(format!("edge vertex {v} not in triangle {t}")))
                };
                let bary_on = |t: usize, s: f64| -> Result<Vec<f64>> {
                    let mut bary = vec![0.0; 3];
                    bary[local_index(t, a)?] = 1.0 - s;
                    bary[local_index(t, b)?] = s;
                    Ok(bary)
                };
                match edge.right {
                    EdgeNeighbor::Element(r) => {
                        let points = gp
                            .iter()
                            .zip(&gw)
                            .map(|(&s, &w)| {
                                Ok(FacePoint {
                                    weight: w * len,
                                    left: bary_on(edge.left, s)?,
                                    right: bary_on(r, s)?,
                                })
                            })
                            .collect::<Result<_>>()?;
                        interior.push(InteriorFace {
                            left: edge.left,
                            right: r,
                            normal,
                            h: len,
                            points,
                        });
                    }
                    EdgeNeighbor::Boundary(tag) => {
                        let points = gp
                            .iter()
                            .zip(&gw)
                            .map(|(&s, &w)| Ok((w * len, bary_on(edge.left, s)?)))
                            .collect::<Result<_>>()?;
                        let on_face = [local_index(edge.left, a)?, local_index(edge.left, b)?];
                        boundary.push(BoundaryFace {
                            element: edge.left,
                            tag,
                            normal,
                            points,
                            local_dofs: face_local_dofs(basis, &on_face),
                        });
                    }
                }
            }
        }
    }
    Ok((interior, boundary))
}
