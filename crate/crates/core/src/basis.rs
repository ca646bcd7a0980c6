//! Bernstein polynomial bases on simplices (intervals and triangles).
//!
//! Local degrees of freedom are indexed by barycentric multi-indices `α` with
//! `|α| = d`; the control point of `α` sits at barycentric coordinates `α / d`.
//! Every element shares the same reference tables, so element quantities are
//! obtained by scaling reference integrals with the element measure and the
//! barycentric gradients.

use crate::error::{Error, Result};
use crate::mesh::{DofMap, SimplexMesh};

pub const MAX_DEGREE: usize = 3;

const BARY_TOL: f64 = 1e-12;

/// Multi-indices of length `dim + 1` summing to `degree`, in reverse
/// lexicographic order. For `degree = 1` this is the vertex order.
pub fn multi_indices(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=remaining).rev() {
            prefix.push(a);
            rec(remaining - a, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(degree, dim + 1, &mut Vec::new(), &mut out);
    out
}

pub fn local_dof_count(dim: usize, degree: usize) -> usize {
    match dim {
        1 => degree + 1,
        _ => (degree + 1) * (degree + 2) / 2,
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Evaluates `B_α^d` at barycentric coordinates (no range check).
pub fn bernstein(alpha: &[usize], bary: &[f64]) -> f64 {
    let d: usize = alpha.iter().sum();
    let mut value = factorial(d);
    for (&a, &l) in alpha.iter().zip(bary) {
        value *= l.powi(a as i32) / factorial(a);
    }
    value
}

/// `k`-th derivative of `B_α^d` along a direction whose barycentric
/// rates of change are `rates[i] = ∇λ_i · v`.
pub fn bernstein_directional(alpha: &[usize], bary: &[f64], rates: &[f64], k: usize) -> f64 {
    if k == 0 {
        return bernstein(alpha, bary);
    }
    let d: usize = alpha.iter().sum();
    if d < k {
        return 0.0;
    }
    let mut reduced = alpha.to_vec();
    let mut acc = 0.0;
    for i in 0..alpha.len() {
        if alpha[i] == 0 || rates[i] == 0.0 {
            continue;
        }
        reduced[i] -= 1;
        acc += rates[i] * bernstein_directional(&reduced, bary, rates, k - 1);
        reduced[i] += 1;
    }
    d as f64 * acc
}

fn check_barycentric(bary: &[f64]) -> Result<()> {
    let sum: f64 = bary.iter().sum();
    if bary.iter().any(|&l| l < -BARY_TOL) || (sum - 1.0).abs() > 1e-10 {
        return Err(Error::config(format!(
            "point with barycentric coordinates {bary:?} lies outside the reference element"
        )));
    }
    Ok(())
}

/// Converts reference coordinates to barycentric ones.
/// 1D reference is `[0, 1]`, 2D reference is the unit right triangle.
pub fn reference_to_barycentric(x: &[f64]) -> Vec<f64> {
    match x.len() {
        1 => vec![1.0 - x[0], x[0]],
        _ => vec![1.0 - x[0] - x[1], x[0], x[1]],
    }
}

/// Barycentric gradients on the reference element (one row per vertex).
pub fn reference_barycentric_gradients(dim: usize) -> Vec<[f64; 2]> {
    match dim {
        1 => vec![[-1.0, 0.0], [1.0, 0.0]],
        _ => vec![[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
    }
}

/// Basis values at a point given in reference coordinates.
pub fn eval_basis(degree: usize, x: &[f64]) -> Result<Vec<f64>> {
    check_degree(degree)?;
    let bary = reference_to_barycentric(x);
    check_barycentric(&bary)?;
    Ok(multi_indices(x.len(), degree)
        .iter()
        .map(|a| bernstein(a, &bary))
        .collect())
}

/// Reference-coordinate gradients of all basis functions at `x`.
/// Entry `[σ][j]` is `∂φ_σ / ∂x_j`.
pub fn eval_grad(degree: usize, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_degree(degree)?;
    let dim = x.len();
    let bary = reference_to_barycentric(x);
    check_barycentric(&bary)?;
    let grads = reference_barycentric_gradients(dim);
    Ok(multi_indices(dim, degree)
        .iter()
        .map(|a| {
            (0..dim)
                .map(|j| {
                    let rates: Vec<f64> = grads.iter().map(|g| g[j]).collect();
                    bernstein_directional(a, &bary, &rates, 1)
                })
                .collect()
        })
        .collect())
}

pub fn check_degree(degree: usize) -> Result<()> {
    if (1..=MAX_DEGREE).contains(&degree) {
        Ok(())
    } else {
        Err(Error::config(format!(
            "unsupported polynomial degree {degree} (expected 1..={MAX_DEGREE})"
        )))
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = 0.5 * (1.0 - z);
        nodes[n - 1 - i] = 0.5 * (1.0 + z);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Quadrature rule on a reference simplex with points in barycentric form.
/// Weights sum to the reference measure (1 for the interval, 1/2 for the triangle).
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl Quadrature {
    /// Rule exact for polynomials of total degree `exactness` on the
    /// reference simplex of dimension `dim`.
    pub fn simplex(dim: usize, exactness: usize) -> Self {
        match dim {
            1 => {
                let n = exactness / 2 + 1;
                let (x, w) = gauss_legendre(n);
                Quadrature {
                    points: x.iter().map(|&t| vec![1.0 - t, t]).collect(),
                    weights: w,
                    exactness,
                }
            }
            _ => {
                // Collapsed (Duffy) product rule: x = s, y = t (1 - s).
                let n = (exactness + 2).div_ceil(2);
                let (x, w) = gauss_legendre(n);
                let mut points = Vec::with_capacity(n * n);
                let mut weights = Vec::with_capacity(n * n);
                for (&s, &ws) in x.iter().zip(&w) {
                    for (&t, &wt) in x.iter().zip(&w) {
                        let px = s;
                        let py = t * (1.0 - s);
                        points.push(vec![1.0 - px - py, px, py]);
                        weights.push(ws * wt * (1.0 - s));
                    }
                }
                Quadrature {
                    points,
                    weights,
                    exactness,
                }
            }
        }
    }

    pub fn reference_measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Reference tables for one Bernstein space, shared by all elements.
#[derive(Debug, Clone)]
pub struct BernsteinBasis {
    pub dim: usize,
    pub degree: usize,
    pub indices: Vec<Vec<usize>>,
    pub quadrature: Quadrature,
    /// `values[q][σ]` at the element quadrature points.
    pub values: Vec<Vec<f64>>,
}

impl BernsteinBasis {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        check_degree(degree)?;
        if !(1..=2).contains(&dim) {
            return Err(Error::config(format!("unsupported dimension {dim}")));
        }
        let indices = multi_indices(dim, degree);
        let quadrature = Quadrature::simplex(dim, 2 * degree);
        let values = quadrature
            .points
            .iter()
            .map(|p| indices.iter().map(|a| bernstein(a, p)).collect())
            .collect();
        Ok(BernsteinBasis {
            dim,
            degree,
            indices,
            quadrature,
            values,
        })
    }

    pub fn n_local(&self) -> usize {
        self.indices.len()
    }

    /// Barycentric coordinates of the control point of each local DoF.
    pub fn lattice_points(&self) -> Vec<Vec<f64>> {
        let d = self.degree as f64;
        self.indices
            .iter()
            .map(|a| a.iter().map(|&ai| ai as f64 / d).collect())
            .collect()
    }

    pub fn eval(&self, bary: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|a| bernstein(a, bary)).collect()
    }

    /// Physical `k`-th directional derivatives given barycentric rates.
    pub fn eval_directional(&self, bary: &[f64], rates: &[f64], k: usize) -> Vec<f64> {
        self.indices
            .iter()
            .map(|a| bernstein_directional(a, bary, rates, k))
            .collect()
    }

    /// Physical gradients given the element's barycentric gradients.
    pub fn eval_gradients(&self, bary: &[f64], bary_grads: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let rx: Vec<f64> = bary_grads.iter().map(|g| g[0]).collect();
        let ry: Vec<f64> = bary_grads.iter().map(|g| g[1]).collect();
        self.indices
            .iter()
            .map(|a| {
                let gx = bernstein_directional(a, bary, &rx, 1);
                let gy = if self.dim > 1 {
                    bernstein_directional(a, bary, &ry, 1)
                } else {
                    0.0
                };
                [gx, gy]
            })
            .collect()
    }

    /// `∫_K B_α dx / |K|`, identical for every α.
    pub fn mean_value(&self) -> f64 {
        let n = self.degree + self.dim;
        factorial(self.degree) * factorial(self.dim) / factorial(n)
    }

    /// Reference mass matrix normalised by the element measure:
    /// `∫_K φ_σ φ_j dx = |K| * mass[σ][j]`.
    pub fn normalised_mass(&self) -> Vec<Vec<f64>> {
        let n = self.n_local();
        let scale = 1.0 / self.quadrature.reference_measure();
        let mut m = vec![vec![0.0; n]; n];
        for (q, w) in self.quadrature.weights.iter().enumerate() {
            let v = &self.values[q];
            for s in 0..n {
                for j in 0..n {
                    m[s][j] += scale * w * v[s] * v[j];
                }
            }
        }
        m
    }

    /// Normalised convection tensor: `∫_K φ_σ ∂φ_j/∂λ_i dx = |K| * conv[i][σ][j]`.
    pub fn normalised_convection(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.n_local();
        let nb = self.dim + 1;
        let scale = 1.0 / self.quadrature.reference_measure();
        let mut c = vec![vec![vec![0.0; n]; n]; nb];
        for (q, w) in self.quadrature.weights.iter().enumerate() {
            let p = &self.quadrature.points[q];
            let v = &self.values[q];
            for (i, ci) in c.iter_mut().enumerate() {
                let mut rates = vec![0.0; nb];
                rates[i] = 1.0;
                let dj = self.eval_directional(p, &rates, 1);
                for s in 0..n {
                    for j in 0..n {
                        ci[s][j] += scale * w * v[s] * dj[j];
                    }
                }
            }
        }
        c
    }

    /// Values of each basis function at each lattice point: `v[β][α] = B_α(x_β)`.
    pub fn lattice_vandermonde(&self) -> Vec<Vec<f64>> {
        self.lattice_points().iter().map(|p| self.eval(p)).collect()
    }
}

/// Lumped coefficients `|C_σ| = ∫_Ω φ_σ dx` for every global DoF.
pub fn lumped_coefficient<M: SimplexMesh + ?Sized>(mesh: &M, dofmap: &DofMap, degree: usize) -> Result<Vec<f64>> {
    let basis = BernsteinBasis::new(mesh.dim(), degree)?;
    if dofmap.degree != degree {
        return Err(Error::Shape(format!(
            "dof map has degree {}, requested {degree}",
            dofmap.degree
        )));
    }
    let mean = basis.mean_value();
    let mut c = vec![0.0; dofmap.n_dofs];
    for e in 0..mesh.n_elements() {
        let share = mesh.element_measure(e) * mean;
        for &g in &dofmap.element_dofs[e] {
            c[g] += share;
        }
    }
    Ok(c)
}

/// Solves a small dense linear system by Gaussian elimination with partial pivoting.
pub(crate) fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[row][k] -= f * m[col][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn binom(n: usize, k: usize) -> f64 {
        factorial(n) / (factorial(k) * factorial(n - k))
    }

    #[test]
    fn linear_hat_is_symmetric() {
        let v = eval_basis(1, &[0.5]).unwrap();
        assert_eq!(v, vec![0.5, 0.5]);
    }

    #[test]
    fn quadratic_at_endpoint_and_midpoint() {
        assert_eq!(eval_basis(2, &[0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        // B_k^2(x) = C(2,k) x^k (1-x)^(2-k) evaluated directly
        let x: f64 = 0.5;
        let direct: Vec<f64> = (0..=2)
            .map(|k| binom(2, k) * x.powi(k as i32) * (1.0 - x).powi(2 - k as i32))
            .collect();
        let v = eval_basis(2, &[x]).unwrap();
        for (a, b) in v.iter().zip(&direct) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
        assert_relative_eq!(v[0], 0.25);
        assert_relative_eq!(v[1], 0.5);
        assert_relative_eq!(v[2], 0.25);
    }

    #[test]
    fn gradients_match_hand_derivatives() {
        let g = eval_grad(1, &[0.3]).unwrap();
        assert_relative_eq!(g[0][0], -1.0);
        assert_relative_eq!(g[1][0], 1.0);
        // d/dx of (1-x)^2, 2x(1-x), x^2 at x = 0
        let g = eval_grad(2, &[0.0]).unwrap();
        assert_relative_eq!(g[0][0], -2.0);
        assert_relative_eq!(g[1][0], 2.0);
        assert_relative_eq!(g[2][0], 0.0);
    }

    #[test]
    fn gradients_match_finite_differences_on_triangle() {
        let x = [0.21, 0.37];
        let h = 1e-6;
        let g = eval_grad(3, &x).unwrap();
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let vp = eval_basis(3, &xp).unwrap();
            let vm = eval_basis(3, &xm).unwrap();
            for s in 0..10 {
                assert_relative_eq!(g[s][j], (vp[s] - vm[s]) / (2.0 * h), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn outside_point_is_rejected() {
        assert!(eval_basis(2, &[1.5]).is_err());
        assert!(eval_basis(2, &[0.8, 0.8]).is_err());
        assert!(eval_grad(1, &[-0.1]).is_err());
        assert!(eval_basis(4, &[0.1]).is_err());
    }

    #[test]
    fn local_counts() {
        assert_eq!(multi_indices(2, 3).len(), 10);
        assert_eq!(multi_indices(1, 2).len(), 3);
        assert_eq!(local_dof_count(2, 3), 10);
    }

    #[test]
    fn quadrature_integrates_monomials_exactly() {
        for d in 1..=MAX_DEGREE {
            let p = 2 * d;
            let q1 = Quadrature::simplex(1, p);
            for k in 0..=p {
                let exact = 1.0 / (k as f64 + 1.0);
                let num: f64 = q1
                    .points
                    .iter()
                    .zip(&q1.weights)
                    .map(|(b, w)| w * b[1].powi(k as i32))
                    .sum();
                assert_relative_eq!(num, exact, max_relative = 1e-13);
            }
            let q2 = Quadrature::simplex(2, p);
            assert!(q2.weights.iter().all(|&w| w > 0.0));
            for a in 0..=p {
                for b in 0..=(p - a) {
                    // ∫_T x^a y^b = a! b! / (a + b + 2)!
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let num: f64 = q2
                        .points
                        .iter()
                        .zip(&q2.weights)
                        .map(|(bc, w)| w * bc[1].powi(a as i32) * bc[2].powi(b as i32))
                        .sum();
                    assert_relative_eq!(num, exact, max_relative = 1e-13);
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_at_quadrature_points() {
        for dim in 1..=2 {
            for d in 1..=MAX_DEGREE {
                let basis = BernsteinBasis::new(dim, d).unwrap();
                let grads = reference_barycentric_gradients(dim);
                for p in &basis.quadrature.points {
                    let v = basis.eval(p);
                    assert!(v.iter().all(|&x| x >= 0.0));
                    assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                    let g = basis.eval_gradients(p, &grads);
                    let sx: f64 = g.iter().map(|x| x[0]).sum();
                    let sy: f64 = g.iter().map(|x| x[1]).sum();
                    assert!(sx.abs() < 1e-13 && sy.abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn mean_value_matches_quadrature() {
        for dim in 1..=2 {
            for d in 1..=MAX_DEGREE {
                let basis = BernsteinBasis::new(dim, d).unwrap();
                let m = basis.normalised_mass();
                for row in &m {
                    assert_relative_eq!(row.iter().sum::<f64>(), basis.mean_value(), epsilon = 1e-14);
                }
            }
        }
        assert_relative_eq!(BernsteinBasis::new(1, 2).unwrap().mean_value(), 1.0 / 3.0);
        assert_relative_eq!(BernsteinBasis::new(2, 1).unwrap().mean_value(), 1.0 / 3.0);
    }

    #[test]
    fn inverse_of_vandermonde() {
        let basis = BernsteinBasis::new(2, 3).unwrap();
        let v = basis.lattice_vandermonde();
        let inv = dense_inverse(&v);
        for i in 0..v.len() {
            for j in 0..v.len() {
                let s: f64 = (0..v.len()).map(|k| v[i][k] * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
