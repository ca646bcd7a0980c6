//! Error norms, convergence rates, an exact Riemann solver and a
//! conservation audit.

use crate::error::{Error, Result};
use crate::mesh::SimplexMesh;
use crate::space::Discretization;

/// Componentwise errors in the discrete norms `Σ |C_σ| |e_σ|`,
/// `(Σ |C_σ| e_σ²)^½` and `max |e_σ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub linf: Vec<f64>,
    pub h: f64,
    pub dofs: usize,
}

/// Weighted norms of a DoF vector `diff` with `k` interleaved components.
pub fn weighted_norms(diff: &[f64], k: usize, weights: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if k == 0 || diff.len() != weights.len() * k {
        return Err(Error::Shape(format!(
            "{} values do not match {} weights with {k} components",
            diff.len(),
            weights.len()
        )));
    }
    let mut l1 = vec![0.0; k];
    let mut l2 = vec![0.0; k];
    let mut linf = vec![0.0f64; k];
    for (e, w) in diff.chunks_exact(k).zip(weights) {
        for c in 0..k {
            l1[c] += w * e[c].abs();
            l2[c] += w * e[c] * e[c];
            linf[c] = linf[c].max(e[c].abs());
        }
    }
    Ok((l1, l2.into_iter().map(f64::sqrt).collect(), linf))
}

/// Errors of the finite element field `coeffs` against `reference`, both
/// sampled at the DoF control points.
pub fn error_norms<F>(disc: &Discretization, coeffs: &[f64], k: usize, reference: F) -> Result<ErrorReport>
where
    F: Fn([f64; 2]) -> Vec<f64>,
{
    if coeffs.len() != disc.n_dofs() * k {
        return Err(Error::Shape(format!(
            "field has {} values, expected {} DoFs x {k}",
            coeffs.len(),
            disc.n_dofs()
        )));
    }
    let values = disc.point_values(coeffs, k);
    let mut diff = values;
    for (i, p) in disc.positions().iter().enumerate() {
        let r = reference(*p);
        if r.len() < k {
            return Err(Error::Shape(format!(
                "reference returned {} components, expected {k}",
                r.len()
            )));
        }
        for c in 0..k {
            diff[i * k + c] -= r[c];
        }
    }
    let (l1, l2, linf) = weighted_norms(&diff, k, &disc.lumped)?;
    Ok(ErrorReport {
        l1,
        l2,
        linf,
        h: disc.mesh.h(),
        dofs: disc.n_dofs(),
    })
}

/// Errors against a solution on a finer 1D mesh of the same interval,
/// evaluated at the coarse control points.
pub fn error_vs_fine(
    disc: &Discretization,
    coeffs: &[f64],
    fine: &Discretization,
    fine_coeffs: &[f64],
    k: usize,
) -> Result<ErrorReport> {
    if disc.dim() != 1 || fine.dim() != 1 {
        return Err(Error::config("fine-grid references are supported in 1D only"));
    }
    let bounds: Vec<f64> = fine.elements.iter().map(|g| g.coords[0][0]).collect();
    let lookup = |p: [f64; 2]| -> Vec<f64> {
        let e = bounds.partition_point(|&x| x <= p[0]).saturating_sub(1);
        let geo = &fine.elements[e];
        let bary = geo.barycentric(p);
        fine.evaluate(fine_coeffs, k, e, &bary)
    };
    error_norms(disc, coeffs, k, lookup)
}

/// `rate_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    check_sweep(errors, hs)?;
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

/// Least-squares slope of `log e` against `log h` over the whole sweep.
pub fn eoc_fit(errors: &[f64], hs: &[f64]) -> Result<f64> {
    check_sweep(errors, hs)?;
    let n = errors.len() as f64;
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

fn check_sweep(errors: &[f64], hs: &[f64]) -> Result<()> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(Error::Shape(format!(
            "need at least two (error, h) pairs, got {} errors and {} sizes",
            errors.len(),
            hs.len()
        )));
    }
    if hs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::config("mesh sizes must be strictly decreasing"));
    }
    if errors.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::Undefined(
            "convergence rate of a zero or non-finite error".into(),
        ));
    }
    Ok(())
}

/// Primitive state `(ρ, v, p)` of a 1D gas.
pub type Primitive = [f64; 3];

/// Self-similar solution of the 1D Euler Riemann problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannSolution {
    pub left: Primitive,
    pub right: Primitive,
    pub gamma: f64,
    pub p_star: f64,
    pub u_star: f64,
}

/// Pressure function of one side and its derivative.
fn side_function(p: f64, s: Primitive, gamma: f64) -> (f64, f64) {
    let [rho, _, pk] = s;
    let a = (gamma * pk / rho).sqrt();
    if p > pk {
        let ak = 2.0 / ((gamma + 1.0) * rho);
        let bk = (gamma - 1.0) / (gamma + 1.0) * pk;
        let q = (ak / (p + bk)).sqrt();
        ((p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (bk + p)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let r = (p / pk).powf(e);
        (
            2.0 * a / (gamma - 1.0) * (r - 1.0),
            (p / pk).powf(-(gamma + 1.0) / (2.0 * gamma)) / (rho * a),
        )
    }
}

/// Star-region pressure and velocity by Newton iteration on the pressure
/// function.
pub fn exact_riemann(left: Primitive, right: Primitive, gamma: f64) -> Result<RiemannSolution> {
    for s in [left, right] {
        if !(s[0] > 0.0) || !(s[2] > 0.0) || s.iter().any(|v| !v.is_finite()) {
            return Err(Error::state("Riemann data must have positive density and pressure", &s));
        }
    }
    let al = (gamma * left[2] / left[0]).sqrt();
    let ar = (gamma * right[2] / right[0]).sqrt();
    let du = right[1] - left[1];
    if 2.0 * (al + ar) / (gamma - 1.0) <= du {
        return Err(Error::state(
            "Riemann data generate vacuum",
            &[left[0], left[1], left[2], right[0], right[1], right[2]],
        ));
    }
    // two-rarefaction guess, always positive
    let e = (gamma - 1.0) / (2.0 * gamma);
    let mut p = ((al + ar - 0.5 * (gamma - 1.0) * du) / (al / left[2].powf(e) + ar / right[2].powf(e))).powf(1.0 / e);
    for _ in 0..100 {
        let (fl, dl) = side_function(p, left, gamma);
        let (fr, dr) = side_function(p, right, gamma);
        let next = (p - (fl + fr + du) / (dl + dr)).max(1e-14 * p);
        let change = 2.0 * (next - p).abs() / (next + p);
        p = next;
        if change < 1e-15 {
            break;
        }
    }
    let (fl, _) = side_function(p, left, gamma);
    let (fr, _) = side_function(p, right, gamma);
    Ok(RiemannSolution {
        left,
        right,
        gamma,
        p_star: p,
        u_star: 0.5 * (left[1] + right[1]) + 0.5 * (fr - fl),
    })
}

impl RiemannSolution {
    /// Primitive state at similarity coordinate `ξ = x / t`.
    pub fn sample(&self, xi: f64) -> Primitive {
        let g = self.gamma;
        let (ps, us) = (self.p_star, self.u_star);
        // mirror the right side onto the left to share one code path
        let (s, sign, xi) = if xi <= us {
            (self.left, 1.0, xi)
        } else {
            (self.right, -1.0, -xi)
        };
        let [rho, u, p] = [s[0], sign * s[1], s[2]];
        let us = sign * us;
        let a = (g * p / rho).sqrt();
        let out = if ps > p {
            let ratio = ps / p;
            let speed = u - a * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt();
            if xi <= speed {
                [rho, u, p]
            } else {
                let gm = (g - 1.0) / (g + 1.0);
                [rho * (ratio + gm) / (gm * ratio + 1.0), us, ps]
            }
        } else {
            let head = u - a;
            let a_star = a * (ps / p).powf((g - 1.0) / (2.0 * g));
            let tail = us - a_star;
            if xi <= head {
                [rho, u, p]
            } else if xi >= tail {
                [rho * (ps / p).powf(1.0 / g), us, ps]
            } else {
                let c = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * a) * (u - xi);
                let rf = rho * c.powf(2.0 / (g - 1.0));
                let uf = 2.0 / (g + 1.0) * (a + (g - 1.0) / 2.0 * u + xi);
                [rf, uf, p * c.powf(2.0 * g / (g - 1.0))]
            }
        };
        [out[0], sign * out[1], out[2]]
    }
}

/// Total `Σ |C_σ| u_σ` per component, which equals `∫ u_h` for Bernstein
/// coefficients.
pub fn total_amount(disc: &Discretization, coeffs: &[f64], k: usize) -> Vec<f64> {
    let mut q = vec![0.0; k];
    for (c, w) in coeffs.chunks_exact(k).zip(&disc.lumped) {
        for j in 0..k {
            q[j] += w * c[j];
        }
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Audit {
    /// `max_t |Q(t) - Q(0)| / |Q(0)|`.
    Drift(f64),
    /// Boundary fluxes change the total, so no drift is reported.
    Declined,
}

/// Relative drift of a history of totals. Only meaningful on periodic meshes.
pub fn conservation_audit(history: &[f64], periodic: bool) -> Audit {
    if !periodic {
        return Audit::Declined;
    }
    let Some(&q0) = history.first() else {
        return Audit::Drift(0.0);
    };
    let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
    Audit::Drift(history.iter().map(|q| (q - q0).abs() / scale).fold(0.0, f64::max))
}

/// Discrete space seminorm `|f|_{1,x}`: per DoF, the largest slope between the
/// coefficient and the field over the adjacent cells, sampled at the lattice
/// points.
pub fn space_seminorm(disc: &Discretization, coeffs: &[f64]) -> f64 {
    let lattice = disc.basis.lattice_points();
    let mut slope = vec![0.0f64; disc.n_dofs()];
    for e in 0..disc.n_elements() {
        let diam = disc.mesh.element_diameter(e);
        let vals: Vec<f64> = lattice.iter().map(|b| disc.evaluate(coeffs, 1, e, b)[0]).collect();
        for &g in &disc.dofmap.element_dofs[e] {
            for v in &vals {
                slope[g] = slope[g].max(((coeffs[g] - v) / diam).abs());
            }
        }
    }
    slope
        .iter()
        .zip(&disc.lumped)
        .map(|(s, w)| w * s * s)
        .sum::<f64>()
        .sqrt()
}

/// Discrete time seminorm `|f|_{1,t}` over subtimestep states.
pub fn time_seminorm(disc: &Discretization, states: &[Vec<f64>], nodes: &[f64], dt: f64) -> f64 {
    let mut total = 0.0;
    for (i, w) in disc.lumped.iter().enumerate() {
        let mut m = 0.0f64;
        for s in 1..states.len() {
            let step = (nodes[s] - nodes[s - 1]) * dt;
            m = m.max(((states[s][i] - states[s - 1][i]) / step).abs());
        }
        total += w * m * m;
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_1d, Mesh};
    use approx::assert_relative_eq;

    fn disc(n: usize, d: usize) -> Discretization {
        Discretization::new(Mesh::Interval(build_uniform_1d(0.0, 1.0, n, true).unwrap()), d).unwrap()
    }

    #[test]
    fn norm_examples() {
        let dc = disc(8, 2);
        let u = dc.interpolate(1, |p| vec![(std::f64::consts::TAU * p[0]).sin()]);
        let r = error_norms(&dc, &u, 1, |p| vec![(std::f64::consts::TAU * p[0]).sin()]).unwrap();
        assert!(r.l1[0] < 1e-14 && r.l2[0] < 1e-14 && r.linf[0] < 1e-14);
        let r = error_norms(&dc, &u, 1, |p| vec![(std::f64::consts::TAU * p[0]).sin() + 0.3]).unwrap();
        assert_relative_eq!(r.l1[0], 0.3, epsilon = 1e-13);
        assert_relative_eq!(r.l2[0], 0.3, epsilon = 1e-13);
        assert_relative_eq!(r.linf[0], 0.3, epsilon = 1e-13);

        let d1 = disc(10, 1);
        let mut hat = vec![0.0; d1.n_dofs()];
        hat[0] = 1.0;
        let (_, l2, _) = weighted_norms(&hat, 1, &d1.lumped).unwrap();
        assert_relative_eq!(l2[0], 0.1f64.sqrt(), epsilon = 1e-15);
        assert!(weighted_norms(&hat, 2, &d1.lumped).is_err());
    }

    #[test]
    fn eoc_examples() {
        assert_relative_eq!(eoc(&[1e-2, 2.5e-3], &[0.1, 0.05]).unwrap()[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(eoc(&[1e-3, 1.25e-4], &[0.1, 0.05]).unwrap()[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(eoc(&[1e-3, 1e-3], &[0.1, 0.05]).unwrap()[0], 0.0);
        assert!(matches!(eoc(&[1e-3, 0.0], &[0.1, 0.05]), Err(Error::Undefined(_))));
        assert!(eoc(&[1e-3], &[0.1]).is_err());
        assert!(eoc(&[1e-3, 1e-4], &[0.05, 0.1]).is_err());
        let hs = [0.1, 0.05, 0.025];
        let es: Vec<f64> = hs.iter().map(|h| 3.0 * h * h * h).collect();
        assert_relative_eq!(eoc_fit(&es, &hs).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn riemann_examples() {
        let s = exact_riemann([1.0, 0.0, 1.0], [1.0, 0.0, 1.0], 1.4).unwrap();
        assert_relative_eq!(s.p_star, 1.0, epsilon = 1e-14);
        assert_relative_eq!(s.u_star, 0.0, epsilon = 1e-14);
        for xi in [-3.0, 0.0, 2.0] {
            let v = s.sample(xi);
            assert_relative_eq!(v[0], 1.0, epsilon = 1e-14);
        }
        let sod = exact_riemann([1.0, 0.0, 1.0], [0.125, 0.0, 0.1], 1.4).unwrap();
        assert_relative_eq!(sod.p_star, 0.30313, epsilon = 1e-5);
        assert_relative_eq!(sod.u_star, 0.92745, epsilon = 1e-5);
        assert_eq!(sod.sample(-1e3), [1.0, 0.0, 1.0]);
        assert_eq!(sod.sample(1e3), [0.125, 0.0, 0.1]);
        let sym = exact_riemann([1.0, 0.5, 1.0], [1.0, -0.5, 1.0], 1.4).unwrap();
        assert!(sym.u_star.abs() < 1e-14);
        assert!(exact_riemann([1.0, -10.0, 0.1], [1.0, 10.0, 0.1], 1.4).is_err());
    }

    #[test]
    fn audit_examples() {
        assert_eq!(conservation_audit(&[2.0, 2.0, 2.0], true), Audit::Drift(0.0));
        assert_eq!(conservation_audit(&[2.0, 2.0], false), Audit::Declined);
        match conservation_audit(&[2.0, 2.002, 1.999], true) {
            Audit::Drift(d) => assert_relative_eq!(d, 1e-3, epsilon = 1e-12),
            Audit::Declined => panic!(),
        }
    }
}
