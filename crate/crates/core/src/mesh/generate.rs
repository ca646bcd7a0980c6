//! Mesh generators for the built-in 2D cases.

use std::collections::HashSet;
use std::f64::consts::PI;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::{dist, signed_area, BoundaryTag, Mesh2D};
use crate::error::{Error, Result};

/// Disk of radius `radius` built from `rings` concentric rings; ring `i` holds
/// `6 i` vertices, giving `6 rings^2` triangles of near-uniform size.
pub fn disk_rings(radius: f64, rings: usize, tag: BoundaryTag) -> Result<Mesh2D> {
    if rings == 0 || !(radius > 0.0) {
        return Err(Error::config("disk mesh needs radius > 0 and at least one ring"));
    }
    let mut vertices = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize];
    for i in 1..=rings {
        ring_start.push(vertices.len());
        let r = radius * i as f64 / rings as f64;
        let m = 6 * i;
        for k in 0..m {
            let th = 2.0 * PI * k as f64 / m as f64;
            vertices.push([r * th.cos(), r * th.sin()]);
        }
    }
    let ring_vertex = |i: usize, k: usize| -> usize {
        if i == 0 {
            0
        } else {
            ring_start[i] + k % (6 * i)
        }
    };
    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for i in 1..=rings {
        for s in 0..6 {
            for j in 0..i {
                let inner = ring_vertex(i - 1, s * (i - 1) + j);
                triangles.push([inner, ring_vertex(i, s * i + j), ring_vertex(i, s * i + j + 1)]);
                if j + 1 < i {
                    triangles.push([
                        inner,
                        ring_vertex(i, s * i + j + 1),
                        ring_vertex(i - 1, s * (i - 1) + j + 1),
                    ]);
                }
            }
        }
    }
    let boundary: Vec<_> = (0..6 * rings)
        .map(|k| (ring_vertex(rings, k), ring_vertex(rings, k + 1), tag))
        .collect();
    Mesh2D::new(vertices, triangles, &boundary)
}

/// Quality triangulation of a simple polygon with target edge length `h`.
///
/// `corners` are listed counterclockwise; side `i` runs from corner `i` to
/// corner `i + 1` and carries `tags[i]`.
pub fn polygon(corners: &[[f64; 2]], tags: &[BoundaryTag], h: f64) -> Result<Mesh2D> {
    if corners.len() < 3 || tags.len() != corners.len() {
        return Err(Error::config("polygon needs at least 3 corners and one tag per side"));
    }
    if !(h > 0.0) {
        return Err(Error::config("polygon mesh size must be positive"));
    }
    let n = corners.len();
    let mut points = Vec::new();
    let mut segments = Vec::new();
    for i in 0..n {
        let a = corners[i];
        let b = corners[(i + 1) % n];
        let pieces = (dist(a, b) / h).ceil().max(1.0) as usize;
        for k in 0..pieces {
            let t = k as f64 / pieces as f64;
            points.push(Point2::new(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])));
        }
    }
    for i in 0..points.len() {
        segments.push([i, (i + 1) % points.len()]);
    }
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(points, segments)
        .map_err(|e| Error::mesh(format!("polygon triangulation failed: {e:?}")))?;
    let params = RefinementParameters::<f64>::new()
        .exclude_outer_faces(true)
        .with_angle_limit(AngleLimit::from_deg(28.0))
        .with_max_allowed_area(0.5 * h * h)
        .with_max_additional_vertices(50_000_000);
    let result = cdt.refine(params);
    let excluded: HashSet<_> = result.excluded_faces.iter().copied().collect();

    let vertices: Vec<[f64; 2]> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let [a, b, c] = face.vertices().map(|v| v.fix().index());
        if signed_area(vertices[a], vertices[b], vertices[c]) > 0.0 {
            triangles.push([a, b, c]);
        } else {
            triangles.push([a, c, b]);
        }
    }

    // Boundary edges appear in exactly one triangle; tag each by the closest side.
    let mut count = std::collections::HashMap::new();
    for t in &triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *count.entry([a.min(b), a.max(b)]).or_insert(0usize) += 1;
        }
    }
    let mut boundary = Vec::new();
    for t in &triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if count[&[a.min(b), a.max(b)]] != 1 {
                continue;
            }
            let pa = vertices[a];
            let pb = vertices[b];
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let side = (0..n)
                .min_by(|&i, &j| {
                    let di = segment_distance(mid, corners[i], corners[(i + 1) % n]);
                    let dj = segment_distance(mid, corners[j], corners[(j + 1) % n]);
                    di.total_cmp(&dj)
                })
                .unwrap_or(0);
            boundary.push((a, b, tags[side]));
        }
    }
    Mesh2D::new(vertices, triangles, &boundary)
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}
