//! Plain-text triangle mesh format.
//!
//! ```text
//! nv nt nb
//! x y            (nv lines)
//! i j k          (nt lines, 0-based, counterclockwise)
//! i j tag        (nb lines, tag in outflow|inflow|wall)
//! ```
//! Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryTag, EdgeNeighbor, Mesh2D};
use crate::error::{Error, Result};

pub fn load_mesh_2d(path: &Path) -> Result<Mesh2D> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh_2d(&text).map_err(|e| match e {
        Error::Mesh(msg) => Error::mesh(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_mesh_2d(text: &str) -> Result<Mesh2D> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut next_fields = |what: &str, n: usize| -> Result<(usize, Vec<String>)> {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| Error::mesh(format!("unexpected end of file while reading {what}")))?;
        let fields: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if fields.len() != n {
            return Err(Error::mesh(format!(
                "line {lineno}: expected {n} fields for {what}, found {}",
                fields.len()
            )));
        }
        Ok((lineno, fields))
    };

    fn num<T: std::str::FromStr>(lineno: usize, s: &str) -> Result<T> {
        s.parse()
            .map_err(|_| Error::mesh(format!("line {lineno}: cannot parse `{s}`")))
    }

    let (l, header) = next_fields("header", 3)?;
    let nv: usize = num(l, &header[0])?;
    let nt: usize = num(l, &header[1])?;
    let nb: usize = num(l, &header[2])?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, f) = next_fields("vertex", 2)?;
        let x: f64 = num(l, &f[0])?;
        let y: f64 = num(l, &f[1])?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::mesh(format!("line {l}: non-finite coordinate")));
        }
        vertices.push([x, y]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (l, f) = next_fields("triangle", 3)?;
        triangles.push([num(l, &f[0])?, num(l, &f[1])?, num(l, &f[2])?]);
    }
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (l, f) = next_fields("boundary edge", 3)?;
        let tag: BoundaryTag = f[2].parse().map_err(|e: Error| Error::mesh(format!("line {l}: {e}")))?;
        boundary.push((num(l, &f[0])?, num(l, &f[1])?, tag));
    }
    if let Some((l, _)) = lines.next() {
        return Err(Error::mesh(format!("line {l}: trailing data after boundary list")));
    }
    Mesh2D::new(vertices, triangles, &boundary)
}

pub fn write_mesh_2d(mesh: &Mesh2D) -> String {
    let boundary: Vec<_> = mesh.boundary_edges().collect();
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", mesh.vertices.len(), mesh.triangles.len(), boundary.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:e} {:e}", v[0], v[1]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    for (e, tag) in boundary {
        debug_assert!(matches!(e.right, EdgeNeighbor::Boundary(_)));
        let _ = writeln!(s, "{} {} {}", e.vertices[0], e.vertices[1], tag);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "\
4 2 4
0 0
1 0
1 1
0 1   # top left
0 1 2
0 2 3
0 1 wall
1 2 outflow
2 3 wall
3 0 inflow
";

    #[test]
    fn parse_and_roundtrip() {
        let m = parse_mesh_2d(SQUARE).unwrap();
        assert_eq!(m.triangles.len(), 2);
        let again = parse_mesh_2d(&write_mesh_2d(&m)).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn bad_tag_and_truncation() {
        let bad = SQUARE.replace("outflow", "periodic");
        assert!(parse_mesh_2d(&bad).unwrap_err().to_string().contains("periodic"));
        let cut: String = SQUARE.lines().take(6).collect::<Vec<_>>().join("\n");
        assert!(parse_mesh_2d(&cut).is_err());
    }

    #[test]
    fn duplicate_triangle_is_rejected() {
        let dup = "3 2 3\n0 0\n1 0\n0 1\n0 1 2\n1 2 0\n0 1 wall\n1 2 wall\n2 0 wall\n";
        let err = parse_mesh_2d(dup).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn tag_on_interior_edge_is_rejected() {
        let extra = SQUARE.replace("4 2 4", "4 2 5").to_string() + "0 2 wall\n";
        let err = parse_mesh_2d(&extra).unwrap_err().to_string();
        assert!(err.contains("interior"), "{err}");
    }
}
