//! Plain-text mesh format.
//!
//! ```text
//! V E T
//! x y bflag      (V lines, bflag 1 for boundary vertices)
//! v0 v1 v2       (T lines, counterclockwise)
//! ```
//!
//! Blank lines and lines starting with `#` are skipped. Coordinates are
//! written in shortest round-trip form, so write followed by read is exact.
//! Refinement edges are not stored; a loaded mesh starts from longest-edge
//! bisection data like any freshly built mesh.

use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, Point};
use crate::error::{Error, Result};

impl Mesh {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.n_vertices(), self.n_edges(), self.n_triangles());
        for (v, p) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "{} {} {}", p.x, p.y, u8::from(self.boundary_vertex[v]));
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(s, "{a} {b} {c}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (line, header) = lines.next().ok_or_else(|| parse_error(1, "missing header"))?;
        let [nv, ne, nt] = fields::<usize, 3>(line, header)?;

        let mut vertices = Vec::new();
        let mut flags = Vec::new();
        for _ in 0..nv {
            let (line, l) = lines
                .next()
                .ok_or_else(|| parse_error(line, "fewer vertex lines than announced"))?;
            let [x, y, flag] = fields::<f64, 3>(line, l)?;
            if !x.is_finite() || !y.is_finite() {
                return Err(parse_error(line, "non-finite coordinate"));
            }
            let flag = if flag == 0.0 {
                false
            } else if flag == 1.0 {
                true
            } else {
                return Err(parse_error(line, "boundary flag must be 0 or 1"));
            };
            vertices.push(Point::new(x, y));
            flags.push((line, flag));
        }

        let mut triangles = Vec::new();
        for _ in 0..nt {
            let (line, l) = lines
                .next()
                .ok_or_else(|| parse_error(line, "fewer triangle lines than announced"))?;
            triangles.push(fields::<usize, 3>(line, l)?);
        }
        if let Some((line, _)) = lines.next() {
            return Err(parse_error(line, "unexpected trailing content"));
        }

        let mesh = Mesh::new(vertices, triangles)?;
        if mesh.n_edges() != ne {
            return Err(parse_error(
                1,
                &format!("header announces {ne} edges, triangulation has {}", mesh.n_edges()),
            ));
        }
        for (v, (line, flag)) in flags.into_iter().enumerate() {
            if mesh.is_boundary_vertex(v) != flag {
                return Err(parse_error(line, "boundary flag disagrees with the topology"));
            }
        }
        Ok(mesh)
    }
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, mesh.to_text())?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    Mesh::from_text(&std::fs::read_to_string(path)?)
}

fn parse_error(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn fields<T: std::str::FromStr, const N: usize>(line: usize, text: &str) -> Result<[T; N]> {
    let mut it = text.split_whitespace();
    let mut out = Vec::with_capacity(N);
    for _ in 0..N {
        let tok = it
            .next()
            .ok_or_else(|| parse_error(line, &format!("expected {N} fields")))?;
        let value = tok
            .parse()
            .map_err(|_| parse_error(line, &format!("cannot parse `{tok}`")))?;
        out.push(value);
    }
    if it.next().is_some() {
        return Err(parse_error(line, &format!("expected {N} fields")));
    }
    out.try_into().map_err(|_| parse_error(line, "internal field count"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = Mesh::l_shape().refine_nvb(&[0, 3]).refine_uniform();
        let back = Mesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.to_text(), m.to_text());
    }

    #[test]
    fn square_text() {
        let text = Mesh::unit_square().to_text();
        assert_eq!(text, "4 5 2\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2\n0 2 3\n");
    }

    #[test]
    fn rejects_malformed_input() {
        let bad = [
            "",
            "4 5",
            "4 5 2\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2\n",
            "4 6 2\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2\n0 2 3\n",
            "4 5 2\n0 0 1\n1 0 1\n1 1 0\n0 1 1\n0 1 2\n0 2 3\n",
            "4 5 2\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2\n0 2 9\n",
            "4 5 2\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2\n0 2 3\n7\n",
            "4 5 2\nnan 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2\n0 2 3\n",
            "4 5 2\n0 0 2\n1 0 1\n1 1 1\n0 1 1\n0 1 2\n0 2 3\n",
            "99999999999999999 5 2\n",
        ];
        for text in bad {
            assert!(Mesh::from_text(text).is_err(), "accepted {text:?}");
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# square\n4 5 2\n\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n# triangles\n0 1 2\n0 2 3\n";
        assert_eq!(Mesh::from_text(text).unwrap(), Mesh::unit_square());
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("plategoal-mesh-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("l.mesh");
        write_mesh(&Mesh::l_shape(), &path).unwrap();
        assert_eq!(read_mesh(&path).unwrap(), Mesh::l_shape());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
