//! Plain-text exchange formats: polylines ("re im" per line, 15 significant
//! digits, blank line between components), tessellation vertex angles (one
//! polygon per line) and orbit-tree edge lists.

use crate::corr::OrbitTree;
use crate::hecke::IdealPolygon;
use crate::moebius::{Complex, Sphere};

pub fn write_polylines(curves: &[Vec<Complex>]) -> String {
    let mut out = String::new();
    for (k, curve) in curves.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        for p in curve {
            out.push_str(&format!("{:.15e} {:.15e}\n", p.re, p.im));
        }
    }
    out
}

pub fn read_polylines(text: &str) -> Vec<Vec<Complex>> {
    let mut curves = Vec::new();
    let mut current = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            if !current.is_empty() {
                curves.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut it = line.split_whitespace();
        if let (Some(re), Some(im)) = (it.next(), it.next()) {
            if let (Ok(re), Ok(im)) = (re.parse(), im.parse()) {
                current.push(Complex::new(re, im));
            }
        }
    }
    if !current.is_empty() {
        curves.push(current);
    }
    curves
}

/// One polygon per line: the vertex angles in radians.
pub fn write_tessellation(polys: &[IdealPolygon]) -> String {
    let mut out = String::new();
    for poly in polys {
        let line: Vec<String> = poly
            .vertices
            .iter()
            .map(|v| format!("{:.15e}", v.arg()))
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// One edge per line: "parent_re parent_im child_re child_im".
pub fn write_orbit_edges(tree: &OrbitTree) -> String {
    let mut out = String::new();
    for node in &tree.nodes {
        let Some(parent) = node.parent else { continue };
        let (Sphere::Finite(p), Sphere::Finite(c)) = (tree.nodes[parent].point, node.point) else {
            continue;
        };
        out.push_str(&format!(
            "{:.15e} {:.15e} {:.15e} {:.15e}\n",
            p.re, p.im, c.re, c.im
        ));
    }
    out
}
