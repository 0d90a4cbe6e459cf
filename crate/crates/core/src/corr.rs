//! Covering correspondences Cov₀ of a polynomial (the graph of f(w) = f(z)
//! with the identity component deleted), the correspondences 𝓕 = J∘Cov₀^P
//! and 𝓖 = Cov₀^Q∘J built from a conformal involution J, and breadth-first
//! orbit sampling.

use crate::moebius::{Complex, MoebiusMap, Sphere};
use crate::poly::{Polynomial, PolyError, RootSet};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorrError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("matrix is not an involution (residual {0:.3e})")]
    NotInvolution(f64),
}

/// Threshold beyond which Cov₀ is evaluated in the swapped coordinate
/// x = 1/w to avoid overflow near poles of J.
const SWAP_COORD_NORM: f64 = 1e6;

/// A Möbius involution; the canonical instance is J(z) = 1/z.
#[derive(Debug, Clone, Copy)]
pub struct Involution {
    pub m: MoebiusMap,
}

impl Involution {
    pub fn new(m: MoebiusMap) -> Result<Self, CorrError> {
        let res = m.compose(&m).proj_dist(&MoebiusMap::identity());
        if res > 1e-12 {
            return Err(CorrError::NotInvolution(res));
        }
        Ok(Involution { m })
    }

    /// J(z) = 1/z.
    pub fn reciprocal() -> Self {
        Involution {
            m: MoebiusMap::new(
                Complex::new(0.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0),
            ),
        }
    }

    pub fn apply(&self, z: Sphere) -> Sphere {
        self.m.apply(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// 𝓕 = J ∘ Cov₀^P.
    JAfterCov,
    /// 𝓖 = Cov₀^Q ∘ J.
    CovAfterJ,
}

/// A (d:d) correspondence built from a degree d+1 polynomial and an
/// involution.
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub poly: Polynomial,
    pub j: Involution,
    pub orientation: Orientation,
}

/// Images of z under Cov₀^f: the deg(f) − 1 roots (with multiplicity) of
/// the polynomial (f(w) − f(z)) / (w − z), deflated by exact synthetic
/// division. For finite z every image is finite.
pub fn cov0_images(f: &Polynomial, z: Complex, tol: f64) -> Result<RootSet, CorrError> {
    let set = cov0_sphere(f, Sphere::Finite(z), tol, None)?;
    Ok(RootSet {
        points: set
            .points
            .into_iter()
            .map(|(p, m)| (p.unwrap_finite(), m))
            .collect(),
    })
}

/// The deflated polynomial (f(w) − f(z))/(w − z) itself.
pub fn cov0_polynomial(f: &Polynomial, z: Complex) -> Polynomial {
    let mut shifted = f.clone();
    let fz = f.eval(z);
    shifted.coeffs[0] -= fz;
    let (q, _rem) = shifted.divide_linear(z);
    q
}

fn cov0_sphere(
    f: &Polynomial,
    z: Sphere,
    tol: f64,
    seed: Option<&[Complex]>,
) -> Result<SphereSet, PolyError> {
    let deg = f.degree();
    match z {
        Sphere::Infinity => Ok(SphereSet {
            points: vec![(Sphere::Infinity, deg - 1)],
        }),
        Sphere::Finite(v) if v.norm() > SWAP_COORD_NORM => {
            // Work with x = 1/w: the reversed polynomial
            // x^deg (f(1/x) − f(v)) has roots 1/w over Cov^f(v); deflate
            // the identity branch at x = 1/v.
            let fv = f.eval(v);
            if !fv.re.is_finite() || !fv.im.is_finite() {
                return Ok(SphereSet {
                    points: vec![(Sphere::Infinity, deg - 1)],
                });
            }
            let mut rev: Vec<Complex> = f.coeffs.iter().rev().copied().collect();
            rev[deg] -= fv; // constant coefficient of f becomes x^deg term
            let p = Polynomial::new(rev);
            let (q, _) = p.divide_linear(1.0 / v);
            let roots = q.roots_with_seed(tol, seed)?;
            Ok(SphereSet {
                points: roots
                    .points
                    .into_iter()
                    .map(|(x, m)| {
                        if x.norm() < 1e-300 {
                            (Sphere::Infinity, m)
                        } else {
                            (Sphere::Finite(1.0 / x), m)
                        }
                    })
                    .collect(),
            })
        }
        Sphere::Finite(v) => {
            let q = cov0_polynomial(f, v);
            let roots = q.roots_with_seed(tol, seed)?;
            Ok(SphereSet {
                points: roots
                    .points
                    .into_iter()
                    .map(|(w, m)| (Sphere::Finite(w), m))
                    .collect(),
            })
        }
    }
}

/// Multiset of sphere points with multiplicities.
#[derive(Debug, Clone)]
pub struct SphereSet {
    pub points: Vec<(Sphere, usize)>,
}

impl SphereSet {
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }

    pub fn finite_expanded(&self) -> Vec<Complex> {
        let mut out = Vec::new();
        for (p, m) in &self.points {
            if let Sphere::Finite(z) = p {
                for _ in 0..*m {
                    out.push(*z);
                }
            }
        }
        out
    }

    fn map(self, f: impl Fn(Sphere) -> Sphere) -> SphereSet {
        SphereSet {
            points: self.points.into_iter().map(|(p, m)| (f(p), m)).collect(),
        }
    }
}

impl Correspondence {
    pub fn new(poly: Polynomial, j: Involution, orientation: Orientation) -> Self {
        Correspondence {
            poly,
            j,
            orientation,
        }
    }

    /// Forward images of z.
    pub fn images(&self, z: Sphere, tol: f64) -> Result<SphereSet, CorrError> {
        match self.orientation {
            Orientation::JAfterCov => {
                let cov = cov0_sphere(&self.poly, z, tol, None)?;
                Ok(cov.map(|p| self.j.apply(p)))
            }
            Orientation::CovAfterJ => Ok(cov0_sphere(&self.poly, self.j.apply(z), tol, None)?),
        }
    }

    /// Preimages of w, via the symmetry of Cov₀.
    pub fn preimages(&self, w: Sphere, tol: f64) -> Result<SphereSet, CorrError> {
        match self.orientation {
            Orientation::CovAfterJ => {
                let cov = cov0_sphere(&self.poly, w, tol, None)?;
                Ok(cov.map(|p| self.j.apply(p)))
            }
            Orientation::JAfterCov => Ok(cov0_sphere(&self.poly, self.j.apply(w), tol, None)?),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitNode {
    pub point: Sphere,
    pub parent: Option<usize>,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub struct OrbitTree {
    pub nodes: Vec<OrbitNode>,
    /// Set when the node cap was hit before the requested depth.
    pub truncated: bool,
}

const MERGE_TOL: f64 = 1e-10;

/// Breadth-first expansion of the forward images up to `depth`, merging
/// duplicate points at tolerance 1e−10 and capping the node count.
pub fn orbit_tree(
    corr: &Correspondence,
    z0: Complex,
    depth: usize,
    cap: usize,
    tol: f64,
) -> Result<OrbitTree, CorrError> {
    let mut tree = OrbitTree {
        nodes: vec![OrbitNode {
            point: Sphere::Finite(z0),
            parent: None,
            depth: 0,
        }],
        truncated: false,
    };
    let mut dedup = PointIndex::new();
    dedup.insert(Sphere::Finite(z0));

    let mut frontier = vec![0usize];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &idx in &frontier {
            let point = tree.nodes[idx].point;
            let images = corr.images(point, tol)?;
            for (child, _m) in images.points {
                if !dedup.insert(child) {
                    continue;
                }
                if tree.nodes.len() >= cap {
                    tree.truncated = true;
                    return Ok(tree);
                }
                tree.nodes.push(OrbitNode {
                    point: child,
                    parent: Some(idx),
                    depth: tree.nodes[idx].depth + 1,
                });
                next.push(tree.nodes.len() - 1);
            }
        }
        frontier = next;
    }
    Ok(tree)
}

/// Quantized spatial hash for the orbit-tree dedup.
struct PointIndex {
    cells: HashMap<(i64, i64), Vec<Complex>>,
    has_infinity: bool,
}

impl PointIndex {
    fn new() -> Self {
        PointIndex {
            cells: HashMap::new(),
            has_infinity: false,
        }
    }

    /// Returns false when an equal point (within MERGE_TOL) was present.
    fn insert(&mut self, p: Sphere) -> bool {
        match p {
            Sphere::Infinity => {
                let fresh = !self.has_infinity;
                self.has_infinity = true;
                fresh
            }
            Sphere::Finite(z) => {
                let key = (
                    (z.re / MERGE_TOL).floor() as i64,
                    (z.im / MERGE_TOL).floor() as i64,
                );
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(cell) = self.cells.get(&(key.0 + dx, key.1 + dy)) {
                            if cell.iter().any(|q| (q - z).norm() < MERGE_TOL) {
                                return false;
                            }
                        }
                    }
                }
                self.cells.entry(key).or_default().push(z);
                true
            }
        }
    }
}
