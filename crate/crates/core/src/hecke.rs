//! The Hecke group 𝓗_{d+1} = ⟨σ, ρ | σ² = ρ^{d+1} = 1⟩ acting on the unit
//! disc: labeled fundamental data, group words and the involution-axis
//! tessellation by ideal (d+1)-gons.

use crate::moebius::{Complex, Geodesic, MoebiusMap};
use std::collections::BTreeSet;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeckeError {
    #[error("degree d = {0} outside the supported range 2..=8")]
    DegreeOutOfRange(usize),
}

/// Closed ideal polygon, vertices on the unit circle in counter-clockwise
/// order.
#[derive(Debug, Clone)]
pub struct IdealPolygon {
    pub vertices: Vec<Complex>,
}

impl IdealPolygon {
    pub fn transform(&self, m: &MoebiusMap) -> IdealPolygon {
        IdealPolygon {
            vertices: self.vertices.iter().map(|v| m.apply_finite(*v)).collect(),
        }
    }

    pub fn sides(&self) -> Vec<Geodesic> {
        let n = self.vertices.len();
        (0..n)
            .map(|j| Geodesic::new(self.vertices[j], self.vertices[(j + 1) % n]))
            .collect()
    }

    /// Membership test against the side geodesics, with a known interior
    /// reference point fixing the side signs.
    pub fn contains_with_ref(&self, z: Complex, interior: Complex, tol: f64) -> bool {
        self.sides().iter().all(|g| {
            let sc = g.side(interior);
            g.side(z) * sc.signum() > -tol
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    Sigma,
    Rho,
    RhoInv,
}

/// Word over {σ, ρ, ρ⁻¹}; the leftmost letter acts last.
#[derive(Debug, Clone, Default)]
pub struct GroupWord {
    pub letters: Vec<Letter>,
}

impl GroupWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        GroupWord { letters }
    }
}

/// Region of the Π-partition of the disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Pi,
    /// 𝔻_j, the component of 𝔻 ∖ Π beyond side C_j, j ∈ 1..=d+1.
    D(usize),
}

/// Precomputed generators and fundamental data of 𝓗_{d+1}.
#[derive(Debug, Clone)]
pub struct HeckeGroup {
    pub d: usize,
    pub omega: Complex,
    pub sigma: MoebiusMap,
    pub rho: MoebiusMap,
    /// α_j = σ∘ρ^j, j = 1..d (index 0 unused).
    pub alpha: Vec<MoebiusMap>,
    /// β_j = ρ^j∘σ, j = 1..d (index 0 unused).
    pub beta: Vec<MoebiusMap>,
    pub pi: IdealPolygon,
    /// Sides C_1..C_{d+1}; C_j joins ω^{j−1} to ω^j (index 0 unused).
    pub sides: Vec<Geodesic>,
    /// In-disc fixed point of σ, lying on C_1.
    pub fix_sigma: Complex,
    /// Distance between fix_sigma and the point of C_1 closest to the
    /// origin; the two constructions of σ's center must agree.
    pub midpoint_residual: f64,
}

/// Builds 𝓗_{d+1} with σ given by its explicit Möbius formula
/// σ(z) = (2zω − ω(1+ω)) / (z(1+ω) − 2ω).
pub fn build_hecke(d: usize) -> Result<HeckeGroup, HeckeError> {
    if !(2..=8).contains(&d) {
        return Err(HeckeError::DegreeOutOfRange(d));
    }
    let omega = Complex::from_polar(1.0, 2.0 * PI / (d as f64 + 1.0));
    let one = Complex::new(1.0, 0.0);
    let sigma = MoebiusMap::new(
        2.0 * omega,
        -omega * (one + omega),
        one + omega,
        -2.0 * omega,
    );
    let rho = MoebiusMap::rotation(2.0 * PI / (d as f64 + 1.0));

    let mut alpha = vec![MoebiusMap::identity()];
    let mut beta = vec![MoebiusMap::identity()];
    for j in 1..=d {
        let rj = rho.power(j);
        alpha.push(sigma.compose(&rj));
        beta.push(rj.compose(&sigma));
    }

    let vertices: Vec<Complex> = (0..=d)
        .map(|k| Complex::from_polar(1.0, 2.0 * PI * k as f64 / (d as f64 + 1.0)))
        .collect();
    let pi = IdealPolygon { vertices };
    let mut sides = vec![Geodesic::new(one, -one)]; // placeholder at index 0
    for j in 1..=d + 1 {
        let p = pi.vertices[j - 1];
        let q = pi.vertices[j % (d + 1)];
        sides.push(Geodesic::new(p, q));
    }

    // In-disc fixed point of σ versus the arc point of C_1 closest to the
    // origin; these must coincide by construction of σ.
    let cls = sigma.classify();
    let mut fix_sigma = Complex::new(0.0, 0.0);
    let mut best = f64::INFINITY;
    for fp in &cls.fixed_points {
        if let crate::moebius::Sphere::Finite(z) = fp {
            if z.norm() < best {
                best = z.norm();
                fix_sigma = *z;
            }
        }
    }
    let (c1_center, c1_radius) = sides[1].ortho_circle().expect("C_1 is never a diameter");
    let closest = c1_center - c1_center / c1_center.norm() * c1_radius;
    let midpoint_residual = (closest - fix_sigma).norm();

    Ok(HeckeGroup {
        d,
        omega,
        sigma,
        rho,
        alpha,
        beta,
        pi,
        sides,
        fix_sigma,
        midpoint_residual,
    })
}

impl HeckeGroup {
    /// Matrix of a word, leftmost letter outermost.
    pub fn word_matrix(&self, w: &GroupWord) -> MoebiusMap {
        let mut m = MoebiusMap::identity();
        for letter in &w.letters {
            let g = match letter {
                Letter::Sigma => self.sigma,
                Letter::Rho => self.rho,
                Letter::RhoInv => self.rho.inverse(),
            };
            m = m.compose(&g);
        }
        m
    }

    pub fn evaluate_word(&self, w: &GroupWord, z: Complex) -> Complex {
        self.word_matrix(w).apply_finite(z)
    }

    /// Membership in the closed fundamental triangle bounded by C_1 and the
    /// radial segments [0,1), [0,ω).
    pub fn fundamental_domain_contains(&self, z: Complex) -> bool {
        if z.norm() >= 1.0 {
            return false;
        }
        let tol = 1e-12;
        let sector = 2.0 * PI / (self.d as f64 + 1.0);
        let arg = if z.norm() < tol { 0.0 } else { z.arg() };
        let in_sector = (-tol..=sector + tol).contains(&arg);
        in_sector && self.sides[1].side(z) <= tol
    }

    /// Which closed region of the Π-partition contains z; boundary ties go
    /// to Π, then to the lower 𝔻-index.
    pub fn region_index(&self, z: Complex) -> Region {
        let tol = 1e-12;
        for j in 1..=self.d + 1 {
            if self.sides[j].side(z) > tol {
                return Region::D(j);
            }
        }
        Region::Pi
    }

    /// Index j of the piece 𝔻̄_j containing z, preferring the cap over Π on
    /// its shared boundary; `None` when z lies strictly inside Π.
    pub fn cap_index(&self, z: Complex, tol: f64) -> Option<usize> {
        let mut best_j = 0;
        let mut best_side = f64::NEG_INFINITY;
        for j in 1..=self.d + 1 {
            let s = self.sides[j].side(z);
            if s > best_side {
                best_side = s;
                best_j = j;
            }
        }
        if best_side < -tol {
            None
        } else {
            Some(best_j)
        }
    }

    /// Translates of Π under reduced words of length ≤ depth in the
    /// side reflections ρ^j∘σ∘ρ^{−j}, deduplicated by vertex angles.
    pub fn tessellation(&self, depth: usize) -> Vec<IdealPolygon> {
        self.tessellation_with_maps(depth)
            .into_iter()
            .map(|(_, p)| p)
            .collect()
    }

    /// Same as `tessellation`, keeping the group element that produced each
    /// polygon from Π.
    pub fn tessellation_with_maps(&self, depth: usize) -> Vec<(MoebiusMap, IdealPolygon)> {
        let refl: Vec<MoebiusMap> = (0..=self.d)
            .map(|j| {
                let rj = self.rho.power(j);
                rj.compose(&self.sigma).compose(&rj.inverse())
            })
            .collect();

        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        seen.insert(polygon_key(&self.pi));
        out.push((MoebiusMap::identity(), self.pi.clone()));

        // Frontier of (matrix, last generator index).
        let mut frontier: Vec<(MoebiusMap, usize)> = vec![(MoebiusMap::identity(), usize::MAX)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (m, last) in &frontier {
                for (j, g) in refl.iter().enumerate() {
                    if j == *last {
                        continue;
                    }
                    let m2 = m.compose(g);
                    let poly = self.pi.transform(&m2);
                    if seen.insert(polygon_key(&poly)) {
                        out.push((m2, poly));
                    }
                    next.push((m2, j));
                }
            }
            frontier = next;
        }
        out
    }
}

/// Dedup key: sorted vertex angles quantized at 1e−8 radians, with the
/// 0 ↔ 2π seam folded.
fn polygon_key(p: &IdealPolygon) -> Vec<i64> {
    let n = (2.0 * PI / 1e-8).round() as i64;
    let mut key: Vec<i64> = p
        .vertices
        .iter()
        .map(|v| {
            let a = v.arg().rem_euclid(2.0 * PI);
            ((a / 1e-8).round() as i64).rem_euclid(n)
        })
        .collect();
    key.sort_unstable();
    key
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::{MoebiusKind, Sphere};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_out_of_range_degree() {
        assert!(build_hecke(1).is_err());
        assert!(build_hecke(9).is_err());
    }

    #[test]
    fn d2_has_three_sides_and_omega() {
        let g = build_hecke(2).unwrap();
        assert_eq!(g.pi.vertices.len(), 3);
        assert!((g.omega - Complex::from_polar(1.0, 2.0 * PI / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn sigma_swaps_endpoints_of_c1() {
        for d in 2..=8 {
            let g = build_hecke(d).unwrap();
            assert!((g.sigma.apply_finite(c(1.0, 0.0)) - g.omega).norm() < 1e-12);
            assert!((g.sigma.apply_finite(g.omega) - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn group_relations_hold() {
        for d in 2..=6 {
            let g = build_hecke(d).unwrap();
            assert!(g.sigma.compose(&g.sigma).is_identity(1e-10));
            assert!(g.rho.power(d + 1).is_identity(1e-10));
        }
    }

    #[test]
    fn sigma_center_is_midpoint_of_c1() {
        for d in 2..=8 {
            let g = build_hecke(d).unwrap();
            assert!(
                g.midpoint_residual < 1e-9,
                "d = {d}: sigma center vs arc midpoint residual {}",
                g.midpoint_residual
            );
        }
    }

    #[test]
    fn parabolic_generators_fix_1_and_omega() {
        for d in 2..=6 {
            let g = build_hecke(d).unwrap();
            for (m, fp) in [(&g.alpha[1], c(1.0, 0.0)), (&g.alpha[d], g.omega)] {
                let cls = m.classify();
                assert_eq!(cls.kind, MoebiusKind::Parabolic, "d = {d}");
                match cls.fixed_points[0] {
                    Sphere::Finite(z) => assert!((z - fp).norm() < 1e-10),
                    Sphere::Infinity => panic!("finite fixed point expected"),
                }
            }
        }
    }

    #[test]
    fn alpha3_is_parabolic_and_alpha2_hyperbolic_for_d3() {
        let g = build_hecke(3).unwrap();
        assert_eq!(g.alpha[2].classify().kind, MoebiusKind::Hyperbolic);
        assert!((g.alpha[3].apply_finite(g.omega) - g.omega).norm() < 1e-10);
        assert!((g.alpha[1].apply_finite(c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn sigma_conjugates_alpha_j_to_inverse_of_alpha_d1mj() {
        for d in 2..=6 {
            let g = build_hecke(d).unwrap();
            for j in 1..=d {
                let lhs = g.sigma.compose(&g.alpha[j]).compose(&g.sigma.inverse());
                let rhs = g.alpha[d + 1 - j].inverse();
                assert!(
                    lhs.proj_dist(&rhs) < 1e-10,
                    "d = {d}, j = {j}: residual {}",
                    lhs.proj_dist(&rhs)
                );
            }
        }
    }

    #[test]
    fn word_evaluation() {
        let g = build_hecke(2).unwrap();
        let z = c(0.31, -0.12);
        assert!((g.evaluate_word(&GroupWord::default(), z) - z).norm() < 1e-15);

        // σρ = α_1 fixes 1.
        let w = GroupWord::new(vec![Letter::Sigma, Letter::Rho]);
        assert!((g.evaluate_word(&w, c(1.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-10);

        // Associativity: (σρ)² as one word equals applying σρ twice.
        let w2 = GroupWord::new(vec![Letter::Sigma, Letter::Rho, Letter::Sigma, Letter::Rho]);
        let once = g.evaluate_word(&w, z);
        let twice = g.evaluate_word(&w, once);
        assert!((g.evaluate_word(&w2, z) - twice).norm() < 1e-12);
    }

    #[test]
    fn fundamental_domain_membership() {
        let g = build_hecke(2).unwrap();
        assert!(g.fundamental_domain_contains(c(0.0, 0.0)));
        let mid = g.sides[1].point(0.5);
        assert!(g.fundamental_domain_contains(mid));
        // Rotating an interior sample out of the sector leaves the triangle.
        let interior = c(0.2, 0.1);
        assert!(g.fundamental_domain_contains(interior));
        assert!(!g.fundamental_domain_contains(g.rho.apply_finite(interior)));
    }

    #[test]
    fn region_labels() {
        let g = build_hecke(2).unwrap();
        assert_eq!(g.region_index(c(0.0, 0.0)), Region::Pi);
        let dir = Complex::from_polar(1.0, PI / 3.0);
        let z = dir * 0.99;
        assert_eq!(g.region_index(z), Region::D(1));
        assert_eq!(g.region_index(g.rho.apply_finite(z)), Region::D(2));
    }

    #[test]
    fn alpha_j_maps_cap_away_from_d1() {
        // α_j carries 𝔻_{d+2−j} onto 𝔻 ∖ closure(𝔻_1).
        for d in 2..=5 {
            let g = build_hecke(d).unwrap();
            for j in 1..=d {
                let src = d + 2 - j;
                let side = &g.sides[src];
                let (cc, rr) = side.ortho_circle().unwrap();
                let mut tested = 0;
                for k in 0..400 {
                    // Samples inside the cap beyond C_src.
                    let t = (k % 20) as f64 / 19.0;
                    let s = 0.05 + 0.9 * ((k / 20) as f64 / 19.0);
                    let on_arc = side.point(t);
                    let z = on_arc + (cc / cc.norm()) * (rr * 0.002 * s);
                    if z.norm() >= 1.0 || g.region_index(z) != Region::D(src) {
                        continue;
                    }
                    tested += 1;
                    let w = g.alpha[j].apply_finite(z);
                    assert_ne!(g.region_index(w), Region::D(1), "d={d} j={j}");
                }
                assert!(tested > 100, "d={d} j={j}: too few cap samples");
            }
        }
    }

    #[test]
    fn tessellation_counts_and_ideal_vertices() {
        for d in 2..=3 {
            let g = build_hecke(d).unwrap();
            assert_eq!(g.tessellation(0).len(), 1);
            assert_eq!(g.tessellation(1).len(), 1 + (d + 1));
            for poly in g.tessellation(2) {
                for v in &poly.vertices {
                    assert!((v.norm() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn tessellation_is_monotone_in_depth() {
        let g = build_hecke(2).unwrap();
        let keys =
            |polys: &[IdealPolygon]| -> BTreeSet<Vec<i64>> { polys.iter().map(polygon_key).collect() };
        let t1 = keys(&g.tessellation(1));
        let t2 = keys(&g.tessellation(2));
        assert!(t1.is_subset(&t2));
    }

    #[test]
    fn tessellation_polygons_have_disjoint_interiors() {
        for d in 2..=3 {
            let g = build_hecke(d).unwrap();
            let tiles = g.tessellation_with_maps(2);
            // Interior samples of Π: origin pulled toward each vertex.
            let mut base = vec![c(0.0, 0.0)];
            for v in &g.pi.vertices {
                for m in 1..=3 {
                    base.push(*v * (m as f64 / 4.0) * 0.9);
                }
            }
            for (i, (mi, _)) in tiles.iter().enumerate() {
                for (k, s) in base.iter().enumerate() {
                    let z = mi.apply_finite(*s);
                    for (l, (ml, q)) in tiles.iter().enumerate() {
                        if l != i {
                            let interior = ml.apply_finite(c(0.0, 0.0));
                            assert!(
                                !q.contains_with_ref(z, interior, 1e-9),
                                "d={d}: polygon {l} contains interior sample {k} of {i}"
                            );
                        }
                    }
                }
            }
        }
    }
}
