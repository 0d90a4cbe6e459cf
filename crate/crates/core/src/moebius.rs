//! Möbius transformations on the Riemann sphere, disc geodesics and the
//! trace classification of disc automorphisms.
//!
//! Matrices are determinant-normalized on construction so that equality and
//! trace classification are scale-free.

use num_complex::Complex64;

pub type Complex = Complex64;

/// Tolerance below which a matrix counts as degenerate.
const DEGENERATE_DET: f64 = 1e-14;

/// `|tr^2 - 4|` band inside which a map is reported parabolic.
pub const PARABOLIC_TOL: f64 = 1e-9;

/// A point of the Riemann sphere: either a finite complex number or the
/// distinguished point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sphere {
    Finite(Complex),
    Infinity,
}

impl Sphere {
    pub fn finite(re: f64, im: f64) -> Self {
        Sphere::Finite(Complex::new(re, im))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Sphere::Infinity)
    }

    /// Finite value, panicking on the point at infinity.
    pub fn unwrap_finite(&self) -> Complex {
        match self {
            Sphere::Finite(z) => *z,
            Sphere::Infinity => panic!("sphere point at infinity where a finite value was needed"),
        }
    }

    /// Spherical (chordal-metric flavoured) distance, small iff the two
    /// points are close on the sphere, including near infinity.
    pub fn dist(&self, other: &Sphere) -> f64 {
        match (self, other) {
            (Sphere::Infinity, Sphere::Infinity) => 0.0,
            (Sphere::Finite(z), Sphere::Infinity) | (Sphere::Infinity, Sphere::Finite(z)) => {
                1.0 / (1.0 + z.norm())
            }
            (Sphere::Finite(z), Sphere::Finite(w)) => {
                (z - w).norm() / ((1.0 + z.norm()) * (1.0 + w.norm())).sqrt()
            }
        }
    }
}

impl From<Complex> for Sphere {
    fn from(z: Complex) -> Self {
        Sphere::Finite(z)
    }
}

/// z ↦ (az + b)/(cz + d) with |ad − bc| > 0, stored with det = 1.
#[derive(Debug, Clone, Copy)]
pub struct MoebiusMap {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl MoebiusMap {
    /// Builds the map from matrix entries, normalizing the determinant to 1.
    ///
    /// Panics on a degenerate matrix; callers own the non-degeneracy
    /// invariant.
    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        let det = a * d - b * c;
        assert!(
            det.norm() > DEGENERATE_DET,
            "degenerate Moebius matrix, |det| = {:.3e}",
            det.norm()
        );
        let s = det.sqrt();
        MoebiusMap {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
    }

    pub fn identity() -> Self {
        MoebiusMap::new(
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
        )
    }

    /// Rotation z ↦ e^{iφ} z around the origin.
    pub fn rotation(phi: f64) -> Self {
        MoebiusMap::new(
            Complex::from_polar(1.0, phi),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
        )
    }

    /// Disc automorphism sending `p` (|p| < 1) to the origin.
    pub fn disc_to_origin(p: Complex) -> Self {
        MoebiusMap::new(
            Complex::new(1.0, 0.0),
            -p,
            -p.conj(),
            Complex::new(1.0, 0.0),
        )
    }

    /// Evaluation with the sphere conventions m(∞) = a/c and m(−d/c) = ∞.
    pub fn apply(&self, z: Sphere) -> Sphere {
        match z {
            Sphere::Infinity => {
                if self.c.norm() == 0.0 {
                    Sphere::Infinity
                } else {
                    Sphere::Finite(self.a / self.c)
                }
            }
            Sphere::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() == 0.0 {
                    Sphere::Infinity
                } else {
                    Sphere::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Evaluation at a finite point with a finite image; only valid away
    /// from the pole (always the case for disc automorphisms acting on the
    /// closed disc).
    pub fn apply_finite(&self, z: Complex) -> Complex {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Matrix product: `apply(compose(m1, m2), z) = m1(m2(z))`.
    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        MoebiusMap::new(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap::new(self.d, -self.b, -self.c, self.a)
    }

    /// n-fold composition with itself, n ≥ 0.
    pub fn power(&self, n: usize) -> MoebiusMap {
        let mut acc = MoebiusMap::identity();
        for _ in 0..n {
            acc = acc.compose(self);
        }
        acc
    }

    /// Frobenius distance between the determinant-normalized matrices,
    /// minimized over the residual ± sign ambiguity of the normalization.
    pub fn proj_dist(&self, other: &MoebiusMap) -> f64 {
        let d_plus = (self.a - other.a).norm()
            + (self.b - other.b).norm()
            + (self.c - other.c).norm()
            + (self.d - other.d).norm();
        let d_minus = (self.a + other.a).norm()
            + (self.b + other.b).norm()
            + (self.c + other.c).norm()
            + (self.d + other.d).norm();
        d_plus.min(d_minus)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.proj_dist(&MoebiusMap::identity()) < tol
    }

    /// Normalized trace squared, the conjugation invariant driving the
    /// classification.
    pub fn trace_sq(&self) -> Complex {
        let t = self.a + self.d;
        t * t
    }

    pub fn classify(&self) -> MoebiusClass {
        classify_moebius(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoebiusKind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
    Loxodromic,
}

/// Conjugacy class data of a Möbius map: kind and its 1–2 fixed points.
#[derive(Debug, Clone)]
pub struct MoebiusClass {
    pub kind: MoebiusKind,
    pub fixed_points: Vec<Sphere>,
    /// Set when the parabolic verdict came from the `|tr² − 4| < tol` band
    /// rather than an exact discriminant.
    pub borderline_parabolic: bool,
}

/// Classification by normalized trace²; fixed points solved from
/// cz² + (d − a)z − b = 0.
pub fn classify_moebius(m: &MoebiusMap) -> MoebiusClass {
    if m.is_identity(1e-12) {
        return MoebiusClass {
            kind: MoebiusKind::Identity,
            fixed_points: vec![Sphere::Infinity],
            borderline_parabolic: false,
        };
    }
    let t2 = m.trace_sq();
    let dev = (t2 - Complex::new(4.0, 0.0)).norm();
    let parabolic = dev < PARABOLIC_TOL;

    let kind = if parabolic {
        MoebiusKind::Parabolic
    } else if t2.im.abs() < PARABOLIC_TOL {
        if t2.re < 4.0 && t2.re >= 0.0 {
            MoebiusKind::Elliptic
        } else if t2.re > 4.0 {
            MoebiusKind::Hyperbolic
        } else {
            MoebiusKind::Loxodromic
        }
    } else {
        MoebiusKind::Loxodromic
    };

    let fixed_points = fixed_points(m, parabolic);
    MoebiusClass {
        kind,
        fixed_points,
        borderline_parabolic: parabolic && dev > 1e-13,
    }
}

fn fixed_points(m: &MoebiusMap, parabolic: bool) -> Vec<Sphere> {
    if m.c.norm() < DEGENERATE_DET {
        // Affine case: ∞ is fixed, plus b/(d − a) unless a = d.
        let ad = m.a - m.d;
        if ad.norm() < 1e-12 {
            return vec![Sphere::Infinity];
        }
        return vec![Sphere::Finite(m.b / (m.d - m.a) * -1.0), Sphere::Infinity];
    }
    let half = (m.a - m.d) / (2.0 * m.c);
    if parabolic {
        return vec![Sphere::Finite(half)];
    }
    let disc = ((m.a - m.d) * (m.a - m.d) + 4.0 * m.b * m.c).sqrt() / (2.0 * m.c);
    vec![Sphere::Finite(half + disc), Sphere::Finite(half - disc)]
}

/// Hyperbolic geodesic of the unit disc, given by two distinct ideal
/// endpoints on the circle.
#[derive(Debug, Clone, Copy)]
pub struct Geodesic {
    pub p: Complex,
    pub q: Complex,
}

impl Geodesic {
    pub fn new(p: Complex, q: Complex) -> Self {
        assert!(
            (p.norm() - 1.0).abs() < 1e-9 && (q.norm() - 1.0).abs() < 1e-9,
            "geodesic endpoints must be ideal (on the unit circle)"
        );
        assert!((p - q).norm() > 1e-9, "geodesic endpoints must be distinct");
        Geodesic { p, q }
    }

    /// Center and radius of the Euclidean circle through p, q orthogonal to
    /// the unit circle, or `None` in the diameter case p = −q.
    pub fn ortho_circle(&self) -> Option<(Complex, f64)> {
        let denom = 1.0 + (self.p * self.q.conj()).re;
        if denom.abs() < 1e-12 {
            return None;
        }
        let c = (self.p + self.q) / denom;
        let r2 = c.norm_sqr() - 1.0;
        Some((c, r2.max(0.0).sqrt()))
    }

    /// Point on the geodesic arc; t = 0 ↦ p, t = 1 ↦ q.
    pub fn point(&self, t: f64) -> Complex {
        match self.ortho_circle() {
            None => self.p + (self.q - self.p) * t,
            Some((c, r)) => {
                let ap = (self.p - c).arg();
                let aq = (self.q - c).arg();
                // Sweep along the minor arc (the one inside the disc).
                let mut da = aq - ap;
                if da > std::f64::consts::PI {
                    da -= 2.0 * std::f64::consts::PI;
                } else if da < -std::f64::consts::PI {
                    da += 2.0 * std::f64::consts::PI;
                }
                c + Complex::from_polar(r, ap + t * da)
            }
        }
    }

    /// Signed side test: negative on the origin side of the geodesic,
    /// positive in the cap it cuts off, zero on the curve.
    pub fn side(&self, z: Complex) -> f64 {
        match self.ortho_circle() {
            Some((c, r)) => r - (z - c).norm(),
            None => {
                // Diameter through p: positive on the side that the
                // counter-clockwise normal from p→q points away from.
                let dir = self.q - self.p;
                let n = Complex::new(-dir.im, dir.re);
                let s = (z - self.p).re * n.re + (z - self.p).im * n.im;
                -s.signum() * s.abs()
            }
        }
    }
}
