//! B-involutions S = Q∘J∘(Q|_𝔇)⁻¹ for a degree d+1 polynomial Q injective
//! on a J-symmetric Jordan disc 𝔇 (J(z) = 1/z): data validation, evaluation,
//! tile-rank dynamics of the escaping set, and the lift of the partition to
//! the correspondence plane (Ω, K₊, K₋).

use crate::corr::{cov0_images, CorrError};
use crate::moebius::{Complex, Sphere};
use crate::poly::{hausdorff, Polynomial};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BinvError {
    #[error("input outside the closure of U = Q(D)")]
    OutOfDomain,
    #[error("root selection undecidable within the boundary band")]
    Undecidable,
    #[error("root finding failed: {0}")]
    Roots(String),
    #[error("malformed instance file: {0}")]
    Parse(String),
}

impl From<CorrError> for BinvError {
    fn from(e: CorrError) -> Self {
        BinvError::Roots(e.to_string())
    }
}

/// Location of a point relative to a Jordan curve with a tolerance band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Outside,
    Band,
}

/// Jordan disc given by a closed polyline (counter-clockwise); membership
/// is winding-number based with a boundary band of width `band`, served
/// from a precomputed cell grid.
#[derive(Debug, Clone)]
pub struct JordanDisc {
    pub boundary: Vec<Complex>,
    pub band: f64,
    grid: MembershipGrid,
}

impl JordanDisc {
    pub fn new(boundary: Vec<Complex>, band: f64) -> Self {
        assert!(boundary.len() >= 3, "a Jordan polyline needs >= 3 vertices");
        let grid = MembershipGrid::build(&boundary, band);
        JordanDisc {
            boundary,
            band,
            grid,
        }
    }

    /// Circle of `n` vertices; the canonical J-symmetric disc.
    pub fn unit_circle(n: usize, band: f64) -> Self {
        let pts = (0..n)
            .map(|k| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        JordanDisc::new(pts, band)
    }

    pub fn locate(&self, z: Complex) -> Location {
        self.grid.locate(&self.boundary, self.band, z)
    }

    pub fn distance_to_boundary(&self, z: Complex) -> f64 {
        let n = self.boundary.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = self.boundary[i];
            let b = self.boundary[(i + 1) % n];
            best = best.min(segment_distance(z, a, b));
        }
        best
    }
}

fn segment_distance(p: Complex, a: Complex, b: Complex) -> f64 {
    let ab = b - a;
    let denom = ab.norm_sqr();
    let t = if denom == 0.0 {
        0.0
    } else {
        (((p - a).re * ab.re + (p - a).im * ab.im) / denom).clamp(0.0, 1.0)
    };
    (p - (a + ab * t)).norm()
}

fn winding_number(boundary: &[Complex], z: Complex) -> i32 {
    let n = boundary.len();
    let mut winding = 0i32;
    for i in 0..n {
        let a = boundary[i];
        let b = boundary[(i + 1) % n];
        if a.im <= z.im {
            if b.im > z.im && cross(b - a, z - a) > 0.0 {
                winding += 1;
            }
        } else if b.im <= z.im && cross(b - a, z - a) < 0.0 {
            winding -= 1;
        }
    }
    winding
}

fn cross(u: Complex, v: Complex) -> f64 {
    u.re * v.im - u.im * v.re
}

/// Uniform cell grid: cells away from the boundary carry a precomputed
/// verdict, cells near edges fall back to exact tests.
#[derive(Debug, Clone)]
struct MembershipGrid {
    x0: f64,
    y0: f64,
    step: f64,
    nx: usize,
    ny: usize,
    /// 0 = outside, 1 = inside, 2 = near-boundary cell.
    cells: Vec<u8>,
}

impl MembershipGrid {
    fn build(boundary: &[Complex], band: f64) -> Self {
        let mut lo = Complex::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in boundary {
            lo = Complex::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let diam = (hi - lo).norm().max(1e-9);
        let margin = 0.05 * diam + 2.0 * band;
        let x0 = lo.re - margin;
        let y0 = lo.im - margin;
        let nx = 192usize;
        let ny = 192usize;
        let step = ((hi.re - lo.re + 2.0 * margin) / nx as f64)
            .max((hi.im - lo.im + 2.0 * margin) / ny as f64)
            .max(1e-12);

        let mut cells = vec![0u8; nx * ny];
        // Mark cells traversed by edges (with one-cell dilation).
        let n = boundary.len();
        for i in 0..n {
            let a = boundary[i];
            let b = boundary[(i + 1) % n];
            let steps = ((b - a).norm() / step).ceil() as usize + 1;
            for s in 0..=steps {
                let p = a + (b - a) * (s as f64 / steps as f64);
                let cx = ((p.re - x0) / step) as isize;
                let cy = ((p.im - y0) / step) as isize;
                for dx in -1..=1isize {
                    for dy in -1..=1isize {
                        let (ix, iy) = (cx + dx, cy + dy);
                        if ix >= 0 && iy >= 0 && (ix as usize) < nx && (iy as usize) < ny {
                            cells[iy as usize * nx + ix as usize] = 2;
                        }
                    }
                }
            }
        }
        // Classify the remaining cells by their center.
        for iy in 0..ny {
            for ix in 0..nx {
                if cells[iy * nx + ix] == 2 {
                    continue;
                }
                let center = Complex::new(
                    x0 + (ix as f64 + 0.5) * step,
                    y0 + (iy as f64 + 0.5) * step,
                );
                cells[iy * nx + ix] = if winding_number(boundary, center) != 0 {
                    1
                } else {
                    0
                };
            }
        }
        MembershipGrid {
            x0,
            y0,
            step,
            nx,
            ny,
            cells,
        }
    }

    fn locate(&self, boundary: &[Complex], band: f64, z: Complex) -> Location {
        let ix = ((z.re - self.x0) / self.step).floor();
        let iy = ((z.im - self.y0) / self.step).floor();
        if ix < 0.0 || iy < 0.0 || ix as usize >= self.nx || iy as usize >= self.ny {
            return Location::Outside;
        }
        match self.cells[iy as usize * self.nx + ix as usize] {
            0 => Location::Outside,
            1 => Location::Inside,
            _ => {
                // Near-boundary cell: exact distance, then exact winding.
                let mut best = f64::INFINITY;
                let n = boundary.len();
                for i in 0..n {
                    let a = boundary[i];
                    let b = boundary[(i + 1) % n];
                    best = best.min(segment_distance(z, a, b));
                    if best < band {
                        return Location::Band;
                    }
                }
                if winding_number(boundary, z) != 0 {
                    Location::Inside
                } else {
                    Location::Outside
                }
            }
        }
    }
}

/// Validated data of Def.-style B-involution instances: a polynomial Q of
/// degree d+1 and a J-symmetric Jordan disc with pinch set 𝔓 on its
/// boundary.
#[derive(Debug, Clone)]
pub struct BInvolutionData {
    pub q: Polynomial,
    pub disc: JordanDisc,
    pub pinch: Vec<Complex>,
    /// Q(∂D), the boundary of U.
    pub u_boundary: Vec<Complex>,
    /// 𝔖 = Q(𝔓), the singular (pinched) values on ∂U.
    pub singular: Vec<Complex>,
    pub tol: f64,
}

/// Distance below which points near 𝔖 are reported Undecided.
pub const SINGULAR_GUARD: f64 = 1e-4;

impl BInvolutionData {
    pub fn new(q: Polynomial, disc: JordanDisc, pinch: Vec<Complex>, tol: f64) -> Self {
        let u_boundary = disc.boundary.iter().map(|z| q.eval(*z)).collect();
        let singular = pinch.iter().map(|z| q.eval(*z)).collect();
        BInvolutionData {
            q,
            disc,
            pinch,
            u_boundary,
            singular,
            tol,
        }
    }

    pub fn degree(&self) -> usize {
        self.q.degree()
    }

    fn near_singular(&self, u: Complex) -> bool {
        self.singular.iter().any(|s| (s - u).norm() < SINGULAR_GUARD)
    }

    /// Solves Q(x) = u and picks the root inside D. `boundary_ok` admits
    /// roots inside the boundary band (used for ∂U evaluations); the strict
    /// mode reports them as Undecidable.
    fn select_root(&self, u: Complex, boundary_ok: bool) -> Result<Complex, BinvError> {
        let mut shifted = self.q.clone();
        shifted.coeffs[0] -= u;
        let roots = shifted
            .roots(1e-9)
            .map_err(|e| BinvError::Roots(e.to_string()))?;
        let mut inside: Option<Complex> = None;
        let mut banded: Option<Complex> = None;
        let mut n_inside = 0usize;
        for (root, _m) in &roots.points {
            match self.disc.locate(*root) {
                Location::Inside => {
                    n_inside += 1;
                    inside = Some(*root);
                }
                Location::Band => banded = Some(*root),
                Location::Outside => {}
            }
        }
        match (n_inside, inside, banded) {
            (1, Some(r), None) => Ok(r),
            (1, Some(r), Some(_)) if boundary_ok => Ok(r),
            (1, Some(_), Some(_)) => Err(BinvError::Undecidable),
            (0, _, Some(r)) if boundary_ok => Ok(r),
            (0, _, Some(_)) => Err(BinvError::Undecidable),
            (0, _, None) => Err(BinvError::OutOfDomain),
            _ => Err(BinvError::Undecidable),
        }
    }

    /// S(u) = Q(J(x)) for the unique Q-preimage x of u in D; strict mode
    /// used by the tile dynamics.
    pub fn eval_s(&self, u: Complex) -> Result<Sphere, BinvError> {
        let x = self.select_root(u, false)?;
        Ok(self.push_through_j(x))
    }

    /// Boundary-tolerant evaluation for ∂U points, where the preimage lies
    /// on ∂D itself.
    pub fn eval_s_boundary(&self, u: Complex) -> Result<Sphere, BinvError> {
        let x = self.select_root(u, true)?;
        Ok(self.push_through_j(x))
    }

    fn push_through_j(&self, x: Complex) -> Sphere {
        if x.norm() < 1e-9 {
            return Sphere::Infinity; // J(0) = ∞ and Q(∞) = ∞
        }
        Sphere::Finite(self.q.eval(1.0 / x))
    }
}

/// Per-point verdict of the tile dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    TileRank(usize),
    NonEscapingApprox,
    Undecided,
}

/// Side labels in the correspondence plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Omega,
    Kplus,
    Kminus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileClassification {
    pub verdict: Verdict,
    pub side: Option<Side>,
}

/// Iterates S while the point stays in closure(U); the first exit step is
/// the tile rank.
pub fn tile_rank(data: &BInvolutionData, u: Complex, max_rank: usize) -> TileClassification {
    let mut current = Sphere::Finite(u);
    for k in 0..=max_rank {
        let v = match current {
            Sphere::Infinity => {
                return TileClassification {
                    verdict: Verdict::TileRank(k),
                    side: None,
                }
            }
            Sphere::Finite(v) => v,
        };
        if data.near_singular(v) {
            return TileClassification {
                verdict: Verdict::Undecided,
                side: None,
            };
        }
        match data.eval_s(v) {
            Ok(next) => current = next,
            Err(BinvError::OutOfDomain) => {
                return TileClassification {
                    verdict: Verdict::TileRank(k),
                    side: None,
                }
            }
            Err(_) => {
                return TileClassification {
                    verdict: Verdict::Undecided,
                    side: None,
                }
            }
        }
    }
    TileClassification {
        verdict: Verdict::NonEscapingApprox,
        side: None,
    }
}

/// Classifies a correspondence-plane point: tile rank of Q(z), with the
/// side (Ω escaping, K₊ in D̄, K₋ outside) attached.
pub fn classify_corr_point(
    data: &BInvolutionData,
    z: Complex,
    max_rank: usize,
) -> TileClassification {
    let t = tile_rank(data, data.q.eval(z), max_rank);
    let side = match t.verdict {
        Verdict::TileRank(_) => Some(Side::Omega),
        Verdict::Undecided => None,
        Verdict::NonEscapingApprox => match data.disc.locate(z) {
            Location::Inside => Some(Side::Kplus),
            Location::Outside => Some(Side::Kminus),
            Location::Band => {
                if data.pinch.iter().any(|p| (p - z).norm() < data.disc.band * 10.0) {
                    None
                } else {
                    None
                }
            }
        },
    };
    let verdict = match (t.verdict, side) {
        (Verdict::NonEscapingApprox, None) => Verdict::Undecided,
        (v, _) => v,
    };
    TileClassification { verdict, side }
}

/// Prop.-style cross-check: for z in D̄, the forward images of the
/// correspondence 𝓖 = Cov₀^Q ∘ J equal the roots of Q(w) = S(Q(z)) with one
/// copy of J(z) removed.
pub fn check_prop_corr_vs_s(data: &BInvolutionData, z: Complex) -> Result<bool, BinvError> {
    let jz = 1.0 / z;
    let lhs = cov0_images(&data.q, jz, 1e-9)?.expanded();

    let s_val = match data.eval_s_boundary(data.q.eval(z))? {
        Sphere::Infinity => return Err(BinvError::Undecidable),
        Sphere::Finite(v) => v,
    };
    let mut shifted = data.q.clone();
    shifted.coeffs[0] -= s_val;
    let mut rhs = shifted
        .roots(1e-9)
        .map_err(|e| BinvError::Roots(e.to_string()))?
        .expanded();
    // Remove one copy of J(z) (must be present among the roots).
    let mut best = usize::MAX;
    let mut bd = f64::INFINITY;
    for (i, w) in rhs.iter().enumerate() {
        let dist = (w - jz).norm();
        if dist < bd {
            bd = dist;
            best = i;
        }
    }
    if bd > 1e-5 * (1.0 + jz.norm()) {
        return Ok(false);
    }
    rhs.remove(best);
    Ok(hausdorff(&lhs, &rhs) < 1e-6 * (1.0 + jz.norm()))
}

/// The distinguished forward branch carrying K₊ to itself:
/// w* = (Q|_D)⁻¹(S(Q(z))).
pub fn distinguished_branch(data: &BInvolutionData, z: Complex) -> Result<Complex, BinvError> {
    let s_val = match data.eval_s(data.q.eval(z))? {
        Sphere::Infinity => return Err(BinvError::OutOfDomain),
        Sphere::Finite(v) => v,
    };
    data.select_root(s_val, false)
}

/// One validation check line.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "CHECK {} {} {}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Runs the five defining conditions against the sampled data.
pub fn validate(data: &BInvolutionData) -> ValidationReport {
    let mut checks = Vec::new();
    let boundary = &data.disc.boundary;
    let tol = data.tol;

    // (1) ±1 on the boundary.
    let vertex_tol = {
        // Vertex spacing bounds how close the polyline can come to a point.
        let mut gap: f64 = 0.0;
        for w in boundary.windows(2) {
            gap = gap.max((w[1] - w[0]).norm());
        }
        gap.max(tol)
    };
    for (name, p) in [("plus-one-on-boundary", 1.0), ("minus-one-on-boundary", -1.0)] {
        let d = data.disc.distance_to_boundary(Complex::new(p, 0.0));
        checks.push(Check {
            name,
            pass: d <= vertex_tol,
            detail: format!("distance {d:.3e}"),
        });
    }

    // (2) J-symmetry of the boundary.
    {
        let mut worst: f64 = 0.0;
        for z in boundary.iter() {
            if z.norm() < 1e-9 {
                worst = f64::INFINITY;
                break;
            }
            let jz = 1.0 / z;
            worst = worst.max(data.disc.distance_to_boundary(jz));
        }
        checks.push(Check {
            name: "j-symmetry-boundary",
            pass: worst < vertex_tol.max(100.0 * tol),
            detail: format!("Hausdorff(J(dD), dD) <= {worst:.3e}"),
        });
    }

    // (3) Q' vanishes on the boundary exactly on the pinch set.
    {
        let dq = data.q.derivative();
        let scale = data
            .q
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        let zero_tol = 1e-6 * scale;
        let mut pinch_ok = true;
        for p in &data.pinch {
            if dq.eval(*p).norm() > zero_tol {
                pinch_ok = false;
            }
        }
        let mut stray: Option<Complex> = None;
        for z in boundary {
            if dq.eval(*z).norm() < zero_tol {
                let near_pinch = data.pinch.iter().any(|p| (p - z).norm() < 1e-2);
                if !near_pinch {
                    stray = Some(*z);
                    break;
                }
            }
        }
        checks.push(Check {
            name: "critical-set-on-boundary",
            pass: pinch_ok && stray.is_none(),
            detail: match stray {
                Some(z) => format!("stray boundary critical point near {z}"),
                None if !pinch_ok => "pinch point is not critical".into(),
                None => "Q' vanishes on the boundary only at the pinch set".into(),
            },
        });
    }

    // (4) Injectivity of Q on sampled closure(D): no well-separated pair
    // may collide in the image.
    {
        let samples = closure_samples(data, 10_000);
        let scale = samples.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let qscale = samples
            .iter()
            .map(|z| data.q.eval(*z).norm())
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let mut min_ratio = f64::INFINITY;
        let mut collision: Option<(Complex, Complex)> = None;
        // The fold at the pinch makes image separation degenerate there by
        // construction; pairs with both points near 𝔓 are exempt.
        let near_pinch =
            |z: &Complex| data.pinch.iter().any(|p| (p - z).norm() < 5e-2);
        // Grid-hash the images so only near-collisions are inspected.
        let cell = 1e-3 * qscale;
        let mut buckets: std::collections::HashMap<(i64, i64), Vec<usize>> =
            std::collections::HashMap::new();
        for (i, z) in samples.iter().enumerate() {
            let w = data.q.eval(*z);
            let key = ((w.re / cell).floor() as i64, (w.im / cell).floor() as i64);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = buckets.get(&(key.0 + dx, key.1 + dy)) {
                        for &j in list {
                            let dz = (samples[j] - z).norm();
                            if dz > 1e-3 * scale && !(near_pinch(z) && near_pinch(&samples[j])) {
                                let dw = (data.q.eval(samples[j]) - w).norm();
                                let ratio = dw / dz;
                                if ratio < min_ratio {
                                    min_ratio = ratio;
                                    if dw < 1e-6 * qscale {
                                        collision = Some((*z, samples[j]));
                                    }
                                }
                            }
                        }
                    }
                }
            }
            buckets.entry(key).or_default().push(i);
        }
        checks.push(Check {
            name: "injectivity-on-closure",
            pass: collision.is_none(),
            detail: match collision {
                Some((a, b)) => format!("Q({a}) collides with Q({b})"),
                None => format!("min separation ratio {min_ratio:.3e}"),
            },
        });
    }

    // (5) J(P) = P.
    {
        let mut worst: f64 = 0.0;
        for p in &data.pinch {
            if p.norm() < 1e-12 {
                worst = f64::INFINITY;
                continue;
            }
            let jp = 1.0 / p;
            let d = data
                .pinch
                .iter()
                .map(|q| (q - jp).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
        checks.push(Check {
            name: "j-symmetry-pinch-set",
            pass: worst < tol.max(1e-9),
            detail: format!("max displacement {worst:.3e}"),
        });
    }

    ValidationReport { checks }
}

/// Deterministic samples of closure(D): boundary vertices plus interior
/// points scanned on a grid and filtered by membership.
fn closure_samples(data: &BInvolutionData, n: usize) -> Vec<Complex> {
    let mut out: Vec<Complex> = Vec::with_capacity(n);
    let boundary = &data.disc.boundary;
    let take_boundary = n / 4;
    let stride = (boundary.len() / take_boundary.max(1)).max(1);
    for (i, z) in boundary.iter().enumerate() {
        if i % stride == 0 {
            out.push(*z);
        }
    }
    let mut lo = Complex::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in boundary {
        lo = Complex::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let side = ((n - out.len()) as f64).sqrt().ceil() as usize;
    for i in 0..side {
        for j in 0..side {
            let z = Complex::new(
                lo.re + (hi.re - lo.re) * (i as f64 + 0.5) / side as f64,
                lo.im + (hi.im - lo.im) * (j as f64 + 0.5) / side as f64,
            );
            if data.disc.locate(z) == Location::Inside {
                out.push(z);
            }
            if out.len() >= n {
                return out;
            }
        }
    }
    out
}

/// Report of the injectivity/branched-cover witness counts.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub samples: usize,
    pub all_total_correct: bool,
    pub all_inside_unique: bool,
    pub all_outside_d: bool,
    pub detail: String,
}

/// Verifies on n samples of U that Q has exactly one preimage inside D̄ and
/// d outside (with multiplicity).
pub fn injectivity_witness(data: &BInvolutionData, n: usize) -> WitnessReport {
    let deg = data.degree();
    let mut total_ok = true;
    let mut inside_ok = true;
    let mut outside_ok = true;
    let mut tested = 0usize;
    let mut report = String::new();
    for k in 0..(4 * n) {
        if tested >= n {
            break;
        }
        // Interior samples of D pushed through Q are guaranteed in U.
        let r = 0.97 * ((k as f64 * 0.6180339887).fract()).sqrt();
        let phi = 2.0 * std::f64::consts::PI * (k as f64 * 0.7548776662).fract();
        let x = Complex::from_polar(r, phi);
        if data.disc.locate(x) != Location::Inside {
            continue;
        }
        let u = data.q.eval(x);
        if data.near_singular(u) {
            continue;
        }
        let mut shifted = data.q.clone();
        shifted.coeffs[0] -= u;
        let Ok(roots) = shifted.roots(1e-9) else { continue };
        tested += 1;
        let total = roots.total_multiplicity();
        if total != deg {
            total_ok = false;
            report = format!("{total} preimages at u = {u}");
        }
        let mut inside = 0usize;
        let mut outside = 0usize;
        for (root, m) in &roots.points {
            match data.disc.locate(*root) {
                Location::Inside => inside += m,
                Location::Outside => outside += m,
                Location::Band => {}
            }
        }
        if inside != 1 {
            inside_ok = false;
            report = format!("{inside} interior preimages at u = {u}");
        }
        if outside > deg - 1 {
            outside_ok = false;
            report = format!("{outside} exterior preimages at u = {u}");
        }
    }
    WitnessReport {
        samples: tested,
        all_total_correct: total_ok,
        all_inside_unique: inside_ok,
        all_outside_d: outside_ok,
        detail: report,
    }
}

/// Searches the documented family (real polynomials z^{d+1} + p z^d + s z
/// with Q'(1) = 0 over J-symmetric boundary curves) and returns the first
/// candidate that passes validation and carries an attracting interior
/// fixed point of S, so the non-escaping set has a fat basin to render.
pub fn find_instance(d: usize, boundary_vertices: usize, tol: f64) -> Option<BInvolutionData> {
    let candidates_p = [-4.5, -4.3, -4.2, -4.75, 1.0, 0.75, 1.25];
    for &p in &candidates_p {
        let s = -((d as f64 + 1.0) + p * d as f64);
        let mut coeffs = vec![0.0; d + 2];
        coeffs[d + 1] = 1.0;
        coeffs[d] = p;
        coeffs[1] = s;
        let q = Polynomial::from_real(&coeffs);
        let disc = JordanDisc::unit_circle(boundary_vertices.max(1000), tol);
        let data = BInvolutionData::new(q, disc, vec![Complex::new(1.0, 0.0)], tol);
        if validate(&data).all_pass() && has_attracting_interior_fixed_point(&data) {
            return Some(data);
        }
    }
    None
}

/// Interior fixed points of S are the u = Q(x) with x ∈ D solving
/// Q(x) = Q(J(x)); the multiplier there is Q'(J(x))·J'(x)/Q'(x).
fn has_attracting_interior_fixed_point(data: &BInvolutionData) -> bool {
    let q = &data.q;
    let n = q.coeffs.len();
    // x^{d+1}·(Q(x) − Q(1/x)) as a polynomial in x.
    let mut coeffs = vec![Complex::new(0.0, 0.0); 2 * n - 1];
    for (k, c) in q.coeffs.iter().enumerate() {
        coeffs[k + n - 1] += c; // x^{d+1}·Q(x)
        coeffs[n - 1 - k] -= c; // x^{d+1}·Q(1/x)
    }
    let poly = Polynomial::new(coeffs);
    let Ok(roots) = poly.roots(1e-8) else {
        return false;
    };
    let dq = q.derivative();
    for (x, _) in &roots.points {
        if x.norm() >= 1.0 - 1e-6 || x.norm() < 1e-9 {
            continue;
        }
        if data.pinch.iter().any(|pp| (pp - x).norm() < 1e-3) {
            continue;
        }
        let jx = 1.0 / x;
        let denom = dq.eval(*x);
        if denom.norm() < 1e-12 {
            continue;
        }
        let multiplier = dq.eval(jx) * (-1.0 / (x * x)) / denom;
        if multiplier.norm() < 0.98 {
            return true;
        }
    }
    false
}

/// The shipped, validated d = 2 reference instance: Q = z³ − (9/2)z² + 6z
/// over the unit disc with pinch set {1}. Its interior fixed point
/// u = Q(1/2) = 2 is superattracting, so the non-escaping set has interior.
pub fn reference_instance() -> BInvolutionData {
    find_instance(2, 2048, 1e-6).expect("the d = 2 search family must contain a valid instance")
}

// ── Plain-text instance serialization ────────────────────────────────────

/// Serializes as: degree, Q coefficients ("re im" per line, ascending),
/// boundary polyline block, pinch list, tolerance.
pub fn write_instance(data: &BInvolutionData) -> String {
    let mut out = String::new();
    out.push_str(&format!("degree {}\n", data.degree()));
    out.push_str(&format!("qcoeffs {}\n", data.q.coeffs.len()));
    for c in &data.q.coeffs {
        out.push_str(&format!("{:.15e} {:.15e}\n", c.re, c.im));
    }
    out.push_str(&format!("boundary {}\n", data.disc.boundary.len()));
    for p in &data.disc.boundary {
        out.push_str(&format!("{:.15e} {:.15e}\n", p.re, p.im));
    }
    out.push_str(&format!("pinch {}\n", data.pinch.len()));
    for p in &data.pinch {
        out.push_str(&format!("{:.15e} {:.15e}\n", p.re, p.im));
    }
    out.push_str(&format!("tol {:.15e}\n", data.tol));
    out
}

fn expect_tag<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    tag: &str,
) -> Result<String, BinvError> {
    let line = lines
        .next()
        .ok_or_else(|| BinvError::Parse(format!("missing section {tag}")))?;
    let rest = line
        .strip_prefix(tag)
        .ok_or_else(|| BinvError::Parse(format!("expected {tag}, got {line}")))?;
    Ok(rest.trim().to_string())
}

fn read_pairs<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    count: usize,
) -> Result<Vec<Complex>, BinvError> {
    let mut pts = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| BinvError::Parse("truncated point block".into()))?;
        let mut it = line.split_whitespace();
        let re: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| BinvError::Parse(format!("bad point line {line}")))?;
        let im: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| BinvError::Parse(format!("bad point line {line}")))?;
        pts.push(Complex::new(re, im));
    }
    Ok(pts)
}

pub fn read_instance(text: &str) -> Result<BInvolutionData, BinvError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let degree: usize = expect_tag(&mut lines, "degree")?
        .parse()
        .map_err(|e| BinvError::Parse(format!("degree: {e}")))?;
    let n_coeffs: usize = expect_tag(&mut lines, "qcoeffs")?
        .parse()
        .map_err(|e| BinvError::Parse(format!("qcoeffs: {e}")))?;
    let coeffs = read_pairs(&mut lines, n_coeffs)?;
    let n_boundary: usize = expect_tag(&mut lines, "boundary")?
        .parse()
        .map_err(|e| BinvError::Parse(format!("boundary: {e}")))?;
    let boundary = read_pairs(&mut lines, n_boundary)?;
    let n_pinch: usize = expect_tag(&mut lines, "pinch")?
        .parse()
        .map_err(|e| BinvError::Parse(format!("pinch: {e}")))?;
    let pinch = read_pairs(&mut lines, n_pinch)?;
    let tol: f64 = expect_tag(&mut lines, "tol")?
        .parse()
        .map_err(|e| BinvError::Parse(format!("tol: {e}")))?;

    let q = Polynomial::new(coeffs);
    if q.degree() != degree {
        return Err(BinvError::Parse(format!(
            "declared degree {degree} but coefficients give {}",
            q.degree()
        )));
    }
    Ok(BInvolutionData::new(
        q,
        JordanDisc::new(boundary, tol),
        pinch,
        tol,
    ))
}
