//! Dense complex polynomials and a simultaneous-iteration (Aberth–Ehrlich)
//! root finder tuned for the small degrees (≤ 9) this crate works with.
//!
//! The solver supports warm starts so raster scans can seed each pixel with
//! the neighbouring pixel's roots.

use crate::moebius::Complex;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("root finding did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("cannot solve a constant polynomial")]
    ConstantPolynomial,
}

pub const MAX_ITERATIONS: usize = 200;
/// Roots closer than this are reported as one root with multiplicity.
pub const CLUSTER_RADIUS: f64 = 1e-7;

/// Coefficients in ascending degree order; the leading coefficient is kept
/// nonzero by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<Complex>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    /// Monic product of (z − r_i).
    pub fn from_roots(roots: &[Complex]) -> Self {
        let mut coeffs = vec![Complex::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] += *c;
                next[k] -= *c * *r;
            }
            coeffs = next;
        }
        Polynomial { coeffs }
    }

    fn trim(&mut self) {
        // Drop a numerically-zero leading coefficient relative to the
        // largest one.
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        while self.coeffs.len() > 1 {
            if self.coeffs.last().unwrap().norm() > 1e-14 * scale {
                break;
            }
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex) -> Complex {
        let mut acc = Complex::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::new(vec![Complex::new(0.0, 0.0)]);
        }
        Polynomial::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| *c * (k as f64 + 1.0))
                .collect(),
        )
    }

    /// n-th derivative.
    pub fn derivative_n(&self, n: usize) -> Polynomial {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.derivative();
        }
        p
    }

    /// Exact synthetic division by (z − z0); returns (quotient, remainder).
    pub fn divide_linear(&self, z0: Complex) -> (Polynomial, Complex) {
        let n = self.coeffs.len();
        if n <= 1 {
            return (
                Polynomial {
                    coeffs: vec![Complex::new(0.0, 0.0)],
                },
                self.coeffs.first().copied().unwrap_or_default(),
            );
        }
        let mut q = vec![Complex::new(0.0, 0.0); n - 1];
        let mut carry = self.coeffs[n - 1];
        for k in (0..n - 1).rev() {
            q[k] = carry;
            carry = self.coeffs[k] + z0 * carry;
        }
        (Polynomial { coeffs: q }, carry)
    }

    /// Residual |p(z)| / (1 + |z|^deg), relative to the coefficient scale
    /// so the criterion is invariant under scaling p.
    pub fn normalized_residual(&self, z: Complex) -> f64 {
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        self.eval(z).norm() / (scale * (1.0 + z.norm().powi(self.degree() as i32)))
    }

    /// All complex roots with multiplicities.
    pub fn roots(&self, tol: f64) -> Result<RootSet, PolyError> {
        self.roots_with_seed(tol, None)
    }

    /// Root finding warm-started from a previous nearby solution when
    /// `seed` has the right length.
    pub fn roots_with_seed(&self, tol: f64, seed: Option<&[Complex]>) -> Result<RootSet, PolyError> {
        let n = self.degree();
        if n == 0 {
            return Err(PolyError::ConstantPolynomial);
        }
        if n == 1 {
            let r = -self.coeffs[0] / self.coeffs[1];
            return Ok(RootSet {
                points: vec![(r, 1)],
            });
        }

        let mut z: Vec<Complex> = match seed {
            Some(s) if s.len() == n => s.to_vec(),
            _ => self.initial_guesses(),
        };

        let deriv = self.derivative();
        let mut converged = false;
        let mut iterations = 0;
        while iterations < MAX_ITERATIONS {
            iterations += 1;
            let mut max_step = 0.0f64;
            for i in 0..n {
                let p = self.eval(z[i]);
                if p.norm() == 0.0 {
                    continue;
                }
                let mut dp = deriv.eval(z[i]);
                if dp.norm() < 1e-300 {
                    // Nudge away from an exact critical point.
                    z[i] += Complex::new(1e-9, 1e-9);
                    dp = deriv.eval(z[i]);
                    if dp.norm() < 1e-300 {
                        continue;
                    }
                }
                let w = p / dp;
                let mut s = Complex::new(0.0, 0.0);
                for j in 0..n {
                    if j != i {
                        let diff = z[i] - z[j];
                        if diff.norm() < 1e-300 {
                            z[i] += Complex::new(2e-10, -1e-10);
                            continue;
                        }
                        s += 1.0 / diff;
                    }
                }
                let denom = Complex::new(1.0, 0.0) - w * s;
                let step = if denom.norm() < 1e-300 { w } else { w / denom };
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
            if max_step < 1e-15 {
                converged = true;
                break;
            }
        }

        // Multiple roots limit Aberth's attainable accuracy; polish tight
        // clusters through the derivative of matching order.
        self.polish_clusters(&mut z, tol);

        let ok = z.iter().all(|&r| self.normalized_residual(r) < tol);
        if !(ok || converged) {
            return Err(PolyError::NonConvergence(MAX_ITERATIONS));
        }
        if !ok {
            return Err(PolyError::NonConvergence(iterations));
        }
        Ok(cluster_roots(&z, CLUSTER_RADIUS))
    }

    fn initial_guesses(&self) -> Vec<Complex> {
        let n = self.degree();
        let an = self.coeffs[n].norm();
        let bound = 1.0
            + self.coeffs[..n]
                .iter()
                .map(|c| c.norm() / an)
                .fold(0.0f64, f64::max);
        let radius = bound.min(1e150);
        (0..n)
            .map(|k| {
                // Fixed angular offset breaks symmetric stalling.
                let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.39;
                Complex::from_polar(radius, phi)
            })
            .collect()
    }

    /// Newton-polish groups of near-coincident roots on p^(m−1), which has
    /// a simple zero at an m-fold root; revert if the polish does not
    /// verify.
    fn polish_clusters(&self, z: &mut [Complex], tol: f64) {
        let n = z.len();
        let mut assigned = vec![false; n];
        for i in 0..n {
            if assigned[i] {
                continue;
            }
            let mut cluster = vec![i];
            for j in (i + 1)..n {
                if !assigned[j] && (z[i] - z[j]).norm() < 1e-4 * (1.0 + z[i].norm()) {
                    cluster.push(j);
                }
            }
            if cluster.len() < 2 {
                continue;
            }
            let m = cluster.len();
            let mut mu = Complex::new(0.0, 0.0);
            for &j in &cluster {
                mu += z[j];
            }
            mu /= m as f64;
            let dm1 = self.derivative_n(m - 1);
            let dm = dm1.derivative();
            let mut candidate = mu;
            for _ in 0..60 {
                let f = dm1.eval(candidate);
                let df = dm.eval(candidate);
                if df.norm() < 1e-300 {
                    break;
                }
                let step = f / df;
                candidate -= step;
                if step.norm() < 1e-16 * (1.0 + candidate.norm()) {
                    break;
                }
            }
            if self.normalized_residual(candidate) < tol {
                for &j in &cluster {
                    z[j] = candidate;
                    assigned[j] = true;
                }
            }
        }
    }
}

/// Multiset of roots/images with multiplicities.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub points: Vec<(Complex, usize)>,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }

    /// Roots repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<Complex> {
        let mut out = Vec::with_capacity(self.total_multiplicity());
        for (z, m) in &self.points {
            for _ in 0..*m {
                out.push(*z);
            }
        }
        out
    }
}

fn cluster_roots(roots: &[Complex], radius: f64) -> RootSet {
    let mut sorted: Vec<Complex> = roots.to_vec();
    sorted.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut points: Vec<(Complex, usize)> = Vec::new();
    'outer: for r in sorted {
        for (center, m) in points.iter_mut() {
            if (*center - r).norm() < radius * (1.0 + center.norm()) {
                // Running mean keeps the cluster center stable.
                *center = (*center * *m as f64 + r) / (*m as f64 + 1.0);
                *m += 1;
                continue 'outer;
            }
        }
        points.push((r, 1));
    }
    RootSet { points }
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Complex], b: &[Complex]) -> f64 {
    let one_sided = |x: &[Complex], y: &[Complex]| -> f64 {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    one_sided(a, b).max(one_sided(b, a))
}
