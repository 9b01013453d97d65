//! Real non-negative roots of the state equation, solved as a companion-matrix
//! eigenproblem and polished with Newton's method.

use nalgebra::{Matrix3, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A root counts as real when `|Im| ≤ REAL_TOL · max(1, |Re|)`.
pub(crate) const REAL_TOL: f64 = 1e-9;
/// Roots with `Re ≥ −PHYSICAL_TOL` are physical (and clamped to zero).
pub(crate) const PHYSICAL_TOL: f64 = 1e-12;
/// Near-real pairs within this relative distance of a turning point are
/// accepted as a (degenerate) double root.
pub(crate) const DOUBLE_ROOT_TOL: f64 = 1e-6;

/// Coefficients of `c3 n³ + c2 n² + c1 n + c0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cubic {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Cubic {
    fn eval(&self, n: Complex64) -> (Complex64, Complex64) {
        let p = ((n * self.c3 + self.c2) * n + self.c1) * n + self.c0;
        let dp = (n * (3.0 * self.c3) + 2.0 * self.c2) * n + self.c1;
        (p, dp)
    }

    /// All three complex roots (`c3 ≠ 0`).
    pub fn roots(&self) -> Result<[Complex64; 3]> {
        let b2 = self.c2 / self.c3;
        let b1 = self.c1 / self.c3;
        let b0 = self.c0 / self.c3;
        // Rescale n = s·x so the monic coefficients are O(1).
        let s = [b2.abs(), b1.abs().sqrt(), b0.abs().cbrt()]
            .into_iter()
            .fold(0.0, f64::max);
        let s = if s > 0.0 { s } else { 1.0 };
        let companion = Matrix3::new(
            -b2 / s,
            -b1 / (s * s),
            -b0 / (s * s * s),
            1.0,
            0.0,
            0.0,
            0.0,
            1.0,
            0.0,
        );
        let schur = Schur::try_new(companion, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numerical("companion-matrix Schur iteration failed".into()))?;
        let eig = schur.complex_eigenvalues();
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (slot, x) in out.iter_mut().zip(eig.iter()) {
            *slot = self.polish(*x * s);
        }
        Ok(out)
    }

    fn polish(&self, mut n: Complex64) -> Complex64 {
        for _ in 0..60 {
            let (p, dp) = self.eval(n);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let next = n - step;
            if !next.re.is_finite() || !next.im.is_finite() {
                break;
            }
            // Only accept steps that do not increase the residual; near a double
            // root Newton can overshoot.
            if self.eval(next).0.norm() > p.norm() {
                break;
            }
            n = next;
            if step.norm() <= 4.0 * f64::EPSILON * n.norm().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        n
    }
}

/// Filters complex roots down to the real, physical ones.
///
/// `turning` holds the turning points of the cubic, used to accept the
/// near-real pair that a double root produces.
pub(crate) fn physical_real_roots(roots: &[Complex64; 3], turning: &[f64]) -> Vec<f64> {
    let mut real = Vec::with_capacity(3);
    let mut used_pair = false;
    for r in roots {
        let scale = r.re.abs().max(1.0);
        if r.im.abs() <= REAL_TOL * scale {
            real.push(r.re);
        } else if !used_pair
            && r.im.abs() <= DOUBLE_ROOT_TOL * scale
            && turning
                .iter()
                .any(|t| (r.re - t).abs() <= DOUBLE_ROOT_TOL * t.max(1.0))
        {
            // One member of a conjugate pair collapsing onto a turning point.
            real.push(r.re);
            used_pair = true;
        }
    }
    let mut phys: Vec<f64> = real
        .into_iter()
        .filter(|&x| x >= -PHYSICAL_TOL)
        .map(|x| x.max(0.0))
        .collect();
    phys.sort_by(f64::total_cmp);
    phys.dedup_by(|b, a| (*b - *a).abs() <= DOUBLE_ROOT_TOL * a.abs().max(1e-300) && near_any(*a, turning));
    phys
}

fn near_any(x: f64, turning: &[f64]) -> bool {
    turning
        .iter()
        .any(|t| (x - t).abs() <= DOUBLE_ROOT_TOL * t.max(1.0))
}
