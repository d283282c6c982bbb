//! Shared numerical kernels: root bracketing, golden-section refinement,
//! adaptive Simpson quadrature, and a symmetric tridiagonal eigensolver
//! (optionally with a single corner entry coupling the first and last
//! index, as produced by periodic boundary conditions).

use crate::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Bisection on a bracketing interval. `f(a)` and `f(b)` must have opposite
/// signs (a zero endpoint is returned as-is). Stops once the bracket is
/// narrower than `xtol` and returns the midpoint.
pub fn bisect(f: impl Fn(f64) -> f64, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.is_nan() || fhi.is_nan() || (flo > 0.0) == (fhi > 0.0) {
        return Err(Error::InvalidInput(format!(
            "bisect: [{a}, {b}] does not bracket a sign change"
        )));
    }
    let neg_lo = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if libm::fabs(hi - lo) <= xtol || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for a local minimum of `f` on `[a, b]`.
/// Returns `(x, f(x))` once the bracket is narrower than `xtol`.
pub fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..400 {
        if libm::fabs(hi - lo) <= xtol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` with a relative error
/// target. Intended for smooth integrands of a single sign; the budget is
/// scaled off the first whole-interval estimate.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let budget = rel_tol * libm::fabs(whole).max(f64::MIN_POSITIVE);
    adapt(&f, a, fa, m, fm, b, fb, whole, budget, 40)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    budget: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || libm::fabs(err) <= 15.0 * budget {
        // Richardson extrapolation of the two half-interval estimates.
        return left + right + err / 15.0;
    }
    let half = 0.5 * budget;
    adapt(f, a, fa, lm, flm, m, fm, left, half, depth - 1)
        + adapt(f, m, fm, rm, frm, b, fb, right, half, depth - 1)
}

/// Symmetric tridiagonal matrix, optionally bordered by a single `corner`
/// entry at positions `(0, n-1)` and `(n-1, 0)` (periodic or antiperiodic
/// finite-difference Hamiltonians produce exactly this shape).
///
/// Eigenvalues come from bisection on the inertia count, which stays valid
/// for the bordered matrix via an `LDL^T` pass that tracks the fill-in of
/// the last column. Eigenvectors (plain tridiagonal only) use inverse
/// iteration with a partially pivoted solve.
#[derive(Clone, Debug)]
pub struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
    corner: f64,
}

impl SymTridiag {
    /// Plain symmetric tridiagonal matrix; `off` couples neighbours.
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        Self::with_corner(diag, off, 0.0)
    }

    /// Tridiagonal plus a corner entry coupling index `0` and `n-1`.
    /// A nonzero corner needs `n >= 3` so the corner is a genuine border.
    pub fn with_corner(diag: Vec<f64>, off: Vec<f64>, corner: f64) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty diagonal".into()));
        }
        if off.len() + 1 != n {
            return Err(Error::InvalidInput(format!(
                "off-diagonal length {} does not match dimension {n}",
                off.len()
            )));
        }
        if corner != 0.0 && n < 3 {
            return Err(Error::InvalidInput(
                "corner entry needs dimension >= 3".into(),
            ));
        }
        if !diag.iter().chain(off.iter()).all(|x| x.is_finite()) || !corner.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self { diag, off, corner })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Infinity-norm bound used to scale pivot safeguards and Gershgorin
    /// intervals.
    fn norm_bound(&self) -> f64 {
        let mut worst = 0.0f64;
        let n = self.dim();
        for i in 0..n {
            let mut row = libm::fabs(self.diag[i]);
            if i > 0 {
                row += libm::fabs(self.off[i - 1]);
            }
            if i + 1 < n {
                row += libm::fabs(self.off[i]);
            }
            if i == 0 || i == n - 1 {
                row += libm::fabs(self.corner);
            }
            worst = worst.max(row);
        }
        worst.max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x` (matrix inertia at shift `x`).
    ///
    /// A pivot that lands within `~eps^2 * norm` of zero would poison the
    /// later Schur complements with catastrophic cancellation, so in that
    /// case the whole count restarts at a shift nudged down by a few ulps
    /// of the matrix norm — far below any eigenvalue tolerance used here.
    pub fn count_below(&self, x: f64) -> usize {
        let norm = self.norm_bound();
        let floor = (norm * f64::EPSILON * f64::EPSILON).max(f64::MIN_POSITIVE);
        let mut shift = x;
        for attempt in 1..=8u32 {
            if let Some(count) = self.elim_count(shift, floor, true) {
                return count;
            }
            shift = x - attempt as f64 * norm * f64::EPSILON;
        }
        self.elim_count(x, floor, false)
            .expect("clamped elimination always yields a count")
    }

    /// One elimination pass. With `strict`, a pivot below the floor aborts
    /// with `None`; otherwise it is clamped and the pass always completes.
    fn elim_count(&self, x: f64, floor: f64, strict: bool) -> Option<usize> {
        let n = self.dim();
        let guard = |d: f64| -> Option<f64> {
            if libm::fabs(d) < floor {
                if strict {
                    None
                } else if d < 0.0 {
                    Some(-floor)
                } else {
                    Some(floor)
                }
            } else {
                Some(d)
            }
        };
        let mut count = 0usize;
        if self.corner == 0.0 {
            let mut d = self.diag[0] - x;
            for i in 0..n {
                let pivot = guard(d)?;
                if pivot < 0.0 {
                    count += 1;
                }
                if i + 1 < n {
                    let b = self.off[i];
                    d = (self.diag[i + 1] - x) - b * b / pivot;
                }
            }
            return Some(count);
        }
        // Bordered elimination: `fill` is the last-column entry of the
        // current pivot row, `last` the Schur complement building up at
        // position (n-1, n-1).
        let mut d = self.diag[0] - x;
        let mut fill = self.corner;
        let mut last = self.diag[n - 1] - x;
        for i in 0..n - 1 {
            let pivot = guard(d)?;
            if pivot < 0.0 {
                count += 1;
            }
            let b = self.off[i];
            if i < n - 2 {
                last -= fill * fill / pivot;
                d = (self.diag[i + 1] - x) - b * b / pivot;
                fill = -b * fill / pivot;
            } else {
                // The next-to-last row couples to the last one both directly
                // and through the accumulated fill.
                let c = b + fill;
                last -= c * c / pivot;
            }
        }
        if guard(last)? < 0.0 {
            count += 1;
        }
        Some(count)
    }

    /// The `k`-th eigenvalue in ascending order (`k = 0` is the lowest),
    /// located by bisection on the inertia count.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        let n = self.dim();
        if k >= n {
            return Err(Error::InvalidInput(format!(
                "eigenvalue index {k} out of range for dimension {n}"
            )));
        }
        let bound = self.norm_bound();
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if hi - lo <= 4.0 * f64::EPSILON * (libm::fabs(lo) + libm::fabs(hi) + 1e-300) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The `m` lowest eigenvalues in ascending order.
    pub fn lowest(&self, m: usize) -> Result<Vec<f64>> {
        (0..m).map(|k| self.eigenvalue(k)).collect()
    }

    /// Unit eigenvector for an eigenvalue `ev` (plain tridiagonal only),
    /// via three rounds of inverse iteration from a fixed pseudo-random
    /// start. The entry of largest magnitude is made positive so repeated
    /// runs agree bit for bit.
    pub fn eigenvector(&self, ev: f64) -> Result<Vec<f64>> {
        if self.corner != 0.0 {
            return Err(Error::InvalidInput(
                "eigenvectors are only available without a corner entry".into(),
            ));
        }
        let n = self.dim();
        // Deterministic start vector from a splitmix-style generator.
        let mut state = 0x9E37_79B9_7F4A_7C15u64;
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                state = state.wrapping_mul(0x2545_F491_4F6C_DD1D).wrapping_add(1);
                let bits = (state >> 11) as f64 / (1u64 << 53) as f64;
                2.0 * bits - 1.0
            })
            .collect();
        let shift = ev + (1.0 + libm::fabs(ev)) * 1e-13;
        for _ in 0..3 {
            self.solve_shifted(shift, &mut v)?;
            let peak = v.iter().fold(0.0f64, |m, &x| m.max(libm::fabs(x)));
            if !(peak > 0.0) || !peak.is_finite() {
                return Err(Error::Unstable { energy: ev });
            }
            for x in v.iter_mut() {
                *x /= peak;
            }
        }
        let mut imax = 0;
        let mut sumsq = 0.0;
        for (i, &x) in v.iter().enumerate() {
            sumsq += x * x;
            if libm::fabs(x) > libm::fabs(v[imax]) {
                imax = i;
            }
        }
        let scale = libm::sqrt(sumsq) * if v[imax] < 0.0 { -1.0 } else { 1.0 };
        for x in v.iter_mut() {
            *x /= scale;
        }
        Ok(v)
    }

    /// Solves `(T - shift) x = v` in place by Gaussian elimination with
    /// partial pivoting (tridiagonal band storage with one fill diagonal).
    fn solve_shifted(&self, shift: f64, v: &mut [f64]) -> Result<()> {
        let n = self.dim();
        let tiny = (self.norm_bound() * f64::EPSILON * f64::EPSILON).max(f64::MIN_POSITIVE);
        let mut d: Vec<f64> = self.diag.iter().map(|&x| x - shift).collect();
        let mut du = self.off.clone();
        let dl = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        if n == 1 {
            let pivot = if libm::fabs(d[0]) < tiny { tiny } else { d[0] };
            v[0] /= pivot;
            return Ok(());
        }
        for i in 0..n - 1 {
            if libm::fabs(d[i]) >= libm::fabs(dl[i]) {
                let pivot = if libm::fabs(d[i]) < tiny { tiny } else { d[i] };
                d[i] = pivot;
                let m = dl[i] / pivot;
                d[i + 1] -= m * du[i];
                v[i + 1] -= m * v[i];
            } else {
                // Swap rows i and i+1.
                let m = d[i] / dl[i];
                d[i] = dl[i];
                let old_du = du[i];
                du[i] = d[i + 1];
                d[i + 1] = old_du - m * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -m;
                }
                v.swap(i, i + 1);
                v[i + 1] -= m * v[i];
            }
        }
        if libm::fabs(d[n - 1]) < tiny {
            d[n - 1] = if d[n - 1] < 0.0 { -tiny } else { tiny };
        }
        v[n - 1] /= d[n - 1];
        if n >= 2 {
            v[n - 2] = (v[n - 2] - du[n - 2] * v[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            v[i] = (v[i] - du[i] * v[i + 1] - du2[i] * v[i + 2]) / d[i];
        }
        Ok(())
    }
}
