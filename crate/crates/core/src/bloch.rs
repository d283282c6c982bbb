//! Transfer-matrix band structure of a one-dimensional crystal whose unit
//! cell carries two square wells of a common depth.
//!
//! For a piecewise-constant potential the fundamental solution across one
//! period is a product of four closed-form 2x2 matrices. An energy lies in
//! a band exactly when the trace `D(E)` of that monodromy matrix satisfies
//! `|D| <= 2`, with `D = 2 cos k` fixing the crystal momentum. Band edges
//! are therefore roots of `D -+ 2`, which this module locates by a guarded
//! scan: plain sign changes are bisected, while dips that never cross the
//! axis between samples (arbitrarily narrow bands, or bands touching at a
//! single energy) are caught as extrema and polished with a derivative
//! bisection whose accuracy does not degrade with the width of the dip.

use crate::{Error, Result};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Transfer-matrix entries above this bound abort with [`Error::Unstable`];
/// beyond it the `det = 1` structure is too eroded to trust.
pub const OVERFLOW_GUARD: f64 = 1e150;

/// Real 2x2 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Matrix2 {
    pub const IDENTITY: Self = Matrix2 {
        m11: 1.0,
        m12: 0.0,
        m21: 0.0,
        m22: 1.0,
    };

    pub fn trace(self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    #[cfg(test)]
    fn max_abs(self) -> f64 {
        libm::fabs(self.m11)
            .max(libm::fabs(self.m12))
            .max(libm::fabs(self.m21))
            .max(libm::fabs(self.m22))
    }
}

impl core::ops::Mul for Matrix2 {
    type Output = Matrix2;

    fn mul(self, rhs: Self) -> Self {
        Matrix2 {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }
}

/// One piecewise-constant stretch of the potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub potential: f64,
    pub length: f64,
}

/// Fundamental solution of `-u'' + V u = E u` across one constant segment,
/// acting on `(u, u')`.
pub fn segment_transfer(seg: Segment, energy: f64) -> Matrix2 {
    let diff = energy - seg.potential;
    let l = seg.length;
    if libm::fabs(diff) < 1e-12 {
        // Linear regime: u'' = 0 up to round-off.
        return Matrix2 {
            m11: 1.0,
            m12: l,
            m21: 0.0,
            m22: 1.0,
        };
    }
    if diff > 0.0 {
        let q = libm::sqrt(diff);
        let (s, c) = (libm::sin(q * l), libm::cos(q * l));
        Matrix2 {
            m11: c,
            m12: s / q,
            m21: -q * s,
            m22: c,
        }
    } else {
        let kappa = libm::sqrt(-diff);
        let (s, c) = (libm::sinh(kappa * l), libm::cosh(kappa * l));
        Matrix2 {
            m11: c,
            m12: s / kappa,
            m21: kappa * s,
            m22: c,
        }
    }
}

/// Unit cell of the diatomic crystal: two square wells of common depth,
/// with centre-to-centre spacings `spacing_in` (A to B inside a cell) and
/// `spacing_out` (B to the next cell's A). The period is their sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrystalSpec {
    pub depth: f64,
    pub width_a: f64,
    pub width_b: f64,
    pub spacing_in: f64,
    pub spacing_out: f64,
}

impl CrystalSpec {
    pub fn new(
        depth: f64,
        width_a: f64,
        width_b: f64,
        spacing_in: f64,
        spacing_out: f64,
    ) -> Result<Self> {
        let spec = CrystalSpec {
            depth,
            width_a,
            width_b,
            spacing_in,
            spacing_out,
        };
        if !(depth >= 0.0) || !depth.is_finite() {
            return Err(Error::InvalidInput(format!(
                "well depth must be nonnegative and finite, got {depth}"
            )));
        }
        for (name, w) in [("width_a", width_a), ("width_b", width_b)] {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {w}"
                )));
            }
        }
        if !(spec.gap_in() > 0.0) || !(spec.gap_out() > 0.0) {
            return Err(Error::InvalidInput(format!(
                "wells must be disjoint: edge-to-edge gaps are {} (inner) and {} (outer)",
                spec.gap_in(),
                spec.gap_out()
            )));
        }
        Ok(spec)
    }

    pub fn period(&self) -> f64 {
        self.spacing_in + self.spacing_out
    }

    /// Edge-to-edge vacuum between the A and B wells inside one cell.
    pub fn gap_in(&self) -> f64 {
        self.spacing_in - 0.5 * (self.width_a + self.width_b)
    }

    /// Edge-to-edge vacuum between a B well and the next cell's A well.
    pub fn gap_out(&self) -> f64 {
        self.spacing_out - 0.5 * (self.width_a + self.width_b)
    }

    /// The four constant segments of one period, starting at the left edge
    /// of an A well.
    pub fn segments(&self) -> [Segment; 4] {
        let v = -self.depth * self.depth;
        [
            Segment {
                potential: v,
                length: self.width_a,
            },
            Segment {
                potential: 0.0,
                length: self.gap_in(),
            },
            Segment {
                potential: v,
                length: self.width_b,
            },
            Segment {
                potential: 0.0,
                length: self.gap_out(),
            },
        ]
    }
}

/// Double-double value (`hi + lo` with `|lo| <= ulp(hi)/2`), used to keep
/// the monodromy product free of association round-off. Near a band
/// tangency the final entries are O(1) but intermediate products reach the
/// square of the segment-entry magnitude, so plain f64 accumulation would
/// bury the trace under cancellation error for deep cells.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        let e = libm::fma(a, b, -p);
        Dd { hi: p, lo: e }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        Self::two_sum(s.hi, s.lo + self.lo + o.lo)
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = Self::two_prod(self.hi, b);
        Self::two_sum(p.hi, p.lo + self.lo * b)
    }

    fn mul(self, o: Self) -> Self {
        let p = Self::two_prod(self.hi, o.hi);
        Self::two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Clone, Copy)]
struct MatrixDd {
    m11: Dd,
    m12: Dd,
    m21: Dd,
    m22: Dd,
}

impl MatrixDd {
    fn from_f64(m: Matrix2) -> Self {
        MatrixDd {
            m11: Dd::from_f64(m.m11),
            m12: Dd::from_f64(m.m12),
            m21: Dd::from_f64(m.m21),
            m22: Dd::from_f64(m.m22),
        }
    }

    /// `s * self` with an f64 factor on the left.
    fn mul_left(self, s: Matrix2) -> Self {
        MatrixDd {
            m11: self.m11.mul_f64(s.m11).add(self.m21.mul_f64(s.m12)),
            m12: self.m12.mul_f64(s.m11).add(self.m22.mul_f64(s.m12)),
            m21: self.m11.mul_f64(s.m21).add(self.m21.mul_f64(s.m22)),
            m22: self.m12.mul_f64(s.m21).add(self.m22.mul_f64(s.m22)),
        }
    }

    fn max_abs(self) -> f64 {
        libm::fabs(self.m11.hi)
            .max(libm::fabs(self.m12.hi))
            .max(libm::fabs(self.m21.hi))
            .max(libm::fabs(self.m22.hi))
    }

    fn trace(self) -> Dd {
        self.m11.add(self.m22)
    }

    fn det(self) -> Dd {
        self.m11.mul(self.m22).add(self.m12.mul(self.m21).neg())
    }

    fn round(self) -> Matrix2 {
        Matrix2 {
            m11: self.m11.value(),
            m12: self.m12.value(),
            m21: self.m21.value(),
            m22: self.m22.value(),
        }
    }
}

fn monodromy_dd(spec: &CrystalSpec, energy: f64) -> Result<MatrixDd> {
    let segs = spec.segments();
    let mut m = MatrixDd::from_f64(segment_transfer(segs[0], energy));
    for seg in &segs[1..] {
        m = m.mul_left(segment_transfer(*seg, energy));
        // Negated comparison so NaN also trips the guard.
        if !(m.max_abs() <= OVERFLOW_GUARD) {
            return Err(Error::Unstable { energy });
        }
    }
    Ok(m)
}

/// Monodromy matrix: fundamental solution across one full period.
pub fn monodromy(spec: &CrystalSpec, energy: f64) -> Result<Matrix2> {
    Ok(monodromy_dd(spec, energy)?.round())
}

/// Trace of the monodromy matrix; `|D| <= 2` marks the allowed bands.
pub fn discriminant(spec: &CrystalSpec, energy: f64) -> Result<f64> {
    Ok(monodromy_dd(spec, energy)?.trace().value())
}

/// Band-edge residual `tr M - target * sqrt(det M)`; its zeros are the
/// Bloch eigenvalues at the requested zone point.
///
/// The rounded `cosh`/`sinh` calls leave each segment matrix with a
/// determinant `1 + eta`, `eta = O(eps * cosh^2)`, and `eta` flutters from
/// one energy sample to the next. The trace inherits that flutter, so for
/// deep cells the raw condition `tr = -+2` is buried in noise near a band
/// tangency. Normalising the target by `sqrt(det M)` cancels the common
/// determinant drift exactly: the residual of a touching pair bottoms out
/// at machine precision instead of `O(eps * cosh^2)`.
fn corrected_edge_residual(spec: &CrystalSpec, energy: f64, target: f64) -> Result<f64> {
    let m = monodromy_dd(spec, energy)?;
    let det = m.det();
    // One Newton step refines sqrt(det) to double-double accuracy.
    let s0 = libm::sqrt(det.hi.max(f64::MIN_POSITIVE));
    let resid = det.add(Dd::two_prod(s0, s0).neg()).value();
    let s = s0 + resid / (2.0 * s0);
    Ok(m.trace().value() - target * s)
}

/// The two momenta at which band edges occur: the zone centre (`k = 0`,
/// `D = +2`) and the zone edge (`k = pi`, `D = -2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlochZone {
    Center,
    Edge,
}

impl BlochZone {
    fn trace_target(self) -> f64 {
        match self {
            BlochZone::Center => 2.0,
            BlochZone::Edge => -2.0,
        }
    }
}

/// Tuning knobs of the band-edge scan. The defaults resolve every feature
/// wider than roughly `1e-12` times the energy scale and are what the
/// convenience wrappers use.
#[derive(Clone, Copy, Debug)]
pub struct ScanSettings {
    /// The scan step is `(depth^2 + (pi/period)^2) / step_divisor`.
    pub step_divisor: f64,
    /// Initial energy ceiling, in units of `(pi/period)^2`.
    pub ceiling_factor: f64,
    /// How many times the ceiling may double before the scan gives up.
    pub max_doublings: u32,
    /// Bisection width for band edges, relative to `max(1, depth^2)`.
    pub root_tol_scale: f64,
    /// Edge-residual magnitude below this at a polished extremum counts as
    /// a tangency, i.e. two bands touching at a single energy.
    pub touch_tol: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            step_divisor: 2000.0,
            ceiling_factor: 20.0,
            max_doublings: 3,
            root_tol_scale: 1e-12,
            touch_tol: 1e-9,
        }
    }
}

/// First `count` Bloch eigenvalues at the given zone point, in ascending
/// order; a doubly degenerate eigenvalue (touching bands) appears twice.
pub fn band_edges(spec: &CrystalSpec, zone: BlochZone, count: usize) -> Result<Vec<f64>> {
    band_edges_with(spec, zone, count, &ScanSettings::default())
}

/// [`band_edges`] with explicit scan settings.
pub fn band_edges_with(
    spec: &CrystalSpec,
    zone: BlochZone,
    count: usize,
    settings: &ScanSettings,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let target = zone.trace_target();
    let lam2 = spec.depth * spec.depth;
    let base = (PI / spec.period()) * (PI / spec.period());
    let step = (lam2 + base) / settings.step_divisor;
    let root_tol = settings.root_tol_scale * lam2.max(1.0);
    let f = |e: f64| -> Result<f64> { corrected_edge_residual(spec, e, target) };

    let mut ceiling = settings.ceiling_factor * base;
    let mut doublings = 0u32;
    let mut roots: Vec<f64> = Vec::new();

    // Start just below the bottom of the potential, where no spectrum lives.
    let start = -lam2 - 1e-9 * (lam2 + base);
    let mut e_prev = start;
    let mut f_prev = f(e_prev)?;
    if f_prev == 0.0 {
        classify_grid_root(&f, e_prev, step, &mut roots)?;
    }
    // (previous-previous sample, its value) for triple-based dip detection.
    let mut window: Option<(f64, f64)> = None;

    while roots.len() < count {
        let e_cur = e_prev + step;
        if e_cur > ceiling {
            if doublings < settings.max_doublings {
                doublings += 1;
                ceiling *= 2.0;
                continue;
            }
            return Err(Error::ScanExhausted {
                requested: count,
                found: roots.len(),
            });
        }
        let f_cur = f(e_cur)?;
        if f_cur == 0.0 {
            classify_grid_root(&f, e_cur, step, &mut roots)?;
        } else if f_prev != 0.0 && (f_prev < 0.0) != (f_cur < 0.0) {
            roots.push(bisect_res(&f, e_prev, e_cur, root_tol)?);
        } else if let Some((e_p2, f_p2)) = window {
            // A dip (or bump) that never reaches the axis at the samples:
            // either a band narrower than the step or a tangency.
            let v_shape =
                f_p2 > 0.0 && f_cur > 0.0 && f_prev > 0.0 && f_prev < f_p2 && f_prev <= f_cur;
            let cap_shape =
                f_p2 < 0.0 && f_cur < 0.0 && f_prev < 0.0 && f_prev > f_p2 && f_prev >= f_cur;
            if v_shape || cap_shape {
                let (x_star, f_star) = refine_extremum(&f, e_p2, e_cur, v_shape)?;
                if libm::fabs(f_star) <= settings.touch_tol {
                    roots.push(x_star);
                    roots.push(x_star);
                } else if (f_star < 0.0) != (f_p2 < 0.0) {
                    roots.push(bisect_res(&f, e_p2, x_star, root_tol)?);
                    roots.push(bisect_res(&f, x_star, e_cur, root_tol)?);
                }
            }
        }
        window = Some((e_prev, f_prev));
        e_prev = e_cur;
        f_prev = f_cur;
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("scan produced a NaN root"));
    roots.truncate(count);
    Ok(roots)
}

/// A sample landing exactly on a root: probe both sides to tell a plain
/// crossing (one root) from a tangency (double root).
fn classify_grid_root(
    f: &impl Fn(f64) -> Result<f64>,
    e: f64,
    step: f64,
    roots: &mut Vec<f64>,
) -> Result<()> {
    let d = 0.1 * step;
    let (fl, fr) = (f(e - d)?, f(e + d)?);
    roots.push(e);
    if fl * fr > 0.0 {
        roots.push(e);
    }
    Ok(())
}

/// Bisection for a fallible objective with a sign change on `[a, b]`.
fn bisect_res(f: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if (flo < 0.0) == (fhi < 0.0) {
        return Err(Error::InvalidInput(format!(
            "[{a}, {b}] does not bracket a band edge"
        )));
    }
    let neg_lo = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid)?;
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

/// Golden-section search on a fallible objective, returning the best
/// probed point once the bracket is narrower than `xtol`.
fn golden_res(
    f: &impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    xtol: f64,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut g1, mut g2) = (f(x1)?, f(x2)?);
    for _ in 0..400 {
        if b - a <= xtol {
            break;
        }
        if g1 <= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - INV_PHI * (b - a);
            g1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + INV_PHI * (b - a);
            g2 = f(x2)?;
        }
    }
    Ok(if g1 <= g2 { (x1, g1) } else { (x2, g2) })
}

/// Locates the extremum of `f` on `[lo, hi]` (minimum if `seek_min`).
///
/// Pushing golden-section search to a near-machine position tolerance only
/// works because the residual it minimises is numerically clean; the usual
/// `sqrt(eps)` stopping rule would leave a tangency looking like a pair of
/// crossings a few parts in 1e6 apart.
fn refine_extremum(
    f: &impl Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    seek_min: bool,
) -> Result<(f64, f64)> {
    let sign = if seek_min { 1.0 } else { -1.0 };
    let g = |x: f64| -> Result<f64> { Ok(sign * f(x)?) };
    let xtol = 4e-15 * libm::fabs(lo).max(libm::fabs(hi)).max(1.0);
    let (x, g_min) = golden_res(&g, lo, hi, xtol)?;
    Ok((x, sign * g_min))
}

/// First two Bloch eigenvalues at both zone points: everything needed to
/// follow the lowest two bands and the gap between them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandExtrema {
    /// Eigenvalues at `k = 0`, ascending.
    pub center: [f64; 2],
    /// Eigenvalues at `k = pi`, ascending.
    pub edge: [f64; 2],
}

impl BandExtrema {
    /// Separation of the two eigenvalues at the zone centre.
    pub fn split_center(&self) -> f64 {
        self.center[1] - self.center[0]
    }

    /// Separation at the zone edge; for this crystal the lowest two bands
    /// close their gap here, so this is the actual band gap.
    pub fn split_edge(&self) -> f64 {
        self.edge[1] - self.edge[0]
    }
}

/// Scans both zone points for the lowest two eigenvalues.
pub fn lowest_bands(spec: &CrystalSpec) -> Result<BandExtrema> {
    lowest_bands_with(spec, &ScanSettings::default())
}

/// [`lowest_bands`] with explicit scan settings.
pub fn lowest_bands_with(spec: &CrystalSpec, settings: &ScanSettings) -> Result<BandExtrema> {
    let c = band_edges_with(spec, BlochZone::Center, 2, settings)?;
    let e = band_edges_with(spec, BlochZone::Edge, 2, settings)?;
    Ok(BandExtrema {
        center: [c[0], c[1]],
        edge: [e[0], e[1]],
    })
}

/// Energy along band 1 or 2 on a uniform momentum grid `0 ..= pi` with
/// `n_k` points, solving `D(E) = 2 cos k` inside the band interval.
pub fn dispersion_curve(spec: &CrystalSpec, band: usize, n_k: usize) -> Result<Vec<(f64, f64)>> {
    if band != 1 && band != 2 {
        return Err(Error::InvalidInput(format!(
            "band index must be 1 or 2, got {band}"
        )));
    }
    if n_k < 2 {
        return Err(Error::InvalidInput(format!(
            "momentum grid needs at least 2 points, got {n_k}"
        )));
    }
    let settings = ScanSettings::default();
    let plus = band_edges_with(spec, BlochZone::Center, 2, &settings)?;
    let minus = band_edges_with(spec, BlochZone::Edge, 2, &settings)?;
    // Band 1 runs from D = +2 up to D = -2; band 2 runs back up.
    let (e_center, e_edge) = if band == 1 {
        (plus[0], minus[0])
    } else {
        (plus[1], minus[1])
    };
    let root_tol = settings.root_tol_scale * (spec.depth * spec.depth).max(1.0);
    let (lo, hi) = (e_center.min(e_edge), e_center.max(e_edge));
    let mut curve = Vec::with_capacity(n_k);
    for j in 0..n_k {
        let k = PI * j as f64 / (n_k - 1) as f64;
        let energy = if j == 0 {
            e_center
        } else if j == n_k - 1 {
            e_edge
        } else {
            let target = 2.0 * libm::cos(k);
            bisect_res(
                &|e: f64| Ok(discriminant(spec, e)? - target),
                lo,
                hi,
                root_tol,
            )?
        };
        curve.push((k, energy));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn depth10_spec(width_a: f64, width_b: f64, d_in: f64, d_out: f64) -> CrystalSpec {
        CrystalSpec::new(10.0, width_a, width_b, d_in, d_out).unwrap()
    }

    /// Fourth-order Runge-Kutta propagation of the fundamental matrix,
    /// an independent check on the closed-form segment matrices.
    fn rk4_discriminant(spec: &CrystalSpec, e: f64, steps_per_seg: usize) -> f64 {
        let mut m = Matrix2::IDENTITY;
        for seg in spec.segments() {
            let g = seg.potential - e; // u'' = g u
            let h = seg.length / steps_per_seg as f64;
            let deriv = |y: Matrix2| Matrix2 {
                m11: y.m21,
                m12: y.m22,
                m21: g * y.m11,
                m22: g * y.m12,
            };
            let add = |y: Matrix2, z: Matrix2, s: f64| Matrix2 {
                m11: y.m11 + s * z.m11,
                m12: y.m12 + s * z.m12,
                m21: y.m21 + s * z.m21,
                m22: y.m22 + s * z.m22,
            };
            let mut y = m;
            for _ in 0..steps_per_seg {
                let k1 = deriv(y);
                let k2 = deriv(add(y, k1, 0.5 * h));
                let k3 = deriv(add(y, k2, 0.5 * h));
                let k4 = deriv(add(y, k3, h));
                let mut acc = add(y, k1, h / 6.0);
                acc = add(acc, k2, h / 3.0);
                acc = add(acc, k3, h / 3.0);
                y = add(acc, k4, h / 6.0);
            }
            m = y;
        }
        m.trace()
    }

    #[test]
    fn segment_matrices_have_unit_determinant() {
        let cases = [
            (Segment { potential: -100.0, length: 0.1 }, -18.9),
            (Segment { potential: 0.0, length: 0.45 }, -18.9),
            (Segment { potential: 0.0, length: 0.45 }, 7.3),
            (Segment { potential: -100.0, length: 0.1 }, -100.0 + 1e-13),
            (Segment { potential: 25.0, length: 2.0 }, 3.0),
        ];
        for (seg, e) in cases {
            let m = segment_transfer(seg, e);
            // cosh^2 - sinh^2 loses precision quadratically in the entry
            // size, so the achievable accuracy scales with max_abs^2.
            let tol = 1e-13 * (m.max_abs() * m.max_abs()).max(1.0);
            assert!(
                libm::fabs(m.det() - 1.0) < tol,
                "det {} for {seg:?} at {e}",
                m.det()
            );
        }
    }

    #[test]
    fn linear_branch_is_exact_shear() {
        let m = segment_transfer(
            Segment {
                potential: -4.0,
                length: 0.7,
            },
            -4.0 + 5e-13,
        );
        assert_eq!(m.m11, 1.0);
        assert_eq!(m.m12, 0.7);
        assert_eq!(m.m21, 0.0);
        assert_eq!(m.m22, 1.0);
    }

    #[test]
    fn discriminant_matches_runge_kutta_oracle() {
        let spec = depth10_spec(0.1, 0.1, 0.5, 0.5 + 1.0 / 150.0);
        for e in [-40.0, -18.9, -5.0, 3.0, 11.0] {
            let d = discriminant(&spec, e).unwrap();
            let oracle = rk4_discriminant(&spec, e, 8000);
            assert!(
                libm::fabs(d - oracle) < 1e-7 * libm::fabs(d).max(1.0),
                "at {e}: {d} vs {oracle}"
            );
        }
        let asym = depth10_spec(0.15, 0.05, 0.5 + 1.0 / 300.0, 0.5 + 1.0 / 300.0);
        for e in [-34.1, -20.0, -2.9, 5.5] {
            let d = discriminant(&asym, e).unwrap();
            let oracle = rk4_discriminant(&asym, e, 8000);
            assert!(
                libm::fabs(d - oracle) < 1e-7 * libm::fabs(d).max(1.0),
                "at {e}: {d} vs {oracle}"
            );
        }
    }

    #[test]
    fn free_crystal_band_edges_are_exact_multiples() {
        // Depth zero leaves a free particle on a ring of period 1: the
        // eigenvalues at the zone points are (n pi)^2, all but the lowest
        // doubly degenerate. This exercises the tangency detection, since
        // the discriminant only touches the target at those points.
        let spec = CrystalSpec::new(0.0, 0.1, 0.1, 0.5, 0.5).unwrap();
        let pi2 = PI * PI;
        let center = band_edges(&spec, BlochZone::Center, 5).unwrap();
        let want_c = [0.0, 4.0 * pi2, 4.0 * pi2, 16.0 * pi2, 16.0 * pi2];
        for (got, want) in center.iter().zip(want_c) {
            assert!(
                libm::fabs(got - want) <= 1e-8 * want.max(1.0),
                "centre: {got} vs {want}"
            );
        }
        let edge = band_edges(&spec, BlochZone::Edge, 4).unwrap();
        let want_e = [pi2, pi2, 9.0 * pi2, 9.0 * pi2];
        for (got, want) in edge.iter().zip(want_e) {
            assert!(
                libm::fabs(got - want) <= 1e-8 * want,
                "edge: {got} vs {want}"
            );
        }
    }

    #[test]
    fn reference_band_extrema_for_the_two_marked_cells() {
        // Frozen from an independent scan of the same geometry. First the
        // fully dimerized cell (equal widths, unequal spacings) ...
        let spec = depth10_spec(0.1, 0.1, 0.5 + 1.0 / 150.0, 0.5);
        let b = lowest_bands(&spec).unwrap();
        let want = [-26.022210887, -3.998895093, -18.047309086, -17.763292035];
        for (got, want) in b.center.iter().chain(b.edge.iter()).zip(want) {
            assert!(libm::fabs(got - want) < 1e-6, "{got} vs {want}");
        }
        // ... then the width-detuned cell with equal spacings.
        let spec = depth10_spec(0.15, 0.05, 0.5 + 1.0 / 300.0, 0.5 + 1.0 / 300.0);
        let b = lowest_bands(&spec).unwrap();
        let want = [-34.133148319, 5.533057989, -32.670056769, -2.931079489];
        for (got, want) in b.center.iter().chain(b.edge.iter()).zip(want) {
            assert!(libm::fabs(got - want) < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn deep_cell_narrow_bands_are_still_resolved() {
        // At depth 40 the lowest pair of bands is orders of magnitude
        // narrower than the scan step, so this goes through the dip
        // refinement path rather than plain sign changes.
        // With equal spacings the true period is half a cell, so the folded
        // pair is degenerate at the zone edge: the split must come out at
        // the tangency resolution, not the scan step.
        let spec = CrystalSpec::new(40.0, 0.1, 0.1, 0.5, 0.5).unwrap();
        let edge = band_edges(&spec, BlochZone::Edge, 2).unwrap();
        let mean = 0.5 * (edge[0] + edge[1]);
        assert!(libm::fabs(mean - -1175.74997271269) < 1.0, "mean {mean}");
        let split = edge[1] - edge[0];
        assert!((0.0..1e-6).contains(&split), "split {split}");
    }

    #[test]
    fn band_edge_evenness_under_well_exchange() {
        // Swapping the two spacings relabels the wells and must leave the
        // zone-point eigenvalues unchanged.
        let a = lowest_bands(&depth10_spec(0.1, 0.1, 0.52, 0.48)).unwrap();
        let b = lowest_bands(&depth10_spec(0.1, 0.1, 0.48, 0.52)).unwrap();
        for (x, y) in a
            .center
            .iter()
            .chain(a.edge.iter())
            .zip(b.center.iter().chain(b.edge.iter()))
        {
            assert!(libm::fabs(x - y) < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn dispersion_interpolates_between_zone_points() {
        let spec = depth10_spec(0.1, 0.1, 0.5 + 1.0 / 150.0, 0.5);
        let curve = dispersion_curve(&spec, 1, 21).unwrap();
        assert_eq!(curve.len(), 21);
        let b = lowest_bands(&spec).unwrap();
        assert!(libm::fabs(curve[0].1 - b.center[0]) < 1e-9);
        assert!(libm::fabs(curve[20].1 - b.edge[0]) < 1e-9);
        // Band 1 rises monotonically and satisfies the band condition.
        for w in curve.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
        for &(k, e) in &curve[1..20] {
            let d = discriminant(&spec, e).unwrap();
            assert!(libm::fabs(d - 2.0 * libm::cos(k)) < 1e-7, "at k {k}");
        }
        let band2 = dispersion_curve(&spec, 2, 21).unwrap();
        assert!(band2[0].1 > band2[20].1);
        assert!(libm::fabs(band2[0].1 - b.center[1]) < 1e-9);
        assert!(libm::fabs(band2[20].1 - b.edge[1]) < 1e-9);
    }

    #[test]
    fn overflow_guard_reports_instability() {
        let spec = CrystalSpec::new(1000.0, 0.1, 0.1, 0.5, 0.5).unwrap();
        assert!(matches!(
            monodromy(&spec, -4e6),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn scan_gives_up_cleanly_when_asked_for_too_much() {
        let spec = depth10_spec(0.1, 0.1, 0.5, 0.5);
        match band_edges(&spec, BlochZone::Center, 200) {
            Err(Error::ScanExhausted { requested, found }) => {
                assert_eq!(requested, 200);
                assert!(found > 0 && found < 200);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn spec_validation_rejects_bad_cells() {
        assert!(CrystalSpec::new(-1.0, 0.1, 0.1, 0.5, 0.5).is_err());
        assert!(CrystalSpec::new(10.0, 0.0, 0.1, 0.5, 0.5).is_err());
        // Wells overlap: spacing smaller than the mean width.
        assert!(CrystalSpec::new(10.0, 0.4, 0.4, 0.3, 0.5).is_err());
        assert!(CrystalSpec::new(10.0, 0.1, 0.1, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn band_edges_zero_count_is_empty() {
        let spec = depth10_spec(0.1, 0.1, 0.5, 0.5);
        assert_eq!(band_edges(&spec, BlochZone::Center, 0).unwrap(), vec![]);
    }

    #[test]
    fn dispersion_rejects_bad_requests() {
        let spec = depth10_spec(0.1, 0.1, 0.5, 0.5);
        assert!(dispersion_curve(&spec, 3, 10).is_err());
        assert!(dispersion_curve(&spec, 0, 10).is_err());
        assert!(dispersion_curve(&spec, 1, 1).is_err());
    }
}
