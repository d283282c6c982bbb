//! Ground state of a single square well `-d^2/dx^2 - depth^2` on
//! `[-width/2, width/2]` (zero potential elsewhere).
//!
//! The even ground state is `A cos(q x)` inside the well and a decaying
//! exponential outside, with `q` fixed by the matching condition
//! `q tan(q width / 2) = kappa`, `kappa = sqrt(depth^2 - q^2)`.

use crate::{Error, Result};
use alloc::format;

/// A square well of depth `depth^2` (so `depth` has the dimension of an
/// inverse length, like a wave number) and the given width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WellParams {
    pub depth: f64,
    pub width: f64,
}

impl WellParams {
    pub fn new(depth: f64, width: f64) -> Result<Self> {
        if !(depth > 0.0) || !depth.is_finite() {
            return Err(Error::InvalidInput(format!(
                "well depth must be positive and finite, got {depth}"
            )));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidInput(format!(
                "well width must be positive and finite, got {width}"
            )));
        }
        Ok(Self { depth, width })
    }

    /// Large-depth limit of the ground-state energy,
    /// `-depth^2 + pi^2 / width^2` (the well bottom plus the energy of a
    /// hard-wall box of the same width).
    pub fn asymptotic_energy(&self) -> f64 {
        use core::f64::consts::PI;
        -self.depth * self.depth + PI * PI / (self.width * self.width)
    }

    /// Whether the well is deep enough that even the asymptotic estimate
    /// of the ground-state energy is negative (`depth * width > pi`).
    pub fn deep(&self) -> bool {
        self.asymptotic_energy() < 0.0
    }
}

/// Normalized even ground state of a square well centred at the origin.
#[derive(Clone, Copy, Debug)]
pub struct BoundState {
    pub params: WellParams,
    /// Ground-state energy, always in `(-depth^2, 0)`.
    pub energy: f64,
    /// Interior wave number: the state is `A cos(q x)` inside the well.
    pub q: f64,
    /// Exterior decay rate: the state falls off as `e^{-kappa |x|}`.
    pub kappa: f64,
    /// Interior amplitude `A` fixing the L2 norm to one.
    pub amplitude: f64,
}

impl BoundState {
    /// Wave-function value at `x` (well centred at the origin).
    pub fn eval(&self, x: f64) -> f64 {
        let half = 0.5 * self.params.width;
        let ax = libm::fabs(x);
        if ax <= half {
            self.amplitude * libm::cos(self.q * x)
        } else {
            self.amplitude * libm::cos(self.q * half) * libm::exp(-self.kappa * (ax - half))
        }
    }

    /// Coefficient `g` of the exterior tail `g e^{-kappa |x|}`
    /// (valid for `|x| >= width/2`).
    pub fn tail_coefficient(&self) -> f64 {
        let half = 0.5 * self.params.width;
        self.amplitude * libm::cos(self.q * half) * libm::exp(self.kappa * half)
    }
}

/// Solves the matching condition for the even ground state: bisection on a
/// guaranteed bracket, then a few Newton steps to polish the root to
/// machine precision.
pub fn ground_state(params: WellParams) -> Result<BoundState> {
    use core::f64::consts::PI;
    let lam = params.depth;
    let w = params.width;
    let q_max = lam.min(PI / w);
    // f is -depth at q -> 0 and positive at the right end of the bracket,
    // where either kappa vanishes (shallow well) or the tangent diverges.
    let f = |q: f64| {
        let kappa = libm::sqrt(((lam - q) * (lam + q)).max(0.0));
        q * libm::tan(0.5 * q * w) - kappa
    };
    let mut lo = q_max * 1e-12;
    let mut hi = q_max * (1.0 - 1e-14);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(Error::InvalidInput(format!(
            "could not bracket the bound state for depth {lam}, width {w} \
             (the well is too shallow to resolve)"
        )));
    }
    for _ in 0..200 {
        if hi - lo <= 1e-13 * q_max {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut q = 0.5 * (lo + hi);
    for _ in 0..3 {
        let kappa = libm::sqrt(((lam - q) * (lam + q)).max(f64::MIN_POSITIVE));
        let c = libm::cos(0.5 * q * w);
        let t = libm::tan(0.5 * q * w);
        let fp = t + 0.5 * q * w / (c * c) + q / kappa;
        let step = f(q) / fp;
        if !step.is_finite() {
            break;
        }
        let next = q - step;
        if next > 0.0 && next < q_max {
            q = next;
        } else {
            break;
        }
    }
    let kappa = libm::sqrt(((lam - q) * (lam + q)).max(0.0));
    let qw = q * w;
    let norm_sq = 0.5 * w + libm::sin(qw) / (2.0 * q) + {
        let c = libm::cos(0.5 * qw);
        c * c / kappa
    };
    let amplitude = 1.0 / libm::sqrt(norm_sq);
    Ok(BoundState {
        params,
        energy: q * q - lam * lam,
        q,
        kappa,
        amplitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    fn state(depth: f64, width: f64) -> BoundState {
        ground_state(WellParams::new(depth, width).unwrap()).unwrap()
    }

    #[test]
    fn reference_energies() {
        // Frozen values from an independent solver for the matching
        // condition (validated against high-precision bisection).
        let cases = [
            (10.0, 0.1, -18.933886448602),
            (20.0, 0.1, -181.501266344131),
            (40.0, 0.1, -1175.74997271269),
            (80.0, 0.1, -5772.644550913303),
        ];
        for (depth, width, want) in cases {
            let s = state(depth, width);
            assert!(
                libm::fabs(s.energy - want) < 1e-8 * libm::fabs(want),
                "depth {depth}: energy {} vs {want}",
                s.energy
            );
        }
        let s = state(10.0, 0.1);
        assert!(libm::fabs(s.q - 9.003672225897) < 1e-9);
        assert!(libm::fabs(s.kappa - 4.351308590367) < 1e-9);
        assert!(libm::fabs(s.amplitude - 1.890443872954) < 1e-9);
    }

    #[test]
    fn matching_condition_holds_to_machine_precision() {
        for (depth, width) in [(10.0, 0.1), (3.0, 0.8), (55.0, 0.21), (1.5, 2.0)] {
            let s = state(depth, width);
            let lhs = s.q * libm::tan(0.5 * s.q * s.params.width);
            assert!(
                libm::fabs(lhs - s.kappa) < 1e-10 * depth,
                "residual {} for depth {depth}",
                lhs - s.kappa
            );
            assert!(libm::fabs(s.energy - (s.q * s.q - depth * depth)) < 1e-12 * depth * depth);
        }
    }

    #[test]
    fn closed_form_norm_matches_quadrature() {
        for (depth, width) in [(10.0, 0.1), (4.0, 0.5), (25.0, 0.15)] {
            let s = state(depth, width);
            let cutoff = 0.5 * width + 40.0 / s.kappa;
            let total = integrate(|x| s.eval(x) * s.eval(x), -cutoff, cutoff, 1e-12);
            assert!(
                libm::fabs(total - 1.0) < 1e-9,
                "norm {total} for depth {depth}"
            );
        }
    }

    #[test]
    fn wave_function_is_continuous_at_the_well_edge() {
        let s = state(10.0, 0.1);
        let half = 0.05;
        let inside = s.amplitude * libm::cos(s.q * half);
        let outside = s.eval(half + 1e-300);
        assert!(libm::fabs(inside - outside) < 1e-14);
        // Tail representation agrees with eval outside the well.
        let g = s.tail_coefficient();
        for x in [0.06, 0.2, 1.0] {
            let tail = g * libm::exp(-s.kappa * x);
            assert!(libm::fabs(tail - s.eval(x)) < 1e-14 * s.eval(x).max(1e-30));
        }
    }

    #[test]
    fn energy_sits_between_well_bottom_and_asymptote() {
        for (depth, width) in [(10.0, 0.1), (40.0, 0.1), (2.0, 1.0), (7.0, 0.33)] {
            let p = WellParams::new(depth, width).unwrap();
            let s = ground_state(p).unwrap();
            assert!(s.energy > -depth * depth);
            assert!(s.energy < 0.0);
            assert!(s.energy < p.asymptotic_energy());
        }
    }

    #[test]
    fn asymptote_tightens_with_depth() {
        // Residual against the hard-wall estimate shrinks roughly like 1/depth.
        let widths = 0.1;
        let r10 = state(10.0, widths).energy - WellParams::new(10.0, widths).unwrap().asymptotic_energy();
        let r20 = state(20.0, widths).energy - WellParams::new(20.0, widths).unwrap().asymptotic_energy();
        let r40 = state(40.0, widths).energy - WellParams::new(40.0, widths).unwrap().asymptotic_energy();
        assert!(r10 < 0.0 && r20 < 0.0 && r40 < 0.0);
        assert!(libm::fabs(r20) < libm::fabs(r10));
        assert!(libm::fabs(r40) < libm::fabs(r20));
    }

    #[test]
    fn deep_flag_matches_sign_of_asymptote() {
        assert!(!WellParams::new(10.0, 0.1).unwrap().deep());
        assert!(WellParams::new(40.0, 0.1).unwrap().deep());
        assert!(WellParams::new(4.0, 1.0).unwrap().deep());
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(WellParams::new(0.0, 0.1).is_err());
        assert!(WellParams::new(-3.0, 0.1).is_err());
        assert!(WellParams::new(10.0, 0.0).is_err());
        assert!(WellParams::new(f64::NAN, 0.1).is_err());
    }
}
