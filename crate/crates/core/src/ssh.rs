//! The dimerized tight-binding chain: Bloch symbol, dispersion, spectral
//! gap, winding index, and finite open chains with edge-mode counting.
//!
//! Site convention: cell `n` carries sites `(A, B)`; `t_in` couples A to B
//! inside a cell, `t_out` couples B to the A of cell `n + 1`.

use crate::numerics::SymTridiag;
use crate::{Error, Result};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use num_complex::Complex64;

/// Hopping pair of the dimerized chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SshParams {
    pub t_in: f64,
    pub t_out: f64,
}

impl SshParams {
    pub fn new(t_in: f64, t_out: f64) -> Result<Self> {
        if !t_in.is_finite() || !t_out.is_finite() {
            return Err(Error::InvalidInput(format!(
                "hoppings must be finite, got ({t_in}, {t_out})"
            )));
        }
        Ok(Self { t_in, t_out })
    }

    /// Off-diagonal entry of the Bloch Hamiltonian, `t_in + t_out e^{-ik}`.
    pub fn bloch_symbol(&self, k: f64) -> Complex64 {
        Complex64::new(self.t_in + self.t_out * libm::cos(k), -self.t_out * libm::sin(k))
    }

    /// The two band energies at crystal momentum `k`, as `(lower, upper)`.
    pub fn dispersion(&self, k: f64) -> (f64, f64) {
        let e = self.bloch_symbol(k).norm();
        (-e, e)
    }

    /// Width of the spectral gap around zero energy,
    /// `2 * | |t_in| - |t_out| |`.
    pub fn gap(&self) -> f64 {
        2.0 * libm::fabs(libm::fabs(self.t_in) - libm::fabs(self.t_out))
    }

    /// Magnitude of the winding number of the Bloch symbol around the
    /// origin as `k` sweeps one Brillouin zone: `1` when the inter-cell
    /// hopping dominates, `0` when the intra-cell hopping does. Fails with
    /// [`Error::GapClosed`] when the two magnitudes tie, since the symbol
    /// then passes through the origin. Uses 512 grid points; see
    /// [`SshParams::winding_with`].
    pub fn winding(&self) -> Result<u32> {
        self.winding_with(512)
    }

    /// [`SshParams::winding`] on an explicit `k` grid of `n_samples`
    /// points. The accumulated angle is grid-robust once the polygon
    /// through the samples avoids the origin, so any `n_samples >= 16`
    /// gives the same index for comfortably gapped parameters.
    pub fn winding_with(&self, n_samples: usize) -> Result<u32> {
        if n_samples < 16 {
            return Err(Error::InvalidInput(format!(
                "winding needs at least 16 momentum samples, got {n_samples}"
            )));
        }
        if libm::fabs(self.t_in) == libm::fabs(self.t_out) {
            return Err(Error::GapClosed);
        }
        // Accumulate principal-branch angle increments over a closed loop.
        let mut total = 0.0;
        let mut prev = self.bloch_symbol(0.0);
        for j in 1..=n_samples {
            let s = self.bloch_symbol(TAU * j as f64 / n_samples as f64);
            let cross = prev.re * s.im - prev.im * s.re;
            let dot = prev.re * s.re + prev.im * s.im;
            total += libm::atan2(cross, dot);
            prev = s;
        }
        Ok(libm::fabs(libm::round(total / TAU)) as u32)
    }
}

/// Open chain of `n_cells` dimers (so `2 n_cells` sites).
#[derive(Clone, Copy, Debug)]
pub struct FiniteChain {
    pub params: SshParams,
    pub n_cells: usize,
}

impl FiniteChain {
    pub fn new(params: SshParams, n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidInput("chain needs at least one cell".into()));
        }
        Ok(Self { params, n_cells })
    }

    /// The real-space Hamiltonian: zero diagonal, off-diagonals alternating
    /// `t_in, t_out, t_in, ...` starting inside the first cell.
    pub fn hamiltonian(&self) -> SymTridiag {
        let n = 2 * self.n_cells;
        let diag = alloc::vec![0.0; n];
        let off: Vec<f64> = (0..n - 1)
            .map(|i| {
                if i % 2 == 0 {
                    self.params.t_in
                } else {
                    self.params.t_out
                }
            })
            .collect();
        SymTridiag::new(diag, off).expect("chain matrix shape is valid by construction")
    }

    /// All `2 n_cells` eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hamiltonian();
        h.lowest(h.dim())
    }

    /// Number of eigenvalues inside `(-tol, tol)`. The default threshold is
    /// a quarter of the bulk gap, which cleanly separates exponentially
    /// small edge energies from the bulk bands once the chain is longer
    /// than a few decay lengths.
    pub fn edge_mode_count(&self, tol: Option<f64>) -> Result<usize> {
        let tol = tol.unwrap_or_else(|| 0.25 * self.params.gap());
        if !(tol >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "edge-mode threshold must be nonnegative, got {tol}"
            )));
        }
        Ok(self
            .eigenvalues()?
            .iter()
            .filter(|e| libm::fabs(**e) < tol)
            .count())
    }
}

/// Uniformly spaced momentum grid `0 ..= pi` with `n` points, handy for
/// dispersion tables.
pub fn momentum_grid(n: usize) -> Vec<f64> {
    if n <= 1 {
        return alloc::vec![0.0; n];
    }
    (0..n).map(|j| PI * j as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_extremes_and_gap() {
        let p = SshParams::new(1.0, 0.4).unwrap();
        let (lo, hi) = p.dispersion(0.0);
        assert!((hi - 1.4).abs() < 1e-15 && (lo + 1.4).abs() < 1e-15);
        let (_, hi_pi) = p.dispersion(PI);
        assert!((hi_pi - 0.6).abs() < 1e-14);
        assert!((p.gap() - 1.2).abs() < 1e-15);
        // Signs only matter through the magnitudes.
        let q = SshParams::new(-1.0, 0.4).unwrap();
        assert!((q.gap() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn winding_follows_dominant_hopping() {
        assert_eq!(SshParams::new(1.0, 0.5).unwrap().winding().unwrap(), 0);
        assert_eq!(SshParams::new(0.5, 1.0).unwrap().winding().unwrap(), 1);
        assert_eq!(SshParams::new(-0.3, 2.0).unwrap().winding().unwrap(), 1);
        assert_eq!(SshParams::new(2.0, -0.3).unwrap().winding().unwrap(), 0);
    }

    #[test]
    fn winding_fails_on_closed_gap() {
        assert!(matches!(
            SshParams::new(0.7, 0.7).unwrap().winding(),
            Err(Error::GapClosed)
        ));
        assert!(matches!(
            SshParams::new(0.7, -0.7).unwrap().winding(),
            Err(Error::GapClosed)
        ));
    }

    #[test]
    fn finite_chain_spectrum_is_symmetric() {
        let chain = FiniteChain::new(SshParams::new(1.0, 0.6).unwrap(), 12).unwrap();
        let evs = chain.eigenvalues().unwrap();
        assert_eq!(evs.len(), 24);
        for i in 0..evs.len() {
            let mirror = evs[evs.len() - 1 - i];
            assert!(
                (evs[i] + mirror).abs() < 1e-11,
                "spectrum not symmetric: {} vs {}",
                evs[i],
                mirror
            );
        }
    }

    #[test]
    fn edge_modes_appear_only_in_the_inverted_phase() {
        let trivial = FiniteChain::new(SshParams::new(1.0, 0.5).unwrap(), 20).unwrap();
        assert_eq!(trivial.edge_mode_count(None).unwrap(), 0);
        let topological = FiniteChain::new(SshParams::new(0.5, 1.0).unwrap(), 20).unwrap();
        assert_eq!(topological.edge_mode_count(None).unwrap(), 2);
    }

    #[test]
    fn momentum_grid_endpoints() {
        let g = momentum_grid(5);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 0.0);
        assert!((g[4] - PI).abs() < 1e-15);
        assert_eq!(momentum_grid(1), alloc::vec![0.0]);
    }
}
