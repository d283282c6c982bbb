//! A gap-preserving path between the two dimerization patterns.
//!
//! The deformation swaps the short and long well spacings as the parameter
//! runs over `[-1, 1]`. Swapping spacings through the symmetric point would
//! close the band gap at the zone edge (the period halves there), so a
//! transient width asymmetry is switched on away from the endpoints: one
//! well widens, the other narrows, and the resulting on-site detuning holds
//! the gap open through the crossover. Both endpoints have equal widths and
//! thus admit the tight-binding reduction — yet their SSH limits carry
//! different winding indices, even though the path between them never
//! closes the gap. The scan in this module produces that verdict by direct
//! computation: [`gap_scan`] tracks the lowest two Bloch bands along the
//! path, and [`endpoint_topology`] reduces the two endpoint crystals.

use alloc::format;
use alloc::vec::Vec;

use crate::bloch::{lowest_bands, CrystalSpec};
use crate::tb::{hopping_report, ssh_limit};
use crate::{Error, Result};

/// Parameters of the deformation family.
///
/// The two spacings interpolate between `(d + alpha/lambda, d)` and
/// `(d, d + alpha/lambda)`; the two widths split symmetrically about `w`
/// by up to `beta` at the midpoint and rejoin at the endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomotopyConfig {
    /// Well depth parameter (the potential is `-lambda^2` inside wells).
    pub lambda: f64,
    /// Base center-to-center spacing.
    pub d: f64,
    /// Base well width.
    pub w: f64,
    /// Spacing-difference amplitude: the long spacing is `d + alpha/lambda`.
    pub alpha: f64,
    /// Width-asymmetry amplitude reached at the midpoint of the path.
    pub beta: f64,
    /// Number of uniform samples over `[-1, 1]` used by [`gap_scan`].
    pub n_eps: usize,
}

impl HomotopyConfig {
    pub fn new(
        lambda: f64,
        d: f64,
        w: f64,
        alpha: f64,
        beta: f64,
        n_eps: usize,
    ) -> Result<Self> {
        let config = HomotopyConfig {
            lambda,
            d,
            w,
            alpha,
            beta,
            n_eps,
        };
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!(
                "spacing amplitude must be nonnegative and finite, got {alpha}"
            )));
        }
        if !(0.0..config.w).contains(&beta) {
            return Err(Error::InvalidInput(format!(
                "width amplitude must satisfy 0 <= beta < w, got beta = {beta}, w = {w}"
            )));
        }
        if n_eps < 3 {
            return Err(Error::InvalidInput(format!(
                "the scan needs at least 3 samples to include both endpoints \
                 and the midpoint, got {n_eps}"
            )));
        }
        // The spacings are linear in eps and the widths in |eps|, so the
        // extreme geometries occur at the endpoints and the midpoint;
        // building those three rejects everything else that can go wrong
        // (non-positive lengths, overlapping wells) with the crystal
        // validator's own messages.
        for eps in [-1.0, 0.0, 1.0] {
            deformed_spec(&config, eps)?;
        }
        Ok(config)
    }
}

/// The parameters behind the reference gap-persistence scan:
/// `lambda = 10, d = 1/2, w = 1/10, alpha = 1/15, beta = 1/20`,
/// 201 samples.
impl Default for HomotopyConfig {
    fn default() -> Self {
        HomotopyConfig {
            lambda: 10.0,
            d: 0.5,
            w: 0.1,
            alpha: 1.0 / 15.0,
            beta: 1.0 / 20.0,
            n_eps: 201,
        }
    }
}

/// The crystal at path position `eps`.
///
/// Spacings: `spacing_in = d + alpha (1 - eps) / (2 lambda)`,
/// `spacing_out = d + alpha (1 + eps) / (2 lambda)`; widths:
/// `w ± beta (1 - |eps|)`. At `eps = -1` the intra-cell spacing is the
/// long one (weak intra-cell coupling), at `eps = +1` it is the short one;
/// widths are equal exactly at the endpoints.
pub fn deformed_spec(config: &HomotopyConfig, eps: f64) -> Result<CrystalSpec> {
    if !(-1.0..=1.0).contains(&eps) {
        return Err(Error::InvalidInput(format!(
            "path parameter must lie in [-1, 1], got {eps}"
        )));
    }
    let stretch = config.alpha / (2.0 * config.lambda);
    let split = config.beta * (1.0 - libm::fabs(eps));
    CrystalSpec::new(
        config.lambda,
        config.w + split,
        config.w - split,
        config.d + stretch * (1.0 - eps),
        config.d + stretch * (1.0 + eps),
    )
}

/// One sample of the gap scan: the lowest two Bloch eigenvalues at the
/// zone center and zone edge, and the two separations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapScanRow {
    pub eps: f64,
    /// Lowest two eigenvalues at `k = 0`.
    pub mu1_0: f64,
    pub mu2_0: f64,
    /// Lowest two eigenvalues at `k = pi`.
    pub mu1_pi: f64,
    pub mu2_pi: f64,
    /// `mu2_0 - mu1_0`.
    pub gap0: f64,
    /// `mu2_pi - mu1_pi`; this is where the undeformed crossover would
    /// close, so it is the quantity the scan is really watching.
    pub gap_pi: f64,
}

/// The full scan and its headline number.
#[derive(Clone, Debug, PartialEq)]
pub struct GapScan {
    /// One row per sample, in increasing `eps` order.
    pub rows: Vec<GapScanRow>,
    /// Minimum over the scan of `min(gap0, gap_pi)`: the certified gap
    /// along the whole path.
    pub min_gap: f64,
}

/// The `i`-th of `n` uniform samples over `[-1, 1]`.
///
/// Computed as an integer ratio so the grid is exactly symmetric under
/// negation: sample `n - 1 - i` is the exact IEEE negation of sample `i`,
/// and the midpoint of an odd grid is exactly zero.
pub fn eps_sample(i: usize, n: usize) -> f64 {
    let last = (n - 1) as i64;
    (2 * i as i64 - last) as f64 / last as f64
}

/// One row of the gap scan, independent of every other row. The scan
/// itself calls this serially; callers that want parallelism can map it
/// over [`eps_sample`] values themselves, since rows share no state.
pub fn scan_row(config: &HomotopyConfig, eps: f64) -> Result<GapScanRow> {
    let spec = deformed_spec(config, eps)?;
    let bands = lowest_bands(&spec)?;
    Ok(GapScanRow {
        eps,
        mu1_0: bands.center[0],
        mu2_0: bands.center[1],
        mu1_pi: bands.edge[0],
        mu2_pi: bands.edge[1],
        gap0: bands.split_center(),
        gap_pi: bands.split_edge(),
    })
}

/// Tracks the lowest two bands over `n_eps` uniform path samples.
pub fn gap_scan(config: &HomotopyConfig) -> Result<GapScan> {
    let mut rows = Vec::with_capacity(config.n_eps);
    let mut min_gap = f64::INFINITY;
    for i in 0..config.n_eps {
        let row = scan_row(config, eps_sample(i, config.n_eps))?;
        min_gap = min_gap.min(row.gap0.min(row.gap_pi));
        rows.push(row);
    }
    Ok(GapScan { rows, min_gap })
}

/// Winding indices of the SSH limits at `eps = -1` and `eps = +1`.
///
/// Both endpoints have equal widths, so the tight-binding reduction
/// applies; the sign of the spacing difference alternates between them,
/// which is why the two indices always differ: the pair is `(1, 0)` for
/// `alpha > 0`. Fails with [`Error::GapClosed`] when `alpha = 0`, where
/// both limits sit exactly at the transition.
pub fn endpoint_topology(config: &HomotopyConfig) -> Result<(u32, u32)> {
    let index_at = |eps: f64, alpha: f64| -> Result<u32> {
        let spec = deformed_spec(config, eps)?;
        let report = hopping_report(&spec, alpha)?;
        ssh_limit(&report)?.winding()
    };
    // spacing_out - spacing_in is -alpha/lambda at the left endpoint and
    // +alpha/lambda at the right one.
    Ok((
        index_at(-1.0, -config.alpha)?,
        index_at(1.0, config.alpha)?,
    ))
}
