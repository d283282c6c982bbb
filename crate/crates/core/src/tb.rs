//! Tight-binding reduction of the crystal onto the SSH chain.
//!
//! Each well carries one atomic orbital: the single-well ground state
//! translated to the well's centre. Because that state solves its own
//! well's eigenvalue problem exactly, `(H - e0) phi_k` reduces to
//! multiplication by the *other* wells' potential, so every Hamiltonian
//! matrix element is a finite sum of integrals localized on single wells —
//! no differentiation, and closed forms wherever both orbitals are pure
//! exponential tails. The nearest-neighbour elements become the SSH
//! hoppings after rescaling by the dominant one; a finite-difference
//! eigensolve on a finite sample of the crystal provides the independent
//! check that the rescaled low-lying spectrum really converges to the SSH
//! bands.

use crate::bloch::CrystalSpec;
use crate::numerics::{integrate, SymTridiag};
use crate::ssh::SshParams;
use crate::well::{ground_state, BoundState, WellParams};
use crate::{Error, Result};
use alloc::format;
use alloc::vec::Vec;

/// Quadrature tolerance for the integrals that involve an orbital core.
const QUAD_REL_TOL: f64 = 1e-12;

/// Largest finite-difference matrix dimension the eigensolver will accept.
const MAX_FD_DIM: usize = 1 << 22;

/// Atomic orbitals on a finite window of well sites.
///
/// Site `j` is the centre of the `j`-th well: even sites are A wells, odd
/// sites are B wells, with centre-to-centre distances alternating between
/// `spacing_in` (even to odd) and `spacing_out` (odd to the next even).
/// All orbitals are translates of one bound state, which requires the two
/// well widths to be equal.
#[derive(Clone, Copy, Debug)]
pub struct OrbitalBasis {
    pub crystal: CrystalSpec,
    pub state: BoundState,
    pub half_window: u32,
}

impl OrbitalBasis {
    /// Basis with the default window of 8 sites on each side of the origin,
    /// wide enough that every truncated tail sum is below double precision.
    pub fn new(crystal: CrystalSpec) -> Result<Self> {
        Self::with_window(crystal, 8)
    }

    pub fn with_window(crystal: CrystalSpec, half_window: u32) -> Result<Self> {
        if crystal.width_a != crystal.width_b {
            return Err(Error::InvalidInput(format!(
                "orbital basis needs equal well widths, got {} and {}",
                crystal.width_a, crystal.width_b
            )));
        }
        if !(crystal.depth > 0.0) {
            return Err(Error::InvalidInput(format!(
                "orbital basis needs a strictly attractive well, got depth {}",
                crystal.depth
            )));
        }
        if half_window < 4 {
            return Err(Error::InvalidInput(format!(
                "half_window must be at least 4, got {half_window}"
            )));
        }
        let state = ground_state(WellParams::new(crystal.depth, crystal.width_a)?)?;
        Ok(OrbitalBasis {
            crystal,
            state,
            half_window,
        })
    }

    /// Centre of well `j`, with well 0 at the origin.
    pub fn site(&self, j: i64) -> Result<f64> {
        self.check_index(j)?;
        let period = self.crystal.period();
        Ok(j.div_euclid(2) as f64 * period + j.rem_euclid(2) as f64 * self.crystal.spacing_in)
    }

    fn check_index(&self, j: i64) -> Result<()> {
        if j.unsigned_abs() > u64::from(self.half_window) {
            return Err(Error::OutsideWindow {
                index: j,
                half_window: self.half_window,
            });
        }
        Ok(())
    }
}

/// `int_a^b exp(-kappa |x - s1|) exp(-kappa |x - s2|) dx` for an interval
/// that contains neither centre. All exponents are kept non-positive so
/// the result underflows gracefully for far-apart sites.
fn tail_pair_integral(kappa: f64, s1: f64, s2: f64, a: f64, b: f64) -> f64 {
    let (s_lo, s_hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
    debug_assert!(a < b && (s_hi <= a || s_lo >= b || (s_lo <= a && s_hi >= b)));
    if s_hi <= a {
        // Both centres left of the interval.
        libm::exp(-kappa * ((a - s_lo) + (a - s_hi))) * (1.0 - libm::exp(-2.0 * kappa * (b - a)))
            / (2.0 * kappa)
    } else if s_lo >= b {
        // Both right.
        libm::exp(-kappa * ((s_lo - b) + (s_hi - b))) * (1.0 - libm::exp(-2.0 * kappa * (b - a)))
            / (2.0 * kappa)
    } else {
        // One on each side: the decay rates cancel and the product is flat.
        libm::exp(-kappa * (s_hi - s_lo)) * (b - a)
    }
}

/// Hamiltonian matrix element `<phi_j, (H - e0) phi_k>`.
///
/// Written as `-depth^2 sum_{m != k} int_{well m} phi_j phi_k`: the sum
/// runs over every well in the basis window except the one whose orbital
/// supplies the eigenvalue identity. The `m = j` term (orbital core times
/// a neighbour's tail) is done by adaptive quadrature; every other term is
/// a product of two pure exponentials with a closed form.
pub fn matrix_element(basis: &OrbitalBasis, j: i64, k: i64) -> Result<f64> {
    basis.check_index(j)?;
    basis.check_index(k)?;
    if (j - k).unsigned_abs() > 3 {
        return Err(Error::InvalidInput(format!(
            "matrix elements are only computed for |j - k| <= 3 \
             (beyond that they are below double-precision noise), got j = {j}, k = {k}"
        )));
    }
    let state = &basis.state;
    let half = 0.5 * state.params.width;
    let depth2 = basis.crystal.depth * basis.crystal.depth;
    let s_j = basis.site(j)?;
    let s_k = basis.site(k)?;
    let g = state.tail_coefficient();
    let hw = i64::from(basis.half_window);

    let mut total = 0.0;
    for m in -hw..=hw {
        if m == k {
            continue;
        }
        let s_m = basis.site(m)?;
        let (a, b) = (s_m - half, s_m + half);
        let piece = if m == j {
            integrate(
                |x| state.eval(x - s_j) * state.eval(x - s_k),
                a,
                b,
                QUAD_REL_TOL,
            )
        } else {
            g * g * tail_pair_integral(state.kappa, s_j, s_k, a, b)
        };
        total -= depth2 * piece;
    }
    Ok(total)
}

/// L2 inner product `<phi_j, phi_k>` by exact piecewise integration:
/// adaptive quadrature over each orbital core, closed forms over the three
/// pure-tail regions (left of both wells, between them, right of both).
pub fn orbital_overlap(basis: &OrbitalBasis, j: i64, k: i64) -> Result<f64> {
    let state = &basis.state;
    let half = 0.5 * state.params.width;
    let kappa = state.kappa;
    let g = state.tail_coefficient();
    let s_j = basis.site(j)?;
    let s_k = basis.site(k)?;
    let (s_lo, s_hi) = if s_j <= s_k { (s_j, s_k) } else { (s_k, s_j) };

    let core = |centre: f64| -> f64 {
        integrate(
            |x| state.eval(x - s_j) * state.eval(x - s_k),
            centre - half,
            centre + half,
            QUAD_REL_TOL,
        )
    };
    // Open-ended tails: both orbitals decay at the same rate, so
    // int_{-inf}^{a} exp(kappa (2x - s1 - s2)) dx has a one-line value.
    let outer_left = g * g * libm::exp(-kappa * ((s_lo - (s_lo - half)) + (s_hi - (s_lo - half))))
        / (2.0 * kappa);
    let outer_right = g * g * libm::exp(-kappa * (((s_hi + half) - s_lo) + ((s_hi + half) - s_hi)))
        / (2.0 * kappa);

    if j == k {
        return Ok(outer_left + core(s_j) + outer_right);
    }
    let between = g * g * tail_pair_integral(kappa, s_lo, s_hi, s_lo + half, s_hi - half);
    Ok(outer_left + core(s_lo) + between + core(s_hi) + outer_right)
}

/// Nearest-neighbour hoppings of the reduced chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoppingReport {
    /// Well depth parameter of the crystal the report was computed for.
    pub lambda: f64,
    /// Spacing asymmetry: `spacing_out - spacing_in = alpha / lambda`.
    pub alpha: f64,
    /// Intra-cell hopping `<phi_0, (H - e0) phi_1>` (across `spacing_in`).
    pub rho1: f64,
    /// Inter-cell hopping `<phi_1, (H - e0) phi_2>` (across `spacing_out`).
    pub rho2: f64,
    /// `rho2 / rho1`; tends to `exp(-alpha)` as the wells deepen.
    pub ratio: f64,
}

/// Computes both nearest-neighbour hoppings and their ratio.
///
/// `alpha` is the depth-scaled spacing asymmetry and may be negative (then
/// `spacing_out < spacing_in` and the inter-cell hopping dominates); the
/// crystal must satisfy `spacing_out = spacing_in + alpha / depth` to
/// within rounding, so the report is tied to a definite asymmetry.
pub fn hopping_report(crystal: &CrystalSpec, alpha: f64) -> Result<HoppingReport> {
    let lambda = crystal.depth;
    let want = crystal.spacing_in + alpha / lambda;
    if libm::fabs(crystal.spacing_out - want) > 1e-12 * crystal.period() {
        return Err(Error::InvalidInput(format!(
            "spacing_out = {} is not spacing_in + alpha/depth = {want} \
             (alpha = {alpha}, depth = {lambda})",
            crystal.spacing_out
        )));
    }
    let basis = OrbitalBasis::new(*crystal)?;
    let rho1 = matrix_element(&basis, 0, 1)?;
    let rho2 = matrix_element(&basis, 1, 2)?;
    if rho1 == 0.0 {
        return Err(Error::InvalidInput(format!(
            "intra-cell hopping vanished for depth {lambda}; the wells are \
             too far apart to couple at double precision"
        )));
    }
    Ok(HoppingReport {
        lambda,
        alpha,
        rho1,
        rho2,
        ratio: rho2 / rho1,
    })
}

/// SSH hoppings obtained by rescaling with the dominant matrix element:
/// the dominant slot becomes 1, the other the measured ratio. On-site
/// corrections and orbital overlaps are dropped — the reduction keeps the
/// leading order only.
///
/// Hoppings that agree to within the quadrature tolerance (equal spacings,
/// up to noise) put the limit exactly at the trivial/non-trivial
/// transition, where it has no index; that is reported as
/// [`Error::GapClosed`] rather than letting sub-noise digits pick a side.
pub fn ssh_limit(report: &HoppingReport) -> Result<SshParams> {
    let (a1, a2) = (libm::fabs(report.rho1), libm::fabs(report.rho2));
    if libm::fabs(a1 - a2) <= 1e-12 * a1.max(a2) {
        return Err(Error::GapClosed);
    }
    if a1 >= a2 {
        SshParams::new(1.0, report.rho2 / report.rho1)
    } else {
        SshParams::new(report.rho1 / report.rho2, 1.0)
    }
}

/// `int_{wl}^{wr} hat(x) dx` for the unit hat function centred at `x0`
/// with support `[x0 - h, x0 + h]`; the well edges generically fall
/// between grid points, and this weighting keeps the discretized
/// potential's leading error independent of where they fall (the raw
/// midpoint-cell average leaves an `O(h^2)` term whose size depends on the
/// edge's offset within its grid cell, which would not cancel between two
/// differently aligned grids).
fn hat_cover(x0: f64, h: f64, wl: f64, wr: f64) -> f64 {
    let g = |x: f64| {
        let u = ((x - x0) / h).clamp(-1.0, 1.0);
        h * (u - 0.5 * u * libm::fabs(u))
    };
    g(wr) - g(wl)
}

/// Second-order finite-difference matrix for the truncated crystal on
/// `[0, n_cells * period]` with Dirichlet walls, and its grid spacing.
///
/// The first well starts half an outer gap into the domain, so both walls
/// sit in the middle of vacuum stretches.
fn crystal_fd_matrix(
    crystal: &CrystalSpec,
    n_cells: usize,
    grid_points_per_cell: usize,
) -> Result<(SymTridiag, f64)> {
    let period = crystal.period();
    let n = n_cells
        .checked_mul(grid_points_per_cell)
        .and_then(|v| v.checked_sub(1))
        .ok_or_else(|| Error::InvalidInput("grid size overflow".into()))?;
    if n > MAX_FD_DIM {
        return Err(Error::ResourceLimit {
            requested: n,
            limit: MAX_FD_DIM,
        });
    }
    let h = period / grid_points_per_cell as f64;
    let depth2 = crystal.depth * crystal.depth;
    let offset = 0.5 * crystal.gap_out();
    let inv_h2 = 1.0 / (h * h);

    // Hat-weighted well coverage around grid point x for the truncated
    // crystal.
    let cover = |x: f64| -> f64 {
        let mut covered = 0.0;
        let c_lo = libm::floor((x - h) / period) as i64 - 1;
        let c_hi = libm::floor((x + h) / period) as i64 + 1;
        for c in c_lo.max(0)..=c_hi.min(n_cells as i64 - 1) {
            let cell = c as f64 * period + offset;
            let b_left = cell + crystal.width_a + crystal.gap_in();
            covered += hat_cover(x, h, cell, cell + crystal.width_a);
            covered += hat_cover(x, h, b_left, b_left + crystal.width_b);
        }
        covered
    };

    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let x = (i + 1) as f64 * h;
        diag.push(2.0 * inv_h2 - depth2 * cover(x) / h);
    }
    let off = alloc::vec![-inv_h2; n - 1];
    Ok((SymTridiag::new(diag, off)?, h))
}

/// Lowest `2 * n_cells` Dirichlet eigenvalues of the truncated crystal,
/// ascending — the finite-volume stand-in for the first two bands.
pub fn finite_volume_spectrum(
    crystal: &CrystalSpec,
    n_cells: usize,
    grid_points_per_cell: usize,
) -> Result<Vec<f64>> {
    check_fd_resolution(n_cells, grid_points_per_cell)?;
    let (tri, _) = crystal_fd_matrix(crystal, n_cells, grid_points_per_cell)?;
    tri.lowest(2 * n_cells)
}

fn check_fd_resolution(n_cells: usize, grid_points_per_cell: usize) -> Result<()> {
    if n_cells < 8 {
        return Err(Error::InvalidInput(format!(
            "need at least 8 cells for a meaningful bulk spectrum, got {n_cells}"
        )));
    }
    if grid_points_per_cell < 256 {
        return Err(Error::InvalidInput(format!(
            "need at least 256 grid points per cell, got {grid_points_per_cell}"
        )));
    }
    Ok(())
}

/// Dirichlet ground-state energy of a single well on the same grid spacing
/// as the crystal discretization, with at least `pad` of vacuum on each
/// side. `frac` places the well's left edge at that fraction of a grid
/// interval past a grid point, mirroring the well's position within the
/// crystal grid; the residual discretization error near a potential step
/// depends on this offset, so matching it (and the spacing `h` exactly)
/// makes the single-well bias cancel against the crystal's when the two
/// energies are subtracted.
fn fd_single_well(depth: f64, width: f64, h: f64, pad: f64, frac: f64) -> Result<f64> {
    let pad_pts = libm::ceil(pad / h) as usize;
    let wl = (pad_pts as f64 + frac) * h;
    let wr = wl + width;
    let n_iv = libm::ceil((wr + pad) / h) as usize;
    let n = n_iv - 1;
    if n > MAX_FD_DIM {
        return Err(Error::ResourceLimit {
            requested: n,
            limit: MAX_FD_DIM,
        });
    }
    let inv_h2 = 1.0 / (h * h);
    let depth2 = depth * depth;
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let x = (i + 1) as f64 * h;
        diag.push(2.0 * inv_h2 - depth2 * hat_cover(x, h, wl, wr) / h);
    }
    let off = alloc::vec![-inv_h2; n - 1];
    SymTridiag::new(diag, off)?.eigenvalue(0)
}

/// Finite-volume spectrum rescaled onto SSH units, with the comparison
/// statistics against the ideal dimerized bands.
#[derive(Clone, Debug)]
pub struct SpectralComparison {
    /// Hoppings used for the rescaling.
    pub report: HoppingReport,
    /// `(E - e0_ref) / |dominant hopping|` for each retained eigenvalue.
    pub scaled: Vec<f64>,
    /// Eigenvalues dropped because over half their eigenvector mass sits
    /// in the first or last cell (Dirichlet wall artifacts, edge modes).
    pub excluded: usize,
    /// Largest distance from a retained rescaled eigenvalue to the SSH
    /// band set `+-[1 - r, 1 + r]`, `r` the hopping ratio magnitude.
    pub band_distance: f64,
    /// Retained eigenvalues strictly inside the middle half of the gap,
    /// `|x| < (1 - r) / 2`; zero when the gap genuinely persists.
    pub midgap: usize,
}

/// Rescales the finite-volume spectrum by the dominant hopping and
/// measures how close it lands to the two SSH bands.
///
/// The reference energy is the *finite-difference* single-well ground
/// state on the same grid spacing, so the discretization bias common to
/// both computations drops out of the difference `E - e0_ref`.
pub fn rescaled_band_distance(
    crystal: &CrystalSpec,
    alpha: f64,
    n_cells: usize,
    grid_points_per_cell: usize,
) -> Result<SpectralComparison> {
    check_fd_resolution(n_cells, grid_points_per_cell)?;
    let report = hopping_report(crystal, alpha)?;
    let dominant = libm::fabs(report.rho1).max(libm::fabs(report.rho2));
    let r = libm::fabs(report.rho1).min(libm::fabs(report.rho2)) / dominant;

    let (tri, h) = crystal_fd_matrix(crystal, n_cells, grid_points_per_cell)?;
    // Reference energies aligned to each sublattice's grid offset; their
    // mean is the discrete analogue of the isolated-well energy.
    let edge_a = 0.5 * crystal.gap_out();
    let edge_b = edge_a + crystal.width_a + crystal.gap_in();
    let frac = |p: f64| p / h - libm::floor(p / h);
    let e0_a = fd_single_well(crystal.depth, crystal.width_a, h, 1.0, frac(edge_a))?;
    let e0_b = fd_single_well(crystal.depth, crystal.width_b, h, 1.0, frac(edge_b))?;
    let e0_ref = 0.5 * (e0_a + e0_b);
    let n = tri.dim();
    let first_cell = grid_points_per_cell - 1;
    let last_cell_start = (n_cells - 1) * grid_points_per_cell;

    let mut scaled = Vec::new();
    let mut excluded = 0usize;
    let mut band_distance = 0.0f64;
    let mut midgap = 0usize;
    for k in 0..2 * n_cells {
        let ev = tri.eigenvalue(k)?;
        let vec = tri.eigenvector(ev)?;
        let outer_mass: f64 = vec[..first_cell]
            .iter()
            .chain(vec[last_cell_start..n].iter())
            .map(|v| v * v)
            .sum();
        if outer_mass > 0.5 {
            excluded += 1;
            continue;
        }
        let x = (ev - e0_ref) / dominant;
        let ax = libm::fabs(x);
        let dist = if ax < 1.0 - r {
            (1.0 - r) - ax
        } else if ax > 1.0 + r {
            ax - (1.0 + r)
        } else {
            0.0
        };
        band_distance = band_distance.max(dist);
        if ax < 0.5 * (1.0 - r) {
            midgap += 1;
        }
        scaled.push(x);
    }
    Ok(SpectralComparison {
        report,
        scaled,
        excluded,
        band_distance,
        midgap,
    })
}
