//! Azimuthally symmetric eigenmodes around the straightened wire.
//!
//! Two independent routes are provided. The analytic route matches the
//! interior boundary layer `exp[(rho - R1)/delta]` to the exterior mixture
//! `a J0(k rho) + b Y0(k rho)` and counts modes with a boundary condition at
//! `R_norm`. The oracle route discretizes
//! `-(1/rho)(rho f')' + V f = k^2 f`, `V = 1/delta^2` inside the wire, with
//! linear finite elements and solves the resulting symmetric tridiagonal
//! eigenproblem. Modes with nonzero angular momentum are not computed.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::physical::{RingGeometry, CGS};
use crate::quadrature::gauss_kronrod_15;
use crate::special::{bessel_j0, bessel_j1, bessel_y0, bessel_y1, scan_roots};
use crate::tridiag::SymTridiagonal;

/// Condition imposed on the exterior solution at `R_norm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Dirichlet,
    Neumann,
}

/// Whether the superconducting wire is present in the oracle problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    Wire,
    /// `V = 0` everywhere: the bare cylinder, solved by J0 zeros.
    FreeField,
}

/// Mode mass in the oscillator Hamiltonian, 1/(4 pi c^2).
pub fn mode_mass() -> f64 {
    1.0 / (4.0 * PI * CGS.c * CGS.c)
}

/// Upper bound on `k R1` for the low-frequency matched form.
pub const LOW_FREQUENCY_LIMIT: f64 = 0.1;
/// Lower bound on `k R_norm` for the far zone to exist inside the tube.
pub const FAR_ZONE_MIN: f64 = 3.0;

// ---------------------------------------------------------------------------
// Matched analytic profile

/// Exterior Bessel mixture matched in value and slope to a unit interior
/// boundary layer at `R1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedProfile {
    pub k: f64,
    pub r1: f64,
    pub delta: f64,
    /// Coefficient of J0(k rho).
    pub a: f64,
    /// Coefficient of Y0(k rho).
    pub b: f64,
}

impl MatchedProfile {
    pub fn new(k: f64, r1: f64, delta: f64) -> Self {
        let x = k * r1;
        let h = 0.5 * PI * r1;
        let a = h * (-k * bessel_y1(x) - bessel_y0(x) / delta);
        let b = h * (bessel_j0(x) / delta + k * bessel_j1(x));
        Self { k, r1, delta, a, b }
    }

    /// Profile value; equals 1 at `R1`.
    pub fn value(&self, rho: f64) -> f64 {
        if rho < self.r1 {
            ((rho - self.r1) / self.delta).exp()
        } else {
            let x = self.k * rho;
            self.a * bessel_j0(x) + self.b * bessel_y0(x)
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        if rho < self.r1 {
            ((rho - self.r1) / self.delta).exp() / self.delta
        } else {
            self.exterior_derivative(rho)
        }
    }

    fn exterior_derivative(&self, rho: f64) -> f64 {
        let x = self.k * rho;
        -self.k * (self.a * bessel_j1(x) + self.b * bessel_y1(x))
    }

    /// (exterior value - 1, exterior slope * delta - 1) at `R1`.
    pub fn matching_residuals(&self) -> (f64, f64) {
        let x = self.k * self.r1;
        let v = self.a * bessel_j0(x) + self.b * bessel_y0(x);
        let d = self.exterior_derivative(self.r1);
        (v - 1.0, d * self.delta - 1.0)
    }

    /// Function whose zeros in `k` are the allowed wavenumbers.
    fn boundary_residual(&self, boundary: Boundary, r_norm: f64) -> f64 {
        let x = self.k * r_norm;
        match boundary {
            Boundary::Dirichlet => self.a * bessel_j0(x) + self.b * bessel_y0(x),
            Boundary::Neumann => self.a * bessel_j1(x) + self.b * bessel_y1(x),
        }
    }
}

/// Log-accurate normalized amplitude
/// `A = (k / (2 L R_norm))^{1/2} (delta/R1) / |ln k R1|` for a tube of
/// radius `r_norm` and length `length`.
pub fn normalized_amplitude(k: f64, r1: f64, delta: f64, r_norm: f64, length: f64) -> Result<f64> {
    require_positive("k", k)?;
    let log = (k * r1).ln();
    if log == 0.0 {
        return Err(Error::Domain("k R1 = 1: the exterior logarithm vanishes".into()));
    }
    Ok((k / (2.0 * length * r_norm)).sqrt() * (delta / r1) / log.abs())
}

/// One analytic mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSolution {
    /// 1-based mode index.
    pub n: usize,
    /// Wavenumber, 1/cm.
    pub k: f64,
    /// Eigenfrequency c k, 1/s.
    pub omega: f64,
    /// Interior amplitude, cm^{-3/2}.
    pub a_n: f64,
    /// Coefficient of ln(rho/R1) near the surface, A_n R1/delta.
    pub b_n: f64,
    /// f_n(R1).
    pub surface_value: f64,
    /// max |f_n| for rho in (R1, R_norm].
    pub exterior_peak: f64,
    /// Oscillator mass, s^2/cm^2.
    pub mass: f64,
    #[serde(skip)]
    pub profile: MatchedProfile,
}

impl ModeSolution {
    pub fn value_at(&self, rho: f64) -> f64 {
        self.a_n * self.profile.value(rho)
    }

    /// Near-surface form A_n (1 + (R1/delta) ln(rho/R1)), valid for rho >= R1.
    pub fn near_exterior(&self, rho: f64) -> f64 {
        self.a_n + self.b_n * (rho / self.profile.r1).ln()
    }

    /// Far-field form -A_n (R1/delta) ln(k R1) J0(k rho).
    pub fn far_field(&self, rho: f64) -> f64 {
        -self.b_n * (self.k * self.profile.r1).ln() * bessel_j0(self.k * rho)
    }

    pub const CSV_HEADER: &'static str = "n,k_n,omega_n,A_n,surface_value";

    pub fn csv_row(&self) -> String {
        use crate::report::sci;
        format!(
            "{},{},{},{},{}",
            self.n,
            sci(self.k),
            sci(self.omega),
            sci(self.a_n),
            sci(self.surface_value)
        )
    }
}

/// Selects an analytic mode by index or by wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeTarget {
    Index(usize),
    /// Evaluates the matched form at this wavenumber; the reported index is
    /// the asymptotic count `round(k R_norm / pi)`, at least 1.
    Wavenumber(f64),
}

pub fn analytic_mode(geom: &RingGeometry, target: ModeTarget, boundary: Boundary) -> Result<ModeSolution> {
    let (n, k) = match target {
        ModeTarget::Index(n) => {
            if n == 0 {
                return Err(Error::validation("n", "mode index is 1-based"));
            }
            let k_limit = LOW_FREQUENCY_LIMIT / geom.r1();
            let mut k_max = ((n as f64 + 2.0) * PI / geom.r_norm()).min(k_limit);
            loop {
                let ks = mode_wavenumbers(geom, k_max, boundary)?;
                if ks.len() >= n {
                    break (n, ks[n - 1]);
                }
                if k_max >= k_limit {
                    return Err(Error::Domain(format!(
                        "mode {n} lies above the low-frequency limit k R1 = {LOW_FREQUENCY_LIMIT}"
                    )));
                }
                k_max = (2.0 * k_max).min(k_limit);
            }
        }
        ModeTarget::Wavenumber(k) => {
            require_positive("k", k)?;
            let n = ((k * geom.r_norm() / PI).round() as usize).max(1);
            (n, k)
        }
    };
    check_mode_regime(geom, k)?;
    let a_n = normalized_amplitude(k, geom.r1(), geom.delta(), geom.r_norm(), geom.circumference())?;
    let profile = MatchedProfile::new(k, geom.r1(), geom.delta());
    let exterior_peak = a_n * exterior_peak(&profile, geom.r_norm());
    Ok(ModeSolution {
        n,
        k,
        omega: CGS.c * k,
        a_n,
        b_n: a_n * geom.r1() / geom.delta(),
        surface_value: a_n * profile.value(geom.r1()),
        exterior_peak,
        mass: mode_mass(),
        profile,
    })
}

fn check_mode_regime(geom: &RingGeometry, k: f64) -> Result<()> {
    let kr1 = k * geom.r1();
    if kr1 == 1.0 {
        return Err(Error::Domain("k R1 = 1: the exterior logarithm vanishes".into()));
    }
    if kr1 > LOW_FREQUENCY_LIMIT {
        return Err(Error::Domain(format!(
            "k R1 = {kr1:.4e} exceeds the low-frequency limit {LOW_FREQUENCY_LIMIT}"
        )));
    }
    let krn = k * geom.r_norm();
    if krn < FAR_ZONE_MIN {
        return Err(Error::Domain(format!(
            "k R_norm = {krn:.4e} below {FAR_ZONE_MIN}: no far zone inside the tube"
        )));
    }
    Ok(())
}

fn exterior_peak(profile: &MatchedProfile, r_norm: f64) -> f64 {
    let samples = 4000;
    let ratio = (r_norm / profile.r1).ln() / samples as f64;
    (1..=samples)
        .map(|i| profile.value(profile.r1 * (ratio * i as f64).exp()).abs())
        .fold(0.0, f64::max)
}

/// Wavenumbers `k <= k_max` of the matched exterior solution satisfying the
/// boundary condition at `R_norm`, ascending.
pub fn mode_wavenumbers(geom: &RingGeometry, k_max: f64, boundary: Boundary) -> Result<Vec<f64>> {
    require_positive("k_max", k_max)?;
    if k_max * geom.r1() > LOW_FREQUENCY_LIMIT * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "k_max R1 = {:.4e} exceeds the low-frequency limit {LOW_FREQUENCY_LIMIT}",
            k_max * geom.r1()
        )));
    }
    let r_norm = geom.r_norm();
    let (r1, delta) = (geom.r1(), geom.delta());
    let residual = |k: f64| MatchedProfile::new(k, r1, delta).boundary_residual(boundary, r_norm);
    Ok(scan_roots(residual, 1e-6 / r_norm, k_max, PI / (8.0 * r_norm), 1e-14))
}

// ---------------------------------------------------------------------------
// Radial grid

pub const DEFAULT_GRID_POINTS: usize = 20_000;
/// Half-width of the uniform boundary-layer region, in London depths.
const CORE_HALF_WIDTH: usize = 10;
/// Uniform steps per London depth in the boundary layer.
const CORE_STEPS_PER_DEPTH: usize = 10;
const STRETCH_RATIO: f64 = 1.02;
pub const MIN_POINTS_PER_DEPTH: f64 = 8.0;

/// Strictly increasing nodes on `[0, R_norm]` with `R1` as a node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    r1_index: usize,
    delta: f64,
}

impl RadialGrid {
    /// Uniform step `delta/10` within ten London depths of the surface,
    /// geometric stretching (ratio 1.02, capped) on both sides, ending
    /// exactly at `R_norm`.
    pub fn for_geometry(geom: &RingGeometry, n_points: usize) -> Result<Self> {
        Self::build(geom.r1(), geom.delta(), geom.r_norm(), n_points)
    }

    pub fn build(r1: f64, delta: f64, r_max: f64, n_points: usize) -> Result<Self> {
        require_positive("R1", r1)?;
        require_positive("delta", delta)?;
        require_positive("R_norm", r_max)?;
        let h0 = delta / CORE_STEPS_PER_DEPTH as f64;
        let core = CORE_HALF_WIDTH * CORE_STEPS_PER_DEPTH;
        let fit_in = (r1 / h0).floor() as usize;
        let fit_out = ((r_max - r1) / h0).floor() as usize;
        if fit_in < 2 || fit_out < 2 {
            return Err(Error::validation("grid", "R1 and R_norm - R1 must each span at least two core steps"));
        }
        let m_in = core.min(fit_in - 1);
        let m_out = core.min(fit_out - 1);
        let core_lo = r1 - m_in as f64 * h0;
        let core_hi = r1 + m_out as f64 * h0;
        let (len_in, len_out) = (core_lo, r_max - core_hi);
        let need_in = min_stretched_steps(len_in, h0);
        let need_out = min_stretched_steps(len_out, h0);
        let intervals = n_points.saturating_sub(1);
        let fixed = m_in + m_out + need_in + need_out;
        if intervals < fixed {
            return Err(Error::validation(
                "grid",
                format!("{n_points} points cannot resolve the geometry; need at least {}", fixed + 1),
            ));
        }
        let extra = intervals - fixed;
        let extra_in = ((extra as f64) * len_in / (len_in + len_out)).round() as usize;
        let n_in = need_in + extra_in;
        let n_out = need_out + (extra - extra_in);

        let mut nodes = Vec::with_capacity(n_points);
        let inner = stretched_steps(len_in, h0, n_in);
        // inner steps grow away from the core, i.e. toward the axis
        let mut x = core_lo;
        let mut rev = Vec::with_capacity(n_in + 1);
        rev.push(core_lo);
        for h in &inner {
            x -= h;
            rev.push(x);
        }
        *rev.last_mut().expect("non-empty") = 0.0;
        nodes.extend(rev.into_iter().rev());
        for i in 1..=m_in {
            nodes.push(core_lo + i as f64 * h0);
        }
        let r1_index = nodes.len() - 1;
        nodes[r1_index] = r1;
        for i in 1..=m_out {
            nodes.push(r1 + i as f64 * h0);
        }
        let mut x = core_hi;
        for h in stretched_steps(len_out, h0, n_out) {
            x += h;
            nodes.push(x);
        }
        *nodes.last_mut().expect("non-empty") = r_max;
        Self::from_nodes(nodes, r1, delta).map(|g| {
            debug_assert_eq!(g.r1_index, r1_index);
            g
        })
    }

    /// Validates caller-supplied nodes.
    pub fn from_nodes(nodes: Vec<f64>, r1: f64, delta: f64) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::validation("grid", "need at least 3 nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::validation("grid", "first node must be the axis rho = 0"));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("grid", "nodes must be finite and strictly increasing"));
        }
        let r1_index = nodes
            .iter()
            .position(|&x| (x - r1).abs() <= 1e-12 * r1)
            .ok_or_else(|| Error::validation("grid", "R1 must be a node"))?;
        if r1_index + 1 >= nodes.len() {
            return Err(Error::validation("grid", "grid must extend beyond R1"));
        }
        let grid = Self {
            nodes,
            r1_index,
            delta,
        };
        let ppd = grid.boundary_layer_points_per_depth();
        if ppd < MIN_POINTS_PER_DEPTH {
            return Err(Error::validation(
                "grid",
                format!("{ppd:.2} points per London depth inside the wire, need {MIN_POINTS_PER_DEPTH}"),
            ));
        }
        Ok(grid)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn r1_index(&self) -> usize {
        self.r1_index
    }
    pub fn r_max(&self) -> f64 {
        *self.nodes.last().expect("validated grid")
    }

    /// delta divided by the largest step in the ten London depths below R1.
    pub fn boundary_layer_points_per_depth(&self) -> f64 {
        let r1 = self.nodes[self.r1_index];
        let lo = (r1 - CORE_HALF_WIDTH as f64 * self.delta).max(0.0);
        let hmax = self.nodes[..=self.r1_index]
            .windows(2)
            .filter(|w| w[1] > lo)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max);
        self.delta / hmax
    }
}

/// Fewest steps, starting at `h0 * r` and growing by `r`, that cover `len`.
fn min_stretched_steps(len: f64, h0: f64) -> usize {
    let r = STRETCH_RATIO;
    ((1.0 + len * (r - 1.0) / (h0 * r)).ln() / r.ln()).ceil().max(1.0) as usize
}

/// `n` steps summing to `len`: geometric growth from `h0` capped at a
/// constant step chosen so the sum comes out exactly.
fn stretched_steps(len: f64, h0: f64, n: usize) -> Vec<f64> {
    if n as f64 * h0 >= len {
        return vec![len / n as f64; n];
    }
    let steps = |cap: f64| -> Vec<f64> {
        let mut h = h0;
        (0..n)
            .map(|_| {
                h = (h * STRETCH_RATIO).min(cap);
                h
            })
            .collect()
    };
    let total = |cap: f64| steps(cap).iter().sum::<f64>();
    let (mut lo, mut hi) = (h0, len);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < len {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut out = steps(hi);
    let scale = len / out.iter().sum::<f64>();
    out.iter_mut().for_each(|h| *h *= scale);
    out
}

// ---------------------------------------------------------------------------
// Finite-element oracle

/// One oracle eigenpair, with the eigenfunction sampled on the grid nodes
/// and normalized to `int f^2 2 pi rho L drho = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMode {
    pub n: usize,
    pub k: f64,
    pub omega: f64,
    pub values: Vec<f64>,
    /// ||S y - k^2 y|| of the symmetric eigenproblem.
    pub residual: f64,
}

/// Discretized radial operator for one grid, boundary and potential.
#[derive(Debug, Clone)]
pub struct FdOracle {
    grid: RadialGrid,
    length: f64,
    boundary: Boundary,
    matrix: SymTridiagonal,
    /// Lumped rho-weighted mass per unknown.
    mass: Vec<f64>,
}

/// Relative tolerance on k^2 for eigenvalue bisection.
pub const EIGEN_REL_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 8;

impl FdOracle {
    pub fn new(geom: &RingGeometry, grid: RadialGrid, boundary: Boundary, potential: Potential) -> Self {
        let nodes = grid.nodes();
        let n_nodes = nodes.len();
        let mut diag = vec![0.0; n_nodes];
        let mut off = vec![0.0; n_nodes - 1];
        let mut mass = vec![0.0; n_nodes];
        let v_in = match potential {
            Potential::Wire => 1.0 / (geom.delta() * geom.delta()),
            Potential::FreeField => 0.0,
        };
        for i in 0..n_nodes - 1 {
            let (a, b) = (nodes[i], nodes[i + 1]);
            let h = b - a;
            let stiff = 0.5 * (a + b) / h;
            let (ma, mb) = (h * (2.0 * a + b) / 6.0, h * (a + 2.0 * b) / 6.0);
            diag[i] += stiff;
            diag[i + 1] += stiff;
            off[i] -= stiff;
            mass[i] += ma;
            mass[i + 1] += mb;
            if i < grid.r1_index() {
                diag[i] += v_in * ma;
                diag[i + 1] += v_in * mb;
            }
        }
        let unknowns = match boundary {
            Boundary::Dirichlet => n_nodes - 1,
            Boundary::Neumann => n_nodes,
        };
        diag.truncate(unknowns);
        off.truncate(unknowns - 1);
        mass.truncate(unknowns);
        let d: Vec<f64> = diag.iter().zip(&mass).map(|(a, m)| a / m).collect();
        let e: Vec<f64> = off
            .iter()
            .enumerate()
            .map(|(i, a)| a / (mass[i] * mass[i + 1]).sqrt())
            .collect();
        Self {
            grid,
            length: geom.circumference(),
            boundary,
            matrix: SymTridiagonal::new(d, e),
            mass,
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Number of discrete modes with wavenumber below `k`.
    pub fn count_below(&self, k: f64) -> usize {
        self.matrix.sturm_count(k * k)
    }

    pub fn wavenumbers(&self, count: usize) -> Vec<f64> {
        self.matrix
            .lowest_eigenvalues(count, EIGEN_REL_TOL)
            .into_iter()
            .map(|l| l.max(0.0).sqrt())
            .collect()
    }

    /// The lowest `count` eigenpairs.
    pub fn modes(&self, count: usize) -> Result<Vec<OracleMode>> {
        let lambdas = self.matrix.lowest_eigenvalues(count, EIGEN_REL_TOL);
        let norm = 1.0 / (2.0 * PI * self.length).sqrt();
        lambdas
            .par_iter()
            .enumerate()
            .map(|(i, &lambda)| {
                let (y, residual) = self.matrix.inverse_iteration(i, lambda, MAX_SWEEPS, 1e-13)?;
                let mut values: Vec<f64> = y.iter().zip(&self.mass).map(|(y, m)| norm * y / m.sqrt()).collect();
                if self.boundary == Boundary::Dirichlet {
                    values.push(0.0);
                }
                // sign convention: positive at the wire surface
                if values[self.grid.r1_index()] < 0.0 {
                    values.iter_mut().for_each(|v| *v = -*v);
                }
                let k = lambda.max(0.0).sqrt();
                Ok(OracleMode {
                    n: i + 1,
                    k,
                    omega: CGS.c * k,
                    values,
                    residual,
                })
            })
            .collect()
    }

    /// All eigenpairs with wavenumber `<= k_max`.
    pub fn modes_below(&self, k_max: f64) -> Result<Vec<OracleMode>> {
        self.modes(self.count_below(k_max))
    }

    /// Discrete inner product `2 pi L sum_i m_i f_i g_i`.
    pub fn inner_product(&self, f: &[f64], g: &[f64]) -> f64 {
        2.0 * PI * self.length * self.mass.iter().enumerate().map(|(i, m)| m * f[i] * g[i]).sum::<f64>()
    }

    pub fn surface_value(&self, mode: &OracleMode) -> f64 {
        mode.values[self.grid.r1_index()]
    }

    /// max |f| over nodes outside the wire.
    pub fn exterior_peak(&self, mode: &OracleMode) -> f64 {
        mode.values[self.grid.r1_index() + 1..].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Decay length from a least-squares fit of ln f over the five London
    /// depths below the surface.
    pub fn interior_decay_length(&self, mode: &OracleMode) -> Result<f64> {
        let nodes = self.grid.nodes();
        let r1 = nodes[self.grid.r1_index()];
        let lo = r1 - 5.0 * self.grid.delta;
        let pts: Vec<(f64, f64)> = (0..=self.grid.r1_index())
            .filter(|&i| nodes[i] >= lo && mode.values[i] > 0.0)
            .map(|i| (nodes[i], mode.values[i].ln()))
            .collect();
        let slope = linear_fit_slope(&pts)?;
        Ok(1.0 / slope)
    }

    /// `int_{rho<R1} f^2 rho / int f^2 rho`, trapezoidal on the elements.
    pub fn interior_fraction(&self, mode: &OracleMode) -> f64 {
        let nodes = self.grid.nodes();
        let piece = |i: usize| {
            let (a, b) = (nodes[i], nodes[i + 1]);
            0.5 * (b - a) * (a * mode.values[i].powi(2) + b * mode.values[i + 1].powi(2))
        };
        let inside: f64 = (0..self.grid.r1_index()).map(piece).sum();
        let total: f64 = (0..nodes.len() - 1).map(piece).sum();
        inside / total
    }

    /// `2 pi L int_0^{R1} w(rho) f(rho) rho drho` with `f` interpolated
    /// linearly between nodes and `w` evaluated exactly.
    pub fn wire_overlap<W: Fn(f64) -> f64>(&self, mode: &OracleMode, weight: W) -> f64 {
        let nodes = self.grid.nodes();
        let sum: f64 = (0..self.grid.r1_index())
            .map(|i| {
                let (a, b) = (nodes[i], nodes[i + 1]);
                let (fa, fb) = (mode.values[i], mode.values[i + 1]);
                let f = |x: f64| weight(x) * (fa + (fb - fa) * (x - a) / (b - a)) * x;
                gauss_kronrod_15(&f, a, b).0
            })
            .sum();
        2.0 * PI * self.length * sum
    }
}

/// Lowest `count` Dirichlet oracle modes with the wire present.
pub fn fd_oracle_modes(geom: &RingGeometry, grid: RadialGrid, count: usize) -> Result<Vec<OracleMode>> {
    FdOracle::new(geom, grid, Boundary::Dirichlet, Potential::Wire).modes(count)
}

pub(crate) fn linear_fit_slope(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::j0_zeros;

    /// Wide scale hierarchy used for oracle comparisons.
    pub(crate) fn wide_geometry(r_norm: f64) -> RingGeometry {
        RingGeometry::new(1.0, 1e-4, 2e-6, r_norm, 1000.0).unwrap()
    }

    #[test]
    fn matched_profile_is_c1_at_surface() {
        for &k in &[1.0, 30.0, 400.0] {
            let p = MatchedProfile::new(k, 1e-4, 2e-6);
            let (dv, dd) = p.matching_residuals();
            assert!(dv.abs() < 1e-12 && dd.abs() < 1e-12, "k = {k}: {dv} {dd}");
        }
    }

    #[test]
    fn amplitude_example() {
        let a = normalized_amplitude(0.1, 0.1, 1e-5, 0.5, 2.0 * PI).unwrap();
        assert!((a - 2.74e-6).abs() / 2.74e-6 < 5e-3, "{a}");
        let a2 = normalized_amplitude(0.1, 0.1, 2e-5, 0.5, 2.0 * PI).unwrap();
        assert!((a2 / a - 2.0).abs() < 1e-14);
        assert!(matches!(normalized_amplitude(10.0, 0.1, 1e-5, 0.5, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn analytic_mode_fields() {
        let g = wide_geometry(0.3);
        let m = analytic_mode(&g, ModeTarget::Index(20), Boundary::Dirichlet).unwrap();
        assert_eq!(m.omega, CGS.c * m.k);
        assert!((m.b_n / (m.a_n * g.r1() / g.delta()) - 1.0).abs() < 1e-10);
        assert!((m.surface_value - m.a_n).abs() < 1e-12 * m.a_n);
        let bound = 2.0 * (g.delta() / g.r1()) / (m.k * g.r1()).ln().abs();
        assert!(m.surface_value / m.exterior_peak <= bound);
        assert_eq!(m.mass, mode_mass());
    }

    #[test]
    fn analytic_mode_regime_errors() {
        let g = wide_geometry(0.3);
        let low = analytic_mode(&g, ModeTarget::Wavenumber(5.0), Boundary::Dirichlet);
        assert!(matches!(low, Err(Error::Domain(_))));
        let high = analytic_mode(&g, ModeTarget::Wavenumber(2000.0), Boundary::Dirichlet);
        assert!(matches!(high, Err(Error::Domain(_))));
        assert!(mode_wavenumbers(&g, 2000.0, Boundary::Dirichlet).is_err());
    }

    #[test]
    fn spacing_and_density() {
        let g = wide_geometry(0.3);
        let ks = mode_wavenumbers(&g, 500.0, Boundary::Dirichlet).unwrap();
        for w in ks.windows(2).filter(|w| w[0] * g.r_norm() > 20.0) {
            assert!(((w[1] - w[0]) * g.r_norm() / PI - 1.0).abs() < 0.01);
        }
        let g2 = wide_geometry(0.6);
        let ks2 = mode_wavenumbers(&g2, 500.0, Boundary::Dirichlet).unwrap();
        assert!((ks2.len() as i64 - 2 * ks.len() as i64).abs() <= 1, "{} {}", ks.len(), ks2.len());
        assert!(mode_wavenumbers(&g, 1.0, Boundary::Dirichlet).unwrap().is_empty());
    }

    #[test]
    fn grid_invariants() {
        let g = wide_geometry(0.3);
        let grid = RadialGrid::for_geometry(&g, DEFAULT_GRID_POINTS).unwrap();
        assert_eq!(grid.len(), DEFAULT_GRID_POINTS);
        assert_eq!(grid.nodes()[0], 0.0);
        assert_eq!(grid.r_max(), 0.3);
        assert_eq!(grid.nodes()[grid.r1_index()], g.r1());
        assert!(grid.boundary_layer_points_per_depth() >= MIN_POINTS_PER_DEPTH);
        assert!(RadialGrid::for_geometry(&g, 300).is_err());
        let coarse = vec![0.0, 0.5e-4, 1e-4, 0.3];
        assert!(RadialGrid::from_nodes(coarse, 1e-4, 2e-6).is_err());
    }

    #[test]
    fn free_field_matches_j0_zeros() {
        let g = wide_geometry(0.3);
        let grid = RadialGrid::for_geometry(&g, DEFAULT_GRID_POINTS).unwrap();
        let oracle = FdOracle::new(&g, grid, Boundary::Dirichlet, Potential::FreeField);
        let ks = oracle.wavenumbers(10);
        for (k, z) in ks.iter().zip(j0_zeros(10)) {
            let exact = z / g.r_norm();
            assert!((k / exact - 1.0).abs() < 1e-3, "{k} vs {exact}");
        }
    }

    #[test]
    fn oracle_modes_with_wire() {
        let g = wide_geometry(0.3);
        let grid = RadialGrid::for_geometry(&g, DEFAULT_GRID_POINTS).unwrap();
        let oracle = FdOracle::new(&g, grid, Boundary::Dirichlet, Potential::Wire);
        let modes = oracle.modes_below(160.0).unwrap();
        assert!(modes.len() > 10);
        // orthonormality
        for i in 0..modes.len() {
            for j in 0..=i {
                let d = oracle.inner_product(&modes[i].values, &modes[j].values);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() <= 1e-8, "({i},{j}) -> {d:e}");
            }
        }
        // analytic wavenumbers agree within 1 %
        let ks = mode_wavenumbers(&g, 165.0, Boundary::Dirichlet).unwrap();
        assert!((ks[0] / modes[0].k - 1.0).abs() < 5e-3, "{} {}", ks[0], modes[0].k);
        for m in &modes {
            if m.k * g.r_norm() >= 5.0 && m.k * g.r1() <= 0.05 {
                let kn = ks[m.n - 1];
                assert!((kn / m.k - 1.0).abs() < 0.01);
            }
        }
        let m = &modes[10];
        let decay = oracle.interior_decay_length(m).unwrap();
        assert!((decay / g.delta() - 1.0).abs() < 0.05, "{decay}");
        let frac = oracle.interior_fraction(m);
        assert!(frac <= 10.0 * (g.delta() / g.r1()).powi(2), "{frac}");
        // surface amplitude within the log-accuracy budget
        let a = analytic_mode(&g, ModeTarget::Wavenumber(m.k), Boundary::Dirichlet).unwrap();
        let ratio = oracle.surface_value(m) / a.surface_value;
        assert!((ratio - 1.0).abs() < 0.35, "{ratio}");
        let shape = oracle.surface_value(m) / oracle.exterior_peak(m);
        assert!(shape <= 2.0 * (g.delta() / g.r1()) / (m.k * g.r1()).ln().abs());
    }

    #[test]
    fn neumann_spectrum_interlaces() {
        let g = wide_geometry(0.3);
        let nd = mode_wavenumbers(&g, 100.0, Boundary::Dirichlet).unwrap();
        let nn = mode_wavenumbers(&g, 100.0, Boundary::Neumann).unwrap();
        assert!((nn.len() as i64 - nd.len() as i64).abs() <= 1);
        assert!(nn[0] < nd[0]);
    }
}
