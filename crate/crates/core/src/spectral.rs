//! Spectral density `(Delta q)^2 J(omega)` of the field modes coupled to the
//! ring current.
//!
//! The mid band `c/R0 <= omega <= 0.1 c/R1` uses the closed form
//! `q^2 J = (pi/4c^2)(delta/R1)^2 I^2 L / ln^2(omega R1/c)`. Below `c/R0`
//! the density is either cut off at `omega_min` or continued as `omega^3`.
//! Above `0.1 c/R1` it is set to zero. A binned table assembled from
//! finite-element modes can replace the mid band.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cylinder::{mode_mass, normalized_amplitude, Boundary, FdOracle, ModeSolution, OracleMode, Potential, RadialGrid};
use crate::error::{require_positive, Error, Result};
use crate::physical::{single_flux_current, RingGeometry, CGS};
use crate::quadrature::{integrate_panels, QuadOptions};
use crate::special::{double_factorial_odd, spherical_j, spherical_y};

// ---------------------------------------------------------------------------
// Current profile and couplings

/// Equilibrium supercurrent confined to one London depth below the surface:
/// `j(rho) = I/(2 pi R1 delta) exp[(rho - R1)/delta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentProfile {
    total: f64,
    r1: f64,
    delta: f64,
}

impl CurrentProfile {
    /// `total` in statA; may be zero or negative.
    pub fn new(total: f64, geom: &RingGeometry) -> Result<Self> {
        if !total.is_finite() {
            return Err(Error::validation("I", "current must be finite"));
        }
        Ok(Self {
            total,
            r1: geom.r1(),
            delta: geom.delta(),
        })
    }

    /// Profile carrying one flux quantum.
    pub fn single_flux(geom: &RingGeometry) -> Result<Self> {
        Self::new(single_flux_current(geom)?, geom)
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn density(&self, rho: f64) -> f64 {
        if rho > self.r1 || rho < 0.0 {
            0.0
        } else {
            self.total / (2.0 * PI * self.r1 * self.delta) * ((rho - self.r1) / self.delta).exp()
        }
    }

    /// `2 pi int_0^{R1} j rho drho = I [1 - (delta/R1)(1 - e^{-R1/delta})]`.
    pub fn recovered_current(&self) -> f64 {
        let x = self.delta / self.r1;
        self.total * (1.0 - x * (-(-1.0 / x).exp_m1()))
    }
}

/// Overlap of two boundary layers, `(1/(R1 delta)) int_0^{R1} rho e^{2(rho-R1)/delta} drho`.
fn layer_overlap(r1: f64, delta: f64) -> f64 {
    0.5 - 0.25 * (delta / r1) * (-(-2.0 * r1 / delta).exp_m1())
}

/// `qC_n = -(1/c) int j f_n d^3x` for the analytic mode, whose interior is
/// `A_n exp[(rho - R1)/delta]`: `-(I L A_n / c) * overlap`.
pub fn coupling_analytic(geom: &RingGeometry, mode: &ModeSolution, cur: &CurrentProfile) -> Result<f64> {
    let expect = normalized_amplitude(mode.k, geom.r1(), geom.delta(), geom.r_norm(), geom.circumference())?;
    if !((mode.a_n - expect).abs() <= 1e-10 * expect) {
        return Err(Error::Contract(format!(
            "mode amplitude {:.6e} is not the normalized {expect:.6e} for this geometry",
            mode.a_n
        )));
    }
    Ok(-cur.total * geom.circumference() * mode.a_n / CGS.c * layer_overlap(geom.r1(), geom.delta()))
}

/// Allowed deviation of the oracle mode norm from one.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// `qC_n` by quadrature of the current against the oracle eigenfunction.
pub fn coupling_oracle(oracle: &FdOracle, mode: &OracleMode, cur: &CurrentProfile) -> Result<f64> {
    let norm = oracle.inner_product(&mode.values, &mode.values);
    if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
        return Err(Error::Contract(format!("oracle mode {} has norm {norm:.9e}, expected 1", mode.n)));
    }
    Ok(-oracle.wire_overlap(mode, |rho| cur.density(rho)) / CGS.c)
}

// ---------------------------------------------------------------------------
// Closed forms

fn check_band(omega: f64, geom: &RingGeometry) -> Result<()> {
    let (lo, hi) = (geom.omega_ir_match(), geom.omega_uv_edge());
    if !omega.is_finite() || omega < lo * (1.0 - 1e-12) || omega > hi * (1.0 + 1e-12) {
        let hint = if omega < lo {
            "below c/R0: use the infrared sector"
        } else {
            "above 0.1 c/R1: beyond the UV cutoff"
        };
        return Err(Error::Range { omega, lo, hi, hint });
    }
    Ok(())
}

/// Mid-band `q^2 J(omega)` for current `current` without the band check.
pub fn j_analytic_unchecked(omega: f64, geom: &RingGeometry, current: f64) -> f64 {
    let log = (omega * geom.r1() / CGS.c).ln();
    PI / (4.0 * CGS.c * CGS.c) * (geom.delta() / geom.r1()).powi(2) * current * current * geom.circumference()
        / (log * log)
}

/// Mid-band `q^2 J(omega)`, restricted to `c/R0 <= omega <= 0.1 c/R1`.
pub fn j_analytic(omega: f64, geom: &RingGeometry, current: f64) -> Result<f64> {
    check_band(omega, geom)?;
    Ok(j_analytic_unchecked(omega, geom, current))
}

/// `(Delta q)^2 J(omega) ln^2(omega R1/c)` for `Delta q = I_s`:
/// `pi^3 c^2 hbar^2 / (16 e^2 L ln^2(L/R1)) (delta/R1)^2`.
pub fn single_flux_prefactor(geom: &RingGeometry) -> Result<f64> {
    let l = geom.circumference();
    if l <= geom.r1() {
        return Err(Error::Domain("ln(L/R1) must be positive".into()));
    }
    let ll = (l / geom.r1()).ln();
    Ok(PI.powi(3) * CGS.c * CGS.c * CGS.hbar * CGS.hbar
        / (16.0 * CGS.e_charge * CGS.e_charge * l * ll * ll)
        * (geom.delta() / geom.r1()).powi(2))
}

pub fn j_single_flux_unchecked(omega: f64, geom: &RingGeometry) -> Result<f64> {
    let log = (omega * geom.r1() / CGS.c).ln();
    Ok(single_flux_prefactor(geom)? / (log * log))
}

/// `(Delta q)^2 J(omega)` for `Delta q = I_s`, restricted to the mid band.
pub fn j_single_flux(omega: f64, geom: &RingGeometry) -> Result<f64> {
    check_band(omega, geom)?;
    j_single_flux_unchecked(omega, geom)
}

// ---------------------------------------------------------------------------
// Binned oracle density

/// Equal-width frequency bins starting at `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub lo: f64,
    pub width: f64,
    pub count: usize,
}

/// Bin width in units of `pi c / R_norm`.
pub const DEFAULT_BIN_WIDTH_SPACINGS: f64 = 6.0;
/// Minimum (effective) number of modes for a bin to be populated.
pub const MIN_MODES_PER_BIN: f64 = 5.0;

impl BinSpec {
    pub fn new(lo: f64, width: f64, count: usize) -> Result<Self> {
        require_positive("bin lo", lo)?;
        require_positive("bin width", width)?;
        if count == 0 {
            return Err(Error::validation("bin count", "need at least one bin"));
        }
        Ok(Self { lo, width, count })
    }

    /// Bins of width `6 pi c / r_norm_min` from `c max(1/R0, 3/r_norm_min)`
    /// up to the UV edge.
    pub fn for_geometry(geom: &RingGeometry, r_norm_min: f64) -> Result<Self> {
        let width = DEFAULT_BIN_WIDTH_SPACINGS * PI * CGS.c / r_norm_min;
        Self::with_width(geom, r_norm_min, width)
    }

    pub fn with_width(geom: &RingGeometry, r_norm_min: f64, width: f64) -> Result<Self> {
        let lo = CGS.c * (1.0 / geom.r0()).max(FAR_ZONE_BINS / r_norm_min);
        let count = ((geom.omega_uv_edge() - lo) / width).floor();
        if !(count >= 1.0) {
            return Err(Error::validation("bins", "no full bin fits between the far-zone edge and the UV edge"));
        }
        Self::new(lo, width, count as usize)
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.width * self.count as f64
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        (self.lo + self.width * i as f64, self.lo + self.width * (i + 1) as f64)
    }
}

/// Bins below `3 c / R_norm` lack a far zone.
const FAR_ZONE_BINS: f64 = 3.0;

/// How a mode's weight is assigned to bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BinningRule {
    /// Weight spread uniformly over the mode's cell, bounded by the midpoints
    /// to its neighbours.
    #[default]
    CellSpread,
    /// Whole weight to the bin containing `omega_n`.
    Membership,
}

/// Frequency and coupling of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCoupling {
    pub omega: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralBin {
    pub lo: f64,
    pub hi: f64,
    /// Binned `q^2 J`.
    pub value: f64,
    pub effective_modes: f64,
    pub populated: bool,
}

impl SpectralBin {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedTable {
    pub spec: BinSpec,
    pub rule: BinningRule,
    pub bins: Vec<SpectralBin>,
}

impl BinnedTable {
    /// Populated bin containing `omega`.
    pub fn lookup(&self, omega: f64) -> Option<&SpectralBin> {
        if omega < self.spec.lo || omega >= self.spec.hi() {
            return None;
        }
        let i = ((omega - self.spec.lo) / self.spec.width).floor() as usize;
        self.bins.get(i).filter(|b| b.populated)
    }
}

/// `J(bin) = (pi/2) sum C_n^2 / (m_n omega_n) / width` with `m_n = 1/(4 pi c^2)`.
/// Bins with fewer than five (effective) modes are flagged unpopulated.
pub fn binned_oracle_density(modes: &[ModeCoupling], spec: &BinSpec, rule: BinningRule) -> Result<BinnedTable> {
    let spec = BinSpec::new(spec.lo, spec.width, spec.count)?;
    let mut sorted: Vec<ModeCoupling> = modes.to_vec();
    sorted.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    let weight = |m: &ModeCoupling| 0.5 * PI * m.coupling * m.coupling / (mode_mass() * m.omega);
    let mut value = vec![0.0; spec.count];
    let mut count = vec![0.0; spec.count];
    match rule {
        BinningRule::Membership => {
            for m in &sorted {
                if m.omega >= spec.lo && m.omega < spec.hi() {
                    let i = ((m.omega - spec.lo) / spec.width).floor() as usize;
                    let i = i.min(spec.count - 1);
                    value[i] += weight(m);
                    count[i] += 1.0;
                }
            }
        }
        BinningRule::CellSpread => {
            let n = sorted.len();
            for (j, m) in sorted.iter().enumerate() {
                let left = if j > 0 {
                    0.5 * (sorted[j - 1].omega + m.omega)
                } else if n > 1 {
                    m.omega - 0.5 * (sorted[1].omega - m.omega)
                } else {
                    continue;
                };
                let right = if j + 1 < n {
                    0.5 * (m.omega + sorted[j + 1].omega)
                } else {
                    m.omega + 0.5 * (m.omega - sorted[j - 1].omega)
                };
                let cell = right - left;
                if !(cell > 0.0) {
                    continue;
                }
                let w = weight(m);
                let first = (((left - spec.lo) / spec.width).floor().max(0.0)) as usize;
                for (i, (v, c)) in value.iter_mut().zip(count.iter_mut()).enumerate().skip(first) {
                    let (lo, hi) = spec.edges(i);
                    if lo >= right {
                        break;
                    }
                    let overlap = (hi.min(right) - lo.max(left)).max(0.0) / cell;
                    *v += w * overlap;
                    *c += overlap;
                }
            }
        }
    }
    let bins = (0..spec.count)
        .map(|i| {
            let (lo, hi) = spec.edges(i);
            SpectralBin {
                lo,
                hi,
                value: value[i] / spec.width,
                effective_modes: count[i],
                populated: count[i] >= MIN_MODES_PER_BIN - 1e-9,
            }
        })
        .collect();
    Ok(BinnedTable { spec, rule, bins })
}

/// Binned density from oracle modes together with the couplings used.
#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    pub table: BinnedTable,
    pub couplings: Vec<ModeCoupling>,
}

/// Solves the oracle on a grid of `grid_points` nodes, couples every mode
/// up to slightly above the last bin edge to `cur`, and bins the result.
pub fn oracle_spectrum(
    geom: &RingGeometry,
    grid_points: usize,
    boundary: Boundary,
    cur: &CurrentProfile,
    spec: &BinSpec,
    rule: BinningRule,
) -> Result<OracleSpectrum> {
    let grid = RadialGrid::for_geometry(geom, grid_points)?;
    let oracle = FdOracle::new(geom, grid, boundary, Potential::Wire);
    let k_max = spec.hi() / CGS.c + 4.0 * PI / geom.r_norm();
    let modes = oracle.modes_below(k_max)?;
    let couplings = modes
        .iter()
        .map(|m| {
            Ok(ModeCoupling {
                omega: m.omega,
                coupling: coupling_oracle(&oracle, m, cur)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = binned_oracle_density(&couplings, spec, rule)?;
    Ok(OracleSpectrum { table, couplings })
}

/// One bin against the closed form at its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinComparison {
    pub lo: f64,
    pub hi: f64,
    pub binned: f64,
    pub analytic: f64,
    pub ratio: f64,
    pub effective_modes: f64,
    /// Populated, above the far-zone edge and with |ln(omega R1/c)| >= 3.
    pub comparable: bool,
}

/// Minimum |ln(omega R1/c)| for the log-accurate closed form to be compared.
pub const COMPARISON_MIN_LOG: f64 = 3.0;

pub fn compare_bins(table: &BinnedTable, geom: &RingGeometry, current: f64) -> Vec<BinComparison> {
    let far_edge = CGS.c * (1.0 / geom.r0()).max(FAR_ZONE_BINS / geom.r_norm());
    table
        .bins
        .iter()
        .map(|b| {
            let analytic = j_analytic_unchecked(b.center(), geom, current);
            let log_ok = (b.hi * geom.r1() / CGS.c).ln().abs() >= COMPARISON_MIN_LOG;
            BinComparison {
                lo: b.lo,
                hi: b.hi,
                binned: b.value,
                analytic,
                ratio: b.value / analytic,
                effective_modes: b.effective_modes,
                comparable: b.populated && log_ok && b.lo >= far_edge * (1.0 - 1e-12),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Assembled model

/// Treatment of frequencies below the mid band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IrMode {
    /// Zero below `omega_min`, mid-band form above.
    #[default]
    Cutoff,
    /// `J(omega_c) (omega/omega_c)^3` below `omega_c = c/R0`.
    Omega3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    BelowCutoff,
    Infrared,
    MidBand,
    UvCutoff,
}

impl Sector {
    pub fn label(&self) -> &'static str {
        match self {
            Sector::BelowCutoff => "below_cutoff",
            Sector::Infrared => "ir",
            Sector::MidBand => "mid",
            Sector::UvCutoff => "uv_cutoff",
        }
    }
}

/// Piecewise `(Delta q)^2 J(omega)` with `Delta q = multiplier * I_s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDensityModel {
    pub geometry: RingGeometry,
    pub ir_mode: IrMode,
    pub charge_multiplier: f64,
    /// `(Delta q)^2 J ln^2(omega R1/c)`.
    pub prefactor: f64,
    pub omega_c: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binned: Option<BinnedTable>,
}

impl SpectralDensityModel {
    pub fn analytic(geom: &RingGeometry, ir_mode: IrMode) -> Result<Self> {
        Ok(Self {
            geometry: *geom,
            ir_mode,
            charge_multiplier: 1.0,
            prefactor: single_flux_prefactor(geom)?,
            omega_c: geom.omega_ir_match(),
            omega_min: geom.omega_min(),
            omega_max: geom.omega_uv_edge(),
            binned: None,
        })
    }

    /// Scales `Delta q` relative to `I_s`.
    pub fn with_charge_multiplier(mut self, multiplier: f64) -> Result<Self> {
        if !multiplier.is_finite() {
            return Err(Error::validation("charge_multiplier", "must be finite"));
        }
        self.charge_multiplier = multiplier;
        Ok(self)
    }

    /// Uses `table` (already in units of `(Delta q)^2 J`) in its populated bins.
    pub fn with_binned(mut self, table: BinnedTable) -> Self {
        self.binned = Some(table);
        self
    }

    fn scale(&self) -> f64 {
        self.charge_multiplier * self.charge_multiplier
    }

    /// Closed form of the mid band, evaluated anywhere below the UV edge.
    pub fn mid_band(&self, omega: f64) -> f64 {
        let log = (omega * self.geometry.r1() / CGS.c).ln();
        self.scale() * self.prefactor / (log * log)
    }

    pub fn sector(&self, omega: f64) -> Sector {
        if omega > self.omega_max {
            Sector::UvCutoff
        } else {
            match self.ir_mode {
                IrMode::Cutoff if omega < self.omega_min => Sector::BelowCutoff,
                IrMode::Omega3 if omega < self.omega_c => Sector::Infrared,
                _ => Sector::MidBand,
            }
        }
    }

    /// `(Delta q)^2 J(omega)`; non-negative everywhere.
    pub fn evaluate(&self, omega: f64) -> f64 {
        if !(omega > 0.0) {
            return 0.0;
        }
        match self.sector(omega) {
            Sector::UvCutoff | Sector::BelowCutoff => 0.0,
            Sector::Infrared => self.mid_band(self.omega_c) * (omega / self.omega_c).powi(3),
            Sector::MidBand => {
                if let Some(bin) = self.binned.as_ref().and_then(|t| t.lookup(omega)) {
                    bin.value.max(0.0)
                } else {
                    self.mid_band(omega)
                }
            }
        }
    }

    /// Lowest frequency with nonzero density.
    pub fn lower_edge(&self) -> f64 {
        match self.ir_mode {
            IrMode::Cutoff => self.omega_min,
            IrMode::Omega3 => 0.0,
        }
    }

    /// Frequencies where the density has kinks or jumps, inside its support.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.omega_c, self.omega_min, self.omega_max];
        if let Some(t) = &self.binned {
            pts.extend((0..=t.spec.count).map(|i| t.spec.lo + t.spec.width * i as f64));
        }
        let lo = self.lower_edge();
        pts.retain(|&w| w >= lo && w <= self.omega_max);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

// ---------------------------------------------------------------------------
// Infrared sector: spherical partial waves

/// Multipole index `l >= 1`; the monopole is excluded because `P_0^1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MultipoleOrder(u32);

impl MultipoleOrder {
    pub fn new(l: u32) -> Result<Self> {
        if l == 0 {
            return Err(Error::validation("l", "there is no nonzero P_0^1; l must be >= 1"));
        }
        Ok(Self(l))
    }
    pub fn get(&self) -> u32 {
        self.0
    }
}

/// Normalization integral of `P_l^1`: `2 l (l+1) / (2l+1)`.
pub fn legendre_norm(l: MultipoleOrder) -> f64 {
    let l = l.0 as f64;
    2.0 * l * (l + 1.0) / (2.0 * l + 1.0)
}

/// k-independent scatterer: `G = g F`, `D = d F / R_out^l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScattererMap {
    pub g: f64,
    pub d: f64,
}

impl Default for ScattererMap {
    fn default() -> Self {
        Self { g: 1.0, d: 1.0 }
    }
}

/// Radial coefficients of one normalized partial wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialWaveCoefficients {
    pub l: MultipoleOrder,
    pub k: f64,
    /// Interior `S = D r^l`.
    pub d_nl: f64,
    /// Coefficient of `(r/R_out)^l`.
    pub f_nl: f64,
    /// Coefficient of `(R_out/r)^{l+1}`.
    pub g_nl: f64,
    pub phase_shift: f64,
    pub n_l: f64,
}

/// Normalizes the `l` channel in the sphere of radius `R_sphere`:
/// `S = D r^l` inside `R_out` and `alpha j_l(kr) + beta y_l(kr)` outside,
/// with `alpha, beta` fixed by the near-zone form `F (r/R_out)^l + G (R_out/r)^{l+1}`.
pub fn partial_wave(geom: &RingGeometry, l: MultipoleOrder, k: f64, map: ScattererMap) -> Result<PartialWaveCoefficients> {
    require_positive("k", k)?;
    let lu = l.0;
    let li = lu as i32;
    let r_out = geom.r_out();
    let x_out = k * r_out;
    let df_plus = double_factorial_odd(li);
    let df_minus = double_factorial_odd(li - 1);
    // Unit-F solution.
    let alpha = df_plus / x_out.powi(li);
    let beta = -map.g * x_out.powi(li + 1) / df_minus;
    let d_unit = map.d / r_out.powi(li);
    let interior = d_unit * d_unit * r_out.powi(2 * li + 3) / (2 * li + 3) as f64;
    let s = |r: f64| {
        let x = k * r;
        let v = alpha * spherical_j(lu, x) + beta * spherical_y(lu, x);
        v * v * r * r
    };
    let r_s = geom.r_sphere();
    let period = PI / k;
    let mut pts = vec![r_out];
    let mut r = (r_out / period).floor() * period + period;
    while r < r_s {
        pts.push(r);
        r += period;
    }
    pts.push(r_s);
    let exterior = integrate_panels(
        s,
        &pts,
        &QuadOptions {
            rel_tol: 1e-10,
            ..Default::default()
        },
    )?;
    let f = 1.0 / (interior + exterior.value).sqrt();
    let phase_shift = map.g * x_out.powi(2 * li + 1) / (df_plus * df_minus);
    Ok(PartialWaveCoefficients {
        l,
        k,
        d_nl: d_unit * f,
        f_nl: f,
        g_nl: map.g * f,
        phase_shift: phase_shift.atan(),
        n_l: legendre_norm(l),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrScalingFit {
    pub l: MultipoleOrder,
    /// d ln F / d ln k.
    pub slope: f64,
    /// `2 slope - 1`.
    pub implied_j_exponent: f64,
    pub points: Vec<PartialWaveCoefficients>,
}

/// Log-log slope of the normalized `F_{n,l}(k)` over `k_list`.
pub fn ir_coefficient_scaling(
    geom: &RingGeometry,
    l: MultipoleOrder,
    k_list: &[f64],
    map: ScattererMap,
) -> Result<IrScalingFit> {
    if k_list.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 wavenumbers, got {}", k_list.len())));
    }
    for &k in k_list {
        require_positive("k", k)?;
        if k * geom.r0() > 0.1 * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("k R0 = {:.4e} exceeds 0.1", k * geom.r0())));
        }
        if k * geom.r_sphere() < 10.0 * (1.0 - 1e-12) {
            return Err(Error::Domain(format!("k R_sphere = {:.4e} below 10", k * geom.r_sphere())));
        }
    }
    let points = k_list
        .iter()
        .map(|&k| partial_wave(geom, l, k, map))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.k.ln(), p.f_nl.ln())).collect();
    let slope = crate::cylinder::linear_fit_slope(&pts)?;
    Ok(IrScalingFit {
        l,
        slope,
        implied_j_exponent: 2.0 * slope - 1.0,
        points,
    })
}

/// Eight log-spaced wavenumbers from `0.01/R0` to `0.1/R0`.
pub fn default_ir_wavenumbers(geom: &RingGeometry) -> Vec<f64> {
    let (lo, hi) = (0.01 / geom.r0(), 0.1 / geom.r0());
    (0..8).map(|i| lo * (hi / lo).powf(i as f64 / 7.0)).collect()
}
