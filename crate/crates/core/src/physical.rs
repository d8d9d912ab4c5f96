//! Physical constants, ring geometry, material and thermal parameters.
//!
//! Everything is in Gaussian-CGS units: lengths in cm, times in s, energies
//! in erg, currents in statA. Conversion to SI happens only when reports are
//! written.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{require_positive, Error, Result};

/// Fundamental constants (Gaussian-CGS).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    /// Speed of light, cm/s.
    pub c: f64,
    /// Reduced Planck constant, erg s.
    pub hbar: f64,
    /// Elementary charge magnitude, esu.
    pub e_charge: f64,
    /// Boltzmann constant, erg/K.
    pub k_b: f64,
}

pub const CGS: Constants = Constants {
    c: 2.997_924_58e10,
    hbar: 1.054_571_817e-27,
    e_charge: 4.803_204_71e-10,
    k_b: 1.380_649e-16,
};

impl Constants {
    /// Fine-structure constant e^2 / (hbar c).
    pub fn alpha_em(&self) -> f64 {
        self.e_charge * self.e_charge / (self.hbar * self.c)
    }

    /// Superconducting flux quantum pi hbar c / e, G cm^2.
    pub fn flux_quantum(&self) -> f64 {
        PI * self.hbar * self.c / self.e_charge
    }
}

/// statA per ampere.
pub const STATA_PER_AMPERE: f64 = 2.997_924_58e9;
/// T m^2 per G cm^2.
pub const TESLA_M2_PER_GAUSS_CM2: f64 = 1e-8;

/// Maximum allowed value of delta/R1 and of R1/R0.
pub const HIERARCHY_RATIO_LIMIT: f64 = 0.2;

/// Ring of radius `R0` made of a round wire of radius `R1` with London
/// depth `delta`, plus the two normalization radii used for mode counting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingGeometry {
    r0: f64,
    r1: f64,
    delta: f64,
    r_norm: f64,
    r_sphere: f64,
    omega_min_multiplier: f64,
    // derived
    circumference: f64,
    omega_min: f64,
}

impl RingGeometry {
    /// Builds a geometry with `omega_min = pi c / R0`.
    pub fn new(r0: f64, r1: f64, delta: f64, r_norm: f64, r_sphere: f64) -> Result<Self> {
        Self::with_omega_min_multiplier(r0, r1, delta, r_norm, r_sphere, 1.0)
    }

    /// `omega_min = multiplier * pi c / R0`.
    pub fn with_omega_min_multiplier(
        r0: f64,
        r1: f64,
        delta: f64,
        r_norm: f64,
        r_sphere: f64,
        multiplier: f64,
    ) -> Result<Self> {
        require_positive("R0", r0)?;
        require_positive("R1", r1)?;
        require_positive("delta", delta)?;
        require_positive("R_norm", r_norm)?;
        require_positive("R_sphere", r_sphere)?;
        require_positive("omega_min_multiplier", multiplier)?;
        Ok(Self {
            r0,
            r1,
            delta,
            r_norm,
            r_sphere,
            omega_min_multiplier: multiplier,
            circumference: 2.0 * PI * r0,
            omega_min: multiplier * PI * CGS.c / r0,
        })
    }

    /// The estimate set: delta = 1e-5 cm, R0 = 1 cm, R1 = 1 mm.
    pub fn reference_estimate() -> Self {
        Self::new(1.0, 0.1, 1e-5, 0.3, 1000.0).expect("static geometry is valid")
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn r_norm(&self) -> f64 {
        self.r_norm
    }
    pub fn r_sphere(&self) -> f64 {
        self.r_sphere
    }
    pub fn omega_min_multiplier(&self) -> f64 {
        self.omega_min_multiplier
    }
    /// Circumference L = 2 pi R0, also the box length of the straightened wire.
    pub fn circumference(&self) -> f64 {
        self.circumference
    }
    /// Infrared quadrature cutoff.
    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }
    /// Matching frequency of the infrared omega^3 sector, c / R0.
    pub fn omega_ir_match(&self) -> f64 {
        CGS.c / self.r0
    }
    /// Upper validity edge of the mid-band spectral density, 0.1 c / R1.
    pub fn omega_uv_edge(&self) -> f64 {
        0.1 * CGS.c / self.r1
    }
    /// Torus outer radius R0 + R1.
    pub fn r_out(&self) -> f64 {
        self.r0 + self.r1
    }
    /// Torus inner radius R0 - R1.
    pub fn r_in(&self) -> f64 {
        self.r0 - self.r1
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::with_omega_min_multiplier(
            self.r0,
            self.r1,
            delta,
            self.r_norm,
            self.r_sphere,
            self.omega_min_multiplier,
        )
    }

    pub fn with_r_norm(&self, r_norm: f64) -> Result<Self> {
        Self::with_omega_min_multiplier(
            self.r0,
            self.r1,
            self.delta,
            r_norm,
            self.r_sphere,
            self.omega_min_multiplier,
        )
    }

    pub fn with_r0(&self, r0: f64) -> Result<Self> {
        Self::with_omega_min_multiplier(
            r0,
            self.r1,
            self.delta,
            self.r_norm,
            self.r_sphere,
            self.omega_min_multiplier,
        )
    }

    pub fn with_r1(&self, r1: f64) -> Result<Self> {
        Self::with_omega_min_multiplier(
            self.r0,
            r1,
            self.delta,
            self.r_norm,
            self.r_sphere,
            self.omega_min_multiplier,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub name: &'static str,
    /// Measured quantity (a ratio, or the left-hand side of the inequality).
    pub measured: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
    pub pass: bool,
}

impl RegimeReport {
    pub fn failures(&self) -> impl Iterator<Item = &RegimeCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&RegimeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Converts a failing report into a regime error naming the first failure.
    pub fn into_result(self) -> Result<Self> {
        let failure = self.failures().next().map(|c| {
            format!("{} (measured {:.4e}, limit {:.4e})", c.name, c.measured, c.limit)
        });
        match failure {
            None => Ok(self),
            Some(msg) => Err(Error::Regime(msg)),
        }
    }
}

/// Checks the scale hierarchy delta << R1 << R0 and the placement of the
/// normalization radii.
pub fn validate_regime(geom: &RingGeometry) -> RegimeReport {
    let d = geom.delta;
    let r1 = geom.r1;
    let r0 = geom.r0;
    let mk = |name, measured: f64, limit: f64, pass: bool| RegimeCheck {
        name,
        measured,
        limit,
        pass,
    };
    let checks = vec![
        mk("delta < R1", d, r1, d < r1),
        mk("R1 < R0", r1, r0, r1 < r0),
        mk(
            "delta/R1 <= 0.2",
            d / r1,
            HIERARCHY_RATIO_LIMIT,
            d / r1 <= HIERARCHY_RATIO_LIMIT,
        ),
        mk(
            "R1/R0 <= 0.2",
            r1 / r0,
            HIERARCHY_RATIO_LIMIT,
            r1 / r0 <= HIERARCHY_RATIO_LIMIT,
        ),
        mk("R_norm > R1", geom.r_norm, r1, geom.r_norm > r1),
        mk("R_norm < R0", geom.r_norm, r0, geom.r_norm < r0),
        mk("R_sphere > R0", geom.r_sphere, r0, geom.r_sphere > r0),
    ];
    let pass = checks.iter().all(|c| c.pass);
    RegimeReport { checks, pass }
}

/// Inverse temperature. Zero temperature is an explicit state, not 1/0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InverseTemperature {
    ZeroTemperature,
    Finite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalState {
    temperature: f64,
    beta: InverseTemperature,
}

impl ThermalState {
    pub fn new(temperature: f64) -> Result<Self> {
        if !temperature.is_finite() || temperature < 0.0 {
            return Err(Error::validation(
                "T",
                format!("must be finite and >= 0, got {temperature}"),
            ));
        }
        let beta = if temperature == 0.0 {
            InverseTemperature::ZeroTemperature
        } else {
            InverseTemperature::Finite(1.0 / (CGS.k_b * temperature))
        };
        Ok(Self { temperature, beta })
    }

    pub fn zero() -> Self {
        Self::new(0.0).expect("zero temperature is valid")
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn beta(&self) -> InverseTemperature {
        self.beta
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.beta, InverseTemperature::ZeroTemperature)
    }

    /// k_B T in erg.
    pub fn thermal_energy(&self) -> f64 {
        CGS.k_b * self.temperature
    }

    /// u = k_B T / (hbar omega_min).
    pub fn reduced_temperature(&self, geom: &RingGeometry) -> f64 {
        self.thermal_energy() / (CGS.hbar * geom.omega_min())
    }

    /// hbar beta = hbar / (k_B T); infinite at zero temperature, in which case
    /// the low-temperature form applies at every time.
    pub fn thermal_crossover_time(&self) -> f64 {
        match self.beta {
            InverseTemperature::ZeroTemperature => f64::INFINITY,
            InverseTemperature::Finite(b) => CGS.hbar * b,
        }
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaterialParams {
    /// Normal-state conductivity near T_c, 1/s (Gaussian).
    sigma_n: f64,
    /// Critical temperature, K.
    t_c: f64,
    /// Zero-temperature gap, erg.
    delta0: f64,
}

impl MaterialParams {
    pub fn new(sigma_n: f64, t_c: f64, delta0: f64) -> Result<Self> {
        require_positive("sigma_N", sigma_n)?;
        require_positive("T_c", t_c)?;
        require_positive("Delta0", delta0)?;
        let ratio = delta0 / (CGS.k_b * t_c);
        if !(1.0..=3.0).contains(&ratio) {
            return Err(Error::validation(
                "Delta0",
                format!("Delta0/(k_B T_c) = {ratio:.3} outside [1, 3]"),
            ));
        }
        Ok(Self {
            sigma_n,
            t_c,
            delta0,
        })
    }

    /// BCS gap ratio Delta0 = 1.764 k_B T_c.
    pub fn bcs(sigma_n: f64, t_c: f64) -> Result<Self> {
        Self::new(sigma_n, t_c, 1.764 * CGS.k_b * t_c)
    }

    /// sigma_N = 1e18 s^-1, T_c = 3.7 K, BCS gap.
    pub fn default_material() -> Self {
        Self::bcs(1e18, 3.7).expect("static material is valid")
    }

    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }
    pub fn t_c(&self) -> f64 {
        self.t_c
    }
    pub fn delta0(&self) -> f64 {
        self.delta0
    }
}

/// Current carrying one flux quantum through the ring,
/// I_s = c Phi0 / (2 L ln(L/R1)), in statA.
pub fn single_flux_current(geom: &RingGeometry) -> Result<f64> {
    let l = geom.circumference();
    if l <= geom.r1() {
        return Err(Error::Domain(format!(
            "L = {l:.4e} cm must exceed R1 = {:.4e} cm for ln(L/R1) > 0",
            geom.r1()
        )));
    }
    Ok(CGS.c * CGS.flux_quantum() / (2.0 * l * (l / geom.r1()).ln()))
}
