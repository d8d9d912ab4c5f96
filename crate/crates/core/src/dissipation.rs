//! Thermally activated conductivity, surface impedance and the resulting
//! cavity dissipation time.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::physical::{MaterialParams, RingGeometry, ThermalState, CGS};

/// Temperature dependence of the gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GapModel {
    /// `Delta0 tanh(1.74 sqrt(T_c/T - 1))`.
    #[default]
    Interpolated,
    /// `Delta0` at every temperature.
    Constant,
}

pub fn gap(th: &ThermalState, mat: &MaterialParams, model: GapModel) -> Result<f64> {
    let t = th.temperature();
    if t >= mat.t_c() {
        return Err(Error::Domain(format!(
            "T = {t} K is not below T_c = {} K: not superconducting",
            mat.t_c()
        )));
    }
    Ok(match model {
        GapModel::Constant => mat.delta0(),
        GapModel::Interpolated if t == 0.0 => mat.delta0(),
        GapModel::Interpolated => mat.delta0() * (1.74 * (mat.t_c() / t - 1.0).sqrt()).tanh(),
    })
}

/// `sigma = sigma_N exp(-Delta(T)/k_B T)`; zero at `T = 0`.
pub fn conductivity(th: &ThermalState, mat: &MaterialParams, model: GapModel) -> Result<f64> {
    let d = gap(th, mat, model)?;
    if th.is_zero() {
        return Ok(0.0);
    }
    Ok(mat.sigma_n() * (-d / th.thermal_energy()).exp())
}

/// Largest allowed `2 pi omega sigma delta^2 / c^2`.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;

/// `zeta = -i (omega delta/c) [1 + 2 pi i omega sigma delta^2/c^2]`.
pub fn impedance_at_conductivity(omega: f64, sigma: f64, delta: f64) -> Result<Complex64> {
    require_positive("omega", omega)?;
    require_positive("delta", delta)?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::validation("sigma", "must be finite and >= 0"));
    }
    let p = 2.0 * PI * omega * sigma * delta * delta / (CGS.c * CGS.c);
    if p >= PERTURBATIVE_LIMIT {
        return Err(Error::Expansion(format!(
            "2 pi omega sigma delta^2 / c^2 = {p:.4e} is not below {PERTURBATIVE_LIMIT}"
        )));
    }
    Ok(Complex64::new(0.0, -omega * delta / CGS.c) * Complex64::new(1.0, p))
}

/// `Re zeta = 2 pi omega^2 sigma delta^3 / c^3`.
pub fn zeta_real(omega: f64, sigma: f64, delta: f64) -> f64 {
    2.0 * PI * omega * omega * sigma * delta.powi(3) / CGS.c.powi(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipationTime {
    /// `R_cav / (c zeta_R)`, s; infinite without dissipation.
    pub tau: f64,
    /// `tau / (R0/c)`.
    pub margin: f64,
}

/// Absorption time of a cavity of radius `r_cav` around a ring of radius `r0`.
pub fn dissipation_time(zeta_r: f64, r_cav: f64, r0: f64) -> Result<DissipationTime> {
    require_positive("R_cav", r_cav)?;
    require_positive("R0", r0)?;
    if r_cav <= r0 {
        return Err(Error::validation("R_cav", format!("cavity radius {r_cav} must exceed R0 = {r0}")));
    }
    if !(zeta_r >= 0.0) || !zeta_r.is_finite() {
        return Err(Error::validation("zeta_R", "must be finite and >= 0"));
    }
    if zeta_r == 0.0 {
        return Ok(DissipationTime {
            tau: f64::INFINITY,
            margin: f64::INFINITY,
        });
    }
    let tau = r_cav / (CGS.c * zeta_r);
    Ok(DissipationTime {
        tau,
        margin: tau * CGS.c / r0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpedanceReport {
    pub omega: f64,
    pub temperature: f64,
    pub sigma: f64,
    pub zeta_re: f64,
    pub zeta_im: f64,
    pub zeta_r: f64,
    pub tau: f64,
    pub r_cav: f64,
    pub margin: f64,
}

impl ImpedanceReport {
    pub fn zeta(&self) -> Complex64 {
        Complex64::new(self.zeta_re, self.zeta_im)
    }
}

/// Full report with the pair-breaking and perturbativity checks, for a
/// London depth `delta` and ring radius `r0`, without a frequency band check.
#[allow(clippy::too_many_arguments)]
pub fn surface_impedance_at(
    omega: f64,
    th: &ThermalState,
    mat: &MaterialParams,
    delta: f64,
    r0: f64,
    r_cav: f64,
    model: GapModel,
) -> Result<ImpedanceReport> {
    require_positive("omega", omega)?;
    let d = gap(th, mat, model)?;
    if CGS.hbar * omega >= 2.0 * d {
        return Err(Error::Domain(format!(
            "hbar omega = {:.4e} erg reaches 2 Delta(T) = {:.4e} erg: pair breaking",
            CGS.hbar * omega,
            2.0 * d
        )));
    }
    let sigma = conductivity(th, mat, model)?;
    let zeta = impedance_at_conductivity(omega, sigma, delta)?;
    let zeta_r = zeta_real(omega, sigma, delta);
    let time = dissipation_time(zeta_r, r_cav, r0)?;
    Ok(ImpedanceReport {
        omega,
        temperature: th.temperature(),
        sigma,
        zeta_re: zeta.re,
        zeta_im: zeta.im,
        zeta_r,
        tau: time.tau,
        r_cav,
        margin: time.margin,
    })
}

/// As [`surface_impedance_at`], also requiring `omega <= 0.1 c/R1`.
pub fn surface_impedance(
    omega: f64,
    th: &ThermalState,
    mat: &MaterialParams,
    geom: &RingGeometry,
    r_cav: f64,
    model: GapModel,
) -> Result<ImpedanceReport> {
    let hi = geom.omega_uv_edge();
    if omega > hi * (1.0 + 1e-12) {
        return Err(Error::Range {
            omega,
            lo: 0.0,
            hi,
            hint: "above 0.1 c/R1 the field penetrates beyond the London layer",
        });
    }
    surface_impedance_at(omega, th, mat, geom.delta(), geom.r0(), r_cav, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conductivity_limits() {
        let mat = MaterialParams::default_material();
        assert_eq!(conductivity(&ThermalState::zero(), &mat, GapModel::Interpolated).unwrap(), 0.0);
        let tiny = conductivity(&ThermalState::new(0.05).unwrap(), &mat, GapModel::Interpolated).unwrap();
        assert!(tiny < 1e-50 * mat.sigma_n());
        let near = conductivity(&ThermalState::new(mat.t_c() * (1.0 - 1e-10)).unwrap(), &mat, GapModel::Interpolated).unwrap();
        assert!((near / mat.sigma_n() - 1.0).abs() < 1e-3);
        assert!(matches!(
            conductivity(&ThermalState::new(mat.t_c()).unwrap(), &mat, GapModel::Interpolated),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn conductivity_at_half_tc() {
        let tc = 3.7;
        let mat = MaterialParams::new(1e18, tc, 1.76 * CGS.k_b * tc).unwrap();
        let s = conductivity(&ThermalState::new(0.5 * tc).unwrap(), &mat, GapModel::Interpolated).unwrap();
        let expect = (-(1.76 * 2.0 * 1.74f64.tanh())).exp();
        assert!((s / 1e18 - expect).abs() < 1e-12);
        assert!((s / 1e18 - 3.6e-2).abs() < 1e-3);
        let c = conductivity(&ThermalState::new(0.5 * tc).unwrap(), &mat, GapModel::Constant).unwrap();
        assert!((c / 1e18 - (-3.52f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn zeta_example_and_scaling() {
        let z = impedance_at_conductivity(1e11, 1e18, 1e-5).unwrap();
        let zr = zeta_real(1e11, 1e18, 1e-5);
        // 2.3e-6 to two significant figures
        assert!((zr - 2.3e-6).abs() < 0.05e-6, "{zr:e}");
        let direct = 2.0 * PI * 1e22 * 1e18 * 1e-15 / CGS.c.powi(3);
        assert!((zr / direct - 1.0).abs() < 0.01);
        assert!((z.re / zr - 1.0).abs() < 1e-12);
        assert!((z.im + 1e11 * 1e-5 / CGS.c).abs() < 1e-15);
        assert!((zeta_real(2e11, 1e18, 1e-5) / zr - 4.0).abs() < 1e-12);
        assert!(matches!(impedance_at_conductivity(1e12, 1e18, 1e-5), Err(Error::Expansion(_))));
    }

    #[test]
    fn dissipation_time_identities() {
        let d = dissipation_time(2.3e-6, 3.0, 1.0).unwrap();
        assert!((d.tau - 4.35e-5).abs() < 1e-7);
        assert!(d.margin > 1.3e6);
        assert!((d.tau * CGS.c / 3.0 * 2.3e-6 - 1.0).abs() < 1e-14);
        let half = dissipation_time(4.6e-6, 3.0, 1.0).unwrap();
        assert!((half.tau / d.tau - 0.5).abs() < 1e-14);
        let wide = dissipation_time(2.3e-6, 6.0, 1.0).unwrap();
        assert!((wide.tau / d.tau - 2.0).abs() < 1e-14);
        assert_eq!(dissipation_time(0.0, 3.0, 1.0).unwrap().tau, f64::INFINITY);
        assert!(dissipation_time(1e-6, 0.5, 1.0).is_err());
    }

    #[test]
    fn report_checks() {
        let g = RingGeometry::reference_estimate();
        let mat = MaterialParams::default_material();
        let th = ThermalState::new(2.0).unwrap();
        let r = surface_impedance(2e10, &th, &mat, &g, 3.0, GapModel::Interpolated).unwrap();
        assert!(r.zeta_r >= 0.0);
        assert!((r.margin - (r.r_cav / (CGS.c * r.zeta_r)) / (g.r0() / CGS.c)).abs() < 1e-9 * r.margin);
        assert!(matches!(
            surface_impedance(1e11, &th, &mat, &g, 3.0, GapModel::Interpolated),
            Err(Error::Range { .. })
        ));
        // pair breaking close to T_c
        let hot = ThermalState::new(3.6999).unwrap();
        assert!(matches!(
            surface_impedance_at(1e11, &hot, &mat, 1e-5, 1.0, 3.0, GapModel::Interpolated),
            Err(Error::Domain(_))
        ));
    }
}
