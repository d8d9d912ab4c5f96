//! Decoherence exponent
//! `D(t) = (2/(pi hbar)) int (Delta q)^2 J(w)/w^2 (1 - cos wt) coth(hbar beta w/2) dw`
//! and its closed-form limits.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::physical::{validate_regime, InverseTemperature, RingGeometry, ThermalState, CGS};
use crate::quadrature::{integrate_panels, QuadOptions};
use crate::spectral::{single_flux_prefactor, SpectralDensityModel};

/// Half-periods of `cos(wt)` integrated panel by panel before switching to
/// the asymptotic expansion of the oscillatory tail.
pub const OSCILLATORY_HALF_PERIODS: f64 = 400.0;
/// Below this `hbar beta omega` the thermal factor uses its series.
pub const COTH_SERIES_LIMIT: f64 = 1e-3;

/// `coth(hbar beta omega / 2)`, exactly 1 at zero temperature.
pub fn thermal_factor(omega: f64, thermal: &ThermalState) -> f64 {
    match thermal.beta() {
        InverseTemperature::ZeroTemperature => 1.0,
        InverseTemperature::Finite(beta) => {
            let y = CGS.hbar * beta * omega;
            if y < COTH_SERIES_LIMIT {
                2.0 / y + y / 6.0
            } else {
                1.0 / (0.5 * y).tanh()
            }
        }
    }
}

/// Time-scale classification of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Linear,
    Quadratic,
    Saturated,
}

impl Regime {
    pub fn classify(t: f64, geom: &RingGeometry, thermal: &ThermalState) -> Self {
        if t >= geom.r0() / CGS.c {
            Regime::Saturated
        } else if t >= thermal.thermal_crossover_time() {
            Regime::Quadratic
        } else {
            Regime::Linear
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Linear => "linear",
            Regime::Quadratic => "quadratic",
            Regime::Saturated => "saturated",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecoherenceRequest {
    pub thermal: ThermalState,
    pub times: Vec<f64>,
    pub model: SpectralDensityModel,
    /// Replace the logarithms of the saturation estimate by one.
    pub log_override: bool,
    pub quadrature: QuadOptions,
}

impl DecoherenceRequest {
    pub fn new(model: SpectralDensityModel, thermal: ThermalState, times: Vec<f64>) -> Result<Self> {
        let req = Self {
            thermal,
            times,
            model,
            log_override: false,
            quadrature: QuadOptions::default(),
        };
        req.validate()?;
        Ok(req)
    }

    pub fn geometry(&self) -> &RingGeometry {
        &self.model.geometry
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::validation("times", "time grid is empty"));
        }
        if self.times.iter().any(|t| !t.is_finite()) || self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("times", "time grid must be finite and strictly increasing"));
        }
        let t_min = self.geometry().r1() / CGS.c;
        if self.times[0] <= t_min {
            return Err(Error::validation(
                "times",
                format!("t = {:.4e} s must exceed R1/c = {t_min:.4e} s", self.times[0]),
            ));
        }
        Ok(())
    }
}

/// One quadrature evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentValue {
    pub value: f64,
    /// Estimated quadrature error.
    pub error: f64,
    /// Bound on the part of the integral above `omega_max` that is dropped.
    pub tail_bound: f64,
}

/// `D(t)` for a single time; `t = 0` gives exactly 0.
pub fn decoherence_exponent(
    model: &SpectralDensityModel,
    thermal: &ThermalState,
    t: f64,
    opts: &QuadOptions,
) -> Result<ExponentValue> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::validation("t", format!("must be finite and >= 0, got {t}")));
    }
    let pre = 2.0 / (PI * CGS.hbar);
    let w_max = model.omega_max;
    let tail_bound = pre * 2.0 * model.mid_band(w_max) * thermal_factor(w_max, thermal) / w_max;
    if t == 0.0 {
        return Ok(ExponentValue {
            value: 0.0,
            error: 0.0,
            tail_bound,
        });
    }
    let h = |w: f64| pre * model.evaluate(w) * thermal_factor(w, thermal) / (w * w);
    let integrand = |w: f64| {
        let s = (0.5 * w * t).sin();
        h(w) * 2.0 * s * s
    };
    let lo = model.lower_edge();
    let quarter = 0.5 * PI / t;
    let w_osc = OSCILLATORY_HALF_PERIODS * PI / t;
    let w_split = w_osc.min(w_max);

    // Panels covering [lo, w_split]: geometric below the first quarter period,
    // quarter periods above it, plus the model's own breakpoints.
    let mut pts = model.breakpoints();
    let start = if lo > 0.0 { lo } else { 1e-9 * model.omega_c.min(quarter) };
    pts.push(lo);
    let mut w = start;
    while w < quarter.min(w_split) {
        pts.push(w);
        w *= 2.0;
    }
    let mut m = 1.0;
    while m * quarter < w_split {
        pts.push(m * quarter);
        m += 1.0;
    }
    pts.push(w_split);
    pts.retain(|&x| x >= lo && x <= w_split);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let near = integrate_panels(integrand, &pts, opts)?;
    let mut value = near.value;
    let mut error = near.error;

    if w_osc < w_max {
        // (1 - cos wt) h = h - h cos wt on [w_osc, w_max].
        let mut edges = vec![w_osc];
        edges.extend(model.breakpoints().into_iter().filter(|&x| x > w_osc && x < w_max));
        edges.push(w_max);
        let mut log_pts = edges.clone();
        let mut x = w_osc;
        while x < w_max {
            log_pts.push(x);
            x *= 1.5;
        }
        log_pts.retain(|&x| x >= w_osc && x <= w_max);
        log_pts.sort_by(f64::total_cmp);
        log_pts.dedup();
        let smooth = integrate_panels(h, &log_pts, opts)?;
        let (osc, osc_err) = oscillatory_tail(&h, &edges, t);
        value += smooth.value - osc;
        error += smooth.error + osc_err;
    }
    Ok(ExponentValue {
        value: value.max(0.0),
        error,
        tail_bound,
    })
}

/// `int h(w) cos(wt) dw` over consecutive smooth pieces by the endpoint
/// expansion `[h sin/t + h' cos/t^2 - h'' sin/t^3]`, derivatives by one-sided
/// differences inside each piece. Returns (value, size of the last term).
fn oscillatory_tail<H: Fn(f64) -> f64>(h: &H, edges: &[f64], t: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut err = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let s = (1e-3 * a).min(0.25 * (b - a));
        let ends = [(b, -s, 1.0), (a, s, -1.0)];
        for (x, step, sign) in ends {
            // sample just inside the piece so jumps at its edges are excluded
            let f0 = h(x + 1e-9 * step);
            let f1 = h(x + step);
            let f2 = h(x + 2.0 * step);
            let f3 = h(x + 3.0 * step);
            let d1 = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * step);
            let d2 = (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (step * step);
            let (sn, cs) = (x * t).sin_cos();
            let last = d2 * sn / t.powi(3);
            value += sign * (f0 * sn / t + d1 * cs / (t * t) - last);
            err += last.abs();
        }
    }
    (value, err)
}

/// One sampled time with its comparators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceSample {
    pub t: f64,
    pub d: f64,
    pub error: f64,
    pub tail_bound: f64,
    pub regime: Regime,
    /// Low-temperature closed form, when inside its window.
    pub d_low_t: Option<f64>,
    /// High-temperature closed form, when inside its window.
    pub d_high_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoherenceCurve {
    pub samples: Vec<DecoherenceSample>,
    pub d_lim: SaturationEstimate,
    pub d_lim_override: SaturationEstimate,
    /// Mean of `D` over the final decade of saturated samples.
    pub plateau: Option<Plateau>,
}

/// Evaluates every time of the request, in parallel, ordered by `t`.
pub fn d_of_t(req: &DecoherenceRequest) -> Result<DecoherenceCurve> {
    req.validate()?;
    let geom = *req.geometry();
    let samples = req
        .times
        .par_iter()
        .map(|&t| {
            let v = decoherence_exponent(&req.model, &req.thermal, t, &req.quadrature)?;
            let scale = req.model.charge_multiplier.powi(2);
            Ok(DecoherenceSample {
                t,
                d: v.value,
                error: v.error,
                tail_bound: v.tail_bound,
                regime: Regime::classify(t, &geom, &req.thermal),
                d_low_t: d_low_t_closed(t, &geom, &req.thermal).ok().map(|d| d * scale),
                d_high_t: d_high_t_closed(t, &geom, &req.thermal).ok().map(|r| r.value * scale),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let plateau = plateau(&samples, &geom);
    Ok(DecoherenceCurve {
        samples,
        d_lim: d_saturation(&geom, &req.thermal, false)?,
        d_lim_override: d_saturation(&geom, &req.thermal, true)?,
        plateau,
    })
}

/// Statistics of `D` over the last decade of times at or beyond `30 R0/c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Plateau {
    pub t_start: f64,
    pub t_end: f64,
    pub mean: f64,
    /// max |D/mean - 1| over the decade.
    pub max_deviation: f64,
    pub points: usize,
}

/// Onset of saturation in units of `R0/c`.
pub const SATURATION_ONSET: f64 = 30.0;

pub fn plateau(samples: &[DecoherenceSample], geom: &RingGeometry) -> Option<Plateau> {
    let t_end = samples.last()?.t;
    let t_start = (t_end / 10.0).max(SATURATION_ONSET * geom.r0() / CGS.c);
    let tail: Vec<f64> = samples.iter().filter(|s| s.t >= t_start * (1.0 - 1e-12)).map(|s| s.d).collect();
    if tail.len() < 2 || t_end < SATURATION_ONSET * geom.r0() / CGS.c {
        return None;
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let max_deviation = tail.iter().map(|d| (d / mean - 1.0).abs()).fold(0.0, f64::max);
    Some(Plateau {
        t_start,
        t_end,
        mean,
        max_deviation,
        points: tail.len(),
    })
}

/// Least-squares slope of ln D against ln t.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.iter().any(|&(t, d)| !(t > 0.0 && d > 0.0)) {
        return Err(Error::Fit("log-log fit needs positive t and D".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(t, d)| (t.ln(), d.ln())).collect();
    crate::cylinder::linear_fit_slope(&logs)
}

/// Times in the intermediate window `3 R1/c <= t <= R0/(3c)`.
pub fn intermediate_window(geom: &RingGeometry) -> (f64, f64) {
    (3.0 * geom.r1() / CGS.c, geom.r0() / (3.0 * CGS.c))
}

fn check_window(t: f64, geom: &RingGeometry) -> Result<()> {
    let (lo, hi) = intermediate_window(geom);
    if !(t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12)) {
        return Err(Error::Regime(format!(
            "t = {t:.4e} s outside the intermediate window [{lo:.4e}, {hi:.4e}] s"
        )));
    }
    Ok(())
}

/// `D = t pi^3 c^2 hbar / (16 e^2 L ln^2(L/R1)) (delta/R1)^2 / ln^2(ct/R1)`
/// for `Delta q = I_s`, valid in the intermediate window with `t <= hbar beta`.
pub fn d_low_t_closed(t: f64, geom: &RingGeometry, thermal: &ThermalState) -> Result<f64> {
    check_window(t, geom)?;
    let tb = thermal.thermal_crossover_time();
    if t > tb {
        return Err(Error::Regime(format!("t = {t:.4e} s exceeds hbar beta = {tb:.4e} s")));
    }
    d_low_t_formula(t, geom)
}

/// The low-temperature closed form without the window checks.
pub fn d_low_t_formula(t: f64, geom: &RingGeometry) -> Result<f64> {
    let log = (CGS.c * t / geom.r1()).ln();
    Ok(t * single_flux_prefactor(geom)? / (CGS.hbar * log * log))
}

/// High-temperature closed form and its cutoff correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HighTemperatureValue {
    pub value: f64,
    /// Contribution of the `-1/ln(R0/R1)` term (negative).
    pub correction: f64,
    /// Set when the two bracket terms differ by less than 50 %.
    pub breakdown: bool,
}

/// `D = t^2 pi^2 c^2 k_B T / (8 e^2 L ln^2(L/R1)) (delta/R1)^2
///      [1/ln(ct/R1) - 1/ln(R0/R1)]` for `t >= hbar beta`.
pub fn d_high_t_closed(t: f64, geom: &RingGeometry, thermal: &ThermalState) -> Result<HighTemperatureValue> {
    check_window(t, geom)?;
    if thermal.is_zero() {
        return Err(Error::Regime("high-temperature form needs T > 0".into()));
    }
    let tb = thermal.thermal_crossover_time();
    if t < tb {
        return Err(Error::Regime(format!("t = {t:.4e} s below hbar beta = {tb:.4e} s")));
    }
    let l = geom.circumference();
    let ll = (l / geom.r1()).ln();
    let scale = t * t * PI * PI * CGS.c * CGS.c * thermal.thermal_energy()
        / (8.0 * CGS.e_charge * CGS.e_charge * l * ll * ll)
        * (geom.delta() / geom.r1()).powi(2);
    let first = 1.0 / (CGS.c * t / geom.r1()).ln();
    let second = 1.0 / (geom.r0() / geom.r1()).ln();
    let bracket = first - second;
    if !(bracket > 0.0) {
        return Err(Error::Breakdown(format!(
            "cutoff correction 1/ln(R0/R1) = {second:.4e} cancels the leading term {first:.4e}"
        )));
    }
    Ok(HighTemperatureValue {
        value: scale * bracket,
        correction: -scale * second,
        breakdown: bracket < 0.5 * first,
    })
}

/// Saturation value of `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturationEstimate {
    pub d_lim: f64,
    pub u: f64,
    pub f_u: f64,
    pub log_override: bool,
}

/// `f(u) = 1` for `u <= 1`, `u` above.
pub fn saturation_temperature_factor(u: f64) -> f64 {
    u.max(1.0)
}

/// `D_lim = f(u) / (16 alpha ln^4(R0/R1)) (pi c/(R0 omega_min)) (delta/R1)^2`;
/// with `log_override` the logarithm is replaced by one.
pub fn d_saturation(geom: &RingGeometry, thermal: &ThermalState, log_override: bool) -> Result<SaturationEstimate> {
    validate_regime(geom).into_result()?;
    let u = thermal.reduced_temperature(geom);
    let f_u = saturation_temperature_factor(u);
    let log4 = if log_override { 1.0 } else { (geom.r0() / geom.r1()).ln().powi(4) };
    let d_lim = f_u / (16.0 * CGS.alpha_em() * log4) * (PI * CGS.c / (geom.r0() * geom.omega_min()))
        * (geom.delta() / geom.r1()).powi(2);
    Ok(SaturationEstimate {
        d_lim,
        u,
        f_u,
        log_override,
    })
}

/// `count` log-spaced times from `t0` to `t1` inclusive.
pub fn log_times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![t0];
    }
    (0..count)
        .map(|i| t0 * (t1 / t0).powf(i as f64 / (count - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::IrMode;

    fn wide() -> RingGeometry {
        RingGeometry::new(1.0, 1e-4, 2e-6, 0.3, 1000.0).unwrap()
    }

    #[test]
    fn coth_series_and_zero_temperature() {
        let th = ThermalState::new(1.0).unwrap();
        let w_small = 1e-4 / (CGS.hbar / th.thermal_energy());
        let series = thermal_factor(w_small, &th);
        let exact = 1.0 / (0.5 * CGS.hbar * w_small / th.thermal_energy()).tanh();
        assert!((series / exact - 1.0).abs() < 1e-12);
        assert_eq!(thermal_factor(1e12, &ThermalState::zero()), 1.0);
    }

    #[test]
    fn d_at_zero_time_is_zero() {
        let m = SpectralDensityModel::analytic(&wide(), IrMode::Cutoff).unwrap();
        let v = decoherence_exponent(&m, &ThermalState::zero(), 0.0, &QuadOptions::default()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn low_temperature_limit_of_quadrature() {
        let g = wide();
        let m = SpectralDensityModel::analytic(&g, IrMode::Cutoff).unwrap();
        let t = 1e-12;
        let cold = decoherence_exponent(&m, &ThermalState::new(1e-6).unwrap(), t, &QuadOptions::default()).unwrap();
        let zero = decoherence_exponent(&m, &ThermalState::zero(), t, &QuadOptions::default()).unwrap();
        assert!((cold.value / zero.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn low_t_closed_examples() {
        let g = RingGeometry::reference_estimate();
        // 1e-11 s sits just below 3 R1/c for this geometry
        let d = d_low_t_formula(1e-11, &g).unwrap();
        assert!((d / 6.1e-9 - 1.0).abs() < 0.01, "{d:e}");
        assert!(d_low_t_closed(1e-11, &g, &ThermalState::zero()).is_err());
        let w = wide();
        let th = ThermalState::zero();
        let t = 1e-13;
        let r = d_low_t_closed(2.0 * t, &w, &th).unwrap() / d_low_t_closed(t, &w, &th).unwrap();
        let l1 = (CGS.c * t / w.r1()).ln();
        let l2 = (2.0 * CGS.c * t / w.r1()).ln();
        assert!((r - 2.0 * l1 * l1 / (l2 * l2)).abs() < 1e-12);
        let w2 = w.with_delta(4e-6).unwrap();
        assert!((d_low_t_closed(t, &w2, &th).unwrap() / d_low_t_closed(t, &w, &th).unwrap() - 4.0).abs() < 1e-12);
        assert!(matches!(d_low_t_closed(1e-15, &w, &th), Err(Error::Regime(_))));
        // beyond hbar beta
        assert!(d_low_t_closed(1e-11, &w, &ThermalState::new(10.0).unwrap()).is_err());
    }

    #[test]
    fn high_t_closed_properties() {
        let g = wide();
        let t1 = ThermalState::new(100.0).unwrap();
        let t2 = ThermalState::new(200.0).unwrap();
        let t = 2e-13;
        let a = d_high_t_closed(t, &g, &t1).unwrap();
        let b = d_high_t_closed(t, &g, &t2).unwrap();
        assert!((b.value / a.value - 2.0).abs() < 1e-12);
        assert!(!a.breakdown && a.correction < 0.0);
        let edge = d_high_t_closed(intermediate_window(&g).1, &g, &t1).unwrap();
        assert!(edge.breakdown);
        assert!(d_high_t_closed(t, &g, &ThermalState::zero()).is_err());
        assert!(d_high_t_closed(5e-14, &g, &t1).is_err());
    }

    #[test]
    fn saturation_examples() {
        let g = RingGeometry::reference_estimate();
        let s = d_saturation(&g, &ThermalState::new(0.5).unwrap(), true).unwrap();
        assert_eq!(s.f_u, 1.0);
        assert!((s.d_lim / 8.6e-8 - 1.0).abs() < 0.01, "{:e}", s.d_lim);
        assert_eq!(saturation_temperature_factor(1.0), 1.0);
        assert!((saturation_temperature_factor(1.0 + 1e-12) - 1.0).abs() < 1e-11);
        let hot = d_saturation(&g, &ThermalState::new(2.0).unwrap(), true).unwrap();
        assert!((hot.d_lim / s.d_lim - hot.u).abs() < 1e-12);
        let plain = d_saturation(&g, &ThermalState::zero(), false).unwrap();
        assert!((s.d_lim / plain.d_lim - (10f64).ln().powi(4)).abs() < 1e-9);
    }

    #[test]
    fn request_validation() {
        let m = SpectralDensityModel::analytic(&wide(), IrMode::Cutoff).unwrap();
        assert!(DecoherenceRequest::new(m.clone(), ThermalState::zero(), vec![1e-16, 1e-12]).is_err());
        assert!(DecoherenceRequest::new(m.clone(), ThermalState::zero(), vec![1e-12, 1e-12]).is_err());
        assert!(DecoherenceRequest::new(m, ThermalState::zero(), vec![1e-12, 2e-12]).is_ok());
    }

    #[test]
    fn regime_tags() {
        let g = wide();
        let th = ThermalState::new(1.0).unwrap();
        assert_eq!(Regime::classify(1e-12, &g, &th), Regime::Linear);
        assert_eq!(Regime::classify(1e-11, &g, &th), Regime::Quadratic);
        assert_eq!(Regime::classify(1e-9, &g, &th), Regime::Saturated);
        assert_eq!(Regime::classify(1e-11, &g, &ThermalState::zero()), Regime::Linear);
    }

    #[test]
    fn curve_is_nonnegative_and_monotone_in_temperature() {
        let g = wide();
        let m = SpectralDensityModel::analytic(&g, IrMode::Cutoff).unwrap();
        let times = log_times(1e-13, 1e-9, 9);
        let cold = d_of_t(&DecoherenceRequest::new(m.clone(), ThermalState::new(0.5).unwrap(), times.clone()).unwrap()).unwrap();
        let hot = d_of_t(&DecoherenceRequest::new(m, ThermalState::new(2.0).unwrap(), times).unwrap()).unwrap();
        for (a, b) in cold.samples.iter().zip(&hot.samples) {
            assert!(a.d >= 0.0 && b.d >= a.d, "t = {}", a.t);
        }
    }
}
