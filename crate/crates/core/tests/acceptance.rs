//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ringdec::cli::{validation_checks, RunConfig};
use ringdec::cylinder::{Boundary, DEFAULT_GRID_POINTS};
use ringdec::decoherence::{
    d_low_t_closed, d_of_t, d_saturation, intermediate_window, log_log_slope, log_times, DecoherenceRequest,
};
use ringdec::dissipation::{surface_impedance_at, zeta_real, GapModel};
use ringdec::physical::{MaterialParams, RingGeometry, ThermalState, CGS};
use ringdec::spectral::{
    compare_bins, default_ir_wavenumbers, ir_coefficient_scaling, oracle_spectrum, BinSpec, BinningRule, CurrentProfile,
    IrMode, MultipoleOrder, ScattererMap, SpectralDensityModel,
};

// criterion 1
const D_LIM_ESTIMATE: f64 = 8.6e-8;
const D_LIM_ESTIMATE_REL: f64 = 0.01;
const ORDER_OF_MAGNITUDE_FACTOR: f64 = 2.0;
const U_AT_1K: f64 = 1.39;
const U_TOL: f64 = 0.01;
// criterion 2
const SATURATION_FACTOR: f64 = 3.0;
const PLATEAU_BAND: f64 = 0.2;
// criterion 3
const LINEAR_SLOPE_TOL: f64 = 0.15;
const LOG_ACCURACY: f64 = 0.35;
const QUADRATIC_SLOPE_TOL: f64 = 0.2;
const THERMAL_ONSET: f64 = 3.0;
const LINEAR_IN_T_TOL: f64 = 0.10;
// criterion 4
const BINNED_TOL: f64 = 0.35;
const INVARIANCE_TOL: f64 = 0.05;
// criterion 5
const EXPONENT_TOL: f64 = 0.05;
// criterion 6
const ZETA_EXAMPLE: f64 = 2.3e-6;
const ZETA_SIG_FIG_TOL: f64 = 0.05e-6;
const ZETA_CLOSED_FORM_REL: f64 = 0.01;
const MARGIN_MIN: f64 = 1e4;
const MAX_T_FRACTION: f64 = 0.8;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

/// Geometry with every asymptotic window open.
fn wide(r_norm: f64) -> RingGeometry {
    RingGeometry::new(1.0, 1e-4, 2e-6, r_norm, 1000.0).expect("wide geometry")
}

fn within_factor(x: f64, y: f64, f: f64) -> bool {
    x / y <= f && y / x <= f
}

fn headline_estimate() -> Outcome {
    let g = RingGeometry::reference_estimate();
    let cold = d_saturation(&g, &ThermalState::zero(), true).expect("estimate");
    let warm = d_saturation(&g, &ThermalState::new(1.0).unwrap(), true).expect("estimate");
    let omega_ok = (g.omega_min() / (std::f64::consts::PI * CGS.c / g.r0()) - 1.0).abs() < 1e-12;
    let value_ok = (cold.d_lim / D_LIM_ESTIMATE - 1.0).abs() <= D_LIM_ESTIMATE_REL && cold.f_u == 1.0;
    let order_ok = within_factor(cold.d_lim, 1e-7, ORDER_OF_MAGNITUDE_FACTOR);
    let u_ok = (warm.u - U_AT_1K).abs() <= U_TOL;
    Outcome {
        pass: omega_ok && value_ok && order_ok && u_ok,
        detail: format!("D_lim = {:.4e} (f = {}), u(1 K) = {:.4}", cold.d_lim, cold.f_u, warm.u),
    }
}

fn saturation_by_quadrature() -> Outcome {
    let g = wide(0.3);
    let r0c = g.r0() / CGS.c;
    let times = log_times(30.0 * r0c, 3000.0 * r0c, 21);
    let mut pass = true;
    let mut parts = Vec::new();
    for t_kelvin in [0.0, 1.0] {
        let th = ThermalState::new(t_kelvin).unwrap();
        let model = SpectralDensityModel::analytic(&g, IrMode::Cutoff).unwrap();
        let req = DecoherenceRequest::new(model, th, times.clone()).unwrap();
        let curve = d_of_t(&req).expect("quadrature");
        let p = curve.plateau.expect("plateau");
        let ratio = p.mean / curve.d_lim.d_lim;
        let last: Vec<f64> = curve.samples.iter().filter(|s| s.t >= times[times.len() - 1] / 10.0).map(|s| s.d).collect();
        let mean = last.iter().sum::<f64>() / last.len() as f64;
        let band = last.iter().map(|d| (d / mean - 1.0).abs()).fold(0.0, f64::max);
        pass &= within_factor(p.mean, curve.d_lim.d_lim, SATURATION_FACTOR) && band <= PLATEAU_BAND;
        parts.push(format!("T={t_kelvin} K: quadrature/D_lim = {ratio:.3}, final-decade spread = {band:.2e}"));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn time_regimes() -> Outcome {
    let g = wide(0.3);
    let (lo, hi) = intermediate_window(&g);
    let mut pass = true;
    let mut parts = Vec::new();

    let zero = ThermalState::zero();
    let times = log_times(lo, hi, 12);
    let model = SpectralDensityModel::analytic(&g, IrMode::Cutoff).unwrap();
    let curve = d_of_t(&DecoherenceRequest::new(model.clone(), zero, times.clone()).unwrap()).expect("quadrature");
    let pts: Vec<(f64, f64)> = curve.samples.iter().map(|s| (s.t, s.d)).collect();
    let slope = log_log_slope(&pts).unwrap();
    let ratios: Vec<f64> = curve
        .samples
        .iter()
        .map(|s| s.d / d_low_t_closed(s.t, &g, &zero).expect("window"))
        .collect();
    let worst = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let slope_ok = (slope - 1.0).abs() <= LINEAR_SLOPE_TOL;
    let match_ok = worst <= LOG_ACCURACY;
    pass &= slope_ok && match_ok;
    parts.push(format!(
        "T=0 slope = {slope:.3} ({}), worst |D/lowT1 - 1| = {worst:.3} ({}), ratios {:.3}..{:.3}",
        if slope_ok { "ok" } else { "out" },
        if match_ok { "ok" } else { "out" },
        ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        ratios.iter().cloned().fold(0.0, f64::max),
    ));

    let t1 = ThermalState::new(100.0).unwrap();
    let t2 = ThermalState::new(200.0).unwrap();
    let t_lo = lo.max(THERMAL_ONSET * t1.thermal_crossover_time());
    let hot_times = log_times(t_lo, hi, 10);
    let c1 = d_of_t(&DecoherenceRequest::new(model.clone(), t1, hot_times.clone()).unwrap()).expect("quadrature");
    let c2 = d_of_t(&DecoherenceRequest::new(model, t2, hot_times).unwrap()).expect("quadrature");
    let hot_pts: Vec<(f64, f64)> = c1.samples.iter().map(|s| (s.t, s.d)).collect();
    let hot_slope = log_log_slope(&hot_pts).unwrap();
    let doubling = c1
        .samples
        .iter()
        .zip(&c2.samples)
        .map(|(a, b)| (b.d / a.d / 2.0 - 1.0).abs())
        .fold(0.0, f64::max);
    let hot_ok = (hot_slope - 2.0).abs() <= QUADRATIC_SLOPE_TOL;
    let lin_ok = doubling <= LINEAR_IN_T_TOL;
    pass &= hot_ok && lin_ok;
    parts.push(format!(
        "T=100 K slope = {hot_slope:.3} ({}), max |D(2T)/2D(T) - 1| = {doubling:.3} ({})",
        if hot_ok { "ok" } else { "out" },
        if lin_ok { "ok" } else { "out" },
    ));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn spectral_oracle() -> Outcome {
    let spec = BinSpec::for_geometry(&wide(0.3), 0.3).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut tables = Vec::new();
    for rn in [0.3, 0.6] {
        let g = wide(rn);
        let cur = CurrentProfile::single_flux(&g).unwrap();
        let os = oracle_spectrum(&g, DEFAULT_GRID_POINTS, Boundary::Dirichlet, &cur, &spec, BinningRule::CellSpread)
            .expect("oracle");
        let cmp = compare_bins(&os.table, &g, cur.total());
        let n = cmp.iter().filter(|c| c.comparable).count();
        let dev = cmp.iter().filter(|c| c.comparable).map(|c| (c.ratio - 1.0).abs()).fold(0.0, f64::max);
        pass &= n > 0 && dev <= BINNED_TOL;
        parts.push(format!("R_norm={rn}: {n} bins, max dev {dev:.3}"));
        tables.push(cmp);
    }
    let inv = tables[0]
        .iter()
        .zip(&tables[1])
        .filter(|(a, b)| a.comparable && b.comparable)
        .map(|(a, b)| (b.binned / a.binned - 1.0).abs())
        .fold(0.0, f64::max);
    pass &= inv <= INVARIANCE_TOL;
    parts.push(format!("R_norm doubling dev {inv:.2e}"));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn infrared_law() -> Outcome {
    let g = RingGeometry::reference_estimate();
    let fit = ir_coefficient_scaling(&g, MultipoleOrder::new(1).unwrap(), &default_ir_wavenumbers(&g), ScattererMap::default())
        .expect("fit");
    Outcome {
        pass: (fit.slope - 2.0).abs() <= EXPONENT_TOL && (fit.implied_j_exponent - 3.0).abs() <= EXPONENT_TOL,
        detail: format!("F exponent {:.4}, J exponent {:.4}", fit.slope, fit.implied_j_exponent),
    }
}

fn dissipation_estimate() -> Outcome {
    let omega = 1e11;
    let zr = zeta_real(omega, 1e18, 1e-5);
    let closed = 2.0 * std::f64::consts::PI * omega * omega * 1e18 * 1e-15 / CGS.c.powi(3);
    let zeta_ok = (zr - ZETA_EXAMPLE).abs() < ZETA_SIG_FIG_TOL && (zr / closed - 1.0).abs() <= ZETA_CLOSED_FORM_REL;
    let mat = MaterialParams::default_material();
    let mut min_margin = f64::INFINITY;
    for i in 0..=16 {
        let t = MAX_T_FRACTION * mat.t_c() * i as f64 / 16.0;
        let th = ThermalState::new(t).unwrap();
        let r = surface_impedance_at(omega, &th, &mat, 1e-5, 1.0, 3.0, GapModel::Interpolated).expect("impedance");
        min_margin = min_margin.min(r.margin);
    }
    Outcome {
        pass: zeta_ok && min_margin > MARGIN_MIN,
        detail: format!("zeta_R = {zr:.4e}, min margin (T <= 0.8 T_c) = {min_margin:.3e}"),
    }
}

fn property_suite() -> Outcome {
    let cfg = RunConfig::default();
    let geom = cfg.geometry.build().unwrap();
    let checks = validation_checks(&cfg, &geom).expect("validate");
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    Outcome {
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} checks green", checks.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        (1, "headline saturation estimate", Duration::from_secs(1), headline_estimate),
        (2, "saturation by quadrature", Duration::from_secs(60), saturation_by_quadrature),
        (3, "time regimes", Duration::from_secs(60), time_regimes),
        (4, "spectral density oracle equivalence", Duration::from_secs(300), spectral_oracle),
        (5, "infrared law", Duration::from_secs(10), infrared_law),
        (6, "dissipation estimate", Duration::from_secs(1), dissipation_estimate),
        (7, "property suite", Duration::from_secs(300), property_suite),
    ];
    let mut failures = 0;
    for (n, name, budget, f) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= budget;
        failures += usize::from(!pass);
        println!(
            "[{}] criterion {n}: {name}: {} [{:.2} s, budget {} s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 7 criteria passed", 7 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
