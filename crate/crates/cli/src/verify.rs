//! The `verify` suite: oracle comparisons plus every module invariant,
//! evaluated at the configured parameters.

use std::f64::consts::PI;

use spinrelax::evolution::{
    coefficients_with, evolve_grid_with, non_markovian_term_with, uniform_grid, ClosedForm,
    QuadratureRoute,
};
use spinrelax::lineshape::LorentzianLine;
use spinrelax::num_complex::Complex64;
use spinrelax::oracle::{
    contour_integral, lorentzian_pole_contribution, non_markovian_contour, non_markovian_direct_extrapolated,
};
use spinrelax::quadrature::{integrate_breakpoints, Tolerance};
use spinrelax::spectral::{collision_element_limit, decay_width, energy_shift_pv, transition_rate};
use spinrelax::units::{
    inverse_meter_to_mev, larmor_frequency, mev_inverse_to_seconds, mev_to_inverse_meter, oersted_to_tesla,
    seconds_to_mev_inverse, tesla_to_oersted,
};
use spinrelax::{CouplingParams, EvolutionParams, LowerLimit, OracleConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub deviation: f64,
    pub limit: f64,
    /// Time (MeV⁻¹) of the worst deviation, for time-resolved checks.
    pub worst_t: Option<f64>,
}

impl Check {
    fn new(name: &'static str, deviation: f64, limit: f64) -> Self {
        Self {
            name,
            deviation,
            limit,
            worst_t: None,
        }
    }

    fn at(mut self, t: f64) -> Self {
        self.worst_t = Some(t);
        self
    }

    pub fn passed(&self) -> bool {
        self.deviation <= self.limit
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn worst_failure(&self) -> Option<&Check> {
        self.checks
            .iter()
            .filter(|c| !c.passed())
            .max_by(|a, b| (a.deviation / a.limit).total_cmp(&(b.deviation / b.limit)))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed() { "ok  " } else { "FAIL" };
            let at = c
                .worst_t
                .map(|t| format!("  worst at t = {t:e} MeV^-1 ({:e} s)", mev_inverse_to_seconds(t)))
                .unwrap_or_default();
            out.push_str(&format!("{status}  {:<44} {:>12.3e}  limit {:.0e}{at}\n", c.name, c.deviation, c.limit));
        }
        out
    }
}

fn worst<I: IntoIterator<Item = (f64, f64)>>(it: I) -> (f64, f64) {
    it.into_iter()
        .fold((0.0, f64::NAN), |acc, (dev, t)| if dev > acc.0 || dev.is_nan() { (dev, t) } else { acc })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..n).map(move |k| (l + (h - l) * k as f64 / (n - 1) as f64).exp())
}

type Res<T> = Result<T, spinrelax::Error>;

fn units_checks(c: &CouplingParams, hz_t: f64, report: &mut Report) {
    let samples = [hz_t, c.h1_tesla(), c.line().delta(), 1e-6, 123.456];
    let dev = samples
        .iter()
        .filter(|x| **x != 0.0)
        .map(|&x| {
            let r = [
                tesla_to_oersted(oersted_to_tesla(x)),
                mev_to_inverse_meter(inverse_meter_to_mev(x)),
                seconds_to_mev_inverse(mev_inverse_to_seconds(x)),
            ];
            r.iter().map(|y| (y - x).abs() / x.abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    report.checks.push(Check::new("units: conversion round trips", dev, 1e-14));

    let base = larmor_frequency(c.particle(), hz_t);
    let dev = if base == 0.0 {
        larmor_frequency(c.particle(), 3.0 * hz_t).abs()
    } else {
        (larmor_frequency(c.particle(), 3.0 * hz_t) - 3.0 * base).abs() / (3.0 * base)
    };
    report.checks.push(Check::new("units: Larmor frequency linear in hz", dev, 1e-15));
}

fn lineshape_checks(line: &LorentzianLine, report: &mut Report) -> Res<()> {
    let (w0, d) = (line.omega0(), line.delta());
    let sym = log_grid(1e-3 * d, 1e3 * d, 50)
        .map(|x| (line.density(w0 + x) - line.density(w0 - x)).abs() / line.density(w0 + x))
        .fold(0.0, f64::max);
    report.checks.push(Check::new("lineshape: symmetric about omega0", sym, 1e-13));

    let peak = line.density(w0);
    let over = log_grid(1e-6 * d, 1e3 * d, 60)
        .flat_map(|x| [w0 + x, w0 - x])
        .map(|w| ((line.density(w) - peak) / peak).max(0.0))
        .fold(0.0, f64::max);
    report.checks.push(Check::new("lineshape: maximum at omega0", over, 0.0));

    let mut dev = 0.0f64;
    for (lo, hi) in [(-3.0, 2.0), (0.5, 40.0), (-27.0, 27.0), (-200.0, -1.0)] {
        let (a, b) = (w0 + lo * d, w0 + hi * d);
        let exact = line.mass_between(a, b)?;
        let mut pts: Vec<f64> = [a, w0 - d, w0, w0 + d, b]
            .into_iter()
            .filter(|x| *x >= a && *x <= b)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let quad: f64 = integrate_breakpoints(
            |w| line.density(w),
            &pts,
            Tolerance::relative(1e-13),
        )?
        .value;
        dev = dev.max((quad - exact).abs() / exact);
    }
    report.checks.push(Check::new("lineshape: mass_between vs quadrature", dev, 1e-10));
    Ok(())
}

fn spectral_checks(c: &CouplingParams, report: &mut Report) -> Res<()> {
    let gamma = decay_width(c);
    let w = transition_rate(c, c.omega0());
    let dev = if gamma == 0.0 { w.abs() } else { (w - 2.0 * gamma).abs() / (2.0 * gamma) };
    report.checks.push(Check::new("spectral: W(omega0) = 2 gamma", dev, 1e-15));
    report.checks.push(Check::new("spectral: gamma >= 0", (-gamma).max(0.0), 0.0));

    let scaled = |h1: f64, delta: f64| -> Res<f64> {
        let line = LorentzianLine::new(c.omega0(), delta)?;
        Ok(decay_width(&CouplingParams::new(*c.particle(), h1, line)?))
    };
    let d = c.line().delta();
    let mut dev = 0.0f64;
    if gamma > 0.0 {
        for k in [0.5, 3.0, 10.0] {
            dev = dev.max((scaled(k * c.h1_tesla(), d)? - k * k * gamma).abs() / (k * k * gamma));
            dev = dev.max((scaled(c.h1_tesla(), k * d)? - gamma / k).abs() / (gamma / k));
        }
    }
    report.checks.push(Check::new("spectral: gamma scaling in h1 and delta", dev, 1e-14));

    let z = collision_element_limit(c, d / 10.0, 3)?;
    let (dev_im, dev_re) = if gamma == 0.0 {
        (z.im.abs(), z.re.abs())
    } else {
        ((z.im + 2.0 * gamma).abs() / (2.0 * gamma), z.re.abs() / gamma)
    };
    report.checks.push(Check::new("spectral: collision element Im -> -2 gamma", dev_im, 1e-4));
    report.checks.push(Check::new("spectral: collision element Re / gamma", dev_re, 1e-6));

    let shift = energy_shift_pv(c, LowerLimit::NegativeInfinity)?;
    let scale = c.coupling_squared() / d;
    let dev = if scale == 0.0 { shift.abs() } else { shift.abs() / scale };
    report.checks.push(Check::new("spectral: full-line PV shift vanishes", dev, 1e-12));
    Ok(())
}

fn integrand_checks(form: &ClosedForm, report: &mut Report) {
    let mut dev_g = 0.0f64;
    let mut dev_d = 0.0f64;
    let bs: Vec<f64> = [0.0, 1.0, 729.0, 729.733]
        .into_iter()
        .chain(log_grid(1e-3, 1e4, 21))
        .collect();
    for xi in log_grid(1e-4, 60.0, 20) {
        for a in log_grid(1e-2, 1e4, 20) {
            for &b in &bs {
                let z = Complex64::new(1.0, xi / a);
                let den = (1.0 + b * z * z) * z * z;
                let g = 1.0 / den;
                let r = form.rational(xi, a, b);
                let dev = ((r.re - g.re).abs().max((r.im - g.im).abs())) / g.norm();
                dev_g = dev_g.max(dev);
                let modulus = a.powi(8) * den.norm_sqr();
                dev_d = dev_d.max((form.d(xi, a, b) - modulus).abs() / modulus);
            }
        }
    }
    report.checks.push(Check::new("evolution: integrand Re/Im identity (10^4)", dev_g, 1e-10));
    report.checks.push(Check::new("evolution: D(xi) = a^8 |den|^2 (10^4)", dev_d, 1e-10));
}

fn route_checks(form: &ClosedForm, report: &mut Report) -> Res<()> {
    let mut dev = 0.0f64;
    for b in [0.0, 1.0, 729.0] {
        for a in log_grid(1e-2, 1e4, 61) {
            let gl = coefficients_with(form, a, b, QuadratureRoute::GaussLaguerre)?;
            let ad = coefficients_with(form, a, b, QuadratureRoute::Adaptive)?;
            dev = dev.max(((gl.a - ad.a) / ad.a).abs().max(((gl.b - ad.b) / ad.b).abs()));
        }
    }
    report.checks.push(Check::new("evolution: Gauss-Laguerre vs adaptive A, B", dev, 1e-8));
    Ok(())
}

fn evolution_checks(form: &ClosedForm, p: &EvolutionParams, grid: &[f64], report: &mut Report) -> Res<()> {
    let pts = evolve_grid_with(form, p, grid)?;
    let init = (pts[0].total - 1.0).abs();
    report.checks.push(Check::new("evolution: density element at t = 0 is 1", init, 0.0));
    let rises = if p.gamma() > 0.0 {
        pts.windows(2).filter(|w| w[1].t > w[0].t && w[1].markovian >= w[0].markovian).count()
    } else {
        0
    };
    report.checks.push(Check::new("evolution: Markovian strictly decreasing", rises as f64, 0.0));
    let sums = pts.iter().filter(|q| q.total != q.markovian + q.non_markovian).count();
    report.checks.push(Check::new("evolution: total = Markovian + correction", sums as f64, 0.0));

    let undriven = EvolutionParams::new(p.omega0(), p.delta(), 0.0)?;
    let drift = evolve_grid_with(form, &undriven, &[0.0, 1.0 / p.omega0(), 1e6 / p.omega0()])?
        .iter()
        .map(|q| (q.total - 1.0).abs())
        .fold(0.0, f64::max);
    report.checks.push(Check::new("evolution: constant 1 without drive", drift, 0.0));

    let max_m = pts.iter().map(|q| q.markovian).fold(0.0, f64::max);
    let max_nm = pts.iter().map(|q| q.non_markovian.abs()).fold(0.0, f64::max);
    report
        .checks
        .push(Check::new("evolution: max |correction| / max Markovian", max_nm / max_m, 1.0));

    if p.gamma() > 0.0 {
        let extrema: Vec<f64> = (0..=100)
            .map(|k| {
                let t = (k as f64 + 0.5) * PI / p.omega0();
                non_markovian_term_with(form, p, t).map(f64::abs)
            })
            .collect::<Res<_>>()?;
        let last_rise = extrema.windows(2).rposition(|w| w[1] >= w[0]).map_or(0, |i| i + 1);
        report.checks.push(Check::new(
            "evolution: envelope decreasing from extremum k",
            last_rise as f64,
            50.0,
        ));
    }
    Ok(())
}

fn oracle_checks(form: &ClosedForm, p: &EvolutionParams, grid: &[f64], report: &mut Report) -> Res<()> {
    let cfg = OracleConfig::for_params(p);
    let times: Vec<f64> = grid.iter().copied().filter(|t| *t > p.t_floor()).collect();
    if p.gamma() == 0.0 || times.is_empty() {
        return Ok(());
    }
    let mut closed = Vec::with_capacity(times.len());
    let mut contour = Vec::with_capacity(times.len());
    for &t in &times {
        closed.push(non_markovian_term_with(form, p, t)?);
        contour.push(non_markovian_contour(p, t, &cfg)?);
    }
    let envelope = contour.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (dev, t) = worst(
        closed
            .iter()
            .zip(&contour)
            .zip(&times)
            .map(|((c, o), &t)| ((c - o).abs() / envelope, t)),
    );
    report
        .checks
        .push(Check::new("oracle: closed form vs contour / envelope", dev, 1e-6).at(t));

    let mut split_dev = 0.0f64;
    for &t in times.iter().step_by((times.len() / 5).max(1)) {
        let a = p.omega_t(t);
        let base = contour_integral(a, p.ratio_sq(), &[], 1e-12)?;
        let split = contour_integral(a, p.ratio_sq(), &[0.37 * a.min(30.0), 3.3, 17.0], 1e-12)?;
        split_dev = split_dev.max((base - split).norm() / base.norm());
    }
    report.checks.push(Check::new("oracle: contour additive under splitting", split_dev, 1e-10));

    // direct path at up to 20 mid-range times
    let t_max = grid[grid.len() - 1];
    let mid: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|t| *t >= 0.2 * t_max && *t <= 0.8 * t_max && *t > p.t_floor())
        .collect();
    let step = (mid.len() / 20).max(1);
    let mut devs = Vec::new();
    for &t in mid.iter().step_by(step).take(20) {
        let i = contour_integral(p.omega_t(t), p.ratio_sq(), &[], 1e-12)?;
        let amplitude = 2.0 * p.coupling_squared() / (PI * p.delta() * p.omega0() * p.omega0() * t) * i.norm();
        let pole = lorentzian_pole_contribution(p, t);
        let expected = non_markovian_contour(p, t, &cfg)? + pole;
        let direct = non_markovian_direct_extrapolated(p, t, &cfg, 3)?;
        devs.push(((direct - expected).abs() / (amplitude + pole.abs()), t));
    }
    if !devs.is_empty() {
        let (dev, t) = worst(devs);
        report
            .checks
            .push(Check::new("oracle: direct (eps -> 0) vs contour / envelope", dev, 1e-2).at(t));
    }
    Ok(())
}

/// Runs every check; `form` is the closed form under test.
pub fn run(c: &CouplingParams, hz_tesla: f64, t_max: f64, grid_size: usize, form: &ClosedForm) -> Res<Report> {
    let p = EvolutionParams::from_coupling(c)?;
    let grid = uniform_grid(t_max, grid_size)?;
    let mut report = Report::default();
    units_checks(c, hz_tesla, &mut report);
    lineshape_checks(c.line(), &mut report)?;
    spectral_checks(c, &mut report)?;
    integrand_checks(form, &mut report);
    route_checks(form, &mut report)?;
    evolution_checks(form, &p, &grid, &mut report)?;
    oracle_checks(form, &p, &grid, &mut report)?;
    Ok(report)
}
