//! Coupling-ladder orchestration: numerical T_c and Ξ against their
//! weak-coupling predictions, the residuals of the second-order formulas,
//! and the approach of Ξ/T_c to the universal constant π·e^{−γ}.
//!
//! Each ladder point is independent and only shares the λ-free sphere
//! operators; records are computed concurrently and assembled in ladder
//! order, so identical configurations produce identical output bytes.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::critical_temperature::find_tc_seeded_with_kernel;
use crate::error::{Error, Result};
use crate::fermi_grid::{build_grid, suggest_cutoff, GridMeta};
use crate::gap_solver::{energy_gap, solve_gap_with_kernel};
use crate::num::Real;
use crate::potential::PotentialSpec;
use crate::spectral::assemble_kernel;
use crate::sphere_asymptotics::{
    b_mu, build_vmu, build_wmu, e_mu, log_cd, predicted_tc, predicted_xi, universal_ratio,
    SphereOperator,
};

/// How a sweep builds its per-λ radial grid.
#[derive(Debug, Clone)]
pub struct GridPolicy<T> {
    /// Momentum cutoff; `None` asks the interaction for one.
    pub cutoff: Option<T>,
    pub points_per_panel: usize,
    /// Finest panel fraction relative to the predicted thermal scale:
    /// s_min = fraction × predicted_Tc/μ.
    pub s_min_fraction: T,
    /// Clamp range for the resulting s_min.
    pub s_min_floor: T,
}

impl<T: Real> Default for GridPolicy<T> {
    fn default() -> Self {
        GridPolicy {
            cutoff: None,
            points_per_panel: 12,
            s_min_fraction: T::of(0.1),
            s_min_floor: T::of(1e-9),
        }
    }
}

/// Full description of a coupling ladder run.
#[derive(Debug, Clone)]
pub struct SweepConfig<T> {
    pub dimension: usize,
    pub potential: PotentialSpec<T>,
    pub mu: T,
    /// Couplings in strictly descending order, at least two.
    pub lambdas: Vec<T>,
    pub grid: GridPolicy<T>,
    pub tc_rtol: T,
    pub gap_rtol: T,
    pub max_gap_iter: usize,
    /// Sphere-operator mode cutoff (d = 2).
    pub mode_cutoff: usize,
}

impl<T: Real> SweepConfig<T> {
    pub fn new(potential: PotentialSpec<T>, mu: T, lambdas: Vec<T>) -> Self {
        SweepConfig {
            dimension: potential.dimension(),
            potential,
            mu,
            lambdas,
            grid: GridPolicy::default(),
            tc_rtol: T::of(1e-9),
            gap_rtol: T::of(1e-10),
            max_gap_iter: 20_000,
            mode_cutoff: 32,
        }
    }

    /// The same physics at doubled resolution: twice the quadrature points
    /// per panel and half the finest panel fraction.
    pub fn refined(&self) -> Self {
        let mut refined = self.clone();
        refined.grid.points_per_panel *= 2;
        refined.grid.s_min_fraction = self.grid.s_min_fraction * T::of(0.5);
        refined
    }

    fn validate(&self) -> Result<()> {
        if self.dimension != self.potential.dimension() {
            return Err(Error::Config(format!(
                "config dimension {} disagrees with the potential ({})",
                self.dimension,
                self.potential.dimension()
            )));
        }
        if !(self.mu > T::zero()) || !self.mu.is_finite() {
            return Err(Error::Config(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if self.lambdas.len() < 2 {
            return Err(Error::Config(format!(
                "the ladder needs at least two couplings, got {}",
                self.lambdas.len()
            )));
        }
        if self
            .lambdas
            .iter()
            .any(|l| !(*l > T::zero()) || !l.is_finite())
        {
            return Err(Error::Config(
                "couplings must be positive and finite".into(),
            ));
        }
        if self.lambdas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config(
                "couplings must be strictly descending".into(),
            ));
        }
        if !self.potential.validate().gap_eligible() {
            return Err(Error::Config(
                "potential fails the gap-equation hypotheses required by the sweep".into(),
            ));
        }
        Ok(())
    }
}

/// One ladder point. On failure `status` carries the error kind and the
/// fields that were never computed stay NaN.
#[derive(Debug, Clone)]
pub struct SweepRecord<T> {
    pub lambda: T,
    pub tc: T,
    pub xi: T,
    pub delta_fermi: T,
    pub e_mu: T,
    pub b_mu: T,
    pub predicted_tc: T,
    pub predicted_xi: T,
    pub residual_tc: T,
    pub residual_xi: T,
    pub ratio: T,
    pub status: String,
    pub grid: Option<GridMeta<T>>,
    pub wall_seconds: f64,
}

impl<T: Real> SweepRecord<T> {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Recomputes every derived field from the stored primaries; returns
    /// false if any bit differs. Guards against post-hoc edits of emitted
    /// tables.
    pub fn verify(&self, mu: T, d: usize) -> bool {
        if !self.is_ok() {
            return true;
        }
        let pred_tc = predicted_tc(mu, d, self.b_mu);
        let pred_xi = predicted_xi(mu, d, self.b_mu);
        let (res_tc, res_xi) = match residuals(mu, d, self.b_mu, self.tc, self.xi) {
            Ok(pair) => pair,
            Err(_) => return false,
        };
        pred_tc.map(|v| v == self.predicted_tc).unwrap_or(false)
            && pred_xi.map(|v| v == self.predicted_xi).unwrap_or(false)
            && res_tc == self.residual_tc
            && res_xi == self.residual_xi
            && self.xi / self.tc == self.ratio
    }
}

fn residuals<T: Real>(mu: T, d: usize, b: T, tc: T, xi: T) -> Result<(T, T)> {
    let log_cd = log_cd::<T>(d)?;
    let mu_pow = mu.powf(T::of(d as f64 / 2.0 - 1.0));
    let exponent = T::FRAC_PI_2() / (mu_pow * b);
    let res_tc =
        (mu / tc).ln() + exponent + T::euler_gamma() + T::of(2.0).ln() + log_cd - T::PI().ln();
    let res_xi = (mu / xi).ln() + exponent + T::of(2.0).ln() + log_cd;
    Ok((res_tc, res_xi))
}

/// Runs the ladder, one record per coupling, concurrently. Failures are
/// carried in-band in `status`; only configuration problems abort the
/// sweep itself.
pub fn run_sweep<T: Real>(config: &SweepConfig<T>) -> Result<Vec<SweepRecord<T>>> {
    run_sweep_seeded(config, None)
}

/// As [`run_sweep`], optionally warm-starting each T_c search from a
/// previous run of the same ladder (e.g. at coarser resolution).
pub fn run_sweep_seeded<T: Real>(
    config: &SweepConfig<T>,
    seeds: Option<&[SweepRecord<T>]>,
) -> Result<Vec<SweepRecord<T>>> {
    config.validate()?;
    let vop = build_vmu(&config.potential, config.mu, config.mode_cutoff)?;
    let wop = build_wmu(&config.potential, config.mu, config.mode_cutoff)?;
    let records: Vec<SweepRecord<T>> = config
        .lambdas
        .par_iter()
        .map(|&lambda| {
            let seed = seeds.and_then(|s| {
                s.iter()
                    .find(|r| r.lambda == lambda && r.is_ok())
                    .map(|r| (r.tc * T::of(0.999), r.tc * T::of(1.001)))
            });
            ladder_point(config, &vop, &wop, lambda, seed)
        })
        .collect();
    Ok(records)
}

fn ladder_point<T: Real>(
    config: &SweepConfig<T>,
    vop: &SphereOperator<T>,
    wop: &SphereOperator<T>,
    lambda: T,
    seed: Option<(T, T)>,
) -> SweepRecord<T> {
    let start = Instant::now();
    let nan = T::nan();
    let mut record = SweepRecord {
        lambda,
        tc: nan,
        xi: nan,
        delta_fermi: nan,
        e_mu: nan,
        b_mu: nan,
        predicted_tc: nan,
        predicted_xi: nan,
        residual_tc: nan,
        residual_xi: nan,
        ratio: nan,
        status: "ok".into(),
        grid: None,
        wall_seconds: 0.0,
    };
    let fail = |record: &mut SweepRecord<T>, err: Error| {
        record.status = err.kind().to_string();
        record.wall_seconds = start.elapsed().as_secs_f64();
    };

    let mu = config.mu;
    let d = config.dimension;
    match e_mu(vop) {
        Ok(v) => record.e_mu = v,
        Err(e) => {
            fail(&mut record, e);
            return record;
        }
    }
    let b = match b_mu(vop, wop, lambda) {
        Ok(b) => b,
        Err(e) => {
            fail(&mut record, e);
            return record;
        }
    };
    record.b_mu = b;
    let (pred_tc, pred_xi) =
        match predicted_tc(mu, d, b).and_then(|t| predicted_xi(mu, d, b).map(|x| (t, x))) {
            Ok(pair) => pair,
            Err(e) => {
                fail(&mut record, e);
                return record;
            }
        };
    record.predicted_tc = pred_tc;
    record.predicted_xi = pred_xi;

    let s_min = (config.grid.s_min_fraction * pred_tc / mu)
        .max(config.grid.s_min_floor)
        .min(T::of(0.25));
    let cutoff = config
        .grid
        .cutoff
        .unwrap_or_else(|| suggest_cutoff(&config.potential, mu));
    let grid = match build_grid(mu, cutoff, config.grid.points_per_panel, s_min) {
        Ok(g) => g,
        Err(e) => {
            fail(&mut record, e);
            return record;
        }
    };
    record.grid = Some(grid.meta());

    let kernel = assemble_kernel(&config.potential, &grid);
    // The second-order prediction is within a factor e^|residual| of the
    // true Tc, far inside a decade on any usable ladder; the bisection
    // expands the bracket on its own if not.
    let bracket = seed.unwrap_or((pred_tc / T::of(10.0), pred_tc * T::of(10.0)));
    let tc = match find_tc_seeded_with_kernel(
        &config.potential,
        &kernel,
        &grid,
        lambda,
        config.tc_rtol,
        bracket,
    ) {
        Ok(res) => res.tc,
        Err(e) => {
            fail(&mut record, e);
            return record;
        }
    };
    record.tc = tc;

    let gap = match solve_gap_with_kernel(
        &config.potential,
        &kernel,
        &grid,
        lambda,
        T::zero(),
        T::one(),
        config.gap_rtol,
        config.max_gap_iter,
    ) {
        Ok(g) => g,
        Err(e) => {
            fail(&mut record, e);
            return record;
        }
    };
    let (xi, _) = match energy_gap(&gap, mu) {
        Ok(pair) => pair,
        Err(e) => {
            fail(&mut record, e);
            return record;
        }
    };
    record.xi = xi;
    record.delta_fermi = gap.at(mu.sqrt());
    record.ratio = xi / tc;
    match residuals(mu, d, b, tc, xi) {
        Ok((res_tc, res_xi)) => {
            record.residual_tc = res_tc;
            record.residual_xi = res_xi;
        }
        Err(e) => {
            fail(&mut record, e);
            return record;
        }
    }
    record.wall_seconds = start.elapsed().as_secs_f64();
    record
}

/// Relative movement of T_c and Ξ between a record and its refined rerun.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsReport<T> {
    pub lambda: T,
    pub tc_shift: T,
    pub xi_shift: T,
    /// Set when the discretization shift exceeds 10% of the asymptotic
    /// residual the record is supposed to measure.
    pub flagged: bool,
}

pub fn convergence_diagnostics<T: Real>(
    coarse: &SweepRecord<T>,
    refined: &SweepRecord<T>,
) -> Result<DiagnosticsReport<T>> {
    if coarse.lambda != refined.lambda {
        return Err(Error::Domain(format!(
            "records belong to different couplings: {} vs {}",
            coarse.lambda, refined.lambda
        )));
    }
    if !coarse.is_ok() || !refined.is_ok() {
        return Err(Error::Domain(format!(
            "cannot diagnose failed records (status {} vs {})",
            coarse.status, refined.status
        )));
    }
    let tc_shift = (coarse.tc - refined.tc).abs() / refined.tc;
    let xi_shift = (coarse.xi - refined.xi).abs() / refined.xi;
    let tenth = T::of(0.1);
    let flagged = tc_shift > tenth * refined.residual_tc.abs()
        || xi_shift > tenth * refined.residual_xi.abs();
    Ok(DiagnosticsReport {
        lambda: coarse.lambda,
        tc_shift,
        xi_shift,
        flagged,
    })
}

/// Stable CSV column order shared by every emitter.
pub const CSV_HEADER: &str =
    "lambda,Tc,Xi,Delta_fermi,e_mu,b_mu,predicted_Tc,predicted_Xi,residual_Tc,residual_Xi,ratio,status";

fn fmt_field<T: Real>(value: T) -> String {
    format!("{value:.16e}")
}

/// Renders records as CSV with 17 significant digits per numeric field.
pub fn to_csv<T: Real>(records: &[SweepRecord<T>]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            fmt_field(r.lambda),
            fmt_field(r.tc),
            fmt_field(r.xi),
            fmt_field(r.delta_fermi),
            fmt_field(r.e_mu),
            fmt_field(r.b_mu),
            fmt_field(r.predicted_tc),
            fmt_field(r.predicted_xi),
            fmt_field(r.residual_tc),
            fmt_field(r.residual_xi),
            fmt_field(r.ratio),
        ];
        out.push_str(&fields.join(","));
        out.push(',');
        out.push_str(&r.status);
        out.push('\n');
    }
    out
}

fn json_number<T: Real>(value: T) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        "null".into()
    }
}

/// Renders records as a JSON array mirroring the CSV fields; non-finite
/// values become null.
pub fn to_json<T: Real>(records: &[SweepRecord<T>]) -> String {
    let mut out = String::from("[\n");
    for (i, r) in records.iter().enumerate() {
        let _ = write!(
            out,
            "  {{\"lambda\": {}, \"Tc\": {}, \"Xi\": {}, \"Delta_fermi\": {}, \"e_mu\": {}, \
             \"b_mu\": {}, \"predicted_Tc\": {}, \"predicted_Xi\": {}, \"residual_Tc\": {}, \
             \"residual_Xi\": {}, \"ratio\": {}, \"status\": \"{}\"}}",
            json_number(r.lambda),
            json_number(r.tc),
            json_number(r.xi),
            json_number(r.delta_fermi),
            json_number(r.e_mu),
            json_number(r.b_mu),
            json_number(r.predicted_tc),
            json_number(r.predicted_xi),
            json_number(r.residual_tc),
            json_number(r.residual_xi),
            json_number(r.ratio),
            r.status
        );
        out.push_str(if i + 1 < records.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

/// Two-panel SVG: Ξ/T_c against λ with the universal constant as a
/// reference line, and the two residual magnitudes against λ on a
/// logarithmic λ axis.
pub fn to_svg<T: Real>(records: &[SweepRecord<T>]) -> String {
    let ok: Vec<&SweepRecord<T>> = records.iter().filter(|r| r.is_ok()).collect();
    let width = 720.0f64;
    let height = 560.0f64;
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n<rect width=\"{width}\" height=\"{height}\" \
         fill=\"white\"/>\n"
    );
    if ok.is_empty() {
        svg.push_str(
            "<text x=\"20\" y=\"40\" font-size=\"14\">no successful records</text>\n</svg>\n",
        );
        return svg;
    }
    let f = |v: T| -> f64 { v.to_f64().unwrap_or(f64::NAN) };
    let lambdas: Vec<f64> = ok.iter().map(|r| f(r.lambda)).collect();
    let ratios: Vec<f64> = ok.iter().map(|r| f(r.ratio)).collect();
    let target: f64 = f(universal_ratio::<T>());

    // Panel 1: ratio vs lambda, linear axes.
    let (x0, x1, y0, y1) = (80.0, width - 30.0, 40.0, 260.0);
    let (lmin, lmax) = bounds(&lambdas);
    let mut rvals = ratios.clone();
    rvals.push(target);
    let (rmin, rmax) = bounds(&rvals);
    let sx = |l: f64| x0 + (l - lmin) / (lmax - lmin).max(1e-300) * (x1 - x0);
    let sy = |r: f64| y1 - (r - rmin) / (rmax - rmin).max(1e-300) * (y1 - y0);
    let _ = write!(
        svg,
        "<text x=\"{x0}\" y=\"24\" font-size=\"14\">energy gap over critical temperature vs \
         coupling</text>\n<line x1=\"{x0}\" y1=\"{y1}\" x2=\"{x1}\" y2=\"{y1}\" \
         stroke=\"black\"/>\n<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" \
         stroke=\"black\"/>\n"
    );
    let ty = sy(target);
    let _ = write!(
        svg,
        "<line x1=\"{x0}\" y1=\"{ty:.2}\" x2=\"{x1}\" y2=\"{ty:.2}\" stroke=\"gray\" \
         stroke-dasharray=\"6 4\"/>\n<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" \
         fill=\"gray\">pi e^-gamma = {target:.10}</text>\n",
        x0 + 6.0,
        ty - 6.0
    );
    polyline(&mut svg, &lambdas, &ratios, &sx, &sy, "steelblue");

    // Panel 2: |residuals| vs lambda, log-lambda axis.
    let (y0b, y1b) = (330.0, 530.0);
    let logs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let (gmin, gmax) = bounds(&logs);
    let res_tc: Vec<f64> = ok.iter().map(|r| f(r.residual_tc).abs()).collect();
    let res_xi: Vec<f64> = ok.iter().map(|r| f(r.residual_xi).abs()).collect();
    let mut all = res_tc.clone();
    all.extend_from_slice(&res_xi);
    all.push(0.0);
    let (hmin, hmax) = bounds(&all);
    let sxb = |l: f64| x0 + (l.ln() - gmin) / (gmax - gmin).max(1e-300) * (x1 - x0);
    let syb = |r: f64| y1b - (r - hmin) / (hmax - hmin).max(1e-300) * (y1b - y0b);
    let _ = write!(
        svg,
        "<text x=\"{x0}\" y=\"{}\" font-size=\"14\">asymptotic residuals vs coupling \
         (log axis)</text>\n<line x1=\"{x0}\" y1=\"{y1b}\" x2=\"{x1}\" y2=\"{y1b}\" \
         stroke=\"black\"/>\n<line x1=\"{x0}\" y1=\"{y0b}\" x2=\"{x0}\" y2=\"{y1b}\" \
         stroke=\"black\"/>\n",
        y0b - 16.0
    );
    polyline(&mut svg, &lambdas, &res_tc, &sxb, &syb, "firebrick");
    polyline(&mut svg, &lambdas, &res_xi, &sxb, &syb, "darkgreen");
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"firebrick\">critical-temperature \
         residual</text>\n<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" \
         fill=\"darkgreen\">energy-gap residual</text>\n",
        x0 + 6.0,
        y0b + 16.0,
        x0 + 6.0,
        y0b + 32.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.06 * (hi - lo);
    (lo - pad, hi + pad)
}

fn polyline(
    svg: &mut String,
    xs: &[f64],
    ys: &[f64],
    sx: &dyn Fn(f64) -> f64,
    sy: &dyn Fn(f64) -> f64,
    color: &str,
) {
    let mut points = String::new();
    for (&x, &y) in xs.iter().zip(ys) {
        let _ = write!(points, "{:.2},{:.2} ", sx(x), sy(y));
    }
    let _ = writeln!(
        svg,
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
        points.trim_end()
    );
    for (&x, &y) in xs.iter().zip(ys) {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
            sx(x),
            sy(y)
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> SweepConfig<f64> {
        let pot = PotentialSpec::gaussian(1, 1.0, 1.0).unwrap();
        let mut config = SweepConfig::new(pot, 1.0, vec![0.5, 0.45]);
        config.grid.points_per_panel = 8;
        config.tc_rtol = 1e-7;
        config.gap_rtol = 1e-9;
        config
    }

    #[test]
    fn ladder_must_be_descending_and_plural() {
        let pot = PotentialSpec::gaussian(1, 1.0, 1.0).unwrap();
        let single = SweepConfig::new(pot.clone(), 1.0, vec![0.5]);
        assert_eq!(run_sweep(&single).unwrap_err().kind(), "config_error");
        let rising = SweepConfig::new(pot.clone(), 1.0, vec![0.3, 0.5]);
        assert_eq!(run_sweep(&rising).unwrap_err().kind(), "config_error");
        let zero = SweepConfig::new(pot, 1.0, vec![0.5, 0.0]);
        assert_eq!(run_sweep(&zero).unwrap_err().kind(), "config_error");
    }

    #[test]
    fn sweep_produces_consistent_records() {
        let config = quick_config();
        let records = run_sweep(&config).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert!(r.is_ok(), "status {}", r.status);
            assert!(r.tc > 0.0 && r.xi > 0.0 && r.ratio.is_finite());
            assert!(
                r.xi <= r.delta_fermi * (1.0 + 1e-12),
                "gap exceeds its Fermi value"
            );
            assert!(r.verify(config.mu, config.dimension));
            assert!(r.grid.is_some());
        }
        // descending coupling order preserved
        assert!(records[0].lambda > records[1].lambda);
        // smaller coupling sits closer to the universal constant
        let target = universal_ratio::<f64>();
        assert!((records[1].ratio - target).abs() < (records[0].ratio - target).abs());
    }

    #[test]
    fn emitters_are_deterministic_and_complete() {
        let config = quick_config();
        let a = run_sweep(&config).unwrap();
        let b = run_sweep(&config).unwrap();
        assert_eq!(to_csv(&a), to_csv(&b));
        assert_eq!(to_json(&a), to_json(&b));
        assert_eq!(to_svg(&a), to_svg(&b));
        let csv = to_csv(&a);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 12);
        assert!(first.ends_with(",ok"));
        // 17 significant digits: d.16 mantissa digits in every field
        let mantissa = first.split(',').next().unwrap();
        assert_eq!(mantissa, "5.0000000000000000e-1");
        let json = to_json(&a);
        assert!(json.contains("\"status\": \"ok\""));
        let svg = to_svg(&a);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn failures_stay_in_band() {
        // A kiloscale mu forces predicted scales the floor-clamped grid
        // cannot resolve; the record reports instead of panicking.
        let pot: PotentialSpec<f64> = PotentialSpec::gaussian(1, 1.0, 1.0).unwrap();
        let mut config = SweepConfig::new(pot, 1.0, vec![1e-3, 5e-4]);
        config.grid.s_min_floor = 1e-4;
        let records = run_sweep(&config).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert!(!r.is_ok());
            assert!(r.tc.is_nan());
            assert!(r.b_mu.is_finite(), "asymptotic fields precede the failure");
        }
        let csv = to_csv(&records);
        assert!(csv.contains("NaN"));
        let json = to_json(&records);
        assert!(json.contains("null") && !json.contains("NaN"));
    }

    #[test]
    fn diagnostics_compare_resolutions() {
        let config = quick_config();
        let coarse = run_sweep(&config).unwrap();
        let refined = run_sweep_seeded(&config.refined(), Some(&coarse)).unwrap();
        for (c, r) in coarse.iter().zip(&refined) {
            let report = convergence_diagnostics(c, r).unwrap();
            assert!(report.tc_shift < 1e-4, "tc moved {:e}", report.tc_shift);
            assert!(report.xi_shift < 1e-3, "xi moved {:e}", report.xi_shift);
        }
        let mismatched = convergence_diagnostics(&coarse[0], &refined[1]);
        assert_eq!(mismatched.unwrap_err().kind(), "domain_error");
        let same = convergence_diagnostics(&coarse[0], &coarse[0]).unwrap();
        assert_eq!(same.tc_shift, 0.0);
        assert_eq!(same.xi_shift, 0.0);
        assert!(!same.flagged);
    }
}
