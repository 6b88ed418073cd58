use std::fmt::Write as _;

use dqw_core::dark_resonance::{spectrum, susceptibility, transmission, reference_absorption, FourLevelParams};
use dqw_core::dephasing::CoherenceBudget;
use dqw_core::detector::{
    analytic_signal_slope, efficiency, min_power, qwip_ratio, signal_intensity, Efficiency, EfficiencyInputs,
    MinPower, QwipInputs, QwipRatio, SensitivityInputs, Signal,
};
use dqw_core::eigensolver::{
    parity, solve_bound, solve_resonances, BoundOptions, EnergyWindow, ResonanceOptions, ResonanceQuality,
};
use dqw_core::heterostructure::{build_grid_with, default_cladding, Boundary, GridOptions, StructureFile};
use dqw_core::liouville::{linear_response, steady_state, MasterEquationSpec};
use dqw_core::pipeline::{analyze, Analysis};
use dqw_core::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{set_parameter, Loaded};
use crate::output::{num, Artifacts};

/// Gap between a default solver window and the potentials bounding it, meV.
const EDGE_MARGIN: f64 = 0.5;

/// Parity tolerance in relative L² norm.
const PARITY_TOL: f64 = 1e-3;

/// The four-level model a run works on.
#[derive(Debug, Clone)]
pub enum Model {
    Params(FourLevelParams),
    Structure(Box<Analysis>),
}

impl Model {
    pub fn resolve(loaded: &Loaded) -> Result<Self> {
        if let Some(p) = loaded.config.params {
            return Ok(Model::Params(p));
        }
        let file = structure(loaded)?;
        let analysis = analyze(&file.spec(), &file.material, &loaded.config.pipeline())?;
        Ok(Model::Structure(Box::new(analysis)))
    }

    pub fn params(&self) -> FourLevelParams {
        match self {
            Model::Params(p) => *p,
            Model::Structure(a) => a.params,
        }
    }

    pub fn analysis(&self) -> Option<&Analysis> {
        match self {
            Model::Params(_) => None,
            Model::Structure(a) => Some(a),
        }
    }
}

fn structure(loaded: &Loaded) -> Result<&StructureFile> {
    loaded
        .structure
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs a `structure` file".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveSummary {
    pub bound: usize,
    pub resonances: usize,
}

pub fn solve(loaded: &Loaded, out: &mut Artifacts) -> Result<SolveSummary> {
    let file = structure(loaded)?;
    let spec = file.spec();
    let config = &loaded.config;
    let cladding = match config.solver.cladding_nm {
        Some(c) => c,
        None => default_cladding(&spec, &file.material)?,
    };
    let grid = build_grid_with(
        &spec,
        &file.material,
        &GridOptions {
            dz: config.solver.dz,
            cladding_nm: Some(cladding),
        },
    )?;
    let floor = grid.potential[0].min(grid.potential[grid.len() - 1]);

    let [lo, hi] = config
        .windows
        .bound
        .unwrap_or([grid.min_potential(), floor - EDGE_MARGIN]);
    let bound = if lo < hi {
        let options = BoundOptions {
            tolerance: config.solver.bound_tolerance,
            ..Default::default()
        };
        solve_bound(&grid, EnergyWindow::new(lo, hi), &options)?
    } else {
        Vec::new()
    };

    let open = spec.left_boundary == Boundary::Open || spec.right_boundary == Boundary::Open;
    let resonances = match (open, config.windows.resonance) {
        (false, _) => Vec::new(),
        (true, window) => {
            let [lo, hi] = window.unwrap_or([floor + EDGE_MARGIN, grid.max_potential() - EDGE_MARGIN]);
            if lo < hi {
                let options = ResonanceOptions {
                    max_width: config.solver.max_resonance_width,
                    ..Default::default()
                };
                solve_resonances(&grid, EnergyWindow::new(lo, hi), &options)?
            } else {
                Vec::new()
            }
        }
    };

    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (i, s) in bound.iter().enumerate() {
        rows.push(vec![
            i.to_string(),
            num(s.energy),
            num(0.0),
            parity(&s.envelope, PARITY_TOL).to_string(),
        ]);
    }
    for (k, r) in resonances.iter().enumerate() {
        let i = bound.len() + k;
        rows.push(vec![
            i.to_string(),
            num(r.energy),
            num(r.width),
            parity(&r.envelope, PARITY_TOL).to_string(),
        ]);
        if r.quality != ResonanceQuality::Good {
            notes.push(format!(
                "{i} {} {:?} width_uncertainty={}",
                num(r.energy),
                r.quality,
                num(r.width_uncertainty)
            ));
        }
    }
    out.csv("states.csv", &["index", "energy_meV", "width_meV", "parity"], &rows)?;
    if !notes.is_empty() {
        out.log("states.quality.log", "index energy_meV quality", &notes)?;
    }

    if config.solve.envelopes {
        let mut columns = vec!["z_nm".to_string(), "potential_meV".to_string()];
        columns.extend((0..rows.len()).map(|i| format!("psi_{i}")));
        let envelopes: Vec<&[f64]> = bound
            .iter()
            .map(|s| s.envelope.as_slice())
            .chain(resonances.iter().map(|r| r.envelope.as_slice()))
            .collect();
        let table: Vec<Vec<String>> = (0..grid.len())
            .map(|k| {
                let mut row = vec![num(grid.z[k]), num(grid.potential[k])];
                row.extend(envelopes.iter().map(|e| num(e[k])));
                row
            })
            .collect();
        let names: Vec<&str> = columns.iter().map(String::as_str).collect();
        out.csv("envelopes.csv", &names, &table)?;
    }
    Ok(SolveSummary {
        bound: bound.len(),
        resonances: resonances.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrCase {
    Off,
    On,
    Detuned,
}

impl IrCase {
    pub fn name(self) -> &'static str {
        match self {
            IrCase::Off => "off",
            IrCase::On => "on",
            IrCase::Detuned => "detuned",
        }
    }
}

/// Parameters of one spectrum case.
pub fn case_params(loaded: &Loaded, model: &Model, case: IrCase) -> FourLevelParams {
    let p = model.params();
    match case {
        IrCase::Off => FourLevelParams { omega_ir: 0.0, ..p },
        IrCase::On => p,
        IrCase::Detuned => FourLevelParams {
            delta_ir: p.delta_ir + loaded.config.spectrum.detuned_ir.unwrap_or(0.25 * p.omega),
            ..p
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub case: IrCase,
    pub flagged: usize,
    /// Lowest transmission on the grid and its detuning.
    pub min_transmission: (f64, f64),
}

pub fn spectra(loaded: &Loaded, model: &Model, cases: &[IrCase], out: &mut Artifacts) -> Result<Vec<SpectrumSummary>> {
    let grid = loaded.config.spectrum.grid().values()?;
    let mut summaries = Vec::new();
    for &case in cases {
        let p = case_params(loaded, model, case);
        let s = spectrum(&p, &grid, loaded.config.spectrum.od)?;
        let rows: Vec<Vec<String>> = (0..grid.len())
            .map(|k| {
                vec![
                    num(s.detuning[k]),
                    num(s.chi[k].re),
                    num(s.chi[k].im),
                    num(s.transmission[k]),
                ]
            })
            .collect();
        let stem = format!("spectrum_ir_{}", case.name());
        out.csv(
            &format!("{stem}.csv"),
            &["detuning_meV", "re_chi", "im_chi", "transmission"],
            &rows,
        )?;
        if !s.interpolated.is_empty() {
            let entries: Vec<String> = s
                .interpolated
                .iter()
                .map(|&k| format!("{k} {} singular; interpolated from neighbours", num(grid[k])))
                .collect();
            out.log(&format!("{stem}.singular.log"), "index detuning_meV reason", &entries)?;
        }
        let (k, t) = s
            .transmission
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, &t)| if t < acc.1 { (k, t) } else { acc });
        summaries.push(SpectrumSummary {
            case,
            flagged: s.interpolated.len(),
            min_transmission: (grid[k], t),
        });
    }
    Ok(summaries)
}

/// A detector input together with where its value came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Input {
    pub value: f64,
    pub source: &'static str,
}

fn pick(configured: Option<f64>, fallback: f64, source: &'static str) -> Input {
    match configured {
        Some(value) => Input {
            value,
            source: "config",
        },
        None => Input {
            value: fallback,
            source,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorInputs {
    pub alpha: Input,
    pub gamma: Input,
    pub gamma_decoh: Input,
    pub gamma_probe_rad: Input,
    pub gamma_ir_rad: Input,
    pub gamma_coh: Input,
    pub gamma_qwip: Input,
    pub gamma_decoh_qwip: f64,
    pub measurement_time_s: f64,
    pub area_um2: f64,
    pub lambda_probe_um: f64,
    pub lambda_ir_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureSummary {
    /// Uncoupled energies of a, b, c, d, meV.
    pub role_energies: [f64; 4],
    pub doublet_energies: [f64; 2],
    pub doublet_widths: [f64; 2],
    pub tunnel_matrix_element: f64,
    pub bare_detuning: f64,
    pub probe_dipole_nm: f64,
    pub ir_dipole_nm: f64,
    pub gamma_a_to_b: f64,
    pub gamma_ir_rad: f64,
    pub fano: f64,
    pub budget_ab: CoherenceBudget,
    pub budget_cb: CoherenceBudget,
    pub budget_db: CoherenceBudget,
}

impl StructureSummary {
    fn from_analysis(a: &Analysis) -> Self {
        Self {
            role_energies: a.roles.each_ref().map(|r| r.energy),
            doublet_energies: a.doublet.map(|d| d.0),
            doublet_widths: a.doublet.map(|d| d.1),
            tunnel_matrix_element: a.tunnel.matrix_element,
            bare_detuning: a.tunnel.detuning,
            probe_dipole_nm: a.probe_dipole_nm,
            ir_dipole_nm: a.ir_dipole_nm,
            gamma_a_to_b: a.gamma_a_to_b,
            gamma_ir_rad: a.gamma_ir_rad,
            fano: a.fano.value,
            budget_ab: a.budget.ab,
            budget_cb: a.budget.cb,
            budget_db: a.budget.db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectReport {
    pub params: FourLevelParams,
    pub inputs: DetectorInputs,
    pub signal: Signal,
    /// Closed-form −∂I/∂Ω_IR², W/cm² per meV².
    pub analytic_slope: f64,
    pub efficiency: Efficiency,
    pub min_power: MinPower,
    /// P_min spread over the detector area, W/cm².
    pub min_power_w_cm2: f64,
    pub qwip: QwipRatio,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureSummary>,
    pub notes: Vec<String>,
}

pub fn detect_report(loaded: &Loaded, model: &Model) -> Result<DetectReport> {
    let p = model.params();
    let d = &loaded.config.detector;
    let gamma = pick(d.gamma, p.gamma_ab, "gamma_ab");
    let gamma_ir_rad = match (d.gamma_ir_rad, model.analysis()) {
        (Some(v), _) => Input {
            value: v,
            source: "config",
        },
        (None, Some(a)) => Input {
            value: a.gamma_ir_rad,
            source: "structure",
        },
        (None, None) => {
            return Err(Error::Config(
                "detector.gamma_ir_rad is required when [params] replaces the structure".into(),
            ))
        }
    };
    let inputs = DetectorInputs {
        alpha: pick(d.alpha, p.alpha, "alpha"),
        gamma,
        gamma_decoh: pick(d.gamma_decoh, p.gamma_cb, "gamma_cb"),
        gamma_probe_rad: pick(d.gamma_probe_rad, p.gamma_a_to_b, "gamma_a_to_b"),
        gamma_ir_rad,
        gamma_coh: pick(d.gamma_coh, gamma.value, "gamma"),
        gamma_qwip: pick(d.gamma_qwip, gamma.value, "gamma"),
        gamma_decoh_qwip: d.gamma_decoh_qwip,
        measurement_time_s: d.measurement_time_s,
        area_um2: d.area_um2,
        lambda_probe_um: p.lambda_probe_um,
        lambda_ir_um: p.lambda_ir_um,
    };

    let signal = signal_intensity(&p, p.omega_ir, &d.readout)?;
    let analytic_slope = analytic_signal_slope(&p, &d.readout)?;
    let eff = efficiency(&EfficiencyInputs {
        lambda_ir_um: p.lambda_ir_um,
        lambda_probe_um: p.lambda_probe_um,
        gamma_ir_rad: inputs.gamma_ir_rad.value,
        gamma_probe_rad: inputs.gamma_probe_rad.value,
        alpha: inputs.alpha.value,
        gamma: inputs.gamma.value,
        gamma_decoh: inputs.gamma_decoh.value,
        wavelength_exponent: d.wavelength_exponent,
    })?;
    let pmin = min_power(&SensitivityInputs {
        lambda_ir_um: p.lambda_ir_um,
        lambda_probe_um: p.lambda_probe_um,
        gamma: inputs.gamma.value,
        gamma_probe_rad: inputs.gamma_probe_rad.value,
        gamma_decoh: inputs.gamma_decoh.value,
        omega: p.omega,
        measurement_time_s: d.measurement_time_s,
    })?;
    let qwip = qwip_ratio(&QwipInputs {
        gamma_coh: inputs.gamma_coh.value,
        gamma_qwip: inputs.gamma_qwip.value,
        lambda_probe_um: p.lambda_probe_um,
        lambda_ir_um: p.lambda_ir_um,
        gamma_decoh: inputs.gamma_decoh.value,
        gamma_probe_rad: inputs.gamma_probe_rad.value,
        omega: p.omega,
        gamma_decoh_qwip: d.gamma_decoh_qwip,
    })?;

    let mut notes = vec![
        format!(
            "efficiency uses (lambda_IR/lambda_probe)^{}; the printed efficiency has exponent 3, the discussion after it uses 2",
            d.wavelength_exponent
        ),
        "the closed-geometry transmission figure quotes 500 nW in its caption and 0.1 uW/(10 um)^2 in the text for the same case".into(),
        "P_min per area uses detector.area_um2".into(),
    ];
    if let Some(a) = model.analysis() {
        let routed: Vec<&str> = ["ab", "cb", "db"]
            .iter()
            .zip(loaded.config.dephasing.fano_routing)
            .filter(|(_, on)| *on)
            .map(|(n, _)| *n)
            .collect();
        notes.push(format!(
            "Fano term {} meV added to gamma_{}",
            num(a.fano.value),
            routed.join(", gamma_")
        ));
    }
    Ok(DetectReport {
        params: p,
        inputs,
        signal,
        analytic_slope,
        efficiency: eff,
        min_power: pmin,
        min_power_w_cm2: pmin.watts / (d.area_um2 * 1e-8),
        qwip,
        structure: model.analysis().map(StructureSummary::from_analysis),
        notes,
    })
}

fn report_text(r: &DetectReport) -> String {
    let mut s = String::new();
    let line = |s: &mut String, key: &str, v: f64| {
        let _ = writeln!(s, "{key:<34} {}", num(v));
    };
    let _ = writeln!(s, "[params]");
    let p = &r.params;
    for (k, v) in [
        ("omega_meV", p.omega),
        ("alpha_meV", p.alpha),
        ("omega_ir_meV", p.omega_ir),
        ("delta0_meV", p.delta0),
        ("delta_ir_meV", p.delta_ir),
        ("gamma_ab_meV", p.gamma_ab),
        ("gamma_cb_meV", p.gamma_cb),
        ("gamma_db_meV", p.gamma_db),
        ("eta_meV", p.eta),
        ("gamma_a_to_b_meV", p.gamma_a_to_b),
        ("ir_linewidth_meV", p.ir_linewidth),
        ("lambda_probe_um", p.lambda_probe_um),
        ("lambda_ir_um", p.lambda_ir_um),
    ] {
        line(&mut s, k, v);
    }
    if let Some(st) = &r.structure {
        let _ = writeln!(s, "\n[structure]");
        for (name, e) in ["a", "b", "c", "d"].iter().zip(st.role_energies) {
            line(&mut s, &format!("E_{name}_meV"), e);
        }
        line(&mut s, "doublet_lower_meV", st.doublet_energies[0]);
        line(&mut s, "doublet_upper_meV", st.doublet_energies[1]);
        line(&mut s, "doublet_lower_width_meV", st.doublet_widths[0]);
        line(&mut s, "doublet_upper_width_meV", st.doublet_widths[1]);
        line(&mut s, "tunnel_matrix_element_meV", st.tunnel_matrix_element);
        line(&mut s, "bare_detuning_meV", st.bare_detuning);
        line(&mut s, "probe_dipole_nm", st.probe_dipole_nm);
        line(&mut s, "ir_dipole_nm", st.ir_dipole_nm);
        line(&mut s, "gamma_a_to_b_meV", st.gamma_a_to_b);
        line(&mut s, "gamma_ir_rad_meV", st.gamma_ir_rad);
        line(&mut s, "fano_meV", st.fano);
        for (name, b) in [("ab", &st.budget_ab), ("cb", &st.budget_cb), ("db", &st.budget_db)] {
            let _ = writeln!(s, "\n[budget.{name}]");
            line(&mut s, "radiative", b.radiative);
            line(&mut s, "acoustic", b.acoustic);
            line(&mut s, "polar_optical", b.polar_optical);
            line(&mut s, "roughness", b.roughness);
            line(&mut s, "laser_linewidth", b.laser_linewidth);
            line(&mut s, "escape", b.escape);
            line(&mut s, "fano", b.fano);
            line(&mut s, "total", b.total());
        }
    }
    let _ = writeln!(s, "\n[inputs]");
    let i = &r.inputs;
    for (k, v) in [
        ("alpha", i.alpha),
        ("gamma", i.gamma),
        ("gamma_decoh", i.gamma_decoh),
        ("gamma_probe_rad", i.gamma_probe_rad),
        ("gamma_ir_rad", i.gamma_ir_rad),
        ("gamma_coh", i.gamma_coh),
        ("gamma_qwip", i.gamma_qwip),
    ] {
        let _ = writeln!(s, "{:<34} {} ({})", format!("{k}_meV"), num(v.value), v.source);
    }
    line(&mut s, "gamma_decoh_qwip_meV", i.gamma_decoh_qwip);
    line(&mut s, "measurement_time_s", i.measurement_time_s);
    line(&mut s, "area_um2", i.area_um2);

    let _ = writeln!(s, "\n[signal]");
    line(&mut s, "slope_W_cm2_per_meV2", r.signal.slope.value);
    line(&mut s, "slope_analytic_W_cm2_per_meV2", r.analytic_slope);
    line(&mut s, "slope_truncation", r.signal.slope.truncation);
    line(&mut s, "slope_step_meV2", r.signal.slope.step);
    line(&mut s, "signal_W_cm2", r.signal.value);

    let _ = writeln!(s, "\n[efficiency]");
    line(&mut s, "wavelength_exponent", r.efficiency.wavelength_exponent);
    line(&mut s, "radiative_factor", r.efficiency.radiative_factor);
    line(&mut s, "coherence_factor", r.efficiency.coherence_factor);
    line(&mut s, "efficiency", r.efficiency.value);

    let _ = writeln!(s, "\n[min_power]");
    line(&mut s, "photon_energy_J", r.min_power.photon_energy_j);
    line(&mut s, "rate_factor_per_s", r.min_power.rate_factor);
    line(&mut s, "decoherence_factor", r.min_power.decoherence_factor);
    line(&mut s, "wavelength_factor", r.min_power.wavelength_factor);
    line(&mut s, "P_min_W", r.min_power.watts);
    line(&mut s, "P_min_W_cm2", r.min_power_w_cm2);

    let _ = writeln!(s, "\n[qwip_ratio]");
    line(&mut s, "gamma_coh_over_gamma_qwip", r.qwip.factors[0]);
    line(&mut s, "lambda_probe_over_lambda_ir", r.qwip.factors[1]);
    line(&mut s, "sqrt_decoh_probe_rad_over_omega", r.qwip.factors[2]);
    line(&mut s, "sqrt_decoh_over_decoh_qwip", r.qwip.factors[3]);
    line(&mut s, "ratio", r.qwip.value);

    let _ = writeln!(s, "\n[notes]");
    for n in &r.notes {
        let _ = writeln!(s, "- {n}");
    }
    s
}

pub fn detect(loaded: &Loaded, model: &Model, out: &mut Artifacts) -> Result<DetectReport> {
    let report = detect_report(loaded, model)?;
    out.write("report.txt", &report_text(&report))?;
    let toml = toml::to_string(&report).map_err(|e| Error::Numerical(format!("cannot serialize report: {e}")))?;
    out.write("report.toml", &toml)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub parameter: String,
    pub points: usize,
    pub failed: usize,
}

/// χ, transmission and signal slope at the readout detuning for each value.
pub fn sweep(loaded: &Loaded, model: &Model, out: &mut Artifacts) -> Result<SweepSummary> {
    let s = loaded
        .config
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("the sweep command needs a [sweep] block".into()))?;
    let readout = loaded.config.detector.readout;
    let base = model.params();
    let step = (s.stop - s.start) / (s.points - 1) as f64;
    let values: Vec<f64> = (0..s.points).map(|i| s.start + i as f64 * step).collect();
    let results: Vec<Result<(Complex64, f64, f64)>> = values
        .par_iter()
        .map(|&v| {
            let mut p = base;
            set_parameter(&mut p, &s.parameter, v)?;
            p.validate()?;
            let q = p.with_delta(readout.detuning);
            let chi = susceptibility(&q)?;
            let t = transmission(chi, readout.optical_density, reference_absorption(&p)?);
            let slope = dqw_core::detector::signal_slope(&p, &readout)?.value;
            Ok((chi, t, slope))
        })
        .collect();
    let nan = num(f64::NAN);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (k, (v, r)) in values.iter().zip(&results).enumerate() {
        match r {
            Ok((chi, t, slope)) => rows.push(vec![num(*v), num(chi.re), num(chi.im), num(*t), num(*slope)]),
            Err(e) => {
                rows.push(vec![num(*v), nan.clone(), nan.clone(), nan.clone(), nan.clone()]);
                failures.push(format!("{k} {} {e}", num(*v)));
            }
        }
    }
    out.csv(
        "sweep.csv",
        &[s.parameter.as_str(), "re_chi", "im_chi", "transmission", "signal_slope"],
        &rows,
    )?;
    if !failures.is_empty() {
        out.log("sweep.failed.log", "index value error", &failures)?;
    }
    Ok(SweepSummary {
        parameter: s.parameter,
        points: values.len(),
        failed: failures.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub compared: usize,
    pub skipped: usize,
    pub max_rel_err: f64,
    pub tolerance: f64,
    /// Largest relative deviation of the strong-probe column, informational.
    pub saturation_max_rel_err: Option<f64>,
}

impl OracleSummary {
    /// No compared point exceeds the tolerance. Vacuous when every point
    /// was skipped.
    pub fn passed(&self) -> bool {
        self.max_rel_err <= self.tolerance
    }
}

/// Relative error of Im χ, floored at 10⁻⁹ of the bare line peak so exact
/// transparency points do not divide by zero.
pub fn relative_error(formula: f64, oracle: f64, reference: f64) -> f64 {
    (formula - oracle).abs() / formula.abs().max(oracle.abs()).max(1e-9 * reference)
}

pub fn oracle_check(loaded: &Loaded, model: &Model, out: &mut Artifacts) -> Result<OracleSummary> {
    let cfg = &loaded.config.oracle;
    let sp = &loaded.config.spectrum;
    let base = model.params();
    if !(base.omega > 0.0) {
        return Err(Error::Config("oracle check needs Ω > 0 to set the probe strength".into()));
    }
    // Bare line peak η/γ_ab; η alone when γ_ab = 0.
    let reference = reference_absorption(&base).unwrap_or(base.eta);
    let step = (sp.stop - sp.start) / (cfg.points - 1) as f64;
    let detunings: Vec<f64> = (0..cfg.points).map(|i| sp.start + i as f64 * step).collect();
    let alpha0 = cfg.alpha_ratio * base.omega;
    let saturation = cfg.saturation_alpha_ratio.map(|r| r * base.omega);

    type Row = std::result::Result<(f64, f64, Option<f64>), String>;
    let rows: Vec<Row> = detunings
        .par_iter()
        .map(|&d| {
            let p = base.with_delta(d);
            let formula = susceptibility(&p).map_err(|e| format!("formula: {e}"))?.im;
            let oracle = linear_response(&p, alpha0, cfg.decay_target)
                .map_err(|e| format!("oracle: {e}"))?
                .chi
                .im;
            let saturated = match saturation {
                Some(alpha) => {
                    let spec = MasterEquationSpec::mirroring(&FourLevelParams { alpha, ..p }, cfg.decay_target)
                        .map_err(|e| format!("saturation: {e}"))?;
                    let rho = steady_state(&spec).map_err(|e| format!("saturation: {e}"))?;
                    Some((-p.eta * rho[(0, 1)] / alpha).im)
                }
                None => None,
            };
            Ok((formula, oracle, saturated))
        })
        .collect();

    let mut table = Vec::new();
    let mut skipped = Vec::new();
    let mut max_rel_err: f64 = 0.0;
    let mut saturation_max: Option<f64> = None;
    for (k, (d, r)) in detunings.iter().zip(&rows).enumerate() {
        match r {
            Ok((f, o, sat)) => {
                let err = relative_error(*f, *o, reference);
                max_rel_err = max_rel_err.max(err);
                let mut row = vec![num(*d), num(*f), num(*o), num(err)];
                if let Some(sv) = sat {
                    let serr = relative_error(*f, *sv, reference);
                    saturation_max = Some(saturation_max.unwrap_or(0.0).max(serr));
                    row.push(num(*sv));
                    row.push(num(serr));
                }
                table.push(row);
            }
            Err(e) => skipped.push(format!("{k} {} {e}", num(*d))),
        }
    }
    let mut columns = vec!["detuning_meV", "im_chi_formula", "im_chi_oracle", "rel_err"];
    if saturation.is_some() {
        columns.extend(["im_chi_saturated", "saturated_rel_err"]);
    }
    out.csv("oracle.csv", &columns, &table)?;
    if !skipped.is_empty() {
        out.log("oracle.skipped.log", "index detuning_meV reason", &skipped)?;
    }
    Ok(OracleSummary {
        compared: table.len(),
        skipped: skipped.len(),
        max_rel_err,
        tolerance: cfg.tolerance,
        saturation_max_rel_err: saturation_max,
    })
}
