//! The four-level double-dark-resonance model.
//!
//! Basis order is (a, b, c, d). Couplings and rates are energies in meV, so
//! ħ = 1 inside this module. The probe couples b–a (α), the tunnelling or
//! coupling field a–c (Ω) and the IR field c–d (Ω_IR).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couplings::{rabi_energy, TunnelCoupling};
use crate::dephasing::DephasingBudget;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourLevelParams {
    /// a–c coupling Ω, meV.
    pub omega: f64,
    /// Probe Rabi energy α, meV.
    pub alpha: f64,
    pub omega_ir: f64,
    /// Probe detuning Δ, meV.
    pub delta: f64,
    /// Coupling detuning Δ₀, meV.
    pub delta0: f64,
    pub delta_ir: f64,
    pub gamma_ab: f64,
    pub gamma_cb: f64,
    pub gamma_db: f64,
    /// Absorption scale η, meV.
    pub eta: f64,
    /// Population decay a → b, meV.
    pub gamma_a_to_b: f64,
    /// IR laser linewidth Δν_IR, meV.
    #[serde(default)]
    pub ir_linewidth: f64,
    #[serde(default = "default_lambda_probe")]
    pub lambda_probe_um: f64,
    #[serde(default = "default_lambda_ir")]
    pub lambda_ir_um: f64,
    /// Electron density, cm⁻³.
    #[serde(default)]
    pub density_cm3: Option<f64>,
}

fn default_lambda_probe() -> f64 {
    2.0
}

fn default_lambda_ir() -> f64 {
    10.0
}

impl Default for FourLevelParams {
    fn default() -> Self {
        Self {
            omega: 40.0,
            alpha: 0.4,
            omega_ir: 0.0,
            delta: 0.0,
            delta0: 0.0,
            delta_ir: 0.0,
            gamma_ab: 1.0,
            gamma_cb: 0.0,
            gamma_db: 0.01,
            eta: 1.0,
            gamma_a_to_b: 1.0,
            ir_linewidth: 0.0,
            lambda_probe_um: default_lambda_probe(),
            lambda_ir_um: default_lambda_ir(),
            density_cm3: None,
        }
    }
}

impl FourLevelParams {
    pub fn validate(&self) -> Result<()> {
        let values = [
            ("omega", self.omega),
            ("alpha", self.alpha),
            ("omega_ir", self.omega_ir),
            ("delta", self.delta),
            ("delta0", self.delta0),
            ("delta_ir", self.delta_ir),
            ("gamma_ab", self.gamma_ab),
            ("gamma_cb", self.gamma_cb),
            ("gamma_db", self.gamma_db),
            ("eta", self.eta),
            ("gamma_a_to_b", self.gamma_a_to_b),
            ("ir_linewidth", self.ir_linewidth),
        ];
        for (name, v) in values {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [
            ("gamma_ab", self.gamma_ab),
            ("gamma_cb", self.gamma_cb),
            ("gamma_db", self.gamma_db),
            ("gamma_a_to_b", self.gamma_a_to_b),
            ("ir_linewidth", self.ir_linewidth),
        ] {
            if v < 0.0 {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.omega >= 0.0) {
            return Err(Error::Config(format!("omega must be non-negative, got {}", self.omega)));
        }
        if !(self.lambda_probe_um > 0.0 && self.lambda_ir_um > 0.0) {
            return Err(Error::Config("wavelengths must be positive".into()));
        }
        Ok(())
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        Self { delta, ..*self }
    }
}

/// η = 3γ_{a→b}𝒩λ³/(8π²) with 𝒩 in cm⁻³ and λ in µm; same unit as γ.
pub fn eta_from_primitives(gamma_a_to_b: f64, density_cm3: f64, lambda_um: f64) -> f64 {
    let lambda_cm = lambda_um * 1e-4;
    3.0 * gamma_a_to_b * density_cm3 * lambda_cm.powi(3) / (8.0 * std::f64::consts::PI.powi(2))
}

/// H·ψ for H = Ω|c⟩⟨a| + α|b⟩⟨a| + Ω_IR|c⟩⟨d| + h.c., basis (a, b, c, d).
pub fn hamiltonian_apply(params: &FourLevelParams, state: &[Complex64; 4]) -> [Complex64; 4] {
    let [a, b, c, d] = *state;
    let (om, al, ir) = (params.omega, params.alpha, params.omega_ir);
    [om * c + al * b, al * a, om * a + ir * d, ir * c]
}

/// The state (Ω|b⟩ − α|c⟩)/√(Ω² + α²).
pub fn dark_state(params: &FourLevelParams) -> [Complex64; 4] {
    let norm = params.omega.hypot(params.alpha);
    let zero = Complex64::new(0.0, 0.0);
    [
        zero,
        Complex64::new(params.omega / norm, 0.0),
        Complex64::new(-params.alpha / norm, 0.0),
        zero,
    ]
}

struct Terms {
    numerator: Complex64,
    denominator: Complex64,
    gamma_db: Complex64,
}

fn terms(p: &FourLevelParams, omega_ir_sq: f64) -> Terms {
    let i = Complex64::i();
    let g_ab = p.gamma_ab + i * p.delta;
    let g_cb = p.gamma_cb + i * (p.delta - p.delta0);
    let g_db = p.gamma_db + i * (p.delta - p.delta0 - p.delta_ir);
    let numerator = g_cb * g_db + omega_ir_sq;
    Terms {
        numerator,
        denominator: g_ab * numerator + p.omega * p.omega * g_db,
        gamma_db: g_db,
    }
}

/// χ = iη(Γ_cb Γ_db + Ω_IR²)/(Γ_ab(Γ_cb Γ_db + Ω_IR²) + Ω²Γ_db).
pub fn susceptibility(params: &FourLevelParams) -> Result<Complex64> {
    susceptibility_at(params, params.omega_ir * params.omega_ir)
}

/// χ as a function of Ω_IR², ignoring `params.omega_ir`. Accepts negative
/// arguments so that derivatives at Ω_IR = 0 can be taken symmetrically.
pub fn susceptibility_at(params: &FourLevelParams, omega_ir_sq: f64) -> Result<Complex64> {
    let t = terms(params, omega_ir_sq);
    if t.denominator == Complex64::new(0.0, 0.0) || !t.denominator.is_finite() {
        return Err(Error::Singular(format!(
            "susceptibility denominator vanishes at Δ = {} meV",
            params.delta
        )));
    }
    Ok(Complex64::i() * params.eta * t.numerator / t.denominator)
}

/// ∂χ/∂(Ω_IR²) = iηΩ²Γ_db/D².
pub fn susceptibility_ir_derivative(params: &FourLevelParams) -> Result<Complex64> {
    let t = terms(params, params.omega_ir * params.omega_ir);
    if t.denominator == Complex64::new(0.0, 0.0) || !t.denominator.is_finite() {
        return Err(Error::Singular(format!(
            "susceptibility denominator vanishes at Δ = {} meV",
            params.delta
        )));
    }
    Ok(Complex64::i() * params.eta * params.omega * params.omega * t.gamma_db
        / (t.denominator * t.denominator))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NarrowLine {
    /// Probe detuning of the line centre, meV.
    pub offset: f64,
    /// Half width γ_{a→b}Ω_IR²/Ω² + Δν_IR, meV.
    pub width: f64,
    /// Set when Ω_IR ≥ Ω/5, outside the weak-IR regime of the formula.
    pub strong_ir_warning: bool,
}

/// Position and width of the absorption line revived inside the
/// transparency window. The centre sits at the two-photon resonance
/// Δ = Δ₀ + Δ_IR, which is Δ_IR for a resonant coupling field.
pub fn predict_narrow_line(params: &FourLevelParams) -> Result<NarrowLine> {
    if !(params.omega > 0.0) {
        return Err(Error::Domain("the narrow line needs Ω > 0".into()));
    }
    Ok(NarrowLine {
        offset: params.delta0 + params.delta_ir,
        width: params.gamma_a_to_b * params.omega_ir.powi(2) / params.omega.powi(2)
            + params.ir_linewidth,
        strong_ir_warning: params.omega_ir >= params.omega / 5.0,
    })
}

/// Lorentzian fitted to Im χ around the predicted narrow line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedLine {
    /// meV
    pub center: f64,
    /// Half width at half maximum, meV.
    pub width: f64,
    /// Peak height in units of η/γ_ab.
    pub amplitude: f64,
    pub background: f64,
}

/// Samples ±8 predicted widths around the predicted centre and fits a
/// Lorentzian on a constant background.
pub fn fit_narrow_line(params: &FourLevelParams) -> Result<FittedLine> {
    params.validate()?;
    let guess = predict_narrow_line(params)?;
    if !(guess.width > 0.0) {
        return Err(Error::Domain("a zero-width line cannot be fitted".into()));
    }
    let reference = reference_absorption(params)?;
    let half = 8.0 * guess.width;
    let n = 401;
    let xs: Vec<f64> = (0..n)
        .map(|i| guess.offset - half + 2.0 * half * i as f64 / (n - 1) as f64)
        .collect();
    let ys = xs
        .iter()
        .map(|&d| Ok(susceptibility(&params.with_delta(d))?.im / reference))
        .collect::<Result<Vec<f64>>>()?;
    let edge = 0.5 * (ys[0] + ys[n - 1]);
    let peak = ys[n / 2];
    let fit = crate::fit::levenberg_marquardt(
        &xs,
        &ys,
        &[guess.offset, guess.width, peak - edge, edge],
        crate::fit::lorentzian,
        Default::default(),
    )?;
    Ok(FittedLine {
        center: fit.params[0],
        width: fit.params[1].abs(),
        amplitude: fit.params[2],
        background: fit.params[3],
    })
}

/// Uniform detuning grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetuningGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl DetuningGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 || !(self.stop > self.start) {
            return Err(Error::Config(format!(
                "detuning grid needs stop > start and at least 2 points, got {self:?}"
            )));
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.start + i as f64 * step).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// meV
    pub detuning: Vec<f64>,
    pub chi: Vec<Complex64>,
    /// exp(−OD·Im χ/Im χ_ref) with Im χ_ref = η/γ_ab, the bare two-level peak.
    pub transmission: Vec<f64>,
    /// Grid indices where χ was singular and was interpolated.
    pub interpolated: Vec<usize>,
}

/// Im χ of the bare probe line at its centre, η/γ_ab.
pub fn reference_absorption(params: &FourLevelParams) -> Result<f64> {
    if !(params.gamma_ab > 0.0 && params.eta > 0.0) {
        return Err(Error::Config(
            "transmission normalization needs gamma_ab > 0 and eta > 0".into(),
        ));
    }
    Ok(params.eta / params.gamma_ab)
}

pub fn transmission(chi: Complex64, od: f64, reference: f64) -> f64 {
    (-od * chi.im / reference).exp()
}

pub fn spectrum(params: &FourLevelParams, detuning: &[f64], od: f64) -> Result<Spectrum> {
    params.validate()?;
    if detuning.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("detuning grid must be strictly increasing".into()));
    }
    if !(od >= 0.0) {
        return Err(Error::Config(format!("optical density must be non-negative, got {od}")));
    }
    let reference = reference_absorption(params)?;
    let raw: Vec<Option<Complex64>> = detuning
        .par_iter()
        .map(|&d| susceptibility(&params.with_delta(d)).ok())
        .collect();
    let n = raw.len();
    let mut interpolated = Vec::new();
    let mut chi = Vec::with_capacity(n);
    for k in 0..n {
        match raw[k] {
            Some(c) => chi.push(c),
            None => {
                let left = (0..k).rev().find_map(|j| raw[j].map(|c| (j, c)));
                let right = (k + 1..n).find_map(|j| raw[j].map(|c| (j, c)));
                let value = match (left, right) {
                    (Some((jl, cl)), Some((jr, cr))) => {
                        let t = (detuning[k] - detuning[jl]) / (detuning[jr] - detuning[jl]);
                        cl + (cr - cl) * t
                    }
                    (Some((_, c)), None) | (None, Some((_, c))) => c,
                    (None, None) => {
                        return Err(Error::Singular("susceptibility singular on the whole grid".into()))
                    }
                };
                interpolated.push(k);
                chi.push(value);
            }
        }
    }
    let transmission = chi.iter().map(|c| transmission(*c, od, reference)).collect();
    Ok(Spectrum {
        detuning: detuning.to_vec(),
        chi,
        transmission,
        interpolated,
    })
}

/// Structure-level quantities consumed by [`effective_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureOutputs {
    pub tunnel: TunnelCoupling,
    /// E_a − E_b and E_c − E_d, meV.
    pub probe_transition: f64,
    pub ir_transition: f64,
    /// ⟨a|z|b⟩ and ⟨c|z|d⟩, nm.
    pub probe_dipole_nm: f64,
    pub ir_dipole_nm: f64,
    pub budget: DephasingBudget,
    /// Population decay a → b, meV.
    pub gamma_a_to_b: f64,
}

/// How the probe strength is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStrength {
    /// α as a fraction of Ω.
    FractionOfOmega(f64),
    /// Probe intensity, W/m².
    Intensity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSettings {
    pub probe: ProbeStrength,
    /// W/m²
    pub ir_intensity: f64,
    /// IR photon energy minus E_c + E_d, meV.
    pub ir_detuning: f64,
    pub ir_linewidth: f64,
    pub refractive_index: f64,
    pub density_cm3: f64,
}

pub fn effective_params(s: &StructureOutputs, f: &FieldSettings) -> Result<FourLevelParams> {
    if !(s.probe_transition > 0.0 && s.ir_transition > 0.0) {
        return Err(Error::Config(format!(
            "level roles give non-positive transitions (probe {} meV, IR {} meV)",
            s.probe_transition, s.ir_transition
        )));
    }
    let omega = s.tunnel.effective_rabi();
    if !(omega > 0.0) {
        return Err(Error::Config(format!(
            "doublet gap {} meV does not exceed the bare detuning {} meV; no tunnel coupling",
            s.tunnel.splitting, s.tunnel.detuning
        )));
    }
    let alpha = match f.probe {
        ProbeStrength::FractionOfOmega(r) => r * omega,
        ProbeStrength::Intensity(i) => rabi_energy(s.probe_dipole_nm, i, f.refractive_index),
    };
    let lambda_probe_um = crate::units::wavelength_um(s.probe_transition);
    let lambda_ir_um = crate::units::wavelength_um(s.ir_transition + f.ir_detuning);
    let params = FourLevelParams {
        omega,
        alpha,
        omega_ir: rabi_energy(s.ir_dipole_nm, f.ir_intensity, f.refractive_index),
        delta: 0.0,
        delta0: s.tunnel.detuning,
        delta_ir: f.ir_detuning,
        gamma_ab: s.budget.gamma_ab(),
        gamma_cb: s.budget.gamma_cb(),
        gamma_db: s.budget.gamma_db(),
        eta: eta_from_primitives(s.gamma_a_to_b, f.density_cm3, lambda_probe_um),
        gamma_a_to_b: s.gamma_a_to_b,
        ir_linewidth: f.ir_linewidth,
        lambda_probe_um,
        lambda_ir_um,
        density_cm3: Some(f.density_cm3),
    };
    params.validate()?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hamiltonian_matrix_elements() {
        let p = FourLevelParams {
            omega: 3.0,
            alpha: 0.5,
            omega_ir: 0.2,
            ..Default::default()
        };
        let out = hamiltonian_apply(&p, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert_eq!(out, [c(0.0), c(0.5), c(3.0), c(0.0)]);
        let p0 = FourLevelParams { alpha: 0.0, ..p };
        let out = hamiltonian_apply(&p0, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(out.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn transparency_on_resonance() {
        let p = FourLevelParams::default();
        assert!(susceptibility(&p).unwrap().norm() < 1e-12);
    }

    #[test]
    fn revived_line_height() {
        let p = FourLevelParams {
            omega_ir: 0.5,
            gamma_ab: 1e-2,
            gamma_db: 1e-3,
            ..Default::default()
        };
        let expected = p.eta * p.omega_ir.powi(2)
            / (p.gamma_ab * p.omega_ir.powi(2) + p.omega.powi(2) * p.gamma_db);
        let chi = susceptibility(&p).unwrap();
        assert!((chi.im - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn autler_townes_peaks_near_omega() {
        let p = FourLevelParams {
            gamma_ab: 0.01,
            gamma_cb: 0.001,
            ..Default::default()
        };
        let grid: Vec<f64> = (0..8001).map(|i| i as f64 * 0.01).collect();
        let best = grid
            .iter()
            .copied()
            .max_by(|x, y| {
                let a = susceptibility(&p.with_delta(*x)).unwrap().im;
                let b = susceptibility(&p.with_delta(*y)).unwrap().im;
                a.total_cmp(&b)
            })
            .unwrap();
        assert!((best - p.omega).abs() < 0.05, "{best}");
    }

    #[test]
    fn reduces_to_two_level_lorentzian() {
        let p = FourLevelParams {
            omega: 0.0,
            gamma_ab: 0.7,
            gamma_cb: 0.3,
            gamma_db: 0.2,
            eta: 2.0,
            ..Default::default()
        };
        for d in [-3.0, -0.5, 0.0, 0.1, 2.0] {
            let chi = susceptibility(&p.with_delta(d)).unwrap();
            let two_level = Complex64::i() * p.eta / Complex64::new(p.gamma_ab, d);
            assert!((chi - two_level).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_denominator_is_an_error() {
        let p = FourLevelParams {
            gamma_ab: 0.0,
            gamma_cb: 0.0,
            gamma_db: 0.0,
            omega: 0.0,
            ..Default::default()
        };
        assert!(matches!(susceptibility(&p), Err(Error::Singular(_))));
    }

    #[test]
    fn spectrum_flags_singular_points() {
        let p = FourLevelParams {
            gamma_cb: 0.1,
            gamma_db: 0.1,
            omega_ir: 0.0,
            omega: 0.0,
            gamma_ab: 1.0,
            ..Default::default()
        };
        // With Ω = 0 and γ_ab, γ_cb > 0, nothing is singular.
        let s = spectrum(&p, &[-1.0, 0.0, 1.0], 1.0).unwrap();
        assert!(s.interpolated.is_empty());
        assert!((s.transmission[1] - (-1.0f64).exp()).abs() < 1e-12);
        // Γ_db = 0 and Γ_cb = 0 at Δ = 0 with Ω_IR = 0 gives D = 0 there.
        let q = FourLevelParams { gamma_cb: 0.0, gamma_db: 0.0, omega: 1.0, ..p };
        let chi0 = terms(&q.with_delta(0.0), q.omega_ir * q.omega_ir).denominator;
        assert_eq!(chi0, Complex64::new(0.0, 0.0));
        let s = spectrum(&q, &[-1.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(s.interpolated, vec![1]);
    }

    #[test]
    fn narrow_line_prediction() {
        let p = FourLevelParams {
            omega_ir: 0.0,
            ir_linewidth: 0.04,
            ..Default::default()
        };
        let l = predict_narrow_line(&p).unwrap();
        assert_eq!(l.width, 0.04);
        assert!(!l.strong_ir_warning);
        let strong = predict_narrow_line(&FourLevelParams { omega_ir: 10.0, ..p }).unwrap();
        assert!(strong.strong_ir_warning);
    }

    #[test]
    fn fitted_line_follows_prediction() {
        for ratio in [0.01, 0.03, 0.1] {
            let p = FourLevelParams {
                omega: 40.0,
                omega_ir: ratio * 40.0,
                gamma_ab: 1.0,
                gamma_a_to_b: 1.0,
                gamma_cb: 0.0,
                gamma_db: 0.04,
                ir_linewidth: 0.04,
                ..Default::default()
            };
            let fit = fit_narrow_line(&p).unwrap();
            let pred = predict_narrow_line(&p).unwrap();
            assert!((fit.width - pred.width).abs() < 0.2 * pred.width, "{ratio}: {fit:?} vs {pred:?}");
            assert!((fit.center - pred.offset).abs() < 0.05 * pred.width);
        }
    }

    #[test]
    fn eta_formula() {
        // 3·1·1e16·(1e-4)³/(8π²)
        let eta = eta_from_primitives(1.0, 1e16, 1.0);
        assert!((eta - 3e4 / (8.0 * std::f64::consts::PI.powi(2))).abs() < 1e-9);
    }

    fn arb_params() -> impl Strategy<Value = FourLevelParams> {
        (
            1.0f64..60.0,
            0.0f64..5.0,
            -5.0f64..5.0,
            -5.0f64..5.0,
            0.01f64..5.0,
            0.0f64..2.0,
            0.0f64..2.0,
        )
            .prop_map(|(omega, omega_ir, delta0, delta_ir, gab, gcb, gdb)| FourLevelParams {
                omega,
                omega_ir,
                delta0,
                delta_ir,
                gamma_ab: gab,
                gamma_cb: gcb,
                gamma_db: gdb,
                ..Default::default()
            })
    }

    proptest! {
        #[test]
        fn dark_state_decouples(omega in 0.01f64..100.0, alpha in 0.0f64..100.0) {
            let p = FourLevelParams { omega, alpha, omega_ir: 0.0, ..Default::default() };
            let out = hamiltonian_apply(&p, &dark_state(&p));
            let norm: f64 = out.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(norm < 1e-12);
        }

        #[test]
        fn conjugation_symmetry(p in arb_params(), delta in -50.0f64..50.0) {
            let a = susceptibility(&p.with_delta(delta)).unwrap();
            let flipped = FourLevelParams { delta: -delta, delta0: -p.delta0, delta_ir: -p.delta_ir, ..p };
            let b = susceptibility(&flipped).unwrap();
            prop_assert!((b + a.conj()).norm() < 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn no_gain(p in arb_params(), delta in -80.0f64..80.0) {
            prop_assert!(susceptibility(&p.with_delta(delta)).unwrap().im >= -1e-15);
        }

        #[test]
        fn derivative_matches_finite_difference(p in arb_params(), delta in -10.0f64..10.0) {
            let p = p.with_delta(delta);
            let x = p.omega_ir * p.omega_ir;
            let h = 1e-6 * (1.0 + x);
            let at = |x: f64| susceptibility(&FourLevelParams { omega_ir: x.max(0.0).sqrt(), ..p }).unwrap();
            let fd = if x > h { (at(x + h) - at(x - h)) / (2.0 * h) } else { (at(x + h) - at(x)) / h };
            let exact = susceptibility_ir_derivative(&p).unwrap();
            prop_assert!((fd - exact).norm() < 1e-4 * (exact.norm() + 1e-6));
        }

        #[test]
        fn symmetric_spectrum(gab in 0.1f64..3.0, g in 0.0f64..1.0, omega in 1.0f64..50.0, delta in 0.0f64..60.0) {
            let p = FourLevelParams { omega, gamma_ab: gab, gamma_cb: g, gamma_db: g, ..Default::default() };
            let a = susceptibility(&p.with_delta(delta)).unwrap().im;
            let b = susceptibility(&p.with_delta(-delta)).unwrap().im;
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }
}
