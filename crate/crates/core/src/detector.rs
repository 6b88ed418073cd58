//! Detector figures of merit: signal, efficiency, minimum detectable IR
//! power and the comparison with a bound-to-bound QWIP.

use serde::{Deserialize, Serialize};

use crate::dark_resonance::{reference_absorption, susceptibility_at, susceptibility_ir_derivative, FourLevelParams};
use crate::error::{Error, Result};
use crate::units::{mev_to_rad_per_s, photon_energy_mev, MEV_TO_J};

/// Where and how the transmitted probe is read out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeReadout {
    /// Incident probe intensity, W/cm².
    pub intensity_w_cm2: f64,
    pub optical_density: f64,
    /// Probe detuning Δ at which the transmission is read, meV.
    pub detuning: f64,
}

impl Default for ProbeReadout {
    fn default() -> Self {
        Self {
            intensity_w_cm2: 1.0,
            optical_density: 1.0,
            detuning: 0.0,
        }
    }
}

impl ProbeReadout {
    fn validate(&self) -> Result<()> {
        if !(self.intensity_w_cm2 > 0.0 && self.optical_density >= 0.0 && self.detuning.is_finite()) {
            return Err(Error::Config(format!("invalid probe readout {self:?}")));
        }
        Ok(())
    }
}

/// I_probe·exp(−OD·Im χ/Im χ_ref) as a function of Ω_IR².
pub fn transmitted_intensity(params: &FourLevelParams, omega_ir_sq: f64, readout: &ProbeReadout) -> Result<f64> {
    let p = params.with_delta(readout.detuning);
    let chi = susceptibility_at(&p, omega_ir_sq)?;
    let reference = reference_absorption(params)?;
    Ok(readout.intensity_w_cm2 * (-readout.optical_density * chi.im / reference).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalSlope {
    /// −∂I_total/∂(Ω_IR²) at Ω_IR = 0, W/cm² per meV².
    pub value: f64,
    /// Final finite-difference step in Ω_IR², meV².
    pub step: f64,
    /// Relative truncation estimate of `value`.
    pub truncation: f64,
}

/// Central difference on Ω_IR² around zero, halving the step until two
/// successive estimates agree to 10⁻⁴.
pub fn signal_slope(params: &FourLevelParams, readout: &ProbeReadout) -> Result<SignalSlope> {
    params.validate()?;
    readout.validate()?;
    let f = |x: f64| transmitted_intensity(params, x, readout);
    // The stencil never touches Ω_IR² = 0, so probe it for a singularity.
    f(0.0)?;
    let central = |h: f64| -> Result<f64> { Ok(-(f(h)? - f(-h)?) / (2.0 * h)) };
    let mut h = params.omega.powi(2).max(params.gamma_ab.powi(2)).max(1e-12);
    let mut coarse = central(h)?;
    for _ in 0..80 {
        let fine = central(0.5 * h)?;
        let diff = (fine - coarse).abs();
        if diff <= 1e-4 * fine.abs() || (fine == 0.0 && coarse == 0.0) {
            let truncation = if fine == 0.0 { 0.0 } else { diff / (3.0 * fine.abs()) };
            return Ok(SignalSlope {
                value: fine,
                step: 0.5 * h,
                truncation,
            });
        }
        coarse = fine;
        h *= 0.5;
    }
    Err(Error::Numerical(
        "transmission is not smooth in the IR power at the readout point".into(),
    ))
}

/// Closed-form slope: −I_p·∂T/∂(Ω_IR²) = I_p·T(0)·OD·Im(∂χ/∂Ω_IR²)/Im χ_ref.
pub fn analytic_signal_slope(params: &FourLevelParams, readout: &ProbeReadout) -> Result<f64> {
    params.validate()?;
    readout.validate()?;
    let p = FourLevelParams {
        omega_ir: 0.0,
        ..params.with_delta(readout.detuning)
    };
    let d = susceptibility_ir_derivative(&p)?;
    let intensity = transmitted_intensity(params, 0.0, readout)?;
    Ok(intensity * readout.optical_density * d.im / reference_absorption(params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Signal {
    /// W/cm²
    pub value: f64,
    pub slope: SignalSlope,
}

/// I_signal = −(∂I_total/∂Ω_IR²)|₀·Ω_IR².
pub fn signal_intensity(params: &FourLevelParams, omega_ir: f64, readout: &ProbeReadout) -> Result<Signal> {
    let slope = signal_slope(params, readout)?;
    Ok(Signal {
        value: slope.value * omega_ir * omega_ir,
        slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyInputs {
    pub lambda_ir_um: f64,
    pub lambda_probe_um: f64,
    /// Radiative rates of the IR and probe transitions, meV.
    pub gamma_ir_rad: f64,
    pub gamma_probe_rad: f64,
    pub alpha: f64,
    /// Probe linewidth Γ, meV.
    pub gamma: f64,
    pub gamma_decoh: f64,
    /// Power of λ_IR/λ_probe in the first factor.
    pub wavelength_exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Efficiency {
    /// (λ_IR/λ_probe)^n · γ_IR_rad/γ_probe_rad
    pub radiative_factor: f64,
    /// α²/(Γ·γ_decoh)
    pub coherence_factor: f64,
    pub value: f64,
    pub wavelength_exponent: f64,
}

pub fn efficiency(e: &EfficiencyInputs) -> Result<Efficiency> {
    let positive = [
        e.lambda_ir_um,
        e.lambda_probe_um,
        e.gamma_ir_rad,
        e.gamma_probe_rad,
        e.gamma,
        e.gamma_decoh,
    ];
    if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !e.wavelength_exponent.is_finite() {
        return Err(Error::Config(format!("efficiency inputs must be positive: {e:?}")));
    }
    let radiative_factor =
        (e.lambda_ir_um / e.lambda_probe_um).powf(e.wavelength_exponent) * e.gamma_ir_rad / e.gamma_probe_rad;
    let coherence_factor = e.alpha * e.alpha / (e.gamma * e.gamma_decoh);
    Ok(Efficiency {
        radiative_factor,
        coherence_factor,
        value: radiative_factor * coherence_factor,
        wavelength_exponent: e.wavelength_exponent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityInputs {
    pub lambda_ir_um: f64,
    pub lambda_probe_um: f64,
    /// Γ, meV
    pub gamma: f64,
    pub gamma_probe_rad: f64,
    pub gamma_decoh: f64,
    pub omega: f64,
    /// s
    pub measurement_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinPower {
    /// W
    pub watts: f64,
    /// ħν_IR, J
    pub photon_energy_j: f64,
    /// Γ/√(γ_probe_rad·t_m), 1/s
    pub rate_factor: f64,
    /// γ_decoh/Ω
    pub decoherence_factor: f64,
    /// λ_IR/λ_probe
    pub wavelength_factor: f64,
}

/// P_min = ħν_IR·Γ/√(γ_probe_rad·t_m)·(γ_decoh/Ω)·(λ_IR/λ_probe), with
/// rates converted from meV to rad/s.
pub fn min_power(s: &SensitivityInputs) -> Result<MinPower> {
    let positive = [
        s.lambda_ir_um,
        s.lambda_probe_um,
        s.gamma,
        s.gamma_probe_rad,
        s.omega,
        s.measurement_time_s,
    ];
    if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !(s.gamma_decoh >= 0.0) {
        return Err(Error::Config(format!("sensitivity inputs out of range: {s:?}")));
    }
    let photon_energy_j = photon_energy_mev(s.lambda_ir_um) * MEV_TO_J;
    let rate_factor =
        mev_to_rad_per_s(s.gamma) / (mev_to_rad_per_s(s.gamma_probe_rad) * s.measurement_time_s).sqrt();
    let decoherence_factor = s.gamma_decoh / s.omega;
    let wavelength_factor = s.lambda_ir_um / s.lambda_probe_um;
    Ok(MinPower {
        watts: photon_energy_j * rate_factor * decoherence_factor * wavelength_factor,
        photon_energy_j,
        rate_factor,
        decoherence_factor,
        wavelength_factor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QwipInputs {
    pub gamma_coh: f64,
    pub gamma_qwip: f64,
    pub lambda_probe_um: f64,
    pub lambda_ir_um: f64,
    pub gamma_decoh: f64,
    pub gamma_probe_rad: f64,
    pub omega: f64,
    pub gamma_decoh_qwip: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QwipRatio {
    /// Γ_coh/Γ_QWIP, λ_probe/λ_IR, √(γ_decoh·γ_probe_rad)/Ω, √(γ_decoh/γ_decoh_QWIP)
    pub factors: [f64; 4],
    /// P_coh/P_QWIP
    pub value: f64,
}

pub fn qwip_ratio(q: &QwipInputs) -> Result<QwipRatio> {
    let positive = [q.gamma_qwip, q.lambda_ir_um, q.omega, q.gamma_decoh_qwip];
    let non_negative = [q.gamma_coh, q.lambda_probe_um, q.gamma_decoh, q.gamma_probe_rad];
    if positive.iter().any(|v| !(*v > 0.0 && v.is_finite()))
        || non_negative.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
    {
        return Err(Error::Config(format!("QWIP comparison inputs out of range: {q:?}")));
    }
    let factors = [
        q.gamma_coh / q.gamma_qwip,
        q.lambda_probe_um / q.lambda_ir_um,
        (q.gamma_decoh * q.gamma_probe_rad).sqrt() / q.omega,
        (q.gamma_decoh / q.gamma_decoh_qwip).sqrt(),
    ];
    Ok(QwipRatio {
        factors,
        value: factors.iter().product(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> FourLevelParams {
        FourLevelParams {
            omega: 10.0,
            alpha: 0.1,
            gamma_ab: 1.0,
            gamma_cb: 0.05,
            gamma_db: 0.02,
            ..Default::default()
        }
    }

    fn sensitivity() -> SensitivityInputs {
        SensitivityInputs {
            lambda_ir_um: 10.0,
            lambda_probe_um: 2.0,
            gamma: 1.0,
            gamma_probe_rad: 0.1,
            gamma_decoh: 1.0,
            omega: 40.0,
            measurement_time_s: 1.0,
        }
    }

    #[test]
    fn no_ir_no_signal() {
        let s = signal_intensity(&params(), 0.0, &ProbeReadout::default()).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.slope.value > 0.0);
    }

    #[test]
    fn finite_difference_matches_closed_form() {
        for detuning in [0.0, 0.01, -0.03, 0.5] {
            let readout = ProbeReadout { detuning, ..Default::default() };
            let fd = signal_slope(&params(), &readout).unwrap();
            let exact = analytic_signal_slope(&params(), &readout).unwrap();
            assert!(fd.truncation < 1e-3);
            assert!((fd.value - exact).abs() < 1e-3 * exact.abs(), "{detuning}: {} vs {exact}", fd.value);
        }
    }

    #[test]
    fn reduction_is_linear_in_ir_power() {
        let p = params();
        let readout = ProbeReadout::default();
        let slope = signal_slope(&p, &readout).unwrap().value;
        let i0 = transmitted_intensity(&p, 0.0, &readout).unwrap();
        // One decade of Ω_IR² well below Γ_cb·Γ_db.
        for x in [1e-7, 3e-7, 1e-6] {
            let drop = i0 - transmitted_intensity(&p, x, &readout).unwrap();
            assert!((drop / x - slope).abs() < 0.01 * slope, "{x}: {} vs {slope}", drop / x);
        }
    }

    #[test]
    fn transparent_medium_loses_the_whole_line() {
        let p = FourLevelParams {
            gamma_cb: 0.0,
            gamma_db: 1e-9,
            ..params()
        };
        let readout = ProbeReadout { optical_density: 1.0, ..Default::default() };
        let off = transmitted_intensity(&p, 0.0, &readout).unwrap();
        let on = transmitted_intensity(&p, 1.0, &readout).unwrap();
        assert!((off - readout.intensity_w_cm2).abs() < 1e-6);
        let full = readout.intensity_w_cm2 * (1.0 - (-readout.optical_density).exp());
        assert!((off - on - full).abs() < 1e-6, "{} vs {full}", off - on);
    }

    #[test]
    fn singular_readout_is_an_error() {
        let p = FourLevelParams { gamma_cb: 0.0, gamma_db: 0.0, ..params() };
        assert!(signal_slope(&p, &ProbeReadout::default()).is_err());
    }

    #[test]
    fn min_power_scales_with_measurement_time() {
        let one = min_power(&sensitivity()).unwrap().watts;
        let four = min_power(&SensitivityInputs { measurement_time_s: 4.0, ..sensitivity() }).unwrap().watts;
        assert!((one / four - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_detector_has_no_floor() {
        let p = min_power(&SensitivityInputs { gamma_decoh: 0.0, ..sensitivity() }).unwrap();
        assert_eq!(p.watts, 0.0);
    }

    #[test]
    fn min_power_is_a_power() {
        // Exponents of (kg, m, s) for each factor.
        type Dim = [i32; 3];
        let mul = |a: Dim, b: Dim| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
        let joule: Dim = [1, 2, -2];
        let rate: Dim = [0, 0, -1];
        let time: Dim = [0, 0, 1];
        let dimensionless: Dim = [0, 0, 0];
        // √(rate·time) is dimensionless, so Γ/√(γ t) carries 1/s.
        let sqrt_rate_time = mul(rate, time);
        assert_eq!(sqrt_rate_time, dimensionless);
        let rate_factor = rate;
        let total = mul(mul(joule, rate_factor), mul(dimensionless, dimensionless));
        assert_eq!(total, [1, 2, -3]);

        let p = min_power(&sensitivity()).unwrap();
        let rebuilt = p.photon_energy_j * p.rate_factor * p.decoherence_factor * p.wavelength_factor;
        assert_eq!(rebuilt, p.watts);
        let hbar_omega = 1.054_571_817e-34 * 2.0 * std::f64::consts::PI * 299_792_458.0 / 10e-6;
        assert!((p.photon_energy_j - hbar_omega).abs() < 1e-8 * hbar_omega);
    }

    #[test]
    fn identical_detectors_have_unit_ratio() {
        let q = QwipInputs {
            gamma_coh: 2.0,
            gamma_qwip: 2.0,
            lambda_probe_um: 5.0,
            lambda_ir_um: 5.0,
            gamma_decoh: 4.0,
            gamma_probe_rad: 4.0,
            omega: 4.0,
            gamma_decoh_qwip: 4.0,
        };
        let r = qwip_ratio(&q).unwrap();
        assert_eq!(r.factors, [1.0; 4]);
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn efficiency_in_the_quoted_regime() {
        let e = efficiency(&EfficiencyInputs {
            lambda_ir_um: 10.0,
            lambda_probe_um: 2.0,
            gamma_ir_rad: 0.04,
            gamma_probe_rad: 1.0,
            alpha: 40.0,
            gamma: 10.0,
            gamma_decoh: 1.0,
            wavelength_exponent: 3.0,
        })
        .unwrap();
        assert!((e.radiative_factor - 5.0).abs() < 1e-12);
        assert!(e.coherence_factor > 100.0);
        assert_eq!(e.value, e.radiative_factor * e.coherence_factor);
    }

    proptest! {
        #[test]
        fn decoherence_hurts(g1 in 0.01f64..5.0, g2 in 0.01f64..5.0) {
            prop_assume!((g1 - g2).abs() > 1e-6);
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let e = |g: f64| efficiency(&EfficiencyInputs {
                lambda_ir_um: 10.0, lambda_probe_um: 2.0, gamma_ir_rad: 1.0, gamma_probe_rad: 1.0,
                alpha: 1.0, gamma: 1.0, gamma_decoh: g, wavelength_exponent: 3.0,
            }).unwrap().value;
            let p = |g: f64| min_power(&SensitivityInputs { gamma_decoh: g, ..sensitivity() }).unwrap().watts;
            prop_assert!(e(hi) < e(lo));
            prop_assert!(p(hi) > p(lo));
        }

        #[test]
        fn ratio_is_product_of_factors(a in 0.1f64..10.0, b in 0.1f64..10.0, c in 0.1f64..10.0) {
            let r = qwip_ratio(&QwipInputs {
                gamma_coh: a, gamma_qwip: b, lambda_probe_um: 2.0, lambda_ir_um: 10.0,
                gamma_decoh: c, gamma_probe_rad: 0.1, omega: 40.0, gamma_decoh_qwip: a,
            }).unwrap();
            prop_assert!((r.value - r.factors.iter().product::<f64>()).abs() <= 1e-15 * r.value);
        }
    }
}
