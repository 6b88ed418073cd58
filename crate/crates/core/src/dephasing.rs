//! Phonon form factors and the per-coherence dephasing budget.
//!
//! Both phonon channels depend on the states only through
//! G_if(q) = ⟨f|e^{iqz}|i⟩. The acoustic (deformation potential, equipartition)
//! rate is ∝ ∫|G|²dq and the polar-optical (Fröhlich) rate is
//! ∝ ∫|G|²/(q² + Q²)dq. Prefactors are GaAs literature values and are
//! configurable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heterostructure::PotentialGrid;
use crate::quadrature::{adaptive_gk, trapz_product};
use crate::units::{
    BOLTZMANN_MEV_PER_K, ELECTRON_MASS_KG, ELEMENTARY_CHARGE_C, HBAR_J_S, MEV_TO_J,
    VACUUM_PERMITTIVITY,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononFormFactor {
    /// nm⁻¹
    pub q: f64,
    pub value: Complex64,
}

/// G_if(q) = ∫ψ_f e^{iqz} ψ_i dz by trapezoidal quadrature.
pub fn form_factor(
    envelope_i: &[f64],
    envelope_f: &[f64],
    grid: &PotentialGrid,
    q: f64,
) -> Result<PhononFormFactor> {
    if envelope_i.len() != grid.len() || envelope_f.len() != grid.len() {
        return Err(Error::Contract("envelopes must share the grid".into()));
    }
    let n = grid.len();
    let re = trapz_product(n, grid.dz, |k| envelope_f[k] * envelope_i[k] * (q * grid.z[k]).cos());
    let im = trapz_product(n, grid.dz, |k| envelope_f[k] * envelope_i[k] * (q * grid.z[k]).sin());
    Ok(PhononFormFactor {
        q,
        value: Complex64::new(re, im),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct WeightOptions {
    /// Relative accuracy of the quadrature on [−q_max, q_max].
    pub rel_tol: f64,
    /// Accepted estimate of the truncated tail, relative to the total.
    pub tail_tol: f64,
}

impl Default for WeightOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            tail_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhononWeight {
    pub value: f64,
    /// nm⁻¹
    pub q_max: f64,
    /// Contribution of the last doubling of q_max, relative to the value.
    pub tail_estimate: f64,
    pub evaluations: usize,
}

/// Integrates kernel(q)·|G(q)|² over the real line. |G|² is even for real
/// envelopes, so the half line is doubled. q_max doubles until the last
/// doubling adds less than half the tail tolerance.
fn weight_integral<K: Fn(f64) -> f64>(
    envelope_i: &[f64],
    envelope_f: &[f64],
    grid: &PotentialGrid,
    kernel: K,
    options: &WeightOptions,
) -> Result<PhononWeight> {
    if envelope_i.len() != grid.len() || envelope_f.len() != grid.len() {
        return Err(Error::Contract("envelopes must share the grid".into()));
    }
    // Product support sets the first q scale.
    let product: Vec<f64> = envelope_i.iter().zip(envelope_f).map(|(a, b)| a * b).collect();
    let peak = product.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(PhononWeight {
            value: 0.0,
            q_max: 0.0,
            tail_estimate: 0.0,
            evaluations: 0,
        });
    }
    let lo = product.iter().position(|v| v.abs() > 1e-3 * peak).unwrap_or(0);
    let hi = product.iter().rposition(|v| v.abs() > 1e-3 * peak).unwrap_or(grid.len() - 1);
    let extent = ((hi - lo) as f64 * grid.dz).max(grid.dz);
    let nyquist = std::f64::consts::PI / grid.dz;

    let g2 = |q: f64| -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        let n = product.len();
        for (k, p) in product.iter().enumerate() {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            let (s, c) = (q * grid.z[k]).sin_cos();
            re += w * p * c;
            im += w * p * s;
        }
        (re * re + im * im) * grid.dz * grid.dz
    };
    let f = |q: f64| kernel(q) * g2(q);

    let mut q_max = (4.0 * std::f64::consts::PI / extent).min(nyquist);
    let first = adaptive_gk(&f, 0.0, q_max, options.rel_tol, 4000)?;
    let mut total = first.value;
    let mut evaluations = first.evaluations;
    loop {
        let next = (2.0 * q_max).min(nyquist);
        if next <= q_max {
            return Err(Error::Numerical(format!(
                "phonon weight tail did not converge below the grid Nyquist limit {nyquist:.1} nm⁻¹"
            )));
        }
        let piece = adaptive_gk(&f, q_max, next, options.rel_tol, 4000)?;
        evaluations += piece.evaluations;
        total += piece.value;
        q_max = next;
        let tail = piece.value.abs() / total.abs().max(f64::MIN_POSITIVE);
        if tail < 0.5 * options.tail_tol {
            return Ok(PhononWeight {
                value: 2.0 * total,
                q_max,
                tail_estimate: tail,
                evaluations,
            });
        }
    }
}

/// ∫|G_if(q)|² dq, nm⁻¹.
pub fn acoustic_weight(
    envelope_i: &[f64],
    envelope_f: &[f64],
    grid: &PotentialGrid,
    options: &WeightOptions,
) -> Result<PhononWeight> {
    weight_integral(envelope_i, envelope_f, grid, |_| 1.0, options)
}

/// ∫|G_if(q)|²/(q² + Q²) dq, nm, for in-plane momentum Q in nm⁻¹.
pub fn polar_optical_weight(
    envelope_i: &[f64],
    envelope_f: &[f64],
    grid: &PotentialGrid,
    in_plane_q: f64,
    options: &WeightOptions,
) -> Result<PhononWeight> {
    if !(in_plane_q > 0.0) {
        return Err(Error::Singular(format!(
            "polar-optical weight needs Q > 0, got {in_plane_q}"
        )));
    }
    let q2 = in_plane_q * in_plane_q;
    weight_integral(envelope_i, envelope_f, grid, |q| 1.0 / (q * q + q2), options)
}

/// Material and temperature constants of the two phonon channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhononParameters {
    pub temperature_k: f64,
    pub effective_mass: f64,
    /// Conduction-band deformation potential, eV.
    pub deformation_potential_ev: f64,
    pub density_kg_m3: f64,
    /// Longitudinal sound velocity, m/s.
    pub sound_velocity_m_s: f64,
    /// LO phonon energy, meV.
    pub lo_phonon_mev: f64,
    pub eps_static: f64,
    pub eps_high_frequency: f64,
    /// In-plane momentum, nm⁻¹. `None` uses the thermal value √(2m*k_BT)/ħ.
    pub in_plane_q: Option<f64>,
}

impl Default for PhononParameters {
    fn default() -> Self {
        Self {
            temperature_k: 300.0,
            effective_mass: 0.067,
            deformation_potential_ev: 7.0,
            density_kg_m3: 5317.0,
            sound_velocity_m_s: 5.2e3,
            lo_phonon_mev: 36.0,
            eps_static: 12.9,
            eps_high_frequency: 10.9,
            in_plane_q: None,
        }
    }
}

impl PhononParameters {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("temperature_k", self.temperature_k),
            ("effective_mass", self.effective_mass),
            ("density_kg_m3", self.density_kg_m3),
            ("sound_velocity_m_s", self.sound_velocity_m_s),
            ("lo_phonon_mev", self.lo_phonon_mev),
            ("eps_high_frequency", self.eps_high_frequency),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("phonon parameter {name} must be positive, got {v}")));
            }
        }
        if !(self.eps_static > self.eps_high_frequency) {
            return Err(Error::Config("eps_static must exceed eps_high_frequency".into()));
        }
        if !(self.deformation_potential_ev >= 0.0) {
            return Err(Error::Config("deformation potential must be non-negative".into()));
        }
        if let Some(q) = self.in_plane_q {
            if !(q > 0.0) {
                return Err(Error::Config(format!("in_plane_q must be positive, got {q}")));
            }
        }
        Ok(())
    }

    /// Thermal in-plane momentum √(2m*k_BT)/ħ, nm⁻¹ (≈ 0.213 at 300 K).
    pub fn thermal_q(&self) -> f64 {
        let kt = BOLTZMANN_MEV_PER_K * self.temperature_k * MEV_TO_J;
        (2.0 * self.effective_mass * ELECTRON_MASS_KG * kt).sqrt() / HBAR_J_S * 1e-9
    }

    pub fn in_plane_q(&self) -> f64 {
        self.in_plane_q.unwrap_or_else(|| self.thermal_q())
    }

    /// m*Ξ²k_BT/(ħ²ρv²) in meV·nm; multiplies (1/2π)∫|G|²dq.
    pub fn acoustic_prefactor(&self) -> f64 {
        let m = self.effective_mass * ELECTRON_MASS_KG;
        let xi = self.deformation_potential_ev * ELEMENTARY_CHARGE_C;
        let kt = BOLTZMANN_MEV_PER_K * self.temperature_k * MEV_TO_J;
        let joule_metre = m * xi * xi * kt
            / (HBAR_J_S * HBAR_J_S * self.density_kg_m3 * self.sound_velocity_m_s.powi(2));
        joule_metre / MEV_TO_J * 1e9
    }

    /// LO phonon occupation at the configured temperature.
    pub fn lo_occupation(&self) -> f64 {
        1.0 / ((self.lo_phonon_mev / (BOLTZMANN_MEV_PER_K * self.temperature_k)).exp() - 1.0)
    }

    /// m*e²ω_LO(n+1)/(4πħε₀ε_p) in meV/nm; multiplies ∫|G|²/(q²+Q²)dq.
    pub fn polar_optical_prefactor(&self) -> f64 {
        let m = self.effective_mass * ELECTRON_MASS_KG;
        let e2 = ELEMENTARY_CHARGE_C * ELEMENTARY_CHARGE_C;
        let omega = self.lo_phonon_mev * MEV_TO_J / HBAR_J_S;
        let inv_eps_p = 1.0 / self.eps_high_frequency - 1.0 / self.eps_static;
        let joule_per_metre = m * e2 * omega * (self.lo_occupation() + 1.0) * inv_eps_p
            / (4.0 * std::f64::consts::PI * HBAR_J_S * VACUUM_PERMITTIVITY);
        joule_per_metre / MEV_TO_J * 1e-9
    }

    /// Acoustic dephasing (meV) from an acoustic weight in nm⁻¹.
    pub fn acoustic_rate(&self, weight: f64) -> f64 {
        self.acoustic_prefactor() * weight / (2.0 * std::f64::consts::PI)
    }

    /// Polar-optical dephasing (meV) from a polar-optical weight in nm.
    pub fn polar_optical_rate(&self, weight: f64) -> f64 {
        self.polar_optical_prefactor() * weight
    }
}

/// Index of a probe-side coherence in per-coherence arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coherence {
    Ab = 0,
    Cb = 1,
    Db = 2,
}

/// Contributions to one coherence decay rate, all meV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CoherenceBudget {
    pub radiative: f64,
    pub acoustic: f64,
    pub polar_optical: f64,
    pub roughness: f64,
    pub laser_linewidth: f64,
    /// Tunnelling into the quasi-continuum.
    pub escape: f64,
    pub fano: f64,
}

impl CoherenceBudget {
    pub fn total(&self) -> f64 {
        self.radiative
            + self.acoustic
            + self.polar_optical
            + self.roughness
            + self.laser_linewidth
            + self.escape
            + self.fano
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct DephasingBudget {
    pub ab: CoherenceBudget,
    pub cb: CoherenceBudget,
    pub db: CoherenceBudget,
}

impl DephasingBudget {
    pub fn gamma_ab(&self) -> f64 {
        self.ab.total()
    }

    pub fn gamma_cb(&self) -> f64 {
        self.cb.total()
    }

    pub fn gamma_db(&self) -> f64 {
        self.db.total()
    }
}

/// Everything [`assemble_budget`] needs; arrays are ordered (ab, cb, db).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetInputs {
    pub radiative: [f64; 3],
    pub acoustic: [f64; 3],
    pub polar_optical: [f64; 3],
    pub escape: [f64; 3],
    /// Interface-roughness dephasing, meV, scaled per coherence.
    pub roughness: f64,
    pub roughness_weights: [f64; 3],
    /// IR laser linewidth, meV. Applied to the db coherence only.
    pub laser_linewidth: f64,
    /// Fano term, meV, added where `fano_routing` is set.
    pub fano: f64,
    pub fano_routing: [bool; 3],
}

impl Default for BudgetInputs {
    fn default() -> Self {
        Self {
            radiative: [0.0; 3],
            acoustic: [0.0; 3],
            polar_optical: [0.0; 3],
            escape: [0.0; 3],
            roughness: 0.0,
            roughness_weights: [1.0; 3],
            laser_linewidth: 0.0,
            fano: 0.0,
            fano_routing: [true, false, true],
        }
    }
}

pub fn assemble_budget(inputs: &BudgetInputs) -> Result<DephasingBudget> {
    let arrays = [
        ("radiative", inputs.radiative),
        ("acoustic", inputs.acoustic),
        ("polar_optical", inputs.polar_optical),
        ("escape", inputs.escape),
        ("roughness_weights", inputs.roughness_weights),
    ];
    for (name, values) in arrays {
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Contract(format!("{name} contributions must be non-negative: {values:?}")));
        }
    }
    for (name, v) in [
        ("roughness", inputs.roughness),
        ("laser_linewidth", inputs.laser_linewidth),
        ("fano", inputs.fano),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Contract(format!("{name} must be non-negative, got {v}")));
        }
    }
    let one = |i: usize| CoherenceBudget {
        radiative: inputs.radiative[i],
        acoustic: inputs.acoustic[i],
        polar_optical: inputs.polar_optical[i],
        roughness: inputs.roughness * inputs.roughness_weights[i],
        laser_linewidth: if i == Coherence::Db as usize {
            inputs.laser_linewidth
        } else {
            0.0
        },
        escape: inputs.escape[i],
        fano: if inputs.fano_routing[i] { inputs.fano } else { 0.0 },
    };
    Ok(DephasingBudget {
        ab: one(0),
        cb: one(1),
        db: one(2),
    })
}
