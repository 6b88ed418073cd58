//! Brute-force steady state of the four-level Lindblad master equation, used
//! to check the closed-form susceptibility.
//!
//! The density matrix is vectorized row-major, ρ_ij ↦ 4i + j. In that
//! convention vec(AρB) = (A ⊗ Bᵀ) vec(ρ).

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dark_resonance::FourLevelParams;
use crate::error::{Error, Result};

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
const D: usize = 3;

/// Where the population of |d⟩ relaxes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DecayTarget {
    #[default]
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterEquationSpec {
    pub params: FourLevelParams,
    /// Population decay of a, c, d, meV. a and c relax to b.
    pub population_decay: [f64; 3],
    /// Pure dephasing of a, c, d, meV (jump operator √p|x⟩⟨x|).
    pub pure_dephasing: [f64; 3],
    pub d_decays_to: DecayTarget,
    /// Constant added to every diagonal element of H; physics must not
    /// depend on it.
    pub energy_offset: f64,
}

impl MasterEquationSpec {
    /// Rates chosen so that each probe-side coherence x–b decays at γ_xb:
    /// population decay A_a = min(γ_{a→b}, 2γ_ab), A_c = γ_cb, A_d = γ_db,
    /// and pure dephasing 2γ_xb − A_x.
    pub fn mirroring(params: &FourLevelParams, d_decays_to: DecayTarget) -> Result<Self> {
        params.validate()?;
        let a_a = params.gamma_a_to_b.min(2.0 * params.gamma_ab);
        let population_decay = [a_a, params.gamma_cb, params.gamma_db];
        let gammas = [params.gamma_ab, params.gamma_cb, params.gamma_db];
        let mut pure_dephasing = [0.0; 3];
        for k in 0..3 {
            pure_dephasing[k] = (2.0 * gammas[k] - population_decay[k]).max(0.0);
        }
        Ok(Self {
            params: *params,
            population_decay,
            pure_dephasing,
            d_decays_to,
            energy_offset: 0.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self
            .population_decay
            .iter()
            .chain(&self.pure_dephasing)
            .any(|r| !(*r >= 0.0 && r.is_finite()))
        {
            return Err(Error::Config("Lindblad rates must be non-negative".into()));
        }
        Ok(())
    }

    /// Rotating-frame Hamiltonian, basis (a, b, c, d).
    pub fn hamiltonian(&self) -> Matrix4<Complex64> {
        let p = &self.params;
        let mut h = Matrix4::<Complex64>::zeros();
        let e0 = self.energy_offset;
        h[(A, A)] = (p.delta + e0).into();
        h[(B, B)] = e0.into();
        h[(C, C)] = (p.delta - p.delta0 + e0).into();
        h[(D, D)] = (p.delta - p.delta0 - p.delta_ir + e0).into();
        for (i, j, v) in [(A, B, p.alpha), (A, C, p.omega), (C, D, p.omega_ir)] {
            h[(i, j)] = v.into();
            h[(j, i)] = v.into();
        }
        h
    }

    fn jump_operators(&self) -> Vec<Matrix4<Complex64>> {
        let mut out = Vec::new();
        let d_target = match self.d_decays_to {
            DecayTarget::B => B,
            DecayTarget::C => C,
        };
        for (k, (&source, &target)) in [A, C, D].iter().zip(&[B, B, d_target]).enumerate() {
            let rate = self.population_decay[k];
            if rate > 0.0 {
                let mut j = Matrix4::<Complex64>::zeros();
                j[(target, source)] = rate.sqrt().into();
                out.push(j);
            }
            let p = self.pure_dephasing[k];
            if p > 0.0 {
                let mut j = Matrix4::<Complex64>::zeros();
                j[(source, source)] = p.sqrt().into();
                out.push(j);
            }
        }
        out
    }

    /// The 16×16 generator 𝓛 with dρ/dt = 𝓛 vec(ρ).
    pub fn generator(&self) -> DMatrix<Complex64> {
        let h = self.hamiltonian();
        let id = Matrix4::<Complex64>::identity();
        let kron = |x: &Matrix4<Complex64>, y: &Matrix4<Complex64>| -> DMatrix<Complex64> {
            DMatrix::from_fn(16, 16, |r, c| x[(r / 4, c / 4)] * y[(r % 4, c % 4)])
        };
        let i = Complex64::i();
        let mut l = (kron(&h, &id) - kron(&id, &h.transpose())) * (-i);
        for j in self.jump_operators() {
            let jdj = j.adjoint() * j;
            l += kron(&j, &j.conjugate());
            l -= kron(&jdj, &id) * Complex64::new(0.5, 0.0);
            l -= kron(&id, &jdj.transpose()) * Complex64::new(0.5, 0.0);
        }
        l
    }
}

/// Relative gap below which a second null vector counts as degenerate.
const NULL_SPACE_TOL: f64 = 1e-12;

/// Unique steady state with unit trace.
pub fn steady_state(spec: &MasterEquationSpec) -> Result<Matrix4<Complex64>> {
    spec.validate()?;
    let l = spec.generator();
    let sv = l.clone().svd(false, false).singular_values;
    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let scale = sorted[sorted.len() - 1].max(f64::MIN_POSITIVE);
    if sorted[1] < NULL_SPACE_TOL * scale {
        return Err(Error::Ambiguous(format!(
            "generator has a degenerate null space (second singular value {:.3e} of {:.3e})",
            sorted[1], scale
        )));
    }
    // Trace preservation makes the ρ_bb row redundant; replace it with Tr ρ = 1.
    let row = 4 * B + B;
    let mut a = l;
    for c in 0..16 {
        a[(row, c)] = if c % 5 == 0 { 1.0.into() } else { 0.0.into() };
    }
    let mut rhs = DVector::<Complex64>::zeros(16);
    rhs[row] = 1.0.into();
    let v = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Ambiguous("steady-state system is singular".into()))?;
    let rho = Matrix4::from_fn(|i, j| v[4 * i + j]);
    check_state(&rho)?;
    Ok(rho)
}

fn check_state(rho: &Matrix4<Complex64>) -> Result<()> {
    let trace = rho.trace();
    if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::Numerical(format!("steady state trace {trace}")));
    }
    let herm = (rho - rho.adjoint()).iter().fold(0.0_f64, |m, v| m.max(v.norm()));
    if herm > 1e-12 {
        return Err(Error::Numerical(format!("steady state not Hermitian ({herm:.3e})")));
    }
    let sym = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eig = sym
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -1e-10 {
        return Err(Error::Numerical(format!(
            "steady state not positive semidefinite (eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Populations {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// 1 − ρ_bb
    pub excitation: f64,
}

pub fn population_check(rho: &Matrix4<Complex64>) -> Result<Populations> {
    let pops = [rho[(A, A)].re, rho[(B, B)].re, rho[(C, C)].re, rho[(D, D)].re];
    let sum: f64 = pops.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::Numerical(format!("populations sum to {sum}")));
    }
    Ok(Populations {
        a: pops[0],
        b: pops[1],
        c: pops[2],
        d: pops[3],
        excitation: 1.0 - pops[1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearResponse {
    /// Richardson-extrapolated −η·ρ_ab/α.
    pub chi: Complex64,
    /// Unextrapolated value at α₀.
    pub chi_at_alpha0: Complex64,
}

/// Linear probe response from steady states at α₀, α₀/2 and α₀/4. ρ_ab/α
/// is even in α, so two Richardson steps remove the O(α²) and O(α⁴)
/// saturation terms.
pub fn linear_response(
    params: &FourLevelParams,
    alpha0: f64,
    d_decays_to: DecayTarget,
) -> Result<LinearResponse> {
    if !(alpha0 > 0.0) {
        return Err(Error::Domain(format!("probe strength must be positive, got {alpha0}")));
    }
    let ratio = |alpha: f64| -> Result<Complex64> {
        let spec = MasterEquationSpec::mirroring(&FourLevelParams { alpha, ..*params }, d_decays_to)?;
        let rho = steady_state(&spec)?;
        Ok(rho[(A, B)] / alpha)
    };
    let full = ratio(alpha0)?;
    let half = ratio(0.5 * alpha0)?;
    let quarter = ratio(0.25 * alpha0)?;
    let extrapolated = (quarter * 64.0 - half * 20.0 + full) / 45.0;
    Ok(LinearResponse {
        chi: -params.eta * extrapolated,
        chi_at_alpha0: -params.eta * full,
    })
}
