//! From a layered structure to the four-level model: level roles, tunnel
//! coupling, dipoles, dephasing budget and effective parameters.
//!
//! Roles are fixed by configuration. Well A holds the ground state |b⟩ and
//! the excited state |a⟩, well C holds |d⟩ and |c⟩. The uncoupled states
//! are solved on the same cells as the full structure with the other well
//! (and, on an open side, the lowered region) raised to the flood alloy.

use serde::{Deserialize, Serialize};

use crate::couplings::{
    dipole, fano_from_widths, flood_layers, radiative_rate, tunnel_coupling, FanoFactor, IsolatedState,
    TunnelCoupling,
};
use crate::dark_resonance::{effective_params, FieldSettings, FourLevelParams, ProbeStrength, StructureOutputs};
use crate::dephasing::{
    acoustic_weight, assemble_budget, polar_optical_weight, BudgetInputs, DephasingBudget, PhononParameters,
    WeightOptions,
};
use crate::eigensolver::{
    solve_bound, solve_resonances, BoundOptions, BoundState, EnergyWindow, Resonance, ResonanceOptions,
};
use crate::error::{Error, Result};
use crate::heterostructure::{
    build_grid_with, default_cladding, Boundary, GridOptions, MaterialModel, PotentialGrid,
    StructureSpec, DEFAULT_DZ,
};
use crate::quadrature::trapz_product;
use crate::units::ghz_to_mev;

/// Gap kept between a solver window and the potentials bounding it, meV.
const EDGE_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoleConfig {
    /// Layer indices of the two wells.
    pub well_a: usize,
    pub well_c: usize,
    /// Level index, counted from the bottom of the isolated well, of each role.
    pub b_level: usize,
    pub a_level: usize,
    pub d_level: usize,
    pub c_level: usize,
    /// Alloy used to remove a well; defaults to the highest alloy in the stack.
    pub flood_alloy: Option<f64>,
    /// Minimum squared overlap between an uncoupled state and its match in
    /// the full structure.
    pub min_overlap: f64,
}

impl Default for RoleConfig {
    fn default() -> Self {
        Self {
            well_a: 1,
            well_c: 3,
            b_level: 0,
            a_level: 1,
            d_level: 0,
            c_level: 1,
            flood_alloy: None,
            min_overlap: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// nm
    pub dz: f64,
    /// Closed-side cladding, nm; derived from the decay length when absent.
    pub cladding_nm: Option<f64>,
    pub bound_tolerance: f64,
    /// Largest resonance width accepted, meV.
    pub max_resonance_width: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dz: DEFAULT_DZ,
            cladding_nm: None,
            bound_tolerance: 1e-6,
            max_resonance_width: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub probe: ProbeStrength,
    /// IR power, W, spread over `beam_area_um2`.
    pub ir_power_w: f64,
    pub beam_area_um2: f64,
    /// meV
    pub ir_detuning: f64,
    pub ir_linewidth_ghz: f64,
    pub refractive_index: f64,
    pub density_cm3: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            probe: ProbeStrength::FractionOfOmega(0.01),
            ir_power_w: 2.5e-3,
            beam_area_um2: 100.0,
            ir_detuning: 0.0,
            ir_linewidth_ghz: 10.0,
            refractive_index: 3.3,
            density_cm3: 1e17,
        }
    }
}

impl FieldConfig {
    /// W/m²
    pub fn ir_intensity(&self) -> f64 {
        self.ir_power_w / (self.beam_area_um2 * 1e-12)
    }

    pub fn validate(&self) -> Result<()> {
        let probe_ok = match self.probe {
            ProbeStrength::FractionOfOmega(r) => r >= 0.0 && r.is_finite(),
            ProbeStrength::Intensity(i) => i >= 0.0 && i.is_finite(),
        };
        if !probe_ok
            || !(self.ir_power_w >= 0.0)
            || !(self.beam_area_um2 > 0.0)
            || !(self.ir_linewidth_ghz >= 0.0)
            || !(self.refractive_index > 0.0)
            || !(self.density_cm3 > 0.0)
            || !self.ir_detuning.is_finite()
        {
            return Err(Error::Config(format!("invalid field settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DephasingConfig {
    /// Include acoustic and polar-optical phonon dephasing.
    pub phonons: bool,
    pub phonon: PhononParameters,
    /// Interface-roughness dephasing, meV, and its weight on (ab, cb, db).
    pub roughness: f64,
    pub roughness_weights: [f64; 3],
    /// Fano proportionality constant k in k·√(Γ₊Γ₋).
    pub fano_k: f64,
    /// Coherences (ab, cb, db) that receive the Fano term.
    pub fano_routing: [bool; 3],
}

impl Default for DephasingConfig {
    fn default() -> Self {
        Self {
            phonons: true,
            phonon: PhononParameters::default(),
            roughness: 1.0,
            roughness_weights: [1.0; 3],
            fano_k: 1.0,
            fano_routing: [true, false, true],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub roles: RoleConfig,
    pub solver: SolverConfig,
    pub fields: FieldConfig,
    pub dephasing: DephasingConfig,
}

/// An uncoupled well state on the shared cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleState {
    pub energy: f64,
    pub envelope: Vec<f64>,
}

/// Phonon weights and rates of one pair of levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhononPair {
    /// nm⁻¹
    pub acoustic_weight: f64,
    /// nm
    pub polar_optical_weight: f64,
    /// meV
    pub acoustic: f64,
    pub polar_optical: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub grid: PotentialGrid,
    pub bound: Vec<BoundState>,
    pub resonances: Vec<Resonance>,
    /// Uncoupled states in the order (a, b, c, d).
    pub roles: [RoleState; 4],
    /// Indices of b and d among `bound`.
    pub b_index: usize,
    pub d_index: usize,
    /// Energies and widths of the tunnel doublet (lower, upper), meV.
    pub doublet: [(f64, f64); 2],
    pub tunnel: TunnelCoupling,
    /// ⟨a|z|b⟩ and ⟨c|z|d⟩, nm.
    pub probe_dipole_nm: f64,
    pub ir_dipole_nm: f64,
    /// ħA of a→b and of c→d, meV.
    pub gamma_a_to_b: f64,
    pub gamma_ir_rad: f64,
    /// Phonon pairs (a, b), (c, b), (d, b); zero when phonons are off.
    pub phonons: [PhononPair; 3],
    pub fano: FanoFactor,
    pub budget: DephasingBudget,
    pub params: FourLevelParams,
}

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
const D: usize = 3;

fn check_roles(spec: &StructureSpec, roles: &RoleConfig) -> Result<()> {
    let n = spec.layers.len();
    for (name, i) in [("well_a", roles.well_a), ("well_c", roles.well_c)] {
        if i == 0 || i + 1 >= n {
            return Err(Error::Config(format!(
                "role {name} must name an inner layer (1..{}), got {i}",
                n - 2
            )));
        }
    }
    if roles.well_a == roles.well_c {
        return Err(Error::Config("well_a and well_c must be different layers".into()));
    }
    if roles.b_level >= roles.a_level || roles.d_level >= roles.c_level {
        return Err(Error::Config("b must lie below a and d below c".into()));
    }
    if !(roles.min_overlap > 0.0 && roles.min_overlap <= 1.0) {
        return Err(Error::Config("min_overlap must lie in (0, 1]".into()));
    }
    Ok(())
}

/// The structure with `wells` and any open outer layer raised to `alloy`.
fn isolated_spec(spec: &StructureSpec, wells: &[usize], alloy: f64) -> Result<StructureSpec> {
    let mut layers = wells.to_vec();
    let last = spec.layers.len() - 1;
    if spec.left_boundary == Boundary::Open {
        layers.push(0);
    }
    if spec.right_boundary == Boundary::Open {
        layers.push(last);
    }
    flood_layers(spec, &layers, alloy)
}

fn below_edges(grid: &PotentialGrid) -> f64 {
    grid.potential[0].min(grid.potential[grid.len() - 1]) - EDGE_MARGIN
}

fn solve_isolated(
    grid: &PotentialGrid,
    options: &BoundOptions,
    levels: [usize; 2],
    well: &str,
) -> Result<[RoleState; 2]> {
    let states = solve_bound(grid, EnergyWindow::new(grid.min_potential(), below_edges(grid)), options)?;
    let pick = |level: usize| -> Result<RoleState> {
        states
            .get(level)
            .map(|s| RoleState {
                energy: s.energy,
                envelope: s.envelope.clone(),
            })
            .ok_or_else(|| {
                Error::Config(format!(
                    "isolated well {well} has {} bound levels; level {level} is missing",
                    states.len()
                ))
            })
    };
    Ok([pick(levels[0])?, pick(levels[1])?])
}

fn projection(x: &[f64], y: &[f64], dz: f64) -> f64 {
    trapz_product(x.len(), dz, |k| x[k] * y[k])
}

/// Solves the structure and maps it onto the four-level model.
pub fn analyze(spec: &StructureSpec, model: &MaterialModel, config: &PipelineConfig) -> Result<Analysis> {
    let roles = &config.roles;
    check_roles(spec, roles)?;
    config.fields.validate()?;
    if config.dephasing.phonons {
        config.dephasing.phonon.validate()?;
    }
    let flood = roles.flood_alloy.unwrap_or_else(|| {
        spec.layers.iter().map(|l| l.alloy_fraction).fold(0.0, f64::max)
    });
    let spec_a = isolated_spec(spec, &[roles.well_c], flood)?;
    let spec_c = isolated_spec(spec, &[roles.well_a], flood)?;

    let cladding = match config.solver.cladding_nm {
        Some(c) => c,
        None => [spec, &spec_a, &spec_c]
            .iter()
            .map(|s| default_cladding(s, model))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max),
    };
    let grid_options = GridOptions {
        dz: config.solver.dz,
        cladding_nm: Some(cladding),
    };
    let grid = build_grid_with(spec, model, &grid_options)?;
    let grid_a = build_grid_with(&spec_a, model, &grid_options)?;
    let grid_c = build_grid_with(&spec_c, model, &grid_options)?;
    let bound_options = BoundOptions {
        tolerance: config.solver.bound_tolerance,
        ..Default::default()
    };

    let [b_iso, a_iso] = solve_isolated(&grid_a, &bound_options, [roles.b_level, roles.a_level], "A")?;
    let [d_iso, c_iso] = solve_isolated(&grid_c, &bound_options, [roles.d_level, roles.c_level], "C")?;

    let bound = solve_bound(
        &grid,
        EnergyWindow::new(grid.min_potential(), below_edges(&grid)),
        &bound_options,
    )?;
    let open = spec.left_boundary == Boundary::Open || spec.right_boundary == Boundary::Open;
    let resonances = if open {
        let floor = grid.potential[0].min(grid.potential[grid.len() - 1]);
        let top = grid.max_potential();
        solve_resonances(
            &grid,
            EnergyWindow::new(floor + EDGE_MARGIN, top - EDGE_MARGIN),
            &ResonanceOptions {
                max_width: config.solver.max_resonance_width,
                ..Default::default()
            },
        )?
    } else {
        Vec::new()
    };

    let dz = grid.dz;
    let best_match = |target: &RoleState, name: &str| -> Result<usize> {
        let (idx, w) = bound
            .iter()
            .enumerate()
            .map(|(i, s)| (i, projection(&s.envelope, &target.envelope, dz).powi(2)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .ok_or_else(|| Error::Config(format!("full structure has no bound state for role {name}")))?;
        if w < roles.min_overlap {
            return Err(Error::Config(format!(
                "role {name} is not identifiable in the full structure (best overlap² {w:.3})"
            )));
        }
        Ok(idx)
    };
    let b_index = best_match(&b_iso, "b")?;
    let d_index = best_match(&d_iso, "d")?;
    if b_index == d_index {
        return Err(Error::Config("roles b and d match the same full-structure state".into()));
    }

    let n = config.fields.refractive_index;
    let weight = |env: &[f64]| {
        projection(env, &a_iso.envelope, dz).powi(2) + projection(env, &c_iso.envelope, dz).powi(2)
    };
    let doublet = if open {
        // Resonance envelopes are normalized over the interior only, so rank
        // them by energy distance to the uncoupled pair instead.
        let centre = 0.5 * (a_iso.energy + c_iso.energy);
        let mut ranked: Vec<&Resonance> = resonances.iter().collect();
        ranked.sort_by(|x, y| (x.energy - centre).abs().total_cmp(&(y.energy - centre).abs()));
        if ranked.len() < 2 {
            return Err(Error::Config(format!(
                "open structure shows {} resonances; the a/c doublet needs two",
                ranked.len()
            )));
        }
        let mut pair = [ranked[0], ranked[1]];
        pair.sort_by(|x, y| x.energy.total_cmp(&y.energy));
        [(pair[0].energy, pair[0].width), (pair[1].energy, pair[1].width)]
    } else {
        let mut candidates: Vec<(usize, f64)> = bound
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != b_index && *i != d_index)
            .map(|(i, s)| (i, weight(&s.envelope)))
            .collect();
        candidates.sort_by(|x, y| y.1.total_cmp(&x.1));
        if candidates.len() < 2 {
            return Err(Error::Config(
                "closed structure has no bound a/c doublet below the barrier top".into(),
            ));
        }
        let mut idx = [candidates[0].0, candidates[1].0];
        idx.sort_unstable();
        // Without a continuum the doublet only decays radiatively, to b and d.
        let width = |i: usize| -> Result<f64> {
            let s = &bound[i];
            let mut w = 0.0;
            for lower in [b_index, d_index] {
                let t = &bound[lower];
                if t.energy < s.energy {
                    w += radiative_rate(dipole(&s.envelope, &t.envelope, &grid)?, s.energy - t.energy, n);
                }
            }
            Ok(w)
        };
        [
            (bound[idx[0]].energy, width(idx[0])?),
            (bound[idx[1]].energy, width(idx[1])?),
        ]
    };

    let tunnel = tunnel_coupling(
        &grid,
        IsolatedState {
            grid: &grid_a,
            energy: a_iso.energy,
            envelope: &a_iso.envelope,
        },
        IsolatedState {
            grid: &grid_c,
            energy: c_iso.energy,
            envelope: &c_iso.envelope,
        },
        Some((doublet[0].0, doublet[1].0)),
    )?;

    let probe_dipole_nm = dipole(&b_iso.envelope, &a_iso.envelope, &grid_a)?;
    let ir_dipole_nm = dipole(&d_iso.envelope, &c_iso.envelope, &grid_c)?;
    let probe_transition = a_iso.energy - b_iso.energy;
    let ir_transition = c_iso.energy - d_iso.energy;
    let gamma_a_to_b = radiative_rate(probe_dipole_nm, probe_transition, n);
    let gamma_ir_rad = radiative_rate(ir_dipole_nm, ir_transition, n);

    // Population decay of a, c and d to every lower role, through the
    // uncoupled envelopes; a coherence with b decays at half of it.
    let role_states = [a_iso, b_iso, c_iso, d_iso];
    let decay = |x: usize| -> Result<f64> {
        let mut total = 0.0;
        for y in [A, B, C, D] {
            let (ex, ey) = (role_states[x].energy, role_states[y].energy);
            if ey < ex {
                let d = dipole(&role_states[x].envelope, &role_states[y].envelope, &grid)?;
                total += radiative_rate(d, ex - ey, n);
            }
        }
        Ok(total)
    };
    let radiative = [0.5 * decay(A)?, 0.5 * decay(C)?, 0.5 * decay(D)?];

    let zero_pair = PhononPair {
        acoustic_weight: 0.0,
        polar_optical_weight: 0.0,
        acoustic: 0.0,
        polar_optical: 0.0,
    };
    let mut phonons = [zero_pair; 3];
    if config.dephasing.phonons {
        let p = &config.dephasing.phonon;
        let opts = WeightOptions::default();
        for (k, x) in [A, C, D].into_iter().enumerate() {
            let (i, f) = (&role_states[x].envelope, &role_states[B].envelope);
            let aw = acoustic_weight(i, f, &grid, &opts)?.value;
            let pw = polar_optical_weight(i, f, &grid, p.in_plane_q(), &opts)?.value;
            phonons[k] = PhononPair {
                acoustic_weight: aw,
                polar_optical_weight: pw,
                acoustic: p.acoustic_rate(aw),
                polar_optical: p.polar_optical_rate(pw),
            };
        }
    }

    let fano = fano_from_widths(doublet[0].1, doublet[1].1, config.dephasing.fano_k)?;
    let laser_linewidth = ghz_to_mev(config.fields.ir_linewidth_ghz);
    let budget = assemble_budget(&BudgetInputs {
        radiative,
        acoustic: phonons.map(|p| p.acoustic),
        polar_optical: phonons.map(|p| p.polar_optical),
        escape: [0.0; 3],
        roughness: config.dephasing.roughness,
        roughness_weights: config.dephasing.roughness_weights,
        laser_linewidth,
        fano: fano.value,
        fano_routing: config.dephasing.fano_routing,
    })?;

    let outputs = StructureOutputs {
        tunnel,
        probe_transition,
        ir_transition,
        probe_dipole_nm,
        ir_dipole_nm,
        budget,
        gamma_a_to_b,
    };
    let fields = FieldSettings {
        probe: config.fields.probe,
        ir_intensity: config.fields.ir_intensity(),
        ir_detuning: config.fields.ir_detuning,
        ir_linewidth: laser_linewidth,
        refractive_index: n,
        density_cm3: config.fields.density_cm3,
    };
    let params = effective_params(&outputs, &fields)?;

    Ok(Analysis {
        grid,
        bound,
        resonances,
        roles: role_states,
        b_index,
        d_index,
        doublet,
        tunnel,
        probe_dipole_nm,
        ir_dipole_nm,
        gamma_a_to_b,
        gamma_ir_rad,
        phonons,
        fano,
        budget,
        params,
    })
}
