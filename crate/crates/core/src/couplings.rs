//! Dipole elements, tunnelling between the two wells, the Fano factor and
//! conversions from field intensity and dipole to meV-scale rates.

use crate::eigensolver::Resonance;
use crate::error::{Error, Result};
use crate::heterostructure::{PotentialGrid, StructureSpec};
use crate::quadrature::trapz_product;
use crate::units::{
    ELEMENTARY_CHARGE_C, HBAR_J_S, MEV_TO_J, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleElement {
    /// e·nm, signed.
    pub value: f64,
    pub bra_index: usize,
    pub ket_index: usize,
}

fn check_lengths(grid: &PotentialGrid, envelopes: &[&[f64]]) -> Result<()> {
    for e in envelopes {
        if e.len() != grid.len() {
            return Err(Error::Contract(format!(
                "envelope has {} samples, grid has {}",
                e.len(),
                grid.len()
            )));
        }
    }
    Ok(())
}

/// ⟨f|z|i⟩ in nm (multiply by e for the dipole), z from the stack centre.
pub fn dipole(envelope_i: &[f64], envelope_f: &[f64], grid: &PotentialGrid) -> Result<f64> {
    check_lengths(grid, &[envelope_i, envelope_f])?;
    Ok(trapz_product(grid.len(), grid.dz, |k| {
        envelope_f[k] * grid.z[k] * envelope_i[k]
    }))
}

/// Dipole element between two indexed states of one grid.
pub fn dipole_element(
    envelopes: &[&[f64]],
    bra_index: usize,
    ket_index: usize,
    grid: &PotentialGrid,
) -> Result<DipoleElement> {
    let get = |i: usize| {
        envelopes
            .get(i)
            .copied()
            .ok_or_else(|| Error::Contract(format!("no state with index {i}")))
    };
    Ok(DipoleElement {
        value: dipole(get(ket_index)?, get(bra_index)?, grid)?,
        bra_index,
        ket_index,
    })
}

/// Replaces the alloy of the listed layers, e.g. to fill one well with the
/// barrier material next to it.
pub fn flood_layers(spec: &StructureSpec, layers: &[usize], alloy_fraction: f64) -> Result<StructureSpec> {
    let mut out = spec.clone();
    for &i in layers {
        let layer = out
            .layers
            .get_mut(i)
            .ok_or_else(|| Error::Config(format!("layer index {i} out of range")))?;
        layer.alloy_fraction = alloy_fraction;
    }
    out.validate()?;
    Ok(out)
}

/// A state of one isolated well, sampled on cells shared with the full grid.
#[derive(Debug, Clone, Copy)]
pub struct IsolatedState<'a> {
    pub grid: &'a PotentialGrid,
    pub energy: f64,
    pub envelope: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TunnelCoupling {
    /// ½(⟨a|V − V_c|c⟩ + ⟨c|V − V_a|a⟩), meV, where V_a and V_c are the
    /// isolated-well potentials.
    pub matrix_element: f64,
    /// Doublet gap, meV. Taken from the full structure when supplied,
    /// otherwise from the two-state model.
    pub splitting: f64,
    /// Gap of the two-state model including overlap and shifts, meV.
    pub model_splitting: f64,
    /// ⟨a|c⟩
    pub overlap: f64,
    /// ⟨a|V − V_a|a⟩ and ⟨c|V − V_c|c⟩, meV.
    pub shift_a: f64,
    pub shift_c: f64,
    /// (E_c + shift_c) − (E_a + shift_a), meV.
    pub detuning: f64,
}

impl TunnelCoupling {
    /// Coupling of the equivalent driven two-level problem, whose gap is
    /// √(detuning² + 4Ω²). Zero when the gap is smaller than the detuning.
    pub fn effective_rabi(&self) -> f64 {
        0.5 * (self.splitting.powi(2) - self.detuning.powi(2)).max(0.0).sqrt()
    }
}

/// Tunnel mixing of two isolated-well states inside the full potential.
pub fn tunnel_coupling(
    full: &PotentialGrid,
    a: IsolatedState<'_>,
    c: IsolatedState<'_>,
    doublet: Option<(f64, f64)>,
) -> Result<TunnelCoupling> {
    for g in [a.grid, c.grid] {
        if !full.same_cells(g) {
            return Err(Error::Contract(
                "isolated-well grids must share the cells of the full grid".into(),
            ));
        }
    }
    check_lengths(full, &[a.envelope, c.envelope])?;
    let n = full.len();
    let dz = full.dz;
    let me = |x: &[f64], y: &[f64], v: &PotentialGrid| {
        trapz_product(n, dz, |k| x[k] * (full.potential[k] - v.potential[k]) * y[k])
    };
    let t_ac = me(a.envelope, c.envelope, c.grid);
    let t_ca = me(c.envelope, a.envelope, a.grid);
    let overlap = trapz_product(n, dz, |k| a.envelope[k] * c.envelope[k]);
    let shift_a = me(a.envelope, a.envelope, a.grid);
    let shift_c = me(c.envelope, c.envelope, c.grid);

    // Generalized 2×2 problem H x = E S x in the non-orthogonal {a, c} basis.
    let haa = a.energy + shift_a;
    let hcc = c.energy + shift_c;
    let hac = 0.5 * (c.energy * overlap + t_ac + a.energy * overlap + t_ca);
    let det_s = 1.0 - overlap * overlap;
    if !(det_s > 1e-12) {
        return Err(Error::Numerical(format!(
            "isolated states are nearly parallel (overlap {overlap})"
        )));
    }
    let b = haa + hcc - 2.0 * hac * overlap;
    let c0 = haa * hcc - hac * hac;
    let disc = (b * b - 4.0 * det_s * c0).max(0.0);
    let model_splitting = disc.sqrt() / det_s;
    let splitting = doublet.map_or(model_splitting, |(e1, e2)| (e1 - e2).abs());
    Ok(TunnelCoupling {
        matrix_element: 0.5 * (t_ac + t_ca),
        splitting,
        model_splitting,
        overlap,
        shift_a,
        shift_c,
        detuning: hcc - haa,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoFactor {
    /// meV
    pub value: f64,
    pub proportionality_constant: f64,
}

/// k·√(Γ₊Γ₋) from the widths of the two doublet resonances.
pub fn fano_from_widths(width_plus: f64, width_minus: f64, k: f64) -> Result<FanoFactor> {
    if !(width_plus > 0.0 && width_minus > 0.0) {
        return Err(Error::Domain(format!(
            "Fano factor needs positive widths, got {width_plus} and {width_minus}"
        )));
    }
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("proportionality constant {k} is negative")));
    }
    Ok(FanoFactor {
        value: k * (width_plus * width_minus).sqrt(),
        proportionality_constant: k,
    })
}

pub fn fano_coupling(res_plus: &Resonance, res_minus: &Resonance, k: f64) -> Result<FanoFactor> {
    fano_from_widths(res_plus.width, res_minus.width, k)
}

/// Peak field (V/m) of a plane wave with intensity `intensity_w_m2` in a
/// medium of refractive index `n`: E = √(2I/(n c ε₀)).
pub fn field_amplitude(intensity_w_m2: f64, n: f64) -> f64 {
    (2.0 * intensity_w_m2 / (n * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY)).sqrt()
}

/// Rabi energy ħΩ = e·d·E in meV for a dipole in nm.
pub fn rabi_energy(dipole_nm: f64, intensity_w_m2: f64, n: f64) -> f64 {
    ELEMENTARY_CHARGE_C * dipole_nm.abs() * 1e-9 * field_amplitude(intensity_w_m2, n) / MEV_TO_J
}

/// Intensity (W/m²) that produces the Rabi energy `rabi_mev` on the dipole.
pub fn intensity_for_rabi(dipole_nm: f64, rabi_mev: f64, n: f64) -> f64 {
    let field = rabi_mev * MEV_TO_J / (ELEMENTARY_CHARGE_C * dipole_nm.abs() * 1e-9);
    0.5 * field * field * n * SPEED_OF_LIGHT * VACUUM_PERMITTIVITY
}

/// Spontaneous emission rate ħA in meV, A = n ω³ e²d² / (3π ε₀ ħ c³).
pub fn radiative_rate(dipole_nm: f64, transition_mev: f64, n: f64) -> f64 {
    let omega = transition_mev.abs() * MEV_TO_J / HBAR_J_S;
    let d = ELEMENTARY_CHARGE_C * dipole_nm * 1e-9;
    let a = n * omega.powi(3) * d * d
        / (3.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * HBAR_J_S * SPEED_OF_LIGHT.powi(3));
    a * HBAR_J_S / MEV_TO_J
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::{solve_bound, BoundOptions, EnergyWindow};
    use crate::heterostructure::{build_grid, build_grid_with, GridOptions, Layer, MaterialModel};
    use proptest::prelude::*;

    fn grid_of(spec: &StructureSpec) -> PotentialGrid {
        build_grid_with(
            spec,
            &MaterialModel::default(),
            &GridOptions {
                dz: 0.01,
                cladding_nm: Some(15.0),
            },
        )
        .unwrap()
    }

    fn ground(grid: &PotentialGrid) -> (f64, Vec<f64>) {
        let s = solve_bound(grid, EnergyWindow::new(0.0, 790.0), &BoundOptions::default()).unwrap();
        (s[0].energy, s[0].envelope.clone())
    }

    fn symmetric(barrier: f64) -> StructureSpec {
        StructureSpec::closed(vec![
            Layer::new(5.0, 0.8),
            Layer::new(5.0, 0.0),
            Layer::new(barrier, 0.4),
            Layer::new(5.0, 0.0),
            Layer::new(5.0, 0.8),
        ])
    }

    fn coupling_for(barrier: f64) -> (TunnelCoupling, f64) {
        let spec = symmetric(barrier);
        let full = grid_of(&spec);
        let ga = grid_of(&flood_layers(&spec, &[3], 0.4).unwrap());
        let gc = grid_of(&flood_layers(&spec, &[1], 0.4).unwrap());
        let (ea, pa) = ground(&ga);
        let (ec, pc) = ground(&gc);
        let states = solve_bound(&full, EnergyWindow::new(0.0, 390.0), &BoundOptions::default()).unwrap();
        let gap = states[1].energy - states[0].energy;
        let t = tunnel_coupling(
            &full,
            IsolatedState { grid: &ga, energy: ea, envelope: &pa },
            IsolatedState { grid: &gc, energy: ec, envelope: &pc },
            None,
        )
        .unwrap();
        (t, gap)
    }

    #[test]
    fn symmetric_doublet_splitting() {
        let (t, gap) = coupling_for(2.0);
        assert!((2.0 * t.matrix_element.abs() - gap).abs() < 0.15 * gap, "{t:?} gap {gap}");
        assert!((t.model_splitting - gap).abs() < 0.05 * gap);
        assert!(t.detuning.abs() < 1e-6);
    }

    #[test]
    fn thick_barrier_decouples() {
        let (thin, _) = coupling_for(2.0);
        let (thick, _) = coupling_for(12.0);
        assert!(thick.matrix_element.abs() < 1e-3 * thin.matrix_element.abs());
    }

    #[test]
    fn infinite_well_dipole() {
        let model = MaterialModel {
            offset_coefficient: 1.0e7,
            effective_mass: 0.067,
        };
        let spec = StructureSpec::closed(vec![
            Layer::new(1.0, 1.0),
            Layer::new(10.0, 0.0),
            Layer::new(1.0, 1.0),
        ]);
        let grid = build_grid(&spec, 0.01, &model).unwrap();
        let s = solve_bound(&grid, EnergyWindow::new(0.0, 600.0), &BoundOptions::default()).unwrap();
        let d = dipole(&s[0].envelope, &s[1].envelope, &grid).unwrap().abs();
        let exact = 16.0 * 10.0 / (9.0 * std::f64::consts::PI.powi(2));
        assert!((d - exact).abs() < 0.01 * exact, "{d} vs {exact}");
        let same = dipole(&s[0].envelope, &s[0].envelope, &grid).unwrap();
        assert!(same.abs() < 1e-8);
        let skip = dipole(&s[0].envelope, &s[2].envelope, &grid).unwrap();
        assert!(skip.abs() < 1e-8);
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let grid = grid_of(&symmetric(2.0));
        assert!(dipole(&[1.0; 3], &[1.0; 3], &grid).is_err());
    }

    #[test]
    fn fano_examples() {
        assert!((fano_from_widths(0.04, 0.04, 1.0).unwrap().value - 0.04).abs() < 1e-15);
        assert!((fano_from_widths(1.0, 4.0, 1.0).unwrap().value - 2.0).abs() < 1e-15);
        assert!(fano_from_widths(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rabi_round_trip() {
        let i = intensity_for_rabi(1.5, 0.3, 3.3);
        assert!((rabi_energy(1.5, i, 3.3) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn radiative_rate_magnitude() {
        // 1 e·nm at 124 meV in GaAs: A ≈ 4e6 s⁻¹.
        let rate = radiative_rate(1.0, 124.0, 3.3) / crate::units::HBAR_MEV_S;
        assert!(rate > 1e6 && rate < 1e7, "{rate}");
    }

    proptest! {
        #[test]
        fn dipole_is_linear_and_symmetric(s in -3.0f64..3.0, shift in -2.0f64..2.0) {
            let grid = PotentialGrid::from_cells(-1.0, 0.1, vec![0.0; 21], vec![0.067; 21]).unwrap();
            let a: Vec<f64> = grid.z.iter().map(|z| (-z * z).exp()).collect();
            let b: Vec<f64> = grid.z.iter().map(|z| z * (-z * z).exp()).collect();
            let scaled: Vec<f64> = a.iter().map(|v| v * s).collect();
            let d = dipole(&a, &b, &grid).unwrap();
            prop_assert!((dipole(&scaled, &b, &grid).unwrap() - s * d).abs() < 1e-12);
            prop_assert!((dipole(&b, &a, &grid).unwrap() - d).abs() < 1e-15);
            // Moving the origin shifts diagonal elements by z₀ times the norm.
            let moved = PotentialGrid::from_cells(-1.0 + shift, 0.1, vec![0.0; 21], vec![0.067; 21]).unwrap();
            let norm = trapz_product(21, 0.1, |k| a[k] * a[k]);
            let diag = dipole(&a, &a, &moved).unwrap() - dipole(&a, &a, &grid).unwrap();
            prop_assert!((diag - shift * norm).abs() < 1e-10);
        }

        #[test]
        fn fano_monotone(g1 in 0.01f64..10.0, g2 in 0.01f64..10.0, dg in 0.0f64..5.0) {
            let base = fano_from_widths(g1, g2, 1.0).unwrap().value;
            prop_assert!(fano_from_widths(g1 + dg, g2, 1.0).unwrap().value >= base);
            prop_assert!(fano_from_widths(g1, g2 + dg, 1.0).unwrap().value >= base);
        }
    }
}
