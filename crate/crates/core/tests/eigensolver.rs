mod common;

use common::oracles;
use dqw_core::eigensolver::{
    count_nodes, parity, solve_bound, solve_resonances, BoundOptions, EnergyWindow,
    ResonanceOptions, ResonanceQuality,
};
use dqw_core::heterostructure::{
    build_grid, build_grid_with, Boundary, GridOptions, Layer, MaterialModel, PotentialGrid,
    StructureSpec,
};
use dqw_core::quadrature::trapz_product;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn overlap(a: &[f64], b: &[f64], dz: f64) -> f64 {
    trapz_product(a.len(), dz, |i| a[i] * b[i])
}

#[test]
fn constant_matches_codata() {
    assert!((oracles::hbar2_over_2me() - dqw_core::units::HBAR2_OVER_2ME).abs() < 1e-6);
}

#[test]
fn finite_well_matches_transcendental_roots() {
    let model = MaterialModel::default();
    for (width, x) in [(10.0, 0.3), (6.0, 0.8), (3.5, 0.2)] {
        let spec = StructureSpec::closed(vec![
            Layer::new(5.0, x),
            Layer::new(width, 0.0),
            Layer::new(5.0, x),
        ]);
        let grid = build_grid(&spec, 0.01, &model).unwrap();
        let v0 = x * model.offset_coefficient;
        let states = solve_bound(&grid, EnergyWindow::new(0.0, v0 - 1e-3), &BoundOptions::default())
            .unwrap();
        let expected = oracles::finite_well_levels(width, v0, model.effective_mass);
        assert_eq!(states.len(), expected.len(), "L={width} x={x}");
        for (s, e) in states.iter().zip(&expected) {
            assert!((s.energy - e).abs() < 1e-6, "L={width} x={x}: {} vs {e}", s.energy);
        }
    }
}

#[test]
fn deep_well_approaches_infinite_well() {
    let model = MaterialModel {
        offset_coefficient: 1.0e7,
        effective_mass: 0.067,
    };
    let spec = StructureSpec::closed(vec![
        Layer::new(2.0, 1.0),
        Layer::new(10.0, 0.0),
        Layer::new(2.0, 1.0),
    ]);
    let grid = build_grid(&spec, 0.01, &model).unwrap();
    let states = solve_bound(&grid, EnergyWindow::new(0.0, 100.0), &BoundOptions::default()).unwrap();
    let e1 = oracles::infinite_well_level(1, 10.0, 0.067);
    assert!((e1 - 56.1).abs() < 0.05, "oracle E1 = {e1}");
    assert_eq!(states.len(), 1);
    assert!((states[0].energy - e1).abs() < 0.005 * e1, "{} vs {e1}", states[0].energy);
}

fn symmetric_double_well() -> PotentialGrid {
    let spec = StructureSpec::closed(vec![
        Layer::new(6.0, 0.8),
        Layer::new(4.0, 0.0),
        Layer::new(1.5, 0.8),
        Layer::new(4.0, 0.0),
        Layer::new(6.0, 0.8),
    ]);
    build_grid(&spec, 0.01, &MaterialModel::default()).unwrap()
}

#[test]
fn symmetric_double_well_doublet() {
    let grid = symmetric_double_well();
    let states = solve_bound(&grid, EnergyWindow::new(0.0, 799.0), &BoundOptions::default()).unwrap();
    assert!(states.len() >= 2);
    let (plus, minus) = (&states[0], &states[1]);
    assert_eq!(parity(&plus.envelope, 1e-6), 1);
    assert_eq!(parity(&minus.envelope, 1e-6), -1);
    // |±⟩ ∝ |a⟩ ± |c⟩: equal weight in each half.
    let half = grid.len() / 2;
    for s in [plus, minus] {
        let left: f64 = trapz_product(half, grid.dz, |i| s.envelope[i] * s.envelope[i]);
        assert!((left - 0.5).abs() < 1e-3, "left weight {left}");
    }
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((overlap(&a.envelope, &b.envelope, grid.dz) - target).abs() < 1e-6);
        }
    }
}

#[test]
fn second_order_grid_convergence() {
    // Interfaces at 1/3 or 2/3 of a cell for every dz below, so each halving
    // sees the same interface offsets and the error ratio is clean.
    let h0 = 0.08;
    let x = 0.3;
    let spec = StructureSpec::closed(vec![
        Layer::new(4.0, x),
        Layer::new(3.2 + h0 / 3.0, 0.0),
        Layer::new(1.2, x),
        Layer::new(4.0 - h0 / 3.0, 0.05),
        Layer::new(4.0, x),
    ]);
    let model = MaterialModel::default();
    let energies: Vec<Vec<f64>> = [0.08, 0.04, 0.02, 0.01]
        .iter()
        .map(|&dz| {
            let grid = build_grid_with(
                &spec,
                &model,
                &GridOptions {
                    dz,
                    cladding_nm: Some(20.0),
                },
            )
            .unwrap();
            solve_bound(&grid, EnergyWindow::new(0.0, 299.0), &BoundOptions::default())
                .unwrap()
                .iter()
                .map(|s| s.energy)
                .collect()
        })
        .collect();
    for level in 0..energies[0].len() {
        let d: Vec<f64> = energies.windows(2).map(|w| w[1][level] - w[0][level]).collect();
        for pair in d.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((ratio - 4.0).abs() < 0.5, "level {level}: ratio {ratio}");
        }
    }
}

#[test]
fn aligned_interfaces_do_not_depend_on_dz() {
    let spec = StructureSpec::closed(vec![
        Layer::new(4.0, 0.4),
        Layer::new(5.0, 0.0),
        Layer::new(4.0, 0.4),
    ]);
    let model = MaterialModel::default();
    let solve = |dz: f64| {
        let grid = build_grid(&spec, dz, &model).unwrap();
        solve_bound(&grid, EnergyWindow::new(0.0, 399.0), &BoundOptions::default()).unwrap()
    };
    for (a, b) in solve(0.1).iter().zip(solve(0.01).iter()) {
        assert!((a.energy - b.energy).abs() < 1e-6);
    }
}

fn random_symmetric_structure(rng: &mut ChaCha8Rng) -> StructureSpec {
    let half = rng.gen_range(2..=4);
    let mut layers = vec![Layer::new(5.0, 0.8)];
    for i in 0..half {
        let x = if i % 2 == 0 {
            rng.gen_range(0.0..0.2)
        } else {
            rng.gen_range(0.3..0.8)
        };
        let thickness = (rng.gen_range(1.0..5.0) * 10.0_f64).round() / 10.0;
        layers.push(Layer::new(thickness, x));
    }
    let mirror: Vec<Layer> = layers.iter().rev().cloned().collect();
    let centre = Layer::new((rng.gen_range(1.0..4.0) * 10.0_f64).round() / 10.0, rng.gen_range(0.0..0.8));
    layers.push(centre);
    layers.extend(mirror);
    StructureSpec::closed(layers)
}

#[test]
fn node_and_parity_theorems_on_random_structures() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = MaterialModel::default();
    for case in 0..10 {
        let spec = random_symmetric_structure(&mut rng);
        let grid = build_grid(&spec, 0.01, &model).unwrap();
        let states =
            solve_bound(&grid, EnergyWindow::new(0.0, 790.0), &BoundOptions::default()).unwrap();
        assert!(!states.is_empty(), "case {case}");
        for (n, s) in states.iter().enumerate() {
            assert_eq!(s.node_count, n, "case {case}");
            assert_eq!(count_nodes(&s.envelope), n, "case {case}");
            let expected = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(parity(&s.envelope, 1e-6), expected, "case {case} state {n}");
            assert!((overlap(&s.envelope, &s.envelope, grid.dz) - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn reflected_structure_has_same_spectrum() {
    let spec = StructureSpec::closed(vec![
        Layer::new(5.0, 0.8),
        Layer::new(4.2, 0.0),
        Layer::new(1.3, 0.6),
        Layer::new(3.1, 0.1),
        Layer::new(5.0, 0.8),
    ]);
    let model = MaterialModel::default();
    let window = EnergyWindow::new(0.0, 790.0);
    let a = solve_bound(&build_grid(&spec, 0.01, &model).unwrap(), window, &BoundOptions::default()).unwrap();
    let b = solve_bound(&build_grid(&spec.reflected(), 0.01, &model).unwrap(), window, &BoundOptions::default())
        .unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x.energy - y.energy).abs() < 1e-6);
    }
}

fn open_well(barrier_nm: f64) -> PotentialGrid {
    let spec = StructureSpec::new(
        vec![
            Layer::new(5.0, 0.8),
            Layer::new(5.0, 0.0),
            Layer::new(barrier_nm, 0.8),
            Layer::new(10.0, 0.3),
        ],
        Boundary::Closed,
        Boundary::Open,
    );
    build_grid(&spec, 0.01, &MaterialModel::default()).unwrap()
}

#[test]
fn widths_shrink_with_barrier_thickness() {
    let widths: Vec<f64> = [2.0, 3.0, 4.0]
        .iter()
        .map(|&t| {
            let res = solve_resonances(&open_well(t), EnergyWindow::new(301.0, 790.0), &ResonanceOptions::default())
                .unwrap();
            assert_eq!(res.len(), 1, "barrier {t}: {res:?}");
            assert!(res[0].width > 0.0);
            res[0].width
        })
        .collect();
    assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
}

#[test]
fn widths_match_pole_oracle() {
    let cases: [&[(f64, f64)]; 3] = [
        &[(5.0, 0.8), (5.0, 0.0), (2.0, 0.8), (10.0, 0.3)],
        &[(5.0, 0.8), (6.0, 0.0), (2.5, 0.6), (10.0, 0.2)],
        &[(5.0, 0.8), (8.0, 0.05), (2.0, 0.5), (10.0, 0.25)],
    ];
    let model = MaterialModel::default();
    for layers in cases {
        let spec = StructureSpec::new(
            layers.iter().map(|&(t, x)| Layer::new(t, x)).collect(),
            Boundary::Closed,
            Boundary::Open,
        );
        let grid = build_grid(&spec, 0.01, &model).unwrap();
        let floor = *grid.potential.last().unwrap();
        let window = EnergyWindow::new(floor + 1.0, 790.0);
        let found = solve_resonances(&grid, window, &ResonanceOptions::default()).unwrap();
        let regions = oracles::regions_from_cells(&grid.potential, &grid.mass, grid.dz);
        let poles = oracles::pole_scan(&regions, window.lo, window.hi, 0.05);
        assert!(!found.is_empty(), "{layers:?}");
        for r in found.iter().filter(|r| r.quality == ResonanceQuality::Good) {
            let (pe, pw) = poles
                .iter()
                .copied()
                .min_by(|a, b| (a.0 - r.energy).abs().total_cmp(&(b.0 - r.energy).abs()))
                .expect("oracle found no pole");
            assert!((pe - r.energy).abs() < 0.5 * pw.max(r.width), "{} vs {pe}", r.energy);
            assert!((r.width - pw).abs() < 0.1 * pw, "{layers:?}: width {} vs pole {pw}", r.width);
        }
    }
}

#[test]
fn edge_energy_in_window_is_rejected() {
    let grid = symmetric_double_well();
    assert!(solve_bound(&grid, EnergyWindow::new(0.0, 800.0), &BoundOptions::default()).is_err());
}

#[test]
fn empty_window_returns_no_states() {
    let grid = symmetric_double_well();
    let states = solve_bound(&grid, EnergyWindow::new(0.0, 1.0), &BoundOptions::default()).unwrap();
    assert!(states.is_empty());
}
