use std::path::Path;

use dqw_core::heterostructure::{StructureFile, StructureSpec};
use dqw_core::pipeline::{analyze, Analysis, PipelineConfig};
use dqw_core::Error;

const HC_MEV_UM: f64 = 1239.841984;

fn closed() -> StructureFile {
    StructureFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/double_well_closed.toml"))
        .unwrap()
}

fn run(spec: &StructureSpec, config: &PipelineConfig) -> dqw_core::Result<Analysis> {
    analyze(spec, &closed().material, config)
}

fn ideal() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.dephasing.phonons = false;
    c.dephasing.roughness = 0.0;
    c
}

#[test]
fn closed_reference_structure() {
    let a = run(&closed().spec(), &PipelineConfig::default()).unwrap();
    let p = a.params;
    assert!((p.omega - 40.48).abs() < 0.05, "{}", p.omega);
    assert!((p.delta0 - 2.14).abs() < 0.01, "{}", p.delta0);
    let gap = a.doublet[1].0 - a.doublet[0].0;
    assert!((gap - (4.0 * p.omega * p.omega + p.delta0 * p.delta0).sqrt()).abs() < 1e-9 * gap);
    let [ea, eb, ec, ed] = [0, 1, 2, 3].map(|k| a.roles[k].energy);
    assert!((p.lambda_probe_um - HC_MEV_UM / (ea - eb)).abs() < 1e-9);
    assert!((p.lambda_ir_um - HC_MEV_UM / (ec - ed)).abs() < 1e-9);
    assert!((p.lambda_probe_um - 2.80).abs() < 0.01);
    assert!((p.lambda_ir_um - 10.01).abs() < 0.01);
    let t = a.tunnel;
    assert!((p.delta0 - ((ec + t.shift_c) - (ea + t.shift_a))).abs() < 1e-9);
    assert!(p.gamma_ab > p.gamma_cb && p.gamma_cb > p.gamma_db && p.gamma_db > 0.0);
}

#[test]
fn mirrored_structure_gives_the_same_model() {
    let spec = closed().spec();
    let base = run(&spec, &ideal()).unwrap().params;
    let mut config = ideal();
    let last = spec.layers.len() - 1;
    config.roles.well_a = last - config.roles.well_a;
    config.roles.well_c = last - config.roles.well_c;
    let mirrored = run(&spec.reflected(), &config).unwrap().params;
    for (x, y) in [
        (base.omega, mirrored.omega),
        (base.delta0, mirrored.delta0),
        (base.gamma_ab, mirrored.gamma_ab),
        (base.eta, mirrored.eta),
    ] {
        assert!((x - y).abs() < 1e-6 * x.abs().max(1.0), "{x} vs {y}");
    }
}

#[test]
fn ideal_structure_keeps_only_radiative_and_linewidth_terms() {
    let a = run(&closed().spec(), &ideal()).unwrap();
    for pair in &a.phonons {
        assert_eq!(pair.acoustic + pair.polar_optical, 0.0);
    }
    for b in [&a.budget.ab, &a.budget.cb, &a.budget.db] {
        assert_eq!(b.acoustic + b.polar_optical + b.roughness, 0.0);
    }
    assert!(a.params.gamma_ab < 0.01, "{}", a.params.gamma_ab);
}

#[test]
fn bad_roles_are_config_errors() {
    let spec = closed().spec();
    let edits: [fn(&mut PipelineConfig); 4] = [
        |c| c.roles.well_a = 0,
        |c| c.roles.well_c = c.roles.well_a,
        |c| c.roles.a_level = 0,
        |c| c.roles.c_level = 6,
    ];
    for edit in edits {
        let mut config = ideal();
        edit(&mut config);
        assert!(matches!(run(&spec, &config), Err(Error::Config(_))));
    }
}
