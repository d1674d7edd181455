//! The validation report against correct and deliberately wrong formulas.

use gfra_cli::config::{ToleranceValue, ValidateSection};
use gfra_cli::validate::{validate, Grid, Options};
use gfra_cli::CliError;
use gfra_core::erasure::ErasureModel;
use gfra_core::{evaluate_erasure, ScenarioConfig, ServiceMetrics};

fn small_grid() -> Grid {
    Grid::from_section(&ValidateSection {
        aps: Some(vec![2, 3]),
        eps1: Some(vec![0.1, 0.5]),
        eps2: Some(vec![0.3]),
        load_per_slot: Some(vec![1.0, 2.0]),
        gamma_c: Some(vec![0.5]),
        tolerance: Some(vec![ToleranceValue::Finite(1)]),
        target_std_error: Some(0.003),
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn correct_formulas_pass() {
    let report = validate(&small_grid(), &Options::new(400_000, 1).unwrap(), &|cfg| {
        evaluate_erasure(cfg)
    })
    .unwrap();
    assert_eq!(report.cells.len(), 8 * 4);
    assert!(report.passed(), "{}", report.summary());
}

#[test]
fn corrupted_formula_is_flagged() {
    let corrupted = |cfg: &ScenarioConfig| {
        let mut m = evaluate_erasure(cfg)?;
        m.r_c *= 1.1;
        Ok(m)
    };
    let report = validate(&small_grid(), &Options::new(400_000, 1).unwrap(), &corrupted).unwrap();
    assert!(!report.passed());
    assert!(report.flagged().any(|c| c.metric == 0));
    assert!(report.flagged().all(|c| c.metric == 0), "only R_c was corrupted");
    assert_eq!(CliError::Validation(report.summary()).exit_code(), 4);
}

#[test]
fn shifted_tolerance_index_is_rejected() {
    // the success rate with the interference budget shifted by one packet
    let shifted = |cfg: &ScenarioConfig| -> gfra_core::Result<ServiceMetrics> {
        let mut m = evaluate_erasure(cfg)?;
        let e = cfg.erasure_params()?;
        let loads = cfg.shared_loads();
        let gfra_core::Tolerance::Finite(k) = cfg.tolerance else {
            return Ok(m);
        };
        m.gamma_cbar = ErasureModel::new(cfg.aps, e.eps1, e.eps2)?.psr_ncs_finite_k_shifted(loads, k)?;
        Ok(m)
    };
    let report = validate(&small_grid(), &Options::new(400_000, 1).unwrap(), &shifted).unwrap();
    assert!(!report.passed());
    assert!(report.flagged().all(|c| c.metric == 3));
}

#[test]
fn failing_backend_is_reported_per_cell() {
    let broken = |cfg: &ScenarioConfig| {
        if cfg.aps == 3 {
            Err(gfra_core::Error::Domain("unavailable".into()))
        } else {
            evaluate_erasure(cfg)
        }
    };
    let report = validate(&small_grid(), &Options::new(100_000, 1).unwrap(), &broken).unwrap();
    assert_eq!(report.errors(), 16);
    assert!(!report.passed());
    assert_eq!(report.cells.len(), 32);
}
