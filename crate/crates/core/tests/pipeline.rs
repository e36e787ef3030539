use mb_darboux::broadening::BroadeningModel;
use mb_darboux::closedforms::{reconcile, ClosedForm, TwoSolitonParams};
use mb_darboux::darboux::{evaluate_chain, DressingChain, DressingStep};
use mb_darboux::model::{conservation_report, residual_mb, residual_zcr, DetuningModel, FdOrder, Grid2D, ResidualOptions};
use mb_darboux::seeds::{SeedBackground, SeedKind, WaveConstants};
use mb_darboux::{Error, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn broadened() -> DetuningModel {
    DetuningModel::new(0.1, BroadeningModel::Gaussian { center: 0.0, width: 0.5, n_nodes: 7 }).unwrap()
}

#[test]
fn two_step_chain_on_mixed_populations_solves_the_system() {
    let det = broadened();
    let seed = SeedBackground::new(SeedKind::Populations { n_am: 0.2, n_ap: 0.3, n_b: 0.5 }, det);
    let steps = vec![
        DressingStep::new(c(0.5, 0.3), WaveConstants::new(c(1.0, 0.0), c(0.4, 0.2), c(0.7, -0.1))),
        DressingStep::new(c(0.8, -0.4), WaveConstants::new(c(0.3, 0.5), c(1.0, 0.0), c(0.6, 0.6))),
    ];
    let chain = DressingChain::new(seed, steps);
    let grid = Grid2D::new((-4.0, 4.0, 17), (-3.0, 3.0, 13));
    let state = evaluate_chain(&chain, &grid).unwrap();
    let opts = ResidualOptions::new(1e-3, FdOrder::Fourth);

    assert!(residual_mb(&state, &grid, &opts).unwrap().max() <= 1e-8);
    assert!(residual_zcr(&state, &grid, &opts).unwrap().max() <= 1e-8);
    assert!(conservation_report(&state, &grid).unwrap().max_drift() <= 1e-9);
}

#[test]
fn one_soliton_peak_is_twice_the_real_part() {
    let det = DetuningModel::new(0.0, BroadeningModel::SharpLine { eta0: 0.0 }).unwrap();
    let chain = DressingChain::new(SeedBackground::zero(det), vec![DressingStep::new(c(0.5, 0.0), WaveConstants::real(1.0, 0.0, 1.0))]);
    let state = evaluate_chain(&chain, &Grid2D::new((-1.0, 1.0, 3), (0.0, 0.0, 1))).unwrap();
    let (em, ep) = state.fields(0.0, 0.0).unwrap();
    assert!((em.norm().hypot(ep.norm()) - 1.0).abs() <= 1e-12);
}

#[test]
fn two_soliton_closed_form_matches_the_engine() {
    let p = TwoSolitonParams {
        mu: c(0.5, 0.35),
        a1: c(1.0, 0.0),
        a2: c(0.3, -0.6),
        b1: c(0.4, 0.5),
        b2: c(1.0, 0.2),
        c1: c(0.8, -0.1),
        c2: c(0.5, 0.9),
    };
    let grid = Grid2D::new((-6.0, 6.0, 25), (-4.0, 4.0, 17));
    let det = broadened();
    assert!(reconcile(&ClosedForm::TwoSoliton(p), &det, &grid).unwrap().max_deviation <= 1e-9);
    assert!(reconcile(&ClosedForm::TwoSolitonCompact(p), &det, &grid).unwrap().max_deviation > 1e-2);
}

#[test]
fn repeated_spectral_parameter_is_rejected_with_its_step() {
    let det = DetuningModel::new(0.0, BroadeningModel::SharpLine { eta0: 0.0 }).unwrap();
    let step = DressingStep::new(c(0.5, 0.3), WaveConstants::real(1.0, 1.0, 1.0));
    let chain = DressingChain::new(SeedBackground::zero(det), vec![step, step]);
    match chain.validate() {
        Err(Error::Step { index: 1, source }) => assert!(matches!(*source, Error::RepeatedSpectralParameter { .. })),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn far_field_overflow_is_a_located_singularity() {
    let det = DetuningModel::new(0.0, BroadeningModel::SharpLine { eta0: 0.0 }).unwrap();
    let chain = DressingChain::new(SeedBackground::zero(det), vec![DressingStep::new(c(0.5, 0.3), WaveConstants::real(1.0, 1.0, 1.0))]);
    let state = evaluate_chain(&chain, &Grid2D::new((-1.0, 1.0, 3), (0.0, 0.0, 1))).unwrap();
    let err = state.point(2000.0, 0.0).unwrap_err();
    assert!(err.is_singularity());
    assert!(matches!(err, Error::At { tau, zeta, .. } if tau == 2000.0 && zeta == 0.0));
}
