mod common;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use bosim::analysis::{
    bunching_visibility, l1_coherence, l1_predictability, predictability_tr, report_for_state, two_photon_cr_after_bs2,
    two_photon_cr_after_bs3, visibility, visibility_of, ComplementarityReport, DensityMatrix, PhaseSweep,
};
use bosim::bosonic::{encode_fock, FockState, ModeLayout};
use bosim::experiments::analytic::two_photon_stage;
use bosim::experiments::{build, linspace, presets, BlockerArm, ExperimentConfig, ExperimentKind, PhaseName, Stage};
use bosim::linalg::{c, CMatrix, ONE, ZERO};
use bosim::optics::{beam_splitter_gate, detector, phase_shifter_gate, BeamSplitterSpec, PhaseConvention, Synthesis};
use bosim::simulator::{run_exact, Circuit};
use bosim::Error;
use common::assert_close;
use num_complex::Complex64;
use proptest::prelude::*;

fn labels(d: usize) -> Vec<String> {
    (0..d).map(|k| format!("|{k}⟩")).collect()
}

#[test]
fn visibility_examples() {
    assert_close(visibility_of(&[0.5; 10]).unwrap(), 0.0, 1e-15, "flat");
    assert_close(visibility_of(&[0.0, 0.5, 1.0]).unwrap(), 1.0, 1e-15, "full");
    assert_close(visibility_of(&[0.25, 0.75]).unwrap(), 0.5, 1e-15, "half");
    assert!(matches!(visibility_of(&[0.0; 4]), Err(Error::UndefinedVisibility)));
    assert!(matches!(visibility_of(&[]), Err(Error::UndefinedVisibility)));
}

#[test]
fn predictability_examples() {
    assert_close(predictability_tr(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap(), 0.0, 1e-15, "balanced");
    assert_close(predictability_tr(1.0, 0.0).unwrap(), 1.0, 1e-15, "transmitting");
    assert_close(predictability_tr(0.96f64.sqrt(), 0.04f64.sqrt()).unwrap(), 0.92, 1e-12, "biased");
    assert!(matches!(predictability_tr(0.5, 0.5), Err(Error::Domain(_))));
}

#[test]
fn sweep_validation() {
    let points = linspace(0.0, 1.0, 8);
    assert!(PhaseSweep::new(PhaseName::PhiE, BTreeMap::new(), points.clone(), "D0", vec![0.5; 8]).is_ok());
    assert!(PhaseSweep::new(PhaseName::PhiE, BTreeMap::new(), linspace(0.0, 1.0, 7), "D0", vec![0.5; 7]).is_err());
    assert!(PhaseSweep::new(PhaseName::PhiE, BTreeMap::new(), points.clone(), "D0", vec![0.5; 7]).is_err());
    assert!(PhaseSweep::new(PhaseName::PhiE, BTreeMap::new(), points.clone(), "D0", vec![1.5; 8]).is_err());
    let d0 = PhaseSweep::new(PhaseName::PhiE, BTreeMap::new(), points, "D0", vec![0.5; 8]).unwrap();
    assert!(matches!(bunching_visibility(&d0), Err(Error::Domain(_))));
}

#[test]
fn unruh_sweeps() {
    let grid = linspace(0.0, 2.0 * PI, 65);
    let base = ExperimentConfig::new(ExperimentKind::Unruh);
    let particle = PhaseSweep::run(&base.clone().with_phases(0.0, 0.0), PhaseName::PhiE, grid.clone(), "D0").unwrap();
    assert!(visibility(&particle).unwrap() <= 1e-9);
    assert_eq!(particle.fixed["phi_h"], 0.0);
    assert!(!particle.fixed.contains_key("phi_n"));
    let wave = PhaseSweep::run(&base.with_phases(FRAC_PI_2, 0.0), PhaseName::PhiH, grid, "D0").unwrap();
    assert!(visibility(&wave).unwrap() >= 1.0 - 1e-9);
    assert!(PhaseSweep::run(&ExperimentConfig::new(ExperimentKind::Unruh), PhaseName::PhiE, linspace(0.0, 1.0, 8), "both_D0").is_err());
}

#[test]
fn two_photon_bunching_sweeps() {
    let grid = linspace(0.0, 2.0 * PI, 65);
    let base = presets::load("hom/no-blockers").unwrap();
    let particle = PhaseSweep::run(&base.clone().with_phases(0.0, 0.0), PhaseName::PhiE, grid.clone(), "both_D0").unwrap();
    assert!(bunching_visibility(&particle).unwrap() <= 1e-9);
    let wave = PhaseSweep::run(&base.with_phases(PI, 0.0), PhaseName::PhiH, grid, "both_D0").unwrap();
    assert!(bunching_visibility(&wave).unwrap() >= 1.0 - 1e-9);
}

/// Pr(both photons in mode 0) for |11⟩ through splitter, phase on mode 1, splitter.
fn plain_mzi_bunching(phi: f64) -> f64 {
    let layout = ModeLayout::new(2, 2).unwrap();
    let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let mut circuit = Circuit::new(4).unwrap();
    circuit.unitary(x.clone(), &[1], "X").unwrap();
    circuit.unitary(x, &[3], "X").unwrap();
    let bs = BeamSplitterSpec::balanced();
    circuit.extend(beam_splitter_gate(&bs, (0, 1), &layout, Synthesis::Exact, "BS1").unwrap()).unwrap();
    circuit.push(phase_shifter_gate(1, phi, &layout, PhaseConvention::Occupied, "phi").unwrap()).unwrap();
    circuit.extend(beam_splitter_gate(&bs, (0, 1), &layout, Synthesis::Exact, "BS2").unwrap()).unwrap();
    circuit.push(detector(0, &[3, 2], &layout).unwrap()).unwrap();
    circuit.push(detector(1, &[1, 0], &layout).unwrap()).unwrap();
    let dist = run_exact(&circuit).unwrap();
    let both_in_0 = encode_fock(&FockState::new(vec![2, 0], 2).unwrap(), &layout).unwrap();
    dist.probability(&format!("{both_in_0:04b}"))
}

#[test]
fn plain_mach_zehnder_bunching_visibility_is_one() {
    let grid = linspace(0.0, 2.0 * PI, 65);
    let probs: Vec<f64> = grid.iter().map(|&p| plain_mzi_bunching(p)).collect();
    for (&phi, &p) in grid.iter().zip(&probs) {
        assert_close(p, (1.0 - phi.cos()) / 4.0, 1e-10, "Pr(both in D0)");
    }
    let sweep = PhaseSweep::new(PhaseName::PhiE, BTreeMap::new(), grid, "both_D0", probs).unwrap();
    assert!(bunching_visibility(&sweep).unwrap() >= 1.0 - 1e-9);
}

#[test]
fn density_matrix_validation() {
    let bad_trace = CMatrix::identity(2, 2);
    assert!(DensityMatrix::new(bad_trace, labels(2)).is_err());
    let not_hermitian = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]);
    assert!(DensityMatrix::new(not_hermitian, labels(2)).is_err());
    let negative = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
    assert!(DensityMatrix::new(negative, labels(2)).is_err());
    assert!(DensityMatrix::new(CMatrix::identity(2, 2) * c(0.5, 0.0), labels(3)).is_err());
    let mixed = DensityMatrix::new(CMatrix::identity(2, 2) * c(0.5, 0.0), labels(2)).unwrap();
    assert!(!mixed.is_pure());
    assert_close(mixed.purity(), 0.5, 1e-12, "purity");
}

#[test]
fn l1_examples() {
    let diag = DensityMatrix::new(
        CMatrix::from_diagonal(&bosim::linalg::CVector::from_vec(vec![c(0.2, 0.0), c(0.3, 0.0), c(0.5, 0.0)])),
        labels(3),
    )
    .unwrap();
    assert_close(l1_coherence(&diag), 0.0, 1e-15, "diagonal C");

    let basis = DensityMatrix::pure(&[ONE, ZERO, ZERO], labels(3)).unwrap();
    assert_close(l1_predictability(&basis), 2.0, 1e-15, "basis P");

    let uniform = DensityMatrix::new(CMatrix::identity(2, 2) * c(0.5, 0.0), labels(2)).unwrap();
    assert_close(l1_predictability(&uniform), 0.0, 1e-15, "uniform d=2 P");
    assert_close(l1_coherence(&uniform), 0.0, 1e-15, "uniform d=2 C");
}

fn cr_of(state: &bosim::experiments::AnalyticState, modes: [&str; 2]) -> ComplementarityReport {
    report_for_state(state, &modes, 2).unwrap()
}

#[test]
fn two_photon_reduced_states() {
    // ρ₁ right after BS₁
    let rho1 = cr_of(&two_photon_stage(0.0, 0.0, BlockerArm::Off, Stage::AfterBs1), ["C", "D"]);
    assert_close(rho1.c_l1, 1.0, 1e-12, "C(ρ₁)");
    assert_close(rho1.p_l1, 1.0, 1e-12, "P(ρ₁)");
    assert!(rho1.pure);

    let rho3 = |phi_e: f64| cr_of(&two_photon_stage(phi_e, 0.0, BlockerArm::Off, Stage::AfterBs2), ["G", "H"]);
    let at_pi = rho3(PI);
    assert_close(at_pi.c_l1, 1.0, 1e-12, "C(ρ₃) at π");
    assert_close(at_pi.p_l1, 1.0, 1e-12, "P(ρ₃) at π");
    let at_zero = rho3(0.0);
    assert_close(at_zero.c_l1, 0.0, 1e-12, "C(ρ₃) at 0");
    assert_close(at_zero.p_l1, 2.0, 1e-12, "P(ρ₃) at 0");
    let best = 2.0 * (2.0f64 / 3.0).sqrt().asin();
    assert_close(rho3(best).c_l1, 2.0, 1e-12, "max C(ρ₃)");
    assert_close(two_photon_cr_after_bs2(best).0, 2.0, 1e-12, "closed-form max");
    assert_close(two_photon_cr_after_bs2(PI).0, 1.0, 1e-12, "closed-form at π");
    assert_close(two_photon_cr_after_bs2(0.0).1, 2.0, 1e-12, "closed-form P at 0");
}

#[test]
fn closed_forms_match_direct_computation_on_a_grid() {
    let grid = linspace(0.0, 2.0 * PI, 16);
    for &pe in &grid {
        let (c2, p2) = two_photon_cr_after_bs2(pe);
        let direct = cr_of(&two_photon_stage(pe, 0.0, BlockerArm::Off, Stage::AfterBs2), ["G", "H"]);
        assert_close(c2, direct.c_l1, 1e-9, "C after BS₂");
        assert_close(p2, direct.p_l1, 1e-9, "P after BS₂");
        for &ph in &grid {
            let (c3, p3) = two_photon_cr_after_bs3(pe, ph);
            assert_close(c3 + p3, 2.0, 1e-10, "C + P");
            let direct = cr_of(&two_photon_stage(pe, ph, BlockerArm::Off, Stage::BeforeDetection), ["K", "L"]);
            assert_close(c3, direct.c_l1, 1e-9, "C after BS₃");
            assert_close(p3, direct.p_l1, 1e-9, "P after BS₃");
            assert!(direct.slack.abs() <= 1e-9);
        }
    }
    let (c00, p00) = two_photon_cr_after_bs3(0.0, 0.0);
    assert_close(c00, 1.0, 1e-12, "C at (0,0)");
    assert_close(p00, 1.0, 1e-12, "P at (0,0)");
}

#[test]
fn circuit_states_saturate_the_relation() {
    let config = presets::load("hom/no-blockers").unwrap();
    for (pe, ph) in [(0.3, 0.0), (PI, 1.0), (2.2, 4.4)] {
        for (stage, modes) in [(Stage::AfterBs2, ["G", "H"]), (Stage::BeforeDetection, ["K", "L"])] {
            let exp = build(&config.clone().with_phases(pe, ph), stage).unwrap();
            let leaves = exp.branches().unwrap();
            assert_eq!(leaves.len(), 1);
            let state = exp.decompose(&leaves[0].state).unwrap();
            let report = cr_of(&state, modes);
            assert!(report.slack.abs() <= 1e-9, "slack {}", report.slack);
            let expected = if stage == Stage::AfterBs2 { two_photon_cr_after_bs2(pe).0 } else { two_photon_cr_after_bs3(pe, ph).0 };
            assert_close(report.c_l1, expected, 1e-9, "C from the circuit");
        }
    }
}

#[test]
fn single_photon_reports() {
    let config = presets::load("unruh/no-blockers").unwrap();
    let exp = build(&config, Stage::AfterBs1).unwrap();
    let state = exp.decompose(&exp.branches().unwrap()[0].state).unwrap();
    let report = report_for_state(&state, &["C", "D"], 1).unwrap();
    assert_close(report.c_l1, 1.0, 1e-12, "balanced C");
    assert_close(report.p_l1, 0.0, 1e-12, "balanced P");
    assert!(report_for_state(&state, &["C", "X"], 1).is_err());
}

fn arb_state(d: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d).prop_filter_map("nonzero", |v| {
        let amps: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (n > 1e-3).then(|| amps.into_iter().map(|a| a / n).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn visibility_is_scale_invariant(probs in proptest::collection::vec(0.01f64..0.5, 8..40), scale in 0.1f64..2.0) {
        let scaled: Vec<f64> = probs.iter().map(|p| p * scale).collect();
        prop_assert!((visibility_of(&probs).unwrap() - visibility_of(&scaled).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quantifiers_are_bounded(
        d in 2usize..5,
        weights in proptest::collection::vec(0.01f64..1.0, 1..4),
        seeds in proptest::collection::vec(any::<u64>(), 4),
    ) {
        use rand::{RngExt, SeedableRng};
        let mut states = Vec::new();
        let total: f64 = weights.iter().sum();
        for (k, w) in weights.iter().enumerate() {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seeds[k]);
            let amps: Vec<Complex64> = (0..d).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            states.push((w / total, amps.into_iter().map(|a| a / n).collect::<Vec<_>>()));
        }
        let rho = DensityMatrix::mixture(&states, labels(d)).unwrap();
        let report = ComplementarityReport::of(&rho);
        let top = d as f64 - 1.0;
        prop_assert!(report.c_l1 >= -1e-12 && report.c_l1 <= top + 1e-9);
        prop_assert!(report.p_l1 >= -1e-12 && report.p_l1 <= top + 1e-9);
        prop_assert!(report.slack >= -1e-8);
    }

    #[test]
    fn pure_states_saturate(amps in arb_state(3)) {
        let report = ComplementarityReport::of(&DensityMatrix::pure(&amps, labels(3)).unwrap());
        prop_assert!(report.pure);
        prop_assert!(report.slack.abs() <= 1e-9);
    }

    #[test]
    fn closed_form_sums_to_two(pe in -7.0f64..7.0, ph in -7.0f64..7.0) {
        let (c3, p3) = two_photon_cr_after_bs3(pe, ph);
        prop_assert!((c3 + p3 - 2.0).abs() < 1e-10);
        prop_assert!(c3 >= -1e-9 && c3 <= 2.0 + 1e-9);
        let (c2, p2) = two_photon_cr_after_bs2(pe);
        prop_assert!((c2 + p2 - 2.0).abs() < 1e-12);
    }
}
