mod common;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2};

use bosim::analysis::visibility_of;
use bosim::experiments::analytic::{
    analytic_pessoa, analytic_two_photon, analytic_unruh, compare_with_oracle, oracle, two_photon_stage,
};
use bosim::experiments::{
    build, build_pessoa, build_unruh, linspace, presets, sweep_events, BlockerArm, ExperimentCircuit, ExperimentConfig,
    ExperimentKind, PhaseName, Stage,
};
use bosim::linalg::{c, cis, I, ONE};
use bosim::simulator::run_branches;
use bosim::Error;
use common::assert_close;
use num_complex::Complex64;

fn assert_histogram(actual: &BTreeMap<String, f64>, expected: &[(&str, f64)], tol: f64, what: &str) {
    let keys: Vec<&str> = actual.iter().filter(|(_, &p)| p > 1e-12).map(|(k, _)| k.as_str()).collect();
    let mut want: Vec<&str> = expected.iter().map(|(k, _)| *k).collect();
    want.sort_unstable();
    assert_eq!(keys, want, "{what}: support");
    for (label, p) in expected {
        assert_close(actual[*label], *p, tol, &format!("{what} {label}"));
    }
}

fn full(name: &str) -> (ExperimentCircuit, bosim::simulator::OutcomeDistribution) {
    let exp = build(&presets::load(name).unwrap(), Stage::Full).unwrap();
    let dist = exp.run_exact().unwrap();
    (exp, dist)
}

fn close_c(a: Complex64, b: Complex64, tol: f64, what: &str) {
    assert!((a - b).norm() <= tol, "{what}: {a} vs {b}");
}

/// Removes the global phase that makes the amplitude of `reference` match `target`.
fn align(amp: Complex64, reference: Complex64, target: Complex64) -> Complex64 {
    let phase = target / reference;
    amp * phase / phase.norm()
}

#[test]
fn unruh_histograms() {
    let cases: [(&str, &str, &[(&str, f64)]); 4] = [
        ("unruh/no-blockers", "c3c2", &[("01", 0.5), ("10", 0.5)]),
        ("unruh/B0-D", "c3c2c0", &[("001", 0.5), ("100", 0.5)]),
        ("unruh/B1", "c3c2c1", &[("001", 0.5), ("010", 0.25), ("100", 0.25)]),
        ("unruh/both", "c3c2c1c0", &[("0001", 0.5), ("0010", 0.25), ("0100", 0.125), ("1000", 0.125)]),
    ];
    for (name, header, expected) in cases {
        let (exp, dist) = full(name);
        assert_eq!(dist.bit_header(), header, "{name}");
        assert_histogram(&dist.probabilities, expected, 1e-10, name);
        exp.check_conservation(&dist).unwrap();
    }
}

#[test]
fn unruh_b0_on_c_mirrors_b0_on_d() {
    let (_, dist) = full("unruh/B0-C");
    assert_close(dist.probability("001"), 0.5, 1e-10, "absorbed");
    assert_close(dist.total(), 1.0, 1e-12, "total");
}

#[test]
fn unruh_circuit_layout() {
    let exp = build_unruh(&ExperimentConfig::new(ExperimentKind::Unruh), Stage::Full).unwrap();
    assert_eq!(exp.circuit.qubit_count(), 2);
    assert_eq!(exp.rails, vec!["K", "L"]);
    assert_eq!(exp.event_names(), vec!["D0", "D1"]);
    let wrong = ExperimentConfig::new(ExperimentKind::Pessoa);
    assert!(matches!(build_unruh(&wrong, Stage::Full), Err(Error::Config(_))));
    assert!(matches!(build_pessoa(&ExperimentConfig::new(ExperimentKind::Unruh), Stage::Full), Err(Error::Config(_))));
}

#[test]
fn eq11_closed_form() {
    // with φ_H = 0 both outputs carry weight ½ regardless of φ_E
    for phi_e in linspace(0.0, 2.0 * PI, 9) {
        let s = analytic_unruh(phi_e, 0.0);
        assert_close(s.probability("K", 1).unwrap(), 0.5, 1e-12, "Pr(K)");
        assert_close(s.norm(), 1.0, 1e-12, "norm");
    }
    assert_close(analytic_unruh(0.0, 0.0).probability("K", 1).unwrap(), 0.5, 1e-12, "(0,0)");
    // at φ_E = π/2, Pr(D₀) = (1 + sin φ_H)/2
    for phi_h in linspace(0.0, 2.0 * PI, 13) {
        let p = analytic_unruh(FRAC_PI_2, phi_h).probability("K", 1).unwrap();
        assert_close(p, (1.0 + phi_h.sin()) / 2.0, 1e-12, "Pr(D0)");
    }
}

#[test]
fn unruh_phase_h_zero_is_flat() {
    let config = presets::load("unruh/no-blockers").unwrap().with_phases(0.0, 0.0);
    let events = sweep_events(&config, PhaseName::PhiE, &linspace(0.0, 2.0 * PI, 33)).unwrap();
    for e in &events {
        assert_close(e["D0"], 0.5, 1e-10, "flat D0");
    }
}

#[test]
fn delayed_choice_presets_are_phase_sensitive() {
    let grid = linspace(0.0, 2.0 * PI, 65);
    for name in ["unruh/delayed-choice-particle", "unruh/delayed-choice-wave"] {
        let config = presets::load(name).unwrap();
        assert_close(config.phi_e, FRAC_PI_2, 1e-15, "φ_E");
        let d0: Vec<f64> = sweep_events(&config, PhaseName::PhiH, &grid).unwrap().iter().map(|e| e["D0"]).collect();
        assert!(visibility_of(&d0).unwrap() > 0.99, "{name}");
    }
}

#[test]
fn original_unruh_blocker_sees_nothing() {
    let (exp, dist) = full("unruh/original");
    assert_close(exp.events(&dist).unwrap()["B1"], 0.0, 1e-12, "B1 never fires");
    let marginal = dist.marginal(&[3, 2]).unwrap();
    let config = presets::load("unruh/no-blockers").unwrap().with_phases(0.0, 0.0);
    let free = build(&config, Stage::Full).unwrap().run_exact().unwrap();
    assert!(marginal.total_variation(&free) < 1e-12);
}

#[test]
fn pessoa_scenarios() {
    let cases: [(&str, &[(&str, f64)]); 5] = [
        ("pessoa/no-blockers", &[("D0", 0.5), ("D1", 0.5)]),
        ("pessoa/B0-D", &[("B0", 0.5), ("D0", 0.5), ("D1", 0.0)]),
        // with C blocked the surviving amplitude recombines entirely into D₁
        ("pessoa/B0-C", &[("B0", 0.5), ("D0", 0.0), ("D1", 0.5)]),
        ("pessoa/B1", &[("B1", 0.02), ("D0", 0.49), ("D1", 0.49)]),
        ("pessoa/both-blockers", &[("B0", 0.5), ("B1", 0.01), ("D0", 0.485), ("D1", 0.005)]),
    ];
    for (name, expected) in cases {
        let (exp, dist) = full(name);
        exp.check_conservation(&dist).unwrap();
        let events = exp.events(&dist).unwrap();
        assert_eq!(events.len(), expected.len(), "{name}: {events:?}");
        for (event, p) in expected {
            assert_close(events[*event], *p, 1e-9, &format!("{name} {event}"));
        }
    }
}

#[test]
fn pessoa_degenerate_transmittance() {
    let mut config = presets::load("pessoa/B1").unwrap();
    config.bbs_transmittance = 1.0;
    let exp = build(&config, Stage::Full).unwrap();
    let events = exp.events(&exp.run_exact().unwrap()).unwrap();
    assert_close(events["B1"], 0.0, 1e-12, "B1 with R = 0");
    config.bbs_transmittance = 0.0;
    assert!(build(&config, Stage::Full).is_err());
}

#[test]
fn pessoa_final_states_match_the_written_forms() {
    let t = 0.96f64.sqrt();
    let r = 0.2;
    let s = FRAC_1_SQRT_2;

    let free = analytic_pessoa(&presets::load("pessoa/no-blockers").unwrap());
    // i/√2 (T|M⟩ − R|Q⟩ + iT|P⟩ + R|R⟩)
    let amp = |st: &bosim::experiments::AnalyticState, mode: &str| st.amplitude_of(&[(mode, 1)]).unwrap();
    close_c(amp(&free, "M"), I * s * t, 1e-12, "M");
    close_c(amp(&free, "Q"), -I * s * r, 1e-12, "Q");
    close_c(amp(&free, "P"), -ONE * s * t, 1e-12, "P");
    close_c(amp(&free, "R"), I * s * r, 1e-12, "R");

    let b0 = analytic_pessoa(&presets::load("pessoa/B0-D").unwrap());
    close_c(amp(&b0, "B0"), I * s, 1e-12, "B0");
    close_c(amp(&b0, "M"), I * s * t, 1e-12, "M");
    close_c(amp(&b0, "Q"), -I * s * r, 1e-12, "Q");
    assert!(amp(&b0, "R").norm() < 1e-12 && amp(&b0, "P").norm() < 1e-12);

    let both = analytic_pessoa(&presets::load("pessoa/both-blockers").unwrap());
    close_c(amp(&both, "B0"), I * s, 1e-12, "B0");
    close_c(amp(&both, "B1"), c(-r / 2.0, 0.0), 1e-12, "B1");
    close_c(amp(&both, "M"), I * s * t, 1e-12, "M");
    close_c(amp(&both, "Q"), -I * r / (2.0 * SQRT_2), 1e-12, "Q");
    close_c(amp(&both, "R"), c(-r / (2.0 * SQRT_2), 0.0), 1e-12, "R");
}

#[test]
fn pessoa_circuit_amplitudes_before_detection() {
    let config = presets::load("pessoa/no-blockers").unwrap();
    let exp = build(&config, Stage::BeforeDetection).unwrap();
    let leaves = exp.branches().unwrap();
    assert_eq!(leaves.len(), 1);
    let state = exp.decompose(&leaves[0].state).unwrap();
    let expected = analytic_pessoa(&config);
    let m = state.amplitude_of(&[("M", 1)]).unwrap();
    let m_ref = expected.amplitude_of(&[("M", 1)]).unwrap();
    for mode in ["M", "Q", "R", "P"] {
        let got = align(state.amplitude_of(&[(mode, 1)]).unwrap(), m, m_ref);
        close_c(got, expected.amplitude_of(&[(mode, 1)]).unwrap(), 1e-10, mode);
    }
}

#[test]
fn hom_state_after_first_splitter() {
    let config = presets::load("hom/no-blockers").unwrap();
    let exp = build(&config, Stage::AfterBs1).unwrap();
    assert_eq!(exp.circuit.qubit_count(), 4);
    let leaves = exp.branches().unwrap();
    let state = exp.decompose(&leaves[0].state).unwrap();
    let half = I * FRAC_1_SQRT_2;
    close_c(state.amplitude_of(&[("C", 2)]).unwrap(), half, 1e-10, "|20⟩");
    close_c(state.amplitude_of(&[("D", 2)]).unwrap(), half, 1e-10, "|02⟩");
    assert!(state.amplitude_of(&[("C", 1), ("D", 1)]).unwrap().norm() < 1e-10);
}

#[test]
fn two_photon_closed_forms() {
    let r2 = SQRT_2;
    for phi_h in linspace(0.0, 2.0 * PI, 7) {
        let s = analytic_two_photon(PI, phi_h, BlockerArm::Off);
        let h = cis(phi_h);
        // |02⟩ carries the opposite sign to |20⟩, as the general ψ₅ requires at φ_E = π
        let bunch = -I * (ONE + h) / (2.0 * r2);
        close_c(s.amplitude(&[2, 0]), bunch, 1e-12, "|20⟩");
        close_c(s.amplitude(&[0, 2]), -bunch, 1e-12, "|02⟩");
        close_c(s.amplitude(&[1, 1]), -(ONE - h) / 2.0, 1e-12, "|11⟩");
    }
    for phi_e in linspace(0.0, 2.0 * PI, 7) {
        let s = analytic_two_photon(phi_e, 0.0, BlockerArm::Off);
        close_c(s.amplitude(&[2, 0]), -I / r2, 1e-12, "|20⟩");
        close_c(s.amplitude(&[0, 2]), -I * cis(phi_e) / r2, 1e-12, "|02⟩");
        close_c(s.amplitude(&[1, 1]), Complex64::new(0.0, 0.0), 1e-12, "|11⟩");
        let blocked = analytic_two_photon(phi_e, 0.0, BlockerArm::C);
        assert_close(blocked.amplitude(&[2, 0]).norm_sqr(), 1.0, 1e-12, "only D0 bunching");
    }
    for stage in [Stage::AfterBs1, Stage::BeforeBs2, Stage::AfterBs2, Stage::BeforeBs3, Stage::BeforeDetection] {
        for block in [BlockerArm::Off, BlockerArm::C, BlockerArm::D] {
            for (pe, ph) in [(0.3, 1.1), (PI, 0.0), (2.0, 5.0)] {
                let st = two_photon_stage(pe, ph, block, stage);
                assert_close(st.norm(), 1.0, 1e-12, &format!("{stage} {block:?}"));
            }
        }
    }
}

#[test]
fn two_photon_bunching_visibilities() {
    let grid = linspace(0.0, 2.0 * PI, 65);
    let flat = presets::load("hom/no-blockers").unwrap().with_phases(0.0, 0.0);
    let flat_events = sweep_events(&flat, PhaseName::PhiE, &grid).unwrap();
    let d0: Vec<f64> = flat_events.iter().map(|e| e["both_D0"]).collect();
    assert!(visibility_of(&d0).unwrap() <= 1e-9);
    for e in &flat_events {
        assert_close(e["both_D0"] + e["both_D1"] + e["coincidence"], 1.0, 1e-10, "total");
    }
    let wave = presets::load("hom/no-blockers").unwrap();
    let d0: Vec<f64> = sweep_events(&wave, PhaseName::PhiH, &grid).unwrap().iter().map(|e| e["both_D0"]).collect();
    assert!(visibility_of(&d0).unwrap() >= 1.0 - 1e-9);
}

fn check_against_oracle(config: &ExperimentConfig, stage: Stage) {
    let exp = build(config, stage).unwrap();
    let reference = oracle(config, stage).unwrap();
    let checks = compare_with_oracle(&exp, &reference).unwrap();
    assert!(!checks.is_empty());
    let total: f64 = checks.iter().map(|c| c.probability).sum();
    assert_close(total, 1.0, 1e-10, "branch weights");
    for ch in checks {
        let what = format!("{:?} {stage} record {}", config.kind, ch.record);
        assert_close(ch.probability, ch.expected_probability, 1e-9, &what);
        assert!(ch.fidelity >= 1.0 - 1e-9, "{what}: fidelity {}", ch.fidelity);
    }
}

#[test]
fn oracles_match_every_stage_and_branch() {
    let stages = [Stage::AfterBs1, Stage::BeforeBs2, Stage::AfterBs2, Stage::BeforeBs3, Stage::BeforeDetection];
    for name in presets::names() {
        let base = presets::load(name).unwrap();
        if base.kind == ExperimentKind::TwoPhotonUnruh && base.blocker_b1 {
            continue;
        }
        for (pe, ph) in [(0.0, 0.0), (0.7, 2.9), (4.1, 1.3)] {
            let config = match base.kind {
                ExperimentKind::Pessoa => {
                    let mut c = base.clone();
                    c.phi_h = pe;
                    c.phi_n = ph;
                    c
                }
                _ => base.clone().with_phases(pe, ph),
            };
            for stage in stages {
                check_against_oracle(&config, stage);
            }
        }
    }
}

#[test]
fn every_preset_conserves_photons() {
    for name in presets::names() {
        let (exp, dist) = full(name);
        exp.check_conservation(&dist).unwrap();
        assert_close(dist.total(), 1.0, 1e-10, name);
        // detector records alone never show more photons than were injected
        for leaf in run_branches(&exp.circuit).unwrap() {
            let absorbed: u32 = exp.counters.iter().map(|c| c.occupation_in_record(&leaf.record).unwrap()).sum();
            assert_eq!(absorbed, exp.photons(), "{name} {}", leaf.record);
        }
    }
}

#[test]
fn synthesis_choices_agree() {
    for name in ["unruh/both", "pessoa/both-blockers"] {
        let base = presets::load(name).unwrap();
        let exact = build(&base, Stage::Full).unwrap().run_exact().unwrap();
        let mut decomposed = base.clone();
        decomposed.synthesis = "decomposed".parse().unwrap();
        let d = build(&decomposed, Stage::Full).unwrap().run_exact().unwrap();
        assert!(exact.total_variation(&d) < 1e-10, "{name}");
    }
    let mut hom = presets::load("hom/no-blockers").unwrap();
    let exact = build(&hom, Stage::Full).unwrap().run_exact().unwrap();
    hom.synthesis = "trotter:200".parse().unwrap();
    let trotter = build(&hom, Stage::Full).unwrap().run_exact().unwrap();
    assert!(exact.total_variation(&trotter) < 1e-3);
    hom.synthesis = "decomposed".parse().unwrap();
    assert!(build(&hom, Stage::Full).is_err());
}

#[test]
fn stage_names_round_trip() {
    for stage in Stage::ALL {
        assert_eq!(stage.name().parse::<Stage>().unwrap(), stage);
    }
    assert_eq!("before-detection".parse::<Stage>().unwrap(), Stage::BeforeDetection);
    assert!("after_bs9".parse::<Stage>().is_err());
}

#[test]
fn presets_load_and_validate() {
    let names = presets::names();
    assert!(names.len() >= 16);
    for name in &names {
        let config = presets::load(name).unwrap();
        config.validate().unwrap();
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), config, "{name}");
    }
    assert_eq!(presets::resolve("pessoa/both"), Some("pessoa/both-blockers"));
    assert_eq!(presets::resolve("unruh/both-blockers"), Some("unruh/both"));
    assert_eq!(presets::resolve("two_photon_unruh/B0-C"), Some("hom/B0-C"));
    assert!(presets::load("unruh/nope").is_err());
    let pessoa = presets::load("pessoa/no-blockers").unwrap();
    assert_close(pessoa.bbs_transmittance, 0.96, 1e-15, "T²");
    assert_close(pessoa.phi_n, PI, 1e-15, "φ_N");
}

#[test]
fn config_parsing_rejects_bad_input() {
    assert!(ExperimentConfig::from_json(r#"{"kind":"unruh","phi_e":"pi/2","phi_h":0}"#).is_ok());
    assert!(ExperimentConfig::from_json(r#"{"kind":"unruh","typo":1}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"kind":"laser"}"#).is_err());
    assert!(ExperimentConfig::from_json(r#"{"kind":"pessoa","bbs_transmittance":1.5}"#).is_err());
    let unruh = ExperimentConfig::new(ExperimentKind::Unruh);
    assert!(unruh.with_phase(PhaseName::PhiN, 1.0).is_err());
    assert!(ExperimentConfig::new(ExperimentKind::Pessoa).with_phase(PhaseName::PhiE, 1.0).is_err());
}
