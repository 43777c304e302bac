//! Closed-form states of the three interferometers.
//!
//! States are written over labelled modes. A blocker that absorbed photons is
//! represented by a pseudo-mode named after it (`B0`, `B1`) whose occupation is
//! the number of absorbed photons; conditioning on those pseudo-modes gives the
//! renormalized state of each measurement branch.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;

use super::config::{BlockerArm, ExperimentConfig, ExperimentKind};
use super::{ExperimentCircuit, Stage};
use crate::error::{Error, Result};
use crate::linalg::{c, cis, fidelity, I, ONE, ZERO};

/// Complex amplitudes over Fock components of labelled modes.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticState {
    modes: Vec<String>,
    components: Vec<(Vec<u32>, Complex64)>,
}

impl AnalyticState {
    /// Duplicate occupation patterns are summed.
    pub fn new(modes: Vec<String>, components: Vec<(Vec<u32>, Complex64)>) -> Result<Self> {
        let mut seen: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut merged: Vec<(Vec<u32>, Complex64)> = Vec::new();
        for (occ, amp) in components {
            if occ.len() != modes.len() {
                return Err(Error::Dimension { expected: modes.len(), found: occ.len() });
            }
            match seen.get(&occ) {
                Some(&k) => merged[k].1 += amp,
                None => {
                    seen.insert(occ.clone(), merged.len());
                    merged.push((occ, amp));
                }
            }
        }
        Ok(Self { modes, components: merged })
    }

    fn from_terms(modes: &[&str], terms: &[(&[u32], Complex64)]) -> Self {
        let modes = modes.iter().map(|m| m.to_string()).collect();
        let components = terms.iter().map(|(o, a)| (o.to_vec(), *a)).collect();
        Self::new(modes, components).expect("terms match the mode list")
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn components(&self) -> &[(Vec<u32>, Complex64)] {
        &self.components
    }

    /// Amplitude of one occupation pattern (zero when absent).
    pub fn amplitude(&self, occupations: &[u32]) -> Complex64 {
        self.components.iter().find(|(o, _)| o == occupations).map(|(_, a)| *a).unwrap_or(ZERO)
    }

    /// Amplitude with occupations given per mode label; unlisted modes are empty.
    pub fn amplitude_of(&self, occupied: &[(&str, u32)]) -> Result<Complex64> {
        let mut occ = vec![0; self.modes.len()];
        for &(label, n) in occupied {
            let k = self.position(label)?;
            occ[k] = n;
        }
        Ok(self.amplitude(&occ))
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m == label)
            .ok_or_else(|| Error::Domain(format!("state has no mode {label}")))
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-15 {
            return Err(Error::Numerical("cannot normalize a zero state".into()));
        }
        let mut out = self.clone();
        for (_, a) in &mut out.components {
            *a /= n;
        }
        Ok(out)
    }

    /// Normalized probability that `label` holds exactly `n` photons.
    pub fn probability(&self, label: &str, n: u32) -> Result<f64> {
        let k = self.position(label)?;
        let hit: f64 = self.components.iter().filter(|(o, _)| o[k] == n).map(|(_, a)| a.norm_sqr()).sum();
        Ok(hit / self.norm().powi(2))
    }

    /// Branch where the listed modes hold the given occupations.
    ///
    /// Returns the branch weight relative to the whole state and the renormalized
    /// state over the remaining modes, or `None` when the branch has no weight.
    pub fn condition(&self, fixed: &BTreeMap<String, u32>) -> Result<Option<(f64, AnalyticState)>> {
        let mut keep = Vec::new();
        let mut checks = Vec::new();
        for (k, m) in self.modes.iter().enumerate() {
            match fixed.get(m) {
                Some(&n) => checks.push((k, n)),
                None => keep.push(k),
            }
        }
        for name in fixed.keys() {
            if !self.modes.contains(name) {
                return Err(Error::Domain(format!("state has no mode {name}")));
            }
        }
        let total = self.norm().powi(2);
        let components: Vec<(Vec<u32>, Complex64)> = self
            .components
            .iter()
            .filter(|(o, _)| checks.iter().all(|&(k, n)| o[k] == n))
            .map(|(o, a)| (keep.iter().map(|&k| o[k]).collect(), *a))
            .collect();
        let weight: f64 = components.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>() / total;
        if weight < 1e-14 {
            return Ok(None);
        }
        let modes = keep.iter().map(|&k| self.modes[k].clone()).collect();
        Ok(Some((weight, AnalyticState::new(modes, components)?.normalized()?)))
    }

    /// |⟨a|b⟩|² between normalized states over the same set of mode labels (any order).
    pub fn fidelity(&self, other: &AnalyticState) -> Result<f64> {
        if self.modes.len() != other.modes.len() {
            return Err(Error::Dimension { expected: self.modes.len(), found: other.modes.len() });
        }
        let perm = self.modes.iter().map(|m| other.position(m)).collect::<Result<Vec<_>>>()?;
        let mut keys: Vec<Vec<u32>> = self.components.iter().map(|(o, _)| o.clone()).collect();
        for (o, _) in &other.components {
            let mapped: Vec<u32> = perm.iter().map(|&k| o[k]).collect();
            if !keys.contains(&mapped) {
                keys.push(mapped);
            }
        }
        let a: Vec<Complex64> = keys.iter().map(|k| self.amplitude(k)).collect();
        let b: Vec<Complex64> = keys
            .iter()
            .map(|k| {
                let mut o = vec![0; k.len()];
                for (i, &p) in perm.iter().enumerate() {
                    o[p] = k[i];
                }
                other.amplitude(&o)
            })
            .collect();
        Ok(fidelity(&a, &b))
    }
}

/// Single-photon state: one amplitude per mode, plus absorbed amplitude per blocker pseudo-mode.
fn single_photon(blocked: &[(&str, Complex64)], modes: &[(&str, Complex64)]) -> AnalyticState {
    let labels: Vec<&str> = blocked.iter().chain(modes).map(|(l, _)| *l).collect();
    let width = labels.len();
    let terms: Vec<(Vec<u32>, Complex64)> = blocked
        .iter()
        .chain(modes)
        .enumerate()
        .map(|(k, (_, a))| {
            let mut occ = vec![0; width];
            occ[k] = 1;
            (occ, *a)
        })
        .collect();
    AnalyticState::new(labels.iter().map(|s| s.to_string()).collect(), terms).expect("consistent widths")
}

/// State over K, L after the last splitter of the modified Unruh setup, no blockers.
pub fn analytic_unruh(phi_e: f64, phi_h: f64) -> AnalyticState {
    let (e, h) = (cis(phi_e), cis(phi_h));
    let k = -(e * h - h - e - ONE) / (2.0 * SQRT_2);
    let l = -I * (e * h + e - h + ONE) / (2.0 * SQRT_2);
    single_photon(&[], &[("K", k), ("L", l)])
}

/// Modified Unruh setup at any checkpoint, with blockers as pseudo-modes `B0`, `B1`.
pub fn analytic_unruh_stage(phi_e: f64, phi_h: f64, b0: BlockerArm, b1: bool, stage: Stage) -> AnalyticState {
    let s = c(FRAC_1_SQRT_2, 0.0);
    let (mut cc, mut dd) = (s, I * s);
    if stage == Stage::AfterBs1 {
        return single_photon(&[], &[("C", cc), ("D", dd)]);
    }
    let mut blocked: Vec<(&str, Complex64)> = Vec::new();
    match b0 {
        BlockerArm::Off => {}
        BlockerArm::C => blocked.push(("B0", std::mem::replace(&mut cc, ZERO))),
        BlockerArm::D => blocked.push(("B0", std::mem::replace(&mut dd, ZERO))),
    }
    let e = I * cc * cis(phi_e);
    let f = I * dd;
    if stage == Stage::BeforeBs2 {
        return single_photon(&blocked, &[("E", e), ("F", f)]);
    }
    let g = (f + I * e) * FRAC_1_SQRT_2;
    let mut h = (I * f + e) * FRAC_1_SQRT_2;
    if stage == Stage::AfterBs2 {
        return single_photon(&blocked, &[("G", g), ("H", h)]);
    }
    if b1 {
        blocked.push(("B1", std::mem::replace(&mut h, ZERO)));
    }
    h *= cis(phi_h);
    let (i_mode, j_mode) = (I * g, I * h);
    if stage == Stage::BeforeBs3 {
        return single_photon(&blocked, &[("I", i_mode), ("J", j_mode)]);
    }
    let k = (j_mode + I * i_mode) * FRAC_1_SQRT_2;
    let l = (I * j_mode + i_mode) * FRAC_1_SQRT_2;
    single_photon(&blocked, &[("K", k), ("L", l)])
}

/// Parameters of the nested setup: biased-splitter amplitudes and the two phases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PessoaParams {
    pub t4: f64,
    pub t5: f64,
    pub phi_h: f64,
    pub phi_n: f64,
}

impl PessoaParams {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        let t = config.bbs_transmittance.sqrt();
        Self { t4: t, t5: t, phi_h: config.phi_h, phi_n: config.phi_n }
    }
}

/// Nested Pessoa Júnior setup at any checkpoint.
///
/// Mode sets per stage: (C,E,D,F), (G,H,I,J), (G,K,L,J), (M,N,O,P), (M,Q,R,P).
pub fn analytic_pessoa_stage(p: PessoaParams, b0: BlockerArm, b1: bool, stage: Stage) -> AnalyticState {
    let s = c(FRAC_1_SQRT_2, 0.0);
    let (r4, r5) = ((1.0 - p.t4 * p.t4).max(0.0).sqrt(), (1.0 - p.t5 * p.t5).max(0.0).sqrt());
    let (mut cc, mut dd) = (s, I * s);
    if stage == Stage::AfterBs1 {
        return single_photon(&[], &[("C", cc), ("E", ZERO), ("D", dd), ("F", ZERO)]);
    }
    let mut blocked: Vec<(&str, Complex64)> = Vec::new();
    match b0 {
        BlockerArm::Off => {}
        BlockerArm::C => blocked.push(("B0", std::mem::replace(&mut cc, ZERO))),
        BlockerArm::D => blocked.push(("B0", std::mem::replace(&mut dd, ZERO))),
    }
    let g = cc * p.t4;
    let h = I * cc * r4 * cis(p.phi_h);
    let i_mode = I * dd * r5;
    let j = dd * p.t5;
    if stage == Stage::BeforeBs2 {
        return single_photon(&blocked, &[("G", g), ("H", h), ("I", i_mode), ("J", j)]);
    }
    let mut l = (h + I * i_mode) * FRAC_1_SQRT_2;
    let k = (I * h + i_mode) * FRAC_1_SQRT_2;
    if stage == Stage::AfterBs2 {
        return single_photon(&blocked, &[("G", g), ("K", k), ("L", l), ("J", j)]);
    }
    if b1 {
        blocked.push(("B1", std::mem::replace(&mut l, ZERO)));
    }
    let n = I * k * cis(p.phi_n);
    let o = I * l;
    let m = I * g;
    let pp = I * j;
    if stage == Stage::BeforeBs3 {
        return single_photon(&blocked, &[("M", m), ("N", n), ("O", o), ("P", pp)]);
    }
    let r = (n + I * o) * FRAC_1_SQRT_2;
    let q = (I * n + o) * FRAC_1_SQRT_2;
    single_photon(&blocked, &[("M", m), ("Q", q), ("R", r), ("P", pp)])
}

/// Final state of the nested setup for a configuration (blockers as pseudo-modes).
pub fn analytic_pessoa(config: &ExperimentConfig) -> AnalyticState {
    analytic_pessoa_stage(PessoaParams::from_config(config), config.blocker_b0, config.blocker_b1, Stage::BeforeDetection)
}

/// Two-photon state over K, L after the last splitter, conditioned on B₀ absorbing nothing.
///
/// `block` selects the unblocked state, the state with mode C blocked, or with mode D blocked.
pub fn analytic_two_photon(phi_e: f64, phi_h: f64, block: BlockerArm) -> AnalyticState {
    two_photon_stage(phi_e, phi_h, block, Stage::BeforeDetection)
}

/// Two-photon conditional states at each checkpoint.
///
/// Mode pairs per stage: (C,D), (E,F), (G,H), (I,J), (K,L); occupations are listed
/// in that order.
pub fn two_photon_stage(phi_e: f64, phi_h: f64, block: BlockerArm, stage: Stage) -> AnalyticState {
    let (e, h) = (cis(phi_e), cis(phi_h));
    let r2 = SQRT_2;
    let pair = |m: [&str; 2], a20: Complex64, a02: Complex64, a11: Complex64| {
        AnalyticState::from_terms(&m, &[(&[2, 0], a20), (&[0, 2], a02), (&[1, 1], a11)])
    };
    match (stage, block) {
        (Stage::AfterBs1, _) => pair(["C", "D"], I / r2, I / r2, ZERO),
        (Stage::BeforeBs2, BlockerArm::Off) => pair(["E", "F"], -I * e / r2, -I / r2, ZERO),
        (Stage::BeforeBs2, BlockerArm::C) => pair(["E", "F"], ZERO, -I, ZERO),
        (Stage::BeforeBs2, BlockerArm::D) => pair(["E", "F"], -I * e, ZERO, ZERO),
        (Stage::AfterBs2, BlockerArm::Off) => {
            let a = I * (e - ONE) / (2.0 * r2);
            pair(["G", "H"], a, -a, (ONE + e) / 2.0)
        }
        (Stage::AfterBs2, BlockerArm::C) => pair(["G", "H"], -I / 2.0, I / 2.0, c(1.0 / r2, 0.0)),
        (Stage::AfterBs2, BlockerArm::D) => pair(["G", "H"], I * e / 2.0, -I * e / 2.0, e / r2),
        // the |11⟩ coefficient follows from propagating the previous state through φ_H and the mirrors
        (Stage::BeforeBs3, BlockerArm::Off) => {
            let a = (ONE - e) / (2.0 * r2);
            pair(["I", "J"], I * a, -I * h * a, -(ONE + e) * h / 2.0)
        }
        (Stage::BeforeBs3, BlockerArm::C) => pair(["I", "J"], I / 2.0, -I * h / 2.0, -h / r2),
        (Stage::BeforeBs3, BlockerArm::D) => pair(["I", "J"], -I * e / 2.0, I * e * h / 2.0, -e * h / r2),
        (_, BlockerArm::Off) => {
            let k = r2 / 8.0;
            pair(
                ["K", "L"],
                -I * k * (ONE - e + 3.0 * h + h * e),
                I * k * (ONE - e - h - 3.0 * h * e),
                -(ONE - e) * (ONE - h) / 4.0,
            )
        }
        (_, BlockerArm::C) => {
            let f = -I / 4.0;
            pair(["K", "L"], f * (ONE + 3.0 * h), -f * (ONE - h), -f * I * r2 * (ONE - h))
        }
        (_, BlockerArm::D) => {
            let f = I * e / 4.0;
            pair(["K", "L"], f * (ONE - h), -f * (ONE + 3.0 * h), -f * I * r2 * (ONE - h))
        }
    }
}

/// Two-photon state including the B₀ pseudo-mode: half the weight has both photons absorbed.
fn two_photon_with_blocker(phi_e: f64, phi_h: f64, block: BlockerArm, stage: Stage) -> Result<AnalyticState> {
    let passed = two_photon_stage(phi_e, phi_h, block, stage);
    if block == BlockerArm::Off || stage == Stage::AfterBs1 {
        return Ok(passed);
    }
    let mut modes = vec!["B0".to_string()];
    modes.extend(passed.modes().iter().cloned());
    let mut components: Vec<(Vec<u32>, Complex64)> = passed
        .components()
        .iter()
        .map(|(o, a)| {
            let mut occ = vec![0];
            occ.extend(o);
            (occ, a * FRAC_1_SQRT_2)
        })
        .collect();
    components.push((vec![2, 0, 0], c(FRAC_1_SQRT_2, 0.0)));
    AnalyticState::new(modes, components)
}

/// Closed-form oracle for a configuration at a checkpoint (`Full` maps to the pre-detection state).
pub fn oracle(config: &ExperimentConfig, stage: Stage) -> Result<AnalyticState> {
    let stage = if stage == Stage::Full { Stage::BeforeDetection } else { stage };
    match config.kind {
        ExperimentKind::Unruh => {
            Ok(analytic_unruh_stage(config.phi_e, config.phi_h, config.blocker_b0, config.blocker_b1, stage))
        }
        ExperimentKind::Pessoa => {
            Ok(analytic_pessoa_stage(PessoaParams::from_config(config), config.blocker_b0, config.blocker_b1, stage))
        }
        ExperimentKind::TwoPhotonUnruh => {
            if config.blocker_b1 && stage > Stage::AfterBs2 {
                return Err(Error::Config("no closed form for the two-photon setup with blocker B1".into()));
            }
            two_photon_with_blocker(config.phi_e, config.phi_h, config.blocker_b0, stage)
        }
    }
}

/// Agreement between one measurement branch of a circuit and the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchCheck {
    pub record: String,
    pub probability: f64,
    pub expected_probability: f64,
    pub fidelity: f64,
}

/// Runs the circuit up to its checkpoint and compares every blocker branch with the oracle.
pub fn compare_with_oracle(exp: &ExperimentCircuit, oracle: &AnalyticState) -> Result<Vec<BranchCheck>> {
    let mut out = Vec::new();
    for leaf in exp.branches()? {
        let fixed = exp.blocker_occupations(&leaf.record)?;
        let fixed: BTreeMap<String, u32> = fixed.into_iter().filter(|(name, _)| oracle.modes().contains(name)).collect();
        let (expected_probability, fidelity) = match oracle.condition(&fixed)? {
            Some((w, branch)) => (w, exp.embed(&branch)?.fidelity(&leaf.state)?),
            None => (0.0, 0.0),
        };
        out.push(BranchCheck { record: leaf.record.label(), probability: leaf.probability, expected_probability, fidelity });
    }
    Ok(out)
}
