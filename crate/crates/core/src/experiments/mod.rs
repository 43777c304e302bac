//! The three interferometers as circuits, their analytic oracles and named presets.
//!
//! Each optical mode keeps a fixed qubit block for the whole circuit; optical
//! elements relabel the blocks they act on (`A,B → C,D` and so on), so the rail
//! labels at any checkpoint name the modes of the figures.

pub mod analytic;
pub mod config;
pub mod presets;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bosonic::{decode_basis, encode_fock, FockState, ModeLayout};
use crate::error::{Error, Result};
use crate::graycode::gray_inverse;
use crate::linalg::{CMatrix, ONE, ZERO};
use crate::optics::{self, BeamSplitterSpec, ElementKind, ElementPlacement};
use crate::simulator::{run_branches, run_exact, Branch, Circuit, OutcomeDistribution, Record, Statevector};

pub use analytic::AnalyticState;
pub use config::{parse_angle, BlockerArm, ExperimentConfig, ExperimentKind, PhaseName};

/// Points at which a circuit can be cut to inspect the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Right after the first beam splitter, before any blocker.
    AfterBs1,
    /// Just before the second beam splitter (after B₀, mirrors and φ_E or the biased splitters and φ_H).
    BeforeBs2,
    /// Right after the second beam splitter, before B₁.
    AfterBs2,
    /// Just before the last beam splitter.
    BeforeBs3,
    /// After the last beam splitter, before the detectors.
    BeforeDetection,
    /// Complete circuit including detectors.
    Full,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::AfterBs1, Stage::BeforeBs2, Stage::AfterBs2, Stage::BeforeBs3, Stage::BeforeDetection, Stage::Full];

    pub fn name(self) -> &'static str {
        match self {
            Stage::AfterBs1 => "after_bs1",
            Stage::BeforeBs2 => "before_bs2",
            Stage::AfterBs2 => "after_bs2",
            Stage::BeforeBs3 => "before_bs3",
            Stage::BeforeDetection => "before_detection",
            Stage::Full => "full",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown stage {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterRole {
    Blocker,
    Detector,
}

/// A blocker or detector: the modes it absorbs and the classical bits each one writes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counter {
    pub name: String,
    pub role: CounterRole,
    /// (mode label, bits in block order)
    pub modes: Vec<(String, Vec<usize>)>,
}

impl Counter {
    /// Photons absorbed in a record, or `None` if one of the bits is missing.
    pub fn occupation(&self, bit: impl Fn(usize) -> Option<bool>) -> Option<u32> {
        let mut total = 0;
        for (_, bits) in &self.modes {
            let mut code = 0u64;
            for &b in bits {
                code = (code << 1) | bit(b)? as u64;
            }
            total += gray_inverse(code) as u32;
        }
        Some(total)
    }

    pub fn occupation_in_record(&self, record: &Record) -> Option<u32> {
        self.occupation(|b| record.get(b))
    }

    pub fn occupation_in_label(&self, dist: &OutcomeDistribution, label: &str) -> Option<u32> {
        self.occupation(|b| dist.bit_value(label, b))
    }
}

/// A built experiment, possibly cut at a checkpoint.
#[derive(Clone, Debug)]
pub struct ExperimentCircuit {
    pub config: ExperimentConfig,
    pub stage: Stage,
    pub circuit: Circuit,
    pub layout: ModeLayout,
    /// Current mode label of each qubit block.
    pub rails: Vec<String>,
    pub placements: Vec<ElementPlacement>,
    pub counters: Vec<Counter>,
}

impl ExperimentCircuit {
    pub fn photons(&self) -> u32 {
        self.config.kind.photons()
    }

    /// Block index currently carrying `label`.
    pub fn mode_of(&self, label: &str) -> Result<usize> {
        self.rails
            .iter()
            .position(|r| r == label)
            .ok_or_else(|| Error::Circuit(format!("no mode labelled {label} at stage {}", self.stage)))
    }

    pub fn counter(&self, name: &str) -> Option<&Counter> {
        self.counters.iter().find(|c| c.name == name)
    }

    /// Event names reported by [`events`](Self::events), in a fixed order.
    pub fn event_names(&self) -> Vec<String> {
        let mut names: Vec<String> =
            self.counters.iter().filter(|c| c.role == CounterRole::Blocker).map(|c| c.name.clone()).collect();
        let has_detectors = self.counters.iter().any(|c| c.role == CounterRole::Detector);
        if has_detectors {
            if self.photons() == 1 {
                names.extend(["D0".to_string(), "D1".to_string()]);
            } else {
                names.extend(["both_D0".to_string(), "both_D1".to_string(), "coincidence".to_string()]);
            }
        }
        names
    }

    /// Probabilities of the named events of a distribution produced by this circuit.
    ///
    /// Blockers and single-photon detectors report Pr(at least one photon absorbed);
    /// two-photon detectors report bunching in D₀, bunching in D₁ and coincidences.
    pub fn events(&self, dist: &OutcomeDistribution) -> Result<BTreeMap<String, f64>> {
        let names = self.event_names();
        let mut out: BTreeMap<String, f64> = names.iter().map(|n| (n.clone(), 0.0)).collect();
        for (label, &p) in &dist.probabilities {
            let mut occ = BTreeMap::new();
            for c in &self.counters {
                let n = c
                    .occupation_in_label(dist, label)
                    .ok_or_else(|| Error::Circuit(format!("record {label} lacks bits of {}", c.name)))?;
                occ.insert(c.name.as_str(), n);
            }
            for c in self.counters.iter().filter(|c| c.role == CounterRole::Blocker) {
                if occ[c.name.as_str()] > 0 {
                    *out.get_mut(&c.name).unwrap() += p;
                }
            }
            let d0 = occ.get("D0").copied().unwrap_or(0);
            let d1 = occ.get("D1").copied().unwrap_or(0);
            if self.photons() == 1 {
                if let Some(v) = out.get_mut("D0") {
                    *v += if d0 > 0 { p } else { 0.0 };
                }
                if let Some(v) = out.get_mut("D1") {
                    *v += if d1 > 0 { p } else { 0.0 };
                }
            } else if out.contains_key("both_D0") {
                let key = match (d0, d1) {
                    (2, 0) => Some("both_D0"),
                    (0, 2) => Some("both_D1"),
                    (1, 1) => Some("coincidence"),
                    _ => None,
                };
                if let Some(k) = key {
                    *out.get_mut(k).unwrap() += p;
                }
            }
        }
        Ok(out)
    }

    /// Every record of a complete circuit must account for all injected photons.
    pub fn check_conservation(&self, dist: &OutcomeDistribution) -> Result<()> {
        if self.stage != Stage::Full {
            return Err(Error::Circuit("photon accounting needs the complete circuit".into()));
        }
        for (label, &p) in &dist.probabilities {
            let mut total = 0;
            for c in &self.counters {
                total += c
                    .occupation_in_label(dist, label)
                    .ok_or_else(|| Error::Circuit(format!("record {label} lacks bits of {}", c.name)))?;
            }
            if total != self.photons() && p > 0.0 {
                return Err(Error::Numerical(format!(
                    "record {label} (p = {p}) accounts for {total} photons, expected {}",
                    self.photons()
                )));
            }
        }
        Ok(())
    }

    /// Exact outcome distribution of the (possibly cut) circuit.
    pub fn run_exact(&self) -> Result<OutcomeDistribution> {
        run_exact(&self.circuit)
    }

    /// Leaves of the measurement tree with their states.
    pub fn branches(&self) -> Result<Vec<Branch>> {
        run_branches(&self.circuit)
    }

    /// Photons absorbed by each blocker in a branch record (absent blockers omitted).
    pub fn blocker_occupations(&self, record: &Record) -> Result<BTreeMap<String, u32>> {
        self.counters
            .iter()
            .filter(|c| c.role == CounterRole::Blocker)
            .map(|c| {
                c.occupation_in_record(record)
                    .map(|n| (c.name.clone(), n))
                    .ok_or_else(|| Error::Circuit(format!("record lacks bits of {}", c.name)))
            })
            .collect()
    }

    /// Register state of an analytic state given over labelled modes; unlisted rails are vacuum.
    pub fn embed(&self, state: &AnalyticState) -> Result<Statevector> {
        let positions = state.modes().iter().map(|m| self.mode_of(m)).collect::<Result<Vec<_>>>()?;
        let mut amps = vec![ZERO; 1usize << self.layout.qubit_count()];
        for (occ, amp) in state.components() {
            let mut full = vec![0u32; self.layout.mode_count()];
            for (&pos, &n) in positions.iter().zip(occ) {
                full[pos] = n;
            }
            let index = encode_fock(&FockState::new(full, self.layout.capacity())?, &self.layout)?;
            amps[index] += amp;
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::Numerical("analytic state has zero norm".into()));
        }
        Statevector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    /// Fock decomposition of a register state over the current rail labels.
    pub fn decompose(&self, state: &Statevector) -> Result<AnalyticState> {
        let mut components = Vec::new();
        for (index, amp) in state.amplitudes().iter().enumerate() {
            if amp.norm_sqr() <= 1e-24 {
                continue;
            }
            let occ = decode_basis(index, &self.layout)
                .ok_or_else(|| Error::Numerical(format!("weight on basis state {index} outside the Fock encoding")))?;
            components.push((occ, *amp));
        }
        AnalyticState::new(self.rails.clone(), components)
    }
}

/// Incremental construction with rail relabeling and checkpoints.
struct Builder {
    config: ExperimentConfig,
    layout: ModeLayout,
    rails: Vec<String>,
    circuit: Circuit,
    placements: Vec<ElementPlacement>,
    counters: Vec<Counter>,
    checkpoints: Vec<(Stage, Snapshot)>,
}

#[derive(Clone)]
struct Snapshot {
    instructions: usize,
    rails: Vec<String>,
    placements: usize,
    counters: usize,
}

impl Builder {
    fn new(config: &ExperimentConfig, rails: &[&str]) -> Result<Self> {
        config.validate()?;
        let layout = ModeLayout::new(rails.len(), config.kind.photons())?;
        Ok(Self {
            config: config.clone(),
            layout,
            rails: rails.iter().map(|s| s.to_string()).collect(),
            circuit: Circuit::new(layout.qubit_count())?,
            placements: Vec::new(),
            counters: Vec::new(),
            checkpoints: Vec::new(),
        })
    }

    fn mode(&self, label: &str) -> Result<usize> {
        self.rails
            .iter()
            .position(|r| r == label)
            .ok_or_else(|| Error::Circuit(format!("no mode labelled {label}")))
    }

    fn place(&mut self, name: &str, element: ElementKind, inputs: &[&str], outputs: &[&str]) {
        self.placements.push(ElementPlacement {
            name: name.to_string(),
            element,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        });
    }

    /// One photon into each listed mode (Gray code of 1 sets the last qubit of the block).
    fn prepare(&mut self, labels: &[&str]) -> Result<()> {
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        for label in labels {
            let block = self.layout.block(self.mode(label)?)?;
            self.circuit.unitary(x.clone(), &[block.end - 1], format!("prepare {label}"))?;
        }
        self.place("source", ElementKind::Source, &[], labels);
        Ok(())
    }

    fn splitter(&mut self, name: &str, spec: &BeamSplitterSpec, inputs: (&str, &str), outputs: (&str, &str)) -> Result<()> {
        let modes = (self.mode(inputs.0)?, self.mode(inputs.1)?);
        let gates = optics::beam_splitter_gate(spec, modes, &self.layout, self.config.synthesis, name)?;
        self.circuit.extend(gates)?;
        self.relabel(modes, outputs);
        let element = ElementKind::BeamSplitter { t: spec.t(), r: spec.r() };
        self.place(name, element, &[inputs.0, inputs.1], &[outputs.0, outputs.1]);
        Ok(())
    }

    fn mirror(&mut self, name: &str, inputs: (&str, &str), outputs: (&str, &str)) -> Result<()> {
        let modes = (self.mode(inputs.0)?, self.mode(inputs.1)?);
        let gates = optics::mirror_gate(modes, &self.layout, self.config.synthesis, name)?;
        self.circuit.extend(gates)?;
        self.relabel(modes, outputs);
        self.place(name, ElementKind::Mirror, &[inputs.0, inputs.1], &[outputs.0, outputs.1]);
        Ok(())
    }

    fn relabel(&mut self, modes: (usize, usize), outputs: (&str, &str)) {
        self.rails[modes.0] = outputs.0.to_string();
        self.rails[modes.1] = outputs.1.to_string();
    }

    fn phase(&mut self, name: &str, label: &str, phi: f64) -> Result<()> {
        let mode = self.mode(label)?;
        let gate = optics::phase_shifter_gate(mode, phi, &self.layout, self.config.phase_convention, name)?;
        self.circuit.push(gate)?;
        self.place(name, ElementKind::PhaseShifter { phi }, &[label], &[label]);
        Ok(())
    }

    fn block(&mut self, name: &str, label: &str, bits: &[usize]) -> Result<()> {
        let mode = self.mode(label)?;
        self.circuit.extend(optics::blocker(mode, bits, &self.layout)?)?;
        self.counters.push(Counter {
            name: name.to_string(),
            role: CounterRole::Blocker,
            modes: vec![(label.to_string(), bits.to_vec())],
        });
        self.place(name, ElementKind::Blocker { bits: bits.to_vec() }, &[label], &[label]);
        Ok(())
    }

    fn detect(&mut self, name: &str, modes: &[(&str, &[usize])]) -> Result<()> {
        let mut counted = Vec::new();
        let mut all_bits = Vec::new();
        for &(label, bits) in modes {
            let mode = self.mode(label)?;
            self.circuit.push(optics::detector(mode, bits, &self.layout)?)?;
            counted.push((label.to_string(), bits.to_vec()));
            all_bits.extend_from_slice(bits);
        }
        let labels: Vec<&str> = modes.iter().map(|m| m.0).collect();
        self.counters.push(Counter { name: name.to_string(), role: CounterRole::Detector, modes: counted });
        self.place(name, ElementKind::Detector { bits: all_bits }, &labels, &[]);
        Ok(())
    }

    fn checkpoint(&mut self, stage: Stage) {
        let snap = Snapshot {
            instructions: self.circuit.instructions().len(),
            rails: self.rails.clone(),
            placements: self.placements.len(),
            counters: self.counters.len(),
        };
        self.checkpoints.push((stage, snap));
    }

    fn finish(mut self, stage: Stage) -> Result<ExperimentCircuit> {
        self.checkpoint(Stage::Full);
        let snap = self
            .checkpoints
            .iter()
            .find(|(s, _)| *s == stage)
            .map(|(_, snap)| snap.clone())
            .ok_or_else(|| Error::Circuit(format!("{} has no checkpoint {stage}", self.config.kind)))?;
        let circuit = if snap.instructions == self.circuit.instructions().len() {
            self.circuit
        } else {
            let mut cut = Circuit::new(self.layout.qubit_count())?;
            cut.extend(self.circuit.instructions()[..snap.instructions].iter().cloned())?;
            cut
        };
        self.placements.truncate(snap.placements);
        self.counters.truncate(snap.counters);
        Ok(ExperimentCircuit {
            config: self.config,
            stage,
            circuit,
            layout: self.layout,
            rails: snap.rails,
            placements: self.placements,
            counters: self.counters,
        })
    }
}

fn require_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::Config(format!("expected a {kind} configuration, got {}", config.kind)));
    }
    Ok(())
}

/// Builds the circuit for any experiment kind, cut at `stage`.
pub fn build(config: &ExperimentConfig, stage: Stage) -> Result<ExperimentCircuit> {
    match config.kind {
        ExperimentKind::Unruh => build_unruh(config, stage),
        ExperimentKind::Pessoa => build_pessoa(config, stage),
        ExperimentKind::TwoPhotonUnruh => build_two_photon_unruh(config, stage),
    }
}

/// Modified Unruh interferometer: q₀ carries A,C,F,G,J,K and q₁ carries B,D,E,H,I,L.
///
/// Bits: B₀ → c₀, B₁ → c₁, D₀ (mode K) → c₂, D₁ (mode L) → c₃.
pub fn build_unruh(config: &ExperimentConfig, stage: Stage) -> Result<ExperimentCircuit> {
    require_kind(config, ExperimentKind::Unruh)?;
    let mut b = Builder::new(config, &["A", "B"])?;
    unruh_body(&mut b, config, [&[0], &[1], &[2], &[3]])?;
    b.finish(stage)
}

/// Two-photon variant prepared in |11⟩_AB with two qubits per mode.
///
/// Bits: D₀ (mode K) → c₃c₂, D₁ (mode L) → c₁c₀, B₀ → c₅c₄, B₁ → c₇c₆, so the
/// printed detector record equals the register bit string of the K and L blocks.
pub fn build_two_photon_unruh(config: &ExperimentConfig, stage: Stage) -> Result<ExperimentCircuit> {
    require_kind(config, ExperimentKind::TwoPhotonUnruh)?;
    let mut b = Builder::new(config, &["A", "B"])?;
    unruh_body(&mut b, config, [&[5, 4], &[7, 6], &[3, 2], &[1, 0]])?;
    b.finish(stage)
}

/// Shared Unruh topology; `bits` lists the bits of B₀, B₁, D₀, D₁.
fn unruh_body(b: &mut Builder, config: &ExperimentConfig, bits: [&[usize]; 4]) -> Result<()> {
    let balanced = BeamSplitterSpec::balanced();
    b.prepare(&["A", "B"][..config.kind.photons() as usize])?;
    b.splitter("BS1", &balanced, ("A", "B"), ("C", "D"))?;
    b.checkpoint(Stage::AfterBs1);
    match config.blocker_b0 {
        BlockerArm::Off => {}
        BlockerArm::C => b.block("B0", "C", bits[0])?,
        BlockerArm::D => b.block("B0", "D", bits[0])?,
    }
    b.mirror("M1", ("C", "D"), ("F", "E"))?;
    b.phase("phi_E", "E", config.phi_e)?;
    b.checkpoint(Stage::BeforeBs2);
    b.splitter("BS2", &balanced, ("F", "E"), ("G", "H"))?;
    b.checkpoint(Stage::AfterBs2);
    if config.blocker_b1 {
        b.block("B1", "H", bits[1])?;
    }
    b.phase("phi_H", "H", config.phi_h)?;
    b.mirror("M2", ("G", "H"), ("J", "I"))?;
    b.checkpoint(Stage::BeforeBs3);
    b.splitter("BS3", &balanced, ("J", "I"), ("K", "L"))?;
    b.checkpoint(Stage::BeforeDetection);
    b.detect("D0", &[("K", bits[2])])?;
    b.detect("D1", &[("L", bits[3])])?;
    Ok(())
}

/// Nested interferometer with biased splitters BBS₄ and BBS₅; modes E,A,B,F on q₀..q₃.
///
/// Bits: B₀ → c₀, B₁ (mode L) → c₁, D₁ (modes R, P) → c₂, c₃, D₀ (modes M, Q) → c₄, c₅.
pub fn build_pessoa(config: &ExperimentConfig, stage: Stage) -> Result<ExperimentCircuit> {
    require_kind(config, ExperimentKind::Pessoa)?;
    let balanced = BeamSplitterSpec::balanced();
    let biased = BeamSplitterSpec::from_transmittance(config.bbs_transmittance)?;
    let mut b = Builder::new(config, &["E", "A", "B", "F"])?;
    b.prepare(&["A"])?;
    b.splitter("BS1", &balanced, ("A", "B"), ("C", "D"))?;
    b.checkpoint(Stage::AfterBs1);
    match config.blocker_b0 {
        BlockerArm::Off => {}
        BlockerArm::C => b.block("B0", "C", &[0])?,
        BlockerArm::D => b.block("B0", "D", &[0])?,
    }
    b.splitter("BBS4", &biased, ("C", "E"), ("G", "H"))?;
    b.splitter("BBS5", &biased, ("D", "F"), ("J", "I"))?;
    b.phase("phi_H", "H", config.phi_h)?;
    b.checkpoint(Stage::BeforeBs2);
    b.splitter("BS2", &balanced, ("H", "I"), ("L", "K"))?;
    b.checkpoint(Stage::AfterBs2);
    if config.blocker_b1 {
        b.block("B1", "L", &[1])?;
    }
    b.mirror("M_inner", ("L", "K"), ("N", "O"))?;
    b.phase("phi_N", "N", config.phi_n)?;
    b.mirror("M_outer", ("G", "J"), ("P", "M"))?;
    b.checkpoint(Stage::BeforeBs3);
    b.splitter("BS3", &balanced, ("N", "O"), ("R", "Q"))?;
    b.checkpoint(Stage::BeforeDetection);
    b.detect("D1", &[("R", &[2]), ("P", &[3])])?;
    b.detect("D0", &[("M", &[4]), ("Q", &[5])])?;
    b.finish(stage)
}

/// Event probabilities of the complete circuit at each value of one phase.
pub fn sweep_events(config: &ExperimentConfig, phase: PhaseName, values: &[f64]) -> Result<Vec<BTreeMap<String, f64>>> {
    values.iter().map(|&v| sweep_point(config, phase, v)).collect()
}

/// Event probabilities with one phase replaced.
pub fn sweep_point(config: &ExperimentConfig, phase: PhaseName, value: f64) -> Result<BTreeMap<String, f64>> {
    let cfg = config.with_phase(phase, value)?;
    let exp = build(&cfg, Stage::Full)?;
    let dist = exp.run_exact()?;
    exp.events(&dist)
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
    }
}
