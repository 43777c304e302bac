//! Optical elements as circuit instructions over the Gray-code mode encoding.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bosonic::{annihilation_op, hopping_hamiltonian, number_subspace, ModeLayout};
use crate::error::{Error, Result};
use crate::graycode::gray_inverse;
use crate::linalg::{c, cis, operator_norm, CMatrix, I, ONE, ZERO};
use crate::pauli::{exponential_exact, exponential_trotter, PauliSum};
use crate::simulator::{Circuit, Instruction, Statevector};

const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Real transmission and reflection amplitudes of a lossless beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec {
    t: f64,
    r: f64,
}

impl BeamSplitterSpec {
    pub fn new(t: f64, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("amplitudes must lie in [0, 1], got T={t}, R={r}")));
        }
        if (t * t + r * r - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Domain(format!("T² + R² = {} differs from 1", t * t + r * r)));
        }
        Ok(Self { t, r })
    }

    pub fn balanced() -> Self {
        let s = 0.5f64.sqrt();
        Self { t: s, r: s }
    }

    /// Fully reflecting element (θ = π/2).
    pub fn mirror() -> Self {
        Self { t: 0.0, r: 1.0 }
    }

    /// From the mixing angle θ ∈ [0, π/2].
    pub fn from_angle(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::Domain(format!("mixing angle {theta} outside [0, π/2]")));
        }
        Ok(Self { t: theta.cos(), r: theta.sin() })
    }

    /// From the intensity transmittance T² ∈ [0, 1].
    pub fn from_transmittance(t_squared: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t_squared) {
            return Err(Error::Domain(format!("transmittance {t_squared} outside [0, 1]")));
        }
        Ok(Self { t: t_squared.sqrt(), r: (1.0 - t_squared).sqrt() })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// θ = arctan(R/T).
    pub fn theta(&self) -> f64 {
        self.r.atan2(self.t)
    }

    /// λ = θ/2, the angle in e^{iλ(XX+YY)}.
    pub fn lambda(&self) -> f64 {
        self.theta() / 2.0
    }
}

/// How beam-splitter unitaries are synthesized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Synthesis {
    /// Dense exponential of the mapped hopping Hamiltonian.
    #[default]
    Exact,
    /// CX / R_Z / H / S / S† sequence (one photon per mode only).
    Decomposed,
    /// First-order product formula with the given number of steps.
    Trotter(usize),
}

impl fmt::Display for Synthesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Synthesis::Exact => f.write_str("exact"),
            Synthesis::Decomposed => f.write_str("decomposed"),
            Synthesis::Trotter(n) => write!(f, "trotter:{n}"),
        }
    }
}

impl FromStr for Synthesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Synthesis::Exact),
            "decomposed" => Ok(Synthesis::Decomposed),
            other => {
                let steps = other
                    .strip_prefix("trotter:")
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n > 0)
                    .ok_or_else(|| Error::Config(format!("unknown synthesis {other:?}; expected exact, decomposed or trotter:<steps>")))?;
                Ok(Synthesis::Trotter(steps))
            }
        }
    }
}

impl Serialize for Synthesis {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Synthesis {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Phase imprinted by a phase shifter on a mode holding `n` photons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// e^{iφn}
    PerPhoton,
    /// e^{iφ} whenever n ≥ 1
    #[default]
    Occupied,
}

impl PhaseConvention {
    pub fn phase(self, phi: f64, n: u32) -> Complex64 {
        match (self, n) {
            (_, 0) => ONE,
            (PhaseConvention::PerPhoton, n) => cis(phi * n as f64),
            (PhaseConvention::Occupied, _) => cis(phi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementKind {
    Source,
    BeamSplitter { t: f64, r: f64 },
    Mirror,
    PhaseShifter { phi: f64 },
    Blocker { bits: Vec<usize> },
    Detector { bits: Vec<usize> },
}

/// One element of an experiment, with the mode labels entering and leaving it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementPlacement {
    pub name: String,
    pub element: ElementKind,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

fn pair_targets(modes: (usize, usize), layout: &ModeLayout) -> Result<Vec<usize>> {
    if modes.0 == modes.1 {
        return Err(Error::Domain("a beam splitter needs two distinct modes".into()));
    }
    let mut targets: Vec<usize> = layout.block(modes.0)?.collect();
    targets.extend(layout.block(modes.1)?);
    Ok(targets)
}

/// e^{iθ(b†a + a†b)} on the two-mode register of a single pair (first mode on the leading qubits).
pub fn beam_splitter_unitary(spec: &BeamSplitterSpec, capacity: u32, synthesis: Synthesis) -> Result<CMatrix> {
    let local = ModeLayout::new(2, capacity)?;
    let theta = spec.theta();
    match synthesis {
        Synthesis::Exact if local.qubits_per_mode() == 1 => {
            let xx = PauliSum::from_label(ONE, "XX")?;
            let yy = PauliSum::from_label(ONE, "YY")?;
            Ok(exponential_exact(&xx, spec.lambda())? * exponential_exact(&yy, spec.lambda())?)
        }
        Synthesis::Exact => exponential_exact(&hopping_hamiltonian(0, 1, &local)?, theta),
        Synthesis::Trotter(steps) => exponential_trotter(&hopping_hamiltonian(0, 1, &local)?.trotter_ordered(), theta, steps),
        Synthesis::Decomposed => {
            require_single_photon_modes(&local)?;
            let mut gates = decompose_two_qubit_rotation(RotationAxis::XX, spec.lambda());
            gates.extend(decompose_two_qubit_rotation(RotationAxis::YY, spec.lambda()));
            Ok(sequence_unitary(&gates, 2))
        }
    }
}

fn require_single_photon_modes(layout: &ModeLayout) -> Result<()> {
    if layout.qubits_per_mode() != 1 {
        return Err(Error::Config("decomposed synthesis is defined for one qubit per mode only".into()));
    }
    Ok(())
}

/// Instructions realizing a beam splitter between modes `a` and `b`.
pub fn beam_splitter_gate(
    spec: &BeamSplitterSpec,
    modes: (usize, usize),
    layout: &ModeLayout,
    synthesis: Synthesis,
    label: &str,
) -> Result<Vec<Instruction>> {
    let targets = pair_targets(modes, layout)?;
    if synthesis == Synthesis::Decomposed {
        require_single_photon_modes(layout)?;
        let mut gates = decompose_two_qubit_rotation(RotationAxis::XX, spec.lambda());
        gates.extend(decompose_two_qubit_rotation(RotationAxis::YY, spec.lambda()));
        return Ok(gates
            .iter()
            .map(|g| Instruction::Unitary {
                matrix: g.matrix(),
                targets: g.qubits().iter().map(|&q| targets[q]).collect(),
                label: format!("{label}:{}", g.name()),
            })
            .collect());
    }
    let matrix = beam_splitter_unitary(spec, layout.capacity(), synthesis)?;
    Ok(vec![Instruction::Unitary { matrix, targets, label: label.to_string() }])
}

/// Beam splitter with λ = π/4: a photon changes mode and picks up a factor i.
pub fn mirror_gate(modes: (usize, usize), layout: &ModeLayout, synthesis: Synthesis, label: &str) -> Result<Vec<Instruction>> {
    beam_splitter_gate(&BeamSplitterSpec::mirror(), modes, layout, synthesis, label)
}

/// Diagonal phase on one mode's block.
pub fn phase_shifter_gate(mode: usize, phi: f64, layout: &ModeLayout, convention: PhaseConvention, label: &str) -> Result<Instruction> {
    let targets: Vec<usize> = layout.block(mode)?.collect();
    let dim = 1usize << targets.len();
    let mut matrix = CMatrix::identity(dim, dim);
    for code in 0..dim {
        let n = gray_inverse(code as u64);
        if n <= layout.capacity() as u64 {
            matrix[(code, code)] = convention.phase(phi, n as u32);
        }
    }
    Ok(Instruction::Unitary { matrix, targets, label: label.to_string() })
}

/// Measure the mode's block into `bits` (one per qubit, block order), then reset it.
pub fn blocker(mode: usize, bits: &[usize], layout: &ModeLayout) -> Result<Vec<Instruction>> {
    let targets: Vec<usize> = layout.block(mode)?.collect();
    if bits.len() != targets.len() {
        return Err(Error::Circuit(format!("mode block has {} qubits but {} bits were given", targets.len(), bits.len())));
    }
    Ok(vec![
        Instruction::Measure { targets: targets.clone(), bits: bits.to_vec() },
        Instruction::Reset { targets },
    ])
}

/// Photon-counting detector: measure the mode's block into `bits`.
pub fn detector(mode: usize, bits: &[usize], layout: &ModeLayout) -> Result<Instruction> {
    let targets: Vec<usize> = layout.block(mode)?.collect();
    if bits.len() != targets.len() {
        return Err(Error::Circuit(format!("mode block has {} qubits but {} bits were given", targets.len(), bits.len())));
    }
    Ok(Instruction::Measure { targets, bits: bits.to_vec() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotationAxis {
    ZZ,
    XX,
    YY,
}

impl RotationAxis {
    pub fn label(self) -> &'static str {
        match self {
            RotationAxis::ZZ => "ZZ",
            RotationAxis::XX => "XX",
            RotationAxis::YY => "YY",
        }
    }
}

/// Gates of the two-qubit decompositions, on local qubit indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElementaryGate {
    Cx { control: usize, target: usize },
    /// R_Z(θ) = diag(e^{−iθ/2}, e^{iθ/2})
    Rz { qubit: usize, angle: f64 },
    H(usize),
    S(usize),
    Sdg(usize),
}

impl ElementaryGate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            ElementaryGate::Cx { control, target } => vec![control, target],
            ElementaryGate::Rz { qubit, .. } | ElementaryGate::H(qubit) | ElementaryGate::S(qubit) | ElementaryGate::Sdg(qubit) => {
                vec![qubit]
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            ElementaryGate::Cx { control, target } => format!("CX{control}{target}"),
            ElementaryGate::Rz { qubit, angle } => format!("RZ{qubit}({angle:.6})"),
            ElementaryGate::H(q) => format!("H{q}"),
            ElementaryGate::S(q) => format!("S{q}"),
            ElementaryGate::Sdg(q) => format!("Sdg{q}"),
        }
    }

    /// Matrix on the gate's own qubits, in the order of [`ElementaryGate::qubits`].
    pub fn matrix(&self) -> CMatrix {
        let s = 0.5f64.sqrt();
        match *self {
            ElementaryGate::Cx { .. } => {
                let mut m = CMatrix::identity(4, 4);
                m.swap_rows(2, 3);
                m
            }
            ElementaryGate::Rz { angle, .. } => CMatrix::from_row_slice(2, 2, &[cis(-angle / 2.0), ZERO, ZERO, cis(angle / 2.0)]),
            ElementaryGate::H(_) => CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
            ElementaryGate::S(_) => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I]),
            ElementaryGate::Sdg(_) => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -I]),
        }
    }
}

/// Gate sequence (time order) realizing e^{iλ P⊗P} on qubits 0, 1.
pub fn decompose_two_qubit_rotation(axis: RotationAxis, lambda: f64) -> Vec<ElementaryGate> {
    use ElementaryGate::*;
    let zz = [Cx { control: 0, target: 1 }, Rz { qubit: 1, angle: -2.0 * lambda }, Cx { control: 0, target: 1 }];
    match axis {
        RotationAxis::ZZ => zz.to_vec(),
        RotationAxis::XX => [H(0), H(1)].into_iter().chain(zz).chain([H(0), H(1)]).collect(),
        RotationAxis::YY => [Sdg(0), Sdg(1)]
            .into_iter()
            .chain(decompose_two_qubit_rotation(RotationAxis::XX, lambda))
            .chain([S(0), S(1)])
            .collect(),
    }
}

/// Dense product of a gate sequence applied in time order on `qubits` qubits.
pub fn sequence_unitary(gates: &[ElementaryGate], qubits: usize) -> CMatrix {
    let mut circuit = Circuit::new(qubits).expect("positive width");
    for g in gates {
        circuit.unitary(g.matrix(), &g.qubits(), g.name()).expect("valid elementary gate");
    }
    circuit_unitary(&circuit).expect("unitary-only circuit")
}

/// Dense unitary of a circuit without measurements or resets.
pub fn circuit_unitary(circuit: &Circuit) -> Result<CMatrix> {
    let n = circuit.qubit_count();
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut state = Statevector::basis(n, col)?;
        for ins in circuit.instructions() {
            match ins {
                Instruction::Unitary { matrix, targets, .. } => state.apply(matrix, targets)?,
                _ => return Err(Error::Circuit("circuit contains non-unitary instructions".into())),
            }
        }
        for (row, a) in state.amplitudes().iter().enumerate() {
            out[(row, col)] = *a;
        }
    }
    Ok(out)
}

/// Operator-norm residuals of U†aU − (Ta + iRb) and U†bU − (iRa + Tb) on the
/// encoded states with at most `capacity` photons in total.
pub fn heisenberg_residuals(spec: &BeamSplitterSpec, capacity: u32, synthesis: Synthesis) -> Result<(f64, f64)> {
    let layout = ModeLayout::new(2, capacity)?;
    let mut circuit = Circuit::new(layout.qubit_count())?;
    circuit.extend(beam_splitter_gate(spec, (0, 1), &layout, synthesis, "BS")?)?;
    let u = circuit_unitary(&circuit)?;
    let a = annihilation_op(0, &layout)?.dense()?;
    let b = annihilation_op(1, &layout)?.dense()?;
    let dim = u.nrows();
    let mut projector = CMatrix::zeros(dim, dim);
    for i in number_subspace(&layout, capacity) {
        projector[(i, i)] = ONE;
    }
    let (t, r) = (c(spec.t(), 0.0), c(0.0, spec.r()));
    let c_out = u.adjoint() * &a * &u;
    let d_out = u.adjoint() * &b * &u;
    let res_c = operator_norm(&((c_out - (&a * t + &b * r)) * &projector));
    let res_d = operator_norm(&((d_out - (&a * r + &b * t)) * &projector));
    Ok((res_c, res_d))
}
