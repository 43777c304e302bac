//! Statevector circuits with mid-circuit measurement into classical bits and reset.
//!
//! Qubit 0 is the most significant bit of a basis index. Classical records are
//! printed with the highest bit index first (`c3c2c1c0`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{unitarity_deviation, CMatrix, ONE, ZERO};

/// Branches whose probability falls below this are discarded.
pub const PRUNE_THRESHOLD: f64 = 1e-12;
/// Tolerance for norms, unitarity and probability sums.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Largest register the statevector simulator accepts.
pub const MAX_QUBITS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// |0…0⟩ on `qubits` qubits.
    pub fn new(qubits: usize) -> Result<Self> {
        Self::basis(qubits, 0)
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::Domain(format!("qubit count must lie in 1..={MAX_QUBITS}")));
        }
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} outside {qubits}-qubit register")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { qubits, amplitudes })
    }

    /// Wraps normalized amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Domain(format!("{dim} amplitudes do not form a qubit register")));
        }
        let qubits = dim.trailing_zeros() as usize;
        if qubits > MAX_QUBITS {
            return Err(Error::Domain(format!("qubit count must lie in 1..={MAX_QUBITS}")));
        }
        let state = Self { qubits, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Numerical(format!("state norm {norm} differs from 1")));
        }
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |⟨self|other⟩|², both states normalized.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: other.dim() });
        }
        Ok(crate::linalg::fidelity(&self.amplitudes, &other.amplitudes))
    }

    fn bit_mask(&self, q: usize) -> usize {
        1usize << (self.qubits - 1 - q)
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        check_targets(self.qubits, targets)
    }

    /// Basis-index offsets of each local target pattern (target 0 most significant).
    fn offsets(&self, targets: &[usize]) -> Vec<usize> {
        let k = targets.len();
        (0..1usize << k)
            .map(|local| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(pos, _)| (local >> (k - 1 - pos)) & 1 == 1)
                    .fold(0, |acc, (_, &q)| acc | self.bit_mask(q))
            })
            .collect()
    }

    fn target_mask(&self, targets: &[usize]) -> usize {
        targets.iter().fold(0, |acc, &q| acc | self.bit_mask(q))
    }

    /// Applies `u` to the listed qubits in place; `targets[0]` is the most
    /// significant qubit of `u`'s local basis.
    pub fn apply(&mut self, u: &CMatrix, targets: &[usize]) -> Result<()> {
        self.check_targets(targets)?;
        let local = 1usize << targets.len();
        if u.nrows() != local || u.ncols() != local {
            return Err(Error::Dimension { expected: local, found: u.nrows().max(u.ncols()) });
        }
        let dev = unitarity_deviation(u);
        if dev > NORM_TOLERANCE {
            return Err(Error::NotUnitary(dev));
        }
        self.apply_unchecked(u, targets);
        Ok(())
    }

    fn apply_unchecked(&mut self, u: &CMatrix, targets: &[usize]) {
        let offsets = self.offsets(targets);
        let mask = self.target_mask(targets);
        let mut gathered = vec![ZERO; offsets.len()];
        for base in (0..self.dim()).filter(|i| i & mask == 0) {
            for (slot, &off) in gathered.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (col, &g) in gathered.iter().enumerate() {
                    acc += u[(row, col)] * g;
                }
                self.amplitudes[base | off] = acc;
            }
        }
    }

    /// Probability of each computational outcome on `targets` (local index, target 0 most significant).
    pub fn outcome_probabilities(&self, targets: &[usize]) -> Result<Vec<f64>> {
        self.check_targets(targets)?;
        let offsets = self.offsets(targets);
        let mask = self.target_mask(targets);
        let mut probs = vec![0.0; offsets.len()];
        for base in (0..self.dim()).filter(|i| i & mask == 0) {
            for (p, &off) in probs.iter_mut().zip(&offsets) {
                *p += self.amplitudes[base | off].norm_sqr();
            }
        }
        Ok(probs)
    }

    /// Projects onto `outcome` on `targets` and renormalizes. Returns the outcome probability.
    fn project(&mut self, targets: &[usize], outcome: usize) -> f64 {
        let offsets = self.offsets(targets);
        let mask = self.target_mask(targets);
        let keep = offsets[outcome];
        let mut p = 0.0;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == keep {
                p += a.norm_sqr();
            } else {
                *a = ZERO;
            }
        }
        let scale = 1.0 / p.sqrt();
        for a in &mut self.amplitudes {
            *a *= scale;
        }
        p
    }

    /// Moves amplitude from the known pattern `outcome` on `targets` to all zeros.
    fn clear_known(&mut self, targets: &[usize], outcome: usize) {
        let off = self.offsets(targets)[outcome];
        if off == 0 {
            return;
        }
        let mask = self.target_mask(targets);
        for base in (0..self.dim()).filter(|i| i & mask == 0) {
            self.amplitudes[base] = self.amplitudes[base | off];
            self.amplitudes[base | off] = ZERO;
        }
    }
}

/// Functional form of [`Statevector::apply`].
pub fn apply_unitary(state: &Statevector, u: &CMatrix, targets: &[usize]) -> Result<Statevector> {
    let mut out = state.clone();
    out.apply(u, targets)?;
    Ok(out)
}

fn check_targets(qubits: usize, targets: &[usize]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::Circuit("instruction needs at least one target".into()));
    }
    let mut seen = BTreeSet::new();
    for &q in targets {
        if q >= qubits {
            return Err(Error::Circuit(format!("qubit {q} outside {qubits}-qubit register")));
        }
        if !seen.insert(q) {
            return Err(Error::Circuit(format!("qubit {q} repeated in one instruction")));
        }
    }
    Ok(())
}

/// Classical record: values of the bits written so far.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Record(BTreeMap<usize, bool>);

impl Record {
    pub fn get(&self, bit: usize) -> Option<bool> {
        self.0.get(&bit).copied()
    }

    pub fn bits(&self) -> &BTreeMap<usize, bool> {
        &self.0
    }

    fn set(&mut self, bit: usize, value: bool) {
        self.0.insert(bit, value);
    }

    /// Bits printed from the highest index down; empty for an empty record.
    pub fn label(&self) -> String {
        self.0.values().rev().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Unitary { matrix: CMatrix, targets: Vec<usize>, label: String },
    /// Computational-basis measurement; `bits[k]` receives the outcome of `targets[k]`.
    Measure { targets: Vec<usize>, bits: Vec<usize> },
    /// Forces the targets to |0⟩ (a measurement whose outcome is discarded, then flips).
    Reset { targets: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    qubits: usize,
    instructions: Vec<Instruction>,
    bits: BTreeSet<usize>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::Domain(format!("qubit count must lie in 1..={MAX_QUBITS}")));
        }
        Ok(Self { qubits, instructions: Vec::new(), bits: BTreeSet::new() })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    /// Written classical bits, highest index first (print order).
    pub fn declared_bits(&self) -> Vec<usize> {
        self.bits.iter().rev().copied().collect()
    }

    pub fn push(&mut self, instruction: Instruction) -> Result<()> {
        match &instruction {
            Instruction::Unitary { matrix, targets, .. } => {
                check_targets(self.qubits, targets)?;
                let local = 1usize << targets.len();
                if matrix.nrows() != local || matrix.ncols() != local {
                    return Err(Error::Dimension { expected: local, found: matrix.nrows() });
                }
                let dev = unitarity_deviation(matrix);
                if dev > NORM_TOLERANCE {
                    return Err(Error::NotUnitary(dev));
                }
            }
            Instruction::Measure { targets, bits } => {
                check_targets(self.qubits, targets)?;
                if bits.len() != targets.len() {
                    return Err(Error::Circuit("each measured qubit needs one classical bit".into()));
                }
                let unique: BTreeSet<_> = bits.iter().collect();
                if unique.len() != bits.len() || bits.iter().any(|b| self.bits.contains(b)) {
                    return Err(Error::Circuit("classical bits may be written only once".into()));
                }
                self.bits.extend(bits.iter().copied());
            }
            Instruction::Reset { targets } => check_targets(self.qubits, targets)?,
        }
        self.instructions.push(instruction);
        Ok(())
    }

    pub fn unitary(&mut self, matrix: CMatrix, targets: &[usize], label: impl Into<String>) -> Result<()> {
        self.push(Instruction::Unitary { matrix, targets: targets.to_vec(), label: label.into() })
    }

    pub fn measure(&mut self, targets: &[usize], bits: &[usize]) -> Result<()> {
        self.push(Instruction::Measure { targets: targets.to_vec(), bits: bits.to_vec() })
    }

    pub fn reset(&mut self, targets: &[usize]) -> Result<()> {
        self.push(Instruction::Reset { targets: targets.to_vec() })
    }

    /// Appends every instruction of `other`.
    pub fn extend(&mut self, other: impl IntoIterator<Item = Instruction>) -> Result<()> {
        for ins in other {
            self.push(ins)?;
        }
        Ok(())
    }
}

/// One leaf of the measurement tree.
#[derive(Clone, Debug)]
pub struct Branch {
    pub record: Record,
    pub probability: f64,
    pub state: Statevector,
}

/// Measures `targets` into `bits`, then resets them, enumerating all outcomes above the pruning threshold.
pub fn measure_and_reset(state: &Statevector, targets: &[usize], bits: &[usize]) -> Result<Vec<Branch>> {
    if bits.len() != targets.len() {
        return Err(Error::Circuit("each measured qubit needs one classical bit".into()));
    }
    let probs = state.outcome_probabilities(targets)?;
    let k = targets.len();
    let mut out = Vec::new();
    for (outcome, &p) in probs.iter().enumerate() {
        if p <= PRUNE_THRESHOLD {
            continue;
        }
        let mut post = state.clone();
        post.project(targets, outcome);
        post.clear_known(targets, outcome);
        let mut record = Record::default();
        for (pos, &bit) in bits.iter().enumerate() {
            record.set(bit, (outcome >> (k - 1 - pos)) & 1 == 1);
        }
        out.push(Branch { record, probability: p, state: post });
    }
    Ok(out)
}

/// All leaves of the measurement tree starting from |0…0⟩.
pub fn run_branches(circuit: &Circuit) -> Result<Vec<Branch>> {
    run_branches_from(circuit, Statevector::new(circuit.qubits)?)
}

/// All leaves of the measurement tree starting from `initial`, in depth-first order.
pub fn run_branches_from(circuit: &Circuit, initial: Statevector) -> Result<Vec<Branch>> {
    if initial.qubits() != circuit.qubits {
        return Err(Error::Dimension { expected: circuit.qubits, found: initial.qubits() });
    }
    let mut leaves = Vec::new();
    let mut stack = vec![(0usize, Branch { record: Record::default(), probability: 1.0, state: initial })];
    while let Some((pc, mut branch)) = stack.pop() {
        let mut pc = pc;
        let mut split = false;
        while pc < circuit.instructions.len() {
            match &circuit.instructions[pc] {
                Instruction::Unitary { matrix, targets, .. } => branch.state.apply_unchecked(matrix, targets),
                Instruction::Measure { targets, bits } => {
                    let probs = branch.state.outcome_probabilities(targets)?;
                    let k = targets.len();
                    // push in reverse so outcome 0 is explored first
                    for (outcome, &p) in probs.iter().enumerate().rev() {
                        if p * branch.probability <= PRUNE_THRESHOLD {
                            continue;
                        }
                        let mut child = branch.clone();
                        child.state.project(targets, outcome);
                        child.probability *= p;
                        for (pos, &bit) in bits.iter().enumerate() {
                            child.record.set(bit, (outcome >> (k - 1 - pos)) & 1 == 1);
                        }
                        stack.push((pc + 1, child));
                    }
                    split = true;
                    break;
                }
                Instruction::Reset { targets } => {
                    let probs = branch.state.outcome_probabilities(targets)?;
                    if let Some(only) = single_outcome(&probs) {
                        branch.state.clear_known(targets, only);
                    } else {
                        for (outcome, &p) in probs.iter().enumerate().rev() {
                            if p * branch.probability <= PRUNE_THRESHOLD {
                                continue;
                            }
                            let mut child = branch.clone();
                            child.state.project(targets, outcome);
                            child.state.clear_known(targets, outcome);
                            child.probability *= p;
                            stack.push((pc + 1, child));
                        }
                        split = true;
                        break;
                    }
                }
            }
            pc += 1;
        }
        if !split {
            let norm = branch.state.norm();
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::Numerical(format!("state norm drifted to {norm}")));
            }
            leaves.push(branch);
        }
    }
    Ok(leaves)
}

/// Outcome index when the targets are in a definite computational state.
fn single_outcome(probs: &[f64]) -> Option<usize> {
    let mut nonzero = probs.iter().enumerate().filter(|(_, &p)| p > PRUNE_THRESHOLD);
    let first = nonzero.next()?;
    nonzero.next().is_none().then_some(first.0)
}

/// Probability per classical record, optionally with shot counts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    /// Bit indices in print order (descending).
    pub bits: Vec<usize>,
    pub probabilities: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
}

impl OutcomeDistribution {
    /// Probability of a printed record (0 when absent).
    pub fn probability(&self, label: &str) -> f64 {
        self.probabilities.get(label).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    /// Header naming the bits, e.g. `c3c2c0`.
    pub fn bit_header(&self) -> String {
        self.bits.iter().map(|b| format!("c{b}")).collect()
    }

    /// Value of classical bit `bit` within a printed label.
    pub fn bit_value(&self, label: &str, bit: usize) -> Option<bool> {
        let pos = self.bits.iter().position(|&b| b == bit)?;
        label.as_bytes().get(pos).map(|&c| c == b'1')
    }

    /// Distribution over a subset of bits.
    pub fn marginal(&self, keep: &[usize]) -> Result<OutcomeDistribution> {
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable_by(|a, b| b.cmp(a));
        keep.dedup();
        let positions = keep
            .iter()
            .map(|b| {
                self.bits.iter().position(|x| x == b).ok_or_else(|| Error::Domain(format!("bit c{b} not recorded")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut probabilities = BTreeMap::new();
        for (label, &p) in &self.probabilities {
            let bytes = label.as_bytes();
            let key: String = positions.iter().map(|&i| bytes[i] as char).collect();
            *probabilities.entry(key).or_insert(0.0) += p;
        }
        Ok(OutcomeDistribution { bits: keep, probabilities, counts: None, shots: None })
    }

    /// ½ Σ |p − q| over the union of supports.
    pub fn total_variation(&self, other: &OutcomeDistribution) -> f64 {
        let labels: BTreeSet<&String> = self.probabilities.keys().chain(other.probabilities.keys()).collect();
        0.5 * labels.iter().map(|l| (self.probability(l) - other.probability(l)).abs()).sum::<f64>()
    }
}

/// Exact probability of every classical record.
pub fn run_exact(circuit: &Circuit) -> Result<OutcomeDistribution> {
    let leaves = run_branches(circuit)?;
    let mut probabilities = BTreeMap::new();
    for leaf in &leaves {
        *probabilities.entry(leaf.record.label()).or_insert(0.0) += leaf.probability;
    }
    let dist = OutcomeDistribution { bits: circuit.declared_bits(), probabilities, counts: None, shots: None };
    let total = dist.total();
    if (total - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Numerical(format!("outcome probabilities sum to {total}")));
    }
    Ok(dist)
}

/// Shot sampling with a ChaCha8 generator seeded by `seed`.
///
/// Each shot walks one trajectory of the measurement tree: the tree is enumerated
/// once and every shot draws its leaf with the product of the conditional outcome
/// probabilities along the way, which is the distribution of re-simulating the shot.
pub fn run_sampled(circuit: &Circuit, shots: u64, seed: u64) -> Result<OutcomeDistribution> {
    if shots == 0 {
        return Err(Error::Domain("shot count must be positive".into()));
    }
    let leaves = run_branches(circuit)?;
    let labels: Vec<String> = leaves.iter().map(|l| l.record.label()).collect();
    let mut cumulative = Vec::with_capacity(leaves.len());
    let mut acc = 0.0;
    for leaf in &leaves {
        acc += leaf.probability;
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.random::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= u).min(leaves.len() - 1);
        *counts.entry(labels[k].clone()).or_insert(0) += 1;
    }
    let probabilities = counts.iter().map(|(l, &n)| (l.clone(), n as f64 / shots as f64)).collect();
    Ok(OutcomeDistribution { bits: circuit.declared_bits(), probabilities, counts: Some(counts), shots: Some(shots) })
}
