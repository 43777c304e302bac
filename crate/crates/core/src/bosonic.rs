//! Gray-code encoding of truncated bosonic modes and the induced Pauli form of
//! creation, annihilation, number and hopping operators.
//!
//! Each mode occupies a contiguous block of `N_q = ⌈log₂(N+1)⌉` qubits, blocks in
//! declared mode order. An occupation `n` is stored as the Gray code of `n`,
//! most significant bit on the lowest qubit index of the block.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graycode::{gray_inverse, gray_value, qubits_for_capacity, to_gray};
use crate::pauli::{ladder, Ladder, PauliSum};

/// Photon occupation per mode with a shared capacity `N` on the total.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FockState {
    occupations: Vec<u32>,
    capacity: u32,
}

impl FockState {
    pub fn new(occupations: Vec<u32>, capacity: u32) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Domain("capacity must be positive".into()));
        }
        let total: u64 = occupations.iter().map(|&n| n as u64).sum();
        if total > capacity as u64 {
            return Err(Error::Domain(format!("{total} photons exceed capacity {capacity}")));
        }
        Ok(Self { occupations, capacity })
    }

    pub fn vacuum(modes: usize, capacity: u32) -> Result<Self> {
        Self::new(vec![0; modes], capacity)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn total(&self) -> u32 {
        self.occupations.iter().sum()
    }
}

/// Assignment of modes to contiguous qubit blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeLayout {
    mode_count: usize,
    capacity: u32,
    qubits_per_mode: usize,
}

impl ModeLayout {
    pub fn new(mode_count: usize, capacity: u32) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::Domain("a layout needs at least one mode".into()));
        }
        if capacity == 0 {
            return Err(Error::Domain("capacity must be positive".into()));
        }
        Ok(Self { mode_count, capacity, qubits_per_mode: qubits_for_capacity(capacity) })
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn qubits_per_mode(&self) -> usize {
        self.qubits_per_mode
    }

    pub fn qubit_count(&self) -> usize {
        self.mode_count * self.qubits_per_mode
    }

    pub fn block(&self, mode: usize) -> Result<Range<usize>> {
        self.check_mode(mode)?;
        let start = mode * self.qubits_per_mode;
        Ok(start..start + self.qubits_per_mode)
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count {
            return Err(Error::Domain(format!("mode {mode} outside layout of {} modes", self.mode_count)));
        }
        Ok(())
    }
}

/// Register basis index of a Fock state (qubit 0 is the most significant bit).
pub fn encode_fock(f: &FockState, layout: &ModeLayout) -> Result<usize> {
    if f.occupations.len() != layout.mode_count {
        return Err(Error::Dimension { expected: layout.mode_count, found: f.occupations.len() });
    }
    let nq = layout.qubits_per_mode;
    let mut index = 0usize;
    for &n in &f.occupations {
        if n > layout.capacity {
            return Err(Error::Domain(format!("occupation {n} exceeds capacity {}", layout.capacity)));
        }
        index = (index << nq) | to_gray(n as u64, nq)?.to_binary() as usize;
    }
    Ok(index)
}

/// Occupations encoded by a register basis index, or `None` if some block holds
/// a code outside `0..=N`.
pub fn decode_basis(index: usize, layout: &ModeLayout) -> Option<Vec<u32>> {
    let nq = layout.qubits_per_mode;
    let mask = (1usize << nq) - 1;
    (0..layout.mode_count)
        .map(|m| {
            let shift = (layout.mode_count - 1 - m) * nq;
            let n = gray_inverse(((index >> shift) & mask) as u64);
            (n <= layout.capacity as u64).then_some(n as u32)
        })
        .collect()
}

/// Register basis indices of encoded Fock states with total occupation ≤ `max_total`.
pub fn number_subspace(layout: &ModeLayout, max_total: u32) -> Vec<usize> {
    (0..1usize << layout.qubit_count())
        .filter(|&i| decode_basis(i, layout).is_some_and(|occ| occ.iter().sum::<u32>() <= max_total))
        .collect()
}

/// a† for one mode on its own `N_q` qubits.
pub fn single_mode_creation(capacity: u32) -> Result<PauliSum> {
    if capacity == 0 {
        return Err(Error::Domain("capacity must be positive".into()));
    }
    let nq = qubits_for_capacity(capacity);
    let mut total = PauliSum::zero(nq)?;
    for n in 0..capacity as u64 {
        let (from, to) = (gray_value(n), gray_value(n + 1));
        let mut term: Option<PauliSum> = None;
        for j in 0..nq {
            let shift = nq - 1 - j;
            let (g, g_next) = ((from >> shift) & 1, (to >> shift) & 1);
            let factor = match (g, g_next) {
                (0, 0) => ladder(Ladder::P0),
                (1, 1) => ladder(Ladder::P1),
                (0, _) => ladder(Ladder::S0Dag),
                _ => ladder(Ladder::S1Dag),
            };
            term = Some(match term {
                None => factor,
                Some(t) => t.tensor(&factor),
            });
        }
        let term = term.expect("at least one qubit").scale(Complex64::new(((n + 1) as f64).sqrt(), 0.0));
        total = total.add(&term)?;
    }
    Ok(total)
}

/// a for one mode on its own `N_q` qubits.
pub fn single_mode_annihilation(capacity: u32) -> Result<PauliSum> {
    Ok(single_mode_creation(capacity)?.adjoint())
}

/// Places a single-mode operator on `mode`'s block, identities elsewhere.
pub fn embed(op: &PauliSum, mode: usize, layout: &ModeLayout) -> Result<PauliSum> {
    layout.check_mode(mode)?;
    if op.width() != layout.qubits_per_mode {
        return Err(Error::Dimension { expected: layout.qubits_per_mode, found: op.width() });
    }
    let nq = layout.qubits_per_mode;
    let mut out: Option<PauliSum> = None;
    for m in 0..layout.mode_count {
        let factor = if m == mode { op.clone() } else { PauliSum::identity(nq)? };
        out = Some(match out {
            None => factor,
            Some(acc) => acc.tensor(&factor),
        });
    }
    Ok(out.expect("at least one mode"))
}

pub fn creation_op(mode: usize, layout: &ModeLayout) -> Result<PauliSum> {
    embed(&single_mode_creation(layout.capacity)?, mode, layout)
}

pub fn annihilation_op(mode: usize, layout: &ModeLayout) -> Result<PauliSum> {
    embed(&single_mode_annihilation(layout.capacity)?, mode, layout)
}

/// a†a on `mode`.
pub fn number_op(mode: usize, layout: &ModeLayout) -> Result<PauliSum> {
    creation_op(mode, layout)?.mul(&annihilation_op(mode, layout)?)
}

/// Σ_j a_j†a_j.
pub fn total_number_op(layout: &ModeLayout) -> Result<PauliSum> {
    let mut total = PauliSum::zero(layout.qubit_count())?;
    for m in 0..layout.mode_count {
        total = total.add(&number_op(m, layout)?)?;
    }
    Ok(total)
}

/// b†a + a†b for modes a and b.
pub fn hopping_hamiltonian(mode_a: usize, mode_b: usize, layout: &ModeLayout) -> Result<PauliSum> {
    if mode_a == mode_b {
        return Err(Error::Domain("hopping needs two distinct modes".into()));
    }
    let (ad, a) = (creation_op(mode_a, layout)?, annihilation_op(mode_a, layout)?);
    let (bd, b) = (creation_op(mode_b, layout)?, annihilation_op(mode_b, layout)?);
    bd.mul(&a)?.add(&ad.mul(&b)?)
}
