//! Term ordering for first-order product formulas.
//!
//! For H = Σ_k H_k the first-order product formula with n steps differs from
//! e^{iλH} by (λ²/2n)·Σ_{a<b}[H_a, H_b] + O(λ³/n²), where a < b refers to the
//! position of the terms in the product. That leading sum depends on the
//! order. For two Pauli strings, [H_a, H_b] is either zero or the single
//! string 2·H_a·H_b, so the sum can be tracked symbolically while an
//! annealing search permutes the terms.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Pauli, PauliSum};

const SEED: u64 = 0x7e7_0dd5;
const ITERATIONS: usize = 60_000;
const RESTARTS: usize = 4;
const COOLING: f64 = 0.9998;
const CONVERGED: f64 = 1e-12;

/// Commutator of terms a, b as (string id, coefficient); `None` when they commute.
type Commutators = Vec<Vec<Option<(usize, Complex64)>>>;

impl PauliSum {
    /// Frobenius norm of Σ_{a<b}[H_a, H_b] for the stored term order.
    pub fn trotter_error_norm(&self) -> f64 {
        let (comm, ids) = commutator_table(self);
        let order: Vec<usize> = (0..self.len()).collect();
        frobenius(&accumulate(&comm, &order, ids), self.width())
    }

    /// The same operator with its terms reordered to make Σ_{a<b}[H_a, H_b] small.
    ///
    /// The search is deterministic. It returns the input order unchanged when
    /// the terms already commute.
    pub fn trotter_ordered(&self) -> PauliSum {
        let n = self.len();
        if n < 3 {
            return self.clone();
        }
        let (comm, ids) = commutator_table(self);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut best: Vec<usize> = (0..n).collect();
        let mut best_cost = frobenius(&accumulate(&comm, &best, ids), self.width());
        let scale = (1usize << self.width()) as f64;

        for restart in 0..RESTARTS {
            if best_cost < CONVERGED {
                break;
            }
            let mut order: Vec<usize> = (0..n).collect();
            if restart > 0 {
                for k in (1..n).rev() {
                    order.swap(k, rng.random_range(0..=k));
                }
            }
            let mut sum = accumulate(&comm, &order, ids);
            let mut sq: f64 = sum.iter().map(|z| z.norm_sqr()).sum();
            let mut temperature = 1.0;
            let mut delta: HashMap<usize, Complex64> = HashMap::new();

            for _ in 0..ITERATIONS {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let (i, j) = (i.min(j), i.max(j));
                swap_delta(&comm, &order, i, j, &mut delta);
                let new_sq = delta.iter().fold(sq, |acc, (&id, &d)| acc - sum[id].norm_sqr() + (sum[id] + d).norm_sqr());
                let (cost, new_cost) = ((scale * sq.max(0.0)).sqrt(), (scale * new_sq.max(0.0)).sqrt());
                if new_cost < cost || rng.random::<f64>() < ((cost - new_cost) / temperature).exp() {
                    for (&id, &d) in &delta {
                        sum[id] += d;
                    }
                    sq = new_sq;
                    order.swap(i, j);
                    if new_cost < best_cost {
                        // recompute from scratch so rounding drift cannot fake convergence
                        let exact = frobenius(&accumulate(&comm, &order, ids), self.width());
                        if exact < best_cost {
                            best_cost = exact;
                            best.clone_from(&order);
                        }
                        if best_cost < CONVERGED {
                            break;
                        }
                    }
                }
                temperature *= COOLING;
            }
        }
        self.reordered(&best).expect("search yields a permutation")
    }
}

fn commutator_table(h: &PauliSum) -> (Commutators, usize) {
    let n = h.len();
    let mut ids: HashMap<Vec<Pauli>, usize> = HashMap::new();
    let mut comm = vec![vec![None; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let (ta, tb) = (&h.terms()[a], &h.terms()[b]);
            if ta.commutes_with(tb) {
                continue;
            }
            let prod = ta.mul(tb);
            let next = ids.len();
            let id = *ids.entry(prod.letters().to_vec()).or_insert(next);
            let value = prod.coefficient * 2.0;
            comm[a][b] = Some((id, value));
            comm[b][a] = Some((id, -value));
        }
    }
    let count = ids.len();
    (comm, count)
}

fn accumulate(comm: &Commutators, order: &[usize], ids: usize) -> Vec<Complex64> {
    let mut sum = vec![Complex64::new(0.0, 0.0); ids];
    for a in 0..order.len() {
        for b in (a + 1)..order.len() {
            if let Some((id, v)) = comm[order[a]][order[b]] {
                sum[id] += v;
            }
        }
    }
    sum
}

/// Change of the commutator sum when positions i < j are swapped.
fn swap_delta(comm: &Commutators, order: &[usize], i: usize, j: usize, delta: &mut HashMap<usize, Complex64>) {
    delta.clear();
    let (x, y) = (order[i], order[j]);
    let mut add = |entry: Option<(usize, Complex64)>, factor: f64| {
        if let Some((id, v)) = entry {
            *delta.entry(id).or_default() += v * factor;
        }
    };
    add(comm[x][y], -2.0);
    for &k in &order[i + 1..j] {
        add(comm[y][k], 2.0);
        add(comm[x][k], -2.0);
    }
}

fn frobenius(sum: &[Complex64], width: usize) -> f64 {
    let sq: f64 = sum.iter().map(|z| z.norm_sqr()).sum();
    ((1usize << width) as f64 * sq).sqrt()
}
