//! Complementarity quantifiers: visibilities, predictabilities and the l1 pair.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{self, AnalyticState, ExperimentConfig, PhaseName};
use crate::linalg::{hermiticity_deviation, CMatrix};

/// Fewest points accepted in a sweep.
pub const MIN_SWEEP_POINTS: usize = 8;
const DENSITY_TOLERANCE: f64 = 1e-10;

/// Probability of one event along a sweep of one phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseSweep {
    pub phase: PhaseName,
    /// Values of the phases that are not swept.
    pub fixed: BTreeMap<String, f64>,
    pub points: Vec<f64>,
    pub event: String,
    pub probabilities: Vec<f64>,
}

impl PhaseSweep {
    pub fn new(
        phase: PhaseName,
        fixed: BTreeMap<String, f64>,
        points: Vec<f64>,
        event: impl Into<String>,
        probabilities: Vec<f64>,
    ) -> Result<Self> {
        if points.len() < MIN_SWEEP_POINTS {
            return Err(Error::Domain(format!("a sweep needs at least {MIN_SWEEP_POINTS} points, got {}", points.len())));
        }
        if points.len() != probabilities.len() {
            return Err(Error::Dimension { expected: points.len(), found: probabilities.len() });
        }
        if let Some(p) = probabilities.iter().find(|p| !(-1e-12..=1.0 + 1e-12).contains(*p)) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        Ok(Self { phase, fixed, points, event: event.into(), probabilities })
    }

    /// Exact event probabilities of the complete circuit along `points`.
    pub fn run(config: &ExperimentConfig, phase: PhaseName, points: Vec<f64>, event: &str) -> Result<Self> {
        let rows = experiments::sweep_events(config, phase, &points)?;
        let probabilities = rows
            .iter()
            .map(|r| r.get(event).copied().ok_or_else(|| Error::Domain(format!("{} has no event {event}", config.kind))))
            .collect::<Result<Vec<_>>>()?;
        let fixed = [PhaseName::PhiE, PhaseName::PhiH, PhaseName::PhiN]
            .into_iter()
            .filter(|&p| p != phase && config.check_phase(p).is_ok())
            .map(|p| (p.name().to_string(), config.phase(p)))
            .collect();
        Self::new(phase, fixed, points, event, probabilities)
    }
}

/// (max − min)/(max + min) of a list of probabilities.
pub fn visibility_of(probabilities: &[f64]) -> Result<f64> {
    let max = probabilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = probabilities.iter().copied().fold(f64::INFINITY, f64::min);
    if probabilities.is_empty() || max + min <= 0.0 {
        return Err(Error::UndefinedVisibility);
    }
    Ok(((max - min) / (max + min)).clamp(0.0, 1.0))
}

/// Interferometric visibility of a sweep.
pub fn visibility(sweep: &PhaseSweep) -> Result<f64> {
    visibility_of(&sweep.probabilities)
}

/// Visibility of the probability that both photons reach one detector.
pub fn bunching_visibility(sweep: &PhaseSweep) -> Result<f64> {
    if !sweep.event.starts_with("both_") {
        return Err(Error::Domain(format!("bunching visibility needs a both-in-one-detector event, got {}", sweep.event)));
    }
    visibility_of(&sweep.probabilities)
}

/// A priori path predictability |T² − R²| of a splitter.
pub fn predictability_tr(t: f64, r: f64) -> Result<f64> {
    let norm = t * t + r * r;
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("T² + R² = {norm}, expected 1")));
    }
    Ok((t * t - r * r).abs())
}

/// Validated density matrix over a named basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    basis: Vec<String>,
}

impl DensityMatrix {
    /// Checks unit trace, Hermiticity and positivity to 1e−10.
    pub fn new(matrix: CMatrix, basis: Vec<String>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != basis.len() || basis.is_empty() {
            return Err(Error::Dimension { expected: basis.len(), found: matrix.nrows() });
        }
        let herm = hermiticity_deviation(&matrix);
        if herm > DENSITY_TOLERANCE {
            return Err(Error::NotHermitian(herm));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOLERANCE || trace.im.abs() > DENSITY_TOLERANCE {
            return Err(Error::Numerical(format!("density matrix trace is {trace}")));
        }
        let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -DENSITY_TOLERANCE {
            return Err(Error::Numerical(format!("density matrix has eigenvalue {min_eig}")));
        }
        Ok(Self { matrix, basis })
    }

    /// |ψ⟩⟨ψ| of a normalized copy of `amplitudes`.
    pub fn pure(amplitudes: &[Complex64], basis: Vec<String>) -> Result<Self> {
        Self::mixture(&[(1.0, amplitudes.to_vec())], basis)
    }

    /// Σ w_k |ψ_k⟩⟨ψ_k| with the weights and each state normalized.
    pub fn mixture(states: &[(f64, Vec<Complex64>)], basis: Vec<String>) -> Result<Self> {
        let d = basis.len();
        let total: f64 = states.iter().map(|(w, _)| *w).sum();
        if states.is_empty() || total <= 0.0 {
            return Err(Error::Domain("a mixture needs positive weight".into()));
        }
        let mut matrix = CMatrix::zeros(d, d);
        for (w, amps) in states {
            if amps.len() != d {
                return Err(Error::Dimension { expected: d, found: amps.len() });
            }
            let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if n2 < 1e-24 {
                return Err(Error::Numerical("zero state in mixture".into()));
            }
            let scale = w / total / n2;
            for j in 0..d {
                for k in 0..d {
                    matrix[(j, k)] += amps[j] * amps[k].conj() * scale;
                }
            }
        }
        Self::new(matrix, basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    /// tr ρ²
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn is_pure(&self) -> bool {
        (self.purity() - 1.0).abs() < 1e-10
    }
}

/// Σ_{j≠k} |ρ_jk|
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut sum = 0.0;
    for j in 0..d {
        for k in 0..d {
            if j != k {
                sum += rho.matrix[(j, k)].norm();
            }
        }
    }
    sum
}

/// d − 1 − Σ_{j≠k} √(ρ_jj ρ_kk)
pub fn l1_predictability(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let diag: Vec<f64> = (0..d).map(|j| rho.matrix[(j, j)].re.max(0.0)).collect();
    let mut cross = 0.0;
    for j in 0..d {
        for k in 0..d {
            if j != k {
                cross += (diag[j] * diag[k]).sqrt();
            }
        }
    }
    (d as f64 - 1.0) - cross
}

/// l1 coherence and predictability of a state and the slack of C + P ≤ d − 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplementarityReport {
    pub c_l1: f64,
    pub p_l1: f64,
    pub d: usize,
    pub slack: f64,
    pub pure: bool,
}

impl ComplementarityReport {
    pub fn of(rho: &DensityMatrix) -> Self {
        let c_l1 = l1_coherence(rho);
        let p_l1 = l1_predictability(rho);
        let d = rho.dim();
        Self { c_l1, p_l1, d, slack: (d as f64 - 1.0) - c_l1 - p_l1, pure: rho.is_pure() }
    }
}

/// Closed-form (C_l1, P_l1) of the two-photon state right after the second splitter.
pub fn two_photon_cr_after_bs2(phi_e: f64) -> (f64, f64) {
    let c = SQRT_2 * phi_e.sin().abs() - phi_e.cos() / 2.0 + 0.5;
    let p = -SQRT_2 * phi_e.sin().abs() + phi_e.cos() / 2.0 + 1.5;
    (c, p)
}

/// Closed-form (C_l1, P_l1) of the two-photon state after the last splitter.
pub fn two_photon_cr_after_bs3(phi_e: f64, phi_h: f64) -> (f64, f64) {
    let (ce, ch) = (phi_e.cos(), phi_h.cos());
    let (cm, cp) = ((phi_e - phi_h).cos(), (phi_e + phi_h).cos());
    let s1 = (2.0 * ce + 2.0 * ch - 3.0 * cm + cp + 6.0).max(0.0).sqrt();
    let s2 = (2.0 * ce + 2.0 * ch + cm - 3.0 * cp + 6.0).max(0.0).sqrt();
    let c = (s1 + s2) * (1.0 - ce).max(0.0).sqrt() * (1.0 - ch).max(0.0).sqrt() / 4.0 + s1 * s2 / 8.0;
    (c, 2.0 - c)
}

/// Occupation patterns spanning the fixed-photon-number space of `modes` modes,
/// with the labels used for the basis: one photon → photon in mode k; two photons
/// in two modes → (|20⟩, |02⟩, |11⟩).
pub fn effective_basis(modes: usize, photons: u32) -> Result<Vec<Vec<u32>>> {
    match (modes, photons) {
        (m, 1) if m >= 1 => Ok((0..m)
            .map(|k| {
                let mut o = vec![0; m];
                o[k] = 1;
                o
            })
            .collect()),
        (2, 2) => Ok(vec![vec![2, 0], vec![0, 2], vec![1, 1]]),
        _ => Err(Error::Domain(format!("no effective basis for {photons} photons in {modes} modes"))),
    }
}

/// Amplitudes of a state in the effective basis of the listed modes.
///
/// Every other mode must be empty; weight outside the basis is an error.
pub fn effective_amplitudes(state: &AnalyticState, modes: &[&str], photons: u32) -> Result<(Vec<Complex64>, Vec<String>)> {
    let positions = modes
        .iter()
        .map(|m| {
            state.modes().iter().position(|x| x == m).ok_or_else(|| Error::Domain(format!("state has no mode {m}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let basis = effective_basis(modes.len(), photons)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.len()];
    let mut outside = 0.0;
    for (occ, a) in state.components() {
        let others_empty = occ.iter().enumerate().all(|(k, &n)| positions.contains(&k) || n == 0);
        let local: Vec<u32> = positions.iter().map(|&k| occ[k]).collect();
        match basis.iter().position(|b| *b == local) {
            Some(j) if others_empty => amps[j] += a,
            _ => outside += a.norm_sqr(),
        }
    }
    if outside > 1e-10 {
        return Err(Error::Domain(format!("state has weight {outside} outside the effective basis")));
    }
    let labels = basis
        .iter()
        .map(|o| {
            let digits: String = o.iter().map(|n| n.to_string()).collect();
            format!("|{digits}⟩{}", modes.concat())
        })
        .collect();
    Ok((amps, labels))
}

/// Complementarity report of a pure state restricted to the listed modes.
pub fn report_for_state(state: &AnalyticState, modes: &[&str], photons: u32) -> Result<ComplementarityReport> {
    let (amps, labels) = effective_amplitudes(state, modes, photons)?;
    Ok(ComplementarityReport::of(&DensityMatrix::pure(&amps, labels)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn visibility_edge_cases() {
        assert_eq!(visibility_of(&[0.5; 8]).unwrap(), 0.0);
        assert_eq!(visibility_of(&[0.0, 1.0, 0.5]).unwrap(), 1.0);
        assert!(matches!(visibility_of(&[0.0; 8]), Err(Error::UndefinedVisibility)));
    }

    #[test]
    fn sweep_validation() {
        let pts: Vec<f64> = (0..8).map(|k| k as f64).collect();
        assert!(PhaseSweep::new(PhaseName::PhiE, BTreeMap::new(), pts[..4].to_vec(), "D0", vec![0.5; 4]).is_err());
        assert!(PhaseSweep::new(PhaseName::PhiE, BTreeMap::new(), pts.clone(), "D0", vec![1.5; 8]).is_err());
        let s = PhaseSweep::new(PhaseName::PhiE, BTreeMap::new(), pts, "D0", vec![0.5; 8]).unwrap();
        assert!(bunching_visibility(&s).is_err());
    }

    #[test]
    fn predictability_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(predictability_tr(h, h).unwrap().abs() < 1e-15);
        assert_eq!(predictability_tr(1.0, 0.0).unwrap(), 1.0);
        assert!((predictability_tr(0.96f64.sqrt(), 0.04f64.sqrt()).unwrap() - 0.92).abs() < 1e-12);
        assert!(predictability_tr(1.0, 1.0).is_err());
    }

    #[test]
    fn density_validation() {
        let basis = vec!["0".to_string(), "1".to_string()];
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(bad_trace, basis.clone()).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(negative, basis.clone()).is_err());
        let skew = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(-0.1, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(skew, basis), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn l1_examples() {
        let b3: Vec<String> = ["0", "1", "2"].iter().map(|s| s.to_string()).collect();
        let basis_state = DensityMatrix::pure(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], b3).unwrap();
        assert_eq!(l1_coherence(&basis_state), 0.0);
        assert!((l1_predictability(&basis_state) - 2.0).abs() < 1e-15);
        let b2: Vec<String> = ["0", "1"].iter().map(|s| s.to_string()).collect();
        let uniform = DensityMatrix::new(CMatrix::identity(2, 2) * c(0.5, 0.0), b2).unwrap();
        assert_eq!(l1_coherence(&uniform), 0.0);
        assert!((l1_predictability(&uniform) - 0.0).abs() < 1e-15);
        let report = ComplementarityReport::of(&uniform);
        assert!(!report.pure && report.slack > 0.9);
    }

    #[test]
    fn closed_form_endpoints() {
        let (c0, p0) = two_photon_cr_after_bs2(0.0);
        assert!(c0.abs() < 1e-15 && (p0 - 2.0).abs() < 1e-15);
        let (cpi, ppi) = two_photon_cr_after_bs2(std::f64::consts::PI);
        assert!((cpi - 1.0).abs() < 1e-15 && (ppi - 1.0).abs() < 1e-15);
        let star = 2.0 * (2.0f64 / 3.0).sqrt().asin();
        assert!((two_photon_cr_after_bs2(star).0 - 2.0).abs() < 1e-12);
        // both phases zero leave −i(|20⟩+|02⟩)/√2, a balanced bunched pair
        let (c00, p00) = two_photon_cr_after_bs3(0.0, 0.0);
        assert!((c00 - 1.0).abs() < 1e-12 && (p00 - 1.0).abs() < 1e-12);
    }
}
