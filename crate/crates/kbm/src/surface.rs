//! Surface-level assembly: the decomposition registry of `L^2(SM)` built
//! from genus and Laplace-spectrum data, and the equilibrium expansion of the
//! rescaled propagator with its certified residual bound.
//!
//! Laplace spectra are input data; a synthetic sample ships with the
//! repository for demonstrations.
//!
//! ```
//! use kbm::surface::{build_registry, SurfaceData};
//!
//! let surface = SurfaceData {
//!     genus: 2,
//!     laplace_spectrum: vec![(0.0, 1), (0.25, 1)],
//! };
//! let registry = build_registry(&surface, 1.0, 3).unwrap();
//! // trivial, one tempered entry, and both chiralities for n = 1, 2, 3
//! assert_eq!(registry.entries.len(), 8);
//! let discrete: Vec<u32> = registry.entries.iter()
//!     .filter(|e| e.rep.kind().is_discrete())
//!     .map(|e| e.multiplicity)
//!     .collect();
//! assert_eq!(discrete, vec![2, 2, 3, 3, 5, 5]);
//! ```

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rep::{KTypeSet, RepresentationModel, SeriesKind, TruncationWindow};
use crate::semigroup::propagator_matrix;
use crate::spectral::{low_eigenvalue, riesz_projection, Contour};

type CVector = DVector<Complex64>;

/// Genus and Laplace spectrum of a compact orientable hyperbolic surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceData {
    pub genus: u32,
    /// `(eigenvalue, multiplicity)` pairs, strictly increasing, starting at `(0, 1)`.
    pub laplace_spectrum: Vec<(f64, u32)>,
}

impl SurfaceData {
    pub fn validate(&self) -> Result<()> {
        if self.genus < 2 {
            return Err(Error::InvalidInput(format!(
                "genus must be >= 2 for constant curvature -1, got {}",
                self.genus
            )));
        }
        match self.laplace_spectrum.first() {
            Some(&(eta, mult)) if eta == 0.0 && mult == 1 => {}
            _ => {
                return Err(Error::InvalidInput(
                    "the Laplace spectrum must start with (0, 1)".into(),
                ))
            }
        }
        for pair in self.laplace_spectrum.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidInput(format!(
                    "Laplace eigenvalues must be strictly increasing ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if self.laplace_spectrum.iter().any(|&(_, m)| m < 1) {
            return Err(Error::InvalidInput(
                "multiplicities must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let surface: SurfaceData = serde_json::from_str(text)?;
        surface.validate()?;
        Ok(surface)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Smallest nonzero Laplace eigenvalue (the spectral gap).
    pub fn spectral_gap(&self) -> Option<f64> {
        self.laplace_spectrum
            .iter()
            .map(|&(eta, _)| eta)
            .find(|&eta| eta > 0.0)
    }
}

/// One representation instance occurring in `L^2(SM)`.
#[derive(Debug, Clone)]
pub struct RegistryEntry {
    pub rep: RepresentationModel,
    pub multiplicity: u32,
    /// The Laplace eigenvalue `lambda / 4` for principal/complementary
    /// entries and `0` for the trivial entry; absent for discrete series.
    pub eta: Option<f64>,
}

/// The representations with multiplicities occurring in `L^2(SM)`, up to the
/// chosen cutoffs.
#[derive(Debug, Clone)]
pub struct DecompositionRegistry {
    pub entries: Vec<RegistryEntry>,
    pub eta_max: f64,
    pub discrete_n_max: u32,
}

/// Assemble the registry: the trivial representation once, one
/// principal/complementary entry per Laplace eigenvalue `0 < eta <= eta_max`
/// with the Laplace multiplicity, and both chiralities of the discrete series
/// for `1 <= n <= discrete_n_max` with multiplicity `g` for `n = 1` and
/// `(2n - 1)(g - 1)` for `n >= 2`.
pub fn build_registry(
    surface: &SurfaceData,
    eta_max: f64,
    discrete_n_max: u32,
) -> Result<DecompositionRegistry> {
    surface.validate()?;
    if eta_max < 0.0 {
        return Err(Error::InvalidInput(format!(
            "eta_max must be >= 0, got {eta_max}"
        )));
    }
    let mut entries = vec![RegistryEntry {
        rep: RepresentationModel::new(SeriesKind::Trivial)?,
        multiplicity: 1,
        eta: Some(0.0),
    }];
    for &(eta, mult) in &surface.laplace_spectrum {
        if eta > 0.0 && eta <= eta_max {
            entries.push(RegistryEntry {
                rep: RepresentationModel::from_laplace_eigenvalue(eta)?,
                multiplicity: mult,
                eta: Some(eta),
            });
        }
    }
    let g = i64::from(surface.genus);
    for n in 1..=discrete_n_max {
        let mult = if n == 1 {
            g
        } else {
            (2 * i64::from(n) - 1) * (g - 1)
        } as u32;
        for kind in [
            SeriesKind::DiscreteHolomorphic { n },
            SeriesKind::DiscreteAntiHolomorphic { n },
        ] {
            entries.push(RegistryEntry {
                rep: RepresentationModel::new(kind)?,
                multiplicity: mult,
                eta: None,
            });
        }
    }
    Ok(DecompositionRegistry {
        entries,
        eta_max,
        discrete_n_max,
    })
}

/// One coefficient of a section, in the file format of the CLI.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub entry: usize,
    pub copy: u32,
    pub k: i64,
    pub re: f64,
    pub im: f64,
}

/// A finitely supported coefficient map indexing a function on `SM` by
/// (registry entry, copy index, K-type).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SectionCoefficients {
    amplitudes: BTreeMap<(usize, u32, i64), Complex64>,
}

impl SectionCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, entry: usize, copy: u32, k: i64, value: Complex64) {
        if value == Complex64::new(0.0, 0.0) {
            self.amplitudes.remove(&(entry, copy, k));
        } else {
            self.amplitudes.insert((entry, copy, k), value);
        }
    }

    pub fn get(&self, entry: usize, copy: u32, k: i64) -> Complex64 {
        self.amplitudes
            .get(&(entry, copy, k))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, u32, i64), &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Parseval norm: square root of the sum of squared amplitudes.
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .values()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Aggregated Sobolev norm of order `alpha` across all blocks, using the
    /// exact diagonal weight of each representation.
    pub fn sobolev_norm(&self, registry: &DecompositionRegistry, alpha: f64) -> Result<f64> {
        let mut sum = 0.0;
        for (&(entry, _, k), amplitude) in &self.amplitudes {
            let rep = self.entry_rep(registry, entry)?;
            let kf = k as f64;
            let weight = (1.0 + rep.casimir() / 4.0 + 2.0 * kf * kf).powf(alpha);
            sum += amplitude.norm_sqr() * weight;
        }
        Ok(sum.sqrt())
    }

    fn entry_rep(
        &self,
        registry: &DecompositionRegistry,
        entry: usize,
    ) -> Result<RepresentationModel> {
        registry
            .entries
            .get(entry)
            .map(|e| e.rep)
            .ok_or_else(|| Error::InvalidInput(format!("entry index {entry} out of range")))
    }

    /// Validate indices against a registry: entry in range, copy below the
    /// multiplicity, K-type inside the entry's index set.
    pub fn validate(&self, registry: &DecompositionRegistry) -> Result<()> {
        for &(entry, copy, k) in self.amplitudes.keys() {
            let e = registry
                .entries
                .get(entry)
                .ok_or_else(|| Error::InvalidInput(format!("entry index {entry} out of range")))?;
            if copy >= e.multiplicity {
                return Err(Error::InvalidInput(format!(
                    "copy index {copy} reaches the multiplicity {} of entry {entry}",
                    e.multiplicity
                )));
            }
            if !e.rep.ktypes().contains(k) {
                return Err(Error::InvalidInput(format!(
                    "K-type {k} is outside the index set of entry {entry}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<CoefficientRecord> = serde_json::from_str(text)?;
        let mut section = Self::new();
        for r in records {
            section.set(r.entry, r.copy, r.k, Complex64::new(r.re, r.im));
        }
        Ok(section)
    }

    pub fn to_json(&self) -> String {
        let records: Vec<CoefficientRecord> = self
            .amplitudes
            .iter()
            .map(|(&(entry, copy, k), a)| CoefficientRecord {
                entry,
                copy,
                k,
                re: a.re,
                im: a.im,
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("serializable")
    }
}

/// Result of the equilibrium expansion.
#[derive(Debug, Clone)]
pub struct EquilibriumExpansion {
    /// The finite spectral sum approximating `e^{-t P_gamma} f`.
    pub approximation: SectionCoefficients,
    /// `epsilon + (8 / (gamma^2 t)) e^{-gamma^2 t / 4} ||f||`.
    pub residual_bound: f64,
    /// Norm of the difference between the per-entry propagation of `f` and
    /// the approximation.
    pub actual_residual: f64,
}

/// Threshold on `gamma` for the expansion hypotheses.
pub fn expansion_gamma_threshold(c: f64, epsilon: f64) -> f64 {
    (4.0 * (4.0 * c / epsilon + 6.0).sqrt()).max(4.0 * 32f64.sqrt())
}

fn block_window(rep: &RepresentationModel, support: &[i64], minimum: usize) -> TruncationWindow {
    let margin = 16;
    match rep.ktypes() {
        KTypeSet::AllIntegers => {
            let need = support.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0) as i64;
            TruncationWindow::symmetric(need.max(minimum as i64 / 2) + margin)
        }
        KTypeSet::AtLeast(n) => {
            let top = support.iter().copied().max().unwrap_or(n);
            TruncationWindow {
                kmin: n,
                kmax: top.max(n + minimum as i64 - 1) + margin,
            }
        }
        KTypeSet::AtMost(n) => {
            let bottom = support.iter().copied().min().unwrap_or(n);
            TruncationWindow {
                kmin: bottom.min(n - minimum as i64 + 1) - margin,
                kmax: n,
            }
        }
        KTypeSet::Singleton => TruncationWindow { kmin: 0, kmax: 0 },
    }
}

/// Evaluate the equilibrium expansion of `e^{-t P_gamma} f` and its residual.
///
/// The approximation keeps the trivial component and, for every registry
/// entry with `eta <= C / epsilon`, the term
/// `e^{-t lambda_eta(gamma)} P_eta(2/gamma) f_eta` per copy. The actual
/// residual propagates every component of `f` (discrete entries included)
/// with the restricted semigroup `e^{-(t gamma^2 / 2) T(2/gamma)}` and
/// differences against the approximation.
pub fn equilibrium_expansion(
    registry: &DecompositionRegistry,
    f: &SectionCoefficients,
    gamma: f64,
    t: f64,
    epsilon: f64,
    c: f64,
) -> Result<EquilibriumExpansion> {
    if epsilon <= 0.0 || c <= 0.0 || t <= 0.0 {
        return Err(Error::InvalidInput(
            "epsilon, C and t must all be positive".into(),
        ));
    }
    f.validate(registry)?;
    let sobolev = f.sobolev_norm(registry, 2.0)?;
    if sobolev > c {
        return Err(Error::Hypothesis(format!(
            "Sobolev norm {sobolev:.6} of f exceeds the bound C = {c}"
        )));
    }
    let threshold = expansion_gamma_threshold(c, epsilon);
    if gamma <= threshold {
        return Err(Error::Hypothesis(format!(
            "gamma = {gamma} must exceed max(4 sqrt(4 C/eps + 6), 4 sqrt(32)) = {threshold}"
        )));
    }

    let x = 2.0 / gamma;
    let eta_cut = c / epsilon;
    let rescaled_t = t * gamma * gamma / 2.0;

    // group the support of f by (entry, copy)
    let mut blocks: BTreeMap<(usize, u32), Vec<i64>> = BTreeMap::new();
    for (&(entry, copy, k), _) in f.iter() {
        blocks.entry((entry, copy)).or_default().push(k);
    }

    let mut approximation = SectionCoefficients::new();
    let mut residual_sq = 0.0;

    for ((entry, copy), support) in blocks {
        let info = &registry.entries[entry];
        let rep = info.rep;
        let window = block_window(&rep, &support, 65);
        let n = window.size();
        let mut vec = CVector::zeros(n);
        for &k in &support {
            vec[window.index_of(k)] = f.get(entry, copy, k);
        }

        // actual propagation of this block
        let actual = if rep.kind() == SeriesKind::Trivial {
            vec.clone()
        } else {
            propagator_matrix(&rep, x, rescaled_t, window)? * &vec
        };

        // approximation term, when the entry is kept
        let approx: CVector = match (rep.kind(), info.eta) {
            (SeriesKind::Trivial, _) => vec.clone(),
            (kind, Some(eta)) if kind.is_tempered_line() && eta <= eta_cut => {
                let mu = low_eigenvalue(&rep, x, window)?;
                let lambda = mu * gamma * gamma / 2.0;
                let p = riesz_projection(&rep, x, Contour::canonical(), window)?;
                (&p.matrix * &vec) * (-lambda * t).exp()
            }
            _ => CVector::zeros(n),
        };

        residual_sq += (&actual - &approx).norm_squared();
        for (idx, k) in window.ktypes().enumerate() {
            if approx[idx] != Complex64::new(0.0, 0.0) {
                approximation.set(entry, copy, k, approx[idx]);
            }
        }
    }

    let f_norm = f.norm();
    let residual_bound =
        epsilon + 8.0 / (gamma * gamma * t) * (-gamma * gamma * t / 4.0).exp() * f_norm;
    Ok(EquilibriumExpansion {
        approximation,
        residual_bound,
        actual_residual: residual_sq.sqrt(),
    })
}

/// The explicit distance-to-equilibrium bound, with a user-supplied leading
/// constant `C0` (its existence comes from the Weyl law; its value is an
/// input, not a derived quantity).
#[derive(Debug, Clone, Copy)]
pub struct EquilibriumDistanceBound {
    pub value: f64,
    /// Set when `B <= 1 / eta_1`, in which case the middle term does not
    /// decay in `t`.
    pub nondecaying: bool,
}

#[allow(clippy::too_many_arguments)] // it evaluates an explicit seven-parameter formula
pub fn equilibrium_distance_bound(
    surface: &SurfaceData,
    c: f64,
    epsilon: f64,
    b: f64,
    gamma: f64,
    t: f64,
    c0: f64,
    f_norm: f64,
) -> Result<EquilibriumDistanceBound> {
    surface.validate()?;
    if c <= 0.0 || epsilon <= 0.0 || b < 1.0 || c0 < 0.0 || t <= 0.0 || f_norm < 0.0 {
        return Err(Error::InvalidInput(
            "require C > 0, epsilon > 0, B >= 1, C0 >= 0, t > 0, f_norm >= 0".into(),
        ));
    }
    let eta1 = surface.spectral_gap().ok_or_else(|| {
        Error::InvalidInput("the surface spectrum has no nonzero eigenvalue".into())
    })?;
    let threshold = (4.0 * b * (4.0 * c / epsilon + 6.0).powf(1.5)).max(4.0 * 32f64.sqrt());
    if gamma <= threshold {
        return Err(Error::Hypothesis(format!(
            "gamma = {gamma} must exceed max(4 B (4 C/eps + 6)^(3/2), 4 sqrt(32)) = {threshold}"
        )));
    }
    let rate = eta1 - 1.0 / b;
    let value = epsilon
        + c0 * c / epsilon * (-t * rate).exp() * f_norm
        + 8.0 / (gamma * gamma * t) * (-gamma * gamma * t / 4.0).exp() * f_norm;
    Ok(EquilibriumDistanceBound {
        value,
        nondecaying: rate <= 0.0,
    })
}
