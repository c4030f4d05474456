//! Irreducible unitary representations of PSL(2,R) in their K-type basis.
//!
//! A representation is determined by its series and parameter. The Casimir
//! scalar classifies the series:
//!
//! * principal: `1 + s^2` with `s >= 0`, K-types all of `Z`,
//! * complementary: `1 - s^2` with `s` in `(0,1)`, K-types all of `Z`,
//! * discrete: `1 - (2n-1)^2` with `n >= 1`, K-types `{k >= n}` or `{k <= -n}`,
//! * trivial: a one-dimensional space on which everything acts by zero.
//!
//! The raising operator couples neighbouring K-types with strength
//! `c_k = sqrt((2k+1)^2 + lambda - 1) / 2`, which vanishes exactly at the
//! edge of a discrete series.
//!
//! ```
//! use kbm::rep::{RepresentationModel, SeriesKind};
//!
//! let principal = RepresentationModel::new(SeriesKind::Principal { s: 0.0 }).unwrap();
//! assert_eq!(principal.casimir(), 1.0);
//! assert_eq!(principal.coupling(0).unwrap(), 0.5);
//!
//! let discrete = RepresentationModel::new(SeriesKind::DiscreteHolomorphic { n: 2 }).unwrap();
//! assert_eq!(discrete.casimir(), -8.0);
//! // the ladder terminates below the lowest weight
//! assert_eq!(discrete.coupling(1).unwrap(), 0.0);
//!
//! // Laplace eigenvalues select the series through lambda = 4 eta
//! let rep = RepresentationModel::from_laplace_eigenvalue(1.25).unwrap();
//! assert!(matches!(rep.kind(), SeriesKind::Principal { .. }));
//! assert_eq!(rep.casimir(), 5.0);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Series label together with its defining parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SeriesKind {
    Principal { s: f64 },
    Complementary { s: f64 },
    DiscreteHolomorphic { n: u32 },
    DiscreteAntiHolomorphic { n: u32 },
    Trivial,
}

impl SeriesKind {
    /// The Casimir scalar of the series.
    pub fn casimir(&self) -> f64 {
        match *self {
            SeriesKind::Principal { s } => 1.0 + s * s,
            SeriesKind::Complementary { s } => 1.0 - s * s,
            SeriesKind::DiscreteHolomorphic { n } | SeriesKind::DiscreteAntiHolomorphic { n } => {
                let m = 2.0 * f64::from(n) - 1.0;
                1.0 - m * m
            }
            SeriesKind::Trivial => 0.0,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            SeriesKind::DiscreteHolomorphic { .. } | SeriesKind::DiscreteAntiHolomorphic { .. }
        )
    }

    pub fn is_tempered_line(&self) -> bool {
        matches!(
            self,
            SeriesKind::Principal { .. } | SeriesKind::Complementary { .. }
        )
    }
}

/// The K-type index set of a representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KTypeSet {
    /// All integers (principal and complementary series).
    AllIntegers,
    /// `{k : k >= n}` (holomorphic discrete series).
    AtLeast(i64),
    /// `{k : k <= -n}` (anti-holomorphic discrete series).
    AtMost(i64),
    /// The single index 0 (trivial representation).
    Singleton,
}

impl KTypeSet {
    pub fn contains(&self, k: i64) -> bool {
        match *self {
            KTypeSet::AllIntegers => true,
            KTypeSet::AtLeast(n) => k >= n,
            KTypeSet::AtMost(n) => k <= n,
            KTypeSet::Singleton => k == 0,
        }
    }
}

/// A contiguous window `[kmin, kmax]` of K-types used for truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationWindow {
    pub kmin: i64,
    pub kmax: i64,
}

impl TruncationWindow {
    pub fn new(kmin: i64, kmax: i64) -> Result<Self> {
        if kmin > kmax {
            return Err(Error::InvalidInput(format!(
                "window kmin={kmin} exceeds kmax={kmax}"
            )));
        }
        Ok(Self { kmin, kmax })
    }

    /// Symmetric window `[-m, m]` of odd size `2m + 1`.
    pub fn symmetric(m: i64) -> Self {
        Self { kmin: -m, kmax: m }
    }

    pub fn size(&self) -> usize {
        (self.kmax - self.kmin + 1) as usize
    }

    pub fn contains(&self, k: i64) -> bool {
        self.kmin <= k && k <= self.kmax
    }

    /// Row/column index of K-type `k` inside the window.
    pub fn index_of(&self, k: i64) -> usize {
        debug_assert!(self.contains(k));
        (k - self.kmin) as usize
    }

    pub fn ktypes(&self) -> impl Iterator<Item = i64> {
        self.kmin..=self.kmax
    }
}

/// A concrete model of an irreducible unitary representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentationModel {
    kind: SeriesKind,
    casimir: f64,
    ktypes: KTypeSet,
}

impl RepresentationModel {
    /// Build the model, validating the parameter ranges of the series.
    pub fn new(kind: SeriesKind) -> Result<Self> {
        match kind {
            SeriesKind::Principal { s } => {
                if s.is_nan() || s < 0.0 || !s.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "principal series requires s >= 0, got {s}"
                    )));
                }
            }
            SeriesKind::Complementary { s } => {
                if !(s > 0.0 && s < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "complementary series requires s in (0,1), got {s}"
                    )));
                }
            }
            SeriesKind::DiscreteHolomorphic { n } | SeriesKind::DiscreteAntiHolomorphic { n } => {
                if n < 1 {
                    return Err(Error::InvalidInput(format!(
                        "discrete series requires n >= 1, got {n}"
                    )));
                }
            }
            SeriesKind::Trivial => {}
        }
        let ktypes = match kind {
            SeriesKind::Principal { .. } | SeriesKind::Complementary { .. } => KTypeSet::AllIntegers,
            SeriesKind::DiscreteHolomorphic { n } => KTypeSet::AtLeast(i64::from(n)),
            SeriesKind::DiscreteAntiHolomorphic { n } => KTypeSet::AtMost(-i64::from(n)),
            SeriesKind::Trivial => KTypeSet::Singleton,
        };
        Ok(Self {
            kind,
            casimir: kind.casimir(),
            ktypes,
        })
    }

    /// Principal if `4 eta >= 1`, complementary otherwise; inverts `eta = lambda / 4`.
    pub fn from_laplace_eigenvalue(eta: f64) -> Result<Self> {
        if eta.is_nan() || eta <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "positive Laplace eigenvalue required, got {eta}"
            )));
        }
        let lambda = 4.0 * eta;
        if lambda >= 1.0 {
            Self::new(SeriesKind::Principal {
                s: (lambda - 1.0).sqrt(),
            })
        } else {
            Self::new(SeriesKind::Complementary {
                s: (1.0 - lambda).sqrt(),
            })
        }
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    /// The Casimir scalar `lambda_pi`.
    pub fn casimir(&self) -> f64 {
        self.casimir
    }

    pub fn ktypes(&self) -> KTypeSet {
        self.ktypes
    }

    /// Coupling coefficient `c_k` of the transition `k -> k+1`.
    ///
    /// Valid when both `k` and `k+1` lie in the K-type set, and additionally at
    /// the edge transition of a discrete series where it evaluates to exactly 0.
    pub fn coupling(&self, k: i64) -> Result<f64> {
        let interior = self.ktypes.contains(k) && self.ktypes.contains(k + 1);
        let edge = match self.ktypes {
            // k = n - 1 is one below the lower edge; the raised index is inside.
            KTypeSet::AtLeast(n) => k == n - 1,
            // k = -n is the upper edge; raising leaves the set.
            KTypeSet::AtMost(n) => k == n,
            _ => false,
        };
        if !interior && !edge {
            return Err(Error::InvalidInput(format!(
                "transition {k} -> {} leaves the K-type set",
                k + 1
            )));
        }
        let m = (2 * k + 1) as f64;
        let radicand = m * m + self.casimir - 1.0;
        // Edge transitions have radicand exactly 0; clamp rounding noise.
        Ok(0.5 * radicand.max(0.0).sqrt())
    }

    /// Check that a window lies inside the K-type set.
    pub fn validate_window(&self, window: TruncationWindow) -> Result<()> {
        if self.ktypes.contains(window.kmin) && self.ktypes.contains(window.kmax) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "window [{}, {}] leaves the K-type set {:?}",
                window.kmin, window.kmax, self.ktypes
            )))
        }
    }

    /// The canonical window of a given size: symmetric around 0 for
    /// principal/complementary, anchored at the edge for discrete series.
    pub fn default_window(&self, size: usize) -> TruncationWindow {
        let size = size.max(1) as i64;
        match self.ktypes {
            KTypeSet::AllIntegers => {
                let m = size / 2;
                TruncationWindow::symmetric(m)
            }
            KTypeSet::AtLeast(n) => TruncationWindow {
                kmin: n,
                kmax: n + size - 1,
            },
            KTypeSet::AtMost(n) => TruncationWindow {
                kmin: n - size + 1,
                kmax: n,
            },
            KTypeSet::Singleton => TruncationWindow { kmin: 0, kmax: 0 },
        }
    }
}
