//! Propagation of `e^{-t T(x)}` on truncations by two independent routes:
//! the matrix exponential, and the inverse-Laplace contour representation
//! with its residue term. Both certify the explicit decay envelopes.
//!
//! ```
//! use kbm::rep::{RepresentationModel, SeriesKind};
//! use kbm::semigroup::decay_defect;
//! use nalgebra::DVector;
//! use num_complex::Complex64;
//!
//! let rep = RepresentationModel::new(SeriesKind::Principal { s: 0.0 }).unwrap();
//! let n = rep.default_window(65).size();
//! let mut u = DVector::from_element(n, Complex64::new(0.0, 0.0));
//! u[n / 2] = Complex64::new(1.0, 0.0); // unit mass at k = 0
//! let (defect, bound) = decay_defect(&rep, 0.1, 4.0, &u).unwrap();
//! assert!(defect <= bound);
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::operator::{assemble_operator, OperatorSymbol};
use crate::perturbation::convergence_radius;
use crate::rep::{RepresentationModel, SeriesKind, TruncationWindow};
use crate::spectral::{low_eigenvalue, riesz_projection, Contour};

type CVector = DVector<Complex64>;

/// How a propagation result was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PropagationMethod {
    Exponential,
    /// Vertical-line contour `Re zeta = 1/2`, truncated at `|Im zeta| <= L`
    /// with `M` trapezoidal intervals.
    Contour { halflength: f64, nodes: usize },
}

/// The matrix `e^{-t Generator(x)}` on a window; reusable across input vectors.
pub fn propagator_matrix(
    rep: &RepresentationModel,
    x: f64,
    t: f64,
    window: TruncationWindow,
) -> Result<DMatrix<Complex64>> {
    if t < 0.0 {
        return Err(Error::InvalidInput(format!("t must be >= 0, got {t}")));
    }
    let g = assemble_operator(rep, OperatorSymbol::Generator(x), window)?;
    Ok(expm(&(g.entries() * Complex64::new(-t, 0.0))))
}

/// `e^{-t Generator(x)} u` by scaling-and-squaring. Norm non-increasing for
/// real `x` by accretivity of the truncation.
pub fn propagate(
    rep: &RepresentationModel,
    x: f64,
    t: f64,
    u: &CVector,
    window: TruncationWindow,
) -> Result<CVector> {
    if u.len() != window.size() {
        return Err(Error::InvalidInput(format!(
            "input length {} does not match window size {}",
            u.len(),
            window.size()
        )));
    }
    Ok(propagator_matrix(rep, x, t, window)? * u)
}

/// The `|x|` range in which the decay theorem applies: `r_pi / 2` for
/// principal/complementary, `1/(2 sqrt(32))` for discrete series.
pub fn decay_hypothesis_range(rep: &RepresentationModel) -> Result<f64> {
    Ok(convergence_radius(rep)? / 2.0)
}

fn check_decay_hypothesis(rep: &RepresentationModel, x: f64) -> Result<()> {
    let range = decay_hypothesis_range(rep)?;
    if x.abs() > range {
        return Err(Error::Hypothesis(format!(
            "|x| = {} exceeds the decay-theorem range {range}",
            x.abs()
        )));
    }
    Ok(())
}

/// `e^{-t Generator(x)} u` by the inverse-Laplace contour representation:
/// the residue term `e^{-mu t} P u` (absent for discrete series) plus the
/// vertical-line integral of `e^{-zeta t} R(zeta, x)^2 u / t`.
pub fn propagate_contour(
    rep: &RepresentationModel,
    x: f64,
    t: f64,
    u: &CVector,
    window: TruncationWindow,
    halflength: f64,
    nodes: usize,
) -> Result<CVector> {
    if t <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "the contour representation needs t > 0, got {t}"
        )));
    }
    if halflength <= 0.0 || nodes < 2 {
        return Err(Error::InvalidInput(
            "contour truncation needs L > 0 and at least 2 nodes".into(),
        ));
    }
    if rep.kind() == SeriesKind::Trivial {
        return Err(Error::InvalidInput(
            "the contour representation is not defined for the trivial representation".into(),
        ));
    }
    check_decay_hypothesis(rep, x)?;
    if u.len() != window.size() {
        return Err(Error::InvalidInput(format!(
            "input length {} does not match window size {}",
            u.len(),
            window.size()
        )));
    }

    let n = window.size();
    let g = assemble_operator(rep, OperatorSymbol::Generator(x), window)?
        .entries()
        .clone();
    let id = DMatrix::<Complex64>::identity(n, n);

    // residue at the low eigenvalue for principal/complementary series
    let mut result = if rep.kind().is_tempered_line() {
        let mu = low_eigenvalue(rep, x, window)?;
        let p = riesz_projection(rep, x, Contour::canonical(), window)?;
        (&p.matrix * u) * (-mu * t).exp()
    } else {
        CVector::zeros(n)
    };

    // trapezoid on zeta = 1/2 + i s, s in [-L, L]
    let ds = 2.0 * halflength / nodes as f64;
    let mut integral = CVector::zeros(n);
    for j in 0..=nodes {
        let s = -halflength + j as f64 * ds;
        let zeta = Complex64::new(0.5, s);
        let lu = (&g - &id * zeta).lu();
        let r1 = lu
            .solve(u)
            .ok_or_else(|| Error::NonConvergence(format!("resolvent solve failed at {zeta}")))?;
        let r2 = lu
            .solve(&r1)
            .ok_or_else(|| Error::NonConvergence(format!("resolvent solve failed at {zeta}")))?;
        let weight = if j == 0 || j == nodes { 0.5 } else { 1.0 };
        integral += r2 * ((-zeta * t).exp() * weight);
    }
    // (1/t) (1/2 pi i) \int ... dzeta with dzeta = i ds
    result += integral * Complex64::new(ds / (2.0 * std::f64::consts::PI * t), 0.0);
    Ok(result)
}

/// Distance of the propagated vector from its equilibrium projection, with
/// the certified bound: `(4/t) e^{-t/2} ||u||` for principal/complementary
/// series and `(2 / (t (n^2 - 1/2))) e^{-t/2} ||u||` for discrete series.
pub fn decay_defect(
    rep: &RepresentationModel,
    x: f64,
    t: f64,
    u: &CVector,
) -> Result<(f64, f64)> {
    if t <= 0.0 {
        return Err(Error::InvalidInput(format!("t must be > 0, got {t}")));
    }
    check_decay_hypothesis(rep, x)?;
    let window = rep.default_window(u.len());
    if window.size() != u.len() {
        return Err(Error::InvalidInput(format!(
            "no canonical window of size {}",
            u.len()
        )));
    }
    let propagated = propagate(rep, x, t, u, window)?;
    let (defect, bound) = match rep.kind() {
        SeriesKind::DiscreteHolomorphic { n } | SeriesKind::DiscreteAntiHolomorphic { n } => {
            let nf = f64::from(n);
            let bound = 2.0 / (t * (nf * nf - 0.5)) * (-t / 2.0).exp() * u.norm();
            (propagated.norm(), bound)
        }
        _ => {
            let mu = low_eigenvalue(rep, x, window)?;
            let p = riesz_projection(rep, x, Contour::canonical(), window)?;
            let equilibrium = (&p.matrix * u) * (-mu * t).exp();
            let bound = 4.0 / t * (-t / 2.0).exp() * u.norm();
            ((propagated - equilibrium).norm(), bound)
        }
    };
    Ok((defect, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn principal(s: f64) -> RepresentationModel {
        RepresentationModel::new(SeriesKind::Principal { s }).unwrap()
    }

    fn random_unit(n: usize, seed: u64) -> CVector {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut u = CVector::from_fn(n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let norm = u.norm();
        u /= Complex64::new(norm, 0.0);
        u
    }

    #[test]
    fn diagonal_propagation() {
        let rep = principal(0.0);
        let window = rep.default_window(9);
        let mut unit1 = CVector::zeros(window.size());
        unit1[window.index_of(1)] = Complex64::new(1.0, 0.0);
        let t = 0.7;
        let out = propagate(&rep, 0.0, t, &unit1, window).unwrap();
        for (idx, k) in window.ktypes().enumerate() {
            let expected = if k == 1 { (-t).exp() } else { 0.0 };
            assert!((out[idx].re - expected).abs() < 1e-14);
        }

        // kernel vector is fixed
        let mut unit0 = CVector::zeros(window.size());
        unit0[window.index_of(0)] = Complex64::new(1.0, 0.0);
        let out = propagate(&rep, 0.0, 3.0, &unit0, window).unwrap();
        assert!((out - unit0).norm() < 1e-14);
    }

    #[test]
    fn contraction_and_semigroup_law() {
        let rep = principal(1.0);
        let window = rep.default_window(33);
        for seed in 0..5 {
            let u = random_unit(window.size(), seed);
            for x in [0.0, 0.15, -0.3] {
                let half = propagate(&rep, x, 0.8, &u, window).unwrap();
                let full_split = propagate(&rep, x, 0.9, &half, window).unwrap();
                let full = propagate(&rep, x, 1.7, &u, window).unwrap();
                assert!((full - &full_split).norm() < 1e-9);
                assert!(half.norm() <= u.norm() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn decay_defect_within_bound() {
        let rep = principal(0.0);
        let window = rep.default_window(65);
        let u = random_unit(window.size(), 9);
        let (defect, bound) = decay_defect(&rep, 0.15, 8.0, &u).unwrap();
        let expected_bound = 0.5 * (-4f64).exp();
        assert!((bound - expected_bound).abs() < 1e-12);
        assert!(defect <= bound, "{defect} > {bound}");
        let _ = window;
    }

    #[test]
    fn discrete_series_norm_decay() {
        let rep = RepresentationModel::new(SeriesKind::DiscreteHolomorphic { n: 2 }).unwrap();
        let window = rep.default_window(33);
        let u = random_unit(window.size(), 4);
        let out = propagate_contour(&rep, 0.05, 4.0, &u, window, 200.0, 4096).unwrap();
        let bound = 2.0 / (4.0 * 3.5) * (-2f64).exp();
        assert!(out.norm() <= bound, "{} > {bound}", out.norm());
    }

    #[test]
    fn cross_method_agreement() {
        let rep = principal(0.0);
        let window = rep.default_window(33);
        let u = random_unit(window.size(), 2);
        let x = 0.1;
        let exponential = propagate(&rep, x, 2.0, &u, window).unwrap();
        let contour = propagate_contour(&rep, x, 2.0, &u, window, 200.0, 4096).unwrap();
        assert!(
            (exponential - &contour).norm() < 1e-6,
            "methods disagree by {:.3e}",
            (propagate(&rep, x, 2.0, &u, window).unwrap() - contour).norm()
        );
    }

    #[test]
    fn contour_kernel_vector() {
        let rep = principal(0.0);
        let window = rep.default_window(17);
        let mut unit0 = CVector::zeros(window.size());
        unit0[window.index_of(0)] = Complex64::new(1.0, 0.0);
        let out = propagate_contour(&rep, 0.0, 2.0, &unit0, window, 200.0, 4096).unwrap();
        assert!((out - &unit0).norm() < 1e-6);
    }

    #[test]
    fn hypothesis_rejection() {
        let rep = principal(0.0);
        let window = rep.default_window(17);
        let u = random_unit(window.size(), 1);
        let r = convergence_radius(&rep).unwrap();
        let err = propagate_contour(&rep, 0.9 * r, 1.0, &u, window, 100.0, 256);
        assert!(matches!(err, Err(Error::Hypothesis(_))));
    }
}
