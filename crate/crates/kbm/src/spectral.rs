//! Spectra of truncated generators, resolvent norm probes, Riesz projections
//! by contour quadrature, and isolation of the low eigenvalue.
//!
//! ```
//! use kbm::rep::{RepresentationModel, SeriesKind};
//! use kbm::spectral::{riesz_projection, Contour};
//!
//! let rep = RepresentationModel::new(SeriesKind::Principal { s: 0.0 }).unwrap();
//! let window = rep.default_window(65);
//! // canonical contour: the circle |zeta| = 1/2
//! let p = riesz_projection(&rep, 0.15, Contour::canonical(), window).unwrap();
//! assert!(p.idempotency_defect < 1e-8);
//! assert_eq!(p.rank_estimate, 1);
//! assert!(p.norm() <= 2.0);
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eigen;
use crate::error::{Error, Result};
use crate::operator::{assemble_operator, OperatorMatrix, OperatorSymbol};
use crate::rep::{RepresentationModel, SeriesKind, TruncationWindow};

/// Minimum allowed distance between a probe point and the truncated spectrum.
pub const SINGULARITY_STANDOFF: f64 = 1e-8;

/// Doubling schedule of window sizes for truncation consistency checks.
pub const WINDOW_SCHEDULE: [usize; 5] = [33, 65, 129, 257, 513];

/// All eigenvalues of a truncated operator.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending by real part, ties by imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Unit right eigenvectors as columns, when requested.
    pub eigenvectors: Option<DMatrix<Complex64>>,
    pub window: TruncationWindow,
    /// `max || T v - lambda v ||` over the returned unit pairs.
    pub residual_bound: Option<f64>,
}

/// Full spectrum of the truncated matrix, with eigenvectors and residuals.
pub fn eigen_spectrum(matrix: &OperatorMatrix) -> Result<SpectrumResult> {
    let d = eigen::decompose(matrix.entries(), true)?;
    Ok(SpectrumResult {
        eigenvalues: d.values,
        eigenvectors: d.vectors,
        window: matrix.window(),
        residual_bound: d.residual_bound,
    })
}

fn generator(
    rep: &RepresentationModel,
    x: f64,
    window: TruncationWindow,
) -> Result<DMatrix<Complex64>> {
    Ok(assemble_operator(rep, OperatorSymbol::Generator(x), window)?
        .entries()
        .clone())
}

/// Operator norm of `(Generator(x) - zeta)^(-1)` on the truncation, computed
/// as the reciprocal of the smallest singular value.
pub fn resolvent_norm(
    rep: &RepresentationModel,
    zeta: Complex64,
    x: f64,
    window: TruncationWindow,
) -> Result<f64> {
    let g = generator(rep, x, window)?;
    let spectrum = eigen::eigenvalues(&g)?;
    let dist = spectrum
        .iter()
        .map(|l| (l - zeta).norm())
        .fold(f64::INFINITY, f64::min);
    if dist < SINGULARITY_STANDOFF {
        return Err(Error::NearSpectrum {
            zeta,
            distance: dist,
        });
    }
    let n = window.size();
    let shifted = &g - DMatrix::from_diagonal_element(n, n, zeta);
    let svd = shifted.svd(false, false);
    let sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(1.0 / sigma_min)
}

/// Certified a-priori resolvent bound on the half-plane `Re zeta <= 1/2`.
///
/// For the principal/complementary series under `|zeta| >= 1/2` and
/// `|x| < (lambda + 6)^(-1/2)` the bound is
/// `|zeta|^(-1) (1 - |x| sqrt(lambda + 6))^(-1)`; for the discrete series
/// under `|x| < 1/sqrt(32)` it is
/// `|zeta - n^2|^(-1) (1 - |x| sqrt(32))^(-1)`.
pub fn resolvent_bound(rep: &RepresentationModel, zeta: Complex64, x: f64) -> Result<f64> {
    if zeta.re > 0.5 {
        return Err(Error::Hypothesis(format!(
            "the bound requires Re zeta <= 1/2, got {}",
            zeta.re
        )));
    }
    match rep.kind() {
        SeriesKind::Principal { .. } | SeriesKind::Complementary { .. } => {
            let root = (rep.casimir() + 6.0).sqrt();
            if zeta.norm() < 0.5 {
                return Err(Error::Hypothesis(format!(
                    "the bound requires |zeta| >= 1/2, got {}",
                    zeta.norm()
                )));
            }
            if x.abs() * root >= 1.0 {
                return Err(Error::Hypothesis(format!(
                    "the bound requires |x| < (lambda + 6)^(-1/2) = {}",
                    1.0 / root
                )));
            }
            Ok(1.0 / (zeta.norm() * (1.0 - x.abs() * root)))
        }
        SeriesKind::DiscreteHolomorphic { n } | SeriesKind::DiscreteAntiHolomorphic { n } => {
            let root = 32f64.sqrt();
            if x.abs() * root >= 1.0 {
                return Err(Error::Hypothesis(format!(
                    "the bound requires |x| < 1/sqrt(32) = {}",
                    1.0 / root
                )));
            }
            let n2 = (i64::from(n) * i64::from(n)) as f64;
            Ok(1.0 / ((zeta - n2).norm() * (1.0 - x.abs() * root)))
        }
        SeriesKind::Trivial => Err(Error::InvalidInput(
            "no resolvent bound for the trivial representation".into(),
        )),
    }
}

/// Operator norm of a complex matrix (largest singular value).
pub fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Circular contour for Riesz projections.
#[derive(Debug, Clone, Copy)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
    /// Initial trapezoidal node count; doubled until convergence.
    pub nodes: usize,
}

impl Contour {
    /// The canonical `|zeta| = 1/2` circle isolating the low eigenvalue.
    pub fn canonical() -> Self {
        Self {
            center: Complex64::new(0.0, 0.0),
            radius: 0.5,
            nodes: 32,
        }
    }
}

/// A Riesz projector obtained by contour quadrature, with diagnostics.
#[derive(Debug, Clone)]
pub struct RieszProjector {
    pub matrix: DMatrix<Complex64>,
    pub contour: Contour,
    /// Node count of the converged quadrature.
    pub nodes_used: usize,
    /// `|| P^2 - P ||` in operator norm.
    pub idempotency_defect: f64,
    /// Number of singular values of `P` above 1/2.
    pub rank_estimate: usize,
}

impl RieszProjector {
    pub fn norm(&self) -> f64 {
        operator_norm(&self.matrix)
    }
}

const QUADRATURE_NODE_CAP: usize = 512;
const QUADRATURE_TOL: f64 = 1e-10;
const CONTOUR_STANDOFF: f64 = 1e-6;

fn contour_quadrature(
    g: &DMatrix<Complex64>,
    contour: &Contour,
    nodes: usize,
) -> DMatrix<Complex64> {
    let n = g.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..nodes {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
        let dir = Complex64::new(theta.cos(), theta.sin());
        let zeta = contour.center + contour.radius * dir;
        let resolvent = (g - &id * zeta)
            .lu()
            .solve(&id)
            .expect("standoff check keeps the shifted matrix invertible");
        sum += resolvent * dir;
    }
    // P = -(1/2 pi i) sum R(zeta_j) i rho e^{i theta_j} (2 pi / m)
    sum * Complex64::new(-contour.radius / nodes as f64, 0.0)
}

/// Riesz projection `P = -(1/2 pi i) \oint R(zeta, x) dzeta` over a circle,
/// by trapezoidal quadrature with node doubling.
pub fn riesz_projection(
    rep: &RepresentationModel,
    x: f64,
    contour: Contour,
    window: TruncationWindow,
) -> Result<RieszProjector> {
    let g = generator(rep, x, window)?;
    let spectrum = eigen::eigenvalues(&g)?;
    let mut offending = f64::INFINITY;
    for l in &spectrum {
        offending = offending.min(((l - contour.center).norm() - contour.radius).abs());
    }
    if offending < CONTOUR_STANDOFF {
        return Err(Error::NearSpectrum {
            zeta: contour.center + Complex64::new(contour.radius, 0.0),
            distance: offending,
        });
    }

    let mut nodes = contour.nodes.max(4);
    let mut p = contour_quadrature(&g, &contour, nodes);
    loop {
        if nodes * 2 > QUADRATURE_NODE_CAP {
            let defect = operator_norm(&(&p * &p - &p));
            return Err(Error::NonConvergence(format!(
                "projector quadrature not converged at the {QUADRATURE_NODE_CAP}-node cap \
                 (idempotency defect {defect:.3e})"
            )));
        }
        let refined = contour_quadrature(&g, &contour, nodes * 2);
        let delta = (&refined - &p).norm();
        nodes *= 2;
        p = refined;
        if delta < QUADRATURE_TOL {
            break;
        }
    }

    let idempotency_defect = operator_norm(&(&p * &p - &p));
    let rank_estimate = p
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > 0.5)
        .count();
    Ok(RieszProjector {
        matrix: p,
        contour,
        nodes_used: nodes,
        idempotency_defect,
        rank_estimate,
    })
}

/// The unique eigenvalue of the truncated generator with `Re <= 1/2`.
///
/// Requires a principal or complementary series and `|x|` below the
/// convergence radius; a count other than one in the half plane signals a
/// window that is too small or an out-of-range `x`.
pub fn low_eigenvalue(
    rep: &RepresentationModel,
    x: f64,
    window: TruncationWindow,
) -> Result<Complex64> {
    if !rep.kind().is_tempered_line() {
        return Err(Error::InvalidInput(
            "low eigenvalue tracking requires a principal or complementary series".into(),
        ));
    }
    let g = generator(rep, x, window)?;
    let spectrum = eigen::eigenvalues(&g)?;
    let low: Vec<Complex64> = spectrum.into_iter().filter(|l| l.re <= 0.5).collect();
    if low.len() != 1 {
        return Err(Error::SeparationFailure {
            found: low.len(),
            expected: 1,
        });
    }
    Ok(low[0])
}

/// Count the truncated eigenvalues with `Re <= 1/2`.
pub fn halfplane_count(rep: &RepresentationModel, x: f64, window: TruncationWindow) -> Result<usize> {
    let g = generator(rep, x, window)?;
    Ok(eigen::eigenvalues(&g)?
        .into_iter()
        .filter(|l| l.re <= 0.5)
        .count())
}

/// Smallest window from the doubling schedule on which the low eigenvalue has
/// stabilized to `tol` between consecutive sizes (the larger of the agreeing
/// pair is returned). At `x = 0` the truncation is exact at any size and the
/// smallest schedule window is returned directly.
pub fn choose_truncation(
    rep: &RepresentationModel,
    x: f64,
    tol: f64,
) -> Result<TruncationWindow> {
    if tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tol must be > 0, got {tol}")));
    }
    if x == 0.0 {
        return Ok(rep.default_window(WINDOW_SCHEDULE[0]));
    }
    let mut previous: Option<(usize, Complex64)> = None;
    let mut deltas = Vec::new();
    for &size in &WINDOW_SCHEDULE {
        let window = rep.default_window(size);
        let mu = low_eigenvalue(rep, x, window)?;
        if let Some((_, prev)) = previous {
            let delta = (mu - prev).norm();
            if delta < tol {
                return Ok(window);
            }
            deltas.push(delta);
        }
        previous = Some((size, mu));
    }
    Err(Error::NonConvergence(format!(
        "low eigenvalue did not stabilize to {tol:.3e} over the window schedule; deltas {deltas:?}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::SeriesKind;

    fn principal(s: f64) -> RepresentationModel {
        RepresentationModel::new(SeriesKind::Principal { s }).unwrap()
    }

    #[test]
    fn diagonal_spectrum_at_x_zero() {
        let rep = principal(0.0);
        let window = TruncationWindow::symmetric(3);
        let g = assemble_operator(&rep, OperatorSymbol::Generator(0.0), window).unwrap();
        let s = eigen_spectrum(&g).unwrap();
        let expected = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0];
        assert_eq!(s.eigenvalues.len(), expected.len());
        for (l, e) in s.eigenvalues.iter().zip(expected) {
            assert!((l.re - e).abs() < 1e-12 && l.im.abs() < 1e-12);
        }
        assert!(s.residual_bound.unwrap() < 1e-10);
    }

    #[test]
    fn transpose_symmetry_of_spectra() {
        let rep = principal(1.0);
        let window = rep.default_window(33);
        for x in [0.1, 0.25] {
            let gp = assemble_operator(&rep, OperatorSymbol::Generator(x), window).unwrap();
            let gm = assemble_operator(&rep, OperatorSymbol::Generator(-x), window).unwrap();
            let mut sp = eigen_spectrum(&gp).unwrap().eigenvalues;
            let mut sm = eigen_spectrum(&gm).unwrap().eigenvalues;
            sp.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
            sm.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
            for (a, b) in sp.iter().zip(&sm) {
                assert!((a - b).norm() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn conjugation_closure_for_real_input() {
        let rep = principal(2.0);
        let window = rep.default_window(33);
        let g = assemble_operator(&rep, OperatorSymbol::Generator(0.3), window).unwrap();
        let s = eigen_spectrum(&g).unwrap();
        for l in &s.eigenvalues {
            let conj = l.conj();
            let found = s.eigenvalues.iter().any(|m| (m - conj).norm() < 1e-8);
            assert!(found, "conjugate of {l} missing");
        }
    }

    #[test]
    fn resolvent_norm_closed_form() {
        let rep = principal(0.0);
        let window = rep.default_window(33);
        let norm = resolvent_norm(&rep, Complex64::new(0.5, 0.0), 0.0, window).unwrap();
        assert!((norm - 2.0).abs() < 1e-12, "{norm}");

        let norm_i = resolvent_norm(&rep, Complex64::new(0.0, 0.5), 0.0, window).unwrap();
        assert!((norm_i - 2.0).abs() < 1e-12, "{norm_i}");

        let d2 = RepresentationModel::new(SeriesKind::DiscreteHolomorphic { n: 2 }).unwrap();
        let wd = d2.default_window(33);
        let norm_d = resolvent_norm(&d2, Complex64::new(0.5, 0.0), 0.0, wd).unwrap();
        assert!((norm_d - 2.0 / 7.0).abs() < 1e-12, "{norm_d}");
    }

    #[test]
    fn resolvent_rejects_spectrum_points() {
        let rep = principal(0.0);
        let window = rep.default_window(17);
        let err = resolvent_norm(&rep, Complex64::new(1.0, 0.0), 0.0, window);
        assert!(matches!(err, Err(Error::NearSpectrum { .. })));
    }

    #[test]
    fn unperturbed_projector_is_k0_coordinate() {
        let rep = principal(0.0);
        let window = rep.default_window(17);
        let p = riesz_projection(&rep, 0.0, Contour::canonical(), window).unwrap();
        assert_eq!(p.rank_estimate, 1);
        assert!(p.idempotency_defect < 1e-10);
        let idx = window.index_of(0);
        for r in 0..window.size() {
            for c in 0..window.size() {
                let expected = if r == idx && c == idx { 1.0 } else { 0.0 };
                assert!((p.matrix[(r, c)].re - expected).abs() < 1e-10);
                assert!(p.matrix[(r, c)].im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn discrete_series_projector_is_zero() {
        let rep = RepresentationModel::new(SeriesKind::DiscreteHolomorphic { n: 2 }).unwrap();
        let window = rep.default_window(33);
        let p = riesz_projection(&rep, 0.1, Contour::canonical(), window).unwrap();
        assert_eq!(p.rank_estimate, 0);
        assert!(p.norm() < 1e-10);
    }

    #[test]
    fn projector_vs_eigenvector_outer_product() {
        // rank-1 oracle: P should match v w^* / (w^* v) built from the right and
        // left eigenvectors of the low eigenvalue
        let rep = principal(0.0);
        let window = rep.default_window(65);
        let x = 0.15;
        let p = riesz_projection(&rep, x, Contour::canonical(), window).unwrap();
        assert_eq!(p.rank_estimate, 1);
        assert!(p.norm() <= 2.0 + 1e-9);

        let g = generator(&rep, x, window).unwrap();
        let d = eigen::decompose(&g, true).unwrap();
        let vr = d.vectors.as_ref().unwrap().column(0).clone_owned();
        let dt = eigen::decompose(&g.transpose(), true).unwrap();
        let vl = dt.vectors.as_ref().unwrap().column(0).clone_owned();
        // transpose (not adjoint) pairing since we diagonalized G^T
        let pairing: Complex64 = vl.iter().zip(vr.iter()).map(|(a, b)| a * b).sum();
        let n = window.size();
        let outer = DMatrix::from_fn(n, n, |r, c| vr[r] * vl[c] / pairing);
        assert!((&outer - &p.matrix).norm() < 1e-8);
    }

    #[test]
    fn low_eigenvalue_matches_taylor() {
        let rep = principal(0.0);
        let w129 = rep.default_window(129);
        let w257 = rep.default_window(257);
        let mu1 = low_eigenvalue(&rep, 0.1, w129).unwrap();
        let mu2 = low_eigenvalue(&rep, 0.1, w257).unwrap();
        assert!((mu1 - mu2).norm() < 1e-10, "window instability");
        assert!(mu1.im.abs() < 1e-10);
        // mu ~ (lambda/8) x^2 = 1.25e-3 within the cubic envelope
        assert!((mu1.re - 1.25e-3).abs() < 1e-4, "{}", mu1.re);

        let mu_neg = low_eigenvalue(&rep, -0.1, w129).unwrap();
        assert!((mu1 - mu_neg).norm() < 1e-10);

        assert!((low_eigenvalue(&rep, 0.0, w129).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn choose_truncation_schedule() {
        let rep = principal(0.0);
        let w = choose_truncation(&rep, 0.1, 1e-10).unwrap();
        assert!(w.size() <= 129);

        let w0 = choose_truncation(&rep, 0.0, 1e-14).unwrap();
        assert_eq!(w0.size(), WINDOW_SCHEDULE[0]);

        let comp = RepresentationModel::new(SeriesKind::Complementary { s: 0.5 }).unwrap();
        let r = (0.75f64 + 6.0).powf(-0.5);
        assert!(0.3 < r && r < 0.3849846);
        let w2 = choose_truncation(&comp, 0.3, 1e-8).unwrap();
        assert!(WINDOW_SCHEDULE.contains(&w2.size()));
    }

    #[test]
    fn certified_bound_dominates_computed_norm() {
        let rep = principal(1.0);
        let window = TruncationWindow::symmetric(24);
        let zeta = Complex64::new(0.25, 1.5);
        let x = 0.05;
        let bound = resolvent_bound(&rep, zeta, x).unwrap();
        let norm = resolvent_norm(&rep, zeta, x, window).unwrap();
        assert!(norm <= bound * (1.0 + 1e-12), "{norm} vs {bound}");

        let d = RepresentationModel::new(SeriesKind::DiscreteHolomorphic { n: 2 }).unwrap();
        let bound = resolvent_bound(&d, Complex64::new(0.5, 0.0), 0.1).unwrap();
        let norm = resolvent_norm(&d, Complex64::new(0.5, 0.0), 0.1, d.default_window(33)).unwrap();
        assert!(norm <= bound * (1.0 + 1e-12), "{norm} vs {bound}");

        // hypothesis violations are rejected, not silently evaluated
        assert!(resolvent_bound(&rep, Complex64::new(1.0, 0.0), 0.0).is_err());
        assert!(resolvent_bound(&rep, Complex64::new(0.1, 0.0), 0.0).is_err());
        assert!(resolvent_bound(&rep, Complex64::new(0.0, 1.0), 0.5).is_err());
    }
}
