//! Analytic perturbation machinery for the linear family `T(x) = -Xi^2 + xH`:
//! certified convergence radii, Taylor coefficients of the tracked low
//! eigenvalue, Cauchy error envelopes, and gamma-trajectories of the
//! rescaled generator eigenvalues with their explicit error bounds.
//!
//! ```
//! use kbm::perturbation::taylor_coefficients;
//! use kbm::rep::{RepresentationModel, SeriesKind};
//!
//! let rep = RepresentationModel::new(SeriesKind::Principal { s: 0.0 }).unwrap();
//! let series = taylor_coefficients(&rep, 3, rep.default_window(65)).unwrap();
//! // mu(x) = (lambda/8) x^2 + O(x^4): odd orders vanish
//! assert!(series.coefficients[1].abs() < 1e-12);
//! assert!((series.coefficients[2] - 1.0 / 8.0).abs() < 1e-10);
//! assert!(series.coefficients[3].abs() < 1e-10);
//! ```

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operator::{assemble_operator, OperatorSymbol};
use crate::rep::{RepresentationModel, SeriesKind, TruncationWindow};
use crate::spectral;

/// Maximum Taylor order kept by [`taylor_coefficients`]; beyond this the
/// Cauchy envelope dominates any practical use of the series.
pub const MAX_TAYLOR_ORDER: usize = 6;

/// Contour radius entering the Cauchy envelope (the `|zeta| = 1/2` circle).
pub const DEFAULT_RHO: f64 = 0.5;

/// Certified convergence radius: `(lambda + 6)^(-1/2)` for principal and
/// complementary series, `1/sqrt(32)` for discrete series.
pub fn convergence_radius(rep: &RepresentationModel) -> Result<f64> {
    match rep.kind() {
        SeriesKind::Trivial => Err(Error::InvalidInput(
            "the trivial representation has no perturbation radius".into(),
        )),
        k if k.is_discrete() => Ok(1.0 / 32f64.sqrt()),
        _ => Ok((rep.casimir() + 6.0).powf(-0.5)),
    }
}

/// Taylor coefficients of the low eigenvalue, with the data needed for the
/// Cauchy error envelope.
#[derive(Debug, Clone)]
pub struct PerturbationSeries {
    /// `mu^(0), mu^(1), ..., mu^(order)`.
    pub coefficients: Vec<f64>,
    /// Convergence radius `r_pi`.
    pub radius: f64,
    /// Contour radius `rho` of the envelope.
    pub rho: f64,
    pub rep: RepresentationModel,
    pub window: TruncationWindow,
}

impl PerturbationSeries {
    /// Partial sum `sum_{n <= order} x^n mu^(n)`.
    pub fn evaluate(&self, x: f64, order: usize) -> f64 {
        self.coefficients
            .iter()
            .take(order + 1)
            .enumerate()
            .map(|(n, c)| c * x.powi(n as i32))
            .sum()
    }

    /// Cauchy envelope `rho |x|^(N+1) / (r^N (r - |x|))` for the order-`N`
    /// partial sum.
    pub fn error_bound(&self, x: f64, order: usize) -> Result<f64> {
        taylor_error_bound_with(self.rho, self.radius, x, order)
    }
}

fn taylor_error_bound_with(rho: f64, radius: f64, x: f64, order: usize) -> Result<f64> {
    if x.abs() >= radius {
        return Err(Error::Hypothesis(format!(
            "|x| = {} is not below the convergence radius {radius}",
            x.abs()
        )));
    }
    Ok(rho * x.abs().powi(order as i32 + 1) / (radius.powi(order as i32) * (radius - x.abs())))
}

/// Standalone Cauchy envelope for a computed series.
pub fn taylor_error_bound(series: &PerturbationSeries, x: f64, order: usize) -> Result<f64> {
    if order + 1 > series.coefficients.len() {
        return Err(Error::InvalidInput(format!(
            "order {order} exceeds the {} available coefficients",
            series.coefficients.len() - 1
        )));
    }
    series.error_bound(x, order)
}

/// Taylor coefficients of `mu(x)` by the eigenvalue-perturbation recursion.
///
/// The family is linear: the unperturbed operator is `diag(k^2)`, the first
/// order term is `H`, and all higher derivatives vanish. The recursion is
/// seeded with the unit vector at `k = 0` and each correction vector is taken
/// orthogonal to the seed (the free component along the seed does not affect
/// the coefficients).
pub fn taylor_coefficients(
    rep: &RepresentationModel,
    order: usize,
    window: TruncationWindow,
) -> Result<PerturbationSeries> {
    if !rep.kind().is_tempered_line() {
        return Err(Error::InvalidInput(
            "Taylor coefficients require a principal or complementary series".into(),
        ));
    }
    if order < 1 {
        return Err(Error::InvalidInput("order must be >= 1".into()));
    }
    if order > MAX_TAYLOR_ORDER {
        return Err(Error::InvalidInput(format!(
            "order {order} exceeds the supported cap {MAX_TAYLOR_ORDER}"
        )));
    }
    rep.validate_window(window)?;
    if !window.contains(0) {
        return Err(Error::InvalidInput(
            "the window must contain the K-type 0".into(),
        ));
    }

    let n = window.size();
    let h = assemble_operator(rep, OperatorSymbol::H, window)?
        .real_entries()
        .expect("H is real");
    let seed_idx = window.index_of(0);

    let mut phi: Vec<DVector<f64>> = Vec::with_capacity(order + 1);
    let mut seed = DVector::zeros(n);
    seed[seed_idx] = 1.0;
    phi.push(seed);
    let mut mu = vec![0.0f64]; // mu^(0) = 0

    for l in 1..=order {
        let h_prev = &h * &phi[l - 1];
        // mu^(l) = <H phi^(l-1), phi^(0)> (higher corrections are orthogonal
        // to the seed by construction)
        let mut mu_l = h_prev[seed_idx];
        for m in 1..l {
            mu_l -= mu[m] * phi[l - m][seed_idx];
        }
        mu.push(mu_l);

        // solve diag(k^2) phi^(l) = -(H phi^(l-1) - sum mu^(m) phi^(l-m))
        let mut rhs = -h_prev;
        for m in 1..=l {
            rhs += &phi[l - m] * mu[m];
        }
        if rhs[seed_idx].abs() > 1e-9 {
            return Err(Error::NonConvergence(format!(
                "perturbation recursion produced a non-solvable system at order {l} \
                 (kernel-component residual {:.3e})",
                rhs[seed_idx]
            )));
        }
        let mut next = DVector::zeros(n);
        for (idx, k) in window.ktypes().enumerate() {
            if k != 0 {
                next[idx] = rhs[idx] / (k * k) as f64;
            }
        }
        phi.push(next);
    }

    Ok(PerturbationSeries {
        coefficients: mu,
        radius: convergence_radius(rep)?,
        rho: DEFAULT_RHO,
        rep: *rep,
        window,
    })
}

/// Right side of the eigenvalue error estimate
/// `|lambda_eta(gamma) - eta| <= (8 eta + 12) / (gamma ((4 eta + 6)^(-1/2) - 2/gamma))`.
pub fn eigenvalue_error_bound(eta: f64, gamma: f64) -> Result<f64> {
    if eta <= 0.0 {
        return Err(Error::InvalidInput(format!("eta must be > 0, got {eta}")));
    }
    let threshold = 2.0 * (4.0 * eta + 6.0).sqrt();
    if gamma <= threshold {
        return Err(Error::Hypothesis(format!(
            "gamma = {gamma} must exceed 2 sqrt(4 eta + 6) = {threshold}"
        )));
    }
    Ok((8.0 * eta + 12.0) / (gamma * ((4.0 * eta + 6.0).powf(-0.5) - 2.0 / gamma)))
}

/// Threshold `2 sqrt(4 eta + 6)` below which no trajectory value is defined.
pub fn trajectory_threshold(eta: f64) -> f64 {
    2.0 * (4.0 * eta + 6.0).sqrt()
}

/// A gamma-trajectory of the rescaled low eigenvalue together with its
/// certified envelope.
#[derive(Debug, Clone)]
pub struct SpectralCurve {
    pub eta: f64,
    pub gamma_grid: Vec<f64>,
    /// `lambda_eta(gamma) = (gamma^2 / 2) mu(2 / gamma)`.
    pub values: Vec<f64>,
    /// Pointwise error envelope.
    pub bound: Vec<f64>,
}

/// Evaluate `lambda_eta(gamma)` over a grid, with adaptive truncation windows.
///
/// ```
/// use kbm::perturbation::{trajectory, trajectory_threshold};
///
/// let eta = 0.25;
/// let grid: Vec<f64> = [50.0, 100.0, 200.0, 400.0].to_vec();
/// assert!(grid[0] > trajectory_threshold(eta));
/// let curve = trajectory(eta, &grid, 1e-10).unwrap();
/// for (value, bound) in curve.values.iter().zip(&curve.bound) {
///     assert!((value - eta).abs() <= *bound);
/// }
/// // the envelope decays like 1/gamma
/// let ratio = curve.bound[3] / curve.bound[2];
/// assert!((ratio - 0.5).abs() < 0.05);
/// ```
pub fn trajectory(eta: f64, gamma_grid: &[f64], tol: f64) -> Result<SpectralCurve> {
    let rep = RepresentationModel::from_laplace_eigenvalue(eta)?;
    let threshold = trajectory_threshold(eta);
    let mut values = Vec::with_capacity(gamma_grid.len());
    let mut bound = Vec::with_capacity(gamma_grid.len());
    for &gamma in gamma_grid {
        if gamma <= threshold {
            return Err(Error::Hypothesis(format!(
                "gamma = {gamma} must exceed 2 sqrt(4 eta + 6) = {threshold}"
            )));
        }
        let x = 2.0 / gamma;
        let window = spectral::choose_truncation(&rep, x, tol)?;
        let mu = spectral::low_eigenvalue(&rep, x, window)?;
        if mu.im.abs() > 1e-8 {
            return Err(Error::NonConvergence(format!(
                "trajectory value at gamma = {gamma} has imaginary part {:.3e}",
                mu.im
            )));
        }
        values.push(gamma * gamma / 2.0 * mu.re);
        bound.push(eigenvalue_error_bound(eta, gamma)?);
    }
    Ok(SpectralCurve {
        eta,
        gamma_grid: gamma_grid.to_vec(),
        values,
        bound,
    })
}

/// Test-only oracle: derivatives of the low eigenvalue at `x = 0` by central
/// finite differences with one Richardson extrapolation step. Independent of
/// the recursion in [`taylor_coefficients`].
pub fn finite_difference_derivative(
    rep: &RepresentationModel,
    order: u32,
    window: TruncationWindow,
) -> Result<f64> {
    let r = convergence_radius(rep)?;
    let mu = |x: f64| -> Result<f64> { Ok(spectral::low_eigenvalue(rep, x, window)?.re) };
    let central = |h: f64| -> Result<f64> {
        Ok(match order {
            1 => (mu(h)? - mu(-h)?) / (2.0 * h),
            2 => (mu(h)? - 2.0 * mu(0.0)? + mu(-h)?) / (h * h),
            3 => (mu(2.0 * h)? - 2.0 * mu(h)? + 2.0 * mu(-h)? - mu(-2.0 * h)?) / (2.0 * h.powi(3)),
            _ => {
                return Err(Error::InvalidInput(
                    "finite differences implemented up to order 3".into(),
                ))
            }
        })
    };
    let h = 1e-2 * r;
    let coarse = central(2.0 * h)?;
    let fine = central(h)?;
    // second-order stencils: one Richardson step removes the h^2 term
    Ok((4.0 * fine - coarse) / 3.0)
}
