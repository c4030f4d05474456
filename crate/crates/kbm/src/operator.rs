//! Truncated matrix models of the enveloping-algebra elements acting on a
//! K-type window.
//!
//! Phase convention: the raising operator acts as `X+ phi_k = c_k phi_{k+1}`
//! with `c_k >= 0` real, so `X- phi_{k+1} = -c_k phi_k`. This makes `H` real
//! antisymmetric with zero diagonal and `B` purely imaginary symmetric, and
//! the generator `Generator(x) = diag(k^2) + x H` is a real matrix for real
//! `x` with the exact transpose symmetry `Generator(x)^T = Generator(-x)`.
//!
//! ```
//! use kbm::operator::{assemble_operator, OperatorSymbol};
//! use kbm::rep::{RepresentationModel, SeriesKind, TruncationWindow};
//!
//! let rep = RepresentationModel::new(SeriesKind::Principal { s: 0.0 }).unwrap();
//! let window = TruncationWindow::symmetric(10);
//! let h = assemble_operator(&rep, OperatorSymbol::H, window).unwrap();
//! let hr = h.real_entries().expect("H is real");
//! assert_eq!(hr.transpose(), -hr.clone());
//! // the stencil is the ladder coupling: entry (k, k+1) is c_k / 2
//! let c0 = rep.coupling(0).unwrap();
//! assert_eq!(hr[(window.index_of(0), window.index_of(1))], c0 / 2.0);
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rep::{RepresentationModel, TruncationWindow};

/// The elements of the enveloping algebra this toolkit materializes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorSymbol {
    /// `Xi`: diagonal `i k`.
    Xi,
    /// `-Xi^2`: diagonal `k^2` (the spherical Laplacian block).
    Xi2,
    /// `H = -(X+ + X-)/2`: the geodesic vector field.
    H,
    /// `B = i (X+ - X-)/2`.
    B,
    /// The Casimir `4 Xi^2 - 2 (X+ X- + X- X+)`, assembled from products.
    Casimir,
    /// `T(x) = -Xi^2 + x H`.
    Generator(f64),
    /// Diagonal Sobolev weight `(1 + lambda/4 + 2 k^2)^alpha`.
    SobolevWeight(f64),
}

/// A dense complex matrix model of a symbol on a truncation window.
///
/// Dense storage is used throughout; every window in the doubling schedule is
/// far below the 1024 cap where banded storage would start to matter.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    window: TruncationWindow,
    symbol: OperatorSymbol,
}

impl OperatorMatrix {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn window(&self) -> TruncationWindow {
        self.window
    }

    pub fn symbol(&self) -> OperatorSymbol {
        self.symbol
    }

    pub fn size(&self) -> usize {
        self.window.size()
    }

    /// The real part of the matrix, valid when all imaginary parts vanish.
    pub fn real_entries(&self) -> Option<DMatrix<f64>> {
        if self.entries.iter().all(|z| z.im == 0.0) {
            Some(self.entries.map(|z| z.re))
        } else {
            None
        }
    }

    /// Serialize as one `row col re,im` triplet per line (zero entries skipped).
    pub fn to_triplets(&self) -> String {
        let mut out = String::new();
        let n = self.size();
        for row in 0..n {
            for col in 0..n {
                let z = self.entries[(row, col)];
                if z != Complex64::new(0.0, 0.0) {
                    out.push_str(&format!("{row} {col} {:.17e},{:.17e}\n", z.re, z.im));
                }
            }
        }
        out
    }

    /// Parse the triplet format produced by [`to_triplets`](Self::to_triplets).
    pub fn triplets_to_matrix(text: &str, size: usize) -> Result<DMatrix<Complex64>> {
        let mut m = DMatrix::zeros(size, size);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::InvalidInput(format!("malformed triplet on line {}", lineno + 1));
            let mut parts = line.split_whitespace();
            let row: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let col: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let value = parts.next().ok_or_else(bad)?;
            let (re, im) = value.split_once(',').ok_or_else(bad)?;
            if row >= size || col >= size {
                return Err(bad());
            }
            m[(row, col)] = Complex64::new(
                re.parse().map_err(|_| bad())?,
                im.parse().map_err(|_| bad())?,
            );
        }
        Ok(m)
    }
}

/// Raising matrix `X+` on the window: entry `c_k` at `(k+1, k)`.
fn raising_matrix(rep: &RepresentationModel, window: TruncationWindow) -> DMatrix<f64> {
    let n = window.size();
    let mut m = DMatrix::zeros(n, n);
    for k in window.kmin..window.kmax {
        let c = rep.coupling(k).expect("window validated");
        m[(window.index_of(k + 1), window.index_of(k))] = c;
    }
    m
}

/// Assemble the matrix model of `symbol` for `rep` on `window`.
pub fn assemble_operator(
    rep: &RepresentationModel,
    symbol: OperatorSymbol,
    window: TruncationWindow,
) -> Result<OperatorMatrix> {
    rep.validate_window(window)?;
    let n = window.size();
    let i = Complex64::new(0.0, 1.0);
    let entries: DMatrix<Complex64> = match symbol {
        OperatorSymbol::Xi => DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                i * (window.kmin + r as i64) as f64
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        OperatorSymbol::Xi2 => DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                let k = (window.kmin + r as i64) as f64;
                Complex64::new(k * k, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        OperatorSymbol::H => {
            let xp = raising_matrix(rep, window);
            // H = -(X+ + X-)/2 with X- = -X+^T
            ((&xp.transpose() - &xp) * 0.5).map(|x| Complex64::new(x, 0.0))
        }
        OperatorSymbol::B => {
            let xp = raising_matrix(rep, window);
            // B = i (X+ - X-)/2 = i (X+ + X+^T)/2
            ((&xp + &xp.transpose()) * 0.5).map(|x| i * x)
        }
        OperatorSymbol::Casimir => {
            let xp = raising_matrix(rep, window);
            let xm = -xp.transpose();
            let anti = &xp * &xm + &xm * &xp;
            DMatrix::from_fn(n, n, |r, c| {
                let xi2 = if r == c {
                    let k = (window.kmin + r as i64) as f64;
                    -k * k
                } else {
                    0.0
                };
                Complex64::new(4.0 * xi2 - 2.0 * anti[(r, c)], 0.0)
            })
        }
        OperatorSymbol::Generator(x) => {
            let xp = raising_matrix(rep, window);
            let h = (&xp.transpose() - &xp) * 0.5;
            DMatrix::from_fn(n, n, |r, c| {
                let diag = if r == c {
                    let k = (window.kmin + r as i64) as f64;
                    k * k
                } else {
                    0.0
                };
                Complex64::new(diag + x * h[(r, c)], 0.0)
            })
        }
        OperatorSymbol::SobolevWeight(alpha) => {
            if alpha < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "Sobolev order must be >= 0, got {alpha}"
                )));
            }
            let lambda = rep.casimir();
            DMatrix::from_fn(n, n, |r, c| {
                if r == c {
                    let k = (window.kmin + r as i64) as f64;
                    Complex64::new((1.0 + lambda / 4.0 + 2.0 * k * k).powf(alpha), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        }
    };
    Ok(OperatorMatrix {
        entries,
        window,
        symbol,
    })
}

/// Sobolev norm of coefficients on a window:
/// `(sum_k |a_k|^2 (1 + lambda/4 + 2 k^2)^alpha)^(1/2)`.
///
/// The diagonal weight is the exact action of `(I - H^2 - B^2 - Xi^2)^alpha`
/// on the K-type basis, via `-H^2 - B^2 = lambda/4 - Xi^2`.
pub fn sobolev_norm(
    rep: &RepresentationModel,
    coeffs: &[Complex64],
    window: TruncationWindow,
    alpha: f64,
) -> Result<f64> {
    rep.validate_window(window)?;
    if alpha < 0.0 {
        return Err(Error::InvalidInput(format!(
            "Sobolev order must be >= 0, got {alpha}"
        )));
    }
    if coeffs.len() != window.size() {
        return Err(Error::InvalidInput(format!(
            "coefficient vector length {} does not match window size {}",
            coeffs.len(),
            window.size()
        )));
    }
    let lambda = rep.casimir();
    let mut sum = 0.0;
    for (idx, k) in window.ktypes().enumerate() {
        let kf = k as f64;
        let weight = (1.0 + lambda / 4.0 + 2.0 * kf * kf).powf(alpha);
        sum += coeffs[idx].norm_sqr() * weight;
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::SeriesKind;
    use nalgebra::DVector;

    fn principal(s: f64) -> RepresentationModel {
        RepresentationModel::new(SeriesKind::Principal { s }).unwrap()
    }

    #[test]
    fn casimir_is_scalar_on_interior() {
        for (rep, lambda) in [
            (principal(0.0), 1.0),
            (principal(2.0), 5.0),
            (
                RepresentationModel::new(SeriesKind::Complementary { s: 0.5 }).unwrap(),
                0.75,
            ),
            (
                RepresentationModel::new(SeriesKind::DiscreteHolomorphic { n: 2 }).unwrap(),
                -8.0,
            ),
        ] {
            let window = rep.default_window(17);
            let omega = assemble_operator(&rep, OperatorSymbol::Casimir, window).unwrap();
            let m = omega.entries();
            for k in window.kmin..=window.kmax {
                // rows whose full tridiagonal stencil lies inside the window
                if k == window.kmin || k == window.kmax {
                    continue;
                }
                let r = window.index_of(k);
                for c in 0..window.size() {
                    let expected = if r == c { lambda } else { 0.0 };
                    assert!(
                        (m[(r, c)].re - expected).abs() < 1e-12 && m[(r, c)].im == 0.0,
                        "Casimir row {k} col {c}: {} vs {expected}",
                        m[(r, c)]
                    );
                }
            }
        }
    }

    #[test]
    fn skew_adjointness_exact() {
        let rep = principal(1.5);
        let window = TruncationWindow::symmetric(6);
        for symbol in [OperatorSymbol::Xi, OperatorSymbol::H, OperatorSymbol::B] {
            let m = assemble_operator(&rep, symbol, window).unwrap();
            let a = m.entries();
            for r in 0..window.size() {
                for c in 0..window.size() {
                    assert_eq!(a[(r, c)].conj(), -a[(c, r)], "{symbol:?} at ({r},{c})");
                }
            }
        }
    }

    #[test]
    fn generator_transpose_symmetry() {
        let rep = principal(0.0);
        let window = TruncationWindow::symmetric(5);
        let gp = assemble_operator(&rep, OperatorSymbol::Generator(0.3), window).unwrap();
        let gm = assemble_operator(&rep, OperatorSymbol::Generator(-0.3), window).unwrap();
        assert_eq!(gp.entries().transpose(), *gm.entries());
        assert!(gp.real_entries().is_some());
    }

    #[test]
    fn generator_at_zero_is_diagonal() {
        let rep = RepresentationModel::new(SeriesKind::DiscreteHolomorphic { n: 2 }).unwrap();
        let window = rep.default_window(5);
        let g = assemble_operator(&rep, OperatorSymbol::Generator(0.0), window).unwrap();
        for (idx, k) in window.ktypes().enumerate() {
            assert_eq!(g.entries()[(idx, idx)].re, (k * k) as f64);
        }
        assert_eq!(g.entries().iter().filter(|z| z.norm() > 0.0).count(), 5);
    }

    #[test]
    fn h_matches_coupling_stencil() {
        let rep = principal(0.0);
        let window = TruncationWindow::new(-2, 2).unwrap();
        let h = assemble_operator(&rep, OperatorSymbol::H, window).unwrap();
        let m = h.entries();
        for k in -2..2i64 {
            let c = rep.coupling(k).unwrap();
            let lower = m[(window.index_of(k + 1), window.index_of(k))];
            let upper = m[(window.index_of(k), window.index_of(k + 1))];
            assert_eq!(lower.re, -c / 2.0);
            assert_eq!(upper.re, c / 2.0);
        }
    }

    #[test]
    fn accretivity_of_truncation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rep = principal(2.0);
        let window = TruncationWindow::symmetric(10);
        let g = assemble_operator(&rep, OperatorSymbol::Generator(0.4), window).unwrap();
        for _ in 0..50 {
            let u = DVector::from_fn(window.size(), |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let gu = g.entries() * &u;
            let quad: Complex64 = u.iter().zip(gu.iter()).map(|(a, b)| b * a.conj()).sum();
            let expected: f64 = window
                .ktypes()
                .enumerate()
                .map(|(i, k)| (k * k) as f64 * u[i].norm_sqr())
                .sum();
            assert!((quad.re - expected).abs() < 1e-10 * expected.max(1.0));
            assert!(quad.re >= 0.0);
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let rep = principal(0.0);
        let window = TruncationWindow::symmetric(3);
        let mut unit0 = vec![Complex64::new(0.0, 0.0); window.size()];
        unit0[window.index_of(0)] = Complex64::new(1.0, 0.0);
        // weight (1 + 1/4 + 0)^2, square-rooted
        assert!((sobolev_norm(&rep, &unit0, window, 2.0).unwrap() - 1.25).abs() < 1e-15);

        let mut unit1 = vec![Complex64::new(0.0, 0.0); window.size()];
        unit1[window.index_of(1)] = Complex64::new(1.0, 0.0);
        let expect = (3.25f64).sqrt();
        assert!((sobolev_norm(&rep, &unit1, window, 1.0).unwrap() - expect).abs() < 1e-15);

        // alpha = 0 reduces to the Euclidean norm
        let coeffs: Vec<Complex64> = (0..window.size())
            .map(|j| Complex64::new(j as f64, -1.0))
            .collect();
        let euclid: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((sobolev_norm(&rep, &coeffs, window, 0.0).unwrap() - euclid).abs() < 1e-14);
    }

    #[test]
    fn sobolev_weight_matches_direct_assembly() {
        // compare the diagonal weight with I - H^2 - B^2 - Xi^2 on interior rows
        for rep in [
            principal(0.0),
            RepresentationModel::new(SeriesKind::Complementary { s: 0.5 }).unwrap(),
            RepresentationModel::new(SeriesKind::DiscreteHolomorphic { n: 2 }).unwrap(),
        ] {
            let window = rep.default_window(13);
            let h = assemble_operator(&rep, OperatorSymbol::H, window).unwrap();
            let b = assemble_operator(&rep, OperatorSymbol::B, window).unwrap();
            let xi = assemble_operator(&rep, OperatorSymbol::Xi, window).unwrap();
            let n = window.size();
            let direct = DMatrix::<Complex64>::identity(n, n)
                - h.entries() * h.entries()
                - b.entries() * b.entries()
                - xi.entries() * xi.entries();
            let weight = assemble_operator(&rep, OperatorSymbol::SobolevWeight(1.0), window).unwrap();
            for r in 1..n - 1 {
                assert!(
                    (direct[(r, r)] - weight.entries()[(r, r)]).norm() < 1e-10,
                    "row {r}: {} vs {}",
                    direct[(r, r)],
                    weight.entries()[(r, r)]
                );
            }
        }
    }

    #[test]
    fn h_boundedness_on_interior_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for rep in [principal(0.0), principal(4.0)] {
            let window = rep.default_window(65);
            let h = assemble_operator(&rep, OperatorSymbol::H, window).unwrap();
            let xi2 = assemble_operator(&rep, OperatorSymbol::Xi2, window).unwrap();
            let n = window.size();
            for _ in 0..100 {
                let mut u = DVector::from_fn(n, |_, _| {
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                // interior support: zero the outermost K-type on each side
                u[0] = Complex64::new(0.0, 0.0);
                u[n - 1] = Complex64::new(0.0, 0.0);
                let hu = h.entries() * &u;
                let xu = xi2.entries() * &u;
                let lhs = hu.norm_squared();
                let rhs = rep.casimir().abs() / 4.0 * u.norm_squared() + 1.5 * xu.norm_squared();
                assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn triplet_roundtrip() {
        let rep = principal(1.0);
        let window = TruncationWindow::symmetric(3);
        let b = assemble_operator(&rep, OperatorSymbol::B, window).unwrap();
        let text = b.to_triplets();
        let parsed = OperatorMatrix::triplets_to_matrix(&text, window.size()).unwrap();
        assert_eq!(parsed, *b.entries());
        assert!(OperatorMatrix::triplets_to_matrix("0 0 nope", 2).is_err());
    }
}
