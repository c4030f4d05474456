//! Matrix exponential by scaling and squaring with a diagonal Pade core.
//!
//! Degree selection follows the standard theta thresholds for the 1-norm;
//! matrices above the degree-13 threshold are scaled by a power of two first.

use nalgebra::DMatrix;
use num_complex::Complex64;

type CMatrix = DMatrix<Complex64>;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pade_coefficients(degree: usize) -> &'static [f64] {
    match degree {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[
            17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
        ],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!(),
    }
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    let norm = one_norm(a);

    let (degree, squarings) = if norm <= THETA_3 {
        (3, 0)
    } else if norm <= THETA_5 {
        (5, 0)
    } else if norm <= THETA_7 {
        (7, 0)
    } else if norm <= THETA_9 {
        (9, 0)
    } else {
        let s = if norm > THETA_13 {
            (norm / THETA_13).log2().ceil() as u32
        } else {
            0
        };
        (13, s)
    };

    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let b = pade_coefficients(degree);
    let id = CMatrix::identity(n, n);
    let a2 = &scaled * &scaled;

    // split the Pade numerator into even and odd parts: p = u + v, q = -u + v
    let (u, v) = if degree < 13 {
        let mut even = &id * Complex64::new(b[0], 0.0);
        let mut odd = &id * Complex64::new(b[1], 0.0);
        let mut power = id.clone();
        for j in (2..=degree).step_by(2) {
            power = &power * &a2;
            even += &power * Complex64::new(b[j], 0.0);
            if j < degree {
                odd += &power * Complex64::new(b[j + 1], 0.0);
            }
        }
        (&scaled * odd, even)
    } else {
        let a4 = &a2 * &a2;
        let a6 = &a2 * &a4;
        let u_inner = &a6 * Complex64::new(b[13], 0.0)
            + &a4 * Complex64::new(b[11], 0.0)
            + &a2 * Complex64::new(b[9], 0.0);
        let u = &scaled
            * (&a6 * &u_inner
                + &a6 * Complex64::new(b[7], 0.0)
                + &a4 * Complex64::new(b[5], 0.0)
                + &a2 * Complex64::new(b[3], 0.0)
                + &id * Complex64::new(b[1], 0.0));
        let v_inner = &a6 * Complex64::new(b[12], 0.0)
            + &a4 * Complex64::new(b[10], 0.0)
            + &a2 * Complex64::new(b[8], 0.0);
        let v = &a6 * &v_inner
            + &a6 * Complex64::new(b[6], 0.0)
            + &a4 * Complex64::new(b[4], 0.0)
            + &a2 * Complex64::new(b[2], 0.0)
            + &id * Complex64::new(b[0], 0.0);
        (u, v)
    };

    let numerator = &u + &v;
    let denominator = &v - &u;
    let mut result = denominator
        .lu()
        .solve(&numerator)
        .expect("Pade denominator is invertible for admissible scalings");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
