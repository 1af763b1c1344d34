//! Dense complex matrix exponential by scaling-and-squaring with a Padé(13)
//! approximant (Higham 2005). Used for the truncated-Fock oracle, where the
//! matrices are dense and far from nilpotent.

use nalgebra::DMatrix;
use num_complex::Complex64;

const PADE13: [f64; 14] = [
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
];

/// 1-norm (max column sum of moduli).
fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` for a square complex matrix. Accurate to ~1e-13 relative for the
/// well-conditioned, moderate-norm matrices the Fock oracle produces.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");

    // theta_13 from Higham's table; scale so ||A/2^s|| stays below it.
    let theta13 = 5.371920351148152;
    let norm = one_norm(a);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as u32
    } else {
        0
    };
    let a = a * Complex64::new(1.0 / f64::powi(2.0, s as i32), 0.0);

    let eye = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let c = |k: usize| Complex64::new(PADE13[k], 0.0);
    let u_inner = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u = &a * (&a6 * u_inner + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &eye * c(1));
    let v_inner = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = &a6 * v_inner + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &eye * c(0);

    let denom = &v - &u;
    let numer = &v + &u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..s {
        result = &result * &result;
    }
    result
}
