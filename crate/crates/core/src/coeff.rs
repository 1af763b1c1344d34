//! Coefficient functions with exact antiderivatives.
//!
//! Matrix and boson backends restrict their time-dependent coefficients to
//! sums of monomials `c·tᵏ` and trigonometric terms `c·sin(ωt)`, `c·cos(ωt)`
//! so that every time average the closed-form propagator needs is available
//! in closed form rather than through quadrature.

use num_complex::Complex64;
use rand::Rng;

/// One additive term of a [`Coeff`].
#[derive(Debug, Clone, Copy)]
pub enum Term {
    /// `t^k`
    Pow(u32),
    /// `sin(omega t)`
    Sin(f64),
    /// `cos(omega t)`
    Cos(f64),
}

/// A complex-valued function of time, `f(t) = Σ cᵢ·bᵢ(t)` with basis terms
/// from [`Term`]. Evaluation and definite integration are exact.
#[derive(Debug, Clone, Default)]
pub struct Coeff {
    terms: Vec<(Complex64, Term)>,
}

impl Coeff {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self { terms: vec![(c.into(), Term::Pow(0))] }
    }

    /// Polynomial `a[0] + a[1] t + a[2] t² + …`.
    pub fn poly(a: &[f64]) -> Self {
        Self {
            terms: a
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(k, &c)| (Complex64::new(c, 0.0), Term::Pow(k as u32)))
                .collect(),
        }
    }

    pub fn sin(amp: impl Into<Complex64>, omega: f64) -> Self {
        Self { terms: vec![(amp.into(), Term::Sin(omega))] }
    }

    pub fn cos(amp: impl Into<Complex64>, omega: f64) -> Self {
        Self { terms: vec![(amp.into(), Term::Cos(omega))] }
    }

    pub fn push(mut self, amp: impl Into<Complex64>, term: Term) -> Self {
        self.terms.push((amp.into(), term));
        self
    }

    /// Random real polynomial of the given degree with coefficients drawn
    /// uniformly from `[-1, 1]`.
    pub fn random_poly<R: Rng>(rng: &mut R, degree: u32) -> Self {
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self::poly(&coeffs)
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &(c, term) in &self.terms {
            acc += c * match term {
                Term::Pow(k) => t.powi(k as i32),
                Term::Sin(w) => (w * t).sin(),
                Term::Cos(w) => (w * t).cos(),
            };
        }
        acc
    }

    /// Exact definite integral over `[s, t]`.
    pub fn integral(&self, s: f64, t: f64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &(c, term) in &self.terms {
            acc += c * match term {
                Term::Pow(k) => {
                    let p = k as i32 + 1;
                    (t.powi(p) - s.powi(p)) / p as f64
                }
                Term::Sin(w) => {
                    if w == 0.0 {
                        0.0
                    } else {
                        ((w * s).cos() - (w * t).cos()) / w
                    }
                }
                Term::Cos(w) => {
                    if w == 0.0 {
                        t - s
                    } else {
                        ((w * t).sin() - (w * s).sin()) / w
                    }
                }
            };
        }
        acc
    }
}
