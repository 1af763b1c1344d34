//! Exact finite-dimensional backends: the 3×3 step-2 (Heisenberg) and 4×4
//! step-3 nilpotent upper-triangular families, plus a high-order ODE oracle
//! for ground truth.
//!
//! For `A(t) = Σ aₖ(t)·E_{k,k+1}` every matrix is strictly upper triangular,
//! so frozen exponentials are exact finite series and every commutation
//! identity of the central-commutator theory holds to floating-point
//! accuracy. On the 3×3 model the pairwise commutator is `μ(s,t)·E₁₃` with
//! `μ(s,t) = a₁(s)a₂(t) − a₁(t)a₂(s)`; on the 4×4 model the 2-fold
//! commutators land in `span{E₁₄}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::coeff::Coeff;
use crate::commutator::{CentralElement, CommutatorField, MatrixFamily};
use crate::error::{Error, Result};
use crate::evolution::{GeneratorFamily, StabilityPair, State};
use crate::magnus::ClosedFormBackend;
use crate::quadrature::QuadLevel;

impl State for DVector<Complex64> {
    fn norm(&self) -> f64 {
        nalgebra::DVector::norm(self)
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

/// Matrix unit `E_{ij}` (1-based indices in the name, 0-based arguments).
fn unit(n: usize, i: usize, j: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = Complex64::ONE;
    m
}

/// Exact exponential of a strictly upper triangular matrix by the finite
/// series `Σ_{k<n} Mᵏ/k!`. Rejects inputs with mass on or below the
/// diagonal.
pub fn nilpotent_exp(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i.min(n - 1) {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    if worst > 0.0 {
        return Err(Error::NotNilpotent(worst));
    }
    let mut acc = DMatrix::identity(n, n);
    let mut power = DMatrix::identity(n, n);
    let mut factorial = 1.0;
    for k in 1..n {
        power = &power * m;
        factorial *= k as f64;
        acc += &power / Complex64::new(factorial, 0.0);
    }
    Ok(acc)
}

/// Shared coefficient → matrix assembly for the two nilpotent families.
#[derive(Debug, Clone)]
struct SuperDiagonal {
    n: usize,
    coeffs: Vec<Coeff>,
    central_coeff: Option<Coeff>,
    stability: StabilityPair,
}

impl SuperDiagonal {
    fn new(n: usize, coeffs: Vec<Coeff>, central_coeff: Option<Coeff>) -> Self {
        debug_assert_eq!(coeffs.len(), n - 1);
        let mut probe = Self { n, coeffs, central_coeff, stability: StabilityPair { m: 1.0, omega: 0.0 } };
        // omega = sup_t ||A(t)||_F bounds the spectral norm, so M = 1 works.
        let omega = (0..=512)
            .map(|i| probe.generator(i as f64 / 512.0).norm())
            .fold(0.0, f64::max);
        probe.stability = StabilityPair { m: 1.0, omega: omega * 1.000001 + 1e-12 };
        probe
    }

    fn generator(&self, t: f64) -> DMatrix<Complex64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (k, c) in self.coeffs.iter().enumerate() {
            a[(k, k + 1)] = c.eval(t);
        }
        if let Some(c) = &self.central_coeff {
            a[(0, self.n - 1)] = c.eval(t);
        }
        a
    }

    /// `B(s,t) = ∫ₛᵗ A(τ)dτ`, entrywise by exact antiderivative.
    fn averaged(&self, s: f64, t: f64) -> DMatrix<Complex64> {
        let mut b = DMatrix::zeros(self.n, self.n);
        for (k, c) in self.coeffs.iter().enumerate() {
            b[(k, k + 1)] = c.integral(s, t);
        }
        if let Some(c) = &self.central_coeff {
            b[(0, self.n - 1)] = c.integral(s, t);
        }
        b
    }
}

/// Step-2 model: `A(t) = a₁(t)E₁₂ + a₂(t)E₂₃` in 3×3, with an optional
/// central coefficient on `E₁₃`. Pairwise commutators are central.
#[derive(Debug, Clone)]
pub struct HeisenbergFamily {
    inner: SuperDiagonal,
}

impl HeisenbergFamily {
    pub fn new(a1: Coeff, a2: Coeff) -> Self {
        Self { inner: SuperDiagonal::new(3, vec![a1, a2], None) }
    }

    pub fn with_central(a1: Coeff, a2: Coeff, central: Coeff) -> Self {
        Self { inner: SuperDiagonal::new(3, vec![a1, a2], Some(central)) }
    }

    /// The default scenario: `a₁ = 1`, `a₂(τ) = τ`.
    pub fn canonical() -> Self {
        Self::new(Coeff::constant(1.0), Coeff::poly(&[0.0, 1.0]))
    }

    /// Scalar coefficient of `[A(s), A(t)] = μ(s,t)·E₁₃`.
    pub fn mu_coeff(&self, s: f64, t: f64) -> Complex64 {
        let a1 = &self.inner.coeffs[0];
        let a2 = &self.inner.coeffs[1];
        a1.eval(s) * a2.eval(t) - a1.eval(t) * a2.eval(s)
    }

    /// Central element `Z = E₁₃`.
    pub fn central_matrix(&self) -> DMatrix<Complex64> {
        unit(3, 0, 2)
    }

    /// Extracts the order-1 commutator field, verifying on the sampled times
    /// that the commutator truly is a multiple of `E₁₃` and commutes with
    /// the family.
    pub fn commutator_field(&self, sample_times: &[f64]) -> Result<CommutatorField> {
        let z = self.central_matrix();
        let mut residual: f64 = 0.0;
        for &s in sample_times {
            for &t in sample_times {
                let c = commutator(&self.generator(s), &self.generator(t));
                residual = residual.max((&c - &z * self.mu_coeff(s, t)).norm());
                residual = residual.max(commutator(&c, &self.generator(0.5)).norm());
            }
        }
        if residual > 1e-13 {
            return Err(Error::NonCentral(residual));
        }
        let fam = self.clone();
        Ok(CommutatorField::scalar_mu(
            move |s, t| fam.mu_coeff(s, t),
            CentralElement::Matrix(z),
        ))
    }
}

fn commutator(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a * b - b * a
}

/// Step-3 model: `A(t) = a₁E₁₂ + a₂E₂₃ + a₃E₃₄` in 4×4. The 1-fold
/// commutators have `E₁₃`/`E₂₄` parts; the 2-fold commutators are central
/// multiples of `E₁₄`.
#[derive(Debug, Clone)]
pub struct Step3Family {
    inner: SuperDiagonal,
}

impl Step3Family {
    pub fn new(a1: Coeff, a2: Coeff, a3: Coeff) -> Self {
        Self { inner: SuperDiagonal::new(4, vec![a1, a2, a3], None) }
    }

    /// `a₁ = 1`, `a₂(τ) = τ`, `a₃ = 1`.
    pub fn canonical() -> Self {
        Self::new(Coeff::constant(1.0), Coeff::poly(&[0.0, 1.0]), Coeff::constant(1.0))
    }

    /// `C⁽¹⁾(s, t) = [A(s), A(t)]`, supported on `E₁₃` and `E₂₄`.
    pub fn c1(&self, s: f64, t: f64) -> DMatrix<Complex64> {
        let a = &self.inner.coeffs;
        let e13 = a[0].eval(s) * a[1].eval(t) - a[0].eval(t) * a[1].eval(s);
        let e24 = a[1].eval(s) * a[2].eval(t) - a[1].eval(t) * a[2].eval(s);
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 2)] = e13;
        m[(1, 3)] = e24;
        m
    }

    /// Scalar coefficient of `[[A(t₁), A(t₂)], A(t₃)] = μ(t₁,t₂,t₃)·E₁₄`.
    pub fn mu_coeff(&self, t1: f64, t2: f64, t3: f64) -> Complex64 {
        let a = &self.inner.coeffs;
        let e13 = a[0].eval(t1) * a[1].eval(t2) - a[0].eval(t2) * a[1].eval(t1);
        let e24 = a[1].eval(t1) * a[2].eval(t2) - a[1].eval(t2) * a[2].eval(t1);
        e13 * a[2].eval(t3) - e24 * a[0].eval(t3)
    }

    pub fn central_matrix(&self) -> DMatrix<Complex64> {
        unit(4, 0, 3)
    }

    /// Order-2 commutator field with centrality verification of the 2-fold
    /// commutators on the sampled times.
    pub fn commutator_field(&self, sample_times: &[f64]) -> Result<CommutatorField> {
        let z = self.central_matrix();
        let mut residual: f64 = 0.0;
        for &t1 in sample_times {
            for &t2 in sample_times {
                let c1 = commutator(&self.generator(t1), &self.generator(t2));
                residual = residual.max((&c1 - self.c1(t1, t2)).norm());
                for &t3 in sample_times {
                    let c2 = commutator(&c1, &self.generator(t3));
                    residual = residual.max((&c2 - &z * self.mu_coeff(t1, t2, t3)).norm());
                    residual = residual.max(commutator(&c2, &self.generator(0.25)).norm());
                }
            }
        }
        if residual > 1e-13 {
            return Err(Error::NonCentral(residual));
        }
        let fam = self.clone();
        let fam2 = self.clone();
        CommutatorField::with_operators(
            2,
            vec![Box::new(move |ts: &[f64]| fam.c1(ts[0], ts[1]))],
            Box::new(move |ts: &[f64]| fam2.mu_coeff(ts[0], ts[1], ts[2])),
            CentralElement::Matrix(z),
        )
    }
}

macro_rules! impl_matrix_family {
    ($ty:ty) => {
        impl GeneratorFamily for $ty {
            type State = DVector<Complex64>;
            fn exp_apply(&self, t: f64, tau: f64, x: &Self::State) -> Self::State {
                self.exp_matrix(t, tau) * x
            }
            fn gen_apply(&self, t: f64, x: &Self::State) -> crate::error::Result<Self::State> {
                Ok(self.inner.generator(t) * x)
            }
            fn supports_groups(&self) -> bool {
                true
            }
            fn stability(&self) -> StabilityPair {
                self.inner.stability
            }
        }

        impl MatrixFamily for $ty {
            fn dim(&self) -> usize {
                self.inner.n
            }
            fn generator(&self, t: f64) -> DMatrix<Complex64> {
                self.inner.generator(t)
            }
            fn exp_matrix(&self, t: f64, tau: f64) -> DMatrix<Complex64> {
                nilpotent_exp(&(self.inner.generator(t) * Complex64::new(tau, 0.0)))
                    .expect("superdiagonal generators are strictly upper triangular")
            }
        }
    };
}

impl_matrix_family!(HeisenbergFamily);
impl_matrix_family!(Step3Family);

impl ClosedFormBackend for HeisenbergFamily {
    fn averaged_exp_apply(&self, s: f64, t: f64, x: &Self::State) -> Self::State {
        nilpotent_exp(&self.inner.averaged(s, t)).expect("averaged generator is nilpotent") * x
    }
    fn mu(&self, s: f64, t: f64) -> Complex64 {
        self.mu_coeff(s, t)
    }
    fn apply_central_phase(&self, phi: Complex64, x: &Self::State) -> Self::State {
        // e^{φ Z} = I + φ E₁₃ since Z² = 0.
        let mut y = x.clone();
        y[0] += phi * x[2];
        y
    }
    fn phase_quad(&self) -> QuadLevel {
        // Coefficients are degree ≤ 4 polynomials or trig monomials; 8-node
        // panels make the phase double integral exact to machine precision.
        QuadLevel::new(8, 8)
    }
}

/// Classical fixed-step RK4 solve of `U' = A(t)U`, `U(s) = I`, Richardson
/// extrapolated once. The error estimate is the distance between the two
/// underlying grids.
pub struct OdeOracle {
    pub u: DMatrix<Complex64>,
    pub error_estimate: f64,
}

pub fn ode_oracle<F: MatrixFamily>(family: &F, s: f64, t: f64, steps: usize) -> OdeOracle {
    let steps = steps.max(1);
    let coarse = rk4_sweep(family, s, t, steps);
    let fine = rk4_sweep(family, s, t, 2 * steps);
    let error_estimate = (&fine - &coarse).norm();
    // RK4 is order 4: eliminate the leading term.
    let u = (&fine * Complex64::new(16.0 / 15.0, 0.0)) - (&coarse * Complex64::new(1.0 / 15.0, 0.0));
    OdeOracle { u, error_estimate }
}

fn rk4_sweep<F: MatrixFamily>(family: &F, s: f64, t: f64, steps: usize) -> DMatrix<Complex64> {
    let n = family.dim();
    let mut u = DMatrix::<Complex64>::identity(n, n);
    let h = (t - s) / steps as f64;
    let hc = Complex64::new(h, 0.0);
    for i in 0..steps {
        let ti = s + i as f64 * h;
        let k1 = family.generator(ti) * &u;
        let k2 = family.generator(ti + 0.5 * h) * (&u + &k1 * (hc * 0.5));
        let k3 = family.generator(ti + 0.5 * h) * (&u + &k2 * (hc * 0.5));
        let k4 = family.generator(ti + h) * (&u + &k3 * hc);
        let two = Complex64::new(2.0, 0.0);
        u += (k1 + k2 * two + k3 * two + k4) * (hc / 6.0);
    }
    u
}
