//! Closed-form propagator for families with central pairwise commutators,
//! and its discrete Zassenhaus-type decomposition.
//!
//! When `[A(s), A(t)] = μ(s,t)·Z` with `Z` central, the evolution is
//! `U(t,s) = exp(∫ₛᵗ A(τ)dτ) · exp(½ ∫ₛᵗ∫ₛ^τ μ(τ,σ) dσ dτ · Z)` — the
//! time-ordered exponential collapses to a single averaged exponential and a
//! central phase correction. The discrete counterpart replaces the averaged
//! generator by the cell sum `B_n = Σ A(tⱼ)hⱼ` and the phase by the
//! cell-frozen double sum, giving an identity that holds exactly on matrix
//! backends: `e^{B_n r} = U_nʳ(t,s) · e^{−½ ν r² Z}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::commutator::{self, CentralElement, CommutatorField, MatrixFamily};
use crate::error::Result;
use crate::evolution::{self, GeneratorFamily, Partition, State};
use crate::heisenberg::nilpotent_exp;
use crate::quadrature::QuadLevel;

/// A backend exposing the exponential of its time-averaged generator and a
/// central pairwise commutator, i.e. everything the closed form needs.
pub trait ClosedFormBackend: GeneratorFamily {
    /// Applies `exp(B(s,t))` with `B(s,t) = ∫ₛᵗ A(τ)dτ` computed exactly.
    fn averaged_exp_apply(&self, s: f64, t: f64, x: &Self::State) -> Self::State;

    /// Scalar coefficient of the central commutator `[A(s), A(t)] = μ(s,t)·Z`.
    fn mu(&self, s: f64, t: f64) -> Complex64;

    /// Applies `e^{φ Z}` (a global phase on analytic backends, `I + φZ` on
    /// nilpotent matrix backends).
    fn apply_central_phase(&self, phi: Complex64, x: &Self::State) -> Self::State;

    /// Quadrature level for the phase double integral.
    fn phase_quad(&self) -> QuadLevel {
        QuadLevel::default()
    }
}

/// `U(t,s)x = exp(B(s,t)) · e^{½φ Z} x` with `φ = ∫ₛᵗ∫ₛ^τ μ(τ,σ) dσ dτ`.
pub fn closed_form_propagator<B: ClosedFormBackend>(
    backend: &B,
    s: f64,
    t: f64,
    x: &B::State,
) -> Result<B::State> {
    let phi = commutator::phase_integral(|tau, sigma| backend.mu(tau, sigma), s, t, backend.phase_quad())?;
    let phased = backend.apply_central_phase(0.5 * phi, x);
    Ok(backend.averaged_exp_apply(s, t, &phased))
}

/// Comparison of the closed form against refined product approximants.
#[derive(Debug, Clone)]
pub struct FormulaLimitReport {
    /// `(level, ‖U_level x − U_closed x‖)` for each swept level.
    pub distances: Vec<(u32, f64)>,
    /// Fitted convergence order of the distances (needs ≥ 3 levels).
    pub fitted_order: Option<f64>,
    /// Distance at the finest level.
    pub final_distance: f64,
    /// Whether the finest level met the tolerance.
    pub pass: bool,
}

/// Runs product approximants over dyadic levels and measures their distance
/// to the closed-form propagator applied to the same state.
pub fn formula_vs_limit<B: ClosedFormBackend>(
    backend: &B,
    s: f64,
    t: f64,
    x: &B::State,
    tol: f64,
    levels: std::ops::RangeInclusive<u32>,
) -> Result<FormulaLimitReport> {
    let closed = closed_form_propagator(backend, s, t, x)?;
    let mut distances = Vec::new();
    for level in levels {
        let pi = Partition::dyadic(s, t, level)?;
        let approx = evolution::product_approximant(backend, &pi, s, t, x)?;
        distances.push((level, approx.distance(&closed)));
    }
    let errs: Vec<f64> = distances.iter().map(|&(_, e)| e).collect();
    let fitted_order = if errs.len() >= 3 && errs.iter().all(|e| *e > 0.0) {
        evolution::convergence_order(&errs).ok()
    } else {
        None
    };
    let final_distance = errs.last().copied().unwrap_or(0.0);
    Ok(FormulaLimitReport { distances, fitted_order, final_distance, pass: final_distance <= tol })
}

/// Residual of the discrete Zassenhaus decomposition
/// `e^{B_n r} x = U_nʳ(t,s) · e^{−½ ν r² Z} x` on a nilpotent matrix
/// backend, where `B_n = Σⱼ A(tⱼ)hⱼ` and
/// `ν = ∫ₛᵗ∫ₛ^τ μ(r_n(τ), r_n(σ)) dσ dτ` is the cell-frozen double sum
/// (evaluated exactly, not by quadrature).
pub fn zassenhaus_check<F: MatrixFamily>(
    family: &F,
    field: &CommutatorField,
    partition: &Partition,
    s: f64,
    t: f64,
    r: f64,
    x: &nalgebra::DVector<Complex64>,
) -> Result<f64> {
    if field.order() != 1 {
        return Err(crate::error::Error::OrderOutOfRange { l: 1, p: field.order() });
    }
    let segments = partition.segments(s, t)?;
    let n = family.dim();

    let mut b_n = DMatrix::<Complex64>::zeros(n, n);
    for seg in &segments {
        b_n += family.generator(seg.frozen_time) * Complex64::new(seg.width, 0.0);
    }
    let lhs = nilpotent_exp(&(b_n * Complex64::new(r, 0.0)))? * x;

    // ν = Σ_{i<j} μ(tⱼ, tᵢ) hⱼ hᵢ  (the diagonal cells contribute nothing
    // because μ(t, t) = 0).
    let mut nu = Complex64::ZERO;
    for (j, sj) in segments.iter().enumerate() {
        for si in &segments[..j] {
            nu += field.mu2(sj.frozen_time, si.frozen_time)
                * Complex64::new(sj.width * si.width, 0.0);
        }
    }
    let phase = -0.5 * nu * Complex64::new(r * r, 0.0);
    let phased = match field.central() {
        CentralElement::Matrix(z) => x + z * x * phase,
        CentralElement::Scalar => x * phase.exp(),
    };
    let rhs = commutator::approximant_matrix(family, partition, s, t, r)? * phased;
    Ok((lhs - rhs).norm())
}
