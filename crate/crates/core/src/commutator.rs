//! Central commutator fields, phase double-integrals, multiplicity counting,
//! correction integrals, and commutation-pass identity checks.
//!
//! For a family whose p-fold commutators are central, the generator `A(r)`
//! passes through a product of frozen exponentials at the cost of correction
//! terms `S⁽¹⁾ + … + S⁽ᵖ⁾`; each `S⁽ˡ⁾` is a nested sum over weakly
//! decreasing tuples of partition cells, weighted by cell widths and divided
//! by the multiplicity of the tuple. On nilpotent matrix backends these are
//! exact operator identities, which is what [`commutation_pass_check`]
//! measures.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{GeneratorFamily, Partition};
use crate::quadrature::{self, QuadLevel};

/// The central element the scalar commutator multiplies: the abstract unit
/// for analytic backends, a fixed matrix `Z` (commuting with the whole
/// family) for matrix backends.
#[derive(Debug, Clone)]
pub enum CentralElement {
    Scalar,
    Matrix(DMatrix<Complex64>),
}

/// Evaluator of an operator-valued commutator at a tuple of times.
pub type OperatorEvaluator = Box<dyn Fn(&[f64]) -> DMatrix<Complex64> + Send + Sync>;
/// Evaluator of the scalar central-commutator coefficient.
pub type ScalarEvaluator = Box<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Commutator data of a generator family of order `p`:
///
/// * `c_ops[k-1]` evaluates the operator-valued k-fold commutator
///   `C⁽ᵏ⁾(t₁, …, t_{k+1})` for `1 ≤ k ≤ p−1`;
/// * `mu` evaluates the scalar coefficient of the central p-fold commutator
///   `C⁽ᵖ⁾(t₁, …, t_{p+1}) = μ(t₁, …, t_{p+1})·Z`.
pub struct CommutatorField {
    order: usize,
    c_ops: Vec<OperatorEvaluator>,
    mu: ScalarEvaluator,
    central: CentralElement,
}

impl CommutatorField {
    /// Order-1 field: pairwise commutators are already central.
    pub fn scalar_mu(
        mu: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
        central: CentralElement,
    ) -> Self {
        Self {
            order: 1,
            c_ops: Vec::new(),
            mu: Box::new(move |ts| mu(ts[0], ts[1])),
            central,
        }
    }

    /// General field of order `p` with `p − 1` operator-valued levels.
    pub fn with_operators(
        order: usize,
        c_ops: Vec<OperatorEvaluator>,
        mu: ScalarEvaluator,
        central: CentralElement,
    ) -> Result<Self> {
        if order == 0 || c_ops.len() != order - 1 {
            return Err(Error::InvalidData(format!(
                "order-{order} field needs {} operator levels, got {}",
                order.saturating_sub(1),
                c_ops.len()
            )));
        }
        Ok(Self { order, c_ops, mu, central })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn central(&self) -> &CentralElement {
        &self.central
    }

    /// Scalar coefficient of the central p-fold commutator at `p + 1` times.
    pub fn mu(&self, times: &[f64]) -> Complex64 {
        debug_assert_eq!(times.len(), self.order + 1);
        (self.mu)(times)
    }

    /// Order-1 convenience accessor.
    pub fn mu2(&self, s: f64, t: f64) -> Complex64 {
        debug_assert_eq!(self.order, 1, "mu2 is only meaningful for order-1 fields");
        (self.mu)(&[s, t])
    }

    /// Operator-valued `C⁽ᵏ⁾` at `k + 1` times, for `1 ≤ k ≤ p−1`.
    pub fn c_op(&self, k: usize, times: &[f64]) -> Result<DMatrix<Complex64>> {
        if k == 0 || k >= self.order {
            return Err(Error::OrderOutOfRange { l: k, p: self.order });
        }
        debug_assert_eq!(times.len(), k + 1);
        Ok(self.c_ops[k - 1](times))
    }
}

/// Number of permutations leaving the tuple invariant: the product over
/// distinct values of `count!`.
pub fn multiplicity_alpha(tuple: &[usize]) -> u64 {
    let mut sorted = tuple.to_vec();
    sorted.sort_unstable();
    let mut alpha = 1u64;
    let mut i = 0;
    while i < sorted.len() {
        let mut run = 1u64;
        while i + 1 < sorted.len() && sorted[i + 1] == sorted[i] {
            run += 1;
            i += 1;
            alpha *= run;
        }
        i += 1;
    }
    alpha
}

/// Iterated double integral `∫ₛᵗ ∫ₛ^τ μ(τ, σ) dσ dτ` by composite
/// Gauss–Legendre over the triangle. The caller applies the `½` factor of
/// the closed-form phase.
pub fn phase_integral(
    mu: impl Fn(f64, f64) -> Complex64,
    s: f64,
    t: f64,
    level: QuadLevel,
) -> Result<Complex64> {
    if s > t {
        return Err(Error::InvalidInterval { s, t });
    }
    quadrature::integrate(level, s, t, &|tau| {
        quadrature::integrate(level, s, tau, &|sigma| mu(tau, sigma)).expect("inner interval ordered")
    })
}

/// Max residual of `μ(s,t) + μ(t,s)` over the sample pairs: zero for an
/// antisymmetric field.
pub fn antisymmetry_check(mu: impl Fn(f64, f64) -> Complex64, samples: &[(f64, f64)]) -> f64 {
    samples
        .iter()
        .map(|&(s, t)| (mu(s, t) + mu(t, s)).norm())
        .fold(0.0, f64::max)
}

/// Sampled modulus-of-continuity probe for `μ` on the diagonal strip of
/// `[s, t]²`: the largest jump between neighbouring grid evaluations. Smooth
/// fields give O(1/n); a discontinuity shows up as an O(1) value.
pub fn continuity_probe(mu: impl Fn(f64, f64) -> Complex64, s: f64, t: f64, n: usize) -> f64 {
    let h = (t - s) / n as f64;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let a = s + i as f64 * h;
        for j in 0..n {
            let b = s + j as f64 * h;
            let here = mu(a, b);
            worst = worst.max((mu(a + h, b) - here).norm());
            worst = worst.max((mu(a, b + h) - here).norm());
        }
    }
    worst
}

/// Visits every weakly decreasing tuple `(j₁ ≥ j₂ ≥ … ≥ j_l)` over cell
/// indices `0..m` together with its weight `h_{j₁}⋯h_{j_l} / α`.
fn for_each_weighted_tuple(
    widths: &[f64],
    l: usize,
    visit: &mut dyn FnMut(&[usize], f64),
) {
    let mut tuple = vec![0usize; l];
    fn recurse(
        widths: &[f64],
        tuple: &mut Vec<usize>,
        depth: usize,
        max_index: usize,
        weight: f64,
        visit: &mut dyn FnMut(&[usize], f64),
    ) {
        if depth == tuple.len() {
            let alpha = multiplicity_alpha(tuple) as f64;
            visit(tuple, weight / alpha);
            return;
        }
        for j in 0..=max_index {
            tuple[depth] = j;
            recurse(widths, tuple, depth + 1, j, weight * widths[j], visit);
        }
    }
    if l == 0 {
        return;
    }
    for j in 0..widths.len() {
        tuple[0] = j;
        recurse(widths, &mut tuple, 1, j, widths[j], visit);
    }
}

/// A correction integral value: operator-valued for `l < p`, a scalar
/// coefficient of the central element for `l = p`.
#[derive(Debug, Clone)]
pub enum CorrectionTerm {
    Operator(DMatrix<Complex64>),
    Central(Complex64),
}

/// The correction integral `S⁽ˡ⁾ₙ(t, s, r)` over the cells of `[s, t]`:
/// `Σ_{j_l ≤ … ≤ j₁} C⁽ˡ⁾(r, t_{j₁}, …, t_{j_l}) / α · h_{j₁}⋯h_{j_l}`,
/// the iterated-integral form with piecewise-constant integrand.
pub fn correction_integral_s(
    field: &CommutatorField,
    partition: &Partition,
    s: f64,
    t: f64,
    r: f64,
    l: usize,
) -> Result<CorrectionTerm> {
    let p = field.order();
    if l == 0 || l > p {
        return Err(Error::OrderOutOfRange { l, p });
    }
    let segments = partition.segments(s, t)?;
    let widths: Vec<f64> = segments.iter().map(|seg| seg.width).collect();
    let frozen: Vec<f64> = segments.iter().map(|seg| seg.frozen_time).collect();
    let mut times = vec![0.0; l + 1];
    times[0] = r;
    if l == p {
        let mut acc = Complex64::ZERO;
        for_each_weighted_tuple(&widths, l, &mut |tuple, w| {
            for (slot, &j) in times[1..].iter_mut().zip(tuple) {
                *slot = frozen[j];
            }
            acc += field.mu(&times) * w;
        });
        Ok(CorrectionTerm::Central(acc))
    } else {
        if widths.is_empty() {
            // Degenerate interval: the integral vanishes; evaluate once to
            // recover the operator shape.
            for slot in times[1..].iter_mut() {
                *slot = s;
            }
            return Ok(CorrectionTerm::Operator(field.c_op(l, &times)? * Complex64::ZERO));
        }
        let mut acc: Option<DMatrix<Complex64>> = None;
        let mut err = None;
        for_each_weighted_tuple(&widths, l, &mut |tuple, w| {
            for (slot, &j) in times[1..].iter_mut().zip(tuple) {
                *slot = frozen[j];
            }
            match field.c_op(l, &times) {
                Ok(c) => {
                    let scaled = c * Complex64::new(w, 0.0);
                    acc = Some(match acc.take() {
                        Some(a) => a + scaled,
                        None => scaled,
                    });
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(CorrectionTerm::Operator(acc.expect("non-empty widths visit at least one tuple")))
    }
}

/// A backend with exact operator arithmetic: generators and their frozen
/// exponentials are available as dense matrices acting on vector states.
pub trait MatrixFamily: GeneratorFamily<State = DVector<Complex64>> {
    fn dim(&self) -> usize;
    /// `A(t)` as a matrix.
    fn generator(&self, t: f64) -> DMatrix<Complex64>;
    /// `e^{A(t)·tau}` as a matrix.
    fn exp_matrix(&self, t: f64, tau: f64) -> DMatrix<Complex64>;
}

/// Product `e^{A(t_m)h_m} ⋯ e^{A(t_1)h_1}` over the partition cells of
/// `[s, t]`, optionally with every generator scaled by `r`.
pub fn approximant_matrix<F: MatrixFamily>(
    family: &F,
    partition: &Partition,
    s: f64,
    t: f64,
    scale: f64,
) -> Result<DMatrix<Complex64>> {
    let mut u = DMatrix::identity(family.dim(), family.dim());
    for seg in partition.segments(s, t)? {
        u = family.exp_matrix(seg.frozen_time, scale * seg.width) * u;
    }
    Ok(u)
}

/// Residual of the commutation-pass identity
/// `A(r) U_n x = U_n (A(r) + S⁽¹⁾ + … + S⁽ᵖ⁾) x`
/// on a matrix backend. Exact up to floating-point accumulation when the
/// p-fold commutators of the family are central.
pub fn commutation_pass_check<F: MatrixFamily>(
    family: &F,
    field: &CommutatorField,
    partition: &Partition,
    s: f64,
    t: f64,
    r: f64,
    x: &DVector<Complex64>,
) -> Result<f64> {
    let u = approximant_matrix(family, partition, s, t, 1.0)?;
    let a_r = family.generator(r);
    let lhs = &a_r * (&u * x);

    // (A(r) + Σ S^(l)) x
    let mut inner = &a_r * x;
    for l in 1..=field.order() {
        match correction_integral_s(field, partition, s, t, r, l)? {
            CorrectionTerm::Operator(op) => inner += op * x,
            CorrectionTerm::Central(coeff) => match field.central() {
                CentralElement::Matrix(z) => inner += z * x * coeff,
                CentralElement::Scalar => inner += x * coeff,
            },
        }
    }
    let rhs = u * inner;
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Brute-force stabilizer count: permutations σ with tuple∘σ = tuple.
    pub(crate) fn stabilizer_count(tuple: &[usize]) -> u64 {
        fn heap(perm: &mut Vec<usize>, k: usize, tuple: &[usize], count: &mut u64) {
            if k == 1 {
                let fixed = perm.iter().enumerate().all(|(i, &p)| tuple[p] == tuple[i]);
                if fixed {
                    *count += 1;
                }
                return;
            }
            for i in 0..k {
                heap(perm, k - 1, tuple, count);
                if k.is_multiple_of(2) {
                    perm.swap(i, k - 1);
                } else {
                    perm.swap(0, k - 1);
                }
            }
        }
        let mut perm: Vec<usize> = (0..tuple.len()).collect();
        let mut count = 0;
        heap(&mut perm, tuple.len(), tuple, &mut count);
        count
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity_alpha(&[3, 1, 2]), 1);
        assert_eq!(multiplicity_alpha(&[1, 1]), 2);
        assert_eq!(multiplicity_alpha(&[2, 2, 2, 5]), 6);
        assert_eq!(multiplicity_alpha(&[]), 1);
    }

    #[test]
    fn multiplicity_matches_brute_force() {
        assert_eq!(stabilizer_count(&[1, 1]), 2);
        assert_eq!(stabilizer_count(&[2, 2, 2, 5]), 6);
        for tuple in [&[1usize, 2, 1][..], &[4, 4, 4, 4], &[1, 2, 3, 1, 2]] {
            assert_eq!(multiplicity_alpha(tuple), stabilizer_count(tuple), "{tuple:?}");
        }
    }

    #[test]
    fn phase_integral_zero_field() {
        let got = phase_integral(|_, _| Complex64::ZERO, 0.0, 1.0, QuadLevel::default()).unwrap();
        assert_abs_diff_eq!(got.norm(), 0.0);
    }

    #[test]
    fn phase_integral_linear_field() {
        // μ(τ, σ) = σ − τ: ∫₀¹∫₀^τ (σ − τ) dσ dτ = −1/6.
        let got = phase_integral(
            |tau, sigma| Complex64::new(sigma - tau, 0.0),
            0.0,
            1.0,
            QuadLevel::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(got.re, -1.0 / 6.0, epsilon = 1e-13);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn phase_integral_sine_field() {
        // μ(τ, σ) = sin(σ − τ): ∫₀ᵗ(cos τ − 1)dτ = sin t − t; at t = π the
        // value is −π.
        let t = std::f64::consts::PI;
        let got = phase_integral(
            |tau, sigma| Complex64::new((sigma - tau).sin(), 0.0),
            0.0,
            t,
            QuadLevel::new(8, 8),
        )
        .unwrap();
        assert_abs_diff_eq!(got.re, -t, epsilon = 1e-12);
    }

    #[test]
    fn phase_integral_quadrature_self_consistency() {
        let mu = |tau: f64, sigma: f64| Complex64::new((3.0 * sigma).cos() * tau, (sigma - tau).sin());
        let a = phase_integral(mu, 0.1, 0.9, QuadLevel::new(8, 6)).unwrap();
        let b = phase_integral(mu, 0.1, 0.9, QuadLevel::new(8, 7)).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn phase_integral_rejects_reversed_interval() {
        assert!(phase_integral(|_, _| Complex64::ZERO, 1.0, 0.0, QuadLevel::default()).is_err());
    }

    #[test]
    fn antisymmetry_detects_broken_field() {
        let samples: Vec<(f64, f64)> = (0..16)
            .flat_map(|i| (0..16).map(move |j| (i as f64 / 15.0, j as f64 / 15.0)))
            .collect();
        let ok = antisymmetry_check(|s, t| Complex64::new(t - s, 0.0), &samples);
        assert_abs_diff_eq!(ok, 0.0);
        // μ(s,t) = st is symmetric: residual 2·max(st) = 2.
        let broken = antisymmetry_check(|s, t| Complex64::new(s * t, 0.0), &samples);
        assert_abs_diff_eq!(broken, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn continuity_probe_flags_jump() {
        let smooth = continuity_probe(|s, t| Complex64::new((s + t).sin(), 0.0), 0.0, 1.0, 64);
        assert!(smooth < 0.05, "{smooth}");
        let jumpy = continuity_probe(
            |s, t| Complex64::new(if s + t > 1.0 { 1.0 } else { 0.0 }, 0.0),
            0.0,
            1.0,
            64,
        );
        assert!(jumpy > 0.9, "{jumpy}");
    }

    #[test]
    fn correction_single_cell_order_one() {
        // p = 1, π = {s, t}: S⁽¹⁾ = μ(r, s)·(t − s).
        let field = CommutatorField::scalar_mu(
            |s, t| Complex64::new(t - s, 0.0),
            CentralElement::Scalar,
        );
        let pi = Partition::dyadic(0.0, 1.0, 0).unwrap();
        match correction_integral_s(&field, &pi, 0.0, 1.0, 1.0, 1).unwrap() {
            CorrectionTerm::Central(v) => assert_abs_diff_eq!(v.re, -1.0, epsilon = 1e-15),
            _ => panic!("expected central term"),
        }
    }

    #[test]
    fn correction_two_cells_order_one() {
        // μ(s, t) = t − s, π = {0, ½, 1}, r = 1:
        // S⁽¹⁾ = μ(1, 0)·½ + μ(1, ½)·½ = −0.75.
        let field = CommutatorField::scalar_mu(
            |s, t| Complex64::new(t - s, 0.0),
            CentralElement::Scalar,
        );
        let pi = Partition::dyadic(0.0, 1.0, 1).unwrap();
        match correction_integral_s(&field, &pi, 0.0, 1.0, 1.0, 1).unwrap() {
            CorrectionTerm::Central(v) => assert_abs_diff_eq!(v.re, -0.75, epsilon = 1e-15),
            _ => panic!("expected central term"),
        }
    }

    #[test]
    fn correction_order_two_single_cell() {
        // p = 2, l = 2, π = {s, t}: the only tuple is (1,1) with α = 2, so
        // S⁽²⁾ = μ(r, s, s)·(t − s)²/2.
        let field = CommutatorField::with_operators(
            2,
            vec![Box::new(|_ts: &[f64]| DMatrix::<Complex64>::zeros(2, 2))],
            Box::new(|ts: &[f64]| Complex64::new(ts[0] + 2.0 * ts[1] - ts[2], 0.0)),
            CentralElement::Scalar,
        )
        .unwrap();
        let pi = Partition::from_points(vec![0.2, 0.9]).unwrap();
        match correction_integral_s(&field, &pi, 0.2, 0.9, 0.5, 2).unwrap() {
            CorrectionTerm::Central(v) => {
                // μ(0.5, 0.2, 0.2) = 0.5 + 0.4 − 0.2 = 0.7; weight 0.49/2.
                assert_abs_diff_eq!(v.re, 0.7 * 0.49 / 2.0, epsilon = 1e-15);
            }
            _ => panic!("expected central term"),
        }
    }

    #[test]
    fn correction_rejects_out_of_range_order() {
        let field = CommutatorField::scalar_mu(|_, _| Complex64::ZERO, CentralElement::Scalar);
        let pi = Partition::dyadic(0.0, 1.0, 0).unwrap();
        assert!(matches!(
            correction_integral_s(&field, &pi, 0.0, 1.0, 0.5, 2),
            Err(Error::OrderOutOfRange { l: 2, p: 1 })
        ));
        assert!(correction_integral_s(&field, &pi, 0.0, 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn order_one_correction_approaches_integral() {
        // For p = 1 and a refined partition, S⁽¹⁾ₙ(t,s,r) → ∫ₛᵗ μ(r, σ) dσ
        // at first order in the mesh.
        let mu = |s: f64, t: f64| Complex64::new((2.0 * t).sin() - s, 0.0);
        let field = CommutatorField::scalar_mu(mu, CentralElement::Scalar);
        let r = 0.7;
        let exact = quadrature::integrate(QuadLevel::new(16, 8), 0.0, 1.0, &|sigma| mu(r, sigma)).unwrap();
        let mut errors = Vec::new();
        for level in 3..=8 {
            let pi = Partition::dyadic(0.0, 1.0, level).unwrap();
            let got = match correction_integral_s(&field, &pi, 0.0, 1.0, r, 1).unwrap() {
                CorrectionTerm::Central(v) => v,
                _ => unreachable!(),
            };
            errors.push((got - exact).norm());
        }
        let order = crate::evolution::convergence_order(&errors).unwrap();
        assert!((0.8..1.2).contains(&order), "order {order}, errors {errors:?}");
    }
}
