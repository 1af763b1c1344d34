//! Partition machinery, generic product approximants, and the mesh-refinement
//! convergence driver shared by every backend.
//!
//! A backend exposes the exact exponential action of its frozen-time
//! generator through [`GeneratorFamily::exp_apply`]; the evolution of the
//! non-autonomous equation is then approximated by chaining frozen steps over
//! a partition and refining the mesh.

use rand::Rng;

use crate::error::{Error, Result};

/// Minimal state interface the generic drivers need: a norm and a metric.
///
/// Linear backends implement `distance` as the norm of the difference;
/// coherent labels use the exact Fock-space distance between the unit vectors
/// they represent.
pub trait State: Clone {
    fn norm(&self) -> f64;
    fn distance(&self, other: &Self) -> f64;
}

/// Declared stability bound: ordered products of frozen-time exponential
/// factors satisfy `‖e^{A(tₙ)sₙ}⋯e^{A(t₁)s₁}‖ ≤ M e^{ω Σ sᵢ}`.
#[derive(Debug, Clone, Copy)]
pub struct StabilityPair {
    /// Dimensionless prefactor, `M ≥ 1`.
    pub m: f64,
    /// Growth rate per unit time.
    pub omega: f64,
}

/// A time-indexed generator family on `[0, 1]` with exact frozen-time
/// exponential action on states.
pub trait GeneratorFamily {
    type State: State;

    /// Applies `e^{A(t)·tau}` to `x`. `tau` may be negative only when
    /// [`supports_groups`](Self::supports_groups) is true.
    fn exp_apply(&self, t: f64, tau: f64, x: &Self::State) -> Self::State;

    /// Applies the generator `A(t)` itself to a domain vector. Backends
    /// whose state representation cannot carry `A(t)x` (coherent labels
    /// leave their family under the generator) report it as unsupported.
    fn gen_apply(&self, _t: f64, _x: &Self::State) -> crate::error::Result<Self::State> {
        Err(crate::error::Error::UnsupportedBackend(
            "generator action is not representable on this backend's states",
        ))
    }

    /// Whether the frozen generators generate groups (negative durations
    /// allowed) rather than only semigroups.
    fn supports_groups(&self) -> bool {
        false
    }

    /// Declared stability metadata, verified by [`stability_probe`] rather
    /// than proven.
    fn stability(&self) -> StabilityPair;
}

/// An ordered mesh of a subinterval of `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Partition {
    points: Vec<f64>,
}

/// One frozen-step segment of a partition intersected with `[s, t]`:
/// evolve for `width` with the generator frozen at `frozen_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub frozen_time: f64,
    pub width: f64,
}

impl Partition {
    /// Builds a partition from explicit points (strictly increasing, within
    /// `[0, 1]`, at least two of them).
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidData("partition needs at least two points".into()));
        }
        if !points.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidData("partition points must be strictly increasing".into()));
        }
        if points[0] < 0.0 || *points.last().unwrap() > 1.0 {
            return Err(Error::InvalidData("partition points must lie in [0, 1]".into()));
        }
        Ok(Self { points })
    }

    /// Dyadic partition of `[s, t]` at the given level: `2^level + 1`
    /// equispaced points, mesh `(t - s) / 2^level`.
    pub fn dyadic(s: f64, t: f64, level: u32) -> Result<Self> {
        if !(s.is_finite() && t.is_finite()) || s >= t {
            return Err(Error::InvalidInterval { s, t });
        }
        let cells = 1usize << level;
        let h = (t - s) / cells as f64;
        let mut points: Vec<f64> = (0..cells).map(|i| s + i as f64 * h).collect();
        points.push(t);
        Self::from_points(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn span(&self) -> (f64, f64) {
        (self.points[0], *self.points.last().unwrap())
    }

    /// Largest mesh width.
    pub fn mesh(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the cell `[pᵢ, pᵢ₊₁)` containing `u`; the last cell is
    /// closed on the right.
    pub fn cell_index(&self, u: f64) -> Result<usize> {
        let (a, b) = self.span();
        if u < a || u > b {
            return Err(Error::InvalidData(format!("time {u} outside partition span [{a}, {b}]")));
        }
        let idx = match self.points.binary_search_by(|p| p.partial_cmp(&u).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        Ok(idx.min(self.points.len() - 2))
    }

    fn r_index(&self, u: f64) -> Result<usize> {
        let (a, b) = self.span();
        if u < a || u > b {
            return Err(Error::InvalidData(format!("time {u} outside partition span [{a}, {b}]")));
        }
        Ok(match self.points.binary_search_by(|p| p.partial_cmp(&u).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        })
    }

    /// Largest partition point `≤ u`.
    pub fn r(&self, u: f64) -> Result<f64> {
        Ok(self.points[self.r_index(u)?])
    }

    /// Neighboring partition point above `r(u)`; errors when `r(u)` is the
    /// right endpoint.
    pub fn r_plus(&self, u: f64) -> Result<f64> {
        let i = self.r_index(u)?;
        if i + 1 == self.points.len() {
            return Err(Error::InvalidData("r_plus undefined at the last point".into()));
        }
        Ok(self.points[i + 1])
    }

    /// Neighboring partition point below `r(u)`; errors when `r(u)` is the
    /// left endpoint.
    pub fn r_minus(&self, u: f64) -> Result<f64> {
        let i = self.r_index(u)?;
        if i == 0 {
            return Err(Error::InvalidData("r_minus undefined at the first point".into()));
        }
        Ok(self.points[i - 1])
    }

    /// Frozen-step segments covering `[s, t]`, in increasing time order.
    /// Each segment freezes the generator at the cell's left partition point
    /// and lasts as long as the cell overlaps `[s, t]`.
    pub fn segments(&self, s: f64, t: f64) -> Result<Vec<Segment>> {
        if s > t {
            return Err(Error::InvalidInterval { s, t });
        }
        let (a, b) = self.span();
        if s < a || t > b {
            return Err(Error::InvalidData(format!(
                "[{s}, {t}] not contained in partition span [{a}, {b}]"
            )));
        }
        let mut out = Vec::new();
        for w in self.points.windows(2) {
            let lo = w[0].max(s);
            let hi = w[1].min(t);
            if hi > lo {
                out.push(Segment { frozen_time: w[0], width: hi - lo });
            }
        }
        Ok(out)
    }
}

/// Builds the dyadic partition of `[s, t]` at the given refinement level.
pub fn build_dyadic_partition(s: f64, t: f64, level: u32) -> Result<Partition> {
    Partition::dyadic(s, t, level)
}

/// Piecewise-frozen exponential product over the partition cells meeting
/// `[s, t]`: `e^{A(r(t))(t−r(t))} ⋯ e^{A(r(s))(r⁺(s)−s)} x`, composed
/// right-to-left (earliest segment applied first).
pub fn product_approximant<F: GeneratorFamily>(
    family: &F,
    partition: &Partition,
    s: f64,
    t: f64,
    x: &F::State,
) -> Result<F::State> {
    let segments = partition.segments(s, t)?;
    let mut state = x.clone();
    for seg in segments {
        state = family.exp_apply(seg.frozen_time, seg.width, &state);
    }
    Ok(state)
}

/// Residual of the two-parameter composition law at `(r, s, t)`:
/// `‖U(t,s) U(s,r) x − U(t,r) x‖`.
pub fn cocycle_residual<S, U>(propagator: U, r: f64, s: f64, t: f64, x: &S) -> f64
where
    S: State,
    U: Fn(f64, f64, &S) -> S,
{
    let through = propagator(s, t, &propagator(r, s, x));
    let direct = propagator(r, t, x);
    through.distance(&direct)
}

/// Outcome of [`refine_to_convergence`].
#[derive(Debug, Clone)]
pub struct Refinement<S> {
    /// Last iterate computed.
    pub state: S,
    /// On convergence, the level `n` at which `‖U_{n+1}x − U_n x‖ ≤ tol`
    /// first held; otherwise the finest level computed.
    pub levels_used: u32,
    /// Successive differences `‖U_{n+1}x − U_n x‖`, one per refinement.
    pub estimates: Vec<f64>,
    /// Whether the last difference came in under the tolerance.
    pub converged: bool,
}

/// Doubles the partition level until successive product approximants differ
/// by at most `tol`, or `max_level` is reached. Non-convergence is flagged,
/// never silent: the best iterate and the whole estimate sequence are
/// returned either way.
pub fn refine_to_convergence<F: GeneratorFamily>(
    family: &F,
    s: f64,
    t: f64,
    x: &F::State,
    tol: f64,
    max_level: u32,
) -> Result<Refinement<F::State>> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidData("tolerance must be positive".into()));
    }
    if s == t {
        return Ok(Refinement { state: x.clone(), levels_used: 0, estimates: vec![0.0], converged: true });
    }
    let mut current = product_approximant(family, &Partition::dyadic(s, t, 0)?, s, t, x)?;
    let mut estimates = Vec::new();
    for level in 1..=max_level {
        let next = product_approximant(family, &Partition::dyadic(s, t, level)?, s, t, x)?;
        let diff = next.distance(&current);
        estimates.push(diff);
        current = next;
        if diff <= tol {
            return Ok(Refinement { state: current, levels_used: level - 1, estimates, converged: true });
        }
    }
    Ok(Refinement { state: current, levels_used: max_level, estimates, converged: false })
}

/// Fitted convergence order from errors at successive dyadic levels: the
/// negated least-squares slope of `log₂(error)` against level index.
pub fn convergence_order(errors: &[f64]) -> Result<f64> {
    if errors.len() < 3 {
        return Err(Error::InvalidData("order fit needs at least 3 errors".into()));
    }
    if let Some(bad) = errors.iter().find(|e| !e.is_finite() || **e <= 0.0) {
        return Err(Error::InvalidData(format!("order fit needs positive errors, got {bad}")));
    }
    let n = errors.len() as f64;
    let xs = 0..errors.len();
    let x_mean = (n - 1.0) / 2.0;
    let y: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let y_mean = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, yi) in xs.zip(&y) {
        let dx = i as f64 - x_mean;
        num += dx * (yi - y_mean);
        den += dx * dx;
    }
    Ok(-num / den)
}

/// Result of a randomized (M, ω)-stability probe.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// Largest observed `‖chain x‖ / (M e^{ω Σ τ} ‖x‖)` over all trials.
    pub worst_ratio: f64,
    pub trials: usize,
}

impl StabilityReport {
    /// The declared pair holds on every sampled chain (small slack for
    /// floating-point accumulation).
    pub fn holds(&self) -> bool {
        self.worst_ratio <= 1.0 + 1e-9
    }
}

/// Probes the declared stability pair with random ordered chains of at most
/// `max_factors` frozen-time factors applied to `draw_state` samples.
pub fn stability_probe<F, R, D>(
    family: &F,
    rng: &mut R,
    trials: usize,
    max_factors: usize,
    mut draw_state: D,
) -> StabilityReport
where
    F: GeneratorFamily,
    R: Rng,
    D: FnMut(&mut R) -> F::State,
{
    let StabilityPair { m, omega } = family.stability();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let k = rng.random_range(1..=max_factors);
        let mut times: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=1.0)).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let x = draw_state(rng);
        let x_norm = x.norm();
        if x_norm == 0.0 {
            continue;
        }
        let mut state = x;
        let mut total = 0.0;
        for &t in &times {
            let tau = rng.random_range(0.0..=2.0 / max_factors as f64);
            state = family.exp_apply(t, tau, &state);
            total += tau;
        }
        let bound = m * (omega * total).exp() * x_norm;
        worst = worst.max(state.norm() / bound);
    }
    StabilityReport { worst_ratio: worst, trials }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    impl State for Vec<Complex64> {
        fn norm(&self) -> f64 {
            self.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        }
        fn distance(&self, other: &Self) -> f64 {
            self.iter()
                .zip(other)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        }
    }

    /// Scalar family x' = a(t) x with commuting (1x1) generators.
    struct ScalarFamily<F: Fn(f64) -> Complex64>(F);

    impl<F: Fn(f64) -> Complex64> GeneratorFamily for ScalarFamily<F> {
        type State = Vec<Complex64>;
        fn exp_apply(&self, t: f64, tau: f64, x: &Self::State) -> Self::State {
            let factor = ((self.0)(t) * tau).exp();
            x.iter().map(|v| v * factor).collect()
        }
        fn supports_groups(&self) -> bool {
            true
        }
        fn stability(&self) -> StabilityPair {
            StabilityPair { m: 1.0, omega: 1.0 }
        }
    }

    #[test]
    fn dyadic_partition_base_case() {
        let p = build_dyadic_partition(0.0, 1.0, 0).unwrap();
        assert_eq!(p.points(), &[0.0, 1.0]);
        assert_abs_diff_eq!(p.mesh(), 1.0);
    }

    #[test]
    fn dyadic_partition_level_two() {
        let p = build_dyadic_partition(0.0, 1.0, 2).unwrap();
        assert_eq!(p.points(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_abs_diff_eq!(p.mesh(), 0.25);
    }

    #[test]
    fn dyadic_partition_subinterval() {
        let p = build_dyadic_partition(0.5, 1.0, 3).unwrap();
        assert_eq!(p.points().len(), 9);
        assert_abs_diff_eq!(p.mesh(), 0.0625, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(build_dyadic_partition(1.0, 1.0, 0).is_err());
        assert!(build_dyadic_partition(0.7, 0.2, 1).is_err());
    }

    #[test]
    fn partition_lookups() {
        let p = build_dyadic_partition(0.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(p.r(0.3).unwrap(), 0.25);
        assert_abs_diff_eq!(p.r_plus(0.3).unwrap(), 0.5);
        assert_abs_diff_eq!(p.r_minus(0.3).unwrap(), 0.0);
        // Exact mesh points are their own r(u).
        assert_abs_diff_eq!(p.r(0.25).unwrap(), 0.25);
        assert_abs_diff_eq!(p.r(1.0).unwrap(), 1.0);
        assert!(p.r_plus(1.0).is_err());
        assert!(p.r_minus(0.1).is_err());
        assert!(p.r(1.2).is_err());
        assert_eq!(p.cell_index(0.25).unwrap(), 1);
        assert_eq!(p.cell_index(1.0).unwrap(), 3);
    }

    #[test]
    fn empty_product_is_identity() {
        let fam = ScalarFamily(|_t| Complex64::new(0.3, 1.0));
        let p = build_dyadic_partition(0.0, 1.0, 3).unwrap();
        let x = vec![Complex64::new(1.0, -2.0)];
        let y = product_approximant(&fam, &p, 0.5, 0.5, &x).unwrap();
        assert_abs_diff_eq!(x.distance(&y), 0.0);
        assert!(product_approximant(&fam, &p, 0.8, 0.2, &x).is_err());
        assert!(product_approximant(&fam, &p, 0.0, 1.5, &x).is_err());
    }

    #[test]
    fn commuting_family_is_level_independent() {
        // Time-independent generator: U_n does not depend on the partition.
        let fam = ScalarFamily(|_t| Complex64::new(-0.2, 0.7));
        let x = vec![Complex64::new(0.4, 0.1)];
        let refinement = refine_to_convergence(&fam, 0.0, 1.0, &x, 1e-12, 4).unwrap();
        assert!(refinement.converged);
        assert_eq!(refinement.levels_used, 0);
        assert!(refinement.estimates[0] <= 1e-15);
    }

    #[test]
    fn scalar_family_converges_to_exact_integral() {
        // a(t) = i t: exact evolution exp(i(t² - s²)/2).
        let fam = ScalarFamily(|t| Complex64::new(0.0, t));
        let x = vec![Complex64::new(1.0, 0.0)];
        let refinement = refine_to_convergence(&fam, 0.0, 1.0, &x, 2e-5, 16).unwrap();
        assert!(refinement.converged);
        // The true error is about twice the last successive difference for a
        // first-order sequence.
        let exact = (Complex64::new(0.0, 0.5)).exp();
        assert!((refinement.state[0] - exact).norm() < 4e-5);
        // Successive differences decay by about a factor 2 per level.
        let order = convergence_order(&refinement.estimates).unwrap();
        assert!((0.9..1.1).contains(&order), "order {order}");
    }

    #[test]
    fn non_convergence_is_flagged() {
        let fam = ScalarFamily(|t| Complex64::new(0.0, 10.0 * t));
        let x = vec![Complex64::ONE];
        let refinement = refine_to_convergence(&fam, 0.0, 1.0, &x, 1e-14, 3).unwrap();
        assert!(!refinement.converged);
        assert_eq!(refinement.levels_used, 3);
    }

    #[test]
    fn order_fit_examples() {
        assert_abs_diff_eq!(convergence_order(&[0.4, 0.2, 0.1, 0.05]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(convergence_order(&[0.9, 0.3, 0.1]).unwrap(), 1.5849625007211563, epsilon = 1e-10);
        assert!(convergence_order(&[0.4, 0.0, 0.1]).is_err());
        assert!(convergence_order(&[0.4, 0.2]).is_err());
    }

    #[test]
    fn cocycle_residual_degenerate_times() {
        let fam = ScalarFamily(|t| Complex64::new(0.0, t));
        let x = vec![Complex64::ONE];
        let p = build_dyadic_partition(0.0, 1.0, 4).unwrap();
        let u = |a: f64, b: f64, y: &Vec<Complex64>| product_approximant(&fam, &p, a, b, y).unwrap();
        assert_abs_diff_eq!(cocycle_residual(u, 0.5, 0.5, 0.5, &x), 0.0);
    }

    #[test]
    fn cocycle_exact_at_partition_points() {
        let fam = ScalarFamily(|t| Complex64::new(0.1, t));
        let x = vec![Complex64::new(0.3, -0.4)];
        let p = build_dyadic_partition(0.0, 1.0, 4).unwrap();
        let u = |a: f64, b: f64, y: &Vec<Complex64>| product_approximant(&fam, &p, a, b, y).unwrap();
        // Split point on the mesh: composition is associative, residual is
        // pure floating-point noise.
        assert!(cocycle_residual(u, 0.0, 0.25, 1.0, &x) <= 1e-13);
    }
}
