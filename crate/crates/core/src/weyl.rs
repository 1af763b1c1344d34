//! Exact coherent-state dynamics for Segal-field and van Hove generators on
//! a finite-mode boson field.
//!
//! States are coherent labels `e^{iθ}|α⟩`: displacements map coherent states
//! to coherent states, so the whole Heisenberg-group action reduces to exact
//! bookkeeping on `(α, θ)`. The displacement rule for `e^{iΦ(f)}` (the map
//! `f ↦ i f/√2` plus its phase increment) is a convention frozen here and
//! validated against the truncated-Fock matrix oracle in [`crate::fock`]
//! rather than asserted from the literature, since sign and √2 conventions
//! vary across sources.

use num_complex::Complex64;

use crate::commutator;
use crate::error::{Error, Result};
use crate::evolution::{GeneratorFamily, StabilityPair, State};
use crate::magnus::ClosedFormBackend;
use crate::quadrature::QuadLevel;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Finite mode space: `m` modes with positive frequencies.
#[derive(Debug, Clone)]
pub struct ModeSpace {
    omega: Vec<f64>,
}

impl ModeSpace {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidData("mode frequencies must be positive".into()));
        }
        Ok(Self { omega })
    }

    pub fn modes(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }
}

/// Weyl-operator parameter `f ∈ ℂᵐ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylParam(pub Vec<Complex64>);

impl WeylParam {
    pub fn zero(m: usize) -> Self {
        Self(vec![Complex64::ZERO; m])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨f, g⟩ = Σ conj(f_k) g_k` (antilinear in the first slot).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.0.len() != other.0.len() {
            return Err(Error::DimensionMismatch(self.0.len(), other.0.len()));
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Coherent label `e^{iθ}|α⟩` — a unit vector by construction.
#[derive(Debug, Clone)]
pub struct CoherentLabel {
    pub alpha: Vec<Complex64>,
    pub theta: f64,
}

impl CoherentLabel {
    pub fn vacuum(m: usize) -> Self {
        Self { alpha: vec![Complex64::ZERO; m], theta: 0.0 }
    }

    pub fn new(alpha: Vec<Complex64>, theta: f64) -> Self {
        Self { alpha, theta }
    }

    /// Full state overlap `⟨self, other⟩` including the global phases:
    /// `e^{i(θ'−θ)} exp(−½‖α‖² − ½‖α'‖² + ⟨α, α'⟩)`.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.alpha.len(), other.alpha.len());
        let mut exponent = Complex64::new(0.0, other.theta - self.theta);
        for (a, b) in self.alpha.iter().zip(&other.alpha) {
            exponent += a.conj() * b - 0.5 * (a.norm_sqr() + b.norm_sqr());
        }
        exponent.exp()
    }
}

impl State for CoherentLabel {
    fn norm(&self) -> f64 {
        1.0
    }
    fn distance(&self, other: &Self) -> f64 {
        // ‖u − v‖² = 2 − 2 Re⟨u, v⟩ with ⟨u, v⟩ = e^{x + iy},
        // x = −½ Σ|α_k − α'_k|² and y = Δθ + Σ Im(conj(α_k) α'_k).
        // Evaluated via expm1/sin so distances far below √ε stay resolved.
        let mut x = 0.0;
        let mut y = other.theta - self.theta;
        for (a, b) in self.alpha.iter().zip(&other.alpha) {
            x -= 0.5 * (a - b).norm_sqr();
            y += (a.conj() * b).im;
        }
        let half_sin = (0.5 * y).sin();
        let dist_sq = 2.0 * (-f64::exp_m1(x) + x.exp() * 2.0 * half_sin * half_sin);
        dist_sq.max(0.0).sqrt()
    }
}

/// Weyl composition law: `W(f)W(g) = W(f + g) e^{−(i/2) Im⟨f,g⟩}`.
/// Returns the composed parameter and the phase angle `−½ Im⟨f,g⟩`.
pub fn weyl_compose(f: &WeylParam, g: &WeylParam) -> Result<(WeylParam, f64)> {
    let inner = f.inner(g)?;
    let sum = WeylParam(f.0.iter().zip(&g.0).map(|(a, b)| a + b).collect());
    Ok((sum, -0.5 * inner.im))
}

/// Applies `W(f) = e^{iΦ(f)}` to a coherent label: per mode the displacement
/// `d_k = i f_k/√2`, with phase increment `Σ Im(d_k conj(α_k))`.
pub fn weyl_apply_coherent(f: &WeylParam, x: &CoherentLabel) -> CoherentLabel {
    debug_assert_eq!(f.0.len(), x.alpha.len());
    let mut alpha = Vec::with_capacity(x.alpha.len());
    let mut theta = x.theta;
    for (fk, ak) in f.0.iter().zip(&x.alpha) {
        let d = Complex64::i() * fk / SQRT2;
        theta += (d * ak.conj()).im;
        alpha.push(ak + d);
    }
    CoherentLabel { alpha, theta }
}

/// Drive profile `f_k(t) = c_k e^{i r_k t}` per mode — closed under the
/// interaction-picture twist and exactly integrable.
#[derive(Debug, Clone)]
pub struct RotatingProfile {
    amp: Vec<Complex64>,
    rate: Vec<f64>,
}

impl RotatingProfile {
    pub fn new(amp: Vec<Complex64>, rate: Vec<f64>) -> Result<Self> {
        if amp.len() != rate.len() {
            return Err(Error::DimensionMismatch(amp.len(), rate.len()));
        }
        Ok(Self { amp, rate })
    }

    /// Constant drive `f_k(t) = c_k`.
    pub fn constant(amp: Vec<Complex64>) -> Self {
        let n = amp.len();
        Self { amp, rate: vec![0.0; n] }
    }

    /// Uniformly modulated drive `f_k(t) = c_k e^{i r t}`.
    pub fn rotating(amp: Vec<Complex64>, rate: f64) -> Self {
        let n = amp.len();
        Self { amp, rate: vec![rate; n] }
    }

    pub fn modes(&self) -> usize {
        self.amp.len()
    }

    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        self.amp
            .iter()
            .zip(&self.rate)
            .map(|(c, r)| c * Complex64::new(0.0, r * t).exp())
            .collect()
    }

    /// Exact `∫ₛᵗ f_τ dτ` per mode.
    pub fn integral(&self, s: f64, t: f64) -> Vec<Complex64> {
        self.amp
            .iter()
            .zip(&self.rate)
            .map(|(c, &r)| {
                if r == 0.0 {
                    c * (t - s)
                } else {
                    let ir = Complex64::new(0.0, r);
                    c * ((ir * t).exp() - (ir * s).exp()) / ir
                }
            })
            .collect()
    }

    /// Central commutator coefficient of `A(t) = iΦ(f_t)`:
    /// `μ(s,t) = −i Im⟨f_s, f_t⟩ = −i Σ |c_k|² sin(r_k (t − s))`.
    pub fn mu(&self, s: f64, t: f64) -> Complex64 {
        let im: f64 = self
            .amp
            .iter()
            .zip(&self.rate)
            .map(|(c, r)| c.norm_sqr() * (r * (t - s)).sin())
            .sum();
        Complex64::new(0.0, -im)
    }

    /// Exact phase angle `−½ ∫ₛᵗ∫ₛ^τ Im⟨f_τ, f_σ⟩ dσ dτ`.
    pub fn phase_angle(&self, s: f64, t: f64) -> f64 {
        let delta = t - s;
        let mut acc = 0.0;
        for (c, &r) in self.amp.iter().zip(&self.rate) {
            if r != 0.0 {
                // ∫ₛᵗ∫ₛ^τ sin(r(σ−τ)) dσ dτ = sin(rΔ)/r² − Δ/r
                acc += c.norm_sqr() * ((r * delta).sin() / (r * r) - delta / r);
            }
        }
        -0.5 * acc
    }

    /// Interaction-picture twist `f̃_t = −e^{iωt} f_t` for the given modes.
    pub fn interaction_picture(&self, modes: &ModeSpace) -> Result<Self> {
        if modes.modes() != self.modes() {
            return Err(Error::DimensionMismatch(modes.modes(), self.modes()));
        }
        Ok(Self {
            amp: self.amp.iter().map(|c| -c).collect(),
            rate: self.rate.iter().zip(modes.omega()).map(|(r, w)| r + w).collect(),
        })
    }
}

/// Closed-form evolution data of the Segal family `A(t) = iΦ(f_t)`: the
/// Weyl parameter `g = ∫ₛᵗ f_τ dτ` and the accumulated phase angle. Exact
/// for a [`RotatingProfile`].
pub fn segal_evolution(profile: &RotatingProfile, s: f64, t: f64) -> Result<(WeylParam, f64)> {
    if s > t {
        return Err(Error::InvalidInterval { s, t });
    }
    Ok((WeylParam(profile.integral(s, t)), profile.phase_angle(s, t)))
}

/// Quadrature variant of [`segal_evolution`] for an arbitrary continuous
/// drive `t ↦ f_t ∈ ℂᵐ`. A sampled-modulus probe rejects drives that jump.
pub fn segal_evolution_quad(
    f: impl Fn(f64) -> Vec<Complex64>,
    modes: usize,
    s: f64,
    t: f64,
    level: QuadLevel,
) -> Result<(WeylParam, f64)> {
    if s > t {
        return Err(Error::InvalidInterval { s, t });
    }
    // Continuity probe: adjacent samples should not jump by more than the
    // overall scale of the drive.
    let samples = 64;
    let mut scale: f64 = 1e-300;
    let mut jump: f64 = 0.0;
    let mut prev = f(s);
    for i in 1..=samples {
        let cur = f(s + (t - s) * i as f64 / samples as f64);
        let d: f64 = cur.iter().zip(&prev).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let n: f64 = cur.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        jump = jump.max(d);
        scale = scale.max(n);
        prev = cur;
    }
    if jump > 0.5 * scale.max(1e-12) {
        return Err(Error::InvalidData(format!(
            "drive looks discontinuous: sampled jump {jump:.3e} vs scale {scale:.3e}"
        )));
    }

    let mut g = Vec::with_capacity(modes);
    for k in 0..modes {
        g.push(crate::quadrature::integrate(level, s, t, &|tau| f(tau)[k])?);
    }
    let gp = WeylParam(g);
    let mu = |tau: f64, sigma: f64| {
        let ft = f(tau);
        let fs = f(sigma);
        let im: f64 = ft.iter().zip(&fs).map(|(a, b)| (a.conj() * b).im).sum();
        Complex64::new(0.0, -im)
    };
    let phi = commutator::phase_integral(mu, s, t, level)?;
    Ok((gp, 0.5 * phi.im))
}

/// Applies the Segal evolution `U(t,s) = W(g)·e^{iφ}` to a coherent label.
pub fn segal_apply(profile: &RotatingProfile, s: f64, t: f64, x: &CoherentLabel) -> Result<CoherentLabel> {
    let (g, phase) = segal_evolution(profile, s, t)?;
    let mut out = weyl_apply_coherent(&g, x);
    out.theta += phase;
    Ok(out)
}

/// Free-field rotation `e^{−iH_ω u}`: `α ↦ e^{−iωu} α`, phase unchanged
/// (finite modes, vacuum energy zero).
pub fn free_rotation(modes: &ModeSpace, u: f64, x: &CoherentLabel) -> CoherentLabel {
    let alpha = x
        .alpha
        .iter()
        .zip(modes.omega())
        .map(|(a, w)| a * Complex64::new(0.0, -w * u).exp())
        .collect();
    CoherentLabel { alpha, theta: x.theta }
}

/// Interaction-picture evolution of the linearly driven field
/// `H(t) = H_ω + Φ(f_t)`: rotate into the picture at time `s`, run the
/// Segal evolution of the twisted drive `f̃_τ = −e^{iωτ} f_τ`, rotate back
/// at time `t`.
pub fn vanhove_evolution(
    profile: &RotatingProfile,
    modes: &ModeSpace,
    s: f64,
    t: f64,
    x: &CoherentLabel,
) -> Result<CoherentLabel> {
    let twisted = profile.interaction_picture(modes)?;
    let rotated_in = free_rotation(modes, -s, x);
    let evolved = segal_apply(&twisted, s, t, &rotated_in)?;
    Ok(free_rotation(modes, t, &evolved))
}

/// The Segal family `A(t) = iΦ(f_t)` as a generator backend on coherent
/// labels. Frozen exponentials are `e^{iΦ(f_t)τ} = W(τ f_t)`.
#[derive(Debug, Clone)]
pub struct WeylFamily {
    profile: RotatingProfile,
}

impl WeylFamily {
    pub fn new(profile: RotatingProfile) -> Self {
        Self { profile }
    }

    pub fn profile(&self) -> &RotatingProfile {
        &self.profile
    }
}

impl GeneratorFamily for WeylFamily {
    type State = CoherentLabel;

    fn exp_apply(&self, t: f64, tau: f64, x: &Self::State) -> Self::State {
        let f = WeylParam(self.profile.eval(t).into_iter().map(|z| z * tau).collect());
        weyl_apply_coherent(&f, x)
    }

    fn supports_groups(&self) -> bool {
        true
    }

    fn stability(&self) -> StabilityPair {
        // Unitary group: exact isometries.
        StabilityPair { m: 1.0, omega: 0.0 }
    }
}

impl ClosedFormBackend for WeylFamily {
    fn averaged_exp_apply(&self, s: f64, t: f64, x: &Self::State) -> Self::State {
        weyl_apply_coherent(&WeylParam(self.profile.integral(s, t)), x)
    }

    fn mu(&self, s: f64, t: f64) -> Complex64 {
        self.profile.mu(s, t)
    }

    fn apply_central_phase(&self, phi: Complex64, x: &Self::State) -> Self::State {
        // μ is purely imaginary here, so e^{φ} is a unit phase.
        debug_assert!(phi.re.abs() < 1e-12);
        let mut out = x.clone();
        out.theta += phi.im;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::cocycle_residual;
    use crate::magnus::{closed_form_propagator, formula_vs_limit};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weyl_compose_examples() {
        let f = WeylParam(vec![c(1.0, 0.0)]);
        // (f, f): Im⟨f,f⟩ = 0.
        let (sum, phase) = weyl_compose(&f, &f).unwrap();
        assert_eq!(sum.0[0], c(2.0, 0.0));
        assert_abs_diff_eq!(phase, 0.0);

        // f = (1), g = (i): Im⟨f,g⟩ = 1, phase −½.
        let g = WeylParam(vec![c(0.0, 1.0)]);
        let (sum, phase) = weyl_compose(&f, &g).unwrap();
        assert_eq!(sum.0[0], c(1.0, 1.0));
        assert_abs_diff_eq!(phase, -0.5);

        // (f, −f): W(0) with no phase.
        let neg = WeylParam(vec![c(-1.0, 0.0)]);
        let (sum, phase) = weyl_compose(&f, &neg).unwrap();
        assert_abs_diff_eq!(sum.norm(), 0.0);
        assert_abs_diff_eq!(phase, 0.0);

        assert!(weyl_compose(&f, &WeylParam::zero(2)).is_err());
    }

    #[test]
    fn compose_phase_is_antisymmetric() {
        let f = WeylParam(vec![c(0.3, -0.8), c(1.1, 0.2)]);
        let g = WeylParam(vec![c(-0.5, 0.4), c(0.0, 0.9)]);
        let (_, pfg) = weyl_compose(&f, &g).unwrap();
        let (_, pgf) = weyl_compose(&g, &f).unwrap();
        assert_abs_diff_eq!(pfg, -pgf, epsilon = 1e-15);
    }

    #[test]
    fn displacement_magnitude() {
        // f = √2·i displaces the vacuum to |α| = ‖f‖/√2 = 1.
        let f = WeylParam(vec![c(0.0, SQRT2)]);
        let out = weyl_apply_coherent(&f, &CoherentLabel::vacuum(1));
        assert_abs_diff_eq!(out.alpha[0].norm(), 1.0, epsilon = 1e-15);
        // f = 0 leaves the label alone.
        let id = weyl_apply_coherent(&WeylParam::zero(1), &out);
        assert_abs_diff_eq!(out.distance(&id), 0.0);
    }

    #[test]
    fn apply_then_apply_equals_composed() {
        let f = WeylParam(vec![c(0.4, -0.3), c(-0.2, 0.7)]);
        let g = WeylParam(vec![c(-0.9, 0.1), c(0.5, 0.5)]);
        let x = CoherentLabel::new(vec![c(0.2, 0.6), c(-0.4, -0.1)], 0.3);

        // Apply f first, then g.
        let sequential = weyl_apply_coherent(&g, &weyl_apply_coherent(&f, &x));
        // W(g)W(f) = W(g + f) e^{−(i/2) Im⟨g,f⟩}.
        let (sum, phase) = weyl_compose(&g, &f).unwrap();
        let mut composed = weyl_apply_coherent(&sum, &x);
        composed.theta += phase;
        assert!(sequential.distance(&composed) < 1e-14);
    }

    #[test]
    fn segal_constant_drive() {
        let profile = RotatingProfile::constant(vec![c(0.8, -0.1)]);
        let (g, phase) = segal_evolution(&profile, 0.2, 0.9).unwrap();
        assert!((g.0[0] - c(0.8, -0.1) * 0.7).norm() < 1e-15);
        assert_abs_diff_eq!(phase, 0.0);
    }

    #[test]
    fn segal_rotating_drive_analytic() {
        // f_τ = e^{iτ}: g = (e^{it} − 1)/i and phase −½(sin t − t).
        let profile = RotatingProfile::rotating(vec![c(1.0, 0.0)], 1.0);
        for t in [1.0, std::f64::consts::PI] {
            let (g, phase) = segal_evolution(&profile, 0.0, t).unwrap();
            let expected_g = (Complex64::new(0.0, t).exp() - 1.0) / Complex64::i();
            assert!((g.0[0] - expected_g).norm() < 1e-14);
            assert_abs_diff_eq!(phase, -0.5 * (t.sin() - t), epsilon = 1e-14);
        }
        // At t = π, g = 2i and the phase is π/2.
        let (g, phase) = segal_evolution(&profile, 0.0, std::f64::consts::PI).unwrap();
        assert!((g.0[0] - c(0.0, 2.0)).norm() < 1e-14);
        assert_abs_diff_eq!(phase, std::f64::consts::FRAC_PI_2, epsilon = 1e-14);
    }

    #[test]
    fn segal_quadrature_matches_exact() {
        let profile = RotatingProfile::new(vec![c(0.7, 0.3), c(-0.2, 0.5)], vec![1.0, -2.0]).unwrap();
        let (ge, pe) = segal_evolution(&profile, 0.1, 1.0).unwrap();
        let (gq, pq) = segal_evolution_quad(
            |t| profile.eval(t),
            2,
            0.1,
            1.0,
            QuadLevel::new(8, 8),
        )
        .unwrap();
        for (a, b) in ge.0.iter().zip(&gq.0) {
            assert!((a - b).norm() < 1e-13);
        }
        assert_abs_diff_eq!(pe, pq, epsilon = 1e-13);
    }

    #[test]
    fn segal_quadrature_rejects_jumpy_drive() {
        let jumpy = |t: f64| vec![if t < 0.5 { c(1.0, 0.0) } else { c(-1.0, 0.0) }];
        assert!(segal_evolution_quad(jumpy, 1, 0.0, 1.0, QuadLevel::default()).is_err());
    }

    #[test]
    fn segal_cocycle_with_phases() {
        let profile = RotatingProfile::rotating(vec![c(0.9, 0.4)], 1.3);
        let x = CoherentLabel::new(vec![c(0.3, -0.2)], 0.1);
        let u = |a: f64, b: f64, y: &CoherentLabel| segal_apply(&profile, a, b, y).unwrap();
        for (r, s, t) in [(0.0, 0.4, 1.0), (0.1, 0.2, 0.35), (0.0, 0.9, 0.95)] {
            let res = cocycle_residual(u, r, s, t, &x);
            assert!(res < 1e-14, "({r},{s},{t}): {res}");
        }
    }

    #[test]
    fn segal_cocycle_through_compose_ten_splits() {
        // (g, phase) of [0, t] equals the weyl_compose of [0, s] and [s, t],
        // phases included.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(21);
        let profile = RotatingProfile::new(vec![c(0.8, -0.3), c(0.2, 0.5)], vec![1.7, -0.9]).unwrap();
        for _ in 0..10 {
            let s = rng.random_range(0.1..0.9);
            let t = rng.random_range(s..1.5);
            let (g_total, p_total) = segal_evolution(&profile, 0.0, t).unwrap();
            let (g_lo, p_lo) = segal_evolution(&profile, 0.0, s).unwrap();
            let (g_hi, p_hi) = segal_evolution(&profile, s, t).unwrap();
            let (g_sum, p_cross) = weyl_compose(&g_hi, &g_lo).unwrap();
            for (a, b) in g_total.0.iter().zip(&g_sum.0) {
                assert!((a - b).norm() < 1e-14);
            }
            let composed_phase = p_lo + p_hi + p_cross;
            assert_abs_diff_eq!(p_total, composed_phase, epsilon = 1e-13);
        }
    }

    #[test]
    fn interaction_picture_twist_values() {
        // For a unit constant drive with ω = 1, the twisted drive integrates
        // to −∫₀^π e^{iτ}dτ = −2i.
        let modes = ModeSpace::new(vec![1.0]).unwrap();
        let profile = RotatingProfile::constant(vec![c(1.0, 0.0)]);
        let twisted = profile.interaction_picture(&modes).unwrap();
        let g = twisted.integral(0.0, std::f64::consts::PI);
        assert!((g[0] - c(0.0, -2.0)).norm() < 1e-14, "g = {}", g[0]);
    }

    #[test]
    fn segal_reversed_orientation_composes_to_identity() {
        let profile = RotatingProfile::rotating(vec![c(1.1, -0.6)], 0.7);
        let (g, phase) = segal_evolution(&profile, 0.0, 1.0).unwrap();
        let inverse = WeylParam(g.0.iter().map(|z| -z).collect());
        let (total, comp_phase) = weyl_compose(&inverse, &g).unwrap();
        assert_abs_diff_eq!(total.norm(), 0.0);
        assert_abs_diff_eq!(comp_phase + phase - phase, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn frozen_group_steps_invert() {
        // Negative durations are supported: e^{A(t)(−τ)} undoes e^{A(t)τ}.
        let family = WeylFamily::new(RotatingProfile::rotating(vec![c(0.7, -0.2)], 1.4));
        let x = CoherentLabel::new(vec![c(0.4, 0.1)], 0.9);
        let forward = family.exp_apply(0.3, 0.8, &x);
        let back = family.exp_apply(0.3, -0.8, &forward);
        assert!(back.distance(&x) < 1e-14);
        assert!(family.supports_groups());
        // iΦ(f)|α⟩ is not a coherent state, so the generator action is not
        // representable on labels.
        assert!(matches!(
            family.gen_apply(0.3, &x),
            Err(crate::error::Error::UnsupportedBackend(_))
        ));
    }

    #[test]
    fn vanhove_free_field_is_rotation() {
        let modes = ModeSpace::new(vec![1.0]).unwrap();
        let profile = RotatingProfile::constant(vec![Complex64::ZERO]);
        let x = CoherentLabel::new(vec![c(0.5, 0.2)], 0.4);
        let out = vanhove_evolution(&profile, &modes, 0.0, 0.8, &x).unwrap();
        let expected = free_rotation(&modes, 0.8, &x);
        assert!(out.distance(&expected) < 1e-15);
    }

    #[test]
    fn vanhove_group_property() {
        let modes = ModeSpace::new(vec![1.0]).unwrap();
        let profile = RotatingProfile::constant(vec![c(1.0, 0.0)]);
        let x = CoherentLabel::vacuum(1);
        let (s, u, t) = (0.0, 0.7, 1.9);
        let through = vanhove_evolution(&profile, &modes, u, t,
            &vanhove_evolution(&profile, &modes, s, u, &x).unwrap()).unwrap();
        let direct = vanhove_evolution(&profile, &modes, s, t, &x).unwrap();
        assert!(through.distance(&direct) < 1e-13);
    }

    #[test]
    fn closed_form_matches_segal_apply() {
        let profile = RotatingProfile::rotating(vec![c(0.6, 0.3)], 1.0);
        let family = WeylFamily::new(profile.clone());
        let x = CoherentLabel::new(vec![c(-0.1, 0.4)], -0.2);
        let via_closed = closed_form_propagator(&family, 0.0, 1.2, &x).unwrap();
        let via_segal = segal_apply(&profile, 0.0, 1.2, &x).unwrap();
        assert!(via_closed.distance(&via_segal) < 1e-12);
    }

    #[test]
    fn product_limit_converges_to_closed_form() {
        let family = WeylFamily::new(RotatingProfile::rotating(vec![c(1.0, 0.0)], 1.0));
        let report = formula_vs_limit(&family, 0.0, 1.0, &CoherentLabel::vacuum(1), 1e-2, 3..=9).unwrap();
        let order = report.fitted_order.unwrap();
        assert!((0.9..1.1).contains(&order), "order {order}");
    }
}
