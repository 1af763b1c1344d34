//! Truncated-Fock matrix oracle for the coherent-label dynamics.
//!
//! The symmetric Fock space over `ℂᵐ` is truncated to total occupation
//! `≤ cutoff`; creation/annihilation, number, and free-field operators
//! become explicit dense matrices, Weyl operators become matrix
//! exponentials, and the driven evolutions are integrated with RK4 plus one
//! Richardson extrapolation. Leakage into the top number sector is tracked
//! so a truncation artifact can never masquerade as physics.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::weyl::{CoherentLabel, ModeSpace, RotatingProfile, WeylParam};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Dense-matrix model of the first `cutoff + 1` total-number sectors.
pub struct FockSpace {
    modes: usize,
    cutoff: usize,
    occupations: Vec<Vec<u32>>,
    lower: Vec<DMatrix<Complex64>>,
    omega: Vec<f64>,
    /// Diagonal of the total number operator.
    number: Vec<f64>,
    /// Diagonal of `H_ω` (vacuum energy zero).
    h_omega: Vec<f64>,
}

impl FockSpace {
    /// Builds the truncated space. The oracle is meant for desk scale:
    /// `modes ≤ 2` keeps the dimension manageable.
    pub fn new(modes: &ModeSpace, cutoff: usize) -> Result<FockSpace> {
        let m = modes.modes();
        if m > 2 {
            return Err(Error::UnsupportedBackend("fock oracle is capped at 2 modes"));
        }
        let mut occupations = Vec::new();
        let mut stack = vec![0u32; m];
        enumerate_occupations(&mut stack, 0, cutoff as u32, &mut occupations);
        let index: HashMap<Vec<u32>, usize> =
            occupations.iter().cloned().zip(0..).collect();
        let dim = occupations.len();

        let mut lower = Vec::with_capacity(m);
        for k in 0..m {
            let mut a = DMatrix::zeros(dim, dim);
            for (col, occ) in occupations.iter().enumerate() {
                if occ[k] > 0 {
                    let mut target = occ.clone();
                    target[k] -= 1;
                    let row = index[&target];
                    a[(row, col)] = Complex64::new((occ[k] as f64).sqrt(), 0.0);
                }
            }
            lower.push(a);
        }

        let number: Vec<f64> = occupations
            .iter()
            .map(|occ| occ.iter().map(|&n| n as f64).sum())
            .collect();
        let h_omega: Vec<f64> = occupations
            .iter()
            .map(|occ| occ.iter().zip(modes.omega()).map(|(&n, w)| n as f64 * w).sum())
            .collect();

        Ok(FockSpace {
            modes: m,
            cutoff,
            occupations,
            lower,
            omega: modes.omega().to_vec(),
            number,
            h_omega,
        })
    }

    pub fn dim(&self) -> usize {
        self.occupations.len()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn annihilation(&self, k: usize) -> &DMatrix<Complex64> {
        &self.lower[k]
    }

    /// Segal field operator `Φ(f) = (a(f) + a*(f))/√2` with
    /// `a(f) = Σ conj(f_k) a_k`.
    pub fn phi_matrix(&self, f: &WeylParam) -> Result<DMatrix<Complex64>> {
        if f.0.len() != self.modes {
            return Err(Error::DimensionMismatch(f.0.len(), self.modes));
        }
        let dim = self.dim();
        let mut phi = DMatrix::<Complex64>::zeros(dim, dim);
        for (k, fk) in f.0.iter().enumerate() {
            phi += &self.lower[k] * (fk.conj() / SQRT2);
            phi += self.lower[k].adjoint() * (fk / SQRT2);
        }
        Ok(phi)
    }

    /// Weyl operator `W(f) = e^{iΦ(f)}` as a dense matrix.
    pub fn weyl_matrix(&self, f: &WeylParam) -> Result<DMatrix<Complex64>> {
        Ok(expm(&(self.phi_matrix(f)? * Complex64::i())))
    }

    /// Truncated coherent state `e^{iθ}|α⟩` (not renormalized: the missing
    /// mass is exactly the truncation leakage).
    pub fn coherent_vector(&self, label: &CoherentLabel) -> Result<DVector<Complex64>> {
        if label.alpha.len() != self.modes {
            return Err(Error::DimensionMismatch(label.alpha.len(), self.modes));
        }
        let norm2: f64 = label.alpha.iter().map(|a| a.norm_sqr()).sum();
        let global = Complex64::new(0.0, label.theta).exp() * (-0.5 * norm2).exp();
        let mut psi = DVector::zeros(self.dim());
        for (i, occ) in self.occupations.iter().enumerate() {
            let mut amp = global;
            for (k, &n) in occ.iter().enumerate() {
                let mut term = Complex64::ONE;
                for j in 1..=n {
                    term *= label.alpha[k] / (j as f64).sqrt();
                }
                amp *= term;
            }
            psi[i] = amp;
        }
        Ok(psi)
    }

    /// Probability mass sitting in the top total-number sector.
    pub fn top_sector_mass(&self, psi: &DVector<Complex64>) -> f64 {
        self.number
            .iter()
            .zip(psi.iter())
            .filter(|(n, _)| **n as usize == self.cutoff)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    pub fn inner(&self, a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
        a.dotc(b)
    }

    /// Applies `(N + 1)^{1/2}` (diagonal).
    pub fn number_plus_one_sqrt(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            self.dim(),
            self.number.iter().zip(psi.iter()).map(|(n, z)| z * (n + 1.0).sqrt()),
        )
    }

    /// Applies `(H_ω + 1)^{1/2}` (diagonal).
    pub fn h_omega_plus_one_sqrt(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            self.dim(),
            self.h_omega.iter().zip(psi.iter()).map(|(h, z)| z * (h + 1.0).sqrt()),
        )
    }

    fn phi_apply(&self, f: &[Complex64], psi: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim());
        for (k, fk) in f.iter().enumerate() {
            out += (&self.lower[k] * psi) * (fk.conj() / SQRT2);
            out += (self.lower[k].adjoint() * psi) * (fk / SQRT2);
        }
        out
    }

    /// Integrates `ψ' = iΦ(f_t)ψ` (the Segal-family equation) with RK4 on
    /// `steps` and `2·steps` grids, Richardson-extrapolated once.
    pub fn integrate_segal(
        &self,
        profile: &RotatingProfile,
        s: f64,
        t: f64,
        psi0: &DVector<Complex64>,
        steps: usize,
    ) -> DVector<Complex64> {
        let rhs = |time: f64, psi: &DVector<Complex64>| {
            self.phi_apply(&profile.eval(time), psi) * Complex64::i()
        };
        richardson_rk4(&rhs, s, t, psi0, steps)
    }

    /// Integrates `ψ' = −i(H_ω + Φ(f_t))ψ` (the driven-field equation).
    pub fn integrate_vanhove(
        &self,
        profile: &RotatingProfile,
        s: f64,
        t: f64,
        psi0: &DVector<Complex64>,
        steps: usize,
    ) -> DVector<Complex64> {
        let rhs = |time: f64, psi: &DVector<Complex64>| {
            let mut h_psi = DVector::from_iterator(
                self.dim(),
                self.h_omega.iter().zip(psi.iter()).map(|(h, z)| z * h),
            );
            h_psi += self.phi_apply(&profile.eval(time), psi);
            h_psi * (-Complex64::i())
        };
        richardson_rk4(&rhs, s, t, psi0, steps)
    }
}

fn enumerate_occupations(stack: &mut Vec<u32>, mode: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
    if mode == stack.len() {
        out.push(stack.clone());
        return;
    }
    for n in 0..=budget {
        stack[mode] = n;
        enumerate_occupations(stack, mode + 1, budget - n, out);
    }
    stack[mode] = 0;
}

fn richardson_rk4(
    rhs: &dyn Fn(f64, &DVector<Complex64>) -> DVector<Complex64>,
    s: f64,
    t: f64,
    psi0: &DVector<Complex64>,
    steps: usize,
) -> DVector<Complex64> {
    let coarse = rk4(rhs, s, t, psi0, steps.max(1));
    let fine = rk4(rhs, s, t, psi0, 2 * steps.max(1));
    fine * Complex64::new(16.0 / 15.0, 0.0) - coarse * Complex64::new(1.0 / 15.0, 0.0)
}

fn rk4(
    rhs: &dyn Fn(f64, &DVector<Complex64>) -> DVector<Complex64>,
    s: f64,
    t: f64,
    psi0: &DVector<Complex64>,
    steps: usize,
) -> DVector<Complex64> {
    let h = (t - s) / steps as f64;
    let hc = Complex64::new(h, 0.0);
    let mut psi = psi0.clone();
    for i in 0..steps {
        let ti = s + i as f64 * h;
        let k1 = rhs(ti, &psi);
        let k2 = rhs(ti + 0.5 * h, &(&psi + &k1 * (hc * 0.5)));
        let k3 = rhs(ti + 0.5 * h, &(&psi + &k2 * (hc * 0.5)));
        let k4 = rhs(ti + h, &(&psi + &k3 * hc));
        let two = Complex64::new(2.0, 0.0);
        psi += (k1 + k2 * two + k3 * two + k4) * (hc / 6.0);
    }
    psi
}

/// `(‖Φ(f)ψ‖, √2 ‖f‖ ‖(N+1)^{1/2}ψ‖)` — the relative bound of the Segal
/// field against the number operator. Errors when the top-sector mass makes
/// the truncated evaluation inconclusive.
pub fn number_bound_check(
    fock: &FockSpace,
    f: &WeylParam,
    psi: &DVector<Complex64>,
) -> Result<(f64, f64)> {
    let leak = fock.top_sector_mass(psi);
    if leak > 1e-10 {
        return Err(Error::CutoffLeakage { leak, limit: 1e-10 });
    }
    let lhs = (fock.phi_matrix(f)? * psi).norm();
    let rhs = SQRT2 * f.norm() * fock.number_plus_one_sqrt(psi).norm();
    Ok((lhs, rhs))
}

/// `(‖Φ(f)ψ‖, √2 (‖f‖² + ‖f/√ω‖²)^{1/2} ‖(H_ω+1)^{1/2}ψ‖)` — the bound
/// against the free-field energy.
pub fn hw_bound_check(
    fock: &FockSpace,
    f: &WeylParam,
    psi: &DVector<Complex64>,
) -> Result<(f64, f64)> {
    let leak = fock.top_sector_mass(psi);
    if leak > 1e-10 {
        return Err(Error::CutoffLeakage { leak, limit: 1e-10 });
    }
    let lhs = (fock.phi_matrix(f)? * psi).norm();
    let weighted: f64 = f
        .0
        .iter()
        .zip(&fock.omega)
        .map(|(z, w)| z.norm_sqr() * (1.0 + 1.0 / w))
        .sum();
    let rhs = SQRT2 * weighted.sqrt() * fock.h_omega_plus_one_sqrt(psi).norm();
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{segal_apply, vanhove_evolution, weyl_apply_coherent};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single_mode(cutoff: usize) -> FockSpace {
        FockSpace::new(&ModeSpace::new(vec![1.0]).unwrap(), cutoff).unwrap()
    }

    #[test]
    fn dimensions_and_ladder_algebra() {
        let fock = single_mode(10);
        assert_eq!(fock.dim(), 11);
        // [a, a†] = 1 away from the cutoff edge.
        let a = fock.annihilation(0);
        let comm = a * a.adjoint() - a.adjoint() * a;
        for i in 0..10 {
            assert_abs_diff_eq!(comm[(i, i)].re, 1.0, epsilon = 1e-14);
        }

        let two = FockSpace::new(&ModeSpace::new(vec![1.0, 2.0]).unwrap(), 5).unwrap();
        // Total ≤ 5 over two modes: C(7, 2) = 21 states.
        assert_eq!(two.dim(), 21);
        assert!(FockSpace::new(&ModeSpace::new(vec![1.0; 3]).unwrap(), 4).is_err());
    }

    #[test]
    fn ccr_weyl_form_on_matrices() {
        // Φ(f)Φ(g) − Φ(g)Φ(f) = i·Im⟨f,g⟩ on the low sectors.
        let fock = single_mode(30);
        let f = WeylParam(vec![c(0.7, 0.2)]);
        let g = WeylParam(vec![c(-0.3, 0.9)]);
        let pf = fock.phi_matrix(&f).unwrap();
        let pg = fock.phi_matrix(&g).unwrap();
        let comm = &pf * &pg - &pg * &pf;
        let expected = f.inner(&g).unwrap().im;
        for i in 0..20 {
            assert_abs_diff_eq!(comm[(i, i)].im, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn displacement_rule_matches_matrix_exponential() {
        // The frozen convention behind weyl_apply_coherent, checked against
        // e^{iΦ(f)} acting on the vacuum and on displaced labels.
        let fock = single_mode(40);
        let cases = [
            (WeylParam(vec![c(0.0, SQRT2)]), CoherentLabel::vacuum(1)),
            (WeylParam(vec![c(1.2, -0.4)]), CoherentLabel::vacuum(1)),
            (WeylParam(vec![c(-0.8, 0.9)]), CoherentLabel::new(vec![c(0.5, 0.3)], 0.7)),
            (WeylParam(vec![c(0.3, 1.1)]), CoherentLabel::new(vec![c(-0.9, 0.2)], -0.4)),
        ];
        for (f, x) in cases {
            let w = fock.weyl_matrix(&f).unwrap();
            let via_matrix = &w * fock.coherent_vector(&x).unwrap();
            let predicted = fock.coherent_vector(&weyl_apply_coherent(&f, &x)).unwrap();
            // Phase-sensitive overlap: 1 − Re⟨matrix, label⟩ ≤ 1e−8.
            let overlap = fock.inner(&via_matrix, &predicted);
            assert!(overlap.re > 1.0 - 1e-8, "overlap {overlap}");
            assert!(overlap.im.abs() < 1e-7);
        }
    }

    #[test]
    fn composition_consistency_random_parameters() {
        let fock = single_mode(40);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..5 {
            let f = WeylParam(vec![c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))]);
            let g = WeylParam(vec![c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))]);
            let x = CoherentLabel::vacuum(1);
            let wf = fock.weyl_matrix(&f).unwrap();
            let wg = fock.weyl_matrix(&g).unwrap();
            let via_matrix = &wg * (&wf * fock.coherent_vector(&x).unwrap());
            let label = weyl_apply_coherent(&g, &weyl_apply_coherent(&f, &x));
            let predicted = fock.coherent_vector(&label).unwrap();
            let overlap = fock.inner(&via_matrix, &predicted);
            assert!(overlap.re > 1.0 - 1e-8, "overlap {overlap}");
        }
    }

    #[test]
    fn segal_oracle_agrees_with_labels() {
        let fock = single_mode(40);
        let profile = RotatingProfile::rotating(vec![c(1.2, 0.0)], 1.0);
        let x = CoherentLabel::vacuum(1);
        let psi0 = fock.coherent_vector(&x).unwrap();
        let psi = fock.integrate_segal(&profile, 0.0, 1.0, &psi0, 1000);
        assert!((psi.norm() - 1.0).abs() < 1e-8, "norm drift {}", (psi.norm() - 1.0).abs());
        assert!(fock.top_sector_mass(&psi) < 1e-12);
        let label = segal_apply(&profile, 0.0, 1.0, &x).unwrap();
        let overlap = fock.inner(&psi, &fock.coherent_vector(&label).unwrap());
        assert!(overlap.re > 1.0 - 1e-6, "overlap {overlap}");
    }

    #[test]
    fn vanhove_oracle_agrees_with_labels() {
        let modes = ModeSpace::new(vec![1.0]).unwrap();
        let fock = FockSpace::new(&modes, 40).unwrap();
        let profile = RotatingProfile::constant(vec![c(1.0, 0.0)]);
        let x = CoherentLabel::vacuum(1);
        let psi0 = fock.coherent_vector(&x).unwrap();
        let t = std::f64::consts::PI;
        let psi = fock.integrate_vanhove(&profile, 0.0, t, &psi0, 4000);
        let label = vanhove_evolution(&profile, &modes, 0.0, t, &x).unwrap();
        let overlap = fock.inner(&psi, &fock.coherent_vector(&label).unwrap());
        assert!(overlap.re > 1.0 - 1e-5, "overlap {overlap}");
    }

    #[test]
    fn two_mode_segal_oracle_agrees_with_labels() {
        let modes = ModeSpace::new(vec![1.0, 2.0]).unwrap();
        let fock = FockSpace::new(&modes, 12).unwrap();
        let profile =
            RotatingProfile::new(vec![c(0.5, 0.1), c(-0.3, 0.4)], vec![1.0, -0.5]).unwrap();
        let x = CoherentLabel::vacuum(2);
        let psi0 = fock.coherent_vector(&x).unwrap();
        let psi = fock.integrate_segal(&profile, 0.0, 1.2, &psi0, 600);
        assert!(fock.top_sector_mass(&psi) < 1e-12);
        let label = segal_apply(&profile, 0.0, 1.2, &x).unwrap();
        let overlap = fock.inner(&psi, &fock.coherent_vector(&label).unwrap());
        assert!(overlap.re > 1.0 - 1e-6, "overlap {overlap}");
    }

    #[test]
    fn vanhove_oracle_agrees_from_displaced_start() {
        let modes = ModeSpace::new(vec![1.0]).unwrap();
        let fock = FockSpace::new(&modes, 40).unwrap();
        let profile = RotatingProfile::rotating(vec![c(0.9, 0.3)], 1.0);
        let x = CoherentLabel::new(vec![c(0.8, -0.9)], 0.25); // |α| ≈ 1.2
        let psi0 = fock.coherent_vector(&x).unwrap();
        let psi = fock.integrate_vanhove(&profile, 0.0, 1.5, &psi0, 4000);
        let label = vanhove_evolution(&profile, &modes, 0.0, 1.5, &x).unwrap();
        let overlap = fock.inner(&psi, &fock.coherent_vector(&label).unwrap());
        assert!(overlap.norm() > 1.0 - 1e-5, "fidelity {}", overlap.norm());
        assert!(overlap.re > 1.0 - 1e-5, "phase-sensitive overlap {overlap}");
    }

    #[test]
    fn vacuum_number_bound() {
        // Φ(f)|0⟩ = a*(f)|0⟩/√2 has norm ‖f‖/√2; the bound is √2‖f‖.
        let fock = single_mode(20);
        let f = WeylParam(vec![c(0.9, -0.3)]);
        let psi = fock.coherent_vector(&CoherentLabel::vacuum(1)).unwrap();
        let (lhs, rhs) = number_bound_check(&fock, &f, &psi).unwrap();
        assert_abs_diff_eq!(lhs, f.norm() / SQRT2, epsilon = 1e-12);
        assert_abs_diff_eq!(rhs, SQRT2 * f.norm(), epsilon = 1e-12);
        assert!(lhs <= rhs);

        let zero = WeylParam::zero(1);
        let (l0, r0) = number_bound_check(&fock, &zero, &psi).unwrap();
        assert_abs_diff_eq!(l0, 0.0);
        assert_abs_diff_eq!(r0, 0.0);
    }

    #[test]
    fn vacuum_hw_bound() {
        // ω = 1: rhs = √2(2‖f‖²)^{1/2}·1 on the vacuum.
        let fock = single_mode(20);
        let f = WeylParam(vec![c(0.4, 0.8)]);
        let psi = fock.coherent_vector(&CoherentLabel::vacuum(1)).unwrap();
        let (lhs, rhs) = hw_bound_check(&fock, &f, &psi).unwrap();
        assert_abs_diff_eq!(rhs, SQRT2 * (2.0 * f.norm() * f.norm()).sqrt(), epsilon = 1e-12);
        assert!(lhs <= rhs);
    }

    #[test]
    fn leaky_state_is_rejected() {
        let fock = single_mode(6);
        let mut psi = DVector::zeros(fock.dim());
        psi[6] = Complex64::ONE; // all mass on the top sector
        let f = WeylParam(vec![c(1.0, 0.0)]);
        assert!(matches!(
            number_bound_check(&fock, &f, &psi),
            Err(Error::CutoffLeakage { .. })
        ));
    }

    #[test]
    fn random_draws_satisfy_both_bounds() {
        let fock = single_mode(24);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = WeylParam(vec![c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))]);
            // Random low-sector state with geometric decay keeps leakage tiny.
            let mut psi = DVector::<Complex64>::zeros(fock.dim());
            for n in 0..12 {
                psi[n] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    * 0.4_f64.powi(n as i32);
            }
            psi /= Complex64::new(psi.norm(), 0.0);
            let (l1, r1) = number_bound_check(&fock, &f, &psi).unwrap();
            assert!(l1 <= r1 + 1e-14);
            let (l2, r2) = hw_bound_check(&fock, &f, &psi).unwrap();
            assert!(l2 <= r2 + 1e-14);
        }
    }
}
