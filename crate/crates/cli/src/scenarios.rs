//! Built-in experiment scenarios: each runs one backend through a
//! convergence sweep or a randomized check suite and reports rows for the
//! CSV table plus a pass/fail summary.

use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use evoprop::coeff::Coeff;
use evoprop::commutator::commutation_pass_check;
use evoprop::evolution::{build_dyadic_partition, convergence_order, product_approximant, State};
use evoprop::fock::{hw_bound_check, number_bound_check, FockSpace};
use evoprop::heisenberg::{ode_oracle, HeisenbergFamily, Step3Family};
use evoprop::magnus::{closed_form_propagator, zassenhaus_check};
use evoprop::schrodinger::{
    free_step, product_limit, spectral_propagator, splitting_oracle, AxisProfile, FieldProfile,
    Grid, WaveFunction,
};
use evoprop::weyl::{
    free_rotation, segal_apply, vanhove_evolution, CoherentLabel, ModeSpace, RotatingProfile,
    WeylFamily, WeylParam,
};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;

/// One sweep row. `level` is the dyadic level for convergence sweeps and the
/// draw index for randomized suites.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub level: u32,
    pub error_vs_oracle: f64,
    pub error_vs_closed_form: f64,
    pub successive_difference: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub scenario: String,
    pub seed: u64,
    pub rows: Vec<ResultRow>,
    pub fitted_order: Option<f64>,
    pub pass: bool,
    pub note: String,
    pub wall_ms: f64,
}

/// Catalogue entry: what the scenario runs and which identity it exercises.
pub struct Scenario {
    pub name: &'static str,
    pub backend: &'static str,
    pub exercises: &'static str,
}

pub const CATALOGUE: &[Scenario] = &[
    Scenario {
        name: "heisenberg-limit",
        backend: "heisenberg",
        exercises: "mesh limit of frozen-exponential products vs the closed form exp(\u{222b}A)\u{b7}exp(\u{bd}\u{222b}\u{222b}\u{3bc}), cross-checked by an RK4 matrix oracle",
    },
    Scenario {
        name: "heisenberg-zassenhaus",
        backend: "heisenberg",
        exercises: "discrete Zassenhaus-type decomposition e^{B_n r} = U_n^r \u{b7} e^{-\u{bd}\u{3bd}r\u{b2}Z} as an exact operator identity",
    },
    Scenario {
        name: "heisenberg-pass",
        backend: "heisenberg",
        exercises: "passing A(r) through the product with the first-order correction integral S^(1)",
    },
    Scenario {
        name: "nilpotent4-pass",
        backend: "nilpotent4",
        exercises: "two-fold central commutators: corrections S^(1), S^(2) with tuple multiplicities alpha",
    },
    Scenario {
        name: "weyl-segal",
        backend: "weyl",
        exercises: "Weyl composition law and the closed form W(\u{222b}f)\u{b7}e^{i\u{3c6}} for a linearly driven boson mode, vs a truncated-Fock RK4 oracle",
    },
    Scenario {
        name: "vanhove-picture",
        backend: "vanhove",
        exercises: "interaction-picture factorization e^{-iHt} \u{168}(t,s) e^{iHs} with twisted drive -e^{i\u{3c9}t}f_t, vs direct integration",
    },
    Scenario {
        name: "schrodinger-gauge",
        backend: "schrodinger",
        exercises: "gauge representation (position phases + Fourier multiplier over the drift) vs frozen five-factor products, vs a Strang-splitting oracle",
    },
    Scenario {
        name: "schrodinger-free",
        backend: "schrodinger",
        exercises: "free-particle reduction b = 0: every construction collapses to the free propagator",
    },
    Scenario {
        name: "fock-bounds",
        backend: "weyl",
        exercises: "relative field-operator bounds against (N+1)^{1/2} and (H_\u{3c9}+1)^{1/2} on random truncated states",
    },
];

pub fn lookup(name: &str) -> Option<&'static Scenario> {
    CATALOGUE.iter().find(|s| s.name == name)
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let start = Instant::now();
    let mut outcome = match config.scenario.as_str() {
        "heisenberg-limit" => heisenberg_limit(config),
        "heisenberg-zassenhaus" => heisenberg_zassenhaus(config),
        "heisenberg-pass" => nilpotent_pass(config, 1),
        "nilpotent4-pass" => nilpotent_pass(config, 2),
        "weyl-segal" => weyl_segal(config),
        "vanhove-picture" => vanhove_picture(config),
        "schrodinger-gauge" => schrodinger_gauge(config),
        "schrodinger-free" => schrodinger_free(config),
        "fock-bounds" => fock_bounds(config),
        other => Err(anyhow!("unknown scenario `{other}` (try `evoprop list`)")),
    }?;
    outcome.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(outcome)
}

fn levels(config: &ExperimentConfig, default: (u32, u32)) -> Vec<u32> {
    let (lo, hi) = config.levels.unwrap_or(default);
    (lo..=hi).collect()
}

/// Sweep end time for scenarios that build partitions: must stay inside the
/// unit time domain.
fn unit_interval_end(config: &ExperimentConfig, default: f64) -> Result<f64> {
    let t_end = config.param("t_end", default);
    if !t_end.is_finite() || t_end <= 0.0 || t_end > 1.0 {
        bail!("t_end must lie in (0, 1] for this scenario, got {t_end}");
    }
    Ok(t_end)
}

/// `‖U_{n} x − U_{n−1} x‖` per row; the first row has no predecessor.
fn successive<S: State>(states: &[S]) -> Vec<f64> {
    std::iter::once(0.0)
        .chain(states.windows(2).map(|w| w[1].distance(&w[0])))
        .collect()
}

fn random_heisenberg(rng: &mut ChaCha12Rng) -> HeisenbergFamily {
    HeisenbergFamily::new(Coeff::random_poly(rng, 3), Coeff::random_poly(rng, 3))
}

fn random_vector(rng: &mut ChaCha12Rng, n: usize) -> DVector<Complex64> {
    let mut v = DVector::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
    });
    v /= Complex64::new(v.norm(), 0.0);
    v
}

fn heisenberg_limit(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let family = random_heisenberg(&mut rng);
    let x = random_vector(&mut rng, 3);
    let t_end = unit_interval_end(config, 1.0)?;
    let tol = config.tol.unwrap_or(1e-2);

    let closed = closed_form_propagator(&family, 0.0, t_end, &x)
        .map_err(|e| anyhow!("closed form failed: {e}"))?;
    let oracle = ode_oracle(&family, 0.0, t_end, 400);
    if oracle.error_estimate > 1e-10 {
        bail!("ODE oracle failed to converge (estimate {:.3e})", oracle.error_estimate);
    }
    let via_oracle = &oracle.u * &x;

    let sweep = levels(config, (3, 10));
    let states: Vec<DVector<Complex64>> = sweep
        .par_iter()
        .map(|&level| {
            let pi = build_dyadic_partition(0.0, t_end, level).expect("valid interval");
            product_approximant(&family, &pi, 0.0, t_end, &x).expect("within span")
        })
        .collect();

    let errs_closed: Vec<f64> = states.iter().map(|s| s.distance(&closed)).collect();
    let diffs = successive(&states);
    let rows: Vec<ResultRow> = sweep
        .iter()
        .zip(&states)
        .enumerate()
        .map(|(i, (&level, state))| ResultRow {
            level,
            error_vs_oracle: state.distance(&via_oracle),
            error_vs_closed_form: errs_closed[i],
            successive_difference: diffs[i],
            norm_drift: (state.norm() - closed.norm()).abs(),
        })
        .collect();

    let fitted = convergence_order(&errs_closed).ok();
    let final_err = *errs_closed.last().unwrap();
    let order_ok = fitted.map(|o| (0.9..=1.1).contains(&o)).unwrap_or(false);
    Ok(ExperimentOutcome {
        scenario: config.scenario.clone(),
        seed: config.seed,
        rows,
        fitted_order: fitted,
        pass: order_ok && final_err <= tol,
        note: format!("final error vs closed form {final_err:.3e} (tol {tol:.1e})"),
        wall_ms: 0.0,
    })
}

fn heisenberg_zassenhaus(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let family = random_heisenberg(&mut rng);
    let field = family
        .commutator_field(&[0.0, 0.25, 0.5, 0.75, 1.0])
        .map_err(|e| anyhow!("commutator extraction failed: {e}"))?;
    let x = random_vector(&mut rng, 3);
    let tol = config.tol.unwrap_or(1e-12);

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for level in levels(config, (0, 4)) {
        let pi = build_dyadic_partition(0.0, 1.0, level)?;
        let mut level_worst: f64 = 0.0;
        for r in [0.5, 1.0, 2.0] {
            let res = zassenhaus_check(&family, &field, &pi, 0.0, 1.0, r, &x)
                .map_err(|e| anyhow!("zassenhaus check failed: {e}"))?;
            level_worst = level_worst.max(res);
        }
        worst = worst.max(level_worst);
        rows.push(ResultRow {
            level,
            error_vs_oracle: level_worst,
            error_vs_closed_form: level_worst,
            successive_difference: 0.0,
            norm_drift: 0.0,
        });
    }
    Ok(ExperimentOutcome {
        scenario: config.scenario.clone(),
        seed: config.seed,
        rows,
        fitted_order: None,
        pass: worst <= tol,
        note: format!("max residual {worst:.3e} over r in {{0.5, 1, 2}} (tol {tol:.1e})"),
        wall_ms: 0.0,
    })
}

fn nilpotent_pass(config: &ExperimentConfig, order: usize) -> Result<ExperimentOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let tol = config.tol.unwrap_or(1e-12);
    let sample_times: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;

    for level in levels(config, (0, 4)) {
        let pi = build_dyadic_partition(0.0, 1.0, level)?;
        let r = rng.random_range(0.0..=1.0);
        let res = if order == 1 {
            let family =
                HeisenbergFamily::new(Coeff::random_poly(&mut rng, 2), Coeff::random_poly(&mut rng, 2));
            let field = family
                .commutator_field(&sample_times)
                .map_err(|e| anyhow!("commutator extraction failed: {e}"))?;
            let x = random_vector(&mut rng, 3);
            commutation_pass_check(&family, &field, &pi, 0.0, 1.0, r, &x)
        } else {
            let family = Step3Family::new(
                Coeff::random_poly(&mut rng, 2),
                Coeff::random_poly(&mut rng, 2),
                Coeff::random_poly(&mut rng, 2),
            );
            let field = family
                .commutator_field(&sample_times)
                .map_err(|e| anyhow!("commutator extraction failed: {e}"))?;
            let x = random_vector(&mut rng, 4);
            commutation_pass_check(&family, &field, &pi, 0.0, 1.0, r, &x)
        }
        .map_err(|e| anyhow!("pass check failed: {e}"))?;
        worst = worst.max(res);
        rows.push(ResultRow {
            level,
            error_vs_oracle: res,
            error_vs_closed_form: res,
            successive_difference: 0.0,
            norm_drift: 0.0,
        });
    }
    Ok(ExperimentOutcome {
        scenario: config.scenario.clone(),
        seed: config.seed,
        rows,
        fitted_order: None,
        pass: worst <= tol,
        note: format!("max pass-through residual {worst:.3e} at commutator order {order} (tol {tol:.1e})"),
        wall_ms: 0.0,
    })
}

fn weyl_segal(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let amp = config.param("amp", 0.8 + 0.4 * rng.random_range(0.0..=1.0));
    let rate = config.param("rate", 1.0);
    let t_end = unit_interval_end(config, 1.0)?;
    let tol = config.tol.unwrap_or(1e-6);

    let profile = RotatingProfile::rotating(vec![Complex64::new(amp, 0.0)], rate);
    let family = WeylFamily::new(profile.clone());
    let x = CoherentLabel::vacuum(1);
    let closed = segal_apply(&profile, 0.0, t_end, &x)
        .map_err(|e| anyhow!("closed form failed: {e}"))?;

    // Fock oracle deficit of the closed form (constant across levels).
    let modes = ModeSpace::new(vec![1.0]).map_err(|e| anyhow!("{e}"))?;
    let cutoff = config.param("cutoff", 40.0) as usize;
    let fock = FockSpace::new(&modes, cutoff).map_err(|e| anyhow!("{e}"))?;
    let psi0 = fock.coherent_vector(&x).map_err(|e| anyhow!("{e}"))?;
    let steps = config.param("steps", 2000.0) as usize;
    let psi = fock.integrate_segal(&profile, 0.0, t_end, &psi0, steps);
    let closed_vec = fock.coherent_vector(&closed).map_err(|e| anyhow!("{e}"))?;
    let oracle_deficit = 1.0 - fock.inner(&psi, &closed_vec).norm();

    let sweep = levels(config, (3, 9));
    let states: Vec<CoherentLabel> = sweep
        .par_iter()
        .map(|&level| {
            let pi = build_dyadic_partition(0.0, t_end, level).expect("valid interval");
            product_approximant(&family, &pi, 0.0, t_end, &x).expect("within span")
        })
        .collect();
    let errs: Vec<f64> = states.iter().map(|s| s.distance(&closed)).collect();
    let diffs = successive(&states);
    let rows: Vec<ResultRow> = sweep
        .iter()
        .zip(&states)
        .enumerate()
        .map(|(i, (&level, state))| ResultRow {
            level,
            error_vs_oracle: oracle_deficit.max(0.0),
            error_vs_closed_form: errs[i],
            successive_difference: diffs[i],
            norm_drift: (state.norm() - 1.0).abs(),
        })
        .collect();

    let fitted = convergence_order(&errs).ok();
    let order_ok = fitted.map(|o| (0.9..=1.1).contains(&o)).unwrap_or(false);
    Ok(ExperimentOutcome {
        scenario: config.scenario.clone(),
        seed: config.seed,
        rows,
        fitted_order: fitted,
        pass: order_ok && oracle_deficit <= tol,
        note: format!("oracle fidelity deficit {oracle_deficit:.3e} (tol {tol:.1e}), amp {amp:.3}"),
        wall_ms: 0.0,
    })
}

fn vanhove_picture(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let amp = config.param("amp", 0.7 + 0.3 * rng.random_range(0.0..=1.0));
    let omega = config.param("omega", 1.0);
    let t_end = config.param("t_end", std::f64::consts::PI);
    if !t_end.is_finite() || t_end <= 0.0 {
        bail!("t_end must be positive, got {t_end}");
    }
    let tol = config.tol.unwrap_or(1e-5);

    let modes = ModeSpace::new(vec![omega]).map_err(|e| anyhow!("{e}"))?;
    let profile = RotatingProfile::constant(vec![Complex64::new(amp, 0.0)]);
    let x = CoherentLabel::vacuum(1);

    let closed = vanhove_evolution(&profile, &modes, 0.0, t_end, &x)
        .map_err(|e| anyhow!("interaction-picture evolution failed: {e}"))?;

    let cutoff = config.param("cutoff", 40.0) as usize;
    let fock = FockSpace::new(&modes, cutoff).map_err(|e| anyhow!("{e}"))?;
    let psi0 = fock.coherent_vector(&x).map_err(|e| anyhow!("{e}"))?;
    let steps = config.param("steps", 4000.0) as usize;
    let psi = fock.integrate_vanhove(&profile, 0.0, t_end, &psi0, steps);
    let closed_vec = fock.coherent_vector(&closed).map_err(|e| anyhow!("{e}"))?;
    let oracle_deficit = 1.0 - fock.inner(&psi, &closed_vec).norm();

    // Inside the interaction picture, product approximants of the twisted
    // drive converge to its Segal closed form. Partitions live on the unit
    // time domain, so the sweep is capped at 1 even when the oracle
    // comparison runs further out.
    let sweep_end = t_end.min(1.0);
    let twisted = profile.interaction_picture(&modes).map_err(|e| anyhow!("{e}"))?;
    let twisted_family = WeylFamily::new(twisted.clone());
    let x_in = free_rotation(&modes, 0.0, &x);
    let closed_in = segal_apply(&twisted, 0.0, sweep_end, &x_in).map_err(|e| anyhow!("{e}"))?;
    let sweep = levels(config, (3, 9));
    let states: Vec<CoherentLabel> = sweep
        .par_iter()
        .map(|&level| {
            let pi = build_dyadic_partition(0.0, sweep_end, level).expect("valid interval");
            product_approximant(&twisted_family, &pi, 0.0, sweep_end, &x_in).expect("within span")
        })
        .collect();
    let errs: Vec<f64> = states.iter().map(|s| s.distance(&closed_in)).collect();
    let diffs = successive(&states);
    let rows: Vec<ResultRow> = sweep
        .iter()
        .zip(&states)
        .enumerate()
        .map(|(i, (&level, state))| ResultRow {
            level,
            error_vs_oracle: oracle_deficit.max(0.0),
            error_vs_closed_form: errs[i],
            successive_difference: diffs[i],
            norm_drift: (state.norm() - 1.0).abs(),
        })
        .collect();

    let fitted = convergence_order(&errs).ok();
    let order_ok = fitted.map(|o| (0.9..=1.1).contains(&o)).unwrap_or(false);
    Ok(ExperimentOutcome {
        scenario: config.scenario.clone(),
        seed: config.seed,
        rows,
        fitted_order: fitted,
        pass: order_ok && oracle_deficit <= tol,
        note: format!("oracle fidelity deficit {oracle_deficit:.3e} (tol {tol:.1e}), drive amp {amp:.3}"),
        wall_ms: 0.0,
    })
}

fn schrodinger_profile(config: &ExperimentConfig) -> FieldProfile {
    // kind: 0 = constant, 1 = linear ramp, 2 = sin(omega t)
    let kind = config.param("profile", 2.0) as i64;
    let amp = config.param("amp", 1.0);
    let axis = match kind {
        0 => AxisProfile::constant(amp),
        1 => AxisProfile::Poly(vec![0.0, amp]),
        _ => AxisProfile::Sin { amp, omega: config.param("profile_omega", 2.0 * std::f64::consts::PI) },
    };
    FieldProfile::new(vec![axis]).expect("one axis is always valid")
}

fn schrodinger_gauge(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let n = config.param("grid_n", 1024.0) as usize;
    let l = config.param("box_l", 40.0);
    let sigma = config.param("sigma", 1.0);
    let t_end = unit_interval_end(config, 1.0)?;
    let tol = config.tol.unwrap_or(1e-6);

    let grid = Grid::new(1, n, l).map_err(|e| anyhow!("{e}"))?;
    let psi = WaveFunction::gaussian(grid, &[0.0], &[0.0], sigma).map_err(|e| anyhow!("{e}"))?;
    let profile = schrodinger_profile(config);

    let spectral = spectral_propagator(&psi, &profile, 0.0, t_end).map_err(|e| anyhow!("{e}"))?;
    if spectral.boundary_mass() > 1e-8 {
        bail!("packet reached the box seam (boundary mass {:.3e})", spectral.boundary_mass());
    }
    let steps = config.param("steps", 128.0) as usize;
    let oracle = splitting_oracle(&psi, &profile, 0.0, t_end, steps).map_err(|e| anyhow!("{e}"))?;
    let oracle_err = spectral.distance(&oracle);

    let sweep = levels(config, (3, 9));
    let states: Vec<WaveFunction> = sweep
        .par_iter()
        .map(|&level| product_limit(&psi, &profile, 0.0, t_end, level).expect("valid interval"))
        .collect();
    let errs: Vec<f64> = states.iter().map(|s| s.distance(&spectral)).collect();
    let diffs = successive(&states);
    let rows: Vec<ResultRow> = sweep
        .iter()
        .zip(&states)
        .enumerate()
        .map(|(i, (&level, state))| ResultRow {
            level,
            error_vs_oracle: oracle_err,
            error_vs_closed_form: errs[i],
            successive_difference: diffs[i],
            norm_drift: (state.norm() - 1.0).abs(),
        })
        .collect();

    let fitted = convergence_order(&errs).ok();
    let converged = errs.last().copied().unwrap_or(f64::INFINITY) < errs[0];
    Ok(ExperimentOutcome {
        scenario: config.scenario.clone(),
        seed: config.seed,
        rows,
        fitted_order: fitted,
        pass: oracle_err <= tol && converged,
        note: format!("spectral vs splitting oracle {oracle_err:.3e} (tol {tol:.1e})"),
        wall_ms: 0.0,
    })
}

fn schrodinger_free(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let n = config.param("grid_n", 512.0) as usize;
    let l = config.param("box_l", 30.0);
    let t_end = unit_interval_end(config, 1.0)?;
    let tol = config.tol.unwrap_or(1e-12);

    let grid = Grid::new(1, n, l).map_err(|e| anyhow!("{e}"))?;
    let psi = WaveFunction::gaussian(grid, &[0.0], &[0.5], 1.0).map_err(|e| anyhow!("{e}"))?;
    let profile = FieldProfile::new(vec![AxisProfile::constant(0.0)]).map_err(|e| anyhow!("{e}"))?;
    let reference = free_step(&psi, t_end);

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for level in levels(config, (0, 3)) {
        let spectral = spectral_propagator(&psi, &profile, 0.0, t_end).map_err(|e| anyhow!("{e}"))?;
        let product = product_limit(&psi, &profile, 0.0, t_end, level).map_err(|e| anyhow!("{e}"))?;
        let err_spec = spectral.distance(&reference);
        let err_prod = product.distance(&reference);
        worst = worst.max(err_spec).max(err_prod);
        rows.push(ResultRow {
            level,
            error_vs_oracle: err_spec,
            error_vs_closed_form: err_prod,
            successive_difference: 0.0,
            norm_drift: (product.norm() - 1.0).abs(),
        });
    }
    Ok(ExperimentOutcome {
        scenario: config.scenario.clone(),
        seed: config.seed,
        rows,
        fitted_order: None,
        pass: worst <= tol,
        note: format!("max deviation from the free propagator {worst:.3e} (tol {tol:.1e})"),
        wall_ms: 0.0,
    })
}

fn fock_bounds(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let cutoff = config.param("cutoff", 40.0) as usize;
    let draws = config.param("draws", 50.0) as usize;
    let modes = ModeSpace::new(vec![config.param("omega", 1.0)]).map_err(|e| anyhow!("{e}"))?;
    let fock = FockSpace::new(&modes, cutoff).map_err(|e| anyhow!("{e}"))?;

    let mut rows = Vec::new();
    let mut min_margin = f64::INFINITY;
    for draw in 0..draws {
        let f = WeylParam(vec![Complex64::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        )]);
        let mut psi = DVector::<Complex64>::zeros(fock.dim());
        for k in 0..fock.dim() {
            psi[k] = Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
                * 0.3_f64.powi(k as i32);
        }
        psi /= Complex64::new(psi.norm(), 0.0);
        let leak = fock.top_sector_mass(&psi);
        let (ln, rn) = number_bound_check(&fock, &f, &psi).map_err(|e| anyhow!("{e}"))?;
        let (lh, rh) = hw_bound_check(&fock, &f, &psi).map_err(|e| anyhow!("{e}"))?;
        min_margin = min_margin.min(rn - ln).min(rh - lh);
        rows.push(ResultRow {
            level: draw as u32,
            error_vs_oracle: rn - ln,
            error_vs_closed_form: rh - lh,
            successive_difference: 0.0,
            norm_drift: leak,
        });
    }
    Ok(ExperimentOutcome {
        scenario: config.scenario.clone(),
        seed: config.seed,
        rows,
        fitted_order: None,
        pass: min_margin >= 0.0,
        note: format!("min bound margin {min_margin:.3e} over {draws} draws"),
        wall_ms: 0.0,
    })
}
