//! Monte-Carlo checks of the fit, bias and shot-noise laws against closed forms.
//!
//! Each check draws from its own seeded stream and reports the measured
//! quantity next to the target, so a failure is diagnosable from the line alone.

use std::f64::consts::{SQRT_2, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ansatz::{AnsatzSpec, ParameterVector};
use crate::error::Result;
use crate::fit::{fit_trig, fit_trig_general, propagate_offset, SHIFT};
use crate::hamiltonian::{build_hamiltonian, Model};
use crate::measurement::measure_energy;
use crate::statevector::exact_expectation;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: impl Into<String>, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed,
        detail,
    }
}

fn landscape(b: [f64; 3], x: f64) -> f64 {
    b[0] + SQRT_2 * (b[1] * x.cos() + b[2] * x.sin())
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (
        m,
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0),
    )
}

fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, _) = mean_var(xs);
    let (my, _) = mean_var(ys);
    let n = xs.len() as f64;
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1.0)
}

/// Noiseless three-point fits recover the coefficients and the grid minimizer.
pub fn exact_fit_oracle(cases: usize, grid: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table: Vec<(f64, f64)> = (0..grid)
        .map(|i| (TAU * i as f64 / grid as f64).sin_cos())
        .collect();
    let step = TAU / grid as f64;
    let (mut worst_coef, mut worst_angle) = (0.0f64, 0.0f64);
    for _ in 0..cases {
        let b = [
            rng.random_range(-3.0..3.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        ];
        let fit = fit_trig(
            landscape(b, 0.0),
            landscape(b, SHIFT),
            landscape(b, -SHIFT),
            0.0,
        )?;
        for (got, want) in [fit.b1, fit.b2, fit.b3].into_iter().zip(b) {
            worst_coef = worst_coef.max((got - want).abs());
        }
        let mut best = (f64::INFINITY, 0usize);
        for (i, (s, c)) in table.iter().enumerate() {
            let f = b[1] * c + b[2] * s;
            if f < best.0 {
                best = (f, i);
            }
        }
        let grid_angle = best.1 as f64 * step;
        worst_angle = worst_angle.max(circular_distance(fit.theta_min, grid_angle) / step);
    }
    Ok(outcome(
        "exact fit",
        worst_coef <= 1e-12 && worst_angle <= 1.0,
        format!("max coefficient error {worst_coef:.2e} (<= 1e-12), max minimizer offset {worst_angle:.3} grid steps (<= 1)"),
    ))
}

/// Coefficient covariance is `σ²/3 · I` for i.i.d. Gaussian noise.
pub fn covariance_law(reps: usize, sigma: f64, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    let b = [0.3, -0.8, 0.5];
    let clean = [landscape(b, 0.0), landscape(b, SHIFT), landscape(b, -SHIFT)];
    let mut cols = [
        Vec::with_capacity(reps),
        Vec::with_capacity(reps),
        Vec::with_capacity(reps),
    ];
    for _ in 0..reps {
        let f: Vec<f64> = clean.iter().map(|c| c + noise.sample(&mut rng)).collect();
        let fit = fit_trig(f[0], f[1], f[2], sigma * sigma)?;
        cols[0].push(fit.b1);
        cols[1].push(fit.b2);
        cols[2].push(fit.b3);
    }
    let target = sigma * sigma / 3.0;
    let v2 = mean_var(&cols[1]).1;
    let v3 = mean_var(&cols[2]).1;
    let se_cov = target / (reps as f64).sqrt();
    let covs = [
        covariance(&cols[0], &cols[1]),
        covariance(&cols[0], &cols[2]),
        covariance(&cols[1], &cols[2]),
    ];
    let var_ok = [v2, v3].iter().all(|v| (v / target - 1.0).abs() <= 0.03);
    let cov_ok = covs.iter().all(|c| c.abs() <= 3.0 * se_cov);
    Ok(outcome(
        "coefficient covariance",
        var_ok && cov_ok,
        format!(
            "var(b2)/target {:.4}, var(b3)/target {:.4} (within 3%); covariances in SE units {:.2} {:.2} {:.2} (within 3)",
            v2 / target,
            v3 / target,
            covs[0] / se_cov,
            covs[1] / se_cov,
            covs[2] / se_cov
        ),
    ))
}

/// Mean of `f*(θ̂) - f̂(θ̂)` against `2 R* ξ⁻²` with `R* = 1` and `σ_b = 1/ξ`.
pub fn minimum_bias(xi: f64, reps: usize, rel_tol: f64, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_star = 1.0;
    let sigma_b = r_star / xi;
    let sigma = sigma_b * 3f64.sqrt();
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    // R* = √2 |b|, minimum at θ = 1.1
    let phase: f64 = 1.1 - std::f64::consts::PI;
    let amp = r_star / SQRT_2;
    let b = [-0.4, amp * phase.cos(), amp * phase.sin()];
    let mut sum = 0.0;
    for _ in 0..reps {
        let f = |x: f64, rng: &mut ChaCha8Rng| landscape(b, x) + noise.sample(rng);
        let (f0, fp, fm) = (f(0.0, &mut rng), f(SHIFT, &mut rng), f(-SHIFT, &mut rng));
        let fit = fit_trig(f0, fp, fm, sigma * sigma)?;
        sum += landscape(b, fit.theta_min) - fit.f_min;
    }
    let empirical = sum / reps as f64;
    let target = 2.0 * r_star / (xi * xi);
    let rel = empirical / target - 1.0;
    Ok(outcome(
        format!("minimum bias xi={xi}"),
        rel.abs() <= rel_tol,
        format!(
            "empirical {empirical:.5e}, predicted {target:.5e}, relative deviation {:+.2}% (within {:.0}%)",
            100.0 * rel,
            100.0 * rel_tol
        ),
    ))
}

/// Variance of the fitted minimizer against `2ξ⁻²`.
pub fn angle_variance(xi: f64, reps: usize, rel_tol: f64, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = 3f64.sqrt() / xi;
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    let b = [0.0, -1.0 / SQRT_2, 0.0];
    let deltas: Vec<f64> = (0..reps)
        .map(|_| {
            let f = |x: f64, rng: &mut ChaCha8Rng| landscape(b, x) + noise.sample(rng);
            let (f0, fp, fm) = (f(0.0, &mut rng), f(SHIFT, &mut rng), f(-SHIFT, &mut rng));
            let t = fit_trig(f0, fp, fm, sigma * sigma).map(|fit| fit.theta_min)?;
            Ok(if t > std::f64::consts::PI { t - TAU } else { t })
        })
        .collect::<Result<_>>()?;
    let var = mean_var(&deltas).1;
    let target = 2.0 / (xi * xi);
    let rel = var / target - 1.0;
    Ok(outcome(
        format!("minimizer variance xi={xi}"),
        rel.abs() <= rel_tol,
        format!(
            "empirical {var:.5e}, predicted {target:.5e}, relative deviation {:+.2}% (within {:.0}%)",
            100.0 * rel,
            100.0 * rel_tol
        ),
    ))
}

/// A known offset on the reused value moves the fit by `(Δ/3, √2Δ/3, 0)`.
pub fn offset_propagation(cases: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let f: [f64; 3] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        let delta = rng.random_range(-2.0..2.0);
        let base = fit_trig(f[0], f[1], f[2], 0.0)?;
        let moved = fit_trig(f[0] + delta, f[1], f[2], 0.0)?;
        let want = propagate_offset(delta);
        let exact = [delta / 3.0, SQRT_2 * delta / 3.0, 0.0];
        for (got, (w, e)) in [moved.b1 - base.b1, moved.b2 - base.b2, moved.b3 - base.b3]
            .into_iter()
            .zip([want.db1, want.db2, want.db3].into_iter().zip(exact))
        {
            worst = worst.max((got - w).abs()).max((w - e).abs());
        }
    }
    Ok(outcome(
        "offset propagation",
        worst <= 1e-12,
        format!("max deviation {worst:.2e} (<= 1e-12)"),
    ))
}

/// Second-harmonic landscape: mean `f̂(θ̂) - f*(θ̂)` against `-(2σ_b²/R*)(1 + 4)`,
/// `R*` the true curvature at the minimum and `ξ = R*/σ_b`.
pub fn harmonic_bias(xi: f64, reps: usize, rel_tol: f64, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c1, c2) = (-0.5, -0.1);
    let truth = |x: f64| SQRT_2 * (c1 * x.cos() + c2 * (2.0 * x).cos());
    // minimum at 0, curvature -√2(c1 + 4 c2)
    let r_star = -SQRT_2 * (c1 + 4.0 * c2);
    let sigma_b = r_star / xi;
    let m = 5usize;
    let sigma = sigma_b * (m as f64).sqrt();
    let noise = Normal::new(0.0, sigma).expect("finite sigma");
    // place the sample grid off the minimum
    let origin = 0.37;
    let mut sum = 0.0;
    for _ in 0..reps {
        let values: Vec<f64> = (0..m)
            .map(|j| truth(origin + TAU * j as f64 / m as f64) + noise.sample(&mut rng))
            .collect();
        let fit = fit_trig_general(&values, 2, sigma * sigma)?;
        let (t, f) = fit.minimize();
        sum += f - truth(origin + t);
    }
    let empirical = sum / reps as f64;
    let target = -2.0 * sigma_b * sigma_b / r_star * 5.0;
    let rel = empirical / target - 1.0;
    Ok(outcome(
        format!("second-harmonic bias xi={xi}"),
        rel.abs() <= rel_tol,
        format!(
            "empirical {empirical:.5e}, predicted {target:.5e}, relative deviation {:+.2}% (within {:.0}%)",
            100.0 * rel,
            100.0 * rel_tol
        ),
    ))
}

/// Energy estimates are unbiased and their variance halves when shots double.
pub fn shot_scaling(reps: usize, rel_tol: f64, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = build_hamiltonian(Model::Tfim, 3, Model::Tfim.default_couplings())?;
    let spec = AnsatzSpec::new(3, 1)?;
    let psi = spec.prepare(&ParameterVector::random(spec.n_params(), &mut rng))?;
    let exact = exact_expectation(&h, &psi)?;
    let mut stats = Vec::new();
    for spp in [100, 200] {
        let xs: Vec<f64> = (0..reps)
            .map(|_| measure_energy(&h, &psi, spp, &mut rng).map(|m| m.value))
            .collect::<Result<_>>()?;
        stats.push(mean_var(&xs));
    }
    let ratio = stats[0].1 / stats[1].1;
    let se = (stats[0].1 / reps as f64).sqrt();
    let mean_ok = (stats[0].0 - exact).abs() <= 4.0 * se;
    Ok(outcome(
        "shot-noise scaling",
        (ratio / 2.0 - 1.0).abs() <= rel_tol && mean_ok,
        format!(
            "variance ratio {ratio:.4} (2 within {:.0}%), mean offset {:.2} SE",
            100.0 * rel_tol,
            (stats[0].0 - exact) / se
        ),
    ))
}

/// The full suite; `reps` sets the Monte-Carlo sample size of every statistical check.
pub fn run_suite(reps: usize, seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        exact_fit_oracle(1000, 1_000_000, seed)?,
        covariance_law(reps, 0.1, seed + 1)?,
        minimum_bias(10.0, reps, 0.10, seed + 2)?,
        minimum_bias(20.0, reps, 0.10, seed + 3)?,
        minimum_bias(5.0, reps, 0.30, seed + 4)?,
        angle_variance(20.0, reps, 0.05, seed + 5)?,
        offset_propagation(100, seed + 6)?,
        harmonic_bias(10.0, reps, 0.15, seed + 7)?,
        harmonic_bias(20.0, reps, 0.15, seed + 8)?,
        shot_scaling(reps, 0.05, seed + 9)?,
    ])
}
