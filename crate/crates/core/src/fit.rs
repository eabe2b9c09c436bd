//! One-dimensional trigonometric regression and its first-order bias.
//!
//! Along one parameter direction the energy is
//! `f(θ) = b1 + √2 (b2 cos θ + b3 sin θ)`. Three evaluations at the
//! equidistant local offsets `{0, +2π/3, -2π/3}` make the design matrix
//! orthogonal with `ΦΦᵀ = 3I`, so the least-squares fit is `b̂ = Φf / 3` and
//! every coefficient has variance `σ²/3`.
//!
//! All fits are expressed in a local frame where the reused point sits at
//! offset 0.

use std::f64::consts::{PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::ansatz::wrap_angle;
use crate::error::{Error, Result};

/// Local offset of the two freshly measured points.
pub const SHIFT: f64 = TAU / 3.0;

/// Default signal-to-noise threshold separating the high- and low-SNR regimes.
pub const DEFAULT_SNR_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigFit {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    /// Variance shared by every fitted coefficient.
    pub sigma_b_sq: f64,
    /// `R̂ = √(2b2² + 2b3²)`
    pub amplitude: f64,
    /// Minimizer as a local offset in `[0, 2π)`.
    pub theta_min: f64,
    /// `b1 - R̂`
    pub f_min: f64,
}

impl TrigFit {
    pub fn from_coefficients(b1: f64, b2: f64, b3: f64, sigma_b_sq: f64) -> Self {
        let amplitude = (2.0 * b2 * b2 + 2.0 * b3 * b3).sqrt();
        TrigFit {
            b1,
            b2,
            b3,
            sigma_b_sq,
            amplitude,
            theta_min: minimizer_angle(b2, b3),
            f_min: b1 - amplitude,
        }
    }

    /// The fitted curve at local angle `theta`.
    pub fn evaluate(&self, theta: f64) -> f64 {
        self.b1 + SQRT_2 * (self.b2 * theta.cos() + self.b3 * theta.sin())
    }

    /// Coefficients after adding `shift`; derived fields are recomputed.
    pub fn shifted(&self, shift: CoefficientShift) -> Self {
        TrigFit::from_coefficients(
            self.b1 + shift.db1,
            self.b2 + shift.db2,
            self.b3 + shift.db3,
            self.sigma_b_sq,
        )
    }
}

/// `atan2(b3, b2) + π` on `[0, 2π)`, with `π` for a flat landscape.
fn minimizer_angle(b2: f64, b3: f64) -> f64 {
    if b2 == 0.0 && b3 == 0.0 {
        return PI;
    }
    wrap_angle(b3.atan2(b2) + PI)
}

/// Least-squares fit through `f0` (offset 0), `f_plus` (+2π/3) and
/// `f_minus` (-2π/3). `sigma_sq` is the per-evaluation shot variance.
pub fn fit_trig(f0: f64, f_plus: f64, f_minus: f64, sigma_sq: f64) -> Result<TrigFit> {
    if !sigma_sq.is_finite() || sigma_sq < 0.0 {
        return Err(Error::InvalidInput(format!(
            "shot variance {sigma_sq} must be >= 0"
        )));
    }
    let b1 = (f0 + f_plus + f_minus) / 3.0;
    let b2 = SQRT_2 / 3.0 * (f0 - (f_plus + f_minus) / 2.0);
    let b3 = (f_plus - f_minus) / 6f64.sqrt();
    Ok(TrigFit::from_coefficients(b1, b2, b3, sigma_sq / 3.0))
}

/// The fitted minimizer, `atan2(b3, b2) + π` in the local frame.
pub fn minimizer(fit: &TrigFit) -> f64 {
    fit.theta_min
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SnrRegime {
    HighSnr,
    LowSnr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    /// Expected `f̂ - f*` at the fitted minimizer; never positive.
    pub delta_f_bar: f64,
    /// `R̂ / σ_b`; infinite when there is no noise.
    pub snr: f64,
    pub regime: SnrRegime,
}

impl BiasEstimate {
    /// Amount to add to a fitted minimum to remove the bias.
    pub fn correction(&self) -> f64 {
        -self.delta_f_bar
    }
}

/// Leading-order bias `-2σ_b² / R̂` of the fitted minimum.
///
/// Below `snr_threshold` the amplitude is floored at `snr_threshold · σ_b`,
/// which caps the magnitude at `2σ_b / snr_threshold` on flat directions
/// (`2σ_b` for the default threshold of 1).
pub fn bias_estimate(fit: &TrigFit, snr_threshold: f64) -> Result<BiasEstimate> {
    if !snr_threshold.is_finite() || snr_threshold <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "snr threshold {snr_threshold} must be positive"
        )));
    }
    let var = fit.sigma_b_sq;
    if var == 0.0 {
        return Ok(BiasEstimate {
            delta_f_bar: 0.0,
            snr: f64::INFINITY,
            regime: SnrRegime::HighSnr,
        });
    }
    let sigma_b = var.sqrt();
    let snr = fit.amplitude / sigma_b;
    if snr >= snr_threshold {
        Ok(BiasEstimate {
            delta_f_bar: -2.0 * var / fit.amplitude,
            snr,
            regime: SnrRegime::HighSnr,
        })
    } else {
        Ok(BiasEstimate {
            delta_f_bar: -2.0 * var / fit.amplitude.max(snr_threshold * sigma_b),
            snr,
            regime: SnrRegime::LowSnr,
        })
    }
}

/// Coefficient change `(Δb1, Δb2, Δb3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientShift {
    pub db1: f64,
    pub db2: f64,
    pub db3: f64,
}

impl CoefficientShift {
    /// Change of the fitted curve at local angle `theta`.
    pub fn evaluate(&self, theta: f64) -> f64 {
        self.db1 + SQRT_2 * (self.db2 * theta.cos() + self.db3 * theta.sin())
    }
}

impl std::ops::Neg for CoefficientShift {
    type Output = CoefficientShift;

    fn neg(self) -> Self {
        CoefficientShift {
            db1: -self.db1,
            db2: -self.db2,
            db3: -self.db3,
        }
    }
}

/// Shift of the least-squares coefficients caused by adding `offset` to the
/// value at local offset 0. `b3` only sees `f₊ - f₋`, so it never moves.
pub fn propagate_offset(offset: f64) -> CoefficientShift {
    CoefficientShift {
        db1: offset / 3.0,
        db2: SQRT_2 * offset / 3.0,
        db3: 0.0,
    }
}

/// Fit of an `N`-harmonic landscape
/// `b1 + √2 Σ_n (b_n^c cos nθ + b_n^s sin nθ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralTrigFit {
    pub b1: f64,
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
    /// `σ² / (2N + 1)`
    pub sigma_b_sq: f64,
}

impl GeneralTrigFit {
    pub fn order(&self) -> usize {
        self.cos_coeffs.len()
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        let mut s = 0.0;
        for (k, (c, d)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let (sn, cs) = ((k + 1) as f64 * theta).sin_cos();
            s += c * cs + d * sn;
        }
        self.b1 + SQRT_2 * s
    }

    fn derivatives(&self, theta: f64) -> (f64, f64) {
        let (mut d1, mut d2) = (0.0, 0.0);
        for (k, (c, d)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let n = (k + 1) as f64;
            let (sn, cs) = (n * theta).sin_cos();
            d1 += n * (-c * sn + d * cs);
            d2 += -n * n * (c * cs + d * sn);
        }
        (SQRT_2 * d1, SQRT_2 * d2)
    }

    /// Second derivative of the fitted curve.
    pub fn curvature(&self, theta: f64) -> f64 {
        self.derivatives(theta).1
    }

    /// Global minimizer in `[0, 2π)` and the minimum value: grid scan followed
    /// by Newton refinement.
    pub fn minimize(&self) -> (f64, f64) {
        let grid = 256 * self.order().max(1);
        let (mut best, mut best_f) = (0.0, f64::INFINITY);
        for i in 0..grid {
            let t = TAU * i as f64 / grid as f64;
            let f = self.evaluate(t);
            if f < best_f {
                best = t;
                best_f = f;
            }
        }
        let mut t = best;
        for _ in 0..20 {
            let (d1, d2) = self.derivatives(t);
            if d2 <= 0.0 {
                break;
            }
            let step = d1 / d2;
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let f = self.evaluate(t);
        if f <= best_f {
            (wrap_angle(t), f)
        } else {
            (best, best_f)
        }
    }
}

/// Least-squares fit of `2N + 1` values sampled at local offsets
/// `2πj / (2N + 1)`, `j = 0..2N`.
pub fn fit_trig_general(values: &[f64], order: usize, sigma_sq: f64) -> Result<GeneralTrigFit> {
    if order == 0 {
        return Err(Error::InvalidInput(
            "harmonic order must be positive".into(),
        ));
    }
    let m = 2 * order + 1;
    if values.len() != m {
        return Err(Error::Dimension {
            expected: m,
            actual: values.len(),
        });
    }
    if !sigma_sq.is_finite() || sigma_sq < 0.0 {
        return Err(Error::InvalidInput(format!(
            "shot variance {sigma_sq} must be >= 0"
        )));
    }
    let mf = m as f64;
    let b1 = values.iter().sum::<f64>() / mf;
    let mut cos_coeffs = vec![0.0; order];
    let mut sin_coeffs = vec![0.0; order];
    for (j, f) in values.iter().enumerate() {
        let x = TAU * j as f64 / mf;
        for n in 1..=order {
            let (s, c) = (n as f64 * x).sin_cos();
            cos_coeffs[n - 1] += f * c;
            sin_coeffs[n - 1] += f * s;
        }
    }
    for v in cos_coeffs.iter_mut().chain(sin_coeffs.iter_mut()) {
        *v *= SQRT_2 / mf;
    }
    Ok(GeneralTrigFit {
        b1,
        cos_coeffs,
        sin_coeffs,
        sigma_b_sq: sigma_sq / mf,
    })
}

/// `-(2σ_b² / R) Σ_{n=1}^{N} n²`, with `R` the curvature at the minimizer.
pub fn bias_estimate_general(fit: &GeneralTrigFit, r_star_proxy: f64) -> Result<f64> {
    if !r_star_proxy.is_finite() || r_star_proxy <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "curvature proxy {r_star_proxy} must be positive"
        )));
    }
    let n = fit.order() as f64;
    let sum_sq = n * (n + 1.0) * (2.0 * n + 1.0) / 6.0;
    Ok(-2.0 * fit.sigma_b_sq / r_star_proxy * sum_sq)
}
