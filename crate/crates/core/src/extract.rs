//! Source-parameter extraction from singles and coincidence counts.
//!
//! A distinguishable-pair source with brightness `λ` feeding two detection
//! paths with total transmissions `T_a`, `T_b` produces, over `R·τ` windows,
//! closed-form expected singles and coincidence counts. Fitting those three
//! observables recovers `(λ, T_a, T_b)`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::{lit, Scalar};
use crate::simplex::NelderMead;
use crate::Result;

/// Singles and coincidence counts of one detector pair over an integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountTriple<F> {
    /// Singles counts at the first detector.
    pub s_a: F,
    /// Singles counts at the second detector.
    pub s_b: F,
    /// Coincidence counts.
    pub c_ab: F,
    /// Window rate in Hz.
    pub rate_hz: F,
    /// Integration time in seconds.
    pub tau_s: F,
}

impl<F: Scalar> CountTriple<F> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("s_a", self.s_a), ("s_b", self.s_b), ("c_ab", self.c_ab)] {
            if v < F::zero() || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} negative")));
            }
        }
        if self.c_ab > self.s_a.min(self.s_b) {
            return Err(Error::InvalidParameter(format!(
                "coincidences {} exceed singles ({}, {})",
                self.c_ab, self.s_a, self.s_b
            )));
        }
        if self.rate_hz <= F::zero() || self.tau_s <= F::zero() {
            return Err(Error::InvalidParameter("rate and tau must be positive".into()));
        }
        Ok(())
    }

    /// Number of windows `R·τ`.
    pub fn windows(&self) -> F {
        self.rate_hz * self.tau_s
    }
}

/// Fit output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult<F> {
    pub lambda_hat: F,
    pub t_a_hat: F,
    pub t_b_hat: F,
    /// Objective value at the fitted point.
    pub residual: F,
    pub iterations: usize,
    pub converged: bool,
}

/// Residual form of the least-squares objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveKind {
    /// Sum of squared absolute count differences.
    #[default]
    Absolute,
    /// Sum of squared relative differences; useful when singles and
    /// coincidences differ by orders of magnitude.
    Relative,
}

/// Expected singles and coincidence counts for the closed-form model:
///
/// `S_i = Rτ (1 + e^(-2λT_i) (D0 - 1))`, and the coincidence count is the
/// photon-number average of the joint click probability,
/// `C = Rτ Σ_n P(n) (1-(1-D0)(1-T_a)^n)(1-(1-D0)(1-T_b)^n)`, whose closed
/// form is
/// `C = Rτ (1 + (D0-1)(e^(-2λT_a) + e^(-2λT_b)) + (D0-1)² e^(-2λ(T_a+T_b-T_aT_b)))`.
pub fn model_counts<F: Scalar>(lambda: F, t_a: F, t_b: F, d0: F, rate_hz: F, tau_s: F) -> CountTriple<F> {
    let windows = rate_hz * tau_s;
    let two_lambda = lit::<F>(2.0) * lambda;
    let dm = d0 - F::one();
    let ea = (-two_lambda * t_a).exp();
    let eb = (-two_lambda * t_b).exp();
    let s_a = windows * (F::one() + ea * dm);
    let s_b = windows * (F::one() + eb * dm);
    let ejoint = (-two_lambda * (t_a + t_b - t_a * t_b)).exp();
    let c_ab = windows * (F::one() + dm * (ea + eb) + dm * dm * ejoint);
    CountTriple { s_a, s_b, c_ab, rate_hz, tau_s }
}

/// First-order initial conditions, from the no-noise approximation:
/// `λ0 = S_a S_b / (Rτ C)`, `T_a0 = C/S_b`, `T_b0 = C/S_a`.
///
/// `λ0` estimates the mean pair number, i.e. roughly `2λ`; it is only a
/// starting point for the fit.
pub fn initial_guess<F: Scalar>(counts: &CountTriple<F>) -> Result<(F, F, F)> {
    if counts.c_ab <= F::zero() {
        return Err(Error::InsufficientStatistics);
    }
    let lambda0 = counts.s_a * counts.s_b / (counts.windows() * counts.c_ab);
    Ok((lambda0, counts.c_ab / counts.s_b, counts.c_ab / counts.s_a))
}

/// Least-squares objective `F(λ, T_a, T_b)` against measured counts, with a
/// quadratic penalty keeping all three parameters inside `(0, 1)`.
fn objective<F: Scalar>(counts: &CountTriple<F>, d0: F, kind: ObjectiveKind, x: &[F]) -> F {
    let (lambda, t_a, t_b) = (x[0], x[1], x[2]);
    let mut penalty = F::zero();
    let scale = counts.windows() * counts.windows();
    for &v in x {
        if v <= F::zero() {
            penalty = penalty + scale * (F::one() + v * v - v - v);
        } else if v >= F::one() {
            penalty = penalty + scale * v * v;
        }
    }
    if penalty > F::zero() {
        return penalty;
    }
    let m = model_counts(lambda, t_a, t_b, d0, counts.rate_hz, counts.tau_s);
    let diff = |model: F, meas: F| match kind {
        ObjectiveKind::Absolute => model - meas,
        ObjectiveKind::Relative => {
            if meas == F::zero() {
                model
            } else {
                (model - meas) / meas
            }
        }
    };
    let da = diff(m.s_a, counts.s_a);
    let db = diff(m.s_b, counts.s_b);
    let dc = diff(m.c_ab, counts.c_ab);
    da * da + db * db + dc * dc
}

/// Fit `(λ, T_a, T_b)` to measured counts with the dark probability treated
/// as known, using Nelder–Mead from the closed-form initial guess.
pub fn fit_params<F: Scalar>(counts: &CountTriple<F>, d0: F) -> Result<ExtractionResult<F>> {
    fit_params_with(counts, d0, ObjectiveKind::Absolute)
}

/// [`fit_params`] with an explicit objective form.
pub fn fit_params_with<F: Scalar>(
    counts: &CountTriple<F>,
    d0: F,
    kind: ObjectiveKind,
) -> Result<ExtractionResult<F>> {
    counts.validate()?;
    let (l0, ta0, tb0) = initial_guess(counts)?;
    let clamp = |v: F| v.max(lit(1e-12)).min(lit(0.999));
    let x0 = [clamp(l0), clamp(ta0), clamp(tb0)];
    let steps: Vec<F> = x0.iter().map(|&v| (v * lit(0.25)).max(lit(1e-9))).collect();
    let nm = NelderMead::<F>::default();

    let f0 = objective(counts, d0, kind, &x0);
    let run = nm.minimize(|x| objective(counts, d0, kind, x), &x0, &steps);
    // The fit never leaves the start worse off.
    let (x, value) = if run.value <= f0 { (run.x.clone(), run.value) } else { (x0.to_vec(), f0) };
    Ok(ExtractionResult {
        lambda_hat: x[0],
        t_a_hat: x[1],
        t_b_hat: x[2],
        residual: value,
        iterations: run.iterations,
        converged: run.converged,
    })
}

/// Back out the source-internal transmission from a fitted total path
/// transmission and the independently measured downstream efficiency.
pub fn eta0_from_calibration<F: Scalar>(t_total: F, downstream_eff: F) -> Result<F> {
    if downstream_eff <= F::zero() {
        return Err(Error::InvalidParameter(format!(
            "downstream efficiency {downstream_eff} must be positive"
        )));
    }
    let eta0 = t_total / downstream_eff;
    if eta0 > F::one() {
        return Err(Error::TransmissionAboveUnity(eta0.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(eta0)
}
