//! Finite-size QDS security calculator: verification thresholds,
//! failure-probability bounds, required raw-key length, and signature rate.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::math::{binary_entropy, qber_abort_threshold, solve_pe};
use crate::noise::{gain_qber, GainQber};
use crate::params::{SystemParams, UserPair};
use crate::scalar::{lit, Scalar};
use crate::Result;

/// Upper bounds on the three failure modes at a given key length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureBounds<F> {
    /// Honest parties abort: mismatch count exceeds the acceptance threshold.
    pub honest_abort: F,
    /// A signature accepted directly is rejected when forwarded.
    pub repudiation: F,
    /// A verifier accepts a signature not produced by the signer.
    pub forge: F,
}

impl<F: Scalar> FailureBounds<F> {
    pub fn max(&self) -> F {
        self.honest_abort.max(self.repudiation).max(self.forge)
    }
}

/// Everything needed to parameterize signing at one observed error rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityBudget<F> {
    /// Basis-averaged raw-key error rate the budget was derived from.
    pub qber_e: F,
    /// Adversary's minimum guessing error rate.
    pub p_e: F,
    /// Direct-verification mismatch-fraction threshold.
    pub s_a: F,
    /// Forwarded-verification mismatch-fraction threshold.
    pub s_v: F,
    /// Required raw-key length per signed bit (even).
    pub raw_len: u64,
    /// Signatures per second; zero until combined with a gain (see
    /// [`signature_rate`]).
    pub sig_rate: F,
    /// Target failure probability.
    pub epsilon: F,
}

/// Acceptance thresholds placed between `E` and `P_e` so that the honest
/// abort, repudiation, and forging exponents balance:
/// `s_a = E + (P_e - E)/4`, `s_v = E + 3(P_e - E)/4`.
pub fn thresholds<F: Scalar>(e: F, p_e: F) -> Result<(F, F)> {
    if !(e < p_e) {
        return Err(Error::ThresholdOrdering(format!("QBER {e} not below P_e {p_e}")));
    }
    let gap = p_e - e;
    let quarter = lit::<F>(0.25);
    Ok((e + gap * quarter, e + lit::<F>(3.0) * gap * quarter))
}

/// Failure-probability bounds at raw-key length `l`:
/// `P(abort) <= 2 exp(-(s_a - E)² L)`, `P(repud) <= 2 exp(-((s_a - s_v)/2)² L)`,
/// `P(forge) <= 2 exp(-(P_e - s_a)² L)`.
pub fn failure_bounds<F: Scalar>(e: F, s_a: F, s_v: F, p_e: F, l: u64) -> Result<FailureBounds<F>> {
    if !(e < s_a && s_a < s_v && s_v < p_e) {
        return Err(Error::ThresholdOrdering(format!(
            "need E < s_a < s_v < P_e, got E={e}, s_a={s_a}, s_v={s_v}, P_e={p_e}"
        )));
    }
    if s_v >= lit(0.5) {
        return Err(Error::ThresholdOrdering(format!("s_v = {s_v} not below 1/2")));
    }
    let l_f = F::from_u64(l).unwrap();
    let two = lit::<F>(2.0);
    let bound = |gap: F| two * (-(gap * gap) * l_f).exp();
    Ok(FailureBounds {
        honest_abort: bound(s_a - e),
        repudiation: bound((s_a - s_v) * lit(0.5)),
        forge: bound(p_e - s_a),
    })
}

/// Smallest even raw-key length whose worst failure bound is at most
/// `epsilon`.
///
/// With the balanced thresholds the abort and repudiation bounds tie and
/// dominate, giving the closed form `L = ceil(16 ln(2/ε) / (P_e - E)²)`
/// rounded up to even.
pub fn required_length<F: Scalar>(e: F, epsilon: F) -> Result<u64> {
    if epsilon <= F::zero() || epsilon >= F::one() {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    let p_e = solve_pe(e)?;
    let gap = p_e - e;
    let l_raw = lit::<F>(16.0) * (lit::<F>(2.0) / epsilon).ln() / (gap * gap);
    let l_raw = l_raw.to_f64().unwrap_or(f64::INFINITY);
    if !l_raw.is_finite() || l_raw >= 9.0e18 {
        return Err(Error::InvalidParameter(format!(
            "required length overflows: {l_raw:.3e} bits"
        )));
    }
    let mut l = l_raw.ceil() as u64;
    if l % 2 == 1 {
        l += 1;
    }
    Ok(l.max(2))
}

impl<F: Scalar> SecurityBudget<F> {
    /// Derive the full budget from an observed error rate and a target
    /// failure probability. `sig_rate` is left at zero.
    pub fn derive(e: F, epsilon: F) -> Result<Self> {
        let p_e = solve_pe(e)?;
        let (s_a, s_v) = thresholds(e, p_e)?;
        let raw_len = required_length(e, epsilon)?;
        Ok(SecurityBudget {
            qber_e: e,
            p_e,
            s_a,
            s_v,
            raw_len,
            sig_rate: F::zero(),
            epsilon,
        })
    }

    /// Evaluate the three bounds at this budget's length.
    pub fn bounds(&self) -> Result<FailureBounds<F>> {
        failure_bounds(self.qber_e, self.s_a, self.s_v, self.p_e, self.raw_len)
    }

    /// Attach the signature rate for a window rate `v` and per-window gain
    /// `q`: `R = v·Q/L`.
    pub fn with_rate(mut self, v: F, q: F) -> Self {
        self.sig_rate = v * q / F::from_u64(self.raw_len).unwrap();
        self
    }
}

/// Signature-rate report for one pair. An abort (no security margin) is a
/// value, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignatureReport<F> {
    pub rate: F,
    pub aborted: bool,
    pub gain: Option<GainQber<F>>,
    pub budget: Option<SecurityBudget<F>>,
}

/// Signatures per second achievable by a pair under the analytic noise
/// model: `R = v·Q/L`. Returns a zero rate with the `aborted` flag set when
/// the predicted QBER leaves no security margin.
pub fn signature_rate<F: Scalar>(params: &SystemParams<F>, pair: UserPair) -> Result<SignatureReport<F>> {
    let gain = gain_qber(params, pair)?;
    if gain.q_total <= F::zero() {
        return Ok(SignatureReport { rate: F::zero(), aborted: false, gain: Some(gain), budget: None });
    }
    match SecurityBudget::derive(gain.e_avg, params.epsilon) {
        Ok(budget) => {
            let budget = budget.with_rate(params.rep_rate_v, gain.q_total);
            Ok(SignatureReport { rate: budget.sig_rate, aborted: false, gain: Some(gain), budget: Some(budget) })
        }
        Err(Error::NoSecurityMargin { .. }) => {
            Ok(SignatureReport { rate: F::zero(), aborted: true, gain: Some(gain), budget: None })
        }
        Err(other) => Err(other),
    }
}

/// Entanglement-based secret key rate `Q·(1 - f·H2(E_Z) - H2(E_X))`.
/// Informational: the signature protocol itself only needs
/// `1 - H2(E_Z) - H2(E_X) > 0`.
pub fn key_rate_check<F: Scalar>(e_x: F, e_z: F, f_ec: F, q: F) -> Result<F> {
    Ok(q * (F::one() - f_ec * binary_entropy(e_z)? - binary_entropy(e_x)?))
}

/// True when QDS is possible at all at these error rates.
pub fn has_margin<F: Scalar>(e_avg: F) -> bool {
    e_avg < qber_abort_threshold::<F>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn thresholds_reference() {
        let (sa, sv) = thresholds(0.0_f64, 0.5).unwrap();
        assert_eq!((sa, sv), (0.125, 0.375));
        let pe = solve_pe(0.056_f64).unwrap();
        let (sa, sv) = thresholds(0.056, pe).unwrap();
        close(sa, 0.0879875324579296, 1e-9);
        close(sv, 0.1519625973737887, 1e-9);
        // Algebraic identity: s_v - s_a = (P_e - E)/2.
        close(sv - sa, (pe - 0.056) / 2.0, 1e-15);
        assert!(thresholds(0.3_f64, 0.2).is_err());
    }

    #[test]
    fn bounds_vacuous_at_zero_length() {
        let b = failure_bounds(0.05_f64, 0.1, 0.15, 0.2, 0).unwrap();
        assert_eq!((b.honest_abort, b.repudiation, b.forge), (2.0, 2.0, 2.0));
    }

    #[test]
    fn abort_equals_repudiation_under_balanced_thresholds() {
        let e = 0.056_f64;
        let pe = solve_pe(e).unwrap();
        let (sa, sv) = thresholds(e, pe).unwrap();
        let b = failure_bounds(e, sa, sv, pe, 23182).unwrap();
        close(b.honest_abort, b.repudiation, 1e-22);
        // Frozen from the closed form at L = 23182.
        close(b.honest_abort, 9.991243345761e-11, 1e-22);
        assert!(b.forge < 1e-80);
        assert!(b.forge <= b.honest_abort);
    }

    #[test]
    fn required_length_reference() {
        // Bisection P_e then the closed form, computed independently at high
        // precision: L0 = 23181.14..., so 23182 after the even ceil.
        let l = required_length(0.056_f64, 1e-10).unwrap();
        assert_eq!(l, 23182);
        assert!((5_000..=100_000).contains(&l), "order 1e4 expected");
    }

    #[test]
    fn required_length_scales_logarithmically() {
        let l10 = required_length(0.056_f64, 1e-10).unwrap() as f64;
        let l20 = required_length(0.056_f64, 1e-20).unwrap() as f64;
        let expected = (2e20_f64).ln() / (2e10_f64).ln();
        close(l20 / l10, expected, 1e-3);
    }

    #[test]
    fn required_length_diverges_at_threshold() {
        let l1 = required_length(0.109_f64, 1e-10).unwrap();
        let l2 = required_length(0.1099_f64, 1e-10).unwrap();
        assert!(l2 > 10 * l1);
        assert!(required_length(0.12_f64, 1e-10).is_err());
    }

    #[test]
    fn key_rate_reference_points() {
        assert_eq!(key_rate_check(0.0_f64, 0.0, 1.0, 0.37).unwrap(), 0.37);
        // At the abort threshold the rate crosses zero.
        let r = key_rate_check(0.11_f64, 0.11, 1.0, 1.0).unwrap();
        close(r, 1.0 - 2.0 * 0.499915958164528, 1e-12);
        assert!(r > 0.0);
        assert!(key_rate_check(0.05_f64, 0.05, 1.16, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn signature_rate_deployed_scale() {
        // v·Q for the deployed Alice-Bob pair lands at the measured sifted
        // rate scale (71 ± 2 bits/s was observed), and the resulting rate is
        // a few millisignatures per second.
        let p = crate::SystemParams::current();
        let r = signature_rate(&p, UserPair::AliceBob).unwrap();
        assert!(!r.aborted);
        let raw_rate = p.rep_rate_v * r.gain.unwrap().q_total;
        assert!((60.0..80.0).contains(&raw_rate), "raw key rate {raw_rate}");
        assert!((2.0e-3..4.0e-3).contains(&r.rate), "signature rate {}", r.rate);
    }

    #[test]
    fn signature_rate_zero_gain() {
        let mut p = crate::SystemParams::current();
        p.lambda = 0.0;
        p.dark_prob = crate::PerUser::uniform(0.0);
        let r = signature_rate(&p, UserPair::AliceBob).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(!r.aborted);
    }

    #[test]
    fn signature_rate_aborts_without_margin() {
        let mut p = crate::SystemParams::current();
        p.channel_loss_db.bob = 60.0; // dark counts dominate, QBER ~ 0.5
        let r = signature_rate(&p, UserPair::AliceBob).unwrap();
        assert!(r.aborted);
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn length_independent_of_gain_and_rate() {
        // L depends only on (E, ε): two parameter sets with equal QBER but
        // different gains must require the same length.
        let b1 = SecurityBudget::derive(0.04_f64, 1e-10).unwrap();
        let b2 = SecurityBudget::derive(0.04_f64, 1e-10).unwrap();
        assert_eq!(b1.raw_len, b2.raw_len);
        let r1 = b1.with_rate(5e8, 1e-7);
        let r2 = b2.with_rate(5e8, 2e-7);
        close(r2.sig_rate / r1.sig_rate, 2.0, 1e-12);
    }

    proptest! {
        #[test]
        fn budget_meets_epsilon_minimally(e in 0.001_f64..0.10, exp in 4_u32..16) {
            let epsilon = 10f64.powi(-(exp as i32));
            let budget = SecurityBudget::derive(e, epsilon).unwrap();
            prop_assert!(budget.qber_e < budget.s_a);
            prop_assert!(budget.s_a < budget.s_v);
            prop_assert!(budget.s_v < budget.p_e);
            prop_assert!(budget.p_e <= 0.5 + 1e-12);
            prop_assert_eq!(budget.raw_len % 2, 0);
            let at_l = budget.bounds().unwrap();
            prop_assert!(at_l.max() <= epsilon * (1.0 + 1e-9));
            // Minimality: two bits fewer must violate the target.
            if budget.raw_len > 2 {
                let shorter = failure_bounds(e, budget.s_a, budget.s_v, budget.p_e, budget.raw_len - 2).unwrap();
                prop_assert!(shorter.max() > epsilon);
            }
            // Forging is always the easiest bound to meet.
            prop_assert!(at_l.forge <= at_l.honest_abort * (1.0 + 1e-12));
        }
    }
}
