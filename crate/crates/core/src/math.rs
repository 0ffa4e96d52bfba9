//! Shared mathematical primitives: binary entropy and its inversion,
//! photon-pair number statistics, and link budgets.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::params::{SystemParams, User, UserPair};
use crate::scalar::{lit, Scalar};
use crate::Result;

/// Absolute tolerance for the bisection solvers.
pub const BISECTION_TOL: f64 = 1e-12;

/// Binary Shannon entropy in bits, with the convention `0 log 0 = 0`.
pub fn binary_entropy<F: Scalar>(p: F) -> Result<F> {
    if !(F::zero()..=F::one()).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("entropy argument {p} outside [0, 1]")));
    }
    if p == F::zero() || p == F::one() {
        return Ok(F::zero());
    }
    let q = F::one() - p;
    Ok(-(p * p.log2()) - q * q.log2())
}

/// Bisection on a monotone-bracketed function, to absolute tolerance
/// `BISECTION_TOL` on the argument.
fn bisect<F: Scalar>(mut lo: F, mut hi: F, mut f: impl FnMut(F) -> F) -> F {
    let tol = lit::<F>(BISECTION_TOL);
    let mut f_lo = f(lo);
    debug_assert!(f_lo * f(hi) <= F::zero(), "bisection bracket does not straddle a root");
    for _ in 0..200 {
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            break; // no representable midpoint left
        }
        let f_mid = f(mid);
        if f_lo * f_mid <= F::zero() {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    (lo + hi) * lit(0.5)
}

/// The critical QBER above which no security margin exists: the unique
/// solution of `H2(E) = 1/2` on `(0, 1/2)`, approximately 0.1100.
///
/// This doubles as the protocol abort threshold; the conventional "QBER
/// above 11%" rule is the same condition.
pub fn qber_abort_threshold<F: Scalar>() -> F {
    bisect(lit(1e-6), lit(0.499), |e| {
        binary_entropy(e).expect("in range") - lit(0.5)
    })
}

/// Minimum error rate an adversary can achieve when guessing an honest
/// party's raw key, from `H2(P_e) = 1 - H2(E)`.
///
/// Returns the unique `P_e` in `(E, 1/2]`. Fails with
/// [`Error::NoSecurityMargin`] when `E` is at or above
/// [`qber_abort_threshold`], where the equation has no solution above `E`.
pub fn solve_pe<F: Scalar>(e: F) -> Result<F> {
    if !(F::zero()..=F::one()).contains(&e) || !e.is_finite() {
        return Err(Error::InvalidParameter(format!("QBER {e} outside [0, 1]")));
    }
    let e_crit = qber_abort_threshold::<F>();
    if e >= e_crit {
        return Err(Error::NoSecurityMargin {
            qber: e.to_f64().unwrap_or(f64::NAN),
            threshold: e_crit.to_f64().unwrap_or(f64::NAN),
        });
    }
    let target = F::one() - binary_entropy(e)?;
    // H2 is strictly increasing on (0, 1/2]; bracket between E and 1/2.
    let lo = e.max(lit(1e-300));
    Ok(bisect(lo, lit(0.5), |p| {
        binary_entropy(p).expect("in range") - target
    }))
}

/// dB loss to linear transmission: `10^(-dB/10)`.
pub fn db_to_linear<F: Scalar>(db: F) -> F {
    lit::<F>(10.0).powf(-db / lit(10.0))
}

/// Linear transmission to dB loss.
pub fn linear_to_db<F: Scalar>(eta: F) -> F {
    -lit::<F>(10.0) * eta.log10()
}

/// Photon-pair number distribution of the weakly pumped source:
/// `P(n) = e^(-2λ) (2λ)^n / n!` where `λ` is half the mean pair number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistribution<F> {
    lambda: F,
    n_max: usize,
}

impl<F: Scalar> PairDistribution<F> {
    pub fn new(lambda: F, n_max: usize) -> Result<Self> {
        if lambda < F::zero() || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} negative")));
        }
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!("n_max = {n_max} below 2")));
        }
        Ok(Self { lambda, n_max })
    }

    pub fn lambda(&self) -> F {
        self.lambda
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `P(n)`, evaluated iteratively to avoid factorial overflow.
    pub fn prob(&self, n: usize) -> F {
        let mu = lit::<F>(2.0) * self.lambda;
        let mut p = (-mu).exp();
        for k in 1..=n {
            p = p * mu / F::from_usize(k).unwrap();
        }
        p
    }

    /// Probabilities `P(0..=n_max)`.
    pub fn probs(&self) -> Vec<F> {
        let mu = lit::<F>(2.0) * self.lambda;
        let mut out = Vec::with_capacity(self.n_max + 1);
        let mut p = (-mu).exp();
        out.push(p);
        for k in 1..=self.n_max {
            p = p * mu / F::from_usize(k).unwrap();
            out.push(p);
        }
        out
    }

    /// Analytic tail mass beyond `n_max`: `1 - Σ_{n<=n_max} P(n)`.
    pub fn tail(&self) -> F {
        let head: F = self.probs().iter().fold(F::zero(), |a, &b| a + b);
        (F::one() - head).max(F::zero())
    }
}

/// Per-pair link transmissions: the probability that a photon routed to each
/// side of the pair ends in a detector click (either basis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget<F> {
    /// Transmission of the pair's first user (Alice for the Alice–j pairs).
    pub t_source: F,
    /// Transmission of the pair's second user.
    pub t_remote: F,
}

/// Total transmission from source emission to a click for one user:
/// `η0 · t1 · ηc · ηD` for Alice, `η0 · (1-t1)/2 · ηc · ηD` for Bob or
/// Charlie (each remote user sits behind a 50/50 split of the `1-t1` arm).
pub fn user_transmission<F: Scalar>(params: &SystemParams<F>, user: User) -> F {
    let split = match user {
        User::Alice => params.t1,
        User::Bob | User::Charlie => (F::one() - params.t1) * lit(0.5),
    };
    params.eta0 * split * params.channel_eta(user) * *params.det_eff.get(user)
}

/// Link budget for a user pair.
pub fn link_budget<F: Scalar>(params: &SystemParams<F>, pair: UserPair) -> LinkBudget<F> {
    let (a, b) = pair.users();
    LinkBudget {
        t_source: user_transmission(params, a),
        t_remote: user_transmission(params, b),
    }
}
