//! Analytic gain/QBER engine: per-photon-number yields and error
//! coefficients for a user pair, assembled into per-basis gain and QBER.
//!
//! The model tracks, for each emitted pair number `n`, the conditional
//! probability `Y_n` that both users of a pair register a post-selected
//! click in one given basis, and the conditional error coefficients `e_n`
//! in each basis. Orders `n <= 2` use exact path accounting (to leading
//! order in the dark probability); higher orders use a pessimistic
//! uncorrelated approximation with `e_n = 1/2`.

use serde::{Deserialize, Serialize};

use crate::math::{link_budget, LinkBudget, PairDistribution};
use crate::params::{SystemParams, UserPair};
use crate::scalar::{lit, Scalar};
use crate::Result;

/// Default truncation order of the photon-number sum. Terms decay as
/// `(2λ)^n / n!`, so with `λ <= 0.1` the omitted tail is far below any
/// quantity of interest.
pub const DEFAULT_N_MAX: usize = 8;

/// Per-basis gain and QBER of one user pair.
///
/// `q_total` is the per-window probability of a post-selected coincidence
/// in one given basis; by the model's basis symmetry the Z and X gains are
/// equal, so `q_total` also equals the sifted-key yield per window per
/// basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainQber<F> {
    pub q_total: F,
    pub e_z: F,
    pub e_x: F,
    pub e_avg: F,
    /// True if any yield or error coefficient had to be clamped back into
    /// its physical range; indicates the closed-form approximations were
    /// pushed outside their validity region.
    pub clamped: bool,
}

/// Vacuum term: yield and error coefficient with zero pairs emitted.
/// Both users must see a dark count in the same basis; higher orders of the
/// dark probability are dropped.
pub fn yield_error_0<F: Scalar>(d0: F) -> (F, F) {
    debug_assert!(d0 >= F::zero() && d0 < lit(0.01));
    (lit::<F>(4.0) * d0 * d0, lit(0.5))
}

/// Single-pair yield and per-basis error coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePairTerm<F> {
    pub yield_1: F,
    pub e_z: F,
    pub e_x: F,
}

/// Single-pair term: signal coincidences plus one-click-plus-dark paths.
/// Valid for transmissions well below one; mixed terms like `T·D0²` are
/// dropped.
pub fn yield_error_1<F: Scalar>(
    budget: LinkBudget<F>,
    d0: F,
    e_dz: F,
    e_dx: F,
) -> SinglePairTerm<F> {
    let (ta, tj) = (budget.t_source, budget.t_remote);
    debug_assert!(ta <= lit(0.5) && tj <= lit(0.5), "transmissions must be << 1");
    let half = lit::<F>(0.5);
    let three_halves = lit::<F>(1.5);
    let three_quarters = lit::<F>(0.75);

    let y1 = ta * tj * half
        + (lit::<F>(2.0) * (ta + tj) - three_halves * (ta * ta + tj * tj)) * d0
        + lit::<F>(4.0) * d0 * d0;
    let dark_part = (ta + tj - three_quarters * (ta * ta + tj * tj)) * d0
        + lit::<F>(2.0) * d0 * d0;
    let err = |e_d: F| (ta * tj * e_d * (F::one() - e_d) + dark_part) / y1;
    SinglePairTerm {
        yield_1: y1,
        e_z: if y1 > F::zero() { err(e_dz) } else { F::zero() },
        e_x: if y1 > F::zero() { err(e_dx) } else { F::zero() },
    }
}

/// Two-pair yield and error coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPairTerm<F> {
    pub yield_2: F,
    pub e_z: F,
    pub e_x: F,
    /// Diagonal-basis error coefficient when both pairs carry the same
    /// diagonal polarization.
    pub e_x_parallel: F,
    /// Diagonal-basis error coefficient when the two pairs carry opposite
    /// diagonal polarizations; the complement of the Z coefficient, since a
    /// correct pattern in one basis is an error in the other.
    pub e_x_antiparallel: F,
}

/// Two-pair term, including the fourth-order cross terms
/// `(T_a T_j³ + T_j T_a³)/8`.
///
/// The Z-basis coefficient uses the Z misalignment; the same-polarization
/// diagonal coefficient uses the X misalignment; the X coefficient is the
/// average of the same- and opposite-polarization cases.
pub fn yield_error_2<F: Scalar>(
    budget: LinkBudget<F>,
    d0: F,
    e_dz: F,
    e_dx: F,
) -> TwoPairTerm<F> {
    let (ta, tj) = (budget.t_source, budget.t_remote);
    debug_assert!(ta <= lit(0.5) && tj <= lit(0.5), "transmissions must be << 1");
    let one = F::one();
    let s = ta + tj;
    let rem = one - s;
    let half = lit::<F>(0.5);
    let eighth = lit::<F>(0.125);

    // Shared dark-count bracket of the two-pair expressions.
    let dark_bracket = lit::<F>(4.0) * s * rem.powi(3)
        + lit::<F>(3.0) * (ta * ta + tj * tj) * rem * rem
        + (ta.powi(3) + tj.powi(3)) * rem
        + (ta.powi(4) + tj.powi(4)) * eighth;

    let y2 = lit::<F>(4.0) * rem.powi(4) * d0 * d0
        + dark_bracket * d0
        + lit::<F>(1.5) * ta * tj * rem * (lit::<F>(2.0) - s)
        + ta * tj * eighth * (lit::<F>(2.0) * (ta * ta + tj * tj) + lit::<F>(3.0) * ta * tj);

    let dark_err = lit::<F>(2.0) * rem.powi(4) * d0 * d0 + half * dark_bracket * d0;
    let cross = (ta * tj.powi(3) + tj * ta.powi(3)) * eighth;
    let bulk = ta * tj + lit::<F>(4.0) * rem * (lit::<F>(2.0) - s);

    let flip_z = e_dz * (one - e_dz);
    let e2z_num = dark_err
        + ta * tj * eighth * bulk * (one + lit::<F>(2.0) * flip_z)
        + cross * (one - (flip_z * (one - lit::<F>(2.0) * e_dz)).powi(2));

    let flip_x = e_dx * (one - e_dx);
    let e40_num = dark_err
        + lit::<F>(0.75) * ta * tj * flip_x * bulk
        + cross
            * (one - (one - lit::<F>(2.0) * e_dx) * ((one - e_dx).powi(3) - e_dx.powi(3)));

    let (e2z, e40) = if y2 > F::zero() {
        (e2z_num / y2, e40_num / y2)
    } else {
        (half, half)
    };
    let e22 = one - e2z;
    TwoPairTerm {
        yield_2: y2,
        e_z: e2z,
        e_x: (e40 + e22) * half,
        e_x_parallel: e40,
        e_x_antiparallel: e22,
    }
}

/// Higher-order terms (`m >= 3`): pessimistic uncorrelated approximation.
/// `Y_m = 2m(T_a + T_j)·D0 + m²·T_a·T_j`, with fully random errors.
pub fn yield_error_m<F: Scalar>(budget: LinkBudget<F>, d0: F, m: usize) -> (F, F) {
    debug_assert!(m >= 3);
    let (ta, tj) = (budget.t_source, budget.t_remote);
    let m_f = F::from_usize(m).unwrap();
    let y = lit::<F>(2.0) * m_f * (ta + tj) * d0 + m_f * m_f * ta * tj;
    (y, lit(0.5))
}

/// Assemble gain and QBER for a pair with the default truncation order.
pub fn gain_qber<F: Scalar>(params: &SystemParams<F>, pair: UserPair) -> Result<GainQber<F>> {
    gain_qber_truncated(params, pair, DEFAULT_N_MAX)
}

/// Assemble gain and QBER, summing emission numbers `0..=n_max`.
///
/// Uses the worst dark-count probability across the pair for both sides.
/// Yields are clamped to `[0, 1]` and error coefficients to `[0, 1/2]`
/// after evaluation; the `clamped` flag records whether that fired.
pub fn gain_qber_truncated<F: Scalar>(
    params: &SystemParams<F>,
    pair: UserPair,
    n_max: usize,
) -> Result<GainQber<F>> {
    params.validate()?;
    if n_max < 5 {
        return Err(crate::Error::InvalidParameter(format!(
            "truncation order {n_max} below 5"
        )));
    }
    let budget = link_budget(params, pair);
    let d0 = params.pair_dark_prob(pair);
    let e_dz = *params.misalign_z.get(pair);
    let e_dx = *params.misalign_x.get(pair);
    let dist = PairDistribution::new(params.lambda, n_max)?;
    let probs = dist.probs();

    let mut clamped = false;
    let mut clamp_yield = |y: F| -> F {
        let c = y.max(F::zero()).min(F::one());
        if c != y {
            clamped = true;
        }
        c
    };
    let mut terms: Vec<(F, F, F)> = Vec::with_capacity(n_max + 1);
    let (y0, e0) = yield_error_0(d0);
    terms.push((clamp_yield(y0), e0, e0));
    let t1 = yield_error_1(budget, d0, e_dz, e_dx);
    terms.push((clamp_yield(t1.yield_1), t1.e_z, t1.e_x));
    let t2 = yield_error_2(budget, d0, e_dz, e_dx);
    terms.push((clamp_yield(t2.yield_2), t2.e_z, t2.e_x));
    for m in 3..=n_max {
        let (ym, em) = yield_error_m(budget, d0, m);
        terms.push((clamp_yield(ym), em, em));
    }

    let half = lit::<F>(0.5);
    let mut q = F::zero();
    let mut ez_q = F::zero();
    let mut ex_q = F::zero();
    for (n, &(y, ez, ex)) in terms.iter().enumerate() {
        let ez_c = ez.max(F::zero()).min(half);
        let ex_c = ex.max(F::zero()).min(half);
        if ez_c != ez || ex_c != ex {
            clamped = true;
        }
        let p = probs[n];
        q = q + p * y;
        ez_q = ez_q + ez_c * p * y;
        ex_q = ex_q + ex_c * p * y;
    }

    let (e_z, e_x) = if q > F::zero() {
        (ez_q / q, ex_q / q)
    } else {
        (F::zero(), F::zero())
    };
    Ok(GainQber {
        q_total: q,
        e_z,
        e_x,
        e_avg: (e_z + e_x) * half,
        clamped,
    })
}
