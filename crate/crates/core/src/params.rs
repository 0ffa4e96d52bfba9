//! Physical parameterization of a three-party deployment.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::{lit, Scalar};
use crate::Result;

/// One of the three protocol parties. Alice holds the pair source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum User {
    Alice,
    Bob,
    Charlie,
}

impl User {
    pub const ALL: [User; 3] = [User::Alice, User::Bob, User::Charlie];

    pub fn index(self) -> usize {
        match self {
            User::Alice => 0,
            User::Bob => 1,
            User::Charlie => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            User::Alice => "alice",
            User::Bob => "bob",
            User::Charlie => "charlie",
        }
    }
}

/// Unordered pair of users sharing post-selected entanglement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserPair {
    AliceBob,
    AliceCharlie,
    BobCharlie,
}

impl UserPair {
    pub const ALL: [UserPair; 3] = [UserPair::AliceBob, UserPair::AliceCharlie, UserPair::BobCharlie];

    pub fn users(self) -> (User, User) {
        match self {
            UserPair::AliceBob => (User::Alice, User::Bob),
            UserPair::AliceCharlie => (User::Alice, User::Charlie),
            UserPair::BobCharlie => (User::Bob, User::Charlie),
        }
    }

    /// The pair formed by two distinct users, in canonical order.
    pub fn of(a: User, b: User) -> Option<UserPair> {
        use User::*;
        match (a, b) {
            (Alice, Bob) | (Bob, Alice) => Some(UserPair::AliceBob),
            (Alice, Charlie) | (Charlie, Alice) => Some(UserPair::AliceCharlie),
            (Bob, Charlie) | (Charlie, Bob) => Some(UserPair::BobCharlie),
            _ => None,
        }
    }

    pub fn contains(self, u: User) -> bool {
        let (a, b) = self.users();
        a == u || b == u
    }

    pub fn label(self) -> &'static str {
        match self {
            UserPair::AliceBob => "alice-bob",
            UserPair::AliceCharlie => "alice-charlie",
            UserPair::BobCharlie => "bob-charlie",
        }
    }
}

/// Measurement basis. `Z` is the horizontal/vertical basis, `X` the
/// diagonal/anti-diagonal basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub const BOTH: [Basis; 2] = [Basis::Z, Basis::X];

    pub fn label(self) -> &'static str {
        match self {
            Basis::Z => "z",
            Basis::X => "x",
        }
    }
}

/// A value per user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerUser<T> {
    pub alice: T,
    pub bob: T,
    pub charlie: T,
}

impl<T> PerUser<T> {
    pub fn new(alice: T, bob: T, charlie: T) -> Self {
        Self { alice, bob, charlie }
    }

    pub fn get(&self, u: User) -> &T {
        match u {
            User::Alice => &self.alice,
            User::Bob => &self.bob,
            User::Charlie => &self.charlie,
        }
    }

    pub fn get_mut(&mut self, u: User) -> &mut T {
        match u {
            User::Alice => &mut self.alice,
            User::Bob => &mut self.bob,
            User::Charlie => &mut self.charlie,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerUser<U> {
        PerUser {
            alice: f(&self.alice),
            bob: f(&self.bob),
            charlie: f(&self.charlie),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (User, &T)> {
        User::ALL.iter().map(move |&u| (u, self.get(u)))
    }
}

impl<T: Copy> PerUser<T> {
    pub fn uniform(v: T) -> Self {
        Self::new(v, v, v)
    }
}

/// A value per user pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerPair<T> {
    pub alice_bob: T,
    pub alice_charlie: T,
    pub bob_charlie: T,
}

impl<T> PerPair<T> {
    pub fn new(alice_bob: T, alice_charlie: T, bob_charlie: T) -> Self {
        Self { alice_bob, alice_charlie, bob_charlie }
    }

    pub fn get(&self, p: UserPair) -> &T {
        match p {
            UserPair::AliceBob => &self.alice_bob,
            UserPair::AliceCharlie => &self.alice_charlie,
            UserPair::BobCharlie => &self.bob_charlie,
        }
    }

    pub fn get_mut(&mut self, p: UserPair) -> &mut T {
        match p {
            UserPair::AliceBob => &mut self.alice_bob,
            UserPair::AliceCharlie => &mut self.alice_charlie,
            UserPair::BobCharlie => &mut self.bob_charlie,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerPair<U> {
        PerPair {
            alice_bob: f(&self.alice_bob),
            alice_charlie: f(&self.alice_charlie),
            bob_charlie: f(&self.bob_charlie),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserPair, &T)> {
        UserPair::ALL.iter().map(move |&p| (p, self.get(p)))
    }
}

impl<T: Copy> PerPair<T> {
    pub fn uniform(v: T) -> Self {
        Self::new(v, v, v)
    }
}

/// Full physical parameterization of one deployment: source, splitter tree,
/// channels, detectors, and misalignment.
///
/// * `eta0` — source internal transmission.
/// * `lambda` — brightness; half the mean photon-pair number per window.
///   The weak-pump assumption is enforced as `lambda <= 0.1`.
/// * `t1` — splitter-tree transmission toward Alice; the remaining `1 - t1`
///   is split 50/50 between Bob and Charlie.
/// * `rep_rate_v` — windows per second (inverse coincidence window for a CW
///   pump).
/// * `channel_loss_db` — per-user fiber loss in dB (Alice is usually 0).
/// * `det_eff` — per-user combined measurement transmission and detection
///   efficiency.
/// * `dark_prob` — per-user dark-count probability per window per logical
///   detector.
/// * `misalign_z`/`misalign_x` — per-pair polarization misalignment
///   (bit-flip) probabilities in each basis.
/// * `epsilon` — target failure probability for the signature bounds.
/// * `f_ec` — error-correction efficiency; informational only (QDS performs
///   no error correction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams<F> {
    pub eta0: F,
    pub lambda: F,
    pub t1: F,
    pub rep_rate_v: F,
    pub channel_loss_db: PerUser<F>,
    pub det_eff: PerUser<F>,
    pub dark_prob: PerUser<F>,
    pub misalign_z: PerPair<F>,
    pub misalign_x: PerPair<F>,
    pub epsilon: F,
    pub f_ec: F,
}

impl<F: Scalar> SystemParams<F> {
    /// Parameters of the deployed system (commercial SPDC source, mixed
    /// SNSPD/APD detectors, 2.44 dB and 5.5 dB campus fibers).
    pub fn current() -> Self {
        SystemParams {
            eta0: lit(0.3),
            lambda: lit(0.0047),
            t1: lit(1.0 / 3.0),
            rep_rate_v: lit(5e8),
            channel_loss_db: PerUser::new(lit(0.0), lit(2.44), lit(5.5)),
            det_eff: PerUser::new(lit(0.14), lit(0.035), lit(0.12)),
            dark_prob: PerUser::new(lit(1e-7), lit(1e-6), lit(1e-7)),
            misalign_z: PerPair::new(lit(0.017), lit(0.013), lit(0.013)),
            misalign_x: PerPair::new(lit(0.031), lit(0.019), lit(0.018)),
            epsilon: lit(1e-10),
            f_ec: lit(1.16),
        }
    }

    /// Plausibly upgraded system: brighter source, low-noise detectors,
    /// uniform 1% misalignment.
    pub fn improved() -> Self {
        SystemParams {
            eta0: lit(0.5),
            lambda: lit(0.01),
            t1: lit(1.0 / 3.0),
            rep_rate_v: lit(5e8),
            channel_loss_db: PerUser::new(lit(0.0), lit(2.44), lit(5.5)),
            det_eff: PerUser::uniform(lit(0.324)),
            dark_prob: PerUser::uniform(lit(1e-8)),
            misalign_z: PerPair::uniform(lit(0.01)),
            misalign_x: PerPair::uniform(lit(0.01)),
            epsilon: lit(1e-10),
            f_ec: lit(1.16),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: F| -> Result<()> {
            if v < F::zero() || v > F::one() || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
            }
            Ok(())
        };
        unit("eta0", self.eta0)?;
        unit("t1", self.t1)?;
        if self.lambda < F::zero() || self.lambda > lit(0.1) {
            return Err(Error::InvalidParameter(format!(
                "lambda = {} outside [0, 0.1] (weak-pump assumption)",
                self.lambda
            )));
        }
        if self.rep_rate_v <= F::zero() || !self.rep_rate_v.is_finite() {
            return Err(Error::InvalidParameter(format!("rep_rate_v = {}", self.rep_rate_v)));
        }
        if self.epsilon <= F::zero() || self.epsilon >= F::one() {
            return Err(Error::InvalidParameter(format!("epsilon = {} outside (0, 1)", self.epsilon)));
        }
        if self.f_ec <= F::zero() {
            return Err(Error::InvalidParameter(format!("f_ec = {}", self.f_ec)));
        }
        for (u, &loss) in self.channel_loss_db.iter() {
            if loss < F::zero() || !loss.is_finite() {
                return Err(Error::InvalidParameter(format!("channel_loss_db.{} = {loss}", u.label())));
            }
        }
        for (u, &eff) in self.det_eff.iter() {
            unit(&format!("det_eff.{}", u.label()), eff)?;
        }
        for (u, &d0) in self.dark_prob.iter() {
            // The vacuum-term approximation drops higher orders of the dark
            // probability; keep it small.
            if d0 < F::zero() || d0 >= lit(0.01) {
                return Err(Error::InvalidParameter(format!(
                    "dark_prob.{} = {d0} outside [0, 0.01)",
                    u.label()
                )));
            }
        }
        for per_pair in [&self.misalign_z, &self.misalign_x] {
            for (p, &e) in per_pair.iter() {
                if e < F::zero() || e > lit(0.5) {
                    return Err(Error::InvalidParameter(format!(
                        "misalignment for {} = {e} outside [0, 0.5]",
                        p.label()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Linear channel transmission for one user, from the dB figure.
    pub fn channel_eta(&self, u: User) -> F {
        crate::math::db_to_linear(*self.channel_loss_db.get(u))
    }

    /// The shared dark-count probability used for a pair: the worse of the
    /// two users' detectors.
    pub fn pair_dark_prob(&self, p: UserPair) -> F {
        let (a, b) = p.users();
        self.dark_prob.get(a).max(*self.dark_prob.get(b))
    }

    /// Misalignment probability of a pair in the given basis.
    pub fn misalignment(&self, p: UserPair, basis: Basis) -> F {
        match basis {
            Basis::Z => *self.misalign_z.get(p),
            Basis::X => *self.misalign_x.get(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        SystemParams::<f64>::current().validate().unwrap();
        SystemParams::<f64>::improved().validate().unwrap();
        SystemParams::<f32>::current().validate().unwrap();
    }

    #[test]
    fn rejects_bright_pump() {
        let mut p = SystemParams::<f64>::current();
        p.lambda = 0.2;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_out_of_range_efficiency() {
        let mut p = SystemParams::<f64>::current();
        p.det_eff.bob = 1.5;
        assert!(p.validate().is_err());
    }

    #[test]
    fn pair_dark_prob_is_worst_case() {
        let p = SystemParams::<f64>::current();
        assert_eq!(p.pair_dark_prob(UserPair::AliceBob), 1e-6);
        assert_eq!(p.pair_dark_prob(UserPair::AliceCharlie), 1e-7);
        assert_eq!(p.pair_dark_prob(UserPair::BobCharlie), 1e-6);
    }

    #[test]
    fn pair_lookup() {
        assert_eq!(UserPair::of(User::Charlie, User::Alice), Some(UserPair::AliceCharlie));
        assert_eq!(UserPair::of(User::Bob, User::Bob), None);
    }
}
