//! The quantum channel between Bob and Alice and the attacker sitting on it.
//!
//! Eve can touch the travel qubit twice per round: on the forward leg
//! (Bob → Alice) and on the return leg (Alice → Bob). She never touches Bob's
//! home qubit. Every strategy modeled here acts on one pair at a time, so the
//! simulation carries at most two independent `TwoQubitState`s (Bob's and,
//! under Bell-pair substitution, Eve's own) and never a joint four-qubit state.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::{
    apply_pauli, bell_measure, bell_state, decode_bits, measure_computational, PauliCode, Qubit,
    TwoQubitState,
};
use crate::protocol::{Announcement, Statement};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    None,
    /// One uniformly random Pauli on the return leg.
    Disturbance,
    /// Computational-basis measurement of the travel qubit on the forward leg.
    MeasureResend,
    /// Swap in half of Eve's own Bell pair, read Alice's operation off it,
    /// then replay that operation on Bob's stored qubit.
    BellSubstitution,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::None,
        Strategy::Disturbance,
        Strategy::MeasureResend,
        Strategy::BellSubstitution,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Disturbance => "disturbance",
            Strategy::MeasureResend => "measure-resend",
            Strategy::BellSubstitution => "bell-substitution",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown attack strategy {0:?}")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| UnknownStrategy(s.to_owned()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("return leg reached Eve without a stored pair; forward leg was skipped")]
    MissingForwardState,
}

/// What Eve holds during a round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EveState {
    /// Bob's genuine pair, frozen while Eve keeps his travel qubit.
    pub stored_bob_pair: Option<TwoQubitState>,
    /// Eve's own pair `(h', t')`; Alice encodes on `t'`.
    pub eve_pair: Option<TwoQubitState>,
    pub eve_code: Option<PauliCode>,
    pub inferred_alice: Option<PauliCode>,
    /// Bob's code as read from quantum data. None of the strategies can set
    /// it: the stored pair is never measured.
    pub inferred_bob: Option<PauliCode>,
}

/// Eve's knowledge at the end of a round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EveReport {
    pub inferred_alice: Option<PauliCode>,
    /// Inference about Bob's code from quantum data alone.
    pub inferred_bob_private: Option<PauliCode>,
    /// Inference about Bob's code after reading the public announcements.
    pub inferred_bob_public: Option<PauliCode>,
}

impl EveReport {
    pub fn is_empty(&self) -> bool {
        *self == EveReport::default()
    }
}

/// The quantum link as seen by a protocol round.
///
/// `forward` is called exactly once before `back` in every round.
pub trait Channel {
    fn forward(&mut self, world: TwoQubitState, rng: &mut RandomStream) -> TwoQubitState;

    fn back(
        &mut self,
        world: TwoQubitState,
        rng: &mut RandomStream,
    ) -> Result<TwoQubitState, AdversaryError>;

    /// Eve's report after reading the announcements, `None` if she learned nothing.
    fn report(&self, announcements: &[Announcement]) -> Option<EveReport>;
}

/// A bare link with nobody on it.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectLink;

impl Channel for DirectLink {
    fn forward(&mut self, world: TwoQubitState, _rng: &mut RandomStream) -> TwoQubitState {
        world
    }

    fn back(
        &mut self,
        world: TwoQubitState,
        _rng: &mut RandomStream,
    ) -> Result<TwoQubitState, AdversaryError> {
        Ok(world)
    }

    fn report(&self, _announcements: &[Announcement]) -> Option<EveReport> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct AdversaryChannel {
    strategy: Strategy,
    eve: EveState,
}

impl AdversaryChannel {
    pub fn new(strategy: Strategy) -> Self {
        AdversaryChannel {
            strategy,
            eve: EveState::default(),
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn eve_state(&self) -> &EveState {
        &self.eve
    }

    /// Travel qubit in flight Bob → Alice. Returns the pair whose travel
    /// qubit reaches Alice.
    pub fn on_forward(&mut self, world: TwoQubitState, rng: &mut RandomStream) -> TwoQubitState {
        self.eve = EveState::default();
        match self.strategy {
            Strategy::None | Strategy::Disturbance => world,
            Strategy::MeasureResend => measure_computational(&world, Qubit::Travel, rng).1,
            Strategy::BellSubstitution => {
                let eve_code = rng.code();
                let eve_pair = bell_state(eve_code.into());
                self.eve.stored_bob_pair = Some(world);
                self.eve.eve_code = Some(eve_code);
                self.eve.eve_pair = Some(eve_pair);
                eve_pair
            }
        }
    }

    /// Travel qubit in flight Alice → Bob. Returns the pair Bob measures.
    pub fn on_return(
        &mut self,
        world: TwoQubitState,
        rng: &mut RandomStream,
    ) -> Result<TwoQubitState, AdversaryError> {
        match self.strategy {
            Strategy::None | Strategy::MeasureResend => Ok(world),
            Strategy::Disturbance => Ok(apply_pauli(&world, rng.code(), Qubit::Travel)),
            Strategy::BellSubstitution => {
                let (Some(bob_pair), Some(eve_code)) =
                    (self.eve.stored_bob_pair.take(), self.eve.eve_code)
                else {
                    return Err(AdversaryError::MissingForwardState);
                };
                // `world` is Eve's pair after Alice encoded on t'.
                self.eve.eve_pair = None;
                let (outcome, _) = bell_measure(&world, rng);
                let alice = decode_bits(outcome, eve_code);
                self.eve.inferred_alice = Some(alice);
                Ok(apply_pauli(&bob_pair, alice, Qubit::Travel))
            }
        }
    }

    /// Eve's report given everything announced publicly so far.
    pub fn observe_public(&self, announcements: &[Announcement]) -> EveReport {
        if self.strategy != Strategy::BellSubstitution {
            return EveReport::default();
        }
        let inferred_alice = self.eve.inferred_alice;
        let public_outcome = announcements.iter().find_map(|a| match a.statement {
            Statement::OutcomeReveal { outcome } => Some(outcome),
            _ => None,
        });
        EveReport {
            inferred_alice,
            inferred_bob_private: None,
            inferred_bob_public: inferred_alice
                .zip(public_outcome)
                .map(|(alice, outcome)| decode_bits(outcome, alice)),
        }
    }
}

impl Channel for AdversaryChannel {
    fn forward(&mut self, world: TwoQubitState, rng: &mut RandomStream) -> TwoQubitState {
        self.on_forward(world, rng)
    }

    fn back(
        &mut self,
        world: TwoQubitState,
        rng: &mut RandomStream,
    ) -> Result<TwoQubitState, AdversaryError> {
        self.on_return(world, rng)
    }

    fn report(&self, announcements: &[Announcement]) -> Option<EveReport> {
        Some(self.observe_public(announcements)).filter(|r| !r.is_empty())
    }
}
