//! Round state machines for the original dialogue protocol and the dual-mode
//! variant.
//!
//! The quantum part of a round is the same in both: Bob prepares `ψ00`,
//! encodes on the travel qubit, sends it, Alice acknowledges and encodes,
//! sends it back, and Bob Bell-measures the pair. The protocols differ only in
//! who picks a mode and in what is announced afterwards. Modes never feed back
//! into the quantum flow, so a round's state trajectory depends only on the
//! two codes, the channel and the random stream.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::adversary::{Channel, EveReport};
use crate::bell::{
    apply_pauli, bell_measure, decode_bits, psi00, BellIndex, PauliCode, Qubit, TwoQubitState,
};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Message mode.
    #[serde(rename = "MM")]
    Message,
    /// Checking mode.
    #[serde(rename = "CM")]
    Check,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Message => "MM",
            Mode::Check => "CM",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Original,
    Modified,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Original => "original",
            Protocol::Modified => "modified",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

/// Content of a public classical message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Statement {
    ReceiptAck,
    ModeReveal { mode: Mode },
    OutcomeReveal { outcome: BellIndex },
    OpReveal { code: PauliCode },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Announcement {
    pub speaker: Party,
    #[serde(flatten)]
    pub statement: Statement,
}

impl Announcement {
    pub fn new(speaker: Party, statement: Statement) -> Self {
        Announcement { speaker, statement }
    }
}

/// Whether Bob's outcome-reveal in an original-protocol message round goes
/// out on the public channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Disclosure {
    #[default]
    Public,
    /// Bob keeps `(x, y)` to himself; Alice cannot decode.
    Withheld,
}

/// Inputs of one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Round {
    pub id: u64,
    pub bob_mode: Mode,
    pub bob_code: PauliCode,
    pub alice_mode: Mode,
    pub alice_code: PauliCode,
}

/// Complete record of a round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTranscript {
    pub round_id: u64,
    pub protocol: Protocol,
    pub bob_mode: Mode,
    pub alice_mode: Mode,
    pub bob_code: PauliCode,
    pub alice_code: PauliCode,
    pub outcome: BellIndex,
    pub announcements: Vec<Announcement>,
    pub check_performed: bool,
    pub check_passed: Option<bool>,
    /// Alice's code as decoded by Bob.
    pub bob_decoded: Option<PauliCode>,
    /// Bob's code as decoded by Alice.
    pub alice_decoded: Option<PauliCode>,
    pub eve: Option<EveReport>,
}

impl RoundTranscript {
    pub fn has_outcome_reveal(&self) -> bool {
        self.announcements
            .iter()
            .any(|a| matches!(a.statement, Statement::OutcomeReveal { .. }))
    }
}

/// Consistency check of a checking round: the outcome must be the XOR of the
/// two codes.
pub fn cm_check(outcome: BellIndex, bob_code: PauliCode, alice_code: PauliCode) -> bool {
    PauliCode::from(outcome) == bob_code ^ alice_code
}

struct QuantumLeg {
    outcome: BellIndex,
}

fn quantum_leg<C: Channel>(
    bob_code: PauliCode,
    alice_code: PauliCode,
    channel: &mut C,
    rng: &mut RandomStream,
    trace: &mut Option<&mut Vec<TwoQubitState>>,
) -> QuantumLeg {
    let mut record = |s: &TwoQubitState| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(*s);
        }
    };
    let prepared = psi00();
    record(&prepared);
    let encoded = apply_pauli(&prepared, bob_code, Qubit::Travel);
    record(&encoded);
    let at_alice = channel.forward(encoded, rng);
    record(&at_alice);
    let alice_encoded = apply_pauli(&at_alice, alice_code, Qubit::Travel);
    record(&alice_encoded);
    let at_bob = channel
        .back(alice_encoded, rng)
        .expect("channel forward leg always precedes the return leg");
    record(&at_bob);
    let (outcome, collapsed) = bell_measure(&at_bob, rng);
    record(&collapsed);
    QuantumLeg { outcome }
}

/// Runs one round of `protocol`, optionally recording the state after every
/// quantum step (prepared, Bob-encoded, at Alice, Alice-encoded, at Bob,
/// collapsed).
pub fn execute_round<C: Channel>(
    protocol: Protocol,
    round: &Round,
    channel: &mut C,
    rng: &mut RandomStream,
    disclosure: Disclosure,
    mut trace: Option<&mut Vec<TwoQubitState>>,
) -> RoundTranscript {
    let leg = quantum_leg(round.bob_code, round.alice_code, channel, rng, &mut trace);
    let mut t = RoundTranscript {
        round_id: round.id,
        protocol,
        bob_mode: round.bob_mode,
        alice_mode: round.alice_mode,
        bob_code: round.bob_code,
        alice_code: round.alice_code,
        outcome: leg.outcome,
        announcements: vec![Announcement::new(Party::Alice, Statement::ReceiptAck)],
        check_performed: false,
        check_passed: None,
        bob_decoded: None,
        alice_decoded: None,
        eve: None,
    };
    match protocol {
        Protocol::Original => conclude_original(&mut t, disclosure),
        Protocol::Modified => conclude_modified(&mut t),
    }
    t.eve = channel.report(&t.announcements);
    t
}

fn conclude_original(t: &mut RoundTranscript, disclosure: Disclosure) {
    let ann = &mut t.announcements;
    ann.push(Announcement::new(
        Party::Alice,
        Statement::ModeReveal { mode: t.alice_mode },
    ));
    match t.alice_mode {
        Mode::Message => {
            t.bob_decoded = Some(decode_bits(t.outcome, t.bob_code));
            if disclosure == Disclosure::Public {
                ann.push(Announcement::new(
                    Party::Bob,
                    Statement::OutcomeReveal { outcome: t.outcome },
                ));
                t.alice_decoded = Some(decode_bits(t.outcome, t.alice_code));
            }
        }
        Mode::Check => {
            ann.push(Announcement::new(
                Party::Alice,
                Statement::OpReveal { code: t.alice_code },
            ));
            t.check_performed = true;
            t.check_passed = Some(t.alice_code == decode_bits(t.outcome, t.bob_code));
        }
    }
}

fn conclude_modified(t: &mut RoundTranscript) {
    let ann = &mut t.announcements;
    // Modes go public only once Bob's measurement is done.
    ann.push(Announcement::new(
        Party::Bob,
        Statement::ModeReveal { mode: t.bob_mode },
    ));
    ann.push(Announcement::new(
        Party::Alice,
        Statement::ModeReveal { mode: t.alice_mode },
    ));
    let outcome_reveal =
        Announcement::new(Party::Bob, Statement::OutcomeReveal { outcome: t.outcome });
    match (t.alice_mode, t.bob_mode) {
        (Mode::Check, Mode::Check) => {
            ann.push(Announcement::new(
                Party::Alice,
                Statement::OpReveal { code: t.alice_code },
            ));
            ann.push(Announcement::new(
                Party::Bob,
                Statement::OpReveal { code: t.bob_code },
            ));
            ann.push(outcome_reveal);
            t.check_performed = true;
            t.check_passed = Some(cm_check(t.outcome, t.bob_code, t.alice_code));
        }
        (Mode::Message, Mode::Message) => {
            ann.push(outcome_reveal);
            t.bob_decoded = Some(decode_bits(t.outcome, t.bob_code));
            t.alice_decoded = Some(decode_bits(t.outcome, t.alice_code));
        }
        (Mode::Check, Mode::Message) => {
            ann.push(outcome_reveal);
            t.alice_decoded = Some(decode_bits(t.outcome, t.alice_code));
        }
        (Mode::Message, Mode::Check) => {
            t.bob_decoded = Some(decode_bits(t.outcome, t.bob_code));
        }
    }
}

/// One round of the original protocol. Bob always encodes message bits; only
/// Alice chooses a mode.
pub fn run_round_original<C: Channel>(
    round_id: u64,
    bob_bits: PauliCode,
    alice_mode: Mode,
    alice_bits: PauliCode,
    channel: &mut C,
    rng: &mut RandomStream,
) -> RoundTranscript {
    let round = Round {
        id: round_id,
        bob_mode: Mode::Message,
        bob_code: bob_bits,
        alice_mode,
        alice_code: alice_bits,
    };
    execute_round(
        Protocol::Original,
        &round,
        channel,
        rng,
        Disclosure::Public,
        None,
    )
}

/// One round of the dual-mode protocol.
pub fn run_round_modified<C: Channel>(
    round_id: u64,
    bob_mode: Mode,
    bob_bits: PauliCode,
    alice_mode: Mode,
    alice_bits: PauliCode,
    channel: &mut C,
    rng: &mut RandomStream,
) -> RoundTranscript {
    let round = Round {
        id: round_id,
        bob_mode,
        bob_code: bob_bits,
        alice_mode,
        alice_code: alice_bits,
    };
    execute_round(
        Protocol::Modified,
        &round,
        channel,
        rng,
        Disclosure::Public,
        None,
    )
}
