//! Simulator for the two-way quantum dialogue protocol, a Bell-pair
//! substitution attack against it, and a dual-mode variant.
//!
//! * [`bell`]: two-qubit states, encoding operators, Bell measurement.
//! * [`protocol`]: round state machines and transcripts.
//! * [`adversary`]: the channel and Eve's strategies.
//! * [`harness`]: seeded Monte Carlo sessions, metrics and transcript I/O.
//! * [`oracle`]: exact branch enumeration in rational arithmetic.
//! * [`cli`]: the `qdialogue` command.

pub mod adversary;
pub mod bell;
pub mod cli;
pub mod harness;
pub mod oracle;
pub mod protocol;
pub mod rng;
pub mod text;

pub use adversary::{AdversaryChannel, Channel, DirectLink, EveReport, EveState, Strategy};
pub use bell::{
    apply_pauli, bell_measure, bell_state, compose, decode_bits, measure_computational, psi00,
    BellIndex, PauliCode, Phase, PhasedPauli, Qubit, TwoQubitState,
};
pub use harness::{run_dialogue, run_sessions, RunConfig, RunSummary};
pub use oracle::{exact_oracle, OracleResult};
pub use protocol::{
    cm_check, run_round_modified, run_round_original, Mode, Protocol, RoundTranscript,
};
pub use rng::RandomStream;
