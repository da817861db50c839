//! Monte Carlo sessions, metric aggregation and transcript I/O.
//!
//! Round `n` of a session draws everything from `RandomStream::substream(seed, n)`:
//! first Bob's mode, Alice's mode, Bob's code and Alice's code (always these
//! four draws, in this order, whatever the protocol), then the channel's and
//! Bob's measurement randomness. Rounds are therefore independent of each
//! other and are executed in parallel; the merged tallies are plain sums and
//! do not depend on execution order.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{AdversaryChannel, Strategy};
use crate::bell::PauliCode;
use crate::protocol::{execute_round, Disclosure, Mode, Protocol, Round, RoundTranscript};
use crate::rng::RandomStream;
use crate::text::{codes_to_text, text_to_codes};

pub const DEFAULT_P_CM: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("rounds must be at least 1")]
    ZeroRounds,
    #[error("p_cm must lie in [0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MessageSource {
    #[default]
    UniformRandom,
    /// Alice and Bob each send a text; their unit streams are independent.
    Text { alice: String, bob: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub protocol: Protocol,
    pub strategy: Strategy,
    pub rounds: u64,
    /// Probability that a party picks checking mode in a round.
    pub p_cm: f64,
    pub seed: u64,
    pub message_source: MessageSource,
}

impl RunConfig {
    pub fn new(protocol: Protocol, strategy: Strategy, rounds: u64, p_cm: f64, seed: u64) -> Self {
        RunConfig {
            protocol,
            strategy,
            rounds,
            p_cm,
            seed,
            message_source: MessageSource::UniformRandom,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rounds == 0 {
            return Err(ConfigError::ZeroRounds);
        }
        if !(0.0..=1.0).contains(&self.p_cm) {
            return Err(ConfigError::ProbabilityOutOfRange(self.p_cm));
        }
        Ok(())
    }
}

/// Running counters over a set of transcripts. Merging is a field-wise sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub rounds_total: u64,
    pub rounds_cm: u64,
    pub rounds_mm: u64,
    pub rounds_alice_cm_bob_mm: u64,
    pub rounds_alice_mm_bob_cm: u64,
    pub checks_performed: u64,
    pub checks_failed: u64,
    pub alice_decodes: u64,
    pub alice_decodes_correct: u64,
    pub bob_decodes: u64,
    pub bob_decodes_correct: u64,
    pub eve_alice_inferences: u64,
    pub eve_alice_correct: u64,
    pub eve_bob_public_inferences: u64,
    pub eve_bob_public_correct: u64,
    pub throughput_bits: u64,
}

impl Tally {
    pub fn add(&mut self, t: &RoundTranscript) {
        self.rounds_total += 1;
        match (t.protocol, t.alice_mode, t.bob_mode) {
            (Protocol::Original, Mode::Check, _)
            | (Protocol::Modified, Mode::Check, Mode::Check) => self.rounds_cm += 1,
            (Protocol::Original, Mode::Message, _)
            | (Protocol::Modified, Mode::Message, Mode::Message) => self.rounds_mm += 1,
            (Protocol::Modified, Mode::Check, Mode::Message) => self.rounds_alice_cm_bob_mm += 1,
            (Protocol::Modified, Mode::Message, Mode::Check) => self.rounds_alice_mm_bob_cm += 1,
        }
        if t.check_performed {
            self.checks_performed += 1;
            if t.check_passed == Some(false) {
                self.checks_failed += 1;
            }
        }
        if let Some(d) = t.alice_decoded {
            self.alice_decodes += 1;
            if d == t.bob_code {
                self.alice_decodes_correct += 1;
                if t.bob_mode == Mode::Message {
                    self.throughput_bits += 2;
                }
            }
        }
        if let Some(d) = t.bob_decoded {
            self.bob_decodes += 1;
            if d == t.alice_code {
                self.bob_decodes_correct += 1;
                if t.alice_mode == Mode::Message {
                    self.throughput_bits += 2;
                }
            }
        }
        if let Some(eve) = &t.eve {
            if let Some(a) = eve.inferred_alice {
                self.eve_alice_inferences += 1;
                self.eve_alice_correct += u64::from(a == t.alice_code);
            }
            if let Some(b) = eve.inferred_bob_public {
                self.eve_bob_public_inferences += 1;
                self.eve_bob_public_correct += u64::from(b == t.bob_code);
            }
        }
    }

    pub fn merge(mut self, o: Tally) -> Tally {
        self.rounds_total += o.rounds_total;
        self.rounds_cm += o.rounds_cm;
        self.rounds_mm += o.rounds_mm;
        self.rounds_alice_cm_bob_mm += o.rounds_alice_cm_bob_mm;
        self.rounds_alice_mm_bob_cm += o.rounds_alice_mm_bob_cm;
        self.checks_performed += o.checks_performed;
        self.checks_failed += o.checks_failed;
        self.alice_decodes += o.alice_decodes;
        self.alice_decodes_correct += o.alice_decodes_correct;
        self.bob_decodes += o.bob_decodes;
        self.bob_decodes_correct += o.bob_decodes_correct;
        self.eve_alice_inferences += o.eve_alice_inferences;
        self.eve_alice_correct += o.eve_alice_correct;
        self.eve_bob_public_inferences += o.eve_bob_public_inferences;
        self.eve_bob_public_correct += o.eve_bob_public_correct;
        self.throughput_bits += o.throughput_bits;
        self
    }
}

fn ratio(hits: u64, total: u64) -> Option<f64> {
    (total > 0).then(|| hits as f64 / total as f64)
}

/// Aggregate metrics of a session. Rates are `None` when nothing they are
/// measured over occurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub protocol: Protocol,
    pub attack: Strategy,
    pub seed: u64,
    pub p_cm: f64,
    pub rounds_total: u64,
    /// Original: Alice chose CM. Modified: both chose CM.
    pub rounds_cm: u64,
    pub rounds_mm: u64,
    pub rounds_alice_cm_bob_mm: u64,
    pub rounds_alice_mm_bob_cm: u64,
    pub checks_performed: u64,
    pub checks_failed: u64,
    /// Fraction of performed checks that failed.
    pub detection_rate: Option<f64>,
    /// Fraction of Alice's decodes of Bob's code that were correct.
    pub alice_decode_accuracy: Option<f64>,
    /// Fraction of Bob's decodes of Alice's code that were correct.
    pub bob_decode_accuracy: Option<f64>,
    pub eve_alice_accuracy: Option<f64>,
    pub eve_bob_public_accuracy: Option<f64>,
    /// Message bits decoded correctly by the receiving party.
    pub throughput_bits: u64,
}

impl RunSummary {
    pub fn from_tally(config: &RunConfig, t: &Tally) -> Self {
        RunSummary {
            protocol: config.protocol,
            attack: config.strategy,
            seed: config.seed,
            p_cm: config.p_cm,
            rounds_total: t.rounds_total,
            rounds_cm: t.rounds_cm,
            rounds_mm: t.rounds_mm,
            rounds_alice_cm_bob_mm: t.rounds_alice_cm_bob_mm,
            rounds_alice_mm_bob_cm: t.rounds_alice_mm_bob_cm,
            checks_performed: t.checks_performed,
            checks_failed: t.checks_failed,
            detection_rate: ratio(t.checks_failed, t.checks_performed),
            alice_decode_accuracy: ratio(t.alice_decodes_correct, t.alice_decodes),
            bob_decode_accuracy: ratio(t.bob_decodes_correct, t.bob_decodes),
            eve_alice_accuracy: ratio(t.eve_alice_correct, t.eve_alice_inferences),
            eve_bob_public_accuracy: ratio(t.eve_bob_public_correct, t.eve_bob_public_inferences),
            throughput_bits: t.throughput_bits,
        }
    }

    pub fn from_transcripts(config: &RunConfig, transcripts: &[RoundTranscript]) -> Self {
        let mut tally = Tally::default();
        transcripts.iter().for_each(|t| tally.add(t));
        Self::from_tally(config, &tally)
    }

    /// `(column, value)` pairs in the fixed output order.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        let rate = |r: Option<f64>| r.map(|v| v.to_string()).unwrap_or_default();
        vec![
            ("protocol", self.protocol.to_string()),
            ("attack", self.attack.to_string()),
            ("seed", self.seed.to_string()),
            ("p_cm", self.p_cm.to_string()),
            ("rounds_total", self.rounds_total.to_string()),
            ("rounds_cm", self.rounds_cm.to_string()),
            ("rounds_mm", self.rounds_mm.to_string()),
            (
                "rounds_alice_cm_bob_mm",
                self.rounds_alice_cm_bob_mm.to_string(),
            ),
            (
                "rounds_alice_mm_bob_cm",
                self.rounds_alice_mm_bob_cm.to_string(),
            ),
            ("checks_performed", self.checks_performed.to_string()),
            ("checks_failed", self.checks_failed.to_string()),
            ("detection_rate", rate(self.detection_rate)),
            ("alice_decode_accuracy", rate(self.alice_decode_accuracy)),
            ("bob_decode_accuracy", rate(self.bob_decode_accuracy)),
            ("eve_alice_accuracy", rate(self.eve_alice_accuracy)),
            (
                "eve_bob_public_accuracy",
                rate(self.eve_bob_public_accuracy),
            ),
            ("throughput_bits", self.throughput_bits.to_string()),
        ]
    }
}

/// Column order of the summary CSV.
pub const SUMMARY_CSV_HEADER: &str = "protocol,attack,seed,p_cm,rounds_total,rounds_cm,rounds_mm,\
rounds_alice_cm_bob_mm,rounds_alice_mm_bob_cm,checks_performed,checks_failed,detection_rate,\
alice_decode_accuracy,bob_decode_accuracy,eve_alice_accuracy,eve_bob_public_accuracy,throughput_bits";

/// Texts as reassembled by their receivers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextDelivery {
    /// Alice's text as Bob reassembled it.
    pub alice_text_at_bob: String,
    /// Bob's text as Alice reassembled it.
    pub bob_text_at_alice: String,
    pub alice_units_delivered: usize,
    pub bob_units_delivered: usize,
}

#[derive(Debug, Clone)]
pub struct SessionOutput {
    pub summary: RunSummary,
    pub transcripts: Vec<RoundTranscript>,
    pub text: Option<TextDelivery>,
}

#[derive(Debug, Clone, Copy)]
struct RoundDraws {
    bob_mode: Mode,
    alice_mode: Mode,
    bob_code: PauliCode,
    alice_code: PauliCode,
}

fn draw_inputs(protocol: Protocol, p_cm: f64, rng: &mut RandomStream) -> RoundDraws {
    let mode = |cm: bool| if cm { Mode::Check } else { Mode::Message };
    let bob_mode = mode(rng.bernoulli(p_cm));
    let alice_mode = mode(rng.bernoulli(p_cm));
    let bob_code = rng.code();
    let alice_code = rng.code();
    RoundDraws {
        bob_mode: match protocol {
            Protocol::Original => Mode::Message,
            Protocol::Modified => bob_mode,
        },
        alice_mode,
        bob_code,
        alice_code,
    }
}

/// Text units placed into a round, by position in each sender's stream.
#[derive(Debug, Clone, Copy, Default)]
struct Placement {
    alice: Option<(usize, PauliCode)>,
    bob: Option<(usize, PauliCode)>,
}

/// Assigns text units to rounds. A unit is consumed only by a round in which
/// it reaches the other party; in the original protocol Bob's unit is resent
/// after every round Alice turned into a check.
fn place_text(config: &RunConfig, alice: &[PauliCode], bob: &[PauliCode]) -> Vec<Placement> {
    let (mut next_alice, mut next_bob) = (0, 0);
    (0..config.rounds)
        .map(|id| {
            let mut rng = RandomStream::substream(config.seed, id);
            let d = draw_inputs(config.protocol, config.p_cm, &mut rng);
            let mut place = Placement::default();
            if d.alice_mode == Mode::Message && next_alice < alice.len() {
                place.alice = Some((next_alice, alice[next_alice]));
                next_alice += 1;
            }
            let bob_delivered = match config.protocol {
                Protocol::Original => d.alice_mode == Mode::Message,
                Protocol::Modified => true,
            };
            if d.bob_mode == Mode::Message && next_bob < bob.len() {
                place.bob = Some((next_bob, bob[next_bob]));
                if bob_delivered {
                    next_bob += 1;
                }
            }
            place
        })
        .collect()
}

fn run_one(config: &RunConfig, id: u64, place: Placement) -> RoundTranscript {
    let mut rng = RandomStream::substream(config.seed, id);
    let d = draw_inputs(config.protocol, config.p_cm, &mut rng);
    let round = Round {
        id,
        bob_mode: d.bob_mode,
        bob_code: place.bob.map_or(d.bob_code, |(_, c)| c),
        alice_mode: d.alice_mode,
        alice_code: place.alice.map_or(d.alice_code, |(_, c)| c),
    };
    let mut channel = AdversaryChannel::new(config.strategy);
    execute_round(
        config.protocol,
        &round,
        &mut channel,
        &mut rng,
        Disclosure::Public,
        None,
    )
}

/// Runs `config.rounds` rounds and aggregates them.
pub fn run_sessions(config: &RunConfig) -> Result<SessionOutput, ConfigError> {
    config.validate()?;
    let placements = match &config.message_source {
        MessageSource::UniformRandom => None,
        MessageSource::Text { alice, bob } => Some(place_text(
            config,
            &text_to_codes(alice),
            &text_to_codes(bob),
        )),
    };
    let transcripts: Vec<RoundTranscript> = (0..config.rounds)
        .into_par_iter()
        .map(|id| {
            let place = placements
                .as_ref()
                .map_or_else(Placement::default, |p| p[id as usize]);
            run_one(config, id, place)
        })
        .collect();
    let tally = transcripts
        .par_iter()
        .fold(Tally::default, |mut acc, t| {
            acc.add(t);
            acc
        })
        .reduce(Tally::default, Tally::merge);
    let text = placements.map(|p| reassemble(&p, &transcripts));
    Ok(SessionOutput {
        summary: RunSummary::from_tally(config, &tally),
        transcripts,
        text,
    })
}

fn reassemble(placements: &[Placement], transcripts: &[RoundTranscript]) -> TextDelivery {
    let mut at_bob = Vec::new();
    let mut at_alice = Vec::new();
    for (place, t) in placements.iter().zip(transcripts) {
        if let (Some(_), Some(code)) = (place.alice, t.bob_decoded) {
            at_bob.push(code);
        }
        if let (Some(_), Some(code)) = (place.bob, t.alice_decoded) {
            at_alice.push(code);
        }
    }
    TextDelivery {
        alice_text_at_bob: codes_to_text(&at_bob),
        bob_text_at_alice: codes_to_text(&at_alice),
        alice_units_delivered: at_bob.len(),
        bob_units_delivered: at_alice.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueConfig {
    pub alice_text: String,
    pub bob_text: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub disclosure: Disclosure,
}

#[derive(Debug, Clone)]
pub struct DialogueOutcome {
    /// Alice's text as recovered by Bob.
    pub bob_received: String,
    /// Bob's text as recovered by Alice; `None` when outcomes are withheld.
    pub alice_received: Option<String>,
    pub eve_alice_text: Option<String>,
    pub eve_bob_text: Option<String>,
    pub transcripts: Vec<RoundTranscript>,
}

/// Message-mode-only exchange of two texts over the original protocol.
///
/// Text lengths are assumed to be framed out of band; the shorter side pads
/// its remaining rounds with random codes.
pub fn run_dialogue(cfg: &DialogueConfig) -> DialogueOutcome {
    let alice_units = text_to_codes(&cfg.alice_text);
    let bob_units = text_to_codes(&cfg.bob_text);
    let rounds = alice_units.len().max(bob_units.len());
    let transcripts: Vec<RoundTranscript> = (0..rounds)
        .map(|i| {
            let mut rng = RandomStream::substream(cfg.seed, i as u64);
            let (bob_pad, alice_pad) = (rng.code(), rng.code());
            let round = Round {
                id: i as u64,
                bob_mode: Mode::Message,
                bob_code: bob_units.get(i).copied().unwrap_or(bob_pad),
                alice_mode: Mode::Message,
                alice_code: alice_units.get(i).copied().unwrap_or(alice_pad),
            };
            let mut channel = AdversaryChannel::new(cfg.strategy);
            execute_round(
                Protocol::Original,
                &round,
                &mut channel,
                &mut rng,
                cfg.disclosure,
                None,
            )
        })
        .collect();

    let collect =
        |len: usize, f: &dyn Fn(&RoundTranscript) -> Option<PauliCode>| -> Option<String> {
            if len == 0 {
                return None;
            }
            transcripts[..len]
                .iter()
                .map(f)
                .collect::<Option<Vec<_>>>()
                .map(|codes| codes_to_text(&codes))
        };
    let bob_received = collect(alice_units.len(), &|t| t.bob_decoded).unwrap_or_default();
    let alice_received = match cfg.disclosure {
        Disclosure::Public => {
            Some(collect(bob_units.len(), &|t| t.alice_decoded).unwrap_or_default())
        }
        Disclosure::Withheld => None,
    };
    DialogueOutcome {
        bob_received,
        alice_received,
        eve_alice_text: collect(alice_units.len(), &|t| t.eve.and_then(|e| e.inferred_alice)),
        eve_bob_text: collect(bob_units.len(), &|t| {
            t.eve.and_then(|e| e.inferred_bob_public)
        }),
        transcripts,
    }
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// One JSON object per line, in round order.
pub fn write_transcripts<'a, I, W>(transcripts: I, mut sink: W) -> io::Result<()>
where
    I: IntoIterator<Item = &'a RoundTranscript>,
    W: Write,
{
    for t in transcripts {
        serde_json::to_writer(&mut sink, t)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

pub fn read_transcripts<R: BufRead>(reader: R) -> Result<Vec<RoundTranscript>, TranscriptError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t = serde_json::from_str(&line).map_err(|source| TranscriptError::Parse {
            line: i + 1,
            source,
        })?;
        out.push(t);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum SummaryFormat {
    /// `key: value` lines.
    #[default]
    Text,
    /// Header line plus one row.
    Csv,
    /// A single JSON object.
    Records,
}

pub fn write_summary<W: Write>(
    summary: &RunSummary,
    mut sink: W,
    format: SummaryFormat,
) -> io::Result<()> {
    match format {
        SummaryFormat::Text => {
            for (k, v) in summary.fields() {
                let v = if v.is_empty() { "n/a".to_owned() } else { v };
                writeln!(sink, "{k}: {v}")?;
            }
        }
        SummaryFormat::Csv => {
            writeln!(sink, "{SUMMARY_CSV_HEADER}")?;
            let row: Vec<String> = summary.fields().into_iter().map(|(_, v)| v).collect();
            writeln!(sink, "{}", row.join(","))?;
        }
        SummaryFormat::Records => {
            serde_json::to_writer(&mut sink, summary)?;
            writeln!(sink)?;
        }
    }
    sink.flush()
}
