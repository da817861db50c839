//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::adversary::Strategy;
use crate::harness::{
    run_dialogue, run_sessions, write_summary, write_transcripts, DialogueConfig, MessageSource,
    RunConfig, SummaryFormat, DEFAULT_P_CM,
};
use crate::oracle::{exact_oracle, OracleResult};
use crate::protocol::{Disclosure, Protocol};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qdialogue",
    version,
    about = "Quantum dialogue protocol and attack simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo session with aggregated metrics.
    Run(RunArgs),
    /// Exact branch enumeration.
    Oracle(OracleArgs),
    /// Message-mode exchange of two texts.
    Dialogue(DialogueArgs),
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is outside [0, 1]"))
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "original")]
    protocol: Protocol,
    #[arg(long, value_enum, default_value = "none")]
    attack: Strategy,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    rounds: u64,
    /// Probability that a party picks checking mode.
    #[arg(long = "p-cm", default_value_t = DEFAULT_P_CM, value_parser = parse_probability)]
    p_cm: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write round transcripts (one JSON object per line) here.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: SummaryFormat,
    /// Use this text as Alice's message stream instead of random bits.
    #[arg(long = "alice-text")]
    alice_text: Option<String>,
    /// Use this text as Bob's message stream instead of random bits.
    #[arg(long = "bob-text")]
    bob_text: Option<String>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, value_enum, default_value = "original")]
    protocol: Protocol,
    #[arg(long, value_enum, default_value = "none")]
    attack: Strategy,
    #[arg(long, value_enum, default_value = "text")]
    format: SummaryFormat,
}

#[derive(Debug, Args)]
struct DialogueArgs {
    #[arg(long = "alice-text")]
    alice_text: String,
    #[arg(long = "bob-text")]
    bob_text: String,
    #[arg(long, value_enum, default_value = "none")]
    attack: Strategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bob does not announce his Bell outcomes.
    #[arg(long = "suppress-outcome-reveal")]
    suppress_outcome_reveal: bool,
    /// Write round transcripts here.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Dialogue(a) => cmd_dialogue(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_IO
        }
    }
}

fn write_transcript_file(
    path: &PathBuf,
    transcripts: &[crate::protocol::RoundTranscript],
) -> io::Result<()> {
    let file = File::create(path)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    write_transcripts(transcripts, BufWriter::new(file))
}

fn cmd_run(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let mut config = RunConfig::new(a.protocol, a.attack, a.rounds, a.p_cm, a.seed);
    if a.alice_text.is_some() || a.bob_text.is_some() {
        config.message_source = MessageSource::Text {
            alice: a.alice_text.unwrap_or_default(),
            bob: a.bob_text.unwrap_or_default(),
        };
    }
    let session = match run_sessions(&config) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    if let Some(path) = &a.output {
        write_transcript_file(path, &session.transcripts)?;
    }
    write_summary(&session.summary, &mut *out, a.format)?;
    if let (Some(text), SummaryFormat::Text) = (&session.text, a.format) {
        writeln!(out, "alice_text_at_bob: {:?}", text.alice_text_at_bob)?;
        writeln!(out, "bob_text_at_alice: {:?}", text.bob_text_at_alice)?;
    }
    Ok(EXIT_OK)
}

fn opt(e: &Option<crate::oracle::Exact>) -> String {
    e.map(|v| v.to_string()).unwrap_or_else(|| "n/a".to_owned())
}

fn print_oracle_text(r: &OracleResult, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "protocol: {}", r.protocol)?;
    writeln!(out, "attack: {}", r.attack)?;
    writeln!(out, "check_pass_probability: {}", r.check_pass_probability)?;
    writeln!(out, "detection_probability: {}", r.detection_probability)?;
    writeln!(
        out,
        "eve_alice_accuracy: {}",
        opt(&r.eve_alice_accuracy_exact)
    )?;
    writeln!(
        out,
        "eve_bob_public_accuracy: {}",
        opt(&r.eve_bob_public_accuracy_exact)
    )?;
    writeln!(out, "outcome_distribution (bob alice: p00 p01 p10 p11):")?;
    for d in &r.outcome_distribution {
        let ps: Vec<String> = d.probabilities.iter().map(|p| p.fraction()).collect();
        writeln!(out, "  {} {}: {}", d.bob_code, d.alice_code, ps.join(" "))?;
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> io::Result<i32> {
    let r = exact_oracle(a.protocol, a.attack);
    match a.format {
        SummaryFormat::Text => print_oracle_text(&r, out)?,
        SummaryFormat::Records => {
            serde_json::to_writer(&mut *out, &r)?;
            writeln!(out)?;
        }
        SummaryFormat::Csv => {
            writeln!(
                out,
                "protocol,attack,check_pass_probability,detection_probability,eve_alice_accuracy,eve_bob_public_accuracy"
            )?;
            let frac =
                |e: &Option<crate::oracle::Exact>| e.map(|v| v.fraction()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.protocol,
                r.attack,
                r.check_pass_probability.fraction(),
                r.detection_probability.fraction(),
                frac(&r.eve_alice_accuracy_exact),
                frac(&r.eve_bob_public_accuracy_exact)
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_dialogue(a: DialogueArgs, out: &mut dyn Write) -> io::Result<i32> {
    let cfg = DialogueConfig {
        alice_text: a.alice_text,
        bob_text: a.bob_text,
        strategy: a.attack,
        seed: a.seed,
        disclosure: if a.suppress_outcome_reveal {
            Disclosure::Withheld
        } else {
            Disclosure::Public
        },
    };
    let d = run_dialogue(&cfg);
    if let Some(path) = &a.output {
        write_transcript_file(path, &d.transcripts)?;
    }
    let show = |s: &Option<String>| {
        s.as_ref()
            .map_or_else(|| "(nothing)".to_owned(), |t| format!("{t:?}"))
    };
    writeln!(out, "attack: {}", cfg.strategy)?;
    writeln!(out, "rounds: {}", d.transcripts.len())?;
    writeln!(out, "bob received alice's text: {:?}", d.bob_received)?;
    writeln!(
        out,
        "alice received bob's text: {}",
        show(&d.alice_received)
    )?;
    writeln!(
        out,
        "eve recovered alice's text: {}",
        show(&d.eve_alice_text)
    )?;
    writeln!(out, "eve recovered bob's text: {}", show(&d.eve_bob_text))?;
    Ok(EXIT_OK)
}
