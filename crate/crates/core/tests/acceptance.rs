//! Exit criteria. Run with `cargo test --test acceptance -- --nocapture` to
//! see one PASS/FAIL line per criterion.

use num_complex::Complex64;
use num_rational::Rational64;
use qdialogue::adversary::{AdversaryChannel, DirectLink, Strategy};
use qdialogue::bell::{
    apply_pauli, bell_state, compose, psi00, BellIndex, PauliCode, Qubit, TwoQubitState,
};
use qdialogue::harness::{
    read_transcripts, run_dialogue, run_sessions, write_transcripts, DialogueConfig, MessageSource,
    RunConfig,
};
use qdialogue::oracle::{exact_oracle, Exact};
use qdialogue::protocol::{Disclosure, Mode, Protocol, Statement};
use qdialogue::{bell_measure, run_round_modified, run_round_original, RandomStream};

const MC_ROUNDS: u64 = 100_000;
const STATE_TOL: f64 = 1e-9;
const MATRIX_TOL: f64 = 1e-12;
const SIGMAS: f64 = 3.0;
const MODES: [Mode; 2] = [Mode::Message, Mode::Check];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        {
            let holds: bool = $cond;
            if !holds {
                return Err(format!($($msg)+));
            }
        }
    };
}

fn within_sigmas(measured: f64, exact: f64, n: u64) -> bool {
    let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
    (measured - exact).abs() <= SIGMAS * sigma
}

fn seed_with_first_code(code: PauliCode) -> u64 {
    (0..)
        .find(|&s| RandomStream::new(s).code() == code)
        .unwrap()
}

fn honest_original() -> Outcome {
    for bob in PauliCode::ALL {
        for alice in PauliCode::ALL {
            for mode in MODES {
                let t = run_round_original(
                    0,
                    bob,
                    mode,
                    alice,
                    &mut DirectLink,
                    &mut RandomStream::new(0),
                );
                ensure!(
                    t.outcome == BellIndex::from(bob ^ alice),
                    "outcome {} for {bob}/{alice}",
                    t.outcome
                );
                match mode {
                    Mode::Message => ensure!(
                        t.bob_decoded == Some(alice) && t.alice_decoded == Some(bob),
                        "MM decode failed for {bob}/{alice}"
                    ),
                    Mode::Check => ensure!(
                        t.check_passed == Some(true),
                        "CM check failed for {bob}/{alice}"
                    ),
                }
            }
        }
    }
    Ok("16 code pairs x 2 modes exact".into())
}

fn honest_modified() -> Outcome {
    let mut cases = 0;
    for bob_mode in MODES {
        for alice_mode in MODES {
            for bob in PauliCode::ALL {
                for alice in PauliCode::ALL {
                    let t = run_round_modified(
                        0,
                        bob_mode,
                        bob,
                        alice_mode,
                        alice,
                        &mut DirectLink,
                        &mut RandomStream::new(1),
                    );
                    ensure!(
                        t.outcome == BellIndex::from(bob ^ alice),
                        "outcome mismatch"
                    );
                    let ok = match (alice_mode, bob_mode) {
                        (Mode::Check, Mode::Check) => t.check_passed == Some(true),
                        (Mode::Message, Mode::Message) => {
                            t.bob_decoded == Some(alice) && t.alice_decoded == Some(bob)
                        }
                        (Mode::Check, Mode::Message) => {
                            t.alice_decoded == Some(bob) && t.bob_decoded.is_none()
                        }
                        (Mode::Message, Mode::Check) => {
                            t.bob_decoded == Some(alice)
                                && t.alice_decoded.is_none()
                                && !t.has_outcome_reveal()
                        }
                    };
                    ensure!(
                        ok,
                        "alice {alice_mode} bob {bob_mode} codes {bob}/{alice}: {t:?}"
                    );
                    if (alice_mode, bob_mode) == (Mode::Check, Mode::Check) {
                        let ops = t
                            .announcements
                            .iter()
                            .filter(|a| matches!(a.statement, Statement::OpReveal { .. }))
                            .count();
                        ensure!(
                            ops == 2 && t.has_outcome_reveal(),
                            "CM^CM announcements incomplete"
                        );
                    }
                    cases += 1;
                }
            }
        }
    }
    Ok(format!(
        "{cases} cases exact, announcement discipline holds"
    ))
}

fn attack_reproduction() -> Outcome {
    for bob in PauliCode::ALL {
        for eve in PauliCode::ALL {
            let seed = seed_with_first_code(eve);
            for alice in PauliCode::ALL {
                let mut ch = AdversaryChannel::new(Strategy::BellSubstitution);
                let t = run_round_original(
                    0,
                    bob,
                    Mode::Check,
                    alice,
                    &mut ch,
                    &mut RandomStream::new(seed),
                );
                ensure!(ch.eve_state().eve_code == Some(eve), "eve code not pinned");
                let report = t.eve.ok_or("no Eve report")?;
                ensure!(
                    report.inferred_alice == Some(alice),
                    "Eve inferred wrong code for {bob}/{eve}/{alice}"
                );
                ensure!(
                    t.check_passed == Some(true),
                    "check failed for {bob}/{eve}/{alice}"
                );
            }
        }
    }
    let oracle = exact_oracle(Protocol::Original, Strategy::BellSubstitution);
    ensure!(
        oracle.detection_probability == Exact(Rational64::from_integer(0)),
        "oracle detection {}",
        oracle.detection_probability
    );
    let s = run_sessions(&RunConfig::new(
        Protocol::Original,
        Strategy::BellSubstitution,
        MC_ROUNDS,
        0.5,
        7,
    ))
    .unwrap()
    .summary;
    ensure!(
        s.eve_alice_accuracy == Some(1.0),
        "MC eve_alice_accuracy {:?}",
        s.eve_alice_accuracy
    );
    ensure!(
        s.detection_rate == Some(0.0),
        "MC detection_rate {:?}",
        s.detection_rate
    );
    Ok(format!(
        "64 triples exact; oracle detection 0; MC {} rounds: eve_alice_accuracy 1, detection_rate 0",
        MC_ROUNDS
    ))
}

fn baseline_attacks() -> Outcome {
    let mut notes = Vec::new();
    for (strategy, expected) in [
        (Strategy::Disturbance, (3, 4)),
        (Strategy::MeasureResend, (1, 2)),
    ] {
        let o = exact_oracle(Protocol::Original, strategy);
        ensure!(
            o.detection_probability == Exact(Rational64::new(expected.0, expected.1)),
            "{strategy}: oracle detection {}",
            o.detection_probability
        );
        let s = run_sessions(&RunConfig::new(
            Protocol::Original,
            strategy,
            MC_ROUNDS,
            1.0,
            1,
        ))
        .unwrap()
        .summary;
        ensure!(
            s.checks_performed == MC_ROUNDS,
            "not all rounds were checks"
        );
        let d = s.detection_rate.unwrap();
        ensure!(
            within_sigmas(d, o.detection_probability.to_f64(), MC_ROUNDS),
            "{strategy}: MC {d} vs {}",
            o.detection_probability
        );
        notes.push(format!(
            "{strategy} exact {} MC {d:.4}",
            o.detection_probability.fraction()
        ));
    }
    Ok(notes.join("; "))
}

fn algebra_suite() -> Outcome {
    for outer in PauliCode::ALL {
        for inner in PauliCode::ALL {
            let p = compose(outer, inner);
            ensure!(p.code == outer ^ inner, "code not XOR");
            let (a, b) = (outer.matrix(), inner.matrix());
            let rebuilt = p.matrix();
            for r in 0..2 {
                for c in 0..2 {
                    let direct = a[r][0] * b[0][c] + a[r][1] * b[1][c];
                    ensure!(
                        (direct - rebuilt[r][c]).norm() <= MATRIX_TOL,
                        "compose {outer}.{inner}"
                    );
                }
            }
        }
    }
    for a in BellIndex::ALL {
        for b in BellIndex::ALL {
            let ip = bell_state(a).inner(&bell_state(b));
            let delta = if a == b { 1.0 } else { 0.0 };
            ensure!(
                (ip - Complex64::new(delta, 0.0)).norm() <= STATE_TOL,
                "<{a}|{b}> = {ip}"
            );
        }
    }
    for bob in PauliCode::ALL {
        for alice in PauliCode::ALL {
            let out = apply_pauli(&bell_state(bob.into()), alice, Qubit::Travel);
            ensure!(
                (out.inner(&bell_state((bob ^ alice).into())).norm() - 1.0).abs() <= STATE_TOL,
                "encoding law {alice} on psi_{bob}"
            );
        }
    }
    Ok("16 compose pairs, 16 Bell overlaps, 16 encodings".into())
}

fn sampling() -> Outcome {
    let mut states: Vec<(String, TwoQubitState)> = PauliCode::ALL
        .iter()
        .map(|&c| {
            (
                format!("U{c} psi00"),
                apply_pauli(&psi00(), c, Qubit::Travel),
            )
        })
        .collect();
    states.push(("|01>".into(), TwoQubitState::basis(0, 1).unwrap()));
    states.push(("|11>".into(), TwoQubitState::basis(1, 1).unwrap()));
    for (i, (name, state)) in states.iter().enumerate() {
        let mut rng = RandomStream::new(100 + i as u64);
        let mut counts = [0u64; 4];
        for _ in 0..MC_ROUNDS {
            counts[bell_measure(state, &mut rng).0.index()] += 1;
        }
        let probs = state.bell_probabilities();
        for k in 0..4 {
            let p = probs[k].clamp(0.0, 1.0);
            let f = counts[k] as f64 / MC_ROUNDS as f64;
            let sigma = (p * (1.0 - p) / MC_ROUNDS as f64).sqrt();
            ensure!(
                (f - p).abs() <= SIGMAS * sigma + STATE_TOL,
                "{name} outcome {k}: {f} vs {p}"
            );
        }
    }
    Ok(format!("{} states x {} draws", states.len(), MC_ROUNDS))
}

fn modified_security() -> Outcome {
    let o = exact_oracle(Protocol::Modified, Strategy::BellSubstitution);
    let s = run_sessions(&RunConfig::new(
        Protocol::Modified,
        Strategy::BellSubstitution,
        MC_ROUNDS,
        1.0,
        5,
    ))
    .unwrap()
    .summary;
    ensure!(
        s.checks_performed == MC_ROUNDS,
        "expected every round to be CM^CM"
    );
    let d = s.detection_rate.unwrap();
    ensure!(
        within_sigmas(d, o.detection_probability.to_f64(), MC_ROUNDS),
        "MC {d} vs oracle {}",
        o.detection_probability
    );
    Ok(format!(
        "bell-substitution vs modified: oracle detection probability {}, MC detection_rate {d} over {} CM^CM rounds",
        o.detection_probability, MC_ROUNDS
    ))
}

fn determinism_and_round_trip() -> Outcome {
    let cfg = RunConfig::new(
        Protocol::Original,
        Strategy::BellSubstitution,
        10_000,
        0.5,
        42,
    );
    let render = || {
        let out = run_sessions(&cfg).unwrap();
        let mut buf = Vec::new();
        write_transcripts(&out.transcripts, &mut buf).unwrap();
        (buf, out)
    };
    let (a, out) = render();
    let (b, _) = render();
    ensure!(a == b, "transcript bytes differ between identical runs");
    let parsed = read_transcripts(&a[..]).map_err(|e| e.to_string())?;
    ensure!(parsed == out.transcripts, "parsed transcripts differ");

    let d = run_dialogue(&DialogueConfig {
        alice_text: "Hello, Bob! Ünïcödé ✓".into(),
        bob_text: "Hi Alice".into(),
        strategy: Strategy::None,
        seed: 9,
        disclosure: Disclosure::Public,
    });
    ensure!(
        d.bob_received == "Hello, Bob! Ünïcödé ✓",
        "Bob got {:?}",
        d.bob_received
    );
    ensure!(
        d.alice_received.as_deref() == Some("Hi Alice"),
        "Alice got {:?}",
        d.alice_received
    );

    let mut text_cfg = RunConfig::new(Protocol::Modified, Strategy::None, 1000, 0.5, 13);
    text_cfg.message_source = MessageSource::Text {
        alice: "mixed modes".into(),
        bob: "still arrive".into(),
    };
    let text = run_sessions(&text_cfg).unwrap().text.unwrap();
    ensure!(
        text.alice_text_at_bob == "mixed modes" && text.bob_text_at_alice == "still arrive",
        "session text round trip failed: {text:?}"
    );
    Ok(format!(
        "{} transcript bytes identical and parsed back; texts exact",
        a.len()
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 honest completeness, original", honest_original),
        ("2 honest completeness, modified", honest_modified),
        (
            "3 bell-substitution attack reproduction",
            attack_reproduction,
        ),
        ("4 baseline attacks detectable", baseline_attacks),
        ("5 Pauli/Bell algebra", algebra_suite),
        ("6 Born-rule sampling", sampling),
        (
            "7 modified protocol vs bell-substitution",
            modified_security,
        ),
        ("8 determinism and round-trip", determinism_and_round_trip),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
