use std::io::BufReader;

use qdialogue::adversary::Strategy;
use qdialogue::harness::{
    read_transcripts, run_sessions, write_transcripts, MessageSource, RunConfig,
};
use qdialogue::oracle::exact_oracle;
use qdialogue::protocol::Protocol;

fn within_3_sigma(measured: f64, exact: f64, n: u64) -> bool {
    let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
    (measured - exact).abs() <= 3.0 * sigma
}

#[test]
fn honest_original_run() {
    let s = run_sessions(&RunConfig::new(
        Protocol::Original,
        Strategy::None,
        10_000,
        0.5,
        42,
    ))
    .unwrap()
    .summary;
    assert_eq!(s.detection_rate, Some(0.0));
    assert_eq!(s.alice_decode_accuracy, Some(1.0));
    assert_eq!(s.bob_decode_accuracy, Some(1.0));
    assert_eq!(s.eve_alice_accuracy, None);
    assert_eq!(s.throughput_bits, 4 * s.rounds_mm);
}

#[test]
fn substitution_original_run() {
    let s = run_sessions(&RunConfig::new(
        Protocol::Original,
        Strategy::BellSubstitution,
        10_000,
        0.5,
        7,
    ))
    .unwrap()
    .summary;
    assert_eq!(s.detection_rate, Some(0.0));
    assert_eq!(s.eve_alice_accuracy, Some(1.0));
    assert_eq!(s.eve_bob_public_accuracy, Some(1.0));
}

#[test]
fn disturbance_original_run() {
    let s = run_sessions(&RunConfig::new(
        Protocol::Original,
        Strategy::Disturbance,
        100_000,
        0.5,
        1,
    ))
    .unwrap()
    .summary;
    assert!((s.detection_rate.unwrap() - 0.75).abs() <= 0.02);
}

#[test]
fn modified_cm_fraction_tracks_p_cm_squared() {
    let s = run_sessions(&RunConfig::new(
        Protocol::Modified,
        Strategy::None,
        1000,
        0.25,
        3,
    ))
    .unwrap()
    .summary;
    // Binomial(1000, 1/16): mean 62.5, σ ≈ 7.65
    assert!(
        (s.rounds_cm as f64 - 62.5).abs() <= 3.0 * 7.66,
        "{}",
        s.rounds_cm
    );
    assert_eq!(s.detection_rate, Some(0.0));
}

#[test]
fn oracle_and_monte_carlo_agree_for_every_pair() {
    const N: u64 = 100_000;
    for protocol in [Protocol::Original, Protocol::Modified] {
        for strategy in Strategy::ALL {
            let exact = exact_oracle(protocol, strategy);
            let s = run_sessions(&RunConfig::new(protocol, strategy, N, 1.0, 2024))
                .unwrap()
                .summary;
            assert_eq!(s.checks_performed, N);
            let measured_pass = 1.0 - s.detection_rate.unwrap();
            assert!(
                within_3_sigma(measured_pass, exact.check_pass_probability.to_f64(), N),
                "{protocol} {strategy}: {measured_pass} vs {}",
                exact.check_pass_probability
            );
            match (exact.eve_alice_accuracy_exact, s.eve_alice_accuracy) {
                (Some(e), Some(m)) => assert!(within_3_sigma(m, e.to_f64(), N)),
                (None, None) => {}
                other => panic!("{protocol} {strategy}: {other:?}"),
            }
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let mut cfg = RunConfig::new(
        Protocol::Modified,
        Strategy::BellSubstitution,
        10_000,
        0.5,
        42,
    );
    let render = |cfg: &RunConfig| {
        let out = run_sessions(cfg).unwrap();
        let mut buf = Vec::new();
        write_transcripts(&out.transcripts, &mut buf).unwrap();
        (buf, out.summary)
    };
    let (a, sa) = render(&cfg);
    let (b, sb) = render(&cfg);
    assert_eq!(a, b);
    assert_eq!(sa, sb);
    cfg.seed = 43;
    assert_ne!(render(&cfg).0, a);
}

#[test]
fn every_line_parses_back() {
    for protocol in [Protocol::Original, Protocol::Modified] {
        for strategy in Strategy::ALL {
            let out = run_sessions(&RunConfig::new(protocol, strategy, 500, 0.5, 5)).unwrap();
            let mut buf = Vec::new();
            write_transcripts(&out.transcripts, &mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert_eq!(text.lines().count(), 500);
            let back = read_transcripts(BufReader::new(&buf[..])).unwrap();
            assert_eq!(back, out.transcripts);
        }
    }
}

#[test]
fn text_survives_attack_but_eve_reads_alice() {
    let mut cfg = RunConfig::new(
        Protocol::Original,
        Strategy::BellSubstitution,
        2000,
        0.5,
        11,
    );
    cfg.message_source = MessageSource::Text {
        alice: "attack at dawn".into(),
        bob: "acknowledged".into(),
    };
    let out = run_sessions(&cfg).unwrap();
    let text = out.text.unwrap();
    assert_eq!(text.alice_text_at_bob, "attack at dawn");
    assert_eq!(text.bob_text_at_alice, "acknowledged");
    assert_eq!(out.summary.detection_rate, Some(0.0));
}
