//! Exhaustive-enumeration oracle with exact rational probabilities.
//!
//! This path shares nothing with the floating-point simulator. States are
//! Gaussian-integer vectors `v` standing for `v / ‖v‖`; since every amplitude
//! that can occur is a Gaussian integer times a power of `1/√2`, all Born
//! probabilities come out as exact rationals `|⟨u|v⟩|² / (‖u‖²‖v‖²)`.
//!
//! Every discrete branch of a round is enumerated: Bob's code, Alice's code,
//! Eve's random choices or measurement results, and Bob's Bell outcome.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::adversary::Strategy;
use crate::bell::{BellIndex, PauliCode};
use crate::protocol::Protocol;

type Gauss = Complex<i64>;

const fn g(re: i64, im: i64) -> Gauss {
    Complex::new(re, im)
}

/// Unnormalized exact state; the physical state is `v / ‖v‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ExactPair {
    v: [Gauss; 4],
}

impl ExactPair {
    fn norm_sqr(&self) -> i64 {
        self.v.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Operator table for the encoding `U_{k,l}` acting on the travel qubit.
    fn encode(&self, k: u8, l: u8) -> ExactPair {
        let u: [[Gauss; 2]; 2] = match (k, l) {
            (0, 0) => [[g(1, 0), g(0, 0)], [g(0, 0), g(1, 0)]],
            (0, 1) => [[g(0, 0), g(1, 0)], [g(1, 0), g(0, 0)]],
            // iσy = i·[[0, −i], [i, 0]]
            (1, 0) => {
                let i = g(0, 1);
                [[g(0, 0), i * g(0, -1)], [i * g(0, 1), g(0, 0)]]
            }
            _ => [[g(1, 0), g(0, 0)], [g(0, 0), g(-1, 0)]],
        };
        let mut v = [g(0, 0); 4];
        for h in 0..2 {
            for r in 0..2 {
                v[2 * h + r] = u[r][0] * self.v[2 * h] + u[r][1] * self.v[2 * h + 1];
            }
        }
        ExactPair { v }
    }

    fn bell(x: u8, y: u8) -> ExactPair {
        ExactPair {
            v: [g(0, 0), g(1, 0), g(1, 0), g(0, 0)],
        }
        .encode(x, y)
    }

    /// `(weight, (x, y))` for each Bell outcome with nonzero probability.
    fn bell_branches(&self) -> Vec<(Rational64, (u8, u8))> {
        let n = self.norm_sqr();
        let mut out = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                let b = ExactPair::bell(x, y);
                let amp: Gauss =
                    b.v.iter()
                        .zip(self.v.iter())
                        .map(|(a, c)| a.conj() * c)
                        .sum();
                let w = Rational64::new(amp.norm_sqr(), b.norm_sqr() * n);
                if w != Rational64::from_integer(0) {
                    out.push((w, (x, y)));
                }
            }
        }
        out
    }

    /// Computational-basis measurement of the travel qubit.
    fn travel_branches(&self) -> Vec<(Rational64, ExactPair)> {
        let n = self.norm_sqr();
        let mut out = Vec::new();
        for bit in 0..2 {
            let mut v = [g(0, 0); 4];
            for (i, a) in self.v.iter().enumerate() {
                if i & 1 == bit {
                    v[i] = *a;
                }
            }
            let post = ExactPair { v };
            let w = Rational64::new(post.norm_sqr(), n);
            if w != Rational64::from_integer(0) {
                out.push((w, post));
            }
        }
        out
    }
}

/// An exact probability printed as `p/q (decimal)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exact(pub Rational64);

impl Exact {
    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn fraction(self) -> String {
        if *self.0.denom() == 1 {
            self.0.numer().to_string()
        } else {
            format!("{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:.6})", self.fraction(), self.to_f64())
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            fraction: String,
            decimal: f64,
        }
        Repr {
            fraction: self.fraction(),
            decimal: self.to_f64(),
        }
        .serialize(s)
    }
}

/// Exact Bell-outcome distribution for one `(bob_code, alice_code)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub bob_code: PauliCode,
    pub alice_code: PauliCode,
    /// Indexed by `BellIndex::index`.
    pub probabilities: [Exact; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub protocol: Protocol,
    pub attack: Strategy,
    /// Probability that a performed check passes, codes uniform.
    pub check_pass_probability: Exact,
    pub detection_probability: Exact,
    /// `None` when the strategy never infers Alice's code.
    pub eve_alice_accuracy_exact: Option<Exact>,
    /// Accuracy of Eve's Bob inference in rounds where the outcome is public.
    pub eve_bob_public_accuracy_exact: Option<Exact>,
    pub outcome_distribution: Vec<OutcomeDistribution>,
}

struct Branch {
    weight: Rational64,
    outcome: (u8, u8),
    eve_alice: Option<(u8, u8)>,
}

fn branches(strategy: Strategy, bob: (u8, u8), alice: (u8, u8)) -> Vec<Branch> {
    let one = Rational64::from_integer(1);
    let quarter = Rational64::new(1, 4);
    let bob_pair = ExactPair::bell(bob.0, bob.1);
    let measured = |state: ExactPair, w: Rational64, eve_alice: Option<(u8, u8)>| {
        state
            .bell_branches()
            .into_iter()
            .map(move |(p, outcome)| Branch {
                weight: w * p,
                outcome,
                eve_alice,
            })
    };
    let mut out = Vec::new();
    match strategy {
        Strategy::None => out.extend(measured(bob_pair.encode(alice.0, alice.1), one, None)),
        Strategy::Disturbance => {
            for d in all_pairs() {
                let s = bob_pair.encode(alice.0, alice.1).encode(d.0, d.1);
                out.extend(measured(s, quarter, None));
            }
        }
        Strategy::MeasureResend => {
            for (w, collapsed) in bob_pair.travel_branches() {
                out.extend(measured(collapsed.encode(alice.0, alice.1), w, None));
            }
        }
        Strategy::BellSubstitution => {
            for e in all_pairs() {
                let eve_pair = ExactPair::bell(e.0, e.1).encode(alice.0, alice.1);
                for (w, (x, y)) in eve_pair.bell_branches() {
                    let inferred = (x ^ e.0, y ^ e.1);
                    let delivered = bob_pair.encode(inferred.0, inferred.1);
                    out.extend(measured(delivered, quarter * w, Some(inferred)));
                }
            }
        }
    }
    out
}

fn all_pairs() -> impl Iterator<Item = (u8, u8)> {
    (0..4u8).map(|i| (i >> 1, i & 1))
}

fn check_passes(protocol: Protocol, outcome: (u8, u8), bob: (u8, u8), alice: (u8, u8)) -> bool {
    match protocol {
        // Bob recomputes Alice's bits as |x − k|, |y − l| and compares.
        Protocol::Original => {
            let i = (outcome.0 as i8 - bob.0 as i8).unsigned_abs();
            let j = (outcome.1 as i8 - bob.1 as i8).unsigned_abs();
            (i, j) == alice
        }
        // Both codes are public; the outcome must be their XOR.
        Protocol::Modified => outcome == (bob.0 ^ alice.0, bob.1 ^ alice.1),
    }
}

/// Enumerates every branch of a round under `strategy` and returns exact
/// probabilities.
pub fn exact_oracle(protocol: Protocol, strategy: Strategy) -> OracleResult {
    let zero = Rational64::from_integer(0);
    let code_weight = Rational64::new(1, 16);
    let mut pass = zero;
    let mut inferred_mass = zero;
    let mut alice_hits = zero;
    let mut bob_hits = zero;
    let mut distributions = BTreeMap::new();

    for bob in all_pairs() {
        for alice in all_pairs() {
            let mut dist = [zero; 4];
            for br in branches(strategy, bob, alice) {
                dist[(br.outcome.0 * 2 + br.outcome.1) as usize] += br.weight;
                let w = code_weight * br.weight;
                if check_passes(protocol, br.outcome, bob, alice) {
                    pass += w;
                }
                if let Some(ea) = br.eve_alice {
                    inferred_mass += w;
                    if ea == alice {
                        alice_hits += w;
                    }
                    if (br.outcome.0 ^ ea.0, br.outcome.1 ^ ea.1) == bob {
                        bob_hits += w;
                    }
                }
            }
            distributions.insert(
                (bob, alice),
                OutcomeDistribution {
                    bob_code: PauliCode::from_bools(bob.0 == 1, bob.1 == 1),
                    alice_code: PauliCode::from_bools(alice.0 == 1, alice.1 == 1),
                    probabilities: dist.map(Exact),
                },
            );
        }
    }

    let conditional =
        |hits: Rational64| (inferred_mass != zero).then(|| Exact(hits / inferred_mass));
    OracleResult {
        protocol,
        attack: strategy,
        check_pass_probability: Exact(pass),
        detection_probability: Exact(Rational64::from_integer(1) - pass),
        eve_alice_accuracy_exact: conditional(alice_hits),
        eve_bob_public_accuracy_exact: conditional(bob_hits),
        outcome_distribution: distributions.into_values().collect(),
    }
}

impl OracleResult {
    pub fn distribution(&self, bob: PauliCode, alice: PauliCode) -> &OutcomeDistribution {
        &self.outcome_distribution[bob.index() * 4 + alice.index()]
    }

    pub fn outcome_probability(
        &self,
        bob: PauliCode,
        alice: PauliCode,
        outcome: BellIndex,
    ) -> Exact {
        self.distribution(bob, alice).probabilities[outcome.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Exact {
        Exact(Rational64::new(n, d))
    }

    #[test]
    fn exact_bell_basis_is_orthonormal() {
        for a in all_pairs() {
            let s = ExactPair::bell(a.0, a.1);
            assert_eq!(s.norm_sqr(), 2);
            let br = s.bell_branches();
            assert_eq!(br, vec![(Rational64::from_integer(1), a)]);
        }
    }

    #[test]
    fn exact_iy_squares_to_minus_identity() {
        let s = ExactPair::bell(0, 0);
        let twice = s.encode(1, 0).encode(1, 0);
        assert_eq!(twice.v.map(|a| -a), s.v);
    }

    #[test]
    fn headline_values() {
        let o = |s| exact_oracle(Protocol::Original, s);
        assert_eq!(o(Strategy::None).check_pass_probability, r(1, 1));
        assert_eq!(o(Strategy::Disturbance).check_pass_probability, r(1, 4));
        assert_eq!(o(Strategy::Disturbance).detection_probability, r(3, 4));
        assert_eq!(o(Strategy::MeasureResend).check_pass_probability, r(1, 2));
        let bs = o(Strategy::BellSubstitution);
        assert_eq!(bs.check_pass_probability, r(1, 1));
        assert_eq!(bs.eve_alice_accuracy_exact, Some(r(1, 1)));
        assert_eq!(bs.eve_bob_public_accuracy_exact, Some(r(1, 1)));
        assert_eq!(o(Strategy::None).eve_alice_accuracy_exact, None);
    }

    #[test]
    fn distributions_sum_to_one_exactly() {
        for protocol in [Protocol::Original, Protocol::Modified] {
            for s in Strategy::ALL {
                let res = exact_oracle(protocol, s);
                assert_eq!(res.outcome_distribution.len(), 16);
                for d in &res.outcome_distribution {
                    let total: Rational64 = d.probabilities.iter().map(|e| e.0).sum();
                    assert_eq!(total, Rational64::from_integer(1), "{s} {d:?}");
                }
            }
        }
    }

    #[test]
    fn lookup_by_codes() {
        let res = exact_oracle(Protocol::Original, Strategy::None);
        let d = res.distribution(PauliCode::Z, PauliCode::X);
        assert_eq!(d.bob_code, PauliCode::Z);
        assert_eq!(d.alice_code, PauliCode::X);
        assert_eq!(
            res.outcome_probability(PauliCode::Z, PauliCode::X, BellIndex::new(1, 0).unwrap()),
            r(1, 1)
        );
    }

    #[test]
    fn display_formats() {
        assert_eq!(r(3, 4).to_string(), "3/4 (0.750000)");
        assert_eq!(r(1, 1).fraction(), "1");
        let json = serde_json::to_string(&r(1, 2)).unwrap();
        assert_eq!(json, r#"{"fraction":"1/2","decimal":0.5}"#);
    }
}
