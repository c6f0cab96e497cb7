use proptest::prelude::*;

use tangram::repetition::{
    enumerate_free, find_violation, is_free, is_square_free, parse_rational, Enumeration, FreenessParams, Mode, Rational, DEFAULT_BUDGET,
};
use tangram::word::{factors, is_tangram, letter_counts, parse_digits, to_digits, Alphabet, Word};

/// Brute force: some factor `uvu`-shaped with period ≥ n and forbidden exponent.
fn brute_violation(w: &[u8], alpha: Rational, n: usize, inclusive: bool) -> bool {
    for i in 0..w.len() {
        for j in i + 1..=w.len() {
            let len = j - i;
            for p in n.max(1)..len {
                if (i..j - p).all(|k| w[k] == w[k + p]) {
                    let e = Rational::new(len as i64, p as i64);
                    if e > alpha || (inclusive && e == alpha) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn all_words(q: u8, len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..q).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

#[test]
fn ternary_square_free_counts() {
    // number of square-free ternary words by length
    let want = [1u64, 3, 6, 12, 18, 30, 42, 60, 78, 108, 144, 204, 264, 342, 456];
    for (len, &n) in want.iter().enumerate() {
        match enumerate_free(3, &FreenessParams::square_free(), len, Mode::Count, DEFAULT_BUDGET).unwrap() {
            Enumeration::Count(c) => assert_eq!(c, n, "length {len}"),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn count_matches_brute_force() {
    for (q, alpha, n, len) in [(3, "3/2", 1, 7), (4, "7/5", 1, 6), (2, "5/2", 1, 10), (3, "5/4", 3, 7)] {
        let a = parse_rational(alpha).unwrap();
        let params = FreenessParams::plus(a, n).unwrap();
        let brute = all_words(q, len).iter().filter(|w| !brute_violation(w, a, n, false)).count() as u64;
        assert_eq!(
            enumerate_free(q as usize, &params, len, Mode::Count, DEFAULT_BUDGET).unwrap(),
            Enumeration::Count(brute),
            "q={q} alpha={alpha} n={n} len={len}"
        );
        let Enumeration::Words(ws) = enumerate_free(q as usize, &params, len, Mode::Stream, DEFAULT_BUDGET).unwrap() else {
            panic!("stream mode")
        };
        assert_eq!(ws.len() as u64, brute);
        assert!(ws.windows(2).all(|p| p[0] < p[1]), "stream order is lexicographic");
    }
}

#[test]
fn longest_and_budget() {
    let r = enumerate_free(2, &FreenessParams::square_free(), 20, Mode::Longest, DEFAULT_BUDGET).unwrap();
    assert_eq!(r, Enumeration::Longest { length: 3, reached_limit: false });
    let r = enumerate_free(3, &FreenessParams::square_free(), 30, Mode::Longest, DEFAULT_BUDGET).unwrap();
    assert_eq!(r, Enumeration::Longest { length: 30, reached_limit: true });
    assert!(enumerate_free(3, &FreenessParams::square_free(), 30, Mode::Count, 50).is_err());
}

#[test]
fn dejean_six_letters() {
    // 6/5+-free words over six letters exist at every length; a spot check
    let params = FreenessParams::plus(Rational::new(6, 5), 1).unwrap();
    let r = enumerate_free(6, &params, 40, Mode::Longest, DEFAULT_BUDGET).unwrap();
    assert_eq!(r, Enumeration::Longest { length: 40, reached_limit: true });
}

#[test]
fn word_parsing() {
    let a = Alphabet::new(4).unwrap();
    let w = Word::parse_over("0123", a).unwrap();
    assert_eq!(w.to_string(), "0123");
    assert!(Word::parse_over("0124", a).is_err());
    assert!(Alphabet::new(0).is_err());
    assert!(parse_digits("01x").is_err());
}

proptest! {
    #[test]
    fn violation_agrees_with_brute_force(w in prop::collection::vec(0u8..3, 0..14), num in 5i64..12, n in 1usize..4, inclusive: bool) {
        let alpha = Rational::new(num, 4);
        prop_assume!(alpha > Rational::from_integer(1));
        let params = if inclusive { FreenessParams::inclusive(alpha, n) } else { FreenessParams::plus(alpha, n) }.unwrap();
        let found = find_violation(&w, &params);
        prop_assert_eq!(found.is_some(), brute_violation(&w, alpha, n, inclusive));
        if let Some(r) = found {
            let e = r.exponent();
            prop_assert!(r.period >= n);
            prop_assert!(e > alpha || (inclusive && e == alpha));
            prop_assert!((r.offset..r.offset + r.length - r.period).all(|k| w[k] == w[k + r.period]));
        }
    }

    #[test]
    fn freeness_is_factor_closed(w in prop::collection::vec(0u8..4, 1..40)) {
        let params = FreenessParams::plus(Rational::new(3, 2), 1).unwrap();
        if is_free(&w, &params) {
            for (_, f) in factors(&w, 1, w.len()) {
                prop_assert!(is_free(f, &params));
            }
        }
    }

    #[test]
    fn square_free_is_inclusive_two(w in prop::collection::vec(0u8..3, 0..16)) {
        prop_assert_eq!(is_square_free(&w), !brute_violation(&w, Rational::from_integer(2), 1, true));
    }

    #[test]
    fn tangrams_close_under_concatenation(u in prop::collection::vec(0u8..5, 0..12), v in prop::collection::vec(0u8..5, 0..12)) {
        let uu = [u.clone(), u.clone()].concat();
        prop_assert!(is_tangram(&uu));
        let uv = [u.clone(), v.clone()].concat();
        prop_assert_eq!(is_tangram(&uv), letter_counts(&uv).iter().all(|(_, c)| c.is_multiple_of(2)));
        prop_assert_eq!(letter_counts(&uv).total(), uv.len());
    }

    #[test]
    fn digits_round_trip(w in prop::collection::vec(0u8..10, 0..30)) {
        prop_assert_eq!(parse_digits(&to_digits(&w)).unwrap(), w);
    }

    #[test]
    fn factor_listing(w in prop::collection::vec(0u8..3, 0..12), lo in 0usize..5, hi in 0usize..14) {
        let got: Vec<(usize, Vec<u8>)> = factors(&w, lo, hi).map(|(i, f)| (i, f.to_vec())).collect();
        let mut want = Vec::new();
        for len in lo.max(1)..=hi.min(w.len()) {
            for i in 0..=w.len() - len {
                want.push((i, w[i..i + len].to_vec()));
            }
        }
        prop_assert_eq!(got, want);
    }
}
