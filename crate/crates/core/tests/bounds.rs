use proptest::prelude::*;

use tangram::bounds::{bounds_table, check_certificate, derive_constraints, infeasibility_witness, max_occurrence_length, ConstraintSystem};
use tangram::pattern::{generate_sk, Pattern};
use tangram::repetition::{is_free, FreenessParams, Rational};

fn pat(s: &str) -> Pattern {
    s.parse().unwrap()
}

/// Each variable's two copies span a repetition; it is allowed if its period
/// is short or its exponent is at most alpha.
fn oracle_holds(p: &Pattern, alpha: Rational, n: usize, x: &[i64]) -> bool {
    let vars = p.vars();
    (0..p.var_count() as u8).all(|y| {
        let i = vars.iter().position(|&v| v == y).unwrap();
        let j = vars.iter().rposition(|&v| v == y).unwrap();
        let period: i64 = vars[i..j].iter().map(|&v| x[v as usize]).sum();
        period < n as i64 || Rational::new(period + x[y as usize], period) <= alpha
    })
}

fn brute_max(sys: &ConstraintSystem, cap: i64) -> Option<i64> {
    let k = sys.var_count();
    let mut x = vec![1i64; k];
    let mut best = None;
    loop {
        if sys.holds(&x) {
            let s = 2 * x.iter().sum::<i64>();
            best = best.max(Some(s));
        }
        let mut i = 0;
        loop {
            if i == k {
                return best;
            }
            x[i] += 1;
            if x[i] < cap {
                break;
            }
            x[i] = 1;
            i += 1;
        }
    }
}

/// Image of `p` where every letter of every image is distinct.
fn generic_image(p: &Pattern, x: &[i64]) -> Vec<u8> {
    let mut base = vec![0u8; x.len()];
    let mut next = 0u8;
    for (v, &l) in x.iter().enumerate() {
        base[v] = next;
        next += l as u8;
    }
    p.vars().iter().flat_map(|&v| (0..x[v as usize] as u8).map(|t| base[v as usize] + t).collect::<Vec<_>>()).collect()
}

#[test]
fn matches_brute_force_at_small_cap() {
    let alpha = Rational::new(5, 4);
    for p in &generate_sk(4) {
        let sys = derive_constraints(p, alpha, 9).unwrap();
        let fast = max_occurrence_length(p, alpha, 9, 16).unwrap().map(|b| b.bound);
        assert_eq!(fast, brute_max(&sys, 16), "{p}");
    }
    for (p, a, n) in [("ABACBC", Rational::new(3, 2), 4), ("AA", Rational::new(7, 4), 3), ("ABCBAC", Rational::new(4, 3), 5)] {
        let sys = derive_constraints(&pat(p), a, n).unwrap();
        assert_eq!(max_occurrence_length(&pat(p), a, n, 30).unwrap().map(|b| b.bound), brute_max(&sys, 30), "{p}");
    }
}

#[test]
fn every_s4_pattern_has_a_certificate() {
    for p in &generate_sk(4) {
        let cert = infeasibility_witness(p, Rational::new(5, 4)).unwrap().unwrap_or_else(|| panic!("{p}"));
        let sys = derive_constraints(p, Rational::new(5, 4), 1).unwrap();
        assert!(check_certificate(&sys, &cert.multipliers));
    }
    // squares are avoidable only below exponent 2
    assert!(infeasibility_witness(&pat("AA"), Rational::new(2, 1)).unwrap().is_none());
}

#[test]
fn table_is_consistent() {
    let rows = bounds_table(&generate_sk(4), Rational::new(5, 4), 9, 100).unwrap();
    assert_eq!(rows.len(), 14);
    assert!(rows.iter().all(|r| r.consistent()), "{rows:?}");
    assert_eq!(rows.iter().map(|r| 1 + r.reverse.is_some() as usize).sum::<usize>(), 21);
}

#[test]
fn bounds_are_stable_past_the_cap() {
    for p in ["ABCDBDAC", "ABACDBDC", "AA"] {
        let at100 = max_occurrence_length(&pat(p), Rational::new(5, 4), 9, 100).unwrap().unwrap();
        let at150 = max_occurrence_length(&pat(p), Rational::new(5, 4), 9, 150).unwrap().unwrap();
        assert_eq!(at100.bound, at150.bound, "{p}");
    }
}

#[test]
fn rejects_bad_input() {
    assert!(derive_constraints(&pat("ABA"), Rational::new(5, 4), 9).is_err());
    assert!(derive_constraints(&pat("AA"), Rational::new(1, 1), 9).is_err());
    assert!(max_occurrence_length(&pat("AA"), Rational::new(5, 4), 9, 1).is_err());
}

proptest! {
    #[test]
    fn system_matches_repetition_semantics(i in 0usize..21, x in prop::collection::vec(1i64..15, 4), num in 5i64..8, n in 1usize..12) {
        let set = generate_sk(4);
        let p = &set.patterns()[i];
        let x = &x[..p.var_count()];
        let alpha = Rational::new(num, 4);
        let sys = derive_constraints(p, alpha, n).unwrap();
        prop_assert_eq!(sys.holds(x), oracle_holds(p, alpha, n, x));
    }

    #[test]
    fn free_images_satisfy_the_system(i in 0usize..21, x in prop::collection::vec(1i64..12, 4), n in 1usize..10) {
        let set = generate_sk(4);
        let p = &set.patterns()[i];
        let x = &x[..p.var_count()];
        let alpha = Rational::new(5, 4);
        let w = generic_image(p, x);
        if is_free(&w, &FreenessParams::plus(alpha, n).unwrap()) {
            let sys = derive_constraints(p, alpha, n).unwrap();
            prop_assert!(sys.holds(x));
            let b = max_occurrence_length(p, alpha, n, 12).unwrap().unwrap();
            prop_assert!(w.len() as i64 <= b.bound);
        }
    }
}
