//! Length bounds for occurrences of doubled patterns in `(α⁺, n)`-free words.
//!
//! For a variable `Y` occurring at positions `i < j` of `P`, the factor
//! `m(P[i..=j]) = m(Y) m(W) m(Y)` is a repetition of period `y + |m(W)|`.
//! Freeness forces either a short period or a small exponent. Each such
//! disjunction is a [`DisjunctiveConstraint`] over the image lengths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{Pattern, PatternSet};
use crate::repetition::Rational;

/// `Σ coeffs[v]·x_v ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearInequality {
    pub coeffs: Vec<i64>,
    pub rhs: i64,
}

impl LinearInequality {
    pub fn holds(&self, x: &[i64]) -> bool {
        self.eval(x) <= self.rhs
    }

    pub fn eval(&self, x: &[i64]) -> i64 {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Divides through by the gcd of all coefficients and the right side.
    pub fn normalized(mut self) -> Self {
        let g = self.coeffs.iter().fold(self.rhs.abs(), |g, c| g.gcd(c));
        if g > 1 {
            self.coeffs.iter_mut().for_each(|c| *c /= g);
            self.rhs /= g;
        }
        self
    }
}

fn var_name(v: usize) -> char {
    char::from(b'a' + v as u8)
}

fn write_side(f: &mut fmt::Formatter<'_>, terms: &[(usize, i64)], constant: i64) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "{constant}");
    }
    for (k, &(v, c)) in terms.iter().enumerate() {
        if k > 0 {
            f.write_str("+")?;
        }
        if c != 1 {
            write!(f, "{c}")?;
        }
        write!(f, "{}", var_name(v))?;
    }
    if constant != 0 {
        write!(f, "+{constant}")?;
    }
    Ok(())
}

/// Positive terms on the left, negated ones on the right: `3a ≤ b+c+d`.
impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let left: Vec<(usize, i64)> = self.coeffs.iter().enumerate().filter(|(_, &c)| c > 0).map(|(v, &c)| (v, c)).collect();
        let right: Vec<(usize, i64)> = self.coeffs.iter().enumerate().filter(|(_, &c)| c < 0).map(|(v, &c)| (v, -c)).collect();
        let (lc, rc) = if self.rhs >= 0 { (0, self.rhs) } else { (-self.rhs, 0) };
        write_side(f, &left, lc)?;
        f.write_str(" <= ")?;
        write_side(f, &right, rc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisjunctiveConstraint {
    /// The variable delimiting the repetition.
    pub var: u8,
    /// Positions `i..=j` of the repetition in the pattern.
    pub span: (usize, usize),
    /// Period below the minimum: `period ≤ n − 1`.
    pub small_period: LinearInequality,
    /// Exponent at most `α`, cleared of denominators.
    pub exponent: LinearInequality,
}

impl DisjunctiveConstraint {
    pub fn holds(&self, x: &[i64]) -> bool {
        self.small_period.holds(x) || self.exponent.holds(x)
    }
}

impl fmt::Display for DisjunctiveConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) or ({})", self.small_period, self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub pattern: Pattern,
    pub alpha: Rational,
    pub n: usize,
    pub constraints: Vec<DisjunctiveConstraint>,
}

impl ConstraintSystem {
    pub fn var_count(&self) -> usize {
        self.pattern.var_count()
    }

    pub fn holds(&self, x: &[i64]) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} at ({}+, {})", self.pattern, self.alpha, self.n)?;
        for c in &self.constraints {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

/// One disjunction per variable, from the repetition between its two
/// occurrences, in order of first occurrence.
pub fn derive_constraints(p: &Pattern, alpha: Rational, n: usize) -> Result<ConstraintSystem> {
    if !p.is_exactly_doubled() {
        return Err(Error::NotExactlyDoubled(p.to_string()));
    }
    if alpha <= Rational::from_integer(1) || n == 0 {
        return Err(Error::InvalidParams(format!("need alpha > 1 and n >= 1, got {alpha}, {n}")));
    }
    let num = *alpha.numer();
    let den = *alpha.denom();
    let k = p.var_count();
    let vars = p.vars();
    let constraints = (0..k as u8)
        .map(|y| {
            let i = vars.iter().position(|&v| v == y).unwrap();
            let j = vars.iter().rposition(|&v| v == y).unwrap();
            // period counts P[i..j], the repetition adds one more y
            let mut period = vec![0i64; k];
            for &v in &vars[i..j] {
                period[v as usize] += 1;
            }
            let small_period = LinearInequality {
                coeffs: period.clone(),
                rhs: n as i64 - 1,
            };
            // den·(period + y) ≤ num·period
            let mut coeffs: Vec<i64> = period.iter().map(|&c| (den - num) * c).collect();
            coeffs[y as usize] += den;
            let exponent = LinearInequality { coeffs, rhs: 0 }.normalized();
            DisjunctiveConstraint {
                var: y,
                span: (i, j),
                small_period,
                exponent,
            }
        })
        .collect();
    Ok(ConstraintSystem {
        pattern: p.clone(),
        alpha,
        n,
        constraints,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthAssignment(pub Vec<i64>);

impl LengthAssignment {
    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl fmt::Display for LengthAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().enumerate().map(|(v, x)| format!("{}={x}", var_name(v))).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceBound {
    /// Largest `|m(P)| = 2·Σ lengths` allowed by the system.
    pub bound: i64,
    pub witness: LengthAssignment,
}

struct Search<'a> {
    sys: &'a ConstraintSystem,
    cap: i64,
    x: Vec<i64>,
    best: Option<(i64, Vec<i64>)>,
}

impl Search<'_> {
    /// Whether some completion of `x[..=v]` can still satisfy `c`.
    fn may_hold(&self, c: &DisjunctiveConstraint, assigned: usize) -> bool {
        let reach = |ineq: &LinearInequality| -> i64 {
            ineq.coeffs
                .iter()
                .enumerate()
                .map(|(u, &co)| {
                    if u < assigned {
                        co * self.x[u]
                    } else if co >= 0 {
                        co
                    } else {
                        co * (self.cap - 1)
                    }
                })
                .sum()
        };
        reach(&c.small_period) <= c.small_period.rhs || reach(&c.exponent) <= c.exponent.rhs
    }

    /// Largest `x[v]` in `[1, cap)` satisfying every constraint, all other
    /// lengths fixed. Each clause bounds `x[v]` on one side.
    fn max_last(&mut self, v: usize) -> Option<i64> {
        self.x[v] = 0;
        // largest x ≤ top with coef·x + rest ≤ rhs, if any
        let clause_max = |ineq: &LinearInequality, x: &[i64], top: i64| -> Option<i64> {
            let c = ineq.coeffs[v];
            let room = ineq.rhs - ineq.eval(x);
            if c > 0 {
                let m = Integer::div_floor(&room, &c).min(top);
                (m >= 1).then_some(m)
            } else if c < 0 {
                let lo = Integer::div_ceil(&-room, &-c).max(1);
                (lo <= top).then_some(top)
            } else {
                (room >= 0).then_some(top)
            }
        };
        let mut top = self.cap - 1;
        loop {
            let mut next = top;
            for c in &self.sys.constraints {
                let a = clause_max(&c.small_period, &self.x, next);
                let b = clause_max(&c.exponent, &self.x, next);
                next = a.into_iter().chain(b).max()?;
            }
            if next == top {
                return Some(top);
            }
            top = next;
        }
    }

    fn go(&mut self, v: usize, sum: i64) {
        let k = self.x.len();
        if v == k {
            if self.best.as_ref().is_none_or(|(b, _)| sum > *b) {
                self.best = Some((sum, self.x.clone()));
            }
            return;
        }
        let remaining = (k - v - 1) as i64;
        if remaining == 0 {
            if let Some(len) = self.max_last(v) {
                if self.best.as_ref().is_none_or(|(b, _)| sum + len > *b) {
                    self.x[v] = len;
                    self.go(k, sum + len);
                }
            }
            self.x[v] = 0;
            return;
        }
        for len in 1..self.cap {
            if let Some((b, _)) = &self.best {
                if sum + len + remaining * (self.cap - 1) <= *b {
                    continue;
                }
            }
            self.x[v] = len;
            let sys = self.sys;
            if sys.constraints.iter().all(|c| self.may_hold(c, v + 1)) {
                self.go(v + 1, sum + len);
            }
        }
        self.x[v] = 0;
    }
}

/// Maximizes `2·Σ lengths` over lengths in `[1, cap)` satisfying every
/// constraint. The witness is the first maximizer in lexicographic order.
pub fn max_occurrence_length_of(sys: &ConstraintSystem, cap: i64) -> Option<OccurrenceBound> {
    let mut search = Search {
        sys,
        cap,
        x: vec![0; sys.var_count()],
        best: None,
    };
    search.go(0, 0);
    search.best.map(|(sum, x)| OccurrenceBound {
        bound: 2 * sum,
        witness: LengthAssignment(x),
    })
}

pub fn max_occurrence_length(p: &Pattern, alpha: Rational, n: usize, cap: i64) -> Result<Option<OccurrenceBound>> {
    if cap < 2 {
        return Err(Error::InvalidParams(format!("cap must be at least 2, got {cap}")));
    }
    Ok(max_occurrence_length_of(&derive_constraints(p, alpha, n)?, cap))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub multipliers: Vec<i64>,
    /// `Σ λᵢ·Lᵢ`: every coefficient nonnegative, some positive, and the
    /// combined right side is zero, so no positive lengths satisfy it.
    pub combination: LinearInequality,
}

pub const MAX_MULTIPLIER: i64 = 20;

/// Nonnegative integer multipliers (each at most [`MAX_MULTIPLIER`]) showing
/// that the exponent clauses alone admit no positive lengths. Smallest total
/// first, then lexicographic.
pub fn infeasibility_witness(p: &Pattern, alpha: Rational) -> Result<Option<InfeasibilityCertificate>> {
    let sys = derive_constraints(p, alpha, 1)?;
    Ok(certify_exponent_clauses(&sys, MAX_MULTIPLIER))
}

pub fn certify_exponent_clauses(sys: &ConstraintSystem, max_multiplier: i64) -> Option<InfeasibilityCertificate> {
    let forms: Vec<&LinearInequality> = sys.constraints.iter().map(|c| &c.exponent).collect();
    let m = forms.len();
    let k = sys.var_count();

    fn fill(slots: usize, total: i64, max: i64, cur: &mut Vec<i64>, f: &mut dyn FnMut(&[i64]) -> bool) -> bool {
        if slots == 0 {
            return total != 0 || f(cur);
        }
        let lo = if slots == 1 { total } else { 0 };
        for x in lo..=total.min(max) {
            cur.push(x);
            let done = !fill(slots - 1, total - x, max, cur, f);
            cur.pop();
            if done {
                return false;
            }
        }
        true
    }

    for total in 1..=max_multiplier * m as i64 {
        let mut hit = None;
        fill(m, total, max_multiplier, &mut Vec::with_capacity(m), &mut |lam| {
            let mut coeffs = vec![0i64; k];
            let mut rhs = 0;
            for (l, form) in lam.iter().zip(&forms) {
                for (c, fc) in coeffs.iter_mut().zip(&form.coeffs) {
                    *c += l * fc;
                }
                rhs += l * form.rhs;
            }
            if rhs <= 0 && coeffs.iter().all(|&c| c >= 0) && coeffs.iter().any(|&c| c > 0) {
                hit = Some(InfeasibilityCertificate {
                    multipliers: lam.to_vec(),
                    combination: LinearInequality { coeffs, rhs },
                });
                return false;
            }
            true
        });
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// Checks a multiplier vector against the exponent clauses of `sys`.
pub fn check_certificate(sys: &ConstraintSystem, multipliers: &[i64]) -> bool {
    if multipliers.len() != sys.constraints.len() || multipliers.iter().any(|&l| l < 0) {
        return false;
    }
    let mut coeffs = vec![0i64; sys.var_count()];
    let mut rhs = 0;
    for (l, c) in multipliers.iter().zip(&sys.constraints) {
        for (a, b) in coeffs.iter_mut().zip(&c.exponent.coeffs) {
            *a += l * b;
        }
        rhs += l * c.exponent.rhs;
    }
    rhs <= 0 && coeffs.iter().all(|&c| c >= 0) && coeffs.iter().any(|&c| c > 0)
}

/// Published bound on `|m(P)|` at `(5/4⁺, 9)`, per pattern and its reverse.
pub const PUBLISHED_BOUNDS: &[(&str, Option<&str>, i64)] = &[
    ("AA", None, 16),
    ("ABACBC", None, 30),
    ("ABCACB", Some("ABCBAC"), 26),
    ("ABACBDCD", None, 32),
    ("ABACDBDC", Some("ABCBADCD"), 40),
    ("ABACDCBD", Some("ABCACDBD"), 32),
    ("ABCADBDC", Some("ABCBDACD"), 32),
    ("ABCADCBD", None, 28),
    ("ABCADCDB", Some("ABCBDCAD"), 32),
    ("ABCBDADC", None, 32),
    ("ABCDACBD", None, 24),
    ("ABCDADCB", Some("ABCDCBAD"), 42),
    ("ABCDBADC", None, 24),
    ("ABCDBDAC", Some("ABCDCADB"), 44),
];

pub fn published_bound(p: &Pattern) -> Option<i64> {
    let s = p.to_string();
    PUBLISHED_BOUNDS
        .iter()
        .find(|(a, b, _)| *a == s || *b == Some(s.as_str()))
        .map(|&(_, _, v)| v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub pattern: Pattern,
    /// The reverse, when it differs and is also in the set.
    pub reverse: Option<Pattern>,
    pub bound: i64,
    pub witness: LengthAssignment,
    pub reverse_bound: Option<i64>,
    pub published: Option<i64>,
}

/// One row per pattern, its reverse folded into the same row, in set order.
pub fn bounds_table(set: &PatternSet, alpha: Rational, n: usize, cap: i64) -> Result<Vec<BoundsRow>> {
    let solved: Vec<Result<Option<OccurrenceBound>>> = set.patterns().par_iter().map(|p| max_occurrence_length(p, alpha, n, cap)).collect();
    let mut found = BTreeMap::new();
    for (p, r) in set.iter().zip(solved) {
        let b = r?.ok_or_else(|| Error::InvalidParams(format!("{p} admits no lengths below {cap}")))?;
        found.insert(p.clone(), b);
    }
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for p in set {
        if seen.contains(p) {
            continue;
        }
        let r = p.reverse();
        let reverse = (r != *p && set.contains(&r)).then_some(r);
        seen.insert(p.clone());
        if let Some(r) = &reverse {
            seen.insert(r.clone());
        }
        let b = &found[p];
        rows.push(BoundsRow {
            pattern: p.clone(),
            reverse_bound: reverse.as_ref().map(|r| found[r].bound),
            reverse,
            bound: b.bound,
            witness: b.witness.clone(),
            published: published_bound(p),
        });
    }
    Ok(rows)
}

impl BoundsRow {
    /// Agrees with the published value, and with its reverse.
    pub fn consistent(&self) -> bool {
        self.published == Some(self.bound) && self.reverse_bound.is_none_or(|r| r == self.bound)
    }
}
