//! Repetitions, `(α⁺, n)`-freeness and backtracking over free words.
//!
//! A repetition of period `p` and length `p + r` is a run of `r` positions
//! `i` with `w[i] = w[i - p]`. Exponents are compared exactly by
//! cross-multiplication; nothing here touches floating point.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: i64 = num
        .parse()
        .map_err(|_| Error::parse("rational", format!("bad numerator in {s:?}")))?;
    let den: i64 = den
        .parse()
        .map_err(|_| Error::parse("rational", format!("bad denominator in {s:?}")))?;
    if den <= 0 {
        return Err(Error::parse("rational", format!("denominator must be positive in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repetition {
    pub offset: usize,
    pub period: usize,
    pub length: usize,
}

impl Repetition {
    pub fn exponent(&self) -> Rational {
        Rational::new(self.length as i64, self.period as i64)
    }
}

impl fmt::Display for Repetition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "offset {} period {} length {} exponent {}",
            self.offset,
            self.period,
            self.length,
            self.exponent()
        )
    }
}

/// Forbids repetitions of period at least `n` whose exponent is above `alpha`
/// (or at least `alpha` when `inclusive`, which is how square-freeness reads:
/// exponent 2 itself is forbidden).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreenessParams {
    pub alpha: Rational,
    pub n: usize,
    pub inclusive: bool,
}

impl FreenessParams {
    /// `(α⁺, n)`-freeness.
    pub fn plus(alpha: Rational, n: usize) -> Result<Self> {
        Self::build(alpha, n, false)
    }

    pub fn inclusive(alpha: Rational, n: usize) -> Result<Self> {
        Self::build(alpha, n, true)
    }

    pub fn square_free() -> Self {
        FreenessParams {
            alpha: Rational::from_integer(2),
            n: 1,
            inclusive: true,
        }
    }

    fn build(alpha: Rational, n: usize, inclusive: bool) -> Result<Self> {
        if alpha <= Rational::from_integer(1) {
            return Err(Error::InvalidParams(format!("alpha must exceed 1, got {alpha}")));
        }
        if n == 0 {
            return Err(Error::InvalidParams("minimum period must be positive".into()));
        }
        Ok(FreenessParams { alpha, n, inclusive })
    }

    /// Whether a run of `run` matching positions at period `period` forms a
    /// forbidden repetition.
    #[inline]
    pub fn violates(&self, period: usize, run: usize) -> bool {
        if period < self.n {
            return false;
        }
        let num = *self.alpha.numer() as u128;
        let den = *self.alpha.denom() as u128;
        let lhs = den * (period + run) as u128;
        let rhs = num * period as u128;
        if self.inclusive {
            lhs >= rhs
        } else {
            lhs > rhs
        }
    }
}

impl fmt::Display for FreenessParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plus = if self.inclusive { "" } else { "+" };
        write!(f, "({}{plus}, {})", self.alpha, self.n)
    }
}

impl FromStr for FreenessParams {
    type Err = Error;

    /// Accepts `5/4+,9`, `2,1` or `5/4+` (period defaults to 1). A trailing
    /// `+` marks the strict threshold.
    fn from_str(s: &str) -> Result<Self> {
        let (alpha, n) = match s.split_once(',') {
            Some((a, n)) => (
                a.trim(),
                n.trim()
                    .parse()
                    .map_err(|_| Error::parse("freeness", format!("bad period in {s:?}")))?,
            ),
            None => (s.trim(), 1),
        };
        match alpha.strip_suffix('+') {
            Some(a) => Self::plus(parse_rational(a)?, n),
            None => Self::inclusive(parse_rational(alpha)?, n),
        }
    }
}

/// Finds a forbidden repetition anywhere in `w`, reporting the longest run
/// for the smallest offending period.
pub fn find_violation(w: &[u8], params: &FreenessParams) -> Option<Repetition> {
    for period in params.n..w.len() {
        let mut run = 0;
        let mut best: Option<(usize, usize)> = None;
        for i in period..w.len() {
            if w[i] == w[i - period] {
                run += 1;
                if params.violates(period, run) && best.is_none_or(|(_, r)| run > r) {
                    best = Some((i, run));
                }
            } else {
                run = 0;
            }
        }
        if let Some((end, run)) = best {
            return Some(Repetition {
                offset: end + 1 - run - period,
                period,
                length: period + run,
            });
        }
    }
    None
}

pub fn is_free(w: &[u8], params: &FreenessParams) -> bool {
    find_violation(w, params).is_none()
}

pub fn is_square_free(w: &[u8]) -> bool {
    is_free(w, &FreenessParams::square_free())
}

/// Incremental extension filter for the backtracking walker.
///
/// `push` sees the word with its new last letter. On `false` the check must
/// leave its state untouched; on `true` the walker later calls `pop`.
pub trait SuffixCheck {
    fn push(&mut self, w: &[u8]) -> bool;
    fn pop(&mut self);
}

/// Accepts everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCheck;

impl SuffixCheck for NoCheck {
    fn push(&mut self, _w: &[u8]) -> bool {
        true
    }
    fn pop(&mut self) {}
}

impl<A: SuffixCheck, B: SuffixCheck> SuffixCheck for (A, B) {
    fn push(&mut self, w: &[u8]) -> bool {
        if !self.0.push(w) {
            return false;
        }
        if !self.1.push(w) {
            self.0.pop();
            return false;
        }
        true
    }

    fn pop(&mut self) {
        self.1.pop();
        self.0.pop();
    }
}

/// Rejects extensions that create a forbidden repetition ending at the last
/// letter. Keeps, per prefix, the run length of every period at its end.
#[derive(Debug, Clone)]
pub struct FreenessCheck {
    params: FreenessParams,
    runs: Vec<Vec<u32>>,
    /// `limit[p]`: smallest forbidden run at period `p`.
    limit: Vec<u32>,
    depth: usize,
}

impl FreenessCheck {
    pub fn new(params: FreenessParams) -> Self {
        FreenessCheck {
            params,
            runs: vec![Vec::new()],
            limit: vec![u32::MAX],
            depth: 0,
        }
    }

    fn grow_limits(&mut self, upto: usize) {
        while self.limit.len() <= upto {
            let p = self.limit.len();
            let lim = if p < self.params.n {
                u32::MAX
            } else {
                (0..).find(|&r| self.params.violates(p, r as usize)).unwrap_or(u32::MAX)
            };
            self.limit.push(lim);
        }
    }
}

impl SuffixCheck for FreenessCheck {
    fn push(&mut self, w: &[u8]) -> bool {
        let i = w.len() - 1;
        debug_assert_eq!(i, self.depth, "push out of step with walker");
        self.grow_limits(i);
        if self.runs.len() <= i + 1 {
            self.runs.push(Vec::new());
        }
        let (done, rest) = self.runs.split_at_mut(i + 1);
        let prev = &done[i];
        let cur = &mut rest[0];
        cur.clear();
        cur.resize(i + 1, 0);
        let last = w[i];
        // most rejections come from short periods; bail out early on those
        let short = i.min(16);
        for p in 1..short {
            let run = (w[i - p] == last) as u32 * (prev[p] + 1);
            if run >= self.limit[p] {
                return false;
            }
            cur[p] = run;
        }
        let mut bad = false;
        // prev has length i, so period i starts a fresh run
        for p in short.max(1)..i {
            let run = (w[i - p] == last) as u32 * (prev[p] + 1);
            cur[p] = run;
            bad |= run >= self.limit[p];
        }
        if i >= 1 {
            let run = (w[0] == last) as u32;
            cur[i] = run;
            bad |= run >= self.limit[i];
        }
        if bad {
            return false;
        }
        self.depth += 1;
        true
    }

    fn pop(&mut self) {
        self.depth -= 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Descend,
    Skip,
    Stop,
}

pub trait Visitor {
    fn enter(&mut self, w: &[u8]) -> Control;
    fn leave(&mut self, _w: &[u8]) {}
}

pub struct FnVisitor<F>(pub F);

impl<F: FnMut(&[u8]) -> Control> Visitor for FnVisitor<F> {
    fn enter(&mut self, w: &[u8]) -> Control {
        (self.0)(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WalkStats {
    pub nodes: u64,
    pub max_depth: usize,
    pub stopped: bool,
}

/// Depth-first backtracking over words of length up to `max_len`, extending
/// in lexicographic order and pruning on `check`.
#[derive(Debug, Clone)]
pub struct Walker {
    pub q: usize,
    pub max_len: usize,
    pub budget: u64,
    /// Only extend with letters at most one above the largest letter so far.
    pub first_letter_symmetry: bool,
    /// Fixed prefix of letters the walk starts from (already checked).
    pub prefix: Vec<u8>,
}

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

impl Walker {
    pub fn new(q: usize, max_len: usize) -> Self {
        Walker {
            q,
            max_len,
            budget: DEFAULT_BUDGET,
            first_letter_symmetry: false,
            prefix: Vec::new(),
        }
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn symmetric(mut self, on: bool) -> Self {
        self.first_letter_symmetry = on;
        self
    }

    pub fn run<C: SuffixCheck, V: Visitor>(&self, check: &mut C, visitor: &mut V) -> Result<WalkStats> {
        let mut stats = WalkStats::default();
        let mut word = Vec::with_capacity(self.max_len);
        for &l in &self.prefix {
            word.push(l);
            if !check.push(&word) {
                return Ok(stats);
            }
            stats.nodes += 1;
            stats.max_depth = word.len();
            match visitor.enter(&word) {
                Control::Descend => {}
                Control::Skip => return Ok(stats),
                Control::Stop => {
                    stats.stopped = true;
                    return Ok(stats);
                }
            }
        }
        self.descend(&mut word, check, visitor, &mut stats)?;
        Ok(stats)
    }

    fn descend<C: SuffixCheck, V: Visitor>(
        &self,
        word: &mut Vec<u8>,
        check: &mut C,
        visitor: &mut V,
        stats: &mut WalkStats,
    ) -> Result<()> {
        if word.len() >= self.max_len {
            return Ok(());
        }
        let top = if self.first_letter_symmetry {
            word.iter().map(|&l| l as usize + 2).max().unwrap_or(1).min(self.q)
        } else {
            self.q
        };
        for letter in 0..top as u8 {
            word.push(letter);
            if check.push(word) {
                stats.nodes += 1;
                if stats.nodes > self.budget {
                    return Err(Error::BudgetExceeded(self.budget));
                }
                stats.max_depth = stats.max_depth.max(word.len());
                match visitor.enter(word) {
                    Control::Descend => self.descend(word, check, visitor, stats)?,
                    Control::Skip => {}
                    Control::Stop => stats.stopped = true,
                }
                if !stats.stopped {
                    visitor.leave(word);
                }
                check.pop();
            }
            word.pop();
            if stats.stopped {
                return Ok(());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Count,
    Stream,
    Longest,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(Mode::Count),
            "stream" => Ok(Mode::Stream),
            "longest" => Ok(Mode::Longest),
            _ => Err(Error::parse("mode", format!("expected count|stream|longest, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Enumeration {
    /// Number of free words of exactly the requested length.
    Count(u64),
    Words(Vec<Vec<u8>>),
    /// Longest free word length; `reached_limit` means the tree survived to
    /// the requested depth, so the true maximum may be larger.
    Longest { length: usize, reached_limit: bool },
}

/// Backtracking enumeration of `(α⁺, n)`-free words of length `len` over
/// `0..q`. Count mode splits the tree on the first letter and sums.
pub fn enumerate_free(
    q: usize,
    params: &FreenessParams,
    len: usize,
    mode: Mode,
    budget: u64,
) -> Result<Enumeration> {
    match mode {
        Mode::Count => {
            if len == 0 {
                return Ok(Enumeration::Count(1));
            }
            let per_letter: Result<Vec<u64>> = (0..q as u8)
                .into_par_iter()
                .map(|first| {
                    let mut walker = Walker::new(q, len).budget(budget);
                    walker.prefix = vec![first];
                    let mut count = 0u64;
                    walker.run(
                        &mut FreenessCheck::new(*params),
                        &mut FnVisitor(|w: &[u8]| {
                            if w.len() == len {
                                count += 1;
                            }
                            Control::Descend
                        }),
                    )?;
                    Ok(count)
                })
                .collect();
            Ok(Enumeration::Count(per_letter?.iter().sum()))
        }
        Mode::Stream => {
            let mut words = Vec::new();
            if len == 0 {
                words.push(Vec::new());
            }
            Walker::new(q, len).budget(budget).run(
                &mut FreenessCheck::new(*params),
                &mut FnVisitor(|w: &[u8]| {
                    if w.len() == len {
                        words.push(w.to_vec());
                    }
                    Control::Descend
                }),
            )?;
            Ok(Enumeration::Words(words))
        }
        Mode::Longest => {
            let stats = Walker::new(q, len).budget(budget).run(
                &mut FreenessCheck::new(*params),
                &mut FnVisitor(|w: &[u8]| {
                    if w.len() == len {
                        Control::Stop
                    } else {
                        Control::Descend
                    }
                }),
            )?;
            Ok(Enumeration::Longest {
                length: stats.max_depth,
                reached_limit: stats.max_depth >= len,
            })
        }
    }
}
