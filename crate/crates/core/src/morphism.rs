//! Uniform morphisms: application, fixed points, synchronization and the
//! finite check that lifts `α⁺`-freeness of source words to `(β⁺, n)`-freeness
//! of their images.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::repetition::{
    find_violation, Control, FreenessCheck, FreenessParams, Rational, Repetition, SuffixCheck,
    Visitor, Walker,
};
use crate::word::{parse_digits, to_digits, Alphabet};

/// Shipped images of the 312-uniform morphism from six letters to four.
pub const H_DATA: &str = include_str!("../data/h.morph");

/// SHA-256 of the canonical form (see [`UniformMorphism::canonical_text`]).
pub const H_DIGEST: &str = "3289dd4d57cc9401f23dfac5ad1978e38d6bdcfc629524b3957d03e51c5a1cbe";

/// Common prefix of every image of `h`; it occurs nowhere else.
pub const H_SYNC_PREFIX: &str = "13032103101230102013";

pub const H_IMAGE_LEN: usize = 312;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformMorphism {
    source: Alphabet,
    target: Alphabet,
    images: Vec<Vec<u8>>,
}

impl UniformMorphism {
    pub fn new(images: Vec<Vec<u8>>, target: Alphabet) -> Result<Self> {
        let source = Alphabet::new(images.len())?;
        let q = images.first().map(Vec::len).unwrap_or(0);
        if q == 0 {
            return Err(Error::BadMorphism("images must be nonempty".into()));
        }
        for (a, img) in images.iter().enumerate() {
            if img.len() != q {
                return Err(Error::BadMorphism(format!(
                    "image of {a} has length {}, expected {q}",
                    img.len()
                )));
            }
            if let Some(pos) = img.iter().position(|&l| !target.contains(l)) {
                return Err(Error::BadMorphism(format!(
                    "image of {a} has letter {} at {pos}, outside an alphabet of size {}",
                    img[pos],
                    target.size()
                )));
            }
        }
        Ok(UniformMorphism { source, target, images })
    }

    pub fn q(&self) -> usize {
        self.images[0].len()
    }

    pub fn source(&self) -> Alphabet {
        self.source
    }

    pub fn target(&self) -> Alphabet {
        self.target
    }

    pub fn image(&self, letter: u8) -> &[u8] {
        &self.images[letter as usize]
    }

    pub fn images(&self) -> &[Vec<u8>] {
        &self.images
    }

    pub fn canonical_text(&self) -> String {
        self.images
            .iter()
            .enumerate()
            .map(|(a, img)| format!("{a} -> {}\n", to_digits(img)))
            .collect()
    }

    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_text().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn apply(&self, w: &[u8]) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(w.len() * self.q());
        for (position, &letter) in w.iter().enumerate() {
            if !self.source.contains(letter) {
                return Err(Error::LetterOutOfRange {
                    letter,
                    position,
                    size: self.source.size() as u8,
                });
            }
            out.extend_from_slice(self.image(letter));
        }
        Ok(out)
    }

    /// Prefix of length `len` of the fixed point starting with `seed`.
    pub fn fixed_point_prefix(&self, seed: u8, len: usize) -> Result<Vec<u8>> {
        if !self.source.contains(seed) || self.image(seed).first() != Some(&seed) {
            return Err(Error::NotSelfExtending(seed));
        }
        if self.target.size() > self.source.size() {
            return Err(Error::BadMorphism("fixed points need an endomorphism".into()));
        }
        let mut w = vec![seed];
        while w.len() < len {
            let next = self.apply(&w)?;
            if next.len() <= w.len() {
                // q = 1 and the seed maps to itself
                break;
            }
            w = next;
        }
        w.truncate(len);
        Ok(w)
    }

    /// Exhaustive synchronization test over all `f(ab)` and interior offsets.
    pub fn synchronization(&self) -> SyncOutcome {
        let q = self.q();
        let mut pair = Vec::with_capacity(2 * q);
        for a in self.source.letters() {
            for b in self.source.letters() {
                pair.clear();
                pair.extend_from_slice(self.image(a));
                pair.extend_from_slice(self.image(b));
                for c in self.source.letters() {
                    let img = self.image(c);
                    for offset in 1..q {
                        if &pair[offset..offset + q] == img {
                            return SyncOutcome::Counterexample(SyncCounterexample { a, b, c, offset });
                        }
                    }
                    // flush occurrences must match the letter there
                    if img == self.image(a) && c != a {
                        return SyncOutcome::Counterexample(SyncCounterexample { a, b, c, offset: 0 });
                    }
                }
            }
        }
        SyncOutcome::Synchronizing
    }

    pub fn is_synchronizing(&self) -> bool {
        self.synchronization() == SyncOutcome::Synchronizing
    }
}

impl FromStr for UniformMorphism {
    type Err = Error;

    /// One `LETTER -> IMAGE` line per source letter, `#` starts a comment.
    /// The target alphabet is the smallest one containing every image letter.
    fn from_str(s: &str) -> Result<Self> {
        let mut images: Vec<Option<Vec<u8>>> = Vec::new();
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (letter, image) = line
                .split_once("->")
                .ok_or_else(|| Error::parse("morphism", format!("line {}: missing '->'", lineno + 1)))?;
            let letter = parse_digits(letter)?;
            let [letter] = letter[..] else {
                return Err(Error::parse("morphism", format!("line {}: expected one letter", lineno + 1)));
            };
            let letter = letter as usize;
            if images.len() <= letter {
                images.resize(letter + 1, None);
            }
            if images[letter].is_some() {
                return Err(Error::parse("morphism", format!("line {}: letter {letter} repeated", lineno + 1)));
            }
            images[letter] = Some(parse_digits(image)?);
        }
        let images: Vec<Vec<u8>> = images
            .into_iter()
            .enumerate()
            .map(|(a, img)| img.ok_or_else(|| Error::parse("morphism", format!("no image for letter {a}"))))
            .collect::<Result<_>>()?;
        let size = images.iter().flatten().map(|&l| l as usize + 1).max().unwrap_or(1);
        UniformMorphism::new(images, Alphabet::new(size)?)
    }
}

impl fmt::Display for UniformMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncCounterexample {
    pub a: u8,
    pub b: u8,
    pub c: u8,
    /// Where `f(c)` sits inside `f(ab)`.
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SyncOutcome {
    Synchronizing,
    Counterexample(SyncCounterexample),
}

/// Structural checks the shipped `h` must pass on load.
pub fn validate_h(f: &UniformMorphism) -> Result<()> {
    if f.source().size() != 6 || f.target().size() > 4 {
        return Err(Error::BadMorphism(format!(
            "expected six letters mapped into four, got {} into {}",
            f.source().size(),
            f.target().size()
        )));
    }
    if f.q() != H_IMAGE_LEN {
        return Err(Error::BadMorphism(format!("expected {H_IMAGE_LEN}-uniform, got {}", f.q())));
    }
    let prefix = parse_digits(H_SYNC_PREFIX)?;
    for a in f.source().letters() {
        let img = f.image(a);
        if !img.starts_with(&prefix) {
            return Err(Error::BadMorphism(format!("image of {a} does not start with {H_SYNC_PREFIX}")));
        }
    }
    for a in f.source().letters() {
        for b in f.source().letters() {
            let pair = f.apply(&[a, b])?;
            if let Some(pos) = (1..pair.len() - prefix.len() + 1)
                .filter(|&i| i != f.q())
                .find(|&i| pair[i..].starts_with(&prefix))
            {
                return Err(Error::BadMorphism(format!(
                    "{H_SYNC_PREFIX} occurs at offset {pos} of the image of {a}{b}"
                )));
            }
        }
    }
    Ok(())
}

/// Parses and validates `h` from morphism file text.
pub fn load_h(text: &str) -> Result<UniformMorphism> {
    let f: UniformMorphism = text.parse()?;
    validate_h(&f)?;
    Ok(f)
}

/// The shipped `h`, validated.
pub fn h() -> UniformMorphism {
    load_h(H_DATA).expect("shipped morphism data is valid")
}

/// `0 -> 01, 1 -> 21, 2 -> 03, 3 -> 23`.
pub fn b4() -> UniformMorphism {
    UniformMorphism::new(
        vec![vec![0, 1], vec![2, 1], vec![0, 3], vec![2, 3]],
        Alphabet::new(4).expect("valid"),
    )
    .expect("valid")
}

/// Parameters of the lifting check: source words are `α⁺`-free, images must
/// be `(β⁺, n)`-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncCheckParams {
    pub alpha: Rational,
    pub beta: Rational,
    pub n: usize,
    pub q: usize,
}

impl SyncCheckParams {
    pub fn new(alpha: Rational, beta: Rational, n: usize, q: usize) -> Result<Self> {
        let one = Rational::from_integer(1);
        let two = Rational::from_integer(2);
        if !(one < alpha && alpha < beta && beta < two) {
            return Err(Error::InvalidParams(format!("need 1 < alpha < beta < 2, got {alpha}, {beta}")));
        }
        if n == 0 || q == 0 {
            return Err(Error::InvalidParams("n and q must be positive".into()));
        }
        Ok(SyncCheckParams { alpha, beta, n, q })
    }

    /// `max(2β/(β−α), 2(q−1)(2β−1)/(q(β−1)))`.
    pub fn length_bound(&self) -> Rational {
        let two = Rational::from_integer(2);
        let one = Rational::from_integer(1);
        let q = Rational::from_integer(self.q as i64);
        let first = two * self.beta / (self.beta - self.alpha);
        let second = two * (q - one) * (two * self.beta - one) / (q * (self.beta - one));
        first.max(second)
    }

    /// Longest source length that must be checked: the bound is strict.
    pub fn max_source_len(&self) -> usize {
        (self.length_bound().ceil().to_integer() - 1) as usize
    }

    pub fn source_freeness(&self) -> FreenessParams {
        FreenessParams::plus(self.alpha, 1).expect("alpha > 1")
    }

    pub fn target_freeness(&self) -> FreenessParams {
        FreenessParams::plus(self.beta, self.n).expect("beta > 1")
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RunSummary {
    lead: u32,
    inner: u32,
    trail: u32,
    full: bool,
}

fn summarize(x: &[u8], y: &[u8]) -> RunSummary {
    let lead = x.iter().zip(y).take_while(|(a, b)| a == b).count() as u32;
    if lead as usize == x.len() {
        let n = x.len() as u32;
        return RunSummary { lead: n, inner: n, trail: n, full: true };
    }
    let mut run = 0u32;
    let mut inner = 0u32;
    for (a, b) in x.iter().zip(y) {
        run = if a == b { run + 1 } else { 0 };
        inner = inner.max(run);
    }
    RunSummary { lead, inner, trail: run, full: false }
}

/// Longest run `s[i] = s[i - p]` over all images and all periods `p` not
/// divisible by `q`, or `None` when some unaligned window matches a whole
/// image (runs are then unbounded).
fn max_unaligned_run(f: &UniformMorphism) -> Option<u32> {
    let q = f.q();
    let (mut lead, mut inner, mut trail) = (0, 0, 0);
    let mut pair = Vec::with_capacity(2 * q);
    for a in f.source().letters() {
        for b in f.source().letters() {
            pair.clear();
            pair.extend_from_slice(f.image(a));
            pair.extend_from_slice(f.image(b));
            for c in f.source().letters() {
                for o in 1..q {
                    let s = summarize(f.image(c), &pair[o..o + q]);
                    if s.full {
                        return None;
                    }
                    lead = lead.max(s.lead);
                    inner = inner.max(s.inner);
                    trail = trail.max(s.trail);
                }
            }
        }
    }
    Some(inner.max(lead + trail))
}

/// Incremental `(β⁺, n)`-freeness of `f(w)` as `w` grows letter by letter.
///
/// Repetitions whose period is a multiple of `q` are tracked block by block.
/// Any other period has runs of at most `R` letters (computed exhaustively
/// over all image windows), so such a period can only be forbidden below
/// some `P`; those repetitions fit inside the image of a bounded suffix of
/// `w`, which is scanned directly and memoized.
pub struct ImageFreenessCheck<'a> {
    f: &'a UniformMorphism,
    params: FreenessParams,
    aligned: Vec<RunSummary>,
    suffix_len: Option<usize>,
    memo: Memo,
    /// `aligned_limit[k]`: smallest forbidden run at period `k * q`.
    aligned_limit: Vec<u32>,
    carries: Vec<Vec<u32>>,
    depth: usize,
    pub memo_hits: u64,
}

impl<'a> ImageFreenessCheck<'a> {
    pub fn new(f: &'a UniformMorphism, params: FreenessParams) -> Self {
        let q = f.q();
        let s = f.source().size();
        let mut aligned = vec![RunSummary::default(); s * s];
        for c in 0..s {
            for d in 0..s {
                aligned[c * s + d] = summarize(f.image(c as u8), f.image(d as u8));
            }
        }
        let suffix_len = max_unaligned_run(f).map(|run| {
            let num = *params.alpha.numer() as u64;
            let den = *params.alpha.denom() as u64;
            let max_period = (den * run as u64 / (num - den)) as usize + 1;
            (max_period + run as usize).div_ceil(q) + 1
        });
        let dense = suffix_len
            .and_then(|len| (s + 1).checked_pow(len as u32))
            .filter(|&size| size <= 1 << 22);
        ImageFreenessCheck {
            f,
            params,
            aligned,
            suffix_len,
            memo: match dense {
                Some(size) => Memo::Dense(vec![0; size]),
                None => Memo::Sparse(HashMap::new()),
            },
            aligned_limit: vec![u32::MAX],
            carries: vec![Vec::new()],
            depth: 0,
            memo_hits: 0,
        }
    }

    /// Number of trailing source letters whose image is rescanned, or `None`
    /// when the whole image is rescanned at every step.
    pub fn suffix_len(&self) -> Option<usize> {
        self.suffix_len
    }

    fn tail_violation(&self, x: &[u8]) -> bool {
        let img = self.f.apply(x).expect("source letters validated by walker");
        let start = img.len() - self.f.q();
        for p in self.params.n..img.len() {
            let mut run = 0usize;
            for i in p..img.len() {
                if img[i] == img[i - p] {
                    run += 1;
                    if i >= start && self.params.violates(p, run) {
                        return true;
                    }
                } else {
                    run = 0;
                }
            }
        }
        false
    }
}

impl SuffixCheck for ImageFreenessCheck<'_> {
    fn push(&mut self, w: &[u8]) -> bool {
        let m = w.len() - 1;
        debug_assert_eq!(m, self.depth);
        let q = self.f.q();
        let s = self.f.source().size();
        if self.carries.len() <= m + 1 {
            self.carries.push(Vec::new());
        }
        let (done, rest) = self.carries.split_at_mut(m + 1);
        let prev = &done[m];
        let cur = &mut rest[0];
        cur.clear();
        cur.resize(m + 1, 0);
        while self.aligned_limit.len() <= m {
            let p = self.aligned_limit.len() * q;
            let lim = (0..=p as u32 + 1).find(|&r| self.params.violates(p, r as usize));
            self.aligned_limit.push(lim.unwrap_or(u32::MAX));
        }
        let c = w[m] as usize;
        for k in 1..=m {
            let d = w[m - k] as usize;
            let carry = prev.get(k).copied().unwrap_or(0);
            let sum = self.aligned[c * s + d];
            let (best, next) = if sum.full {
                (carry + q as u32, carry + q as u32)
            } else {
                ((carry + sum.lead).max(sum.inner), sum.trail)
            };
            if best >= self.aligned_limit[k] {
                return false;
            }
            cur[k] = next;
        }
        let bad = match self.suffix_len {
            Some(len) => {
                let key = &w[w.len().saturating_sub(len)..];
                match self.memo.get(key, s) {
                    Some(bad) => {
                        self.memo_hits += 1;
                        bad
                    }
                    None => {
                        let bad = self.tail_violation(key);
                        self.memo.insert(key, s, bad);
                        bad
                    }
                }
            }
            None => self.tail_violation(w),
        };
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

/// Verdicts keyed by source suffix; dense when the key space is small.
enum Memo {
    Dense(Vec<u8>),
    Sparse(HashMap<Vec<u8>, bool>),
}

impl Memo {
    fn index(key: &[u8], s: usize) -> usize {
        key.iter().fold(0, |acc, &l| acc * (s + 1) + l as usize + 1)
    }

    fn get(&self, key: &[u8], s: usize) -> Option<bool> {
        match self {
            Memo::Dense(table) => match table[Self::index(key, s)] {
                0 => None,
                v => Some(v == 2),
            },
            Memo::Sparse(map) => map.get(key).copied(),
        }
    }

    fn insert(&mut self, key: &[u8], s: usize, bad: bool) {
        match self {
            Memo::Dense(table) => table[Self::index(key, s)] = 1 + bad as u8,
            Memo::Sparse(map) => {
                map.insert(key.to_vec(), bad);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftViolation {
    pub source: Vec<u8>,
    pub repetition: Repetition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncLemmaReport {
    pub synchronizing: bool,
    pub sync_counterexample: Option<SyncCounterexample>,
    pub length_bound: Rational,
    pub max_source_len: usize,
    /// Source words checked, indexed by length (index 0 is the empty word).
    pub words_by_length: Vec<u64>,
    pub words_checked: u64,
    pub violation: Option<LiftViolation>,
}

impl SyncLemmaReport {
    pub fn passed(&self) -> bool {
        self.synchronizing && self.violation.is_none()
    }
}

struct LiftVisitor<'a> {
    check: ImageFreenessCheck<'a>,
    counts: Vec<u64>,
    violation: Option<Vec<u8>>,
}

impl Visitor for LiftVisitor<'_> {
    fn enter(&mut self, w: &[u8]) -> Control {
        self.counts[w.len()] += 1;
        if self.check.push(w) {
            Control::Descend
        } else {
            self.violation = Some(w.to_vec());
            Control::Stop
        }
    }

    fn leave(&mut self, _w: &[u8]) {
        self.check.pop();
    }
}

/// Checks that `f(w)` is `(β⁺, n)`-free for every `α⁺`-free `w` shorter than
/// the length bound. Source words come from the backtracking walker, split
/// on their first letter.
pub fn check_sync_lemma(f: &UniformMorphism, params: &SyncCheckParams, budget: u64) -> Result<SyncLemmaReport> {
    if params.q != f.q() {
        return Err(Error::InvalidParams(format!("params for q = {}, morphism has q = {}", params.q, f.q())));
    }
    let max_len = params.max_source_len();
    let mut report = SyncLemmaReport {
        synchronizing: true,
        sync_counterexample: None,
        length_bound: params.length_bound(),
        max_source_len: max_len,
        words_by_length: vec![0; max_len + 1],
        words_checked: 0,
        violation: None,
    };
    if let SyncOutcome::Counterexample(cx) = f.synchronization() {
        report.synchronizing = false;
        report.sync_counterexample = Some(cx);
        return Ok(report);
    }
    report.words_by_length[0] = 1;
    let source = params.source_freeness();
    let target = params.target_freeness();
    let parts: Vec<(Vec<u64>, Option<Vec<u8>>)> = f
        .source()
        .letters()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|first| {
            let mut walker = Walker::new(f.source().size(), max_len).budget(budget);
            walker.prefix = vec![first];
            let mut visitor = LiftVisitor {
                check: ImageFreenessCheck::new(f, target),
                counts: vec![0; max_len + 1],
                violation: None,
            };
            walker.run(&mut FreenessCheck::new(source), &mut visitor)?;
            Ok((visitor.counts, visitor.violation))
        })
        .collect::<Result<_>>()?;
    for (counts, violation) in parts {
        for (total, c) in report.words_by_length.iter_mut().zip(counts) {
            *total += c;
        }
        if report.violation.is_none() {
            if let Some(source) = violation {
                let img = f.apply(&source)?;
                let repetition = find_violation(&img, &target).expect("tracker flagged a genuine repetition");
                report.violation = Some(LiftViolation { source, repetition });
            }
        }
    }
    report.words_checked = report.words_by_length.iter().sum();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repetition::{parse_rational, FnVisitor, NoCheck};

    #[test]
    fn h_loads_and_digest_matches() {
        let h = h();
        assert_eq!(h.q(), 312);
        assert_eq!(h.digest(), H_DIGEST);
        let distinct: std::collections::BTreeSet<_> = h.images().iter().collect();
        assert_eq!(distinct.len(), 6);
    }

    #[test]
    fn application() {
        assert_eq!(b4().apply(&[0]).unwrap(), vec![0, 1]);
        assert_eq!(h().apply(&[]).unwrap(), Vec::<u8>::new());
        let img = h().apply(&[0]).unwrap();
        assert!(to_digits(&img).starts_with("1303210310123010201321"));
        assert!(b4().apply(&[4]).is_err());
    }

    #[test]
    fn b4_fixed_point() {
        let b = b4();
        assert_eq!(to_digits(&b.fixed_point_prefix(0, 20).unwrap()), "01210321012303210121");
        assert_eq!(b.fixed_point_prefix(0, 1).unwrap(), vec![0]);
        assert_eq!(b.fixed_point_prefix(1, 4), Err(Error::NotSelfExtending(1)));
    }

    #[test]
    fn synchronization() {
        assert!(h().is_synchronizing());
        assert!(b4().is_synchronizing());
        let bad = UniformMorphism::new(vec![vec![0, 0], vec![0, 1]], Alphabet::new(2).unwrap()).unwrap();
        assert_eq!(
            bad.synchronization(),
            SyncOutcome::Counterexample(SyncCounterexample { a: 0, b: 0, c: 0, offset: 1 })
        );
    }

    #[test]
    fn length_bound_for_h() {
        let p = SyncCheckParams::new(parse_rational("6/5").unwrap(), parse_rational("5/4").unwrap(), 9, 312).unwrap();
        assert_eq!(p.length_bound(), Rational::from_integer(50));
        assert_eq!(p.max_source_len(), 49);
        let second = Rational::new(2 * 311 * 3, 312 * 2) / Rational::new(1, 4);
        assert!(second < Rational::from_integer(12));
        assert!(SyncCheckParams::new(parse_rational("5/4").unwrap(), parse_rational("6/5").unwrap(), 9, 312).is_err());
    }

    #[test]
    fn file_format() {
        let f: UniformMorphism = "# b4\n0 -> 01\n1 -> 21 # trailing\n\n2 -> 03\n3 -> 23\n".parse().unwrap();
        assert_eq!(f, b4());
        assert!("0 -> 01\n0 -> 21\n".parse::<UniformMorphism>().is_err());
        assert!("0 -> 01\n1 -> 2\n".parse::<UniformMorphism>().is_err());
        assert!("0 01\n".parse::<UniformMorphism>().is_err());
        assert!("0 -> 01\n2 -> 21\n".parse::<UniformMorphism>().is_err());
        assert_eq!(f.to_string().parse::<UniformMorphism>().unwrap(), f);
    }

    #[test]
    fn loader_rejects_broken_prefix() {
        let mut text = h().canonical_text();
        // letter 3 image starts at byte 5 of its line; flip its second letter
        let line3 = text.find("3 -> ").unwrap() + 6;
        let old = text.as_bytes()[line3];
        let new = if old == b'0' { "1" } else { "0" };
        text.replace_range(line3..line3 + 1, new);
        assert!(matches!(load_h(&text), Err(Error::BadMorphism(_))));
    }

    /// Walks with the tracker as the pruning check; every accepted word must
    /// have a free image, and the number accepted must equal the brute-force
    /// count (free images are prefix-closed, so that makes the sets equal).
    fn tracker_agrees(f: &UniformMorphism, target: FreenessParams, len: usize) {
        let mut accepted = 0u64;
        Walker::new(f.source().size(), len)
            .run(
                &mut ImageFreenessCheck::new(f, target),
                &mut FnVisitor(|w: &[u8]| {
                    assert!(find_violation(&f.apply(w).unwrap(), &target).is_none(), "{w:?}");
                    accepted += 1;
                    Control::Descend
                }),
            )
            .unwrap();
        let mut brute = 0u64;
        Walker::new(f.source().size(), len)
            .run(
                &mut NoCheck,
                &mut FnVisitor(|w: &[u8]| {
                    if find_violation(&f.apply(w).unwrap(), &target).is_none() {
                        brute += 1;
                    }
                    Control::Descend
                }),
            )
            .unwrap();
        assert_eq!(accepted, brute, "{target}");
    }

    #[test]
    fn tracker_matches_brute_force_on_b4() {
        let b = b4();
        for spec in ["3/2+,1", "7/4+,2", "5/4+,3", "6/5+,1"] {
            tracker_agrees(&b, spec.parse().unwrap(), 7);
        }
    }

    #[test]
    fn tracker_matches_brute_force_on_small_sync_morphism() {
        let f: UniformMorphism = "0 -> 0102\n1 -> 0121\n2 -> 0212\n".parse().unwrap();
        assert!(f.is_synchronizing());
        let check = ImageFreenessCheck::new(&f, "5/4+,2".parse().unwrap());
        assert!(check.suffix_len().is_some());
        tracker_agrees(&f, "5/4+,2".parse().unwrap(), 6);
        tracker_agrees(&f, "3/2+,1".parse().unwrap(), 6);
    }

    #[test]
    fn tracker_without_run_bound_falls_back() {
        let f: UniformMorphism = "0 -> 00\n1 -> 01\n".parse().unwrap();
        let check = ImageFreenessCheck::new(&f, "5/4+,1".parse().unwrap());
        assert_eq!(check.suffix_len(), None);
        tracker_agrees(&f, "5/4+,1".parse().unwrap(), 6);
    }

    #[test]
    fn squared_image_fails_lift_check() {
        let f: UniformMorphism = "0 -> 0012\n1 -> 1201\n2 -> 2010\n".parse().unwrap();
        let p = SyncCheckParams::new(parse_rational("6/5").unwrap(), parse_rational("5/4").unwrap(), 1, 4).unwrap();
        let report = check_sync_lemma(&f, &p, 1_000_000).unwrap();
        assert!(!report.passed());
    }
}
