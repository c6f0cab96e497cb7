//! Cut numbers of tangrams.
//!
//! Two independent routes: [`cut_number_oracle`] cuts the word literally and
//! tries every split of the pieces into two copies and every order within a
//! copy; [`cut_number_via_patterns`] asks whether the word is exactly an
//! image of a pattern over at most `k` variables, each occurring twice,
//! whose own cut number is at most `k`. The last condition matters: `AABCCBDD`
//! has four variables but cut number five, and so does its image
//! `333120203111`.
//! Pieces are never reversed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repetition::SuffixCheck;
use crate::pattern::{exact_match, exactly_doubled_patterns, for_each_occurrence_at, generate_sk, Pattern, PatternSet, VariableAssignment};
use crate::word::{is_tangram, letter_counts, to_digits};

/// Longest word the brute-force oracle accepts.
pub const ORACLE_MAX_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutCertificate {
    /// Interior cut positions, ascending.
    pub cuts: Vec<usize>,
    /// Piece indices forming the first copy, in arrangement order.
    pub copy1: Vec<usize>,
    pub copy2: Vec<usize>,
    pub common: Vec<u8>,
}

impl CutCertificate {
    pub fn cut_count(&self) -> usize {
        self.cuts.len()
    }

    pub fn pieces<'w>(&self, w: &'w [u8]) -> Vec<&'w [u8]> {
        split_at_cuts(w, &self.cuts)
    }

    /// Replays the certificate against `w`.
    pub fn validate(&self, w: &[u8]) -> bool {
        if self.cuts.windows(2).any(|c| c[0] >= c[1])
            || self.cuts.first().is_some_and(|&c| c == 0)
            || self.cuts.last().is_some_and(|&c| c >= w.len())
        {
            return false;
        }
        let pieces = self.pieces(w);
        let mut used: Vec<usize> = self.copy1.iter().chain(&self.copy2).copied().collect();
        used.sort_unstable();
        if used != (0..pieces.len()).collect::<Vec<_>>() {
            return false;
        }
        let concat = |idx: &[usize]| -> Vec<u8> { idx.iter().flat_map(|&i| pieces[i].iter().copied()).collect() };
        concat(&self.copy1) == self.common && concat(&self.copy2) == self.common
    }

    pub fn render(&self, w: &[u8]) -> String {
        let pieces = self.pieces(w);
        let join = |idx: &[usize]| idx.iter().map(|&i| to_digits(pieces[i])).collect::<Vec<_>>().join("|");
        let all = pieces.iter().map(|p| to_digits(p)).collect::<Vec<_>>().join("|");
        format!("{all}  copy1={}, copy2={}", join(&self.copy1), join(&self.copy2))
    }
}

fn split_at_cuts<'w>(w: &'w [u8], cuts: &[usize]) -> Vec<&'w [u8]> {
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(0);
    bounds.extend_from_slice(cuts);
    bounds.push(w.len());
    bounds.windows(2).map(|b| &w[b[0]..b[1]]).collect()
}

/// Orders of `group` (piece indices) and of `rest` giving equal words.
fn arrange(pieces: &[&[u8]], group: &[usize], rest: &[usize]) -> Option<(Vec<usize>, Vec<usize>, Vec<u8>)> {
    fn permute(pieces: &[&[u8]], left: &mut Vec<usize>, order: &mut Vec<usize>, rest: &[usize]) -> Option<(Vec<usize>, Vec<u8>)> {
        if left.is_empty() {
            let u: Vec<u8> = order.iter().flat_map(|&i| pieces[i].iter().copied()).collect();
            let mut used = vec![false; rest.len()];
            let mut tiling = Vec::new();
            return tile(pieces, rest, &u, 0, &mut used, &mut tiling).then_some((tiling, u));
        }
        let mut tried: Vec<&[u8]> = Vec::new();
        for k in 0..left.len() {
            let i = left[k];
            // equal pieces give equal arrangements
            if tried.contains(&pieces[i]) {
                continue;
            }
            tried.push(pieces[i]);
            left.remove(k);
            order.push(i);
            let hit = permute(pieces, left, order, rest);
            order.pop();
            left.insert(k, i);
            if hit.is_some() {
                return hit;
            }
        }
        None
    }

    fn tile(pieces: &[&[u8]], rest: &[usize], u: &[u8], pos: usize, used: &mut [bool], out: &mut Vec<usize>) -> bool {
        if pos == u.len() {
            return used.iter().all(|&b| b);
        }
        for k in 0..rest.len() {
            let p = pieces[rest[k]];
            if !used[k] && u[pos..].starts_with(p) {
                used[k] = true;
                out.push(rest[k]);
                if tile(pieces, rest, u, pos + p.len(), used, out) {
                    return true;
                }
                out.pop();
                used[k] = false;
            }
        }
        false
    }

    let mut left = group.to_vec();
    let (tiling, u) = permute(pieces, &mut left, &mut Vec::new(), rest)?;
    Some((first_order(pieces, group, &u), tiling, u))
}

/// Recovers the order of `group` spelling `u`.
fn first_order(pieces: &[&[u8]], group: &[usize], u: &[u8]) -> Vec<usize> {
    fn go(pieces: &[&[u8]], group: &[usize], u: &[u8], pos: usize, used: &mut [bool], out: &mut Vec<usize>) -> bool {
        if pos == u.len() {
            return true;
        }
        for k in 0..group.len() {
            let p = pieces[group[k]];
            if !used[k] && u[pos..].starts_with(p) {
                used[k] = true;
                out.push(group[k]);
                if go(pieces, group, u, pos + p.len(), used, out) {
                    return true;
                }
                out.pop();
                used[k] = false;
            }
        }
        false
    }
    let mut out = Vec::new();
    go(pieces, group, u, 0, &mut vec![false; group.len()], &mut out);
    out
}

fn certificate_with_cuts(w: &[u8], cuts: &[usize]) -> Option<CutCertificate> {
    let pieces = split_at_cuts(w, cuts);
    let half = w.len() / 2;
    let n = pieces.len();
    let target = letter_counts(w);
    // piece 0 always sits in the first copy
    for mask in 0u32..(1 << (n - 1)) {
        let in_first = |i: usize| i == 0 || mask & (1 << (i - 1)) == 0;
        let group: Vec<usize> = (0..n).filter(|&i| in_first(i)).collect();
        let rest: Vec<usize> = (0..n).filter(|&i| !in_first(i)).collect();
        if rest.is_empty() || group.iter().map(|&i| pieces[i].len()).sum::<usize>() != half {
            continue;
        }
        let joined: Vec<u8> = group.iter().flat_map(|&i| pieces[i].iter().copied()).collect();
        let counts = letter_counts(&joined);
        if target.iter().any(|(l, c)| counts.get(l) * 2 != c) {
            continue;
        }
        if let Some((copy1, copy2, common)) = arrange(&pieces, &group, &rest) {
            return Some(CutCertificate {
                cuts: cuts.to_vec(),
                copy1,
                copy2,
                common,
            });
        }
    }
    None
}

fn combinations(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if cur.len() == k {
        return f(cur);
    }
    for c in start..n {
        if n - c < k - cur.len() {
            break;
        }
        cur.push(c);
        let go_on = combinations(n, k, c + 1, cur, f);
        cur.pop();
        if !go_on {
            return false;
        }
    }
    true
}

/// Least number of cuts `k ≤ max_k` whose pieces split into two identical
/// words, with the first certificate found (cut sets in lexicographic order).
pub fn cut_number_oracle(w: &[u8], max_k: usize) -> Result<Option<(usize, CutCertificate)>> {
    if w.len() > ORACLE_MAX_LEN {
        return Err(Error::WordTooLong { len: w.len(), cap: ORACLE_MAX_LEN });
    }
    if w.is_empty() || !is_tangram(w) {
        return Ok(None);
    }
    for k in 1..=max_k.min(w.len() - 1) {
        let mut hit = None;
        // positions 1..len, shifted from 0..len-1
        combinations(w.len() - 1, k, 0, &mut Vec::with_capacity(k), &mut |c| {
            let cuts: Vec<usize> = c.iter().map(|&x| x + 1).collect();
            hit = certificate_with_cuts(w, &cuts);
            hit.is_none()
        });
        if let Some(cert) = hit {
            return Ok(Some((k, cert)));
        }
    }
    Ok(None)
}

/// A pattern with at most `k` variables, each exactly twice and with cut
/// number at most `k`, of which `w` is exactly an image. Cutting `w` at the
/// images of the pattern's cuts then gives `w` a cut number of at most `k`.
/// Patterns longer than the oracle cap (more than eight variables) are skipped.
pub fn k_tangram_pattern(w: &[u8], k: usize) -> Option<(Pattern, VariableAssignment)> {
    if w.is_empty() {
        return None;
    }
    (1..=k.min(w.len() / 2).min(ORACLE_MAX_LEN / 2)).find_map(|j| {
        doubled_patterns_with_cuts(j)
            .iter()
            .filter(|(_, c)| *c <= k)
            .find_map(|(p, _)| exact_match(p, w).map(|a| (p.clone(), a)))
    })
}

type PatternCuts = Arc<Vec<(Pattern, usize)>>;

/// Exactly doubled patterns over `j` variables with their own cut numbers,
/// computed once per `j`.
fn doubled_patterns_with_cuts(j: usize) -> PatternCuts {
    static CACHE: OnceLock<Mutex<BTreeMap<usize, PatternCuts>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&j) {
        return hit.clone();
    }
    let list: PatternCuts = Arc::new(
        exactly_doubled_patterns(j)
            .into_iter()
            .map(|p| {
                let c = cut_number_oracle(p.vars(), 2 * j).ok().flatten().map_or(usize::MAX, |(c, _)| c);
                (p, c)
            })
            .collect(),
    );
    cache.lock().unwrap().entry(j).or_insert(list).clone()
}

#[cfg(test)]
fn pattern_cut_at_most(p: &Pattern, k: usize) -> bool {
    matches!(cut_number_oracle(p.vars(), k), Ok(Some((c, _))) if c <= k)
}

pub fn cut_number_via_patterns(w: &[u8], k: usize) -> bool {
    k_tangram_pattern(w, k).is_some()
}

/// Factors of `w` that are images of some pattern in `sk` (each a tangram of
/// cut number at most `k`), as sorted `(offset, length)` pairs. `max_len`
/// bounds the factor length.
pub fn scan_k_tangram_factors_with(w: &[u8], sk: &PatternSet, max_len: Option<usize>) -> Vec<(usize, usize)> {
    let mut found = BTreeSet::new();
    for p in sk {
        let cap = max_len.map(|m| m / 2);
        for offset in 0..w.len() {
            for_each_occurrence_at(p.vars(), w, offset, cap, None, &mut |_, len| {
                if max_len.is_none_or(|m| len <= m) {
                    found.insert((offset, len));
                }
                true
            });
        }
    }
    found.into_iter().collect()
}

pub fn scan_k_tangram_factors(w: &[u8], k: usize, max_len: Option<usize>) -> Vec<(usize, usize)> {
    scan_k_tangram_factors_with(w, &generate_sk(k), max_len)
}

/// Walker filter rejecting words that end in an image of a pattern from the
/// set. Only tangram suffixes can be such images, so suffixes are first
/// screened by letter parity.
#[derive(Debug, Clone)]
pub struct TangramSuffixCheck {
    patterns: PatternSet,
    /// Parity mask of each prefix, `masks[i]` for `w[..i]`.
    masks: Vec<u16>,
}

impl TangramSuffixCheck {
    pub fn new(patterns: PatternSet) -> Self {
        TangramSuffixCheck { patterns, masks: vec![0] }
    }

    /// An image of some pattern ending at the last letter of `w`.
    pub fn find_suffix(&self, w: &[u8], mask: u16) -> Option<(usize, Pattern, VariableAssignment)> {
        let n = w.len();
        (0..n.saturating_sub(1)).rev().find_map(|i| {
            if self.masks[i] != mask {
                return None;
            }
            let tail = &w[i..];
            self.patterns
                .iter()
                .filter(|p| p.len() <= tail.len())
                .find_map(|p| exact_match(p, tail).map(|a| (i, p.clone(), a)))
        })
    }
}

impl SuffixCheck for TangramSuffixCheck {
    fn push(&mut self, w: &[u8]) -> bool {
        debug_assert_eq!(self.masks.len(), w.len());
        let mask = self.masks[w.len() - 1] ^ (1 << w[w.len() - 1]);
        if self.find_suffix(w, mask).is_some() {
            return false;
        }
        self.masks.push(mask);
        true
    }

    fn pop(&mut self) {
        self.masks.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangramClassification {
    pub word: Vec<u8>,
    pub cut_number: Option<usize>,
    pub certificate: Option<CutCertificate>,
}

pub fn classify(w: &[u8], max_k: usize) -> Result<TangramClassification> {
    let hit = cut_number_oracle(w, max_k)?;
    Ok(TangramClassification {
        word: w.to_vec(),
        cut_number: hit.as_ref().map(|(k, _)| *k),
        certificate: hit.map(|(_, c)| c),
    })
}

impl fmt::Display for TangramClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.cut_number, &self.certificate) {
            (Some(k), Some(c)) => write!(f, "{k}\n{}", c.render(&self.word)),
            _ => write!(f, "none"),
        }
    }
}
