//! Patterns, formulas and their occurrences.
//!
//! A pattern is a word over variables `A, B, ...`, stored as `0, 1, ...` in
//! canonical form (variables first appear in order). An occurrence in a word
//! is a non-erasing substitution whose image is a factor.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::to_digits;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pattern(Vec<u8>);

impl Pattern {
    /// Relabels variables so they first appear in order.
    pub fn canonical(vars: &[u8]) -> Result<Self> {
        if vars.is_empty() {
            return Err(Error::parse("pattern", "empty pattern"));
        }
        Ok(Pattern(canonicalize(vars)))
    }

    pub fn vars(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn var_count(&self) -> usize {
        self.0.iter().map(|&v| v as usize + 1).max().unwrap_or(0)
    }

    pub fn occurrences_of(&self, var: u8) -> usize {
        self.0.iter().filter(|&&v| v == var).count()
    }

    /// Every variable occurs at least twice.
    pub fn is_doubled(&self) -> bool {
        (0..self.var_count() as u8).all(|v| self.occurrences_of(v) >= 2)
    }

    pub fn is_exactly_doubled(&self) -> bool {
        (0..self.var_count() as u8).all(|v| self.occurrences_of(v) == 2)
    }

    pub fn reverse(&self) -> Pattern {
        let rev: Vec<u8> = self.0.iter().rev().copied().collect();
        Pattern(canonicalize(&rev))
    }

    /// Replaces isolated variables by fragment breaks.
    pub fn formula(&self) -> Formula {
        let mut fragments = vec![Vec::new()];
        for &v in &self.0 {
            if self.occurrences_of(v) == 1 {
                if !fragments.last().unwrap().is_empty() {
                    fragments.push(Vec::new());
                }
            } else {
                fragments.last_mut().unwrap().push(v);
            }
        }
        fragments.retain(|f| !f.is_empty());
        Formula { fragments }
    }
}

fn canonicalize(vars: &[u8]) -> Vec<u8> {
    let mut map = [u8::MAX; 256];
    let mut next = 0u8;
    vars.iter()
        .map(|&v| {
            if map[v as usize] == u8::MAX {
                map[v as usize] = next;
                next += 1;
            }
            map[v as usize]
        })
        .collect()
}

fn parse_vars(s: &str, what: &'static str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| {
            if c.is_ascii_uppercase() {
                Ok(c as u8 - b'A')
            } else {
                Err(Error::parse(what, format!("{c:?} is not a variable in {s:?}")))
            }
        })
        .collect()
}

fn write_vars(f: &mut fmt::Formatter<'_>, vars: &[u8]) -> fmt::Result {
    for &v in vars {
        write!(f, "{}", char::from(b'A' + v))?;
    }
    Ok(())
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pattern::canonical(&parse_vars(s.trim(), "pattern")?)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_vars(f, &self.0)
    }
}

/// Fragments separated by dots, over shared variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Formula {
    fragments: Vec<Vec<u8>>,
}

impl Formula {
    pub fn new(fragments: Vec<Vec<u8>>) -> Result<Self> {
        if fragments.is_empty() || fragments.iter().any(Vec::is_empty) {
            return Err(Error::parse("formula", "fragments must be nonempty"));
        }
        Ok(Formula { fragments })
    }

    pub fn fragments(&self) -> &[Vec<u8>] {
        &self.fragments
    }

    /// The formula `AB.BA.AC.CA.BC`.
    pub fn f3() -> Formula {
        "AB.BA.AC.CA.BC".parse().expect("valid formula")
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fragments = s
            .trim()
            .split('.')
            .map(|frag| parse_vars(frag, "formula"))
            .collect::<Result<Vec<_>>>()?;
        Formula::new(fragments)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, frag) in self.fragments.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write_vars(f, frag)?;
        }
        Ok(())
    }
}

/// Images of the variables, indexed by variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableAssignment(pub Vec<Vec<u8>>);

impl VariableAssignment {
    pub fn image(&self, var: u8) -> &[u8] {
        &self.0[var as usize]
    }

    pub fn apply(&self, vars: &[u8]) -> Vec<u8> {
        vars.iter().flat_map(|&v| self.image(v).iter().copied()).collect()
    }

    pub fn total_len(&self) -> usize {
        self.0.iter().map(Vec::len).sum()
    }

    pub fn is_non_erasing(&self) -> bool {
        self.0.iter().all(|img| !img.is_empty())
    }
}

impl fmt::Display for VariableAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, img) in self.0.iter().enumerate() {
            if v > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}->{}", char::from(b'A' + v as u8), to_digits(img))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub offset: usize,
    pub assignment: VariableAssignment,
}

impl Occurrence {
    pub fn len(&self, p: &Pattern) -> usize {
        p.vars().iter().map(|&v| self.assignment.image(v).len()).sum()
    }
}

/// Receives the variable images and the end of a match.
type MatchSink<'f> = dyn FnMut(&[Option<(usize, usize)>], usize) -> bool + 'f;

/// Backtracking matcher for one anchor offset. Images are `(start, len)`
/// slices of the word.
struct Matcher<'a> {
    pattern: &'a [u8],
    word: &'a [u8],
    cap: usize,
    end: Option<usize>,
    images: Vec<Option<(usize, usize)>>,
    /// For each pattern position, occurrences of not-yet-seen variables from
    /// there on (each needs at least one letter).
    min_rest: Vec<usize>,
}

impl<'a> Matcher<'a> {
    fn new(pattern: &'a [u8], word: &'a [u8], cap: usize, end: Option<usize>) -> Self {
        let nvars = pattern.iter().map(|&v| v as usize + 1).max().unwrap_or(0);
        let mut min_rest = vec![0; pattern.len() + 1];
        for i in (0..pattern.len()).rev() {
            min_rest[i] = min_rest[i + 1] + 1;
        }
        Matcher {
            pattern,
            word,
            cap,
            end,
            images: vec![None; nvars],
            min_rest,
        }
    }

    /// Calls `found` for every match starting at `pos`; stops when it
    /// returns `false`. Returns `false` if stopped.
    fn run(&mut self, i: usize, pos: usize, used: usize, found: &mut MatchSink) -> bool {
        if i == self.pattern.len() {
            if self.end.is_none_or(|e| e == pos) {
                return found(&self.images, pos);
            }
            return true;
        }
        let limit = self.end.unwrap_or(self.word.len());
        if pos + self.min_rest[i] > limit {
            return true;
        }
        let v = self.pattern[i] as usize;
        match self.images[v] {
            Some((start, len)) => {
                if pos + len <= limit && self.word[start..start + len] == self.word[pos..pos + len] {
                    return self.run(i + 1, pos + len, used, found);
                }
                true
            }
            None => {
                let room = limit - pos - (self.min_rest[i] - 1);
                let max_len = room.min(self.cap.saturating_sub(used));
                for len in 1..=max_len {
                    self.images[v] = Some((pos, len));
                    let go_on = self.run(i + 1, pos + len, used + len, found);
                    self.images[v] = None;
                    if !go_on {
                        return false;
                    }
                }
                true
            }
        }
    }
}

fn to_assignment(word: &[u8], images: &[Option<(usize, usize)>]) -> VariableAssignment {
    VariableAssignment(
        images
            .iter()
            .map(|img| img.map(|(s, l)| word[s..s + l].to_vec()).unwrap_or_default())
            .collect(),
    )
}

/// Calls `found(offset, assignment, length)` for every occurrence of `p` in
/// `w` starting at `offset` whose total image length `Σ|m(X)|` is at most
/// `cap`. With `end`, only occurrences ending exactly there count.
pub fn for_each_occurrence_at(
    p: &[u8],
    w: &[u8],
    offset: usize,
    cap: Option<usize>,
    end: Option<usize>,
    found: &mut dyn FnMut(&VariableAssignment, usize) -> bool,
) -> bool {
    let mut m = Matcher::new(p, w, cap.unwrap_or(usize::MAX), end);
    m.run(0, offset, 0, &mut |images, stop| found(&to_assignment(w, images), stop - offset))
}

/// First occurrence (by offset, then by image lengths in lexicographic order).
pub fn find_occurrence(p: &Pattern, w: &[u8], max_image_total: Option<usize>) -> Option<Occurrence> {
    (0..w.len()).find_map(|offset| find_occurrence_at(p, w, offset, max_image_total))
}

pub fn find_occurrence_at(p: &Pattern, w: &[u8], offset: usize, max_image_total: Option<usize>) -> Option<Occurrence> {
    let mut hit = None;
    for_each_occurrence_at(p.vars(), w, offset, max_image_total, None, &mut |a, _| {
        hit = Some(a.clone());
        false
    });
    hit.map(|assignment| Occurrence { offset, assignment })
}

/// Whether `w` is exactly an image of `p`.
pub fn exact_match(p: &Pattern, w: &[u8]) -> Option<VariableAssignment> {
    let mut hit = None;
    for_each_occurrence_at(p.vars(), w, 0, None, Some(w.len()), &mut |a, _| {
        hit = Some(a.clone());
        false
    });
    hit
}

/// An occurrence of `p` ending at the last letter of `w`, if any.
pub fn suffix_occurrence(p: &Pattern, w: &[u8], max_image_total: Option<usize>) -> Option<Occurrence> {
    let min = p.len();
    (min..=w.len()).find_map(|len| {
        let offset = w.len() - len;
        let mut hit = None;
        for_each_occurrence_at(p.vars(), w, offset, max_image_total, Some(w.len()), &mut |a, _| {
            hit = Some(a.clone());
            false
        });
        hit.map(|assignment| Occurrence { offset, assignment })
    })
}

/// Whether `q` occurs in `p` read as a word over the variables.
pub fn pattern_contains(p: &Pattern, q: &Pattern) -> bool {
    find_occurrence(q, p.vars(), None).is_some()
}

/// Searches an assignment under which every fragment image is a factor of
/// `w`, with each variable image a factor of length at most `max_image_len`.
pub fn find_formula_occurrence(f: &Formula, w: &[u8], max_image_len: usize) -> Option<VariableAssignment> {
    if max_image_len == 0 {
        return None;
    }
    let nvars = f.fragments().iter().flatten().map(|&v| v as usize + 1).max().unwrap_or(0);
    let longest = f.fragments().iter().map(Vec::len).max().unwrap_or(0) * max_image_len;
    let factor_set: HashSet<&[u8]> = (1..=longest.min(w.len()))
        .flat_map(|len| w.windows(len))
        .collect();
    let mut candidates: Vec<&[u8]> = factor_set.iter().copied().filter(|f| f.len() <= max_image_len).collect();
    candidates.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));

    // variables in order of first appearance; each fragment is tested once
    // its last variable is assigned
    let mut order = Vec::new();
    for &v in f.fragments().iter().flatten() {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    let rank = |v: u8| order.iter().position(|&x| x == v).unwrap();
    let mut due: Vec<Vec<&[u8]>> = vec![Vec::new(); order.len()];
    for frag in f.fragments() {
        let last = frag.iter().map(|&v| rank(v)).max().unwrap();
        due[last].push(frag);
    }

    fn search<'w>(
        depth: usize,
        order: &[u8],
        due: &[Vec<&[u8]>],
        candidates: &[&'w [u8]],
        factor_set: &HashSet<&[u8]>,
        images: &mut Vec<&'w [u8]>,
        buf: &mut Vec<u8>,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth] as usize;
        for &c in candidates {
            images[v] = c;
            let ok = due[depth].iter().all(|frag| {
                buf.clear();
                for &x in frag.iter() {
                    buf.extend_from_slice(images[x as usize]);
                }
                factor_set.contains(buf.as_slice())
            });
            if ok && search(depth + 1, order, due, candidates, factor_set, images, buf) {
                return true;
            }
        }
        false
    }

    let mut images: Vec<&[u8]> = vec![&[]; nvars];
    let mut buf = Vec::new();
    if search(0, &order, &due, &candidates, &factor_set, &mut images, &mut buf) {
        Some(VariableAssignment(images.into_iter().map(<[u8]>::to_vec).collect()))
    } else {
        None
    }
}

/// Longest word the uncapped doubled-pattern search accepts (its table is
/// quadratic in the length).
pub const DOUBLED_SEARCH_MAX_LEN: usize = 4096;

/// Longest common extension of every pair of suffixes.
struct LceTable {
    stride: usize,
    t: Vec<u16>,
}

impl LceTable {
    fn new(w: &[u8]) -> Self {
        let n = w.len();
        let stride = n + 1;
        let mut t = vec![0u16; stride * stride];
        for i in (0..n).rev() {
            for j in (0..n).rev() {
                if w[i] == w[j] {
                    t[i * stride + j] = t[(i + 1) * stride + j + 1] + 1;
                }
            }
        }
        LceTable { stride, t }
    }

    fn get(&self, i: usize, j: usize) -> usize {
        self.t[i * self.stride + j] as usize
    }
}

struct DoubledSearch<'a> {
    p: &'a [u8],
    n: usize,
    lce: &'a LceTable,
    /// Pattern index of the second occurrence of `p[0]`.
    pivot: usize,
    /// Word position that second occurrence must start at.
    target: usize,
    start: Vec<usize>,
    len: Vec<usize>,
}

impl DoubledSearch<'_> {
    fn run(&mut self, i: usize, pos: usize) -> bool {
        if i == self.p.len() {
            return true;
        }
        if i < self.pivot && pos >= self.target {
            return false;
        }
        if i == self.pivot && pos != self.target {
            return false;
        }
        let v = self.p[i] as usize;
        if self.len[v] > 0 {
            let l = self.len[v];
            // the pivot copy was checked when its distance was chosen
            let ok = i == self.pivot || (pos + l <= self.n && self.lce.get(self.start[v], pos) >= l);
            return ok && self.run(i + 1, pos + l);
        }
        if i < self.pivot {
            // once every other variable before the pivot is known, the
            // distance to the pivot fixes this length
            let rest = &self.p[i + 1..self.pivot];
            if rest.iter().all(|&u| u as usize == v || self.len[u as usize] > 0) {
                let fixed: usize = rest.iter().filter(|&&u| u as usize != v).map(|&u| self.len[u as usize]).sum();
                let copies = 1 + rest.iter().filter(|&&u| u as usize == v).count();
                let room = self.target - pos;
                if room <= fixed || !(room - fixed).is_multiple_of(copies) {
                    return false;
                }
                return self.assign(i, pos, v, (room - fixed) / copies);
            }
        }
        let max = if i < self.pivot {
            self.target.saturating_sub(pos + (self.pivot - i - 1))
        } else {
            self.n.saturating_sub(pos + (self.p.len() - i - 1))
        };
        (1..=max).any(|l| self.assign(i, pos, v, l))
    }

    fn assign(&mut self, i: usize, pos: usize, v: usize, l: usize) -> bool {
        self.start[v] = pos;
        self.len[v] = l;
        if self.run(i + 1, pos + l) {
            return true;
        }
        self.len[v] = 0;
        false
    }
}

/// Uncapped search for an occurrence of a pattern whose variables each occur
/// exactly twice. Enumerates the distance between the two copies of the
/// first variable, so each candidate is checked in constant time per letter
/// block. Returns some occurrence, not necessarily the leftmost-shortest.
pub fn find_doubled_occurrence(p: &Pattern, w: &[u8]) -> Result<Option<Occurrence>> {
    if !p.is_exactly_doubled() {
        return Err(Error::NotExactlyDoubled(p.to_string()));
    }
    if w.len() > DOUBLED_SEARCH_MAX_LEN {
        return Err(Error::WordTooLong {
            len: w.len(),
            cap: DOUBLED_SEARCH_MAX_LEN,
        });
    }
    let vars = p.vars();
    if vars.is_empty() || w.len() < vars.len() {
        return Ok(None);
    }
    let n = w.len();
    let lce = LceTable::new(w);
    let pivot = vars.iter().rposition(|&v| v == vars[0]).unwrap();
    let k = p.var_count();
    let mut s = DoubledSearch {
        p: vars,
        n,
        lce: &lce,
        pivot,
        target: 0,
        start: vec![0; k],
        len: vec![0; k],
    };
    for o in 0..n {
        for d in pivot..n - o {
            let e = lce.get(o, o + d);
            let max_a = e.min(d + 1 - pivot);
            for a in 1..=max_a {
                s.target = o + d;
                s.start.iter_mut().for_each(|x| *x = 0);
                s.len.iter_mut().for_each(|x| *x = 0);
                s.start[vars[0] as usize] = o;
                s.len[vars[0] as usize] = a;
                if s.run(1, o + a) {
                    let assignment = VariableAssignment(s.start.iter().zip(&s.len).map(|(&st, &l)| w[st..st + l].to_vec()).collect());
                    return Ok(Some(Occurrence { offset: o, assignment }));
                }
            }
        }
    }
    Ok(None)
}

/// Canonical patterns over `j` variables each occurring exactly twice
/// (`(2j − 1)!!` of them), in lexicographic order.
pub fn exactly_doubled_patterns(j: usize) -> Vec<Pattern> {
    fn extend(cur: &mut Vec<u8>, counts: &mut Vec<u8>, j: usize, out: &mut Vec<Pattern>) {
        if cur.len() == 2 * j {
            out.push(Pattern(cur.clone()));
            return;
        }
        // reuse an open variable, or open the next one
        for v in 0..counts.len() {
            if counts[v] == 1 {
                counts[v] = 2;
                cur.push(v as u8);
                extend(cur, counts, j, out);
                cur.pop();
                counts[v] = 1;
            }
        }
        if counts.len() < j {
            counts.push(1);
            cur.push(counts.len() as u8 - 1);
            extend(cur, counts, j, out);
            cur.pop();
            counts.pop();
        }
    }
    let mut out = Vec::new();
    if j > 0 {
        extend(&mut Vec::new(), &mut Vec::new(), j, &mut out);
    }
    out.sort();
    out
}

/// Ordered set of patterns, sorted by variable count then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSet(Vec<Pattern>);

impl PatternSet {
    pub fn new(mut patterns: Vec<Pattern>) -> Self {
        patterns.sort_by(|a, b| a.var_count().cmp(&b.var_count()).then(a.cmp(b)));
        patterns.dedup();
        PatternSet(patterns)
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: &Pattern) -> bool {
        self.0.contains(p)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pattern> {
        self.0.iter()
    }

    /// Patterns present in one set but not the other: `(missing, extra)`
    /// relative to `expected`.
    pub fn diff(&self, expected: &PatternSet) -> (Vec<Pattern>, Vec<Pattern>) {
        let missing = expected.iter().filter(|p| !self.contains(p)).cloned().collect();
        let extra = self.iter().filter(|p| !expected.contains(p)).cloned().collect();
        (missing, extra)
    }
}

impl<'a> IntoIterator for &'a PatternSet {
    type Item = &'a Pattern;
    type IntoIter = std::slice::Iter<'a, Pattern>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromStr for PatternSet {
    type Err = Error;

    /// Patterns separated by whitespace or commas; `#` starts a comment.
    fn from_str(s: &str) -> Result<Self> {
        let patterns = s
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Pattern>>>()?;
        Ok(PatternSet::new(patterns))
    }
}

impl fmt::Display for PatternSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Minimal patterns over at most `k` variables, each variable exactly twice:
/// avoiding them is avoiding tangrams of cut number at most `k`.
pub fn generate_sk(k: usize) -> PatternSet {
    let candidates: Vec<Pattern> = (1..=k).flat_map(exactly_doubled_patterns).collect();
    let minimal = candidates
        .iter()
        .filter(|p| !candidates.iter().any(|q| q != *p && q.len() <= p.len() && pattern_contains(p, q)))
        .cloned()
        .collect();
    PatternSet::new(minimal)
}

pub const S3_LIST: &str = "AA ABACBC ABCACB ABCBAC";

pub const S4_LIST: &str = "AA ABACBC ABCACB ABCBAC ABACBDCD ABACDBDC \
    ABACDCBD ABCACDBD ABCADBDC ABCADCBD ABCADCDB \
    ABCBADCD ABCBDACD ABCBDADC ABCBDCAD ABCDACBD \
    ABCDADCB ABCDBADC ABCDBDAC ABCDCADB ABCDCBAD";

/// The published `S_k` for `k ≤ 4`.
pub fn expected_sk(k: usize) -> Option<PatternSet> {
    match k {
        1 | 2 => Some("AA".parse().expect("valid")),
        3 => Some(S3_LIST.parse().expect("valid")),
        4 => Some(S4_LIST.parse().expect("valid")),
        _ => None,
    }
}
