//! End-to-end verification runs and their reports.
//!
//! Each run is a sequence of stages. A stage passes, fails with a
//! replayable witness, or is inconclusive when a node budget runs out.
//! Runs halt at the first stage that does not pass.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::{max_occurrence_length, published_bound};
use crate::cuts::{cut_number_oracle, k_tangram_pattern, CutCertificate, TangramSuffixCheck};
use crate::error::{Error, Result};
use crate::morphism::{b4, check_sync_lemma, validate_h, SyncCheckParams, SyncOutcome, UniformMorphism, H_DATA, H_DIGEST};
use crate::pattern::{expected_sk, find_doubled_occurrence, find_formula_occurrence, find_occurrence, generate_sk, Formula, Pattern, PatternSet};
use crate::repetition::{
    enumerate_free, is_free, parse_rational, Control, Enumeration, FreenessCheck, FreenessParams, Mode, Rational, SuffixCheck, Visitor, Walker,
    DEFAULT_BUDGET,
};
use crate::word::{is_tangram, parse_digits, to_digits};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MorphismSource {
    Embedded,
    File(PathBuf),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternSource {
    Generated,
    File(PathBuf),
    Given(PatternSet),
}

/// Which factors of morphic images the occurrence stage scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowPolicy {
    /// `f(xy)` for every ordered pair of distinct source letters.
    LetterPairs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub morphism: MorphismSource,
    /// Fail the load stage unless the morphism digest equals the shipped one.
    pub require_digest: bool,
    pub alpha: Rational,
    pub beta: Rational,
    pub min_period: usize,
    pub cap: i64,
    pub patterns: PatternSource,
    pub window_policy: WindowPolicy,
    pub budget: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            morphism: MorphismSource::Embedded,
            require_digest: true,
            alpha: Rational::new(6, 5),
            beta: Rational::new(5, 4),
            min_period: 9,
            cap: 100,
            patterns: PatternSource::Generated,
            window_policy: WindowPolicy::LetterPairs,
            budget: DEFAULT_BUDGET,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::parse("config", format!("{key}: expected true or false, got {v:?}"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.replace('_', "")
        .parse()
        .map_err(|_| Error::parse("config", format!("{key}: not a number: {v:?}")))
}

impl PipelineConfig {
    /// Reads `key = value` lines. Blank lines and `#` comments are skipped;
    /// relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("config", format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "morphism" => {
                    cfg.morphism = match value {
                        "embedded" => MorphismSource::Embedded,
                        path => MorphismSource::File(base.join(path)),
                    }
                }
                "require_digest" => cfg.require_digest = parse_bool(key, value)?,
                "alpha" => cfg.alpha = parse_rational(value)?,
                "beta" => cfg.beta = parse_rational(value)?,
                "min_period" => cfg.min_period = parse_num(key, value)?,
                "cap" => cfg.cap = parse_num(key, value)?,
                "patterns" => {
                    cfg.patterns = match value {
                        "generated" => PatternSource::Generated,
                        path => PatternSource::File(base.join(path)),
                    }
                }
                "window_policy" => {
                    cfg.window_policy = match value {
                        "letter-pairs" => WindowPolicy::LetterPairs,
                        other => return Err(Error::parse("config", format!("unknown window policy {other:?}"))),
                    }
                }
                "budget" => cfg.budget = parse_num(key, value)?,
                other => return Err(Error::parse("config", format!("unknown key {other:?}"))),
            }
        }
        if cfg.cap < 2 {
            return Err(Error::InvalidParams(format!("cap must be at least 2, got {}", cfg.cap)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::parse("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Settings as written in a config file.
    pub fn entries(&self) -> BTreeMap<String, String> {
        let morphism = match &self.morphism {
            MorphismSource::Embedded => "embedded".to_string(),
            MorphismSource::File(p) => p.display().to_string(),
            MorphismSource::Text(t) => format!("inline:{}", hex_digest(t.as_bytes())),
        };
        let patterns = match &self.patterns {
            PatternSource::Generated => "generated".to_string(),
            PatternSource::File(p) => p.display().to_string(),
            PatternSource::Given(s) => s.iter().map(Pattern::to_string).collect::<Vec<_>>().join(" "),
        };
        [
            ("morphism", morphism),
            ("require_digest", self.require_digest.to_string()),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("min_period", self.min_period.to_string()),
            ("cap", self.cap.to_string()),
            ("patterns", patterns),
            ("window_policy", "letter-pairs".to_string()),
            ("budget", self.budget.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    fn morphism_text(&self) -> Result<String> {
        match &self.morphism {
            MorphismSource::Embedded => Ok(H_DATA.to_string()),
            MorphismSource::Text(t) => Ok(t.clone()),
            MorphismSource::File(p) => std::fs::read_to_string(p).map_err(|e| Error::parse("morphism file", format!("{}: {e}", p.display()))),
        }
    }

    fn pattern_set(&self) -> Result<Option<PatternSet>> {
        match &self.patterns {
            PatternSource::Generated => Ok(None),
            PatternSource::Given(s) => Ok(Some(s.clone())),
            PatternSource::File(p) => std::fs::read_to_string(p)
                .map_err(|e| Error::parse("pattern file", format!("{}: {e}", p.display())))?
                .parse()
                .map(Some),
        }
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    pub status: Status,
    pub counts: BTreeMap<String, u64>,
    pub facts: BTreeMap<String, String>,
    pub witness: Option<BTreeMap<String, String>>,
}

impl StageReport {
    fn new(name: &str) -> Self {
        StageReport {
            name: name.to_string(),
            status: Status::Pass,
            counts: BTreeMap::new(),
            facts: BTreeMap::new(),
            witness: None,
        }
    }

    fn count(&mut self, key: &str, v: u64) -> &mut Self {
        self.counts.insert(key.to_string(), v);
        self
    }

    fn fact(&mut self, key: &str, v: impl ToString) -> &mut Self {
        self.facts.insert(key.to_string(), v.to_string());
        self
    }

    fn fail<K: ToString, V: ToString>(&mut self, witness: impl IntoIterator<Item = (K, V)>) {
        self.status = Status::Fail;
        self.witness = Some(witness.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect());
    }

    fn inconclusive(&mut self, why: impl ToString) {
        self.status = Status::Inconclusive;
        self.fact("inconclusive", why);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub config: BTreeMap<String, String>,
    pub config_digest: String,
    pub stages: Vec<StageReport>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    fn new(check: &str, config: BTreeMap<String, String>) -> Self {
        let canonical: String = config.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        VerificationReport {
            check: check.to_string(),
            config_digest: hex_digest(canonical.as_bytes()),
            config,
            stages: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Appends a stage; returns whether the run should continue.
    fn push(&mut self, stage: StageReport) -> bool {
        let ok = stage.status == Status::Pass;
        self.stages.push(stage);
        ok
    }

    /// Pass iff every stage passed; any failure outranks inconclusive.
    pub fn status(&self) -> Status {
        if self.stages.iter().any(|s| s.status == Status::Fail) {
            Status::Fail
        } else if self.stages.iter().any(|s| s.status == Status::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }

    pub fn passed(&self) -> bool {
        self.status() == Status::Pass
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// The first stage that did not pass.
    pub fn first_problem(&self) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.status != Status::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// 0 pass, 1 failure, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.status() {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }
}

/// Human summary.
impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.check, self.status())?;
        for s in &self.stages {
            writeln!(f, "  [{}] {}", s.status, s.name)?;
            for (k, v) in &s.counts {
                writeln!(f, "      {k}: {v}")?;
            }
            for (k, v) in &s.facts {
                writeln!(f, "      {k}: {v}")?;
            }
            if let Some(w) = &s.witness {
                for (k, v) in w {
                    writeln!(f, "      witness {k}: {v}")?;
                }
            }
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

pub const NOTE_NO_REVERSAL: &str = "cut numbers assume pieces are rearranged but never reversed";
pub const NOTE_WINDOWS: &str = "the occurrence stage scans f(xy) for all ordered pairs of distinct letters; \
this window policy is a reconstruction, chosen as a superset of the factors reachable in images of long words";
pub const NOTE_FINITE: &str = "finite check on a prefix; corroborates but does not prove avoidance by the infinite word";

pub const STAGE_LOAD: &str = "load";
pub const STAGE_SYNC: &str = "synchronizing";
pub const STAGE_PATTERNS: &str = "pattern-set";
pub const STAGE_LIFT: &str = "lift-freeness";
pub const STAGE_BOUNDS: &str = "bounds";
pub const STAGE_OCCURRENCES: &str = "occurrences";

/// Replays the whole argument that images of 6/5⁺-free words under the
/// morphism avoid 4-tangrams. `progress` hears about each stage as it starts.
pub fn verify_t4_with(config: &PipelineConfig, progress: &mut dyn FnMut(&str)) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("verify-t4", config.entries());
    report.notes.push(NOTE_WINDOWS.to_string());
    report.notes.push(NOTE_NO_REVERSAL.to_string());
    let given = config.pattern_set()?;
    let text = config.morphism_text()?;

    progress(STAGE_LOAD);
    let mut stage = StageReport::new(STAGE_LOAD);
    let f = match text.parse::<UniformMorphism>().and_then(|f| validate_h(&f).map(|_| f)) {
        Ok(f) => {
            let digest = f.digest();
            stage.fact("digest", &digest).fact("q", f.q()).fact("source", f.source().size()).fact("target", f.target().size());
            if config.require_digest && digest != H_DIGEST {
                stage.fail([("expected_digest", H_DIGEST), ("digest", digest.as_str())]);
            }
            Some(f)
        }
        Err(e) => {
            stage.fail([("error", e.to_string())]);
            None
        }
    };
    if !report.push(stage) {
        return Ok(report);
    }
    let f = f.expect("loaded");

    progress(STAGE_SYNC);
    if !report.push(sync_stage(&f)?) {
        return Ok(report);
    }

    progress(STAGE_PATTERNS);
    let mut stage = StageReport::new(STAGE_PATTERNS);
    let generated = generate_sk(4);
    let embedded = expected_sk(4).expect("embedded list");
    let set = given.unwrap_or_else(|| generated.clone());
    stage.count("generated", generated.len() as u64).count("used", set.len() as u64);
    let (missing, extra) = generated.diff(&embedded);
    let (missing_used, extra_used) = set.diff(&generated);
    let show = |v: &[Pattern]| v.iter().map(Pattern::to_string).collect::<Vec<_>>().join(" ");
    if !missing.is_empty() || !extra.is_empty() {
        stage.fail([("missing_from_generated", show(&missing)), ("not_in_embedded", show(&extra))]);
    } else if !missing_used.is_empty() || !extra_used.is_empty() {
        stage.fail([("missing_from_used", show(&missing_used)), ("extra_in_used", show(&extra_used))]);
    }
    if !report.push(stage) {
        return Ok(report);
    }

    progress(STAGE_LIFT);
    if !report.push(lift_stage(&f, config.alpha, config.beta, config.min_period, config.budget)?) {
        return Ok(report);
    }

    progress(STAGE_BOUNDS);
    let mut stage = StageReport::new(STAGE_BOUNDS);
    let computed: Vec<(Pattern, Result<Option<_>>)> = set
        .patterns()
        .par_iter()
        .map(|p| (p.clone(), max_occurrence_length(p, config.beta, config.min_period, config.cap)))
        .collect();
    let mut bounds: BTreeMap<Pattern, i64> = BTreeMap::new();
    for (p, r) in computed {
        match r? {
            Some(b) => {
                stage.fact(&p.to_string(), format!("{} at {}", b.bound, b.witness));
                bounds.insert(p, b.bound);
            }
            None => {
                stage.fail([("pattern", p.to_string()), ("error", "no admissible lengths".to_string())]);
                break;
            }
        }
    }
    stage.count("patterns", bounds.len() as u64);
    if stage.status == Status::Pass {
        for (p, &b) in &bounds {
            let reverse_mismatch = bounds.get(&p.reverse()).filter(|&&r| r != b);
            match published_bound(p) {
                Some(want) if want != b => {
                    stage.fail([("pattern", p.to_string()), ("bound", b.to_string()), ("published", want.to_string())]);
                    break;
                }
                None => {
                    stage.fail([("pattern", p.to_string()), ("bound", b.to_string()), ("published", "none".to_string())]);
                    break;
                }
                _ => {}
            }
            if let Some(r) = reverse_mismatch {
                stage.fail([("pattern", p.to_string()), ("bound", b.to_string()), ("reverse_bound", r.to_string())]);
                break;
            }
        }
    }
    if !report.push(stage) {
        return Ok(report);
    }

    progress(STAGE_OCCURRENCES);
    let stage = occurrence_stage(&f, &set, &bounds, config.alpha);
    report.push(stage);
    Ok(report)
}

fn sync_stage(f: &UniformMorphism) -> Result<StageReport> {
    let mut stage = StageReport::new(STAGE_SYNC);
    if let SyncOutcome::Counterexample(c) = f.synchronization() {
        let ab = f.apply(&[c.a, c.b])?;
        let fc = f.image(c.c);
        stage.fail([
            ("a", c.a.to_string()),
            ("b", c.b.to_string()),
            ("c", c.c.to_string()),
            ("offset", c.offset.to_string()),
            ("factor", to_digits(&ab[c.offset..c.offset + fc.len()])),
        ]);
    }
    Ok(stage)
}

fn lift_stage(f: &UniformMorphism, alpha: Rational, beta: Rational, n: usize, budget: u64) -> Result<StageReport> {
    let mut stage = StageReport::new(STAGE_LIFT);
    let params = SyncCheckParams::new(alpha, beta, n, f.q())?;
    stage.fact("length_bound", params.length_bound()).fact("max_source_len", params.max_source_len());
    match check_sync_lemma(f, &params, budget) {
        Ok(lemma) => {
            stage.count("words_checked", lemma.words_checked);
            stage.fact(
                "words_by_length",
                lemma.words_by_length.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            );
            if let Some(v) = &lemma.violation {
                let image = f.apply(&v.source)?;
                let r = &v.repetition;
                stage.fail([
                    ("source", to_digits(&v.source)),
                    ("offset", r.offset.to_string()),
                    ("period", r.period.to_string()),
                    ("length", r.length.to_string()),
                    ("repetition", to_digits(&image[r.offset..r.offset + r.length])),
                ]);
            } else if !lemma.passed() {
                stage.fail([("error", "morphism is not synchronizing")]);
            }
        }
        Err(Error::BudgetExceeded(n)) => stage.inconclusive(format!("node budget {n} exhausted")),
        Err(e) => return Err(e),
    }
    Ok(stage)
}

/// Synchronization and the lifting hypothesis for an arbitrary uniform
/// morphism: images of `(α⁺, 1)`-free words short enough to matter must be
/// `(β⁺, n)`-free.
pub fn verify_morphism(f: &UniformMorphism, alpha: Rational, beta: Rational, n: usize, budget: u64) -> Result<VerificationReport> {
    let mut config = BTreeMap::new();
    config.insert("alpha".to_string(), alpha.to_string());
    config.insert("beta".to_string(), beta.to_string());
    config.insert("min_period".to_string(), n.to_string());
    config.insert("budget".to_string(), budget.to_string());
    config.insert("digest".to_string(), f.digest());
    let mut report = VerificationReport::new("verify-morphism", config);
    if report.push(sync_stage(f)?) {
        report.push(lift_stage(f, alpha, beta, n, budget)?);
    }
    Ok(report)
}

pub fn verify_t4(config: &PipelineConfig) -> Result<VerificationReport> {
    verify_t4_with(config, &mut |_| {})
}

struct WindowHit {
    pair: [u8; 2],
    pattern: Pattern,
    offset: usize,
    assignment: String,
    factor: String,
}

fn occurrence_stage(f: &UniformMorphism, set: &PatternSet, bounds: &BTreeMap<Pattern, i64>, alpha: Rational) -> StageReport {
    let mut stage = StageReport::new(STAGE_OCCURRENCES);
    let free = FreenessParams::plus(alpha, 1).expect("alpha above one");
    let s = f.source().size() as u8;
    let windows: Vec<[u8; 2]> = (0..s)
        .flat_map(|x| (0..s).map(move |y| [x, y]))
        .filter(|&[x, y]| x != y && is_free(&[x, y], &free))
        .collect();
    let results: Vec<(u64, Vec<WindowHit>)> = windows
        .par_iter()
        .map(|&pair| {
            let w = f.apply(&pair).expect("letters in range");
            let mut done = 0;
            let mut hits = Vec::new();
            for p in set {
                let cap = (bounds[p] / 2) as usize;
                if let Some(o) = find_occurrence(p, &w, Some(cap)) {
                    let len = o.len(p);
                    hits.push(WindowHit {
                        pair,
                        pattern: p.clone(),
                        offset: o.offset,
                        assignment: o.assignment.to_string(),
                        factor: to_digits(&w[o.offset..o.offset + len]),
                    });
                }
                done += 1;
            }
            (done, hits)
        })
        .collect();
    let tasks: u64 = results.iter().map(|r| r.0).sum();
    let expected = (windows.len() * set.len()) as u64;
    let hits: Vec<&WindowHit> = results.iter().flat_map(|r| &r.1).collect();
    stage
        .count("windows", windows.len() as u64)
        .count("patterns", set.len() as u64)
        .count("tasks", tasks)
        .count("occurrences", hits.len() as u64);
    if let Some(h) = hits.first() {
        stage.fail([
            ("window", to_digits(&h.pair)),
            ("pattern", h.pattern.to_string()),
            ("offset", h.offset.to_string()),
            ("assignment", h.assignment.clone()),
            ("factor", h.factor.clone()),
        ]);
    } else if tasks != expected {
        stage.fail([("tasks", tasks.to_string()), ("expected", expected.to_string())]);
    }
    stage
}

pub const B4_PRINTED_PREFIX: &str = "01210321012303210121";
pub const B4_TANGRAM_FACTOR: &str = "03210123";

/// Finite corroboration that the fixed point of `b4` avoids the 3-tangram
/// patterns: a full search on a prefix of length `len`, and a capped search
/// for the formula `AB.BA.AC.CA.BC`.
pub fn verify_t3_via_b4(len: usize, cap: usize) -> Result<VerificationReport> {
    let mut config = BTreeMap::new();
    config.insert("prefix_len".to_string(), len.to_string());
    config.insert("image_cap".to_string(), cap.to_string());
    let mut report = VerificationReport::new("verify-t3", config);
    report.notes.push(NOTE_FINITE.to_string());
    let f = b4();

    let mut stage = StageReport::new("printed-prefix");
    let head = to_digits(&f.fixed_point_prefix(0, B4_PRINTED_PREFIX.len())?);
    stage.fact("prefix", &head);
    if head != B4_PRINTED_PREFIX {
        stage.fail([("prefix", head), ("expected", B4_PRINTED_PREFIX.to_string())]);
    }
    if !report.push(stage) {
        return Ok(report);
    }

    let w = f.fixed_point_prefix(0, len)?;
    let mut stage = StageReport::new("s3-full-search");
    let s3 = generate_sk(3);
    stage.count("patterns", s3.len() as u64).count("prefix_len", len as u64);
    for p in &s3 {
        if let Some(o) = find_doubled_occurrence(p, &w)? {
            let n = o.len(p);
            stage.fail([
                ("pattern", p.to_string()),
                ("offset", o.offset.to_string()),
                ("assignment", o.assignment.to_string()),
                ("factor", to_digits(&w[o.offset..o.offset + n])),
            ]);
            break;
        }
    }
    if !report.push(stage) {
        return Ok(report);
    }

    let mut stage = StageReport::new("f3-capped-search");
    let f3 = Formula::f3();
    stage.fact("formula", &f3).count("image_cap", cap as u64);
    if let Some(a) = find_formula_occurrence(&f3, &w, cap) {
        stage.fail([("formula", f3.to_string()), ("assignment", a.to_string())]);
    }
    if !report.push(stage) {
        return Ok(report);
    }

    let mut stage = StageReport::new("tangram-factor");
    let t = parse_digits(B4_TANGRAM_FACTOR)?;
    match w.windows(t.len()).position(|x| x == t) {
        Some(at) => {
            stage.count("offset", at as u64).count("min_prefix_len", (at + t.len()) as u64);
            match (k_tangram_pattern(&t, 3), k_tangram_pattern(&t, 4)) {
                (None, Some((p, a))) => {
                    stage.fact("pattern", p).fact("assignment", a);
                }
                _ => stage.fail([("factor", B4_TANGRAM_FACTOR), ("error", "cut number is not 4")]),
            }
        }
        None => stage.fail([("factor", B4_TANGRAM_FACTOR), ("error", "not in prefix")]),
    }
    report.push(stage);
    Ok(report)
}

/// Rejects words ending in `xyx`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoAbaCheck;

impl SuffixCheck for NoAbaCheck {
    fn push(&mut self, w: &[u8]) -> bool {
        let n = w.len();
        n < 3 || w[n - 1] != w[n - 3]
    }

    fn pop(&mut self) {}
}

/// Tracks the longest word seen.
#[derive(Default)]
struct Longest {
    word: Vec<u8>,
}

impl Visitor for Longest {
    fn enter(&mut self, w: &[u8]) -> Control {
        if w.len() > self.word.len() {
            self.word = w.to_vec();
        }
        Control::Descend
    }
}

/// Length cap for the auxiliary walks; reaching it means no finite maximum
/// was established.
pub const AUX_MAX_LEN: usize = 1000;

fn exhaust<C: SuffixCheck>(name: &str, q: usize, check: &mut C, budget: u64) -> StageReport {
    let mut stage = StageReport::new(name);
    let mut longest = Longest::default();
    match Walker::new(q, AUX_MAX_LEN).budget(budget).symmetric(true).run(check, &mut longest) {
        Ok(stats) => {
            stage
                .count("nodes", stats.nodes)
                .count("max_len", longest.word.len() as u64)
                .fact("longest_word", to_digits(&longest.word));
            if longest.word.len() >= AUX_MAX_LEN {
                stage.fail([("error", format!("words reach the length cap {AUX_MAX_LEN}"))]);
            }
        }
        Err(Error::BudgetExceeded(n)) => stage.inconclusive(format!("node budget {n} exhausted")),
        Err(e) => stage.fail([("error", e.to_string())]),
    }
    stage
}

/// Backtracking claims: binary words of length 4 contain squares; words
/// over four letters avoiding 4-tangrams contain `xyx`; 7/5⁺-free words over
/// four letters contain 4-tangrams. The last two report the maximal length.
pub fn verify_auxiliary_claims(budget: u64) -> Result<VerificationReport> {
    let mut config = BTreeMap::new();
    config.insert("budget".to_string(), budget.to_string());
    let mut report = VerificationReport::new("verify-aux", config);
    report.notes.push("walks fix the first letter; the maximal length is invariant under renaming letters".to_string());

    let mut stage = StageReport::new("binary-square-free");
    match enumerate_free(2, &FreenessParams::square_free(), 64, Mode::Longest, budget)? {
        Enumeration::Longest { length, reached_limit } => {
            stage.count("max_len", length as u64);
            if reached_limit || length != 3 {
                stage.fail([("max_len", length.to_string())]);
            }
        }
        _ => unreachable!("longest mode"),
    }
    let go_on = report.push(stage);

    let s4 = generate_sk(4);
    if go_on {
        let mut check = (TangramSuffixCheck::new(s4.clone()), NoAbaCheck);
        let stage = exhaust("no-4-tangram-no-aba", 4, &mut check, budget);
        if report.push(stage) {
            let free = FreenessParams::plus(Rational::new(7, 5), 1)?;
            let mut check = (FreenessCheck::new(free), TangramSuffixCheck::new(s4));
            report.push(exhaust("seven-fifths-free-no-4-tangram", 4, &mut check, budget));
        }
    }
    Ok(report)
}

pub const FIVE_TANGRAM: &str = "012130212321";

/// The printed rearrangement `0|1|213021|2|3|21` into `213021` and
/// `2|1|3|0|21`.
pub fn printed_five_cut_certificate() -> CutCertificate {
    CutCertificate {
        cuts: vec![1, 2, 8, 9, 10],
        copy1: vec![2],
        copy2: vec![3, 1, 4, 0, 5],
        common: parse_digits("213021").expect("digits"),
    }
}

pub fn check_5tangram_example() -> Result<VerificationReport> {
    let mut report = VerificationReport::new("check-5tangram", BTreeMap::new());
    report.notes.push(NOTE_NO_REVERSAL.to_string());
    let w = parse_digits(FIVE_TANGRAM)?;

    let mut stage = StageReport::new("is-tangram");
    stage.fact("word", FIVE_TANGRAM);
    if !is_tangram(&w) {
        stage.fail([("word", FIVE_TANGRAM)]);
    }
    report.push(stage);

    let mut stage = StageReport::new("printed-certificate");
    let cert = printed_five_cut_certificate();
    stage.fact("certificate", cert.render(&w));
    if !cert.validate(&w) {
        stage.fail([("certificate", cert.render(&w))]);
    }
    report.push(stage);

    let mut stage = StageReport::new("cut-number");
    match cut_number_oracle(&w, 5)? {
        Some((5, c)) => {
            stage.count("cut_number", 5).fact("certificate", c.render(&w));
        }
        Some((k, c)) => stage.fail([("cut_number", k.to_string()), ("certificate", c.render(&w))]),
        None => stage.fail([("cut_number", "more than 5")]),
    }
    report.push(stage);

    let mut stage = StageReport::new("in-morphic-image");
    let h = crate::morphism::h();
    let s = h.source().size() as u8;
    let free = FreenessParams::plus(Rational::new(6, 5), 1)?;
    let hit = (0..s)
        .flat_map(|x| (0..s).map(move |y| [x, y]))
        .filter(|pair| is_free(pair, &free))
        .find_map(|pair| {
            let img = h.apply(&pair).expect("letters in range");
            img.windows(w.len()).position(|x| x == &w[..]).map(|at| (pair, at))
        });
    match hit {
        Some((pair, at)) => {
            stage.fact("window", to_digits(&pair)).count("offset", at as u64);
        }
        None => stage.fail([("error", "not a factor of any f(xy)")]),
    }
    report.push(stage);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_parsing() {
        let cfg = PipelineConfig::parse("# defaults\n\nalpha = 6/5\nbeta=5/4\nmin_period = 9\ncap = 100\n", Path::new(".")).unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        let cfg = PipelineConfig::parse("morphism = h.morph\npatterns = sk4.txt\nbudget = 1_000\nrequire_digest = no", Path::new("/tmp")).unwrap();
        assert_eq!(cfg.morphism, MorphismSource::File(PathBuf::from("/tmp/h.morph")));
        assert_eq!(cfg.patterns, PatternSource::File(PathBuf::from("/tmp/sk4.txt")));
        assert_eq!(cfg.budget, 1000);
        assert!(!cfg.require_digest);
        assert!(PipelineConfig::parse("colour = red", Path::new(".")).is_err());
        assert!(PipelineConfig::parse("alpha 6/5", Path::new(".")).is_err());
        assert!(PipelineConfig::parse("cap = 1", Path::new(".")).is_err());
        assert!(PipelineConfig::parse("alpha = x", Path::new(".")).is_err());
    }

    #[test]
    fn report_status_rules() {
        let mut r = VerificationReport::new("t", BTreeMap::new());
        assert!(r.passed());
        let mut s = StageReport::new("a");
        s.inconclusive("budget");
        r.push(s);
        assert_eq!(r.exit_code(), 3);
        let mut s = StageReport::new("b");
        s.fail([("x", "y")]);
        r.push(s);
        assert_eq!(r.status(), Status::Fail);
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.first_problem().unwrap().name, "a");
    }

    #[test]
    fn five_tangram_example() {
        let r = check_5tangram_example().unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.stage("cut-number").unwrap().counts["cut_number"], 5);
    }

    #[test]
    fn printed_certificate_renders() {
        let w = parse_digits(FIVE_TANGRAM).unwrap();
        assert_eq!(printed_five_cut_certificate().render(&w), "0|1|213021|2|3|21  copy1=213021, copy2=2|1|3|0|21");
    }

    #[test]
    fn t3_short_prefix() {
        let r = verify_t3_via_b4(200, 4).unwrap();
        assert!(r.passed(), "{r}");
        let at = B4_PRINTED_PREFIX.find(B4_TANGRAM_FACTOR).unwrap();
        assert_eq!(r.stage("tangram-factor").unwrap().counts["min_prefix_len"], (at + B4_TANGRAM_FACTOR.len()) as u64);
    }

    #[test]
    fn aux_claims() {
        let r = verify_auxiliary_claims(DEFAULT_BUDGET).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.stage("binary-square-free").unwrap().counts["max_len"], 3);
    }

    #[test]
    fn aux_budget_is_inconclusive() {
        let r = verify_auxiliary_claims(20).unwrap();
        assert_eq!(r.status(), Status::Inconclusive, "{r}");
    }

    #[test]
    fn pattern_stage_catches_removed_pattern() {
        let mut set: Vec<Pattern> = expected_sk(4).unwrap().patterns().to_vec();
        set.retain(|p| p.to_string() != "ABCDACBD");
        let cfg = PipelineConfig {
            patterns: PatternSource::Given(PatternSet::new(set)),
            ..PipelineConfig::default()
        };
        let r = verify_t4(&cfg).unwrap();
        let bad = r.first_problem().unwrap();
        assert_eq!(bad.name, STAGE_PATTERNS);
        assert_eq!(bad.witness.as_ref().unwrap()["missing_from_used"], "ABCDACBD");
    }
}
