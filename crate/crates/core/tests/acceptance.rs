use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tangram::bounds::{derive_constraints, max_occurrence_length};
use tangram::cuts::{cut_number_oracle, cut_number_via_patterns};
use tangram::morphism::{check_sync_lemma, h, SyncCheckParams, H_DATA};
use tangram::pattern::{exact_match, find_formula_occurrence, find_occurrence, generate_sk, Formula, Pattern};
use tangram::pipeline::{
    check_5tangram_example, printed_five_cut_certificate, verify_auxiliary_claims, verify_t3_via_b4, verify_t4, MorphismSource,
    PipelineConfig, Status, FIVE_TANGRAM, STAGE_OCCURRENCES,
};
use tangram::repetition::{Rational, DEFAULT_BUDGET};
use tangram::word::{is_tangram, parse_digits};

type Outcome = Result<String, String>;

const S3: &[&str] = &["AA", "ABACBC", "ABCACB", "ABCBAC"];

const S4: &[&str] = &[
    "AA", "ABACBC", "ABCACB", "ABCBAC", "ABACBDCD", "ABACDBDC", "ABCBADCD", "ABACDCBD", "ABCACDBD", "ABCADBDC", "ABCBDACD",
    "ABCADCBD", "ABCADCDB", "ABCBDCAD", "ABCBDADC", "ABCDACBD", "ABCDADCB", "ABCDCBAD", "ABCDBADC", "ABCDBDAC", "ABCDCADB",
];

/// pattern, reverse (if distinct), bound on |m(P)| at (5/4+, 9)
const BOUNDS: &[(&str, Option<&str>, i64)] = &[
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

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn pat(s: &str) -> Pattern {
    s.parse().unwrap()
}

fn names(set: &tangram::pattern::PatternSet) -> BTreeSet<String> {
    set.iter().map(Pattern::to_string).collect()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_words(q: u8, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in 0..q {
                let mut v: Vec<u8> = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn has_square(w: &[u8]) -> bool {
    (0..w.len()).any(|i| (1..=(w.len() - i) / 2).any(|p| w[i..i + p] == w[i + p..i + 2 * p]))
}

fn pattern_sets() -> Outcome {
    let want_aa: BTreeSet<String> = ["AA".to_string()].into();
    let want3: BTreeSet<String> = S3.iter().map(|s| s.to_string()).collect();
    let want4: BTreeSet<String> = S4.iter().map(|s| s.to_string()).collect();
    check(want4.len() == 21, || "literal list has duplicates".into())?;
    for (k, want) in [(1, &want_aa), (2, &want_aa), (3, &want3), (4, &want4)] {
        let got = names(&generate_sk(k));
        check(&got == want, || format!("k={k}: got {got:?}"))?;
    }
    Ok("sizes 1, 1, 4, 21".into())
}

fn occurrence_bounds() -> Outcome {
    let mut rows = 0;
    for &(p, rev, want) in BOUNDS {
        let b = max_occurrence_length(&pat(p), r(5, 4), 9, 100).map_err(|e| e.to_string())?.ok_or(format!("{p}: infeasible"))?;
        check(b.bound == want, || format!("{p}: bound {} want {want}", b.bound))?;
        if let Some(q) = rev {
            check(pat(p).reverse() == pat(q), || format!("{q} is not the reverse of {p}"))?;
            let rb = max_occurrence_length(&pat(q), r(5, 4), 9, 100).map_err(|e| e.to_string())?.ok_or(format!("{q}: infeasible"))?;
            check(rb.bound == b.bound, || format!("{p}: {} but reverse {q}: {}", b.bound, rb.bound))?;
        } else {
            check(pat(p).reverse() == pat(p), || format!("{p} is not self-reverse"))?;
        }
        rows += 1;
    }
    Ok(format!("{rows} rows, all reverse pairs equal"))
}

fn abcdacbd_system() -> Outcome {
    let sys = derive_constraints(&pat("ABCDACBD"), r(5, 4), 9).map_err(|e| e.to_string())?;
    let got: BTreeSet<String> = sys.constraints.iter().map(|c| c.to_string()).collect();
    let want: BTreeSet<String> = [
        "(a+b+c+d <= 8) or (3a <= b+c+d)",
        "(a+b+2c+d <= 8) or (3b <= a+2c+d)",
        "(a+c+d <= 8) or (3c <= a+d)",
        "(a+b+c+d <= 8) or (3d <= a+b+c)",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    check(sys.constraints.len() == 4, || format!("{} clauses", sys.constraints.len()))?;
    check(got == want, || format!("clauses {got:?}"))?;
    let b = max_occurrence_length(&pat("ABCDACBD"), r(5, 4), 9, 100).map_err(|e| e.to_string())?.ok_or("infeasible")?;
    check(b.bound == 24, || format!("bound {}", b.bound))?;
    Ok(format!("4 clauses, bound 24 at {}", b.witness))
}

fn synchronization() -> Outcome {
    let f = h();
    check(f.is_synchronizing(), || "not synchronizing".into())?;
    let p = parse_digits("13032103101230102013").unwrap();
    for a in 0..6u8 {
        check(f.image(a).starts_with(&p), || format!("image of {a} lacks the prefix"))?;
    }
    Ok("6 images share the prefix".into())
}

fn lifting_hypothesis() -> Outcome {
    let f = h();
    let params = SyncCheckParams::new(r(6, 5), r(5, 4), 9, f.q()).map_err(|e| e.to_string())?;
    check(params.length_bound() == r(50, 1), || format!("length bound {}", params.length_bound()))?;
    check(params.max_source_len() == 49, || format!("max source length {}", params.max_source_len()))?;
    let rep = check_sync_lemma(&f, &params, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    check(rep.passed(), || format!("violation {:?}", rep.violation))?;
    check(rep.words_by_length.len() == 50 && rep.words_by_length[49] > 0, || "did not reach length 49".into())?;
    Ok(format!("length bound 50, {} words checked", rep.words_checked))
}

fn window_occurrences() -> Outcome {
    let report = verify_t4(&PipelineConfig::default()).map_err(|e| e.to_string())?;
    check(report.passed(), || format!("{report}"))?;
    let stage = report.stage(STAGE_OCCURRENCES).ok_or("no occurrence stage")?;
    let count = |k: &str| stage.counts.get(k).copied();
    check(count("windows") == Some(30), || format!("windows {:?}", count("windows")))?;
    check(count("tasks") == Some(30 * 21), || format!("tasks {:?}", count("tasks")))?;
    check(count("occurrences") == Some(0), || format!("occurrences {:?}", count("occurrences")))?;

    // independent rescan: every tangram factor of every window against every
    // pattern it could be an exact image of
    let f = h();
    let mut factors = 0u64;
    for x in 0..6u8 {
        for y in (0..6u8).filter(|&y| y != x) {
            let w = f.apply(&[x, y]).unwrap();
            for i in 0..w.len() {
                for len in (2..=44).step_by(2).filter(|&l| i + l <= w.len()) {
                    let u = &w[i..i + len];
                    if !is_tangram(u) {
                        continue;
                    }
                    factors += 1;
                    for &(p, rev, bound) in BOUNDS {
                        if len as i64 > bound {
                            continue;
                        }
                        for q in std::iter::once(p).chain(rev) {
                            if let Some(a) = exact_match(&pat(q), u) {
                                return Err(format!("{q} at {i} of h({x}{y}) as {a}"));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(format!("30 windows x 21 patterns, 0 occurrences; {factors} tangram factors rescanned"))
}

fn cut_number_routes() -> Outcome {
    let mut words = all_words(2, 10);
    words.extend(all_words(3, 8));
    let mut tangrams = 0;
    let mut two = 0;
    for w in &words {
        let oracle = cut_number_oracle(w, 4).map_err(|e| e.to_string())?;
        for k in 1..=4 {
            let cuts = oracle.as_ref().is_some_and(|(c, _)| *c <= k);
            let patterns = cut_number_via_patterns(w, k);
            check(cuts == patterns, || format!("{w:?} k={k}: cuts {cuts} patterns {patterns}"))?;
        }
        if let Some((c, cert)) = &oracle {
            tangrams += 1;
            check(cert.validate(w), || format!("{w:?}: bad certificate"))?;
            if *c <= 2 {
                two += 1;
                check(has_square(w), || format!("{w:?}: 2-tangram without a square"))?;
            }
        }
    }
    Ok(format!("{} words, {tangrams} with cut number <= 4, {two} 2-tangrams", words.len()))
}

fn five_tangram() -> Outcome {
    let w = parse_digits("012130212321").unwrap();
    check(FIVE_TANGRAM == "012130212321", || "wrong example word".into())?;
    let (k, cert) = cut_number_oracle(&w, 6).map_err(|e| e.to_string())?.ok_or("not a tangram")?;
    check(k == 5, || format!("cut number {k}"))?;
    let printed = printed_five_cut_certificate();
    check(printed.cut_count() == 5 && printed.validate(&w), || "printed decomposition invalid".into())?;
    let report = check_5tangram_example().map_err(|e| e.to_string())?;
    check(report.passed(), || format!("{report}"))?;
    Ok(format!("cut number 5 ({}), printed {}", cert.render(&w), printed.render(&w)))
}

fn b4_prefix() -> Outcome {
    let full = 1000;
    let report = verify_t3_via_b4(full, 8).map_err(|e| e.to_string())?;
    check(report.passed(), || format!("{report}"))?;

    let b4 = tangram::morphism::b4();
    let w = b4.fixed_point_prefix(0, 10_000).map_err(|e| e.to_string())?;
    check(w[..20] == parse_digits("01210321012303210121").unwrap()[..], || "prefix of length 20 differs".into())?;
    let t = parse_digits("03210123").unwrap();
    check(w.windows(8).any(|x| x == t), || "03210123 missing".into())?;
    check(!has_square_fast(&w), || "square in prefix".into())?;
    check(find_formula_occurrence(&Formula::f3(), &w, 8).is_none(), || "formula occurrence".into())?;
    for &p in &S3[1..] {
        check(find_occurrence(&pat(p), &w, Some(30)).is_none(), || format!("{p} occurs with total image length <= 30"))?;
    }
    Ok(format!(
        "S_3 full search to {full}; squares, formula (cap 8) and S_3 up to image length 30 to 10000"
    ))
}

fn has_square_fast(w: &[u8]) -> bool {
    // a square of period p is a run of p positions with w[j] = w[j + p]
    let n = w.len();
    (1..=n / 2).any(|p| {
        let mut run = 0;
        (0..n - p).any(|i| {
            run = if w[i] == w[i + p] { run + 1 } else { 0 };
            run >= p
        })
    })
}

fn auxiliary() -> Outcome {
    let report = verify_auxiliary_claims(1_000_000_000).map_err(|e| e.to_string())?;
    check(report.passed(), || format!("{report}"))?;
    let max_len = |stage: &str| report.stage(stage).and_then(|s| s.counts.get("max_len").copied());
    check(max_len("binary-square-free") == Some(3), || format!("binary square-free length {:?}", max_len("binary-square-free")))?;
    let aba = max_len("no-4-tangram-no-aba").ok_or("no aba stage")?;
    let seven = max_len("seven-fifths-free-no-4-tangram").ok_or("no 7/5 stage")?;
    Ok(format!("binary square-free 3, avoiding aba {aba}, 7/5+-free {seven}"))
}

fn mutation_sensitivity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x7a2b);
    let lines: Vec<&str> = H_DATA.lines().collect();
    let image_lines: Vec<usize> = (0..lines.len()).filter(|&i| lines[i].contains("->")).collect();
    let mut stages = Vec::new();
    for m in 0..20 {
        let li = image_lines[rng.gen_range(0..image_lines.len())];
        let line = lines[li];
        let start = line.find("->").unwrap() + 3;
        let pos = start + rng.gen_range(0..line.len() - start);
        let old = line.as_bytes()[pos] - b'0';
        let new = (old + rng.gen_range(1..4)) % 4;
        let mut mutated = lines.clone();
        let edited = format!("{}{}{}", &line[..pos], new, &line[pos + 1..]);
        mutated[li] = &edited;
        let config = PipelineConfig {
            morphism: MorphismSource::Text(mutated.join("\n")),
            require_digest: false,
            ..Default::default()
        };
        let report = verify_t4(&config).map_err(|e| e.to_string())?;
        let bad = report.first_problem().ok_or(format!("mutation {m} ({line_no}:{pos}) passed", line_no = li + 1))?;
        check(bad.status == Status::Fail && !bad.witness.as_ref().is_none_or(|w| w.is_empty()), || {
            format!("mutation {m}: {} without a witness", bad.name)
        })?;
        println!("    mutation {m}: line {} col {pos} {old}->{new} fails at {}", li + 1, bad.name);
        stages.push(bad.name.clone());
    }
    Ok(format!("20/20 rejected ({})", stages.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: &[Criterion] = &[
        ("pattern sets S_1..S_4", pattern_sets),
        ("occurrence bounds at 5/4, 9, cap 100", occurrence_bounds),
        ("ABCDACBD constraint system", abcdacbd_system),
        ("synchronization of h", synchronization),
        ("lifting hypothesis for h", lifting_hypothesis),
        ("S_4 occurrences in h windows", window_occurrences),
        ("cut number oracle equivalence", cut_number_routes),
        ("5-tangram example", five_tangram),
        ("b4 fixed point prefix", b4_prefix),
        ("auxiliary backtracking", auxiliary),
        ("mutation sensitivity", mutation_sensitivity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
