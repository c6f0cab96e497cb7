//! Python bindings. Words cross the boundary as digit strings, patterns as
//! uppercase strings, and reports as JSON text.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tangram::bounds;
use tangram::cuts;
use tangram::morphism::{self, UniformMorphism};
use tangram::pattern::{self, Pattern};
use tangram::pipeline::{self, MorphismSource, PipelineConfig};
use tangram::repetition::{self, Enumeration, FreenessParams, Mode, Rational, DEFAULT_BUDGET};
use tangram::word::{self, parse_digits, to_digits};
use tangram::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn digits(s: &str) -> PyResult<Vec<u8>> {
    parse_digits(s).map_err(err)
}

fn rational(s: &str) -> PyResult<Rational> {
    repetition::parse_rational(s).map_err(err)
}

fn pattern_of(s: &str) -> PyResult<Pattern> {
    s.parse().map_err(err)
}

fn freeness(alpha: &str, min_period: usize, inclusive: bool) -> PyResult<FreenessParams> {
    let a = rational(alpha)?;
    if inclusive {
        FreenessParams::inclusive(a, min_period)
    } else {
        FreenessParams::plus(a, min_period)
    }
    .map_err(err)
}

#[pyfunction]
fn is_tangram(w: &str) -> PyResult<bool> {
    Ok(word::is_tangram(&digits(w)?))
}

#[pyfunction]
fn letter_counts(w: &str) -> PyResult<BTreeMap<u8, usize>> {
    Ok(word::letter_counts(&digits(w)?).iter().collect())
}

#[pyfunction]
fn factors(w: &str, min_len: usize, max_len: usize) -> PyResult<Vec<(usize, String)>> {
    let w = digits(w)?;
    Ok(word::factors(&w, min_len, max_len).map(|(i, f)| (i, to_digits(f))).collect())
}

/// `(offset, period, length)` of a forbidden repetition, or None.
#[pyfunction]
#[pyo3(signature = (w, alpha, min_period=1, inclusive=false))]
fn find_violation(w: &str, alpha: &str, min_period: usize, inclusive: bool) -> PyResult<Option<(usize, usize, usize)>> {
    let p = freeness(alpha, min_period, inclusive)?;
    Ok(repetition::find_violation(&digits(w)?, &p).map(|r| (r.offset, r.period, r.length)))
}

#[pyfunction]
#[pyo3(signature = (w, alpha, min_period=1, inclusive=false))]
fn is_free(w: &str, alpha: &str, min_period: usize, inclusive: bool) -> PyResult<bool> {
    Ok(find_violation(w, alpha, min_period, inclusive)?.is_none())
}

/// Number of free words of exactly `length` letters.
#[pyfunction]
#[pyo3(signature = (q, alpha, length, min_period=1, inclusive=false, budget=DEFAULT_BUDGET))]
fn count_free(q: usize, alpha: &str, length: usize, min_period: usize, inclusive: bool, budget: u64) -> PyResult<u64> {
    let p = freeness(alpha, min_period, inclusive)?;
    match repetition::enumerate_free(q, &p, length, Mode::Count, budget).map_err(err)? {
        Enumeration::Count(n) => Ok(n),
        _ => unreachable!("count mode"),
    }
}

#[pyfunction]
#[pyo3(signature = (q, alpha, length, min_period=1, inclusive=false, budget=DEFAULT_BUDGET))]
fn free_words(q: usize, alpha: &str, length: usize, min_period: usize, inclusive: bool, budget: u64) -> PyResult<Vec<String>> {
    let p = freeness(alpha, min_period, inclusive)?;
    match repetition::enumerate_free(q, &p, length, Mode::Stream, budget).map_err(err)? {
        Enumeration::Words(ws) => Ok(ws.iter().map(|w| to_digits(w)).collect()),
        _ => unreachable!("stream mode"),
    }
}

/// Longest free length reached, and whether the search hit `length`.
#[pyfunction]
#[pyo3(signature = (q, alpha, length, min_period=1, inclusive=false, budget=DEFAULT_BUDGET))]
fn longest_free(q: usize, alpha: &str, length: usize, min_period: usize, inclusive: bool, budget: u64) -> PyResult<(usize, bool)> {
    let p = freeness(alpha, min_period, inclusive)?;
    match repetition::enumerate_free(q, &p, length, Mode::Longest, budget).map_err(err)? {
        Enumeration::Longest { length, reached_limit } => Ok((length, reached_limit)),
        _ => unreachable!("longest mode"),
    }
}

#[pyfunction]
fn generate_sk(k: usize) -> Vec<String> {
    pattern::generate_sk(k).iter().map(Pattern::to_string).collect()
}

/// `(offset, images)` for the first occurrence, images listed by variable.
#[pyfunction]
#[pyo3(signature = (p, w, cap=None))]
fn find_occurrence(p: &str, w: &str, cap: Option<usize>) -> PyResult<Option<(usize, Vec<String>)>> {
    let p = pattern_of(p)?;
    Ok(pattern::find_occurrence(&p, &digits(w)?, cap).map(|o| (o.offset, o.assignment.0.iter().map(|x| to_digits(x)).collect())))
}

#[pyfunction]
fn pattern_contains(p: &str, q: &str) -> PyResult<bool> {
    Ok(pattern::pattern_contains(&pattern_of(p)?, &pattern_of(q)?))
}

/// `(k, certificate)` or None when not a tangram of cut number at most
/// `max_k`.
#[pyfunction]
#[pyo3(signature = (w, max_k=6))]
fn cut_number(w: &str, max_k: usize) -> PyResult<Option<(usize, String)>> {
    let w = digits(w)?;
    Ok(cuts::cut_number_oracle(&w, max_k).map_err(err)?.map(|(k, c)| (k, c.render(&w))))
}

#[pyfunction]
fn is_k_tangram(w: &str, k: usize) -> PyResult<bool> {
    Ok(cuts::cut_number_via_patterns(&digits(w)?, k))
}

#[pyclass(name = "Morphism", frozen)]
struct PyMorphism(UniformMorphism);

#[pymethods]
impl PyMorphism {
    /// Parses `LETTER -> IMAGE` lines.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(PyMorphism).map_err(err)
    }

    #[staticmethod]
    fn h() -> Self {
        PyMorphism(morphism::h())
    }

    #[staticmethod]
    fn b4() -> Self {
        PyMorphism(morphism::b4())
    }

    #[getter]
    fn q(&self) -> usize {
        self.0.q()
    }

    fn image(&self, letter: u8) -> PyResult<String> {
        if (letter as usize) >= self.0.source().size() {
            return Err(PyValueError::new_err(format!("letter {letter} out of range")));
        }
        Ok(to_digits(self.0.image(letter)))
    }

    fn apply(&self, w: &str) -> PyResult<String> {
        self.0.apply(&digits(w)?).map(|x| to_digits(&x)).map_err(err)
    }

    fn fixed_point_prefix(&self, seed: u8, length: usize) -> PyResult<String> {
        self.0.fixed_point_prefix(seed, length).map(|x| to_digits(&x)).map_err(err)
    }

    fn is_synchronizing(&self) -> bool {
        self.0.is_synchronizing()
    }

    fn digest(&self) -> String {
        self.0.digest()
    }

    /// Report of the synchronization and lifting checks, as JSON.
    #[pyo3(signature = (alpha="6/5", beta="5/4", min_period=9, budget=DEFAULT_BUDGET))]
    fn verify(&self, alpha: &str, beta: &str, min_period: usize, budget: u64) -> PyResult<String> {
        let r = pipeline::verify_morphism(&self.0, rational(alpha)?, rational(beta)?, min_period, budget).map_err(err)?;
        Ok(r.to_json())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// Constraints rendered as `(small period) or (exponent)`.
#[pyfunction]
#[pyo3(signature = (p, alpha="5/4", min_period=9))]
fn derive_constraints(p: &str, alpha: &str, min_period: usize) -> PyResult<Vec<String>> {
    let sys = bounds::derive_constraints(&pattern_of(p)?, rational(alpha)?, min_period).map_err(err)?;
    Ok(sys.constraints.iter().map(|c| c.to_string()).collect())
}

/// `(bound, lengths)` or None when no lengths below `cap` qualify.
#[pyfunction]
#[pyo3(signature = (p, alpha="5/4", min_period=9, cap=100))]
fn max_occurrence_length(p: &str, alpha: &str, min_period: usize, cap: i64) -> PyResult<Option<(i64, Vec<i64>)>> {
    let b = bounds::max_occurrence_length(&pattern_of(p)?, rational(alpha)?, min_period, cap).map_err(err)?;
    Ok(b.map(|b| (b.bound, b.witness.0)))
}

#[pyfunction]
#[pyo3(signature = (p, alpha="5/4"))]
fn infeasibility_witness(p: &str, alpha: &str) -> PyResult<Option<Vec<i64>>> {
    let c = bounds::infeasibility_witness(&pattern_of(p)?, rational(alpha)?).map_err(err)?;
    Ok(c.map(|c| c.multipliers))
}

/// Runs the full replay. `morphism_text` replaces the shipped morphism.
#[pyfunction]
#[pyo3(signature = (morphism_text=None, require_digest=true))]
fn verify_t4(morphism_text: Option<String>, require_digest: bool) -> PyResult<String> {
    let cfg = PipelineConfig {
        morphism: morphism_text.map_or(MorphismSource::Embedded, MorphismSource::Text),
        require_digest,
        ..PipelineConfig::default()
    };
    pipeline::verify_t4(&cfg).map(|r| r.to_json()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (length=1000, cap=8))]
fn verify_t3(length: usize, cap: usize) -> PyResult<String> {
    pipeline::verify_t3_via_b4(length, cap).map(|r| r.to_json()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (budget=DEFAULT_BUDGET))]
fn verify_aux(budget: u64) -> PyResult<String> {
    pipeline::verify_auxiliary_claims(budget).map(|r| r.to_json()).map_err(err)
}

#[pyfunction]
fn check_5tangram() -> PyResult<String> {
    pipeline::check_5tangram_example().map(|r| r.to_json()).map_err(err)
}

#[pymodule]
pub fn tangram_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(is_tangram, m)?)?;
    m.add_function(wrap_pyfunction!(letter_counts, m)?)?;
    m.add_function(wrap_pyfunction!(factors, m)?)?;
    m.add_function(wrap_pyfunction!(find_violation, m)?)?;
    m.add_function(wrap_pyfunction!(is_free, m)?)?;
    m.add_function(wrap_pyfunction!(count_free, m)?)?;
    m.add_function(wrap_pyfunction!(free_words, m)?)?;
    m.add_function(wrap_pyfunction!(longest_free, m)?)?;
    m.add_function(wrap_pyfunction!(generate_sk, m)?)?;
    m.add_function(wrap_pyfunction!(find_occurrence, m)?)?;
    m.add_function(wrap_pyfunction!(pattern_contains, m)?)?;
    m.add_function(wrap_pyfunction!(cut_number, m)?)?;
    m.add_function(wrap_pyfunction!(is_k_tangram, m)?)?;
    m.add_function(wrap_pyfunction!(derive_constraints, m)?)?;
    m.add_function(wrap_pyfunction!(max_occurrence_length, m)?)?;
    m.add_function(wrap_pyfunction!(infeasibility_witness, m)?)?;
    m.add_function(wrap_pyfunction!(verify_t4, m)?)?;
    m.add_function(wrap_pyfunction!(verify_t3, m)?)?;
    m.add_function(wrap_pyfunction!(verify_aux, m)?)?;
    m.add_function(wrap_pyfunction!(check_5tangram, m)?)?;
    m.add_class::<PyMorphism>()?;
    Ok(())
}
