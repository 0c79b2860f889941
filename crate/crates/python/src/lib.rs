//! Python bindings for `slowjac`.
//!
//! Forms are passed around as plain Python data: lists of `(n, l, coeff)`
//! triples, monomials as `(alpha, beta, gamma)` tuples and theta quotients as
//! strings such as `"4/2"` or `"3,4/1,2"`.

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use slowjac::forms::{basis_j0m, JacobiForm};
use slowjac::polarity;
use slowjac::slowgrowth::{self, PolarAnchor};
use slowjac::thetaquot::ThetaQuotientSpec;

type Terms = Vec<(i64, i64, BigInt)>;
type Mono = (i64, i64, i64);

fn py_err(e: slowjac::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn terms(f: &JacobiForm) -> Terms {
    (0..f.order())
        .flat_map(|n| f.row_terms(n).into_iter().map(move |(l, c)| (n, l, c)))
        .collect()
}

fn parse_quotient(spec: &str) -> PyResult<ThetaQuotientSpec> {
    spec.parse().map_err(py_err)
}

/// `dim J_{0,m}`.
#[pyfunction]
fn dim_j0m(m: i64) -> i64 {
    polarity::dim_j0m(m)
}

/// Polar terms as `(n, l, polarity)`, most polar first.
#[pyfunction]
fn polar_terms(m: i64) -> Vec<(i64, i64, i64)> {
    polarity::enumerate_polar_terms(m)
        .into_iter()
        .map(|t| (t.n, t.l, t.polarity))
        .collect()
}

#[pyfunction]
fn p_count(m: i64, p: i64) -> PyResult<i64> {
    polarity::p_count(m, p).map_err(py_err)
}

#[pyfunction]
fn p_plus(m: i64) -> i64 {
    polarity::p_plus(m)
}

#[pyfunction]
fn p_minus(m: i64) -> i64 {
    polarity::p_minus(m)
}

/// `(P, witness coefficients, monomials)`.
#[pyfunction]
fn p_of_m(m: i64) -> PyResult<(i64, Vec<BigInt>, Vec<Mono>)> {
    let r = polarity::p_of_m(m).map_err(py_err)?;
    let monos = r.monomials.iter().map(|&[a, b, c]| (a, b, c)).collect();
    Ok((r.p, r.coefficients, monos))
}

/// Monomial basis of `J_{0,m}` expanded to `q^order`.
#[pyfunction]
fn basis(m: i64, order: i64) -> PyResult<Vec<(Mono, Terms)>> {
    let b = basis_j0m(m, order).map_err(py_err)?;
    Ok(b.iter()
        .map(|([x, y, z], f)| ((*x, *y, *z), terms(f)))
        .collect())
}

/// `(index, b)` of a theta quotient.
#[pyfunction]
fn quotient_index(spec: &str) -> PyResult<(i64, i64)> {
    parse_quotient(spec)?.index_and_b().map_err(py_err)
}

#[pyfunction]
fn quotient_is_slow(spec: &str) -> PyResult<bool> {
    let s = parse_quotient(spec)?;
    Ok(s.is_holomorphic() && s.is_slow().map_err(py_err)?)
}

/// Expansion of a theta quotient as `(n, l, coeff)` triples.
#[pyfunction]
fn quotient_series(spec: &str, order: i64) -> PyResult<Terms> {
    let f = parse_quotient(spec)?.to_form(order).map_err(py_err)?;
    Ok(terms(&f))
}

#[pyfunction]
fn j_minus(m: i64) -> i64 {
    slowgrowth::j_minus(m)
}

/// `dim` of the forms slow growing about `y^b`.
#[pyfunction]
fn dim_slow(m: i64, b: i64) -> PyResult<usize> {
    slowgrowth::dim_slow_0b(m, b).map_err(py_err)
}

#[pyfunction]
fn hatj_nonempty(m: i64, a: i64, b: i64) -> PyResult<bool> {
    slowgrowth::hatj_nonempty(m, a, b).map_err(py_err)
}

/// `f_{a,b}(n, l)` of a theta quotient on `0 ≤ n ≤ n_max`, `|l| ≤ l_max`.
#[pyfunction]
fn f_values(spec: &str, a: i64, b: i64, n_max: i64, l_max: i64) -> PyResult<Terms> {
    let s = parse_quotient(spec)?;
    let (m, _) = s.index_and_b().map_err(py_err)?;
    let anchor = PolarAnchor::new(m, a, b).map_err(py_err)?;
    let order = slowgrowth::grid_required_order(&anchor, 0..=n_max, -l_max..=l_max).max(1);
    let cf = s
        .to_form(order)
        .and_then(|f| f.to_coefficient_function())
        .map_err(py_err)?;
    let mut out = Vec::new();
    for n in 0..=n_max {
        for l in -l_max..=l_max {
            out.push((n, l, slowgrowth::f_ab(&cf, &anchor, n, l).map_err(py_err)?));
        }
    }
    Ok(out)
}

/// Growth label (`"slow"`, `"fast"` or `"inconclusive"`) of a theta quotient about `q^a y^b`.
#[pyfunction]
fn classify(spec: &str, a: i64, b: i64, n_max: i64, l_max: i64) -> PyResult<String> {
    let s = parse_quotient(spec)?;
    let (m, _) = s.index_and_b().map_err(py_err)?;
    let anchor = PolarAnchor::new(m, a, b).map_err(py_err)?;
    let order = slowgrowth::grid_required_order(&anchor, 0..=n_max, -l_max..=l_max).max(1);
    let cf = s
        .to_form(order)
        .and_then(|f| f.to_coefficient_function())
        .map_err(py_err)?;
    let sample =
        slowgrowth::classify_growth(&cf, &anchor, 0..=n_max, -l_max..=l_max).map_err(py_err)?;
    Ok(sample.classification.to_string())
}

#[pymodule]
fn pyslowjac(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(dim_j0m, m)?)?;
    m.add_function(wrap_pyfunction!(polar_terms, m)?)?;
    m.add_function(wrap_pyfunction!(p_count, m)?)?;
    m.add_function(wrap_pyfunction!(p_plus, m)?)?;
    m.add_function(wrap_pyfunction!(p_minus, m)?)?;
    m.add_function(wrap_pyfunction!(p_of_m, m)?)?;
    m.add_function(wrap_pyfunction!(basis, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_index, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_is_slow, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_series, m)?)?;
    m.add_function(wrap_pyfunction!(j_minus, m)?)?;
    m.add_function(wrap_pyfunction!(dim_slow, m)?)?;
    m.add_function(wrap_pyfunction!(hatj_nonempty, m)?)?;
    m.add_function(wrap_pyfunction!(f_values, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    Ok(())
}
