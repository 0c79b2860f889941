//! Polar terms and the polarity statistics `P(m)`, `P₋(m)`, `P⁺(m)`.

use num_bigint::BigInt;
use num_integer::Integer;

use crate::arith::{ceil_sqrt, lattice_count_123};
use crate::error::{Error, Result};
use crate::exactla::{ExactMatrix, IncrementalRank};
use crate::forms::{basis_j0m, JacobiForm, Monomial};

/// A polar term `qⁿ yˡ` of index `m` in canonical position `1 ≤ l ≤ m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PolarTerm {
    pub n: i64,
    pub l: i64,
    pub polarity: i64,
}

/// All polar terms, sorted by polarity descending, then `l` descending.
pub fn enumerate_polar_terms(m: i64) -> Vec<PolarTerm> {
    let mut out = Vec::new();
    for l in 1..=m {
        let mut n = 0;
        while l * l - 4 * m * n > 0 {
            out.push(PolarTerm {
                n,
                l,
                polarity: l * l - 4 * m * n,
            });
            n += 1;
        }
    }
    out.sort_by(|a, b| b.polarity.cmp(&a.polarity).then(b.l.cmp(&a.l)));
    out
}

/// `j(m) = dim J_{0,m}`.
pub fn dim_j0m(m: i64) -> i64 {
    lattice_count_123(m)
}

/// Truncation order that covers every polar term of index `m`.
pub fn polar_order(m: i64) -> i64 {
    (m * m - 1).max(0) / (4 * m) + 1
}

fn p_count_formula(m: i64, p: i64) -> i64 {
    (ceil_sqrt(p).max(1)..=m)
        .map(|l| Integer::div_ceil(&(l * l - p).max(0), &(4 * m)))
        .sum()
}

/// Number of polar terms with polarity strictly greater than `p`.
///
/// Counted by enumeration and by the closed formula; the two must agree.
pub fn p_count(m: i64, p: i64) -> Result<i64> {
    if m < 1 || p < 0 {
        return Err(Error::InvalidArgument(format!(
            "p_count needs m >= 1 and P >= 0, got m={m}, P={p}"
        )));
    }
    let formula = p_count_formula(m, p);
    let enumerated = enumerate_polar_terms(m)
        .iter()
        .filter(|t| t.polarity > p)
        .count() as i64;
    if formula != enumerated {
        return Err(Error::FormulaMismatch {
            m,
            threshold: p,
            enumerated,
            formula,
        });
    }
    Ok(formula)
}

/// Smallest `P ≥ 1` with `p_count(m, P) < j(m)`.
///
/// Uses the closed formula only (it is cross-checked by [`p_count`]), so it is
/// cheap enough for large ranges of `m`.
pub fn p_plus(m: i64) -> i64 {
    assert!(m >= 1);
    let j = dim_j0m(m);
    // p_count is non-increasing and vanishes at m².
    let (mut lo, mut hi) = (1, m * m);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if p_count_formula(m, mid) < j {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// `P₋(m) = ⌈m/6⌉`.
pub fn p_minus(m: i64) -> i64 {
    assert!(m >= 1);
    (m + 5) / 6
}

/// `P(m)` with a witness form whose most polar term has exactly that polarity.
#[derive(Clone, Debug)]
pub struct PolarityMinimum {
    pub m: i64,
    pub p: i64,
    /// Coefficients of the witness in the monomial basis.
    pub coefficients: Vec<BigInt>,
    pub monomials: Vec<Monomial>,
}

/// Matrix whose row `i` lists `c(tᵢ)` across the basis, for the given polar terms.
pub fn polar_matrix(basis: &[(Monomial, JacobiForm)], terms: &[PolarTerm]) -> Result<ExactMatrix> {
    let rows = terms
        .iter()
        .map(|t| {
            basis
                .iter()
                .map(|(_, f)| f.coeff(t.n, t.l))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ExactMatrix::from_rows(basis.len(), rows)
}

/// `P(m)`: the smallest maximal polarity of a nonzero form in `J_{0,m}`.
pub fn p_of_m(m: i64) -> Result<PolarityMinimum> {
    let basis = basis_j0m(m, polar_order(m))?;
    p_of_m_with(m, &basis)
}

/// [`p_of_m`] on a precomputed basis (expanded to at least [`polar_order`]).
///
/// Thresholds are scanned at the actual polarity values. Ranks come from an
/// incremental modular echelon form; the answer is certified by an exact
/// nullspace at the returned threshold.
pub fn p_of_m_with(m: i64, basis: &[(Monomial, JacobiForm)]) -> Result<PolarityMinimum> {
    let j = basis.len();
    let terms = enumerate_polar_terms(m);
    let full = polar_matrix(basis, &terms)?;
    let mut inc = IncrementalRank::new(j);
    let mut idx = 0;
    let mut candidate = None;
    while idx < terms.len() {
        let value = terms[idx].polarity;
        // Rows with polarity > value are in; check whether a form survives.
        if inc.rank() < j {
            candidate = Some((value, idx));
        } else {
            break;
        }
        while idx < terms.len() && terms[idx].polarity == value {
            inc.push(full.row(idx));
            idx += 1;
        }
    }
    // The modular rank only bounds from below; walk down until an exact nullspace exists.
    let (mut p, mut rows) = candidate
        .ok_or_else(|| Error::InvariantViolation(format!("no polar terms at index {m}")))?;
    loop {
        let ns = full.top_rows(rows).nullspace();
        if let Some(v) = ns.into_iter().next() {
            return Ok(PolarityMinimum {
                m,
                p,
                coefficients: v,
                monomials: basis.iter().map(|(mono, _)| *mono).collect(),
            });
        }
        // Exact rank exceeded the modular estimate: move to the next larger polarity.
        // (With no rows the nullspace is everything, so `rows > 0` here.)
        let start = terms[..rows]
            .iter()
            .rposition(|t| t.polarity != terms[rows - 1].polarity)
            .map_or(0, |i| i + 1);
        p = terms[rows - 1].polarity;
        rows = start;
    }
}
