//! Growth of the coefficient sums `f_{a,b}(n,l) = Σ_r c(nr + ar², l − br)`.
//!
//! The `a = 0` case is decided exactly through the α-test and the
//! specializations `χ_{n_b,j}`; for `a > 0` growth is classified numerically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::arith::{canonical_residue, isqrt, isqrt_i128};
use crate::error::{Error, Result};
use crate::exactla::{functional_on_nullspace, normalize_primitive, ExactMatrix};
use crate::forms::{
    basis_j0m, combine_basis, CoefficientFunction, JacobiForm, Monomial, ResiduePermutation,
};
use crate::polarity::{dim_j0m, enumerate_polar_terms, polar_matrix, polar_order, PolarTerm};
use crate::qseries::{BiSeries, Exponent};

/// Largest `|f|` still counted as small by [`classify_values`].
pub const SLOW_BOUND: i64 = 1000;
/// Some `|f|` above this is required for a fast verdict.
pub const FAST_THRESHOLD: i64 = 1000;

// ---------------------------------------------------------------------------
// α-test and slow spaces about y^b.

/// `max_j [−m(j/b − l/2m)² + (l² − 4mn)/4m]` over `j = 0..b−1`.
pub fn alpha_value(m: i64, b: i64, n: i64, l: i64) -> Rational64 {
    let polarity = Rational64::new(l * l - 4 * m * n, 4 * m);
    (0..b)
        .map(|j| {
            let d = Rational64::new(j, b) - Rational64::new(l, 2 * m);
            polarity - d * d * m
        })
        .max()
        .expect("b >= 1")
}

/// Polar terms a form slow growing about `y^b` must avoid:
/// polarity above `b²`, or `α > 0`.
pub fn slow_constraints(m: i64, b: i64) -> Vec<PolarTerm> {
    enumerate_polar_terms(m)
        .into_iter()
        .filter(|t| t.polarity > b * b || alpha_value(m, b, t.n, t.l) > Rational64::zero())
        .collect()
}

/// `ρ(m, b)`, the number of constraints in [`slow_constraints`].
pub fn rho(m: i64, b: i64) -> i64 {
    slow_constraints(m, b).len() as i64
}

/// `j(m) − ρ(m, b)`, a lower bound for `dim 𝒥⁰ᵇₘ`.
pub fn j_minus_bound(m: i64, b: i64) -> i64 {
    dim_j0m(m) - rho(m, b)
}

/// `j₋(m)`: the best bound over `1 ≤ b ≤ ⌊√m⌋`.
pub fn j_minus(m: i64) -> i64 {
    (1..=isqrt(m))
        .map(|b| j_minus_bound(m, b))
        .max()
        .unwrap_or(i64::MIN)
}

/// True when no nonzero polar term of `form` has `α > 0` for this `b`.
///
/// For a form whose most polar term is `y^b` this decides slow growth.
pub fn no_positive_alpha(form: &JacobiForm, b: i64) -> Result<bool> {
    let m = form.index();
    for t in enumerate_polar_terms(m) {
        if alpha_value(m, b, t.n, t.l) > Rational64::zero() && !form.coeff(t.n, t.l)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True when no nonzero polar term of `form` violates the slow conditions about `y^b`.
pub fn alpha_test(form: &JacobiForm, b: i64) -> Result<bool> {
    let m = form.index();
    for t in slow_constraints(m, b) {
        if !form.coeff(t.n, t.l)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The space `𝒥⁰ᵇₘ` as a nullspace in the monomial basis.
#[derive(Clone, Debug)]
pub struct SlowSpace {
    pub m: i64,
    pub b: i64,
    pub constraints: Vec<PolarTerm>,
    pub monomials: Vec<Monomial>,
    /// Primitive integer vectors spanning the space.
    pub vectors: Vec<Vec<BigInt>>,
    /// Whether some element has `c(0, b) ≠ 0`.
    pub hat_nonempty: bool,
}

impl SlowSpace {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// [`SlowSpace`] for `(m, b)`, expanding the basis to the polar order.
pub fn slow_space(m: i64, b: i64) -> Result<SlowSpace> {
    let basis = basis_j0m(m, polar_order(m))?;
    slow_space_with(m, b, &basis)
}

pub fn slow_space_with(m: i64, b: i64, basis: &[(Monomial, JacobiForm)]) -> Result<SlowSpace> {
    if m < 1 || b < 1 {
        return Err(Error::InvalidArgument(format!(
            "slow space needs m, b >= 1, got m={m}, b={b}"
        )));
    }
    let constraints = slow_constraints(m, b);
    let a = polar_matrix(basis, &constraints)?;
    let vectors = a.nullspace();
    let anchor: Vec<BigInt> = basis
        .iter()
        .map(|(_, f)| f.coeff(0, b))
        .collect::<Result<_>>()?;
    let hat_nonempty = vectors.iter().any(|v| !dot(v, &anchor).is_zero());
    Ok(SlowSpace {
        m,
        b,
        constraints,
        monomials: basis.iter().map(|(mono, _)| *mono).collect(),
        vectors,
        hat_nonempty,
    })
}

/// `dim 𝒥⁰ᵇₘ`.
pub fn dim_slow_0b(m: i64, b: i64) -> Result<usize> {
    Ok(slow_space(m, b)?.dim())
}

/// Whether the affine space of slow forms with `c(a, b) = 1` is nonempty.
///
/// For `a = 0` the slow conditions are those of [`slow_constraints`]. For
/// `a > 0` only polarity is constrained (no term more polar than `qᵃyᵇ`).
pub fn hatj_nonempty(m: i64, a: i64, b: i64) -> Result<bool> {
    let basis = basis_j0m(m, polar_order(m).max(a + 1))?;
    hatj_nonempty_with(m, a, b, &basis)
}

pub fn hatj_nonempty_with(
    m: i64,
    a: i64,
    b: i64,
    basis: &[(Monomial, JacobiForm)],
) -> Result<bool> {
    let anchor = PolarAnchor::new(m, a, b)?;
    let constraints: Vec<PolarTerm> = if a == 0 {
        slow_constraints(m, b)
    } else {
        enumerate_polar_terms(m)
            .into_iter()
            .filter(|t| t.polarity > anchor.polarity())
            .collect()
    };
    let matrix = polar_matrix(basis, &constraints)?;
    let functional: Vec<BigInt> = basis
        .iter()
        .map(|(_, f)| f.coeff(a, b))
        .collect::<Result<_>>()?;
    functional_on_nullspace(&matrix, &functional)
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// f_{a,b}.

/// A polar term `qᵃ yᵇ` of index `m` used as the centre of the sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PolarAnchor {
    a: i64,
    b: i64,
    m: i64,
}

impl PolarAnchor {
    pub fn new(m: i64, a: i64, b: i64) -> Result<PolarAnchor> {
        if m < 1 || a < 0 || b < 1 {
            return Err(Error::InvalidArgument(format!(
                "anchor needs m >= 1, a >= 0, b >= 1, got m={m}, a={a}, b={b}"
            )));
        }
        if b * b - 4 * m * a <= 0 {
            return Err(Error::InvalidArgument(format!(
                "q^{a} y^{b} is not polar at index {m}"
            )));
        }
        Ok(PolarAnchor { a, b, m })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn index(&self) -> i64 {
        self.m
    }

    /// `b² − 4ma`.
    pub fn polarity(&self) -> i64 {
        self.b * self.b - 4 * self.m * self.a
    }

    /// Discriminant of the `r`-th summand of `f(n, l)`.
    fn disc(&self, n: i64, l: i64, r: i64) -> i128 {
        let (n, l, r) = (n as i128, l as i128, r as i128);
        let (a, b, m) = (self.a as i128, self.b as i128, self.m as i128);
        4 * m * (n * r + a * r * r) - (l - b * r) * (l - b * r)
    }

    /// Range of `r` whose summand has polarity at most `pmax`.
    fn window(&self, n: i64, l: i64, pmax: i64) -> Option<(i64, i64)> {
        let delta = self.polarity() as i128;
        let big_b = 4 * self.m as i128 * n as i128 + 2 * self.b as i128 * l as i128;
        let c = l as i128 * l as i128 - pmax as i128;
        // polarity(r) = Δ r² − B r + l²; need Δ r² − B r + (l² − pmax) ≤ 0.
        let disc = big_b * big_b - 4 * delta * c;
        if disc < 0 {
            return None;
        }
        let s = isqrt_i128(disc);
        let mut lo = Integer::div_floor(&(big_b - s), &(2 * delta)) as i64 - 1;
        let mut hi = Integer::div_ceil(&(big_b + s), &(2 * delta)) as i64 + 1;
        let ok = |r: i64| self.disc(n, l, r) >= -(pmax as i128);
        while lo <= hi && !ok(lo) {
            lo += 1;
        }
        while hi >= lo && !ok(hi) {
            hi -= 1;
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Summand positions `(l − br, D_r)` that can be nonzero.
    fn summands(&self, n: i64, l: i64, pmax: i64) -> Vec<(i64, i64)> {
        match self.window(n, l, pmax) {
            None => Vec::new(),
            Some((lo, hi)) => (lo..=hi)
                .map(|r| (l - self.b * r, self.disc(n, l, r) as i64))
                .collect(),
        }
    }
}

impl fmt::Display for PolarAnchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q^{} y^{} (m={})", self.a, self.b, self.m)
    }
}

fn polarity_bound(src: &CoefficientFunction) -> Result<i64> {
    src.max_polarity().ok_or_else(|| {
        Error::InvalidArgument("coefficient sums need a table with a polarity bound".into())
    })
}

fn check_index(src: &CoefficientFunction, anchor: &PolarAnchor) -> Result<()> {
    if src.index() != anchor.index() {
        return Err(Error::InvalidArgument(format!(
            "anchor of index {} used with a table of index {}",
            anchor.index(),
            src.index()
        )));
    }
    Ok(())
}

/// Source order needed to evaluate `f_{a,b}(n, l)` from `src`.
pub fn f_ab_required_order(
    src: &CoefficientFunction,
    anchor: &PolarAnchor,
    n: i64,
    l: i64,
) -> Result<i64> {
    check_index(src, anchor)?;
    let pmax = polarity_bound(src)?;
    Ok(anchor
        .summands(n, l, pmax)
        .into_iter()
        .map(|(mu, d)| src.order_needed(mu, d))
        .max()
        .unwrap_or(0))
}

/// Order a form must be expanded to so that `f_{a,b}` is computable on the grid.
///
/// Assumes the table is read straight off a weight-0 form.
pub fn grid_required_order(
    anchor: &PolarAnchor,
    n_range: RangeInclusive<i64>,
    l_range: RangeInclusive<i64>,
) -> i64 {
    grid_order_with(anchor, n_range, l_range, |mu| mu)
}

fn grid_order_with(
    anchor: &PolarAnchor,
    n_range: RangeInclusive<i64>,
    l_range: RangeInclusive<i64>,
    residue: impl Fn(i64) -> i64,
) -> i64 {
    let m = anchor.index();
    let mut best = 0;
    for n in n_range {
        for l in l_range.clone() {
            for (mu, d) in anchor.summands(n, l, m * m) {
                let r = canonical_residue(residue(mu.rem_euclid(2 * m)), m);
                best = best.max((d + r * r).div_euclid(4 * m) + 1);
            }
        }
    }
    best
}

/// `f_{a,b}(n, l) = Σ_r c(nr + ar², l − br)`, exactly.
///
/// Refuses with `BeyondTruncation` (naming the order needed) rather than
/// summing a partially known window.
pub fn f_ab(src: &CoefficientFunction, anchor: &PolarAnchor, n: i64, l: i64) -> Result<BigInt> {
    let required = f_ab_required_order(src, anchor, n, l)?;
    if required > src.order() {
        return Err(Error::BeyondTruncation {
            requested: format!("f_{{{},{}}}({n},{l})", anchor.a(), anchor.b()),
            truncation: format!("order {}", src.order()),
            required,
        });
    }
    let pmax = polarity_bound(src)?;
    let mut total = BigInt::zero();
    for (mu, d) in anchor.summands(n, l, pmax) {
        total += src.get(mu, d)?;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Numerical classification.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Growth {
    Slow,
    Fast,
    Inconclusive,
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Growth::Slow => "slow",
            Growth::Fast => "fast",
            Growth::Inconclusive => "inconclusive",
        })
    }
}

/// Values of `f_{a,b}` on a grid, with a growth label.
#[derive(Clone, Debug)]
pub struct GrowthSample {
    pub anchor: PolarAnchor,
    pub grid: Vec<(i64, i64, BigInt)>,
    pub classification: Growth,
}

impl GrowthSample {
    /// Lines `e·n + f·l = 0` through the origin carrying the nonzero values.
    pub fn support_lines(&self) -> BTreeSet<(i64, i64)> {
        support_lines(&self.grid)
    }
}

fn support_lines(grid: &[(i64, i64, BigInt)]) -> BTreeSet<(i64, i64)> {
    grid.iter()
        .filter(|(n, l, v)| !v.is_zero() && (*n, *l) != (0, 0))
        .map(|&(n, l, _)| line_through(n, l))
        .collect()
}

/// Primitive `(e, f)` with `e·n + f·l = 0`, sign-normalized.
fn line_through(n: i64, l: i64) -> (i64, i64) {
    let g = n.gcd(&l);
    let (e, f) = (l / g, -n / g);
    if e < 0 || (e == 0 && f < 0) {
        (-e, -f)
    } else {
        (e, f)
    }
}

/// Label a grid of values: see [`SLOW_BOUND`] and [`FAST_THRESHOLD`].
///
/// Fast: some `|f|` exceeds the threshold and the per-`n` maxima of `|f|`
/// strictly increase over three consecutive `n`. Slow: nonzero values lie on
/// at most two lines through the origin and take at most two magnitudes, all
/// small.
pub fn classify_values(grid: &[(i64, i64, BigInt)]) -> Growth {
    let threshold = BigInt::from(FAST_THRESHOLD);
    let mut slice_max: BTreeMap<i64, BigInt> = BTreeMap::new();
    for (n, _, v) in grid {
        let e = slice_max.entry(*n).or_default();
        if v.abs() > *e {
            *e = v.abs();
        }
    }
    let big = grid.iter().any(|(_, _, v)| v.abs() > threshold);
    let slices: Vec<(&i64, &BigInt)> = slice_max.iter().collect();
    let increasing = slices.windows(3).any(|w| {
        *w[1].0 == w[0].0 + 1 && *w[2].0 == w[0].0 + 2 && w[0].1 < w[1].1 && w[1].1 < w[2].1
    });
    if big && increasing {
        return Growth::Fast;
    }
    let magnitudes: BTreeSet<BigInt> = grid
        .iter()
        .filter(|(_, _, v)| !v.is_zero())
        .map(|(_, _, v)| v.abs())
        .collect();
    let small = BigInt::from(SLOW_BOUND);
    if support_lines(grid).len() <= 2
        && magnitudes.len() <= 2
        && magnitudes.iter().all(|v| *v <= small)
    {
        return Growth::Slow;
    }
    Growth::Inconclusive
}

/// Evaluate `f_{a,b}` on `n_range × l_range` and classify.
pub fn classify_growth(
    src: &CoefficientFunction,
    anchor: &PolarAnchor,
    n_range: RangeInclusive<i64>,
    l_range: RangeInclusive<i64>,
) -> Result<GrowthSample> {
    let mut grid = Vec::new();
    for n in n_range {
        for l in l_range.clone() {
            grid.push((n, l, f_ab(src, anchor, n, l)?));
        }
    }
    let classification = classify_values(&grid);
    Ok(GrowthSample {
        anchor: *anchor,
        grid,
        classification,
    })
}

// ---------------------------------------------------------------------------
// Specializations and generating functions.

/// Cyclotomic polynomial `Φ_b`, coefficients in ascending degree.
pub fn cyclotomic_polynomial(b: i64) -> Vec<BigInt> {
    assert!(b >= 1);
    let mut p = vec![BigInt::zero(); b as usize + 1];
    p[0] = BigInt::from(-1);
    p[b as usize] = BigInt::from(1);
    for d in (1..b).filter(|d| b % d == 0) {
        p = divide_monic(&p, &cyclotomic_polynomial(d)).0;
    }
    p
}

/// Quotient and remainder of `p` by a monic divisor.
fn divide_monic(p: &[BigInt], d: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    let dd = d.len() - 1;
    let mut rem = p.to_vec();
    if rem.len() <= dd {
        return (vec![BigInt::zero()], rem);
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        quot[i - dd] = c.clone();
        for (k, dk) in d.iter().enumerate() {
            rem[i - dd + k] -= &c * dk;
        }
    }
    rem.truncate(dd);
    (quot, rem)
}

/// A `q`-series with exponents in `(1/b²)Z` and coefficients in `Z[x]/(x^b − 1)`,
/// `x` standing for a primitive `b`-th root of unity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloSeries {
    b: i64,
    coeffs: BTreeMap<i64, Vec<BigInt>>,
    trunc: i64,
}

impl CycloSeries {
    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn q_den(&self) -> i64 {
        self.b * self.b
    }

    /// Coefficients are exact for `q`-exponents strictly below this.
    pub fn trunc(&self) -> Exponent {
        Exponent::new(self.trunc, self.q_den())
    }

    /// Nonzero coefficients with their exponents.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &[BigInt])> + '_ {
        let den = self.q_den();
        self.coeffs
            .iter()
            .map(move |(e, c)| (Exponent::new(*e, den), c.as_slice()))
    }

    /// Coefficient of `q^exp` as a polynomial in `x` of degree below `b`.
    pub fn coefficient(&self, exp: Exponent) -> Result<Vec<BigInt>> {
        let den = self.q_den();
        if (den % exp.denom()) != 0 {
            return Ok(vec![BigInt::zero(); self.b as usize]);
        }
        let e = exp.numer() * (den / exp.denom());
        if e >= self.trunc {
            return Err(Error::BeyondTruncation {
                requested: format!("q^{exp}"),
                truncation: format!("q^{}", self.trunc()),
                required: 0,
            });
        }
        Ok(self
            .coeffs
            .get(&e)
            .cloned()
            .unwrap_or_else(|| vec![BigInt::zero(); self.b as usize]))
    }

    /// True when no negative power of `q` survives at the primitive root.
    pub fn is_regular(&self) -> Result<bool> {
        if self.trunc <= 0 {
            return Err(Error::BeyondTruncation {
                requested: "q^0".into(),
                truncation: format!("q^{}", self.trunc()),
                required: 0,
            });
        }
        // (`required` is unknown here; see `regularity_order`.)
        let phi = cyclotomic_polynomial(self.b);
        Ok(self
            .coeffs
            .range(..0)
            .all(|(_, c)| divide_monic(c, &phi).1.iter().all(Zero::is_zero)))
    }
}

/// Known range of `χ_{n_b,j}` (scaled by `b²`) from a form known below `q^order`.
fn chi_trunc(m: i64, b: i64, n_b: i64, order: i64) -> i64 {
    // Unknown rows n >= order still reach below q^n through l < 0.
    (order..=order.max(m) + 1)
        .map(|n| n * b * b - isqrt(m * m + 4 * m * n) * n_b * b + m * n_b * n_b)
        .min()
        .expect("nonempty range")
}

/// Smallest order at which every `χ_{n_b,j}` is known up to and including `q⁰`.
pub fn regularity_order(m: i64, b: i64) -> i64 {
    (1..)
        .find(|&order| (0..b).all(|n_b| chi_trunc(m, b, n_b, order) > 0))
        .expect("finite")
}

/// `χ_{n_b,j}(τ) = q^{m n_b²/b²} φ(τ, (n_b τ + j)/b)`.
pub fn specialize_chi(phi: &JacobiForm, b: i64, n_b: i64, j: i64) -> Result<CycloSeries> {
    if b < 1 || !(0..b).contains(&n_b) || !(0..b).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "specialization needs 0 <= n_b, j < b, got b={b}, n_b={n_b}, j={j}"
        )));
    }
    let m = phi.index();
    let order = phi.order();
    let exponent = |n: i64, l: i64| n * b * b + l * n_b * b + m * n_b * n_b;
    let trunc = chi_trunc(m, b, n_b, order);
    let mut coeffs: BTreeMap<i64, Vec<BigInt>> = BTreeMap::new();
    for n in 0..order {
        for (l, c) in phi.row_terms(n) {
            let e = exponent(n, l);
            if e >= trunc {
                continue;
            }
            let slot = coeffs
                .entry(e)
                .or_insert_with(|| vec![BigInt::zero(); b as usize]);
            slot[(j * l).rem_euclid(b) as usize] += c;
        }
    }
    coeffs.retain(|_, c| c.iter().any(|v| !v.is_zero()));
    Ok(CycloSeries { b, coeffs, trunc })
}

/// `F_{n_b,k} = (1/b) Σ_j χ_{n_b,j} ζ^{−kj}` as an integer `q`-series.
///
/// Each coefficient is reduced at the primitive root; it must be a rational
/// multiple of `b`. The result is compared term by term with direct sums
/// `f_{0,b}(n_b + bs, k − 2ms)` at `q^M`, `M = m n_b²/b² + n_b k/b + sk − ms²`.
pub fn generating_f(phi: &JacobiForm, b: i64, n_b: i64, k: i64) -> Result<BiSeries> {
    let m = phi.index();
    let bb = BigInt::from(b);
    let phi_b = cyclotomic_polynomial(b);
    let mut total: BTreeMap<i64, Vec<BigInt>> = BTreeMap::new();
    let mut trunc = i64::MAX;
    for j in 0..b {
        let chi = specialize_chi(phi, b, n_b, j)?;
        trunc = trunc.min(chi.trunc);
        let rot = (k * j).rem_euclid(b);
        for (e, c) in chi.coeffs {
            let slot = total
                .entry(e)
                .or_insert_with(|| vec![BigInt::zero(); b as usize]);
            for (i, v) in c.into_iter().enumerate() {
                slot[(i as i64 - rot).rem_euclid(b) as usize] += v;
            }
        }
    }
    let den = b * b;
    let mut coeffs: BTreeMap<i64, BigInt> = BTreeMap::new();
    for (e, c) in total.range(..trunc) {
        let reduced = divide_monic(c, &phi_b).1;
        let exp = Exponent::new(*e, den);
        if reduced.iter().skip(1).any(|v| !v.is_zero()) {
            return Err(Error::NonIntegralDivision {
                divisor: b.to_string(),
                context: format!("coefficient of q^{exp} is not rational"),
            });
        }
        let v = reduced.into_iter().next().unwrap_or_default();
        let (q, r) = v.div_rem(&bb);
        if !r.is_zero() {
            return Err(Error::NonIntegralDivision {
                divisor: b.to_string(),
                context: format!("coefficient {v} of q^{exp}"),
            });
        }
        if !q.is_zero() {
            coeffs.insert(*e, q);
        }
    }

    // Cross-check against the direct sums.
    let src = phi.to_coefficient_function()?;
    let anchor = PolarAnchor::new(m, 0, b)?;
    let base = m * n_b * n_b + n_b * k * b;
    let scaled = |s: i64| base + (s * k - m * s * s) * den;
    // Every exponent of F is at least −m/4.
    let floor = -(m + 8) * den / 4;
    let centre = Integer::div_floor(&k, &(2 * m));
    for dir in [-1i64, 1] {
        let mut s = if dir < 0 { centre } else { centre + 1 };
        loop {
            let e = scaled(s);
            if e < floor {
                break;
            }
            if e < trunc {
                let direct = f_ab(&src, &anchor, n_b + b * s, k - 2 * m * s)?;
                let generating = coeffs.get(&e).cloned().unwrap_or_default();
                if direct != generating {
                    return Err(Error::MismatchWithDirectSum {
                        exponent: Exponent::new(e, den).to_string(),
                        generating: generating.to_string(),
                        direct: direct.to_string(),
                    });
                }
            }
            s += dir;
        }
    }
    Ok(BiSeries::from_terms(
        coeffs
            .into_iter()
            .map(|(e, c)| (Exponent::new(e, den), Exponent::from_integer(0), c)),
        Some(Exponent::new(trunc, den)),
    ))
}

// ---------------------------------------------------------------------------
// Ŵ_σ transfer relations.

/// `σ = (1 5)(2 10)(4 8)(7 11)` on `Z/12Z`.
pub fn sigma_index6() -> ResiduePermutation {
    ResiduePermutation::from_cycles(6, &[&[1, 5], &[2, 10], &[4, 8], &[7, 11]])
        .expect("valid permutation")
}

/// `σ = (2 6)(4 12)(10 14)` on `Z/16Z`.
pub fn sigma_index8() -> ResiduePermutation {
    ResiduePermutation::from_cycles(8, &[&[2, 6], &[4, 12], &[10, 14]]).expect("valid permutation")
}

/// The anchors and coordinate maps relating `f_{1,b}` to `f̂_{0,b'}`.
struct Transfer {
    sigma: ResiduePermutation,
    lhs: PolarAnchor,
    rhs: PolarAnchor,
    map_lhs: fn(i64, i64) -> (i64, i64),
    map_rhs: fn(i64, i64) -> (i64, i64),
    /// Grid points where the relation holds.
    applies: fn(i64, i64) -> bool,
}

fn transfer_for(m: i64) -> Result<Transfer> {
    match m {
        6 => Ok(Transfer {
            sigma: sigma_index6(),
            lhs: PolarAnchor::new(6, 1, 5)?,
            rhs: PolarAnchor::new(6, 0, 1)?,
            map_lhs: |n, l| (n, l),
            map_rhs: |n, l| (2 * n + l, -9 * n - 5 * l),
            applies: |_, _| true,
        }),
        8 => Ok(Transfer {
            sigma: sigma_index8(),
            lhs: PolarAnchor::new(8, 1, 6)?,
            rhs: PolarAnchor::new(8, 0, 2)?,
            map_lhs: |n, l| (2 * n, 2 * l),
            map_rhs: |n, l| (4 * n + 2 * l, -12 * n - 7 * l),
            // The summation index shifts by 2n + 3l/2.
            applies: |_, l| l % 2 == 0,
        }),
        _ => Err(Error::InvalidArgument(format!(
            "no transfer relation at index {m} (only 6 and 8)"
        ))),
    }
}

/// Order a form must be expanded to for [`wsigma_transfer_check`] on the grid.
pub fn wsigma_required_order(
    m: i64,
    n_range: RangeInclusive<i64>,
    l_range: RangeInclusive<i64>,
) -> Result<i64> {
    let t = transfer_for(m)?;
    let mut best = 0;
    for n in n_range {
        for l in l_range.clone().filter(|&l| (t.applies)(n, l)) {
            let (a, b) = (t.map_lhs)(n, l);
            best = best.max(grid_order_with(&t.lhs, a..=a, b..=b, |mu| mu));
            let (a, b) = (t.map_rhs)(n, l);
            best = best.max(grid_order_with(&t.rhs, a..=a, b..=b, |mu| {
                t.sigma.apply(mu)
            }));
        }
    }
    Ok(best)
}

/// Check `f_{1,5}(n,l) = f̂_{0,1}(2n+l, −9n−5l)` at index 6, or
/// `f_{1,6}(2n,2l) = f̂_{0,2}(4n+2l, −12n−7l)` at index 8, on the grid.
/// At index 8 the relation only holds for even `l`; odd `l` are skipped.
pub fn wsigma_transfer_check(
    src: &CoefficientFunction,
    n_range: RangeInclusive<i64>,
    l_range: RangeInclusive<i64>,
) -> Result<bool> {
    let t = transfer_for(src.index())?;
    let hat = src.apply_w_sigma(&t.sigma)?;
    for n in n_range {
        for l in l_range.clone().filter(|&l| (t.applies)(n, l)) {
            let (a, b) = (t.map_lhs)(n, l);
            let left = f_ab(src, &t.lhs, a, b)?;
            let (c, d) = (t.map_rhs)(n, l);
            let right = f_ab(&hat, &t.rhs, c, d)?;
            if left != right {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Slow subspaces about q^a y^b with a > 0.

/// Numerical study of the forms slow growing about a polar anchor.
#[derive(Clone, Debug)]
pub struct AnchorStudy {
    pub anchor: PolarAnchor,
    /// Dimension of the forms with no term more polar than the anchor.
    pub dim_polar: usize,
    /// Primitive vectors (monomial basis) of the subspace whose sums vanish
    /// off the origin and the degenerate lines.
    pub vectors: Vec<Vec<BigInt>>,
    pub monomials: Vec<Monomial>,
    /// One sample per vector, in the same order.
    pub samples: Vec<GrowthSample>,
    /// Whether some vector has a nonzero coefficient at the anchor.
    pub hat_nonempty: bool,
}

impl AnchorStudy {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Lines along which the `r`-window of `f_{a,b}` degenerates.
///
/// They exist when `b² − 4ma = s²`: `2mn + (b ∓ s)l = 0`.
pub fn degenerate_lines(anchor: &PolarAnchor) -> Vec<(i64, i64)> {
    let delta = anchor.polarity();
    let s = isqrt(delta);
    if s * s != delta {
        return Vec::new();
    }
    let m = anchor.index();
    let b = anchor.b();
    let mut out: Vec<(i64, i64)> = [b - s, b + s]
        .iter()
        .map(|&c| {
            // 2m n + c l = 0 as the line through (c, −2m).
            line_through(c, -2 * m)
        })
        .collect();
    out.dedup();
    out
}

/// Forms in `J_{0,m}` slow growing about `qᵃyᵇ`, found on the grid
/// `0 ≤ n ≤ n_max`, `|l| ≤ l_max`.
///
/// Among forms without terms more polar than the anchor, keep those whose
/// sums vanish off the origin and the degenerate lines; each survivor is then
/// classified on the full grid.
pub fn anchor_study(m: i64, a: i64, b: i64, n_max: i64, l_max: i64) -> Result<AnchorStudy> {
    let anchor = PolarAnchor::new(m, a, b)?;
    let order =
        polar_order(m)
            .max(a + 1)
            .max(grid_required_order(&anchor, 0..=n_max, -l_max..=l_max));
    let basis = basis_j0m(m, order)?;
    let monomials: Vec<Monomial> = basis.iter().map(|(mono, _)| *mono).collect();
    let terms: Vec<PolarTerm> = enumerate_polar_terms(m)
        .into_iter()
        .filter(|t| t.polarity > anchor.polarity())
        .collect();
    let space = polar_matrix(&basis, &terms)?.nullspace();
    let mut study = AnchorStudy {
        anchor,
        dim_polar: space.len(),
        vectors: Vec::new(),
        monomials,
        samples: Vec::new(),
        hat_nonempty: false,
    };
    if space.is_empty() {
        return Ok(study);
    }
    let forms: Vec<JacobiForm> = space
        .iter()
        .map(|v| combine_basis(&basis, v))
        .collect::<Result<_>>()?;
    let tables: Vec<CoefficientFunction> = forms
        .iter()
        .map(JacobiForm::to_coefficient_function)
        .collect::<Result<_>>()?;
    let lines: BTreeSet<(i64, i64)> = degenerate_lines(&anchor).into_iter().collect();
    let mut points = Vec::new();
    let mut values: Vec<Vec<BigInt>> = Vec::new();
    for n in 0..=n_max {
        for l in -l_max..=l_max {
            points.push((n, l));
            values.push(
                tables
                    .iter()
                    .map(|t| f_ab(t, &anchor, n, l))
                    .collect::<Result<_>>()?,
            );
        }
    }
    let off_line: Vec<Vec<BigInt>> = points
        .iter()
        .zip(&values)
        .filter(|((n, l), _)| (*n, *l) != (0, 0) && !lines.contains(&line_through(*n, *l)))
        .map(|(_, v)| v.clone())
        .collect();
    let kernel = ExactMatrix::from_rows(space.len(), off_line)?.nullspace();
    let anchor_coeffs: Vec<BigInt> = forms.iter().map(|f| f.coeff(a, b)).collect::<Result<_>>()?;
    for kv in kernel {
        let mut full = vec![BigInt::zero(); basis.len()];
        for (c, v) in kv.iter().zip(&space) {
            for (slot, x) in full.iter_mut().zip(v) {
                *slot += c * x;
            }
        }
        // Rescale so the sums belong to the primitive vector.
        let lead = full
            .iter()
            .find(|x| !x.is_zero())
            .cloned()
            .unwrap_or_default();
        normalize_primitive(&mut full);
        let first = full
            .iter()
            .find(|x| !x.is_zero())
            .cloned()
            .unwrap_or_default();
        let grid: Vec<(i64, i64, BigInt)> = points
            .iter()
            .zip(&values)
            .map(|(&(n, l), vals)| (n, l, dot(&kv, vals) * &first / &lead))
            .collect();
        let classification = classify_values(&grid);
        study.hat_nonempty |= !dot(&kv, &anchor_coeffs).is_zero();
        study.samples.push(GrowthSample {
            anchor,
            grid,
            classification,
        });
        study.vectors.push(full);
    }
    Ok(study)
}
