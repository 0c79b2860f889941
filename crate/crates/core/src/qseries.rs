//! Truncated bivariate series in `q` and `y` over arbitrary-precision integers.
//!
//! A [`BiSeries`] is a power series in `q` (with rational exponents bounded below)
//! whose coefficients are Laurent polynomials in `y` (again with rational
//! exponents). Exponents are stored scaled by per-series denominators `q_den`
//! and `y_den`, so `q^(a/q_den) y^(b/y_den)` is keyed by the integer pair `(a, b)`.
//!
//! Every series carries a truncation: terms with `q`-exponent at or past it are
//! unknown. Reading a coefficient there is an error rather than a silent zero.
//! A series without truncation is exact (a finite sum of monomials).

use std::cmp::{max, min};
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Rational exponent of `q` or `y`.
pub type Exponent = Ratio<i64>;

/// Default `q` denominator; covers every eta and theta prefactor.
pub const DEFAULT_Q_DEN: i64 = 24;
/// Default `y` denominator; covers half-integral theta exponents.
pub const DEFAULT_Y_DEN: i64 = 2;

/// Dense Laurent polynomial in `y`, trimmed so both end coefficients are nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Row {
    pub(crate) y0: i64,
    pub(crate) c: Vec<BigInt>,
}

impl Row {
    pub(crate) fn new(y0: i64, mut c: Vec<BigInt>) -> Option<Row> {
        let first = c.iter().position(|x| !x.is_zero())?;
        let last = c.iter().rposition(|x| !x.is_zero()).unwrap_or(first);
        c.truncate(last + 1);
        c.drain(..first);
        Some(Row {
            y0: y0 + first as i64,
            c,
        })
    }

    pub(crate) fn monomial(y: i64, coeff: BigInt) -> Option<Row> {
        Row::new(y, vec![coeff])
    }

    pub(crate) fn y_max(&self) -> i64 {
        self.y0 + self.c.len() as i64 - 1
    }

    pub(crate) fn get(&self, y: i64) -> Option<&BigInt> {
        if y < self.y0 {
            return None;
        }
        self.c.get((y - self.y0) as usize)
    }

    fn nonzero(&self) -> impl Iterator<Item = (i64, &BigInt)> {
        let y0 = self.y0;
        self.c
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(move |(i, x)| (y0 + i as i64, x))
    }

    fn max_bits(&self) -> u64 {
        self.c.iter().map(|x| x.bits()).max().unwrap_or(0)
    }
}

/// Growable accumulator for a single row.
#[derive(Default)]
pub(crate) struct RowAcc {
    y0: i64,
    c: Vec<BigInt>,
}

impl RowAcc {
    pub(crate) fn from_row(row: Row) -> RowAcc {
        RowAcc {
            y0: row.y0,
            c: row.c,
        }
    }

    pub(crate) fn reserve(&mut self, lo: i64, hi: i64) {
        if self.c.is_empty() {
            self.y0 = lo;
            self.c = vec![BigInt::zero(); (hi - lo + 1) as usize];
            return;
        }
        let cur_hi = self.y0 + self.c.len() as i64 - 1;
        if lo < self.y0 {
            let pad = (self.y0 - lo) as usize;
            let mut v = vec![BigInt::zero(); pad];
            v.append(&mut self.c);
            self.c = v;
            self.y0 = lo;
        }
        if hi > cur_hi {
            let extra = (hi - cur_hi) as usize;
            self.c
                .extend(std::iter::repeat_with(BigInt::zero).take(extra));
        }
    }

    /// `self += sign * y^shift * row`.
    pub(crate) fn add_row(&mut self, row: &Row, shift: i64, negate: bool) {
        let lo = row.y0 + shift;
        self.reserve(lo, row.y_max() + shift);
        let off = (lo - self.y0) as usize;
        for (i, x) in row.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            if negate {
                self.c[off + i] -= x;
            } else {
                self.c[off + i] += x;
            }
        }
    }

    pub(crate) fn add_at(&mut self, y: i64, value: &BigInt) {
        self.reserve(y, y);
        let i = (y - self.y0) as usize;
        self.c[i] += value;
    }

    pub(crate) fn finish(self) -> Option<Row> {
        Row::new(self.y0, self.c)
    }
}

/// Truncated bivariate series with exact integer coefficients.
#[derive(Clone, Debug)]
pub struct BiSeries {
    q_den: i64,
    y_den: i64,
    rows: BTreeMap<i64, Row>,
    trunc: Option<i64>,
}

fn ratio_scaled(e: Exponent, den: i64) -> Option<i64> {
    let v = e * Ratio::from_integer(den);
    v.is_integer().then(|| v.to_integer())
}

fn ceil_div(a: i64, b: i64) -> i64 {
    Integer::div_ceil(&a, &b)
}

impl BiSeries {
    /// Zero series with the given denominators, truncated at `trunc` (or exact if `None`).
    pub fn zero_with(q_den: i64, y_den: i64, trunc: Option<Exponent>) -> Result<BiSeries> {
        if q_den <= 0 || y_den <= 0 {
            return Err(Error::InvalidArgument(
                "exponent denominators must be positive".into(),
            ));
        }
        let mut q_den = q_den;
        if let Some(t) = trunc {
            q_den = q_den.lcm(t.denom());
        }
        Ok(BiSeries {
            q_den,
            y_den,
            rows: BTreeMap::new(),
            trunc: trunc.map(|t| ratio_scaled(t, q_den).expect("denominator divides")),
        })
    }

    /// Exact zero.
    pub fn zero() -> BiSeries {
        BiSeries {
            q_den: 1,
            y_den: 1,
            rows: BTreeMap::new(),
            trunc: None,
        }
    }

    /// Exact one.
    pub fn one() -> BiSeries {
        BiSeries::monomial(BigInt::one(), Exponent::zero(), Exponent::zero())
    }

    /// Exact monomial `coeff * q^q y^y`.
    pub fn monomial(coeff: BigInt, q: Exponent, y: Exponent) -> BiSeries {
        let q_den = *q.denom();
        let y_den = *y.denom();
        let mut rows = BTreeMap::new();
        if let Some(row) = Row::monomial(*y.numer(), coeff) {
            rows.insert(*q.numer(), row);
        }
        BiSeries {
            q_den,
            y_den,
            rows,
            trunc: None,
        }
    }

    /// Build from `(q_exp, y_exp, coeff)` triples; repeated keys are summed.
    /// Terms at or beyond `trunc` are discarded.
    pub fn from_terms<I>(terms: I, trunc: Option<Exponent>) -> BiSeries
    where
        I: IntoIterator<Item = (Exponent, Exponent, BigInt)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let mut q_den = trunc.map_or(1, |t| *t.denom());
        let mut y_den = 1;
        for (q, y, _) in &terms {
            q_den = q_den.lcm(q.denom());
            y_den = y_den.lcm(y.denom());
        }
        let mut out = BiSeries {
            q_den,
            y_den,
            rows: BTreeMap::new(),
            trunc: trunc.map(|t| ratio_scaled(t, q_den).unwrap()),
        };
        let mut acc: BTreeMap<i64, RowAcc> = BTreeMap::new();
        for (q, y, c) in terms {
            let qn = ratio_scaled(q, q_den).unwrap();
            if out.trunc.is_some_and(|t| qn >= t) {
                continue;
            }
            let yn = ratio_scaled(y, y_den).unwrap();
            acc.entry(qn).or_default().add_at(yn, &c);
        }
        for (q, a) in acc {
            if let Some(row) = a.finish() {
                out.rows.insert(q, row);
            }
        }
        out
    }

    pub(crate) fn from_rows(
        q_den: i64,
        y_den: i64,
        rows: BTreeMap<i64, Row>,
        trunc: Option<i64>,
    ) -> BiSeries {
        let mut s = BiSeries {
            q_den,
            y_den,
            rows,
            trunc,
        };
        if let Some(t) = trunc {
            s.rows.retain(|q, _| *q < t);
        }
        s
    }

    pub fn q_den(&self) -> i64 {
        self.q_den
    }

    pub fn y_den(&self) -> i64 {
        self.y_den
    }

    pub(crate) fn rows(&self) -> &BTreeMap<i64, Row> {
        &self.rows
    }

    pub(crate) fn trunc_scaled(&self) -> Option<i64> {
        self.trunc
    }

    /// Truncation order, `None` for exact series.
    pub fn q_trunc(&self) -> Option<Exponent> {
        self.trunc.map(|t| Exponent::new(t, self.q_den))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    pub fn num_terms(&self) -> usize {
        self.rows
            .values()
            .map(|r| r.c.iter().filter(|x| !x.is_zero()).count())
            .sum()
    }

    /// Smallest stored `q`-exponent.
    pub fn min_q_exp(&self) -> Option<Exponent> {
        self.rows
            .keys()
            .next()
            .map(|q| Exponent::new(*q, self.q_den))
    }

    /// All stored terms in increasing `(q, y)` order.
    pub fn terms(&self) -> impl Iterator<Item = (Exponent, Exponent, &BigInt)> + '_ {
        let (qd, yd) = (self.q_den, self.y_den);
        self.rows.iter().flat_map(move |(q, row)| {
            row.nonzero()
                .map(move |(y, c)| (Exponent::new(*q, qd), Exponent::new(y, yd), c))
        })
    }

    /// Re-express with larger denominators (each must be a multiple of the current one).
    pub fn rescaled(&self, q_den: i64, y_den: i64) -> BiSeries {
        assert!(q_den % self.q_den == 0 && y_den % self.y_den == 0);
        let fq = q_den / self.q_den;
        let fy = y_den / self.y_den;
        if fq == 1 && fy == 1 {
            return self.clone();
        }
        let rows = self
            .rows
            .iter()
            .map(|(q, row)| {
                let row = if fy == 1 {
                    row.clone()
                } else {
                    let mut c = vec![BigInt::zero(); (row.c.len() - 1) * fy as usize + 1];
                    for (i, x) in row.c.iter().enumerate() {
                        c[i * fy as usize] = x.clone();
                    }
                    Row { y0: row.y0 * fy, c }
                };
                (q * fq, row)
            })
            .collect();
        BiSeries {
            q_den,
            y_den,
            rows,
            trunc: self.trunc.map(|t| t * fq),
        }
    }

    fn common(a: &BiSeries, b: &BiSeries) -> (i64, i64) {
        (a.q_den.lcm(&b.q_den), a.y_den.lcm(&b.y_den))
    }

    /// Keep only terms with `q`-exponent below `order`.
    pub fn truncate(&self, order: Exponent) -> BiSeries {
        let qd = self.q_den.lcm(order.denom());
        let mut s = self.rescaled(qd, self.y_den);
        let t = ratio_scaled(order, qd).unwrap();
        let t = s.trunc.map_or(t, |old| min(old, t));
        s.trunc = Some(t);
        s.rows.retain(|q, _| *q < t);
        s
    }

    fn min_trunc(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(min(x, y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    pub fn add(&self, other: &BiSeries) -> BiSeries {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &BiSeries) -> BiSeries {
        self.combine(other, true)
    }

    fn combine(&self, other: &BiSeries, negate: bool) -> BiSeries {
        let (qd, yd) = BiSeries::common(self, other);
        let a = self.rescaled(qd, yd);
        let b = other.rescaled(qd, yd);
        let trunc = BiSeries::min_trunc(a.trunc, b.trunc);
        let mut rows = a.rows;
        for (q, row) in b.rows {
            if trunc.is_some_and(|t| q >= t) {
                continue;
            }
            match rows.remove(&q) {
                Some(existing) => {
                    let mut acc = RowAcc::from_row(existing);
                    acc.add_row(&row, 0, negate);
                    if let Some(r) = acc.finish() {
                        rows.insert(q, r);
                    }
                }
                None => {
                    let row = if negate { neg_row(&row) } else { row };
                    rows.insert(q, row);
                }
            }
        }
        BiSeries::from_rows(qd, yd, rows, trunc)
    }

    pub fn neg(&self) -> BiSeries {
        let mut s = self.clone();
        for row in s.rows.values_mut() {
            for x in row.c.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        s
    }

    /// Multiply every coefficient by an integer.
    pub fn scale(&self, k: &BigInt) -> BiSeries {
        if k.is_zero() {
            return BiSeries {
                rows: BTreeMap::new(),
                ..self.clone()
            };
        }
        let mut s = self.clone();
        for row in s.rows.values_mut() {
            for x in row.c.iter_mut() {
                *x *= k;
            }
        }
        s
    }

    /// Divide every coefficient by `k`, failing unless every division is exact.
    pub fn div_exact(&self, k: &BigInt) -> Result<BiSeries> {
        let mut s = self.clone();
        for (q, row) in s.rows.iter_mut() {
            for (i, x) in row.c.iter_mut().enumerate() {
                let (quo, rem) = x.div_rem(k);
                if !rem.is_zero() {
                    return Err(Error::NonIntegralDivision {
                        divisor: k.to_string(),
                        context: format!(
                            "coefficient {} of q^{} y^{}",
                            x,
                            Exponent::new(*q, self.q_den),
                            Exponent::new(row.y0 + i as i64, self.y_den)
                        ),
                    });
                }
                *x = quo;
            }
        }
        Ok(s)
    }

    /// Multiply by the monomial `q^q y^y` (exact shift of all exponents).
    pub fn mul_monomial(&self, q: Exponent, y: Exponent) -> BiSeries {
        let qd = self.q_den.lcm(q.denom());
        let yd = self.y_den.lcm(y.denom());
        let s = self.rescaled(qd, yd);
        let dq = ratio_scaled(q, qd).unwrap();
        let dy = ratio_scaled(y, yd).unwrap();
        let rows = s
            .rows
            .into_iter()
            .map(|(k, mut row)| {
                row.y0 += dy;
                (k + dq, row)
            })
            .collect();
        BiSeries {
            q_den: qd,
            y_den: yd,
            rows,
            trunc: s.trunc.map(|t| t + dq),
        }
    }

    /// Substitute `y -> y^k` for a positive integer `k`.
    pub fn substitute_y_power(&self, k: i64) -> BiSeries {
        assert!(k > 0, "substitution power must be positive");
        let fy = k;
        let rows = self
            .rows
            .iter()
            .map(|(q, row)| {
                let mut c = vec![BigInt::zero(); (row.c.len() - 1) * fy as usize + 1];
                for (i, x) in row.c.iter().enumerate() {
                    c[i * fy as usize] = x.clone();
                }
                (*q, Row { y0: row.y0 * fy, c })
            })
            .collect();
        BiSeries {
            rows,
            ..self.clone()
        }
    }

    /// Specialize `y = 1`, leaving a series in `q` alone.
    pub fn at_y_one(&self) -> BiSeries {
        let mut rows = BTreeMap::new();
        for (q, row) in &self.rows {
            let s: BigInt = row.c.iter().sum();
            if let Some(r) = Row::monomial(0, s) {
                rows.insert(*q, r);
            }
        }
        BiSeries {
            q_den: self.q_den,
            y_den: 1,
            rows,
            trunc: self.trunc,
        }
    }

    /// Lower bound on the `q`-valuation in scaled units: the first stored
    /// exponent, or the truncation for an unknown-but-vanishing prefix.
    fn valuation(&self) -> Option<i64> {
        self.rows.keys().next().copied().or(self.trunc)
    }

    fn product_trunc(&self, other: &BiSeries) -> Option<i64> {
        // Both series rescaled to common denominators by the caller.
        let (va, vb) = (self.valuation(), other.valuation());
        let t1 = match (self.trunc, vb) {
            (Some(t), Some(v)) => Some(t + v),
            _ => None,
        };
        let t2 = match (other.trunc, va) {
            (Some(t), Some(v)) => Some(t + v),
            _ => None,
        };
        // An exact zero operand makes the product exactly zero.
        if (self.rows.is_empty() && self.trunc.is_none())
            || (other.rows.is_empty() && other.trunc.is_none())
        {
            return None;
        }
        BiSeries::min_trunc(t1, t2)
    }

    /// Cauchy product with pessimistically propagated truncation.
    pub fn mul(&self, other: &BiSeries) -> BiSeries {
        self.mul_up_to(other, None)
    }

    /// Product restricted to `q`-exponents below `limit` (in addition to the
    /// propagated truncation).
    pub fn mul_up_to(&self, other: &BiSeries, limit: Option<Exponent>) -> BiSeries {
        let (mut qd, yd) = BiSeries::common(self, other);
        if let Some(l) = limit {
            qd = qd.lcm(l.denom());
        }
        let a = self.rescaled(qd, yd);
        let b = other.rescaled(qd, yd);
        let mut trunc = a.product_trunc(&b);
        if let Some(l) = limit {
            trunc = BiSeries::min_trunc(trunc, Some(ratio_scaled(l, qd).unwrap()));
        }
        let rows = crate::qseries::kernel::mul_rows(&a.rows, &b.rows, trunc);
        BiSeries::from_rows(qd, yd, rows, trunc)
    }

    /// Multiplicative inverse up to truncation.
    ///
    /// The lowest-order coefficient must be `±y^k`.
    pub fn invert(&self) -> Result<BiSeries> {
        let (&v, lead) = self
            .rows
            .iter()
            .next()
            .ok_or_else(|| Error::NonUnitLeading("series is zero".into()))?;
        if lead.c.len() != 1 || !lead.c[0].abs().is_one() {
            return Err(Error::NonUnitLeading(format!(
                "{} at q^{}",
                row_to_string(lead, self.y_den),
                Exponent::new(v, self.q_den)
            )));
        }
        let k = lead.y0;
        let unit_neg = lead.c[0].is_negative();
        if self.rows.len() == 1 {
            let c = if unit_neg {
                -BigInt::one()
            } else {
                BigInt::one()
            };
            let mut rows = BTreeMap::new();
            rows.insert(-v, Row::monomial(-k, c).unwrap());
            return Ok(BiSeries {
                q_den: self.q_den,
                y_den: self.y_den,
                rows,
                trunc: self.trunc.map(|t| t - 2 * v),
            });
        }
        let Some(t) = self.trunc else {
            return Err(Error::UnboundedPrecision);
        };
        // a = u (1 + tail), u = ±q^v y^k.
        let rel_trunc = t - v;
        let tail: Vec<(i64, Row)> = self
            .rows
            .iter()
            .skip(1)
            .map(|(q, row)| {
                let mut r = row.clone();
                r.y0 -= k;
                if unit_neg {
                    r = neg_row(&r);
                }
                (q - v, r)
            })
            .collect();
        let step = tail.iter().fold(0i64, |g, (d, _)| g.gcd(d));
        let mut inv: BTreeMap<i64, Row> = BTreeMap::new();
        inv.insert(0, Row::monomial(0, BigInt::one()).unwrap());
        let mut s = step;
        while s < rel_trunc {
            let mut acc = RowAcc::default();
            for (d, row) in &tail {
                if *d > s {
                    break;
                }
                if let Some(prev) = inv.get(&(s - d)) {
                    let prod = kernel::mul_row(row, prev);
                    if let Some(p) = prod {
                        acc.add_row(&p, 0, true);
                    }
                }
            }
            if let Some(r) = acc.finish() {
                inv.insert(s, r);
            }
            s += step;
        }
        let rows = inv
            .into_iter()
            .map(|(s, mut row)| {
                row.y0 -= k;
                if unit_neg {
                    row = neg_row(&row);
                }
                (s - v, row)
            })
            .collect();
        Ok(BiSeries::from_rows(
            self.q_den,
            self.y_den,
            rows,
            Some(rel_trunc - v),
        ))
    }

    /// Integer power by repeated squaring; negative powers go through [`invert`](Self::invert).
    pub fn pow(&self, k: i64) -> Result<BiSeries> {
        if k < 0 {
            return self.invert()?.pow(-k);
        }
        let mut result = BiSeries::one();
        let mut base = self.clone();
        let mut e = k;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first {
                    first = false;
                    base.clone()
                } else {
                    result.mul(&base)
                };
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    /// Coefficient of `q^q_exp y^y_exp`.
    pub fn coeff_at(&self, q_exp: Exponent, y_exp: Exponent) -> Result<BigInt> {
        if let Some(t) = self.q_trunc() {
            if q_exp >= t {
                return Err(Error::BeyondTruncation {
                    requested: q_exp.to_string(),
                    truncation: t.to_string(),
                    required: (q_exp + Exponent::one()).floor().to_integer(),
                });
            }
        }
        let (Some(qn), Some(yn)) = (
            ratio_scaled(q_exp, self.q_den),
            ratio_scaled(y_exp, self.y_den),
        ) else {
            return Ok(BigInt::zero());
        };
        Ok(self
            .rows
            .get(&qn)
            .and_then(|r| r.get(yn))
            .cloned()
            .unwrap_or_default())
    }

    /// Same series with both denominators reduced to 1.
    pub fn normalize_integral(&self) -> Result<BiSeries> {
        let (qd, yd) = (self.q_den, self.y_den);
        let mut rows = BTreeMap::new();
        for (q, row) in &self.rows {
            if q % qd != 0 {
                let (y, _) = row.nonzero().next().unwrap();
                return Err(Error::NonIntegralExponent {
                    q: Exponent::new(*q, qd).to_string(),
                    y: Exponent::new(y, yd).to_string(),
                });
            }
            let mut acc = RowAcc::default();
            for (y, c) in row.nonzero() {
                if y % yd != 0 {
                    return Err(Error::NonIntegralExponent {
                        q: Exponent::new(*q, qd).to_string(),
                        y: Exponent::new(y, yd).to_string(),
                    });
                }
                acc.add_at(y / yd, c);
            }
            if let Some(r) = acc.finish() {
                rows.insert(q / qd, r);
            }
        }
        Ok(BiSeries {
            q_den: 1,
            y_den: 1,
            rows,
            trunc: self.trunc.map(|t| ceil_div(t, qd)),
        })
    }

    /// In place: multiply by `(1 - q^a y^b)` with `a >= 0` (scaled units).
    pub(crate) fn mul_one_minus_scaled(&mut self, a: i64, b: i64) {
        assert!(a >= 0);
        if a == 0 {
            let keys: Vec<i64> = self.rows.keys().copied().collect();
            for q in keys {
                let row = self.rows.remove(&q).unwrap();
                let mut acc = RowAcc::from_row(row.clone());
                acc.add_row(&row, b, true);
                if let Some(r) = acc.finish() {
                    self.rows.insert(q, r);
                }
            }
            return;
        }
        let keys: Vec<i64> = self.rows.keys().rev().copied().collect();
        for q in keys {
            let target = q + a;
            if self.trunc.is_some_and(|t| target >= t) {
                continue;
            }
            let src = self.rows[&q].clone();
            let acc = match self.rows.remove(&target) {
                Some(r) => {
                    let mut acc = RowAcc::from_row(r);
                    acc.add_row(&src, b, true);
                    acc
                }
                None => {
                    let mut acc = RowAcc::default();
                    acc.add_row(&src, b, true);
                    acc
                }
            };
            if let Some(r) = acc.finish() {
                self.rows.insert(target, r);
            }
        }
    }

    /// In place: divide by `(1 - q^a y^b)` with `a > 0` (scaled units).
    pub(crate) fn div_one_minus_scaled(&mut self, a: i64, b: i64) -> Result<()> {
        assert!(a > 0);
        let Some(t) = self.trunc else {
            if self.rows.is_empty() {
                return Ok(());
            }
            return Err(Error::UnboundedPrecision);
        };
        // new[q] = old[q] + y^b new[q - a], ascending in q.
        let Some(&start) = self.rows.keys().next() else {
            return Ok(());
        };
        let residues: Vec<i64> = {
            let mut r: Vec<i64> = self
                .rows
                .keys()
                .map(|q| (q - start).rem_euclid(a))
                .collect();
            r.sort_unstable();
            r.dedup();
            r
        };
        for res in residues {
            let mut q = start + res;
            let mut prev: Option<Row> = None;
            while q < t {
                let cur = self.rows.remove(&q);
                let next = match (cur, &prev) {
                    (Some(c), Some(p)) => {
                        let mut acc = RowAcc::from_row(c);
                        acc.add_row(p, b, false);
                        acc.finish()
                    }
                    (Some(c), None) => Some(c),
                    (None, Some(p)) => {
                        let mut r = p.clone();
                        r.y0 += b;
                        Some(r)
                    }
                    (None, None) => None,
                };
                if let Some(r) = &next {
                    self.rows.insert(q, r.clone());
                }
                prev = next;
                q += a;
            }
        }
        Ok(())
    }

    /// Multiply by `(1 - q^a y^b)` for rational exponents, `a >= 0`.
    pub fn mul_one_minus(&self, a: Exponent, b: Exponent) -> BiSeries {
        let qd = self.q_den.lcm(a.denom());
        let yd = self.y_den.lcm(b.denom());
        let mut s = self.rescaled(qd, yd);
        s.mul_one_minus_scaled(ratio_scaled(a, qd).unwrap(), ratio_scaled(b, yd).unwrap());
        s
    }

    /// Divide by `(1 - q^a y^b)` for rational exponents, `a > 0`.
    pub fn div_one_minus(&self, a: Exponent, b: Exponent) -> Result<BiSeries> {
        let qd = self.q_den.lcm(a.denom());
        let yd = self.y_den.lcm(b.denom());
        let mut s = self.rescaled(qd, yd);
        s.div_one_minus_scaled(ratio_scaled(a, qd).unwrap(), ratio_scaled(b, yd).unwrap())?;
        Ok(s)
    }
}

pub(crate) fn neg_row(row: &Row) -> Row {
    Row {
        y0: row.y0,
        c: row.c.iter().map(|x| -x).collect(),
    }
}

fn row_to_string(row: &Row, y_den: i64) -> String {
    let parts: Vec<String> = row
        .nonzero()
        .map(|(y, c)| format!("{}*y^{}", c, Exponent::new(y, y_den)))
        .collect();
    parts.join(" + ")
}

impl PartialEq for BiSeries {
    fn eq(&self, other: &Self) -> bool {
        let (qd, yd) = BiSeries::common(self, other);
        let a = self.rescaled(qd, yd);
        let b = other.rescaled(qd, yd);
        a.trunc == b.trunc && a.rows == b.rows
    }
}

impl Eq for BiSeries {}

impl fmt::Display for BiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (q, y, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if !q.is_zero() {
                write!(f, "*q^{q}")?;
            }
            if !y.is_zero() {
                write!(f, "*y^{y}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Some(t) = self.q_trunc() {
            write!(f, " + O(q^{t})")?;
        }
        Ok(())
    }
}

pub(crate) mod kernel {
    //! Row convolution kernels behind [`BiSeries::mul`].

    use super::*;

    /// Product of two Laurent polynomials.
    pub(crate) fn mul_row(a: &Row, b: &Row) -> Option<Row> {
        let mut out = vec![BigInt::zero(); a.c.len() + b.c.len() - 1];
        for (i, x) in a.c.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.c.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                out[i + j] += x * y;
            }
        }
        Row::new(a.y0 + b.y0, out)
    }

    struct Sparse64 {
        q: i64,
        y0: i64,
        width: usize,
        terms: Vec<(usize, i64)>,
    }

    fn to_sparse64(rows: &BTreeMap<i64, Row>) -> Option<Vec<Sparse64>> {
        rows.iter()
            .map(|(q, row)| {
                let terms = row
                    .c
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(i, x)| x.to_i64().map(|v| (i, v)))
                    .collect::<Option<Vec<_>>>()?;
                Some(Sparse64 {
                    q: *q,
                    y0: row.y0,
                    width: row.c.len(),
                    terms,
                })
            })
            .collect()
    }

    fn bits_of(rows: &BTreeMap<i64, Row>) -> u64 {
        rows.values().map(Row::max_bits).max().unwrap_or(0)
    }

    fn count_terms(rows: &BTreeMap<i64, Row>) -> usize {
        rows.values().map(|r| r.c.len()).sum()
    }

    /// Truncated product of two row maps (denominators already aligned).
    pub(crate) fn mul_rows(
        a: &BTreeMap<i64, Row>,
        b: &BTreeMap<i64, Row>,
        trunc: Option<i64>,
    ) -> BTreeMap<i64, Row> {
        if a.is_empty() || b.is_empty() {
            return BTreeMap::new();
        }
        let n_min = min(count_terms(a), count_terms(b)).max(1) as u64;
        let log_n = 64 - n_min.leading_zeros() as u64;
        let (bits_a, bits_b) = (bits_of(a), bits_of(b));
        let fits = bits_a <= 62 && bits_b <= 62 && bits_a + bits_b + log_n <= 125;
        if fits {
            if let (Some(sa), Some(sb)) = (to_sparse64(a), to_sparse64(b)) {
                return mul_rows_i128(&sa, &sb, trunc);
            }
        }
        let bound = bits_a + bits_b + log_n + 1;
        if bound < crate::ntt::capacity_bits() && schoolbook_cost(a, b, trunc) > NTT_THRESHOLD {
            if let Some(rows) = mul_rows_ntt(a, b, trunc, bound) {
                return rows;
            }
        }
        mul_rows_big(a, b, trunc)
    }

    /// Schoolbook work (nonzero pairs) above which the transform path is used.
    const NTT_THRESHOLD: u64 = 400_000;

    fn schoolbook_cost(a: &BTreeMap<i64, Row>, b: &BTreeMap<i64, Row>, trunc: Option<i64>) -> u64 {
        let mut cost = 0u64;
        for (qa, ra) in a {
            for (qb, rb) in b {
                if trunc.is_some_and(|t| qa + qb >= t) {
                    break;
                }
                cost += (ra.c.len() * rb.c.len()) as u64;
            }
            if cost > NTT_THRESHOLD {
                break;
            }
        }
        cost
    }

    /// Kronecker substitution: rows are laid out in fixed-width slots of one long
    /// sequence, convolved once, and cut back into rows.
    fn mul_rows_ntt(
        a: &BTreeMap<i64, Row>,
        b: &BTreeMap<i64, Row>,
        trunc: Option<i64>,
        bound_bits: u64,
    ) -> Option<BTreeMap<i64, Row>> {
        let (qa0, qb0) = (*a.keys().next()?, *b.keys().next()?);
        let keep_a: Vec<(&i64, &Row)> = a
            .iter()
            .filter(|(q, _)| trunc.is_none_or(|t| **q + qb0 < t))
            .collect();
        let keep_b: Vec<(&i64, &Row)> = b
            .iter()
            .filter(|(q, _)| trunc.is_none_or(|t| qa0 + **q < t))
            .collect();
        let step = keep_a
            .iter()
            .map(|(q, _)| **q - qa0)
            .chain(keep_b.iter().map(|(q, _)| **q - qb0))
            .fold(0i64, |g, d| g.gcd(&d))
            .max(1);
        let ya0 = keep_a.iter().map(|(_, r)| r.y0).min()?;
        let ya1 = keep_a.iter().map(|(_, r)| r.y_max()).max()?;
        let yb0 = keep_b.iter().map(|(_, r)| r.y0).min()?;
        let yb1 = keep_b.iter().map(|(_, r)| r.y_max()).max()?;
        let width = ((ya1 - ya0) + (yb1 - yb0) + 1) as usize;
        let pack = |rows: &[(&i64, &Row)], q0: i64, y0: i64| -> Vec<BigInt> {
            let last = (*rows.last().unwrap().0 - q0) / step;
            let mut v = vec![BigInt::zero(); (last as usize + 1) * width];
            for (q, row) in rows {
                let base = ((**q - q0) / step) as usize * width + (row.y0 - y0) as usize;
                for (i, x) in row.c.iter().enumerate() {
                    v[base + i] = x.clone();
                }
            }
            v
        };
        let va = pack(&keep_a, qa0, ya0);
        let vb = pack(&keep_b, qb0, yb0);
        if (va.len() + vb.len()).next_power_of_two() > crate::ntt::max_len() {
            return None;
        }
        let full = va.len() + vb.len() - 1;
        let out_rows = match trunc {
            Some(t) => (((t - qa0 - qb0) + step - 1) / step).max(0) as usize,
            None => full.div_ceil(width),
        };
        let out_len = (out_rows * width).min(full);
        let conv = crate::ntt::convolve(&va, &vb, out_len, bound_bits);
        let mut rows = BTreeMap::new();
        for (k, chunk) in conv.chunks(width).enumerate() {
            let q = qa0 + qb0 + k as i64 * step;
            if trunc.is_some_and(|t| q >= t) {
                break;
            }
            if let Some(r) = Row::new(ya0 + yb0, chunk.to_vec()) {
                rows.insert(q, r);
            }
        }
        Some(rows)
    }

    fn output_ranges(
        a: &BTreeMap<i64, Row>,
        b: &BTreeMap<i64, Row>,
        trunc: Option<i64>,
    ) -> BTreeMap<i64, (i64, i64)> {
        let mut ranges: BTreeMap<i64, (i64, i64)> = BTreeMap::new();
        for (qa, ra) in a {
            for (qb, rb) in b {
                let q = qa + qb;
                if trunc.is_some_and(|t| q >= t) {
                    break;
                }
                let lo = ra.y0 + rb.y0;
                let hi = ra.y_max() + rb.y_max();
                ranges
                    .entry(q)
                    .and_modify(|r| *r = (min(r.0, lo), max(r.1, hi)))
                    .or_insert((lo, hi));
            }
        }
        ranges
    }

    fn mul_rows_i128(a: &[Sparse64], b: &[Sparse64], trunc: Option<i64>) -> BTreeMap<i64, Row> {
        let mut ranges: BTreeMap<i64, (i64, i64)> = BTreeMap::new();
        for ra in a {
            for rb in b {
                let q = ra.q + rb.q;
                if trunc.is_some_and(|t| q >= t) {
                    break;
                }
                let lo = ra.y0 + rb.y0;
                let hi = ra.y0 + rb.y0 + (ra.width + rb.width) as i64 - 2;
                ranges
                    .entry(q)
                    .and_modify(|r| *r = (min(r.0, lo), max(r.1, hi)))
                    .or_insert((lo, hi));
            }
        }
        let mut acc: BTreeMap<i64, Vec<i128>> = ranges
            .iter()
            .map(|(q, (lo, hi))| (*q, vec![0i128; (hi - lo + 1) as usize]))
            .collect();
        for ra in a {
            for rb in b {
                let q = ra.q + rb.q;
                if trunc.is_some_and(|t| q >= t) {
                    break;
                }
                let lo = ranges[&q].0;
                let out = acc.get_mut(&q).unwrap();
                let base = (ra.y0 + rb.y0 - lo) as usize;
                for &(i, x) in &ra.terms {
                    let x = x as i128;
                    let o = &mut out[base + i..];
                    for &(j, y) in &rb.terms {
                        o[j] += x * y as i128;
                    }
                }
            }
        }
        acc.into_iter()
            .filter_map(|(q, v)| {
                let lo = ranges[&q].0;
                Row::new(lo, v.into_iter().map(BigInt::from).collect()).map(|r| (q, r))
            })
            .collect()
    }

    pub(crate) fn mul_rows_big(
        a: &BTreeMap<i64, Row>,
        b: &BTreeMap<i64, Row>,
        trunc: Option<i64>,
    ) -> BTreeMap<i64, Row> {
        let ranges = output_ranges(a, b, trunc);
        let mut acc: BTreeMap<i64, Vec<BigInt>> = ranges
            .iter()
            .map(|(q, (lo, hi))| (*q, vec![BigInt::zero(); (hi - lo + 1) as usize]))
            .collect();
        let nz_b: BTreeMap<i64, Vec<(usize, &BigInt)>> = b
            .iter()
            .map(|(q, r)| {
                (
                    *q,
                    r.c.iter()
                        .enumerate()
                        .filter(|(_, x)| !x.is_zero())
                        .collect(),
                )
            })
            .collect();
        for (qa, ra) in a {
            for (qb, rb) in b {
                let q = qa + qb;
                if trunc.is_some_and(|t| q >= t) {
                    break;
                }
                let lo = ranges[&q].0;
                let out = acc.get_mut(&q).unwrap();
                let base = (ra.y0 + rb.y0 - lo) as usize;
                let nb = &nz_b[qb];
                for (i, x) in ra.c.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let o = &mut out[base + i..];
                    for (j, y) in nb {
                        o[*j] += x * *y;
                    }
                }
            }
        }
        acc.into_iter()
            .filter_map(|(q, v)| {
                let lo = ranges[&q].0;
                Row::new(lo, v).map(|r| (q, r))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: i64, d: i64) -> Exponent {
        Exponent::new(n, d)
    }

    fn ey(n: i64) -> Exponent {
        Exponent::from_integer(n)
    }

    fn mono(c: i64, q: i64, y: i64) -> BiSeries {
        BiSeries::monomial(BigInt::from(c), ey(q), ey(y))
    }

    #[test]
    fn add_cancels_and_identity() {
        let s = mono(1, 0, 1).add(&mono(1, 0, -1));
        assert_eq!(s.num_terms(), 2);
        assert_eq!(s.coeff_at(ey(0), ey(1)).unwrap(), BigInt::one());
        assert_eq!(s.add(&BiSeries::zero()), s);
        let q = mono(1, 1, 0);
        assert!(q.sub(&q).is_zero());
    }

    #[test]
    fn mul_small() {
        let a = mono(1, 0, 1).add(&mono(1, 0, -1));
        let b = mono(1, 0, 1).sub(&mono(1, 0, -1));
        let expected = mono(1, 0, 2).sub(&mono(1, 0, -2));
        assert_eq!(a.mul(&b), expected);
        assert_eq!(a.mul(&BiSeries::one()), a);
    }

    #[test]
    fn invert_geometric() {
        let s = BiSeries::one().sub(&mono(1, 1, 0)).truncate(ey(6));
        let inv = s.invert().unwrap();
        for k in 0..6 {
            assert_eq!(inv.coeff_at(ey(k), ey(0)).unwrap(), BigInt::one());
        }
        assert!(inv.coeff_at(ey(6), ey(0)).is_err());
    }

    #[test]
    fn invert_rejects_two_term_leading() {
        let s = mono(1, 0, 1).sub(&mono(1, 0, -1)).truncate(ey(3));
        assert!(matches!(s.invert(), Err(Error::NonUnitLeading(_))));
    }

    #[test]
    fn pow_basics() {
        let s = BiSeries::one().add(&mono(1, 1, 0));
        assert_eq!(s.pow(0).unwrap(), BiSeries::one());
        assert_eq!(s.pow(1).unwrap(), s);
        let sq = s.pow(2).unwrap();
        assert_eq!(sq, BiSeries::one().add(&mono(2, 1, 0)).add(&mono(1, 2, 0)));
    }

    #[test]
    fn beyond_truncation_is_error() {
        let s = BiSeries::one().truncate(ey(10));
        assert!(matches!(
            s.coeff_at(ey(100), ey(0)),
            Err(Error::BeyondTruncation { .. })
        ));
    }

    #[test]
    fn normalize_integral_reduces_denominators() {
        let s =
            BiSeries::from_terms([(ey(1), ey(1), BigInt::from(3))], Some(ey(4))).rescaled(24, 2);
        assert_eq!(s.q_den(), 24);
        let n = s.normalize_integral().unwrap();
        assert_eq!((n.q_den(), n.y_den()), (1, 1));
        assert_eq!(n.coeff_at(ey(1), ey(1)).unwrap(), BigInt::from(3));
        let bad = BiSeries::monomial(BigInt::one(), e(1, 24), ey(0));
        assert!(matches!(
            bad.normalize_integral(),
            Err(Error::NonIntegralExponent { .. })
        ));
    }

    #[test]
    fn product_truncation_is_pessimistic() {
        // (q^{1/2} + O(q^3)) * (1 + q + O(q^2)) is known below q^{5/2}.
        let a = BiSeries::monomial(BigInt::one(), e(1, 2), ey(0)).truncate(ey(3));
        let b = BiSeries::one().add(&mono(1, 1, 0)).truncate(ey(2));
        let p = a.mul(&b);
        assert_eq!(p.q_trunc(), Some(e(5, 2)));
    }

    #[test]
    fn binomial_division_matches_invert() {
        let base = BiSeries::one().add(&mono(3, 0, 1)).truncate(ey(7));
        let by_div = base.div_one_minus(ey(2), ey(1)).unwrap();
        let factor = BiSeries::one().sub(&mono(1, 2, 1)).truncate(ey(7));
        let by_inv = base.mul(&factor.invert().unwrap());
        assert_eq!(by_div, by_inv);
        let back = by_div.mul_one_minus(ey(2), ey(1));
        assert_eq!(back, base);
    }

    #[test]
    fn transform_kernel_matches_schoolbook() {
        let big = BigInt::from(7).pow(60);
        let series = |shift: i64| {
            let mut terms = Vec::new();
            for q in 0..50 {
                for y in -25..=25i64 {
                    if (q * 7 + y * 3 + shift).rem_euclid(5) != 0 {
                        terms.push((ey(q), ey(y), &big * (q - y + shift) + q * y));
                    }
                }
            }
            BiSeries::from_terms(terms, Some(ey(50)))
        };
        let (a, b) = (series(0), series(2));
        let p = a.mul(&b);
        let direct = kernel::mul_rows_big(&a.rows, &b.rows, Some(50));
        assert_eq!(p.rows, direct);
        assert_eq!(p.q_trunc(), Some(ey(50)));
    }

    #[test]
    fn big_and_small_kernels_agree() {
        let big = BigInt::from(1u64 << 62) * BigInt::from(1u64 << 62);
        let a = BiSeries::one()
            .add(&BiSeries::monomial(big.clone(), ey(1), ey(1)))
            .truncate(ey(4));
        let b = BiSeries::one().add(&mono(5, 1, -1)).truncate(ey(4));
        let p = a.mul(&b);
        assert_eq!(p.coeff_at(ey(2), ey(0)).unwrap(), big * 5);
    }
}
