//! Quotients `∏ θ₁(τ, nᵢz) / ∏ θ₁(τ, mⱼz)` with as many factors on each side.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::arith::isqrt;
use crate::error::{Error, Result};
use crate::exactla::ExactMatrix;
use crate::forms::{theta1, JacobiForm};
use crate::polarity::polar_order;
use crate::qseries::kernel::mul_row;
use crate::qseries::{BiSeries, Row, RowAcc};

/// Numerator and denominator multipliers, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThetaQuotientSpec {
    nums: Vec<i64>,
    dens: Vec<i64>,
}

impl ThetaQuotientSpec {
    pub fn new(mut nums: Vec<i64>, mut dens: Vec<i64>) -> Result<ThetaQuotientSpec> {
        if nums.len() != dens.len() {
            return Err(Error::InvalidArgument(format!(
                "need equally many numerator and denominator thetas, got {} and {}",
                nums.len(),
                dens.len()
            )));
        }
        if nums.iter().chain(&dens).any(|&x| x <= 0) {
            return Err(Error::InvalidArgument(
                "theta multipliers must be positive".into(),
            ));
        }
        nums.sort_unstable();
        dens.sort_unstable();
        Ok(ThetaQuotientSpec { nums, dens })
    }

    pub fn nums(&self) -> &[i64] {
        &self.nums
    }

    pub fn dens(&self) -> &[i64] {
        &self.dens
    }

    /// Number of quotient pairs.
    pub fn len(&self) -> usize {
        self.nums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nums.is_empty()
    }

    /// The same quotient with multipliers common to both sides cancelled.
    pub fn reduced(&self) -> ThetaQuotientSpec {
        let mut nums = self.nums.clone();
        let mut dens = Vec::new();
        for &d in &self.dens {
            match nums.iter().position(|&x| x == d) {
                Some(i) => {
                    nums.remove(i);
                }
                None => dens.push(d),
            }
        }
        ThetaQuotientSpec { nums, dens }
    }

    /// `(Σ(nⱼ² − mⱼ²)/2, Σ(nⱼ − mⱼ)/2)`.
    pub fn index_and_b(&self) -> Result<(i64, i64)> {
        let sq: i64 = self.nums.iter().map(|n| n * n).sum::<i64>()
            - self.dens.iter().map(|m| m * m).sum::<i64>();
        let lin: i64 = self.nums.iter().sum::<i64>() - self.dens.iter().sum::<i64>();
        if sq % 2 != 0 {
            return Err(Error::NonIntegral(format!("index {sq}/2 of {self}")));
        }
        if lin % 2 != 0 {
            return Err(Error::NonIntegral(format!("b = {lin}/2 of {self}")));
        }
        Ok((sq / 2, lin / 2))
    }

    /// Zero orders at torsion points: every `d ≥ 2` divides at least as many
    /// numerator multipliers as denominator ones.
    pub fn is_holomorphic(&self) -> bool {
        let max = self.dens.iter().copied().max().unwrap_or(1);
        (2..=max).all(|d| {
            let count = |v: &[i64]| v.iter().filter(|x| *x % d == 0).count();
            count(&self.nums) >= count(&self.dens)
        })
    }

    /// The condition summand for `1 ≤ r ≤ b − 1`; slow growth about `y^b` needs
    /// all of them nonnegative.
    pub fn slow_condition_value(&self, r: i64) -> Result<Rational64> {
        let (_, b) = self.index_and_b()?;
        if r < 1 || r >= b {
            return Err(Error::InvalidArgument(format!("r={r} outside 1..{b}")));
        }
        let g = |x: i64| {
            let xr = Rational64::new(x * r, b);
            let f = (x * r).div_euclid(b);
            let fr = Rational64::from_integer(f);
            xr * xr / 2 - xr / 2 + Rational64::new(f * (f + 1), 2) - xr * fr
        };
        let num: Rational64 = self.nums.iter().map(|&x| g(x)).sum();
        let den: Rational64 = self.dens.iter().map(|&x| g(x)).sum();
        Ok(num - den)
    }

    /// Slow growth about `y^b`: every condition value is nonnegative.
    pub fn is_slow(&self) -> Result<bool> {
        let (_, b) = self.index_and_b()?;
        for r in 1..b {
            if self.slow_condition_value(r)?.is_negative() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Fourier expansion below `q^order`, by row-by-row division of the
    /// theta products. Fails if some row division is not exact.
    pub fn to_form(&self, order: i64) -> Result<JacobiForm> {
        let (index, _) = self.index_and_b()?;
        if index <= 0 {
            return Err(Error::InvalidArgument(format!("{self} has index {index}")));
        }
        let series = quotient_series(&self.nums, &self.dens, order)?;
        JacobiForm::new(0, index, series)
    }
}

impl fmt::Display for ThetaQuotientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[i64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "[{}]/[{}]", join(&self.nums), join(&self.dens))
    }
}

/// Parses `4/2`, `3,4/1,2` or the display form `[3 4]/[1 2]`.
impl std::str::FromStr for ThetaQuotientSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<ThetaQuotientSpec> {
        let bad = || Error::InvalidArgument(format!("cannot parse theta quotient {s:?}"));
        let (num, den) = s.split_once('/').ok_or_else(bad)?;
        let list = |part: &str| -> Result<Vec<i64>> {
            part.trim()
                .trim_start_matches('[')
                .trim_end_matches(']')
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| bad()))
                .collect()
        };
        ThetaQuotientSpec::new(list(num)?, list(den)?)
    }
}

/// Rows keyed by integral `q` after removing the common `q^{N/8}`, with `y`
/// scaled by 2.
fn theta_product_rows(mults: &[i64], order: i64) -> Result<BTreeMap<i64, Row>> {
    let mut prod = BiSeries::one();
    for &a in mults {
        prod = prod.mul(&theta1(a, order + 1));
    }
    let shift = Rational64::new(mults.len() as i64, 8);
    let trunc = prod.q_trunc().expect("theta products are truncated") - shift;
    if trunc < Rational64::from_integer(order) {
        return Err(Error::InvariantViolation(
            "theta product truncated too early".into(),
        ));
    }
    let mut acc: BTreeMap<i64, RowAcc> = BTreeMap::new();
    for (q, y, c) in prod.terms() {
        let q = q - shift;
        if !q.is_integer() {
            return Err(Error::InvariantViolation(format!(
                "theta product term at q^{q}"
            )));
        }
        let q = q.to_integer();
        if q >= order {
            continue;
        }
        let y2 = y * 2;
        acc.entry(q).or_default().add_at(y2.to_integer(), c);
    }
    Ok(acc
        .into_iter()
        .filter_map(|(q, a)| a.finish().map(|r| (q, r)))
        .collect())
}

/// Exact division of a Laurent polynomial by one whose lowest coefficient is `±1`.
fn divide_row(p: &Row, d: &Row) -> Option<Row> {
    let lead = &d.c[0];
    debug_assert!(lead.abs().is_one());
    if p.c.len() < d.c.len() {
        return None;
    }
    let mut rem = p.c.clone();
    let qlen = p.c.len() - d.c.len() + 1;
    let mut quot = vec![BigInt::zero(); qlen];
    for i in 0..qlen {
        if rem[i].is_zero() {
            continue;
        }
        let q = if lead.is_negative() {
            -&rem[i]
        } else {
            rem[i].clone()
        };
        for (j, dj) in d.c.iter().enumerate() {
            if !dj.is_zero() {
                rem[i + j] -= &q * dj;
            }
        }
        quot[i] = q;
    }
    if rem.iter().any(|x| !x.is_zero()) {
        return None;
    }
    Row::new(p.y0 - d.y0, quot)
}

fn quotient_series(nums: &[i64], dens: &[i64], order: i64) -> Result<BiSeries> {
    let num = theta_product_rows(nums, order)?;
    let den = theta_product_rows(dens, order)?;
    let d0 = den
        .get(&0)
        .ok_or_else(|| Error::InvariantViolation("denominator has no q^0 row".into()))?;
    let mut quot: BTreeMap<i64, Row> = BTreeMap::new();
    for n in 0..order {
        let mut acc = match num.get(&n) {
            Some(r) => RowAcc::from_row(r.clone()),
            None => RowAcc::default(),
        };
        for (k, dk) in den.range(1..n.max(1) + 1) {
            if let Some(qr) = quot.get(&(n - k)) {
                if let Some(p) = mul_row(dk, qr) {
                    acc.add_row(&p, 0, true);
                }
            }
        }
        let Some(rhs) = acc.finish() else {
            continue;
        };
        let row = divide_row(&rhs, d0).ok_or_else(|| Error::NonIntegralDivision {
            divisor: "the q^0 row of the denominator".into(),
            context: format!("row q^{n} of {} / {}", fmt_list(nums), fmt_list(dens)),
        })?;
        quot.insert(n, row);
    }
    Ok(BiSeries::from_rows(1, 2, quot, Some(order)))
}

fn fmt_list(v: &[i64]) -> String {
    format!("{v:?}")
}

/// All nondecreasing sequences of length `len` from `lo..=hi`.
fn multisets(len: usize, lo: i64, hi: i64, prefix: &mut Vec<i64>, out: &mut dyn FnMut(&[i64])) {
    if len == 0 {
        out(prefix);
        return;
    }
    for x in lo..=hi {
        prefix.push(x);
        multisets(len - 1, x, hi, prefix, out);
        prefix.pop();
    }
}

/// Nondecreasing sequences of length `len` from `lo..=hi`, avoiding `forbid`,
/// with prescribed sum and sum of squares.
#[allow(clippy::too_many_arguments)]
fn constrained(
    len: usize,
    lo: i64,
    hi: i64,
    sum: i64,
    sq: i64,
    forbid: &[i64],
    prefix: &mut Vec<i64>,
    out: &mut dyn FnMut(&[i64]),
) {
    if len == 0 {
        if sum == 0 && sq == 0 {
            out(prefix);
        }
        return;
    }
    let k = len as i64;
    for x in lo..=hi {
        // Remaining entries are all ≥ x.
        if k * x > sum || k * x * x > sq {
            break;
        }
        if (k - 1) * hi + x < sum || (k - 1) * hi * hi + x * x < sq {
            continue;
        }
        if forbid.contains(&x) {
            continue;
        }
        prefix.push(x);
        constrained(len - 1, x, hi, sum - x, sq - x * x, forbid, prefix, out);
        prefix.pop();
    }
}

/// Largest multiplier a holomorphic quotient of index `m` slow about `y^b` can
/// use: the `q¹` row carries `y^{b+M}` for the largest multiplier `M`, and its
/// polarity cannot exceed `m²`.
pub fn max_multiplier(m: i64, b: i64) -> i64 {
    isqrt(m * m + 4 * m) - b
}

/// Holomorphic quotients of index `m` and given `b` with at most `n_max` pairs,
/// in lowest terms (no multiplier on both sides), sorted.
pub fn enumerate_holomorphic_quotients(m: i64, b: i64, n_max: usize) -> Vec<ThetaQuotientSpec> {
    let e = max_multiplier(m, b);
    let mut found = Vec::new();
    for n in 1..=n_max {
        multisets(n, 1, e, &mut Vec::new(), &mut |dens| {
            let s = dens.iter().sum::<i64>() + 2 * b;
            let q = dens.iter().map(|x| x * x).sum::<i64>() + 2 * m;
            constrained(n, 1, e, s, q, dens, &mut Vec::new(), &mut |nums| {
                let spec = ThetaQuotientSpec::new(nums.to_vec(), dens.to_vec()).unwrap();
                if spec.is_holomorphic() {
                    found.push(spec);
                }
            });
        });
    }
    found.sort();
    found.dedup();
    found
}

/// Holomorphic quotients of index `m` slow growing about `y^b`.
pub fn enumerate_slow_quotients(m: i64, b: i64, n_max: usize) -> Vec<ThetaQuotientSpec> {
    enumerate_holomorphic_quotients(m, b, n_max)
        .into_iter()
        .filter(|s| s.is_slow().unwrap_or(false))
        .collect()
}

/// Dimension of the span of the given quotients (all of one index).
///
/// Forms of weight 0 are determined by their polar part, so `order` only needs
/// to cover the polar terms; smaller values are raised to that.
pub fn span_dimension(specs: &[ThetaQuotientSpec], order: i64) -> Result<usize> {
    let Some(first) = specs.first() else {
        return Ok(0);
    };
    let (m, _) = first.index_and_b()?;
    for s in specs {
        if s.index_and_b()?.0 != m {
            return Err(Error::InvalidArgument(format!(
                "{s} has a different index than {first}"
            )));
        }
    }
    let order = order.max(polar_order(m));
    let forms = specs
        .iter()
        .map(|s| s.to_form(order))
        .collect::<Result<Vec<_>>>()?;
    let mut keys: Vec<(i64, i64)> = forms
        .iter()
        .flat_map(|f| {
            f.series()
                .terms()
                .map(|(q, y, _)| (q.to_integer(), y.to_integer()))
                .collect::<Vec<_>>()
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let rows = forms
        .iter()
        .map(|f| keys.iter().map(|&(n, l)| f.stored(n, l)).collect())
        .collect();
    Ok(ExactMatrix::from_rows(keys.len(), rows)?.rank())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: &[i64], d: &[i64]) -> ThetaQuotientSpec {
        ThetaQuotientSpec::new(n.to_vec(), d.to_vec()).unwrap()
    }

    #[test]
    fn index_and_b_examples() {
        assert_eq!(spec(&[4], &[2]).index_and_b().unwrap(), (6, 1));
        assert_eq!(spec(&[2, 3], &[1, 2]).index_and_b().unwrap(), (4, 1));
        assert!(matches!(
            spec(&[3], &[2]).index_and_b(),
            Err(Error::NonIntegral(_))
        ));
    }

    #[test]
    fn holomorphy_examples() {
        assert!(!spec(&[3], &[2]).is_holomorphic());
        for beta in 1..6 {
            for k in 1..6 {
                assert!(spec(&[(k + 1) * beta], &[beta]).is_holomorphic());
            }
        }
        assert!(spec(&[3, 4], &[1, 2]).is_holomorphic());
    }

    #[test]
    fn phi6_q0_part() {
        let f = spec(&[4], &[2]).to_form(3).unwrap();
        assert_eq!(f.index(), 6);
        assert_eq!(
            f.q0_part(),
            vec![(-1, BigInt::from(1)), (1, BigInt::from(1))]
        );
        f.check_invariants().unwrap();
    }

    /// Multiplying back by the denominator thetas recovers the numerator.
    #[test]
    fn division_is_exact_inverse_of_multiplication() {
        for (n, d) in [
            (vec![4], vec![2]),
            (vec![2, 3], vec![1, 2]),
            (vec![6, 2], vec![1, 3]),
        ] {
            let order = 12;
            let s = spec(&n, &d);
            let (_, b) = s.index_and_b().unwrap();
            let q = quotient_series(s.nums(), s.dens(), order).unwrap();
            let mut num = BiSeries::one();
            let mut den = BiSeries::one();
            for &a in s.nums() {
                num = num.mul(&theta1(a, order));
            }
            for &a in s.dens() {
                den = den.mul(&theta1(a, order));
            }
            let back = q.mul(&den);
            let lim = Rational64::from_integer(order - 1);
            assert_eq!(back.truncate(lim), num.truncate(lim), "{s} (b={b})");
        }
    }

    #[test]
    fn constructed_quotients_are_jacobi_forms() {
        for s in [
            spec(&[6], &[2]),
            spec(&[3, 4], &[1, 2]),
            spec(&[8], &[2]),
            spec(&[2, 2, 2, 2], &[1, 1, 1, 1]),
        ] {
            let f = s.to_form(8).unwrap();
            f.check_invariants().unwrap();
            // The q⁰ row tops out at y^b.
            let (_, b) = s.index_and_b().unwrap();
            assert_eq!(f.q0_part().last().unwrap().0, b, "{s}");
        }
    }

    /// Counting criterion agrees with success of the exact division.
    #[test]
    fn holomorphy_matches_division() {
        for n1 in 1..=8 {
            for d1 in 1..=8 {
                let s = spec(&[n1], &[d1]);
                if n1 == d1 || s.index_and_b().is_err() {
                    continue;
                }
                let ok = quotient_series(s.nums(), s.dens(), 4).is_ok();
                assert_eq!(ok, s.is_holomorphic(), "{s}");
            }
        }
        for n1 in 1..=8 {
            for n2 in n1..=8 {
                for d1 in 1..=8 {
                    for d2 in d1..=8 {
                        let s = spec(&[n1, n2], &[d1, d2]);
                        let ok = quotient_series(s.nums(), s.dens(), 3).is_ok();
                        assert_eq!(ok, s.is_holomorphic(), "{s}");
                    }
                }
            }
        }
    }

    #[test]
    fn single_and_ks_families_vanish() {
        for beta in 1..=8 {
            for k in 1..=8 {
                if k % 2 == 1 && beta % 2 == 1 {
                    continue;
                }
                let s = spec(&[(k + 1) * beta], &[beta]);
                let (m, b) = s.index_and_b().unwrap();
                assert_eq!(m, beta * beta * k * (k + 2) / 2);
                for r in 1..b {
                    assert!(s.slow_condition_value(r).unwrap().is_zero(), "{s} r={r}");
                }
            }
        }
        for k in 1..=12 {
            let s = spec(&[k + 1, k + 2], &[1, 2]);
            assert_eq!(s.index_and_b().unwrap(), (k * k + 3 * k, k));
            for r in 1..k {
                assert!(s.slow_condition_value(r).unwrap().is_zero());
            }
            assert!(s.is_slow().unwrap());
        }
    }

    #[test]
    fn enumeration_examples() {
        assert!(enumerate_slow_quotients(6, 1, 1).contains(&spec(&[4], &[2])));
        // Enumeration works in lowest terms; the two-pair form cancels to [3]/[1].
        let ks = spec(&[2, 3], &[1, 2]).reduced();
        assert_eq!(ks, spec(&[3], &[1]));
        assert!(enumerate_slow_quotients(4, 1, 2).contains(&ks));
        let slow = enumerate_slow_quotients(16, 2, 1);
        assert!(slow.contains(&spec(&[6], &[2])));
        // Some holomorphic quotient fails the condition.
        let witness = enumerate_holomorphic_quotients(31, 4, 2)
            .into_iter()
            .find(|s| !s.is_slow().unwrap());
        assert_eq!(witness, Some(spec(&[6, 6], &[1, 3])));
    }

    #[test]
    fn small_span_dimensions() {
        let specs = enumerate_slow_quotients(6, 2, 4);
        assert_eq!(span_dimension(&specs, 1).unwrap(), 1);
        let specs = enumerate_slow_quotients(6, 1, 3);
        assert_eq!(span_dimension(&specs, 1).unwrap(), 1);
    }
}
