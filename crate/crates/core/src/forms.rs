//! Building blocks for weight-0 weak Jacobi forms.
//!
//! Eta and theta series, the three generators of the weight-0 ring, the
//! weight −2 index 1 form, the monomial basis of `J_{0,m}`, and the
//! coefficient model `c(n, l)` keyed by `(l mod 2m, 4mn − l²)`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{canonical_residue, isqrt, kronecker};
use crate::error::{Error, Result};
use crate::qseries::{BiSeries, Exponent, Row, DEFAULT_Q_DEN, DEFAULT_Y_DEN};

fn ex(n: i64, d: i64) -> Exponent {
    Exponent::new(n, d)
}

fn int(n: i64) -> Exponent {
    Exponent::from_integer(n)
}

/// Dedekind eta `q^{1/24} ∏(1 − q^n)`, expanded below `q^order`.
///
/// Uses the pentagonal-number expansion `Σ (−1)^k q^{(6k−1)²/24}`.
pub fn eta(order: i64) -> BiSeries {
    let bound = 24 * order;
    let mut terms = Vec::new();
    let mut k: i64 = 0;
    loop {
        let mut any = false;
        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
            let e = (6 * kk - 1) * (6 * kk - 1);
            if e < bound {
                any = true;
                let sign = if kk.rem_euclid(2) == 0 { 1 } else { -1 };
                terms.push((ex(e, 24), int(0), BigInt::from(sign)));
            }
        }
        if !any && k > 0 {
            break;
        }
        k += 1;
    }
    BiSeries::from_terms(terms, Some(int(order))).rescaled(DEFAULT_Q_DEN, 1)
}

/// `θ₁(τ, αz) = −q^{1/8} y^{−α/2} ∏ (1−q^n)(1−q^{n−1}y^α)(1−q^n y^{−α})`, below `q^order`.
///
/// Expanded via the triple-product sum `Σ (−1)^n q^{(2n+1)²/8} y^{α(2n+1)/2}`.
pub fn theta1(alpha: i64, order: i64) -> BiSeries {
    assert!(alpha > 0, "theta1 scaling must be positive");
    let bound = 8 * order;
    let mut terms = Vec::new();
    let mut n: i64 = 0;
    loop {
        let mut any = false;
        for nn in [n, -n - 1] {
            let odd = 2 * nn + 1;
            if odd * odd < bound {
                any = true;
                let sign = if nn.rem_euclid(2) == 0 { 1 } else { -1 };
                terms.push((ex(odd * odd, 8), ex(alpha * odd, 2), BigInt::from(sign)));
            }
        }
        if !any {
            break;
        }
        n += 1;
    }
    BiSeries::from_terms(terms, Some(int(order))).rescaled(DEFAULT_Q_DEN, DEFAULT_Y_DEN)
}

/// Which of the even Jacobi theta functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaKind {
    Two,
    Three,
    Four,
}

impl TryFrom<i64> for ThetaKind {
    type Error = Error;
    fn try_from(k: i64) -> Result<Self> {
        match k {
            2 => Ok(ThetaKind::Two),
            3 => Ok(ThetaKind::Three),
            4 => Ok(ThetaKind::Four),
            _ => Err(Error::InvalidArgument(format!(
                "no theta function of kind {k}"
            ))),
        }
    }
}

/// `θ₂ = Σ q^{(n+½)²/2} y^{n+½}`, `θ₃ = Σ q^{n²/2} y^n`, `θ₄ = Σ (−1)^n q^{n²/2} y^n`,
/// returned together with their `z = 0` specializations.
pub fn jacobi_theta(kind: ThetaKind, order: i64) -> (BiSeries, BiSeries) {
    let bound = 8 * order;
    let mut terms = Vec::new();
    let mut n: i64 = 0;
    loop {
        let mut any = false;
        for nn in if n == 0 { vec![0] } else { vec![n, -n] } {
            match kind {
                ThetaKind::Two => {
                    for h in [2 * nn + 1, -(2 * nn + 1)] {
                        if nn < 0 {
                            continue;
                        }
                        // (h/2)²/2 = h²/8
                        if h * h < bound {
                            any = true;
                            terms.push((ex(h * h, 8), ex(h, 2), BigInt::one()));
                        }
                    }
                }
                ThetaKind::Three | ThetaKind::Four => {
                    if 4 * nn * nn < bound {
                        any = true;
                        let sign = if kind == ThetaKind::Four && nn.rem_euclid(2) == 1 {
                            -1
                        } else {
                            1
                        };
                        terms.push((ex(nn * nn, 2), int(nn), BigInt::from(sign)));
                    }
                }
            }
        }
        if !any && n > 0 {
            break;
        }
        n += 1;
    }
    let full = BiSeries::from_terms(terms, Some(int(order))).rescaled(DEFAULT_Q_DEN, DEFAULT_Y_DEN);
    let at_zero = full.at_y_one();
    (full, at_zero)
}

/// A weak Jacobi form given by its truncated Fourier expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiForm {
    weight: i64,
    index: i64,
    series: BiSeries,
    order: i64,
}

impl JacobiForm {
    /// Wrap a series with integral exponents and a finite truncation order.
    pub fn new(weight: i64, index: i64, series: BiSeries) -> Result<JacobiForm> {
        if index <= 0 {
            return Err(Error::InvalidArgument("index must be positive".into()));
        }
        let series = series.normalize_integral()?;
        let order = series
            .trunc_scaled()
            .ok_or_else(|| Error::InvalidArgument("Jacobi form series must be truncated".into()))?;
        Ok(JacobiForm {
            weight,
            index,
            series,
            order,
        })
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    /// Coefficients are known for `q`-exponents below this order.
    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn series(&self) -> &BiSeries {
        &self.series
    }

    /// Stored coefficient at `(n, l)` without any reduction.
    pub fn stored(&self, n: i64, l: i64) -> BigInt {
        self.series
            .rows()
            .get(&n)
            .and_then(|r| r.get(l))
            .cloned()
            .unwrap_or_default()
    }

    /// `c(n, l)`, reduced to the canonical representative `l ∈ [−m, m]` with the
    /// same discriminant. Vanishes when the polarity exceeds `m²`.
    pub fn coeff(&self, n: i64, l: i64) -> Result<BigInt> {
        let m = self.index;
        let disc = 4 * m * n - l * l;
        if -disc > m * m {
            return Ok(BigInt::zero());
        }
        let lr = canonical_residue(l, m);
        let nr = (disc + lr * lr) / (4 * m);
        if nr < 0 {
            return Ok(BigInt::zero());
        }
        if nr >= self.order {
            return Err(Error::BeyondTruncation {
                requested: nr.to_string(),
                truncation: self.order.to_string(),
                required: nr + 1,
            });
        }
        Ok(self.stored(nr, lr))
    }

    /// The `q⁰` part as `(l, c(0, l))` pairs, ascending in `l`.
    pub fn q0_part(&self) -> Vec<(i64, BigInt)> {
        self.row_terms(0)
    }

    /// Nonzero terms of the `q^n` row.
    pub fn row_terms(&self, n: i64) -> Vec<(i64, BigInt)> {
        match self.series.rows().get(&n) {
            Some(row) => row
                .c
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (row.y0 + i as i64, c.clone()))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Product of two forms; weights and indices add.
    pub fn mul(&self, other: &JacobiForm) -> JacobiForm {
        let series = self.series.mul(&other.series);
        JacobiForm {
            weight: self.weight + other.weight,
            index: self.index + other.index,
            order: series.trunc_scaled().unwrap(),
            series,
        }
    }

    /// Integer linear combination of forms of equal weight and index.
    pub fn linear_combination(terms: &[(BigInt, &JacobiForm)]) -> Result<JacobiForm> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let (weight, index) = (first.weight, first.index);
        let mut acc: Option<BiSeries> = None;
        for (k, f) in terms {
            if f.weight != weight || f.index != index {
                return Err(Error::InvalidArgument(
                    "linear combination of forms with different weight or index".into(),
                ));
            }
            let s = f.series.scale(k);
            acc = Some(match acc {
                None => s,
                Some(a) => a.add(&s),
            });
        }
        JacobiForm::new(weight, index, acc.unwrap())
    }

    pub fn neg(&self) -> JacobiForm {
        JacobiForm {
            series: self.series.neg(),
            ..self.clone()
        }
    }

    /// Restrict to a smaller truncation order.
    pub fn truncate(&self, order: i64) -> JacobiForm {
        let series = self.series.truncate(int(order));
        JacobiForm {
            order: series.trunc_scaled().unwrap(),
            series,
            ..self.clone()
        }
    }

    /// Check `c(n,l) = c(n,−l)` (even weight), dependence on `(l mod 2m, 4mn − l²)`
    /// only, and vanishing beyond polarity `m²`, over the whole stored grid.
    pub fn check_invariants(&self) -> Result<()> {
        let m = self.index;
        for (q, row) in self.series.rows() {
            for (i, c) in row.c.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let l = row.y0 + i as i64;
                if *q < 0 {
                    return Err(Error::InvariantViolation(format!(
                        "negative q-power q^{q} y^{l}"
                    )));
                }
                if l * l - 4 * m * q > m * m {
                    return Err(Error::InvariantViolation(format!(
                        "term q^{q} y^{l} has polarity {} > m² = {}",
                        l * l - 4 * m * q,
                        m * m
                    )));
                }
            }
        }
        for n in 0..self.order {
            let lmax = isqrt(m * m + 4 * m * n);
            for l in -lmax..=lmax {
                let c = self.stored(n, l);
                if self.weight % 2 == 0 && c != self.stored(n, -l) {
                    return Err(Error::InvariantViolation(format!(
                        "c({n},{l}) != c({n},{})",
                        -l
                    )));
                }
                let reduced = self.coeff(n, l)?;
                if c != reduced {
                    return Err(Error::InvariantViolation(format!(
                        "c({n},{l}) = {c} but the reduced coefficient is {reduced}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Coefficient table keyed by `(l mod 2m, 4mn − l²)`.
    pub fn to_coefficient_function(&self) -> Result<CoefficientFunction> {
        let m = self.index;
        let mut table = HashMap::new();
        for n in 0..self.order {
            for l in (-m + 1)..=m {
                let c = self.stored(n, l);
                if !c.is_zero() {
                    table.insert((l.rem_euclid(2 * m), 4 * m * n - l * l), c);
                }
            }
        }
        let offset = (0..2 * m)
            .map(|mu| {
                let r = canonical_residue(mu, m);
                r * r
            })
            .collect();
        let cf = CoefficientFunction {
            index: m,
            table,
            order: self.order,
            offset,
            max_polarity: Some(m * m),
        };
        for (q, row) in self.series.rows() {
            for (i, c) in row.c.iter().enumerate() {
                let l = row.y0 + i as i64;
                let expected = cf.get(l, 4 * m * q - l * l)?;
                if *c != expected {
                    return Err(Error::InvariantViolation(format!(
                        "c({q},{l}) = {c} conflicts with {expected} stored for residue {} and discriminant {}",
                        l.rem_euclid(2 * m),
                        4 * m * q - l * l
                    )));
                }
            }
        }
        for n in 0..self.order {
            let lmax = isqrt(m * m + 4 * m * n);
            for l in -lmax..=lmax {
                let expected = cf.get(l, 4 * m * n - l * l)?;
                if self.stored(n, l) != expected {
                    return Err(Error::InvariantViolation(format!(
                        "c({n},{l}) is missing (expected {expected})"
                    )));
                }
            }
        }
        Ok(cf)
    }

    /// Theta decomposition `φ = Σ_μ h_μ θ_{m,μ}`; entry `μ` is
    /// `h_μ(τ) = Σ_D c(μ, D) q^{D/4m}` with `D = 4mn − l²`.
    pub fn theta_decompose(&self) -> Result<Vec<BiSeries>> {
        Ok(self.to_coefficient_function()?.theta_components())
    }
}

/// `θ_{m,μ}(τ,z) = Σ_{r ≡ μ (2m)} q^{r²/4m} y^r`, below `q^order`.
pub fn theta_m_mu(m: i64, mu: i64, order: i64) -> BiSeries {
    let bound = 4 * m * order;
    let mut terms = Vec::new();
    let r0 = canonical_residue(mu, m);
    let mut k = 0i64;
    loop {
        let mut any = false;
        for r in [r0 + 2 * m * k, r0 - 2 * m * (k + 1)] {
            if r * r < bound {
                any = true;
                terms.push((ex(r * r, 4 * m), int(r), BigInt::one()));
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    BiSeries::from_terms(terms, Some(int(order)))
}

/// Rebuild `Σ_μ h_μ θ_{m,μ}` below `q^order`.
pub fn reconstruct_from_theta(components: &[BiSeries], m: i64, order: i64) -> Result<BiSeries> {
    if components.len() != (2 * m) as usize {
        return Err(Error::InvalidArgument(format!(
            "expected {} theta components, got {}",
            2 * m,
            components.len()
        )));
    }
    let mut total = BiSeries::zero_with(1, 1, Some(int(order)))?;
    for (mu, h) in components.iter().enumerate() {
        let th = theta_m_mu(m, mu as i64, order + m);
        total = total.add(&h.mul_up_to(&th, Some(int(order))));
    }
    total.normalize_integral()
}

/// A map `(μ mod 2m, D) → c` generalizing the coefficients of a weak Jacobi form,
/// with `D = 4mn − l²`.
///
/// Residue `μ` is known for `D < 4m·order − offset(μ)`; for a table read off a
/// form, `offset(μ)` is the square of the canonical representative of `μ`.
/// Entries of polarity `−D > m²` vanish when the table derives from a weight-0 form.
#[derive(Clone, Debug)]
pub struct CoefficientFunction {
    index: i64,
    table: HashMap<(i64, i64), BigInt>,
    order: i64,
    offset: Vec<i64>,
    max_polarity: Option<i64>,
}

impl CoefficientFunction {
    pub fn index(&self) -> i64 {
        self.index
    }

    /// Truncation order of the form the table was read from.
    pub fn order(&self) -> i64 {
        self.order
    }

    /// Polarity beyond which every entry vanishes, when known.
    pub fn max_polarity(&self) -> Option<i64> {
        self.max_polarity
    }

    /// Entries for residue `μ` are known for discriminants strictly below this.
    pub fn known_below(&self, mu: i64) -> i64 {
        4 * self.index * self.order - self.offset[mu.rem_euclid(2 * self.index) as usize]
    }

    /// Source order needed to know the entry at `(μ, D)`.
    pub fn order_needed(&self, mu: i64, disc: i64) -> i64 {
        let off = self.offset[mu.rem_euclid(2 * self.index) as usize];
        (disc + off).div_euclid(4 * self.index) + 1
    }

    /// Value at residue `μ` (any integer, reduced mod `2m`) and discriminant `D`.
    pub fn get(&self, mu: i64, disc: i64) -> Result<BigInt> {
        let m = self.index;
        if let Some(p) = self.max_polarity {
            if -disc > p {
                return Ok(BigInt::zero());
            }
        }
        let mu = mu.rem_euclid(2 * m);
        let bound = self.known_below(mu);
        if disc >= bound {
            return Err(Error::BeyondTruncation {
                requested: format!("discriminant {disc} at residue {mu}"),
                truncation: format!("order {}", self.order),
                required: self.order_needed(mu, disc),
            });
        }
        Ok(self.table.get(&(mu, disc)).cloned().unwrap_or_default())
    }

    /// `c(n, l)` through the table.
    pub fn coeff(&self, n: i64, l: i64) -> Result<BigInt> {
        self.get(l, 4 * self.index * n - l * l)
    }

    /// Nonzero entries sorted by `(μ, D)`.
    pub fn entries(&self) -> BTreeMap<(i64, i64), BigInt> {
        self.table
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(k, v)| (*k, v.clone()))
            .collect()
    }

    pub fn neg(&self) -> CoefficientFunction {
        CoefficientFunction {
            table: self.table.iter().map(|(k, v)| (*k, -v)).collect(),
            ..self.clone()
        }
    }

    /// True when both tables agree wherever both are known.
    pub fn agrees_on_common_range(&self, other: &CoefficientFunction) -> bool {
        if self.index != other.index {
            return false;
        }
        let keys: std::collections::HashSet<&(i64, i64)> =
            self.table.keys().chain(other.table.keys()).collect();
        keys.into_iter().all(|&(mu, d)| {
            if d >= self.known_below(mu) || d >= other.known_below(mu) {
                return true;
            }
            matches!((self.get(mu, d), other.get(mu, d)), (Ok(a), Ok(b)) if a == b)
        })
    }

    /// Components `h_μ(τ) = Σ_D c(μ,D) q^{D/4m}`, each truncated at its known range.
    pub fn theta_components(&self) -> Vec<BiSeries> {
        let m = self.index;
        (0..2 * m)
            .map(|mu| {
                let terms = self
                    .table
                    .iter()
                    .filter(|((nu, _), v)| *nu == mu && !v.is_zero())
                    .map(|((_, d), v)| (ex(*d, 4 * m), int(0), v.clone()));
                BiSeries::from_terms(terms, Some(ex(self.known_below(mu), 4 * m)))
            })
            .collect()
    }

    /// Rebuild the Fourier expansion `Σ c(n,l) q^n y^l` for `n < order`.
    pub fn to_series(&self, order: i64) -> Result<BiSeries> {
        let m = self.index;
        let Some(p) = self.max_polarity else {
            return Err(Error::InvalidArgument(
                "series reconstruction needs a polarity bound".into(),
            ));
        };
        let mut rows = BTreeMap::new();
        for n in 0..order {
            let lmax = isqrt(p + 4 * m * n);
            let c: Vec<BigInt> = (-lmax..=lmax)
                .map(|l| self.coeff(n, l))
                .collect::<Result<_>>()?;
            if let Some(row) = Row::new(-lmax, c) {
                rows.insert(n, row);
            }
        }
        Ok(BiSeries::from_rows(1, 1, rows, Some(order)))
    }

    /// `Ŵ_σ`: the table with entry `(μ, D) ↦ c(σ(μ), D)`.
    pub fn apply_w_sigma(&self, sigma: &ResiduePermutation) -> Result<CoefficientFunction> {
        let m = self.index;
        if sigma.index != m {
            return Err(Error::InvalidArgument(format!(
                "permutation of Z/{}Z applied to an index-{m} table",
                2 * sigma.index
            )));
        }
        let inverse = sigma.inverse();
        let table = self
            .table
            .iter()
            .map(|((nu, d), v)| ((inverse.apply(*nu), *d), v.clone()))
            .collect();
        let offset = (0..2 * m)
            .map(|mu| self.offset[sigma.apply(mu) as usize])
            .collect();
        Ok(CoefficientFunction {
            index: m,
            table,
            order: self.order,
            offset,
            max_polarity: self.max_polarity,
        })
    }
}

impl PartialEq for CoefficientFunction {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
            && self.order == other.order
            && self.offset == other.offset
            && self.entries() == other.entries()
    }
}

/// A permutation `σ` of `Z/2mZ` commuting with `μ ↦ −μ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResiduePermutation {
    index: i64,
    perm: Vec<i64>,
}

impl ResiduePermutation {
    pub fn new(index: i64, perm: Vec<i64>) -> Result<ResiduePermutation> {
        let n = 2 * index;
        if index <= 0 || perm.len() != n as usize {
            return Err(Error::InvalidArgument(format!(
                "permutation must list {n} images"
            )));
        }
        let mut seen = vec![false; n as usize];
        for &p in &perm {
            if p < 0 || p >= n || seen[p as usize] {
                return Err(Error::InvalidArgument(format!(
                    "{perm:?} is not a bijection of Z/{n}Z"
                )));
            }
            seen[p as usize] = true;
        }
        for mu in 0..n {
            let neg = (-mu).rem_euclid(n);
            if perm[neg as usize] != (-perm[mu as usize]).rem_euclid(n) {
                return Err(Error::InvalidArgument(format!(
                    "permutation does not commute with negation at {mu}"
                )));
            }
        }
        Ok(ResiduePermutation { index, perm })
    }

    pub fn identity(index: i64) -> ResiduePermutation {
        ResiduePermutation {
            index,
            perm: (0..2 * index).collect(),
        }
    }

    /// Build from disjoint cycles, e.g. `&[&[1, 5], &[2, 10]]`.
    pub fn from_cycles(index: i64, cycles: &[&[i64]]) -> Result<ResiduePermutation> {
        let mut perm: Vec<i64> = (0..2 * index).collect();
        for cycle in cycles {
            for (i, &a) in cycle.iter().enumerate() {
                let b = cycle[(i + 1) % cycle.len()];
                if a < 0 || a >= 2 * index {
                    return Err(Error::InvalidArgument(format!("{a} is not a residue")));
                }
                perm[a as usize] = b;
            }
        }
        ResiduePermutation::new(index, perm)
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn apply(&self, mu: i64) -> i64 {
        self.perm[mu.rem_euclid(2 * self.index) as usize]
    }

    pub fn inverse(&self) -> ResiduePermutation {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p as usize] = i as i64;
        }
        ResiduePermutation {
            index: self.index,
            perm: inv,
        }
    }

    pub fn compose(&self, other: &ResiduePermutation) -> ResiduePermutation {
        ResiduePermutation {
            index: self.index,
            perm: (0..2 * self.index)
                .map(|mu| self.apply(other.apply(mu)))
                .collect(),
        }
    }
}

/// `φ₀,₁ = 4 Σ_{i=2,3,4} (θ_i(τ,z)/θ_i(τ,0))²`.
fn phi01_series(order: i64) -> Result<BiSeries> {
    let work = order + 1;
    let mut total = BiSeries::zero_with(DEFAULT_Q_DEN, DEFAULT_Y_DEN, Some(int(work)))?;
    for kind in [ThetaKind::Two, ThetaKind::Three, ThetaKind::Four] {
        let (full, at_zero) = jacobi_theta(kind, work);
        let term = match kind {
            // θ₂(τ,0) = 2q^{1/8}(1 + q + q³ + …): strip 2q^{1/8} so the divisor is a unit.
            ThetaKind::Two => {
                let num = full.mul_monomial(ex(-1, 8), int(0));
                let den = at_zero
                    .mul_monomial(ex(-1, 8), int(0))
                    .div_exact(&BigInt::from(2))?;
                num.mul(&num).mul(&den.pow(-2)?)
            }
            _ => full
                .mul(&full)
                .mul(&at_zero.pow(-2)?)
                .scale(&BigInt::from(4)),
        };
        total = total.add(&term);
    }
    Ok(total.truncate(int(order)))
}

/// `φ₀,₂ = ½ η^{−4} Σ_{m,n} (3m − n) (−4/m)(12/n) q^{(3m²+n²)/24} y^{(m+n)/2}`.
fn phi02_series(order: i64) -> Result<BiSeries> {
    let work = order + 1;
    let bound = 24 * work + 4;
    let mut terms = Vec::new();
    let mmax = isqrt(bound / 3) + 1;
    let nmax = isqrt(bound) + 1;
    for a in -mmax..=mmax {
        let ka = kronecker(-4, a);
        if ka == 0 {
            continue;
        }
        for b in -nmax..=nmax {
            let kb = kronecker(12, b);
            if kb == 0 {
                continue;
            }
            let e = 3 * a * a + b * b;
            if e >= bound {
                continue;
            }
            let c = (3 * a - b) * (ka * kb) as i64;
            if c != 0 {
                terms.push((ex(e, 24), ex(a + b, 2), BigInt::from(c)));
            }
        }
    }
    let sum = BiSeries::from_terms(terms, Some(ex(bound, 24)));
    let eta_inv4 = eta(work + 1).pow(-4)?;
    let prod = sum.mul(&eta_inv4).div_exact(&BigInt::from(2))?;
    Ok(prod.truncate(int(order)))
}

/// `φ₀,₃ = (q^{1/24}/η · Σ …)²` with the four quadratic-exponent sums.
fn phi03_series(order: i64) -> Result<BiSeries> {
    let work = order + 1;
    let mut terms = Vec::new();
    let lmax = isqrt(work) + 2;
    for l in -lmax..=lmax {
        let pieces = [
            (6 * l * l + l, 12 * l + 1, 1),
            (6 * l * l - l, 12 * l - 1, 1),
            (6 * l * l + 5 * l + 1, 12 * l + 5, -1),
            (6 * l * l - 5 * l + 1, 12 * l - 5, -1),
        ];
        for (qe, ye, s) in pieces {
            if qe < work {
                terms.push((int(qe), ex(ye, 2), BigInt::from(s)));
            }
        }
    }
    let sum = BiSeries::from_terms(terms, Some(int(work)));
    // q^{1/24}/η = ∏ 1/(1 − q^n)
    let mut partitions = BiSeries::one().truncate(int(work));
    for n in 1..work {
        partitions = partitions.div_one_minus(int(n), int(0))?;
    }
    let inner = sum.mul(&partitions);
    Ok(inner.mul(&inner).truncate(int(order)))
}

/// The generator `φ₀,k` (k = 1, 2, 3) of the weight-0 ring, below `q^order`.
pub fn phi_generator(k: i64, order: i64) -> Result<JacobiForm> {
    if order <= 0 {
        return Err(Error::InvalidArgument("order must be positive".into()));
    }
    let series = match k {
        1 => phi01_series(order)?,
        2 => phi02_series(order)?,
        3 => phi03_series(order)?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no weight-0 generator of index {k}"
            )))
        }
    };
    JacobiForm::new(0, k, series)
}

/// `φ₋₂,₁ = θ₁(τ,z)² / η(τ)⁶`.
pub fn phi_minus2_1(order: i64) -> Result<JacobiForm> {
    if order <= 0 {
        return Err(Error::InvalidArgument("order must be positive".into()));
    }
    let work = order + 1;
    let th = theta1(1, work);
    let eta6 = eta(work).pow(6)?;
    let series = th.mul(&th).mul(&eta6.invert()?).truncate(int(order));
    JacobiForm::new(-2, 1, series)
}

/// Exponent triple `(α, β, γ)` of the monomial `φ₀,₁^α φ₀,₂^β φ₀,₃^γ`.
pub type Monomial = [i64; 3];

/// All `(α, β, γ) ≥ 0` with `α + 2β + 3γ = m`, in a fixed order
/// (γ ascending, then β ascending).
pub fn basis_monomials(m: i64) -> Vec<Monomial> {
    let mut out = Vec::new();
    for gamma in 0..=m / 3 {
        for beta in 0..=(m - 3 * gamma) / 2 {
            out.push([m - 3 * gamma - 2 * beta, beta, gamma]);
        }
    }
    out
}

/// Cache of generator powers at one truncation order.
///
/// Single-writer: every lookup takes `&mut self`.
#[derive(Debug)]
pub struct GeneratorPowers {
    order: i64,
    powers: [Vec<JacobiForm>; 3],
}

impl GeneratorPowers {
    pub fn new(order: i64) -> Result<GeneratorPowers> {
        let one = JacobiForm {
            weight: 0,
            index: 1,
            series: BiSeries::one().truncate(int(order)),
            order,
        };
        let mut powers: [Vec<JacobiForm>; 3] = Default::default();
        for (i, p) in powers.iter_mut().enumerate() {
            let mut unit = one.clone();
            unit.index = 0;
            p.push(unit);
            p.push(phi_generator(i as i64 + 1, order)?);
        }
        Ok(GeneratorPowers { order, powers })
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    /// `φ₀,k^e`.
    pub fn power(&mut self, k: i64, e: i64) -> &JacobiForm {
        let list = &mut self.powers[(k - 1) as usize];
        while list.len() as i64 <= e {
            let next = list.last().unwrap().mul(&list[1]);
            list.push(next);
        }
        &list[e as usize]
    }

    /// `φ₀,₁^α φ₀,₂^β φ₀,₃^γ`.
    pub fn monomial(&mut self, mono: Monomial) -> JacobiForm {
        let [a, b, c] = mono;
        let pa = self.power(1, a).clone();
        let pb = self.power(2, b).clone();
        let pc = self.power(3, c).clone();
        let mut parts = vec![pa, pb, pc];
        parts.retain(|p| p.index > 0);
        if parts.is_empty() {
            return self.powers[0][0].clone();
        }
        // Multiply the two smallest first.
        parts.sort_by_key(|p| p.index);
        let mut acc = parts[0].clone();
        for p in &parts[1..] {
            acc = acc.mul(p);
        }
        acc
    }
}

/// The monomial basis of `J_{0,m}`, each element expanded below `q^order`.
pub fn basis_j0m(m: i64, order: i64) -> Result<Vec<(Monomial, JacobiForm)>> {
    let mut cache = GeneratorPowers::new(order)?;
    Ok(basis_with(&mut cache, m))
}

/// Basis through a shared power cache.
pub fn basis_with(cache: &mut GeneratorPowers, m: i64) -> Vec<(Monomial, JacobiForm)> {
    basis_monomials(m)
        .into_iter()
        .map(|mono| (mono, cache.monomial(mono)))
        .collect()
}

/// Sign-normalized primitive integer combination helper used when a
/// rational nullspace vector defines a form.
pub fn combine_basis(basis: &[(Monomial, JacobiForm)], coeffs: &[BigInt]) -> Result<JacobiForm> {
    let terms: Vec<(BigInt, &JacobiForm)> = coeffs
        .iter()
        .zip(basis)
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, (_, f))| (c.clone(), f))
        .collect();
    if terms.is_empty() {
        let (_, f) = basis
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
        return Ok(JacobiForm {
            series: BiSeries::zero_with(1, 1, Some(int(f.order)))?,
            ..f.clone()
        });
    }
    JacobiForm::linear_combination(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(f: &JacobiForm, n: i64) -> Vec<(i64, i64)> {
        f.row_terms(n)
            .into_iter()
            .map(|(l, c)| (l, i64::try_from(c).unwrap()))
            .collect()
    }

    /// Direct Euler product for eta, independent of the pentagonal expansion.
    fn eta_by_product(order: i64) -> BiSeries {
        let mut s = BiSeries::monomial(BigInt::one(), ex(1, 24), int(0)).truncate(int(order));
        for n in 1..order {
            s = s.mul_one_minus(int(n), int(0));
        }
        s
    }

    /// Direct triple product for theta1(αz).
    fn theta1_by_product(alpha: i64, order: i64) -> BiSeries {
        let mut s =
            BiSeries::monomial(BigInt::from(-1), ex(1, 8), ex(-alpha, 2)).truncate(int(order));
        for n in 1..=order {
            s = s.mul_one_minus(int(n), int(0));
            s = s.mul_one_minus(int(n - 1), int(alpha));
            s = s.mul_one_minus(int(n), int(-alpha));
        }
        s
    }

    #[test]
    fn eta_matches_euler_product() {
        let e = eta(12);
        assert_eq!(e, eta_by_product(12));
        assert_eq!(e.coeff_at(ex(1, 24), int(0)).unwrap(), BigInt::one());
        assert_eq!(e.coeff_at(ex(25, 24), int(0)).unwrap(), BigInt::from(-1));
        assert_eq!(e.coeff_at(ex(49, 24), int(0)).unwrap(), BigInt::from(-1));
        assert_eq!(e.coeff_at(ex(121, 24), int(0)).unwrap(), BigInt::one());
        assert!(e.pow(24).unwrap().normalize_integral().is_ok());
    }

    #[test]
    fn theta1_matches_product() {
        for alpha in 1..=3 {
            assert_eq!(
                theta1(alpha, 6),
                theta1_by_product(alpha, 6),
                "alpha={alpha}"
            );
        }
        let t = theta1(1, 1);
        assert_eq!(t.num_terms(), 2);
        assert_eq!(t.coeff_at(ex(1, 8), ex(-1, 2)).unwrap(), BigInt::from(-1));
        assert_eq!(t.coeff_at(ex(1, 8), ex(1, 2)).unwrap(), BigInt::one());
    }

    #[test]
    fn theta_z0_leading_terms() {
        let (_, t3) = jacobi_theta(ThetaKind::Three, 3);
        assert_eq!(t3.coeff_at(int(0), int(0)).unwrap(), BigInt::one());
        assert_eq!(t3.coeff_at(ex(1, 2), int(0)).unwrap(), BigInt::from(2));
        assert_eq!(t3.coeff_at(int(1), int(0)).unwrap(), BigInt::zero());
        assert_eq!(t3.coeff_at(int(2), int(0)).unwrap(), BigInt::from(2));
        let (_, t4) = jacobi_theta(ThetaKind::Four, 3);
        assert_eq!(t4.coeff_at(ex(1, 2), int(0)).unwrap(), BigInt::from(-2));
        let (t2, _) = jacobi_theta(ThetaKind::Two, 2);
        assert_eq!(t2.coeff_at(ex(1, 8), ex(1, 2)).unwrap(), BigInt::one());
        assert_eq!(t2.coeff_at(ex(1, 8), ex(-1, 2)).unwrap(), BigInt::one());
    }

    #[test]
    fn generator_q0_parts() {
        assert_eq!(
            row(&phi_generator(1, 3).unwrap(), 0),
            vec![(-1, 1), (0, 10), (1, 1)]
        );
        assert_eq!(
            row(&phi_generator(2, 3).unwrap(), 0),
            vec![(-1, 1), (0, 4), (1, 1)]
        );
        assert_eq!(
            row(&phi_generator(3, 3).unwrap(), 0),
            vec![(-1, 1), (0, 2), (1, 1)]
        );
    }

    #[test]
    fn phi01_first_row() {
        // φ₀,₁ = (y + 10 + y⁻¹) + q(10y^{±2} − 64y^{±1} + 108) + …
        let f = phi_generator(1, 3).unwrap();
        assert_eq!(
            row(&f, 1),
            vec![(-2, 10), (-1, -64), (0, 108), (1, -64), (2, 10)]
        );
        f.check_invariants().unwrap();
    }

    #[test]
    fn phi_minus2_1_shape() {
        let f = phi_minus2_1(4).unwrap();
        assert_eq!(row(&f, 0), vec![(-1, 1), (0, -2), (1, 1)]);
        assert_eq!(f.coeff(0, 1).unwrap(), BigInt::one());
        f.check_invariants().unwrap();
    }

    #[test]
    fn coeff_reduction() {
        let f = phi_generator(1, 3).unwrap();
        assert_eq!(f.coeff(1, 3).unwrap(), BigInt::zero());
        assert_eq!(f.coeff(2, 3).unwrap(), BigInt::one());
        assert_eq!(f.coeff(0, -1).unwrap(), BigInt::one());
        assert!(matches!(
            f.coeff(40, 0),
            Err(Error::BeyondTruncation { .. })
        ));
    }

    #[test]
    fn basis_counts() {
        assert_eq!(basis_monomials(1).len(), 1);
        assert_eq!(basis_monomials(6).len(), 7);
        let mut m3 = basis_monomials(3);
        m3.sort();
        assert_eq!(m3, vec![[0, 0, 1], [1, 1, 0], [3, 0, 0]]);
    }

    #[test]
    fn coefficient_function_roundtrip_and_corruption() {
        let f = phi_generator(1, 4).unwrap();
        let cf = f.to_coefficient_function().unwrap();
        assert_eq!(cf.get(1, -1).unwrap(), BigInt::one());
        assert_eq!(cf.to_series(4).unwrap(), *f.series());
        let bad = f
            .series()
            .add(&BiSeries::monomial(BigInt::one(), int(2), int(3)));
        let bad = JacobiForm::new(0, 1, bad).unwrap();
        assert!(matches!(
            bad.to_coefficient_function(),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn theta_decomposition_roundtrip() {
        let f = phi_generator(1, 4).unwrap();
        let hs = f.theta_decompose().unwrap();
        assert_eq!(hs[1].coeff_at(ex(-1, 4), int(0)).unwrap(), BigInt::one());
        assert_eq!(hs[0], hs[0]);
        let back = reconstruct_from_theta(&hs, 1, 4).unwrap();
        assert_eq!(back, *f.series());
    }

    #[test]
    fn permutation_validation() {
        assert!(
            ResiduePermutation::from_cycles(6, &[&[1, 5], &[2, 10], &[4, 8], &[7, 11]]).is_ok()
        );
        assert!(ResiduePermutation::from_cycles(6, &[&[1, 5]]).is_err());
        assert!(ResiduePermutation::new(2, vec![0, 0, 1, 2]).is_err());
    }
}
