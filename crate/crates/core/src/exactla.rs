//! Exact integer linear algebra: rank, nullspace and functionals on the nullspace.
//!
//! Small matrices are eliminated fraction-free (Bareiss). Large ones go through
//! word-sized primes: the rank modulo a prime is a lower bound for the rank over
//! `Q` (a nonzero minor mod `p` is a nonzero integer), and null vectors are
//! rebuilt by Chinese remaindering and rational reconstruction, then checked
//! by exact multiplication. A result is returned only once both bounds meet.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

/// Matrices with at most this many entries are eliminated with Bareiss.
const BAREISS_MAX_ENTRIES: usize = 1600;

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> ExactMatrix {
        ExactMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    /// Build from rows, which must all have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<BigInt>>) -> Result<ExactMatrix> {
        let mut m = ExactMatrix::zeros(0, cols);
        for r in rows {
            m.push_row(r)?;
        }
        Ok(m)
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> ExactMatrix {
        let cols = rows.first().map_or(0, Vec::len);
        let big = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        ExactMatrix::from_rows(cols, big).expect("rectangular input")
    }

    pub fn identity(n: usize) -> ExactMatrix {
        let mut m = ExactMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn push_row(&mut self, row: Vec<BigInt>) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::InvalidArgument(format!(
                "row of length {} in a matrix with {} columns",
                row.len(),
                self.cols
            )));
        }
        self.data.extend(row);
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// The first `k` rows.
    pub fn top_rows(&self, k: usize) -> ExactMatrix {
        ExactMatrix {
            rows: k,
            cols: self.cols,
            data: self.data[..k * self.cols].to_vec(),
        }
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn is_small(&self) -> bool {
        self.rows * self.cols <= BAREISS_MAX_ENTRIES
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        if self.is_small() {
            return self.rank_bareiss();
        }
        let r = self.rank_modular();
        if r == self.rows.min(self.cols) {
            return r;
        }
        self.cols - self.nullspace().len()
    }

    /// Rank by fraction-free elimination.
    pub fn rank_bareiss(&self) -> usize {
        bareiss_echelon(self).1.len()
    }

    /// Largest rank modulo a few primes; a lower bound for the rank over `Q`.
    pub fn rank_modular(&self) -> usize {
        mod_primes()
            .iter()
            .take(3)
            .map(|p| rref_mod(self, *p).0.len())
            .max()
            .unwrap_or(0)
    }

    /// Basis of `{x : Ax = 0}`: primitive integer vectors with positive leading
    /// entry, one per free column of the reduced echelon form.
    pub fn nullspace(&self) -> Vec<Vec<BigInt>> {
        if self.cols == 0 {
            return Vec::new();
        }
        if self.rows == 0 {
            return (0..self.cols)
                .map(|j| {
                    let mut v = vec![BigInt::zero(); self.cols];
                    v[j] = BigInt::one();
                    v
                })
                .collect();
        }
        if self.is_small() {
            return self.nullspace_bareiss();
        }
        nullspace_modular(self)
    }

    /// Nullspace through fraction-free elimination and rational back-substitution.
    pub fn nullspace_bareiss(&self) -> Vec<Vec<BigInt>> {
        let (ech, pivots) = bareiss_echelon(self);
        let free: Vec<usize> = (0..self.cols).filter(|j| !pivots.contains(j)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![BigRational::zero(); self.cols];
                x[f] = BigRational::one();
                for (i, &p) in pivots.iter().enumerate().rev() {
                    let row = &ech[i];
                    let mut s = BigRational::zero();
                    for j in p + 1..self.cols {
                        if !row[j].is_zero() && !x[j].is_zero() {
                            s += BigRational::from_integer(row[j].clone()) * &x[j];
                        }
                    }
                    x[p] = -s / BigRational::from_integer(row[p].clone());
                }
                primitive(&x)
            })
            .collect()
    }
}

/// Bareiss elimination to row echelon form; returns the echelon rows and pivot columns.
fn bareiss_echelon(a: &ExactMatrix) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut m: Vec<Vec<BigInt>> = (0..a.rows).map(|i| a.row(i).to_vec()).collect();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = (r..a.rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..a.rows {
            for j in c + 1..a.cols {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

/// Clear denominators and content; first nonzero entry positive.
fn primitive(x: &[BigRational]) -> Vec<BigInt> {
    let lcm = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let mut v: Vec<BigInt> = x.iter().map(|q| q.numer() * (&lcm / q.denom())).collect();
    normalize_primitive(&mut v);
    v
}

pub(crate) fn normalize_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return;
    }
    let negate = v
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative());
    for x in v.iter_mut() {
        *x = &*x / &g;
        if negate {
            *x = -&*x;
        }
    }
}

/// True iff `f·v ≠ 0` for some `v` with `Av = 0`.
pub fn functional_on_nullspace(a: &ExactMatrix, f: &[BigInt]) -> Result<bool> {
    if f.len() != a.cols() {
        return Err(Error::InvalidArgument(format!(
            "functional of length {} on {} columns",
            f.len(),
            a.cols()
        )));
    }
    Ok(a.nullspace().iter().any(|v| {
        let dot: BigInt = v.iter().zip(f).map(|(x, y)| x * y).sum();
        !dot.is_zero()
    }))
}

// ---------------------------------------------------------------------------
// Arithmetic modulo word-sized primes.

/// Montgomery arithmetic for an odd modulus below 2^62.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ModP {
    pub(crate) p: u64,
    ninv: u64,
    r2: u64,
}

impl ModP {
    fn new(p: u64) -> ModP {
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        ModP {
            p,
            ninv: inv.wrapping_neg(),
            r2,
        }
    }

    /// `a·b·2^−64 mod p`.
    #[inline]
    fn redc(&self, a: u64, b: u64) -> u64 {
        let t = a as u128 * b as u128;
        let m = (t as u64).wrapping_mul(self.ninv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    fn to_mont(&self, a: u64) -> u64 {
        self.redc(a, self.r2)
    }

    #[inline]
    pub(crate) fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(self.to_mont(a), b)
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub(crate) fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }

    pub(crate) fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }

    pub(crate) fn reduce(&self, x: &BigInt) -> u64 {
        let mut r: u128 = 0;
        let digits: Vec<u64> = x.magnitude().iter_u64_digits().collect();
        for d in digits.iter().rev() {
            r = ((r << 64) | *d as u128) % self.p as u128;
        }
        let r = r as u64;
        if x.sign() == Sign::Minus && r != 0 {
            self.p - r
        } else {
            r
        }
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for b in BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mulm = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powm = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulm(r, b);
            }
            b = mulm(b, b);
            e >>= 1;
        }
        r
    };
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in BASES {
        let mut x = powm(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulm(x, x);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Primes just below 2^62, largest first.
pub(crate) fn mod_primes() -> &'static [ModP] {
    static PRIMES: OnceLock<Vec<ModP>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::new();
        let mut n = (1u64 << 62) - 1;
        while out.len() < 4000 {
            if is_prime_u64(n) {
                out.push(ModP::new(n));
            }
            n -= 2;
        }
        out
    })
}

/// Reduced row echelon form mod `p`: pivot columns and the pivot rows
/// (each normalized to 1 at its pivot).
fn rref_mod(a: &ExactMatrix, mp: ModP) -> (Vec<usize>, Vec<Vec<u64>>) {
    let mut m: Vec<Vec<u64>> = (0..a.rows)
        .map(|i| a.row(i).iter().map(|x| mp.reduce(x)).collect())
        .collect();
    rref_rows(&mut m, a.cols, mp)
}

fn rref_rows(m: &mut Vec<Vec<u64>>, cols: usize, mp: ModP) -> (Vec<usize>, Vec<Vec<u64>>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    let nrows = m.len();
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = mp.inv(m[r][c]);
        let inv_m = mp.to_mont(inv);
        for x in m[r][c..].iter_mut() {
            *x = mp.redc(*x, inv_m);
        }
        let pivot_row = std::mem::take(&mut m[r]);
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = mp.to_mont(row[c]);
            for j in c..cols {
                if pivot_row[j] != 0 {
                    row[j] = mp.sub(row[j], mp.redc(pivot_row[j], f));
                }
            }
        }
        m[r] = pivot_row;
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (pivots, std::mem::take(m))
}

/// Rational reconstruction of `a mod M` with numerator and denominator below `sqrt(M/2)`.
fn rational_reconstruct(a: &BigInt, modulus: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (modulus >> 1u32).sqrt();
    let (mut r0, mut r1) = (modulus.clone(), a.mod_floor(modulus));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

fn nullspace_modular(a: &ExactMatrix) -> Vec<Vec<BigInt>> {
    let primes = mod_primes();
    // Rank and pivot pattern: the lexicographically earliest pivots among the
    // primes of maximal rank match those over Q except for a vanishing set of primes.
    let mut best: Option<(Vec<usize>, Vec<Vec<u64>>, ModP)> = None;
    for &mp in primes.iter().take(3) {
        let (piv, rows) = rref_mod(a, mp);
        let better = match &best {
            None => true,
            Some((bp, _, _)) => piv.len() > bp.len() || (piv.len() == bp.len() && piv < *bp),
        };
        if better {
            best = Some((piv, rows, mp));
        }
    }
    let (pivots, first_rows, first_prime) = best.unwrap();
    let free: Vec<usize> = (0..a.cols).filter(|j| !pivots.contains(j)).collect();
    if free.is_empty() {
        return Vec::new();
    }
    // residues[i][k]: entry of pivot row i in free column k.
    let collect = |rows: &[Vec<u64>]| -> Vec<Vec<u64>> {
        rows.iter()
            .map(|row| free.iter().map(|&f| row[f]).collect())
            .collect()
    };
    let mut acc: Vec<Vec<BigInt>> = collect(&first_rows)
        .into_iter()
        .map(|r| r.into_iter().map(BigInt::from).collect())
        .collect();
    let mut modulus = BigInt::from(first_prime.p);
    let mut used = 1usize;
    let mut next_check = 1usize;
    let mut iter = primes.iter().filter(|p| p.p != first_prime.p);
    loop {
        if used >= next_check {
            if let Some(vs) = try_reconstruct(a, &pivots, &free, &acc, &modulus) {
                return vs;
            }
            next_check = (next_check * 2).max(used + 1);
        }
        let mp = *iter
            .next()
            .expect("ran out of primes while reconstructing a nullspace");
        let (piv, rows) = rref_mod(a, mp);
        if piv != pivots {
            continue;
        }
        let res = collect(&rows);
        let m_mod_p = mp.reduce(&modulus);
        let inv = mp.inv(m_mod_p);
        for (acc_row, res_row) in acc.iter_mut().zip(&res) {
            for (x, &r) in acc_row.iter_mut().zip(res_row) {
                let cur = mp.reduce(x);
                let t = mp.mul(mp.sub(r, cur), inv);
                *x += &modulus * t;
            }
        }
        modulus *= mp.p;
        used += 1;
    }
}

fn try_reconstruct(
    a: &ExactMatrix,
    pivots: &[usize],
    free: &[usize],
    acc: &[Vec<BigInt>],
    modulus: &BigInt,
) -> Option<Vec<Vec<BigInt>>> {
    let mut out = Vec::with_capacity(free.len());
    for (k, &f) in free.iter().enumerate() {
        let mut x = vec![BigRational::zero(); a.cols];
        x[f] = BigRational::one();
        for (i, &p) in pivots.iter().enumerate() {
            let (num, den) = rational_reconstruct(&acc[i][k], modulus)?;
            x[p] = -BigRational::new(num, den);
        }
        let v = primitive(&x);
        if a.mul_vec(&v).iter().any(|e| !e.is_zero()) {
            return None;
        }
        out.push(v);
    }
    Some(out)
}

/// Row-by-row echelon form modulo two primes, reporting the rank after each
/// inserted row. The reported rank is a certified lower bound for the rank over `Q`.
#[derive(Clone, Debug)]
pub struct IncrementalRank {
    cols: usize,
    states: Vec<(ModP, Vec<(usize, Vec<u64>)>)>,
}

impl IncrementalRank {
    pub fn new(cols: usize) -> IncrementalRank {
        IncrementalRank {
            cols,
            states: mod_primes()[..2]
                .iter()
                .map(|&mp| (mp, Vec::new()))
                .collect(),
        }
    }

    /// Insert a row; returns the new rank lower bound.
    pub fn push(&mut self, row: &[BigInt]) -> usize {
        assert_eq!(row.len(), self.cols);
        for (mp, basis) in self.states.iter_mut() {
            let mut v: Vec<u64> = row.iter().map(|x| mp.reduce(x)).collect();
            for (c, b) in basis.iter() {
                if v[*c] != 0 {
                    let f = mp.to_mont(v[*c]);
                    for j in 0..self.cols {
                        if b[j] != 0 {
                            v[j] = mp.sub(v[j], mp.redc(b[j], f));
                        }
                    }
                }
            }
            if let Some(c) = v.iter().position(|&x| x != 0) {
                let inv = mp.to_mont(mp.inv(v[c]));
                for x in v.iter_mut() {
                    *x = mp.redc(*x, inv);
                }
                basis.push((c, v));
            }
        }
        self.rank()
    }

    pub fn rank(&self) -> usize {
        self.states.iter().map(|(_, b)| b.len()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Plain Gaussian elimination over Q.
    fn rank_rational(a: &ExactMatrix) -> usize {
        let mut m: Vec<Vec<BigRational>> = (0..a.rows())
            .map(|i| {
                a.row(i)
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect();
        let mut r = 0;
        for c in 0..a.cols() {
            let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            for i in 0..m.len() {
                if i != r && !m[i][c].is_zero() {
                    let f = &m[i][c] / &m[r][c];
                    for j in 0..a.cols() {
                        let d = &f * &m[r][j];
                        m[i][j] -= d;
                    }
                }
            }
            r += 1;
        }
        r
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn small_ranks() {
        assert_eq!(ExactMatrix::identity(3).rank(), 3);
        assert_eq!(ExactMatrix::zeros(3, 4).rank(), 0);
        assert_eq!(ExactMatrix::from_i64(&[vec![1, 2], vec![2, 4]]).rank(), 1);
    }

    #[test]
    fn small_nullspaces() {
        assert!(ExactMatrix::identity(3).nullspace().is_empty());
        assert_eq!(
            ExactMatrix::from_i64(&[vec![1, 1]]).nullspace(),
            vec![big(&[1, -1])]
        );
        let a = ExactMatrix::from_i64(&[vec![2, 4, 6]]);
        assert_eq!(a.nullspace(), vec![big(&[2, -1, 0]), big(&[3, 0, -1])]);
    }

    #[test]
    fn functional_examples() {
        let zero = ExactMatrix::zeros(1, 2);
        assert!(functional_on_nullspace(&zero, &big(&[1, 0])).unwrap());
        let id = ExactMatrix::identity(3);
        assert!(!functional_on_nullspace(&id, &big(&[1, 2, 3])).unwrap());
        let a = ExactMatrix::from_i64(&[vec![1, 1]]);
        assert!(!functional_on_nullspace(&a, &big(&[3, 3])).unwrap());
        assert!(functional_on_nullspace(&a, &big(&[1, 0])).unwrap());
    }

    #[test]
    fn rational_reconstruction_roundtrip() {
        let m = BigInt::from(mod_primes()[0].p) * BigInt::from(mod_primes()[1].p);
        let (n, d) = (BigInt::from(-12345), BigInt::from(679));
        let inv = d.extended_gcd(&m).x.mod_floor(&m);
        let a = (&n * inv).mod_floor(&m);
        assert_eq!(rational_reconstruct(&a, &m).unwrap(), (n, d));
        assert_eq!(
            rational_reconstruct(&BigInt::from(42), &m).unwrap(),
            (BigInt::from(42), BigInt::one())
        );
    }

    /// A large matrix with a planted nullspace, forcing the multi-modular path.
    #[test]
    fn modular_path_matches_bareiss() {
        let n = 45;
        let mut rows = Vec::new();
        let mut seed: i64 = 12345;
        let mut next = || {
            seed = (seed * 1103515245 + 12345).rem_euclid(1 << 31);
            seed % 2001 - 1000
        };
        for _ in 0..40 {
            let mut r: Vec<i64> = (0..n).map(|_| next()).collect();
            // Columns 3 and 7 repeat columns 0 and 1 with multipliers.
            r[3] = 2 * r[0] - r[1];
            r[7] = r[0] + 5 * r[2];
            rows.push(r);
        }
        let a = ExactMatrix::from_i64(&rows);
        assert!(!a.is_small());
        let ns = a.nullspace();
        assert_eq!(ns.len(), n - 40);
        for v in &ns {
            assert!(a.mul_vec(v).iter().all(Zero::is_zero));
        }
        assert_eq!(a.rank(), a.rank_bareiss());
        assert_eq!(ns, a.nullspace_bareiss());
    }

    #[test]
    fn incremental_rank_counts() {
        let mut inc = IncrementalRank::new(3);
        assert_eq!(inc.push(&big(&[1, 2, 3])), 1);
        assert_eq!(inc.push(&big(&[2, 4, 6])), 1);
        assert_eq!(inc.push(&big(&[0, 1, 0])), 2);
        assert_eq!(inc.push(&big(&[5, 1, 15])), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn bareiss_matches_rational_elimination(
            rows in 1usize..6, cols in 1usize..6,
            entries in proptest::collection::vec(-4i64..=4, 36)
        ) {
            let data: Vec<Vec<i64>> = (0..rows).map(|i| entries[i * 6..i * 6 + cols].to_vec()).collect();
            let a = ExactMatrix::from_i64(&data);
            prop_assert_eq!(a.rank_bareiss(), rank_rational(&a));
            prop_assert_eq!(a.rank_modular(), rank_rational(&a));
        }

        #[test]
        fn rank_nullity(
            entries in proptest::collection::vec(-3i64..=3, 40)
        ) {
            let data: Vec<Vec<i64>> = (0..5).map(|i| entries[i * 8..i * 8 + 8].to_vec()).collect();
            let a = ExactMatrix::from_i64(&data);
            let ns = a.nullspace();
            prop_assert_eq!(a.rank() + ns.len(), a.cols());
            for v in &ns {
                prop_assert!(a.mul_vec(v).iter().all(Zero::is_zero));
                let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
                prop_assert!(g.is_one());
                prop_assert!(v.iter().find(|x| !x.is_zero()).unwrap().is_positive());
            }
        }
    }
}
