//! Exact convolution of big-integer sequences through number-theoretic
//! transforms modulo word-sized primes and Chinese remaindering.
//!
//! Used by the series product when operands are large and their
//! coefficients do not fit the `i128` kernel.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;

/// Longest supported transform is `2^MAX_LOG`.
const MAX_LOG: u32 = 22;

#[derive(Clone, Copy, Debug)]
struct Prime {
    p: u64,
    root: u64,
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % small == 0 {
            return n == small;
        }
    }
    // Deterministic Miller-Rabin for n < 2^32 (bases 2, 7, 61).
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'bases: for a in [2u64, 7, 61] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n;
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Primes `c·2^MAX_LOG + 1 < 2^31`, largest first, with a primitive root each.
fn primes() -> &'static [Prime] {
    static PRIMES: OnceLock<Vec<Prime>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::new();
        let step = 1u64 << MAX_LOG;
        let mut c = (1u64 << 31) / step;
        while c > 0 {
            let p = c * step + 1;
            if p < (1 << 31) && is_prime(p) {
                let factors = prime_factors(p - 1);
                let root = (2..p)
                    .find(|&g| factors.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
                    .unwrap();
                out.push(Prime { p, root });
            }
            c -= 1;
        }
        out
    })
}

/// Product of all usable primes, in bits (rounded down).
pub(crate) fn capacity_bits() -> u64 {
    primes()
        .iter()
        .map(|pr| 63 - pr.p.leading_zeros() as u64)
        .sum()
}

pub(crate) fn max_len() -> usize {
    1 << MAX_LOG
}

fn ntt(a: &mut [u64], invert: bool, pr: Prime) {
    let n = a.len();
    let p = pr.p;
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow_mod(pr.root, (p - 1) / len as u64, p);
        if invert {
            w = pow_mod(w, p - 2, p);
        }
        let half = len / 2;
        let mut tw = Vec::with_capacity(half);
        let mut x = 1u64;
        for _ in 0..half {
            tw.push(x);
            x = x * w % p;
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let u = lo[k];
                let v = hi[k] * tw[k] % p;
                lo[k] = if u + v >= p { u + v - p } else { u + v };
                hi[k] = if u >= v { u - v } else { u + p - v };
            }
        }
        len <<= 1;
    }
    if invert {
        let inv = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = *x * inv % p;
        }
    }
}

fn reduce(x: &BigInt, p: u64) -> u64 {
    let mut r = 0u64;
    let digits: Vec<u64> = x.magnitude().iter_u64_digits().collect();
    // 2^64 mod p, folded in two 32-bit steps to stay inside u64.
    for d in digits.iter().rev() {
        r = ((r << 32) | (d >> 32)) % p;
        r = ((r << 32) | (d & 0xffff_ffff)) % p;
    }
    if x.sign() == Sign::Minus && r != 0 {
        p - r
    } else {
        r
    }
}

/// Exact linear convolution `c[k] = Σ a[i] b[k−i]` for `k < out_len`.
///
/// `bound_bits` must bound `log2(max |c[k]|) + 1`.
pub(crate) fn convolve(a: &[BigInt], b: &[BigInt], out_len: usize, bound_bits: u64) -> Vec<BigInt> {
    let full = a.len() + b.len() - 1;
    let size = full.next_power_of_two();
    assert!(size <= max_len(), "transform too long");
    let mut chosen = Vec::new();
    let mut bits = 0;
    for pr in primes() {
        if bits > bound_bits + 1 {
            break;
        }
        chosen.push(*pr);
        bits += 63 - pr.p.leading_zeros() as u64;
    }
    assert!(
        bits > bound_bits + 1,
        "coefficients exceed the multi-modular capacity"
    );

    let residues: Vec<Vec<u64>> = chosen
        .iter()
        .map(|&pr| {
            let mut fa = vec![0u64; size];
            let mut fb = vec![0u64; size];
            for (x, v) in fa.iter_mut().zip(a) {
                *x = reduce(v, pr.p);
            }
            for (x, v) in fb.iter_mut().zip(b) {
                *x = reduce(v, pr.p);
            }
            ntt(&mut fa, false, pr);
            ntt(&mut fb, false, pr);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = *x * y % pr.p;
            }
            ntt(&mut fa, true, pr);
            fa.truncate(out_len.min(full));
            fa
        })
        .collect();

    // Garner mixed-radix reconstruction.
    let k = chosen.len();
    let mut inv = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in 0..i {
            inv[j][i] = pow_mod(chosen[j].p % chosen[i].p, chosen[i].p - 2, chosen[i].p);
        }
    }
    let modulus: BigUint = chosen.iter().map(|pr| BigUint::from(pr.p)).product();
    let half = &modulus >> 1;
    let n_out = out_len.min(full);
    let mut out = Vec::with_capacity(out_len);
    let mut digits = vec![0u64; k];
    for idx in 0..n_out {
        for i in 0..k {
            let p = chosen[i].p;
            let mut x = residues[i][idx];
            for j in 0..i {
                let d = if x >= digits[j] % p {
                    x - digits[j] % p
                } else {
                    x + p - digits[j] % p
                };
                x = d * inv[j][i] % p;
            }
            digits[i] = x;
        }
        if digits.iter().all(|&d| d == 0) {
            out.push(BigInt::zero());
            continue;
        }
        let mut v = BigUint::from(digits[k - 1]);
        for i in (0..k - 1).rev() {
            v *= chosen[i].p;
            v += digits[i];
        }
        out.push(if v > half {
            -BigInt::from(&modulus - v)
        } else {
            BigInt::from(v)
        });
    }
    out.resize(out_len, BigInt::zero());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let mut c = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        c
    }

    #[test]
    fn primes_are_ntt_friendly() {
        let ps = primes();
        assert!(ps.len() > 20);
        for pr in ps {
            assert_eq!((pr.p - 1) % (1 << MAX_LOG), 0);
            assert_eq!(pow_mod(pr.root, pr.p - 1, pr.p), 1);
        }
        assert!(capacity_bits() > 600);
    }

    #[test]
    fn matches_schoolbook_with_signs_and_big_values() {
        let big = BigInt::from(3).pow(200);
        let a: Vec<BigInt> = (0..37)
            .map(|i| {
                if i % 3 == 0 {
                    -&big + i
                } else {
                    BigInt::from(i * i - 50)
                }
            })
            .collect();
        let b: Vec<BigInt> = (0..23).map(|i| &big * (i - 11) + 7).collect();
        let expect = naive(&a, &b);
        let got = convolve(&a, &b, expect.len(), 2 * big.bits() + 8);
        assert_eq!(got, expect);
        let short = convolve(&a, &b, 10, 2 * big.bits() + 8);
        assert_eq!(short[..], expect[..10]);
    }
}
