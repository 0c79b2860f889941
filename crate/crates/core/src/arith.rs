//! Small integer helpers: Jacobi/Kronecker symbols, integer square roots, lattice counts.

use num_integer::Roots;

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i64, n: i64) -> i32 {
    assert!(
        n > 0 && n % 2 == 1,
        "jacobi symbol needs odd positive modulus"
    );
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut result = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Kronecker symbol `(a/n)`: the completely multiplicative extension of the
/// Jacobi symbol with `(a/-1) = sign(a)` and `(a/2)` given by `a mod 8`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let twos = n.trailing_zeros();
    n >>= twos;
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    result * jacobi(a, n)
}

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(x: i64) -> i64 {
    assert!(x >= 0);
    x.sqrt()
}

pub fn isqrt_i128(x: i128) -> i128 {
    assert!(x >= 0);
    x.sqrt()
}

/// Smallest integer `s` with `s*s >= x` (for `x >= 0`).
pub fn ceil_sqrt(x: i64) -> i64 {
    let s = isqrt(x);
    if s * s == x {
        s
    } else {
        s + 1
    }
}

/// Representative of `l mod 2m` in `[-m, m]`, with `±m` mapped to `+m`.
pub fn canonical_residue(l: i64, m: i64) -> i64 {
    let r = l.rem_euclid(2 * m);
    if r > m {
        r - 2 * m
    } else {
        r
    }
}

/// Number of `(a, b, c) >= 0` with `a + 2b + 3c = m`, i.e. `dim J_{0,m}`.
pub fn lattice_count_123(m: i64) -> i64 {
    if m < 0 {
        return 0;
    }
    (0..=m / 3).map(|c| (m - 3 * c) / 2 + 1).sum()
}
