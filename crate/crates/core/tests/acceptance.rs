//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::Zero;

use slowjac::arith::isqrt;
use slowjac::forms::{basis_j0m, combine_basis, phi_generator, CoefficientFunction, JacobiForm};
use slowjac::polarity::{
    enumerate_polar_terms, p_minus, p_of_m, p_of_m_with, p_plus, polar_matrix, polar_order,
    PolarTerm,
};
use slowjac::qseries::Exponent;
use slowjac::slowgrowth::{
    anchor_study, classify_growth, dim_slow_0b, f_ab, generating_f, grid_required_order,
    hatj_nonempty, j_minus, no_positive_alpha, regularity_order, sigma_index6, slow_space,
    slow_space_with, specialize_chi, wsigma_required_order, wsigma_transfer_check, Growth,
    PolarAnchor,
};
use slowjac::thetaquot::{enumerate_slow_quotients, span_dimension, ThetaQuotientSpec};

type Outcome = Result<String, String>;

/// (m, b, dim) rows with m ≤ 24.
const TABLE1: &[(i64, i64, usize)] = &[
    (1, 1, 1),
    (2, 1, 1),
    (3, 1, 1),
    (4, 1, 1),
    (4, 2, 2),
    (5, 2, 1),
    (6, 1, 1),
    (6, 2, 2),
    (7, 2, 1),
    (8, 2, 2),
    (9, 2, 1),
    (9, 3, 3),
    (10, 2, 1),
    (10, 3, 2),
    (11, 3, 1),
    (12, 2, 2),
    (12, 3, 3),
    (13, 3, 1),
    (14, 3, 1),
    (15, 2, 1),
    (15, 3, 2),
    (16, 2, 1),
    (16, 3, 2),
    (16, 4, 4),
    (17, 3, 0),
    (17, 4, 2),
    (18, 3, 3),
    (18, 4, 3),
    (19, 3, 1),
    (19, 4, 1),
    (20, 3, 1),
    (20, 4, 4),
    (21, 3, 1),
    (21, 4, 2),
    (22, 3, 1),
    (22, 4, 2),
    (23, 4, 1),
    (24, 2, 1),
    (24, 3, 2),
    (24, 4, 4),
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn phi6(order: i64) -> Result<JacobiForm, String> {
    ThetaQuotientSpec::new(vec![4], vec![2])
        .and_then(|s| s.to_form(order))
        .map_err(err)
}

fn int(x: i64) -> BigInt {
    BigInt::from(x)
}

fn generators() -> Outcome {
    for (k, middle) in [(1, 10), (2, 4), (3, 2)] {
        let f = phi_generator(k, 12).map_err(err)?;
        let want = vec![(-1, int(1)), (0, int(middle)), (1, int(1))];
        ensure(f.q0_part() == want, || {
            format!("q^0 part of phi_0,{k} is {:?}", f.q0_part())
        })?;
    }
    let mut count = 0;
    for m in 1..=12 {
        for (mono, f) in basis_j0m(m, 12).map_err(err)? {
            f.check_invariants()
                .map_err(|e| format!("m={m} {mono:?}: {e}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} basis elements checked at order 12"))
}

fn table1() -> Outcome {
    for m in 1..=24 {
        let rows: Vec<_> = TABLE1.iter().filter(|r| r.0 == m).collect();
        if rows.is_empty() {
            continue;
        }
        let basis = basis_j0m(m, polar_order(m)).map_err(err)?;
        for &&(_, b, dim) in &rows {
            let got = slow_space_with(m, b, &basis).map_err(err)?.dim();
            ensure(got == dim, || {
                format!("(m={m}, b={b}): dim {got}, expected {dim}")
            })?;
        }
    }
    Ok(format!("{} rows", TABLE1.len()))
}

fn hat_exception() -> Outcome {
    let mut checked = 0;
    for &(m, b, dim) in TABLE1 {
        if dim == 0 {
            continue;
        }
        let s = slow_space(m, b).map_err(err)?;
        ensure(s.hat_nonempty, || {
            format!("(m={m}, b={b}) has empty hat space")
        })?;
        checked += 1;
    }
    let dim54 = dim_slow_0b(54, 4).map_err(err)?;
    ensure(dim54 > 0, || "dim at (54,4) is 0".into())?;
    let hat54 = hatj_nonempty(54, 0, 4).map_err(err)?;
    ensure(!hat54, || "hat space at (54,4) is nonempty".into())?;
    Ok(format!(
        "{checked} nonempty rows, (54,4) dim {dim54} with empty hat space"
    ))
}

fn polarity_bounds() -> Outcome {
    for m in 1..=30 {
        let p = p_of_m(m).map_err(err)?.p;
        let (lo, hi) = (p_minus(m), p_plus(m));
        ensure(lo <= p && p <= hi, || {
            format!("m={m}: {lo} <= {p} <= {hi} fails")
        })?;
        ensure(p == hi, || format!("m={m}: P={p} but P+={hi}"))?;
    }
    let p39 = p_of_m(39).map_err(err)?.p;
    ensure(p39 < p_plus(39), || format!("P(39)={p39} equals P+(39)"))?;
    let basis = basis_j0m(54, polar_order(54)).map_err(err)?;
    let p54 = p_of_m_with(54, &basis).map_err(err)?.p;
    ensure(p54 == 9, || format!("P(54)={p54}"))?;
    ensure(p_plus(54) == 25, || format!("P+(54)={}", p_plus(54)))?;
    Ok(format!(
        "P=P+ for m<=30, P(39)={p39}<P+(39)={}, P(54)=9, P+(54)=25",
        p_plus(39)
    ))
}

fn p_plus_scaling() -> Outcome {
    // |2P+ − m| ≤ 4.2032 √m, squared to stay in integers.
    let mut worst = 0.0f64;
    for m in 1..=1000i64 {
        let d = 2 * p_plus(m) - m;
        let lhs = (d as i128) * (d as i128) * 100_000_000;
        let rhs = 42032i128 * 42032 * m as i128;
        ensure(lhs <= rhs, || {
            format!("m={m}: P+={} too far from m/2", p_plus(m))
        })?;
        worst = worst.max((d as f64).abs() / 2.0 / (m as f64).sqrt());
    }
    Ok(format!("max |P+ - m/2|/sqrt(m) = {worst:.4}"))
}

fn index6() -> Outcome {
    let a01 = PolarAnchor::new(6, 0, 1).map_err(err)?;
    let a15 = PolarAnchor::new(6, 1, 5).map_err(err)?;
    let order = grid_required_order(&a01, 0..=5, -12..=12)
        .max(grid_required_order(&a15, 0..=3, -10..=10))
        .max(wsigma_required_order(6, -3..=3, -3..=3).map_err(err)?);
    let cf = phi6(order)?.to_coefficient_function().map_err(err)?;
    for n in 0..=5 {
        for l in -12..=12 {
            let want = if n == 0 || 6 * n + l == 0 { 2 } else { 0 };
            let got = f_ab(&cf, &a01, n, l).map_err(err)?;
            ensure(got == int(want), || format!("f01({n},{l}) = {got}"))?;
        }
    }
    for n in 0..=3 {
        for l in -10..=10 {
            let want = if 2 * n + l == 0 || 3 * n + l == 0 {
                -2
            } else {
                0
            };
            let got = f_ab(&cf, &a15, n, l).map_err(err)?;
            ensure(got == int(want), || format!("f15({n},{l}) = {got}"))?;
        }
    }
    let image = cf.apply_w_sigma(&sigma_index6()).map_err(err)?;
    ensure(image.agrees_on_common_range(&cf.neg()), || {
        "W3 phi6 != -phi6".into()
    })?;
    ensure(
        wsigma_transfer_check(&cf, -3..=3, -3..=3).map_err(err)?,
        || "transfer check fails".into(),
    )?;
    Ok(format!("order {order}"))
}

fn quotient_conditions() -> Outcome {
    let mut count = 0;
    let mut check = |spec: ThetaQuotientSpec| -> Result<(), String> {
        let (_, b) = spec.index_and_b().map_err(err)?;
        for r in 1..b {
            let v = spec.slow_condition_value(r).map_err(err)?;
            ensure(v.is_zero(), || format!("{spec} r={r}: {v}"))?;
            count += 1;
        }
        Ok(())
    };
    for beta in 1..=8 {
        for k in 1..=8 {
            if k % 2 == 0 || beta % 2 == 0 {
                check(ThetaQuotientSpec::new(vec![(k + 1) * beta], vec![beta]).map_err(err)?)?;
            }
        }
    }
    for k in 1..=12 {
        check(ThetaQuotientSpec::new(vec![k + 1, k + 2], vec![1, 2]).map_err(err)?)?;
    }
    Ok(format!("{count} condition values are 0"))
}

fn table2() -> Outcome {
    let rows = [
        (3, 1, 1),
        (4, 1, 1),
        (6, 1, 1),
        (6, 2, 1),
        (12, 2, 2),
        (18, 2, 1),
        (24, 2, 2),
    ];
    for (m, b, want) in rows {
        let specs = enumerate_slow_quotients(m, b, 5);
        let got = span_dimension(&specs, 1).map_err(err)?;
        ensure(got == want, || {
            format!("(m={m}, b={b}): span {got}, expected {want}")
        })?;
    }
    Ok(format!("{} rows at N_max=5", rows.len()))
}

fn table3() -> Outcome {
    let mut summary = Vec::new();
    for (m, a, b, dim) in [(5, 1, 5, 1), (6, 1, 5, 1), (8, 1, 6, 2)] {
        let s = anchor_study(m, a, b, 3, 2 * m).map_err(err)?;
        ensure(s.dim() == dim, || {
            format!("(m={m}, q^{a}y^{b}): dim {}, expected {dim}", s.dim())
        })?;
        ensure(
            s.samples.iter().all(|x| x.classification == Growth::Slow),
            || format!("(m={m}, q^{a}y^{b}): not all slow"),
        )?;
        summary.push(format!("m={m} dim {dim}"));
    }
    // Slow about y^3 at index 9, yet fast about q^2 y^9.
    let space = slow_space(9, 3).map_err(err)?;
    ensure(space.dim() > 0, || {
        "no forms slow about y^3 at index 9".into()
    })?;
    let anchor = PolarAnchor::new(9, 2, 9).map_err(err)?;
    let order = grid_required_order(&anchor, 0..=3, -18..=18);
    let basis = basis_j0m(9, order).map_err(err)?;
    let mut fast = 0;
    for v in &space.vectors {
        let cf = combine_basis(&basis, v)
            .and_then(|f| f.to_coefficient_function())
            .map_err(err)?;
        let sample = classify_growth(&cf, &anchor, 0..=3, -18..=18).map_err(err)?;
        fast += usize::from(sample.classification == Growth::Fast);
    }
    ensure(fast > 0, || {
        "no form slow about y^3 is fast about q^2y^9".into()
    })?;
    summary.push(format!(
        "m=9: {fast}/{} slow forms fast about q^2y^9",
        space.dim()
    ));
    Ok(summary.join(", "))
}

/// `f_{0,1}(n,l)` summed term by term from the coefficient table.
fn f01_brute(cf: &CoefficientFunction, n: i64, l: i64) -> Result<BigInt, String> {
    let m = cf.index();
    let mut total = BigInt::zero();
    for r in -400..=400i64 {
        let (nn, ll) = (n * r, l - r);
        if nn < 0 || ll * ll - 4 * m * nn > m * m {
            continue;
        }
        total += cf.coeff(nn, ll).map_err(err)?;
    }
    Ok(total)
}

fn cross_oracles() -> Outcome {
    let anchor = |m| PolarAnchor::new(m, 0, 1).map_err(err);
    let mut compared = 0;
    for (m, form) in [(1, phi_generator(1, 12).map_err(err)?), (6, phi6(12)?)] {
        let a = anchor(m)?;
        for k in -3..=3i64 {
            let f = generating_f(&form, 1, 0, k).map_err(err)?;
            ensure(
                f.q_trunc().is_some_and(|t| t >= Exponent::from_integer(10)),
                || format!("m={m} k={k}: generating function truncated below 10"),
            )?;
            // q^M with M = sk − ms² is reached from (n, l) = (s, k − 2ms).
            let points: Vec<(i64, i64, i64)> = (-30..=30i64)
                .map(|s| (s * k - m * s * s, s, k - 2 * m * s))
                .filter(|&(big_m, _, _)| (-200..10).contains(&big_m))
                .collect();
            let order = points
                .iter()
                .map(|&(_, n, l)| grid_required_order(&a, n..=n, l..=l))
                .max()
                .unwrap_or(1);
            let big = if m == 1 {
                phi_generator(1, order).map_err(err)?
            } else {
                phi6(order)?
            };
            let cf = big.to_coefficient_function().map_err(err)?;
            // Each preimage (s, k − 2ms) of q^M carries the coefficient of q^M.
            for &(big_m, n, l) in &points {
                let direct = f01_brute(&cf, n, l)?;
                let from_f = f
                    .coeff_at(Exponent::from_integer(big_m), Exponent::from_integer(0))
                    .map_err(err)?;
                ensure(direct == from_f, || {
                    format!("m={m} k={k} s={n} q^{big_m}: direct {direct}, generating {from_f}")
                })?;
                compared += 1;
            }
            for (q, _, c) in f.terms() {
                ensure(
                    points.iter().any(|p| Exponent::from_integer(p.0) == q),
                    || format!("m={m} k={k}: coefficient {c} at q^{q} has no direct sum"),
                )?;
            }
        }
    }

    // α-test against χ-regularity, on forms whose most polar term is at most b².
    let mut forms_tested = 0;
    for m in 1..=8 {
        let basis = basis_j0m(m, regularity_order(m, 2)).map_err(err)?;
        for b in 1..=2 {
            let terms: Vec<PolarTerm> = enumerate_polar_terms(m)
                .into_iter()
                .filter(|t| t.polarity > b * b)
                .collect();
            let vs = polar_matrix(&basis, &terms).map_err(err)?.nullspace();
            let mut coeffs = vs.clone();
            if vs.len() > 1 {
                coeffs.push(vs[0].iter().zip(&vs[1]).map(|(x, y)| x + y).collect());
            }
            for v in coeffs {
                let f = combine_basis(&basis, &v).map_err(err)?;
                let alpha = no_positive_alpha(&f, b).map_err(err)?;
                let mut regular = true;
                for n_b in 0..b {
                    for j in 0..b {
                        regular &= specialize_chi(&f, b, n_b, j)
                            .and_then(|c| c.is_regular())
                            .map_err(err)?;
                    }
                }
                ensure(alpha == regular, || {
                    format!("m={m} b={b}: alpha {alpha}, regular {regular}")
                })?;
                forms_tested += 1;
            }
        }
    }
    Ok(format!(
        "{compared} generating coefficients, {forms_tested} alpha/regularity verdicts"
    ))
}

fn j_minus_check() -> Outcome {
    let mut vals = Vec::new();
    for m in [41, 47, 59] {
        let j = j_minus(m);
        ensure(j <= 0, || format!("j-({m}) = {j}"))?;
        vals.push(format!("j-({m})={j}"));
    }
    let dims: Vec<usize> = (1..=isqrt(41))
        .map(|b| dim_slow_0b(41, b))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    ensure(dims.iter().any(|&d| d > 0), || {
        "no slow forms at m=41".into()
    })?;
    ensure(dims[5] == 1, || format!("dim at (41,6) is {}", dims[5]))?;
    Ok(format!("{}, dims at m=41 by b: {dims:?}", vals.join(" ")))
}

fn main() -> ExitCode {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "generator q^0 parts and basis invariants", generators),
        (2, "slow space dimensions for m <= 24", table1),
        (3, "hat spaces nonempty, empty at (54,4)", hat_exception),
        (4, "polarity bounds and P(54)", polarity_bounds),
        (5, "P+ scaling for m <= 1000", p_plus_scaling),
        (6, "index 6 sums, W3 eigenform, transfer", index6),
        (7, "theta quotient slow conditions", quotient_conditions),
        (8, "theta quotient span dimensions", table2),
        (9, "growth classification about q^a y^b", table3),
        (
            10,
            "generating function and alpha/regularity oracles",
            cross_oracles,
        ),
        (11, "j- bound at m = 41, 47, 59", j_minus_check),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(_, _, f)| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let out = f();
                    (out, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| (Err("panicked".into()), 0.0)))
            .collect()
    });
    let mut failed = 0;
    for ((n, name, _), (out, secs)) in criteria.iter().zip(results) {
        match out {
            Ok(detail) => println!("PASS criterion {n}: {name} ({detail}) [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n}: {name}: {why} [{secs:.1}s]");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
