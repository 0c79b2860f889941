//! Command-line driver: tables as CSV, figures as CSV plus SVG scatter plots.
//!
//! Exit status is 0 on success, 1 when a computation fails (bad index,
//! insufficient order, ...) and 2 on usage errors.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::arith::isqrt;
use crate::cache::{cached_basis, BasisCache};
use crate::error::{Error, Result};
use crate::forms::{basis_monomials, combine_basis, GeneratorPowers, JacobiForm};
use crate::polarity::{
    enumerate_polar_terms, p_minus, p_of_m_with, p_plus, polar_matrix, polar_order, PolarTerm,
};
use crate::slowgrowth::{
    anchor_study, classify_growth, grid_required_order, j_minus, regularity_order, slow_space_with,
    specialize_chi, PolarAnchor,
};
use crate::thetaquot::{enumerate_slow_quotients, span_dimension, ThetaQuotientSpec};

#[derive(Parser, Debug)]
#[command(
    name = "slowjac",
    version,
    about = "Weight-0 weak Jacobi forms and slow growth"
)]
pub struct Cli {
    /// Directory for cached basis expansions (falls back to $SLOWJAC_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn positive(s: &str) -> std::result::Result<i64, String> {
    match s.parse::<i64>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("expected a positive integer, got {s:?}")),
    }
}

fn nonneg(s: &str) -> std::result::Result<i64, String> {
    match s.parse::<i64>() {
        Ok(v) if v >= 0 => Ok(v),
        _ => Err(format!("expected a nonnegative integer, got {s:?}")),
    }
}

#[derive(Args, Debug, Clone, Default)]
struct FormArgs {
    /// Use a theta quotient, e.g. `4/2` or `3,4/1,2`.
    #[arg(long, conflicts_with = "monomial")]
    quotient: Option<String>,
    /// Use the basis monomial φ₀,₁^α φ₀,₂^β φ₀,₃^γ, given as `α,β,γ`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    monomial: Option<Vec<i64>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients of the monomial basis of J_{0,m}.
    Basis {
        #[arg(long, value_parser = positive)]
        m: i64,
        #[arg(long, value_parser = positive)]
        order: Option<i64>,
    },
    /// Polar terms of index m.
    Polar {
        #[arg(long, value_parser = positive)]
        m: i64,
    },
    /// P(m) together with its bounds.
    Pm {
        #[arg(long, value_parser = positive, default_value_t = 1)]
        m_min: i64,
        #[arg(long, value_parser = positive)]
        m_max: i64,
    },
    /// Lower bound P₋(m) = ⌈m/6⌉.
    Pminus {
        #[arg(long, value_parser = positive)]
        m_max: i64,
    },
    /// Upper bound P⁺(m) from polar-term counting.
    Pplus {
        #[arg(long, value_parser = positive)]
        m_max: i64,
    },
    /// Lower bound j₋(m) for slow-growing forms about some y^b.
    Jminus {
        #[arg(long, value_parser = positive)]
        m_max: i64,
    },
    /// Dimensions of slow spaces about y^b, one row per (m, b ≤ √m).
    Dims {
        #[arg(long, value_parser = positive, default_value_t = 1)]
        m_min: i64,
        #[arg(long, value_parser = positive)]
        m_max: i64,
    },
    /// f_{a,b}(n, l) on a grid.
    F {
        #[arg(long, value_parser = positive)]
        m: i64,
        #[arg(long, value_parser = nonneg, default_value_t = 0)]
        a: i64,
        #[arg(long, value_parser = positive)]
        b: i64,
        #[arg(long, value_parser = nonneg, default_value_t = 3)]
        n_max: i64,
        /// Defaults to 2m.
        #[arg(long, value_parser = nonneg)]
        l_max: Option<i64>,
        #[arg(long, value_parser = positive)]
        order: Option<i64>,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Growth classification about q^a y^b.
    Classify {
        #[arg(long, value_parser = positive)]
        m: i64,
        #[arg(long, value_parser = nonneg, default_value_t = 0)]
        a: i64,
        #[arg(long, value_parser = positive)]
        b: i64,
        #[arg(long, value_parser = nonneg, default_value_t = 3)]
        n_max: i64,
        /// Defaults to 2m.
        #[arg(long, value_parser = nonneg)]
        l_max: Option<i64>,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Specialization χ_{n_b,j}(τ) = q^{m n_b²/b²} φ(τ, (n_b τ + j)/b).
    Chi {
        #[arg(long, value_parser = positive)]
        m: i64,
        #[arg(long, value_parser = positive)]
        b: i64,
        #[arg(long, value_parser = nonneg, default_value_t = 0)]
        n_b: i64,
        #[arg(long, value_parser = nonneg, default_value_t = 0)]
        j: i64,
        #[arg(long, value_parser = positive)]
        order: Option<i64>,
        #[command(flatten)]
        form: FormArgs,
    },
    /// Slow theta quotients of index m about y^b.
    Quotients {
        #[arg(long, value_parser = positive)]
        m: i64,
        #[arg(long, value_parser = positive)]
        b: i64,
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        /// Report the span dimension instead of listing specs.
        #[arg(long)]
        span: bool,
        #[arg(long, value_parser = positive)]
        order: Option<i64>,
    },
    /// Figure data (CSV) and scatter plots (SVG).
    Figures {
        #[arg(long, value_enum, default_value_t = Figure::All)]
        which: Figure,
        /// Overrides the per-figure default range.
        #[arg(long, value_parser = positive)]
        m_max: Option<i64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Figure {
    /// P(m) against P⁺(m).
    P,
    /// P⁺(m).
    Pplus,
    /// dim of slow spaces about y^b.
    Slow,
    /// j₋(m).
    Jminus,
    All,
}

impl Figure {
    fn name(self) -> &'static str {
        match self {
            Figure::P => "p",
            Figure::Pplus => "pplus",
            Figure::Slow => "slow",
            Figure::Jminus => "jminus",
            Figure::All => "all",
        }
    }

    fn default_range(self) -> i64 {
        match self {
            Figure::P => 40,
            Figure::Pplus => 1000,
            Figure::Slow => 24,
            Figure::Jminus => 500,
            Figure::All => 0,
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let cache = BasisCache::from_flag_or_env(cli.cache_dir.clone());
    let cache = cache.as_ref();
    let csv = match &cli.command {
        Command::Basis { m, order } => basis_csv(cache, *m, order.unwrap_or(polar_order(*m)))?,
        Command::Polar { m } => polar_csv(*m),
        Command::Pm { m_min, m_max } => pm_csv(cache, *m_min, *m_max)?,
        Command::Pminus { m_max } => {
            simple_csv("m,P_minus", (1..=*m_max).map(|m| vec![m, p_minus(m)]))
        }
        Command::Pplus { m_max } => {
            simple_csv("m,P_plus", (1..=*m_max).map(|m| vec![m, p_plus(m)]))
        }
        Command::Jminus { m_max } => {
            simple_csv("m,j_minus", (1..=*m_max).map(|m| vec![m, j_minus(m)]))
        }
        Command::Dims { m_min, m_max } => dims_csv(cache, *m_min, *m_max)?,
        Command::F {
            m,
            a,
            b,
            n_max,
            l_max,
            order,
            form,
        } => f_csv(
            cache,
            *m,
            *a,
            *b,
            *n_max,
            l_max.unwrap_or(2 * m),
            *order,
            form,
        )?,
        Command::Classify {
            m,
            a,
            b,
            n_max,
            l_max,
            form,
        } => classify_csv(
            cache,
            *m,
            *a,
            *b,
            *n_max,
            l_max.unwrap_or(2 * m),
            form,
            stderr,
        )?,
        Command::Chi {
            m,
            b,
            n_b,
            j,
            order,
            form,
        } => chi_csv(cache, *m, *b, *n_b, *j, *order, form, stderr)?,
        Command::Quotients {
            m,
            b,
            n_max,
            span,
            order,
        } => quotients_csv(*m, *b, *n_max, *span, *order)?,
        Command::Figures {
            which,
            m_max,
            out_dir,
        } => {
            figures(cache, *which, *m_max, out_dir, stderr)?;
            return Ok(());
        }
    };
    emit(cli.out.as_deref(), &csv, stdout)
}

fn emit(path: Option<&Path>, csv: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, csv)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(csv.as_bytes())
            .map_err(|e| Error::InvalidArgument(format!("cannot write output: {e}"))),
    }
}

fn simple_csv(header: &str, rows: impl Iterator<Item = Vec<i64>>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn check_order(given: Option<i64>, required: i64) -> Result<i64> {
    match given {
        Some(o) if o < required => Err(Error::InvalidArgument(format!(
            "order {o} is below the required order {required}"
        ))),
        Some(o) => Ok(o),
        None => Ok(required),
    }
}

fn basis_csv(cache: Option<&BasisCache>, m: i64, order: i64) -> Result<String> {
    let basis = cached_basis(cache, m, order)?;
    let mut out = String::from("alpha,beta,gamma,n,l,coeff\n");
    for ([a, b, c], f) in &basis {
        for n in 0..order {
            for (l, v) in f.row_terms(n) {
                let _ = writeln!(out, "{a},{b},{c},{n},{l},{v}");
            }
        }
    }
    Ok(out)
}

fn polar_csv(m: i64) -> String {
    let mut terms = enumerate_polar_terms(m);
    terms.sort_by_key(|t| (t.n, t.l));
    simple_csv(
        "n,l,polarity",
        terms.into_iter().map(|t| vec![t.n, t.l, t.polarity]),
    )
}

fn pm_csv(cache: Option<&BasisCache>, m_min: i64, m_max: i64) -> Result<String> {
    let mut rows = Vec::new();
    for m in m_min..=m_max {
        let basis = cached_basis(cache, m, polar_order(m))?;
        let p = p_of_m_with(m, &basis)?.p;
        rows.push(vec![m, p, p_minus(m), p_plus(m)]);
    }
    Ok(simple_csv("m,P,P_minus,P_plus", rows.into_iter()))
}

fn dims_rows(
    cache: Option<&BasisCache>,
    m_min: i64,
    m_max: i64,
) -> Result<Vec<(i64, i64, usize, bool)>> {
    let mut rows = Vec::new();
    for m in m_min..=m_max {
        let basis = cached_basis(cache, m, polar_order(m))?;
        for b in 1..=isqrt(m) {
            let s = slow_space_with(m, b, &basis)?;
            rows.push((m, b, s.dim(), s.hat_nonempty));
        }
    }
    Ok(rows)
}

fn dims_csv(cache: Option<&BasisCache>, m_min: i64, m_max: i64) -> Result<String> {
    let mut out = String::from("m,b,dim,hat_nonempty\n");
    for (m, b, d, h) in dims_rows(cache, m_min, m_max)? {
        let _ = writeln!(out, "{m},{b},{d},{h}");
    }
    Ok(out)
}

/// The form selected by the flags, or by default the first form with no term
/// more polar than the anchor, signed so that its `q⁰` row ends positively.
fn select_form(
    cache: Option<&BasisCache>,
    m: i64,
    anchor: &PolarAnchor,
    order: i64,
    form: &FormArgs,
) -> Result<JacobiForm> {
    if let Some(q) = &form.quotient {
        let spec: ThetaQuotientSpec = q.parse()?;
        let (index, _) = spec.index_and_b()?;
        if index != m {
            return Err(Error::InvalidArgument(format!(
                "quotient {spec} has index {index}, not {m}"
            )));
        }
        return spec.to_form(order);
    }
    if let Some(mono) = &form.monomial {
        let mono = [mono[0], mono[1], mono[2]];
        if !basis_monomials(m).contains(&mono) {
            return Err(Error::InvalidArgument(format!(
                "{mono:?} is not a basis monomial of index {m}"
            )));
        }
        return Ok(GeneratorPowers::new(order)?.monomial(mono));
    }
    let basis = cached_basis(cache, m, order.max(polar_order(m)))?;
    let terms: Vec<PolarTerm> = enumerate_polar_terms(m)
        .into_iter()
        .filter(|t| t.polarity > anchor.polarity())
        .collect();
    let v = polar_matrix(&basis, &terms)?
        .nullspace()
        .into_iter()
        .next()
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "no form of index {m} avoids terms more polar than the anchor; pass --quotient or --monomial"
            ))
        })?;
    let f = combine_basis(&basis, &v)?.truncate(order);
    // Monomial coordinates can carry content the form itself does not have.
    let mut content = BigInt::zero();
    for (_, _, c) in f.series().terms() {
        content = content.gcd(c);
    }
    if content.is_zero() {
        return Ok(f);
    }
    if f.row_terms(0).last().is_some_and(|(_, c)| c.is_negative()) {
        content = -content;
    }
    JacobiForm::new(f.weight(), m, f.series().div_exact(&content)?)
}

#[allow(clippy::too_many_arguments)]
fn f_csv(
    cache: Option<&BasisCache>,
    m: i64,
    a: i64,
    b: i64,
    n_max: i64,
    l_max: i64,
    order: Option<i64>,
    form: &FormArgs,
) -> Result<String> {
    let anchor = PolarAnchor::new(m, a, b)?;
    let required = grid_required_order(&anchor, 0..=n_max, -l_max..=l_max).max(1);
    let order = check_order(order, required)?;
    let f = select_form(cache, m, &anchor, order, form)?;
    let sample = classify_growth(
        &f.to_coefficient_function()?,
        &anchor,
        0..=n_max,
        -l_max..=l_max,
    )?;
    let mut out = String::from("n,l,f\n");
    for (n, l, v) in &sample.grid {
        let _ = writeln!(out, "{n},{l},{v}");
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn classify_csv(
    cache: Option<&BasisCache>,
    m: i64,
    a: i64,
    b: i64,
    n_max: i64,
    l_max: i64,
    form: &FormArgs,
    stderr: &mut dyn Write,
) -> Result<String> {
    let anchor = PolarAnchor::new(m, a, b)?;
    if form.quotient.is_some() || form.monomial.is_some() {
        let order = grid_required_order(&anchor, 0..=n_max, -l_max..=l_max).max(1);
        let f = select_form(cache, m, &anchor, order, form)?;
        let s = classify_growth(
            &f.to_coefficient_function()?,
            &anchor,
            0..=n_max,
            -l_max..=l_max,
        )?;
        let lines: Vec<String> = s
            .support_lines()
            .iter()
            .map(|(e, f)| format!("{e}n{f:+}l=0"))
            .collect();
        return Ok(format!(
            "m,a,b,classification,support_lines\n{m},{a},{b},{},{}\n",
            s.classification,
            lines.join(" ")
        ));
    }
    let study = anchor_study(m, a, b, n_max, l_max)?;
    let labels: Vec<String> = study
        .samples
        .iter()
        .map(|s| s.classification.to_string())
        .collect();
    for (v, s) in study.vectors.iter().zip(&study.samples) {
        let coeffs: Vec<String> = v.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(stderr, "{}: [{}]", s.classification, coeffs.join(" "));
    }
    Ok(format!(
        "m,a,b,dim_polar,dim_slow,classifications,hat_nonempty\n{m},{a},{b},{},{},{},{}\n",
        study.dim_polar,
        study.dim(),
        labels.join(" "),
        study.hat_nonempty
    ))
}

#[allow(clippy::too_many_arguments)]
fn chi_csv(
    cache: Option<&BasisCache>,
    m: i64,
    b: i64,
    n_b: i64,
    j: i64,
    order: Option<i64>,
    form: &FormArgs,
    stderr: &mut dyn Write,
) -> Result<String> {
    let anchor = PolarAnchor::new(m, 0, b)?;
    let order = check_order(order, regularity_order(m, b))?;
    let f = select_form(cache, m, &anchor, order, form)?;
    let chi = specialize_chi(&f, b, n_b, j)?;
    let mut out = String::from("q_exp,x_power,coeff\n");
    for (e, c) in chi.terms() {
        for (k, v) in c.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            let _ = writeln!(out, "{e},{k},{v}");
        }
    }
    let _ = writeln!(
        stderr,
        "known below q^{}; regular at q=0: {}",
        chi.trunc(),
        chi.is_regular()?
    );
    Ok(out)
}

fn quotients_csv(m: i64, b: i64, n_max: usize, span: bool, order: Option<i64>) -> Result<String> {
    let specs = enumerate_slow_quotients(m, b, n_max);
    if span {
        let order = check_order(order, polar_order(m))?;
        let dim = span_dimension(&specs, order)?;
        return Ok(format!(
            "m,b,n_max,count,span_dim\n{m},{b},{n_max},{},{dim}\n",
            specs.len()
        ));
    }
    let mut out = String::from("spec,length\n");
    for s in &specs {
        let _ = writeln!(out, "{s},{}", s.len());
    }
    Ok(out)
}

fn figures(
    cache: Option<&BasisCache>,
    which: Figure,
    m_max: Option<i64>,
    dir: &Path,
    stderr: &mut dyn Write,
) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", dir.display())))?;
    let list = if which == Figure::All {
        vec![Figure::P, Figure::Pplus, Figure::Slow, Figure::Jminus]
    } else {
        vec![which]
    };
    for fig in list {
        let top = m_max.unwrap_or(fig.default_range());
        let (csv, title, series) = match fig {
            Figure::P => {
                let csv = pm_csv(cache, 1, top)?;
                let rows = parse_rows(&csv);
                let p: Vec<(i64, i64)> = rows.iter().map(|r| (r[0], r[1])).collect();
                let pp: Vec<(i64, i64)> = rows.iter().map(|r| (r[0], r[3])).collect();
                (
                    csv,
                    "P(m) and P+(m)",
                    vec![("P(m)".to_string(), p), ("P+(m)".to_string(), pp)],
                )
            }
            Figure::Pplus => {
                let rows: Vec<Vec<i64>> = (1..=top).map(|m| vec![m, p_plus(m)]).collect();
                let pts = rows.iter().map(|r| (r[0], r[1])).collect();
                (
                    simple_csv("m,P_plus", rows.into_iter()),
                    "P+(m)",
                    vec![("P+(m)".to_string(), pts)],
                )
            }
            Figure::Slow => {
                let rows = dims_rows(cache, 1, top)?;
                let mut csv = String::from("m,b,dim,hat_nonempty\n");
                let mut series: Vec<(String, Vec<(i64, i64)>)> = Vec::new();
                for &(m, b, d, h) in &rows {
                    let _ = writeln!(csv, "{m},{b},{d},{h}");
                    while series.len() < b as usize {
                        series.push((format!("b={}", series.len() + 1), Vec::new()));
                    }
                    series[b as usize - 1].1.push((m, d as i64));
                }
                (csv, "dim of slow spaces about y^b", series)
            }
            Figure::Jminus => {
                let rows: Vec<Vec<i64>> = (1..=top).map(|m| vec![m, j_minus(m)]).collect();
                let pts = rows.iter().map(|r| (r[0], r[1])).collect();
                (
                    simple_csv("m,j_minus", rows.into_iter()),
                    "j-(m)",
                    vec![("j-(m)".to_string(), pts)],
                )
            }
            Figure::All => unreachable!(),
        };
        let base = dir.join(format!("fig_{}", fig.name()));
        let write = |ext: &str, body: &str| {
            let p = base.with_extension(ext);
            fs::write(&p, body)
                .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", p.display())))
        };
        write("csv", &csv)?;
        write("svg", &scatter_svg(title, &series))?;
        let _ = writeln!(stderr, "wrote {}.csv and .svg", base.display());
    }
    Ok(())
}

fn parse_rows(csv: &str) -> Vec<Vec<i64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').filter_map(|x| x.parse().ok()).collect())
        .collect()
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Minimal scatter plot: axes, extreme tick labels, points, legend and title.
pub fn scatter_svg(title: &str, series: &[(String, Vec<(i64, i64)>)]) -> String {
    let (w, h, pad) = (640.0, 420.0, 50.0);
    let pts = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0, 1, 0, 1);
    }
    let sx = |x: i64| pad + (x - x0) as f64 / ((x1 - x0).max(1) as f64) * (w - 2.0 * pad);
    let sy = |y: i64| h - pad - (y - y0) as f64 / ((y1 - y0).max(1) as f64) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - pad,
        w - pad,
        h - pad
    );
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}" stroke="black"/>"#,
        h - pad
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" font-size="11" text-anchor="{anchor}">{x}</text>"#,
            sx(x),
            h - pad + 16.0
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" font-size="11" text-anchor="end">{y}</text>"#,
            pad - 6.0,
            sy(y) + 4.0
        );
    }
    for (i, (label, points)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for &(x, y) in points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="none" stroke="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            w - pad - 80.0,
            pad + 14.0 * i as f64,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(args: &[&str]) -> String {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["slowjac"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
        String::from_utf8(out).unwrap()
    }

    fn status(args: &[&str]) -> i32 {
        let mut full = vec!["slowjac"];
        full.extend_from_slice(args);
        run(full, &mut Vec::new(), &mut Vec::new())
    }

    #[test]
    fn small_tables() {
        assert_eq!(
            run_ok(&["pminus", "--m-max", "3"]),
            "m,P_minus\n1,1\n2,1\n3,1\n"
        );
        let pp = run_ok(&["pplus", "--m-max", "60"]);
        assert!(pp.lines().any(|l| l == "54,25"));
        let polar = run_ok(&["polar", "--m", "2"]);
        assert_eq!(polar, "n,l,polarity\n0,1,1\n0,2,4\n");
        let pm = run_ok(&["pm", "--m-max", "6"]);
        assert!(pm.lines().any(|l| l == "6,1,1,1"));
    }

    #[test]
    fn dims_rows_for_small_m() {
        let d = run_ok(&["dims", "--m-max", "4"]);
        assert!(d.contains("1,1,1,true\n"));
        assert!(d.contains("4,2,2,true\n"));
    }

    #[test]
    fn f_with_quotient() {
        let f = run_ok(&[
            "f",
            "--m",
            "6",
            "--b",
            "1",
            "--n-max",
            "1",
            "--l-max",
            "3",
            "--quotient",
            "4/2",
        ]);
        assert!(f.starts_with("n,l,f\n0,-3,2\n"));
        assert!(f.contains("\n1,1,0\n"));
    }

    #[test]
    fn chi_of_phi01() {
        let c = run_ok(&["chi", "--m", "1", "--b", "1", "--order", "10"]);
        assert_eq!(c, "q_exp,x_power,coeff\n0,0,12\n");
    }

    #[test]
    fn quotient_listing() {
        let q = run_ok(&["quotients", "--m", "6", "--b", "1", "--n-max", "1"]);
        assert!(q.contains("[4]/[2],1\n"));
        let s = run_ok(&[
            "quotients",
            "--m",
            "6",
            "--b",
            "1",
            "--n-max",
            "1",
            "--span",
        ]);
        assert_eq!(s, "m,b,n_max,count,span_dim\n6,1,1,1,1\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(status(&["pplus"]), 2);
        assert_eq!(status(&["pplus", "--m-max", "0"]), 2);
        assert_eq!(status(&["bogus"]), 2);
        assert_eq!(status(&["--help"]), 0);
        // Anchor not polar, and an order below the requirement.
        assert_eq!(status(&["f", "--m", "6", "--a", "1", "--b", "4"]), 1);
        assert_eq!(
            status(&["f", "--m", "6", "--a", "1", "--b", "5", "--order", "3"]),
            1
        );
        assert_eq!(
            status(&["f", "--m", "6", "--b", "1", "--quotient", "4/3"]),
            1
        );
    }

    #[test]
    fn figures_written() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        run_ok(&[
            "figures",
            "--which",
            "pplus",
            "--m-max",
            "30",
            "--out-dir",
            d,
        ]);
        let csv = fs::read_to_string(dir.path().join("fig_pplus.csv")).unwrap();
        assert_eq!(csv.lines().count(), 31);
        let svg = fs::read_to_string(dir.path().join("fig_pplus.svg")).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 30);
    }

    #[test]
    fn cache_flag_populates_directory() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        let cold = run_ok(&["--cache-dir", d, "basis", "--m", "3", "--order", "4"]);
        assert!(dir.path().join("wjf_m3_order4.txt").exists());
        let warm = run_ok(&["--cache-dir", d, "basis", "--m", "3", "--order", "4"]);
        assert_eq!(cold, warm);
    }

    #[test]
    fn svg_of_empty_series() {
        let s = scatter_svg("t", &[]);
        assert!(s.contains("</svg>"));
    }

    #[test]
    fn signed_default_form() {
        let anchor = PolarAnchor::new(6, 1, 5).unwrap();
        let f = select_form(None, 6, &anchor, 5, &FormArgs::default()).unwrap();
        let q0 = f.row_terms(0);
        assert_eq!(q0.last().unwrap().1, BigInt::from(1));
    }
}
