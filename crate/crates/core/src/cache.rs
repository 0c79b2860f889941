//! On-disk cache of expanded `J_{0,m}` bases.
//!
//! One text file per `(m, order)`:
//!
//! ```text
//! WJF1 m=<m> order=<order>
//! <alpha> <beta> <gamma>        one line per basis monomial
//!
//! <n> <l> <coeff>               terms of the first element
//!
//! <n> <l> <coeff>               terms of the second element, ...
//! ```
//!
//! Each term block is preceded by a blank line. A request for a lower order
//! is served from any cached file of the same index with a higher order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::forms::{basis_j0m, JacobiForm, Monomial};
use crate::qseries::{BiSeries, Exponent};

/// Environment variable naming the cache directory when no flag is given.
pub const CACHE_ENV: &str = "SLOWJAC_CACHE_DIR";

const MAGIC: &str = "WJF1";

type Basis = Vec<(Monomial, JacobiForm)>;

#[derive(Clone, Debug)]
pub struct BasisCache {
    dir: PathBuf,
}

fn cache_err(path: &Path, what: impl std::fmt::Display) -> Error {
    Error::Cache(format!("{}: {what}", path.display()))
}

impl BasisCache {
    pub fn new(dir: impl Into<PathBuf>) -> BasisCache {
        BasisCache { dir: dir.into() }
    }

    /// The flag value if given, else [`CACHE_ENV`]; `None` disables caching.
    pub fn from_flag_or_env(flag: Option<PathBuf>) -> Option<BasisCache> {
        flag.or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .map(BasisCache::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, m: i64, order: i64) -> PathBuf {
        self.dir.join(format!("wjf_m{m}_order{order}.txt"))
    }

    /// Smallest cached order `≥ order` for index `m`.
    fn best_file(&self, m: i64, order: i64) -> Option<(i64, PathBuf)> {
        let prefix = format!("wjf_m{m}_order");
        fs::read_dir(&self.dir)
            .ok()?
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let o: i64 = name
                    .strip_prefix(&prefix)?
                    .strip_suffix(".txt")?
                    .parse()
                    .ok()?;
                (o >= order).then_some((o, e.path()))
            })
            .min_by_key(|(o, _)| *o)
    }

    /// Load a cached basis at `order` or above, truncated to `order`.
    pub fn load(&self, m: i64, order: i64) -> Result<Option<Basis>> {
        let Some((stored, path)) = self.best_file(m, order) else {
            return Ok(None);
        };
        let basis = read_basis(&path, m, stored)?;
        Ok(Some(
            basis
                .into_iter()
                .map(|(mono, f)| (mono, f.truncate(order)))
                .collect(),
        ))
    }

    pub fn store(&self, m: i64, order: i64, basis: &[(Monomial, JacobiForm)]) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| cache_err(&self.dir, e))?;
        let path = self.path(m, order);
        let tmp = path.with_extension("tmp");
        let mut out = String::new();
        out.push_str(&format!("{MAGIC} m={m} order={order}\n"));
        for ([a, b, c], _) in basis {
            out.push_str(&format!("{a} {b} {c}\n"));
        }
        for (_, f) in basis {
            out.push('\n');
            for n in 0..order {
                for (l, c) in f.row_terms(n) {
                    out.push_str(&format!("{n} {l} {c}\n"));
                }
            }
        }
        let mut file = fs::File::create(&tmp).map_err(|e| cache_err(&tmp, e))?;
        file.write_all(out.as_bytes())
            .map_err(|e| cache_err(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| cache_err(&path, e))
    }

    /// The basis at `order`, from the cache when possible; fresh results are stored.
    pub fn basis(&self, m: i64, order: i64) -> Result<Basis> {
        if let Some(b) = self.load(m, order)? {
            return Ok(b);
        }
        let basis = basis_j0m(m, order)?;
        self.store(m, order, &basis)?;
        Ok(basis)
    }
}

/// Basis from an optional cache.
pub fn cached_basis(cache: Option<&BasisCache>, m: i64, order: i64) -> Result<Basis> {
    match cache {
        Some(c) => c.basis(m, order),
        None => basis_j0m(m, order),
    }
}

fn parse_ints<const N: usize>(path: &Path, line: &str) -> Result<[BigInt; N]> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != N {
        return Err(cache_err(path, format!("expected {N} fields in {line:?}")));
    }
    let mut out: [BigInt; N] = std::array::from_fn(|_| BigInt::default());
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| cache_err(path, format!("bad integer {p:?}")))?;
    }
    Ok(out)
}

fn small(path: &Path, v: &BigInt) -> Result<i64> {
    i64::try_from(v).map_err(|_| cache_err(path, format!("{v} out of range")))
}

fn read_basis(path: &Path, m: i64, order: i64) -> Result<Basis> {
    let text = fs::read_to_string(path).map_err(|e| cache_err(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != format!("{MAGIC} m={m} order={order}") {
        return Err(cache_err(path, format!("unexpected header {header:?}")));
    }
    let mut monomials = Vec::new();
    for line in lines.by_ref() {
        if line.is_empty() {
            break;
        }
        let [a, b, c] = parse_ints::<3>(path, line)?;
        monomials.push([small(path, &a)?, small(path, &b)?, small(path, &c)?]);
    }
    let mut blocks: Vec<Vec<(i64, i64, BigInt)>> = vec![Vec::new()];
    for line in lines {
        if line.is_empty() {
            blocks.push(Vec::new());
            continue;
        }
        let [n, l, c] = parse_ints::<3>(path, line)?;
        blocks
            .last_mut()
            .expect("nonempty")
            .push((small(path, &n)?, small(path, &l)?, c));
    }
    if blocks.len() != monomials.len() {
        return Err(cache_err(
            path,
            format!(
                "{} monomials but {} term blocks",
                monomials.len(),
                blocks.len()
            ),
        ));
    }
    monomials
        .into_iter()
        .zip(blocks)
        .map(|(mono, terms)| {
            let series = BiSeries::from_terms(
                terms
                    .into_iter()
                    .map(|(n, l, c)| (Exponent::from_integer(n), Exponent::from_integer(l), c)),
                Some(Exponent::from_integer(order)),
            );
            Ok((mono, JacobiForm::new(0, m, series)?))
        })
        .collect()
}
