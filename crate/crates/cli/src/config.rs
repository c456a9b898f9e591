//! Run configuration: TOML (or JSON) with inline or file-referenced inputs.
//!
//! ```toml
//! chain = { N = 50, k = 2, s = [1, 2] }      # or chain = "dimer.json"
//! symbol = { a = [0, 1], b = [1, 0.5], c = [1, 0.5] }
//! matrix = "a.csv"                           # complex entries, e.g. 1+2i
//! N = 60                                     # finite section of `symbol`
//! epsilons = [1e-2, 1e-5]
//! samples = 1024
//! seed = 7
//!
//! [grid]
//! re = [-1, 4]
//! im = [-1, 1]
//! resolution = 201
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;
use skinspec::linalg::CMatrix;
use skinspec::spectra::{GridSpec, SigmaDetSample, DEFAULT_RESOLUTION, MIN_RESOLUTION};
use skinspec::{ResonatorChain, SymbolCoeffs};

pub const DEFAULT_EPSILONS: [f64; 2] = [1e-2, 1e-5];
pub const DEFAULT_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum Number {
    Real(f64),
    Pair([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum ComplexInput {
    Number(Number),
    Text(String),
}

impl ComplexInput {
    fn value(&self) -> Result<Complex64> {
        match self {
            ComplexInput::Number(Number::Real(x)) => Ok(Complex64::new(*x, 0.0)),
            ComplexInput::Number(Number::Pair([re, im])) => Ok(Complex64::new(*re, *im)),
            ComplexInput::Text(t) => Complex64::from_str(t.trim()).map_err(|_| anyhow!("not a complex number: {t:?}")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolInput {
    k: Option<usize>,
    a: Vec<ComplexInput>,
    b: Vec<ComplexInput>,
    c: Vec<ComplexInput>,
}

impl SymbolInput {
    fn build(self) -> Result<SymbolCoeffs> {
        let parse = |v: &[ComplexInput]| v.iter().map(ComplexInput::value).collect::<Result<Vec<_>>>();
        if let Some(k) = self.k {
            if k != self.a.len() {
                bail!("k = {k} but a has {} entries", self.a.len());
            }
        }
        Ok(SymbolCoeffs::new(parse(&self.a)?, parse(&self.b)?, parse(&self.c)?)?)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridInput {
    re: Option<[f64; 2]>,
    im: Option<[f64; 2]>,
    resolution: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    symbol: Option<Value>,
    chain: Option<Value>,
    matrix: Option<PathBuf>,
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(default)]
    grid: GridInput,
    epsilons: Option<Vec<f64>>,
    samples: Option<usize>,
    seed: Option<u64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub resolution: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Chain(ResonatorChain),
    Dense(CMatrix),
    Section(SymbolCoeffs, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub symbol: Option<SymbolCoeffs>,
    pub chain: Option<ResonatorChain>,
    pub matrix: Option<CMatrix>,
    pub n: Option<usize>,
    pub bounds: Option<((f64, f64), (f64, f64))>,
    pub resolution: usize,
    /// Positive, sorted descending.
    pub epsilons: Vec<f64>,
    pub samples: usize,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            symbol: None,
            chain: None,
            matrix: None,
            n: None,
            bounds: None,
            resolution: DEFAULT_RESOLUTION,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            samples: DEFAULT_SAMPLES,
            seed: None,
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Parse TOML or JSON (chosen by extension) into a JSON value.
fn parse_document(path: &Path, text: &str) -> Result<Value> {
    if is_json(path) {
        serde_json::from_str(text).with_context(|| format!("{}: malformed JSON", path.display()))
    } else {
        let table: toml::Table = toml::from_str(text).with_context(|| format!("{}: malformed TOML", path.display()))?;
        Ok(serde_json::to_value(table)?)
    }
}

fn read_document(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_document(path, &text)
}

/// An inline table, or a string naming a file relative to the config.
fn resolve(value: Value, base: &Path) -> Result<Value> {
    match value {
        Value::String(p) => read_document(&base.join(p)),
        other => Ok(other),
    }
}

fn read_matrix(path: &Path) -> Result<CMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|t| Complex64::from_str(t).map_err(|_| anyhow!("{}: not a complex number: {t:?}", path.display())))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let m = CMatrix::from_rows(&rows).with_context(|| format!("{}: rows of unequal length", path.display()))?;
    m.ensure_square()?;
    Ok(m)
}

impl RunConfig {
    pub fn load(path: &Path, overrides: Overrides) -> Result<Self> {
        let doc = read_document(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_value(doc, base, overrides).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn from_value(doc: Value, base: &Path, overrides: Overrides) -> Result<Self> {
        let raw: RawConfig = serde_json::from_value(doc)?;
        let symbol = match raw.symbol {
            Some(v) => Some(serde_json::from_value::<SymbolInput>(resolve(v, base)?).context("symbol")?.build()?),
            None => None,
        };
        let chain = match raw.chain {
            Some(v) => Some(serde_json::from_value::<ResonatorChain>(resolve(v, base)?).context("chain")?),
            None => None,
        };
        let matrix = raw.matrix.map(|p| read_matrix(&base.join(p))).transpose()?;
        let bounds = match (raw.grid.re, raw.grid.im) {
            (Some([a, b]), Some([c, d])) => Some(((a, b), (c, d))),
            (None, None) => None,
            _ => bail!("grid needs both re and im bounds"),
        };
        let resolution = overrides.resolution.or(raw.grid.resolution).unwrap_or(DEFAULT_RESOLUTION);
        if resolution < MIN_RESOLUTION {
            bail!("resolution must be at least {MIN_RESOLUTION}, got {resolution}");
        }
        let mut epsilons = raw.epsilons.unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
        if epsilons.is_empty() || epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            bail!("epsilon levels must be positive and finite");
        }
        epsilons.sort_by(|a, b| b.total_cmp(a));
        epsilons.dedup();
        let cfg = Self {
            symbol,
            chain,
            matrix,
            n: raw.n,
            bounds,
            resolution,
            epsilons,
            samples: overrides.samples.or(raw.samples).unwrap_or(DEFAULT_SAMPLES),
            seed: overrides.seed.or(raw.seed),
        };
        if let Some((re, im)) = cfg.bounds {
            GridSpec::new(re, im, resolution)?;
        }
        Ok(cfg)
    }

    /// The explicit symbol, else the one read off the chain.
    pub fn symbol(&self) -> Result<SymbolCoeffs> {
        if let Some(s) = &self.symbol {
            return Ok(s.clone());
        }
        match &self.chain {
            Some(chain) => Ok(skinspec::resonator::capacitance_to_ktoeplitz(chain)?.coeffs),
            None => bail!("config needs a `symbol` or a `chain`"),
        }
    }

    pub fn chain(&self) -> Result<&ResonatorChain> {
        self.chain.as_ref().ok_or_else(|| anyhow!("config needs a `chain`"))
    }

    /// The matrix whose pseudospectrum is wanted: exactly one of `chain`,
    /// `matrix`, or `symbol` with `N`.
    pub fn matrix_source(&self) -> Result<MatrixSource> {
        match (&self.chain, &self.matrix, &self.symbol) {
            (Some(c), None, _) => Ok(MatrixSource::Chain(c.clone())),
            (None, Some(m), None) => Ok(MatrixSource::Dense(m.clone())),
            (None, None, Some(s)) => {
                let n = self.n.ok_or_else(|| anyhow!("a symbol needs `N` to fix the finite section"))?;
                if n == 0 {
                    bail!("N must be positive");
                }
                Ok(MatrixSource::Section(s.clone(), n))
            }
            (None, None, None) => bail!("config needs a `chain`, a `matrix`, or a `symbol` with `N`"),
            _ => bail!("give only one of `chain` and `matrix`"),
        }
    }

    /// Configured bounds, else the σ_det frame.
    pub fn grid_around(&self, sample: &SigmaDetSample) -> Result<GridSpec> {
        Ok(match self.bounds {
            Some((re, im)) => GridSpec::new(re, im, self.resolution)?,
            None => GridSpec::around(sample, self.resolution)?,
        })
    }

    /// Configured bounds, else a frame around `points` padded like the
    /// σ_det default.
    pub fn grid_around_points(&self, points: &[Complex64]) -> Result<GridSpec> {
        if let Some((re, im)) = self.bounds {
            return Ok(GridSpec::new(re, im, self.resolution)?);
        }
        let (x0, x1) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |r, z| (r.0.min(z.re), r.1.max(z.re)));
        let (y0, y1) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |r, z| (r.0.min(z.im), r.1.max(z.im)));
        if !(x0.is_finite() && y0.is_finite()) {
            bail!("no points to frame");
        }
        let half = 0.5 * (x1 - x0).max(y1 - y0);
        let pad = (skinspec::spectra::GRID_INFLATION * half).max(1e-3 * (1.0 + x1.abs().max(x0.abs())));
        Ok(GridSpec::new((x0 - pad, x1 + pad), (y0 - pad, y1 + pad), self.resolution)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_toml(text: &str) -> Result<RunConfig> {
        let v = parse_document(Path::new("c.toml"), text)?;
        RunConfig::from_value(v, Path::new("."), Overrides::default())
    }

    #[test]
    fn inline_symbol_with_mixed_numbers() {
        let cfg = from_toml(r#"symbol = { a = [0, "1+2i"], b = [1, [0.5, 0]], c = [1, 0.5] }"#).unwrap();
        let s = cfg.symbol().unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(s.a()[1], Complex64::new(1.0, 2.0));
        assert_eq!(cfg.epsilons, vec![1e-2, 1e-5]);
        assert_eq!(cfg.resolution, DEFAULT_RESOLUTION);
    }

    #[test]
    fn chain_symbol_is_extracted() {
        let cfg = from_toml("chain = { N = 8, k = 2, s = [1, 2] }\nepsilons = [1e-5, 1e-2, 1e-2]").unwrap();
        assert_eq!(cfg.symbol().unwrap().k(), 2);
        assert_eq!(cfg.epsilons, vec![1e-2, 1e-5]);
        assert!(matches!(cfg.matrix_source().unwrap(), MatrixSource::Chain(_)));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(from_toml("[grid]\nresolution = 8").is_err());
        assert!(from_toml("epsilons = [-1]").is_err());
        assert!(from_toml("[grid]\nre = [0, 1]").is_err());
        assert!(from_toml("colour = 3").is_err());
        assert!(from_toml("symbol = { k = 3, a = [0], b = [1], c = [1] }").is_err());
        assert!(from_toml("chain = { N = 4, k = 2, s = [1, 2, 3] }").is_err());
        assert!(from_toml("symbol = { a = [0], b = [1], c = [1] }").unwrap().matrix_source().is_err());
    }

    #[test]
    fn overrides_win() {
        let v = parse_document(Path::new("c.toml"), "samples = 10\nseed = 1\n[grid]\nresolution = 40").unwrap();
        let o = Overrides {
            samples: Some(99),
            resolution: Some(64),
            seed: None,
        };
        let cfg = RunConfig::from_value(v, Path::new("."), o).unwrap();
        assert_eq!((cfg.samples, cfg.resolution, cfg.seed), (99, 64, Some(1)));
    }
}
