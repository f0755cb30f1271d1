//! TOML model files and the built-in gallery.
//!
//! ```toml
//! family = "cramer_lundberg_exp"
//! [params]
//! c = 1.0
//! lambda = 1.0
//! mu = 2.0
//! [tolerances]
//! hjb_rel = 5e-4
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Atom, JumpMeasure, LevyModel, PiecewiseExp, PiecewisePower};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Brownian,
    CramerLundbergExp,
    PiecewisePower,
    PiecewiseExp,
    CustomDensityTable,
    Atomic,
}

impl Family {
    /// Required and optional parameter names.
    fn keys(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Family::Brownian => (&["sigma"], &["gamma"]),
            Family::CramerLundbergExp => (&["c", "lambda", "mu"], &["sigma"]),
            Family::PiecewisePower => (&["lambda1", "lambda2"], &["scale", "gamma", "sigma"]),
            Family::PiecewiseExp => (&["lambda"], &["scale", "delta", "gamma", "sigma"]),
            Family::CustomDensityTable => (&["path"], &["delta", "gamma", "sigma"]),
            Family::Atomic => (&["delta", "atoms"], &[]),
        }
    }
}

/// Numerical tolerances a model file may override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// HJB residual bound relative to `q·v(x)`.
    pub hjb_rel: f64,
    /// Second-difference tolerance for `W` and `g_q`.
    pub second_diff: f64,
    /// Second-difference tolerance for `W'` and `u_q`.
    pub derivative: f64,
    /// Bound on the Laplace identity residual.
    pub laplace: f64,
    /// Monte Carlo agreement in standard errors.
    pub mc_sigmas: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hjb_rel: 5e-4,
            second_diff: 1e-7,
            derivative: 1e-7,
            laplace: 1e-5,
            mc_sigmas: 3.0,
        }
    }
}

impl Tolerances {
    /// Replaces one entry by name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "hjb_rel" => &mut self.hjb_rel,
            "second_diff" => &mut self.second_diff,
            "derivative" => &mut self.derivative,
            "laplace" => &mut self.laplace,
            "mc_sigmas" => &mut self.mc_sigmas,
            other => return Err(Error::Parse(format!("unknown tolerance `{other}`"))),
        };
        *slot = value;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("hjb_rel", self.hjb_rel),
            ("second_diff", self.second_diff),
            ("derivative", self.derivative),
            ("laplace", self.laplace),
            ("mc_sigmas", self.mc_sigmas),
        ];
        for (k, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parse(format!(
                    "tolerance `{k}` must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub family: Family,
    pub params: toml::Table,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomEntry {
    location: f64,
    mass: f64,
}

fn number(params: &toml::Table, key: &str) -> Result<Option<f64>> {
    match params.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(v)) => Ok(Some(*v)),
        Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
        Some(other) => Err(Error::Parse(format!(
            "parameter `{key}` must be a number, got {}",
            other.type_str()
        ))),
    }
}

fn required(params: &toml::Table, key: &str) -> Result<f64> {
    number(params, key)?.ok_or_else(|| Error::Parse(format!("missing parameter `{key}`")))
}

/// `(γ, σ)` or a bounded-variation drift `δ`, never both.
fn assemble(params: &toml::Table, jumps: JumpMeasure) -> Result<LevyModel> {
    let delta = number(params, "delta")?;
    let gamma = number(params, "gamma")?;
    let sigma = number(params, "sigma")?;
    match (delta, gamma, sigma) {
        (Some(d), None, None) => LevyModel::with_bv_drift(d, jumps),
        (Some(_), _, _) => Err(Error::Parse("give either `delta` or `gamma`/`sigma`, not both".into())),
        (None, g, s) => LevyModel::new(g.unwrap_or(0.0), s.unwrap_or(0.0), jumps),
    }
}

/// Reads a two-column `x,pi` CSV; a header row and `#` comments are allowed.
pub fn read_density_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if row.len() != 2 {
            return Err(Error::Parse(format!(
                "{}: row {} needs two columns x,pi",
                path.display(),
                i + 1
            )));
        }
        match (row[0].parse::<f64>(), row[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Parse(format!(
                    "{}: row {} is not numeric",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok((xs, ys))
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ModelConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let (req, opt) = config.family.keys();
        for k in config.params.keys() {
            if !req.contains(&k.as_str()) && !opt.contains(&k.as_str()) {
                return Err(Error::Parse(format!(
                    "unknown parameter `{k}` for family {:?}; expected {:?} and optionally {:?}",
                    config.family, req, opt
                )));
            }
        }
        for k in req {
            if !config.params.contains_key(*k) {
                return Err(Error::Parse(format!(
                    "family {:?} needs parameter `{k}`",
                    config.family
                )));
            }
        }
        config.tolerances.validate()?;
        Ok(config)
    }

    /// Builds the model; relative table paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<LevyModel> {
        let p = &self.params;
        match self.family {
            Family::Brownian => LevyModel::brownian(number(p, "gamma")?.unwrap_or(0.0), required(p, "sigma")?),
            Family::CramerLundbergExp => LevyModel::cramer_lundberg(
                required(p, "c")?,
                required(p, "lambda")?,
                required(p, "mu")?,
                number(p, "sigma")?.unwrap_or(0.0),
            ),
            Family::PiecewisePower => {
                let jumps = JumpMeasure::PiecewisePower(PiecewisePower::new(
                    required(p, "lambda1")?,
                    required(p, "lambda2")?,
                    number(p, "scale")?.unwrap_or(1.0),
                )?);
                assemble(p, jumps)
            }
            Family::PiecewiseExp => {
                let jumps = JumpMeasure::PiecewiseExp(PiecewiseExp::kinked(
                    required(p, "lambda")?,
                    number(p, "scale")?.unwrap_or(1.0),
                )?);
                assemble(p, jumps)
            }
            Family::CustomDensityTable => {
                let rel = match p.get("path") {
                    Some(toml::Value::String(s)) => PathBuf::from(s),
                    _ => return Err(Error::Parse("parameter `path` must be a string".into())),
                };
                let path = if rel.is_absolute() { rel } else { base_dir.join(rel) };
                let (xs, ys) = read_density_table(&path)?;
                assemble(p, JumpMeasure::PiecewiseExp(PiecewiseExp::from_table(&xs, &ys)?))
            }
            Family::Atomic => {
                let atoms: Vec<AtomEntry> = p
                    .get("atoms")
                    .cloned()
                    .ok_or_else(|| Error::Parse("missing parameter `atoms`".into()))?
                    .try_into()
                    .map_err(|e: toml::de::Error| {
                        Error::Parse(format!("`atoms` must be a list of {{location, mass}}: {e}"))
                    })?;
                let atoms = atoms
                    .into_iter()
                    .map(|a| Atom {
                        location: a.location,
                        mass: a.mass,
                    })
                    .collect();
                LevyModel::with_bv_drift(required(p, "delta")?, JumpMeasure::atoms(atoms)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedModel {
    pub path: PathBuf,
    pub config: ModelConfig,
    pub model: LevyModel,
    /// Raw file contents, kept for run manifests.
    pub source: String,
}

/// Reads, validates and builds a model file.
pub fn load_model(path: &Path) -> Result<LoadedModel> {
    let source = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let config = ModelConfig::parse(&source)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let model = config.build(base)?;
    Ok(LoadedModel {
        path: path.to_path_buf(),
        config,
        model,
        source,
    })
}

/// Built-in models, keyed by name, as model-file text.
pub fn gallery_sources() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("brownian", "name = \"brownian\"\nfamily = \"brownian\"\n\n[params]\ngamma = 0.0\nsigma = 1.0\n"),
        (
            "cramer_lundberg_exp",
            "name = \"cramer_lundberg_exp\"\nfamily = \"cramer_lundberg_exp\"\n\n[params]\nc = 1.0\nlambda = 1.0\nmu = 2.0\n",
        ),
        (
            "piecewise_power",
            "name = \"piecewise_power\"\nfamily = \"piecewise_power\"\n\n[params]\nlambda1 = 1.5\nlambda2 = 0.5\nscale = 1.0\ngamma = 2.0\n",
        ),
        (
            "piecewise_exp",
            "name = \"piecewise_exp\"\nfamily = \"piecewise_exp\"\n\n[params]\nlambda = 0.5\nscale = 1.0\ndelta = 13.0\n",
        ),
        (
            "atomic",
            "name = \"atomic\"\nfamily = \"atomic\"\n\n[params]\ndelta = 2.0\natoms = [{ location = 1.0, mass = 1.0 }]\n",
        ),
    ])
}

/// Built-in model by name.
pub fn gallery_model(name: &str) -> Result<LevyModel> {
    let src = gallery_sources()
        .get(name)
        .copied()
        .ok_or_else(|| Error::Parse(format!("no gallery model named `{name}`")))?;
    ModelConfig::parse(src)?.build(Path::new("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gallery_builds() {
        for name in gallery_sources().keys() {
            gallery_model(name).unwrap();
        }
        assert!(gallery_model("nope").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = "family = \"brownian\"\n[params]\nsigma = 1.0\nsgima = 2.0\n";
        assert!(matches!(ModelConfig::parse(bad), Err(Error::Parse(_))));
        let bad = "family = \"brownian\"\ncolour = 1\n[params]\nsigma = 1.0\n";
        assert!(matches!(ModelConfig::parse(bad), Err(Error::Parse(_))));
        let bad = "family = \"brownian\"\n[params]\nsigma = 1.0\n[tolerances]\nhjb = 1.0\n";
        assert!(matches!(ModelConfig::parse(bad), Err(Error::Parse(_))));
        let missing = "family = \"cramer_lundberg_exp\"\n[params]\nc = 1.0\n";
        assert!(matches!(ModelConfig::parse(missing), Err(Error::Parse(_))));
    }

    #[test]
    fn density_table_relative_to_model_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("pi.csv"), "x,pi\n0.5,2.0\n1.0,1.0\n2.0,0.25\n").unwrap();
        let model_path = dir.path().join("m.toml");
        std::fs::write(
            &model_path,
            "family = \"custom_density_table\"\n[params]\npath = \"pi.csv\"\ndelta = 5.0\n",
        )
        .unwrap();
        let loaded = load_model(&model_path).unwrap();
        let d = loaded.model.jumps().density(1.0).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }
}
