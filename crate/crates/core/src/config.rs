//! Flat `key = value` model configuration.
//!
//! ```text
//! model = custom
//! dims = 20 30 4
//! latent_dims = r:3, s:2
//! custom_factors = i,r; j,r,s; k,s
//! prior_a = 0.5
//! prior_b = 10
//! ```
//!
//! Recognised keys: `model` (`cp`, `tucker` or `custom`), `dims`, `rank`,
//! `core_dims`, `prior_a`, `prior_b`, `custom_factors`, plus `latent_dims` and
//! `observed` for custom structures. Observed axes are named `i, j, k, ...`
//! unless `observed` lists other names.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::coo::observed_index_names;
use crate::error::{Error, Result};
use crate::model::{build_cp, build_tucker, FactorSpec, PltfModel, PriorDefaults};
use crate::scalar::Scalar;
use crate::tensor::IndexDef;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ModelKind {
    #[default]
    Cp,
    Tucker,
    Custom,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cp" => Ok(ModelKind::Cp),
            "tucker" => Ok(ModelKind::Tucker),
            "custom" => Ok(ModelKind::Custom),
            other => Err(Error::InvalidArgument(format!("unknown model kind `{other}`"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Cp => "cp",
            ModelKind::Tucker => "tucker",
            ModelKind::Custom => "custom",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub dims: Option<Vec<usize>>,
    pub rank: Option<usize>,
    pub core_dims: Option<Vec<usize>>,
    pub prior_a: Option<f64>,
    pub prior_b: Option<f64>,
    pub custom_factors: Option<Vec<Vec<String>>>,
    pub latent_dims: Vec<(String, usize)>,
    pub observed: Option<Vec<String>>,
}

fn parse_list<F: FromStr>(key: &str, v: &str, line: usize) -> Result<Vec<F>>
where
    F::Err: fmt::Display,
{
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<F>().map_err(|e| Error::Parse {
                line,
                msg: format!("{key}: bad value `{t}`: {e}"),
            })
        })
        .collect()
}

fn parse_one<F: FromStr>(key: &str, v: &str, line: usize) -> Result<F>
where
    F::Err: fmt::Display,
{
    v.trim().parse::<F>().map_err(|e| Error::Parse {
        line,
        msg: format!("{key}: bad value `{}`: {e}", v.trim()),
    })
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `key = value`, found `{body}`"),
            })?;
            cfg.set(key.trim(), value.trim(), line)?;
        }
        Ok(cfg)
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Set one key from its textual value. `line` is used in error messages.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "model" => self.kind = value.parse().map_err(|e: Error| Error::Parse { line, msg: e.to_string() })?,
            "dims" => self.dims = Some(parse_list(key, value, line)?),
            "rank" => self.rank = Some(parse_one(key, value, line)?),
            "core_dims" => self.core_dims = Some(parse_list(key, value, line)?),
            "prior_a" => self.prior_a = Some(parse_one(key, value, line)?),
            "prior_b" => self.prior_b = Some(parse_one(key, value, line)?),
            "custom_factors" => {
                let factors: Vec<Vec<String>> = value
                    .split(';')
                    .map(|f| {
                        f.split(|c: char| c == ',' || c.is_whitespace())
                            .filter(|t| !t.is_empty())
                            .map(str::to_string)
                            .collect::<Vec<_>>()
                    })
                    .filter(|f| !f.is_empty())
                    .collect();
                self.custom_factors = Some(factors);
            }
            "latent_dims" => {
                let mut dims = Vec::new();
                for tok in value.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                    let (name, card) = tok.split_once(':').ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("latent_dims: expected `name:cardinality`, found `{tok}`"),
                    })?;
                    dims.push((name.to_string(), parse_one(key, card, line)?));
                }
                self.latent_dims = dims;
            }
            "observed" => {
                self.observed = Some(
                    value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|t| !t.is_empty())
                        .map(str::to_string)
                        .collect(),
                )
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{other}`"),
                })
            }
        }
        Ok(())
    }

    /// Resolved priors, defaulting to `A = 0.5`, `B = 10`.
    pub fn priors<T: Scalar>(&self) -> PriorDefaults<T> {
        let d = PriorDefaults::<T>::default();
        PriorDefaults {
            a: self.prior_a.map_or(d.a, T::of),
            b: self.prior_b.map_or(d.b, T::of),
        }
    }

    /// Observed index names for a tensor with `n` axes.
    pub fn observed_names(&self, n: usize) -> Vec<String> {
        self.observed.clone().unwrap_or_else(|| observed_index_names(n))
    }

    /// Build the model for observed dimensions `dims`. If the config also names
    /// `dims`, they must agree.
    pub fn build<T: Scalar>(&self, dims: &[usize]) -> Result<PltfModel<T>> {
        if let Some(d) = &self.dims {
            if d.as_slice() != dims {
                return Err(Error::InvalidArgument(format!(
                    "config dims {d:?} do not match data dims {dims:?}"
                )));
            }
        }
        let priors = self.priors::<T>();
        let three = || -> Result<[usize; 3]> {
            dims.try_into().map_err(|_| {
                Error::InvalidArgument(format!(
                    "{} model needs a 3-way tensor, data has {} axes",
                    self.kind,
                    dims.len()
                ))
            })
        };
        match self.kind {
            ModelKind::Cp => {
                let rank = self
                    .rank
                    .ok_or_else(|| Error::InvalidArgument("cp model needs `rank`".into()))?;
                build_cp(three()?, rank, priors)
            }
            ModelKind::Tucker => {
                let core = self
                    .core_dims
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("tucker model needs `core_dims`".into()))?;
                let core: [usize; 3] = core.as_slice().try_into().map_err(|_| {
                    Error::InvalidArgument(format!("core_dims needs 3 values, found {}", core.len()))
                })?;
                build_tucker(three()?, core, priors)
            }
            ModelKind::Custom => self.build_custom(dims, priors),
        }
    }

    fn build_custom<T: Scalar>(&self, dims: &[usize], priors: PriorDefaults<T>) -> Result<PltfModel<T>> {
        let lists = self
            .custom_factors
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("custom model needs `custom_factors`".into()))?;
        let names = self.observed_names(dims.len());
        if names.len() != dims.len() {
            return Err(Error::InvalidArgument(format!(
                "{} observed names for {} axes",
                names.len(),
                dims.len()
            )));
        }
        let observed: Vec<IndexDef> = names
            .iter()
            .zip(dims)
            .map(|(n, &d)| IndexDef::new(n.as_str(), d))
            .collect::<Result<_>>()?;
        let mut indices = observed.clone();
        for (name, card) in &self.latent_dims {
            indices.push(IndexDef::new(name.as_str(), *card)?);
        }
        let resolve = |name: &str| -> Result<IndexDef> {
            indices
                .iter()
                .find(|i| i.name() == name)
                .cloned()
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "custom factor index `{name}` is neither observed nor in latent_dims"
                    ))
                })
        };
        let factors = lists
            .iter()
            .enumerate()
            .map(|(k, list)| {
                let ix = list.iter().map(|n| resolve(n)).collect::<Result<Vec<_>>>()?;
                FactorSpec::with_priors(format!("Z{}", k + 1), ix, priors)
            })
            .collect::<Result<Vec<_>>>()?;
        PltfModel::checked(indices, observed, factors)
    }

    /// All keys with defaults materialised, in file order.
    pub fn resolved_pairs(&self) -> Vec<(String, String)> {
        let join = |v: &[usize]| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
        let p = self.priors::<f64>();
        let mut out = vec![("model".to_string(), self.kind.to_string())];
        if let Some(d) = &self.dims {
            out.push(("dims".into(), join(d)));
        }
        if let Some(r) = self.rank {
            out.push(("rank".into(), r.to_string()));
        }
        if let Some(c) = &self.core_dims {
            out.push(("core_dims".into(), join(c)));
        }
        out.push(("prior_a".into(), p.a.to_string()));
        out.push(("prior_b".into(), p.b.to_string()));
        if let Some(f) = &self.custom_factors {
            let s = f.iter().map(|l| l.join(",")).collect::<Vec<_>>().join("; ");
            out.push(("custom_factors".into(), s));
        }
        if !self.latent_dims.is_empty() {
            let s = self
                .latent_dims
                .iter()
                .map(|(n, c)| format!("{n}:{c}"))
                .collect::<Vec<_>>()
                .join(", ");
            out.push(("latent_dims".into(), s));
        }
        if let Some(o) = &self.observed {
            out.push(("observed".into(), o.join(",")));
        }
        out
    }
}
