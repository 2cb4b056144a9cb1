//! Declarative PLTF model structure: indices, factors, gamma priors and clamps.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{describe, hadamard, IndexDef, NamedTensor};

/// Elementwise gamma prior `Z ~ G(shape A, scale B/A)`, so the prior mean is `B`
/// and the standard deviation `B/√A`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaPrior<T> {
    shape: NamedTensor<T>,
    mean: NamedTensor<T>,
}

impl<T: Scalar> GammaPrior<T> {
    pub fn new(shape: NamedTensor<T>, mean: NamedTensor<T>) -> Result<Self> {
        if !shape.same_shape(&mean) {
            return Err(Error::ShapeMismatch {
                expected: describe(shape.indices()),
                found: describe(mean.indices()),
            });
        }
        for t in [&shape, &mean] {
            if let Some(pos) = t.values().iter().position(|v| *v <= T::zero()) {
                return Err(Error::InvalidArgument(format!(
                    "gamma prior parameters must be positive (offset {pos})"
                )));
            }
        }
        Ok(GammaPrior { shape, mean })
    }

    /// Scalar hyperparameters broadcast over `indices`.
    pub fn broadcast(indices: &[IndexDef], a: T, b: T) -> Result<Self> {
        Self::new(
            NamedTensor::filled(indices.to_vec(), a)?,
            NamedTensor::filled(indices.to_vec(), b)?,
        )
    }

    /// The shape parameter `A`.
    pub fn shape(&self) -> &NamedTensor<T> {
        &self.shape
    }

    /// The mean parameter `B`.
    pub fn mean(&self) -> &NamedTensor<T> {
        &self.mean
    }

    /// Prior rate `A/B` (inverse of the scale `B/A`).
    pub fn rate(&self) -> NamedTensor<T> {
        self.shape
            .zip_map(&self.mean, |a, b| a / b)
            .expect("prior parameters share a shape")
    }
}

/// Scalar hyperparameters used by the builders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriorDefaults<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> Default for PriorDefaults<T> {
    fn default() -> Self {
        PriorDefaults {
            a: T::of(0.5),
            b: T::of(10.0),
        }
    }
}

impl<T: Scalar> PriorDefaults<T> {
    pub fn new(a: T, b: T) -> Self {
        PriorDefaults { a, b }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorSpec<T> {
    name: String,
    indices: Vec<IndexDef>,
    prior: GammaPrior<T>,
    fixed: Option<NamedTensor<T>>,
}

impl<T: Scalar> FactorSpec<T> {
    pub fn new(name: impl Into<String>, indices: Vec<IndexDef>, prior: GammaPrior<T>) -> Self {
        FactorSpec {
            name: name.into(),
            indices,
            prior,
            fixed: None,
        }
    }

    pub fn with_priors(name: impl Into<String>, indices: Vec<IndexDef>, priors: PriorDefaults<T>) -> Result<Self> {
        let prior = GammaPrior::broadcast(&indices, priors.a, priors.b)?;
        Ok(Self::new(name, indices, prior))
    }

    /// Clamp the factor to fixed values; it still enters every contraction but
    /// is never updated.
    pub fn clamped(mut self, values: NamedTensor<T>) -> Self {
        self.fixed = Some(values);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn indices(&self) -> &[IndexDef] {
        &self.indices
    }

    pub fn prior(&self) -> &GammaPrior<T> {
        &self.prior
    }

    pub fn fixed(&self) -> Option<&NamedTensor<T>> {
        self.fixed.as_ref()
    }

    pub fn is_clamped(&self) -> bool {
        self.fixed.is_some()
    }
}

/// One reason a model is invalid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoFactors,
    DuplicateIndex(String),
    DuplicateFactorName(String),
    UnknownObservedIndex(String),
    UnknownFactorIndex { factor: String, index: String },
    CardinalityMismatch { factor: String, index: String },
    EmptyFactor(String),
    DuplicateFactorIndex { factor: String, index: String },
    UnusedIndex(String),
    ObservedNotInFactor(String),
    AllClamped,
    PriorShape(String),
    FixedShape(String),
    FixedNegative(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoFactors => write!(f, "model has no factors"),
            DuplicateIndex(i) => write!(f, "index `{i}` declared twice"),
            DuplicateFactorName(n) => write!(f, "factor name `{n}` used twice"),
            UnknownObservedIndex(i) => write!(f, "observed index `{i}` is not a model index"),
            UnknownFactorIndex { factor, index } => {
                write!(f, "factor `{factor}` references unknown index `{index}`")
            }
            CardinalityMismatch { factor, index } => write!(
                f,
                "factor `{factor}` uses index `{index}` with a different cardinality"
            ),
            EmptyFactor(n) => write!(f, "factor `{n}` has no indices"),
            DuplicateFactorIndex { factor, index } => {
                write!(f, "factor `{factor}` lists index `{index}` twice")
            }
            UnusedIndex(i) => write!(f, "index `{i}` is neither observed nor used by any factor"),
            ObservedNotInFactor(i) => {
                write!(f, "observed index `{i}` appears in no factor")
            }
            AllClamped => write!(f, "every factor is clamped; nothing to infer"),
            PriorShape(n) => write!(f, "prior of factor `{n}` does not match its indices"),
            FixedShape(n) => write!(f, "fixed values of factor `{n}` do not match its indices"),
            FixedNegative(n) => write!(f, "fixed values of factor `{n}` are negative"),
        }
    }
}

/// Index universe `V`, visible indices `V₀ ⊆ V`, and ordered factors over
/// subsets `V_α ⊆ V`.
#[derive(Clone, Debug, PartialEq)]
pub struct PltfModel<T> {
    indices: Vec<IndexDef>,
    observed: Vec<IndexDef>,
    factors: Vec<FactorSpec<T>>,
}

impl<T: Scalar> PltfModel<T> {
    /// Assemble a model without checking it; see [`PltfModel::validate`].
    pub fn new(indices: Vec<IndexDef>, observed: Vec<IndexDef>, factors: Vec<FactorSpec<T>>) -> Self {
        PltfModel {
            indices,
            observed,
            factors,
        }
    }

    /// Assemble and validate.
    pub fn checked(
        indices: Vec<IndexDef>,
        observed: Vec<IndexDef>,
        factors: Vec<FactorSpec<T>>,
    ) -> Result<Self> {
        let m = Self::new(indices, observed, factors);
        m.validate().map_err(Error::InvalidModel)?;
        Ok(m)
    }

    pub fn indices(&self) -> &[IndexDef] {
        &self.indices
    }

    pub fn observed(&self) -> &[IndexDef] {
        &self.observed
    }

    pub fn factors(&self) -> &[FactorSpec<T>] {
        &self.factors
    }

    pub fn factor(&self, alpha: usize) -> &FactorSpec<T> {
        &self.factors[alpha]
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Total number of latent configurations `∏_{v ∈ V} |v|`.
    pub fn configurations(&self) -> u128 {
        self.indices
            .iter()
            .fold(1u128, |a, i| a.saturating_mul(i.cardinality() as u128))
    }

    /// Every invariant violation, not only the first.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        if self.factors.is_empty() {
            v.push(Violation::NoFactors);
        }
        for (k, i) in self.indices.iter().enumerate() {
            if self.indices[..k].iter().any(|j| j.name() == i.name()) {
                v.push(Violation::DuplicateIndex(i.name().to_string()));
            }
        }
        let lookup = |name: &str| self.indices.iter().find(|i| i.name() == name);
        for (k, o) in self.observed.iter().enumerate() {
            if self.observed[..k].iter().any(|j| j.name() == o.name()) {
                v.push(Violation::DuplicateIndex(o.name().to_string()));
            }
            match lookup(o.name()) {
                None => v.push(Violation::UnknownObservedIndex(o.name().to_string())),
                Some(d) if d != o => v.push(Violation::CardinalityMismatch {
                    factor: "<observed>".into(),
                    index: o.name().to_string(),
                }),
                Some(_) => {}
            }
        }
        for (k, f) in self.factors.iter().enumerate() {
            if self.factors[..k].iter().any(|g| g.name == f.name) {
                v.push(Violation::DuplicateFactorName(f.name.clone()));
            }
            if f.indices.is_empty() {
                v.push(Violation::EmptyFactor(f.name.clone()));
            }
            for (n, i) in f.indices.iter().enumerate() {
                if f.indices[..n].iter().any(|j| j.name() == i.name()) {
                    v.push(Violation::DuplicateFactorIndex {
                        factor: f.name.clone(),
                        index: i.name().to_string(),
                    });
                }
                match lookup(i.name()) {
                    None => v.push(Violation::UnknownFactorIndex {
                        factor: f.name.clone(),
                        index: i.name().to_string(),
                    }),
                    Some(d) if d != i => v.push(Violation::CardinalityMismatch {
                        factor: f.name.clone(),
                        index: i.name().to_string(),
                    }),
                    Some(_) => {}
                }
            }
            if f.prior.shape.indices() != f.indices.as_slice() {
                v.push(Violation::PriorShape(f.name.clone()));
            }
            if let Some(fixed) = &f.fixed {
                if fixed.indices() != f.indices.as_slice() {
                    v.push(Violation::FixedShape(f.name.clone()));
                }
                if !fixed.is_nonneg() {
                    v.push(Violation::FixedNegative(f.name.clone()));
                }
            }
        }
        let in_factor = |name: &str| {
            self.factors
                .iter()
                .any(|f| f.indices.iter().any(|i| i.name() == name))
        };
        for i in &self.indices {
            let observed = self.observed.iter().any(|o| o.name() == i.name());
            if !observed && !in_factor(i.name()) {
                v.push(Violation::UnusedIndex(i.name().to_string()));
            }
        }
        for o in &self.observed {
            if !in_factor(o.name()) {
                v.push(Violation::ObservedNotInFactor(o.name().to_string()));
            }
        }
        if !self.factors.is_empty() && self.factors.iter().all(|f| f.is_clamped()) {
            v.push(Violation::AllClamped);
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }
}

fn observed3(dims: [usize; 3]) -> Result<Vec<IndexDef>> {
    ["i", "j", "k"]
        .iter()
        .zip(dims)
        .map(|(n, d)| IndexDef::new(*n, d))
        .collect()
}

/// CP model `X̂(i,j,k) = Σ_r Z1(i,r) Z2(j,r) Z3(k,r)`.
pub fn build_cp<T: Scalar>(dims: [usize; 3], rank: usize, priors: PriorDefaults<T>) -> Result<PltfModel<T>> {
    let obs = observed3(dims)?;
    let r = IndexDef::new("r", rank)?;
    let mut indices = obs.clone();
    indices.push(r.clone());
    let factors = obs
        .iter()
        .enumerate()
        .map(|(k, o)| FactorSpec::with_priors(format!("Z{}", k + 1), vec![o.clone(), r.clone()], priors))
        .collect::<Result<Vec<_>>>()?;
    PltfModel::checked(indices, obs, factors)
}

/// Tucker model `X̂(i,j,k) = Σ_{p,q,r} Z1(i,p) Z2(j,q) Z3(k,r) Z4(p,q,r)`.
pub fn build_tucker<T: Scalar>(
    dims: [usize; 3],
    core: [usize; 3],
    priors: PriorDefaults<T>,
) -> Result<PltfModel<T>> {
    let obs = observed3(dims)?;
    let latent: Vec<IndexDef> = ["p", "q", "r"]
        .iter()
        .zip(core)
        .map(|(n, d)| IndexDef::new(*n, d))
        .collect::<Result<_>>()?;
    let mut indices = obs.clone();
    indices.extend(latent.iter().cloned());
    let mut factors = obs
        .iter()
        .zip(&latent)
        .enumerate()
        .map(|(k, (o, l))| FactorSpec::with_priors(format!("Z{}", k + 1), vec![o.clone(), l.clone()], priors))
        .collect::<Result<Vec<_>>>()?;
    factors.push(FactorSpec::with_priors("Z4", latent, priors)?);
    PltfModel::checked(indices, obs, factors)
}

/// Observed tensor `X ≥ 0` and 0/1 mask `M` over `V₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation<T> {
    data: NamedTensor<T>,
    mask: NamedTensor<T>,
    masked_data: NamedTensor<T>,
    log_factorial_sum: T,
}

impl<T: Scalar> Observation<T> {
    pub fn new(data: NamedTensor<T>, mask: NamedTensor<T>) -> Result<Self> {
        if !data.same_shape(&mask) {
            return Err(Error::ShapeMismatch {
                expected: describe(data.indices()),
                found: describe(mask.indices()),
            });
        }
        if let Some(pos) = data.values().iter().position(|v| *v < T::zero()) {
            return Err(Error::InvalidObservation(format!(
                "negative data value at cell {:?}",
                data.unravel(pos)
            )));
        }
        if let Some(pos) = mask
            .values()
            .iter()
            .position(|v| *v != T::zero() && *v != T::one())
        {
            return Err(Error::InvalidObservation(format!(
                "mask value at cell {:?} is not 0 or 1",
                mask.unravel(pos)
            )));
        }
        let masked_data = hadamard(&mask, &data)?;
        let log_factorial_sum = masked_data
            .values()
            .iter()
            .zip(mask.values())
            .filter(|(_, m)| **m == T::one())
            .map(|(&x, _)| crate::special::ln_gamma(x + T::one()))
            .sum();
        Ok(Observation {
            data,
            mask,
            masked_data,
            log_factorial_sum,
        })
    }

    pub fn fully_observed(data: NamedTensor<T>) -> Result<Self> {
        let mask = NamedTensor::ones(data.indices().to_vec())?;
        Self::new(data, mask)
    }

    pub fn data(&self) -> &NamedTensor<T> {
        &self.data
    }

    pub fn mask(&self) -> &NamedTensor<T> {
        &self.mask
    }

    /// `M ∘ X`.
    pub fn masked_data(&self) -> &NamedTensor<T> {
        &self.masked_data
    }

    /// `Σ_{M=1} log Γ(X + 1)`.
    pub fn log_factorial_sum(&self) -> T {
        self.log_factorial_sum
    }

    pub fn indices(&self) -> &[IndexDef] {
        self.data.indices()
    }

    pub fn observed_count(&self) -> usize {
        self.mask.values().iter().filter(|m| **m == T::one()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ix(name: &str, n: usize) -> IndexDef {
        IndexDef::new(name, n).unwrap()
    }

    #[test]
    fn cp_structure() {
        let m = build_cp::<f64>([146, 168, 5], 3, PriorDefaults::default()).unwrap();
        let names: Vec<&str> = m.indices().iter().map(|i| i.name()).collect();
        assert_eq!(names, vec!["i", "j", "k", "r"]);
        assert_eq!(m.observed().iter().map(|i| i.cardinality()).collect::<Vec<_>>(), vec![146, 168, 5]);
        assert_eq!(m.factor(2).indices(), &[ix("k", 5), ix("r", 3)]);

        let m7 = build_cp::<f64>([50, 50, 50], 7, PriorDefaults::default()).unwrap();
        assert_eq!(m7.indices()[3], ix("r", 7));

        let tiny = build_cp::<f32>([1, 1, 1], 1, PriorDefaults::default()).unwrap();
        assert!(tiny.validate().is_ok());
        assert_eq!(tiny.configurations(), 1);

        assert!(matches!(
            build_cp::<f64>([0, 2, 2], 1, PriorDefaults::default()),
            Err(Error::ZeroCardinality(_))
        ));
        assert!(build_cp::<f64>([2, 2, 2], 0, PriorDefaults::default()).is_err());
    }

    #[test]
    fn default_priors() {
        let m = build_cp::<f64>([2, 3, 4], 2, PriorDefaults::default()).unwrap();
        for f in m.factors() {
            assert!(f.prior().shape().values().iter().all(|&a| a == 0.5));
            assert!(f.prior().mean().values().iter().all(|&b| b == 10.0));
            assert!(f.prior().rate().values().iter().all(|&r| r == 0.05));
        }
    }

    #[test]
    fn tucker_structure() {
        let m = build_tucker::<f64>([3, 3, 3], [2, 2, 2], PriorDefaults::default()).unwrap();
        let names: Vec<&str> = m.indices().iter().map(|i| i.name()).collect();
        assert_eq!(names, vec!["i", "j", "k", "p", "q", "r"]);
        assert_eq!(m.num_factors(), 4);
        assert_eq!(m.factor(3).indices(), &[ix("p", 2), ix("q", 2), ix("r", 2)]);
        assert_eq!(m.factor(0).indices(), &[ix("i", 3), ix("p", 2)]);
    }

    #[test]
    fn unknown_index_violation() {
        let i = ix("i", 2);
        let f = FactorSpec::with_priors("Z1", vec![i.clone(), ix("zz", 2)], PriorDefaults::<f64>::default()).unwrap();
        let m = PltfModel::new(vec![i.clone()], vec![i], vec![f]);
        let v = m.validate().unwrap_err();
        assert!(v.contains(&Violation::UnknownFactorIndex {
            factor: "Z1".into(),
            index: "zz".into()
        }));
    }

    #[test]
    fn all_clamped_violation() {
        let i = ix("i", 2);
        let f = FactorSpec::with_priors("Z1", vec![i.clone()], PriorDefaults::<f64>::default())
            .unwrap()
            .clamped(NamedTensor::ones(vec![i.clone()]).unwrap());
        let m = PltfModel::new(vec![i.clone()], vec![i], vec![f]);
        assert_eq!(m.validate().unwrap_err(), vec![Violation::AllClamped]);
    }

    #[test]
    fn reports_every_violation() {
        let (i, j, r) = (ix("i", 2), ix("j", 2), ix("r", 2));
        let f = FactorSpec::with_priors("Z1", vec![r.clone(), r.clone()], PriorDefaults::<f64>::default());
        // Duplicate index in the prior tensor is itself an error, so build it unchecked.
        assert!(f.is_err());
        let f = FactorSpec::new(
            "Z1",
            vec![r.clone(), ix("r", 3)],
            GammaPrior::broadcast(&[r.clone()], 1.0, 1.0).unwrap(),
        );
        let m = PltfModel::new(vec![i.clone(), j.clone(), r], vec![i], vec![f]);
        let v = m.validate().unwrap_err();
        assert!(v.iter().any(|x| matches!(x, Violation::DuplicateFactorIndex { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::CardinalityMismatch { .. })));
        assert!(v.contains(&Violation::UnusedIndex("j".into())));
        assert!(v.contains(&Violation::ObservedNotInFactor("i".into())));
        assert!(v.contains(&Violation::PriorShape("Z1".into())));
        assert!(v.len() >= 5);
    }

    #[test]
    fn prior_validation() {
        let i = vec![ix("i", 2)];
        assert!(GammaPrior::<f64>::broadcast(&i, 0.0, 1.0).is_err());
        assert!(GammaPrior::<f64>::broadcast(&i, 1.0, -1.0).is_err());
    }

    #[test]
    fn observation_checks() {
        let i = vec![ix("i", 3)];
        let x = NamedTensor::from_vec(i.clone(), vec![0.0, 2.0, 1.5]).unwrap();
        let m = NamedTensor::from_vec(i.clone(), vec![1.0, 0.0, 1.0]).unwrap();
        let obs = Observation::new(x.clone(), m).unwrap();
        assert_eq!(obs.masked_data().values(), &[0.0, 0.0, 1.5]);
        assert_eq!(obs.observed_count(), 2);
        let expected = crate::special::ln_gamma(2.5f64);
        assert!((obs.log_factorial_sum() - expected).abs() < 1e-14);

        let bad_mask = NamedTensor::from_vec(i.clone(), vec![1.0, 0.5, 1.0]).unwrap();
        assert!(Observation::new(x.clone(), bad_mask).is_err());
        let neg = NamedTensor::from_vec(i.clone(), vec![-1.0, 0.0, 0.0]).unwrap();
        assert!(Observation::fully_observed(neg).is_err());
    }
}
