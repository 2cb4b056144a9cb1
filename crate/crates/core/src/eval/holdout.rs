use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Observation;
use crate::scalar::Scalar;
use crate::tensor::{describe, volume, IndexDef, NamedTensor};

/// A training mask and the held-out cells it hides.
#[derive(Clone, Debug, PartialEq)]
pub struct HoldoutSplit<T> {
    /// 1 on training cells, 0 on test cells.
    pub train_mask: NamedTensor<T>,
    /// Row-major offsets of the held-out cells, ascending.
    pub test_cells: Vec<usize>,
}

impl<T: Scalar> HoldoutSplit<T> {
    pub fn test_tuples(&self) -> Vec<Vec<usize>> {
        self.test_cells.iter().map(|&k| self.train_mask.unravel(k)).collect()
    }

    /// Pair `data` with the training mask.
    pub fn observe(&self, data: &NamedTensor<T>) -> Result<Observation<T>> {
        if !data.same_shape(&self.train_mask) {
            return Err(Error::ShapeMismatch {
                expected: describe(self.train_mask.indices()),
                found: describe(data.indices()),
            });
        }
        Observation::new(data.clone(), self.train_mask.clone())
    }
}

/// Hide `round(fraction · ∏dims)` cells chosen uniformly without replacement.
pub fn make_holdout<T: Scalar>(indices: &[IndexDef], fraction: f64, seed: u64) -> Result<HoldoutSplit<T>> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "missing fraction must lie in [0, 1), got {fraction}"
        )));
    }
    let n = volume(indices);
    let k = (fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_cells = sample(&mut rng, n, k).into_vec();
    test_cells.sort_unstable();
    let mut mask = vec![T::one(); n];
    for &c in &test_cells {
        mask[c] = T::zero();
    }
    Ok(HoldoutSplit {
        train_mask: NamedTensor::nonneg(indices.to_vec(), mask)?,
        test_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(d: &[usize]) -> Vec<IndexDef> {
        d.iter()
            .enumerate()
            .map(|(k, &c)| IndexDef::new(format!("x{k}"), c).unwrap())
            .collect()
    }

    #[test]
    fn counts_and_disjointness() {
        let idx = dims(&[10, 7, 3]);
        for f in [0.0, 0.1, 0.4, 0.6, 0.8, 0.999] {
            let s: HoldoutSplit<f64> = make_holdout(&idx, f, 3).unwrap();
            assert_eq!(s.test_cells.len(), (f * 210.0).round() as usize);
            for &c in &s.test_cells {
                assert_eq!(s.train_mask.values()[c], 0.0);
            }
            let train = s.train_mask.values().iter().filter(|&&m| m == 1.0).count();
            assert_eq!(train + s.test_cells.len(), 210);
        }
    }

    #[test]
    fn zero_fraction_is_fully_observed() {
        let s: HoldoutSplit<f64> = make_holdout(&dims(&[4, 4]), 0.0, 1).unwrap();
        assert!(s.test_cells.is_empty());
        assert!(s.train_mask.values().iter().all(|&m| m == 1.0));
    }

    #[test]
    fn seeded() {
        let idx = dims(&[20, 20]);
        let a: HoldoutSplit<f64> = make_holdout(&idx, 0.6, 11).unwrap();
        let b: HoldoutSplit<f64> = make_holdout(&idx, 0.6, 11).unwrap();
        let c: HoldoutSplit<f64> = make_holdout(&idx, 0.6, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.test_cells, c.test_cells);
    }

    #[test]
    fn rejects_bad_fraction() {
        let idx = dims(&[3]);
        for f in [1.0, 1.5, -0.1, f64::NAN] {
            assert!(make_holdout::<f64>(&idx, f, 0).is_err());
        }
    }
}
