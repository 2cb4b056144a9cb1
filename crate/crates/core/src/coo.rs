//! Coordinate-list text format for tensors.
//!
//! ```text
//! # comment
//! dims 3 4 2
//! 0 1 1 2.5
//! 2 3 0 1
//! ```
//!
//! Indices are 0-based and whitespace-separated; cells not listed are zero
//! when materialized densely.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{IndexDef, NamedTensor};

const DEFAULT_NAMES: [&str; 6] = ["i", "j", "k", "l", "m", "n"];

/// Default names for `n` observed axes: `i, j, k, l, m, n`, then `i6, i7, ...`.
pub fn observed_index_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|k| match DEFAULT_NAMES.get(k) {
            Some(s) => s.to_string(),
            None => format!("i{k}"),
        })
        .collect()
}

/// Sparse list of `(multi-index, value)` entries over named axes.
#[derive(Clone, Debug, PartialEq)]
pub struct CooTable<T> {
    indices: Vec<IndexDef>,
    entries: Vec<(Vec<usize>, T)>,
}

impl<T: Scalar> CooTable<T> {
    pub fn new(indices: Vec<IndexDef>, entries: Vec<(Vec<usize>, T)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for (tuple, value) in &entries {
            check_tuple(&indices, tuple)?;
            if !value.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite value at {tuple:?}")));
            }
            if !seen.insert(tuple.clone()) {
                return Err(Error::InvalidArgument(format!("duplicate entry {tuple:?}")));
            }
        }
        Ok(CooTable { indices, entries })
    }

    pub fn indices(&self) -> &[IndexDef] {
        &self.indices
    }

    pub fn entries(&self) -> &[(Vec<usize>, T)] {
        &self.entries
    }

    pub fn dims(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i.cardinality()).collect()
    }

    /// Rename the axes, keeping cardinalities.
    pub fn with_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        if names.len() != self.indices.len() {
            return Err(Error::InvalidArgument(format!(
                "{} names given for {} axes",
                names.len(),
                self.indices.len()
            )));
        }
        self.indices = names
            .iter()
            .zip(&self.indices)
            .map(|(n, i)| IndexDef::new(n.as_ref(), i.cardinality()))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    /// Entries of a dense tensor; zeros are skipped when `skip_zeros` is set.
    pub fn from_dense(t: &NamedTensor<T>, skip_zeros: bool) -> Self {
        let entries = t
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| !(skip_zeros && **v == T::zero()))
            .map(|(off, &v)| (t.unravel(off), v))
            .collect();
        CooTable {
            indices: t.indices().to_vec(),
            entries,
        }
    }

    pub fn to_dense(&self) -> Result<NamedTensor<T>> {
        let mut values = vec![T::zero(); self.dims().iter().product()];
        for (tuple, v) in &self.entries {
            values[offset_of(&self.indices, tuple)] = *v;
        }
        NamedTensor::from_vec(self.indices.clone(), values)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut indices: Option<Vec<IndexDef>> = None;
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let Some(dims) = indices.as_ref() else {
                if tokens.next() != Some("dims") {
                    return Err(err("expected `dims <n1> ... <nk>` header".into()));
                }
                let dims: Vec<usize> = tokens
                    .map(|t| t.parse::<usize>().map_err(|e| err(format!("bad dimension `{t}`: {e}"))))
                    .collect::<Result<_>>()?;
                if dims.is_empty() {
                    return Err(err("`dims` needs at least one dimension".into()));
                }
                let names = observed_index_names(dims.len());
                indices = Some(
                    names
                        .iter()
                        .zip(&dims)
                        .map(|(n, &d)| IndexDef::new(n.as_str(), d).map_err(|e| err(e.to_string())))
                        .collect::<Result<_>>()?,
                );
                continue;
            };
            let fields: Vec<&str> = tokens.collect();
            if fields.len() != dims.len() + 1 {
                return Err(err(format!(
                    "expected {} indices and a value, found {} fields",
                    dims.len(),
                    fields.len()
                )));
            }
            let tuple: Vec<usize> = fields[..dims.len()]
                .iter()
                .map(|t| t.parse::<usize>().map_err(|e| err(format!("bad index `{t}`: {e}"))))
                .collect::<Result<_>>()?;
            check_tuple(dims, &tuple).map_err(|e| err(e.to_string()))?;
            let raw_value = fields[dims.len()];
            let value: f64 = raw_value
                .parse()
                .map_err(|e| err(format!("bad value `{raw_value}`: {e}")))?;
            if !value.is_finite() {
                return Err(err(format!("non-finite value `{raw_value}`")));
            }
            if !seen.insert(tuple.clone()) {
                return Err(err(format!("duplicate entry {tuple:?}")));
            }
            entries.push((tuple, T::of(value)));
        }
        let indices = indices.ok_or(Error::Parse {
            line: 0,
            msg: "missing `dims` header".into(),
        })?;
        Ok(CooTable { indices, entries })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "dims")?;
        for d in self.dims() {
            write!(w, " {d}")?;
        }
        writeln!(w)?;
        for (tuple, v) in &self.entries {
            for i in tuple {
                write!(w, "{i} ")?;
            }
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("COO text is ASCII")
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{}: {msg}", path.display()),
            },
            other => other,
        })
    }

    pub fn write_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

fn check_tuple(indices: &[IndexDef], tuple: &[usize]) -> Result<()> {
    if tuple.len() != indices.len() {
        return Err(Error::InvalidArgument(format!(
            "tuple {tuple:?} has {} components, expected {}",
            tuple.len(),
            indices.len()
        )));
    }
    for (&i, d) in tuple.iter().zip(indices) {
        if i >= d.cardinality() {
            return Err(Error::InvalidArgument(format!(
                "index {i} out of range for axis {d}"
            )));
        }
    }
    Ok(())
}

fn offset_of(indices: &[IndexDef], tuple: &[usize]) -> usize {
    tuple
        .iter()
        .zip(indices)
        .fold(0, |acc, (&i, d)| acc * d.cardinality() + i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_basic() {
        let text = "# header comment\ndims 2 3\n0 1 2.5 # trailing\n\n1 2 4\n";
        let t = CooTable::<f64>::parse(text).unwrap();
        assert_eq!(t.dims(), vec![2, 3]);
        let d = t.to_dense().unwrap();
        assert_eq!(d.index_names(), vec!["i", "j"]);
        assert_eq!(d.values(), &[0.0, 2.5, 0.0, 0.0, 0.0, 4.0]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("0 1 2\n", 1),
            ("dims 2 2\n0 2 1\n", 2),
            ("dims 2 2\n0 1 1\n0 1 3\n", 3),
            ("dims 2 2\n0 1\n", 2),
            ("dims 2 2\n0 1 x\n", 2),
            ("dims 2 0\n", 1),
        ];
        for (text, line) in cases {
            match CooTable::<f64>::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(CooTable::<f64>::parse("# nothing\n").is_err());
    }

    #[test]
    fn new_rejects_duplicates_and_out_of_range() {
        let ix = vec![IndexDef::new("i", 2).unwrap()];
        assert!(CooTable::new(ix.clone(), vec![(vec![0], 1.0), (vec![0], 2.0)]).is_err());
        assert!(CooTable::new(ix, vec![(vec![2], 1.0f64)]).is_err());
    }

    #[test]
    fn write_single_cell() {
        let ix = vec![
            IndexDef::new("i", 1).unwrap(),
            IndexDef::new("j", 1).unwrap(),
            IndexDef::new("k", 1).unwrap(),
        ];
        let t = NamedTensor::from_vec(ix, vec![0.25f64]).unwrap();
        let text = CooTable::from_dense(&t, true).to_text();
        assert_eq!(text, "dims 1 1 1\n0 0 0 0.25\n");
    }

    proptest! {
        #[test]
        fn dense_text_round_trip(dims in proptest::collection::vec(1usize..4, 1..4), seed in 0u64..1000) {
            let names = observed_index_names(dims.len());
            let ix: Vec<IndexDef> = names.iter().zip(&dims).map(|(n, &d)| IndexDef::new(n.as_str(), d).unwrap()).collect();
            let t = NamedTensor::from_fn(ix, |x| {
                let h = x.iter().fold(seed, |a, &b| a.wrapping_mul(31).wrapping_add(b as u64));
                if h % 3 == 0 { 0.0 } else { (h % 97) as f64 / 7.0 }
            }).unwrap();
            let back = CooTable::<f64>::parse(&CooTable::from_dense(&t, true).to_text()).unwrap().to_dense().unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
