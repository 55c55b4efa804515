use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A set of 1-based basis indices inside `1..=ambient_size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawIndexSet")]
pub struct IndexSet {
    ambient_size: usize,
    members: Vec<usize>,
}

#[derive(Deserialize)]
struct RawIndexSet {
    ambient_size: usize,
    members: Vec<usize>,
}

impl TryFrom<RawIndexSet> for IndexSet {
    type Error = Error;

    fn try_from(raw: RawIndexSet) -> Result<Self> {
        IndexSet::new(raw.ambient_size, raw.members)
    }
}

impl IndexSet {
    pub fn new(ambient_size: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&k| k == 0 || k > ambient_size) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                ambient: ambient_size,
            });
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self {
            ambient_size,
            members,
        })
    }

    pub fn empty(ambient_size: usize) -> Self {
        Self {
            ambient_size,
            members: Vec::new(),
        }
    }

    pub fn full(ambient_size: usize) -> Self {
        Self {
            ambient_size,
            members: (1..=ambient_size).collect(),
        }
    }

    /// Builds the set from a 0-based membership mask of length `ambient_size`.
    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            ambient_size: mask.len(),
            members: mask
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| i + 1)
                .collect(),
        }
    }

    /// Builds the set from the low `ambient_size` bits of `bits` (bit i ↦ index i+1).
    pub fn from_bits(ambient_size: usize, bits: u64) -> Self {
        Self {
            ambient_size,
            members: (0..ambient_size)
                .filter(|i| bits >> i & 1 == 1)
                .map(|i| i + 1)
                .collect(),
        }
    }

    pub fn ambient_size(&self) -> usize {
        self.ambient_size
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.ambient_size];
        for &k in &self.members {
            mask[k - 1] = true;
        }
        mask
    }

    pub fn complement(&self) -> Self {
        let mask = self.mask();
        Self::from_mask(&mask.iter().map(|m| !m).collect::<Vec<_>>())
    }

    pub fn union(&self, other: &Self) -> Self {
        let ambient_size = self.ambient_size.max(other.ambient_size);
        let mut members = self.members.clone();
        members.extend_from_slice(&other.members);
        members.sort_unstable();
        members.dedup();
        Self {
            ambient_size,
            members,
        }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.members.iter().all(|&k| !other.contains(k))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.iter().all(|&k| other.contains(k))
    }

    /// Re-embeds the set in a different ambient size.
    pub fn with_ambient(&self, ambient_size: usize) -> Result<Self> {
        Self::new(ambient_size, self.members.iter().copied())
    }
}

/// Coefficients over an orthonormal system together with their declared support.
///
/// Entries are stored densely (index `k` lives at `entries[k - 1]`); Walsh-side
/// vectors simply carry zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    entries: Vec<Complex64>,
    support: IndexSet,
}

impl CoefficientVector {
    /// `values[i]` is the coefficient of `support.members()[i]`.
    pub fn new(support: IndexSet, values: &[Complex64]) -> Result<Self> {
        if values.len() != support.len() {
            return Err(Error::invalid(format!(
                "{} values for a support of size {}",
                values.len(),
                support.len()
            )));
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); support.ambient_size()];
        for (&k, &v) in support.members().iter().zip(values) {
            entries[k - 1] = v;
        }
        Ok(Self { entries, support })
    }

    pub fn real(support: IndexSet, values: &[f64]) -> Result<Self> {
        let values: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::new(support, &values)
    }

    /// Support is taken to be the nonzero entries.
    pub fn from_dense(entries: Vec<Complex64>) -> Self {
        let support = IndexSet::from_mask(
            &entries
                .iter()
                .map(|v| *v != Complex64::new(0.0, 0.0))
                .collect::<Vec<_>>(),
        );
        Self { entries, support }
    }

    pub fn from_dense_real(entries: &[f64]) -> Self {
        Self::from_dense(entries.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(support: IndexSet) -> Self {
        Self {
            entries: vec![Complex64::new(0.0, 0.0); support.ambient_size()],
            support,
        }
    }

    pub fn ambient_size(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Complex64 {
        self.entries[index - 1]
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|v| v.im == 0.0)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.entries.iter().map(|v| v.re).collect()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|v| v.norm_sqr() == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|v| v * factor).collect(),
            support: self.support.clone(),
        }
    }

    /// Unit-norm copy; fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.l2_norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(1.0 / norm))
    }

    /// Keeps only the entries inside `set`.
    pub fn restricted(&self, set: &IndexSet) -> Self {
        let members: Vec<usize> = self.support.iter().filter(|&k| set.contains(k)).collect();
        let support = IndexSet {
            ambient_size: self.ambient_size(),
            members,
        };
        let mut entries = vec![Complex64::new(0.0, 0.0); self.ambient_size()];
        for k in support.iter() {
            entries[k - 1] = self.entries[k - 1];
        }
        Self { entries, support }
    }

    /// Entry-wise sum; the support is the union of both supports.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.ambient_size() != other.ambient_size() {
            return Err(Error::invalid("ambient sizes differ"));
        }
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
            support: self.support.union(&other.support),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RawCoefficients {
    ambient_size: usize,
    support: Vec<usize>,
    entries: Vec<[f64; 2]>,
}

impl Serialize for CoefficientVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawCoefficients {
            ambient_size: self.ambient_size(),
            support: self.support.members().to_vec(),
            entries: self
                .support
                .iter()
                .map(|k| {
                    let v = self.entries[k - 1];
                    [v.re, v.im]
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoefficientVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawCoefficients::deserialize(deserializer)?;
        let support =
            IndexSet::new(raw.ambient_size, raw.support).map_err(serde::de::Error::custom)?;
        let values: Vec<Complex64> = raw
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        CoefficientVector::new(support, &values).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_set_rejects_out_of_range() {
        assert_eq!(
            IndexSet::new(4, [1, 5]),
            Err(Error::IndexOutOfRange {
                index: 5,
                ambient: 4
            })
        );
        assert!(IndexSet::new(4, [0]).is_err());
    }

    #[test]
    fn index_set_sorts_and_dedups() {
        let s = IndexSet::new(8, [5, 1, 5, 3]).unwrap();
        assert_eq!(s.members(), &[1, 3, 5]);
        assert_eq!(s.complement().members(), &[2, 4, 6, 7, 8]);
        assert_eq!(IndexSet::from_bits(4, 0b1010).members(), &[2, 4]);
    }

    #[test]
    fn coefficient_json_uses_pairs() {
        let support = IndexSet::new(4, [2, 3]).unwrap();
        let a = CoefficientVector::new(
            support,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.5, -2.0)],
        )
        .unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(
            json,
            r#"{"ambient_size":4,"support":[2,3],"entries":[[1.0,0.0],[0.5,-2.0]]}"#
        );
        let back: CoefficientVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn restriction_drops_outside_entries() {
        let a = CoefficientVector::from_dense_real(&[1.0, 2.0, 3.0, 4.0]);
        let k = IndexSet::new(4, [2, 4]).unwrap();
        let r = a.restricted(&k);
        assert_eq!(r.real_parts(), vec![0.0, 2.0, 0.0, 4.0]);
        assert_eq!(r.support().members(), &[2, 4]);
    }
}
