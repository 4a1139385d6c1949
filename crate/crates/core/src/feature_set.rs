use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest feature count representable by a [`FeatureSet`].
pub const MAX_FEATURES: usize = 63;

/// A subset of the features `{0, .., m-1}`, stored as a bitmask.
///
/// Indices are zero-based in the API. `Display` and serde use the one-based
/// numbering of the feature space (`{1,2}`), which is also what the CLI prints.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FeatureSet(u64);

impl FeatureSet {
    pub const EMPTY: FeatureSet = FeatureSet(0);

    pub fn from_bits(bits: u64) -> Self {
        FeatureSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// All features of an `m`-feature space.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_FEATURES, "at most {MAX_FEATURES} features");
        FeatureSet((1u64 << m) - 1)
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_FEATURES);
        FeatureSet(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_FEATURES && self.0 >> i & 1 == 1
    }

    #[must_use]
    pub fn with(self, i: usize) -> Self {
        assert!(i < MAX_FEATURES);
        FeatureSet(self.0 | 1 << i)
    }

    #[must_use]
    pub fn without(self, i: usize) -> Self {
        if i >= MAX_FEATURES {
            return self;
        }
        FeatureSet(self.0 & !(1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: FeatureSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: FeatureSet) -> bool {
        self.0 & other.0 != 0
    }

    #[must_use]
    pub fn union(self, other: FeatureSet) -> Self {
        FeatureSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: FeatureSet) -> Self {
        FeatureSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: FeatureSet) -> Self {
        FeatureSet(self.0 & !other.0)
    }

    /// `F \ self` for an `m`-feature space.
    #[must_use]
    pub fn complement(self, m: usize) -> Self {
        FeatureSet::full(m).difference(self)
    }

    /// Highest member plus one, i.e. the smallest `m` with `self ⊆ {0..m-1}`.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    /// Every subset of `self`, starting with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = FeatureSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(FeatureSet(cur))
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Deterministic output order: increasing cardinality, then lexicographic
    /// on the sorted member lists.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.to_vec().cmp(&other.to_vec()))
    }
}

pub fn sort_canonical(sets: &mut [FeatureSet]) {
    sets.sort_by(FeatureSet::canonical_cmp);
}

impl FromIterator<usize> for FeatureSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(FeatureSet::EMPTY, FeatureSet::with)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for FeatureSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let one_based: Vec<usize> = self.iter().map(|i| i + 1).collect();
        one_based.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FeatureSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let one_based = Vec::<usize>::deserialize(deserializer)?;
        let mut set = FeatureSet::EMPTY;
        for i in one_based {
            if i == 0 || i > MAX_FEATURES {
                return Err(serde::de::Error::custom(format!(
                    "feature index {i} out of range 1..={MAX_FEATURES}"
                )));
            }
            set = set.with(i - 1);
        }
        Ok(set)
    }
}
