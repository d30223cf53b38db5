//! Indexing of the sixteen outcomes `(S1, S2, S3, S4)` and of the fifteen
//! moments built from them.
//!
//! Outcome `o` is a 4-bit number whose bit `i − 1` is set when `S_i = −1`.
//! A moment is named by the subset of variables it multiplies, stored the
//! same way. The product `∏_{i∈subset} S_i` for outcome `o` is then
//! `(−1)^popcount(o & subset)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::SpinValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subset(u8);

impl Subset {
    /// Build from 1-based variable indices, e.g. `&[1, 3]` for `S1·S3`.
    ///
    /// # Panics
    /// If any index is outside `1..=4` or the list is empty.
    pub fn of(indices: &[usize]) -> Subset {
        assert!(!indices.is_empty(), "empty moment subset");
        let mut bits = 0u8;
        for &i in indices {
            assert!((1..=4).contains(&i), "variable index {i} out of range");
            bits |= 1 << (i - 1);
        }
        Subset(bits)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn order(self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=4).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    /// Whether the subset only touches `S1` and `S2`.
    pub fn is_first_stage(self) -> bool {
        self.0 & 0b1100 == 0
    }

    /// `∏_{i∈self} S_i` for outcome `o`.
    pub fn sign(self, outcome: usize) -> i64 {
        if (outcome as u8 & self.0).count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// `"1"`, `"12"`, `"1234"`, ...
    pub fn label(self) -> String {
        (1..=4).filter(|&i| self.contains(i)).map(|i| char::from(b'0' + i as u8)).collect()
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// All fifteen moments, by order then lexicographically.
pub const SUBSETS: [Subset; 15] = [
    Subset(0b0001),
    Subset(0b0010),
    Subset(0b0100),
    Subset(0b1000),
    Subset(0b0011),
    Subset(0b0101),
    Subset(0b1001),
    Subset(0b0110),
    Subset(0b1010),
    Subset(0b1100),
    Subset(0b0111),
    Subset(0b1011),
    Subset(0b1101),
    Subset(0b1110),
    Subset(0b1111),
];

/// The six pair correlations `12, 13, 14, 23, 24, 34`.
pub const PAIRS: [Subset; 6] = [
    Subset(0b0011),
    Subset(0b0101),
    Subset(0b1001),
    Subset(0b0110),
    Subset(0b1010),
    Subset(0b1100),
];

/// Outcome index of `(S1, S2, S3, S4)`.
pub fn outcome_index(s: [SpinValue; 4]) -> usize {
    s.iter()
        .enumerate()
        .map(|(i, v)| if v.is_plus() { 0 } else { 1 << i })
        .sum()
}

/// Inverse of [`outcome_index`].
pub fn outcome_values(outcome: usize) -> [SpinValue; 4] {
    std::array::from_fn(|i| SpinValue::from_sign(outcome & (1 << i) == 0))
}

/// A value for each of the fifteen moments.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentTable([f64; 16]);

impl MomentTable {
    pub fn get(&self, s: Subset) -> f64 {
        self.0[s.index()]
    }

    pub fn set(&mut self, s: Subset, value: f64) {
        self.0[s.index()] = value;
    }

    pub fn from_fn(mut f: impl FnMut(Subset) -> f64) -> Self {
        let mut t = MomentTable::default();
        for s in SUBSETS {
            t.set(s, f(s));
        }
        t
    }

    pub fn iter(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        SUBSETS.iter().map(move |&s| (s, self.get(s)))
    }

    /// Largest absolute difference over all fifteen moments.
    pub fn max_abs_diff(&self, other: &MomentTable) -> f64 {
        SUBSETS
            .iter()
            .map(|&s| (self.get(s) - other.get(s)).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_distinct_and_ordered() {
        let mut bits: Vec<u8> = SUBSETS.iter().map(|s| s.bits()).collect();
        for w in SUBSETS.windows(2) {
            assert!(w[0].order() <= w[1].order());
        }
        bits.sort();
        bits.dedup();
        assert_eq!(bits.len(), 15);
        let labels: Vec<String> = SUBSETS.iter().map(|s| s.label()).collect();
        assert_eq!(
            labels,
            ["1", "2", "3", "4", "12", "13", "14", "23", "24", "34", "123", "124", "134", "234", "1234"]
        );
    }

    #[test]
    fn sign_is_product_of_values() {
        for o in 0..16 {
            let v = outcome_values(o);
            assert_eq!(outcome_index(v), o);
            for s in SUBSETS {
                let prod: i64 = (1..=4)
                    .filter(|&i| s.contains(i))
                    .map(|i| i64::from(v[i - 1].value()))
                    .product();
                assert_eq!(s.sign(o), prod);
            }
        }
    }

    #[test]
    fn first_stage_subsets() {
        assert!(Subset::of(&[1, 2]).is_first_stage());
        assert!(!Subset::of(&[1, 3]).is_first_stage());
    }
}
