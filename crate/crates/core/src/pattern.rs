use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Membership pattern of a point of `{0,1}^n` over a fixed label list.
///
/// Bit `i` records whether label `i` belongs to the set the pattern encodes.
/// Patterns print as 0/1 strings with label 0 leftmost, and order
/// lexicographically on that string.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pattern {
    bits: u64,
    len: u8,
}

impl Pattern {
    pub const MAX_LEN: usize = 64;

    /// Builds a pattern over `len` labels from its bit representation.
    pub fn from_bits(bits: u64, len: usize) -> Result<Self> {
        if len == 0 || len > Self::MAX_LEN {
            return Err(Error::validation(format!(
                "pattern length {len} out of range 1..={}",
                Self::MAX_LEN
            )));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::validation(format!(
                "pattern bits {bits:#x} exceed length {len}"
            )));
        }
        Ok(Pattern { bits, len: len as u8 })
    }

    pub fn from_memberships(memberships: &[bool]) -> Result<Self> {
        let mut bits = 0u64;
        for (i, &m) in memberships.iter().enumerate() {
            if m {
                bits |= 1u64 << i;
            }
        }
        Self::from_bits(bits, memberships.len())
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether label `i` is in the set.
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        self.bits >> i & 1 == 1
    }

    /// Whether the pattern assigns labels `i` and `j` to different sides.
    pub fn separates(&self, i: usize, j: usize) -> bool {
        self.contains(i) != self.contains(j)
    }

    /// All-zero and all-one patterns encode the empty set and the full label
    /// set; both are null sets for the grounded measures built here.
    pub fn is_constant(&self) -> bool {
        self.bits == 0 || self.bits == self.full_mask()
    }

    pub fn complement(&self) -> Self {
        Pattern { bits: self.bits ^ self.full_mask(), len: self.len }
    }

    /// The lexicographically smaller of the pattern and its complement; cut
    /// pseudometrics do not distinguish the two.
    pub fn canonical(&self) -> Self {
        if self.contains(0) {
            self.complement()
        } else {
            *self
        }
    }

    fn full_mask(&self) -> u64 {
        if self.len == 64 {
            u64::MAX
        } else {
            (1u64 << self.len) - 1
        }
    }

    /// Enumerates the canonical nonconstant patterns on `n` labels: one
    /// representative per proper cut, the one not containing label 0.
    pub fn cuts(n: usize) -> Result<impl Iterator<Item = Pattern>> {
        if n == 0 || n > Self::MAX_LEN {
            return Err(Error::validation(format!(
                "cut enumeration needs 1..={} labels, got {n}",
                Self::MAX_LEN
            )));
        }
        let count: u64 = if n == 1 { 0 } else { (1u64 << (n - 1)) - 1 };
        let len = n as u8;
        Ok((1..=count).map(move |mask| Pattern { bits: mask << 1, len }))
    }

    fn string_key(&self) -> u64 {
        // Reversing makes label 0 the most significant comparison position,
        // matching lexicographic order on the printed string.
        self.bits.reverse_bits() >> (64 - self.len as u32)
    }
}

impl Ord for Pattern {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.string_key().cmp(&other.string_key()))
    }
}

impl PartialOrd for Pattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.contains(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern({self})")
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut memberships = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => memberships.push(false),
                '1' => memberships.push(true),
                other => {
                    return Err(Error::validation(format!(
                        "pattern strings use only 0 and 1, found {other:?}"
                    )))
                }
            }
        }
        Self::from_memberships(&memberships)
    }
}

impl Serialize for Pattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}
