//! Atomic measures on the space of membership patterns.
//!
//! For a finite label set the universal pattern space is `{0,1}^n` minus the
//! two constant patterns; a measure there is a weight per pattern. A point
//! `x` corresponds to the set of patterns containing it, and the kernel of a
//! representation assigns each pair the mass of the symmetric difference of
//! those sets.
//!
//! Weights are `f64` by default; every operation is also available over
//! exact rationals for bit-for-bit verification.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::pattern::Pattern;

/// Measure mass: nonnegative, finite, addable. Implemented for `f64` and
/// for exact `BigRational`.
pub trait Weight: Clone + PartialOrd + Zero {
    fn is_valid_mass(&self) -> bool;
    fn to_f64_mass(&self) -> f64;
}

impl Weight for f64 {
    fn is_valid_mass(&self) -> bool {
        self.is_finite() && *self >= 0.0
    }

    fn to_f64_mass(&self) -> f64 {
        *self
    }
}

impl Weight for BigRational {
    fn is_valid_mass(&self) -> bool {
        !self.is_negative_mass()
    }

    fn to_f64_mass(&self) -> f64 {
        self.to_f64().unwrap_or(f64::INFINITY)
    }
}

trait RationalExt {
    fn is_negative_mass(&self) -> bool;
}

impl RationalExt for BigRational {
    fn is_negative_mass(&self) -> bool {
        *self < BigRational::zero()
    }
}

fn validate_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() || labels.len() > Pattern::MAX_LEN {
        return Err(Error::validation(format!(
            "representations support 1..={} labels, got {}",
            Pattern::MAX_LEN,
            labels.len()
        )));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::validation(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

fn label_index(labels: &[String], label: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::validation(format!("unknown label {label:?}")))
}

/// A measure on nonconstant membership patterns: one weight per atom.
///
/// The kernel of the representation is `K(x, y) = sum of weights of atoms
/// whose pattern separates x and y`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicRepresentation<W = f64> {
    labels: Vec<String>,
    atoms: BTreeMap<Pattern, W>,
}

impl<W: Weight> AtomicRepresentation<W> {
    pub fn new(
        labels: Vec<String>,
        atoms: impl IntoIterator<Item = (Pattern, W)>,
    ) -> Result<Self> {
        validate_labels(&labels)?;
        let n = labels.len();
        let mut map = BTreeMap::new();
        for (pattern, weight) in atoms {
            if pattern.len() != n {
                return Err(Error::validation(format!(
                    "pattern {pattern} has length {} but there are {n} labels",
                    pattern.len()
                )));
            }
            if pattern.is_constant() {
                return Err(Error::validation(format!(
                    "pattern {pattern} is constant; the pattern space excludes the empty and full sets"
                )));
            }
            if !weight.is_valid_mass() {
                return Err(Error::validation(format!(
                    "atom {pattern} has an invalid weight; weights must be finite and nonnegative"
                )));
            }
            if map.insert(pattern, weight).is_some() {
                return Err(Error::validation(format!("duplicate atom pattern {pattern}")));
            }
        }
        Ok(AtomicRepresentation { labels, atoms: map })
    }

    pub fn empty(labels: Vec<String>) -> Result<Self> {
        Self::new(labels, std::iter::empty())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn atoms(&self) -> &BTreeMap<Pattern, W> {
        &self.atoms
    }

    pub fn total_mass(&self) -> W {
        let mut total = W::zero();
        for w in self.atoms.values() {
            total = total + w.clone();
        }
        total
    }

    /// Kernel values as weights, summed in atom order (patterns ascending).
    pub fn kernel_matrix(&self) -> Vec<Vec<W>> {
        let n = self.labels.len();
        let mut values = vec![vec![W::zero(); n]; n];
        for (pattern, weight) in &self.atoms {
            for i in 0..n {
                for j in i + 1..n {
                    if pattern.separates(i, j) {
                        values[i][j] = values[i][j].clone() + weight.clone();
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                values[i][j] = values[j][i].clone();
            }
        }
        values
    }

    /// The kernel `K(x, y) = mu(S_x symdiff S_y)` of the representation.
    pub fn symmetric_difference_kernel(&self) -> Result<Kernel> {
        let values = self
            .kernel_matrix()
            .into_iter()
            .map(|row| row.into_iter().map(|w| w.to_f64_mass()).collect())
            .collect();
        Kernel::new(self.labels.clone(), values)
    }

    /// Mass of `S_x minus S_y`: atoms whose pattern is 1 at `x`, 0 at `y`.
    pub fn one_sided_difference(&self, x: &str, y: &str) -> Result<W> {
        let xi = label_index(&self.labels, x)?;
        let yi = label_index(&self.labels, y)?;
        let mut total = W::zero();
        for (pattern, weight) in &self.atoms {
            if pattern.contains(xi) && !pattern.contains(yi) {
                total = total + weight.clone();
            }
        }
        Ok(total)
    }

    /// The complement-doubling trick: each atom spawns a point and its
    /// complement at the same weight. Both one-sided differences of the
    /// result equal the original kernel value on every pair.
    pub fn complement_double(&self) -> GroundedRepresentation<W> {
        let mut points = Vec::with_capacity(self.atoms.len() * 2);
        for (pattern, weight) in &self.atoms {
            points.push((*pattern, weight.clone()));
            points.push((pattern.complement(), weight.clone()));
        }
        GroundedRepresentation { labels: self.labels.clone(), points }
    }
}

/// A raw measure-space discretization: a list of weighted points, each with
/// the membership pattern recording which named sets contain it. Duplicate
/// and constant patterns are permitted.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundedRepresentation<W = f64> {
    labels: Vec<String>,
    points: Vec<(Pattern, W)>,
}

impl<W: Weight> GroundedRepresentation<W> {
    pub fn new(labels: Vec<String>, points: Vec<(Pattern, W)>) -> Result<Self> {
        validate_labels(&labels)?;
        let n = labels.len();
        for (pattern, weight) in &points {
            if pattern.len() != n {
                return Err(Error::validation(format!(
                    "pattern {pattern} has length {} but there are {n} labels",
                    pattern.len()
                )));
            }
            if !weight.is_valid_mass() {
                return Err(Error::validation(format!(
                    "point {pattern} has an invalid weight; weights must be finite and nonnegative"
                )));
            }
        }
        Ok(GroundedRepresentation { labels, points })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> &[(Pattern, W)] {
        &self.points
    }

    /// Canonical form: constant patterns dropped, duplicates merged with
    /// summed weights. Merging sums in point order, so the kernel is
    /// preserved exactly for rational weights.
    pub fn pushforward(&self) -> AtomicRepresentation<W> {
        let mut atoms: BTreeMap<Pattern, W> = BTreeMap::new();
        for (pattern, weight) in &self.points {
            if pattern.is_constant() {
                continue;
            }
            let slot = atoms.entry(*pattern).or_insert_with(W::zero);
            *slot = slot.clone() + weight.clone();
        }
        AtomicRepresentation { labels: self.labels.clone(), atoms }
    }

    pub fn kernel_matrix(&self) -> Vec<Vec<W>> {
        let n = self.labels.len();
        let mut values = vec![vec![W::zero(); n]; n];
        for (pattern, weight) in &self.points {
            for i in 0..n {
                for j in i + 1..n {
                    if pattern.separates(i, j) {
                        values[i][j] = values[i][j].clone() + weight.clone();
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                values[i][j] = values[j][i].clone();
            }
        }
        values
    }

    pub fn symmetric_difference_kernel(&self) -> Result<Kernel> {
        let values = self
            .kernel_matrix()
            .into_iter()
            .map(|row| row.into_iter().map(|w| w.to_f64_mass()).collect())
            .collect();
        Kernel::new(self.labels.clone(), values)
    }

    pub fn one_sided_difference(&self, x: &str, y: &str) -> Result<W> {
        let xi = label_index(&self.labels, x)?;
        let yi = label_index(&self.labels, y)?;
        let mut total = W::zero();
        for (pattern, weight) in &self.points {
            if pattern.contains(xi) && !pattern.contains(yi) {
                total = total + weight.clone();
            }
        }
        Ok(total)
    }
}

impl AtomicRepresentation<f64> {
    /// Exact-rational copy; `f64` weights convert losslessly.
    pub fn to_rational(&self) -> AtomicRepresentation<BigRational> {
        let atoms = self
            .atoms
            .iter()
            .map(|(p, w)| (*p, BigRational::from_float(*w).expect("finite weight")))
            .collect();
        AtomicRepresentation { labels: self.labels.clone(), atoms }
    }
}

impl GroundedRepresentation<f64> {
    pub fn to_rational(&self) -> GroundedRepresentation<BigRational> {
        let points = self
            .points
            .iter()
            .map(|(p, w)| (*p, BigRational::from_float(*w).expect("finite weight")))
            .collect();
        GroundedRepresentation { labels: self.labels.clone(), points }
    }
}

#[derive(Serialize, Deserialize)]
struct WeightedPattern {
    pattern: Pattern,
    weight: f64,
}

impl Serialize for AtomicRepresentation<f64> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let atoms: Vec<WeightedPattern> = self
            .atoms
            .iter()
            .map(|(p, w)| WeightedPattern { pattern: *p, weight: *w })
            .collect();
        let mut s = serializer.serialize_struct("AtomicRepresentation", 2)?;
        s.serialize_field("labels", &self.labels)?;
        s.serialize_field("atoms", &atoms)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for AtomicRepresentation<f64> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            labels: Vec<String>,
            atoms: Vec<WeightedPattern>,
        }
        let raw = Raw::deserialize(deserializer)?;
        AtomicRepresentation::new(
            raw.labels,
            raw.atoms.into_iter().map(|a| (a.pattern, a.weight)),
        )
        .map_err(D::Error::custom)
    }
}

impl Serialize for GroundedRepresentation<f64> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let points: Vec<WeightedPattern> = self
            .points
            .iter()
            .map(|(p, w)| WeightedPattern { pattern: *p, weight: *w })
            .collect();
        let mut s = serializer.serialize_struct("GroundedRepresentation", 2)?;
        s.serialize_field("labels", &self.labels)?;
        s.serialize_field("points", &points)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for GroundedRepresentation<f64> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            labels: Vec<String>,
            points: Vec<WeightedPattern>,
        }
        let raw = Raw::deserialize(deserializer)?;
        GroundedRepresentation::new(
            raw.labels,
            raw.points.into_iter().map(|a| (a.pattern, a.weight)).collect(),
        )
        .map_err(D::Error::custom)
    }
}
