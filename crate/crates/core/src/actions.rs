//! Translation defects of measure-preserving actions.
//!
//! For a subset S of the integers with counting measure, the defect of a
//! translation g is the mass of S symmetric-difference gS. Eventually
//! constant sets keep every defect finite while letting the supremum over
//! all translations diverge, which separates "each defect finite" from
//! "defects uniformly bounded". Finite group actions supply the bounded
//! side: orbit kernels there are left-invariant, measure definite, and
//! bounded by the total mass.

use serde::de::Error as DeError;
use serde::ser::{Error as SerError, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::crofton::{cylinder_measure, CroftonEstimate, CroftonOptions, CylinderSpec};
use crate::embedding::schoenberg_embed;
use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// Positions and shift amounts stay within this bound so that masses are
/// exact in u64 and window arithmetic cannot overflow.
pub const POSITION_LIMIT: i64 = 4_000_000_000_000_000;

/// Largest group order accepted; axiom checks are cubic in the order.
const MAX_GROUP_ORDER: usize = 256;

/// Serialized set windows larger than this are refused.
const MAX_WINDOW_SPAN: i128 = 1_000_000;

/// Growth scans touch every translation amount up to radius times the
/// largest generator; the product is capped.
const MAX_GROWTH_SPAN: u128 = 10_000_000;

/// Constant membership value on an infinite tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    In,
    Out,
}

/// Counting-measure mass of a set: a nonnegative integer or infinite.
/// `Finite` compares below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mass {
    Finite(u64),
    Infinite,
}

impl Mass {
    pub fn is_finite(&self) -> bool {
        matches!(self, Mass::Finite(_))
    }

    pub fn finite(&self) -> Option<u64> {
        match self {
            Mass::Finite(v) => Some(*v),
            Mass::Infinite => None,
        }
    }
}

impl std::fmt::Display for Mass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mass::Finite(v) => write!(f, "{v}"),
            Mass::Infinite => write!(f, "infinite"),
        }
    }
}

impl Serialize for Mass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Mass::Finite(v) => serializer.serialize_u64(*v),
            Mass::Infinite => serializer.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Mass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Mass;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a nonnegative integer or \"infinite\"")
            }

            fn visit_u64<E: DeError>(self, v: u64) -> std::result::Result<Mass, E> {
                Ok(Mass::Finite(v))
            }

            fn visit_i64<E: DeError>(self, v: i64) -> std::result::Result<Mass, E> {
                u64::try_from(v)
                    .map(Mass::Finite)
                    .map_err(|_| E::custom("mass must be nonnegative"))
            }

            fn visit_str<E: DeError>(self, v: &str) -> std::result::Result<Mass, E> {
                if v == "infinite" {
                    Ok(Mass::Infinite)
                } else {
                    Err(E::custom(format!("unknown mass {v:?}")))
                }
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

fn check_position(p: i64, what: &str) -> Result<()> {
    if p.abs() > POSITION_LIMIT {
        return Err(Error::validation(format!(
            "{what} {p} exceeds the position limit {POSITION_LIMIT}"
        )));
    }
    Ok(())
}

/// A subset of the integers that is constant far enough left and right.
/// Stored as the sorted positions where membership flips, together with
/// the membership value at minus infinity; the class is closed under
/// shifts and symmetric differences, and masses are exact.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(try_from = "WindowData")]
pub struct EventuallyConstantSet {
    left_tail: Tail,
    /// Strictly increasing; membership flips at each listed position.
    toggles: Vec<i128>,
}

#[derive(Deserialize)]
struct WindowData {
    window_lo: i64,
    window_hi: i64,
    bits: Vec<bool>,
    left_tail: Tail,
    right_tail: Tail,
}

impl TryFrom<WindowData> for EventuallyConstantSet {
    type Error = Error;

    fn try_from(data: WindowData) -> Result<Self> {
        EventuallyConstantSet::from_window(
            data.window_lo,
            data.window_hi,
            &data.bits,
            data.left_tail,
            data.right_tail,
        )
    }
}

impl Serialize for EventuallyConstantSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (lo, hi) = match (self.toggles.first(), self.toggles.last()) {
            (Some(&first), Some(&last)) => (first, last),
            _ => (0, 0),
        };
        if hi - lo >= MAX_WINDOW_SPAN {
            return Err(S::Error::custom(format!(
                "set spans {} positions, too wide to serialize",
                hi - lo + 1
            )));
        }
        let bits: Vec<bool> = (lo..=hi).map(|p| self.contains_wide(p)).collect();
        let mut state = serializer.serialize_struct("EventuallyConstantSet", 5)?;
        state.serialize_field("window_lo", &(lo as i64))?;
        state.serialize_field("window_hi", &(hi as i64))?;
        state.serialize_field("bits", &bits)?;
        state.serialize_field("left_tail", &self.left_tail)?;
        state.serialize_field("right_tail", &self.right_tail())?;
        state.end()
    }
}

impl EventuallyConstantSet {
    /// Explicit membership on [window_lo, window_hi], constant tails
    /// outside. The window need not be minimal.
    pub fn from_window(
        window_lo: i64,
        window_hi: i64,
        bits: &[bool],
        left_tail: Tail,
        right_tail: Tail,
    ) -> Result<Self> {
        check_position(window_lo, "window_lo")?;
        check_position(window_hi, "window_hi")?;
        if window_lo > window_hi {
            return Err(Error::validation(format!(
                "window [{window_lo}, {window_hi}] is empty"
            )));
        }
        let span = (window_hi as i128) - (window_lo as i128) + 1;
        if span != bits.len() as i128 {
            return Err(Error::validation(format!(
                "window [{window_lo}, {window_hi}] holds {span} positions, got {} bits",
                bits.len()
            )));
        }
        let mut toggles = Vec::new();
        let mut prev = left_tail == Tail::In;
        for (idx, &bit) in bits.iter().enumerate() {
            if bit != prev {
                toggles.push(window_lo as i128 + idx as i128);
                prev = bit;
            }
        }
        if (right_tail == Tail::In) != prev {
            toggles.push(window_hi as i128 + 1);
        }
        Ok(EventuallyConstantSet { left_tail, toggles })
    }

    /// All integers at or above the threshold.
    pub fn ge(threshold: i64) -> Result<Self> {
        check_position(threshold, "threshold")?;
        Ok(EventuallyConstantSet { left_tail: Tail::Out, toggles: vec![threshold as i128] })
    }

    /// All integers at or below the threshold.
    pub fn le(threshold: i64) -> Result<Self> {
        check_position(threshold, "threshold")?;
        Ok(EventuallyConstantSet { left_tail: Tail::In, toggles: vec![threshold as i128 + 1] })
    }

    /// The given positions, nothing else. Duplicates collapse.
    pub fn finite(positions: &[i64]) -> Result<Self> {
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut toggles = Vec::new();
        for &p in &sorted {
            check_position(p, "position")?;
            // Extend the current run or open a new one.
            if toggles.last() == Some(&(p as i128)) {
                toggles.pop();
            } else {
                toggles.push(p as i128);
            }
            toggles.push(p as i128 + 1);
        }
        Ok(EventuallyConstantSet { left_tail: Tail::Out, toggles })
    }

    pub fn empty() -> Self {
        EventuallyConstantSet { left_tail: Tail::Out, toggles: Vec::new() }
    }

    pub fn full() -> Self {
        EventuallyConstantSet { left_tail: Tail::In, toggles: Vec::new() }
    }

    pub fn left_tail(&self) -> Tail {
        self.left_tail
    }

    pub fn right_tail(&self) -> Tail {
        let flipped = self.toggles.len() % 2 == 1;
        match (self.left_tail, flipped) {
            (t, false) => t,
            (Tail::In, true) => Tail::Out,
            (Tail::Out, true) => Tail::In,
        }
    }

    fn contains_wide(&self, p: i128) -> bool {
        let flips = self.toggles.partition_point(|&t| t <= p);
        (self.left_tail == Tail::In) != (flips % 2 == 1)
    }

    pub fn contains(&self, p: i64) -> bool {
        self.contains_wide(p as i128)
    }

    /// Translate every member by k.
    pub fn shift(&self, k: i64) -> Result<Self> {
        check_position(k, "shift amount")?;
        Ok(EventuallyConstantSet {
            left_tail: self.left_tail,
            toggles: self.toggles.iter().map(|&t| t + k as i128).collect(),
        })
    }

    /// Members of exactly one of the two sets. Flip positions shared by
    /// both sets cancel.
    pub fn symmetric_difference(&self, other: &Self) -> Self {
        let left_tail = if self.left_tail == other.left_tail { Tail::Out } else { Tail::In };
        let mut toggles = Vec::with_capacity(self.toggles.len() + other.toggles.len());
        let (mut i, mut j) = (0, 0);
        while i < self.toggles.len() || j < other.toggles.len() {
            let a = self.toggles.get(i).copied();
            let b = other.toggles.get(j).copied();
            match (a, b) {
                (Some(x), Some(y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    toggles.push(x);
                    i += 1;
                }
                (Some(_), Some(y)) => {
                    toggles.push(y);
                    j += 1;
                }
                (Some(x), None) => {
                    toggles.push(x);
                    i += 1;
                }
                (None, Some(y)) => {
                    toggles.push(y);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        EventuallyConstantSet { left_tail, toggles }
    }

    /// Counting-measure mass: finite exactly when both tails are out.
    pub fn mass(&self) -> Mass {
        if self.left_tail == Tail::In || self.toggles.len() % 2 == 1 {
            return Mass::Infinite;
        }
        let mut total: u128 = 0;
        for pair in self.toggles.chunks_exact(2) {
            total += (pair[1] - pair[0]) as u128;
        }
        Mass::Finite(u64::try_from(total).expect("position limits bound the span"))
    }
}

/// Mass of S symmetric-difference (S + k): the translation defect of S.
pub fn defect(set: &EventuallyConstantSet, k: i64) -> Result<Mass> {
    Ok(set.symmetric_difference(&set.shift(k)?).mass())
}

/// A homomorphism to the integers, given by its values on generators.
/// Words evaluate to signed sums of generator amounts, so the reachable
/// translations at word length l are exactly [-l*gmax, l*gmax].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ZActionData")]
pub struct ZAction {
    generators: Vec<(String, i64)>,
}

#[derive(Deserialize)]
struct ZActionData {
    generators: Vec<(String, i64)>,
}

impl TryFrom<ZActionData> for ZAction {
    type Error = Error;

    fn try_from(data: ZActionData) -> Result<Self> {
        ZAction::new(data.generators)
    }
}

impl ZAction {
    pub fn new(generators: Vec<(String, i64)>) -> Result<Self> {
        for (i, (label, amount)) in generators.iter().enumerate() {
            if generators[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::validation(format!("duplicate generator {label:?}")));
            }
            check_position(*amount, "generator amount")?;
        }
        Ok(ZAction { generators })
    }

    /// Generators named g1, g2, ... with the given amounts.
    pub fn from_amounts(amounts: &[i64]) -> Result<Self> {
        ZAction::new(
            amounts
                .iter()
                .enumerate()
                .map(|(i, &a)| (format!("g{}", i + 1), a))
                .collect(),
        )
    }

    pub fn generators(&self) -> &[(String, i64)] {
        &self.generators
    }

    pub fn max_amount(&self) -> i64 {
        self.generators.iter().map(|(_, a)| a.abs()).max().unwrap_or(0)
    }
}

/// Largest defect over all words up to a given length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub length: u32,
    pub max_defect: Mass,
}

/// For each word length up to the radius, the maximum defect over all
/// word evaluations, i.e. over every translation amount within length
/// times the largest generator.
pub fn defect_growth(
    action: &ZAction,
    set: &EventuallyConstantSet,
    radius: u32,
) -> Result<Vec<GrowthRow>> {
    if radius == 0 {
        return Err(Error::validation("radius must be at least 1"));
    }
    let gmax = action.max_amount();
    let span = radius as u128 * gmax as u128;
    if span > MAX_GROWTH_SPAN {
        return Err(Error::SizeLimit {
            n: span as usize,
            cap: MAX_GROWTH_SPAN as usize,
            what: "defect growth scan",
        });
    }
    let mut rows = Vec::with_capacity(radius as usize);
    let mut best = Mass::Finite(0);
    for length in 1..=radius {
        // Word images reachable at this length but not the previous one.
        let band_lo = (length as i64 - 1) * gmax + 1;
        let band_hi = length as i64 * gmax;
        for k in band_lo..=band_hi {
            best = best.max(defect(set, k)?).max(defect(set, -k)?);
        }
        rows.push(GrowthRow { length, max_defect: best });
    }
    Ok(rows)
}

/// A finite group given by its multiplication table over labeled
/// elements. Construction checks the group axioms outright.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    elements: Vec<String>,
    /// table[a][b] is the index of the product a * b.
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(elements: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::validation("a group needs at least one element"));
        }
        if n > MAX_GROUP_ORDER {
            return Err(Error::SizeLimit { n, cap: MAX_GROUP_ORDER, what: "group order" });
        }
        for (i, l) in elements.iter().enumerate() {
            if elements[..i].contains(l) {
                return Err(Error::validation(format!("duplicate element {l:?}")));
            }
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::validation(format!(
                "multiplication table must be {n} x {n}"
            )));
        }
        for row in &table {
            for &v in row {
                if v >= n {
                    return Err(Error::validation(format!(
                        "table entry {v} is not an element index"
                    )));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::validation("table has no identity element"))?;
        let inverses = (0..n)
            .map(|g| {
                (0..n)
                    .find(|&h| table[g][h] == identity && table[h][g] == identity)
                    .ok_or_else(|| {
                        Error::validation(format!("element {:?} has no inverse", elements[g]))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::validation(format!(
                            "associativity fails at ({:?}, {:?}, {:?})",
                            elements[a], elements[b], elements[c]
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup { elements, table, identity, inverses })
    }

    /// The integers mod n, elements named "0" through "n-1".
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("cyclic group order must be positive"));
        }
        if n > MAX_GROUP_ORDER {
            return Err(Error::SizeLimit { n, cap: MAX_GROUP_ORDER, what: "group order" });
        }
        let elements = (0..n).map(|i| i.to_string()).collect();
        let table = (0..n)
            .map(|i| (0..n).map(|j| (i + j) % n).collect())
            .collect();
        FiniteGroup::new(elements, table)
    }

    /// All permutations of {0, ..., k-1} in one-line notation, sorted;
    /// products compose right to left.
    pub fn symmetric(k: usize) -> Result<Self> {
        if k == 0 || k > 5 {
            return Err(Error::validation(
                "symmetric groups are supported for 1 to 5 points".to_string(),
            ));
        }
        let mut perms: Vec<Vec<u8>> = vec![Vec::new()];
        for i in 0..k as u8 {
            perms = perms
                .into_iter()
                .flat_map(|p| {
                    (0..=p.len()).map(move |slot| {
                        let mut q = p.clone();
                        q.insert(slot, i);
                        q
                    })
                })
                .collect();
        }
        let mut elements: Vec<String> = perms
            .iter()
            .map(|p| p.iter().map(|&d| char::from(b'0' + d)).collect())
            .collect();
        elements.sort();
        let digits: Vec<Vec<usize>> = elements
            .iter()
            .map(|s| s.bytes().map(|b| (b - b'0') as usize).collect())
            .collect();
        let table = digits
            .iter()
            .map(|g| {
                digits
                    .iter()
                    .map(|h| {
                        let product: String = (0..k)
                            .map(|i| char::from(b'0' + g[h[i]] as u8))
                            .collect();
                        elements.binary_search(&product).expect("closed under composition")
                    })
                    .collect()
            })
            .collect();
        FiniteGroup::new(elements, table)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == label)
    }

    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }
}

/// A finite group acting by permutations on a weighted finite ground set.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupAction {
    group: FiniteGroup,
    /// permutations[g][x] is where element g sends ground point x.
    permutations: Vec<Vec<usize>>,
    masses: Vec<f64>,
}

impl FiniteGroupAction {
    pub fn new(
        group: FiniteGroup,
        permutations: Vec<Vec<usize>>,
        masses: Vec<f64>,
    ) -> Result<Self> {
        let n = group.len();
        let m = masses.len();
        if m == 0 {
            return Err(Error::validation("ground set must not be empty"));
        }
        for &mass in &masses {
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::validation(format!(
                    "ground masses must be positive and finite, got {mass}"
                )));
            }
        }
        if permutations.len() != n {
            return Err(Error::validation(format!(
                "need one permutation per group element, got {} for {n}",
                permutations.len()
            )));
        }
        for (g, perm) in permutations.iter().enumerate() {
            if perm.len() != m {
                return Err(Error::validation(format!(
                    "permutation for {:?} has length {}, ground set has {m}",
                    group.elements()[g],
                    perm.len()
                )));
            }
            let mut hit = vec![false; m];
            for &image in perm {
                if image >= m || hit[image] {
                    return Err(Error::validation(format!(
                        "element {:?} does not act by a permutation",
                        group.elements()[g]
                    )));
                }
                hit[image] = true;
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = group.multiply(a, b);
                for x in 0..m {
                    if permutations[ab][x] != permutations[a][permutations[b][x]] {
                        return Err(Error::validation(format!(
                            "action is not a homomorphism at ({:?}, {:?})",
                            group.elements()[a],
                            group.elements()[b]
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroupAction { group, permutations, masses })
    }

    /// The group acting on itself by left multiplication, unit masses.
    pub fn left_translation(group: FiniteGroup) -> Self {
        let n = group.len();
        let permutations = (0..n)
            .map(|g| (0..n).map(|x| group.multiply(g, x)).collect())
            .collect();
        let masses = vec![1.0; n];
        FiniteGroupAction { group, permutations, masses }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn ground_size(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Membership vector of g applied to the subset.
    fn translate(&self, g: usize, subset: &[bool]) -> Vec<bool> {
        let mut out = vec![false; subset.len()];
        for (x, &member) in subset.iter().enumerate() {
            if member {
                out[self.permutations[g][x]] = true;
            }
        }
        out
    }
}

/// Kernel K(a, b) = mass of aS symmetric-difference bS over the listed
/// group elements. Always left-invariant, measure definite, and bounded
/// by the total ground mass.
pub fn orbit_kernel(
    action: &FiniteGroupAction,
    subset: &[usize],
    elements: &[String],
) -> Result<Kernel> {
    let m = action.ground_size();
    let mut membership = vec![false; m];
    for &x in subset {
        if x >= m {
            return Err(Error::validation(format!(
                "subset point {x} is outside the ground set of {m}"
            )));
        }
        membership[x] = true;
    }
    let indices: Vec<usize> = elements
        .iter()
        .map(|label| {
            action
                .group()
                .index(label)
                .ok_or_else(|| Error::validation(format!("element {label:?} not in group")))
        })
        .collect::<Result<Vec<_>>>()?;
    let translates: Vec<Vec<bool>> = indices
        .iter()
        .map(|&g| action.translate(g, &membership))
        .collect();
    Kernel::from_fn(elements.to_vec(), |a, b| {
        let mut total = 0.0;
        for x in 0..m {
            if translates[a][x] != translates[b][x] {
                total += action.masses()[x];
            }
        }
        total
    })
}

/// Both sides of the invariance check: the cylinder measure and the
/// measure of its translate by a group element, from the same direction
/// stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub base: CroftonEstimate,
    pub translated: CroftonEstimate,
    /// translated minus base.
    pub difference: f64,
    /// Standard errors combined in quadrature; zero for exact methods.
    pub combined_std_error: f64,
}

/// For a left-invariant negative definite kernel on a finite group,
/// estimates the half-space measure of a cylinder and of its translate
/// under the element g, sharing the random directions. Invariance of the
/// construction makes the two values agree up to sampling error.
pub fn group_cylinder_invariance(
    kernel: &Kernel,
    group: &FiniteGroup,
    g: &str,
    cylinder: &CylinderSpec,
    tol: f64,
    opts: &CroftonOptions,
) -> Result<InvarianceReport> {
    if kernel.labels() != group.elements() {
        return Err(Error::validation(
            "kernel labels must list the group elements in order".to_string(),
        ));
    }
    let g_idx = group
        .index(g)
        .ok_or_else(|| Error::validation(format!("element {g:?} not in group")))?;
    let n = group.len();
    let gate = tol * kernel.scale();
    for h in 0..n {
        for x in 0..n {
            for y in x + 1..n {
                let moved = kernel.value(group.multiply(h, x), group.multiply(h, y));
                if (moved - kernel.value(x, y)).abs() > gate {
                    return Err(Error::validation(format!(
                        "kernel is not left-invariant at ({:?}, {:?}, {:?})",
                        group.elements()[h],
                        group.elements()[x],
                        group.elements()[y]
                    )));
                }
            }
        }
    }
    let config = schoenberg_embed(kernel, tol)?;
    let translate = |labels: &[String]| -> Vec<String> {
        labels
            .iter()
            .map(|l| {
                let idx = group.index(l).expect("validated against kernel labels");
                group.elements()[group.multiply(g_idx, idx)].clone()
            })
            .collect()
    };
    let moved = CylinderSpec::new(
        translate(cylinder.positives()),
        translate(cylinder.negatives()),
    )?;
    let base = cylinder_measure(&config, cylinder, opts)?;
    let translated = cylinder_measure(&config, &moved, opts)?;
    let difference = translated.value - base.value;
    let combined_std_error =
        (base.std_error * base.std_error + translated.std_error * translated.std_error).sqrt();
    Ok(InvarianceReport { base, translated, difference, combined_std_error })
}
