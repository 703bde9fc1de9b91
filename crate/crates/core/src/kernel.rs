//! Symmetric kernels on finite label sets and the two definiteness tests
//! used everywhere else: conditional negative definiteness and the triangle
//! inequality.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symmetric kernel with zero diagonal on a finite list of labels.
///
/// Stored dense; instances are small (tens of labels). Symmetry and the zero
/// diagonal are exact, not approximate: serialized kernels round-trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelData")]
pub struct Kernel {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct KernelData {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl TryFrom<KernelData> for Kernel {
    type Error = Error;

    fn try_from(data: KernelData) -> Result<Self> {
        Kernel::new(data.labels, data.values)
    }
}

impl Kernel {
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::validation("kernel needs at least one label"));
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::validation(format!("duplicate label {a:?}")));
            }
        }
        if values.len() != n || values.iter().any(|row| row.len() != n) {
            return Err(Error::validation(format!(
                "kernel values must form an {n}x{n} matrix"
            )));
        }
        for i in 0..n {
            if values[i][i] != 0.0 {
                return Err(Error::validation(format!(
                    "kernel diagonal must be zero, got {} at label {:?}",
                    values[i][i], labels[i]
                )));
            }
            for j in 0..n {
                let v = values[i][j];
                if !v.is_finite() {
                    return Err(Error::validation(format!(
                        "kernel value at ({:?}, {:?}) is not finite",
                        labels[i], labels[j]
                    )));
                }
                if v != values[j][i] {
                    return Err(Error::validation(format!(
                        "kernel is not symmetric at ({:?}, {:?})",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Kernel { labels, values })
    }

    /// Builds a kernel by evaluating `f` on ordered index pairs; `f` is
    /// called once per unordered pair and mirrored, so symmetry is exact.
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = labels.len();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                values[i][j] = v;
                values[j][i] = v;
            }
        }
        Kernel::new(labels, values)
    }

    pub fn zero(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Kernel::new(labels, vec![vec![0.0; n]; n])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::validation(format!("unknown label {label:?}")))
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Scale used to make tolerances relative: `max(1, max |K|)`.
    pub fn scale(&self) -> f64 {
        self.max_abs().max(1.0)
    }

    /// The quadratic form `sum c_i c_j K(i, j)`.
    pub fn quadratic_form(&self, c: &[f64]) -> f64 {
        let n = self.len();
        debug_assert_eq!(c.len(), n);
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += c[i] * c[j] * self.values[i][j];
            }
        }
        q
    }
}

/// A vector refuting conditional negative definiteness: coefficients sum to
/// zero yet the quadratic form is positive beyond tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegDefWitness {
    pub coefficients: Vec<f64>,
    pub quadratic_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NegDefOutcome {
    NegativeDefinite,
    Refuted { witness: NegDefWitness },
}

impl NegDefOutcome {
    pub fn is_negative_definite(&self) -> bool {
        matches!(self, NegDefOutcome::NegativeDefinite)
    }

    pub fn witness(&self) -> Option<&NegDefWitness> {
        match self {
            NegDefOutcome::NegativeDefinite => None,
            NegDefOutcome::Refuted { witness } => Some(witness),
        }
    }
}

/// Tests whether `K` is conditionally negative definite: `sum c_i c_j K_ij
/// <= 0` for every mean-zero `c`.
///
/// The test diagonalizes `P K P` with `P` the projection onto mean-zero
/// vectors and compares the top eigenvalue against `tol * scale(K)`. On
/// refutation the returned witness has exactly zero coefficient sum and a
/// quadratic form above the gate; small integer coefficients are preferred
/// when the top eigenvector is close to a rational direction.
pub fn is_negative_definite(kernel: &Kernel, tol: f64) -> Result<NegDefOutcome> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::validation(format!("tolerance must be positive, got {tol}")));
    }
    let n = kernel.len();
    if n == 1 {
        return Ok(NegDefOutcome::NegativeDefinite);
    }
    let gate = tol * kernel.scale();
    let k = DMatrix::from_fn(n, n, |i, j| kernel.value(i, j));
    let p = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - 1.0 / n as f64
    });
    let mut m = &p * k * &p;
    // PKP is symmetric up to rounding; the eigensolver wants it exact.
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let eigen = SymmetricEigen::new(m);
    let (top_idx, top_val) = eigen
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| {
            if v > acc.1 {
                (i, v)
            } else {
                acc
            }
        });
    if top_val <= gate {
        return Ok(NegDefOutcome::NegativeDefinite);
    }

    let mut c: Vec<f64> = eigen.eigenvectors.column(top_idx).iter().copied().collect();
    project_mean_zero(&mut c);
    canonical_sign(&mut c);
    if let Some(witness) = integer_witness(kernel, &c, gate) {
        return Ok(NegDefOutcome::Refuted { witness });
    }
    let q = kernel.quadratic_form(&c);
    if q > gate {
        return Ok(NegDefOutcome::Refuted {
            witness: NegDefWitness { coefficients: c, quadratic_form: q },
        });
    }
    // The eigenvalue cleared the gate but no witness survives reevaluation;
    // treat the kernel as negative definite within tolerance.
    Ok(NegDefOutcome::NegativeDefinite)
}

/// Forces the coefficient sum to exactly zero; the input is already close.
fn project_mean_zero(c: &mut [f64]) {
    let n = c.len() as f64;
    let mean = c.iter().sum::<f64>() / n;
    for x in c.iter_mut() {
        *x -= mean;
    }
    for _ in 0..4 {
        let s: f64 = c.iter().sum();
        if s == 0.0 {
            return;
        }
        let idx = c
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        c[idx] -= s;
    }
}

fn canonical_sign(c: &mut [f64]) {
    if let Some(first) = c.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            for x in c.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Tries to round the refuting direction to small integers. Integer
/// coefficient vectors sum to zero exactly and make witnesses auditable.
fn integer_witness(kernel: &Kernel, c: &[f64], gate: f64) -> Option<NegDefWitness> {
    let max_abs = c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if max_abs == 0.0 {
        return None;
    }
    let unit: Vec<f64> = c.iter().map(|v| v / max_abs).collect();
    for mult in 1..=24u32 {
        let m = mult as f64;
        let cand: Vec<f64> = unit.iter().map(|v| (v * m).round()).collect();
        if cand.iter().all(|v| *v == 0.0) {
            continue;
        }
        if cand.iter().sum::<f64>() != 0.0 {
            continue;
        }
        if unit.iter().zip(&cand).any(|(v, w)| (v * m - w).abs() > 1e-6 * m) {
            continue;
        }
        let q = kernel.quadratic_form(&cand);
        if q > gate {
            return Some(NegDefWitness { coefficients: cand, quadratic_form: q });
        }
    }
    None
}

/// A triple violating the triangle inequality: `K(x, y) > K(x, via) +
/// K(via, y)` beyond tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleViolation {
    pub x: String,
    pub via: String,
    pub y: String,
    pub direct: f64,
    pub through: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PseudometricOutcome {
    Pseudometric,
    Violated { violation: TriangleViolation },
}

impl PseudometricOutcome {
    pub fn is_pseudometric(&self) -> bool {
        matches!(self, PseudometricOutcome::Pseudometric)
    }

    pub fn violation(&self) -> Option<&TriangleViolation> {
        match self {
            PseudometricOutcome::Pseudometric => None,
            PseudometricOutcome::Violated { violation } => Some(violation),
        }
    }
}

/// Tests the triangle inequality over all ordered triples. Entries must be
/// nonnegative; a kernel with zero diagonal passing this test is a
/// pseudometric.
pub fn is_pseudometric(kernel: &Kernel, tol: f64) -> Result<PseudometricOutcome> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::validation(format!("tolerance must be positive, got {tol}")));
    }
    ensure_nonnegative(kernel)?;
    let n = kernel.len();
    let gate = tol * kernel.scale();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let direct = kernel.value(i, j);
                let through = kernel.value(i, k) + kernel.value(k, j);
                if direct > through + gate {
                    return Ok(PseudometricOutcome::Violated {
                        violation: TriangleViolation {
                            x: kernel.labels[i].clone(),
                            via: kernel.labels[k].clone(),
                            y: kernel.labels[j].clone(),
                            direct,
                            through,
                        },
                    });
                }
            }
        }
    }
    Ok(PseudometricOutcome::Pseudometric)
}

/// Entrywise square root. Measure-definite kernels have measure-definite
/// square roots, so this is the usual preprocessing step before embedding a
/// squared distance.
pub fn sqrt_kernel(kernel: &Kernel) -> Result<Kernel> {
    ensure_nonnegative(kernel)?;
    let values = kernel
        .values
        .iter()
        .map(|row| row.iter().map(|v| v.sqrt()).collect())
        .collect();
    Kernel::new(kernel.labels.clone(), values)
}

fn ensure_nonnegative(kernel: &Kernel) -> Result<()> {
    for i in 0..kernel.len() {
        for j in 0..kernel.len() {
            if kernel.value(i, j) < 0.0 {
                return Err(Error::validation(format!(
                    "kernel value at ({:?}, {:?}) is negative",
                    kernel.labels[i], kernel.labels[j]
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Tripod tree distances: three leaves at pairwise distance 2, one
    /// center at distance 1 from each leaf.
    fn tripod_distance() -> Kernel {
        Kernel::new(
            labels(&["1", "2", "3", "4"]),
            vec![
                vec![0.0, 2.0, 2.0, 1.0],
                vec![2.0, 0.0, 2.0, 1.0],
                vec![2.0, 2.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0, 0.0],
            ],
        )
        .unwrap()
    }

    fn tripod_squared() -> Kernel {
        let d = tripod_distance();
        Kernel::from_fn(d.labels().to_vec(), |i, j| d.value(i, j).powi(2)).unwrap()
    }

    fn line_squared() -> Kernel {
        // (x - y)^2 on the integer points 0, 1, 2.
        Kernel::from_fn(labels(&["0", "1", "2"]), |i, j| {
            let d = i as f64 - j as f64;
            d * d
        })
        .unwrap()
    }

    /// Exhaustive refutation search over small integer mean-zero vectors.
    fn brute_force_negdef(kernel: &Kernel, bound: i64) -> Option<(Vec<f64>, f64)> {
        let n = kernel.len();
        let width = (2 * bound + 1) as i64;
        let total = width.pow(n as u32);
        for code in 0..total {
            let mut c = Vec::with_capacity(n);
            let mut rest = code;
            for _ in 0..n {
                c.push((rest % width - bound) as f64);
                rest /= width;
            }
            if c.iter().sum::<f64>() != 0.0 {
                continue;
            }
            let q = kernel.quadratic_form(&c);
            if q > 1e-9 * kernel.scale() {
                return Some((c, q));
            }
        }
        None
    }

    #[test]
    fn rejects_malformed_kernels() {
        assert!(Kernel::new(vec![], vec![]).is_err());
        assert!(Kernel::new(labels(&["a", "a"]), vec![vec![0.0; 2]; 2]).is_err());
        assert!(Kernel::new(labels(&["a", "b"]), vec![vec![0.0; 2]; 3]).is_err());
        assert!(Kernel::new(
            labels(&["a", "b"]),
            vec![vec![1.0, 0.0], vec![0.0, 0.0]]
        )
        .is_err());
        assert!(Kernel::new(
            labels(&["a", "b"]),
            vec![vec![0.0, 1.0], vec![2.0, 0.0]]
        )
        .is_err());
        assert!(Kernel::new(
            labels(&["a", "b"]),
            vec![vec![0.0, f64::NAN], vec![f64::NAN, 0.0]]
        )
        .is_err());
    }

    #[test]
    fn json_round_trip() {
        let k = tripod_distance();
        let text = serde_json::to_string(&k).unwrap();
        let back: Kernel = serde_json::from_str(&text).unwrap();
        assert_eq!(k, back);
    }

    #[test]
    fn deserialization_validates() {
        let bad = r#"{"labels":["a","b"],"values":[[0.0,1.0],[2.0,0.0]]}"#;
        assert!(serde_json::from_str::<Kernel>(bad).is_err());
    }

    #[test]
    fn tree_distance_is_negative_definite() {
        let outcome = is_negative_definite(&tripod_distance(), 1e-9).unwrap();
        assert!(outcome.is_negative_definite(), "{outcome:?}");
    }

    #[test]
    fn squared_tree_distance_is_refuted_with_integer_witness() {
        // Oracle: eigenvalues of PKP for the squared tripod kernel are
        // {-4, -4, 0, 1/2}; the top eigenvector is parallel to (1, 1, 1, -3)
        // with quadratic form 6.
        let outcome = is_negative_definite(&tripod_squared(), 1e-9).unwrap();
        let witness = outcome.witness().expect("squared tripod must be refuted");
        assert_eq!(witness.coefficients, vec![1.0, 1.0, 1.0, -3.0]);
        assert_eq!(witness.quadratic_form, 6.0);
        assert_eq!(witness.coefficients.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn line_squared_is_negative_definite_but_not_pseudometric() {
        let k = line_squared();
        assert!(is_negative_definite(&k, 1e-9).unwrap().is_negative_definite());
        let outcome = is_pseudometric(&k, 1e-9).unwrap();
        let v = outcome.violation().expect("(x-y)^2 breaks the triangle inequality");
        assert_eq!((v.x.as_str(), v.via.as_str(), v.y.as_str()), ("0", "1", "2"));
        assert_eq!(v.direct, 4.0);
        assert_eq!(v.through, 2.0);
    }

    #[test]
    fn pseudometric_accepts_tree_distance() {
        let outcome = is_pseudometric(&tripod_distance(), 1e-9).unwrap();
        assert!(outcome.is_pseudometric());
    }

    #[test]
    fn pseudometric_rejects_negative_entries() {
        let k = Kernel::new(
            labels(&["a", "b"]),
            vec![vec![0.0, -1.0], vec![-1.0, 0.0]],
        )
        .unwrap();
        assert!(is_pseudometric(&k, 1e-9).is_err());
    }

    #[test]
    fn brute_force_agrees_on_small_kernels() {
        for (kernel, expect_negdef) in [
            (tripod_distance(), true),
            (tripod_squared(), false),
            (line_squared(), true),
        ] {
            let brute = brute_force_negdef(&kernel, 3);
            let fast = is_negative_definite(&kernel, 1e-9).unwrap();
            assert_eq!(fast.is_negative_definite(), expect_negdef);
            assert_eq!(brute.is_none(), expect_negdef, "brute force disagrees");
        }
    }

    #[test]
    fn witness_survives_reevaluation() {
        let k = tripod_squared();
        let outcome = is_negative_definite(&k, 1e-9).unwrap();
        let w = outcome.witness().unwrap();
        assert!(k.quadratic_form(&w.coefficients) > 1e-9 * k.scale());
    }

    #[test]
    fn single_label_kernel_is_negative_definite() {
        let k = Kernel::zero(labels(&["x"])).unwrap();
        assert!(is_negative_definite(&k, 1e-9).unwrap().is_negative_definite());
        assert!(is_pseudometric(&k, 1e-9).unwrap().is_pseudometric());
    }

    #[test]
    fn sqrt_kernel_is_entrywise() {
        let k = tripod_squared();
        let s = sqrt_kernel(&k).unwrap();
        assert_eq!(s, tripod_distance());
        let neg = Kernel::new(
            labels(&["a", "b"]),
            vec![vec![0.0, -4.0], vec![-4.0, 0.0]],
        )
        .unwrap();
        assert!(sqrt_kernel(&neg).is_err());
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let k = tripod_distance();
        assert!(is_negative_definite(&k, 0.0).is_err());
        assert!(is_negative_definite(&k, -1.0).is_err());
        assert!(is_pseudometric(&k, f64::NAN).is_err());
    }
}
