//! Hilbert-space embeddings of negative definite kernels.
//!
//! A kernel with `sum c_i c_j K_ij <= 0` on mean-zero coefficients is
//! exactly a squared-distance kernel: there are points `v_x` with
//! `||v_x - v_y||^2 = K(x, y)`. The construction takes the first label as
//! basepoint, forms the Gram matrix, and factors it by symmetric
//! eigendecomposition.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// A finite point configuration in some `R^d`, one point per label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointConfiguration {
    labels: Vec<String>,
    points: Vec<Vec<f64>>,
    #[serde(skip)]
    basepoint_index: usize,
}

impl PointConfiguration {
    pub fn new(labels: Vec<String>, points: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::validation("configuration needs at least one label"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::validation(format!("duplicate label {l:?}")));
            }
        }
        if points.len() != n {
            return Err(Error::validation(format!(
                "expected {n} points for {n} labels, got {}",
                points.len()
            )));
        }
        let d = points[0].len();
        if d == 0 {
            return Err(Error::validation("points need dimension at least 1"));
        }
        for (label, p) in labels.iter().zip(&points) {
            if p.len() != d {
                return Err(Error::validation(format!(
                    "point for {label:?} has dimension {}, expected {d}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::validation(format!(
                    "point for {label:?} has a non-finite coordinate"
                )));
            }
        }
        Ok(PointConfiguration { labels, points, basepoint_index: 0 })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    pub fn basepoint_index(&self) -> usize {
        self.basepoint_index
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::validation(format!("unknown label {label:?}")))
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// The kernel `K(x, y) = ||v_x - v_y||^2`.
    pub fn squared_distance_kernel(&self) -> Kernel {
        Kernel::from_fn(self.labels.clone(), |i, j| {
            self.points[i]
                .iter()
                .zip(&self.points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        })
        .expect("squared distances form a valid kernel")
    }
}

impl<'de> Deserialize<'de> for PointConfiguration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            labels: Vec<String>,
            points: Vec<Vec<f64>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        PointConfiguration::new(raw.labels, raw.points).map_err(D::Error::custom)
    }
}

/// Embeds a negative definite kernel as squared distances of a point
/// configuration.
///
/// The Gram matrix `G(x, y) = (K(x, x0) + K(y, x0) - K(x, y)) / 2` with the
/// first label as basepoint must be positive semidefinite up to
/// `-tol * scale`; eigenvalues within `tol * scale` of zero are treated as
/// zero, so the embedding dimension is the numerical rank of `G` (minimum 1).
pub fn schoenberg_embed(kernel: &Kernel, tol: f64) -> Result<PointConfiguration> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::validation(format!("tolerance must be positive, got {tol}")));
    }
    let n = kernel.len();
    let scale = kernel.scale();
    let gate = tol * scale;
    let gram = DMatrix::from_fn(n, n, |i, j| {
        0.5 * (kernel.value(i, 0) + kernel.value(j, 0) - kernel.value(i, j))
    });
    let eigen = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    if let Some(&last) = order.last() {
        let min_eig = eigen.eigenvalues[last];
        if min_eig < -gate {
            return Err(Error::NotNegativeDefinite { eigenvalue: min_eig });
        }
    }

    let build = |retained: &[usize]| -> PointConfiguration {
        let d = retained.len().max(1);
        let mut points = vec![vec![0.0; d]; n];
        for (col, &k) in retained.iter().enumerate() {
            let root = eigen.eigenvalues[k].sqrt();
            for (i, point) in points.iter_mut().enumerate() {
                point[col] = eigen.eigenvectors[(i, k)] * root;
            }
        }
        PointConfiguration {
            labels: kernel.labels().to_vec(),
            points,
            basepoint_index: 0,
        }
    };

    let significant: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| eigen.eigenvalues[k] > gate)
        .collect();
    let config = build(&significant);
    if reconstruction_error(&config, kernel) <= gate {
        return Ok(config);
    }
    // Numerical-rank truncation dropped too much; keep every positive
    // eigenvalue instead.
    let positive: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&k| eigen.eigenvalues[k] > 0.0)
        .collect();
    let config = build(&positive);
    if reconstruction_error(&config, kernel) <= gate {
        return Ok(config);
    }
    Err(Error::Solver(
        "embedding failed to reproduce the kernel within tolerance".into(),
    ))
}

fn reconstruction_error(config: &PointConfiguration, kernel: &Kernel) -> f64 {
    let n = kernel.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let sq = config
                .point(i)
                .iter()
                .zip(config.point(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            worst = worst.max((sq - kernel.value(i, j)).abs());
        }
    }
    worst
}

/// Applies `v -> Q v + t` to every point. `Q` must be orthogonal to within
/// 1e-12 entrywise.
pub fn apply_rigid_motion(
    config: &PointConfiguration,
    q: &[Vec<f64>],
    t: &[f64],
) -> Result<PointConfiguration> {
    let d = config.dimension();
    if q.len() != d || q.iter().any(|row| row.len() != d) {
        return Err(Error::validation(format!("rotation matrix must be {d}x{d}")));
    }
    if t.len() != d {
        return Err(Error::validation(format!(
            "translation has dimension {}, expected {d}",
            t.len()
        )));
    }
    for row in q {
        if row.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("rotation matrix has a non-finite entry"));
        }
    }
    if t.iter().any(|c| !c.is_finite()) {
        return Err(Error::validation("translation has a non-finite entry"));
    }
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = (0..d).map(|k| q[k][i] * q[k][j]).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            if (dot - expected).abs() > 1e-12 {
                return Err(Error::validation(format!(
                    "matrix is not orthogonal: column product ({i}, {j}) deviates by {:.3e}",
                    (dot - expected).abs()
                )));
            }
        }
    }
    let points = config
        .points
        .iter()
        .map(|p| {
            (0..d)
                .map(|i| t[i] + (0..d).map(|j| q[i][j] * p[j]).sum::<f64>())
                .collect()
        })
        .collect();
    Ok(PointConfiguration {
        labels: config.labels.clone(),
        points,
        basepoint_index: config.basepoint_index,
    })
}

/// Appends `extra` zero coordinates to every point; distances are unchanged.
pub fn pad_dimension(config: &PointConfiguration, extra: usize) -> PointConfiguration {
    let points = config
        .points
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.extend(std::iter::repeat(0.0).take(extra));
            q
        })
        .collect();
    PointConfiguration {
        labels: config.labels.clone(),
        points,
        basepoint_index: config.basepoint_index,
    }
}
