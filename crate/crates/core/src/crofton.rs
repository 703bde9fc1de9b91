//! Invariant half-space measures for point configurations.
//!
//! The space of half-spaces `{p : <u,p> > t}` of `R^d` carries a
//! rigid-motion-invariant measure, normalized so that the half-spaces
//! containing `v` but not `w` have total mass `||v - w||`. Writing `S_x` for
//! the half-spaces containing `v_x`, the cylinder
//! `(inter_{p in P} S_p) \ (union_{q in N} S_q)` has measure
//!
//! ```text
//! mu = (1/kappa_d) * E_u[ (min_{p in P} <u,v_p> - max_{q in N} <u,v_q>)_+ ]
//! ```
//!
//! with `u` uniform on the unit sphere and `kappa_d = E_u[<u,e>_+]`. The
//! estimator is exact in dimension 1 (two ray orientations), a closed-form
//! piecewise integral in dimension 2, and seeded Monte Carlo above.

use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::embedding::{schoenberg_embed, PointConfiguration};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::measure::AtomicRepresentation;
use crate::pattern::Pattern;

const KAPPA_MAX_DIM: usize = 80;

/// `kappa_d = E[<u,e>_+]` for `u` uniform on the sphere in `R^d`: the
/// calibration constant that makes two-point cylinder mass equal distance.
/// Closed form via the recursion `kappa_{d+2} = d/(d+1) * kappa_d` from
/// `kappa_1 = 1/2`, `kappa_2 = 1/pi`.
pub fn kappa(d: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    assert!(
        (1..=KAPPA_MAX_DIM).contains(&d),
        "kappa defined for dimensions 1..={KAPPA_MAX_DIM}, got {d}"
    );
    let table = TABLE.get_or_init(|| {
        let mut k = vec![0.0; KAPPA_MAX_DIM + 1];
        k[1] = 0.5;
        k[2] = 1.0 / std::f64::consts::PI;
        for d in 3..=KAPPA_MAX_DIM {
            k[d] = (d - 2) as f64 / (d - 1) as f64 * k[d - 2];
        }
        assert_eq!(k[1], 0.5);
        assert_eq!(k[2], 1.0 / std::f64::consts::PI);
        k
    });
    table[d]
}

/// Estimator selection; `Auto` picks the cheapest method valid for the
/// configuration's dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CroftonMethod {
    Auto,
    Exact,
    Quadrature,
    Mc,
}

impl FromStr for CroftonMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(CroftonMethod::Auto),
            "exact" => Ok(CroftonMethod::Exact),
            "quadrature" => Ok(CroftonMethod::Quadrature),
            "mc" => Ok(CroftonMethod::Mc),
            other => Err(Error::validation(format!(
                "unknown method {other:?}; expected auto, exact, quadrature, or mc"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CroftonOptions {
    pub method: CroftonMethod,
    /// Monte Carlo sample count.
    pub samples: u64,
    /// Base seed; each sample derives its directions from (seed, index), so
    /// estimates are independent of evaluation order.
    pub seed: u64,
    /// Target tolerance for deterministic integration. The planar
    /// integrator is closed-form per panel and treats this as a bound it
    /// beats by a wide margin.
    pub tol: f64,
    /// Cap on labels for full atom enumeration (2^n - 2 patterns).
    pub atom_cap: usize,
}

impl Default for CroftonOptions {
    fn default() -> Self {
        CroftonOptions {
            method: CroftonMethod::Auto,
            samples: 1_000_000,
            seed: 0,
            tol: 1e-8,
            atom_cap: 12,
        }
    }
}

impl CroftonOptions {
    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::validation("sample count must be at least 1"));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::validation(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Which estimator actually ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMethod {
    #[serde(rename = "exact-1d")]
    Exact1d,
    #[serde(rename = "quadrature-2d")]
    Quadrature2d,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

/// A cylinder measure estimate with its uncertainty. `std_error` is zero
/// for the deterministic methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CroftonEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: EstimateMethod,
    pub samples: u64,
    pub seed: u64,
}

/// A cylinder constraint: patterns containing every positive label and no
/// negative label. Both sides must be nonempty and disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CylinderData")]
pub struct CylinderSpec {
    positives: Vec<String>,
    negatives: Vec<String>,
}

#[derive(Deserialize)]
struct CylinderData {
    positives: Vec<String>,
    negatives: Vec<String>,
}

impl TryFrom<CylinderData> for CylinderSpec {
    type Error = Error;

    fn try_from(data: CylinderData) -> Result<Self> {
        CylinderSpec::new(data.positives, data.negatives)
    }
}

impl CylinderSpec {
    pub fn new(mut positives: Vec<String>, mut negatives: Vec<String>) -> Result<Self> {
        if positives.is_empty() || negatives.is_empty() {
            return Err(Error::validation(
                "cylinder needs at least one positive and one negative label",
            ));
        }
        positives.sort();
        negatives.sort();
        for side in [&positives, &negatives] {
            for pair in side.windows(2) {
                if pair[0] == pair[1] {
                    return Err(Error::validation(format!(
                        "duplicate cylinder label {:?}",
                        pair[0]
                    )));
                }
            }
        }
        if let Some(l) = positives.iter().find(|l| negatives.contains(l)) {
            return Err(Error::validation(format!(
                "label {l:?} appears on both sides of the cylinder"
            )));
        }
        Ok(CylinderSpec { positives, negatives })
    }

    pub fn from_strs(positives: &[&str], negatives: &[&str]) -> Result<Self> {
        Self::new(
            positives.iter().map(|s| s.to_string()).collect(),
            negatives.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn positives(&self) -> &[String] {
        &self.positives
    }

    pub fn negatives(&self) -> &[String] {
        &self.negatives
    }

    fn resolve(&self, config: &PointConfiguration) -> Result<(Vec<usize>, Vec<usize>)> {
        let pos = self
            .positives
            .iter()
            .map(|l| config.label_index(l))
            .collect::<Result<Vec<_>>>()?;
        let neg = self
            .negatives
            .iter()
            .map(|l| config.label_index(l))
            .collect::<Result<Vec<_>>>()?;
        Ok((pos, neg))
    }
}

/// Fills `buf` with a unit direction derived from `(seed, index)` alone.
fn sample_direction(seed: u64, index: u64, buf: &mut [f64]) {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(b"halfspcs");
    let mut rng = ChaCha8Rng::from_seed(key);
    loop {
        let mut norm_sq = 0.0;
        for slot in buf.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *slot = z;
            norm_sq += z * z;
        }
        if norm_sq > 1e-300 {
            let inv = 1.0 / norm_sq.sqrt();
            for slot in buf.iter_mut() {
                *slot *= inv;
            }
            return;
        }
    }
}

fn min_projection(points: &[Vec<f64>], idxs: &[usize], project: impl Fn(&[f64]) -> f64) -> f64 {
    idxs.iter()
        .map(|&i| project(&points[i]))
        .fold(f64::INFINITY, f64::min)
}

fn max_projection(points: &[Vec<f64>], idxs: &[usize], project: impl Fn(&[f64]) -> f64) -> f64 {
    idxs.iter()
        .map(|&i| project(&points[i]))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exact 1-d measure: the two ray orientations each contribute their
/// positive gap, and averaging over them cancels against `kappa_1 = 1/2`.
fn ray_measure(points: &[Vec<f64>], pos: &[usize], neg: &[usize]) -> f64 {
    let up = min_projection(points, pos, |p| p[0]) - max_projection(points, neg, |p| p[0]);
    let down = min_projection(points, pos, |p| -p[0]) - max_projection(points, neg, |p| -p[0]);
    up.max(0.0) + down.max(0.0)
}

/// Closed-form planar integral. Between consecutive angles at which two
/// relevant points project equally, the active extremal pair is fixed and
/// the integrand is a single cosine arc, integrable exactly.
fn planar_measure(points: &[Vec<f64>], pos: &[usize], neg: &[usize]) -> (f64, u64) {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};
    let mut relevant: Vec<usize> = pos.iter().chain(neg).copied().collect();
    relevant.sort_unstable();
    relevant.dedup();
    let mut breakpoints = Vec::new();
    for (a_pos, &a) in relevant.iter().enumerate() {
        for &b in &relevant[a_pos + 1..] {
            let dx = points[a][0] - points[b][0];
            let dy = points[a][1] - points[b][1];
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            let phi = dy.atan2(dx);
            breakpoints.push((phi + FRAC_PI_2).rem_euclid(TAU));
            breakpoints.push((phi + FRAC_PI_2 + PI).rem_euclid(TAU));
        }
    }
    if breakpoints.is_empty() {
        // All relevant points coincide: no separating half-space.
        return (0.0, 1);
    }
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let mut total = 0.0;
    let panels = breakpoints.len() as u64;
    for i in 0..breakpoints.len() {
        let a = breakpoints[i];
        let b = if i + 1 < breakpoints.len() {
            breakpoints[i + 1]
        } else {
            breakpoints[0] + TAU
        };
        let mid = 0.5 * (a + b);
        let (um_x, um_y) = (mid.cos(), mid.sin());
        let project = |p: &[f64]| p[0] * um_x + p[1] * um_y;
        let p_star = *pos
            .iter()
            .min_by(|&&x, &&y| project(&points[x]).total_cmp(&project(&points[y])))
            .expect("positive side nonempty");
        let q_star = *neg
            .iter()
            .max_by(|&&x, &&y| project(&points[x]).total_cmp(&project(&points[y])))
            .expect("negative side nonempty");
        if project(&points[p_star]) - project(&points[q_star]) <= 0.0 {
            continue;
        }
        let dx = points[p_star][0] - points[q_star][0];
        let dy = points[p_star][1] - points[q_star][1];
        let r = dx.hypot(dy);
        let phi = dy.atan2(dx);
        total += r * ((b - phi).sin() - (a - phi).sin());
    }
    // total = integral over the circle; mean = total / tau; measure = mean
    // divided by kappa_2 = 1/pi, i.e. total / 2.
    (total / 2.0, panels)
}

fn monte_carlo_measure(
    points: &[Vec<f64>],
    pos: &[usize],
    neg: &[usize],
    d: usize,
    opts: &CroftonOptions,
) -> (f64, f64) {
    let mut direction = vec![0.0; d];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for index in 0..opts.samples {
        sample_direction(opts.seed, index, &mut direction);
        let project = |p: &[f64]| p.iter().zip(&direction).map(|(a, b)| a * b).sum::<f64>();
        let gap = min_projection(points, pos, project) - max_projection(points, neg, project);
        let val = gap.max(0.0);
        sum += val;
        sum_sq += val * val;
    }
    let n = opts.samples as f64;
    let mean = sum / n;
    let k = kappa(d);
    let std_error = if opts.samples > 1 {
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt() / k
    } else {
        f64::INFINITY
    };
    (mean / k, std_error)
}

/// Measure of the half-space cylinder `{M : v_p in M for p in P, v_q not in
/// M for q in N}` for the configuration's points.
pub fn cylinder_measure(
    config: &PointConfiguration,
    cyl: &CylinderSpec,
    opts: &CroftonOptions,
) -> Result<CroftonEstimate> {
    opts.validate()?;
    let (pos, neg) = cyl.resolve(config)?;
    let d = config.dimension();
    let method = match opts.method {
        CroftonMethod::Auto => match d {
            1 => EstimateMethod::Exact1d,
            2 => EstimateMethod::Quadrature2d,
            _ => EstimateMethod::MonteCarlo,
        },
        CroftonMethod::Exact => {
            if d != 1 {
                return Err(Error::validation(format!(
                    "exact enumeration only applies in dimension 1, configuration has dimension {d}"
                )));
            }
            EstimateMethod::Exact1d
        }
        CroftonMethod::Quadrature => {
            if d != 2 {
                return Err(Error::validation(format!(
                    "angular quadrature only applies in dimension 2, configuration has dimension {d}"
                )));
            }
            EstimateMethod::Quadrature2d
        }
        CroftonMethod::Mc => EstimateMethod::MonteCarlo,
    };
    let estimate = match method {
        EstimateMethod::Exact1d => CroftonEstimate {
            value: ray_measure(config.points(), &pos, &neg),
            std_error: 0.0,
            method,
            samples: 2,
            seed: opts.seed,
        },
        EstimateMethod::Quadrature2d => {
            let (value, panels) = planar_measure(config.points(), &pos, &neg);
            CroftonEstimate { value, std_error: 0.0, method, samples: panels, seed: opts.seed }
        }
        EstimateMethod::MonteCarlo => {
            let (value, std_error) =
                monte_carlo_measure(config.points(), &pos, &neg, d, opts);
            CroftonEstimate { value, std_error, method, samples: opts.samples, seed: opts.seed }
        }
    };
    Ok(estimate)
}

/// Measures every nonconstant membership pattern and returns the atomic
/// representation whose symmetric-difference kernel reproduces pairwise
/// distances.
///
/// Each pattern's weight is half its cylinder measure: a pair `(x, y)` is
/// separated by the patterns refining either orientation, and the two
/// orientations each carry the full distance `||v_x - v_y||`.
///
/// Above dimension 2 all patterns share one Monte Carlo direction stream:
/// for a fixed direction only the "top k" patterns have positive gap, so a
/// single sorted pass accumulates exactly the terms the per-pattern
/// estimator would, bit for bit.
pub fn atom_measures(
    config: &PointConfiguration,
    opts: &CroftonOptions,
) -> Result<AtomicRepresentation> {
    opts.validate()?;
    let n = config.len();
    if n < 2 {
        return Err(Error::validation("atom enumeration needs at least two labels"));
    }
    if n > opts.atom_cap {
        return Err(Error::SizeLimit { n, cap: opts.atom_cap, what: "atom enumeration" });
    }
    let d = config.dimension();
    let use_mc = match opts.method {
        CroftonMethod::Auto => d > 2,
        CroftonMethod::Mc => true,
        CroftonMethod::Exact | CroftonMethod::Quadrature => false,
    };

    let full = (1u64 << n) - 1;
    let mut atoms: Vec<(Pattern, f64)> = Vec::new();
    if use_mc {
        let mut acc = vec![0.0f64; 1 << n];
        let mut direction = vec![0.0; d];
        let mut projections = vec![0.0f64; n];
        let mut order: Vec<usize> = (0..n).collect();
        for index in 0..opts.samples {
            sample_direction(opts.seed, index, &mut direction);
            for (i, slot) in projections.iter_mut().enumerate() {
                *slot = config
                    .point(i)
                    .iter()
                    .zip(&direction)
                    .map(|(a, b)| a * b)
                    .sum();
            }
            order.sort_unstable_by(|&a, &b| {
                projections[b].total_cmp(&projections[a]).then(a.cmp(&b))
            });
            let mut bits = 0u64;
            for k in 0..n - 1 {
                bits |= 1 << order[k];
                acc[bits as usize] += projections[order[k]] - projections[order[k + 1]];
            }
        }
        let k = kappa(d);
        let samples = opts.samples as f64;
        for bits in 1..full {
            let value = acc[bits as usize] / samples / k;
            let weight = value / 2.0;
            if weight > 0.0 {
                atoms.push((Pattern::from_bits(bits, n)?, weight));
            }
        }
    } else {
        for bits in 1..full {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for i in 0..n {
                if bits >> i & 1 == 1 {
                    pos.push(i);
                } else {
                    neg.push(i);
                }
            }
            let value = match d {
                1 => ray_measure(config.points(), &pos, &neg),
                2 => planar_measure(config.points(), &pos, &neg).0,
                other => {
                    return Err(Error::validation(format!(
                        "deterministic atom enumeration only applies in dimensions 1 and 2, configuration has dimension {other}"
                    )))
                }
            };
            let weight = value / 2.0;
            if weight > 0.0 {
                atoms.push((Pattern::from_bits(bits, n)?, weight));
            }
        }
    }
    AtomicRepresentation::new(config.labels().to_vec(), atoms)
}

/// The measure representation of `sqrt(K)` for a negative definite kernel
/// `K`: embed, then measure every atom of the embedded configuration.
pub fn sqrt_representation(
    kernel: &Kernel,
    embed_tol: f64,
    opts: &CroftonOptions,
) -> Result<AtomicRepresentation> {
    if kernel.len() == 1 {
        return AtomicRepresentation::empty(kernel.labels().to_vec());
    }
    let config = schoenberg_embed(kernel, embed_tol)?;
    atom_measures(&config, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sqrt_kernel;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn config_1d(coords: &[f64]) -> PointConfiguration {
        let names: Vec<String> = (0..coords.len()).map(|i| format!("p{i}")).collect();
        PointConfiguration::new(names, coords.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    fn opts() -> CroftonOptions {
        CroftonOptions::default()
    }

    /// Independent oracle for kappa: Wallis integral of sin^(d-2) by
    /// Simpson's rule; kappa_d = (1/(d-1)) / integral_0^pi sin^(d-2).
    fn kappa_oracle(d: usize) -> f64 {
        assert!(d >= 2);
        let steps = 200_000;
        let h = std::f64::consts::PI / steps as f64;
        let f = |theta: f64| theta.sin().powi(d as i32 - 2);
        let mut integral = f(0.0) + f(std::f64::consts::PI);
        for i in 1..steps {
            let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
            integral += weight * f(i as f64 * h);
        }
        integral *= h / 3.0;
        1.0 / (d as f64 - 1.0) / integral
    }

    #[test]
    fn kappa_matches_closed_forms() {
        assert_eq!(kappa(1), 0.5);
        assert_eq!(kappa(2), 1.0 / std::f64::consts::PI);
        assert_eq!(kappa(3), 0.25);
        assert!((kappa(4) - 2.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert_eq!(kappa(5), 0.1875);
    }

    #[test]
    fn kappa_matches_quadrature_oracle() {
        for d in 2..=7 {
            let oracle = kappa_oracle(d);
            assert!(
                (kappa(d) - oracle).abs() < 1e-10,
                "d={d}: {} vs oracle {oracle}",
                kappa(d)
            );
        }
    }

    #[test]
    fn two_point_measure_is_distance_in_1d() {
        let config = config_1d(&[0.0, 1.0]);
        let cyl = CylinderSpec::from_strs(&["p0"], &["p1"]).unwrap();
        let est = cylinder_measure(&config, &cyl, &opts()).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.method, EstimateMethod::Exact1d);
    }

    #[test]
    fn middle_point_cylinder_is_null() {
        // A ray containing the middle of three collinear points contains an
        // endpoint.
        let config = config_1d(&[0.0, 1.0, 2.0]);
        let middle = CylinderSpec::from_strs(&["p1"], &["p0", "p2"]).unwrap();
        assert_eq!(cylinder_measure(&config, &middle, &opts()).unwrap().value, 0.0);
        let end = CylinderSpec::from_strs(&["p0"], &["p1", "p2"]).unwrap();
        assert_eq!(cylinder_measure(&config, &end, &opts()).unwrap().value, 1.0);
    }

    #[test]
    fn coincident_points_have_zero_measure() {
        let config = PointConfiguration::new(
            labels(&["a", "b"]),
            vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]],
        )
        .unwrap();
        let cyl = CylinderSpec::from_strs(&["a"], &["b"]).unwrap();
        let mut o = opts();
        o.samples = 1000;
        let est = cylinder_measure(&config, &cyl, &o).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn cylinder_validation() {
        assert!(CylinderSpec::from_strs(&[], &["a"]).is_err());
        assert!(CylinderSpec::from_strs(&["a"], &[]).is_err());
        assert!(CylinderSpec::from_strs(&["a"], &["a"]).is_err());
        assert!(CylinderSpec::from_strs(&["a", "a"], &["b"]).is_err());
        let config = config_1d(&[0.0, 1.0]);
        let unknown = CylinderSpec::from_strs(&["p0"], &["zz"]).unwrap();
        assert!(cylinder_measure(&config, &unknown, &opts()).is_err());
    }

    #[test]
    fn method_dimension_mismatch_is_rejected() {
        let config = config_1d(&[0.0, 1.0]);
        let cyl = CylinderSpec::from_strs(&["p0"], &["p1"]).unwrap();
        let mut o = opts();
        o.method = CroftonMethod::Quadrature;
        assert!(cylinder_measure(&config, &cyl, &o).is_err());
        let planar = PointConfiguration::new(
            labels(&["a", "b"]),
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let cyl2 = CylinderSpec::from_strs(&["a"], &["b"]).unwrap();
        let mut o2 = opts();
        o2.method = CroftonMethod::Exact;
        assert!(cylinder_measure(&planar, &cyl2, &o2).is_err());
    }

    #[test]
    fn planar_two_point_measure_is_distance() {
        let config = PointConfiguration::new(
            labels(&["a", "b"]),
            vec![vec![0.25, -1.5], vec![-2.0, 0.75]],
        )
        .unwrap();
        let cyl = CylinderSpec::from_strs(&["a"], &["b"]).unwrap();
        let est = cylinder_measure(&config, &cyl, &opts()).unwrap();
        let expected = (2.25f64.powi(2) + 2.25f64.powi(2)).sqrt();
        assert_eq!(est.method, EstimateMethod::Quadrature2d);
        assert_eq!(est.std_error, 0.0);
        assert!((est.value - expected).abs() < 1e-12, "{} vs {expected}", est.value);
    }

    #[test]
    fn planar_exchange_symmetry() {
        let config = PointConfiguration::new(
            labels(&["a", "b", "c", "d"]),
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.25],
                vec![-0.5, 2.0],
                vec![0.75, -1.0],
            ],
        )
        .unwrap();
        let forward = CylinderSpec::from_strs(&["a", "c"], &["b", "d"]).unwrap();
        let backward = CylinderSpec::from_strs(&["b", "d"], &["a", "c"]).unwrap();
        let f = cylinder_measure(&config, &forward, &opts()).unwrap().value;
        let b = cylinder_measure(&config, &backward, &opts()).unwrap().value;
        assert!((f - b).abs() < 1e-12, "{f} vs {b}");
    }

    #[test]
    fn monte_carlo_two_point_calibration() {
        let config = PointConfiguration::new(
            labels(&["a", "b"]),
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 2.0]],
        )
        .unwrap();
        let cyl = CylinderSpec::from_strs(&["a"], &["b"]).unwrap();
        let mut o = opts();
        o.samples = 200_000;
        let est = cylinder_measure(&config, &cyl, &o).unwrap();
        assert_eq!(est.method, EstimateMethod::MonteCarlo);
        assert!(est.std_error > 0.0);
        assert!(
            (est.value - 3.0).abs() <= 3.0 * est.std_error,
            "{} vs 3.0 (se {})",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn monte_carlo_is_deterministic_in_seed() {
        let config = PointConfiguration::new(
            labels(&["a", "b", "c"]),
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 2.0, 0.5]],
        )
        .unwrap();
        let cyl = CylinderSpec::from_strs(&["a"], &["b", "c"]).unwrap();
        let mut o = opts();
        o.samples = 5000;
        let first = cylinder_measure(&config, &cyl, &o).unwrap();
        let second = cylinder_measure(&config, &cyl, &o).unwrap();
        assert_eq!(first, second);
        o.seed = 7;
        let reseeded = cylinder_measure(&config, &cyl, &o).unwrap();
        assert_ne!(first.value, reseeded.value);
    }

    #[test]
    fn atoms_of_two_points_split_the_distance() {
        let config = config_1d(&[0.0, 2.5]);
        let rep = atom_measures(&config, &opts()).unwrap();
        let atoms = rep.atoms();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[&"10".parse().unwrap()], 1.25);
        assert_eq!(atoms[&"01".parse().unwrap()], 1.25);
    }

    #[test]
    fn atoms_of_three_collinear_points() {
        let config = config_1d(&[0.0, 1.0, 2.0]);
        let rep = atom_measures(&config, &opts()).unwrap();
        let atoms = rep.atoms();
        assert_eq!(atoms.len(), 4);
        for pattern in ["100", "001", "110", "011"] {
            assert_eq!(atoms[&pattern.parse().unwrap()], 0.5, "pattern {pattern}");
        }
        // Reconstructed kernel equals |x - y| exactly.
        let k = rep.symmetric_difference_kernel().unwrap();
        assert_eq!(k.value(0, 1), 1.0);
        assert_eq!(k.value(1, 2), 1.0);
        assert_eq!(k.value(0, 2), 2.0);
    }

    #[test]
    fn equilateral_triangle_atoms_are_symmetric() {
        let h = 3.0f64.sqrt() / 2.0;
        let config = PointConfiguration::new(
            labels(&["a", "b", "c"]),
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]],
        )
        .unwrap();
        let rep = atom_measures(&config, &opts()).unwrap();
        assert_eq!(rep.atoms().len(), 6);
        for (pattern, weight) in rep.atoms() {
            assert!((weight - 0.25).abs() < 1e-12, "pattern {pattern}: {weight}");
        }
        let k = rep.symmetric_difference_kernel().unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                assert!((k.value(i, j) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shared_sample_atoms_match_per_pattern_cylinders_bitwise() {
        let config = PointConfiguration::new(
            labels(&["a", "b", "c", "d"]),
            vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.5],
                vec![0.0, 1.5, -0.5],
                vec![-1.0, 0.5, 2.0],
            ],
        )
        .unwrap();
        let mut o = opts();
        o.samples = 2000;
        let rep = atom_measures(&config, &o).unwrap();
        for (pattern, &weight) in rep.atoms() {
            let pos: Vec<&str> = config
                .labels()
                .iter()
                .enumerate()
                .filter(|(i, _)| pattern.contains(*i))
                .map(|(_, l)| l.as_str())
                .collect();
            let neg: Vec<&str> = config
                .labels()
                .iter()
                .enumerate()
                .filter(|(i, _)| !pattern.contains(*i))
                .map(|(_, l)| l.as_str())
                .collect();
            let cyl = CylinderSpec::from_strs(&pos, &neg).unwrap();
            let est = cylinder_measure(&config, &cyl, &o).unwrap();
            assert_eq!(weight, est.value / 2.0, "pattern {pattern}");
        }
    }

    #[test]
    fn atom_reconstruction_matches_pair_distances() {
        let config = PointConfiguration::new(
            labels(&["a", "b", "c"]),
            vec![vec![0.0, 0.0, 0.0], vec![2.0, 0.0, 1.0], vec![0.5, 1.0, -1.0]],
        )
        .unwrap();
        let mut o = opts();
        o.samples = 200_000;
        let rep = atom_measures(&config, &o).unwrap();
        let k = rep.symmetric_difference_kernel().unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                let expected = config.distance(i, j);
                let got = k.value(i, j);
                assert!(
                    (got - expected).abs() < 0.01 * expected,
                    "pair ({i},{j}): {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn atom_cap_is_enforced() {
        let config = config_1d(&[0.0, 1.0, 2.0, 3.0]);
        let mut o = opts();
        o.atom_cap = 3;
        match atom_measures(&config, &o) {
            Err(Error::SizeLimit { n: 4, cap: 3, .. }) => {}
            other => panic!("expected size limit, got {other:?}"),
        }
        let single = config_1d(&[0.0]);
        assert!(atom_measures(&single, &opts()).is_err());
    }

    #[test]
    fn sqrt_representation_of_squared_line_is_exact() {
        let k = Kernel::from_fn(labels(&["0", "1", "2"]), |i, j| {
            let d = i as f64 - j as f64;
            d * d
        })
        .unwrap();
        let rep = sqrt_representation(&k, 1e-9, &opts()).unwrap();
        let rebuilt = rep.symmetric_difference_kernel().unwrap();
        let expected = sqrt_kernel(&k).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (rebuilt.value(i, j) - expected.value(i, j)).abs() < 1e-9,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn sqrt_representation_of_zero_kernel_is_empty() {
        let k = Kernel::zero(labels(&["a", "b", "c"])).unwrap();
        let rep = sqrt_representation(&k, 1e-9, &opts()).unwrap();
        assert!(rep.atoms().is_empty());
        let single = Kernel::zero(labels(&["a"])).unwrap();
        assert!(sqrt_representation(&single, 1e-9, &opts()).unwrap().atoms().is_empty());
    }

    #[test]
    fn estimate_json_round_trip() {
        let est = CroftonEstimate {
            value: 1.5,
            std_error: 0.01,
            method: EstimateMethod::MonteCarlo,
            samples: 100,
            seed: 3,
        };
        let text = serde_json::to_string(&est).unwrap();
        assert!(text.contains("monte-carlo"));
        let back: CroftonEstimate = serde_json::from_str(&text).unwrap();
        assert_eq!(est, back);
    }
}
