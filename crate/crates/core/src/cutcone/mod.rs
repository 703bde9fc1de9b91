//! Cut-cone membership: decide whether a kernel is a symmetric-difference
//! kernel by linear programming.
//!
//! On a finite label set the measure-definite kernels are exactly the
//! nonnegative combinations of cut pseudometrics, so membership is a
//! phase-1 feasibility problem over one variable per cut. Feasible kernels
//! come back as atomic representations; infeasible ones come back with a
//! Farkas certificate, refined in exact rational arithmetic so the two
//! branches can never both hold.

mod simplex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::measure::AtomicRepresentation;
use crate::pattern::Pattern;
use simplex::phase_one;

/// Hard cap on labels regardless of options: 2^(n-1) - 1 LP variables.
const MAX_LABELS: usize = 20;
/// Float objective at most this (relative to scale) counts as feasible.
const FEASIBLE_TOL: f64 = 1e-9;
/// Float objective at least this (relative to scale) counts as infeasible;
/// the band in between goes to exact arithmetic.
const INFEASIBLE_TOL: f64 = 1e-6;
/// Reconstruction gate for returned representations.
const RECONSTRUCTION_TOL: f64 = 1e-7;
/// Certificates are rescaled until Farkas condition A clears this margin.
const CERTIFICATE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeOptions {
    /// Label cap; the LP has 2^(n-1) - 1 columns.
    pub cap: usize,
    /// Skip the floating-point pass and pivot in exact rationals directly.
    pub exact: bool,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { cap: 14, exact: false }
    }
}

/// One signed weight on an unordered label pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWeight {
    pub x: String,
    pub y: String,
    pub weight: f64,
}

/// Farkas certificate that no nonnegative cut combination matches the
/// kernel: condition A says the weighted kernel sum is positive, condition
/// B says every cut's pair sum is nonpositive. Verified in exact rational
/// arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CertificateData")]
pub struct InfeasibilityCertificate {
    labels: Vec<String>,
    pair_weights: Vec<PairWeight>,
}

#[derive(Deserialize)]
struct CertificateData {
    labels: Vec<String>,
    pair_weights: Vec<PairWeight>,
}

impl TryFrom<CertificateData> for InfeasibilityCertificate {
    type Error = Error;

    fn try_from(data: CertificateData) -> Result<Self> {
        InfeasibilityCertificate::new(data.labels, data.pair_weights)
    }
}

impl InfeasibilityCertificate {
    pub fn new(labels: Vec<String>, pair_weights: Vec<PairWeight>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::validation("certificate needs at least one label"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::validation(format!("duplicate label {l:?}")));
            }
        }
        let mut seen = Vec::new();
        for pw in &pair_weights {
            if !pw.weight.is_finite() {
                return Err(Error::validation(format!(
                    "pair ({:?}, {:?}) has a non-finite weight",
                    pw.x, pw.y
                )));
            }
            let xi = labels
                .iter()
                .position(|l| *l == pw.x)
                .ok_or_else(|| Error::validation(format!("unknown label {:?}", pw.x)))?;
            let yi = labels
                .iter()
                .position(|l| *l == pw.y)
                .ok_or_else(|| Error::validation(format!("unknown label {:?}", pw.y)))?;
            if xi == yi {
                return Err(Error::validation(format!(
                    "pair weight on ({:?}, {:?}) is not a pair",
                    pw.x, pw.y
                )));
            }
            let key = (xi.min(yi), xi.max(yi));
            if seen.contains(&key) {
                return Err(Error::validation(format!(
                    "duplicate pair ({:?}, {:?})",
                    pw.x, pw.y
                )));
            }
            seen.push(key);
        }
        Ok(InfeasibilityCertificate { labels, pair_weights })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn pair_weights(&self) -> &[PairWeight] {
        &self.pair_weights
    }

    /// Pair weights indexed by label positions, zero where absent.
    fn weight_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.labels.len();
        let mut y = vec![vec![0.0; n]; n];
        for pw in &self.pair_weights {
            let xi = self.labels.iter().position(|l| *l == pw.x).expect("validated");
            let yi = self.labels.iter().position(|l| *l == pw.y).expect("validated");
            y[xi][yi] = pw.weight;
            y[yi][xi] = pw.weight;
        }
        y
    }
}

/// Outcome of a cut-cone membership test: exactly one branch.
#[derive(Debug, Clone, PartialEq)]
pub enum Decomposition {
    Feasible(AtomicRepresentation),
    Infeasible(InfeasibilityCertificate),
}

impl Decomposition {
    pub fn representation(&self) -> Option<&AtomicRepresentation> {
        match self {
            Decomposition::Feasible(rep) => Some(rep),
            Decomposition::Infeasible(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&InfeasibilityCertificate> {
        match self {
            Decomposition::Feasible(_) => None,
            Decomposition::Infeasible(cert) => Some(cert),
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Decomposition::Feasible(_))
    }
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

fn cut_columns(n: usize, pair_list: &[(usize, usize)]) -> Result<(Vec<Pattern>, Vec<Vec<usize>>)> {
    let cuts: Vec<Pattern> = Pattern::cuts(n)?.collect();
    let columns = cuts
        .iter()
        .map(|cut| {
            pair_list
                .iter()
                .enumerate()
                .filter(|(_, &(i, j))| cut.separates(i, j))
                .map(|(p, _)| p)
                .collect()
        })
        .collect();
    Ok((cuts, columns))
}

fn ensure_nonnegative(kernel: &Kernel) -> Result<()> {
    for i in 0..kernel.len() {
        for j in 0..kernel.len() {
            if kernel.value(i, j) < 0.0 {
                return Err(Error::validation(format!(
                    "kernel value at ({:?}, {:?}) is negative",
                    kernel.labels()[i],
                    kernel.labels()[j]
                )));
            }
        }
    }
    Ok(())
}

fn reconstruction_gap(rep: &AtomicRepresentation, kernel: &Kernel) -> Result<f64> {
    let rebuilt = rep.symmetric_difference_kernel()?;
    let mut worst = 0.0f64;
    for i in 0..kernel.len() {
        for j in 0..kernel.len() {
            worst = worst.max((rebuilt.value(i, j) - kernel.value(i, j)).abs());
        }
    }
    Ok(worst)
}

fn exact_value(v: f64) -> BigRational {
    BigRational::from_float(v).expect("kernel values are finite")
}

/// Decides cut-cone membership. Uses a floating-point pass first; kernels
/// in the ambiguous band, infeasible kernels (which need exact
/// certificates), and `exact` requests pivot in `BigRational`.
pub fn decompose(kernel: &Kernel, opts: &DecomposeOptions) -> Result<Decomposition> {
    ensure_nonnegative(kernel)?;
    let n = kernel.len();
    let cap = opts.cap.min(MAX_LABELS);
    if n > cap {
        return Err(Error::SizeLimit { n, cap, what: "cut-cone decomposition" });
    }
    if n == 1 {
        return Ok(Decomposition::Feasible(AtomicRepresentation::empty(
            kernel.labels().to_vec(),
        )?));
    }
    let pair_list = pairs(n);
    let (cuts, columns) = cut_columns(n, &pair_list)?;
    let scale = kernel.scale();

    if !opts.exact {
        let b: Vec<f64> = pair_list
            .iter()
            .map(|&(i, j)| kernel.value(i, j) / scale)
            .collect();
        if let Ok(out) = phase_one(&columns, &b, 20_000) {
            if out.objective <= FEASIBLE_TOL {
                let atoms = cuts
                    .iter()
                    .zip(&out.solution)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(cut, &w)| (*cut, w * scale));
                let rep = AtomicRepresentation::new(kernel.labels().to_vec(), atoms)?;
                if reconstruction_gap(&rep, kernel)? <= RECONSTRUCTION_TOL * scale {
                    return Ok(Decomposition::Feasible(rep));
                }
                // Reconstruction drifted; fall through to exact arithmetic.
            } else if out.objective < INFEASIBLE_TOL {
                // Ambiguous band; fall through to exact arithmetic.
            }
            // Decisively infeasible also falls through: certificates are
            // always derived from the exact pass.
        }
    }

    let b: Vec<BigRational> = pair_list
        .iter()
        .map(|&(i, j)| exact_value(kernel.value(i, j)))
        .collect();
    let out = phase_one(&columns, &b, 100_000)?;
    if out.objective.is_zero() {
        let atoms = cuts
            .iter()
            .zip(&out.solution)
            .filter(|(_, w)| !w.is_zero())
            .map(|(cut, w)| (*cut, w.to_f64().unwrap_or(f64::INFINITY)));
        let rep = AtomicRepresentation::new(kernel.labels().to_vec(), atoms)?;
        if reconstruction_gap(&rep, kernel)? <= RECONSTRUCTION_TOL * scale {
            return Ok(Decomposition::Feasible(rep));
        }
        return Err(Error::Solver(
            "exact solution failed the reconstruction check after rounding".into(),
        ));
    }

    let cert = certificate_from_duals(kernel, &pair_list, &out.duals)?;
    match verify_certificate(kernel, &cert)? {
        true => Ok(Decomposition::Infeasible(cert)),
        false => Err(Error::Solver(
            "infeasibility certificate failed exact verification".into(),
        )),
    }
}

/// Scales the exact dual vector to small integers with a safe margin on
/// Farkas condition A, then stores them as (exactly representable) floats.
fn certificate_from_duals(
    kernel: &Kernel,
    pair_list: &[(usize, usize)],
    duals: &[BigRational],
) -> Result<InfeasibilityCertificate> {
    // Condition B holds at phase-1 optimality; condition A equals the
    // positive objective. Normalize denominators away.
    let mut lcm = BigInt::from(1);
    for y in duals {
        lcm = lcm.lcm(y.denom());
    }
    let mut ints: Vec<BigInt> = duals
        .iter()
        .map(|y| (y * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let mut gcd = BigInt::zero();
    for v in &ints {
        gcd = gcd.gcd(v);
    }
    if !gcd.is_zero() && gcd > BigInt::from(1) {
        for v in ints.iter_mut() {
            *v = &*v / &gcd;
        }
    }

    let condition_a = |ys: &[BigInt]| -> BigRational {
        let mut total = BigRational::zero();
        for (p, &(i, j)) in pair_list.iter().enumerate() {
            total += BigRational::from_integer(ys[p].clone()) * exact_value(kernel.value(i, j));
        }
        total
    };
    let a = condition_a(&ints);
    if a <= BigRational::zero() {
        return Err(Error::Solver(
            "dual vector lost positivity during normalization".into(),
        ));
    }
    let margin = exact_value(CERTIFICATE_MARGIN);
    if a < margin {
        // ceil(margin / a) * a >= margin, so the margin holds afterwards.
        let factor = (margin / a).ceil().to_integer();
        for v in ints.iter_mut() {
            *v = &*v * &factor;
        }
    }

    for v in &ints {
        if v.abs().bits() > 53 {
            return Err(Error::Solver(
                "certificate weights exceed exact float range".into(),
            ));
        }
    }
    let pair_weights = pair_list
        .iter()
        .zip(&ints)
        .filter(|(_, v)| !v.is_zero())
        .map(|(&(i, j), v)| PairWeight {
            x: kernel.labels()[i].clone(),
            y: kernel.labels()[j].clone(),
            weight: v.to_f64().expect("checked to fit"),
        })
        .collect();
    InfeasibilityCertificate::new(kernel.labels().to_vec(), pair_weights)
}

/// Rechecks both Farkas conditions in exact rational arithmetic: returns
/// true iff the weighted kernel sum is positive and every cut's pair sum is
/// nonpositive.
pub fn verify_certificate(kernel: &Kernel, cert: &InfeasibilityCertificate) -> Result<bool> {
    if cert.labels() != kernel.labels() {
        return Err(Error::validation(
            "certificate labels do not match the kernel".to_string(),
        ));
    }
    let n = kernel.len();
    if n > MAX_LABELS {
        return Err(Error::SizeLimit { n, cap: MAX_LABELS, what: "certificate verification" });
    }
    let y = cert.weight_matrix();
    let mut condition_a = BigRational::zero();
    for i in 0..n {
        for j in i + 1..n {
            if y[i][j] != 0.0 {
                condition_a += exact_value(y[i][j]) * exact_value(kernel.value(i, j));
            }
        }
    }
    if condition_a <= BigRational::zero() {
        return Ok(false);
    }
    if n == 1 {
        return Ok(true);
    }
    for cut in Pattern::cuts(n)? {
        let mut sum = BigRational::zero();
        for i in 0..n {
            for j in i + 1..n {
                if y[i][j] != 0.0 && cut.separates(i, j) {
                    sum += exact_value(y[i][j]);
                }
            }
        }
        if sum > BigRational::zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of checking a convergent sequence of feasible kernels: the limit
/// is feasible too, with its representation and reconstruction error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitClosureReport {
    pub members_checked: usize,
    pub representation: AtomicRepresentation,
    pub max_reconstruction_error: f64,
}

/// Verifies that every kernel in the sequence is feasible and that the
/// limit kernel (given explicitly or taken as the last member) is feasible
/// as well: the finite-scale form of closure under pointwise limits.
pub fn verify_limit_closed(
    sequence: &[Kernel],
    limit: Option<&Kernel>,
    opts: &DecomposeOptions,
) -> Result<LimitClosureReport> {
    if sequence.is_empty() {
        return Err(Error::validation("sequence must contain at least one kernel"));
    }
    let labels = sequence[0].labels();
    for (idx, k) in sequence.iter().enumerate() {
        if k.labels() != labels {
            return Err(Error::validation(format!(
                "kernel at index {idx} has different labels"
            )));
        }
    }
    let limit = limit.unwrap_or_else(|| sequence.last().expect("nonempty"));
    if limit.labels() != labels {
        return Err(Error::validation("limit kernel has different labels"));
    }
    for (idx, k) in sequence.iter().enumerate() {
        if !decompose(k, opts)?.is_feasible() {
            return Err(Error::validation(format!(
                "kernel at index {idx} is not measure definite"
            )));
        }
    }
    match decompose(limit, opts)? {
        Decomposition::Feasible(representation) => {
            let max_reconstruction_error = reconstruction_gap(&representation, limit)?;
            Ok(LimitClosureReport {
                members_checked: sequence.len(),
                representation,
                max_reconstruction_error,
            })
        }
        Decomposition::Infeasible(_) => Err(Error::Solver(
            "limit kernel is not measure definite although every member is".into(),
        )),
    }
}
