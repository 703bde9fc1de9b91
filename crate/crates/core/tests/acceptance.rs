//! Acceptance gate for the toolkit: one test per shipping criterion, each
//! printing a single `criterion N (...): PASS` or `FAIL` line (visible with
//! `--nocapture`). Tolerances are pinned next to the assertions they guard.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mdkern_core::actions::{
    defect, defect_growth, group_cylinder_invariance, orbit_kernel, EventuallyConstantSet,
    FiniteGroup, FiniteGroupAction, Mass, Tail, ZAction,
};
use mdkern_core::crofton::{
    cylinder_measure, kappa, sqrt_representation, CroftonMethod, CroftonOptions, CylinderSpec,
};
use mdkern_core::cutcone::{
    decompose, verify_certificate, verify_limit_closed, DecomposeOptions, Decomposition,
};
use mdkern_core::embedding::{
    apply_rigid_motion, pad_dimension, schoenberg_embed, PointConfiguration,
};
use mdkern_core::measure::{AtomicRepresentation, GroundedRepresentation};
use mdkern_core::trees::{distance_kernel, Tree};
use mdkern_core::{is_negative_definite, is_pseudometric, Kernel, Pattern};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn check(number: u32, name: &str, body: impl FnOnce()) {
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
    println!("criterion {number} ({name}): {status}");
    if let Err(panic) = outcome {
        resume_unwind(panic);
    }
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_entry_gap(a: &Kernel, b: &Kernel) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        for j in 0..a.len() {
            worst = worst.max((a.value(i, j) - b.value(i, j)).abs());
        }
    }
    worst
}

/// Nonnegative combination of random canonical cuts on `n` labels.
fn random_cut_combination(n: usize, max_cuts: usize, rng: &mut ChaCha8Rng) -> Kernel {
    let cuts: Vec<Pattern> = Pattern::cuts(n).unwrap().collect();
    let take = rng.random_range(1..=cuts.len().min(max_cuts));
    let chosen = rand::seq::index::sample(rng, cuts.len(), take);
    let weights: Vec<(Pattern, f64)> = chosen
        .iter()
        .map(|i| (cuts[i], rng.random_range(0.0..10.0)))
        .collect();
    Kernel::from_fn(labels(n), |i, j| {
        weights
            .iter()
            .map(|(cut, w)| if cut.separates(i, j) { *w } else { 0.0 })
            .sum()
    })
    .unwrap()
}

/// Random nonempty disjoint positive and negative label sets.
fn random_cylinder(names: &[String], rng: &mut ChaCha8Rng) -> CylinderSpec {
    loop {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for label in names {
            match rng.random_range(0..3u8) {
                0 => pos.push(label.clone()),
                1 => neg.push(label.clone()),
                _ => {}
            }
        }
        if !pos.is_empty() && !neg.is_empty() {
            return CylinderSpec::new(pos, neg).unwrap();
        }
    }
}

fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let gaussian = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = gaussian.qr().q();
    (0..d).map(|i| (0..d).map(|j| q[(i, j)]).collect()).collect()
}

/// Tripod metric: three unit legs from a center; the metric itself
/// decomposes over cuts while its square is refuted by a small integer
/// witness.
#[test]
fn criterion_01_tripod_fixture() {
    check(1, "tripod fixture", || {
        let started = Instant::now();
        let tree = Tree::new(
            "4",
            vec![
                ("4".into(), "1".into(), 1.0),
                ("4".into(), "2".into(), 1.0),
                ("4".into(), "3".into(), 1.0),
            ],
        )
        .unwrap();
        let metric = distance_kernel(&tree).unwrap();
        let at = |x: &str| metric.labels().iter().position(|l| l == x).unwrap();
        for (x, y, want) in [
            ("1", "2", 2.0),
            ("1", "3", 2.0),
            ("2", "3", 2.0),
            ("1", "4", 1.0),
            ("2", "4", 1.0),
            ("3", "4", 1.0),
        ] {
            assert_eq!(metric.value(at(x), at(y)), want);
        }

        let squared =
            Kernel::from_fn(metric.labels().to_vec(), |i, j| metric.value(i, j).powi(2)).unwrap();
        let outcome = is_negative_definite(&squared, 1e-9).unwrap();
        let witness = outcome.witness().expect("squared tripod metric must be refuted");
        assert!(witness.quadratic_form > 0.0);
        // Up to sign the witness is (1, 1, 1, -3) with quadratic form 6.
        let canonical: Vec<f64> = if witness.coefficients[3] > 0.0 {
            witness.coefficients.iter().map(|v| -v).collect()
        } else {
            witness.coefficients.clone()
        };
        assert_eq!(canonical, vec![1.0, 1.0, 1.0, -3.0]);
        assert!((witness.quadratic_form - 6.0).abs() <= 1e-9);

        let decomposition = decompose(&metric, &DecomposeOptions::default()).unwrap();
        let rep = decomposition
            .representation()
            .expect("tripod metric lies in the cut cone");
        let back = rep.symmetric_difference_kernel().unwrap();
        assert!(max_entry_gap(&back, &metric) <= 1e-7);
        assert!(started.elapsed() < Duration::from_secs(1));
    });
}

/// Every atomic representation yields a kernel that is both conditionally
/// negative definite and a pseudometric.
#[test]
fn criterion_02_symmetric_difference_kernels() {
    check(2, "symmetric-difference kernels are negative definite pseudometrics", || {
        let started = Instant::now();
        let mut rng = rng(20_000);
        for _ in 0..500 {
            let n = rng.random_range(2..=6usize);
            let atom_count = rng.random_range(1..=20usize);
            let mut atoms: BTreeMap<Pattern, f64> = BTreeMap::new();
            for _ in 0..atom_count {
                let bits = rng.random_range(1..(1u64 << n) - 1);
                let weight = rng.random_range(0.0..10.0);
                *atoms.entry(Pattern::from_bits(bits, n).unwrap()).or_insert(0.0) += weight;
            }
            let rep = AtomicRepresentation::new(labels(n), atoms).unwrap();
            let kernel = rep.symmetric_difference_kernel().unwrap();
            assert!(is_negative_definite(&kernel, 1e-9).unwrap().is_negative_definite());
            assert!(is_pseudometric(&kernel, 1e-9).unwrap().is_pseudometric());
        }
        assert!(started.elapsed() < Duration::from_secs(10));
    });
}

/// The measure representation of sqrt(K) reproduces the original pairwise
/// distances: exactly (up to roundoff) in one embedded dimension, within
/// quadrature accuracy in two, and within Monte Carlo error above.
#[test]
fn criterion_03_sqrt_representation_reconstructs() {
    check(3, "sqrt representation reconstructs distances", || {
        let started = Instant::now();
        const SAMPLES: u64 = 1_000_000;
        let mut rng = rng(30_000);
        for case in 0..50u64 {
            let n = rng.random_range(2..=5usize);
            let d = rng.random_range(1..=4usize);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let config = PointConfiguration::new(labels(n), points).unwrap();
            let kernel = config.squared_distance_kernel();
            let edim = schoenberg_embed(&kernel, 1e-9).unwrap().dimension();
            let opts = CroftonOptions {
                samples: SAMPLES,
                seed: 31_000 + case,
                ..CroftonOptions::default()
            };
            let rep = sqrt_representation(&kernel, 1e-9, &opts).unwrap();
            let back = rep.symmetric_difference_kernel().unwrap();
            // Relative standard error of a reconstructed pair distance: the
            // shared-sample estimate averages |<u, v_i - v_j>| / (2 kappa),
            // whose per-sample variance is dist^2 (1/d - 4 kappa^2).
            let kap = kappa(edim);
            let se_rel = (1.0 / edim as f64 - 4.0 * kap * kap).max(0.0).sqrt()
                / (2.0 * kap * (SAMPLES as f64).sqrt());
            for i in 0..n {
                for j in i + 1..n {
                    let dist = config.distance(i, j);
                    let err = (back.value(i, j) - dist).abs();
                    let bound = match edim {
                        1 => 1e-9 * dist.max(1.0),
                        2 => 1e-3 * dist,
                        _ => (3.0 * se_rel * dist).max(1e-3 * dist),
                    };
                    assert!(
                        err <= bound,
                        "case {case}: embedded dim {edim}, pair ({i}, {j}) error {err:.3e} > {bound:.3e}"
                    );
                }
            }
        }
        assert!(started.elapsed() < Duration::from_secs(300));
    });
}

/// Two-point sanity: the measure of rays separating v from w is the
/// distance, in every ambient dimension; the normalizing constants match
/// their closed forms.
#[test]
fn criterion_04_two_point_cylinder() {
    check(4, "two-point cylinder measures match distances", || {
        assert!((kappa(1) - 0.5).abs() <= 1e-10);
        assert!((kappa(2) - std::f64::consts::FRAC_1_PI).abs() <= 1e-10);
        let mut rng = rng(40_000);
        let ray = CylinderSpec::from_strs(&["a"], &["b"]).unwrap();
        for &d in &[1usize, 2, 3, 5] {
            for pair in 0..100u64 {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let w: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
                let dist = v
                    .iter()
                    .zip(&w)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let config =
                    PointConfiguration::new(vec!["a".into(), "b".into()], vec![v, w]).unwrap();
                let opts = CroftonOptions {
                    method: CroftonMethod::Mc,
                    samples: 10_000,
                    seed: 41_000 + d as u64 * 1_000 + pair,
                    ..CroftonOptions::default()
                };
                let est = cylinder_measure(&config, &ray, &opts).unwrap();
                assert!(
                    (est.value - dist).abs() <= 3.0 * est.std_error,
                    "d={d} pair {pair}: estimate {} vs distance {dist}, 3 sigma {:.3e}",
                    est.value,
                    3.0 * est.std_error
                );
            }
        }
    });
}

/// Cylinder measures are geometric: rotations, reflections, translations,
/// and zero-padding of the configuration leave them unchanged up to
/// sampling error.
#[test]
fn criterion_05_rigid_motion_invariance() {
    check(5, "rigid motions and padding leave measures unchanged", || {
        let mut rng = rng(50_000);
        for case in 0..50u64 {
            let n = rng.random_range(2..=5usize);
            let d = rng.random_range(1..=4usize);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let config = PointConfiguration::new(labels(n), points).unwrap();
            let cyl = random_cylinder(config.labels(), &mut rng);
            let transformed = if case % 2 == 0 {
                let rotation = random_orthogonal(d, &mut rng);
                let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                apply_rigid_motion(&config, &rotation, &shift).unwrap()
            } else {
                let padded = pad_dimension(&config, rng.random_range(1..=2usize));
                let dd = padded.dimension();
                let rotation = random_orthogonal(dd, &mut rng);
                let shift: Vec<f64> = (0..dd).map(|_| rng.random_range(-1.0..1.0)).collect();
                apply_rigid_motion(&padded, &rotation, &shift).unwrap()
            };
            let base_opts = CroftonOptions {
                method: CroftonMethod::Mc,
                samples: 10_000,
                seed: 51_000 + 2 * case,
                ..CroftonOptions::default()
            };
            let moved_opts = CroftonOptions { seed: 51_001 + 2 * case, ..base_opts.clone() };
            let base = cylinder_measure(&config, &cyl, &base_opts).unwrap();
            let moved = cylinder_measure(&transformed, &cyl, &moved_opts).unwrap();
            let combined = (base.std_error.powi(2) + moved.std_error.powi(2)).sqrt();
            assert!(
                (base.value - moved.value).abs() <= 3.0 * combined + 1e-12,
                "case {case}: {} vs {} with combined sigma {combined:.3e}",
                base.value,
                moved.value
            );
        }
    });
}

/// Nonnegative combinations of cuts decompose back with tiny reconstruction
/// error, and the canonical non-example is refuted with a certificate that
/// verifies in exact arithmetic.
#[test]
fn criterion_06_conic_combinations_decompose() {
    check(6, "conic cut combinations stay decomposable", || {
        let mut rng = rng(60_000);
        let opts = DecomposeOptions::default();
        for case in 0..200u64 {
            let n = rng.random_range(2..=8usize);
            let kernel = random_cut_combination(n, 12, &mut rng);
            let decomposition = decompose(&kernel, &opts).unwrap();
            let rep = decomposition
                .representation()
                .unwrap_or_else(|| panic!("case {case} must be feasible"));
            let back = rep.symmetric_difference_kernel().unwrap();
            let worst = max_entry_gap(&back, &kernel);
            assert!(worst <= 1e-7, "case {case}: reconstruction error {worst:.3e}");
        }

        let parabola = Kernel::from_fn(vec!["0".into(), "1".into(), "2".into()], |i, j| {
            ((i as f64) - (j as f64)).powi(2)
        })
        .unwrap();
        match decompose(&parabola, &opts).unwrap() {
            Decomposition::Feasible(_) => panic!("squared line metric is not measure definite"),
            Decomposition::Infeasible(cert) => {
                assert!(verify_certificate(&parabola, &cert).unwrap());
            }
        }
    });
}

/// Pushing a grounded representation forward to its atomic form preserves
/// the kernel bit for bit in rational arithmetic.
#[test]
fn criterion_07_pushforward_preserves_kernels() {
    check(7, "pushforward preserves kernels exactly", || {
        let mut rng = rng(70_000);
        for _ in 0..200 {
            let n = rng.random_range(1..=6usize);
            let count = rng.random_range(1..=15usize);
            let points: Vec<(Pattern, f64)> = (0..count)
                .map(|_| {
                    let bits = rng.random_range(0..(1u64 << n));
                    let weight = rng.random::<f64>() * 10.0;
                    (Pattern::from_bits(bits, n).unwrap(), weight)
                })
                .collect();
            let grounded = GroundedRepresentation::new(labels(n), points)
                .unwrap()
                .to_rational();
            let atomic = grounded.pushforward();
            assert_eq!(grounded.kernel_matrix(), atomic.kernel_matrix());
        }
    });
}

/// Feasibility survives pointwise limits: scalings sliding down to their
/// base kernel and convex mixtures converging to a fixed blend.
#[test]
fn criterion_08_limits_stay_feasible() {
    check(8, "feasible limits stay feasible", || {
        let mut rng = rng(80_000);
        let opts = DecomposeOptions::default();
        let scale_kernel = |k: &Kernel, factor: f64| {
            Kernel::from_fn(k.labels().to_vec(), |i, j| factor * k.value(i, j)).unwrap()
        };
        let mix = |a: &Kernel, b: &Kernel, t: f64| {
            Kernel::from_fn(a.labels().to_vec(), |i, j| {
                t * a.value(i, j) + (1.0 - t) * b.value(i, j)
            })
            .unwrap()
        };
        for case in 0..50u64 {
            let n = rng.random_range(2..=6usize);
            let a = random_cut_combination(n, 8, &mut rng);
            let (sequence, limit) = if case % 2 == 0 {
                let seq: Vec<Kernel> =
                    (1..=6).map(|j| scale_kernel(&a, 1.0 + 1.0 / j as f64)).collect();
                (seq, a.clone())
            } else {
                let b = random_cut_combination(n, 8, &mut rng);
                let lambda = rng.random_range(0.0..1.0);
                let seq: Vec<Kernel> = (1..=6)
                    .map(|j| mix(&a, &b, lambda * j as f64 / (j as f64 + 1.0)))
                    .collect();
                (seq, mix(&a, &b, lambda))
            };
            let report = verify_limit_closed(&sequence, Some(&limit), &opts).unwrap();
            assert_eq!(report.members_checked, sequence.len());
            let gate = 1e-7 * limit.scale().max(1.0);
            assert!(
                report.max_reconstruction_error <= gate,
                "case {case}: limit reconstruction error {:.3e}",
                report.max_reconstruction_error
            );
        }
    });
}

/// Integer translation defects: the half line shifts by exactly |k|, the
/// growth table is linear for the unit generator, and defects are
/// subadditive under composition.
#[test]
fn criterion_09_translation_defects() {
    check(9, "integer translation defects", || {
        let started = Instant::now();
        let half_line = EventuallyConstantSet::ge(1).unwrap();
        assert_eq!(defect(&half_line, 0).unwrap(), Mass::Finite(0));
        for k in 1..=1_000_000i64 {
            assert_eq!(defect(&half_line, k).unwrap(), Mass::Finite(k as u64));
            assert_eq!(defect(&half_line, -k).unwrap(), Mass::Finite(k as u64));
        }

        let action = ZAction::from_amounts(&[1]).unwrap();
        let rows = defect_growth(&action, &half_line, 10_000).unwrap();
        assert_eq!(rows.len(), 10_000);
        for row in &rows {
            assert_eq!(row.max_defect, Mass::Finite(row.length as u64));
        }

        let mut rng = rng(90_000);
        let window: Vec<bool> = (0..48).map(|_| rng.random()).collect();
        let sets = vec![
            half_line.clone(),
            EventuallyConstantSet::from_window(-24, 23, &window, Tail::Out, Tail::Out).unwrap(),
            EventuallyConstantSet::le(-5).unwrap(),
        ];
        for _ in 0..10_000 {
            let j = rng.random_range(-1_000_000..=1_000_000i64);
            let k = rng.random_range(-1_000_000..=1_000_000i64);
            for set in &sets {
                let dj = defect(set, j).unwrap().finite().unwrap();
                let dk = defect(set, k).unwrap().finite().unwrap();
                let djk = defect(set, j + k).unwrap().finite().unwrap();
                assert!(djk <= dj + dk, "defect({}) > defect({j}) + defect({k})", j + k);
            }
        }
        assert!(started.elapsed() < Duration::from_secs(10));
    });
}

/// Orbit kernels of finite group translations are left-invariant negative
/// definite pseudometrics bounded by the total mass, and cylinder measures
/// of their embeddings agree with their translates up to sampling error.
#[test]
fn criterion_10_group_orbit_kernels() {
    check(10, "group orbit kernels are invariant and bounded", || {
        let groups = vec![
            FiniteGroup::cyclic(2).unwrap(),
            FiniteGroup::cyclic(3).unwrap(),
            FiniteGroup::symmetric(3).unwrap(),
        ];
        for group in &groups {
            let action = FiniteGroupAction::left_translation(group.clone());
            let m = action.ground_size();
            let total: f64 = action.masses().iter().sum();
            let elements = group.elements().to_vec();
            for mask in 0u32..(1 << m) {
                let subset: Vec<usize> = (0..m).filter(|&x| mask >> x & 1 == 1).collect();
                let kernel = orbit_kernel(&action, &subset, &elements).unwrap();
                // Unit masses make invariance a statement about exact sums.
                for h in 0..group.len() {
                    for x in 0..group.len() {
                        for y in 0..group.len() {
                            assert_eq!(
                                kernel.value(group.multiply(h, x), group.multiply(h, y)),
                                kernel.value(x, y)
                            );
                        }
                    }
                }
                assert!(is_negative_definite(&kernel, 1e-9).unwrap().is_negative_definite());
                assert!(is_pseudometric(&kernel, 1e-9).unwrap().is_pseudometric());
                let mut sup = 0.0f64;
                for x in 0..group.len() {
                    for y in 0..group.len() {
                        sup = sup.max(kernel.value(x, y));
                    }
                }
                assert!(sup <= total + 1e-12);
            }
        }

        let mut rng = rng(100_000);
        for fixture in 0..20u64 {
            let group = &groups[(fixture % 3) as usize];
            let action = FiniteGroupAction::left_translation(group.clone());
            let m = action.ground_size();
            let mask = rng.random_range(1..(1u32 << m) - 1);
            let subset: Vec<usize> = (0..m).filter(|&x| mask >> x & 1 == 1).collect();
            let kernel = orbit_kernel(&action, &subset, group.elements()).unwrap();
            let g = group.elements()[rng.random_range(0..group.len())].clone();
            let cyl = random_cylinder(group.elements(), &mut rng);
            let opts = CroftonOptions {
                method: CroftonMethod::Mc,
                samples: 5_000,
                seed: 101_000 + fixture,
                ..CroftonOptions::default()
            };
            let report =
                group_cylinder_invariance(&kernel, group, &g, &cyl, 1e-9, &opts).unwrap();
            assert!(
                report.difference.abs() <= 3.0 * report.combined_std_error + 1e-12,
                "fixture {fixture}: difference {:.3e} exceeds 3 sigma {:.3e}",
                report.difference,
                3.0 * report.combined_std_error
            );
        }
    });
}
