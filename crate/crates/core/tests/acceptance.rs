//! Acceptance suite: one test per release criterion, each printing a
//! `criterion N ...: PASS` line (visible with `--nocapture`). Every
//! tolerance is pinned here; the tests use only the public API plus
//! independent oracles defined in this file.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use octasg::kinematics::{
    self, inverse_rates, leg_lengths, margin, Configuration, JointRates, PlatformScrew, Pose,
};
use octasg::orientation::EulerOrientation;
use octasg::planner::{
    detect_crossings, make_path, plan_g_profile, verify_profile, FailureKind, PlanOutcome,
    PlanParams,
};
use octasg::redundant_legs::{BuildParams, RedundantOctahedron};
use octasg::singularity::{
    factor_oracle, general_case_positions, is_unavoidable, random_unit_quadruple, recover_sigma,
    sample_row_pose, Branch, FactorCase, FactorPrediction,
};

/// Orientation whose two isolated unavoidable positions are exact rationals.
fn golden_orientation() -> EulerOrientation {
    let r = 105f64.sqrt();
    EulerOrientation::new(4.0 * r / 175.0, r / 21.0, 8.0 * r / 105.0, -16.0 * r / 525.0)
}

fn golden_positions() -> (Vector3<f64>, Vector3<f64>) {
    (
        Vector3::new(-148327.0 / 130830.0, -66032.0 / 65415.0, 12304.0 / 13083.0),
        Vector3::new(40969.0 / 65415.0, -85772.0 / 65415.0, 12304.0 / 13083.0),
    )
}

fn random_position<R: Rng>(rng: &mut R) -> Vector3<f64> {
    Vector3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    )
}

#[test]
fn criterion_1_golden_vectors() {
    let o = golden_orientation();
    let (p1, p2) = golden_positions();
    for p in [p1, p2] {
        for g in [0.3, 0.5, 1.0, 2.0] {
            let cfg = Configuration::new(Pose::new(o, p), g);
            let m = margin(&cfg).unwrap();
            assert!(
                m.abs() < 1e-8,
                "margin {m:.3e} at g={g} should vanish"
            );
        }
    }
    println!("criterion 1 (golden singular positions, margin < 1e-8 over g): PASS");
}

#[test]
fn criterion_2_quadratic_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for k in 0..1000 {
        let pose = Pose::new(random_unit_quadruple(&mut rng), random_position(&mut rng));
        // recover_sigma validates two held-out radii internally and fails
        // with StructureViolation above 1e-8 relative residual
        match recover_sigma(&pose) {
            Ok(_) => {}
            Err(octasg::Error::DegenerateLeg { .. }) => continue, // measure-zero freak draw
            Err(e) => panic!("pose {k}: {e}"),
        }
    }
    println!("criterion 2 (quadratic-in-g structure, 1000 random poses, hold-out < 1e-8): PASS");
}

#[test]
fn criterion_3_table_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut strata = 0;
    for row in 1..=22u8 {
        let branches: &[Option<Branch>] = match row {
            2 | 4..=12 => &[Some(Branch::Upper), Some(Branch::Lower)],
            _ => &[None],
        };
        for &branch in branches {
            strata += 1;
            for k in 0..100 {
                let pose = sample_row_pose(row, branch, &mut rng);
                assert!(
                    is_unavoidable(&pose, 1e-8).unwrap(),
                    "row {row} {branch:?} sample {k} not unavoidable"
                );
            }
        }
    }
    assert_eq!(strata, 32);
    println!("criterion 3 (22 rows x sign branches, 100 samples each, unavoidable at 1e-8): PASS");
}

#[test]
fn criterion_4_general_case_positions() {
    // golden rationals reproduced to 1e-12
    let (g21, g22) = golden_positions();
    let (p21, p22) = general_case_positions(&golden_orientation()).unwrap();
    assert!((p21.s - g21).norm() < 1e-12, "first position off by {:.3e}", (p21.s - g21).norm());
    assert!((p22.s - g22).norm() < 1e-12, "second position off by {:.3e}", (p22.s - g22).norm());

    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut accepted = 0;
    while accepted < 500 {
        let o = random_unit_quadruple(&mut rng);
        match general_case_positions(&o) {
            Ok((a, b)) => {
                assert!(is_unavoidable(&a, 1e-8).unwrap(), "first position avoidable");
                assert!(is_unavoidable(&b, 1e-8).unwrap(), "second position avoidable");
                accepted += 1;
            }
            Err(octasg::Error::DegenerateOrientation { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
    println!("criterion 4 (general-case positions unavoidable, 500 orientations + rationals): PASS");
}

/// Fit one common factor k by least squares over (prediction, recovered)
/// pairs; returns the worst per-pair residual relative to the pose scale,
/// and k itself.
fn proportionality_fit(pairs: &[(f64, f64, f64)]) -> (f64, f64) {
    let num: f64 = pairs.iter().map(|(p, r, _)| p * r).sum();
    let den: f64 = pairs.iter().map(|(p, _, _)| p * p).sum();
    let k = if den > 0.0 { num / den } else { 0.0 };
    let worst = pairs
        .iter()
        .map(|(p, r, scale)| (r - k * p).abs() / scale)
        .fold(0.0, f64::max);
    (worst, k)
}

#[test]
fn criterion_5_factor_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        let v: f64 = rng.random_range(0.3..1.2);
        if rng.random_bool(0.5) {
            v
        } else {
            -v
        }
    };

    // case: z-axis rotations — constant coefficient factors in closed form
    let mut pairs = Vec::new();
    for _ in 0..100 {
        let o = EulerOrientation::new(draw(&mut rng), 0.0, 0.0, draw(&mut rng)).normalize();
        let s = random_position(&mut rng);
        let rec = recover_sigma(&Pose::new(o, s)).unwrap();
        let FactorPrediction::Coefficients { c2, c1, c0 } =
            factor_oracle(FactorCase::ZRotation, &o, &s).unwrap()
        else {
            panic!("wrong prediction kind")
        };
        pairs.push((c2.unwrap(), rec.c2, rec.scale));
        pairs.push((c1.unwrap(), rec.c1, rec.scale));
        pairs.push((c0.unwrap(), rec.c0, rec.scale));
    }
    let (res, k_zrot) = proportionality_fit(&pairs);
    assert!(res < 1e-8, "z-rotation factor residual {res:.3e}");

    // case: e0 = e3 — leading coefficient factors in closed form
    let mut pairs = Vec::new();
    for _ in 0..100 {
        let t = draw(&mut rng);
        let o = EulerOrientation::new(t, draw(&mut rng), draw(&mut rng), t).normalize();
        let s = random_position(&mut rng);
        let rec = recover_sigma(&Pose::new(o, s)).unwrap();
        let FactorPrediction::Coefficients { c2: Some(p2), .. } =
            factor_oracle(FactorCase::E0EqualsE3, &o, &s).unwrap()
        else {
            panic!("wrong prediction kind")
        };
        pairs.push((p2, rec.c2, rec.scale));
    }
    let (res, k_lead) = proportionality_fit(&pairs);
    assert!(res < 1e-8, "leading-coefficient factor residual {res:.3e}");

    // case: e0 = e3, e2 = -e1 — linear and constant coefficients factor
    let mut pairs = Vec::new();
    for _ in 0..100 {
        let (t, u) = (draw(&mut rng), draw(&mut rng));
        let o = EulerOrientation::new(t, u, -u, t).normalize();
        let s = random_position(&mut rng);
        let rec = recover_sigma(&Pose::new(o, s)).unwrap();
        let FactorPrediction::Coefficients {
            c2: Some(p2),
            c1: Some(p1),
            c0: Some(p0),
        } = factor_oracle(FactorCase::E0EqualsE3AntiDiagonal, &o, &s).unwrap()
        else {
            panic!("wrong prediction kind")
        };
        assert_eq!(p2, 0.0);
        pairs.push((p2, rec.c2, rec.scale));
        pairs.push((p1, rec.c1, rec.scale));
        pairs.push((p0, rec.c0, rec.scale));
    }
    let (res, k_anti) = proportionality_fit(&pairs);
    assert!(res < 1e-8, "anti-diagonal factor residual {res:.3e}");

    // case: shared-divisor locus — all coefficients vanish at the pinned z
    let mut rng17 = ChaCha8Rng::seed_from_u64(51);
    let mut pairs = Vec::new();
    for k in 0..100 {
        // alternate between the two components of the locus
        let pose = sample_row_pose(if k % 2 == 0 { 17 } else { 18 }, None, &mut rng17);
        let rec = recover_sigma(&pose).unwrap();
        let FactorPrediction::Coefficients { c2, c1, c0 } =
            factor_oracle(FactorCase::GcdLocus, &pose.orientation, &pose.s).unwrap()
        else {
            panic!("wrong prediction kind")
        };
        for (p, r) in [(c2, rec.c2), (c1, rec.c1), (c0, rec.c0)] {
            pairs.push((p.unwrap(), r, rec.scale));
        }
    }
    let (res, _) = proportionality_fit(&pairs);
    assert!(res < 1e-8, "shared-divisor locus residual {res:.3e}");

    // case: x-slope of the linear coefficient at the pinned z
    let mut pairs = Vec::new();
    let mut accepted = 0;
    while accepted < 100 {
        let o = random_unit_quadruple(&mut rng);
        // sample clear of the guards so predictions stay well-scaled
        let pose21 = match general_case_positions(&o) {
            Ok((p, _)) => p,
            Err(_) => continue,
        };
        let y = rng.random_range(-2.0..2.0);
        let z = pose21.s.z;
        let pred = match factor_oracle(FactorCase::XSlope, &o, &Vector3::new(0.0, y, z)) {
            Ok(FactorPrediction::XSlope { dc1_dx }) => dc1_dx,
            Ok(_) => panic!("wrong prediction kind"),
            Err(_) => continue,
        };
        if pred.abs() < 1e-4 {
            continue; // too close to a guard for a well-conditioned check
        }
        let ra = recover_sigma(&Pose::new(o, Vector3::new(-1.0, y, z))).unwrap();
        let rb = recover_sigma(&Pose::new(o, Vector3::new(1.0, y, z))).unwrap();
        let slope = (rb.c1 - ra.c1) / 2.0;
        pairs.push((pred, slope, ra.scale.max(rb.scale)));
        accepted += 1;
    }
    let (res, k_slope) = proportionality_fit(&pairs);
    assert!(res < 1e-8, "x-slope residual {res:.3e}");

    // the fitted factors agree across cases: the determinant carries one
    // global constant in front of the closed-form factorizations
    for k in [k_lead, k_anti, k_slope] {
        assert!(
            (k - k_zrot).abs() < 1e-9 * k_zrot.abs(),
            "per-case constants disagree: {k} vs {k_zrot}"
        );
    }
    println!(
        "criterion 5 (closed-form factor oracles, 100 instances per case, < 1e-8; \
         common constant {k_zrot:.12}): PASS"
    );
}

/// Smooth test trajectory with analytic screw: quadratic quadruple and
/// translation curves, affine base radius.
struct Trajectory {
    qa: [f64; 4],
    qb: [f64; 4],
    qc: [f64; 4],
    sa: Vector3<f64>,
    sb: Vector3<f64>,
    sc: Vector3<f64>,
    g0: f64,
    g1: f64,
}

impl Trajectory {
    fn random<R: Rng>(rng: &mut R) -> Self {
        let mut q = |amp: f64| {
            [
                amp * rng.random_range(-1.0..1.0),
                amp * rng.random_range(-1.0..1.0),
                amp * rng.random_range(-1.0..1.0),
                amp * rng.random_range(-1.0..1.0),
            ]
        };
        let qa = {
            let mut a = q(1.0);
            let n = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in &mut a {
                *x /= n;
            }
            a
        };
        Self {
            qa,
            qb: q(0.4),
            qc: q(0.25),
            sa: Vector3::new(
                rng.random_range(-0.6..0.6),
                rng.random_range(-0.6..0.6),
                rng.random_range(0.8..1.4),
            ),
            sb: Vector3::new(
                rng.random_range(-0.4..0.4),
                rng.random_range(-0.4..0.4),
                rng.random_range(-0.4..0.4),
            ),
            sc: Vector3::new(
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
            ),
            g0: rng.random_range(0.8..1.3),
            g1: rng.random_range(-0.3..0.3),
        }
    }

    fn quadruple(&self, t: f64) -> [f64; 4] {
        std::array::from_fn(|k| self.qa[k] + self.qb[k] * t + self.qc[k] * t * t)
    }

    fn config(&self, t: f64) -> Configuration {
        let u = self.quadruple(t);
        Configuration::new(
            Pose::new(
                EulerOrientation::from_array(u),
                self.sa + self.sb * t + self.sc * t * t,
            ),
            self.g0 + self.g1 * t,
        )
    }

    /// Analytic screw of the normalized quadruple curve:
    /// `ω = 2 (q̇ ⊛ q*)_vec`, `q̄ = ṡ − ω × s`.
    fn screw(&self, t: f64) -> (PlatformScrew, f64) {
        let u = self.quadruple(t);
        let ud: [f64; 4] = std::array::from_fn(|k| self.qb[k] + 2.0 * self.qc[k] * t);
        let n2: f64 = u.iter().map(|x| x * x).sum();
        let n = n2.sqrt();
        let uud: f64 = u.iter().zip(&ud).map(|(x, y)| x * y).sum();
        let q: [f64; 4] = std::array::from_fn(|k| u[k] / n);
        let qdot: [f64; 4] = std::array::from_fn(|k| ud[k] / n - u[k] * uud / (n2 * n));
        // vector part of qdot ⊛ conj(q)
        let w = [
            qdot[0] * q[0] + qdot[1] * q[1] + qdot[2] * q[2] + qdot[3] * q[3],
            -qdot[0] * q[1] + qdot[1] * q[0] - qdot[2] * q[3] + qdot[3] * q[2],
            -qdot[0] * q[2] + qdot[1] * q[3] + qdot[2] * q[0] - qdot[3] * q[1],
            -qdot[0] * q[3] - qdot[1] * q[2] + qdot[2] * q[1] + qdot[3] * q[0],
        ];
        let omega = 2.0 * Vector3::new(w[1], w[2], w[3]);
        let s = self.sa + self.sb * t + self.sc * t * t;
        let sdot = self.sb + self.sc * (2.0 * t);
        (
            PlatformScrew {
                q: omega,
                qbar: sdot - omega.cross(&s),
            },
            self.g1,
        )
    }
}

#[test]
fn criterion_6_velocity_kinematics() {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let h = 1e-6;
    let mut done = 0;
    while done < 100 {
        let tr = Trajectory::random(&mut rng);
        let t0 = rng.random_range(0.1..0.9);
        let cfg = tr.config(t0);
        let (screw, gdot) = tr.screw(t0);
        let (Ok(plus), Ok(minus)) = (
            leg_lengths(&tr.config(t0 + h)),
            leg_lengths(&tr.config(t0 - h)),
        ) else {
            continue;
        };
        let Ok(predicted) = inverse_rates(&cfg, &screw, gdot) else {
            continue;
        };
        for leg in 0..6 {
            let fd = (plus[leg] - minus[leg]) / (2.0 * h);
            assert!(
                (fd - predicted[leg]).abs() <= 1e-5,
                "leg {leg}: fd {fd} vs {p}",
                p = predicted[leg]
            );
        }

        // screw round trip at the same configuration, skipping near-singular draws
        if margin(&cfg).map(|m| m.abs() > 1e-6) == Ok(true) {
            let rates = JointRates {
                rdot: predicted,
                gdot,
            };
            let back = kinematics::forward_screw(&cfg, &rates).unwrap();
            assert!((back.q - screw.q).norm() <= 1e-10, "round-trip q error");
            assert!((back.qbar - screw.qbar).norm() <= 1e-10, "round-trip qbar error");

            // self-motion screw leaves the legs locked
            let sm = kinematics::self_motion_screw(&cfg).unwrap();
            let rdot = inverse_rates(&cfg, &sm, 1.0).unwrap();
            let norm: f64 = rdot.iter().map(|r| r * r).sum::<f64>().sqrt();
            assert!(norm <= 1e-10, "self-motion residual {norm:.3e}");
        }
        done += 1;
    }
    println!("criterion 6 (rates vs finite differences 1e-5; round trip and self-motion 1e-10): PASS");
}

#[test]
fn criterion_7_sliding_leg_variant() {
    for (height, half_length) in [(1.0, 0.5), (0.7, 0.3)] {
        let mech = RedundantOctahedron::new(BuildParams {
            height,
            half_length,
            split_angle: 15f64.to_radians(),
        });
        let sweep = mech.lambda_sweep(&mech.quarter_turn_pose(), 11).unwrap();
        assert!(
            sweep.max_margin < 1e-9,
            "h={height}: quarter-turn margin {m:.3e}",
            m = sweep.max_margin
        );
        let fit = mech.lambda_polynomial(&mech.quarter_turn_pose(), 11).unwrap();
        assert!(
            fit.max_coefficient() < 1e-9,
            "h={height}: fitted coefficient {c:.3e}",
            c = fit.max_coefficient()
        );
        let start = mech.lambda_sweep(&mech.start_pose(), 11).unwrap();
        assert!(start.max_margin > 0.01, "h={height}: start margin {m}", m = start.max_margin);
    }
    println!("criterion 7 (sliding-leg variant: quarter turn unavoidable, both builds): PASS");
}

/// Frozen planner scenario: a tilted orientation and a straight translation
/// whose singularity locus forms a closed band inside the (τ, g) window, so
/// the fixed-radius line crosses it twice while a detour exists around it.
fn planner_scenario() -> (octasg::MotionPath, PlanParams, f64) {
    let o = EulerOrientation::new(0.325, 0.610, -0.666, -0.282);
    let start = Pose::new(o, Vector3::new(0.32, 1.23, -1.69));
    let end = Pose::new(o, Vector3::new(1.64, 0.01, 0.71));
    let path = make_path(&start, &end, 41).unwrap();
    let params = PlanParams {
        gmin: 0.5,
        gmax: 2.0,
        ng: 31,
        eps_det: 1e-4,
        eps_clear: 0.02,
        rate_bound: 0.1,
    };
    (path, params, 1.0)
}

#[test]
fn criterion_8_planner_workflow() {
    let (path, params, g_fixed) = planner_scenario();

    let crossings = detect_crossings(&path, g_fixed);
    assert_eq!(
        crossings.len(),
        2,
        "expected exactly two crossings at g = {g_fixed}, got {crossings:?}"
    );
    for tau in &crossings {
        let m = margin(&Configuration::new(path.pose_at(*tau), g_fixed)).unwrap();
        assert!(m.abs() < 1e-6, "crossing at {tau} has margin {m:.3e}");
    }

    match plan_g_profile(&path, &params).unwrap() {
        PlanOutcome::Profile(profile) => {
            assert!(profile.min_margin >= params.eps_det);
            assert!(profile.min_clearance >= params.eps_clear);
            // independent cell-by-cell recheck of the returned profile
            let (worst_m, worst_c) =
                verify_profile(&path, &profile, params.eps_det, params.eps_clear).unwrap();
            assert!(worst_m >= params.eps_det && worst_c >= params.eps_clear);
            for w in profile.g.windows(2) {
                assert!((w[1] - w[0]).abs() <= params.rate_bound + 1e-12);
            }
        }
        PlanOutcome::Failure(f) => panic!("expected a profile, got failure {f:?}"),
    }

    // a path pinned at the quarter-turn orientation cannot be planned; the
    // failure certificate is a full column of sub-threshold margins
    let fichter = EulerOrientation::new(1.0, 0.0, 0.0, 1.0);
    let pinned = make_path(
        &Pose::new(fichter, Vector3::new(0.3, -0.2, 1.1)),
        &Pose::new(fichter, Vector3::new(-0.4, 0.3, 0.9)),
        9,
    )
    .unwrap();
    match plan_g_profile(&pinned, &params).unwrap() {
        PlanOutcome::Failure(f) => {
            assert_eq!(f.kind, FailureKind::InfeasibleStart);
            assert_eq!(f.margins.len(), params.ng);
            for (m, c) in f.margins.iter().zip(&f.clearances) {
                assert!(m.abs() < params.eps_det || *c < params.eps_clear);
            }
        }
        PlanOutcome::Profile(p) => panic!("expected failure, got profile {p:?}"),
    }
    println!("criterion 8 (two crossings; certified detour profile; pinned path fails with certificate): PASS");
}

#[test]
fn criterion_9_quarter_turn_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for _ in 0..1000 {
        let s = random_position(&mut rng);
        let g = rng.random_range(0.3..2.5);
        for e3 in [1.0, -1.0] {
            let cfg = Configuration::new(
                Pose::new(EulerOrientation::new(1.0, 0.0, 0.0, e3), s),
                g,
            );
            let m = margin(&cfg).unwrap();
            assert!(m.abs() < 1e-10, "quarter-turn margin {m:.3e}");
        }
        // base-plane poses at the identity orientation
        let cfg = Configuration::new(
            Pose::new(
                EulerOrientation::IDENTITY,
                Vector3::new(s.x, s.y, 0.0),
            ),
            g,
        );
        let m = margin(&cfg).unwrap();
        assert!(m.abs() < 1e-10, "base-plane margin {m:.3e}");
    }
    println!("criterion 9 (quarter-turn and base-plane margins < 1e-10, 1000 draws): PASS");
}
