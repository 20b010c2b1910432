//! Unavoidable-singularity analysis.
//!
//! For a fixed pose, the determinant of the raw-line Jacobian is `g³` times a
//! quadratic polynomial in the base circumradius `g`:
//!
//! ```text
//! det J_raw(g) = g³ (c₂ g² + c₁ g + c₀)
//! ```
//!
//! [`recover_sigma`] recovers `(c₂, c₁, c₀)` numerically from determinant
//! samples. A pose is an *unavoidable singularity* when all three
//! coefficients vanish — the configuration is singular for every base radius,
//! so the redundant degree of freedom cannot escape it. The coefficients
//! factor in closed form over a number of special orientation families; the
//! full classification is encoded in [`classify_orientation`] as a table of
//! 22 strata, and [`factor_oracle`] exposes the closed-form factorizations of
//! the special families for independent cross-checking.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::kinematics::{jacobian_raw, Configuration, Pose};
use crate::orientation::EulerOrientation;

/// Default tolerance for [`is_unavoidable`]: largest normalized coefficient
/// magnitude accepted as "vanishing".
pub const DEFAULT_UNAVOIDABLE_TOL: f64 = 1e-8;

/// Default residual tolerance for matching a row's orientation conditions in
/// [`classify_orientation`] (applied to the canonical quadruple).
pub const DEFAULT_ROW_MATCH_TOL: f64 = 1e-10;

/// Hold-out residual (relative to [`SigmaCoefficients::scale`]) above which
/// [`recover_sigma`] reports a structure violation.
pub const STRUCTURE_TOL: f64 = 1e-8;

const SQRT3: f64 = 1.7320508075688772;

/// `g` samples used for the quadratic fit.
const FIT_G: [f64; 3] = [0.5, 1.0, 1.5];
/// Extra `g` samples used to validate the fit.
const HOLDOUT_G: [f64; 2] = [2.0, 3.0];

/// Recovered coefficients of `det J_raw(g) / g³ = c₂ g² + c₁ g + c₀` at a
/// fixed pose, plus a magnitude reference for relative tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaCoefficients {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    /// Hadamard row-norm bound of the raw Jacobian divided by `g³`,
    /// maximized over the sample radii. `|det J_raw(g)/g³| ≤ scale` at every
    /// sample, which makes `cᵢ / scale` a scale-free singularity measure.
    pub scale: f64,
}

impl SigmaCoefficients {
    /// Evaluate the fitted quadratic at `g`.
    pub fn eval(&self, g: f64) -> f64 {
        (self.c2 * g + self.c1) * g + self.c0
    }

    /// Largest coefficient magnitude relative to the scale reference.
    pub fn max_relative_coefficient(&self) -> f64 {
        self.c2.abs().max(self.c1.abs()).max(self.c0.abs()) / self.scale
    }

    /// Real roots of the quadratic (positive leading coefficient not
    /// required); used to predict sign changes of the determinant in `g`.
    pub fn real_roots(&self) -> Vec<f64> {
        let eps = 1e-14 * self.scale;
        if self.c2.abs() <= eps {
            if self.c1.abs() <= eps {
                return Vec::new();
            }
            return vec![-self.c0 / self.c1];
        }
        let disc = self.c1 * self.c1 - 4.0 * self.c2 * self.c0;
        if disc < 0.0 {
            return Vec::new();
        }
        let sq = disc.sqrt();
        // numerically stable pairing
        let q = -0.5 * (self.c1 + self.c1.signum() * sq);
        let mut roots = if q == 0.0 {
            vec![0.0, 0.0]
        } else {
            vec![q / self.c2, self.c0 / q]
        };
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }
}

fn det_over_g3(pose: &Pose, g: f64) -> Result<(f64, f64)> {
    let j = jacobian_raw(&Configuration::new(*pose, g))?;
    // reject truly degenerate legs like the unit-row path does
    for i in 0..6 {
        let dir = Vector3::new(j[(i, 3)], j[(i, 4)], j[(i, 5)]);
        if dir.norm() < crate::kinematics::MIN_LEG_LENGTH {
            return Err(Error::DegenerateLeg {
                leg: i,
                length: dir.norm(),
            });
        }
    }
    let g3 = g * g * g;
    let mut hadamard = 1.0;
    for i in 0..6 {
        hadamard *= j.row(i).norm();
    }
    Ok((j.determinant() / g3, hadamard / g3))
}

/// Recover the quadratic coefficients of `det J_raw(g)/g³` for a pose by
/// sampling three radii and solving the Vandermonde system, then validating
/// the fit at two held-out radii. A hold-out residual above [`STRUCTURE_TOL`]
/// (relative to the scale reference) is an implementation bug, reported as
/// [`Error::StructureViolation`].
pub fn recover_sigma(pose: &Pose) -> Result<SigmaCoefficients> {
    let pose = Pose::new(pose.orientation.normalize(), pose.s);
    let mut d = [0.0; 3];
    let mut scale = 0.0f64;
    for (k, &g) in FIT_G.iter().enumerate() {
        let (dv, h) = det_over_g3(&pose, g)?;
        d[k] = dv;
        scale = scale.max(h);
    }
    let mut holdout = [0.0; 2];
    for (k, &g) in HOLDOUT_G.iter().enumerate() {
        let (dv, h) = det_over_g3(&pose, g)?;
        holdout[k] = dv;
        scale = scale.max(h);
    }

    let v = Matrix3::new(
        FIT_G[0] * FIT_G[0],
        FIT_G[0],
        1.0,
        FIT_G[1] * FIT_G[1],
        FIT_G[1],
        1.0,
        FIT_G[2] * FIT_G[2],
        FIT_G[2],
        1.0,
    );
    let rhs = Vector3::new(d[0], d[1], d[2]);
    let c = v.lu().solve(&rhs).expect("fixed Vandermonde system is regular");
    let coeffs = SigmaCoefficients {
        c2: c[0],
        c1: c[1],
        c0: c[2],
        scale,
    };

    let mut worst = 0.0f64;
    for (k, &g) in HOLDOUT_G.iter().enumerate() {
        worst = worst.max((holdout[k] - coeffs.eval(g)).abs() / scale);
    }
    if worst > STRUCTURE_TOL {
        return Err(Error::StructureViolation { residual: worst });
    }
    Ok(coeffs)
}

/// A pose is unavoidable when every coefficient of the recovered quadratic
/// vanishes relative to the scale reference.
pub fn is_unavoidable(pose: &Pose, tol: f64) -> Result<bool> {
    Ok(recover_sigma(pose)?.max_relative_coefficient() < tol)
}

// ---------------------------------------------------------------------------
// general-case positions
// ---------------------------------------------------------------------------

fn quartic_invariant(e: &EulerOrientation) -> f64 {
    let (e0, e1, e2, e3) = (e.e0, e.e1, e.e2, e.e3);
    e2 * e2 * e3 * e3 - 3.0 * e2 * e2 * e0 * e0 + 8.0 * e2 * e1 * e0 * e3
        - 3.0 * e1 * e1 * e3 * e3
        + e1 * e1 * e0 * e0
}

/// The z-coordinate killing the quadratic's leading coefficient; shared by
/// every general-case position. Assumes the canonical quadruple and
/// nonvanishing denominator `(e3²−e0²)(e1²+e2²)`.
fn general_z(e: &EulerOrientation) -> f64 {
    let (e0, e1, e2, e3) = (e.e0, e.e1, e.e2, e.e3);
    (e0 * e0 + e3 * e3)
        * (e1.powi(3) * e3 - 3.0 * e1 * e2 * e2 * e3 - 3.0 * e1 * e1 * e2 * e0 + e2.powi(3) * e0)
        / ((e3 * e3 - e0 * e0) * (e2 * e2 + e1 * e1))
}

fn general_xy(e: &EulerOrientation) -> ((f64, f64), (f64, f64)) {
    let (e0, e1, e2, e3) = (e.e0, e.e1, e.e2, e.e3);
    let n12 = e2 * e2 + e1 * e1;
    let w = e0 * e0 - e3 * e3;
    let x1 = (e0 * e0 + e3 * e3)
        * (e3 * e3 * e1 * e1 - e3 * e3 * e2 * e2 - 4.0 * e1 * e2 * e0 * e3 - e1.powi(4)
            + 6.0 * e2 * e2 * e1 * e1
            - e2.powi(4)
            - e0 * e0 * e1 * e1
            + e0 * e0 * e2 * e2)
        / (2.0 * n12 * w);
    let y1 = (e3 * e3 + e0 * e0)
        * (e1 * e2 * e3 * e3 + e1 * e1 * e3 * e0 - e2 * e2 * e3 * e0 + 2.0 * e1.powi(3) * e2
            - 2.0 * e1 * e2.powi(3)
            - e1 * e2 * e0 * e0)
        / (-n12 * w);
    let x2 = (e3.powi(4) * e1 * e1 - e3.powi(4) * e2 * e2 + 3.0 * e3 * e3 * e1 * e1 * e2 * e2
        - e3 * e3 * e2.powi(4)
        + 2.0 * e3 * e0 * e1.powi(3) * e2
        + 2.0 * e3 * e0 * e1 * e2.powi(3)
        - e1.powi(4) * e0 * e0
        + 3.0 * e1 * e1 * e2 * e2 * e0 * e0
        - e0.powi(4) * e1 * e1
        + e0.powi(4) * e2 * e2)
        / (n12 * w);
    let y2 = (2.0 * e3.powi(4) * e1 * e2 + 3.0 * e3 * e3 * e1.powi(3) * e2 + e3 * e2.powi(4) * e0
        - e3 * e3 * e1 * e2.powi(3)
        - e3 * e0 * e1.powi(4)
        - 2.0 * e0.powi(4) * e1 * e2
        + e0 * e0 * e1.powi(3) * e2
        - 3.0 * e0 * e0 * e1 * e2.powi(3))
        / (-n12 * w);
    ((x1, y1), (x2, y2))
}

struct GeneralGuards {
    w_denominator: f64,
    plane_family: f64,
    line_x_families: (f64, f64),
    gcd_factor: f64,
    gcd_quartic: f64,
}

fn general_guards(e: &EulerOrientation) -> GeneralGuards {
    let (e0, e1, e2, e3) = (e.e0, e.e1, e.e2, e.e3);
    GeneralGuards {
        w_denominator: e3 * e3 - e0 * e0,
        plane_family: e1 * e1 + e2 * e2,
        line_x_families: (e0 * e1 - e2 * e3, e0 * e2 + e1 * e3),
        gcd_factor: e0 * e1 + e2 * e3,
        gcd_quartic: quartic_invariant(e),
    }
}

/// The two isolated unavoidable positions of a generic orientation: `z` is
/// shared, `(x, y)` differ between the two branches. Fails with
/// [`Error::DegenerateOrientation`] when the orientation belongs to one of
/// the special families (the classifier handles those).
pub fn general_case_positions(o: &EulerOrientation) -> Result<(Pose, Pose)> {
    let e = o.normalize();
    let tol = DEFAULT_ROW_MATCH_TOL;
    let gd = general_guards(&e);
    if gd.w_denominator.abs() <= tol {
        return Err(Error::DegenerateOrientation { guard: "e3^2 - e0^2" });
    }
    if gd.plane_family <= tol {
        return Err(Error::DegenerateOrientation { guard: "e1^2 + e2^2" });
    }
    if gd.line_x_families.0.abs() <= tol {
        return Err(Error::DegenerateOrientation { guard: "e0*e1 - e2*e3" });
    }
    if gd.line_x_families.1.abs() <= tol {
        return Err(Error::DegenerateOrientation { guard: "e0*e2 + e1*e3" });
    }
    if gd.gcd_factor.abs() <= tol {
        return Err(Error::DegenerateOrientation { guard: "e0*e1 + e2*e3" });
    }
    if gd.gcd_quartic.abs() <= tol {
        return Err(Error::DegenerateOrientation { guard: "gcd quartic" });
    }
    let z = general_z(&e);
    let ((x1, y1), (x2, y2)) = general_xy(&e);
    Ok((
        Pose::new(e, Vector3::new(x1, y1, z)),
        Pose::new(e, Vector3::new(x2, y2, z)),
    ))
}

// ---------------------------------------------------------------------------
// classification table
// ---------------------------------------------------------------------------

/// Sign branch of table rows that carry a ± choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Branch::Upper => "+",
            Branch::Lower => "-",
        }
    }
}

/// Position set of a stratum, with concrete numeric data.
#[derive(Debug, Clone, PartialEq)]
pub enum PositionSet {
    /// Horizontal plane `z = const`, `x` and `y` free.
    Plane { z: f64 },
    /// Every position.
    All,
    /// A single point.
    Point { p: Vector3<f64> },
    /// An affine line `point + t·dir`.
    Line { point: Vector3<f64>, dir: Vector3<f64> },
}

impl PositionSet {
    fn line(point: Vector3<f64>, dir: Vector3<f64>) -> Self {
        PositionSet::Line {
            point,
            dir: dir.normalize(),
        }
    }

    /// Does `p` lie in the set (distance below `tol`)?
    pub fn contains(&self, p: &Vector3<f64>, tol: f64) -> bool {
        match self {
            PositionSet::Plane { z } => (p.z - z).abs() < tol,
            PositionSet::All => true,
            PositionSet::Point { p: q } => (p - q).norm() < tol,
            PositionSet::Line { point, dir } => {
                let d = p - point;
                (d - dir * d.dot(dir)).norm() < tol
            }
        }
    }
}

/// One matched row of the unavoidable-singularity classification table.
#[derive(Debug, Clone, PartialEq)]
pub struct UnavoidableStratum {
    /// Table row, 1..=22.
    pub row: u8,
    /// Sign branch for rows that carry one.
    pub branch: Option<Branch>,
    /// Residuals of the row's orientation conditions at the queried
    /// (canonical) orientation; all below the match tolerance.
    pub orientation_residuals: Vec<f64>,
    /// Concrete position set of the stratum.
    pub position_set: PositionSet,
    /// Dimension of the stratum in the 6-dof pose space.
    pub dim: u8,
}

/// A pose sampled from a stratum, for soundness sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSample {
    pub pose: Pose,
    pub row: u8,
    pub branch: Option<Branch>,
}

struct RowCtx {
    e: EulerOrientation,
    tol: f64,
    out: Vec<UnavoidableStratum>,
}

impl RowCtx {
    fn push(
        &mut self,
        row: u8,
        branch: Option<Branch>,
        residuals: Vec<f64>,
        guards: &[f64],
        position: PositionSet,
        dim: u8,
    ) {
        if residuals.iter().all(|r| r.abs() < self.tol)
            && guards.iter().all(|gv| gv.abs() > self.tol)
        {
            self.out.push(UnavoidableStratum {
                row,
                branch,
                orientation_residuals: residuals,
                position_set: position,
                dim,
            });
        }
    }
}

/// Evaluate every row of the classification table at `o` and return all
/// matching strata with concrete position sets. Matching compares the row's
/// orientation-condition residuals against `tol` on the canonical quadruple;
/// rows whose position formulas would divide by a vanishing guard are
/// skipped (their orientations belong to other rows by the case analysis).
pub fn classify_orientation(o: &EulerOrientation, tol: f64) -> Vec<UnavoidableStratum> {
    let e = o.normalize();
    let (e0, e1, e2, e3) = (e.e0, e.e1, e.e2, e.e3);
    let mut ctx = RowCtx {
        e,
        tol,
        out: Vec::new(),
    };

    // rows 1-3: z-axis rotations and half turns about horizontal axes
    ctx.push(1, None, vec![e1, e2], &[], PositionSet::Plane { z: 0.0 }, 3);
    ctx.push(2, Some(Branch::Upper), vec![e1, e2, e0 - e3], &[], PositionSet::All, 3);
    ctx.push(2, Some(Branch::Lower), vec![e1, e2, e0 + e3], &[], PositionSet::All, 3);
    ctx.push(3, None, vec![e0, e3], &[], PositionSet::All, 4);

    // rows 4-6: e0 = ±e3 with e2 = ∓e1 (coupled signs), e1 e3 ≠ 0
    for (branch, res) in [
        (Branch::Upper, vec![e0 - e3, e2 + e1]),
        (Branch::Lower, vec![e0 + e3, e2 - e1]),
    ] {
        let sg = branch.sign();
        let guards = [e1, e3];
        ctx.push(
            4,
            Some(branch),
            res.clone(),
            &guards,
            PositionSet::Plane { z: 2.0 * e1 * e3 },
            3,
        );
        // x = 0, z affine in y
        let z0 = -e3 * (2.0 * e3 * e3 + 2.0 * e1 * e1) / e1;
        let dz = -sg * e3 / e1;
        ctx.push(
            5,
            Some(branch),
            res.clone(),
            &guards,
            PositionSet::line(Vector3::new(0.0, 0.0, z0), Vector3::new(0.0, 1.0, dz)),
            2,
        );
        ctx.push(
            6,
            Some(branch),
            res,
            &guards,
            PositionSet::line(
                Vector3::new(0.0, sg * 2.0 * (e1 * e1 - e3 * e3), -4.0 * e1 * e3),
                Vector3::new(1.0, 0.0, 0.0),
            ),
            2,
        );
    }

    // rows 7-9: e0 = e3, e1 = (2 ± √3) e2, e2 e3 ≠ 0
    for branch in [Branch::Upper, Branch::Lower] {
        let sg = branch.sign();
        let res = vec![e0 - e3, e1 - (2.0 + sg * SQRT3) * e2];
        let guards = [e2, e3];
        ctx.push(
            7,
            Some(branch),
            res.clone(),
            &guards,
            PositionSet::Plane { z: 4.0 * e2 * e3 / (1.0 - sg * SQRT3) },
            3,
        );
        let x0 = (16.0 * e2 * e2 + sg * 8.0 * SQRT3 * e2 * e2 - 4.0 * e3 * e3) / (sg * SQRT3);
        ctx.push(
            8,
            Some(branch),
            res.clone(),
            &guards,
            PositionSet::line(
                Vector3::new(x0, 0.0, 8.0 * e2 * e3 / (sg * SQRT3 - 1.0)),
                Vector3::new(1.0 / (sg * SQRT3), 1.0, 0.0),
            ),
            2,
        );
        let z0 = 2.0 * e3 * (e3 * e3 + 4.0 * e2 * e2 + sg * 2.0 * SQRT3 * e2 * e2)
            / (e2 * (1.0 + sg * SQRT3));
        let dz = -2.0 * e3 / (e2 * (1.0 + sg * SQRT3));
        ctx.push(
            9,
            Some(branch),
            res,
            &guards,
            PositionSet::line(
                Vector3::new(0.0, 0.0, z0),
                Vector3::new(-sg * SQRT3, 1.0, dz),
            ),
            2,
        );
    }

    // rows 10-12: e0 = -e3, e1 = (-2 ± √3) e2, e2 e3 ≠ 0
    for branch in [Branch::Upper, Branch::Lower] {
        let sg = branch.sign();
        let res = vec![e0 + e3, e1 - (-2.0 + sg * SQRT3) * e2];
        let guards = [e2, e3];
        ctx.push(
            10,
            Some(branch),
            res.clone(),
            &guards,
            PositionSet::Plane { z: 4.0 * e2 * e3 / (-sg * SQRT3 - 1.0) },
            3,
        );
        let x0 = (16.0 * e2 * e2 - sg * 8.0 * SQRT3 * e2 * e2 - 4.0 * e3 * e3) / (-sg * SQRT3);
        ctx.push(
            11,
            Some(branch),
            res.clone(),
            &guards,
            PositionSet::line(
                Vector3::new(x0, 0.0, 8.0 * e2 * e3 / (1.0 + sg * SQRT3)),
                Vector3::new(-1.0 / (-sg * SQRT3), 1.0, 0.0),
            ),
            2,
        );
        let z0 = 2.0 * e3 * (e3 * e3 + 4.0 * e2 * e2 - sg * 2.0 * SQRT3 * e2 * e2)
            / (e2 * (sg * SQRT3 - 1.0));
        let dz = 2.0 * e3 / (e2 * (sg * SQRT3 - 1.0));
        ctx.push(
            12,
            Some(branch),
            res,
            &guards,
            PositionSet::line(
                Vector3::new(0.0, 0.0, z0),
                Vector3::new(-sg * SQRT3, 1.0, dz),
            ),
            2,
        );
    }

    // rows 13-16: the remaining two-zero families
    ctx.push(13, None, vec![e0, e2], &[e1, e3], PositionSet::Plane { z: e1 * e3 }, 3);
    ctx.push(14, None, vec![e1, e3], &[e0, e2], PositionSet::Plane { z: -e0 * e2 }, 3);
    ctx.push(
        15,
        None,
        vec![e0, e1],
        &[e2, e3],
        PositionSet::line(Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0)),
        2,
    );
    ctx.push(
        16,
        None,
        vec![e2, e3],
        &[e0, e1],
        PositionSet::line(Vector3::zeros(), Vector3::new(1.0, 0.0, 0.0)),
        2,
    );

    // rows 17-18: shared-divisor orientation loci, z pinned, x and y free
    let gd = general_guards(&ctx.e);
    let z_guards = [gd.w_denominator, gd.plane_family];
    if z_guards.iter().all(|v| v.abs() > tol) {
        let z = general_z(&ctx.e);
        ctx.push(17, None, vec![gd.gcd_factor], &z_guards, PositionSet::Plane { z }, 4);
        ctx.push(18, None, vec![gd.gcd_quartic], &z_guards, PositionSet::Plane { z }, 4);
    }

    // rows 19-20: vanishing x-coefficient families, one free position dof
    {
        let guards19 = [e1, e2, e3, e1 * e1 - e2 * e2];
        let y = 2.0 * e2 * (e1 * e1 + e3 * e3) / e1;
        let z = e3 * (e1.powi(4) - 6.0 * e1 * e1 * e2 * e2 + e2.powi(4))
            / (e1 * (e1 * e1 - e2 * e2));
        ctx.push(
            19,
            None,
            vec![e0 * e1 - e2 * e3],
            &guards19,
            PositionSet::line(Vector3::new(0.0, y, z), Vector3::new(1.0, 0.0, 0.0)),
            3,
        );
        let guards20 = [e1, e2, e3, e1 * e1 - e2 * e2];
        let y = 2.0 * e1 * (e3 * e3 - e2 * e2) / e2;
        ctx.push(
            20,
            None,
            vec![e0 * e2 + e1 * e3],
            &guards20,
            PositionSet::line(
                Vector3::new(0.0, y, -4.0 * e1 * e3),
                Vector3::new(1.0, 0.0, 0.0),
            ),
            3,
        );
    }

    // rows 21-22: generic orientations, two isolated positions
    if let Ok((p21, p22)) = general_case_positions(&ctx.e) {
        ctx.out.push(UnavoidableStratum {
            row: 21,
            branch: None,
            orientation_residuals: Vec::new(),
            position_set: PositionSet::Point { p: p21.s },
            dim: 3,
        });
        ctx.out.push(UnavoidableStratum {
            row: 22,
            branch: None,
            orientation_residuals: Vec::new(),
            position_set: PositionSet::Point { p: p22.s },
            dim: 3,
        });
    }

    ctx.out.sort_by_key(|s| (s.row, s.branch));
    ctx.out
}

// ---------------------------------------------------------------------------
// stratum sampling
// ---------------------------------------------------------------------------

fn draw_mag<R: Rng>(rng: &mut R) -> f64 {
    let v: f64 = rng.random_range(0.3..1.2);
    if rng.random_bool(0.5) {
        v
    } else {
        -v
    }
}

fn box_coord<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-2.0..2.0)
}

/// Minimum guard magnitude kept clear when sampling orientations for rows
/// whose position formulas carry denominators.
const SAMPLE_GUARD_MARGIN: f64 = 0.04;

/// Construct a random pose lying exactly on the given table row (and sign
/// branch where applicable): the orientation satisfies the row conditions by
/// construction and the position is drawn from a bounded patch of the
/// position set. Panics on rows outside 1..=22 or a missing/extra branch.
pub fn sample_row_pose<R: Rng>(row: u8, branch: Option<Branch>, rng: &mut R) -> Pose {
    let sg = branch.map_or(1.0, Branch::sign);
    let needs_branch = matches!(row, 2 | 4..=12);
    assert_eq!(
        branch.is_some(),
        needs_branch,
        "row {row} branch mismatch"
    );
    match row {
        1 => {
            let e = EulerOrientation::new(draw_mag(rng), 0.0, 0.0, draw_mag(rng)).normalize();
            Pose::new(e, Vector3::new(box_coord(rng), box_coord(rng), 0.0))
        }
        2 => {
            let e = EulerOrientation::new(1.0, 0.0, 0.0, sg).normalize();
            Pose::new(e, Vector3::new(box_coord(rng), box_coord(rng), box_coord(rng)))
        }
        3 => {
            let e = EulerOrientation::new(0.0, draw_mag(rng), draw_mag(rng), 0.0).normalize();
            Pose::new(e, Vector3::new(box_coord(rng), box_coord(rng), box_coord(rng)))
        }
        4..=6 => {
            let (t, u) = (draw_mag(rng), draw_mag(rng));
            let e = if sg > 0.0 {
                EulerOrientation::new(t, u, -u, t)
            } else {
                EulerOrientation::new(-t, u, u, t)
            }
            .normalize();
            let (e1, e3) = (e.e1, e.e3);
            let s = match row {
                4 => Vector3::new(box_coord(rng), box_coord(rng), 2.0 * e1 * e3),
                5 => {
                    let y = box_coord(rng);
                    let z = -e3 * (2.0 * e3 * e3 + 2.0 * e1 * e1 + sg * y) / e1;
                    Vector3::new(0.0, y, z)
                }
                _ => Vector3::new(
                    box_coord(rng),
                    sg * 2.0 * (e1 * e1 - e3 * e3),
                    -4.0 * e1 * e3,
                ),
            };
            Pose::new(e, s)
        }
        7..=9 => {
            let (t, u) = (draw_mag(rng), draw_mag(rng));
            let e = EulerOrientation::new(t, (2.0 + sg * SQRT3) * u, u, t).normalize();
            let (e2, e3) = (e.e2, e.e3);
            let s = match row {
                7 => Vector3::new(
                    box_coord(rng),
                    box_coord(rng),
                    4.0 * e2 * e3 / (1.0 - sg * SQRT3),
                ),
                8 => {
                    let y = box_coord(rng);
                    let x = (16.0 * e2 * e2 + sg * 8.0 * SQRT3 * e2 * e2 + y - 4.0 * e3 * e3)
                        / (sg * SQRT3);
                    Vector3::new(x, y, 8.0 * e2 * e3 / (sg * SQRT3 - 1.0))
                }
                _ => {
                    let y = box_coord(rng);
                    let z = 2.0 * e3
                        * (e3 * e3 + 4.0 * e2 * e2 + sg * 2.0 * SQRT3 * e2 * e2 - y)
                        / (e2 * (1.0 + sg * SQRT3));
                    Vector3::new(-sg * SQRT3 * y, y, z)
                }
            };
            Pose::new(e, s)
        }
        10..=12 => {
            let (t, u) = (draw_mag(rng), draw_mag(rng));
            let e = EulerOrientation::new(-t, (-2.0 + sg * SQRT3) * u, u, t).normalize();
            let (e2, e3) = (e.e2, e.e3);
            let s = match row {
                10 => Vector3::new(
                    box_coord(rng),
                    box_coord(rng),
                    4.0 * e2 * e3 / (-sg * SQRT3 - 1.0),
                ),
                11 => {
                    let y = box_coord(rng);
                    let x = (16.0 * e2 * e2 - sg * 8.0 * SQRT3 * e2 * e2 - y - 4.0 * e3 * e3)
                        / (-sg * SQRT3);
                    Vector3::new(x, y, 8.0 * e2 * e3 / (1.0 + sg * SQRT3))
                }
                _ => {
                    let y = box_coord(rng);
                    let z = 2.0 * e3
                        * (e3 * e3 + 4.0 * e2 * e2 - sg * 2.0 * SQRT3 * e2 * e2 + y)
                        / (e2 * (sg * SQRT3 - 1.0));
                    Vector3::new(-sg * SQRT3 * y, y, z)
                }
            };
            Pose::new(e, s)
        }
        13 => {
            let e = EulerOrientation::new(0.0, draw_mag(rng), 0.0, draw_mag(rng)).normalize();
            Pose::new(e, Vector3::new(box_coord(rng), box_coord(rng), e.e1 * e.e3))
        }
        14 => {
            let e = EulerOrientation::new(draw_mag(rng), 0.0, draw_mag(rng), 0.0).normalize();
            Pose::new(e, Vector3::new(box_coord(rng), box_coord(rng), -e.e0 * e.e2))
        }
        15 => {
            let e = EulerOrientation::new(0.0, 0.0, draw_mag(rng), draw_mag(rng)).normalize();
            Pose::new(e, Vector3::new(box_coord(rng), 0.0, 0.0))
        }
        16 => {
            let e = EulerOrientation::new(draw_mag(rng), draw_mag(rng), 0.0, 0.0).normalize();
            Pose::new(e, Vector3::new(box_coord(rng), 0.0, 0.0))
        }
        17 => loop {
            let (e1, e2, e3) = (draw_mag(rng), draw_mag(rng), draw_mag(rng));
            let e = EulerOrientation::new(-e2 * e3 / e1, e1, e2, e3).normalize();
            let gd = general_guards(&e);
            if gd.w_denominator.abs() > SAMPLE_GUARD_MARGIN
                && gd.plane_family > SAMPLE_GUARD_MARGIN
            {
                let z = general_z(&e);
                return Pose::new(e, Vector3::new(box_coord(rng), box_coord(rng), z));
            }
        },
        18 => loop {
            let (e1, e2, e3) = (draw_mag(rng), draw_mag(rng), draw_mag(rng));
            let den = e1 * e1 - 3.0 * e2 * e2;
            if den.abs() < 0.05 {
                continue;
            }
            let root_sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let e0 = e3 * (root_sign * SQRT3 * (e1 * e1 + e2 * e2) - 4.0 * e1 * e2) / den;
            let e = EulerOrientation::new(e0, e1, e2, e3).normalize();
            let gd = general_guards(&e);
            if gd.gcd_quartic.abs() < 1e-12
                && gd.w_denominator.abs() > SAMPLE_GUARD_MARGIN
                && gd.plane_family > SAMPLE_GUARD_MARGIN
            {
                let z = general_z(&e);
                return Pose::new(e, Vector3::new(box_coord(rng), box_coord(rng), z));
            }
        },
        19 => loop {
            let (e1, e2, e3) = (draw_mag(rng), draw_mag(rng), draw_mag(rng));
            if (e1 * e1 - e2 * e2).abs() < 0.05 {
                continue;
            }
            let e = EulerOrientation::new(e2 * e3 / e1, e1, e2, e3).normalize();
            let (e1, e2, e3) = (e.e1, e.e2, e.e3);
            if (e1 * e1 - e2 * e2).abs() < SAMPLE_GUARD_MARGIN {
                continue;
            }
            let y = 2.0 * e2 * (e1 * e1 + e3 * e3) / e1;
            let z = e3 * (e1.powi(4) - 6.0 * e1 * e1 * e2 * e2 + e2.powi(4))
                / (e1 * (e1 * e1 - e2 * e2));
            return Pose::new(e, Vector3::new(box_coord(rng), y, z));
        },
        20 => loop {
            let (e1, e2, e3) = (draw_mag(rng), draw_mag(rng), draw_mag(rng));
            if (e1 * e1 - e2 * e2).abs() < 0.05 {
                continue;
            }
            let e = EulerOrientation::new(-e1 * e3 / e2, e1, e2, e3).normalize();
            let (e1, e2, e3) = (e.e1, e.e2, e.e3);
            if (e1 * e1 - e2 * e2).abs() < SAMPLE_GUARD_MARGIN {
                continue;
            }
            let y = 2.0 * e1 * (e3 * e3 - e2 * e2) / e2;
            return Pose::new(e, Vector3::new(box_coord(rng), y, -4.0 * e1 * e3));
        },
        21 | 22 => loop {
            let e = random_unit_quadruple(rng);
            let gd = general_guards(&e);
            if gd.w_denominator.abs() > SAMPLE_GUARD_MARGIN
                && gd.plane_family > SAMPLE_GUARD_MARGIN
                && gd.line_x_families.0.abs() > SAMPLE_GUARD_MARGIN
                && gd.line_x_families.1.abs() > SAMPLE_GUARD_MARGIN
                && gd.gcd_factor.abs() > SAMPLE_GUARD_MARGIN
                && gd.gcd_quartic.abs() > SAMPLE_GUARD_MARGIN
            {
                let (p21, p22) = general_case_positions(&e).expect("guards already checked");
                return if row == 21 { p21 } else { p22 };
            }
        },
        _ => panic!("row {row} outside the classification table"),
    }
}

/// Uniform random orientation on the quadruple sphere.
pub fn random_unit_quadruple<R: Rng>(rng: &mut R) -> EulerOrientation {
    loop {
        let v = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let n: f64 = v.iter().map(|x| x * x).sum();
        if n > 1e-6 && n <= 1.0 {
            return EulerOrientation::from_array(v).normalize();
        }
    }
}

/// Draw a deterministic sample pose from a stratum returned by
/// [`classify_orientation`].
pub fn stratum_sample(stratum: &UnavoidableStratum, seed: u64) -> StratumSample {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    StratumSample {
        pose: sample_row_pose(stratum.row, stratum.branch, &mut rng),
        row: stratum.row,
        branch: stratum.branch,
    }
}

// ---------------------------------------------------------------------------
// closed-form factor oracle
// ---------------------------------------------------------------------------

/// Special orientation families whose determinant coefficients factor in
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorCase {
    /// `e1 = e2 = 0` (rotations about the z-axis): the quadratic collapses
    /// to its constant term, which factors as
    /// `z³ (e0²+e3²)(e3²−e0²)`.
    ZRotation,
    /// `e0 = e3`: the leading coefficient factors as
    /// `2 e3³ (e1+e2)(e1−2e2−√3 e2)(e1−2e2+√3 e2)`.
    E0EqualsE3,
    /// `e0 = e3` and `e2 = −e1`: linear and constant coefficients factor
    /// fully (leading coefficient vanishes identically).
    E0EqualsE3AntiDiagonal,
    /// Orientations on the shared-divisor locus
    /// `(e0e1+e2e3)(e2²e3²−3e2²e0²+8e2e1e0e3−3e1²e3²+e1²e0²) = 0`, at the
    /// pinned z: all three coefficients vanish for every `x`, `y`.
    GcdLocus,
    /// Generic orientation at the pinned z: the slope `∂c₁/∂x` equals the
    /// shared divisor times the closed-form x-coefficient over the squared
    /// denominator.
    XSlope,
}

impl FactorCase {
    pub fn name(self) -> &'static str {
        match self {
            FactorCase::ZRotation => "z-rotation",
            FactorCase::E0EqualsE3 => "e0 = e3",
            FactorCase::E0EqualsE3AntiDiagonal => "e0 = e3, e2 = -e1",
            FactorCase::GcdLocus => "shared-divisor locus",
            FactorCase::XSlope => "x-slope",
        }
    }
}

/// Closed-form prediction of [`factor_oracle`]. All predictions hold up to a
/// single constant shared across instances of a case (and, empirically,
/// across all cases).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorPrediction {
    /// Predicted coefficient values; `None` means the case predicts nothing
    /// for that coefficient.
    Coefficients {
        c2: Option<f64>,
        c1: Option<f64>,
        c0: Option<f64>,
    },
    /// Predicted slope of the linear coefficient with respect to `x`.
    XSlope { dc1_dx: f64 },
}

const CASE_TOL: f64 = 1e-9;

fn case_guard(case: &'static str, residual: f64) -> Result<()> {
    if residual.abs() > CASE_TOL {
        return Err(Error::CaseMismatch { case, residual });
    }
    Ok(())
}

/// Evaluate the closed-form factorization of `case` at the given orientation
/// and position. The prediction is proportional to the coefficients
/// recovered by [`recover_sigma`] with one common factor per case; a
/// hypothesis violation is reported as [`Error::CaseMismatch`].
pub fn factor_oracle(
    case: FactorCase,
    o: &EulerOrientation,
    position: &Vector3<f64>,
) -> Result<FactorPrediction> {
    let e = o.normalize();
    let (e0, e1, e2, e3) = (e.e0, e.e1, e.e2, e.e3);
    let (x, y, z) = (position.x, position.y, position.z);
    match case {
        FactorCase::ZRotation => {
            case_guard(case.name(), e1)?;
            case_guard(case.name(), e2)?;
            let c0 = z.powi(3) * (e0 * e0 + e3 * e3) * (e3 * e3 - e0 * e0);
            Ok(FactorPrediction::Coefficients {
                c2: Some(0.0),
                c1: Some(0.0),
                c0: Some(c0),
            })
        }
        FactorCase::E0EqualsE3 => {
            case_guard(case.name(), e0 - e3)?;
            let c2 = 2.0
                * e3.powi(3)
                * (e1 + e2)
                * (e1 - 2.0 * e2 - SQRT3 * e2)
                * (e1 - 2.0 * e2 + SQRT3 * e2);
            Ok(FactorPrediction::Coefficients {
                c2: Some(c2),
                c1: None,
                c0: None,
            })
        }
        FactorCase::E0EqualsE3AntiDiagonal => {
            case_guard(case.name(), e0 - e3)?;
            case_guard(case.name(), e2 + e1)?;
            let c1 = 4.0
                * e1
                * e1
                * e3
                * (z - 2.0 * e1 * e3)
                * (e1 * z + 2.0 * e1 * e1 * e3 + 2.0 * e3.powi(3) + y * e3);
            let c0 = -4.0
                * x
                * e1
                * e3
                * (z - 2.0 * e1 * e3)
                * (2.0 * e1 * e3 * y - e3 * e3 * z + e1 * e1 * z);
            Ok(FactorPrediction::Coefficients {
                c2: Some(0.0),
                c1: Some(c1),
                c0: Some(c0),
            })
        }
        FactorCase::GcdLocus => {
            let gd = general_guards(&e);
            if gd.w_denominator.abs() <= CASE_TOL || gd.plane_family <= CASE_TOL {
                return Err(Error::CaseMismatch {
                    case: case.name(),
                    residual: gd.w_denominator.min(gd.plane_family),
                });
            }
            let gcd = gd.gcd_factor * gd.gcd_quartic;
            case_guard(case.name(), gcd.abs().min(gd.gcd_factor.abs().min(gd.gcd_quartic.abs())))?;
            case_guard(case.name(), z - general_z(&e))?;
            Ok(FactorPrediction::Coefficients {
                c2: Some(0.0),
                c1: Some(0.0),
                c0: Some(0.0),
            })
        }
        FactorCase::XSlope => {
            let gd = general_guards(&e);
            if gd.w_denominator.abs() <= CASE_TOL || gd.plane_family <= CASE_TOL {
                return Err(Error::CaseMismatch {
                    case: case.name(),
                    residual: gd.w_denominator.min(gd.plane_family),
                });
            }
            case_guard(case.name(), z - general_z(&e))?;
            let w = gd.w_denominator * gd.plane_family;
            let gcd = gd.gcd_factor * gd.gcd_quartic;
            let coefx = 2.0
                * (e2 * e2 + e1 * e1)
                * (e0 - e3)
                * (e0 + e3)
                * gd.line_x_families.0
                * gd.line_x_families.1;
            Ok(FactorPrediction::XSlope {
                dc1_dx: gcd * coefx / (w * w),
            })
        }
    }
}
