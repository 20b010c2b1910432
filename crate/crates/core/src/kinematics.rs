//! Geometry and instantaneous kinematics of the reconfigurable octahedral
//! platform.
//!
//! The mechanism is an octahedral Stewart-Gough platform whose double
//! spherical joints form an equilateral triangle in the platform (circumradius
//! fixed to 1 by the choice of units) and in the base (circumradius `g`, the
//! reconfiguration variable). The three base vertices slide radially on guide
//! lines through the origin, so the base triangle stays equilateral while `g`
//! changes.
//!
//! Coordinates:
//!
//! * platform vertices (moving frame): `m₁,₂ = (1,0,0)`,
//!   `m₃,₄ = (-1/2, √3/2, 0)`, `m₅,₆ = (-1/2, -√3/2, 0)`;
//! * base vertices (fixed frame): `M₄,₅ = g(-1,0,0)`,
//!   `M₆,₁ = g(1/2, -√3/2, 0)`, `M₂,₃ = g(1/2, √3/2, 0)`.
//!
//! Leg `i` connects the platform vertex and base vertex given by
//! [`LEG_PLATFORM_VERTEX`] / [`LEG_BASE_VERTEX`] (legs are 0-indexed in code,
//! 1-indexed in the comments): leg 1: m₁,₂–M₆,₁, leg 2: m₁,₂–M₂,₃,
//! leg 3: m₃,₄–M₂,₃, leg 4: m₃,₄–M₄,₅, leg 5: m₅,₆–M₄,₅, leg 6: m₅,₆–M₆,₁.
//!
//! A pose maps a platform point `m` to `n = R m + s` where `R` is the unit
//! rotation of the canonical Euler quadruple and `s` the translation. Leg
//! spear coordinates are `(l : l̄)` with `l` the unit vector from base anchor
//! to platform anchor and `l̄ = M × l`; the Jacobian stacks the rows
//! `(l̄ᵀ, lᵀ)`, relating actuator rates to the platform screw `(q, q̄)` by
//!
//! ```text
//! ṙᵢ + ġ (ĝᵢ·lᵢ) = l̄ᵢ·q + lᵢ·q̄
//! ```
//!
//! with `ĝᵢ` the outward unit guide vector of leg i's base vertex.

use nalgebra::{Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::orientation::EulerOrientation;

/// Legs collapse below this length are reported as [`Error::DegenerateLeg`].
pub const MIN_LEG_LENGTH: f64 = 1e-12;

/// Default threshold on the normalized determinant below which the Jacobian
/// is treated as singular.
pub const DEFAULT_SINGULARITY_TOL: f64 = 1e-9;

const SQRT3_2: f64 = 0.8660254037844386;

/// Index of the platform vertex (0..3) used by each leg.
pub const LEG_PLATFORM_VERTEX: [usize; 6] = [0, 0, 1, 1, 2, 2];
/// Index of the base vertex (0..3) used by each leg.
pub const LEG_BASE_VERTEX: [usize; 6] = [2, 0, 0, 1, 1, 2];

/// Platform pose: orientation plus translation, in platform-circumradius
/// units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub orientation: EulerOrientation,
    pub s: Vector3<f64>,
}

impl Pose {
    pub fn new(orientation: EulerOrientation, s: Vector3<f64>) -> Self {
        Self { orientation, s }
    }

    pub fn is_valid(&self) -> bool {
        self.orientation.is_valid() && self.s.iter().all(|x| x.is_finite())
    }
}

/// Full mechanism configuration: pose plus base circumradius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub pose: Pose,
    pub g: f64,
}

impl Configuration {
    pub fn new(pose: Pose, g: f64) -> Self {
        Self { pose, g }
    }

    pub fn is_valid(&self) -> bool {
        self.pose.is_valid() && self.g.is_finite() && self.g > 0.0
    }
}

/// Spear (oriented Plücker) coordinates of a leg line: unit direction `l`
/// from base anchor to platform anchor and moment `lbar = M × l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpearLine {
    pub l: Vector3<f64>,
    pub lbar: Vector3<f64>,
}

/// Instantaneous screw of the platform: angular velocity `q` and
/// translational part `qbar` (velocity field `v(p) = qbar + q × p`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformScrew {
    pub q: Vector3<f64>,
    pub qbar: Vector3<f64>,
}

impl PlatformScrew {
    pub const ZERO: Self = Self {
        q: Vector3::new(0.0, 0.0, 0.0),
        qbar: Vector3::new(0.0, 0.0, 0.0),
    };
}

/// Rates of the seven actuated joints: six leg lengths and the base radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointRates {
    pub rdot: [f64; 6],
    pub gdot: f64,
}

/// 6×6 Jacobian with rows `(l̄ᵢᵀ, lᵢᵀ)`.
pub type JacobianMatrix = Matrix6<f64>;

/// The three distinct platform vertices in the moving frame
/// (m₁,₂, m₃,₄, m₅,₆).
pub fn platform_vertices() -> [Vector3<f64>; 3] {
    [
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(-0.5, SQRT3_2, 0.0),
        Vector3::new(-0.5, -SQRT3_2, 0.0),
    ]
}

/// Outward unit guide vectors of the three base vertices
/// (M₂,₃, M₄,₅, M₆,₁ directions); base vertex `k` sits at `g * ĝₖ`.
pub fn guide_units() -> [Vector3<f64>; 3] {
    [
        Vector3::new(0.5, SQRT3_2, 0.0),
        Vector3::new(-1.0, 0.0, 0.0),
        Vector3::new(0.5, -SQRT3_2, 0.0),
    ]
}

/// The three base vertices (M₂,₃, M₄,₅, M₆,₁) for circumradius `g`.
pub fn base_points(g: f64) -> Result<[Vector3<f64>; 3]> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::NonPositiveG(g));
    }
    let u = guide_units();
    Ok([g * u[0], g * u[1], g * u[2]])
}

/// World positions of the three platform vertices under `pose`; invariant
/// under scaling of the Euler quadruple.
pub fn platform_points_world(pose: &Pose) -> [Vector3<f64>; 3] {
    let r = pose.orientation.normalize().rotation_matrix();
    let m = platform_vertices();
    [r * m[0] + pose.s, r * m[1] + pose.s, r * m[2] + pose.s]
}

/// Per-leg anchors in the fixed frame: `(base, platform)` endpoints of all
/// six legs.
pub fn leg_endpoints(config: &Configuration) -> Result<[(Vector3<f64>, Vector3<f64>); 6]> {
    let n = platform_points_world(&config.pose);
    let b = base_points(config.g)?;
    let mut out = [(Vector3::zeros(), Vector3::zeros()); 6];
    for leg in 0..6 {
        out[leg] = (b[LEG_BASE_VERTEX[leg]], n[LEG_PLATFORM_VERTEX[leg]]);
    }
    Ok(out)
}

/// Leg lengths `rᵢ = ‖nᵢ − Mᵢ‖`.
pub fn leg_lengths(config: &Configuration) -> Result<[f64; 6]> {
    let ends = leg_endpoints(config)?;
    let mut r = [0.0; 6];
    for (leg, (base, plat)) in ends.iter().enumerate() {
        let len = (plat - base).norm();
        if len < MIN_LEG_LENGTH {
            return Err(Error::DegenerateLeg { leg, length: len });
        }
        r[leg] = len;
    }
    Ok(r)
}

/// Spear coordinates of leg `leg` (0-based).
pub fn leg_spear(config: &Configuration, leg: usize) -> Result<SpearLine> {
    assert!(leg < 6, "leg index out of range");
    let ends = leg_endpoints(config)?;
    let (base, plat) = ends[leg];
    let d = plat - base;
    let len = d.norm();
    if len < MIN_LEG_LENGTH {
        return Err(Error::DegenerateLeg { leg, length: len });
    }
    let l = d / len;
    Ok(SpearLine {
        l,
        lbar: base.cross(&l),
    })
}

/// Jacobian with unit spear rows `(l̄ᵢᵀ, lᵢᵀ)`.
pub fn jacobian(config: &Configuration) -> Result<JacobianMatrix> {
    let mut j = Matrix6::zeros();
    for leg in 0..6 {
        let sp = leg_spear(config, leg)?;
        for k in 0..3 {
            j[(leg, k)] = sp.lbar[k];
            j[(leg, k + 3)] = sp.l[k];
        }
    }
    Ok(j)
}

/// Jacobian built from the raw (unnormalized) leg lines: row `i` is
/// `((Mᵢ × dᵢ)ᵀ, dᵢᵀ)` with `dᵢ = nᵢ − Mᵢ`. For a fixed pose (canonical
/// quadruple) its determinant is `g³` times a quadratic polynomial in `g`,
/// which is what the singularity-structure analysis exploits.
pub fn jacobian_raw(config: &Configuration) -> Result<JacobianMatrix> {
    let ends = leg_endpoints(config)?;
    let mut j = Matrix6::zeros();
    for (leg, (base, plat)) in ends.iter().enumerate() {
        let d = plat - base;
        let moment = base.cross(&d);
        for k in 0..3 {
            j[(leg, k)] = moment[k];
            j[(leg, k + 3)] = d[k];
        }
    }
    Ok(j)
}

/// Determinant of the unit-row Jacobian.
pub fn det_jacobian(config: &Configuration) -> Result<f64> {
    Ok(jacobian(config)?.determinant())
}

/// Scale-free singularity margin: determinant of the Jacobian with every
/// row normalized to unit Euclidean length (Hadamard bound gives
/// `|margin| ≤ 1`). Equal to `det J / Πᵢ √(1 + ‖l̄ᵢ‖²)` for unit spear rows.
pub fn margin(config: &Configuration) -> Result<f64> {
    let raw = jacobian_raw(config)?;
    Ok(normalized_det(&raw))
}

/// Determinant after row normalization; rows of zero norm yield 0 determinant
/// guarded against NaN. Shared by all margin computations in the crate.
pub(crate) fn normalized_det(j: &Matrix6<f64>) -> f64 {
    let mut scaled = *j;
    for i in 0..6 {
        let norm = scaled.row(i).norm();
        if norm == 0.0 {
            return 0.0;
        }
        for k in 0..6 {
            scaled[(i, k)] /= norm;
        }
    }
    scaled.determinant()
}

/// Guide-projection vector `(ĝᵢ·lᵢ)` of all six legs; the reconfiguration
/// rate enters the velocity relation through these couplings.
pub fn guide_couplings(config: &Configuration) -> Result<[f64; 6]> {
    let u = guide_units();
    let mut c = [0.0; 6];
    for leg in 0..6 {
        let sp = leg_spear(config, leg)?;
        c[leg] = u[LEG_BASE_VERTEX[leg]].dot(&sp.l);
    }
    Ok(c)
}

/// Leg-length rates for a given platform screw and reconfiguration rate:
/// `ṙᵢ = l̄ᵢ·q + lᵢ·q̄ − ġ (ĝᵢ·lᵢ)`.
pub fn inverse_rates(
    config: &Configuration,
    screw: &PlatformScrew,
    gdot: f64,
) -> Result<[f64; 6]> {
    let mut rdot = [0.0; 6];
    let u = guide_units();
    for leg in 0..6 {
        let sp = leg_spear(config, leg)?;
        let coupling = u[LEG_BASE_VERTEX[leg]].dot(&sp.l);
        rdot[leg] = sp.lbar.dot(&screw.q) + sp.l.dot(&screw.qbar) - gdot * coupling;
    }
    Ok(rdot)
}

fn solve_screw(config: &Configuration, rhs: Vector6<f64>, tol: f64) -> Result<PlatformScrew> {
    let j = jacobian(config)?;
    let m = normalized_det(&j);
    if m.abs() < tol {
        return Err(Error::SingularJacobian { margin: m });
    }
    let lu = j.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or(Error::SingularJacobian { margin: m })?;
    Ok(PlatformScrew {
        q: Vector3::new(sol[0], sol[1], sol[2]),
        qbar: Vector3::new(sol[3], sol[4], sol[5]),
    })
}

/// Platform screw realizing the given joint rates, solving
/// `J (q, q̄) = ṙ + ġ (ĝᵢ·lᵢ)`.
pub fn forward_screw(config: &Configuration, rates: &JointRates) -> Result<PlatformScrew> {
    forward_screw_with_tol(config, rates, DEFAULT_SINGULARITY_TOL)
}

/// [`forward_screw`] with an explicit singularity tolerance on the
/// normalized determinant.
pub fn forward_screw_with_tol(
    config: &Configuration,
    rates: &JointRates,
    tol: f64,
) -> Result<PlatformScrew> {
    let coupling = guide_couplings(config)?;
    let mut rhs = Vector6::zeros();
    for leg in 0..6 {
        rhs[leg] = rates.rdot[leg] + rates.gdot * coupling[leg];
    }
    solve_screw(config, rhs, tol)
}

/// The self-motion screw: platform motion with all six legs locked
/// (`ṙ = 0`) and unit reconfiguration rate (`ġ = 1`), i.e. the solution of
/// `J (q, q̄) = (ĝᵢ·lᵢ)`.
pub fn self_motion_screw(config: &Configuration) -> Result<PlatformScrew> {
    self_motion_screw_with_tol(config, DEFAULT_SINGULARITY_TOL)
}

/// [`self_motion_screw`] with an explicit singularity tolerance.
pub fn self_motion_screw_with_tol(config: &Configuration, tol: f64) -> Result<PlatformScrew> {
    let coupling = guide_couplings(config)?;
    solve_screw(config, Vector6::from_row_slice(&coupling), tol)
}

/// Mirror image of a pose across the xz-plane. Conjugates the rotation with
/// `diag(1,-1,1)` — on Euler parameters `(e0, e1, e2, e3) ↦ (e0, -e1, e2,
/// -e3)` — and negates the y-translation. The mechanism is symmetric under
/// this reflection up to the leg permutation (1 2)(3 6)(4 5).
pub fn mirror_pose(pose: &Pose) -> Pose {
    let o = &pose.orientation;
    Pose::new(
        EulerOrientation::new(o.e0, -o.e1, o.e2, -o.e3),
        Vector3::new(pose.s.x, -pose.s.y, pose.s.z),
    )
}

/// Half-turn of a pose about the x-axis of the fixed frame: on Euler
/// parameters `(e0, e1, e2, e3) ↦ (e0, e1, -e2, -e3)`, on the translation
/// `(x, y, z) ↦ (x, -y, -z)`. A second symmetry of the anchor layout, with
/// the same leg permutation as [`mirror_pose`].
pub fn half_turn_x_pose(pose: &Pose) -> Pose {
    let o = &pose.orientation;
    Pose::new(
        EulerOrientation::new(o.e0, o.e1, -o.e2, -o.e3),
        Vector3::new(pose.s.x, -pose.s.y, -pose.s.z),
    )
}

/// Leg permutation induced by [`mirror_pose`] and [`half_turn_x_pose`]:
/// entry `i` is the index of the image leg corresponding to leg `i`.
pub const MIRROR_LEG_PERMUTATION: [usize; 6] = [1, 0, 5, 4, 3, 2];
