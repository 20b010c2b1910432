//! Octahedral platform variant with three sliding-base redundant legs and
//! pairwise-distinct platform joints.
//!
//! The platform is a semi-regular hexagon of circumradius 1 (vertex pairs
//! split by ±`split_angle` around the octahedral directions). Legs 2, 4, 6
//! anchor at fixed base points; legs 1, 3, 5 anchor on straight rails in the
//! base plane, with the rail position `λᵢ ∈ [0, 1]` as the redundant degree
//! of freedom per leg. The base layout comes from vertical tangent planes of
//! the platform circumcircle in its start pose (platform parallel to the
//! base plane at height `h`): each rail lies on the tangent line at its
//! platform vertex projection, and each fixed anchor sits at the
//! intersection of its own tangent line with the next rail's line, which
//! makes the rail endpoints collinear with the preceding fixed anchor by
//! construction.
//!
//! The point of the module: rotating the platform from the start pose by
//! −90° about the vertical center axis lands in a Fichter-type singularity
//! that no choice of `(λ₁, λ₃, λ₅)` escapes, even though the platform joints
//! do not coincide in pairs. [`RedundantOctahedron::lambda_sweep`] checks
//! this on a grid, and [`RedundantOctahedron::lambda_polynomial`] upgrades
//! the grid check to an identity: the raw determinant is multilinear in the
//! three rail positions, so vanishing of the fitted coefficients implies
//! vanishing for every λ.

use nalgebra::{Matrix6, SMatrix, SVector, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::kinematics::{normalized_det, Pose, MIN_LEG_LENGTH};
use crate::orientation::EulerOrientation;

/// Construction constants of the mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildParams {
    /// Height of the platform center above the base plane in the start pose.
    pub height: f64,
    /// Half-length of each rail, centered at the tangency point.
    pub half_length: f64,
    /// Angular split of the platform vertex pairs (radians); the octahedral
    /// limit is 0, the regular hexagon π/6.
    pub split_angle: f64,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            height: 1.0,
            half_length: 0.5,
            split_angle: 15f64.to_radians(),
        }
    }
}

/// Rail positions of the three redundant legs, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedundantParams {
    pub lambda: [f64; 3],
}

impl RedundantParams {
    pub fn new(lambda: [f64; 3]) -> Result<Self> {
        if lambda.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::InvalidParameter(format!(
                "rail positions must lie in [0,1], got {lambda:?}"
            )));
        }
        Ok(Self { lambda })
    }

    pub const CENTER: Self = Self {
        lambda: [0.5, 0.5, 0.5],
    };
}

/// The mechanism: platform vertices, fixed base anchors (legs 2, 4, 6) and
/// rail segments (legs 1, 3, 5), plus the construction constants.
#[derive(Debug, Clone, PartialEq)]
pub struct RedundantOctahedron {
    pub platform: [Vector3<f64>; 6],
    /// Fixed base anchors of legs 2, 4, 6 (indices 1, 3, 5).
    pub fixed_base: [Vector3<f64>; 3],
    /// Rail endpoints `(a, b)` of legs 1, 3, 5 (indices 0, 2, 4).
    pub rails: [(Vector3<f64>, Vector3<f64>); 3],
    pub params: BuildParams,
}

fn tangent_point(theta: f64) -> Vector3<f64> {
    Vector3::new(theta.cos(), theta.sin(), 0.0)
}

fn tangent_dir(theta: f64) -> Vector3<f64> {
    Vector3::new(-theta.sin(), theta.cos(), 0.0)
}

/// Intersection of the unit-circle tangent lines at angles `ta`, `tb`.
fn tangent_intersection(ta: f64, tb: f64) -> Vector3<f64> {
    let det = ta.cos() * tb.sin() - ta.sin() * tb.cos();
    let x = (tb.sin() - ta.sin()) / det;
    let y = (ta.cos() - tb.cos()) / det;
    Vector3::new(x, y, 0.0)
}

impl RedundantOctahedron {
    /// Build the mechanism for the given construction constants.
    pub fn new(params: BuildParams) -> Self {
        let a = params.split_angle;
        let thirds = [0.0, 2.0 * std::f64::consts::FRAC_PI_3, 4.0 * std::f64::consts::FRAC_PI_3];
        // vertex angles: (m1, m2) split around 0°, (m3, m4) around 120°,
        // (m5, m6) around 240°
        let angles = [
            thirds[0] - a,
            thirds[0] + a,
            thirds[1] - a,
            thirds[1] + a,
            thirds[2] - a,
            thirds[2] + a,
        ];
        let platform = angles.map(tangent_point);
        // fixed anchor of leg j (j = 2, 4, 6) on tangent j, moved to the
        // intersection with the following rail line (tangent j+1) so that
        // rail endpoints and the preceding fixed anchor stay collinear
        let fixed_base = [
            tangent_intersection(angles[1], angles[2]),
            tangent_intersection(angles[3], angles[4]),
            tangent_intersection(angles[5], angles[0]),
        ];
        let rails = [0, 2, 4].map(|k| {
            let c = tangent_point(angles[k]);
            let d = tangent_dir(angles[k]);
            (c - params.half_length * d, c + params.half_length * d)
        });
        Self {
            platform,
            fixed_base,
            rails,
            params,
        }
    }

    /// Construction with the default constants.
    pub fn standard() -> Self {
        Self::new(BuildParams::default())
    }

    /// Start pose: platform parallel to the base plane at the construction
    /// height, unrotated.
    pub fn start_pose(&self) -> Pose {
        Pose::new(
            EulerOrientation::IDENTITY,
            Vector3::new(0.0, 0.0, self.params.height),
        )
    }

    /// The −90° rotation of the start pose about the vertical center axis.
    pub fn quarter_turn_pose(&self) -> Pose {
        let half = -std::f64::consts::FRAC_PI_4;
        Pose::new(
            EulerOrientation::new(half.cos(), 0.0, 0.0, half.sin()),
            Vector3::new(0.0, 0.0, self.params.height),
        )
    }

    /// Platform parallel to and inside the base plane (every leg line lies
    /// in one plane there).
    pub fn coplanar_pose(&self) -> Pose {
        Pose::new(EulerOrientation::IDENTITY, Vector3::zeros())
    }

    /// Base anchor of leg `leg` (0-based) at rail positions `lambda`.
    pub fn base_anchor(&self, leg: usize, lambda: &RedundantParams) -> Vector3<f64> {
        if leg.is_multiple_of(2) {
            let (a, b) = self.rails[leg / 2];
            a + (b - a) * lambda.lambda[leg / 2]
        } else {
            self.fixed_base[leg / 2]
        }
    }

    /// Raw-line Jacobian: row `i` is `((Bᵢ × dᵢ)ᵀ, dᵢᵀ)` with `dᵢ` the
    /// unnormalized leg vector. Multilinear in the rail positions.
    pub fn jacobian_raw(&self, pose: &Pose, lambda: &RedundantParams) -> Result<Matrix6<f64>> {
        let r = pose.orientation.normalize().rotation_matrix();
        let mut j = Matrix6::zeros();
        for leg in 0..6 {
            let n = r * self.platform[leg] + pose.s;
            let base = self.base_anchor(leg, lambda);
            let d = n - base;
            if d.norm() < MIN_LEG_LENGTH {
                return Err(Error::DegenerateLeg {
                    leg,
                    length: d.norm(),
                });
            }
            let moment = base.cross(&d);
            for k in 0..3 {
                j[(leg, k)] = moment[k];
                j[(leg, k + 3)] = d[k];
            }
        }
        Ok(j)
    }

    /// Scale-free singularity margin (row-normalized determinant).
    pub fn margin(&self, pose: &Pose, lambda: &RedundantParams) -> Result<f64> {
        Ok(normalized_det(&self.jacobian_raw(pose, lambda)?))
    }

    /// Sweep the margin over a `grid_n³` grid of rail positions.
    pub fn lambda_sweep(&self, pose: &Pose, grid_n: usize) -> Result<LambdaSweep> {
        if grid_n < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points per axis, got {grid_n}"
            )));
        }
        let axis: Vec<f64> = (0..grid_n)
            .map(|k| k as f64 / (grid_n - 1) as f64)
            .collect();
        let mut max_margin = 0.0f64;
        let mut argmax = [0.0; 3];
        let mut skipped = 0usize;
        for &l0 in &axis {
            for &l1 in &axis {
                for &l2 in &axis {
                    let lam = RedundantParams {
                        lambda: [l0, l1, l2],
                    };
                    match self.margin(pose, &lam) {
                        Ok(m) => {
                            if m.abs() > max_margin {
                                max_margin = m.abs();
                                argmax = lam.lambda;
                            }
                        }
                        Err(Error::DegenerateLeg { .. }) => skipped += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        Ok(LambdaSweep {
            grid_n,
            max_margin,
            argmax_lambda: argmax,
            skipped_cells: skipped,
        })
    }

    /// Least-squares fit of the raw determinant over the rail grid in the
    /// multilinear basis `{1, λ₁, λ₂, λ₃, λ₁λ₂, λ₁λ₃, λ₂λ₃, λ₁λ₂λ₃}`,
    /// with determinants pre-divided by the largest Hadamard row bound on
    /// the grid so the coefficients are scale-free. Since each rail position
    /// enters exactly one Jacobian row affinely, the determinant is exactly
    /// multilinear: a tiny fit residual confirms the degree, and vanishing
    /// coefficients prove the determinant vanishes identically in λ.
    pub fn lambda_polynomial(&self, pose: &Pose, grid_n: usize) -> Result<LambdaPolynomial> {
        if grid_n < 2 {
            return Err(Error::InvalidParameter(format!(
                "fit needs at least 2 points per axis, got {grid_n}"
            )));
        }
        let axis: Vec<f64> = (0..grid_n)
            .map(|k| k as f64 / (grid_n - 1) as f64)
            .collect();
        let mut rows: Vec<([f64; 8], f64)> = Vec::new();
        let mut hadamard = 0.0f64;
        for &l0 in &axis {
            for &l1 in &axis {
                for &l2 in &axis {
                    let lam = RedundantParams {
                        lambda: [l0, l1, l2],
                    };
                    let j = match self.jacobian_raw(pose, &lam) {
                        Ok(j) => j,
                        Err(Error::DegenerateLeg { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                    let mut h = 1.0;
                    for i in 0..6 {
                        h *= j.row(i).norm();
                    }
                    hadamard = hadamard.max(h);
                    rows.push((
                        [
                            1.0,
                            l0,
                            l1,
                            l2,
                            l0 * l1,
                            l0 * l2,
                            l1 * l2,
                            l0 * l1 * l2,
                        ],
                        j.determinant(),
                    ));
                }
            }
        }
        if rows.len() < 8 {
            return Err(Error::InvalidParameter(
                "too few nondegenerate grid cells for the fit".into(),
            ));
        }
        // normal equations of the 8-parameter least-squares problem
        let mut ata = SMatrix::<f64, 8, 8>::zeros();
        let mut atb = SVector::<f64, 8>::zeros();
        for (basis, det) in &rows {
            let v = *det / hadamard;
            for p in 0..8 {
                atb[p] += basis[p] * v;
                for q in 0..8 {
                    ata[(p, q)] += basis[p] * basis[q];
                }
            }
        }
        let coeffs = ata
            .lu()
            .solve(&atb)
            .ok_or_else(|| Error::InvalidParameter("degenerate fit grid".into()))?;
        let mut max_residual = 0.0f64;
        for (basis, det) in &rows {
            let model: f64 = (0..8).map(|p| coeffs[p] * basis[p]).sum();
            max_residual = max_residual.max((det / hadamard - model).abs());
        }
        let mut out = [0.0; 8];
        out.copy_from_slice(coeffs.as_slice());
        Ok(LambdaPolynomial {
            coefficients: out,
            max_residual,
        })
    }

    /// Sweep a pose and report whether it is unavoidable at the standard
    /// margin tolerance. `argmax_lambda` points at the best escape attempt.
    pub fn unavoidable_on_grid(&self, pose: &Pose, grid_n: usize, tol: f64) -> Result<bool> {
        Ok(self.lambda_sweep(pose, grid_n)?.max_margin < tol)
    }
}

/// Result of a rail-position grid sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSweep {
    pub grid_n: usize,
    /// Largest |margin| found on the grid.
    pub max_margin: f64,
    /// Rail positions attaining it.
    pub argmax_lambda: [f64; 3],
    /// Grid cells skipped because a leg degenerated.
    pub skipped_cells: usize,
}

/// Multilinear model of the raw determinant in the rail positions.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPolynomial {
    /// Coefficients in the basis `{1, λ₁, λ₂, λ₃, λ₁λ₂, λ₁λ₃, λ₂λ₃,
    /// λ₁λ₂λ₃}`, on Hadamard-normalized determinant values.
    pub coefficients: [f64; 8],
    /// Largest absolute fit residual over the grid (same normalization).
    pub max_residual: f64,
}

impl LambdaPolynomial {
    pub fn max_coefficient(&self) -> f64 {
        self.coefficients
            .iter()
            .fold(0.0f64, |acc, c| acc.max(c.abs()))
    }
}

/// Random rail positions, for spot checks.
pub fn random_lambda<R: Rng>(rng: &mut R) -> RedundantParams {
    RedundantParams {
        lambda: [
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
        ],
    }
}
