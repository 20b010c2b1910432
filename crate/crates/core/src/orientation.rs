//! Orientations as homogeneous Euler parameters.
//!
//! An orientation is a quadruple `(e0 : e1 : e2 : e3)` with `e0` the scalar
//! part; any nonzero scalar multiple describes the same rotation. All
//! predicates in this crate are invariant under that scaling, and numeric
//! work happens on the canonical representative with `N = e0² + e1² + e2² +
//! e3² = 1`, `e0 ≥ 0` (ties broken by the first nonzero component).

use nalgebra::{Matrix3, Vector3};

/// Homogeneous Euler-parameter quadruple `(e0 : e1 : e2 : e3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerOrientation {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

impl EulerOrientation {
    pub const IDENTITY: Self = Self::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(e0: f64, e1: f64, e2: f64, e3: f64) -> Self {
        Self { e0, e1, e2, e3 }
    }

    pub fn from_array(e: [f64; 4]) -> Self {
        Self::new(e[0], e[1], e[2], e[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.e0, self.e1, self.e2, self.e3]
    }

    /// `N = e0² + e1² + e2² + e3²`.
    pub fn norm_squared(&self) -> f64 {
        self.e0 * self.e0 + self.e1 * self.e1 + self.e2 * self.e2 + self.e3 * self.e3
    }

    /// A quadruple is usable when all components are finite and not all zero.
    pub fn is_valid(&self) -> bool {
        let a = self.to_array();
        a.iter().all(|x| x.is_finite()) && self.norm_squared() > 0.0
    }

    /// Canonical representative: unit norm, `e0 ≥ 0`, ties broken by making
    /// the first nonzero component positive.
    pub fn normalize(&self) -> Self {
        let n = self.norm_squared().sqrt();
        let mut e = [self.e0 / n, self.e1 / n, self.e2 / n, self.e3 / n];
        let lead = e.iter().copied().find(|x| *x != 0.0).unwrap_or(1.0);
        if lead < 0.0 {
            for x in &mut e {
                *x = -*x;
            }
        }
        Self::from_array(e)
    }

    /// The rotation matrix written directly in the homogeneous parameters:
    ///
    /// ```text
    ///     | e0²+e1²-e2²-e3²   2(e1e2-e0e3)     2(e1e3+e0e2)   |
    /// R = | 2(e1e2+e0e3)      e0²-e1²+e2²-e3²  2(e2e3-e0e1)   |
    ///     | 2(e1e3-e0e2)      2(e2e3+e0e1)     e0²-e1²-e2²+e3² |
    /// ```
    ///
    /// Unnormalized: `R Rᵀ = N² I` and `det R = N³`. On the canonical
    /// representative (`N = 1`) this is a proper rotation.
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let (e0, e1, e2, e3) = (self.e0, self.e1, self.e2, self.e3);
        Matrix3::new(
            e0 * e0 + e1 * e1 - e2 * e2 - e3 * e3,
            2.0 * (e1 * e2 - e0 * e3),
            2.0 * (e1 * e3 + e0 * e2),
            2.0 * (e1 * e2 + e0 * e3),
            e0 * e0 - e1 * e1 + e2 * e2 - e3 * e3,
            2.0 * (e2 * e3 - e0 * e1),
            2.0 * (e1 * e3 - e0 * e2),
            2.0 * (e2 * e3 + e0 * e1),
            e0 * e0 - e1 * e1 - e2 * e2 + e3 * e3,
        )
    }

    /// Rotate a vector by the canonical representative (unit rotation).
    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.normalize().rotation_matrix() * v
    }

    fn dot(&self, other: &Self) -> f64 {
        self.e0 * other.e0 + self.e1 * other.e1 + self.e2 * other.e2 + self.e3 * other.e3
    }

    /// Quaternion conjugate (inverse rotation for unit quadruples).
    pub fn conjugate(&self) -> Self {
        Self::new(self.e0, -self.e1, -self.e2, -self.e3)
    }

    /// Hamilton product; composes rotations (`self` applied after `other`).
    pub fn compose(&self, other: &Self) -> Self {
        let (a0, a1, a2, a3) = (self.e0, self.e1, self.e2, self.e3);
        let (b0, b1, b2, b3) = (other.e0, other.e1, other.e2, other.e3);
        Self::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }

    /// Spherical linear interpolation along the shorter arc between the
    /// canonical representatives of `self` and `other`.
    pub fn slerp(&self, other: &Self, t: f64) -> Self {
        let a = self.normalize();
        let mut b = other.normalize();
        let mut d = a.dot(&b);
        if d < 0.0 {
            b = Self::new(-b.e0, -b.e1, -b.e2, -b.e3);
            d = -d;
        }
        d = d.min(1.0);
        let theta = d.acos();
        if theta < 1e-12 {
            return a;
        }
        let (sa, sb) = (
            ((1.0 - t) * theta).sin() / theta.sin(),
            (t * theta).sin() / theta.sin(),
        );
        Self::new(
            sa * a.e0 + sb * b.e0,
            sa * a.e1 + sb * b.e1,
            sa * a.e2 + sb * b.e2,
            sa * a.e3 + sb * b.e3,
        )
        .normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_rotation_matrix() {
        let r = EulerOrientation::IDENTITY.rotation_matrix();
        assert_eq!(r, Matrix3::identity());
    }

    #[test]
    fn quarter_turn_about_z_unnormalized() {
        // (1,0,0,1) has N = 2; the raw matrix is the 90° z-rotation scaled by 2.
        let r = EulerOrientation::new(1.0, 0.0, 0.0, 1.0).rotation_matrix();
        let expect = Matrix3::new(0.0, -2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 2.0);
        assert_eq!(r, expect);
    }

    #[test]
    fn rotation_matrix_orthogonality_scaled() {
        let s105 = 105f64.sqrt();
        for o in [
            EulerOrientation::new(0.3, -1.2, 0.7, 2.1),
            // unit quadruple with exact surd components
            EulerOrientation::new(
                4.0 * s105 / 175.0,
                s105 / 21.0,
                8.0 * s105 / 105.0,
                -16.0 * s105 / 525.0,
            ),
        ] {
            let n = o.norm_squared();
            let r = o.rotation_matrix();
            let rrt = r * r.transpose();
            assert_relative_eq!(rrt, Matrix3::identity() * n * n, epsilon = 1e-12);
            assert_relative_eq!(r.determinant(), n * n * n, max_relative = 1e-12);
        }
    }

    #[test]
    fn normalize_is_projective() {
        let o = EulerOrientation::new(0.4, -0.2, 0.8, 0.1);
        // exact power-of-two scalings normalize to the bit-identical quadruple
        for lambda in [2.0, 0.5, -2.0, -8.0] {
            let scaled = EulerOrientation::new(
                lambda * o.e0,
                lambda * o.e1,
                lambda * o.e2,
                lambda * o.e3,
            );
            assert_eq!(scaled.normalize().to_array(), o.normalize().to_array());
        }
    }

    #[test]
    fn normalize_sign_convention() {
        let o = EulerOrientation::new(0.0, -0.6, 0.8, 0.0).normalize();
        assert!(o.e1 > 0.0);
        assert_relative_eq!(o.norm_squared(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn slerp_endpoints_and_midpoint() {
        let a = EulerOrientation::IDENTITY;
        let b = EulerOrientation::new(1.0, 0.0, 0.0, 1.0); // 90° about z
        assert_relative_eq!(
            a.slerp(&b, 0.0).to_array()[..],
            a.normalize().to_array()[..],
            epsilon = 1e-15
        );
        // midpoint of identity -> 90° is the 45° rotation
        let mid = a.slerp(&b, 0.5);
        let expect = EulerOrientation::new((22.5f64).to_radians().cos(), 0.0, 0.0, (22.5f64).to_radians().sin());
        assert_relative_eq!(mid.to_array()[..], expect.to_array()[..], epsilon = 1e-12);
    }

    #[test]
    fn slerp_takes_shorter_arc() {
        let a = EulerOrientation::new(1.0, 0.0, 0.0, 0.1).normalize();
        let anti = EulerOrientation::new(-a.e0, -a.e1, -a.e2, -(a.e3 + 0.05));
        let mid = a.slerp(&anti, 0.5);
        // stays close to a rather than swinging through the far side
        assert!(mid.dot(&a) > 0.99);
    }
}
