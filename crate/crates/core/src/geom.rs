//! Minimal 2D vector math shared by the model and the curve engine.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A 2D point or displacement.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector pointing in direction `angle` (radians, from +x).
    pub fn from_angle(angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Vec2 { x: cos, y: sin }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Direction of this vector in radians, in (-pi, pi].
    pub fn angle(self) -> f64 {
        let a = self.y.atan2(self.x);
        // atan2 returns [-pi, pi]; fold the closed lower end onto +pi
        if a == -std::f64::consts::PI {
            std::f64::consts::PI
        } else {
            a
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Normalizes an angle in radians to the half-open interval (-pi, pi].
pub fn canonical_angle(angle: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut a = angle.rem_euclid(tau); // [0, tau)
    if a > std::f64::consts::PI {
        a -= tau;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn canonical_angle_range() {
        assert_eq!(canonical_angle(0.0), 0.0);
        assert_eq!(canonical_angle(PI), PI);
        assert_eq!(canonical_angle(-PI), PI);
        assert!((canonical_angle(396f64.to_radians()) - 36f64.to_radians()).abs() < 1e-12);
        assert!((canonical_angle(-3.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn from_angle_matches_trig() {
        let v = Vec2::from_angle(PI / 6.0);
        assert!((v.x - (PI / 6.0).cos()).abs() < 1e-15);
        assert!((v.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn angle_round_trip() {
        for &a in &[0.0, 0.3, -1.2, 2.9, PI] {
            assert!((Vec2::from_angle(a).angle() - a).abs() < 1e-12);
        }
    }
}
