//! Pose, transition, and tolerance types shared by the oracle and the metrics.

use serde::{Deserialize, Serialize};

use super::error::YawError;

/// Map any finite heading onto the half-open interval (-180, 180].
pub fn normalize_yaw(deg: f64) -> Result<f64, YawError> {
    if !deg.is_finite() {
        return Err(YawError::NonFinite(deg));
    }
    Ok(wrap_degrees(deg))
}

pub(crate) fn wrap_degrees(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid may round up to exactly 360 for tiny negative inputs
    let r = if r >= 360.0 { 0.0 } else { r };
    let out = if r > 180.0 { r - 360.0 } else { r };
    if out == 0.0 {
        0.0
    } else {
        out
    }
}

/// Signed shortest turn from `from` to `to`, in (-180, 180].
pub fn yaw_delta(from: f64, to: f64) -> f64 {
    wrap_degrees(to - from)
}

/// Drone pose in the world NED frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    /// North, meters.
    pub x: f64,
    /// East, meters.
    pub y: f64,
    /// Down, meters.
    pub z: f64,
    /// Degrees in (-180, 180]; 0 faces north, positive turns clockwise.
    pub yaw: f64,
    pub airborne: bool,
}

impl Default for DroneState {
    fn default() -> Self {
        Self::grounded()
    }
}

impl DroneState {
    pub const fn grounded() -> Self {
        Self { x: 0.0, y: 0.0, z: 0.0, yaw: 0.0, airborne: false }
    }

    /// The origin pose, already flying.
    pub const fn hovering() -> Self {
        Self { x: 0.0, y: 0.0, z: 0.0, yaw: 0.0, airborne: true }
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Apply a delta; yaw is re-normalized.
    pub fn advanced(&self, t: &Transition) -> DroneState {
        DroneState {
            x: self.x + t.dx,
            y: self.y + t.dy,
            z: self.z + t.dz,
            yaw: wrap_degrees(self.yaw + t.dtheta),
            airborne: self.airborne,
        }
    }
}

/// One action's pose delta `[dx, dy, dz, dtheta]`.
///
/// Serialized as a plain 4-element array, the ground-truth row format.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Transition {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub dtheta: f64,
}

impl Transition {
    pub const fn new(dx: f64, dy: f64, dz: f64, dtheta: f64) -> Self {
        Self { dx, dy, dz, dtheta }
    }

    pub fn between(from: &DroneState, to: &DroneState) -> Self {
        Self {
            dx: to.x - from.x,
            dy: to.y - from.y,
            dz: to.z - from.z,
            dtheta: yaw_delta(from.yaw, to.yaw),
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.dx, self.dy, self.dz, self.dtheta]
    }

    pub fn matches(&self, other: &Transition, tol: &Tolerance) -> bool {
        (self.dx - other.dx).abs() <= tol.position
            && (self.dy - other.dy).abs() <= tol.position
            && (self.dz - other.dz).abs() <= tol.position
            && yaw_delta(other.dtheta, self.dtheta).abs() <= tol.yaw
    }
}

impl From<[f64; 4]> for Transition {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl Serialize for Transition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.as_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Transition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        <[f64; 4]>::deserialize(deserializer).map(Transition::from)
    }
}

/// Element-wise comparison of two transition lists.
pub fn transitions_match(a: &[Transition], b: &[Transition], tol: &Tolerance) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.matches(y, tol))
}

/// Per-axis position tolerance (meters) and yaw tolerance (degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub position: f64,
    pub yaw: f64,
}

impl Tolerance {
    /// For comparing two exact interpreter runs.
    pub const EXACT: Tolerance = Tolerance { position: 1e-9, yaw: 1e-9 };

    pub const fn new(position: f64, yaw: f64) -> Self {
        Self { position, yaw }
    }
}

impl Default for Tolerance {
    /// 0.1 m per axis, 1 degree of yaw.
    fn default() -> Self {
        Self { position: 0.1, yaw: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference: step by whole turns until inside (-180, 180].
    fn brute_force_wrap(mut d: f64) -> f64 {
        while d > 180.0 {
            d -= 360.0;
        }
        while d <= -180.0 {
            d += 360.0;
        }
        d
    }

    #[test]
    fn yaw_examples() {
        assert_eq!(normalize_yaw(270.0).unwrap(), -90.0);
        assert_eq!(normalize_yaw(0.0).unwrap(), 0.0);
        assert_eq!(normalize_yaw(-540.0).unwrap(), 180.0);
        assert_eq!(normalize_yaw(-180.0).unwrap(), 180.0);
        assert_eq!(normalize_yaw(180.0).unwrap(), 180.0);
        assert_eq!(normalize_yaw(-0.0).unwrap().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn yaw_matches_brute_force_over_five_turns() {
        // integer and half degrees over +-5 full turns
        for half_steps in -3600..=3600 {
            let d = half_steps as f64 * 0.5;
            assert_eq!(normalize_yaw(d).unwrap(), brute_force_wrap(d), "d = {d}");
        }
    }

    #[test]
    fn non_finite_yaw_is_rejected() {
        assert!(normalize_yaw(f64::NAN).is_err());
        assert!(normalize_yaw(f64::INFINITY).is_err());
    }

    #[test]
    fn shortest_turn() {
        assert_eq!(yaw_delta(180.0, -90.0), 90.0);
        assert_eq!(yaw_delta(-90.0, 0.0), 90.0);
        assert_eq!(yaw_delta(10.0, -10.0), -20.0);
        assert_eq!(yaw_delta(0.0, 180.0), 180.0);
    }

    #[test]
    fn transition_serializes_as_array() {
        let t = Transition::new(0.0, 0.0, -2.5, 0.0);
        assert_eq!(serde_json::to_string(&t).unwrap(), "[0.0,0.0,-2.5,0.0]");
        let back: Transition = serde_json::from_str("[1, 2, 3, 4]").unwrap();
        assert_eq!(back, Transition::new(1.0, 2.0, 3.0, 4.0));
    }

    #[test]
    fn tolerance_comparison_wraps_yaw() {
        let a = Transition::new(0.0, 0.0, 0.0, 180.0);
        let b = Transition::new(0.05, 0.0, 0.0, -179.5);
        assert!(a.matches(&b, &Tolerance::default()));
        assert!(!a.matches(&b, &Tolerance::EXACT));
    }
}
