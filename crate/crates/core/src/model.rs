//! Angles, polarization vectors, beam-splitter settings and the detector
//! encoding shared by every other module.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

/// An angle in radians.
///
/// Angles are never normalized: every consumer feeds them through `cos`/`sin`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(pub f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn radians(rad: f64) -> Self {
        Angle(rad)
    }

    pub fn degrees(deg: f64) -> Self {
        Angle(deg.to_radians())
    }

    pub fn rad(self) -> f64 {
        self.0
    }

    /// The orthogonal direction, rotated by +π/2.
    pub fn perp(self) -> Angle {
        Angle(self.0 + FRAC_PI_2)
    }
}

impl std::ops::Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle(self.0 - rhs.0)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A vector in the polarization plane.
///
/// Built from an angle it has unit norm; the beam-splitter memory uses the
/// same type with norm ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UnitVec2 {
    pub x: f64,
    pub y: f64,
}

impl UnitVec2 {
    pub const ZERO: UnitVec2 = UnitVec2 { x: 0.0, y: 0.0 };

    pub fn dot(self, other: UnitVec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `s·self + t·other`
    pub fn combine(self, s: f64, other: UnitVec2, t: f64) -> UnitVec2 {
        UnitVec2 {
            x: s * self.x + t * other.x,
            y: s * self.y + t * other.y,
        }
    }
}

/// `(cos θ, sin θ)`
pub fn unit_vec(theta: Angle) -> UnitVec2 {
    let (s, c) = theta.0.sin_cos();
    UnitVec2 { x: c, y: s }
}

/// `(−sin θ, cos θ)`
pub fn perp(theta: Angle) -> UnitVec2 {
    let (s, c) = theta.0.sin_cos();
    UnitVec2 { x: -s, y: c }
}

/// Orientations of the six beam splitters. BS1 uses `a`, BS2 uses `b`,
/// BS3 and BS4 share `c`, BS5 and BS6 share `d`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Settings {
    pub a: Angle,
    pub b: Angle,
    pub c: Angle,
    pub d: Angle,
}

impl Settings {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Settings {
            a: Angle(a),
            b: Angle(b),
            c: Angle(c),
            d: Angle(d),
        }
    }

    /// `cos 2(a − b)`
    pub fn cos2_ab(&self) -> f64 {
        (2.0 * (self.a.0 - self.b.0)).cos()
    }

    /// `cos 2(a − c)`
    pub fn cos2_ac(&self) -> f64 {
        (2.0 * (self.a.0 - self.c.0)).cos()
    }

    /// `cos 2(b − d)`
    pub fn cos2_bd(&self) -> f64 {
        (2.0 * (self.b.0 - self.d.0)).cos()
    }
}

/// A two-valued beam-splitter output port label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinValue {
    Plus,
    Minus,
}

impl SpinValue {
    pub fn value(self) -> i32 {
        match self {
            SpinValue::Plus => 1,
            SpinValue::Minus => -1,
        }
    }

    pub fn from_sign(positive: bool) -> Self {
        if positive {
            SpinValue::Plus
        } else {
            SpinValue::Minus
        }
    }

    pub fn is_plus(self) -> bool {
        self == SpinValue::Plus
    }
}

impl TryFrom<i32> for SpinValue {
    type Error = i32;

    fn try_from(v: i32) -> Result<Self, i32> {
        match v {
            1 => Ok(SpinValue::Plus),
            -1 => Ok(SpinValue::Minus),
            other => Err(other),
        }
    }
}

impl std::ops::Mul for SpinValue {
    type Output = i32;
    fn mul(self, rhs: SpinValue) -> i32 {
        self.value() * rhs.value()
    }
}

/// Which of the four detectors of one station fires for the path
/// `(s_first, s_second)`.
///
/// Solving `S_first = x1 + x2 − x3 − x4`, `S_second = x1 − x2 + x3 − x4`
/// with exactly one `x_i = 1` gives `(+,+) → 1`, `(+,−) → 2`, `(−,+) → 3`,
/// `(−,−) → 4`.
pub fn detector_index(s_first: SpinValue, s_second: SpinValue) -> u8 {
    match (s_first, s_second) {
        (SpinValue::Plus, SpinValue::Plus) => 1,
        (SpinValue::Plus, SpinValue::Minus) => 2,
        (SpinValue::Minus, SpinValue::Plus) => 3,
        (SpinValue::Minus, SpinValue::Minus) => 4,
    }
}

/// Inverse of [`detector_index`]. Returns `None` outside `1..=4`.
pub fn spin_values(detector: u8) -> Option<(SpinValue, SpinValue)> {
    use SpinValue::*;
    match detector {
        1 => Some((Plus, Plus)),
        2 => Some((Plus, Minus)),
        3 => Some((Minus, Plus)),
        4 => Some((Minus, Minus)),
        _ => None,
    }
}

/// The 0/1 detector variables `x_1..x_4` for one station.
pub fn detector_bits(detector: u8) -> [u8; 4] {
    let mut x = [0u8; 4];
    if (1..=4).contains(&detector) {
        x[usize::from(detector - 1)] = 1;
    }
    x
}
