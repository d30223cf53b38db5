//! Closed-form predictions the simulation is checked against.
//!
//! Every model here has the same two-stage structure: a joint factor for the
//! first-stage outcomes `(S1, S2)` times Malus-law factors
//! `[1 + S1·S3·cos 2(a − c)] / 2` and `[1 + S2·S4·cos 2(b − d)] / 2` for the
//! second stage. Models differ only in the first factor:
//!
//! | model       | first-stage factor `× 1/4`                         |
//! |-------------|----------------------------------------------------|
//! | Maxwell     | `I0² [1 + ½ S1 S2 cos 2(a − b + φ0)]`              |
//! | quantum     | `1 − S1 S2 cos 2(a − b)`                           |
//! | flipped     | `1 + S1 S2 cos 2(a − b)`                           |
//! | product     | `[1 + S1 cos 2(a − p)] [1 + S2 cos 2(b − q)]`      |
//!
//! Moments come two ways: by summing a [`JointDistribution16`], and from
//! [`two_stage_moments`], which replaces `S3` by `S1·cos 2(a − c)` and `S4` by
//! `S2·cos 2(b − d)` (their conditional expectations). The two routes are
//! cross-checked in the tests.

pub mod trace;

use serde::{Deserialize, Serialize};

use crate::model::{Angle, Settings, SpinValue};
use crate::moments::{outcome_values, MomentTable, Subset};

pub use trace::{quantum_joint_trace, rho_q, rho_q_eigenvalues, rho_q_is_density, HermitianMatrix4};

/// Which theory produced a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OracleModel {
    /// Classical optics, beams differing in polarization by `phi0`.
    Maxwell { phi0: f64 },
    /// Singlet state, closed form.
    Quantum,
    /// Singlet state, evaluated as a trace over the 4×4 density matrix.
    QuantumTrace,
    /// Quantum expression with the sign of the `S1·S2` term flipped.
    Flipped,
    /// Fixed polarizations `p`, `q` (product state, or classical beams with `I0 = 1`).
    Product { p: f64, q: f64 },
}

/// Probabilities (or normalized intensities) of the sixteen outcomes
/// `(S1, S2, S3, S4)`, indexed as in [`crate::moments`].
///
/// All conditions besides the settings are implied by `model`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution16 {
    pub model: OracleModel,
    pub i0: f64,
    pub entries: [f64; 16],
}

impl JointDistribution16 {
    pub fn from_fn(model: OracleModel, i0: f64, mut f: impl FnMut([i32; 4]) -> f64) -> Self {
        let entries = std::array::from_fn(|o| f(outcome_values(o).map(SpinValue::value)));
        JointDistribution16 { model, i0, entries }
    }

    pub fn get(&self, s: [SpinValue; 4]) -> f64 {
        self.entries[crate::moments::outcome_index(s)]
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// `Σ_S (∏_{i∈s} S_i) · P(S)`
    pub fn moment(&self, s: Subset) -> f64 {
        self.entries
            .iter()
            .enumerate()
            .map(|(o, p)| s.sign(o) as f64 * p)
            .sum()
    }

    pub fn moments(&self) -> MomentTable {
        MomentTable::from_fn(|s| self.moment(s))
    }

    /// Sum over `S3`, `S4`.
    pub fn pair_marginal(&self, s1: SpinValue, s2: SpinValue) -> f64 {
        self.entries
            .iter()
            .enumerate()
            .filter(|(o, _)| {
                let v = outcome_values(*o);
                v[0] == s1 && v[1] == s2
            })
            .map(|(_, p)| p)
            .sum()
    }
}

fn cos2(x: f64) -> f64 {
    (2.0 * x).cos()
}

fn second_stage(settings: &Settings, s: [i32; 4]) -> f64 {
    let (s1, s2, s3, s4) = (s[0] as f64, s[1] as f64, s[2] as f64, s[3] as f64);
    (1.0 + s1 * s3 * settings.cos2_ac()) * (1.0 + s2 * s4 * settings.cos2_bd())
}

/// Intensity for one source angle `φ`: `I0² · ½[1 + S1 cos 2(φ − a)] · ½[1 + S2 cos 2(φ − b + φ0)]`.
pub fn maxwell_integrand(settings: &Settings, phi: f64, phi0: f64, i0: f64, s1: SpinValue, s2: SpinValue) -> f64 {
    let (s1, s2) = (s1.value() as f64, s2.value() as f64);
    i0 * i0 * (1.0 + s1 * cos2(phi - settings.a.0)) / 2.0 * (1.0 + s2 * cos2(phi - settings.b.0 + phi0)) / 2.0
}

/// The integrand averaged over a uniform `φ`: `I0²/4 · [1 + ½ S1 S2 cos 2(a − b + φ0)]`.
pub fn maxwell_pair(settings: &Settings, phi0: f64, i0: f64, s1: SpinValue, s2: SpinValue) -> f64 {
    let s12 = (s1 * s2) as f64;
    i0 * i0 / 4.0 * (1.0 + 0.5 * s12 * cos2(settings.a.0 - settings.b.0 + phi0))
}

pub fn maxwell_joint(settings: &Settings, phi0: f64, i0: f64) -> JointDistribution16 {
    let c = cos2(settings.a.0 - settings.b.0 + phi0);
    JointDistribution16::from_fn(OracleModel::Maxwell { phi0 }, i0, |s| {
        i0 * i0 / 16.0 * (1.0 + 0.5 * (s[0] * s[1]) as f64 * c) * second_stage(settings, s)
    })
}

/// `P(S1, S2) = [1 − S1 S2 cos 2(a − b)] / 4`
pub fn quantum_pair(settings: &Settings, s1: SpinValue, s2: SpinValue) -> f64 {
    (1.0 - (s1 * s2) as f64 * settings.cos2_ab()) / 4.0
}

pub fn quantum_joint(settings: &Settings) -> JointDistribution16 {
    let c = settings.cos2_ab();
    JointDistribution16::from_fn(OracleModel::Quantum, 1.0, |s| {
        (1.0 - (s[0] * s[1]) as f64 * c) * second_stage(settings, s) / 16.0
    })
}

pub fn flipped_joint(settings: &Settings) -> JointDistribution16 {
    let c = settings.cos2_ab();
    JointDistribution16::from_fn(OracleModel::Flipped, 1.0, |s| {
        (1.0 + (s[0] * s[1]) as f64 * c) * second_stage(settings, s) / 16.0
    })
}

/// `P(S1, S2) = ½[1 + S1 cos 2(a − p)] · ½[1 + S2 cos 2(b − q)]`
pub fn product_pair(settings: &Settings, p: Angle, q: Angle, s1: SpinValue, s2: SpinValue) -> f64 {
    (1.0 + s1.value() as f64 * cos2(settings.a.0 - p.0)) / 2.0
        * (1.0 + s2.value() as f64 * cos2(settings.b.0 - q.0))
        / 2.0
}

pub fn product_joint(settings: &Settings, p: Angle, q: Angle) -> JointDistribution16 {
    let (cp, cq) = (cos2(settings.a.0 - p.0), cos2(settings.b.0 - q.0));
    JointDistribution16::from_fn(OracleModel::Product { p: p.0, q: q.0 }, 1.0, |s| {
        (1.0 + s[0] as f64 * cp) * (1.0 + s[1] as f64 * cq) * second_stage(settings, s) / 16.0
    })
}

/// First-stage data of a two-stage model: normalization and the moments
/// `⟨S1⟩`, `⟨S2⟩`, `⟨S1 S2⟩` of the `(S1, S2)` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstStageMoments {
    pub norm: f64,
    pub m1: f64,
    pub m2: f64,
    pub m12: f64,
}

/// All fifteen moments of a two-stage model in closed form.
pub fn two_stage_moments(first: FirstStageMoments, settings: &Settings) -> MomentTable {
    let (c13, c24) = (settings.cos2_ac(), settings.cos2_bd());
    MomentTable::from_fn(|s| {
        let mut coef = 1.0;
        if s.contains(3) {
            coef *= c13;
        }
        if s.contains(4) {
            coef *= c24;
        }
        let odd1 = s.contains(1) != s.contains(3);
        let odd2 = s.contains(2) != s.contains(4);
        coef * match (odd1, odd2) {
            (false, false) => first.norm,
            (true, false) => first.m1,
            (false, true) => first.m2,
            (true, true) => first.m12,
        }
    })
}

/// `K̂` moments: `K̂12 = ½ I0² cos 2(a − b + φ0)`, `K̂13 = I0² cos 2(a − c)`,
/// ..., odd orders zero, `K̂1234 = I0² cos 2(a − c) cos 2(b − d)`.
pub fn maxwell_moments(settings: &Settings, phi0: f64, i0: f64) -> MomentTable {
    let i2 = i0 * i0;
    two_stage_moments(
        FirstStageMoments {
            norm: i2,
            m1: 0.0,
            m2: 0.0,
            m12: 0.5 * i2 * cos2(settings.a.0 - settings.b.0 + phi0),
        },
        settings,
    )
}

/// `Ê12 = −cos 2(a − b)`, `Ê13 = cos 2(a − c)`, ..., odd orders zero.
pub fn quantum_moments(settings: &Settings) -> MomentTable {
    two_stage_moments(
        FirstStageMoments {
            norm: 1.0,
            m1: 0.0,
            m2: 0.0,
            m12: -settings.cos2_ab(),
        },
        settings,
    )
}

pub fn flipped_moments(settings: &Settings) -> MomentTable {
    two_stage_moments(
        FirstStageMoments {
            norm: 1.0,
            m1: 0.0,
            m2: 0.0,
            m12: settings.cos2_ab(),
        },
        settings,
    )
}

/// `Ê1 = cos 2(a − p)`, `Ê2 = cos 2(b − q)`, `Ê12 = Ê1 Ê2`, ...
pub fn product_moments(settings: &Settings, p: Angle, q: Angle) -> MomentTable {
    let (cp, cq) = (cos2(settings.a.0 - p.0), cos2(settings.b.0 - q.0));
    two_stage_moments(
        FirstStageMoments {
            norm: 1.0,
            m1: cp,
            m2: cq,
            m12: cp * cq,
        },
        settings,
    )
}

/// Closed-form moments for a model.
pub fn model_moments(model: OracleModel, settings: &Settings) -> MomentTable {
    match model {
        OracleModel::Maxwell { phi0 } => maxwell_moments(settings, phi0, 1.0),
        OracleModel::Quantum | OracleModel::QuantumTrace => quantum_moments(settings),
        OracleModel::Flipped => flipped_moments(settings),
        OracleModel::Product { p, q } => product_moments(settings, Angle(p), Angle(q)),
    }
}

/// An outcome function `g(S1, S2, S3, S4)` with its extreme values.
#[derive(Debug, Clone, Copy)]
pub struct BellFunction {
    pub name: &'static str,
    pub g: fn([i32; 4]) -> i32,
    pub lower: f64,
    pub upper: f64,
}

/// `S1 S2 + S1 S3 + S2 S3 ∈ [−1, 3]`
pub const BELL_TRIANGLE: BellFunction = BellFunction {
    name: "S1S2+S1S3+S2S3",
    g: |s| s[0] * s[1] + s[0] * s[2] + s[1] * s[2],
    lower: -1.0,
    upper: 3.0,
};

/// `S1 S3 + S1 S4 + S2 S3 − S2 S4 ∈ [−2, 2]`
pub const BELL_CHSH: BellFunction = BellFunction {
    name: "S1S3+S1S4+S2S3-S2S4",
    g: |s| s[0] * s[2] + s[0] * s[3] + s[1] * s[2] - s[1] * s[3],
    lower: -2.0,
    upper: 2.0,
};

/// `Σ_S g(S) P(S)`
pub fn bell_functional(dist: &JointDistribution16, g: impl Fn([i32; 4]) -> f64) -> f64 {
    dist.entries
        .iter()
        .enumerate()
        .map(|(o, p)| g(outcome_values(o).map(SpinValue::value)) * p)
        .sum()
}
