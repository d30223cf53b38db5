//! Photon source, beam-splitter branching and the retardation laws.
//!
//! A beam splitter sends a photon with polarization `φ` to the `+1` port with
//! probability `cos²(φ − a)` and re-polarizes it along `a` (or `a⊥` for the
//! `−1` port). While passing, the photon is delayed by
//!
//! ```text
//! τ = r′ · t_max · |sin 2(φ − a)|^α · g(u, x)^β
//! ```
//!
//! where `x` is the incoming polarization, `u` is the splitter's memory and
//! `g` depends on the law: `|1 − x·u| / 2` with `u ← x` (memoryless), or
//! `|1 − u·u| / 2` with `u ← γu + (1 − γ)x` (learning). Either way the delay
//! switches itself off once the incoming polarization stops changing.

use serde::{Deserialize, Serialize};

use crate::model::{unit_vec, Angle, SpinValue, UnitVec2};
use crate::rng::RandomStream;

/// How the source polarizes the two photons of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PolarizationMode {
    /// Photon 1 at a uniform random `φ`, photon 2 at `φ + π/2`.
    OrthogonalRandom,
    /// Both photons at the same uniform random `φ`.
    ParallelRandom,
    /// Constant polarizations `p` (photon 1) and `q` (photon 2).
    Fixed { p: Angle, q: Angle },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Photon {
    pub phi: Angle,
    /// Accumulated retardation in dimensionless time units.
    pub tau_total: f64,
}

impl Photon {
    pub fn new(phi: Angle) -> Self {
        Photon { phi, tau_total: 0.0 }
    }

    pub fn polarization(&self) -> UnitVec2 {
        unit_vec(self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RetardationLaw {
    /// No delays at all.
    None,
    /// Memory holds the previous photon's polarization.
    Memoryless,
    /// Deterministic learning machine with rate `gamma ∈ (0, 1)`.
    Learning { gamma: f64 },
}

/// Parameters shared by every beam splitter of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetardationParams {
    pub t_max: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for RetardationParams {
    fn default() -> Self {
        RetardationParams {
            t_max: 5000.0,
            alpha: 4.0,
            beta: 0.5,
        }
    }
}

/// Emit one photon pair. `Fixed` consumes no draw.
pub fn emit_pair(mode: PolarizationMode, stream: &mut RandomStream) -> (Photon, Photon) {
    match mode {
        PolarizationMode::OrthogonalRandom => {
            let phi = Angle(stream.uniform_angle());
            (Photon::new(phi), Photon::new(phi.perp()))
        }
        PolarizationMode::ParallelRandom => {
            let phi = Angle(stream.uniform_angle());
            (Photon::new(phi), Photon::new(phi))
        }
        PolarizationMode::Fixed { p, q } => (Photon::new(p), Photon::new(q)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamSplitter {
    orientation: Angle,
    orthogonal: Angle,
    memory: UnitVec2,
    law: RetardationLaw,
    params: RetardationParams,
}

impl BeamSplitter {
    /// A splitter with empty memory `u = (0, 0)`.
    pub fn new(orientation: Angle, law: RetardationLaw, params: RetardationParams) -> Self {
        BeamSplitter {
            orientation,
            orthogonal: orientation.perp(),
            memory: UnitVec2::ZERO,
            law,
            params,
        }
    }

    pub fn with_memory(mut self, u: UnitVec2) -> Self {
        debug_assert!(u.norm() <= 1.0 + 1e-12);
        self.memory = u;
        self
    }

    pub fn orientation(&self) -> Angle {
        self.orientation
    }

    pub fn memory(&self) -> UnitVec2 {
        self.memory
    }

    pub fn law(&self) -> RetardationLaw {
        self.law
    }

    /// Malus-law branching: `+1` iff `cos²(φ − a) > r`.
    ///
    /// The outgoing photon is polarized along `a` or `a⊥`; its accumulated
    /// delay is carried over untouched.
    pub fn split(&self, photon: &Photon, stream: &mut RandomStream) -> (SpinValue, Photon) {
        let r = stream.uniform_open();
        let s = self.branch(photon.phi, r);
        let phi = if s.is_plus() {
            self.orientation
        } else {
            self.orthogonal
        };
        (
            s,
            Photon {
                phi,
                tau_total: photon.tau_total,
            },
        )
    }

    pub fn branch(&self, phi: Angle, r: f64) -> SpinValue {
        let c = (phi.0 - self.orientation.0).cos();
        SpinValue::from_sign(c * c > r)
    }

    /// Draw `r′`, return the delay for the incoming `photon` and update the
    /// memory. `photon` must be the polarization *before* splitting.
    ///
    /// The draw is consumed for every law so that draw counts never depend
    /// on the configuration.
    pub fn retard(&mut self, photon: &Photon, stream: &mut RandomStream) -> f64 {
        let r_prime = stream.uniform_open();
        self.retard_with(photon.phi, r_prime)
    }

    /// [`retard`](Self::retard) with an explicit `r′`.
    pub fn retard_with(&mut self, phi: Angle, r_prime: f64) -> f64 {
        let x = unit_vec(phi);
        match self.law {
            RetardationLaw::None => 0.0,
            RetardationLaw::Memoryless => {
                let tau = r_prime * self.envelope(phi) * self.memory_factor(memoryless_deficit(x, self.memory));
                self.memory = x;
                tau
            }
            RetardationLaw::Learning { gamma } => {
                let u = self.memory;
                let deficit = ((1.0 - u.dot(u)) / 2.0).abs();
                let tau = r_prime * self.envelope(phi) * self.memory_factor(deficit);
                self.memory = u.combine(gamma, x, 1.0 - gamma);
                tau
            }
        }
    }

    /// `t_max · |sin 2(φ − a)|^α`
    fn envelope(&self, phi: Angle) -> f64 {
        let s = (2.0 * (phi.0 - self.orientation.0)).sin().abs();
        self.params.t_max * s.powf(self.params.alpha)
    }

    fn memory_factor(&self, deficit: f64) -> f64 {
        deficit.powf(self.params.beta)
    }
}

/// `|1 − x·u| / 2`, exactly zero when the memory holds this very vector.
fn memoryless_deficit(x: UnitVec2, u: UnitVec2) -> f64 {
    if x == u {
        0.0
    } else {
        ((1.0 - x.dot(u)) / 2.0).abs()
    }
}
