//! Observation stations: beam-splitter chains, reduced time tags, photon
//! identification and detector efficiency.
//!
//! A [`Station`] only ever sees its own photon and its own beam splitters.
//! Time tags are kept in reduced form `t − T_TOF − nΔ`, i.e. the sum of the
//! delays picked up along the photon's path.

use serde::{Deserialize, Serialize};

use crate::config::Topology;
use crate::model::{detector_index, Angle, SpinValue};
use crate::optics::{BeamSplitter, Photon, RetardationLaw, RetardationParams};
use crate::rng::RandomStream;

/// How a detection event is classified as "a photon".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IdentificationRule {
    /// Accept iff the station's own reduced time tag is at most `W`.
    LocalWindow(f64),
    /// Accept both events of a pair iff their time tags differ by at most `W`.
    Coincidence(f64),
    /// Accept everything.
    None,
}

impl IdentificationRule {
    pub fn window(self) -> Option<f64> {
        match self {
            IdentificationRule::LocalWindow(w) | IdentificationRule::Coincidence(w) => Some(w),
            IdentificationRule::None => None,
        }
    }

    /// Classify the two events of pair `n`.
    pub fn classify(self, tau1: f64, tau2: f64) -> (bool, bool) {
        match self {
            IdentificationRule::LocalWindow(w) => (identify_local(tau1, w), identify_local(tau2, w)),
            IdentificationRule::Coincidence(w) => identify_coincidence(tau1, tau2, w),
            IdentificationRule::None => (true, true),
        }
    }
}

/// `0 ≤ τ ≤ W`, inclusive at `W`.
pub fn identify_local(tau_reduced: f64, window: f64) -> bool {
    tau_reduced <= window
}

/// Both accepted iff `|τ1 − τ2| ≤ W`. Pairs are matched by emission index,
/// which is unambiguous as long as the emission period exceeds `2·t_max`.
pub fn identify_coincidence(tau1: f64, tau2: f64, window: f64) -> (bool, bool) {
    let ok = (tau1 - tau2).abs() <= window;
    (ok, ok)
}

/// Keep `w` iff `r″ ≤ η`. The draw is made even when `w` is already false.
pub fn apply_efficiency(w: bool, eta: f64, stream: &mut RandomStream) -> bool {
    let r = stream.uniform_open();
    w && r <= eta
}

/// What one station records for one photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmResult {
    pub s_first: SpinValue,
    /// Absent in the EPRB topology.
    pub s_second: Option<SpinValue>,
    pub tau_first: f64,
    pub tau_second: f64,
    /// 1..=4 (EEPRB) or 1..=2 (EPRB).
    pub detector: u8,
}

impl ArmResult {
    pub fn tau_reduced(&self) -> f64 {
        self.tau_first + self.tau_second
    }
}

/// Output of the first beam splitter, waiting to be routed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstStage {
    pub s_first: SpinValue,
    pub tau_first: f64,
    pub photon: Photon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    first: BeamSplitter,
    second: Option<(BeamSplitter, BeamSplitter)>,
}

impl Station {
    /// `second_orientation` is ignored for [`Topology::Eprb`].
    pub fn new(
        topology: Topology,
        first_orientation: Angle,
        second_orientation: Angle,
        law: RetardationLaw,
        params: RetardationParams,
    ) -> Self {
        let first = BeamSplitter::new(first_orientation, law, params);
        let second = match topology {
            Topology::Eprb => None,
            Topology::Eeprb => Some((
                BeamSplitter::new(second_orientation, law, params),
                BeamSplitter::new(second_orientation, law, params),
            )),
        };
        Station { first, second }
    }

    pub fn from_splitters(first: BeamSplitter, second: Option<(BeamSplitter, BeamSplitter)>) -> Self {
        Station { first, second }
    }

    pub fn first(&self) -> &BeamSplitter {
        &self.first
    }

    /// The `(+1, −1)` second-stage splitters, if any.
    pub fn second(&self) -> Option<&(BeamSplitter, BeamSplitter)> {
        self.second.as_ref()
    }

    /// Draws `r` then `r′` for the first splitter.
    pub fn first_stage(&mut self, photon: &Photon, stream: &mut RandomStream) -> FirstStage {
        let (s_first, out) = self.first.split(photon, stream);
        let tau_first = self.first.retard(photon, stream);
        FirstStage {
            s_first,
            tau_first,
            photon: Photon {
                phi: out.phi,
                tau_total: out.tau_total + tau_first,
            },
        }
    }

    /// Route to the `+` or `−` splitter and finish the arm. Draws `r`, `r′`
    /// in the EEPRB topology, nothing in EPRB.
    pub fn second_stage(&mut self, stage: FirstStage, stream: &mut RandomStream) -> ArmResult {
        match self.second.as_mut() {
            None => ArmResult {
                s_first: stage.s_first,
                s_second: None,
                tau_first: stage.tau_first,
                tau_second: 0.0,
                detector: if stage.s_first.is_plus() { 1 } else { 2 },
            },
            Some((plus, minus)) => {
                let bs = if stage.s_first.is_plus() { plus } else { minus };
                let (s_second, _) = bs.split(&stage.photon, stream);
                let tau_second = bs.retard(&stage.photon, stream);
                ArmResult {
                    s_first: stage.s_first,
                    s_second: Some(s_second),
                    tau_first: stage.tau_first,
                    tau_second,
                    detector: detector_index(stage.s_first, s_second),
                }
            }
        }
    }

    /// Send one photon through the whole chain.
    pub fn process_arm(&mut self, photon: &Photon, stream: &mut RandomStream) -> ArmResult {
        let stage = self.first_stage(photon, stream);
        self.second_stage(stage, stream)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{emit_pair, PolarizationMode};
    use std::f64::consts::PI;

    fn station(topology: Topology, law: RetardationLaw) -> Station {
        Station::new(topology, Angle(0.3), Angle(0.3 + PI / 6.0), law, RetardationParams::default())
    }

    #[test]
    fn no_delays_without_law() {
        let mut st = station(Topology::Eeprb, RetardationLaw::None);
        let mut s = RandomStream::new(1);
        for _ in 0..1000 {
            let phi = Angle(s.uniform_angle());
            assert_eq!(st.process_arm(&Photon::new(phi), &mut s).tau_reduced(), 0.0);
        }
    }

    #[test]
    fn second_stage_silent_after_first_arrival() {
        let mut st = station(Topology::Eeprb, RetardationLaw::Memoryless);
        let mut s = RandomStream::new(2);
        let (mut seen_plus, mut seen_minus) = (false, false);
        for _ in 0..20_000 {
            let (p1, _) = emit_pair(PolarizationMode::OrthogonalRandom, &mut s);
            let arm = st.process_arm(&p1, &mut s);
            let seen = if arm.s_first.is_plus() { &mut seen_plus } else { &mut seen_minus };
            if *seen {
                assert_eq!(arm.tau_second, 0.0);
            }
            *seen = true;
            assert!(arm.tau_reduced() >= 0.0);
        }
        assert!(seen_plus && seen_minus);
    }

    #[test]
    fn detector_follows_path() {
        let mut st = station(Topology::Eeprb, RetardationLaw::Memoryless);
        let mut s = RandomStream::new(4);
        for _ in 0..1000 {
            let arm = st.process_arm(&Photon::new(Angle(s.uniform_angle())), &mut s);
            assert_eq!(arm.detector, detector_index(arm.s_first, arm.s_second.unwrap()));
        }
        use SpinValue::*;
        assert_eq!(detector_index(Plus, Minus), 2);
    }

    #[test]
    fn eprb_arm_has_one_stage() {
        let mut st = station(Topology::Eprb, RetardationLaw::Memoryless);
        let mut s = RandomStream::new(4);
        let mut reference = RandomStream::new(4);
        let arm = st.process_arm(&Photon::new(Angle(1.0)), &mut s);
        assert_eq!(arm.s_second, None);
        assert_eq!(arm.tau_second, 0.0);
        assert!(arm.detector == 1 || arm.detector == 2);
        // exactly two draws consumed
        reference.next_u64();
        reference.next_u64();
        assert_eq!(s.next_u64(), reference.next_u64());
    }

    #[test]
    fn eeprb_arm_consumes_four_draws() {
        let mut st = station(Topology::Eeprb, RetardationLaw::Learning { gamma: 0.5 });
        let mut s = RandomStream::new(9);
        let mut reference = RandomStream::new(9);
        st.process_arm(&Photon::new(Angle(2.0)), &mut s);
        for _ in 0..4 {
            reference.next_u64();
        }
        assert_eq!(s.next_u64(), reference.next_u64());
    }

    #[test]
    fn local_window_boundaries() {
        assert!(identify_local(0.0, 0.0));
        assert!(identify_local(0.0, 3.0));
        assert!(identify_local(1.0, 1.0));
        assert!(!identify_local(1.0 + 1e-9, 1.0));
    }

    #[test]
    fn coincidence_window() {
        assert_eq!(identify_coincidence(0.0, 0.0, 1.0), (true, true));
        assert_eq!(identify_coincidence(0.0, 1.5, 1.0), (false, false));
        assert_eq!(identify_coincidence(10.0, 9.0, 1.0), (true, true));
    }

    #[test]
    fn efficiency_limits() {
        let mut s = RandomStream::new(3);
        for _ in 0..10_000 {
            assert!(apply_efficiency(true, 1.0, &mut s));
            assert!(!apply_efficiency(true, 0.0, &mut s));
            assert!(!apply_efficiency(false, 1.0, &mut s));
        }
    }

    #[test]
    fn efficiency_half() {
        let mut s = RandomStream::new(3);
        let n = 100_000;
        let kept = (0..n).filter(|_| apply_efficiency(true, 0.5, &mut s)).count();
        let frac = kept as f64 / n as f64;
        assert!((frac - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt(), "{frac}");
    }

    #[test]
    fn efficiency_draw_always_consumed() {
        let mut s = RandomStream::new(5);
        let mut reference = RandomStream::new(5);
        apply_efficiency(false, 0.3, &mut s);
        reference.next_u64();
        assert_eq!(s.next_u64(), reference.next_u64());
    }
}
