//! The pair-by-pair run loop, moment estimation, CHSH combinations and
//! θ-sweeps.
//!
//! Per emitted pair the random draws are taken in this fixed order:
//!
//! 1. source angle `φ` (skipped for fixed polarizations)
//! 2. `r`, 3. `r′` at BS1
//! 4. `r`, 5. `r′` at BS2
//! 6. `r`, 7. `r′` at BS3 or BS4
//! 8. `r`, 9. `r′` at BS5 or BS6
//! 10. efficiency draw at OS1, 11. efficiency draw at OS2
//!
//! Draws 6–9 only exist in the EEPRB topology. Every photon passes exactly
//! the same number of splitters whatever its path, so the count per pair is
//! fixed and one seed drives the same sequence for every choice of settings.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, RunConfig, Topology};
use crate::model::{Angle, Settings, SpinValue};
use crate::moments::{outcome_index, Subset, SUBSETS};
use crate::optics::emit_pair;
use crate::rng::{derive_seed, RandomStream};
use crate::station::{apply_efficiency, ArmResult, Station};

/// One station's record of one pair: `(S_j, S_{j+2}, w_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArmRecord {
    pub s_first: SpinValue,
    pub s_second: Option<SpinValue>,
    pub w: bool,
}

impl ArmRecord {
    pub fn new(s_first: SpinValue, s_second: Option<SpinValue>, w: bool) -> Self {
        ArmRecord { s_first, s_second, w }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("station lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("record {0} does not match the {1:?} topology")]
    Topology(usize, Topology),
}

/// The two station data sets, index-aligned by emission number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    topology: Topology,
    station1: Vec<ArmRecord>,
    station2: Vec<ArmRecord>,
}

impl Dataset {
    pub fn new(
        topology: Topology,
        station1: Vec<ArmRecord>,
        station2: Vec<ArmRecord>,
    ) -> Result<Self, DatasetError> {
        if station1.len() != station2.len() {
            return Err(DatasetError::LengthMismatch(station1.len(), station2.len()));
        }
        let wants_second = topology == Topology::Eeprb;
        for (n, (r1, r2)) in station1.iter().zip(&station2).enumerate() {
            if r1.s_second.is_some() != wants_second || r2.s_second.is_some() != wants_second {
                return Err(DatasetError::Topology(n, topology));
            }
        }
        Ok(Dataset {
            topology,
            station1,
            station2,
        })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn len(&self) -> usize {
        self.station1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.station1.is_empty()
    }

    pub fn station1(&self) -> &[ArmRecord] {
        &self.station1
    }

    pub fn station2(&self) -> &[ArmRecord] {
        &self.station2
    }

    /// Outcome `(S1, S2, S3, S4)` of pair `n`; absent second-stage values
    /// read as `+1`.
    pub fn outcome(&self, n: usize) -> [SpinValue; 4] {
        let (r1, r2) = (self.station1[n], self.station2[n]);
        [
            r1.s_first,
            r2.s_first,
            r1.s_second.unwrap_or(SpinValue::Plus),
            r2.s_second.unwrap_or(SpinValue::Plus),
        ]
    }
}

/// Everything the run loop knows about pair `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEvent {
    pub n: usize,
    pub arm1: ArmResult,
    pub arm2: ArmResult,
    pub w1: bool,
    pub w2: bool,
}

/// Run the simulation, handing every pair to `observer`.
pub fn simulate(config: &RunConfig, mut observer: impl FnMut(&PairEvent)) -> Result<(), ConfigError> {
    config.validate()?;
    let s = config.settings;
    let mut os1 = Station::new(config.topology, s.a, s.c, config.law, config.retardation);
    let mut os2 = Station::new(config.topology, s.b, s.d, config.law, config.retardation);
    let mut stream = RandomStream::new(config.seed);
    for n in 0..config.n_pairs {
        let (p1, p2) = emit_pair(config.source, &mut stream);
        let f1 = os1.first_stage(&p1, &mut stream);
        let f2 = os2.first_stage(&p2, &mut stream);
        let arm1 = os1.second_stage(f1, &mut stream);
        let arm2 = os2.second_stage(f2, &mut stream);
        let (w1, w2) = config
            .identification
            .classify(arm1.tau_reduced(), arm2.tau_reduced());
        let w1 = apply_efficiency(w1, config.eta, &mut stream);
        let w2 = apply_efficiency(w2, config.eta, &mut stream);
        observer(&PairEvent { n, arm1, arm2, w1, w2 });
    }
    Ok(())
}

/// Run the simulation and collect both station data sets.
pub fn run(config: &RunConfig) -> Result<Dataset, ConfigError> {
    let mut station1 = Vec::with_capacity(config.n_pairs);
    let mut station2 = Vec::with_capacity(config.n_pairs);
    simulate(config, |ev| {
        station1.push(ArmRecord::new(ev.arm1.s_first, ev.arm1.s_second, ev.w1));
        station2.push(ArmRecord::new(ev.arm2.s_first, ev.arm2.s_second, ev.w2));
    })?;
    Ok(Dataset {
        topology: config.topology,
        station1,
        station2,
    })
}

/// Outcome counts over all pairs and over identified pairs (`w1·w2 = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub all: [u64; 16],
    pub coincident: [u64; 16],
}

impl OutcomeCounts {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let mut counts = OutcomeCounts::default();
        for n in 0..ds.len() {
            let o = outcome_index(ds.outcome(n));
            counts.all[o] += 1;
            if ds.station1[n].w && ds.station2[n].w {
                counts.coincident[o] += 1;
            }
        }
        counts
    }
}

fn moments_from_counts(counts: &[u64; 16]) -> Option<[f64; 16]> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let mut m = [0.0; 16];
    for s in SUBSETS {
        let signed: i64 = counts
            .iter()
            .enumerate()
            .map(|(o, &c)| s.sign(o) * c as i64)
            .sum();
        m[s.index()] = signed as f64 / total as f64;
    }
    Some(m)
}

/// All K (every pair) and E (identified pairs only) moments of a data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    pub topology: Topology,
    pub n_pairs: u64,
    pub n_coincident: u64,
    counts: OutcomeCounts,
    k: [f64; 16],
    e: Option<[f64; 16]>,
}

impl MomentEstimates {
    pub fn from_counts(topology: Topology, counts: &OutcomeCounts) -> Self {
        let n_pairs = counts.all.iter().sum();
        let n_coincident = counts.coincident.iter().sum();
        MomentEstimates {
            topology,
            n_pairs,
            n_coincident,
            counts: *counts,
            k: moments_from_counts(&counts.all).unwrap_or([0.0; 16]),
            e: moments_from_counts(&counts.coincident),
        }
    }

    fn available(&self, s: Subset) -> bool {
        self.topology == Topology::Eeprb || s.is_first_stage()
    }

    /// `None` when the moment involves `S3`/`S4` in the EPRB topology or the
    /// data set is empty.
    pub fn k(&self, s: Subset) -> Option<f64> {
        (self.available(s) && self.n_pairs > 0).then(|| self.k[s.index()])
    }

    /// `None` additionally when no pair was identified.
    pub fn e(&self, s: Subset) -> Option<f64> {
        if !self.available(s) {
            return None;
        }
        self.e.map(|e| e[s.index()])
    }

    pub fn counts(&self) -> &OutcomeCounts {
        &self.counts
    }

    pub fn e_defined(&self) -> bool {
        self.e.is_some()
    }

    /// Identified pairs over emitted pairs.
    pub fn pair_ratio(&self) -> f64 {
        if self.n_pairs == 0 {
            0.0
        } else {
            self.n_coincident as f64 / self.n_pairs as f64
        }
    }
}

pub fn estimate_moments(ds: &Dataset) -> MomentEstimates {
    MomentEstimates::from_counts(ds.topology, &OutcomeCounts::from_dataset(ds))
}

/// `E13 + E14 + E23 − E24` of one EEPRB run. Bounded by 2 for any data set,
/// since every pair contributes `S1(S3 + S4) + S2(S3 − S4) = ±2`. Summed over
/// integer counts so rounding cannot push it past the bound.
pub fn chsh_single_run(m: &MomentEstimates) -> Option<f64> {
    if m.topology != Topology::Eeprb {
        return None;
    }
    chsh_from_counts(&m.counts.coincident)
}

/// The K analogue of [`chsh_single_run`].
pub fn chsh_single_run_k(m: &MomentEstimates) -> Option<f64> {
    if m.topology != Topology::Eeprb {
        return None;
    }
    chsh_from_counts(&m.counts.all)
}

fn chsh_from_counts(counts: &[u64; 16]) -> Option<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let [s13, s14, s23, s24] = [[1, 3], [1, 4], [2, 3], [2, 4]].map(|i| Subset::of(&i));
    let num: i64 = counts
        .iter()
        .enumerate()
        .map(|(o, &c)| (s13.sign(o) + s14.sign(o) + s23.sign(o) - s24.sign(o)) * c as i64)
        .sum();
    Some(num as f64 / total as f64)
}

/// `|E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)|` from four separate runs.
pub fn chsh_multi_run(e_ab: f64, e_ab2: f64, e_a2b: f64, e_a2b2: f64) -> f64 {
    (e_ab - e_ab2 + e_a2b + e_a2b2).abs()
}

/// How the four settings follow θ in a sweep: `a = b + θ`, `c = a + c_offset`,
/// `d` fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub b: Angle,
    pub c_offset: Angle,
    pub d: Angle,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            b: Angle(0.0),
            c_offset: Angle(FRAC_PI_6),
            d: Angle(FRAC_PI_3),
        }
    }
}

impl Geometry {
    pub fn settings(&self, theta: Angle) -> Settings {
        let a = self.b + theta;
        Settings {
            a,
            b: self.b,
            c: a + self.c_offset,
            d: self.d,
        }
    }
}

/// `points` equally spaced angles covering `[0, theta_max]`.
pub fn theta_grid(points: usize, theta_max: f64) -> Vec<Angle> {
    match points {
        0 => Vec::new(),
        1 => vec![Angle(0.0)],
        _ => (0..points)
            .map(|i| Angle(theta_max * i as f64 / (points - 1) as f64))
            .collect(),
    }
}

/// The grid used when nothing else is asked for: 25 points over `[0, π]`.
pub fn default_grid() -> Vec<Angle> {
    theta_grid(25, PI)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub theta: Angle,
    pub settings: Settings,
    pub seed: u64,
    pub moments: MomentEstimates,
}

/// Seed used for grid point `index`: the base seed itself in cfd mode,
/// otherwise [`derive_seed`].
pub fn point_seed(base: &RunConfig, index: usize) -> u64 {
    if base.cfd {
        base.seed
    } else {
        derive_seed(base.seed, index as u64)
    }
}

/// One run per θ, in parallel; results come back in grid order.
pub fn run_sweep(
    base: &RunConfig,
    grid: &[Angle],
    geometry: Geometry,
) -> Result<Vec<SweepPoint>, ConfigError> {
    base.validate()?;
    grid.par_iter()
        .enumerate()
        .map(|(index, &theta)| {
            let settings = geometry.settings(theta);
            let seed = point_seed(base, index);
            let config = RunConfig {
                settings,
                seed,
                ..base.clone()
            };
            let moments = estimate_moments(&run(&config)?);
            Ok(SweepPoint {
                index,
                theta,
                settings,
                seed,
                moments,
            })
        })
        .collect()
}
