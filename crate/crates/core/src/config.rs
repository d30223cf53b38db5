//! Run configuration and its validation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Settings;
use crate::optics::{PolarizationMode, RetardationLaw, RetardationParams};
use crate::station::IdentificationRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    /// One beam splitter per station.
    Eprb,
    /// Two stages per station, giving `S1..S4` in a single run.
    Eeprb,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("number of pairs must be at least 1")]
    NoPairs,
    #[error("learning rate gamma must lie in (0, 1), got {0}")]
    Gamma(f64),
    #[error("detection efficiency eta must lie in [0, 1], got {0}")]
    Eta(f64),
    #[error("{name} must be finite and non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{0} must be finite")]
    NotFinite(&'static str),
}

/// Everything that determines a run. Two equal configs produce identical
/// datasets.
///
/// The emission period and the times of flight are absent: they cancel from
/// the reduced time tags, so only delays relative to `T_TOF + nΔ` are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub topology: Topology,
    pub source: PolarizationMode,
    pub settings: Settings,
    pub law: RetardationLaw,
    pub retardation: RetardationParams,
    pub identification: IdentificationRule,
    pub eta: f64,
    pub n_pairs: usize,
    pub seed: u64,
    /// Replay the same random stream for every setting of a sweep.
    pub cfd: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            topology: Topology::Eeprb,
            source: PolarizationMode::OrthogonalRandom,
            settings: Settings::default(),
            law: RetardationLaw::Memoryless,
            retardation: RetardationParams::default(),
            identification: IdentificationRule::LocalWindow(1.0),
            eta: 1.0,
            n_pairs: 1_000_000,
            seed: 0,
            cfd: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_pairs == 0 {
            return Err(ConfigError::NoPairs);
        }
        if let RetardationLaw::Learning { gamma } = self.law {
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(ConfigError::Gamma(gamma));
            }
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(ConfigError::Eta(self.eta));
        }
        let RetardationParams { t_max, alpha, beta } = self.retardation;
        for (name, value) in [("t_max", t_max), ("alpha", alpha), ("beta", beta)] {
            non_negative(name, value)?;
        }
        if let Some(w) = self.identification.window() {
            non_negative("window", w)?;
        }
        let s = self.settings;
        for (name, angle) in [("a", s.a), ("b", s.b), ("c", s.c), ("d", s.d)] {
            if !angle.0.is_finite() {
                return Err(ConfigError::NotFinite(name));
            }
        }
        if let PolarizationMode::Fixed { p, q } = self.source {
            if !p.0.is_finite() {
                return Err(ConfigError::NotFinite("p"));
            }
            if !q.0.is_finite() {
                return Err(ConfigError::NotFinite("q"));
            }
        }
        Ok(())
    }

    pub fn with_settings(&self, settings: Settings) -> Self {
        RunConfig {
            settings,
            ..self.clone()
        }
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Negative { name, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        assert_eq!(RunConfig::default().validate(), Ok(()));
    }

    #[test]
    fn rejects_bad_values() {
        let base = RunConfig::default();
        let c = RunConfig { n_pairs: 0, ..base.clone() };
        assert_eq!(c.validate(), Err(ConfigError::NoPairs));
        for gamma in [0.0, 1.0, -0.2, f64::NAN] {
            let c = RunConfig {
                law: RetardationLaw::Learning { gamma },
                ..base.clone()
            };
            assert!(matches!(c.validate(), Err(ConfigError::Gamma(_))));
        }
        let c = RunConfig { eta: 1.5, ..base.clone() };
        assert_eq!(c.validate(), Err(ConfigError::Eta(1.5)));
        let c = RunConfig {
            identification: IdentificationRule::Coincidence(-1.0),
            ..base.clone()
        };
        assert!(matches!(c.validate(), Err(ConfigError::Negative { name: "window", .. })));
        let mut c = base;
        c.retardation.alpha = -4.0;
        assert!(matches!(c.validate(), Err(ConfigError::Negative { name: "alpha", .. })));
    }
}
