//! Tabular results: one row per setting, CSV first, JSON as a mirror.
//!
//! Every file opens with `# key: value` comment lines holding the tool
//! version, the generator name, the seed and the resolved configuration as
//! JSON. Those lines plus the grid are enough to regenerate the file byte for
//! byte. Floats are written with Rust's shortest round-trip formatting, which
//! never depends on locale.

use std::fmt::{self, Write as _};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, Topology};
use crate::experiment::{Geometry, MomentEstimates, SweepPoint};
use crate::model::{Angle, Settings};
use crate::moments::{MomentTable, SUBSETS};
use crate::optics::PolarizationMode;
use crate::oracle::{model_moments, OracleModel};
use crate::rng::PRNG_NAME;
use crate::station::IdentificationRule;

pub const TOOL_VERSION: &str = concat!("eeprb ", env!("CARGO_PKG_VERSION"));

/// Literal written for a value that does not exist.
pub const MISSING: &str = "NA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Closed-form models the K and E columns are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub k: OracleModel,
    pub e: OracleModel,
}

impl Comparison {
    /// Orthogonal pairs: classical waves for K, the singlet for E. Parallel
    /// pairs: classical waves with `φ0 = 0` for K, the sign-flipped singlet
    /// for E. Fixed pairs: the product state for both. Without identification
    /// the identified subset is the whole data set, so E is held to K's model.
    pub fn for_config(config: &RunConfig) -> Comparison {
        let (k, e) = match config.source {
            PolarizationMode::OrthogonalRandom => (
                OracleModel::Maxwell {
                    phi0: std::f64::consts::FRAC_PI_2,
                },
                OracleModel::Quantum,
            ),
            PolarizationMode::ParallelRandom => (OracleModel::Maxwell { phi0: 0.0 }, OracleModel::Flipped),
            PolarizationMode::Fixed { p, q } => {
                let m = OracleModel::Product { p: p.0, q: q.0 };
                (m, m)
            }
        };
        match config.identification {
            IdentificationRule::None => Comparison { k, e: k },
            _ => Comparison { k, e },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Missing,
}

impl Cell {
    fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Missing, Cell::Float)
    }

    /// `null` stands in for the CSV's `NA`.
    pub fn to_json(self) -> Value {
        match self {
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(_) | Cell::Missing => Value::Null,
            Cell::Int(n) => json!(n),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Float(x) if x.is_finite() => write!(f, "{x}"),
            Cell::Float(_) | Cell::Missing => f.write_str(MISSING),
            Cell::Int(n) => write!(f, "{n}"),
        }
    }
}

/// Column names in file order.
pub fn columns() -> Vec<String> {
    let mut cols: Vec<String> = ["theta", "a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    for prefix in ["K", "E", "oracle_K", "oracle_E"] {
        cols.extend(SUBSETS.iter().map(|s| format!("{prefix}{s}")));
    }
    cols.extend(["n_pairs", "n_coincident", "pair_ratio"].iter().map(|s| s.to_string()));
    cols
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRow {
    pub theta: Angle,
    pub settings: Settings,
    pub k: [Option<f64>; 15],
    pub e: [Option<f64>; 15],
    pub oracle_k: [Option<f64>; 15],
    pub oracle_e: [Option<f64>; 15],
    pub n_pairs: Option<u64>,
    pub n_coincident: Option<u64>,
    pub pair_ratio: Option<f64>,
}

fn oracle_column(topology: Topology, table: &MomentTable) -> [Option<f64>; 15] {
    std::array::from_fn(|i| {
        let s = SUBSETS[i];
        (topology == Topology::Eeprb || s.is_first_stage()).then(|| table.get(s))
    })
}

impl OutputRow {
    pub fn measured(theta: Angle, settings: Settings, m: &MomentEstimates, cmp: Comparison) -> OutputRow {
        OutputRow {
            k: std::array::from_fn(|i| m.k(SUBSETS[i])),
            e: std::array::from_fn(|i| m.e(SUBSETS[i])),
            n_pairs: Some(m.n_pairs),
            n_coincident: Some(m.n_coincident),
            pair_ratio: Some(m.pair_ratio()),
            ..OutputRow::oracle_only(theta, settings, m.topology, cmp)
        }
    }

    /// A row carrying only the closed-form columns.
    pub fn oracle_only(theta: Angle, settings: Settings, topology: Topology, cmp: Comparison) -> OutputRow {
        OutputRow {
            theta,
            settings,
            k: [None; 15],
            e: [None; 15],
            oracle_k: oracle_column(topology, &model_moments(cmp.k, &settings)),
            oracle_e: oracle_column(topology, &model_moments(cmp.e, &settings)),
            n_pairs: None,
            n_coincident: None,
            pair_ratio: None,
        }
    }

    pub fn from_sweep_point(p: &SweepPoint, cmp: Comparison) -> OutputRow {
        OutputRow::measured(p.theta, p.settings, &p.moments, cmp)
    }

    pub fn cells(&self) -> Vec<Cell> {
        let s = self.settings;
        let mut out: Vec<Cell> = [self.theta, s.a, s.b, s.c, s.d].iter().map(|x| Cell::Float(x.0)).collect();
        for block in [&self.k, &self.e, &self.oracle_k, &self.oracle_e] {
            out.extend(block.iter().map(|&v| Cell::opt(v)));
        }
        out.push(self.n_pairs.map_or(Cell::Missing, Cell::Int));
        out.push(self.n_coincident.map_or(Cell::Missing, Cell::Int));
        out.push(Cell::opt(self.pair_ratio));
        out
    }
}

/// Header plus rows, ready to serialize.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<(String, String)>,
    pub rows: Vec<OutputRow>,
}

impl Table {
    /// Header for a run or sweep with `config`. `extra` is appended in order.
    pub fn new(config: &RunConfig, extra: &[(&str, String)]) -> Table {
        let mut header = vec![
            ("tool".to_string(), TOOL_VERSION.to_string()),
            ("prng".to_string(), PRNG_NAME.to_string()),
            ("seed".to_string(), config.seed.to_string()),
            (
                "config".to_string(),
                serde_json::to_string(config).expect("config serializes"),
            ),
            (
                "comparison".to_string(),
                serde_json::to_string(&Comparison::for_config(config)).expect("models serialize"),
            ),
        ];
        header.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
        Table { header, rows: Vec::new() }
    }

    pub fn for_sweep(config: &RunConfig, points: &[SweepPoint], geometry: Geometry, grid: (usize, f64)) -> Table {
        let mut t = Table::new(
            config,
            &[
                ("geometry", serde_json::to_string(&geometry).expect("geometry serializes")),
                ("grid", format!("points={} theta_max={}", grid.0, grid.1)),
            ],
        );
        let cmp = Comparison::for_config(config);
        t.rows = points.iter().map(|p| OutputRow::from_sweep_point(p, cmp)).collect();
        t
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", columns().join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.cells().iter().map(Cell::to_string).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// `{"header": {...}, "columns": [...], "rows": [[...], ...]}` with rows
    /// aligned to `columns`.
    pub fn to_json(&self) -> String {
        let header: serde_json::Map<String, Value> =
            self.header.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.cells().into_iter().map(Cell::to_json).collect()))
            .collect();
        let doc = json!({ "header": header, "columns": columns(), "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_sweep, theta_grid};
    use crate::moments::Subset;

    fn small_sweep(config: &RunConfig) -> Table {
        let grid = theta_grid(3, std::f64::consts::PI);
        let pts = run_sweep(config, &grid, Geometry::default()).unwrap();
        Table::for_sweep(config, &pts, Geometry::default(), (3, std::f64::consts::PI))
    }

    #[test]
    fn column_layout() {
        let c = columns();
        assert_eq!(c.len(), 5 + 60 + 3);
        assert_eq!(&c[..6], ["theta", "a", "b", "c", "d", "K1"]);
        assert_eq!(c[5 + 14], "K1234");
        assert_eq!(c[5 + 15], "E1");
        assert_eq!(c[5 + 30], "oracle_K1");
        assert_eq!(c[5 + 45], "oracle_E1");
        assert_eq!(c.last().unwrap(), "pair_ratio");
    }

    #[test]
    fn csv_shape_and_header() {
        let config = RunConfig {
            n_pairs: 2000,
            seed: 9,
            ..RunConfig::default()
        };
        let csv = small_sweep(&config).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# tool: eeprb "));
        assert!(lines.iter().any(|l| l.starts_with("# prng: ChaCha8")));
        assert!(lines.contains(&"# seed: 9"));
        let data: Vec<&&str> = lines.iter().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 4);
        for l in &data {
            assert_eq!(l.split(',').count(), columns().len());
        }
    }

    #[test]
    fn config_header_round_trips() {
        let config = RunConfig {
            n_pairs: 10,
            seed: 123,
            ..RunConfig::default()
        };
        let t = Table::new(&config, &[]);
        let json = &t.header.iter().find(|(k, _)| k == "config").unwrap().1;
        let back: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn missing_values_are_na_and_null() {
        // EPRB has no S3/S4, and a window of zero with delays identifies nothing
        let config = RunConfig {
            topology: Topology::Eprb,
            identification: IdentificationRule::LocalWindow(0.0),
            n_pairs: 50,
            ..RunConfig::default()
        };
        let t = small_sweep(&config);
        let row = &t.rows[1];
        assert_eq!(row.k[SUBSETS.iter().position(|&s| s == Subset::of(&[1, 3])).unwrap()], None);
        assert!(t.to_csv().contains(",NA,"));
        let doc: Value = serde_json::from_str(&t.to_json()).unwrap();
        let cols = doc["columns"].as_array().unwrap();
        let i = cols.iter().position(|c| c == "K13").unwrap();
        assert!(doc["rows"][1][i].is_null());
        let j = cols.iter().position(|c| c == "K12").unwrap();
        assert!(doc["rows"][1][j].is_number());
    }

    #[test]
    fn comparison_models() {
        let mut c = RunConfig::default();
        assert_eq!(Comparison::for_config(&c).e, OracleModel::Quantum);
        c.identification = IdentificationRule::None;
        assert_eq!(Comparison::for_config(&c).e, Comparison::for_config(&c).k);
        c.source = PolarizationMode::ParallelRandom;
        c.identification = IdentificationRule::LocalWindow(1.0);
        assert_eq!(Comparison::for_config(&c).e, OracleModel::Flipped);
    }

    #[test]
    fn oracle_rows_track_closed_forms() {
        let cmp = Comparison::for_config(&RunConfig::default());
        let st = Geometry::default().settings(Angle(0.3));
        let row = OutputRow::oracle_only(Angle(0.3), st, Topology::Eeprb, cmp);
        let i12 = SUBSETS.iter().position(|&s| s == Subset::of(&[1, 2])).unwrap();
        assert!((row.oracle_e[i12].unwrap() + (0.6f64).cos()).abs() < 1e-12);
        assert!((row.oracle_k[i12].unwrap() + 0.5 * (0.6f64).cos()).abs() < 1e-12);
        assert!(row.cells()[5..35].iter().all(|c| *c == Cell::Missing));
    }
}
