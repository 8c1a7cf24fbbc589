use serde::{Deserialize, Serialize};

use crate::binary::PrecisionSpec;
use crate::dynamics::{
    error_accumulation, sine_detect_cycle, Backend, ErrorSeries, OrbitOutcome, OrbitReport,
    SineOrbit, TentMap, TentParams, Value,
};
use crate::error::{Error, Result};
use crate::harness::histogram::{build_histogram, Histogram};
use crate::preimage::{
    backward_random_walk_capped, forward_consistency_check, integer_basin_forest, BackwardWalk,
    BasinForest, ConsistencyReport, DEFAULT_PRECISION_CAP,
};
use crate::rational::ExactRational;
use crate::FixedBinary;

/// Budget for the fixed-point forward run of a consistency check.
pub const CONSISTENCY_BUDGET: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Forward trajectory of `steps` steps.
    Iterate,
    /// Cycle search with a budget of `steps`.
    Cycle,
    /// Cycle search, then the integer basin of the cycle found (or of `cycle`).
    Basin,
    /// Random backward walk of `steps` preimages, its histogram and a
    /// forward consistency check on a prefix.
    Backward,
    /// Histogram of `steps + 1` forward states.
    Histogram,
    /// Accumulated error against exact arithmetic over `steps` steps.
    Errsum,
    /// Cycle search for the binary64 sine map with a budget of `steps`.
    SineMap,
}

/// One experiment run, as given. Numbers stay as text so the report echoes
/// exactly what was asked for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: String,
    pub kind: ExperimentKind,
    pub slope: String,
    pub bound: String,
    pub x0: String,
    pub backend: String,
    pub steps: usize,
    pub bins: usize,
    pub seed: u64,
    pub precision_cap: u32,
    /// Fractional bits of the fixed-point forward check on backward walks.
    pub check_q: u32,
    /// Length of the walk prefix the forward check runs on.
    pub check_steps: usize,
    /// Explicit integer cycle for basin runs; found by cycle search if absent.
    pub cycle: Option<Vec<u64>>,
    /// Bit strings of a reference trajectory to audit row by row.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference_rows: Vec<String>,
}

impl ExperimentConfig {
    pub fn new(id: impl Into<String>, kind: ExperimentKind) -> Self {
        ExperimentConfig {
            id: id.into(),
            kind,
            slope: "2".into(),
            bound: "100".into(),
            x0: "67.2".into(),
            backend: "f64".into(),
            steps: 100,
            bins: 20,
            seed: 1,
            precision_cap: DEFAULT_PRECISION_CAP,
            check_q: 20,
            check_steps: 40,
            cycle: None,
            reference_rows: Vec::new(),
        }
    }

    /// Parses and checks everything a run needs without running it.
    pub fn validate(&self) -> Result<Prepared> {
        let cfg = |e: Error| Error::Config(format!("{}: {e}", self.id));
        if self.steps == 0 {
            return Err(Error::Config(format!("{}: steps must be >= 1", self.id)));
        }
        let uses_bins = matches!(
            self.kind,
            ExperimentKind::Backward | ExperimentKind::Histogram
        );
        if uses_bins && self.bins < 2 {
            return Err(Error::Config(format!("{}: need at least 2 bins", self.id)));
        }
        let x0: ExactRational = self.x0.parse().map_err(cfg)?;
        if self.kind == ExperimentKind::SineMap {
            if x0 > 1u64 {
                return Err(Error::Config(format!(
                    "{}: sine map needs 0 <= y0 <= 1",
                    self.id
                )));
            }
            return Ok(Prepared { x0, map: None });
        }
        let slope: ExactRational = self.slope.parse().map_err(cfg)?;
        let bound: ExactRational = self.bound.parse().map_err(cfg)?;
        let params = TentParams::new(slope, bound).map_err(cfg)?;
        params.check_domain(&x0).map_err(cfg)?;
        let backend = Backend::parse_for_bound(&self.backend, params.bound()).map_err(cfg)?;
        let map = TentMap::new(params, backend).map_err(cfg)?;
        match self.kind {
            ExperimentKind::Basin | ExperimentKind::Backward => {
                map.params().require_doubling("preimage").map_err(cfg)?;
            }
            _ => {}
        }
        if self.kind == ExperimentKind::Basin && !map.params().bound().is_integer() {
            return Err(Error::Config(format!(
                "{}: basins need an integer N",
                self.id
            )));
        }
        Ok(Prepared { x0, map: Some(map) })
    }
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub x0: ExactRational,
    pub map: Option<TentMap>,
}

/// A reference row that does not follow from the row before it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Erratum {
    pub step: usize,
    pub reference: String,
    /// What the map actually produces from the preceding reference row.
    pub expected: String,
    pub reference_decimal: String,
    pub expected_decimal: String,
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum RunResult {
    Trajectory(Vec<Value>),
    Orbit(OrbitOutcome),
    Basin {
        orbit: Option<OrbitReport>,
        forest: BasinForest,
    },
    Backward {
        walk: BackwardWalk,
        histogram: Histogram,
        consistency: ConsistencyReport,
    },
    ForwardHistogram {
        outcome: OrbitOutcome,
        histogram: Histogram,
    },
    Errors(ErrorSeries),
    Sine(SineOrbit),
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub represented_bound: Option<String>,
    pub represented_x0: Option<String>,
    pub errata: Vec<Erratum>,
    pub result: RunResult,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let prepared = config.validate()?;
    let x0 = &prepared.x0;
    let Some(map) = prepared.map else {
        let y0 = x0.to_f64();
        return Ok(RunOutput {
            config: config.clone(),
            represented_bound: None,
            represented_x0: Some(Value::Binary64(y0).to_decimal_string()),
            errata: Vec::new(),
            result: RunResult::Sine(sine_detect_cycle(y0, config.steps as u64)?),
        });
    };
    let params = map.params().clone();
    let result = match config.kind {
        ExperimentKind::Iterate => RunResult::Trajectory(map.iterate(x0, config.steps)?),
        ExperimentKind::Cycle => RunResult::Orbit(map.detect_cycle(x0, config.steps)?),
        ExperimentKind::Basin => {
            let bound = params
                .bound()
                .numerator()
                .try_into()
                .map_err(|_| Error::InvalidParams("N too large for a basin".into()))?;
            let (orbit, cycle) = match &config.cycle {
                Some(c) => (None, c.clone()),
                None => {
                    let outcome = map.detect_cycle(x0, config.steps)?;
                    let report = outcome.cycle().cloned().ok_or_else(|| {
                        Error::NotACycle(format!("no revisit within {} steps", config.steps))
                    })?;
                    let cycle = report
                        .cycle
                        .iter()
                        .map(|v| integer_value(v).ok_or_else(|| Error::NotACycle(v.to_string())))
                        .collect::<Result<Vec<u64>>>()?;
                    (Some(report), cycle)
                }
            };
            RunResult::Basin {
                orbit,
                forest: integer_basin_forest(&cycle, bound)?,
            }
        }
        ExperimentKind::Backward => {
            let walk = backward_random_walk_capped(
                x0,
                config.steps,
                config.seed,
                &params,
                config.precision_cap,
            )?;
            let bound = params.bound().to_f64();
            let histogram = build_histogram(&walk.preimages_f64(), bound, config.bins)?;
            let spec = PrecisionSpec::for_bound(params.bound(), config.check_q)?;
            let prefix = walk.prefix(config.check_steps.max(1));
            let consistency =
                forward_consistency_check(&prefix, spec, &params, CONSISTENCY_BUDGET)?;
            RunResult::Backward {
                walk,
                histogram,
                consistency,
            }
        }
        ExperimentKind::Histogram => {
            let outcome = map.detect_cycle(x0, config.steps)?;
            let values = forward_values(&outcome, config.steps);
            let bound = map.represented_bound().to_f64();
            let histogram = build_histogram(&values, bound, config.bins)?;
            RunResult::ForwardHistogram { outcome, histogram }
        }
        ExperimentKind::Errsum => RunResult::Errors(error_accumulation(x0, &map, config.steps)?),
        ExperimentKind::SineMap => unreachable!("handled above"),
    };
    Ok(RunOutput {
        config: config.clone(),
        represented_bound: Some(map.represented_bound().to_decimal_string()),
        represented_x0: Some(map.represent(x0)?.to_decimal_string()),
        errata: audit_reference(&map, &config.reference_rows)?,
        result,
    })
}

/// The `steps + 1` forward states, reusing the cycle search's path and
/// unrolling the cycle when the run revisited early.
fn forward_values(outcome: &OrbitOutcome, steps: usize) -> Vec<f64> {
    match outcome {
        OrbitOutcome::NoRevisit(b) => b.trajectory.iter().map(Value::to_f64).collect(),
        OrbitOutcome::Cycle(r) => {
            let prefix = r.trajectory[..r.transient].iter();
            let cycle = r.cycle.iter().cycle();
            prefix
                .chain(cycle)
                .take(steps + 1)
                .map(Value::to_f64)
                .collect()
        }
    }
}

fn integer_value(v: &Value) -> Option<u64> {
    let r = v.to_rational();
    if r.is_integer() {
        r.numerator().try_into().ok()
    } else {
        None
    }
}

/// Steps each reference row forward and flags rows that the map does not
/// produce from their predecessor.
fn audit_reference(map: &TentMap, rows: &[String]) -> Result<Vec<Erratum>> {
    let mut errata = Vec::new();
    if rows.is_empty() {
        return Ok(errata);
    }
    let Backend::Fixed(spec) = map.backend() else {
        return Err(Error::Config(
            "reference rows are bit strings and need a fixed-point backend".into(),
        ));
    };
    let parsed = rows
        .iter()
        .map(|r| {
            let x = FixedBinary::from_bit_string(r)?;
            if x.spec() != spec {
                return Err(Error::PrecisionMismatch(
                    x.spec().to_string(),
                    spec.to_string(),
                ));
            }
            Ok(Value::Fixed(x))
        })
        .collect::<Result<Vec<Value>>>()?;
    for (i, pair) in parsed.windows(2).enumerate() {
        let expected = map.step(&pair[0])?;
        if expected != pair[1] {
            errata.push(Erratum {
                step: i + 1,
                reference: rows[i + 1].clone(),
                expected: expected.bit_string().expect("fixed-point"),
                reference_decimal: pair[1].to_decimal_string(),
                expected_decimal: expected.to_decimal_string(),
            });
        }
    }
    Ok(errata)
}

/// Named reproduction runs.
pub const PRESET_IDS: &[&str] = &[
    "five-bit-table",
    "n100-orbits",
    "n100-basins",
    "backward-histogram",
    "noninteger-N",
    "five-bit-errsum",
    "sine-map",
];

/// Bit strings of the five-digit reference table for x0 = 0.4, N = 1.
pub const FIVE_BIT_REFERENCE: [&str; 6] =
    ["0.0110", "0.1100", "0.0100", "0.1000", "1.0000", "0.0000"];

/// Default seed for preset backward walks.
pub const PRESET_SEED: u64 = 2002;

pub fn preset(id: &str) -> Option<Vec<ExperimentConfig>> {
    use ExperimentKind::*;
    let five_bit = |run: &str, kind| {
        let mut c = ExperimentConfig::new(run, kind);
        c.bound = "1".into();
        c.x0 = "0.4".into();
        c.backend = "fixed:1,4".into();
        c
    };
    let n100 = |run: &str, kind, x0: &str| {
        let mut c = ExperimentConfig::new(run, kind);
        c.x0 = x0.into();
        c.backend = "f32".into();
        c.steps = 100_000;
        c
    };
    let runs = match id {
        "five-bit-table" => {
            let mut c = five_bit(id, Iterate);
            c.steps = 6;
            c.reference_rows = FIVE_BIT_REFERENCE.iter().map(|s| s.to_string()).collect();
            vec![c]
        }
        "n100-orbits" => vec![
            n100("x0-67.2", Cycle, "67.2"),
            n100("x0-4.23828125", Cycle, "4.23828125"),
            n100("x0-12.5", Cycle, "12.5"),
        ],
        "n100-basins" => vec![
            n100("basin-67.2", Basin, "67.2"),
            n100("basin-4.23828125", Basin, "4.23828125"),
            n100("basin-12.5", Basin, "12.5"),
        ],
        "backward-histogram" => {
            let mut c = ExperimentConfig::new(id, Backward);
            c.backend = "rational".into();
            c.steps = 60_000;
            c.seed = PRESET_SEED;
            vec![c]
        }
        "noninteger-N" => {
            let mut c = ExperimentConfig::new(id, Histogram);
            c.bound = "100.0001".into();
            c.steps = 60_000;
            vec![c]
        }
        "five-bit-errsum" => {
            let mut c = five_bit(id, Errsum);
            c.steps = 1000;
            vec![c]
        }
        "sine-map" => {
            let mut c = ExperimentConfig::new(id, SineMap);
            c.x0 = "0.4".into();
            c.backend = "f64".into();
            c.steps = 10_000_000;
            vec![c]
        }
        _ => return None,
    };
    Some(runs)
}
