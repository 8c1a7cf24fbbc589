//! The tent map under exact, fixed-point and floating arithmetic.
//!
//! A [`TentMap`] pairs [`TentParams`] with a [`Backend`]. The bound `N` is
//! brought into the backend once, at construction; every initial condition
//! is brought in once by [`TentMap::represent`]. After that each step runs
//! natively in the backend: exact rationals, shifts on a fixed binary grid,
//! or IEEE arithmetic with per-operation rounding.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::binary::{self, FixedBinary, IntegerClass, PrecisionSpec};
use crate::cycle::{self, CycleSearch};
use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Slope `a` and domain bound `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TentParams {
    slope: ExactRational,
    bound: ExactRational,
}

impl TentParams {
    pub fn new(slope: ExactRational, bound: ExactRational) -> Result<Self> {
        if slope.is_zero() {
            return Err(Error::InvalidParams("slope must be positive".into()));
        }
        if bound.is_zero() {
            return Err(Error::InvalidParams("bound N must be positive".into()));
        }
        Ok(TentParams { slope, bound })
    }

    /// `a = 2` with the given bound.
    pub fn with_bound(bound: ExactRational) -> Result<Self> {
        Self::new(ExactRational::from_integer(2), bound)
    }

    /// `a = 2`, integer `N`.
    pub fn integer(bound: u64) -> Result<Self> {
        Self::with_bound(ExactRational::from_integer(bound))
    }

    pub fn slope(&self) -> &ExactRational {
        &self.slope
    }

    pub fn bound(&self) -> &ExactRational {
        &self.bound
    }

    pub fn has_unit_doubling(&self) -> bool {
        self.slope == 2
    }

    pub(crate) fn require_doubling(&self, what: &str) -> Result<()> {
        if self.has_unit_doubling() {
            Ok(())
        } else {
            Err(Error::UnsupportedSlope(self.slope.to_string(), what.into()))
        }
    }

    pub(crate) fn check_domain(&self, x: &ExactRational) -> Result<()> {
        if *x > self.bound {
            Err(Error::Domain {
                value: x.to_string(),
                bound: self.bound.to_string(),
            })
        } else {
            Ok(())
        }
    }
}

/// Arithmetic the map is evaluated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Rational,
    Fixed(PrecisionSpec),
    /// IEEE binary64: 53 significand bits, round to nearest even.
    Binary64,
    /// IEEE binary32: 24 significand bits, round to nearest even.
    Binary32,
}

impl Backend {
    /// Like [`FromStr`], but also accepts `fixed:q`, taking `p` from the
    /// capacity rule for `bound`.
    pub fn parse_for_bound(text: &str, bound: &ExactRational) -> Result<Self> {
        let unknown = || Error::UnknownBackend(text.to_string());
        match text.trim().strip_prefix("fixed:") {
            Some(rest) if !rest.contains(',') => {
                let q = rest.trim().parse::<u32>().map_err(|_| unknown())?;
                Ok(Backend::Fixed(PrecisionSpec::for_bound(bound, q)?))
            }
            _ => text.parse(),
        }
    }

    pub fn is_finite_state(&self) -> bool {
        !matches!(self, Backend::Rational)
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownBackend(s.to_string());
        match s.trim() {
            "rational" | "exact" => Ok(Backend::Rational),
            "f64" | "binary64" => Ok(Backend::Binary64),
            "f32" | "binary32" => Ok(Backend::Binary32),
            other => {
                let rest = other.strip_prefix("fixed:").ok_or_else(unknown)?;
                let (p, q) = rest.split_once(',').ok_or_else(unknown)?;
                let p = p.trim().parse::<u32>().map_err(|_| unknown())?;
                let q = q.trim().parse::<u32>().map_err(|_| unknown())?;
                Ok(Backend::Fixed(PrecisionSpec::new(p, q)?))
            }
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Rational => f.write_str("rational"),
            Backend::Fixed(spec) => write!(f, "fixed:{spec}"),
            Backend::Binary64 => f.write_str("f64"),
            Backend::Binary32 => f.write_str("f32"),
        }
    }
}

impl Serialize for Backend {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A state of the map in one backend's representation.
#[derive(Clone, Debug)]
pub enum Value {
    Rational(ExactRational),
    Fixed(FixedBinary),
    Binary64(f64),
    Binary32(f32),
}

impl Value {
    /// The exact value this representation stands for.
    pub fn to_rational(&self) -> ExactRational {
        match self {
            Value::Rational(r) => r.clone(),
            Value::Fixed(x) => binary::to_rational(x),
            Value::Binary64(x) => ExactRational::from_f64(*x).expect("states are finite"),
            Value::Binary32(x) => ExactRational::from_f32(*x).expect("states are finite"),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Binary64(x) => *x,
            Value::Binary32(x) => f64::from(*x),
            other => other.to_rational().to_f64(),
        }
    }

    /// Exact decimal for dyadic values, `p/q` otherwise.
    pub fn to_decimal_string(&self) -> String {
        match self {
            Value::Fixed(x) => binary::to_decimal_string(x),
            other => other.to_rational().to_string(),
        }
    }

    /// Bit-string rendering, fixed-point states only.
    pub fn bit_string(&self) -> Option<String> {
        match self {
            Value::Fixed(x) => Some(x.to_bit_string()),
            _ => None,
        }
    }

    pub fn integer_class(&self) -> IntegerClass {
        match self {
            Value::Fixed(x) => binary::classify_integer(x),
            Value::Binary64(x) => float_class(*x),
            Value::Binary32(x) => float_class(f64::from(*x)),
            Value::Rational(r) => {
                if !r.is_integer() {
                    IntegerClass::NotInteger
                } else if r.numerator().is_even() {
                    IntegerClass::EvenInteger
                } else {
                    IntegerClass::OddInteger
                }
            }
        }
    }

    pub fn is_integer(&self) -> bool {
        self.integer_class() != IntegerClass::NotInteger
    }

    pub fn is_even_integer(&self) -> bool {
        self.integer_class() == IntegerClass::EvenInteger
    }
}

fn float_class(x: f64) -> IntegerClass {
    if x.fract() != 0.0 {
        IntegerClass::NotInteger
    } else if (x / 2.0).fract() == 0.0 {
        IntegerClass::EvenInteger
    } else {
        IntegerClass::OddInteger
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Rational(a), Value::Rational(b)) => a == b,
            (Value::Fixed(a), Value::Fixed(b)) => a == b,
            (Value::Binary64(a), Value::Binary64(b)) => a.to_bits() == b.to_bits(),
            (Value::Binary32(a), Value::Binary32(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Rational(r) => r.hash(state),
            Value::Fixed(x) => x.hash(state),
            Value::Binary64(x) => x.to_bits().hash(state),
            Value::Binary32(x) => x.to_bits().hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The tent map bound to a backend.
#[derive(Clone, Debug)]
pub struct TentMap {
    params: TentParams,
    backend: Backend,
    bound: Value,
    slope: Value,
}

impl TentMap {
    pub fn new(params: TentParams, backend: Backend) -> Result<Self> {
        let (bound, slope) = match backend {
            Backend::Rational => (
                Value::Rational(params.bound.clone()),
                Value::Rational(params.slope.clone()),
            ),
            Backend::Fixed(spec) => {
                // Doubling is the only slope with an exact shift.
                params.require_doubling("fixed-point")?;
                let n = binary::round_off(&params.bound, spec)?;
                if n.is_zero() {
                    return Err(Error::InvalidParams(format!(
                        "bound {} rounds to zero at q = {}",
                        params.bound,
                        spec.q()
                    )));
                }
                (Value::Fixed(n), Value::Rational(params.slope.clone()))
            }
            Backend::Binary64 => (
                Value::Binary64(params.bound.to_f64()),
                Value::Binary64(params.slope.to_f64()),
            ),
            Backend::Binary32 => (
                Value::Binary32(params.bound.to_f32()),
                Value::Binary32(params.slope.to_f32()),
            ),
        };
        if let Value::Binary64(x) = bound {
            if !x.is_finite() {
                return Err(Error::InvalidParams("bound overflows binary64".into()));
            }
        }
        if let Value::Binary32(x) = bound {
            if !x.is_finite() {
                return Err(Error::InvalidParams("bound overflows binary32".into()));
            }
        }
        Ok(TentMap {
            params,
            backend,
            bound,
            slope,
        })
    }

    pub fn params(&self) -> &TentParams {
        &self.params
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// `N` as the backend holds it.
    pub fn represented_bound(&self) -> &Value {
        &self.bound
    }

    /// Brings an exact value into the backend: truncation for fixed-point,
    /// round-to-nearest-even for the IEEE formats.
    pub fn represent(&self, x: &ExactRational) -> Result<Value> {
        self.params.check_domain(x)?;
        Ok(match self.backend {
            Backend::Rational => Value::Rational(x.clone()),
            Backend::Fixed(spec) => Value::Fixed(binary::round_off(x, spec)?),
            Backend::Binary64 => Value::Binary64(x.to_f64()),
            Backend::Binary32 => Value::Binary32(x.to_f32()),
        })
    }

    fn domain_error(&self, x: &Value) -> Error {
        Error::Domain {
            value: x.to_string(),
            bound: self.bound.to_string(),
        }
    }

    /// One application of the map. The branch test `x < N/2` is evaluated
    /// as `2x < N`.
    pub fn step(&self, x: &Value) -> Result<Value> {
        let mismatch = || Error::BackendMismatch(self.backend.to_string());
        match (&self.bound, &self.slope, x) {
            (Value::Rational(n), Value::Rational(a), Value::Rational(x)) => {
                if x > n {
                    return Err(self.domain_error(&Value::Rational(x.clone())));
                }
                let base = if x.double() < *n {
                    x.clone()
                } else {
                    n.checked_sub(x).expect("x <= N")
                };
                Ok(Value::Rational(a * &base))
            }
            (Value::Fixed(n), _, Value::Fixed(x)) => {
                if x.spec() != n.spec() {
                    return Err(mismatch());
                }
                if x.magnitude() > n.magnitude() {
                    return Err(self.domain_error(&Value::Fixed(x.clone())));
                }
                let base = if (x.magnitude() << 1usize) < *n.magnitude() {
                    x.clone()
                } else {
                    binary::subtract_fixed(n, x)?
                };
                Ok(Value::Fixed(binary::double_value(&base)?))
            }
            (Value::Binary64(n), Value::Binary64(a), Value::Binary64(x)) => {
                if !(0.0..=*n).contains(x) {
                    return Err(self.domain_error(&Value::Binary64(*x)));
                }
                Ok(Value::Binary64(if 2.0 * x < *n {
                    a * x
                } else {
                    a * (n - x)
                }))
            }
            (Value::Binary32(n), Value::Binary32(a), Value::Binary32(x)) => {
                if !(0.0..=*n).contains(x) {
                    return Err(self.domain_error(&Value::Binary32(*x)));
                }
                Ok(Value::Binary32(if 2.0 * x < *n {
                    a * x
                } else {
                    a * (n - x)
                }))
            }
            _ => Err(mismatch()),
        }
    }

    /// `steps + 1` states starting with the represented initial condition.
    pub fn iterate(&self, x0: &ExactRational, steps: usize) -> Result<Vec<Value>> {
        let mut out = Vec::with_capacity(steps + 1);
        out.push(self.represent(x0)?);
        for _ in 0..steps {
            let next = self.step(out.last().expect("non-empty"))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Runs until a state repeats or `max_steps` steps have been taken.
    pub fn detect_cycle(&self, x0: &ExactRational, max_steps: usize) -> Result<OrbitOutcome> {
        let start = self.represent(x0)?;
        self.detect_cycle_from(x0.to_string(), start, max_steps)
    }

    /// Cycle search from a state that is already in the backend.
    pub fn detect_cycle_from(
        &self,
        x0_given: String,
        start: Value,
        max_steps: usize,
    ) -> Result<OrbitOutcome> {
        let represented = start.clone();
        let search = cycle::find_cycle(start, max_steps, |x| self.step(x))?;
        Ok(match search {
            CycleSearch::Found(rho) => {
                let cycle = rho.cycle().to_vec();
                OrbitOutcome::Cycle(OrbitReport {
                    x0_given,
                    x0_represented: represented,
                    backend: self.backend,
                    transient: rho.transient,
                    period: rho.period,
                    first_integer_step: rho.path.iter().position(Value::is_integer),
                    even_cycle: cycle.iter().all(Value::is_even_integer),
                    cycle,
                    trajectory: rho.path,
                })
            }
            CycleSearch::Exhausted { path } => OrbitOutcome::NoRevisit(BudgetReport {
                x0_given,
                x0_represented: represented,
                backend: self.backend,
                steps: max_steps,
                first_integer_step: path.iter().position(Value::is_integer),
                trajectory: path,
            }),
        })
    }
}

/// Transient, period and cycle of one computed trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    pub x0_given: String,
    pub x0_represented: Value,
    pub backend: Backend,
    pub transient: usize,
    pub period: usize,
    pub cycle: Vec<Value>,
    pub first_integer_step: Option<usize>,
    pub even_cycle: bool,
    /// Every distinct state, in order; `trajectory[transient..]` is the cycle.
    #[serde(skip)]
    pub trajectory: Vec<Value>,
}

impl OrbitReport {
    /// Cycle values as exact rationals, sorted.
    pub fn cycle_set(&self) -> Vec<ExactRational> {
        let mut v: Vec<_> = self.cycle.iter().map(Value::to_rational).collect();
        v.sort();
        v
    }
}

/// A search that used up its step budget without revisiting a state.
#[derive(Clone, Debug, Serialize)]
pub struct BudgetReport {
    pub x0_given: String,
    pub x0_represented: Value,
    pub backend: Backend,
    pub steps: usize,
    pub first_integer_step: Option<usize>,
    #[serde(skip)]
    pub trajectory: Vec<Value>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum OrbitOutcome {
    Cycle(OrbitReport),
    NoRevisit(BudgetReport),
}

impl OrbitOutcome {
    pub fn cycle(&self) -> Option<&OrbitReport> {
        match self {
            OrbitOutcome::Cycle(r) => Some(r),
            OrbitOutcome::NoRevisit(_) => None,
        }
    }

    pub fn trajectory(&self) -> &[Value] {
        match self {
            OrbitOutcome::Cycle(r) => &r.trajectory,
            OrbitOutcome::NoRevisit(b) => &b.trajectory,
        }
    }
}

/// Closed form of the n-th iterate for `a = 2`: a sawtooth with `2^n`
/// pieces of slope `±2^n` on `[iN/2^n, (i+1)N/2^n)`, rising on even `i`
/// and falling on odd `i`.
pub fn nth_iterate_closed_form(
    x: &ExactRational,
    n: u32,
    params: &TentParams,
) -> Result<ExactRational> {
    params.require_doubling("closed-form")?;
    params.check_domain(x)?;
    if n == 0 {
        return Err(Error::InvalidParams("closed form needs n >= 1".into()));
    }
    let pieces = BigInt::from(1u8) << n as usize;
    let bound = params.bound().as_big();
    let scaled = x.as_big() * BigRational::from_integer(pieces.clone());
    // Piece index, with x = N folded into the last piece.
    let i = (&scaled / bound).floor().to_integer().min(&pieces - 1u8);
    let value = if i.is_even() {
        scaled - bound * BigRational::from_integer(i)
    } else {
        bound * BigRational::from_integer(i + 1u8) - scaled
    };
    ExactRational::from_big(value)
}

/// Per-step deviations of a computed trajectory from the exact one, and
/// their running sums `E_T`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSeries {
    pub deviations: Vec<ExactRational>,
    pub cumulative: Vec<ExactRational>,
}

impl ErrorSeries {
    pub fn total(&self) -> &ExactRational {
        self.cumulative.last().expect("series covers t = 0")
    }

    /// `(t, E_t)` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "E_t"])?;
        for (t, e) in self.cumulative.iter().enumerate() {
            w.write_record([t.to_string(), format_f64(e.to_f64())])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Accumulated deviation between `map` and exact arithmetic over `t = 0..=steps`.
pub fn error_accumulation(x0: &ExactRational, map: &TentMap, steps: usize) -> Result<ErrorSeries> {
    let exact = TentMap::new(map.params().clone(), Backend::Rational)?;
    let truth = exact.iterate(x0, steps)?;
    let computed = map.iterate(x0, steps)?;
    let deviations: Vec<ExactRational> = computed
        .iter()
        .zip(&truth)
        .map(|(c, t)| c.to_rational().abs_diff(&t.to_rational()))
        .collect();
    let mut cumulative = Vec::with_capacity(deviations.len());
    let mut sum = ExactRational::zero();
    for d in &deviations {
        sum = &sum + d;
        cumulative.push(sum.clone());
    }
    Ok(ErrorSeries {
        deviations,
        cumulative,
    })
}

/// `sin(πy)` in binary64.
pub fn sine_map_step(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain {
            value: y.to_string(),
            bound: "1".into(),
        });
    }
    Ok((std::f64::consts::PI * y).sin())
}

/// Outcome of a sine-map cycle search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SineOrbit {
    Cycle {
        transient: u64,
        period: u64,
        /// First state of the cycle.
        entry: f64,
    },
    NoCycleWithinBudget {
        max_steps: u64,
    },
}

/// Finds the transient and period of the binary64 sine map from `y0`.
///
/// Reports a cycle only when `transient + period <= max_steps`. Cycles can
/// be tens of millions of states long, so this uses Brent's constant-memory
/// search instead of a visited-state index.
pub fn sine_detect_cycle(y0: f64, max_steps: u64) -> Result<SineOrbit> {
    sine_map_step(y0)?;
    // A loop of length <= max_steps closes within 3 * max_steps evaluations.
    let evals = max_steps.saturating_mul(4).saturating_add(4);
    Ok(
        match cycle::brent(y0.to_bits(), evals, |b| {
            sine_map_step(f64::from_bits(*b)).map(f64::to_bits)
        })? {
            Some((transient, period, entry)) if transient + period <= max_steps => {
                SineOrbit::Cycle {
                    transient,
                    period,
                    entry: f64::from_bits(entry),
                }
            }
            _ => SineOrbit::NoCycleWithinBudget { max_steps },
        },
    )
}

impl fmt::Display for SineOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SineOrbit::Cycle {
                transient,
                period,
                entry,
            } => write!(f, "transient {transient}, period {period}, entry {entry:?}"),
            SineOrbit::NoCycleWithinBudget { max_steps } => {
                write!(f, "no cycle within {max_steps} steps")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_decimal;
    use proptest::prelude::*;

    fn q(n: u64, d: u64) -> ExactRational {
        ExactRational::from_ratio(n, d).unwrap()
    }

    fn fixed(p: u32, qb: u32) -> Backend {
        Backend::Fixed(PrecisionSpec::new(p, qb).unwrap())
    }

    fn decimals(values: &[Value]) -> Vec<String> {
        values.iter().map(Value::to_decimal_string).collect()
    }

    #[test]
    fn exact_steps() {
        let map = TentMap::new(TentParams::integer(100).unwrap(), Backend::Rational).unwrap();
        let traj = map.iterate(&q(19, 1), 3).unwrap();
        assert_eq!(decimals(&traj), ["19", "38", "76", "48"]);
        let s = |x: u64| map.step(&Value::Rational(q(x, 1))).unwrap().to_rational();
        assert_eq!(s(50), q(100, 1));
        assert_eq!(s(100), q(0, 1));
    }

    #[test]
    fn fixed_step_after_three_quarters_is_one_half() {
        let map = TentMap::new(TentParams::integer(1).unwrap(), fixed(1, 4)).unwrap();
        let x = map.represent(&q(3, 4)).unwrap();
        assert_eq!(x.bit_string().unwrap(), "0.1100");
        let y = map.step(&x).unwrap();
        assert_eq!(y.bit_string().unwrap(), "0.1000");
        assert_eq!(y.to_rational(), q(1, 2));
    }

    #[test]
    fn five_bit_trajectory() {
        let map = TentMap::new(TentParams::integer(1).unwrap(), fixed(1, 4)).unwrap();
        let traj = map.iterate(&parse_decimal("0.4").unwrap(), 6).unwrap();
        assert_eq!(
            decimals(&traj),
            ["0.375", "0.75", "0.5", "1", "0", "0", "0"]
        );
        let bits: Vec<_> = traj.iter().map(|v| v.bit_string().unwrap()).collect();
        assert_eq!(
            bits[..5],
            ["0.0110", "0.1100", "0.1000", "1.0000", "0.0000"]
        );
    }

    #[test]
    fn exact_orbits() {
        let map = TentMap::new(TentParams::integer(1).unwrap(), Backend::Rational).unwrap();
        let traj = map.iterate(&q(2, 5), 4).unwrap();
        assert_eq!(decimals(&traj), ["0.4", "0.8", "0.4", "0.8", "0.4"]);

        let map = TentMap::new(TentParams::integer(100).unwrap(), Backend::Rational).unwrap();
        let traj = map.iterate(&q(25, 2), 4).unwrap();
        assert_eq!(decimals(&traj), ["12.5", "25", "50", "100", "0"]);
    }

    #[test]
    fn domain_and_backend_errors() {
        let map = TentMap::new(TentParams::integer(100).unwrap(), Backend::Binary64).unwrap();
        assert!(matches!(
            map.represent(&q(101, 1)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            map.step(&Value::Binary64(100.5)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            map.step(&Value::Binary32(1.0)),
            Err(Error::BackendMismatch(_))
        ));
        let fx = TentMap::new(TentParams::integer(100).unwrap(), fixed(8, 4)).unwrap();
        let other = TentMap::new(TentParams::integer(100).unwrap(), fixed(8, 5)).unwrap();
        let v = other.represent(&q(3, 1)).unwrap();
        assert!(matches!(fx.step(&v), Err(Error::BackendMismatch(_))));
    }

    #[test]
    fn fixed_backend_rejects_other_slopes_and_small_capacity() {
        let params = TentParams::new(q(3, 1), q(1, 1)).unwrap();
        assert!(matches!(
            TentMap::new(params.clone(), fixed(2, 4)),
            Err(Error::UnsupportedSlope(..))
        ));
        assert!(TentMap::new(params, Backend::Rational).is_ok());
        assert!(matches!(
            TentMap::new(TentParams::integer(100).unwrap(), fixed(6, 4)),
            Err(Error::Overflow { .. })
        ));
        assert!(TentParams::new(q(0, 1), q(1, 1)).is_err());
        assert!(TentParams::new(q(2, 1), q(0, 1)).is_err());
    }

    #[test]
    fn backend_parsing() {
        assert_eq!("rational".parse::<Backend>().unwrap(), Backend::Rational);
        assert_eq!("f64".parse::<Backend>().unwrap(), Backend::Binary64);
        assert_eq!("f32".parse::<Backend>().unwrap(), Backend::Binary32);
        assert_eq!("fixed:1,4".parse::<Backend>().unwrap(), fixed(1, 4));
        assert_eq!(
            Backend::parse_for_bound("fixed:17", &q(100, 1)).unwrap(),
            fixed(8, 17)
        );
        for bad in ["fixed", "fixed:a,b", "f16", "fixed:0,3"] {
            assert!(bad.parse::<Backend>().is_err(), "{bad}");
        }
        assert_eq!(fixed(7, 8).to_string(), "fixed:7,8");
    }

    #[test]
    fn closed_form_examples() {
        let p100 = TentParams::integer(100).unwrap();
        let p1 = TentParams::integer(1).unwrap();
        assert_eq!(
            nth_iterate_closed_form(&q(30, 1), 2, &p100).unwrap(),
            q(80, 1)
        );
        assert_eq!(nth_iterate_closed_form(&q(1, 8), 3, &p1).unwrap(), q(1, 1));
        assert_eq!(
            nth_iterate_closed_form(&q(0, 1), 1, &p100).unwrap(),
            q(0, 1)
        );
        assert_eq!(
            nth_iterate_closed_form(&q(100, 1), 5, &p100).unwrap(),
            q(0, 1)
        );
        assert!(nth_iterate_closed_form(&q(101, 1), 1, &p100).is_err());
        assert!(nth_iterate_closed_form(&q(1, 1), 0, &p100).is_err());
    }

    #[test]
    fn cycle_detection_four_point_two_three() {
        // 1085/256 is dyadic, so every binary backend sees the same orbit.
        let x0 = parse_decimal("4.23828125").unwrap();
        for backend in [
            fixed(8, 8),
            fixed(8, 20),
            Backend::Binary64,
            Backend::Binary32,
        ] {
            let map = TentMap::new(TentParams::integer(100).unwrap(), backend).unwrap();
            let report = map.detect_cycle(&x0, 10_000).unwrap();
            let report = report.cycle().expect("finite-state backends cycle");
            assert_eq!(report.first_integer_step, Some(8), "{backend}");
            assert_eq!(report.trajectory[8].to_rational(), q(85, 1));
            assert_eq!(report.cycle_set(), vec![q(40, 1), q(80, 1)]);
            assert_eq!(report.period, 2);
            assert!(report.even_cycle);
        }
    }

    #[test]
    fn n_equals_one_collapses_to_zero() {
        for backend in [
            fixed(1, 4),
            fixed(2, 30),
            Backend::Binary64,
            Backend::Binary32,
        ] {
            let map = TentMap::new(TentParams::integer(1).unwrap(), backend).unwrap();
            let report = map.detect_cycle(&q(2, 5), 100_000).unwrap();
            let report = report.cycle().unwrap();
            assert_eq!(report.cycle_set(), vec![q(0, 1)]);
            assert_eq!(report.period, 1);
        }
    }

    #[test]
    fn budget_exhaustion_is_a_finding() {
        let map = TentMap::new(TentParams::integer(1).unwrap(), Backend::Rational).unwrap();
        let out = map.detect_cycle(&q(1, 3), 0).unwrap();
        assert!(matches!(out, OrbitOutcome::NoRevisit(_)));
        // 1/3 -> 2/3 -> 2/3 in exact arithmetic.
        let out = map.detect_cycle(&q(1, 3), 5).unwrap();
        assert_eq!(out.cycle().unwrap().cycle_set(), vec![q(2, 3)]);
        assert!(!out.cycle().unwrap().even_cycle);
    }

    #[test]
    fn error_series_five_bit() {
        let map = TentMap::new(TentParams::integer(1).unwrap(), fixed(1, 4)).unwrap();
        let series = error_accumulation(&q(2, 5), &map, 10).unwrap();
        let expected = [
            q(1, 40),
            q(1, 20),
            q(1, 10),
            q(1, 5),
            q(2, 5),
            q(4, 5),
            q(2, 5),
            q(4, 5),
            q(2, 5),
            q(4, 5),
            q(2, 5),
        ];
        assert_eq!(series.deviations, expected);
        assert_eq!(*series.total(), q(35, 8));
    }

    #[test]
    fn error_series_is_zero_on_exact_cycles() {
        for backend in [Backend::Rational, fixed(8, 3), Backend::Binary64] {
            let map = TentMap::new(TentParams::integer(100).unwrap(), backend).unwrap();
            let series = error_accumulation(&q(40, 1), &map, 50).unwrap();
            assert!(series.cumulative.iter().all(ExactRational::is_zero));
        }
        let map = TentMap::new(TentParams::integer(1).unwrap(), Backend::Rational).unwrap();
        let series = error_accumulation(&q(2, 7), &map, 50).unwrap();
        assert!(series.total().is_zero());
    }

    #[test]
    fn error_csv() {
        let map = TentMap::new(TentParams::integer(1).unwrap(), fixed(1, 4)).unwrap();
        let series = error_accumulation(&q(2, 5), &map, 2).unwrap();
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,E_t\n0,0.025\n1,0.075\n2,0.175\n"
        );
    }

    #[test]
    fn sine_map_basics() {
        assert_eq!(sine_map_step(0.0).unwrap(), 0.0);
        assert_eq!(sine_map_step(0.5).unwrap(), 1.0);
        assert!(sine_map_step(1.0).unwrap().abs() < 1e-15);
        assert!(sine_map_step(1.5).is_err());
        assert!(sine_map_step(-0.1).is_err());
        assert_eq!(
            sine_detect_cycle(0.0, 10).unwrap(),
            SineOrbit::Cycle {
                transient: 0,
                period: 1,
                entry: 0.0
            }
        );
        assert_eq!(
            sine_detect_cycle(0.4, 1000).unwrap(),
            SineOrbit::NoCycleWithinBudget { max_steps: 1000 }
        );
    }

    #[test]
    fn orbit_report_json() {
        let map = TentMap::new(TentParams::integer(100).unwrap(), Backend::Binary64).unwrap();
        let out = map.detect_cycle(&q(25, 2), 100).unwrap();
        let json = serde_json::to_value(&out).unwrap();
        assert_eq!(json["outcome"], "cycle");
        assert_eq!(json["x0_given"], "12.5");
        assert_eq!(json["backend"], "f64");
        assert_eq!(json["transient"], 4);
        assert_eq!(json["period"], 1);
        assert_eq!(json["cycle"], serde_json::json!(["0"]));
        assert_eq!(json["even_cycle"], true);
        assert_eq!(json["first_integer_step"], 1);
    }

    fn arb_point(bound: u64) -> impl Strategy<Value = ExactRational> {
        (1u64..1 << 24).prop_flat_map(move |d| (0..=bound * d).prop_map(move |n| q(n, d)))
    }

    proptest! {
        #[test]
        fn range_is_preserved(x in arb_point(100), qb in 0u32..30) {
            let params = TentParams::integer(100).unwrap();
            for backend in [Backend::Rational, Backend::Binary64, Backend::Binary32,
                            Backend::parse_for_bound(&format!("fixed:{qb}"), params.bound()).unwrap()] {
                let map = TentMap::new(params.clone(), backend).unwrap();
                let y = map.step(&map.represent(&x).unwrap()).unwrap().to_rational();
                prop_assert!(y <= 100u64);
            }
        }

        #[test]
        fn fixed_step_agrees_with_exact_on_grid_points(m in 0u64..100 << 12, qb in 0u32..13) {
            let params = TentParams::integer(100).unwrap();
            let x = ExactRational::from_ratio(m % ((100 << qb) + 1), 1 << qb).unwrap();
            let exact = TentMap::new(params.clone(), Backend::Rational).unwrap();
            let fx = TentMap::new(params.clone(), Backend::parse_for_bound(&format!("fixed:{qb}"), params.bound()).unwrap()).unwrap();
            let a = exact.step(&Value::Rational(x.clone())).unwrap();
            let b = fx.step(&fx.represent(&x).unwrap()).unwrap();
            prop_assert_eq!(a.to_rational(), b.to_rational());
        }

        #[test]
        fn error_sums_are_monotone(x in arb_point(1), qb in 0u32..12) {
            let params = TentParams::integer(1).unwrap();
            let map = TentMap::new(params.clone(), Backend::parse_for_bound(&format!("fixed:{qb}"), params.bound()).unwrap()).unwrap();
            let s = error_accumulation(&x, &map, 40).unwrap();
            prop_assert!(s.cumulative.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn integers_step_to_even_integers() {
        for n in 1..=40u64 {
            let map = TentMap::new(TentParams::integer(n).unwrap(), Backend::Rational).unwrap();
            for x in 0..=n {
                let y = map.step(&Value::Rational(q(x, 1))).unwrap();
                assert!(y.is_even_integer(), "N={n} x={x}");
            }
        }
    }
}
