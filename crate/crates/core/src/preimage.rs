//! Inverse branches of the doubling tent map.
//!
//! Every `x` in `[0, N]` has the preimages `x/2` (rising branch) and
//! `N - x/2` (falling branch). Restricting to integers gives the basin
//! forests hanging off each integer cycle; choosing a branch at random at
//! every step gives a backward walk whose reversal is an exact forward
//! trajectory that no finite-precision forward run can follow.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;

use log::warn;
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::binary::PrecisionSpec;
use crate::dynamics::{Backend, OrbitOutcome, TentMap, TentParams, Value};
use crate::error::{Error, Result};
use crate::rational::ExactRational;
use crate::rng::{CoinFlips, COIN_ALGORITHM};

/// Default bound on the fractional binary digits a walk value may carry.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

/// Fractional digits used when writing walk values to CSV.
pub const WALK_CSV_DIGITS: usize = 24;

/// The two preimages of a point; they coincide only at `x = N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreimagePair {
    pub left: ExactRational,
    pub right: ExactRational,
}

impl PreimagePair {
    pub fn is_single(&self) -> bool {
        self.left == self.right
    }

    pub fn choose(&self, right: bool) -> &ExactRational {
        if right {
            &self.right
        } else {
            &self.left
        }
    }
}

pub fn preimages_of(x: &ExactRational, params: &TentParams) -> Result<PreimagePair> {
    params.require_doubling("preimage")?;
    params.check_domain(x)?;
    let left = x.half();
    let right = params.bound().checked_sub(&left).expect("x/2 <= N/2 <= N");
    Ok(PreimagePair { left, right })
}

/// One integer in a basin, with the edge to the value it maps to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasinNode {
    pub value: u64,
    pub successor: u64,
    /// Steps needed to reach the cycle; 0 for cycle members.
    pub depth: usize,
}

/// Integer preimage trees rooted on an integer cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasinForest {
    pub bound: u64,
    pub cycle: Vec<u64>,
    /// Breadth-first order, cycle members first.
    pub nodes: Vec<BasinNode>,
}

fn tent_int(x: u64, bound: u64) -> u64 {
    if 2 * x < bound {
        2 * x
    } else {
        2 * (bound - x)
    }
}

/// Breadth-first enumeration of every integer that reaches `cycle`.
///
/// Odd integers have no integer preimages, so they are always leaves.
pub fn integer_basin_forest(cycle: &[u64], bound: u64) -> Result<BasinForest> {
    if cycle.is_empty() || bound == 0 {
        return Err(Error::NotACycle("empty cycle or zero bound".into()));
    }
    let members: BTreeSet<u64> = cycle.iter().copied().collect();
    if members.len() != cycle.len() {
        return Err(Error::NotACycle(format!("{cycle:?} repeats a value")));
    }
    for (i, &c) in cycle.iter().enumerate() {
        let next = cycle[(i + 1) % cycle.len()];
        if c > bound || tent_int(c, bound) != next {
            return Err(Error::NotACycle(format!(
                "{c} does not map to {next} for N = {bound}"
            )));
        }
    }

    let mut seen = members;
    let mut nodes: Vec<BasinNode> = cycle
        .iter()
        .enumerate()
        .map(|(i, &c)| BasinNode {
            value: c,
            successor: cycle[(i + 1) % cycle.len()],
            depth: 0,
        })
        .collect();
    let mut queue: VecDeque<BasinNode> = nodes.iter().copied().collect();
    while let Some(node) = queue.pop_front() {
        if node.value % 2 == 1 {
            continue;
        }
        let half = node.value / 2;
        for child in [half, bound - half] {
            if seen.insert(child) {
                let n = BasinNode {
                    value: child,
                    successor: node.value,
                    depth: node.depth + 1,
                };
                nodes.push(n);
                queue.push_back(n);
            }
        }
    }
    Ok(BasinForest {
        bound,
        cycle: cycle.to_vec(),
        nodes,
    })
}

impl BasinForest {
    pub fn node_set(&self) -> BTreeSet<u64> {
        self.nodes.iter().map(|n| n.value).collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(parent, child, depth)` for every tree edge; parent is the value the
    /// child maps to.
    pub fn edges(&self) -> impl Iterator<Item = (u64, u64, usize)> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.depth > 0)
            .map(|n| (n.successor, n.value, n.depth))
    }

    pub fn children_of(&self, value: u64) -> Vec<u64> {
        let mut c: Vec<u64> = self
            .nodes
            .iter()
            .filter(|n| n.depth > 0 && n.successor == value)
            .map(|n| n.value)
            .collect();
        c.sort_unstable();
        c
    }

    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["parent", "child", "depth"])?;
        for (p, c, d) in self.edges() {
            w.write_record([p.to_string(), c.to_string(), d.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Indented text: each cycle member followed by its preimage tree.
    pub fn render_text(&self) -> String {
        let mut by_parent: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for (p, c, _) in self.edges() {
            by_parent.entry(p).or_default().push(c);
        }
        let mut out = format!("cycle {:?} (N = {})\n", self.cycle, self.bound);
        fn walk(out: &mut String, by_parent: &BTreeMap<u64, Vec<u64>>, v: u64, indent: usize) {
            if let Some(children) = by_parent.get(&v) {
                let mut children = children.clone();
                children.sort_unstable();
                for c in children {
                    out.push_str(&format!("{}{}\n", "  ".repeat(indent), c));
                    walk(out, by_parent, c, indent + 1);
                }
            }
        }
        for &c in &self.cycle {
            out.push_str(&format!("{c}\n"));
            walk(&mut out, &by_parent, c, 1);
        }
        out
    }
}

/// A random sequence of preimages `x_0, x_-1, ..., x_-p` starting at `x_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BackwardWalk {
    pub seed: u64,
    pub algorithm: &'static str,
    pub start: ExactRational,
    /// `values[k]` is `x_-k`; `values[0]` is the start.
    pub values: Vec<ExactRational>,
    /// `choices[k-1]` picked `values[k]`: `false` for `x/2`, `true` for `N - x/2`.
    pub choices: Vec<bool>,
    pub precision_cap: u32,
    /// First index whose value was truncated onto the `2^-cap` grid.
    pub truncated_from: Option<usize>,
}

impl BackwardWalk {
    pub fn steps(&self) -> usize {
        self.choices.len()
    }

    pub fn is_exact(&self) -> bool {
        self.truncated_from.is_none()
    }

    /// The first `steps` preimages of this walk.
    pub fn prefix(&self, steps: usize) -> BackwardWalk {
        let steps = steps.min(self.steps());
        BackwardWalk {
            seed: self.seed,
            algorithm: self.algorithm,
            start: self.start.clone(),
            values: self.values[..=steps].to_vec(),
            choices: self.choices[..steps].to_vec(),
            precision_cap: self.precision_cap,
            truncated_from: self.truncated_from.filter(|&t| t <= steps),
        }
    }

    /// The preimages (excluding the start) as binary64, for histograms.
    pub fn preimages_f64(&self) -> Vec<f64> {
        self.values[1..].iter().map(ExactRational::to_f64).collect()
    }

    /// `step,value,choice` rows; values are decimal expansions truncated to
    /// [`WALK_CSV_DIGITS`] fractional digits, `choice` is 0 for `x/2`, 1 for
    /// `N - x/2` and empty for the start.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "value", "choice"])?;
        for (k, v) in self.values.iter().enumerate() {
            let choice = match k {
                0 => String::new(),
                _ => u8::from(self.choices[k - 1]).to_string(),
            };
            w.write_record([
                k.to_string(),
                v.to_decimal_truncated(WALK_CSV_DIGITS),
                choice,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn odd_part(mut n: BigUint) -> (BigUint, u32) {
    let tz = n.trailing_zeros().unwrap_or(0);
    n >>= tz as usize;
    (n, tz as u32)
}

/// Walk values share the odd denominator `odd`: `x = m / (odd · 2^k)`.
struct ScaledWalk {
    odd: BigUint,
    /// `N · odd · 2^bound_exp`.
    bound_numer: BigUint,
    bound_exp: u32,
    numer: BigUint,
    exp: u32,
}

impl ScaledWalk {
    fn new(start: &ExactRational, bound: &ExactRational) -> Self {
        let (s_odd, s_exp) = odd_part(start.denominator());
        let (n_odd, n_exp) = odd_part(bound.denominator());
        let odd = s_odd.lcm(&n_odd);
        let exp = s_exp.max(n_exp);
        let numer = (start.numerator() * (&odd / &s_odd)) << (exp - s_exp) as usize;
        let bound_numer = bound.numerator() * (&odd / &n_odd);
        ScaledWalk {
            odd,
            bound_numer,
            bound_exp: n_exp,
            numer,
            exp,
        }
    }

    fn step(&mut self, right: bool) {
        self.exp += 1;
        if right {
            let n = &self.bound_numer << (self.exp - self.bound_exp) as usize;
            self.numer = n - &self.numer;
        }
    }

    /// Floors the value onto the `2^-cap` grid.
    fn truncate(&mut self, cap: u32) {
        let shift = (self.exp - cap) as usize;
        let divisor = &self.odd << shift;
        self.numer = (&self.numer / divisor) * &self.odd;
        self.exp = cap;
    }

    fn value(&self) -> ExactRational {
        if self.numer.is_zero() {
            return ExactRational::zero();
        }
        let tz = self
            .numer
            .trailing_zeros()
            .map_or(0, |t| t.min(u64::from(self.exp)));
        let numer = &self.numer >> tz as usize;
        let exp = self.exp - tz as u32;
        let g = numer.gcd(&self.odd);
        let den = (&self.odd / &g) << exp as usize;
        if g.is_one() {
            ExactRational::from_reduced_parts(numer, den)
        } else {
            ExactRational::from_reduced_parts(numer / g, den)
        }
    }
}

pub fn backward_random_walk(
    start: &ExactRational,
    steps: usize,
    seed: u64,
    params: &TentParams,
) -> Result<BackwardWalk> {
    backward_random_walk_capped(start, steps, seed, params, DEFAULT_PRECISION_CAP)
}

/// Backward walk with an explicit precision cap. Values stay exact until
/// their denominator needs more than `precision_cap` factors of two; from
/// then on each value is floored onto the `2^-precision_cap` grid.
///
/// At `x = N` both branches give `N/2`; a bit is still drawn so choice
/// sequences stay aligned across starts.
pub fn backward_random_walk_capped(
    start: &ExactRational,
    steps: usize,
    seed: u64,
    params: &TentParams,
    precision_cap: u32,
) -> Result<BackwardWalk> {
    params.require_doubling("preimage")?;
    params.check_domain(start)?;
    let (_, bound_exp) = odd_part(params.bound().denominator());
    if precision_cap < bound_exp {
        return Err(Error::InvalidParams(format!(
            "precision cap {precision_cap} is below the {bound_exp} binary digits of N"
        )));
    }
    let mut coins = CoinFlips::new(seed);
    let mut scaled = ScaledWalk::new(start, params.bound());
    let mut values = Vec::with_capacity(steps + 1);
    let mut choices = Vec::with_capacity(steps);
    let mut truncated_from = None;
    values.push(start.clone());
    for k in 1..=steps {
        let right = coins.next_bit();
        scaled.step(right);
        if scaled.exp > precision_cap {
            if truncated_from.is_none() {
                warn!(
                    "backward walk exceeded {precision_cap} fractional bits at step {k}; \
                     truncating further values"
                );
                truncated_from = Some(k);
            }
            scaled.truncate(precision_cap);
        }
        choices.push(right);
        values.push(scaled.value());
    }
    Ok(BackwardWalk {
        seed,
        algorithm: COIN_ALGORITHM,
        start: start.clone(),
        values,
        choices,
        precision_cap,
        truncated_from,
    })
}

/// How forward iteration from the far end of a walk compares with the walk.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub steps: usize,
    /// False when the walk was truncated, so exact reproduction is not expected.
    pub exact_checked: bool,
    pub exact_reproduced: bool,
    pub exact_first_mismatch: Option<usize>,
    pub fixed_backend: Backend,
    /// First forward step `t` at which the fixed-point state differs from
    /// `x_{-p+t}`; `None` if it follows the walk all the way.
    pub first_divergence: Option<usize>,
    pub terminal: OrbitOutcome,
}

impl ConsistencyReport {
    pub fn ends_in_even_cycle(&self) -> bool {
        self.terminal.cycle().is_some_and(|r| r.even_cycle)
    }
}

/// Iterates forward from `x_-p` exactly and on the fixed-point grid `spec`,
/// comparing both with the reversed walk; the fixed-point run is then
/// followed until it cycles or `max_steps` is used up.
pub fn forward_consistency_check(
    walk: &BackwardWalk,
    spec: PrecisionSpec,
    params: &TentParams,
    max_steps: usize,
) -> Result<ConsistencyReport> {
    let p = walk.steps();
    let far_end = &walk.values[p];
    let expected = |t: usize| &walk.values[p - t];

    let exact_checked = walk.is_exact();
    let mut exact_first_mismatch = None;
    if exact_checked {
        let exact = TentMap::new(params.clone(), Backend::Rational)?;
        let forward = exact.iterate(far_end, p)?;
        exact_first_mismatch = forward
            .iter()
            .enumerate()
            .find(|(t, v)| v.to_rational() != *expected(*t))
            .map(|(t, _)| t);
    }

    let backend = Backend::Fixed(spec);
    let fixed = TentMap::new(params.clone(), backend)?;
    let forward = fixed.iterate(far_end, p)?;
    let first_divergence = forward
        .iter()
        .enumerate()
        .find(|(t, v)| v.to_rational() != *expected(*t))
        .map(|(t, _)| t);
    let start: Value = forward[0].clone();
    let terminal = fixed.detect_cycle_from(far_end.to_string(), start, max_steps)?;

    Ok(ConsistencyReport {
        steps: p,
        exact_checked,
        exact_reproduced: exact_checked && exact_first_mismatch.is_none(),
        exact_first_mismatch,
        fixed_backend: backend,
        first_divergence,
        terminal,
    })
}
