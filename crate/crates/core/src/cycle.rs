//! Transient/period detection for iterated maps on finite state spaces.

use std::collections::HashMap;
use std::hash::Hash;

/// A trajectory that revisited a state.
///
/// `path` holds every distinct state in visiting order, so the cycle is
/// `path[transient..]` and stepping `path.last()` lands on `path[transient]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rho<S> {
    pub path: Vec<S>,
    pub transient: usize,
    pub period: usize,
}

impl<S> Rho<S> {
    pub fn cycle(&self) -> &[S] {
        &self.path[self.transient..]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CycleSearch<S> {
    Found(Rho<S>),
    /// No state repeated within the step budget; `path` has `max_steps + 1`
    /// states.
    Exhausted {
        path: Vec<S>,
    },
}

/// Iterates `step` from `start`, indexing every state by the step at which
/// it was first seen, until a state repeats or `max_steps` steps are taken.
pub fn find_cycle<S, E>(
    start: S,
    max_steps: usize,
    mut step: impl FnMut(&S) -> Result<S, E>,
) -> Result<CycleSearch<S>, E>
where
    S: Clone + Eq + Hash,
{
    let mut first_seen: HashMap<S, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut current = start;
    for t in 0..=max_steps {
        if let Some(&s) = first_seen.get(&current) {
            return Ok(CycleSearch::Found(Rho {
                path,
                transient: s,
                period: t - s,
            }));
        }
        first_seen.insert(current.clone(), t);
        let next = if t < max_steps {
            Some(step(&current)?)
        } else {
            None
        };
        path.push(current);
        match next {
            Some(n) => current = n,
            None => break,
        }
    }
    Ok(CycleSearch::Exhausted { path })
}

/// Constant-memory transient/period search (Brent).
///
/// Returns `(transient, period, first cycle state)`, or `None` when the map
/// was evaluated `max_evals` times in the search phase without closing a
/// loop.
pub fn brent<S, E>(
    start: S,
    max_evals: u64,
    mut step: impl FnMut(&S) -> Result<S, E>,
) -> Result<Option<(u64, u64, S)>, E>
where
    S: Clone + PartialEq,
{
    let mut power = 1u64;
    let mut period = 1u64;
    let mut tortoise = start.clone();
    let mut hare = step(&start)?;
    let mut evals = 1u64;
    while tortoise != hare {
        if evals >= max_evals {
            return Ok(None);
        }
        if power == period {
            tortoise = hare.clone();
            power *= 2;
            period = 0;
        }
        hare = step(&hare)?;
        period += 1;
        evals += 1;
    }

    let mut tortoise = start.clone();
    let mut hare = start;
    for _ in 0..period {
        hare = step(&hare)?;
    }
    let mut transient = 0u64;
    while tortoise != hare {
        tortoise = step(&tortoise)?;
        hare = step(&hare)?;
        transient += 1;
    }
    Ok(Some((transient, period, tortoise)))
}
