//! Values measured on first run and frozen as regression checks.

use tentlab::dynamics::{sine_detect_cycle, SineOrbit};
use tentlab::harness::{preset, run_experiment, RunResult};

#[test]
fn sine_map_cycle_from_0_4() {
    // The first repeated state lies far beyond 10^7 steps.
    let orbit = sine_detect_cycle(0.4, 100_000_000).unwrap();
    assert_eq!(
        orbit,
        SineOrbit::Cycle {
            transient: 29_625_269,
            period: 46_253_470,
            entry: 0.999_999_999_999_997_8,
        }
    );
    assert_eq!(
        sine_detect_cycle(0.4, 10_000_000).unwrap(),
        SineOrbit::NoCycleWithinBudget {
            max_steps: 10_000_000
        }
    );
}

#[test]
fn noninteger_bound_histogram() {
    let out = run_experiment(&preset("noninteger-N").unwrap()[0]).unwrap();
    let RunResult::ForwardHistogram { outcome, histogram } = out.result else {
        panic!("wrong result kind")
    };
    assert!(outcome.cycle().is_none());
    assert_eq!(histogram.sup_norm, 0.002284128597856705);
    assert_eq!(histogram.chi_square, 24.864568923851266);
}

#[test]
fn backward_walk_histogram() {
    let out = run_experiment(&preset("backward-histogram").unwrap()[0]).unwrap();
    let RunResult::Backward {
        walk,
        histogram,
        consistency,
    } = out.result
    else {
        panic!("wrong result kind")
    };
    assert_eq!(walk.truncated_from, Some(4097));
    assert_eq!(histogram.counts.iter().sum::<u64>(), 60_000);
    assert_eq!(histogram.sup_norm, 0.0016666666666666635);
    let terminal = consistency.terminal.cycle().unwrap();
    assert_eq!((terminal.transient, terminal.period), (21, 2));
}
