use std::io::Write;

use serde::Serialize;

use crate::dynamics::format_f64;
use crate::error::{Error, Result};

/// Equal-width bin counts over `[0, bound]`, bins right-open except the last.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub bound: f64,
    pub counts: Vec<u64>,
    pub total: u64,
    pub sup_norm: f64,
    pub chi_square: f64,
}

/// Distance of a histogram from the uniform density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Uniformity {
    /// `max_b |count_b / total - 1/B|`
    pub sup_norm: f64,
    /// `sum_b (count_b - total/B)^2 / (total/B)`
    pub chi_square: f64,
}

pub fn build_histogram(values: &[f64], bound: f64, bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bins < 2 {
        return Err(Error::Config(format!("need at least 2 bins, got {bins}")));
    }
    if !(bound.is_finite() && bound > 0.0) {
        return Err(Error::InvalidParams(format!("histogram bound {bound}")));
    }
    let mut counts = vec![0u64; bins];
    for &v in values {
        if !(0.0..=bound).contains(&v) {
            return Err(Error::Domain {
                value: format_f64(v),
                bound: format_f64(bound),
            });
        }
        let b = ((v / bound) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let total = values.len() as u64;
    let u = metrics(&counts, total);
    Ok(Histogram {
        bound,
        counts,
        total,
        sup_norm: u.sup_norm,
        chi_square: u.chi_square,
    })
}

pub fn uniformity_metrics(h: &Histogram) -> Result<Uniformity> {
    if h.total == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(metrics(&h.counts, h.total))
}

fn metrics(counts: &[u64], total: u64) -> Uniformity {
    let bins = counts.len() as f64;
    let total = total as f64;
    let expected = total / bins;
    let sup_norm = counts
        .iter()
        .map(|&c| (c as f64 / total - 1.0 / bins).abs())
        .fold(0.0, f64::max);
    let chi_square = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    Uniformity {
        sup_norm,
        chi_square,
    }
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_edges(&self, b: usize) -> (f64, f64) {
        let width = self.bound / self.bins() as f64;
        let hi = if b + 1 == self.bins() {
            self.bound
        } else {
            width * (b + 1) as f64
        };
        (width * b as f64, hi)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "count"])?;
        for (b, c) in self.counts.iter().enumerate() {
            let (lo, hi) = self.bin_edges(b);
            w.write_record([format_f64(lo), format_f64(hi), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfectly_uniform() {
        let values: Vec<f64> = (0..100).map(|i| i as f64 + 0.5).collect();
        let h = build_histogram(&values, 100.0, 20).unwrap();
        assert!(h.counts.iter().all(|&c| c == 5));
        let u = uniformity_metrics(&h).unwrap();
        assert_eq!(u.sup_norm, 0.0);
        assert_eq!(u.chi_square, 0.0);
    }

    #[test]
    fn single_spike() {
        let h = build_histogram(&[3.0; 50], 100.0, 20).unwrap();
        assert!((h.sup_norm - 0.95).abs() < 1e-12);
        assert_eq!(h.counts[0], 50);
        // chi^2 = (50 - 2.5)^2/2.5 + 19 * 2.5
        assert!((h.chi_square - (47.5f64.powi(2) / 2.5 + 19.0 * 2.5)).abs() < 1e-9);
    }

    #[test]
    fn cycle_spikes_land_in_their_bins() {
        let cycle = [8.0, 16.0, 24.0, 32.0, 48.0, 56.0, 64.0, 72.0, 88.0, 96.0];
        let values: Vec<f64> = cycle.iter().cycle().take(1000).copied().collect();
        let h = build_histogram(&values, 100.0, 20).unwrap();
        let occupied: Vec<usize> = (0..20).filter(|&b| h.counts[b] > 0).collect();
        assert_eq!(occupied, vec![1, 3, 4, 6, 9, 11, 12, 14, 17, 19]);
        assert!(occupied.iter().all(|&b| h.counts[b] == 100));
        assert_eq!(h.counts.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn edges_and_endpoints() {
        let h = build_histogram(&[0.0, 100.0, 5.0, 99.999], 100.0, 20).unwrap();
        assert_eq!(h.counts[0], 1);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[19], 2);
        assert_eq!(h.bin_edges(0), (0.0, 5.0));
        assert_eq!(h.bin_edges(19), (95.0, 100.0));
    }

    #[test]
    fn errors() {
        assert_eq!(build_histogram(&[], 100.0, 20), Err(Error::EmptyInput));
        assert!(matches!(
            build_histogram(&[101.0], 100.0, 20),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            build_histogram(&[-0.5], 100.0, 20),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            build_histogram(&[1.0], 100.0, 1),
            Err(Error::Config(_))
        ));
        let empty = Histogram {
            bound: 1.0,
            counts: vec![0, 0],
            total: 0,
            sup_norm: 0.0,
            chi_square: 0.0,
        };
        assert_eq!(uniformity_metrics(&empty), Err(Error::EmptyInput));
    }

    #[test]
    fn csv_header() {
        let h = build_histogram(&[1.0, 2.0], 4.0, 2).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "bin_lo,bin_hi,count\n0.0,2.0,1\n2.0,4.0,1\n"
        );
    }

    #[test]
    fn conservation() {
        let values: Vec<f64> = (0..997).map(|i| (i as f64 * 0.731) % 7.0).collect();
        for bins in [2, 3, 7, 20, 64] {
            let h = build_histogram(&values, 7.0, bins).unwrap();
            assert_eq!(h.counts.iter().sum::<u64>(), values.len() as u64);
        }
    }
}
