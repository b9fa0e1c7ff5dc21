//! Joint-histogram analysis of surviving chains.
//!
//! Counts are kept in a sparse map keyed by bin tuples, so building a
//! histogram costs O(h log h) in the archive length regardless of `Q^n`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orchestrator::CampaignResult;
use crate::params::SearchBox;
use crate::sampler::ArchivedSample;

#[derive(Debug, Clone, PartialEq)]
pub struct JointHistogram {
    bins: usize,
    bounds: SearchBox,
    counts: BTreeMap<Vec<usize>, u64>,
    total: u64,
}

impl JointHistogram {
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn bounds(&self) -> &SearchBox {
        &self.bounds
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn occupied(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, bin: &[usize]) -> u64 {
        self.counts.get(bin).copied().unwrap_or(0)
    }

    /// Occupied bins in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], u64)> {
        self.counts.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn interval(&self, dim: usize, bin: usize) -> BinInterval {
        let w = self.bounds.width(dim) / self.bins as f64;
        let lo = self.bounds.lo(dim);
        BinInterval {
            lo: lo + w * bin as f64,
            hi: if bin + 1 == self.bins { self.bounds.hi(dim) } else { lo + w * (bin + 1) as f64 },
        }
    }
}

/// A bin edge pair. Reported bins are half-open `[lo, hi)` except the last,
/// which includes the upper box edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinInterval {
    pub lo: f64,
    pub hi: f64,
}

impl BinInterval {
    /// Closed-interval containment, as when matching a bin against a
    /// reference value lying on a bin edge.
    pub fn encloses(&self, value: f64) -> bool {
        const EDGE_TOL: f64 = 1e-9;
        value >= self.lo - EDGE_TOL && value <= self.hi + EDGE_TOL
    }
}

impl std::fmt::Display for BinInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", fmt_edge(self.lo), fmt_edge(self.hi))
    }
}

fn fmt_edge(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}")
    }
}

fn bin_index(value: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let idx = (bins as f64 * (value - lo) / (hi - lo)).floor();
    (idx.max(0.0) as usize).min(bins - 1)
}

pub fn build_joint_histogram<'a, I>(samples: I, bins: usize, bounds: &SearchBox) -> Result<JointHistogram>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    if bins < 2 {
        return Err(Error::InvalidConfig("histograms need at least 2 bins per dimension".into()));
    }
    bounds.validate()?;
    let n = bounds.dim();
    let mut counts = BTreeMap::new();
    let mut total = 0;
    for x in samples {
        if x.len() != n {
            return Err(Error::InvalidConfig(format!("sample has {} coordinates, box has {n}", x.len())));
        }
        let mut key = Vec::with_capacity(n);
        for (j, v) in x.iter().enumerate() {
            let (lo, hi) = (bounds.lo(j), bounds.hi(j));
            if !(*v >= lo && *v <= hi) {
                return Err(Error::OutOfBox { dim: j, value: *v, lo, hi });
            }
            key.push(bin_index(*v, lo, hi, bins));
        }
        *counts.entry(key).or_insert(0) += 1;
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    Ok(JointHistogram { bins, bounds: bounds.clone(), counts, total })
}

pub fn histogram_of_archive(archive: &[ArchivedSample], bins: usize, bounds: &SearchBox) -> Result<JointHistogram> {
    build_joint_histogram(archive.iter().map(|s| s.params.as_slice()), bins, bounds)
}

/// Most occupied bin; ties go to the lexicographically smallest tuple.
pub fn best_bin(hist: &JointHistogram) -> Result<(Vec<usize>, u64)> {
    let mut best: Option<(&Vec<usize>, u64)> = None;
    for (k, &c) in &hist.counts {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((k, c));
        }
    }
    best.map(|(k, c)| (k.clone(), c)).ok_or(Error::EmptyHistogram)
}

/// Normalized occupancy of dimension `j` summed over all other dimensions.
pub fn marginal(hist: &JointHistogram, j: usize) -> Vec<f64> {
    assert!(j < hist.dim(), "dimension {j} out of range");
    let mut counts = vec![0u64; hist.bins];
    for (k, &c) in &hist.counts {
        counts[k[j]] += c;
    }
    counts.iter().map(|&c| c as f64 / hist.total as f64).collect()
}

/// Sums counts over the dimensions not listed in `dims`.
pub fn project(hist: &JointHistogram, dims: &[usize]) -> Result<JointHistogram> {
    if dims.is_empty() {
        return Err(Error::InvalidConfig("projection needs at least one dimension".into()));
    }
    let mut seen = dims.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) || seen.iter().any(|&d| d >= hist.dim()) {
        return Err(Error::InvalidConfig(format!("invalid projection dimensions {dims:?}")));
    }
    let mut counts = BTreeMap::new();
    for (k, &c) in &hist.counts {
        let key: Vec<usize> = dims.iter().map(|&d| k[d]).collect();
        *counts.entry(key).or_insert(0) += c;
    }
    Ok(JointHistogram {
        bins: hist.bins,
        bounds: SearchBox(dims.iter().map(|&d| hist.bounds.0[d]).collect()),
        counts,
        total: hist.total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MarginalCheck {
    pub dim: usize,
    pub marginal_peak_bin: usize,
    pub joint_best_bin: usize,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionReport {
    pub chain_id: usize,
    pub bins: usize,
    pub best_bin_index: Vec<usize>,
    pub best_bin: Vec<BinInterval>,
    pub best_bin_frequency: f64,
    pub best_sample: ArchivedSample,
    pub highest_posterior: f64,
    pub samples: u64,
    pub occupied_bins: usize,
    pub marginals: Vec<Vec<f64>>,
    pub marginal_checks: Vec<MarginalCheck>,
}

impl SolutionReport {
    pub fn from_archive(chain_id: usize, archive: &[ArchivedSample], bins: usize, bounds: &SearchBox) -> Result<Self> {
        let hist = histogram_of_archive(archive, bins, bounds)?;
        let (best, count) = best_bin(&hist)?;
        let best_sample = archive
            .iter()
            .fold(None::<&ArchivedSample>, |acc, s| match acc {
                Some(b) if b.posterior >= s.posterior => Some(b),
                _ => Some(s),
            })
            .cloned()
            .ok_or(Error::EmptyHistogram)?;
        let marginals: Vec<Vec<f64>> = (0..hist.dim()).map(|j| marginal(&hist, j)).collect();
        let marginal_checks = marginals
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let peak = m
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc })
                    .0;
                MarginalCheck { dim: j, marginal_peak_bin: peak, joint_best_bin: best[j], consistent: peak == best[j] }
            })
            .collect();
        Ok(Self {
            chain_id,
            bins,
            best_bin: best.iter().enumerate().map(|(j, &b)| hist.interval(j, b)).collect(),
            best_bin_index: best,
            best_bin_frequency: count as f64 / hist.total() as f64,
            highest_posterior: best_sample.posterior,
            best_sample,
            samples: hist.total(),
            occupied_bins: hist.occupied(),
            marginals,
            marginal_checks,
        })
    }

    /// Number of parameters whose best-bin interval encloses `truth`.
    pub fn matches(&self, truth: &[f64]) -> usize {
        self.best_bin.iter().zip(truth).filter(|(b, t)| b.encloses(**t)).count()
    }
}

/// One report per surviving chain, sorted by highest posterior, descending.
pub fn report(result: &CampaignResult, bins: usize) -> Result<Vec<SolutionReport>> {
    if result.survived_chains.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let mut reports = result
        .survived_chains
        .iter()
        .map(|c| SolutionReport::from_archive(c.chain_id, &c.archive, bins, &result.search_box))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| b.highest_posterior.total_cmp(&a.highest_posterior).then(a.chain_id.cmp(&b.chain_id)));
    Ok(reports)
}

/// Aligned text table: one row per solution with its best-bin intervals
/// and highest posterior, followed by the best point samples.
pub fn format_table(reports: &[SolutionReport], truth: Option<&[f64]>) -> String {
    let n = reports.first().map_or(0, |r| r.best_bin.len());
    let cells: Vec<Vec<String>> =
        reports.iter().map(|r| r.best_bin.iter().map(ToString::to_string).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(0).max(9);
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "");
    for j in 0..n {
        let _ = write!(out, " {:<width$}", format!("Para. {}", j + 1));
    }
    let _ = writeln!(out, " {:>12} {:>9}", "Highest PDF", "Bin freq");
    for (i, (r, row)) in reports.iter().zip(&cells).enumerate() {
        let _ = write!(out, "{:<10}", format!("Solu. {}", i + 1));
        for c in row {
            let _ = write!(out, " {c:<width$}");
        }
        let _ = writeln!(out, " {:>12.4} {:>9.4}", r.highest_posterior, r.best_bin_frequency);
    }
    if let Some(t) = truth {
        let _ = write!(out, "{:<10}", "Actual");
        for v in t {
            let _ = write!(out, " {:<width$}", fmt_edge(*v));
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Best archived samples:");
    for (i, r) in reports.iter().enumerate() {
        let pts: Vec<String> = r.best_sample.params.iter().map(|v| format!("{v:.4}")).collect();
        let _ = writeln!(
            out,
            "  Solu. {:<3} (chain {:>2})  [{}]  posterior {:.4}",
            i + 1,
            r.chain_id,
            pts.join(", "),
            r.best_sample.posterior
        );
    }
    let flagged: Vec<String> = reports
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            r.marginal_checks.iter().filter(|c| !c.consistent).map(move |c| {
                format!(
                    "  Solu. {}: parameter {} marginal peaks in bin {} but the joint best bin is {}",
                    i + 1,
                    c.dim + 1,
                    c.marginal_peak_bin,
                    c.joint_best_bin
                )
            })
        })
        .collect();
    if !flagged.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "Marginal/joint inconsistencies:");
        for f in flagged {
            let _ = writeln!(out, "{f}");
        }
    }
    out
}

/// CSV with per-dimension bin edges, count and relative frequency of every
/// occupied bin.
pub fn histogram_csv(hist: &JointHistogram) -> String {
    let mut out = String::new();
    let header: Vec<String> = (0..hist.dim()).flat_map(|j| [format!("lo{j}"), format!("hi{j}")]).collect();
    let _ = writeln!(out, "{},count,frequency", header.join(","));
    for (k, c) in hist.iter() {
        let edges: Vec<String> = k
            .iter()
            .enumerate()
            .flat_map(|(j, &b)| {
                let iv = hist.interval(j, b);
                [fmt_edge(iv.lo), fmt_edge(iv.hi)]
            })
            .collect();
        let _ = writeln!(out, "{},{c},{}", edges.join(","), c as f64 / hist.total() as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hist(samples: &[Vec<f64>], q: usize, n: usize) -> JointHistogram {
        build_joint_histogram(samples.iter().map(Vec::as_slice), q, &SearchBox::unit(n)).unwrap()
    }

    #[test]
    fn midpoint_floor_rule() {
        let h = hist(&[vec![0.5, 0.5, 0.5]], 2, 3);
        assert_eq!(best_bin(&h).unwrap(), (vec![1, 1, 1], 1));
    }

    #[test]
    fn upper_edge_clamps() {
        let h = hist(&[vec![1.0, 0.0]], 4, 2);
        assert_eq!(h.count(&[3, 0]), 1);
    }

    #[test]
    fn identical_samples_share_a_bin() {
        let h = hist(&vec![vec![0.31, 0.72]; 17], 10, 2);
        assert_eq!(h.occupied(), 1);
        assert_eq!(h.count(&[3, 7]), 17);
    }

    #[test]
    fn one_sample_per_bin_grid() {
        let q = 4;
        let mut samples = Vec::new();
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    samples.push(vec![
                        (a as f64 + 0.5) / q as f64,
                        (b as f64 + 0.5) / q as f64,
                        (c as f64 + 0.5) / q as f64,
                    ]);
                }
            }
        }
        let h = hist(&samples, q, 3);
        assert_eq!(h.occupied(), q * q * q);
        assert!(h.iter().all(|(_, c)| c == 1));
    }

    #[test]
    fn out_of_box_is_an_error() {
        let err = build_joint_histogram([[1.2f64].as_slice()], 2, &SearchBox::unit(1)).unwrap_err();
        assert!(matches!(err, Error::OutOfBox { dim: 0, .. }));
        let empty: Vec<&[f64]> = vec![];
        assert_eq!(build_joint_histogram(empty, 2, &SearchBox::unit(1)).unwrap_err(), Error::EmptyHistogram);
    }

    #[test]
    fn best_bin_dominant_and_ties() {
        let mut s = vec![vec![0.15, 0.15]; 6];
        s.extend(vec![vec![0.85, 0.85]; 4]);
        assert_eq!(best_bin(&hist(&s, 10, 2)).unwrap(), (vec![1, 1], 6));
        let tie = vec![vec![0.85, 0.05], vec![0.05, 0.85]];
        assert_eq!(best_bin(&hist(&tie, 10, 2)).unwrap().0, vec![0, 8]);
    }

    #[test]
    fn marginal_and_projection_consistency() {
        let s: Vec<Vec<f64>> = (0..50).map(|i| vec![(i % 7) as f64 / 7.0, (i % 3) as f64 / 3.0]).collect();
        let h = hist(&s, 5, 2);
        let h1 = hist(&s.iter().map(|x| vec![x[0]]).collect::<Vec<_>>(), 5, 1);
        assert_eq!(marginal(&h1, 0), marginal(&h, 0));
        assert!((marginal(&h, 1).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(project(&h, &[0, 1]).unwrap(), h);
        let p = project(&h, &[1]).unwrap();
        for (b, m) in marginal(&h, 1).iter().enumerate() {
            assert!((p.count(&[b]) as f64 - m * h.total() as f64).abs() < 1e-9);
        }
        assert!(project(&h, &[]).is_err());
        assert!(project(&h, &[0, 0]).is_err());
        assert!(project(&h, &[2]).is_err());
    }

    #[test]
    fn report_for_single_bin_chain() {
        let archive: Vec<ArchivedSample> =
            (0..10).map(|i| ArchivedSample { params: vec![0.71, 0.62], posterior: 0.5 + 0.01 * i as f64 }).collect();
        let r = SolutionReport::from_archive(3, &archive, 20, &SearchBox::unit(2)).unwrap();
        assert_eq!(r.best_bin_frequency, 1.0);
        assert_eq!(r.best_bin_index, vec![14, 12]);
        assert!((r.highest_posterior - 0.59).abs() < 1e-12);
        assert_eq!(r.matches(&[0.7, 0.6]), 2);
        assert_eq!(r.matches(&[0.8, 0.6]), 1);
        let table = format_table(&[r], Some(&[0.7, 0.6]));
        assert!(table.contains("[0.7, 0.75]"));
        assert!(table.contains("Solu. 1"));
    }

    #[test]
    fn table_two_style_format() {
        let iv = BinInterval { lo: 0.0, hi: 0.1 };
        assert_eq!(iv.to_string(), "[0, 0.1]");
        assert!(iv.encloses(0.1) && iv.encloses(0.0) && !iv.encloses(0.2));
    }

    proptest! {
        #[test]
        fn projections_compose(seed in 0u64..1000) {
            use rand::Rng;
            let mut rng = crate::rng::stream(seed, 0);
            let s: Vec<Vec<f64>> = (0..200).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
            let h = hist(&s, 6, 4);
            let twice = project(&project(&h, &[0, 2, 3]).unwrap(), &[0, 2]).unwrap();
            let once = project(&h, &[0, 3]).unwrap();
            prop_assert_eq!(twice, once);
            let (_, c) = best_bin(&h).unwrap();
            prop_assert!(c >= 1);
        }
    }
}
