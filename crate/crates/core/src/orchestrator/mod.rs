//! The multi-chain campaign: pre-screening, seeding, lockstep evolution
//! with merge checks, termination and burn-in trimming.

mod index;
mod kmeans;
mod lhs;

pub use index::ArchiveIndex;
pub use kmeans::{constrained_kmeans, kmeans};
pub use lhs::latin_hypercube;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Target;
use crate::params::SearchBox;
use crate::rng;
use crate::sampler::{mh_step, AdaptationPolicy, ArchivedSample, ChainState, ChainStatus};

/// How the proposal widens after runs of rejections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Widening {
    pub widen_after: u32,
    pub widen_factor: f64,
    pub max_width: f64,
}

impl Default for Widening {
    fn default() -> Self {
        let p = AdaptationPolicy::default();
        Self { widen_after: p.widen_after, widen_factor: p.widen_factor, max_width: p.max_width }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CampaignConfig {
    /// Latin-hypercube pre-screening samples (w).
    pub prescreen_samples: usize,
    /// Best pre-screened samples passed to clustering (r).
    pub keep_best: usize,
    /// Maximum steps per chain (t).
    pub max_steps: u64,
    /// Minimum separation of seeding cluster centers (ε_c).
    pub seed_distance: f64,
    /// Merge-check distance threshold (ε_M).
    pub merge_distance: f64,
    /// Default proposal width (γ), relative to the box width.
    pub default_width: f64,
    /// Consecutive rejections that terminate a chain early (u).
    pub reject_limit: u32,
    /// Fraction of each archive discarded as burn-in.
    pub burn_in_ratio: f64,
    /// Histogram bins per dimension; `None` picks 20 for n ≤ 4, else 10.
    #[serde(default)]
    pub bins: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub widening: Widening,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            prescreen_samples: 1000,
            keep_best: 50,
            max_steps: 2000,
            seed_distance: 0.23,
            merge_distance: 0.15,
            default_width: 0.01,
            reject_limit: 250,
            burn_in_ratio: 0.1,
            bins: None,
            master_seed: 0,
            widening: Widening::default(),
        }
    }
}

impl CampaignConfig {
    pub fn policy(&self) -> AdaptationPolicy {
        AdaptationPolicy {
            default_width: self.default_width,
            widen_after: self.widening.widen_after,
            widen_factor: self.widening.widen_factor,
            max_width: self.widening.max_width,
        }
    }

    pub fn bins_for(&self, n: usize) -> usize {
        self.bins.unwrap_or(if n <= 4 { 20 } else { 10 })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.prescreen_samples == 0 {
            return bad("prescreenSamples must be ≥ 1");
        }
        if self.keep_best == 0 || self.keep_best > self.prescreen_samples {
            return bad("keepBest must be in [1, prescreenSamples]");
        }
        if self.max_steps == 0 {
            return bad("maxSteps must be ≥ 1");
        }
        if !(self.seed_distance > 0.0) || !(self.merge_distance > 0.0) {
            return bad("seedDistance and mergeDistance must be > 0");
        }
        if self.reject_limit == 0 {
            return bad("rejectLimit must be ≥ 1");
        }
        if !(0.0..1.0).contains(&self.burn_in_ratio) {
            return bad("burnInRatio must lie in [0, 1)");
        }
        if matches!(self.bins, Some(q) if q < 2) {
            return bad("bins must be ≥ 2");
        }
        self.policy().validate()
    }
}

/// Execution knobs that never change the numerical result.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub workers: usize,
    pub check_invariants: bool,
    pub record_traces: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            check_invariants: cfg!(debug_assertions),
            record_traces: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxSteps,
    RejectLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScreenedSample {
    pub index: usize,
    pub params: Vec<f64>,
    pub posterior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MergeEvent {
    pub chain_id: usize,
    pub absorbed_into: usize,
    /// Lockstep round in which the suspension happened.
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SurvivedChain {
    pub chain_id: usize,
    pub start: Vec<f64>,
    pub total_steps: u64,
    pub acceptances: usize,
    pub burn_in_dropped: usize,
    pub termination: Termination,
    pub archive: Vec<ArchivedSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignResult {
    pub dimension: usize,
    pub search_box: SearchBox,
    pub config: CampaignConfig,
    pub screened: Vec<ScreenedSample>,
    pub centers: Vec<Vec<f64>>,
    pub chains_started: usize,
    pub survived_chains: Vec<SurvivedChain>,
    pub merged_chain_log: Vec<MergeEvent>,
    /// Chains that terminated unmerged but have nothing left after burn-in.
    pub exhausted_chains: Vec<usize>,
    pub evaluation_count: u64,
    pub failure_count: u64,
    pub rounds: u64,
    pub merge_invariant_violations: u64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PhaseTimings {
    pub prescreen: Duration,
    pub seeding: Duration,
    pub evolution: Duration,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RoundLog {
    pub round: u64,
    pub active: usize,
    pub suspended: usize,
    pub terminated: usize,
    pub best_posterior: f64,
}

impl std::fmt::Display for RoundLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "round {:>6}  active {:>3}  suspended {:>3}  terminated {:>3}  best {:.6}",
            self.round, self.active, self.suspended, self.terminated, self.best_posterior
        )
    }
}

/// Everything a campaign produces: the deterministic result plus traces,
/// wall-clock timings and the per-round progress log.
#[derive(Debug, Clone)]
pub struct CampaignRun {
    pub result: CampaignResult,
    pub chains: Vec<ChainState>,
    pub timing: PhaseTimings,
    pub progress: Vec<RoundLog>,
}

/// Evaluates every sample, keeps the `r` best with positive posterior,
/// descending by posterior with ties broken by sample index.
pub fn prescreen<T: Target + ?Sized>(samples: &[Vec<f64>], target: &T, r: usize) -> Result<(Vec<ScreenedSample>, u64)> {
    let evaluated: Vec<(f64, bool)> = samples
        .par_iter()
        .map(|x| match target.evaluate(x) {
            Ok(p) if p.is_finite() && p >= 0.0 => (p, false),
            _ => (0.0, true),
        })
        .collect();
    let failures = evaluated.iter().filter(|(_, f)| *f).count() as u64;
    let mut ranked: Vec<ScreenedSample> = evaluated
        .iter()
        .enumerate()
        .filter(|(_, (p, _))| *p > 0.0)
        .map(|(index, (p, _))| ScreenedSample { index, params: samples[index].clone(), posterior: *p })
        .collect();
    if ranked.is_empty() {
        return Err(Error::EmptyScreen);
    }
    ranked.sort_by(|a, b| b.posterior.total_cmp(&a.posterior).then(a.index.cmp(&b.index)));
    ranked.truncate(r);
    Ok((ranked, failures))
}

/// Drops the first `floor(ratio · len)` samples.
pub fn burnin_trim<T: Clone>(archive: &[T], ratio: f64) -> Vec<T> {
    let drop = (ratio * archive.len() as f64).floor() as usize;
    archive[drop.min(archive.len())..].to_vec()
}

/// Merge bookkeeping: one spatial index per chain over its archive.
#[derive(Debug, Clone)]
pub struct MergeTracker {
    radius: f64,
    indices: Vec<ArchiveIndex>,
}

impl MergeTracker {
    pub fn new(chains: usize, dim: usize, radius: f64) -> Self {
        Self { radius, indices: vec![ArchiveIndex::new(dim, radius); chains] }
    }

    pub fn record(&mut self, chain: usize, sample: &[f64]) {
        self.indices[chain].insert(sample);
    }

    /// Compares the newest accepted sample of each chain in `accepted`
    /// against the archives of all other unsuspended chains and suspends
    /// one chain per proximity hit: the one with the lower best archived
    /// posterior, or the higher id on a tie. `accepted` must hold chain
    /// ids whose newest samples were already recorded.
    pub fn merge_check(&self, chains: &mut [ChainState], accepted: &[usize], step: u64) -> Vec<MergeEvent> {
        let mut events = Vec::new();
        let mut order = accepted.to_vec();
        order.sort_unstable();
        for &i in &order {
            if chains[i].status == ChainStatus::Suspended {
                continue;
            }
            let Some(latest) = chains[i].latest_accepted().map(|s| s.params.clone()) else {
                continue;
            };
            for j in 0..chains.len() {
                if j == i || chains[j].status == ChainStatus::Suspended {
                    continue;
                }
                if !self.indices[j].any_within(&latest, self.radius) {
                    continue;
                }
                let (bi, bj) = (chains[i].best_posterior(), chains[j].best_posterior());
                let loser = if bi < bj || (bi == bj && i > j) { i } else { j };
                let winner = if loser == i { j } else { i };
                chains[loser].status = ChainStatus::Suspended;
                events.push(MergeEvent { chain_id: loser, absorbed_into: winner, step });
                if loser == i {
                    break;
                }
            }
        }
        events
    }

    /// Number of active chains whose newest accepted sample lies closer
    /// than the merge radius to another active chain's archive.
    pub fn invariant_violations(&self, chains: &[ChainState]) -> u64 {
        let mut count = 0;
        for a in chains.iter().filter(|c| c.status == ChainStatus::Active) {
            let Some(latest) = a.latest_accepted() else { continue };
            for b in chains.iter().filter(|c| c.status == ChainStatus::Active && c.id != a.id) {
                if self.indices[b.id].any_within(&latest.params, self.radius) {
                    count += 1;
                }
            }
        }
        count
    }
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// Runs the full campaign against `target`.
pub fn run_campaign<T: Target + ?Sized>(
    config: &CampaignConfig,
    target: &T,
    options: RunOptions,
) -> Result<CampaignRun> {
    config.validate()?;
    target.search_box().validate()?;
    let pool = build_pool(options.workers)?;
    pool.install(|| run_in_pool(config, target, options))
}

fn run_in_pool<T: Target + ?Sized>(config: &CampaignConfig, target: &T, options: RunOptions) -> Result<CampaignRun> {
    let bounds = target.search_box().clone();
    let dim = bounds.dim();
    let policy = config.policy();
    let mut timing = PhaseTimings::default();

    let t0 = Instant::now();
    let samples =
        latin_hypercube(config.prescreen_samples, &bounds, &mut rng::stream(config.master_seed, rng::LHS_STREAM));
    let (screened, mut failures) = prescreen(&samples, target, config.keep_best)?;
    timing.prescreen = t0.elapsed();

    let t1 = Instant::now();
    let points: Vec<Vec<f64>> = screened.iter().map(|s| s.params.clone()).collect();
    let centers =
        constrained_kmeans(&points, config.seed_distance, &mut rng::stream(config.master_seed, rng::KMEANS_STREAM));
    let start_posteriors: Vec<f64> = centers
        .par_iter()
        .map(|c| target.evaluate(c).ok().filter(|p| p.is_finite() && *p >= 0.0))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|p| {
            p.unwrap_or_else(|| {
                failures += 1;
                0.0
            })
        })
        .collect();
    let mut chains: Vec<ChainState> = centers
        .iter()
        .zip(&start_posteriors)
        .enumerate()
        .map(|(id, (c, p))| {
            let mut chain =
                ChainState::new(id, c.clone(), *p, policy.default_width, rng::chain_stream(config.master_seed, id));
            chain.record_trace = options.record_traces;
            chain
        })
        .collect();
    timing.seeding = t1.elapsed();

    let t2 = Instant::now();
    let mut tracker = MergeTracker::new(chains.len(), dim, config.merge_distance);
    let mut termination = vec![None; chains.len()];
    let mut merges = Vec::new();
    let mut progress = Vec::new();
    let mut violations = 0u64;
    let mut round = 0u64;
    while chains.iter().any(|c| c.status == ChainStatus::Active) {
        round += 1;
        let mut accepted: Vec<usize> = chains
            .par_iter_mut()
            .filter(|c| c.status == ChainStatus::Active)
            .filter_map(|c| mh_step(c, target, &policy).accepted.then_some(c.id))
            .collect();
        accepted.sort_unstable();

        for c in chains.iter_mut().filter(|c| c.status == ChainStatus::Active) {
            if c.total_steps >= config.max_steps {
                c.status = ChainStatus::Terminated;
                termination[c.id] = Some(Termination::MaxSteps);
            } else if c.reject_streak >= config.reject_limit {
                c.status = ChainStatus::Terminated;
                termination[c.id] = Some(Termination::RejectLimit);
            }
        }
        for &id in &accepted {
            let sample = chains[id].latest_accepted().expect("accepted chain has a sample").params.clone();
            tracker.record(id, &sample);
        }
        merges.extend(tracker.merge_check(&mut chains, &accepted, round));

        if options.check_invariants {
            let v = tracker.invariant_violations(&chains);
            debug_assert_eq!(v, 0, "merge invariant violated in round {round}");
            violations += v;
        }

        let count = |s: ChainStatus| chains.iter().filter(|c| c.status == s).count();
        let line = RoundLog {
            round,
            active: count(ChainStatus::Active),
            suspended: count(ChainStatus::Suspended),
            terminated: count(ChainStatus::Terminated),
            best_posterior: chains.iter().map(ChainState::best_posterior).fold(0.0, f64::max),
        };
        log::debug!("{line}");
        progress.push(line);
    }
    timing.evolution = t2.elapsed();

    let mut survived = Vec::new();
    let mut exhausted = Vec::new();
    for c in chains.iter().filter(|c| c.status == ChainStatus::Terminated) {
        let archive = burnin_trim(&c.archive, config.burn_in_ratio);
        if archive.is_empty() {
            exhausted.push(c.id);
            continue;
        }
        survived.push(SurvivedChain {
            chain_id: c.id,
            start: centers[c.id].clone(),
            total_steps: c.total_steps,
            acceptances: c.acceptances(),
            burn_in_dropped: c.archive.len() - archive.len(),
            termination: termination[c.id].expect("terminated chain has a reason"),
            archive,
        });
    }
    failures += chains.iter().map(|c| c.failures).sum::<u64>();
    let evaluation_count =
        config.prescreen_samples as u64 + chains.len() as u64 + chains.iter().map(|c| c.total_steps).sum::<u64>();

    let result = CampaignResult {
        dimension: dim,
        search_box: bounds,
        config: config.clone(),
        screened,
        chains_started: chains.len(),
        centers,
        survived_chains: survived,
        merged_chain_log: merges,
        exhausted_chains: exhausted,
        evaluation_count,
        failure_count: failures,
        rounds: round,
        merge_invariant_violations: violations,
    };
    Ok(CampaignRun { result, chains, timing, progress })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::euclidean;

    struct Bumps {
        b: SearchBox,
        centers: Vec<Vec<f64>>,
        sd: f64,
    }

    impl Target for Bumps {
        fn search_box(&self) -> &SearchBox {
            &self.b
        }
        fn evaluate(&self, x: &[f64]) -> Result<f64> {
            if !self.b.contains(x) {
                return Ok(0.0);
            }
            Ok(self
                .centers
                .iter()
                .map(|c| (-crate::params::squared_distance(x, c) / (2.0 * self.sd * self.sd)).exp())
                .sum())
        }
    }

    fn archive_chain(id: usize, samples: &[(Vec<f64>, f64)]) -> ChainState {
        let mut c = ChainState::new(id, samples[0].0.clone(), samples[0].1, 0.01, rng::chain_stream(0, id));
        for (x, p) in samples {
            c.archive.push(ArchivedSample { params: x.clone(), posterior: *p });
        }
        c
    }

    #[test]
    fn burnin_examples() {
        let v: Vec<usize> = (0..100).collect();
        assert_eq!(burnin_trim(&v, 0.1), (10..100).collect::<Vec<_>>());
        assert_eq!(burnin_trim(&v, 0.0), v);
        let five: Vec<usize> = (0..5).collect();
        assert_eq!(burnin_trim(&five, 0.1), five);
    }

    #[test]
    fn prescreen_orders_and_truncates() {
        let t = Bumps { b: SearchBox::unit(1), centers: vec![vec![0.5]], sd: 0.2 };
        let samples: Vec<Vec<f64>> = vec![vec![0.1], vec![0.5], vec![0.9], vec![0.45]];
        let (all, _) = prescreen(&samples, &t, 4).unwrap();
        assert_eq!(all.iter().map(|s| s.index).collect::<Vec<_>>(), vec![1, 3, 0, 2]);
        // 0.1 and 0.9 are symmetric: tie broken by index.
        assert!((all[2].posterior - all[3].posterior).abs() < 1e-15);
        let (top, _) = prescreen(&samples, &t, 1).unwrap();
        assert_eq!(top[0].index, 1);

        let zero = Bumps { b: SearchBox::unit(1), centers: vec![vec![50.0]], sd: 0.01 };
        assert_eq!(prescreen(&samples, &zero, 2).unwrap_err(), Error::EmptyScreen);
    }

    #[test]
    fn close_chains_merge() {
        let mut chains = vec![archive_chain(0, &[(vec![0.5, 0.5], 0.9)]), archive_chain(1, &[(vec![0.6, 0.5], 0.5)])];
        let mut tracker = MergeTracker::new(2, 2, 0.15);
        tracker.record(0, &[0.5, 0.5]);
        tracker.record(1, &[0.6, 0.5]);
        let events = tracker.merge_check(&mut chains, &[0, 1], 7);
        assert_eq!(events, vec![MergeEvent { chain_id: 1, absorbed_into: 0, step: 7 }]);
        assert_eq!(chains[1].status, ChainStatus::Suspended);
        assert_eq!(chains[0].status, ChainStatus::Active);
    }

    #[test]
    fn tie_suspends_higher_id() {
        let mut chains = vec![archive_chain(0, &[(vec![0.5, 0.5], 0.7)]), archive_chain(1, &[(vec![0.55, 0.5], 0.7)])];
        let mut tracker = MergeTracker::new(2, 2, 0.15);
        tracker.record(0, &[0.5, 0.5]);
        tracker.record(1, &[0.55, 0.5]);
        let events = tracker.merge_check(&mut chains, &[1], 1);
        assert_eq!(events[0].chain_id, 1);
    }

    #[test]
    fn distant_chains_and_single_chain_untouched() {
        let mut chains = vec![archive_chain(0, &[(vec![0.1, 0.1], 0.9)]), archive_chain(1, &[(vec![0.9, 0.9], 0.5)])];
        let mut tracker = MergeTracker::new(2, 2, 0.15);
        tracker.record(0, &[0.1, 0.1]);
        tracker.record(1, &[0.9, 0.9]);
        assert!(tracker.merge_check(&mut chains, &[0, 1], 1).is_empty());

        let mut one = vec![archive_chain(0, &[(vec![0.1, 0.1], 0.9)])];
        let mut t1 = MergeTracker::new(1, 2, 0.15);
        t1.record(0, &[0.1, 0.1]);
        assert!(t1.merge_check(&mut one, &[0], 1).is_empty());
    }

    fn small_config(seed: u64) -> CampaignConfig {
        CampaignConfig {
            prescreen_samples: 300,
            keep_best: 30,
            max_steps: 600,
            master_seed: seed,
            ..Default::default()
        }
    }

    #[test]
    fn unimodal_target_collapses_to_one_survivor() {
        let t = Bumps { b: SearchBox::unit(2), centers: vec![vec![0.4, 0.6]], sd: 0.03 };
        let mut cfg = small_config(3);
        cfg.seed_distance = 0.02;
        let run = run_campaign(&cfg, &t, RunOptions { workers: 2, ..Default::default() }).unwrap();
        let r = &run.result;
        assert!(r.chains_started > 1);
        assert_eq!(r.survived_chains.len(), 1);
        assert_eq!(r.merged_chain_log.len() + r.survived_chains.len() + r.exhausted_chains.len(), r.chains_started);
        assert_eq!(r.merge_invariant_violations, 0);
    }

    #[test]
    fn four_bumps_four_survivors() {
        let centers = vec![vec![0.2, 0.2], vec![0.2, 0.8], vec![0.8, 0.2], vec![0.8, 0.8]];
        let t = Bumps { b: SearchBox::unit(2), centers: centers.clone(), sd: 0.03 };
        let run = run_campaign(&small_config(11), &t, RunOptions { workers: 3, ..Default::default() }).unwrap();
        let r = &run.result;
        for c in &centers {
            let hit = r.survived_chains.iter().any(|s| {
                let best = s.archive.iter().max_by(|a, b| a.posterior.total_cmp(&b.posterior)).unwrap();
                euclidean(&best.params, c) < 0.05
            });
            assert!(hit, "no survivor near {c:?}");
        }
        // Seeding separation and evaluation budget.
        for i in 0..r.centers.len() {
            for j in i + 1..r.centers.len() {
                assert!(euclidean(&r.centers[i], &r.centers[j]) > 0.23);
            }
        }
        let steps: u64 = run.chains.iter().map(|c| c.total_steps).sum();
        assert_eq!(r.evaluation_count, 300 + r.chains_started as u64 + steps);
        assert_eq!(run.progress.len() as u64, r.rounds);
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let t = Bumps { b: SearchBox::unit(2), centers: vec![vec![0.3, 0.3], vec![0.7, 0.7]], sd: 0.05 };
        let a = run_campaign(&small_config(5), &t, RunOptions { workers: 1, ..Default::default() }).unwrap();
        let b = run_campaign(&small_config(5), &t, RunOptions { workers: 4, ..Default::default() }).unwrap();
        assert_eq!(serde_json::to_string(&a.result).unwrap(), serde_json::to_string(&b.result).unwrap());
    }

    #[test]
    fn config_validation() {
        assert!(CampaignConfig::default().validate().is_ok());
        let bad = CampaignConfig { keep_best: 2000, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = CampaignConfig { burn_in_ratio: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert_eq!(CampaignConfig::default().bins_for(4), 20);
        assert_eq!(CampaignConfig::default().bins_for(8), 10);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn campaign_invariants(seed in 0u64..10_000, sd in 0.02..0.2f64) {
            let t = Bumps { b: SearchBox::unit(2), centers: vec![vec![0.25, 0.3], vec![0.7, 0.75]], sd };
            let cfg = CampaignConfig {
                prescreen_samples: 120,
                keep_best: 20,
                max_steps: 150,
                reject_limit: 60,
                master_seed: seed,
                ..Default::default()
            };
            let run = run_campaign(&cfg, &t, RunOptions { workers: 2, check_invariants: true, record_traces: false }).unwrap();
            let r = &run.result;
            proptest::prop_assert_eq!(r.merge_invariant_violations, 0);
            proptest::prop_assert_eq!(
                r.merged_chain_log.len() + r.survived_chains.len() + r.exhausted_chains.len(),
                r.chains_started
            );
            let steps: u64 = run.chains.iter().map(|c| c.total_steps).sum();
            proptest::prop_assert!(r.evaluation_count <= 120 + r.chains_started as u64 + steps);
            for i in 0..r.centers.len() {
                for j in i + 1..r.centers.len() {
                    proptest::prop_assert!(euclidean(&r.centers[i], &r.centers[j]) >= cfg.seed_distance);
                }
            }
            for c in &r.survived_chains {
                proptest::prop_assert!(!c.archive.is_empty());
                proptest::prop_assert!(c.archive.iter().all(|a| a.posterior > 0.0));
            }
        }
    }
}
