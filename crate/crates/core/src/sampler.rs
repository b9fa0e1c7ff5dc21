//! Single-chain Metropolis-Hastings kernel with an adaptive proposal width.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Target;
use crate::params::SearchBox;
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AdaptationPolicy {
    /// Proposal standard deviation restored after every acceptance,
    /// relative to the box width.
    pub default_width: f64,
    /// Consecutive rejections that trigger one widening.
    pub widen_after: u32,
    pub widen_factor: f64,
    pub max_width: f64,
}

impl Default for AdaptationPolicy {
    fn default() -> Self {
        Self { default_width: 0.01, widen_after: 20, widen_factor: 2.0, max_width: 0.25 }
    }
}

impl AdaptationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.default_width > 0.0) {
            return Err(Error::InvalidConfig("default proposal width must be > 0".into()));
        }
        if self.widen_after < 1 {
            return Err(Error::InvalidConfig("widenAfter must be ≥ 1".into()));
        }
        if !(self.widen_factor > 1.0) {
            return Err(Error::InvalidConfig("widenFactor must be > 1".into()));
        }
        if !(self.max_width >= self.default_width) {
            return Err(Error::InvalidConfig("maxWidth must be ≥ the default width".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStatus {
    Active,
    Suspended,
    Terminated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchivedSample {
    pub params: Vec<f64>,
    pub posterior: f64,
}

/// One row of a chain trace, recorded after each step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub accepted: bool,
    pub params: Vec<f64>,
    pub posterior: f64,
    /// Proposal width used for this step.
    pub width: f64,
}

#[derive(Debug, Clone)]
pub struct ChainState {
    pub id: usize,
    pub current: Vec<f64>,
    pub current_posterior: f64,
    pub width: f64,
    pub reject_streak: u32,
    pub archive: Vec<ArchivedSample>,
    pub total_steps: u64,
    pub status: ChainStatus,
    pub failures: u64,
    pub trace: Vec<TraceRow>,
    pub record_trace: bool,
    rng: StreamRng,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub accepted: bool,
    pub candidate_posterior: f64,
}

impl ChainState {
    pub fn new(id: usize, start: Vec<f64>, start_posterior: f64, width: f64, rng: StreamRng) -> Self {
        Self {
            id,
            current: start,
            current_posterior: start_posterior,
            width,
            reject_streak: 0,
            archive: Vec::new(),
            total_steps: 0,
            status: ChainStatus::Active,
            failures: 0,
            trace: Vec::new(),
            record_trace: true,
            rng,
        }
    }

    pub fn acceptances(&self) -> usize {
        self.archive.len()
    }

    pub fn latest_accepted(&self) -> Option<&ArchivedSample> {
        self.archive.last()
    }

    pub fn best_posterior(&self) -> f64 {
        self.archive.iter().map(|s| s.posterior).fold(0.0, f64::max)
    }

    pub fn best_sample(&self) -> Option<&ArchivedSample> {
        self.archive.iter().fold(None, |best: Option<&ArchivedSample>, s| match best {
            Some(b) if b.posterior >= s.posterior => Some(b),
            _ => Some(s),
        })
    }

    pub fn rng_mut(&mut self) -> &mut StreamRng {
        &mut self.rng
    }
}

/// Candidate `z = current + width·(hi − lo)·ξ`, `ξ` i.i.d. standard normal.
pub fn propose(state: &mut ChainState, bounds: &SearchBox) -> Vec<f64> {
    let width = state.width;
    let rng = &mut state.rng;
    state
        .current
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let xi: f64 = StandardNormal.sample(rng);
            x + width * bounds.width(j) * xi
        })
        .collect()
}

/// Metropolis acceptance probability for a symmetric proposal.
pub fn acceptance_probability(current: f64, candidate: f64) -> f64 {
    if candidate >= current {
        if candidate > 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        candidate / current
    }
}

/// Accept iff `β > μ`.
pub fn metropolis_accept(current: f64, candidate: f64, mu: f64) -> bool {
    acceptance_probability(current, candidate) > mu
}

/// Width rule: reset to the default on acceptance, widen after every
/// `widen_after` consecutive rejections, never beyond `max_width`.
pub fn adapt_width(state: &mut ChainState, policy: &AdaptationPolicy, accepted: bool) {
    if accepted {
        state.width = policy.default_width;
        state.reject_streak = 0;
    } else {
        state.reject_streak += 1;
        if state.reject_streak.is_multiple_of(policy.widen_after) {
            state.width = (state.width * policy.widen_factor).min(policy.max_width);
        }
    }
}

/// One proposal/acceptance step. Evaluation failures count as a zero
/// posterior for the candidate.
pub fn mh_step<T: Target + ?Sized>(state: &mut ChainState, target: &T, policy: &AdaptationPolicy) -> StepOutcome {
    debug_assert_eq!(state.status, ChainStatus::Active);
    let used_width = state.width;
    let z = propose(state, target.search_box());
    let pz = match target.evaluate(&z) {
        Ok(p) if p.is_finite() && p >= 0.0 => p,
        Ok(_) | Err(_) => {
            state.failures += 1;
            0.0
        }
    };
    let mu: f64 = state.rng.random();
    let accepted = metropolis_accept(state.current_posterior, pz, mu);
    if accepted {
        state.current = z;
        state.current_posterior = pz;
        state.archive.push(ArchivedSample { params: state.current.clone(), posterior: pz });
    }
    state.total_steps += 1;
    adapt_width(state, policy, accepted);
    if state.record_trace {
        state.trace.push(TraceRow {
            step: state.total_steps,
            accepted,
            params: state.current.clone(),
            posterior: state.current_posterior,
            width: used_width,
        });
    }
    StepOutcome { accepted, candidate_posterior: pz }
}
