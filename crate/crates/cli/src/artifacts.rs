use std::fmt::Write;
use std::io;

use modal_update::analysis::{format_table, histogram_csv, histogram_of_archive, marginal, project, report};
use modal_update::orchestrator::{CampaignResult, CampaignRun};
use modal_update::sampler::{ChainState, ChainStatus};

use crate::bundle::{stamped_json, Provenance, Staging};
use crate::error::CliResult;

pub fn trace_csv(chain: &ChainState, prov: &Provenance) -> String {
    let mut out = prov.header();
    let dim = chain.current.len();
    let cols: Vec<String> = (0..dim).map(|j| format!("p{j}")).collect();
    let _ = writeln!(out, "step,accepted,{},posterior,width", cols.join(","));
    for row in &chain.trace {
        let params: Vec<String> = row.params.iter().map(f64::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.step,
            u8::from(row.accepted),
            params.join(","),
            row.posterior,
            row.width
        );
    }
    out
}

fn status_name(s: ChainStatus) -> &'static str {
    match s {
        ChainStatus::Active => "active",
        ChainStatus::Suspended => "suspended",
        ChainStatus::Terminated => "terminated",
    }
}

pub fn write_traces(stage: &Staging, run: &CampaignRun, prov: &Provenance) -> io::Result<()> {
    for chain in &run.chains {
        let name = format!("traces/chain_{:03}_{}.csv", chain.id, status_name(chain.status));
        stage.write(name, trace_csv(chain, prov))?;
    }
    Ok(())
}

pub fn progress_log(run: &CampaignRun, prov: &Provenance) -> String {
    let mut out = prov.header();
    for r in &run.progress {
        let _ = writeln!(out, "{r}");
    }
    out
}

fn marginals_csv(marginals: &[Vec<f64>], lo: &[f64], hi: &[f64]) -> String {
    let mut out = String::from("dim,bin,lo,hi,frequency\n");
    for (j, m) in marginals.iter().enumerate() {
        let q = m.len();
        let step = (hi[j] - lo[j]) / q as f64;
        for (b, f) in m.iter().enumerate() {
            let l = lo[j] + b as f64 * step;
            let h = if b + 1 == q { hi[j] } else { lo[j] + (b + 1) as f64 * step };
            let _ = writeln!(out, "{j},{b},{l},{h},{f}");
        }
    }
    out
}

/// Writes the solution table, per-solution histograms and diagnostics under
/// `prefix` and returns the table text.
pub fn write_reports(
    stage: &Staging,
    prefix: &str,
    result: &CampaignResult,
    bins: usize,
    truth: Option<&[f64]>,
    prov: &Provenance,
) -> CliResult<String> {
    let reports = report(result, bins)?;
    let table = format_table(&reports, truth);
    stage.write(format!("{prefix}summary.txt"), format!("{}{table}", prov.header()))?;
    stage.write(format!("{prefix}solutions.json"), stamped_json(prov, &SolutionsBody { bins, solutions: &reports }))?;

    let bounds = &result.search_box;
    let lo: Vec<f64> = (0..bounds.dim()).map(|j| bounds.lo(j)).collect();
    let hi: Vec<f64> = (0..bounds.dim()).map(|j| bounds.hi(j)).collect();
    let mut diagnostics = prov.header();
    for chain in &result.survived_chains {
        let hist = histogram_of_archive(&chain.archive, bins, bounds)?;
        let dir = format!("{prefix}histograms/solution_{:03}", chain.chain_id);
        stage.write(format!("{dir}/joint.csv"), format!("{}{}", prov.header(), histogram_csv(&hist)))?;
        let marg: Vec<Vec<f64>> = (0..hist.dim()).map(|j| marginal(&hist, j)).collect();
        stage.write(format!("{dir}/marginals.csv"), format!("{}{}", prov.header(), marginals_csv(&marg, &lo, &hi)))?;
        for a in 0..hist.dim() {
            for b in a + 1..hist.dim() {
                let p = project(&hist, &[a, b])?;
                stage.write(
                    format!("{dir}/projection_{a}_{b}.csv"),
                    format!("{}{}", prov.header(), histogram_csv(&p)),
                )?;
            }
        }
    }
    for r in &reports {
        for c in r.marginal_checks.iter().filter(|c| !c.consistent) {
            let _ = writeln!(
                diagnostics,
                "solution {} parameter {}: marginal peak {} vs joint best {}",
                r.chain_id,
                c.dim + 1,
                hist_interval(c.marginal_peak_bin, &lo, &hi, bins, c.dim),
                hist_interval(c.joint_best_bin, &lo, &hi, bins, c.dim)
            );
        }
    }
    stage.write(format!("{prefix}inconsistencies.txt"), diagnostics)?;
    Ok(table)
}

fn hist_interval(bin: usize, lo: &[f64], hi: &[f64], bins: usize, j: usize) -> String {
    let step = (hi[j] - lo[j]) / bins as f64;
    let h = if bin + 1 == bins { hi[j] } else { lo[j] + (bin + 1) as f64 * step };
    format!("[{:.4}, {:.4}]", lo[j] + bin as f64 * step, h)
}

#[derive(serde::Serialize)]
struct SolutionsBody<'a> {
    bins: usize,
    solutions: &'a [modal_update::analysis::SolutionReport],
}
