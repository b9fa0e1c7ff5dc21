use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use modal_update::benchmark::run_benchmark;
use modal_update::config::{preset as builtin, CampaignFile};
use modal_update::fe::ModalMeasurement;
use modal_update::orchestrator::{run_campaign, CampaignConfig, CampaignResult, CampaignRun, RunOptions};
use modal_update::Error;
use serde::{Deserialize, Serialize};

use crate::artifacts::{progress_log, write_reports, write_traces};
use crate::bundle::{stamped_json, Provenance, Staging};
use crate::error::{CliError, CliResult};

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::read(path, e))
}

fn load_config(path: &Path) -> CliResult<CampaignFile> {
    Ok(CampaignFile::from_json(&read(path)?)?)
}

fn options(workers: Option<usize>) -> RunOptions {
    let mut opts = RunOptions::default();
    if let Some(w) = workers {
        opts.workers = w.max(1);
    }
    opts
}

fn out_dir(flag: Option<PathBuf>, configured: Option<&str>, fallback: &str) -> PathBuf {
    flag.or_else(|| configured.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(fallback))
}

/// Replaces `path` in one rename so readers never see a partial file.
fn write_file_atomic(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("partial-{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn simulate(config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> CliResult<()> {
    let mut file = load_config(config)?;
    if let Some(s) = seed {
        file.noise_seed = s;
    }
    let canonical = file.to_json();
    let prov = Provenance::new(&canonical, file.campaign.master_seed);
    let model = file.model.build()?;
    let mut measurement = file.simulate(&model)?;
    if let Some(p) = measurement.provenance.as_mut() {
        p.config_sha256 = Some(prov.config_sha256.clone());
    }
    let dir = out_dir(out, file.output.as_deref(), "out");
    let path = dir.join("measurement.json");
    write_file_atomic(&path, &measurement_json(&measurement))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn measurement_json(m: &ModalMeasurement) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("measurement serializes");
    s.push('\n');
    s
}

fn load_measurement(path: &Path) -> CliResult<ModalMeasurement> {
    let m: ModalMeasurement = serde_json::from_str(&read(path)?)
        .map_err(|e| Error::InvalidMeasurement(format!("{}: {e}", path.display())))?;
    m.validate()?;
    Ok(m)
}

#[derive(Serialize, Deserialize)]
struct ResultBody<T> {
    result: T,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct TimingBody<'a> {
    workers: usize,
    timing: &'a modal_update::orchestrator::PhaseTimings,
    rounds: u64,
    evaluation_count: u64,
}

fn write_run(stage: &Staging, run: &CampaignRun, workers: usize, prov: &Provenance) -> CliResult<()> {
    stage.write("result.json", stamped_json(prov, &ResultBody { result: &run.result }))?;
    stage.write("progress.log", progress_log(run, prov))?;
    stage.write(
        "timing.json",
        stamped_json(
            prov,
            &TimingBody {
                workers,
                timing: &run.timing,
                rounds: run.result.rounds,
                evaluation_count: run.result.evaluation_count,
            },
        ),
    )?;
    write_traces(stage, run, prov)?;
    Ok(())
}

pub fn update(
    config: &Path,
    measurement: Option<&Path>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
    bins: Option<usize>,
) -> CliResult<()> {
    let mut file = load_config(config)?;
    if let Some(s) = seed {
        file.campaign.master_seed = s;
    }
    if bins.is_some() {
        file.campaign.bins = bins;
    }
    file.validate()?;
    let canonical = file.to_json();
    let prov = Provenance::new(&canonical, file.campaign.master_seed);
    let model = Arc::new(file.model.build()?);
    let measurement = match measurement {
        Some(p) => load_measurement(p)?,
        None => file.simulate(&model)?,
    };
    let target = file.objective(Arc::clone(&model), measurement.clone())?;
    let opts = options(workers);
    let dir = out_dir(out, file.output.as_deref(), "out");
    let stage = Staging::new(&dir)?;

    log::info!(
        "campaign: {} parameters, master seed {}, {} workers",
        model.segment_count(),
        file.campaign.master_seed,
        opts.workers
    );
    let run = run_campaign(&file.campaign, &target, opts)?;
    let result = &run.result;
    if result.failure_count > 0 {
        log::warn!("{} posterior evaluations failed and were treated as zero", result.failure_count);
    }
    log::info!(
        "{} chains started, {} survived, {} merged",
        result.chains_started,
        result.survived_chains.len(),
        result.merged_chain_log.len()
    );

    stage.write("config.json", format!("{canonical}\n"))?;
    stage.write("measurement.json", measurement_json(&measurement))?;
    write_run(&stage, &run, opts.workers, &prov)?;
    let bins = file.campaign.bins_for(result.dimension);
    let truth = file.truth.as_ref().map(|t| t.as_slice());
    let table = if result.survived_chains.is_empty() {
        let note = "no chain survived; see progress.log\n".to_string();
        stage.write("summary.txt", format!("{}{note}", prov.header()))?;
        note
    } else {
        write_reports(&stage, "", result, bins, truth, &prov)?
    };
    let dir = stage.commit()?;
    println!("{table}");
    log::info!("wrote {}", dir.display());
    Ok(())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct StoredProvenance {
    config_sha256: String,
    master_seed: u64,
}

#[derive(Deserialize)]
struct StoredResult {
    provenance: StoredProvenance,
    result: CampaignResult,
}

pub fn report(bundle: &Path, bins: Option<usize>, out: Option<PathBuf>) -> CliResult<()> {
    let path = bundle.join("result.json");
    let stored: StoredResult =
        serde_json::from_str(&read(&path)?).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let prov =
        Provenance { config_sha256: stored.provenance.config_sha256, master_seed: stored.provenance.master_seed };
    let config_path = bundle.join("config.json");
    let truth = if config_path.exists() { load_config(&config_path)?.truth } else { None };
    let result = stored.result;
    let bins = bins.unwrap_or_else(|| result.config.bins_for(result.dimension));
    if bins < 2 {
        return Err(Error::InvalidConfig("bins must be ≥ 2".into()).into());
    }
    if result.survived_chains.is_empty() {
        return Err(CliError::Usage(format!("{} holds no surviving chains", path.display())));
    }
    let dir = out.unwrap_or_else(|| bundle.join("report"));
    let stage = Staging::new(&dir)?;
    let table = write_reports(&stage, "", &result, bins, truth.as_ref().map(|t| t.as_slice()), &prov)?;
    stage.commit()?;
    println!("{table}");
    log::info!("wrote {}", dir.display());
    Ok(())
}

#[derive(Serialize)]
struct BenchmarkInput<'a> {
    target: &'a str,
    campaign: &'a CampaignConfig,
}

pub fn benchmark(
    name: &str,
    config: Option<&Path>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
    bins: Option<usize>,
) -> CliResult<()> {
    let mut campaign = match config {
        Some(p) => serde_json::from_str::<CampaignConfig>(&read(p)?)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))?,
        None => CampaignConfig::default(),
    };
    if let Some(s) = seed {
        campaign.master_seed = s;
    }
    if bins.is_some() {
        campaign.bins = bins;
    }
    campaign.validate()?;
    let canonical = serde_json::to_string_pretty(&BenchmarkInput { target: name, campaign: &campaign })
        .expect("benchmark input serializes");
    let prov = Provenance::new(&canonical, campaign.master_seed);
    let opts = options(workers);
    let (report, run) = run_benchmark(name, &campaign, opts)?;
    let dir = out.unwrap_or_else(|| PathBuf::from(format!("benchmark-{name}")));
    let stage = Staging::new(&dir)?;
    stage.write("config.json", format!("{canonical}\n"))?;
    write_run(&stage, &run, opts.workers, &prov)?;
    stage.write("benchmark.json", stamped_json(&prov, &report))?;
    let text = report.to_text();
    stage.write("benchmark.txt", format!("{}{text}", prov.header()))?;
    stage.commit()?;
    println!("{text}");
    log::info!("wrote {}", dir.display());
    Ok(())
}

pub fn preset(name: &str) -> CliResult<()> {
    let file = builtin(name).ok_or_else(|| CliError::Usage(format!("unknown preset {name:?}")))?;
    println!("{}", file.to_json());
    Ok(())
}
