//! Pipeline orchestration. Each protocol is a list of named tasks; a task
//! writes its files and is then recorded in the manifest, so a rerun of
//! the same configuration skips every task whose outputs are intact.

use std::fs;
use std::path::{Path, PathBuf};

use qcvv_core::gst::{
    report_from_dataset, simulate_model_dataset, ErrorKind, ErrorModel, ExperimentDesign, GaugeSchedule, GstDataset,
    GstEstimate, GstReport, PipelineOptions,
};
use qcvv_core::noise::{NoiseKind, NoiseSpec};
use qcvv_core::qubit::{Axis, CliffordGroup, SignedPauli};
use qcvv_core::rb::{
    analytic_gamma_params, fit_decay, fit_gamma, gamma_goodness_of_fit, generate_rb_sequence, run_rb,
    run_rb_on_sequences, DecayFit, DecayPoint, LengthData, RbConfig, RbDataset, RbSequence,
};
use qcvv_core::rng::{derive_seed, stream, tag};
use qcvv_core::stats::{linear_regression, mean, skewness, LinearFit};
use qcvv_core::walk::{compute_walk, preselect_long_walk_sequences, StepWeighting};
use serde::{Deserialize, Serialize};

use crate::config::{DesignKind, ExperimentConfig, GstBlock, Protocol, RbBlock, WalkScanBlock};
use crate::error::{CliError, CliResult};
use crate::json::{read_json, write_bytes, write_csv, write_json};
use crate::manifest::{RunManifest, RunStatus, MANIFEST_FILE};

/// Floor on the per-length variance used to weight decay fits, so
/// noiseless lengths do not receive infinite weight.
const VARIANCE_FLOOR: f64 = 1e-12;

pub const RB_SUMMARY: &str = "rb_summary.json";
pub const LONGWALK_SUMMARY: &str = "longwalk_summary.json";
pub const WALK_SUMMARY: &str = "walk_summary.json";
pub const GST_SUMMARY: &str = "gst_summary.json";

/// Validates `config`, then runs or resumes it in `config.output_dir`.
pub fn run(config: &ExperimentConfig) -> CliResult<RunManifest> {
    let bad = config.validate();
    if !bad.is_empty() {
        return Err(CliError::Validation(bad));
    }
    let dir = config.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut manifest = match RunManifest::load(&dir.join(MANIFEST_FILE)) {
        Ok(mut m) if m.config_hash == config.hash() && m.status != RunStatus::Complete => {
            m.prune_stale(dir);
            log::info!("resuming run with {} completed tasks", m.completed_tasks.len());
            m.status = RunStatus::Running;
            m.finished_at = None;
            m.error = None;
            m.config = config.clone();
            m
        }
        _ => RunManifest::new(config),
    };
    manifest.save(dir)?;

    let mut tasks = Tasks {
        manifest: &mut manifest,
        dir,
    };
    let result = match config.protocol {
        Protocol::Rb => run_rb_protocol(config, &mut tasks),
        Protocol::RbLongwalk => run_longwalk_protocol(config, &mut tasks),
        Protocol::WalkScan => run_walk_scan(config, &mut tasks),
        Protocol::Gst => run_gst_protocol(config, &mut tasks),
    };
    manifest.finish(dir, &result)?;
    result.map(|()| manifest)
}

struct Tasks<'a> {
    manifest: &'a mut RunManifest,
    dir: &'a Path,
}

impl Tasks<'_> {
    fn run(&mut self, name: &str, body: impl FnOnce(&Path) -> CliResult<Vec<PathBuf>>) -> CliResult<()> {
        if self.manifest.is_done(name) {
            log::info!("{name}: already complete");
            return Ok(());
        }
        log::info!("{name}: running");
        let files = body(self.dir)?;
        self.manifest.complete_task(self.dir, name, &files)
    }
}

fn rb_block(config: &ExperimentConfig) -> CliResult<&RbBlock> {
    config
        .rb
        .as_ref()
        .ok_or_else(|| CliError::Validation(vec!["rb: missing".into()]))
}

fn length_file(prefix: &str, j: usize) -> PathBuf {
    PathBuf::from(format!("{prefix}_J{j}.json"))
}

fn single_length(ds: &RbDataset) -> CliResult<&LengthData> {
    ds.lengths
        .first()
        .ok_or_else(|| CliError::Runtime("dataset holds no lengths".into()))
}

/// One task per length; seeds are derived per (length, sequence) so the
/// split does not change any draw.
fn simulate_random_lengths(rb: &RbBlock, seed: u64, tasks: &mut Tasks) -> CliResult<()> {
    for &j in &rb.lengths {
        tasks.run(&format!("rb-J{j}"), |dir| {
            let mut cfg = rb.to_rb_config(seed);
            cfg.lengths = vec![j];
            let file = length_file("rb", j);
            write_json(&dir.join(&file), &run_rb(&cfg)?)?;
            Ok(vec![file])
        })?;
    }
    Ok(())
}

fn load_lengths(dir: &Path, prefix: &str, lengths: &[usize]) -> CliResult<Vec<LengthData>> {
    lengths
        .iter()
        .map(|&j| {
            let ds: RbDataset = read_json(&dir.join(length_file(prefix, j)))?;
            Ok(single_length(&ds)?.clone())
        })
        .collect()
}

fn decay_fit(lengths: &[LengthData], rb: &RbBlock) -> CliResult<Option<DecayFit>> {
    if lengths.len() < 3 {
        return Ok(None);
    }
    let points: Vec<DecayPoint> = lengths
        .iter()
        .map(|l| DecayPoint::from_length(l, VARIANCE_FLOOR))
        .collect();
    Ok(Some(fit_decay(&points, rb.kappa)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbLengthRow {
    pub j: usize,
    pub sequences: usize,
    pub mean_survival: f64,
    pub mean_infidelity: f64,
    /// Variance over sequences of the noise-averaged survival.
    pub variance: f64,
    /// Variance over every (sequence, realization) estimate.
    pub pooled_variance: f64,
    pub p_rb: Option<f64>,
    pub beta_fit: Option<f64>,
    /// Closed-form gamma scale; quasi-DC noise only.
    pub beta_calc: Option<f64>,
    /// χ² of the histogram against the closed form, or against the fit
    /// when no closed form applies.
    pub chi2: Option<f64>,
    pub chi2_dof: Option<usize>,
    pub gof_p_value: Option<f64>,
    pub skewness: Option<f64>,
    pub modal_bin: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub lower: f64,
    pub upper: f64,
    pub observed: usize,
    pub expected_fit: f64,
    pub expected_calc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbSummary {
    pub noise: NoiseKind,
    pub sigma: f64,
    pub decay: Option<DecayFit>,
    pub lengths: Vec<RbLengthRow>,
}

fn summarize_length(l: &LengthData, rb: &RbBlock, p_rb: Option<f64>) -> CliResult<(RbLengthRow, Vec<HistogramRow>)> {
    let inf = l.infidelities();
    let calc = (rb.noise == NoiseKind::QuasiDc).then(|| analytic_gamma_params(l.j, rb.sigma));
    let fit = match fit_gamma(&inf) {
        Ok(f) => Some(f),
        Err(qcvv_core::Error::DegenerateSample(_) | qcvv_core::Error::InsufficientData(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let gof = match (&fit, calc) {
        (Some(_), Some(c)) if c.beta > 0.0 => gamma_goodness_of_fit(&inf, c, 0).ok(),
        (Some(f), _) => Some(f.gof.clone()),
        _ => None,
    };
    let histogram = match &fit {
        Some(f) => {
            let calc_bins = match calc.filter(|c| c.beta > 0.0) {
                Some(c) => Some(qcvv_core::rb::gamma_histogram(&inf, c)?),
                None => None,
            };
            f.histogram
                .iter()
                .enumerate()
                .map(|(k, b)| HistogramRow {
                    lower: b.lower,
                    upper: b.upper,
                    observed: b.observed,
                    expected_fit: b.expected,
                    expected_calc: calc_bins.as_ref().map(|c| c[k].expected),
                })
                .collect()
        }
        None => Vec::new(),
    };
    let row = RbLengthRow {
        j: l.j,
        sequences: l.sequences.len(),
        mean_survival: l.mean_survival(),
        mean_infidelity: mean(&inf),
        variance: l.sequence_variance(),
        pooled_variance: l.pooled_variance(),
        p_rb,
        beta_fit: fit.as_ref().map(|f| f.beta),
        beta_calc: calc.map(|c| c.beta),
        chi2: gof.as_ref().map(|g| g.chi2),
        chi2_dof: gof.as_ref().map(|g| g.dof),
        gof_p_value: gof.as_ref().map(|g| g.p_value),
        skewness: skewness(&inf).ok(),
        modal_bin: fit.as_ref().map(|f| f.modal_bin()),
    };
    Ok((row, histogram))
}

fn run_rb_protocol(config: &ExperimentConfig, tasks: &mut Tasks) -> CliResult<()> {
    let rb = rb_block(config)?;
    simulate_random_lengths(rb, config.seed, tasks)?;
    tasks.run("summary", |dir| {
        let lengths = load_lengths(dir, "rb", &rb.lengths)?;
        let decay = decay_fit(&lengths, rb)?;
        let mut files = Vec::new();
        let mut rows = Vec::new();
        for l in &lengths {
            let (row, hist) = summarize_length(l, rb, decay.as_ref().map(|d| d.p_rb))?;
            rows.push(row);
            let f = PathBuf::from(format!("histogram_J{}.csv", l.j));
            write_csv(&dir.join(&f), &hist)?;
            files.push(f);
        }
        write_csv(&dir.join("rb_summary.csv"), &rows)?;
        let summary = RbSummary {
            noise: rb.noise,
            sigma: rb.sigma,
            decay,
            lengths: rows,
        };
        write_json(&dir.join(RB_SUMMARY), &summary)?;
        files.extend(["rb_summary.csv".into(), RB_SUMMARY.into()]);
        Ok(files)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongWalkRow {
    pub j: usize,
    pub random_mean_infidelity: f64,
    pub longwalk_mean_infidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongWalkSummary {
    pub noise: NoiseKind,
    pub multiplier: f64,
    pub preselected: usize,
    pub random: DecayFit,
    pub longwalk: DecayFit,
    /// `p_lw / p_rb`.
    pub ratio: f64,
    pub lengths: Vec<LongWalkRow>,
}

fn run_longwalk_protocol(config: &ExperimentConfig, tasks: &mut Tasks) -> CliResult<()> {
    let rb = rb_block(config)?;
    let lw = config.longwalk.clone().unwrap_or_default();
    let cfg = rb.to_rb_config(config.seed);
    let group = CliffordGroup::<f64>::with_identity_idle(rb.identity_idle)?;
    simulate_random_lengths(rb, config.seed, tasks)?;
    for &j in &rb.lengths {
        tasks.run(&format!("longwalk-J{j}"), |dir| {
            let mut rng = stream(config.seed, &[tag::PRESELECT, j as u64]);
            let seqs =
                preselect_long_walk_sequences(&group, j, lw.preselected, lw.multiplier, lw.attempt_cap, &mut rng)?;
            let file = length_file("longwalk", j);
            write_json(&dir.join(&file), &run_rb_on_sequences(&group, &[(j, seqs)], &cfg)?)?;
            Ok(vec![file])
        })?;
    }
    tasks.run("summary", |dir| {
        let random = load_lengths(dir, "rb", &rb.lengths)?;
        let long = load_lengths(dir, "longwalk", &rb.lengths)?;
        let too_few = || CliError::Validation(vec!["rb.lengths: a decay fit needs ≥ 3 lengths".into()]);
        let random_fit = decay_fit(&random, rb)?.ok_or_else(too_few)?;
        let long_fit = decay_fit(&long, rb)?.ok_or_else(too_few)?;
        let rows: Vec<LongWalkRow> = random
            .iter()
            .zip(&long)
            .map(|(a, b)| LongWalkRow {
                j: a.j,
                random_mean_infidelity: 1.0 - a.mean_survival(),
                longwalk_mean_infidelity: 1.0 - b.mean_survival(),
            })
            .collect();
        write_csv(&dir.join("longwalk_summary.csv"), &rows)?;
        let summary = LongWalkSummary {
            noise: rb.noise,
            multiplier: lw.multiplier,
            preselected: lw.preselected,
            ratio: long_fit.p_rb / random_fit.p_rb,
            random: random_fit,
            longwalk: long_fit,
            lengths: rows,
        };
        write_json(&dir.join(LONGWALK_SUMMARY), &summary)?;
        Ok(vec!["longwalk_summary.csv".into(), LONGWALK_SUMMARY.into()])
    })
}

fn noise_name(kind: NoiseKind) -> &'static str {
    match kind {
        NoiseKind::QuasiDc => "quasi-dc",
        NoiseKind::White => "white",
    }
}

/// The `i`-th sequence of length `j` under `seed`, as drawn by the RB runs.
pub fn seeded_sequence(group: &CliffordGroup<f64>, seed: u64, j: usize, i: usize) -> CliResult<RbSequence> {
    let s = derive_seed(seed, &[tag::SEQUENCE, j as u64, i as u64]);
    let mut seq = generate_rb_sequence(group, j, &mut stream(s, &[]))?;
    seq.seed = Some(s);
    Ok(seq)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkRegression {
    pub noise: NoiseKind,
    pub fit: LinearFit,
    pub t_statistic: f64,
    pub skewness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkSummary {
    pub length: usize,
    pub sigma: f64,
    pub weighting: StepWeighting,
    pub regressions: Vec<WalkRegression>,
}

#[derive(Serialize)]
struct RegressionRow {
    noise: &'static str,
    slope: f64,
    slope_se: f64,
    intercept: f64,
    t_statistic: f64,
    skewness: Option<f64>,
}

fn walk_scan_rb_config(w: &WalkScanBlock, kind: NoiseKind, seed: u64) -> RbConfig {
    RbConfig {
        lengths: vec![w.length],
        sequences_per_length: w.sequences,
        noise: NoiseSpec {
            kind,
            sigma: w.sigma,
            seed: derive_seed(seed, &[tag::NOISE]),
        },
        realizations: w.realizations,
        shots: w.shots,
        seed,
        noise_reuse: Default::default(),
        identity_idle: w.identity_idle,
    }
}

fn run_walk_scan(config: &ExperimentConfig, tasks: &mut Tasks) -> CliResult<()> {
    let w = config
        .walk_scan
        .as_ref()
        .ok_or_else(|| CliError::Validation(vec!["walk_scan: missing".into()]))?;
    let group = CliffordGroup::<f64>::with_identity_idle(w.identity_idle)?;
    let seqs = (0..w.sequences)
        .map(|i| seeded_sequence(&group, config.seed, w.length, i))
        .collect::<CliResult<Vec<_>>>()?;
    for &kind in &w.noise {
        tasks.run(&format!("walk-{}", noise_name(kind)), |dir| {
            let cfg = walk_scan_rb_config(w, kind, config.seed);
            let file = PathBuf::from(format!("walk_{}.json", noise_name(kind)));
            write_json(
                &dir.join(&file),
                &run_rb_on_sequences(&group, &[(w.length, seqs.clone())], &cfg)?,
            )?;
            Ok(vec![file])
        })?;
    }
    tasks.run("summary", |dir| {
        let axis = SignedPauli::plus(Axis::Z);
        let norms = seqs
            .iter()
            .map(|s| Ok(compute_walk(&group, s.gates(), axis, w.weighting)?.norm_v2d_sq))
            .collect::<CliResult<Vec<f64>>>()?;
        let mut header = vec!["sequence".to_string(), "norm_v2d_sq".to_string()];
        let mut columns = Vec::new();
        let mut regressions = Vec::new();
        for &kind in &w.noise {
            let ds: RbDataset = read_json(&dir.join(format!("walk_{}.json", noise_name(kind))))?;
            let inf = single_length(&ds)?.infidelities();
            let fit = linear_regression(&norms, &inf)?;
            regressions.push(WalkRegression {
                noise: kind,
                t_statistic: fit.t_statistic(),
                fit,
                skewness: skewness(&inf).ok(),
            });
            header.push(format!("infidelity_{}", noise_name(kind).replace('-', "_")));
            columns.push(inf);
        }
        let mut scatter = csv::Writer::from_writer(Vec::new());
        scatter.write_record(&header)?;
        for (i, v) in norms.iter().enumerate() {
            let mut rec = vec![i.to_string(), v.to_string()];
            rec.extend(columns.iter().map(|c| c[i].to_string()));
            scatter.write_record(&rec)?;
        }
        let bytes = scatter.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
        write_bytes(&dir.join("walk_scatter.csv"), &bytes)?;
        let rows: Vec<RegressionRow> = regressions
            .iter()
            .map(|r| RegressionRow {
                noise: noise_name(r.noise),
                slope: r.fit.slope,
                slope_se: r.fit.slope_se,
                intercept: r.fit.intercept,
                t_statistic: r.t_statistic,
                skewness: r.skewness,
            })
            .collect();
        write_csv(&dir.join("walk_regression.csv"), &rows)?;
        let summary = WalkSummary {
            length: w.length,
            sigma: w.sigma,
            weighting: w.weighting,
            regressions,
        };
        write_json(&dir.join(WALK_SUMMARY), &summary)?;
        Ok(vec![
            "walk_scatter.csv".into(),
            "walk_regression.csv".into(),
            WALK_SUMMARY.into(),
        ])
    })
}

/// One row of the dd-versus-magnitude table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GstRow {
    pub gate: String,
    pub magnitude: f64,
    pub dd_calc: f64,
    pub dd_calc_gauge: f64,
    pub dd_est: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GstSummary {
    pub design: DesignKind,
    pub model: ErrorKind,
    pub gauge: GaugeSchedule,
    pub spam_weight: f64,
    pub circuits: usize,
    pub rows: Vec<GstRow>,
}

pub fn gst_rows(report: &GstReport) -> Vec<GstRow> {
    report
        .gates
        .iter()
        .map(|g| GstRow {
            gate: g.gate.to_string(),
            magnitude: report.model.magnitude,
            dd_calc: g.dd_calc,
            dd_calc_gauge: g.dd_calc_gauge,
            dd_est: g.dd_est,
        })
        .collect()
}

fn pipeline_options(g: &GstBlock, seed: u64, point: usize) -> PipelineOptions {
    PipelineOptions {
        shots: g.shots,
        seed: derive_seed(seed, &[tag::SHOTS, point as u64]),
        gauge: g.gauge,
        spam_weight: g.spam_weight,
    }
}

fn run_gst_protocol(config: &ExperimentConfig, tasks: &mut Tasks) -> CliResult<()> {
    let g = config
        .gst
        .as_ref()
        .ok_or_else(|| CliError::Validation(vec!["gst: missing".into()]))?;
    let design = g.design.build();
    tasks.run("design", |dir| {
        write_json(&dir.join("gst_design.json"), &design)?;
        Ok(vec!["gst_design.json".into()])
    })?;
    let magnitudes = g.magnitudes();
    for (k, &m) in magnitudes.iter().enumerate() {
        tasks.run(&format!("gst-{k}"), |dir| {
            let model = ErrorModel::new(g.model, m)?;
            let opts = pipeline_options(g, config.seed, k);
            let data = simulate_model_dataset(&model, &design, &opts)?;
            let report = report_from_dataset(&model, &design, &data, &opts)?;
            let data_file = PathBuf::from(format!("gst_{k}_dataset.json"));
            let report_file = PathBuf::from(format!("gst_{k}_report.json"));
            write_json(&dir.join(&data_file), &data)?;
            write_json(&dir.join(&report_file), &report)?;
            Ok(vec![data_file, report_file])
        })?;
    }
    tasks.run("summary", |dir| {
        let mut rows = Vec::new();
        for k in 0..magnitudes.len() {
            let r: GstReport = read_json(&dir.join(format!("gst_{k}_report.json")))?;
            rows.extend(gst_rows(&r));
        }
        write_csv(&dir.join("gst_summary.csv"), &rows)?;
        let summary = GstSummary {
            design: g.design,
            model: g.model,
            gauge: g.gauge,
            spam_weight: g.spam_weight,
            circuits: design.len(),
            rows,
        };
        write_json(&dir.join(GST_SUMMARY), &summary)?;
        Ok(vec!["gst_summary.csv".into(), GST_SUMMARY.into()])
    })
}

/// Writes the design as JSON, plus the germ file for the extended set.
pub fn build_design(kind: DesignKind, out: &Path) -> CliResult<(ExperimentDesign, Vec<PathBuf>)> {
    let design = kind.build();
    let file = out.join(match kind {
        DesignKind::Standard => "standard_design.json",
        DesignKind::Extended => "extended_design.json",
    });
    write_json(&file, &design)?;
    let mut files = vec![file];
    if kind == DesignKind::Extended {
        let germs = out.join("extended_germs.json");
        write_bytes(&germs, qcvv_core::gst::extended_germ_file_json().as_bytes())?;
        files.push(germs);
    }
    Ok((design, files))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub gate: String,
    pub dd_est: f64,
    pub sdp: f64,
    pub state_search: f64,
    pub cp_clip: f64,
}

/// Estimates a gate set from an existing dataset. With a known `model`
/// the full three-distance report is written as well.
pub fn analyze_dataset(
    data: &GstDataset,
    design: &ExperimentDesign,
    gauge: GaugeSchedule,
    spam_weight: f64,
    model: Option<ErrorModel>,
    out: &Path,
) -> CliResult<Vec<PathBuf>> {
    let report = match model {
        Some(m) => {
            let opts = PipelineOptions {
                gauge,
                spam_weight,
                ..PipelineOptions::default()
            };
            Some(report_from_dataset(&m, design, data, &opts)?)
        }
        None => None,
    };
    let est: GstEstimate = match &report {
        Some(r) => r.estimate.clone(),
        None => qcvv_core::gst::estimate(data, design, gauge, spam_weight)?,
    };
    let rows: Vec<AnalysisRow> = est
        .distances
        .iter()
        .map(|d| AnalysisRow {
            gate: d.gate.to_string(),
            dd_est: d.distance.value,
            sdp: d.distance.sdp,
            state_search: d.distance.state_search,
            cp_clip: d.cp_clip,
        })
        .collect();
    let mut files = vec![out.join("analysis.json"), out.join("analysis.csv")];
    write_json(&files[0], &est)?;
    write_csv(&files[1], &rows)?;
    if let Some(report) = &report {
        files.push(out.join("analysis_report.json"));
        files.push(out.join("analysis_distances.csv"));
        write_json(&files[2], report)?;
        write_csv(&files[3], &gst_rows(report))?;
    }
    Ok(files)
}
