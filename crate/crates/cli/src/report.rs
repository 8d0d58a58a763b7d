//! Markdown summary of a completed run.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{Acceptance, Protocol};
use crate::error::{CliError, CliResult};
use crate::json::read_json;
use crate::manifest::{RunManifest, RunStatus};
use crate::run::{
    GstSummary, LongWalkSummary, RbSummary, WalkSummary, GST_SUMMARY, LONGWALK_SUMMARY, RB_SUMMARY, WALK_SUMMARY,
};

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Renders the run recorded at `manifest_path`. Fails on an empty or
/// incomplete manifest and lists every missing or altered output.
pub fn report(manifest_path: &Path) -> CliResult<String> {
    let manifest = RunManifest::load(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    if manifest.outputs.is_empty() {
        return Err(CliError::MissingArtifacts(vec![format!(
            "{}: manifest lists no outputs",
            manifest_path.display()
        )]));
    }
    if manifest.status != RunStatus::Complete {
        return Err(CliError::Runtime(format!(
            "run status is {:?}; completed tasks: {}",
            manifest.status,
            manifest.completed_tasks.join(", ")
        )));
    }
    let summary_file = match manifest.protocol {
        Protocol::Rb => RB_SUMMARY,
        Protocol::RbLongwalk => LONGWALK_SUMMARY,
        Protocol::WalkScan => WALK_SUMMARY,
        Protocol::Gst => GST_SUMMARY,
    };
    let mut missing = manifest.check_outputs(dir);
    if manifest.output(summary_file).is_none() {
        missing.push(format!("{summary_file}: not listed in the manifest"));
    }
    if !missing.is_empty() {
        return Err(CliError::MissingArtifacts(missing));
    }

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "# Run report: {}\n", manifest.protocol);
    let _ = writeln!(w, "- config hash: `{}`", manifest.config_hash);
    let _ = writeln!(w, "- code version: {}", manifest.code_version);
    let _ = writeln!(w, "- seed: {}", manifest.config.seed);
    let _ = writeln!(w, "- started: {}", manifest.started_at);
    let _ = writeln!(w, "- finished: {}", manifest.finished_at.as_deref().unwrap_or("-"));
    let _ = writeln!(w, "- outputs: {}\n", manifest.outputs.len());

    let summary_path = dir.join(summary_file);
    let checks = match manifest.protocol {
        Protocol::Rb => rb_section(w, &read_json(&summary_path)?, &manifest.config.acceptance),
        Protocol::RbLongwalk => longwalk_section(w, &read_json(&summary_path)?, &manifest.config.acceptance),
        Protocol::WalkScan => walk_section(w, &read_json(&summary_path)?, &manifest.config.acceptance),
        Protocol::Gst => gst_section(w, &read_json(&summary_path)?, &manifest.config.acceptance),
    };
    let _ = writeln!(w, "\n## Acceptance\n");
    if checks.is_empty() {
        let _ = writeln!(w, "No thresholds configured.");
    }
    for (pass, line) in checks {
        let _ = writeln!(w, "- {} {line}", verdict(pass));
    }
    Ok(out)
}

type Checks = Vec<(bool, String)>;

fn rb_section(w: &mut String, s: &RbSummary, a: &Acceptance) -> Checks {
    let _ = writeln!(w, "## RB ({:?} noise, σ = {:e})\n", s.noise, s.sigma);
    match &s.decay {
        Some(d) => {
            let _ = writeln!(
                w,
                "Decay fit: p_rb = {:.4e} ± {:.1e}, κ = {:.3e}{}\n",
                d.p_rb,
                d.p_rb_se,
                d.kappa,
                if d.kappa_fixed { " (fixed)" } else { "" }
            );
        }
        None => {
            let _ = writeln!(w, "Decay fit: not performed (fewer than 3 lengths)\n");
        }
    }
    let _ = writeln!(
        w,
        "| J | mean F | variance | β_fit | β_calc | χ² | dof | p | skewness |"
    );
    let _ = writeln!(w, "|---|---|---|---|---|---|---|---|---|");
    let mut checks = Vec::new();
    for r in &s.lengths {
        let _ = writeln!(
            w,
            "| {} | {:.6} | {:.4e} | {} | {} | {} | {} | {} | {} |",
            r.j,
            r.mean_survival,
            r.variance,
            opt(r.beta_fit),
            opt(r.beta_calc),
            opt(r.chi2),
            r.chi2_dof.map_or("-".into(), |d| d.to_string()),
            opt(r.gof_p_value),
            r.skewness.map_or("-".into(), |x| format!("{x:.3}")),
        );
        if let (Some(alpha), Some(p)) = (a.gamma_gof_alpha, r.gof_p_value) {
            checks.push((p >= alpha, format!("J = {}: gamma GOF p = {p:.4} ≥ {alpha}", r.j)));
        }
        if let (Some(min), Some(sk)) = (a.min_skewness, r.skewness) {
            checks.push((sk > min, format!("J = {}: skewness {sk:.3} > {min}", r.j)));
        }
    }
    checks
}

fn longwalk_section(w: &mut String, s: &LongWalkSummary, a: &Acceptance) -> Checks {
    let _ = writeln!(
        w,
        "## Long-walk RB ({:?} noise, m = {}, {} preselected per length)\n",
        s.noise, s.multiplier, s.preselected
    );
    let _ = writeln!(w, "| set | p | ± | κ |");
    let _ = writeln!(w, "|---|---|---|---|");
    for (name, f) in [("random", &s.random), ("long walk", &s.longwalk)] {
        let _ = writeln!(w, "| {name} | {:.4e} | {:.1e} | {:.3e} |", f.p_rb, f.p_rb_se, f.kappa);
    }
    let _ = writeln!(w, "\np_lw / p_rb = {:.3}\n", s.ratio);
    let _ = writeln!(w, "| J | mean I (random) | mean I (long walk) |");
    let _ = writeln!(w, "|---|---|---|");
    for r in &s.lengths {
        let _ = writeln!(
            w,
            "| {} | {:.4e} | {:.4e} |",
            r.j, r.random_mean_infidelity, r.longwalk_mean_infidelity
        );
    }
    a.longwalk_ratio
        .map(|[lo, hi]| {
            vec![(
                lo <= s.ratio && s.ratio <= hi,
                format!("p_lw / p_rb = {:.3} in [{lo}, {hi}]", s.ratio),
            )]
        })
        .unwrap_or_default()
}

fn walk_section(w: &mut String, s: &WalkSummary, a: &Acceptance) -> Checks {
    let _ = writeln!(
        w,
        "## Walk scan (J = {}, σ = {:e}, {:?} steps)\n",
        s.length, s.sigma, s.weighting
    );
    let _ = writeln!(w, "| noise | slope | ± | t | skewness |");
    let _ = writeln!(w, "|---|---|---|---|---|");
    let mut checks = Vec::new();
    for r in &s.regressions {
        let _ = writeln!(
            w,
            "| {:?} | {:.4e} | {:.1e} | {:.2} | {} |",
            r.noise,
            r.fit.slope,
            r.fit.slope_se,
            r.t_statistic,
            r.skewness.map_or("-".into(), |x| format!("{x:.3}"))
        );
        match r.noise {
            qcvv_core::noise::NoiseKind::QuasiDc => {
                if let Some(min) = a.min_dc_t_statistic {
                    checks.push((
                        r.t_statistic > min,
                        format!("quasi-DC t = {:.2} > {min}", r.t_statistic),
                    ));
                }
            }
            qcvv_core::noise::NoiseKind::White => {
                if let Some(max) = a.max_white_t_statistic {
                    checks.push((
                        r.t_statistic.abs() < max,
                        format!("white |t| = {:.2} < {max}", r.t_statistic.abs()),
                    ));
                }
            }
        }
    }
    checks
}

fn gst_section(w: &mut String, s: &GstSummary, a: &Acceptance) -> Checks {
    let _ = writeln!(
        w,
        "## GST ({:?} design, {} circuits, {:?} model, gauge {}, w_spam = {:e})\n",
        s.design, s.circuits, s.model, s.gauge, s.spam_weight
    );
    let _ = writeln!(
        w,
        "| gate | magnitude | dd_calc | dd_calc_gauge | dd_est | dd_calc / dd_est |"
    );
    let _ = writeln!(w, "|---|---|---|---|---|---|");
    let mut checks = Vec::new();
    for r in &s.rows {
        let ratio = r.dd_calc / r.dd_est;
        let _ = writeln!(
            w,
            "| {} | {:.4e} | {:.4e} | {:.4e} | {:.4e} | {:.2} |",
            r.gate, r.magnitude, r.dd_calc, r.dd_calc_gauge, r.dd_est, ratio
        );
        if let Some(min) = a.min_gauge_suppression.filter(|_| r.gate != "Gi") {
            checks.push((
                ratio >= min,
                format!(
                    "{} at {:.4e}: dd_calc / dd_est = {ratio:.2} ≥ {min}",
                    r.gate, r.magnitude
                ),
            ));
        }
    }
    checks
}
