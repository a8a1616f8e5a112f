//! The staged batch pipeline.
//!
//! `ingest -> fit-regimes -> fit-garch -> vol-path -> mispricing -> regress
//! -> report`. Each stage reads its inputs from the files earlier stages
//! wrote under the output directory, so any single stage can be rerun on
//! its own and reproduces its outputs exactly. A run always leaves a
//! manifest listing what was written and, on failure, which stage failed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use optbench_core::amm::{
    calibrate_rate_table, moneyness_of_step, quote, settlement_rate, validate_trade_against_grid, RateTable,
};
use optbench_core::market_data::compute_returns;
use optbench_core::mispricing::{
    build_design, compute_mispricing, delta_price_by_strike, fit_fgls, iv_gap_report, MispricingRow, StrikePoint,
};
use optbench_core::regime_switching::{
    classify, fit_msar, label_of, regime_residuals, MsArFit, MsArParams, MsArSpec, RegimeLabel, RegimeLabels,
    RegimeParams,
};
use optbench_core::stats::describe;
use optbench_core::volatility::garch::MIN_OBSERVATIONS;
use optbench_core::volatility::path::REALIZED_WINDOW;
use optbench_core::volatility::{
    build_vol_path, fit_garch, realized_volatility, regime_subsample, select_best, spec_seed, GarchFit, GarchParams,
    RegimeVariances, Selection, VolPoint, VolatilityPath,
};
use optbench_core::{Moneyness, OptionKind, OptionTrade, ReturnSeries};

use crate::config::{AssetConfig, GarchInput, PipelineConfig, Reference};
use crate::error::{CliError, Result, EXIT_OK};
use crate::io::{self, Sink};
use crate::reference::{self, Comparison, Observed};
use crate::report::*;
use crate::seeds::{digest, substream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    FitRegimes,
    FitGarch,
    VolPath,
    Mispricing,
    Regress,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::FitRegimes,
        Stage::FitGarch,
        Stage::VolPath,
        Stage::Mispricing,
        Stage::Regress,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::FitRegimes => "fit-regimes",
            Stage::FitGarch => "fit-garch",
            Stage::VolPath => "vol-path",
            Stage::Mispricing => "mispricing",
            Stage::Regress => "regress",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| {
            format!("unknown stage {s:?} (expected one of: {})", Stage::ALL.map(|s| s.name()).join(", "))
        })
    }
}

/// Output paths, relative to the output directory.
pub mod layout {
    pub fn returns(a: &str) -> String {
        format!("ingest/{a}/returns.csv")
    }
    pub fn ingest_summary(a: &str) -> String {
        format!("ingest/{a}/summary.json")
    }
    pub fn trades(a: &str) -> String {
        format!("ingest/{a}/trades.csv")
    }
    pub fn regime_fit(a: &str) -> String {
        format!("regimes/{a}/fit.json")
    }
    pub fn probabilities(a: &str) -> String {
        format!("regimes/{a}/probabilities.csv")
    }
    pub fn garch(a: &str, regime: usize) -> String {
        format!("garch/{a}/regime{regime}.json")
    }
    pub fn variances(a: &str) -> String {
        format!("garch/{a}/variances.csv")
    }
    pub fn vol_path(a: &str) -> String {
        format!("volpath/{a}.csv")
    }
    pub fn realized(a: &str) -> String {
        format!("volpath/{a}_realized.csv")
    }
    pub fn vol_summary(a: &str) -> String {
        format!("volpath/{a}.json")
    }
    pub fn mispricing(a: &str, file: &str) -> String {
        format!("mispricing/{a}/{file}")
    }
    pub fn regression(a: &str) -> String {
        format!("regression/{a}.json")
    }
    pub const SUMMARY: &str = "summary.json";
    pub const COMPARISON: &str = "comparison.json";
    pub const MANIFEST: &str = "manifest.json";
    pub fn stage_manifest(stage: &str) -> String {
        format!("manifests/{stage}.json")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: u64,
    pub fnv64: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    /// `ok`, `failed` or `not-run`.
    pub status: String,
    pub files: Vec<FileRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub assets: Vec<String>,
    pub status: String,
    pub exit_code: i32,
    pub stages: Vec<StageRecord>,
    pub failure: Option<Failure>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub manifest: Manifest,
    pub error: Option<(Stage, CliError)>,
}

/// Runs `stages` in order, stopping at the first failure. The manifest is
/// written in every case; a full run writes `manifest.json`, a partial one
/// `manifests/<first-stage>.json`.
pub fn run(cfg: &PipelineConfig, stages: &[Stage]) -> RunOutcome {
    let mut sink = Sink::new(&cfg.output_dir);
    let mut records = Vec::new();
    let mut error = None;
    for &stage in stages {
        if error.is_some() {
            records.push(StageRecord { stage: stage.name().into(), status: "not-run".into(), files: Vec::new() });
            continue;
        }
        info!("stage {stage}");
        let result = run_stage(cfg, stage, &mut sink);
        let files = sink.take_written().into_iter().map(|p| file_record(sink.root(), p)).collect();
        let status = if result.is_ok() { "ok" } else { "failed" };
        records.push(StageRecord { stage: stage.name().into(), status: status.into(), files });
        if let Err(e) = result {
            info!("stage {stage} failed: {e}");
            error = Some((stage, e));
        }
    }
    let exit_code = error.as_ref().map_or(EXIT_OK, |(_, e)| e.exit_code());
    let manifest = Manifest {
        seed: cfg.seed,
        assets: cfg.assets.iter().map(|a| a.name.clone()).collect(),
        status: if error.is_some() { "failed".into() } else { "complete".into() },
        exit_code,
        stages: records,
        failure: error.as_ref().map(|(s, e)| Failure {
            stage: s.name().into(),
            kind: e.kind().into(),
            message: e.to_string(),
        }),
    };
    let name = if stages == Stage::ALL {
        layout::MANIFEST.to_string()
    } else {
        layout::stage_manifest(stages.first().map_or("none", |s| s.name()))
    };
    if let Err(e) = io::write_json(&sink.path(&name), &manifest) {
        warn!("{e}");
        if error.is_none() {
            return RunOutcome { exit_code: e.exit_code(), manifest, error: Some((Stage::Report, e)) };
        }
    }
    RunOutcome { exit_code, manifest, error }
}

fn file_record(root: &Path, rel: String) -> FileRecord {
    let bytes = std::fs::read(root.join(&rel)).unwrap_or_default();
    FileRecord { bytes: bytes.len() as u64, fnv64: digest(&bytes), path: rel }
}

pub fn run_stage(cfg: &PipelineConfig, stage: Stage, sink: &mut Sink) -> Result<()> {
    if stage == Stage::Report {
        return report(cfg, sink);
    }
    for asset in &cfg.assets {
        info!("{stage}: {}", asset.name);
        let r = match stage {
            Stage::Ingest => ingest(cfg, asset, sink),
            Stage::FitRegimes => fit_regimes(cfg, asset, sink),
            Stage::FitGarch => fit_garch_stage(cfg, asset, sink),
            Stage::VolPath => vol_path(cfg, asset, sink),
            Stage::Mispricing => mispricing(cfg, asset, sink),
            Stage::Regress => regress(cfg, asset, sink),
            Stage::Report => unreachable!(),
        };
        r.map_err(|e| e.context(&asset.name))?;
    }
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn summarize(values: &[f64]) -> Result<SummaryReport> {
    Ok(SummaryReport::from(&describe(values)?))
}

fn ingest(cfg: &PipelineConfig, asset: &AssetConfig, sink: &mut Sink) -> Result<()> {
    let prices = io::load_prices(&asset.prices)?;
    let returns =
        compute_returns(&asset.name, &prices, cfg.return_kind.into()).map_err(|e| CliError::input(&asset.prices, e))?;
    let trades = io::load_trades(&asset.trades)?;
    let calendar_gaps = prices.windows(2).filter(|w| (w[1].date - w[0].date).num_days() > 1).count();
    let mut buckets = Vec::new();
    for kind in [OptionKind::Call, OptionKind::Put] {
        for m in [Moneyness::Atm, Moneyness::Otm] {
            let count = trades.iter().filter(|t| t.kind == kind && t.moneyness == m).count();
            buckets.push(Count { kind: kind.to_string(), moneyness: m.to_string(), count });
        }
    }
    let volumes: Vec<f64> = returns.points.iter().map(|p| p.volume).collect();
    let summary = IngestSummary {
        asset: asset.name.clone(),
        price_file: file_name(&asset.prices),
        trade_file: file_name(&asset.trades),
        return_kind: format!("{:?}", cfg.return_kind).to_lowercase(),
        first_date: prices[0].date,
        last_date: prices[prices.len() - 1].date,
        price_days: prices.len(),
        calendar_gaps,
        returns: summarize(&returns.values())?,
        volume: summarize(&volumes)?,
        trades: trades.len(),
        trades_by_bucket: buckets,
    };
    io::write_returns(&sink.claim(&layout::returns(&asset.name)), &returns)?;
    io::write_trades(&sink.claim(&layout::trades(&asset.name)), &trades)?;
    sink.json(&layout::ingest_summary(&asset.name), &summary)
}

fn load_returns(sink: &Sink, asset: &AssetConfig) -> Result<ReturnSeries> {
    io::load_returns(&sink.path(&layout::returns(&asset.name)), &asset.name)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProbabilityRecord {
    date: NaiveDate,
    p0: f64,
    p1: f64,
    label: String,
}

fn label_str(l: RegimeLabel) -> String {
    match l {
        RegimeLabel::Regime(r) => r.to_string(),
        RegimeLabel::Uncertain => "uncertain".into(),
    }
}

fn parse_label(s: &str) -> std::result::Result<RegimeLabel, String> {
    match s {
        "0" => Ok(RegimeLabel::Regime(0)),
        "1" => Ok(RegimeLabel::Regime(1)),
        "uncertain" => Ok(RegimeLabel::Uncertain),
        other => Err(format!("unknown regime label {other:?}")),
    }
}

fn regime_report(fit: &MsArFit, labels: &RegimeLabels, asset: &str) -> RegimeFitReport {
    let a = fit.spec.ar_order;
    let se = &fit.standard_errors;
    let block = a + 2;
    let regimes = (0..2)
        .map(|r| {
            let p = &fit.params.regimes[r];
            let off = r * block;
            RegimeReport {
                index: r,
                name: labels.name(r).as_str().into(),
                intercept: Estimate::new(p.intercept, se[off]),
                ar: p.ar.iter().enumerate().map(|(i, phi)| Estimate::new(*phi, se[off + 1 + i])).collect(),
                variance: Estimate::new(p.variance, se[off + 1 + a]),
            }
        })
        .collect();
    let high = labels.high_volatility;
    RegimeFitReport {
        asset: asset.into(),
        ar_order: a,
        n_obs: fit.n_obs,
        n_params: fit.n_params,
        log_likelihood: fit.log_likelihood,
        aic: fit.aic,
        bic: fit.bic,
        standard_errors: "sandwich (Bartlett kernel) from numerical scores and Hessian".into(),
        se_bandwidth: fit.se_bandwidth,
        starts: fit.starts,
        converged_starts: fit.converged_starts,
        gradient_norm: fit.gradient_norm,
        iterations: fit.iterations,
        high_volatility_regime: high,
        regimes,
        transition: TransitionReport {
            matrix: fit.params.transition(),
            p00: Estimate::new(fit.params.p00, se[2 * block]),
            p10: Estimate::new(fit.params.p10, se[2 * block + 1]),
            stationary: fit.params.stationary(),
            expected_durations: fit.params.expected_durations(),
        },
        labels: LabelCounts {
            regime0: labels.count(RegimeLabel::Regime(0)),
            regime1: labels.count(RegimeLabel::Regime(1)),
            uncertain: labels.count(RegimeLabel::Uncertain),
        },
        smoothed: SmoothedTable {
            columns: ["date".into(), format!("p_regime{high}")],
            rows: fit.dates.iter().zip(&fit.smoothed).map(|(d, p)| (*d, p[high])).collect(),
        },
    }
}

fn fit_regimes(cfg: &PipelineConfig, asset: &AssetConfig, sink: &mut Sink) -> Result<()> {
    let returns = load_returns(sink, asset)?;
    let seed = substream(cfg.seed, Stage::FitRegimes.name(), &asset.name);
    let fit = fit_msar(&returns, MsArSpec::new(asset.ar_order), seed, &cfg.msar_options())?;
    let labels = classify(&fit);
    info!(
        "{}: regime variances {:.4} / {:.4}, p00 {:.4}, p10 {:.4}",
        asset.name, fit.params.regimes[0].variance, fit.params.regimes[1].variance, fit.params.p00, fit.params.p10
    );
    let report = regime_report(&fit, &labels, &asset.name);
    sink.json(&layout::regime_fit(&asset.name), &report)?;
    sink.records(
        &layout::probabilities(&asset.name),
        fit.dates.iter().zip(&fit.smoothed).zip(&labels.labels).map(|((d, p), l)| ProbabilityRecord {
            date: *d,
            p0: p[0],
            p1: p[1],
            label: label_str(*l),
        }),
    )
}

/// The regime fit as later stages see it, rebuilt from the stage files.
struct StoredRegimes {
    params: MsArParams,
    smoothed: Vec<[f64; 2]>,
    labels: RegimeLabels,
}

fn load_regimes(sink: &Sink, asset: &AssetConfig) -> Result<StoredRegimes> {
    let report: RegimeFitReport = io::read_json(&sink.path(&layout::regime_fit(&asset.name)))?;
    let regime = |r: &RegimeReport| RegimeParams {
        intercept: r.intercept.value,
        ar: r.ar.iter().map(|e| e.value).collect(),
        variance: r.variance.value,
    };
    if report.regimes.len() != 2 {
        return Err(CliError::Data(format!("{}: expected two regimes", layout::regime_fit(&asset.name))));
    }
    let params = MsArParams {
        regimes: [regime(&report.regimes[0]), regime(&report.regimes[1])],
        p00: report.transition.p00.value,
        p10: report.transition.p10.value,
    };
    let path = sink.path(&layout::probabilities(&asset.name));
    let records: Vec<ProbabilityRecord> = io::read_records(&path)?;
    let smoothed: Vec<[f64; 2]> = records.iter().map(|r| [r.p0, r.p1]).collect();
    let mut labels = Vec::with_capacity(records.len());
    for r in &records {
        let stored = parse_label(&r.label).map_err(|e| CliError::input(&path, e))?;
        if stored != label_of([r.p0, r.p1]) {
            return Err(CliError::input(&path, format!("label on {} disagrees with its probabilities", r.date)));
        }
        labels.push(stored);
    }
    let labels = RegimeLabels {
        dates: records.iter().map(|r| r.date).collect(),
        labels,
        high_volatility: report.high_volatility_regime,
        expected_durations: params.expected_durations(),
    };
    Ok(StoredRegimes { params, smoothed, labels })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VarianceRecord {
    date: NaiveDate,
    regime: usize,
    variance: f64,
    residual: f64,
    standardized: f64,
}

fn spec_report(s: optbench_core::volatility::GarchSpec) -> SpecReport {
    SpecReport { p: s.p, o: s.o, q: s.q }
}

fn garch_report(cfg: &PipelineConfig, asset: &str, regime: usize, name: &str, sel: &Selection) -> GarchReport {
    let fit: &GarchFit = &sel.fit;
    let family = cfg.garch_options().family;
    let names = GarchParams::names(fit.spec, family);
    let values = fit.params.to_vec();
    let params = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let robust = Estimate::new(values[i], fit.robust_standard_errors[i]);
            NamedEstimate {
                name,
                value: values[i],
                std_error: finite(fit.standard_errors[i]),
                robust_std_error: robust.std_error,
                z_stat: robust.z_stat,
                p_value: robust.p_value,
                stars: robust.stars,
            }
        })
        .collect();
    let mut candidates: Vec<Candidate> = sel
        .candidates
        .iter()
        .map(|(s, bic, admissible)| Candidate {
            spec: spec_report(*s),
            bic: finite(*bic),
            admissible: *admissible,
            error: None,
        })
        .chain(sel.failures.iter().map(|(s, e)| Candidate {
            spec: spec_report(*s),
            bic: None,
            admissible: false,
            error: Some(e.to_string()),
        }))
        .collect();
    candidates.sort_by_key(|c| (c.spec.p, c.spec.o, c.spec.q));
    let spec = spec_report(fit.spec);
    let lags = cfg.garch.diagnostic_lags;
    GarchReport {
        asset: asset.into(),
        regime,
        name: name.into(),
        input: match cfg.garch.input {
            GarchInput::Returns => "returns".into(),
            GarchInput::MsarResiduals => "msar-residuals".into(),
        },
        subsample_size: fit.n_obs,
        spec,
        specification: spec.label(),
        family: family.as_str().into(),
        params,
        log_likelihood: fit.log_likelihood,
        aic: fit.aic,
        bic: fit.bic,
        n_params: fit.n_params,
        n_obs: fit.n_obs,
        presample_variance: fit.presample_variance,
        persistence: fit.params.persistence(),
        stationary: fit.stationary,
        unconditional_variance: finite(fit.params.unconditional_variance()),
        ljung_box: DiagnosticReport::new(lags, &fit.ljung_box),
        arch_lm: DiagnosticReport::new(lags, &fit.arch_lm),
        gradient_norm: fit.gradient_norm,
        iterations: fit.iterations,
        grid: SpecReport { p: cfg.garch.p_max, o: cfg.garch.o_max, q: cfg.garch.q_max },
        candidates,
    }
}

/// BIC search over the configured grid; candidates are fitted in parallel
/// and reduced with an order-independent key.
pub fn select_garch(cfg: &PipelineConfig, subsample: &ReturnSeries, seed: u64) -> Result<Selection> {
    let options = cfg.garch_options();
    let outcomes: Vec<_> = cfg
        .grid_bounds()
        .specs()
        .into_par_iter()
        .map(|spec| (spec, fit_garch(subsample, spec, spec_seed(seed, spec), &options)))
        .collect();
    Ok(select_best(outcomes)?)
}

fn fit_garch_stage(cfg: &PipelineConfig, asset: &AssetConfig, sink: &mut Sink) -> Result<()> {
    let returns = load_returns(sink, asset)?;
    let stored = load_regimes(sink, asset)?;
    let input = match cfg.garch.input {
        GarchInput::Returns => returns,
        GarchInput::MsarResiduals => regime_residuals(&stored.params, &stored.smoothed, &returns)?,
    };
    let mut variances = Vec::new();
    for r in 0..2 {
        let name = stored.labels.name(r).as_str();
        let sub = regime_subsample(&input, &stored.labels, r);
        if sub.len() < MIN_OBSERVATIONS {
            return Err(CliError::Estimation(format!(
                "regime {r} ({name}) has {} labeled days; GARCH needs at least {MIN_OBSERVATIONS}",
                sub.len()
            )));
        }
        let seed = substream(cfg.seed, &format!("{}/regime{r}", Stage::FitGarch.name()), &asset.name);
        let sel = select_garch(cfg, &sub, seed).map_err(|e| e.context(&format!("regime {r}")))?;
        info!("{}: regime {r} selected {}", asset.name, spec_report(sel.fit.spec).label());
        let fit = &sel.fit;
        for i in 0..fit.n_obs {
            variances.push(VarianceRecord {
                date: sub.points[i].date,
                regime: r,
                variance: fit.variances[i],
                residual: fit.residuals[i],
                standardized: fit.standardized[i],
            });
        }
        sink.json(&layout::garch(&asset.name, r), &garch_report(cfg, &asset.name, r, name, &sel))?;
    }
    variances.sort_by_key(|v| v.date);
    sink.records(&layout::variances(&asset.name), variances)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VolRecord {
    date: NaiveDate,
    sigma_annualized: f64,
    regime: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RealizedRecord {
    date: NaiveDate,
    realized_vol: f64,
}

fn vol_path(cfg: &PipelineConfig, asset: &AssetConfig, sink: &mut Sink) -> Result<()> {
    let stored = load_regimes(sink, asset)?;
    let records: Vec<VarianceRecord> = io::read_records(&sink.path(&layout::variances(&asset.name)))?;
    let mut dates: [Vec<NaiveDate>; 2] = Default::default();
    let mut values: [Vec<f64>; 2] = Default::default();
    for v in &records {
        if v.regime > 1 {
            return Err(CliError::Data(format!(
                "{}: regime {} out of range",
                layout::variances(&asset.name),
                v.regime
            )));
        }
        dates[v.regime].push(v.date);
        values[v.regime].push(v.variance);
    }
    let fits = [
        RegimeVariances { dates: &dates[0], variances: &values[0] },
        RegimeVariances { dates: &dates[1], variances: &values[1] },
    ];
    let path = build_vol_path(&stored.labels, fits, &stored.labels.dates, cfg.annualization)?;
    if !path.unresolved.is_empty() {
        warn!("{}: {} leading uncertain day(s) have no volatility", asset.name, path.unresolved.len());
    }
    let by_source_regime = (0..2)
        .map(|r| {
            let s: Vec<f64> = path.points.iter().filter(|p| p.source_regime == r).map(|p| p.sigma_annualized).collect();
            Ok(RegimeSigma { regime: r, days: s.len(), sigma: if s.is_empty() { None } else { Some(summarize(&s)?) } })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = VolPathSummary {
        asset: asset.name.clone(),
        annualization: cfg.annualization,
        days: path.points.len(),
        inherited: path.points.iter().filter(|p| p.inherited).count(),
        unresolved: path.unresolved.clone(),
        by_source_regime,
        realized_window: REALIZED_WINDOW,
    };
    sink.records(
        &layout::vol_path(&asset.name),
        path.points.iter().map(|p| VolRecord {
            date: p.date,
            sigma_annualized: p.sigma_annualized,
            regime: label_str(p.label),
        }),
    )?;
    let returns = load_returns(sink, asset)?;
    sink.records(
        &layout::realized(&asset.name),
        realized_volatility(&returns, REALIZED_WINDOW, cfg.annualization)
            .into_iter()
            .map(|(date, realized_vol)| RealizedRecord { date, realized_vol }),
    )?;
    sink.json(&layout::vol_summary(&asset.name), &summary)
}

/// Rebuilds the volatility path from its file. Uncertain days take the
/// source regime of the day before, as they did when the path was built.
pub fn load_vol_path(dir: &Path, asset: &str, annualization: f64) -> Result<VolatilityPath> {
    let csv = dir.join(layout::vol_path(asset));
    let records: Vec<VolRecord> = io::read_records(&csv)?;
    let summary: VolPathSummary = io::read_json(&dir.join(layout::vol_summary(asset)))?;
    let mut points: Vec<VolPoint> = Vec::with_capacity(records.len());
    for r in records {
        let label = parse_label(&r.regime).map_err(|e| CliError::input(&csv, e))?;
        let (source_regime, inherited) = match label {
            RegimeLabel::Regime(s) => (s, false),
            RegimeLabel::Uncertain => match points.last() {
                Some(prev) => (prev.source_regime, true),
                None => {
                    return Err(CliError::input(&csv, format!("uncertain day {} has no earlier labeled day", r.date)))
                }
            },
        };
        points.push(VolPoint { date: r.date, sigma_annualized: r.sigma_annualized, label, source_regime, inherited });
    }
    Ok(VolatilityPath { points, unresolved: summary.unresolved, annualization })
}

#[derive(Debug, Clone, Serialize)]
struct ExclusionRecord<'a> {
    trade_id: &'a str,
    reason: &'a str,
}

#[derive(Debug, Clone, Serialize)]
struct DeltaByStrike<'a> {
    underlying: &'a str,
    kind: &'static str,
    step_percent: Option<u32>,
    strike: f64,
    delta_price: f64,
}

#[derive(Debug, Clone, Serialize)]
struct IvGapByStrike<'a> {
    underlying: &'a str,
    kind: &'static str,
    step_percent: Option<u32>,
    strike: f64,
    iv_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
struct QuoteCheckRecord {
    trade_id: String,
    kind: &'static str,
    step_percent: Option<u32>,
    maturity_days: u32,
    amount: f64,
    spot: f64,
    /// Per-contract premium paid, net of the fee when it is stripped.
    observed_premium: f64,
    quoted_premium: Option<f64>,
    fee: Option<f64>,
    total: Option<f64>,
    rate: Option<f64>,
    interpolated: Option<bool>,
    relative_gap: Option<f64>,
    error: Option<String>,
}

fn quote_check(table: &RateTable, trades: &[OptionTrade], strip_fee: bool) -> Vec<QuoteCheckRecord> {
    trades
        .iter()
        .map(|t| {
            let step = validate_trade_against_grid(t);
            let mut observed = t.premium_paid / t.amount;
            if let (true, Ok(s)) = (strip_fee, &step) {
                observed /= 1.0 + settlement_rate(moneyness_of_step(*s));
            }
            let quoted = step
                .as_ref()
                .map_err(|e| e.clone())
                .and_then(|s| quote(table, t.spot, t.kind, *s, t.maturity_days, t.amount));
            let q = quoted.as_ref().ok();
            QuoteCheckRecord {
                trade_id: t.trade_id.clone(),
                kind: t.kind.as_str(),
                step_percent: step.as_ref().ok().copied(),
                maturity_days: t.maturity_days,
                amount: t.amount,
                spot: t.spot,
                observed_premium: observed,
                quoted_premium: q.map(|q| q.premium),
                fee: q.map(|q| q.fee),
                total: q.map(|q| q.total),
                rate: q.map(|q| q.rate),
                interpolated: q.map(|q| q.interpolated),
                relative_gap: q.map(|q| observed / q.premium - 1.0),
                error: quoted.err().map(|e| e.to_string()),
            }
        })
        .collect()
}

fn delta_buckets(rows: &[MispricingRow]) -> Result<Vec<Bucket>> {
    let mut groups: BTreeMap<(String, OptionKind), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.underlying.clone(), r.kind)).or_default().push(r.delta_price);
    }
    groups
        .into_iter()
        .map(|((underlying, kind), v)| Ok(Bucket { underlying, kind: kind.to_string(), summary: summarize(&v)? }))
        .collect()
}

fn strike_rows<'a, T>(points: &'a [StrikePoint], make: impl Fn(&'a StrikePoint) -> T) -> Vec<T> {
    points.iter().map(make).collect()
}

fn mispricing(cfg: &PipelineConfig, asset: &AssetConfig, sink: &mut Sink) -> Result<()> {
    let returns = load_returns(sink, asset)?;
    let trades = io::load_trades(&sink.path(&layout::trades(&asset.name)))?;
    let vol = load_vol_path(sink.root(), &asset.name, cfg.annualization)?;
    let (rows, excluded) = compute_mispricing(&trades, &returns, &vol, cfg.risk_free_rate)?;
    for e in &excluded {
        warn!("{}: trade {} excluded: {}", asset.name, e.trade_id, e.reason);
    }
    let (table, source, skipped) = match &cfg.rates.table {
        Some(p) => (io::load_rate_table(p)?, format!("file {}", file_name(p)), Vec::new()),
        None => {
            let (t, skipped) = calibrate_rate_table(&trades, cfg.rates.strip_fee);
            (t, "calibrated: median implied rate per cell".to_string(), skipped)
        }
    };
    let checks = quote_check(&table, &trades, cfg.rates.strip_fee);
    let gaps: Vec<f64> = checks.iter().filter_map(|c| c.relative_gap).collect();
    let ivr = iv_gap_report(&rows);
    let with_iv = rows.iter().filter(|r| r.iv.is_some()).count();

    let a = &asset.name;
    io::write_mispricing(&sink.claim(&layout::mispricing(a, "rows.csv")), &rows)?;
    sink.records(
        &layout::mispricing(a, "exclusions.csv"),
        excluded.iter().map(|e| ExclusionRecord { trade_id: &e.trade_id, reason: &e.reason }),
    )?;
    let by_strike = delta_price_by_strike(&rows);
    sink.records(
        &layout::mispricing(a, "delta_price_by_strike.csv"),
        strike_rows(&by_strike, |p| DeltaByStrike {
            underlying: &p.underlying,
            kind: p.kind.as_str(),
            step_percent: p.step_percent,
            strike: p.strike,
            delta_price: p.value,
        }),
    )?;
    sink.records(
        &layout::mispricing(a, "iv_gap_by_strike.csv"),
        strike_rows(&ivr.by_strike, |p| IvGapByStrike {
            underlying: &p.underlying,
            kind: p.kind.as_str(),
            step_percent: p.step_percent,
            strike: p.strike,
            iv_gap: p.value,
        }),
    )?;
    sink.json(
        &layout::mispricing(a, "iv_gap.json"),
        &IvGapSummary {
            asset: a.clone(),
            rows_with_iv: with_iv,
            rows_without_iv: rows.len() - with_iv,
            buckets: ivr
                .buckets
                .iter()
                .map(|b| Bucket {
                    underlying: b.underlying.clone(),
                    kind: b.kind.to_string(),
                    summary: (&b.summary).into(),
                })
                .collect(),
            notes: ivr.notes.clone(),
        },
    )?;
    io::write_rate_table(&sink.claim(&layout::mispricing(a, "rate_table.csv")), &table)?;
    let quoted = checks.iter().filter(|c| c.quoted_premium.is_some()).count();
    let interpolated = checks.iter().filter(|c| c.interpolated == Some(true)).count();
    sink.records(&layout::mispricing(a, "quote_check.csv"), checks)?;
    let summary = MispricingSummary {
        asset: a.clone(),
        risk_free_rate: cfg.risk_free_rate,
        rows: rows.len(),
        excluded: excluded.iter().map(|e| Reason { trade_id: e.trade_id.clone(), reason: e.reason.clone() }).collect(),
        delta_price: delta_buckets(&rows)?,
        rate_table: RateTableInfo {
            source,
            strip_fee: cfg.rates.strip_fee,
            cells: table.len(),
            skipped: skipped.into_iter().map(|s| Reason { trade_id: s.trade_id, reason: s.reason }).collect(),
        },
        quote_check: QuoteCheckSummary {
            trades: trades.len(),
            quoted,
            interpolated,
            relative_gap: if gaps.is_empty() { None } else { Some(summarize(&gaps)?) },
        },
    };
    sink.json(&layout::mispricing(a, "summary.json"), &summary)
}

fn regress(cfg: &PipelineConfig, asset: &AssetConfig, sink: &mut Sink) -> Result<()> {
    let rows = io::load_mispricing(&sink.path(&layout::mispricing(&asset.name, "rows.csv")))?;
    let design = build_design(&rows)?;
    let options = cfg.fgls_options();
    let res = fit_fgls(&design.x, &design.y, &design.names, &options)?;
    if res.degenerate_weights {
        warn!("{}: every fitted variance hit the floor; FGLS weights are degenerate", asset.name);
    }
    let coefficients = (0..res.names.len())
        .map(|j| {
            let p = finite(res.p_values[j]);
            Coefficient {
                name: res.names[j].clone(),
                estimate: res.coefficients[j],
                std_error: finite(res.std_errors[j]),
                t_stat: finite(res.t_stats[j]),
                p_value: p,
                stars: stars(p),
                ols_estimate: res.ols_coefficients[j],
                aux_estimate: res.aux_coefficients[j],
            }
        })
        .collect();
    let report = RegressionReport {
        asset: asset.name.clone(),
        header: RegressionHeader {
            risk_free_rate: cfg.risk_free_rate,
            volatility_regressor: "annualized model volatility sigma_t (decimal)".into(),
            observation_order: "trade timestamp ascending, ties by trade id".into(),
            hac_bandwidth: res.bandwidth,
            bandwidth_rule: if options.bandwidth.is_some() {
                "fixed".into()
            } else {
                "auto: floor(4 (n/100)^(2/9))".into()
            },
            omega_floor_ratio: options.floor_ratio,
        },
        n_obs: res.n_obs,
        excluded: design
            .excluded
            .iter()
            .map(|e| Reason { trade_id: e.trade_id.clone(), reason: e.reason.clone() })
            .collect(),
        coefficients,
        diagnostics: RegressionDiagnostics {
            r_squared: res.r_squared,
            adj_r_squared: res.adj_r_squared,
            f_stat: finite(res.f_stat),
            f_p_value: finite(res.f_p_value),
            wald_stat: finite(res.wald_stat),
            wald_p_value: finite(res.wald_p_value),
            condition_number: res.condition_number,
            vif: res
                .names
                .iter()
                .zip(&res.vif)
                .skip(1)
                .map(|(n, v)| Vif { name: n.clone(), vif: finite(*v) })
                .collect(),
        },
        omega: OmegaReport { floor: res.omega_floor, floored: res.floored, degenerate_weights: res.degenerate_weights },
        standardization: design
            .names
            .iter()
            .skip(1)
            .zip(design.location.iter().zip(&design.scale))
            .map(|(n, (m, s))| Standardization { name: n.clone(), mean: *m, std: *s })
            .collect(),
    };
    sink.json(&layout::regression(&asset.name), &report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchChoice {
    pub regime: usize,
    pub name: String,
    pub specification: String,
    pub bic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBrief {
    pub name: String,
    pub estimate: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetSummary {
    pub asset: String,
    pub regime_variances: [f64; 2],
    pub transition: [[f64; 2]; 2],
    pub expected_durations: [f64; 2],
    pub labels: LabelCounts,
    pub garch: Vec<GarchChoice>,
    pub trades_priced: usize,
    pub regression_n_obs: usize,
    pub adj_r_squared: f64,
    pub coefficients: Vec<CoefficientBrief>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub seed: u64,
    pub risk_free_rate: f64,
    pub annualization: f64,
    pub assets: Vec<AssetSummary>,
}

struct AssetReports {
    regimes: RegimeFitReport,
    garch: [GarchReport; 2],
    regression: RegressionReport,
}

fn load_reports(dir: &Path, asset: &str) -> Result<AssetReports> {
    Ok(AssetReports {
        regimes: io::read_json(&dir.join(layout::regime_fit(asset)))?,
        garch: [io::read_json(&dir.join(layout::garch(asset, 0)))?, io::read_json(&dir.join(layout::garch(asset, 1)))?],
        regression: io::read_json(&dir.join(layout::regression(asset)))?,
    })
}

fn report(cfg: &PipelineConfig, sink: &mut Sink) -> Result<()> {
    let mut loaded = Vec::new();
    for a in &cfg.assets {
        loaded.push(load_reports(sink.root(), &a.name).map_err(|e| e.context(&a.name))?);
    }
    let assets = cfg
        .assets
        .iter()
        .zip(&loaded)
        .map(|(a, r)| AssetSummary {
            asset: a.name.clone(),
            regime_variances: [r.regimes.regimes[0].variance.value, r.regimes.regimes[1].variance.value],
            transition: r.regimes.transition.matrix,
            expected_durations: r.regimes.transition.expected_durations,
            labels: r.regimes.labels.clone(),
            garch: r
                .garch
                .iter()
                .map(|g| GarchChoice {
                    regime: g.regime,
                    name: g.name.clone(),
                    specification: g.specification.clone(),
                    bic: g.bic,
                })
                .collect(),
            trades_priced: r.regression.n_obs + r.regression.excluded.len(),
            regression_n_obs: r.regression.n_obs,
            adj_r_squared: r.regression.diagnostics.adj_r_squared,
            coefficients: r
                .regression
                .coefficients
                .iter()
                .map(|c| CoefficientBrief { name: c.name.clone(), estimate: c.estimate, stars: c.stars.clone() })
                .collect(),
        })
        .collect();
    sink.json(
        layout::SUMMARY,
        &PipelineSummary {
            seed: cfg.seed,
            risk_free_rate: cfg.risk_free_rate,
            annualization: cfg.annualization,
            assets,
        },
    )?;
    let observed: Vec<Observed<'_>> = cfg
        .assets
        .iter()
        .zip(&loaded)
        .filter_map(|(a, r)| {
            a.reference.map(|reference: Reference| Observed {
                asset: &a.name,
                reference,
                regimes: Some(&r.regimes),
                garch: [Some(&r.garch[0]), Some(&r.garch[1])],
                regression: Some(&r.regression),
            })
        })
        .collect();
    if !observed.is_empty() {
        let comparison: Comparison = reference::compare(&observed);
        for f in &comparison.flagged {
            warn!("reference comparison: {f}");
        }
        sink.json(layout::COMPARISON, &comparison)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!("fit".parse::<Stage>().is_err());
    }

    #[test]
    fn labels_round_trip() {
        for l in [RegimeLabel::Regime(0), RegimeLabel::Regime(1), RegimeLabel::Uncertain] {
            assert_eq!(parse_label(&label_str(l)).unwrap(), l);
        }
        assert!(parse_label("2").is_err());
    }
}
