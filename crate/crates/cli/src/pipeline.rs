//! Stage implementations behind the subcommands. Every stage reads the
//! artifact directory its predecessor wrote, produces its own artifacts
//! deterministically (fixed orderings, full-precision floats, derived
//! seeds), and leaves a `FAILED` sentinel behind when it errors after
//! creating partial output.

use crate::config::RunConfig;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use tvpfx_core::dataio::{
    build_panel, load_panel, read_panel_dir, write_panel_dir, Quarter, SeriesPanel,
};
use tvpfx_core::error::{Error, Result};
use tvpfx_core::evaluation::{
    dm_test_with_bandwidth, evaluate_cell, recursive_u_series, render_summary_block,
    summarize_window, DmOutcome, EvalCell, WindowSummary,
};
use tvpfx_core::forecasting::{
    euro_aggregate, final_origin_chains, model_id, run_harness, ChainDump, ForecastRecord,
    HarnessCell, WindowSpec,
};
use tvpfx_core::fundamentals::{
    build_taylor_regressors, extract_factors, factor_fundamental, simple_fundamental,
    taylor_fundamental_ols, taylor_fundamental_tvp, Estimation, FundamentalKind,
    FundamentalSeries, FundamentalSpec, TaylorRegressors,
};
use tvpfx_core::gibbs::{geweke_diagnostic, parameterize_priors, rne, PriorSpec};
use tvpfx_core::seeding::derive_seed;
use ndarray::Array2;

/// Everything a stage needs, resolved from the config file and flags.
pub struct Ctx {
    pub config: RunConfig,
    pub out: PathBuf,
    pub jobs: usize,
    pub dump_draws: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Fundamentals,
    Forecast,
    Evaluate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Ingest,
        Stage::Fundamentals,
        Stage::Forecast,
        Stage::Evaluate,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Fundamentals => "fundamentals",
            Stage::Forecast => "forecast",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }

    fn rank(self) -> usize {
        Stage::ALL.iter().position(|s| *s == self).unwrap()
    }
}

/// Run one stage with sentinel discipline: refuse if an upstream stage
/// left a `FAILED` marker, clear the marker otherwise, and write a new
/// one if this stage fails.
pub fn run_stage(ctx: &Ctx, stage: Stage) -> Result<()> {
    fs::create_dir_all(&ctx.out)?;
    check_and_clear_sentinel(ctx, stage)?;
    let outcome = match stage {
        Stage::Ingest => ingest(ctx),
        Stage::Fundamentals => fundamentals(ctx),
        Stage::Forecast => forecast(ctx),
        Stage::Evaluate => evaluate(ctx),
        Stage::Report => report(ctx),
    };
    if let Err(e) = &outcome {
        let _ = fs::write(
            ctx.out.join("FAILED"),
            format!("{}: {e}\n", stage.name()),
        );
    }
    outcome
}

fn check_and_clear_sentinel(ctx: &Ctx, stage: Stage) -> Result<()> {
    let path = ctx.out.join("FAILED");
    if !path.exists() {
        return Ok(());
    }
    if stage == Stage::Ingest {
        fs::remove_file(&path)?;
        return Ok(());
    }
    let text = fs::read_to_string(&path)?;
    let failed = text.split(':').next().unwrap_or("").trim();
    let failed_rank = Stage::ALL.iter().find(|s| s.name() == failed).map(|s| s.rank());
    match failed_rank {
        Some(r) if r < stage.rank() => Err(Error::Config(format!(
            "{} is marked FAILED from a previous `{failed}` run; \
             re-run `tvpfx {failed}` (or `tvpfx all`) first",
            ctx.out.display()
        ))),
        Some(_) => {
            fs::remove_file(&path)?;
            Ok(())
        }
        None => Err(Error::Config(format!(
            "{} contains an unrecognized FAILED sentinel; delete it to proceed",
            path.display()
        ))),
    }
}

// ---------------------------------------------------------------- ingest

fn ingest(ctx: &Ctx) -> Result<()> {
    let files = ctx.config.variable_files()?;
    let base = &ctx.config.data.base_country;
    let loaded = load_panel(&files, base)?;
    let euro = ctx.config.euro.as_ref().map(|e| e.conversion());
    let panel = build_panel(
        loaded.axis,
        loaded.countries,
        &loaded.extra_rates,
        base,
        ctx.config.transforms.to_options(),
        euro.as_ref(),
    )?;
    write_panel_dir(&panel, &ctx.out.join("panel"))?;
    Ok(())
}

fn read_panel(ctx: &Ctx) -> Result<SeriesPanel> {
    let dir = ctx.out.join("panel");
    if !dir.is_dir() {
        return Err(Error::Config(format!(
            "no panel at {}; run `tvpfx ingest` first",
            dir.display()
        )));
    }
    read_panel_dir(&dir)
}

// ---------------------------------------------------------- fundamentals

/// Prior from the fixed training block, exactly as the forecasting
/// harness parameterizes it.
fn training_prior(
    panel: &SeriesPanel,
    regs: &TaylorRegressors,
    ctx: &Ctx,
) -> Result<PriorSpec> {
    let sample = &ctx.config.sample;
    let tr_start = panel.axis.index_of(sample.training_start).ok_or_else(|| {
        Error::Config(format!(
            "training start {} is outside the data span",
            sample.training_start
        ))
    })?;
    if sample.training_len < 2 {
        return Err(Error::Config("training_len must be at least 2".to_string()));
    }
    let tr_end = tr_start + sample.training_len - 1;
    if tr_end >= panel.axis.len {
        return Err(Error::Config(format!(
            "training span runs past the data end ({})",
            panel.axis.last()
        )));
    }
    let (y0, x0) = regs.materialize(tr_start, tr_end + 1)?;
    parameterize_priors(x0.view(), y0.view(), ctx.config.gibbs.tau(), 0)
}

/// Full-sample fundamental series for descriptive output. The forecast
/// stage never reads these: it re-estimates from data up to each origin.
fn fundamentals(ctx: &Ctx) -> Result<()> {
    let panel = read_panel(ctx)?;
    let dir = ctx.out.join("fundamentals");
    fs::create_dir_all(&dir)?;
    let currencies = ctx.config.currency_union();
    let mut specs: BTreeMap<String, FundamentalSpec> = BTreeMap::new();
    for (spec, _) in ctx.config.expanded_models()? {
        specs.insert(spec.id(), spec);
    }
    for (id, spec) in specs {
        let mut rows: Vec<(String, FundamentalSeries)> = Vec::new();
        match spec.kind {
            FundamentalKind::Factor(r) => {
                let all = panel.currencies();
                let matrix = spot_matrix(&panel, &all)?;
                let fm = extract_factors(&matrix, r)?;
                for c in &currencies {
                    let idx = all.iter().position(|p| p == c).ok_or_else(|| {
                        Error::Config(format!("unknown currency `{c}`"))
                    })?;
                    let fs = factor_fundamental(&fm, idx, &panel.country(c)?.s)?;
                    rows.push((c.clone(), fs));
                }
            }
            FundamentalKind::Mm | FundamentalKind::Ppp | FundamentalKind::Uirp => {
                for c in &currencies {
                    rows.push((c.clone(), simple_fundamental(spec.kind, &panel, c)?));
                }
            }
            _ => {
                for c in &currencies {
                    let regs =
                        build_taylor_regressors(&panel, c, spec.kind, spec.gap_source)?;
                    let s = &panel.country(c)?.s;
                    let fs = match spec.estimation {
                        Estimation::ConstantOls => taylor_fundamental_ols(&spec, &regs, s)?,
                        Estimation::TvpBayes => {
                            let prior = training_prior(&panel, &regs, ctx)?;
                            let mut config = ctx.config.gibbs.to_config();
                            config.seed =
                                derive_seed(ctx.seed, &["fundamental-stage", &id, c]);
                            taylor_fundamental_tvp(&spec, &regs, s, &prior, &config)?
                        }
                        Estimation::Identity => unreachable!("validated"),
                    };
                    rows.push((c.clone(), fs));
                }
            }
        }
        let mut w = csv::Writer::from_path(dir.join(format!("{id}.csv")))?;
        w.write_record(["quarter", "currency", "omega", "z"])?;
        for (c, fs) in &rows {
            for (t, zv) in fs.z.iter_indexed() {
                let omega = fs.omega.get(t).expect("omega spans z");
                w.write_record([
                    panel.axis.quarter(t).to_string(),
                    c.clone(),
                    fmt(omega),
                    fmt(zv),
                ])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

/// Log exchange rates of the given currencies as full-sample columns.
fn spot_matrix(panel: &SeriesPanel, currencies: &[String]) -> Result<Array2<f64>> {
    let t_len = panel.axis.len;
    let mut m = Array2::zeros((t_len, currencies.len()));
    for (j, c) in currencies.iter().enumerate() {
        let vals = panel.country(c)?.s.require(&panel.axis, c, 0, t_len)?;
        for (i, &v) in vals.iter().enumerate() {
            m[[i, j]] = v;
        }
    }
    Ok(m)
}

// -------------------------------------------------------------- forecast

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct CellKey {
    window: String,
    model: String,
    horizon: usize,
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/h={}", self.window, self.model, self.horizon)
    }
}

struct CellOutput {
    records: Vec<ForecastRecord>,
    chains: Vec<ChainDump>,
}

fn run_cell(ctx: &Ctx, cell: &HarnessCell) -> Result<CellOutput> {
    let mut records = run_harness(cell)?;
    if let Some(e) = &ctx.config.euro {
        let applies = !e.members.is_empty()
            && e.members.iter().all(|m| cell.window.currencies.contains(m));
        if applies {
            let aggregated = euro_aggregate(&records, &e.members)?;
            records.extend(aggregated);
        }
    }
    records.sort_by(|a, b| (&a.currency, a.origin).cmp(&(&b.currency, b.origin)));
    let chains = if ctx.dump_draws {
        final_origin_chains(cell)?
    } else {
        Vec::new()
    };
    Ok(CellOutput { records, chains })
}

fn forecast(ctx: &Ctx) -> Result<()> {
    let panel = read_panel(ctx)?;
    let models = ctx.config.expanded_models()?;
    let windows: Vec<(WindowSpec, tvpfx_core::forecasting::Scheme)> = ctx
        .config
        .windows
        .iter()
        .map(|w| (w.to_spec(), ctx.config.scheme_for(w)))
        .collect();
    let sample = ctx.config.sample;
    let gibbs = ctx.config.gibbs.to_config();
    let tau = ctx.config.gibbs.tau();

    let mut cells: Vec<(CellKey, HarnessCell)> = Vec::new();
    for (w, scheme) in &windows {
        for (fund, approach) in &models {
            let model = model_id(fund, *approach);
            for &h in &ctx.config.run.horizons {
                cells.push((
                    CellKey {
                        window: w.label.clone(),
                        model: model.clone(),
                        horizon: h,
                    },
                    HarnessCell {
                        panel: &panel,
                        fund: *fund,
                        approach: *approach,
                        window: w,
                        horizon: h,
                        scheme: *scheme,
                        sample: &sample,
                        gibbs: gibbs.clone(),
                        tau,
                        master_seed: ctx.seed,
                    },
                ));
            }
        }
    }
    cells.sort_by(|a, b| a.0.cmp(&b.0));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let results: Vec<Result<CellOutput>> =
        pool.install(|| cells.par_iter().map(|(_, cell)| run_cell(ctx, cell)).collect());

    let dir = ctx.out.join("forecasts");
    fs::create_dir_all(&dir)?;
    let mut w = csv::Writer::from_path(dir.join("records.csv"))?;
    w.write_record([
        "window",
        "model",
        "horizon",
        "currency",
        "origin",
        "predicted",
        "realized",
    ])?;
    let mut first_err: Option<(CellKey, Error)> = None;
    let mut all_chains: Vec<(CellKey, Vec<ChainDump>)> = Vec::new();
    for ((key, _), result) in cells.iter().zip(results) {
        match result {
            Ok(output) => {
                for r in &output.records {
                    w.write_record([
                        key.window.clone(),
                        r.model.clone(),
                        r.horizon.to_string(),
                        r.currency.clone(),
                        r.origin.to_string(),
                        fmt(r.predicted),
                        fmt(r.realized),
                    ])?;
                }
                if !output.chains.is_empty() {
                    all_chains.push((key.clone(), output.chains));
                }
            }
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some((key.clone(), e));
                }
            }
        }
    }
    w.flush()?;
    if ctx.dump_draws {
        write_diagnostics(ctx, &all_chains)?;
    }
    if let Some((key, e)) = first_err {
        // The error keeps its own class for the exit code; name the
        // cell separately so the operator knows where to look.
        eprintln!("tvpfx: forecast: cell {key} failed");
        return Err(e);
    }
    Ok(())
}

// ------------------------------------------------------------ diagnostics

/// Convergence summaries plus raw retained draws for each cell's final
/// forecast origin.
fn write_diagnostics(ctx: &Ctx, chains: &[(CellKey, Vec<ChainDump>)]) -> Result<()> {
    let dir = ctx.out.join("diagnostics");
    let draws_dir = dir.join("draws");
    fs::create_dir_all(&draws_dir)?;
    let mut w = csv::Writer::from_path(dir.join("chains.csv"))?;
    w.write_record([
        "window", "model", "horizon", "role", "currency", "origin", "param", "geweke_z",
        "rne",
    ])?;
    for (key, dumps) in chains {
        for dump in dumps {
            let k = dump.draws.q_draws.first().map_or(0, |m| m.nrows());
            let mut params: Vec<(String, Vec<f64>)> =
                vec![("r".to_string(), dump.draws.r_draws.clone())];
            for i in 0..k {
                params.push((
                    format!("q{i}"),
                    dump.draws.q_draws.iter().map(|m| m[[i, i]]).collect(),
                ));
            }
            for (name, chain) in &params {
                let z = geweke_diagnostic(chain).map(fmt).unwrap_or_default();
                let efficiency = rne(chain).map(fmt).unwrap_or_default();
                w.write_record([
                    key.window.clone(),
                    key.model.clone(),
                    key.horizon.to_string(),
                    dump.role.to_string(),
                    dump.currency.clone(),
                    dump.origin.to_string(),
                    name.clone(),
                    z,
                    efficiency,
                ])?;
            }
            let file = draws_dir.join(format!(
                "{}__{}__h{}__{}__{}.csv",
                key.window, key.model, key.horizon, dump.role, dump.currency
            ));
            let mut dw = csv::Writer::from_path(file)?;
            let mut header = vec!["iter".to_string(), "r".to_string()];
            header.extend((0..k).map(|i| format!("q{i}")));
            dw.write_record(&header)?;
            for (it, &r) in dump.draws.r_draws.iter().enumerate() {
                let mut row = vec![it.to_string(), fmt(r)];
                for i in 0..k {
                    row.push(fmt(dump.draws.q_draws[it][[i, i]]));
                }
                dw.write_record(&row)?;
            }
            dw.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

// -------------------------------------------------------------- evaluate

fn read_records(path: &Path) -> Result<Vec<(String, ForecastRecord)>> {
    if !path.is_file() {
        return Err(Error::Config(format!(
            "no forecast records at {}; run `tvpfx forecast` first",
            path.display()
        )));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let file = path.display().to_string();
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let field = |j: usize| -> Result<&str> {
            row.get(j).ok_or_else(|| Error::Parse {
                file: file.clone(),
                row: i + 2,
                message: format!("missing column {j}"),
            })
        };
        let parse_f64 = |j: usize| -> Result<f64> {
            field(j)?.parse().map_err(|e| Error::Parse {
                file: file.clone(),
                row: i + 2,
                message: format!("bad number: {e}"),
            })
        };
        let origin: Quarter = field(4)?.parse()?;
        let horizon: usize = field(2)?.parse().map_err(|e| Error::Parse {
            file: file.clone(),
            row: i + 2,
            message: format!("bad horizon: {e}"),
        })?;
        out.push((
            field(0)?.to_string(),
            ForecastRecord {
                currency: field(3)?.to_string(),
                origin,
                horizon,
                model: field(1)?.to_string(),
                predicted: parse_f64(5)?,
                realized: parse_f64(6)?,
            },
        ));
    }
    Ok(out)
}

fn evaluate(ctx: &Ctx) -> Result<()> {
    let rows = read_records(&ctx.out.join("forecasts").join("records.csv"))?;
    let mut groups: BTreeMap<(String, String, usize, String), Vec<ForecastRecord>> =
        BTreeMap::new();
    for (window, r) in rows {
        groups
            .entry((window, r.model.clone(), r.horizon, r.currency.clone()))
            .or_default()
            .push(r);
    }
    let dir = ctx.out.join("eval");
    fs::create_dir_all(&dir)?;
    let mut cells: Vec<EvalCell> = Vec::new();
    let mut ru = csv::Writer::from_path(dir.join("recursive_u.csv"))?;
    ru.write_record(["window", "model", "horizon", "currency", "origin", "u"])?;
    for ((window, _, _, _), records) in &mut groups {
        records.sort_by_key(|r| r.origin);
        let mut cell = evaluate_cell(window, records)?;
        if let Some(b) = ctx.config.run.dm_bandwidth {
            cell.dm = dm_test_with_bandwidth(records, b);
        }
        let path = recursive_u_series(records)?;
        for (r, u) in records.iter().zip(path) {
            ru.write_record([
                window.clone(),
                r.model.clone(),
                r.horizon.to_string(),
                r.currency.clone(),
                r.origin.to_string(),
                fmt(u),
            ])?;
        }
        cells.push(cell);
    }
    ru.flush()?;

    cells.sort_by(|a, b| {
        (&a.window, &a.model, a.horizon, &a.currency)
            .cmp(&(&b.window, &b.model, b.horizon, &b.currency))
    });
    let mut cw = csv::Writer::from_path(dir.join("cells.csv"))?;
    cw.write_record([
        "window",
        "model",
        "horizon",
        "currency",
        "n_forecasts",
        "theil_u",
        "dm_status",
        "dm",
    ])?;
    for c in &cells {
        let (status, value) = match c.dm {
            DmOutcome::Statistic(v) => ("statistic", fmt(v)),
            DmOutcome::Degenerate => ("degenerate", String::new()),
            DmOutcome::Insufficient => ("insufficient", String::new()),
        };
        cw.write_record([
            c.window.clone(),
            c.model.clone(),
            c.horizon.to_string(),
            c.currency.clone(),
            c.n_forecasts.to_string(),
            fmt(c.u),
            status.to_string(),
            value,
        ])?;
    }
    cw.flush()?;

    let threshold = ctx.config.dm_threshold();
    let mut blocks: BTreeMap<(String, String, usize), Vec<EvalCell>> = BTreeMap::new();
    for c in &cells {
        blocks
            .entry((c.window.clone(), c.model.clone(), c.horizon))
            .or_default()
            .push(c.clone());
    }
    let mut sw = csv::Writer::from_path(dir.join("summary.csv"))?;
    sw.write_record([
        "window",
        "model",
        "horizon",
        "n_u_lt_1",
        "n_dm_gt_threshold",
        "median_u",
        "threshold",
    ])?;
    for ((window, model, horizon), block) in &blocks {
        let s = summarize_window(block, threshold)?;
        sw.write_record([
            window.clone(),
            model.clone(),
            horizon.to_string(),
            s.n_u_lt_1.to_string(),
            s.n_dm_gt_threshold.to_string(),
            fmt(s.median_u),
            fmt(s.threshold),
        ])?;
    }
    sw.flush()?;
    Ok(())
}

// ---------------------------------------------------------------- report

fn report(ctx: &Ctx) -> Result<()> {
    let path = ctx.out.join("eval").join("summary.csv");
    if !path.is_file() {
        return Err(Error::Config(format!(
            "no evaluation summary at {}; run `tvpfx evaluate` first",
            path.display()
        )));
    }
    let mut reader = csv::Reader::from_path(&path)?;
    let file = path.display().to_string();
    let mut groups: BTreeMap<(String, String), Vec<(usize, WindowSummary)>> = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let get = |j: usize| -> Result<&str> {
            row.get(j).ok_or_else(|| Error::Parse {
                file: file.clone(),
                row: i + 2,
                message: format!("missing column {j}"),
            })
        };
        let parse_err = |e: String| Error::Parse {
            file: file.clone(),
            row: i + 2,
            message: e,
        };
        let horizon: usize = get(2)?.parse().map_err(|e| parse_err(format!("{e}")))?;
        let summary = WindowSummary {
            n_u_lt_1: get(3)?.parse().map_err(|e| parse_err(format!("{e}")))?,
            n_dm_gt_threshold: get(4)?.parse().map_err(|e| parse_err(format!("{e}")))?,
            median_u: get(5)?.parse().map_err(|e| parse_err(format!("{e}")))?,
            threshold: get(6)?.parse().map_err(|e| parse_err(format!("{e}")))?,
        };
        groups
            .entry((get(0)?.to_string(), get(1)?.to_string()))
            .or_default()
            .push((horizon, summary));
    }
    let mut text = String::new();
    for ((window, model), mut entries) in groups {
        entries.sort_by_key(|(h, _)| *h);
        text.push_str(&render_summary_block(
            &format!("[{window}] {model}"),
            &entries,
        ));
        text.push('\n');
    }
    fs::write(ctx.out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

/// Shortest round-trip decimal form: identical bytes for identical
/// floats, full precision preserved.
fn fmt(v: f64) -> String {
    format!("{v}")
}
