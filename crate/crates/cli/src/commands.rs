//! Subcommand implementations. Each returns an [`Output`] rendered by the
//! binary; nothing here touches the process exit code.

use std::collections::BTreeSet;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use serde::Serialize;
use tipcast_core::basin::{
    self, amplification, classify_timing, tip_forecast, BasinPair, ConversationState, LayerPoint, TipForecast,
};
use tipcast_core::cohesion::{self, CohesionReport, DEFAULT_SWEEP, DEFAULT_THRESHOLD};
use tipcast_core::corpus::{self, Correlation, Role};
use tipcast_core::regime::{
    self, iterate_map, symbolize_numeric, symbolize_text, temperature_cascade, Diagnostics, MapParams,
    SymbolicTrajectory, Thresholds, DEFAULT_TEXT_THRESHOLD,
};
use tipcast_core::service::{self, SessionStore, TraceEntry, DEFAULT_WARN_THRESHOLD};
use tipcast_core::toy::{run_seeds, CaseTwoFixture, Preset, SweepStats};
use tipcast_core::{hsf, vector, Label, LabeledStateSet};

use crate::args::*;
use crate::config::FileConfig;

/// Bad combination of otherwise well-formed flags; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub enum Output {
    Text(String),
    /// The server ran until shutdown.
    None,
}

const DEFAULT_SEEDS: &str = "0..49";
const DEFAULT_BINS: usize = 4;
const DEFAULT_HOST: &str = "127.0.0.1";
const DEFAULT_PORT: u16 = 8080;

pub fn run(cli: Cli) -> anyhow::Result<Output> {
    let cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let format = cli.format.or(cfg.format).unwrap_or(Format::Json);
    let ctx = Ctx { cfg, format };
    match cli.command {
        Command::Basin(BasinCmd::Centroid { input, label }) => ctx.centroid(&input, label.as_deref()),
        Command::Forecast(ForecastCmd::Tip { input, basins }) => ctx.tip(&input, basins.as_deref()),
        Command::Forecast(ForecastCmd::Timing { input, basins }) => ctx.timing(&input, basins.as_deref()),
        Command::Forecast(ForecastCmd::Replay {
            basins,
            conversation,
            warn_threshold_n,
        }) => ctx.replay(&basins, &conversation, warn_threshold_n),
        Command::Layers(LayersCmd::Scan { hsf, early }) => ctx.scan(&hsf, early),
        Command::Cohesion(a) => ctx.cohesion(a),
        Command::ToySim(a) => ctx.toy_sim(a),
        Command::Map(MapCmd::Sim {
            lambda,
            rho,
            sigma,
            steps,
            seed,
            x0,
            bins,
        }) => ctx.map_sim(
            MapParams {
                lambda,
                rho,
                noise_sigma: sigma,
                x0,
                steps,
                seed,
            },
            bins.or(ctx.cfg.map.bins),
        ),
        Command::Regimes(RegimesCmd::Classify(a)) => ctx.classify(a),
        Command::Regimes(RegimesCmd::Cascade {
            dir,
            similarity_threshold,
        }) => ctx.cascade(&dir, similarity_threshold),
        Command::Corpus(CorpusCmd::Regress { input, correlation }) => ctx.regress(&input, correlation),
        Command::Corpus(CorpusCmd::Null {
            input,
            shuffles,
            seed,
            role,
        }) => ctx.null(&input, shuffles, seed, &role),
        Command::Serve(a) => ctx.serve(a),
    }
}

struct Ctx {
    cfg: FileConfig,
    format: Format,
}

fn load_hsf(path: &Path) -> anyhow::Result<LabeledStateSet> {
    hsf::load(path).with_context(|| format!("{}", path.display()))
}

fn layer_of(set: &LabeledStateSet, layer: Option<usize>) -> anyhow::Result<usize> {
    let layer = layer.unwrap_or_else(|| set.penultimate_layer());
    set.check_layer(layer)?;
    Ok(layer)
}

fn json(value: &impl Serialize) -> anyhow::Result<Output> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(Output::Text(s))
}

fn csv_text(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<Output> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(Output::Text(String::from_utf8(w.into_inner()?)?))
}

fn headers(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Empty for `None` and non-finite values.
fn num(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => v.to_string(),
        _ => String::new(),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn case_str(f: &TipForecast) -> String {
    format!("{:?}", f.case)
}

#[derive(Serialize)]
struct CentroidOut {
    file: PathBuf,
    layer: usize,
    label: Label,
    phrases: usize,
    centroid: Vec<f64>,
}

#[derive(Serialize)]
struct ForecastOut {
    layer: usize,
    #[serde(flatten)]
    forecast: TipForecast,
}

#[derive(Serialize)]
struct ScanOut {
    points: Vec<LayerPoint>,
    early_window: [usize; 2],
    /// `null` when the window does not fit or the early mean is zero.
    amplification: Option<f64>,
}

#[derive(Serialize)]
struct ReplayOut {
    warn_threshold_n: u64,
    onset: Option<usize>,
    trace: Vec<TraceEntry>,
}

#[derive(Serialize)]
struct ClassifyOut {
    regime: String,
    letters: String,
    diagnostics: Option<Diagnostics>,
    symbols: Vec<u32>,
    flagged: Vec<usize>,
}

impl From<SymbolicTrajectory> for ClassifyOut {
    fn from(t: SymbolicTrajectory) -> Self {
        Self {
            regime: t.regime.map(|r| r.to_string()).unwrap_or_default(),
            letters: t.letters(),
            diagnostics: t.diagnostics,
            symbols: t.symbols,
            flagged: t.flagged,
        }
    }
}

#[derive(Serialize)]
struct MapOut {
    params: MapParams,
    series: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<ClassifyOut>,
}

fn label_centroid(set: &LabeledStateSet, label: Label, layer: usize) -> anyhow::Result<(usize, Vec<f64>)> {
    let means: Vec<Vec<f64>> = set.groups_with(label).map(|g| g.mean_at(layer)).collect();
    if means.is_empty() {
        return Err(tipcast_core::Error::MissingLabel(label).into());
    }
    Ok((means.len(), vector::mean(&means)?))
}

fn basins_for(set: &LabeledStateSet, basins_file: Option<&Path>, layer: usize) -> anyhow::Result<BasinPair> {
    match basins_file {
        Some(path) => {
            let b = load_hsf(path)?;
            BasinPair::from_set(&b, layer).with_context(|| format!("{}", path.display()))
        }
        None => Ok(BasinPair::from_set(set, layer)?),
    }
}

impl Ctx {
    fn centroid(&self, input: &LayerArgs, label: Option<&str>) -> anyhow::Result<Output> {
        let set = load_hsf(&input.hsf)?;
        let layer = layer_of(&set, input.layer)?;
        let labels = match label {
            Some(s) => vec![s.parse::<Label>().map_err(|e| usage(e.to_string()))?],
            None => vec![Label::B, Label::D],
        };
        let out = labels
            .into_iter()
            .map(|label| {
                let (phrases, centroid) =
                    label_centroid(&set, label, layer).with_context(|| format!("{}", input.hsf.display()))?;
                Ok(CentroidOut {
                    file: input.hsf.clone(),
                    layer,
                    label,
                    phrases,
                    centroid,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        match self.format {
            Format::Json => json(&out),
            Format::Csv => csv_text(
                &headers(&["label", "layer", "phrases", "index", "value"]),
                out.iter().flat_map(|c| {
                    c.centroid.iter().enumerate().map(move |(i, v)| {
                        vec![
                            c.label.to_string(),
                            c.layer.to_string(),
                            c.phrases.to_string(),
                            i.to_string(),
                            v.to_string(),
                        ]
                    })
                }),
            ),
        }
    }

    fn forecast_out(&self, layer: usize, forecast: TipForecast) -> anyhow::Result<Output> {
        match self.format {
            Format::Json => json(&ForecastOut { layer, forecast }),
            Format::Csv => csv_text(
                &headers(&["layer", "x", "b_drive", "case", "n_star", "n_star_ceil", "saturated"]),
                [vec![
                    layer.to_string(),
                    forecast.x.to_string(),
                    forecast.b_drive.to_string(),
                    case_str(&forecast),
                    num(Some(forecast.n_star)),
                    opt(forecast.n_star_ceil),
                    forecast.saturated.to_string(),
                ]],
            ),
        }
    }

    fn tip(&self, input: &LayerArgs, basins_file: Option<&Path>) -> anyhow::Result<Output> {
        let set = load_hsf(&input.hsf)?;
        let layer = layer_of(&set, input.layer)?;
        let basins = basins_for(&set, basins_file, layer)?;
        let conv = ConversationState::from_set(&set, layer).with_context(|| format!("{}", input.hsf.display()))?;
        let f = tip_forecast(&conv.c, &basins.b, &basins.d)?;
        self.forecast_out(layer, f)
    }

    fn timing(&self, input: &LayerArgs, basins_file: Option<&Path>) -> anyhow::Result<Output> {
        let set = load_hsf(&input.hsf)?;
        let layer = layer_of(&set, input.layer)?;
        let basins = basins_for(&set, basins_file, layer)?;
        let a1 = set
            .groups_with(Label::A)
            .last()
            .ok_or(tipcast_core::Error::MissingLabel(Label::A))
            .with_context(|| format!("{}", input.hsf.display()))?;
        let tokens: Vec<Vec<f64>> = a1.layer(layer).map(vector::to_f64).collect();
        let state = ConversationState::from_tokens(layer, &tokens)?;
        self.forecast_out(layer, classify_timing(&state, &basins)?)
    }

    fn replay(&self, basins: &Path, conversation: &Path, warn: Option<u64>) -> anyhow::Result<Output> {
        let warn = warn
            .or(self.cfg.forecast.warn_threshold_n)
            .unwrap_or(DEFAULT_WARN_THRESHOLD);
        let pair = service::load_basins(basins).with_context(|| format!("{}", basins.display()))?;
        let conv = load_hsf(conversation)?;
        let trace = service::replay(&conv, &pair, warn).with_context(|| format!("{}", conversation.display()))?;
        match self.format {
            Format::Json => json(&ReplayOut {
                warn_threshold_n: warn,
                onset: service::warning_onset(&trace),
                trace,
            }),
            Format::Csv => csv_text(
                &headers(&["turn_index", "x", "case", "n_star_ceil", "warning"]),
                trace.iter().map(|e| {
                    vec![
                        e.turn_index.to_string(),
                        e.x.to_string(),
                        format!("{:?}", e.case),
                        opt(e.n_star_ceil),
                        e.warning.to_string(),
                    ]
                }),
            ),
        }
    }

    fn scan(&self, path: &Path, early: std::ops::RangeInclusive<u64>) -> anyhow::Result<Output> {
        let set = load_hsf(path)?;
        let points = basin::layer_scan(&set).with_context(|| format!("{}", path.display()))?;
        let window = (*early.start() as usize)..=(*early.end() as usize);
        match self.format {
            Format::Json => {
                let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
                json(&ScanOut {
                    early_window: [*window.start(), *window.end()],
                    amplification: amplification(&xs, window).ok().filter(|a| a.is_finite()),
                    points,
                })
            }
            Format::Csv => csv_text(
                &headers(&["layer", "x", "b_drive", "axis_norm"]),
                points.iter().map(|p| {
                    vec![
                        p.layer.to_string(),
                        p.x.to_string(),
                        p.b_drive.to_string(),
                        p.axis_norm.to_string(),
                    ]
                }),
            ),
        }
    }

    fn cohesion(&self, a: CohesionArgs) -> anyhow::Result<Output> {
        let set = load_hsf(&a.hsf)?;
        let sweep = a.sweep.or_else(|| self.cfg.cohesion.sweep.clone());
        let reports: Vec<CohesionReport> = match sweep {
            Some(list) => {
                let list = if list.is_empty() { DEFAULT_SWEEP.to_vec() } else { list };
                cohesion::threshold_sweep(&set, &list)
                    .with_context(|| format!("{}", a.hsf.display()))?
                    .into_iter()
                    .flatten()
                    .collect()
            }
            None => {
                let t = a.threshold.or(self.cfg.cohesion.threshold).unwrap_or(DEFAULT_THRESHOLD);
                cohesion::cohesion_curve(&set, t).with_context(|| format!("{}", a.hsf.display()))?
            }
        };
        match self.format {
            Format::Json => json(&reports),
            Format::Csv => {
                let species: BTreeSet<Label> = reports
                    .iter()
                    .flat_map(|r| r.species_fractions.keys().copied())
                    .collect();
                let mut header = headers(&["layer", "threshold", "g"]);
                header.extend(species.iter().map(|l| format!("fraction_{l}")));
                csv_text(
                    &header,
                    reports.iter().map(|r| {
                        let mut row = vec![r.layer.to_string(), r.threshold.to_string(), r.g.to_string()];
                        row.extend(species.iter().map(|l| num(r.species_fractions.get(l).copied())));
                        row
                    }),
                )
            }
        }
    }

    fn toy_sim(&self, a: ToySimArgs) -> anyhow::Result<Output> {
        let preset: Preset = a
            .preset
            .or_else(|| self.cfg.toy.preset.clone())
            .unwrap_or_else(|| "full".into())
            .parse()
            .map_err(|e: tipcast_core::Error| usage(e.to_string()))?;
        let seeds = a
            .seeds
            .or_else(|| self.cfg.toy.seeds.clone())
            .unwrap_or_else(|| DEFAULT_SEEDS.into());
        let seeds = parse_inclusive(&seeds).map_err(usage)?;
        let fixture = match &a.fixture {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
                let f: CaseTwoFixture =
                    serde_json::from_str(&text).with_context(|| format!("{}: not a fixture", path.display()))?;
                f.verify().with_context(|| format!("{}", path.display()))?;
                f
            }
            None => CaseTwoFixture::shipped(),
        };
        let mut config = preset.config(*seeds.start());
        if a.zero_noise {
            config = config.zero_noise();
        }
        let end = seeds
            .end()
            .checked_add(1)
            .ok_or_else(|| usage("seed range too large"))?;
        let runs = run_seeds(&config, &fixture.a, &fixture.b, &fixture.d, *seeds.start()..end)?;
        let stats = SweepStats::from_runs(config, runs);
        match self.format {
            Format::Json => json(&stats),
            Format::Csv => csv_text(
                &headers(&["seed", "tip_step", "labels"]),
                stats.runs.iter().map(|r| {
                    vec![
                        r.seed.to_string(),
                        opt(r.tip_step),
                        r.labels.iter().map(|l| l.as_str()).collect::<String>(),
                    ]
                }),
            ),
        }
    }

    fn thresholds(&self) -> Thresholds {
        self.cfg.regimes.thresholds.clone().unwrap_or_default()
    }

    fn map_sim(&self, params: MapParams, bins: Option<usize>) -> anyhow::Result<Output> {
        let series = iterate_map(&params)?;
        let classification = match bins {
            Some(bins) => Some(symbolize_numeric(&series, bins)?.classified(&self.thresholds())?),
            None => None,
        };
        match self.format {
            Format::Json => json(&MapOut {
                params,
                series,
                classification: classification.map(ClassifyOut::from),
            }),
            Format::Csv => {
                let mut header = headers(&["step", "x"]);
                if classification.is_some() {
                    header.push("symbol".into());
                }
                csv_text(
                    &header,
                    series.iter().enumerate().map(|(i, x)| {
                        let mut row = vec![i.to_string(), x.to_string()];
                        if let Some(t) = &classification {
                            row.push(t.symbols[i].to_string());
                        }
                        row
                    }),
                )
            }
        }
    }

    fn text_threshold(&self, flag: Option<f64>) -> f64 {
        flag.or(self.cfg.regimes.similarity_threshold)
            .unwrap_or(DEFAULT_TEXT_THRESHOLD)
    }

    fn classify(&self, a: ClassifyArgs) -> anyhow::Result<Output> {
        let traj = if let Some(path) = &a.sentences {
            let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
            let sentences = if a.split {
                regime::split_sentences(&text)
            } else {
                lines(&text)
            };
            symbolize_text(&sentences, self.text_threshold(a.similarity_threshold))
                .with_context(|| format!("{}", path.display()))?
        } else if let Some(path) = &a.series {
            let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
            let xs = parse_series(&text).with_context(|| format!("{}", path.display()))?;
            let bins = a.bins.or(self.cfg.regimes.bins).unwrap_or(DEFAULT_BINS);
            symbolize_numeric(&xs, bins)?
        } else {
            return Err(usage("one of --sentences or --series is required"));
        };
        let source = a.sentences.as_ref().or(a.series.as_ref()).expect("checked above");
        let traj = traj
            .classified(&self.thresholds())
            .with_context(|| format!("{}", source.display()))?;
        let out = ClassifyOut::from(traj);
        match self.format {
            Format::Json => json(&out),
            Format::Csv => csv_text(
                &headers(&["index", "symbol", "flagged"]),
                out.symbols
                    .iter()
                    .enumerate()
                    .map(|(i, s)| vec![i.to_string(), s.to_string(), out.flagged.contains(&i).to_string()]),
            ),
        }
    }

    fn cascade(&self, dir: &Path, threshold: Option<f64>) -> anyhow::Result<Output> {
        let threshold = self.text_threshold(threshold);
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("{}", dir.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .with_context(|| format!("{}", dir.display()))?;
        files.retain(|p| p.extension().is_some_and(|e| e == "txt"));
        files.sort();
        if files.is_empty() {
            bail!("{}: no .txt transcripts", dir.display());
        }
        let runs = files
            .iter()
            .map(|path| {
                let t = temperature_of(path)?;
                let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
                let traj = symbolize_text(&lines(&text), threshold).with_context(|| format!("{}", path.display()))?;
                Ok((t, traj))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let cascade = temperature_cascade(&runs, &self.thresholds())?;
        match self.format {
            Format::Json => json(&cascade),
            Format::Csv => csv_text(
                &headers(&[
                    "temperature",
                    "regime",
                    "period",
                    "entropy",
                    "determinism",
                    "max_run_fraction",
                    "switch_rate",
                    "dominant_symbol_share",
                ]),
                cascade.rows.iter().map(|r| {
                    let d = &r.diagnostics;
                    vec![
                        r.temperature.to_string(),
                        r.regime.to_string(),
                        opt(d.period),
                        d.entropy.to_string(),
                        d.determinism.to_string(),
                        d.max_run_fraction.to_string(),
                        d.switch_rate.to_string(),
                        d.dominant_symbol_share.to_string(),
                    ]
                }),
            ),
        }
    }

    fn regress(&self, input: &Path, correlation: Option<String>) -> anyhow::Result<Output> {
        let correlation: Correlation = correlation
            .or_else(|| self.cfg.corpus.correlation.clone())
            .unwrap_or_else(|| "exchangeable".into())
            .parse()
            .map_err(|e: tipcast_core::Error| usage(e.to_string()))?;
        let turns = read_turns(input)?;
        let rows = corpus::build_design(&turns).with_context(|| format!("{}", input.display()))?;
        let fit = corpus::fit_clustered_logistic(&rows, correlation)?;
        match self.format {
            Format::Json => json(&fit),
            Format::Csv => csv_text(
                &headers(&["name", "estimate", "se", "odds_ratio", "ci_low", "ci_high", "z", "p"]),
                fit.coefficients.iter().map(|c| {
                    [c.estimate, c.se, c.odds_ratio, c.ci_low, c.ci_high, c.z, c.p]
                        .iter()
                        .fold(vec![c.name.clone()], |mut row, v| {
                            row.push(v.to_string());
                            row
                        })
                }),
            ),
        }
    }

    fn null(&self, input: &Path, shuffles: Option<usize>, seed: Option<u64>, role: &str) -> anyhow::Result<Output> {
        let role: Role = role.parse().map_err(|e: tipcast_core::Error| usage(e.to_string()))?;
        let shuffles = shuffles.or(self.cfg.corpus.shuffles).unwrap_or(100);
        let seed = seed
            .or(self.cfg.corpus.seed)
            .ok_or_else(|| usage("--seed is required (or `seed` under [corpus] in the config)"))?;
        let turns = read_turns(input)?;
        let report =
            corpus::shuffled_null(&turns, role, shuffles, seed).with_context(|| format!("{}", input.display()))?;
        match self.format {
            Format::Json => json(&report),
            Format::Csv => csv_text(
                &headers(&["observed", "null_mean", "null_std", "z", "mc_p", "shuffles"]),
                [vec![
                    report.observed.to_string(),
                    report.null_mean.to_string(),
                    report.null_std.to_string(),
                    report.z.to_string(),
                    report.mc_p.to_string(),
                    report.shuffles.to_string(),
                ]],
            ),
        }
    }

    fn serve(&self, a: ServeArgs) -> anyhow::Result<Output> {
        if self.format == Format::Csv {
            return Err(usage("serve speaks JSON only; --format csv does not apply"));
        }
        let host = a
            .host
            .or_else(|| self.cfg.serve.host.clone())
            .unwrap_or_else(|| DEFAULT_HOST.into());
        let port = a.port.or(self.cfg.serve.port).unwrap_or(DEFAULT_PORT);
        let store = match a.state_dir.or_else(|| self.cfg.serve.state_dir.clone()) {
            Some(dir) => SessionStore::open(&dir).with_context(|| format!("{}", dir.display()))?,
            None => SessionStore::in_memory(),
        };
        let runtime = tokio::runtime::Runtime::new()?;
        runtime.block_on(crate::http::serve(Arc::new(store), &host, port))?;
        Ok(Output::None)
    }
}

fn read_turns(path: &Path) -> anyhow::Result<Vec<corpus::TurnRecord>> {
    let file = fs::File::open(path).with_context(|| format!("{}", path.display()))?;
    corpus::read_jsonl(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

/// Non-blank lines, trimmed.
fn lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

fn parse_series(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("not a number: {t:?}")))
        .collect()
}

/// The number embedded in a transcript's file stem, e.g. `t0.7` or `temp_1.0`.
fn temperature_of(path: &Path) -> anyhow::Result<f64> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    let start = stem.find(|c: char| c.is_ascii_digit());
    let end = stem.rfind(|c: char| c.is_ascii_digit());
    let t = match (start, end) {
        (Some(s), Some(e)) => stem[s..=e].parse::<f64>().ok(),
        _ => None,
    };
    t.ok_or_else(|| anyhow::anyhow!("{}: no temperature in the file name", path.display()))
}
