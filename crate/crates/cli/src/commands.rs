//! One function per subcommand. Each returns the JSON report and a flat
//! table for `--output-format csv`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mpgfrft::compression::{
    block_compress_image, compress_adapted, compress_spectral, grid_search_orders, BlockMethod, CompressionReport,
    ImageCompressionReport,
};
use mpgfrft::crypto::analysis::{delta_range, Correlation, Direction};
use mpgfrft::crypto::{
    adjacent_correlation, decrypt_image, encrypt_image, magnitude_image, read_ciphertext, sensitivity_sweep,
    write_ciphertext, CipherKey,
};
use mpgfrft::denoise::{
    add_gaussian_noise, block_denoise_image, make_bandlimited_signal, make_structured_noise, snr_db, DenoiseConfig,
    NoiseSpec, QualityReport,
};
use mpgfrft::graph::{shift_operator, GraphDescriptor, ShiftKind};
use mpgfrft::imaging::ByteImage;
use mpgfrft::io::{self, SignalTable};
use mpgfrft::learn::{
    train_compression_orders, train_order_and_filter, train_transform_layers, FilterMode, LearnResult, OrderTying,
    TrainConfig,
};
use mpgfrft::linalg::{random_signal, CVec};
use mpgfrft::selfcheck::{run_selftest, CheckOutcome};
use mpgfrft::spectral::{gft_basis, multipliers, OrderVector, SpectralBasis, DISTINCTNESS_TOL};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Command;
use crate::config::{
    CompressMethod, CompressParams, ConfigFile, CorrelationParams, DecryptParams, DenoiseParams, EncryptParams,
    FilterChoice, Globals, KeygenParams, LearnOrdersParams, LearnTransformParams, Objective, OutputFormat,
    SensitivityParams, Tying,
};
use crate::error::{CliError, CliResult};

/// What a command produced besides its files.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub report: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Plain text used when no output format was requested.
    pub lines: Vec<String>,
    pub ok: bool,
}

impl Output {
    fn new(report: Value, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Output { report, header, rows, lines: Vec::new(), ok: true }
    }

    pub fn render(&self, format: Option<OutputFormat>) -> String {
        match format {
            Some(OutputFormat::Csv) => {
                let mut s = self.header.join(",");
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&r.join(","));
                    s.push('\n');
                }
                s
            }
            None if !self.lines.is_empty() => self.lines.join("\n") + "\n",
            _ => serde_json::to_string_pretty(&self.report).expect("report serializes") + "\n",
        }
    }
}

pub fn dispatch(command: &Command, file: &ConfigFile, g: &Globals) -> CliResult<Output> {
    let name = command.name();
    match command {
        Command::Compress(a) => compress(file.resolve(name, a)?, g),
        Command::Denoise(a) => denoise(file.resolve(name, a)?, g),
        Command::Keygen(a) => keygen(file.resolve(name, a)?, g),
        Command::Encrypt(a) => encrypt(file.resolve(name, a)?, g),
        Command::Decrypt(a) => decrypt(file.resolve(name, a)?, g),
        Command::LearnTransform(a) => learn_transform(file.resolve(name, a)?, g),
        Command::LearnOrders(a) => learn_orders(file.resolve(name, a)?, g),
        Command::AnalyzeCorrelation(a) => analyze_correlation(file.resolve(name, a)?, g),
        Command::Sensitivity(a) => sensitivity(file.resolve(name, a)?, g),
        Command::Selftest => selftest(g),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

/// `{command, seed, config, ...body}`.
fn envelope<P: Serialize>(command: &str, g: &Globals, params: &P, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), command.into());
    m.insert("seed".into(), g.seed.into());
    m.insert("config".into(), to_value(params));
    if let Value::Object(b) = body {
        m.extend(b);
    }
    Value::Object(m)
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    p.as_deref().ok_or_else(|| CliError::Config(format!("--{flag} is required")))
}

/// A required input that must already exist.
fn existing<'a>(p: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    let path = required(p, flag)?;
    if !path.exists() {
        return Err(CliError::Config(format!("--{flag} {} does not exist", path.display())));
    }
    Ok(path)
}

fn has_ext(path: &Path, ext: &str) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn write_report(path: &Option<PathBuf>, report: &Value) -> CliResult<()> {
    if let Some(p) = path {
        io::write_json(report, p)?;
    }
    Ok(())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(mpgfrft::Error::from)?))
}

fn load_key(path: &Path) -> CliResult<CipherKey> {
    let text = std::fs::read_to_string(path).map_err(mpgfrft::Error::from)?;
    Ok(CipherKey::from_json(&text)?)
}

fn graph_basis(
    graph: &Option<PathBuf>,
    nodes: usize,
    kind: &str,
    shift: ShiftKind,
    seed: u64,
) -> CliResult<Arc<SpectralBasis>> {
    let g = match graph {
        Some(p) => io::load_graph(p)?,
        None => GraphDescriptor { n: nodes, kind: kind.into(), seed: Some(seed), k: None, weight_scheme: None }
            .build()?,
    };
    Ok(Arc::new(gft_basis(&shift_operator(&g, shift), DISTINCTNESS_TOL)?))
}

fn load_column(path: &Path, column: usize, n: usize) -> CliResult<CVec> {
    let x = io::load_signal_csv(path)?.column(column)?;
    if x.len() != n {
        return Err(CliError::Config(format!("signal has {} entries, graph has {n} nodes", x.len())));
    }
    Ok(x)
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn progress_table(res: &LearnResult, every: usize) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let rows = res
        .progress_rows(every)
        .into_iter()
        .map(|(e, l, m)| vec![e.to_string(), fmt(l), m.map(fmt).unwrap_or_default()])
        .collect();
    (vec!["epoch", "loss", "metric"], rows)
}

fn write_learn_artifacts(
    res: &LearnResult,
    orders_out: &Option<PathBuf>,
    progress: &Option<PathBuf>,
    every: usize,
) -> CliResult<()> {
    if let Some(p) = orders_out {
        io::write_json(&res.orders, p)?;
    }
    if let Some(p) = progress {
        let mut w = create(p)?;
        io::write_progress_csv(res, every, &mut w)?;
        w.flush().map_err(mpgfrft::Error::from)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SignalEntry {
    column: usize,
    report: CompressionReport,
    orders: Option<OrderVector>,
}

#[derive(Serialize)]
struct ChannelEntry {
    channel: usize,
    #[serde(flatten)]
    report: ImageCompressionReport,
}

fn compress(p: CompressParams, g: &Globals) -> CliResult<Output> {
    let input = existing(&p.input, "input")?;
    if has_ext(input, "csv") {
        compress_signals(&p, input, g)
    } else {
        compress_image(&p, input, g)
    }
}

fn compress_signals(p: &CompressParams, input: &Path, g: &Globals) -> CliResult<Output> {
    let table = io::load_signal_csv(input)?;
    let n = table.nodes();
    let cols: Vec<usize> = match p.column {
        Some(c) => vec![c],
        None => (0..table.signals()).collect(),
    };
    let basis = match p.method {
        CompressMethod::Adapted => None,
        _ => Some(graph_basis(&p.graph, n, "sensor", p.shift, g.seed)?),
    };
    if let Some(b) = &basis {
        if b.n() != n {
            return Err(CliError::Config(format!("graph has {} nodes, signals have {n}", b.n())));
        }
    }
    let cfg = TrainConfig { learning_rate: p.lr, epochs: p.epochs, seed: g.seed, ..TrainConfig::default() };
    let mut entries = Vec::with_capacity(cols.len());
    let mut recon = DMatrix::zeros(n, cols.len());
    for (j, &c) in cols.iter().enumerate() {
        let x = table.column(c)?;
        let (x_com, report, orders) = match (p.method, &basis) {
            (CompressMethod::Adapted, _) => {
                let (xc, r) = compress_adapted(&x, p.ratio, g.seed.wrapping_add(c as u64))?;
                (xc, r, None)
            }
            (CompressMethod::Fixed, Some(b)) => {
                let a = OrderVector::blocks(n, &p.orders)?;
                let (xc, r) = compress_spectral(b, &multipliers(b, p.kind, &a)?, &x, p.ratio)?;
                (xc, r, Some(a))
            }
            (CompressMethod::Grid, Some(b)) => {
                let (a, _) = grid_search_orders(b, p.kind, &x, p.ratio, p.blocks, p.grid.into(), p.metric)?;
                let (xc, r) = compress_spectral(b, &multipliers(b, p.kind, &a)?, &x, p.ratio)?;
                (xc, r, Some(a))
            }
            (CompressMethod::Learned, Some(b)) => {
                let a0 = OrderVector::constant(n, p.init_order);
                let res = train_compression_orders(b, p.kind, &x, p.ratio, &a0, &OrderTying::Free, &cfg)?;
                let a = res.orders.into_iter().next().expect("one order vector");
                let (xc, r) = compress_spectral(b, &multipliers(b, p.kind, &a)?, &x, p.ratio)?;
                (xc, r, Some(a))
            }
            (_, None) => unreachable!("basis built for every graph method"),
        };
        for i in 0..n {
            recon[(i, j)] = x_com[i].re;
        }
        entries.push(SignalEntry { column: c, report, orders });
    }
    if let Some(out) = &p.out {
        io::save_signal_csv(&SignalTable { values: recon, coords: table.coords.clone() }, out)?;
    }
    let rows = entries
        .iter()
        .map(|e| {
            let r = &e.report;
            vec![e.column.to_string(), fmt(r.re), fmt(r.nrms), fmt(r.cc), fmt(r.cc_pearson), r.retained.to_string()]
        })
        .collect();
    let report = envelope("compress", g, p, serde_json::json!({ "input": "signals", "signals": entries }));
    write_report(&p.report, &report)?;
    Ok(Output::new(report, vec!["column", "re", "nrms", "cc", "cc_pearson", "retained"], rows))
}

fn compress_image(p: &CompressParams, input: &Path, g: &Globals) -> CliResult<Output> {
    let img = io::load_image(input)?;
    let nb = p.block * p.block;
    let method = match p.method {
        CompressMethod::Adapted => BlockMethod::Adapted { seed: g.seed },
        CompressMethod::Fixed => {
            BlockMethod::FixedOperator { kind: p.kind, orders: OrderVector::blocks(nb, &p.orders)? }
        }
        CompressMethod::Learned => BlockMethod::Learned {
            kind: p.kind,
            init: p.init_order,
            cfg: TrainConfig { learning_rate: p.lr, epochs: p.epochs, seed: g.seed, ..TrainConfig::default() },
        },
        CompressMethod::Grid => {
            return Err(CliError::Config("the grid method applies to CSV signals, not images".into()));
        }
    };
    let mut planes = Vec::with_capacity(img.channels);
    let mut channels = Vec::with_capacity(img.channels);
    for c in 0..img.channels {
        let (rec, report) = block_compress_image(&img.plane(c), p.block, p.ratio, &method)?;
        planes.push(rec);
        channels.push(ChannelEntry { channel: c, report });
    }
    if let Some(out) = &p.out {
        io::save_image(&ByteImage::from_planes(&planes)?, out)?;
    }
    let rows = channels
        .iter()
        .map(|e| {
            let r = &e.report.aggregate;
            vec![
                e.channel.to_string(),
                fmt(r.re),
                fmt(r.nrms),
                fmt(r.cc),
                fmt(r.cc_pearson),
                r.retained.to_string(),
                fmt(e.report.max_abs_error),
            ]
        })
        .collect();
    let body = serde_json::json!({ "input": "image", "width": img.width, "height": img.height, "channels": channels });
    let report = envelope("compress", g, p, body);
    write_report(&p.report, &report)?;
    Ok(Output::new(
        report,
        vec!["channel", "re", "nrms", "cc", "cc_pearson", "retained", "max_abs_error"],
        rows,
    ))
}

fn quality_row(stage: &str, q: &QualityReport) -> Vec<String> {
    vec![
        stage.into(),
        fmt(q.snr_db),
        fmt(q.mse),
        q.psnr_db.map(fmt).unwrap_or_default(),
        q.ssim.map(fmt).unwrap_or_default(),
    ]
}

fn denoise(p: DenoiseParams, g: &Globals) -> CliResult<Output> {
    let clean = io::load_image(existing(&p.clean, "clean")?)?.to_gray().plane(0);
    let noisy = match (&p.noisy, p.sigma) {
        (Some(_), _) => io::load_image(existing(&p.noisy, "noisy")?)?.to_gray().plane(0),
        (None, Some(sigma)) => add_gaussian_noise(&clean, sigma, g.seed)?,
        (None, None) => return Err(CliError::Config("--noisy or --sigma is required".into())),
    };
    let cfg = DenoiseConfig {
        block: p.block,
        knn: p.knn,
        kind: p.kind,
        init_order: p.init_order,
        train: TrainConfig { learning_rate: p.lr, epochs: p.epochs, seed: g.seed, ..TrainConfig::default() },
    };
    let (out, rep) = block_denoise_image(&noisy, &clean, &cfg)?;
    if let Some(path) = &p.out {
        io::save_image(&ByteImage::from_planes(&[out])?, path)?;
    }
    let rows = vec![quality_row("input", &rep.input), quality_row("output", &rep.output)];
    let report = envelope("denoise", g, &p, to_value(&rep));
    write_report(&p.report, &report)?;
    Ok(Output::new(report, vec!["stage", "snr_db", "mse", "psnr_db", "ssim"], rows))
}

fn keygen(p: KeygenParams, g: &Globals) -> CliResult<Output> {
    let key = CipherKey::generate(p.kind, p.group_size, g.seed)?;
    if let Some(out) = &p.out {
        std::fs::write(out, key.to_json_pretty() + "\n").map_err(mpgfrft::Error::from)?;
    }
    let fp = key.fingerprint();
    let rows = vec![vec![key.kind.to_string(), key.group_size.to_string(), fp.clone()]];
    let report = envelope("keygen", g, &p, serde_json::json!({ "fingerprint": fp, "key": key }));
    Ok(Output::new(report, vec!["kind", "group_size", "fingerprint"], rows))
}

fn encrypt(p: EncryptParams, g: &Globals) -> CliResult<Output> {
    let img = io::load_image(existing(&p.input, "in")?)?.to_rgb();
    let key = load_key(existing(&p.key, "key")?)?;
    let out = required(&p.out, "out")?;
    let ct = encrypt_image(&img, &key)?;
    let mut w = create(out)?;
    write_ciphertext(&ct, &mut w)?;
    w.flush().map_err(mpgfrft::Error::from)?;
    if let Some(preview) = &p.preview {
        io::save_image(&magnitude_image(&ct, &key)?, preview)?;
    }
    let fp = key.fingerprint();
    let rows = vec![vec![
        ct.width.to_string(),
        ct.height.to_string(),
        ct.padding.to_string(),
        ct.groups.len().to_string(),
        fp.clone(),
    ]];
    let body = serde_json::json!({
        "width": ct.width,
        "height": ct.height,
        "padding": ct.padding,
        "group_size": ct.group_size,
        "groups": ct.groups.len(),
        "fingerprint": fp,
    });
    let report = envelope("encrypt", g, &p, body);
    Ok(Output::new(report, vec!["width", "height", "padding", "groups", "fingerprint"], rows))
}

fn decrypt(p: DecryptParams, g: &Globals) -> CliResult<Output> {
    let key = load_key(existing(&p.key, "key")?)?;
    let file = File::open(existing(&p.input, "in")?).map_err(mpgfrft::Error::from)?;
    let out = required(&p.out, "out")?;
    let ct = read_ciphertext(std::io::BufReader::new(file), key.group_size)?;
    let img = decrypt_image(&ct, &key)?;
    io::save_image(&img, out)?;
    let fp = key.fingerprint();
    let rows = vec![vec![img.width.to_string(), img.height.to_string(), fp.clone()]];
    let body = serde_json::json!({ "width": img.width, "height": img.height, "fingerprint": fp });
    let report = envelope("decrypt", g, &p, body);
    Ok(Output::new(report, vec!["width", "height", "fingerprint"], rows))
}

fn analyze_correlation(p: CorrelationParams, g: &Globals) -> CliResult<Output> {
    let input = existing(&p.input, "in")?;
    let (img, source) = if has_ext(input, "mpgc") {
        let key = load_key(existing(&p.key, "key")?)?;
        let file = File::open(input).map_err(mpgfrft::Error::from)?;
        let ct = read_ciphertext(std::io::BufReader::new(file), key.group_size)?;
        (magnitude_image(&ct, &key)?, "ciphertext-magnitude")
    } else {
        (io::load_image(input)?, "image")
    };
    let correlations: Vec<Correlation> = Direction::ALL
        .iter()
        .map(|&d| adjacent_correlation(&img, d, p.pairs, g.seed))
        .collect::<mpgfrft::Result<_>>()?;
    let rows = correlations
        .iter()
        .map(|c| vec![to_value(&c.direction).as_str().unwrap_or_default().to_string(), fmt(c.rho), c.degenerate.to_string()])
        .collect();
    let body = serde_json::json!({
        "source": source,
        "width": img.width,
        "height": img.height,
        "pairs": p.pairs,
        "correlations": correlations,
    });
    let report = envelope("analyze-correlation", g, &p, body);
    write_report(&p.report, &report)?;
    Ok(Output::new(report, vec!["direction", "rho", "degenerate"], rows))
}

#[derive(Serialize)]
struct SweepPoint {
    delta: f64,
    mse: f64,
}

fn sensitivity(p: SensitivityParams, g: &Globals) -> CliResult<Output> {
    let img = io::load_image(existing(&p.input, "in")?)?.to_rgb();
    let key = load_key(existing(&p.key, "key")?)?;
    let deltas = delta_range(p.delta_range.lo, p.delta_range.hi, p.delta_range.step)?;
    let points: Vec<SweepPoint> =
        sensitivity_sweep(&img, &key, &deltas)?.into_iter().map(|(delta, mse)| SweepPoint { delta, mse }).collect();
    let rows: Vec<Vec<String>> = points.iter().map(|q| vec![fmt(q.delta), fmt(q.mse)]).collect();
    if let Some(out) = &p.out {
        let mut w = create(out)?;
        let mut text = String::from("delta,mse\n");
        for r in &rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(mpgfrft::Error::from)?;
    }
    let body = serde_json::json!({ "fingerprint": key.fingerprint(), "points": points });
    let report = envelope("sensitivity", g, &p, body);
    Ok(Output::new(report, vec!["delta", "mse"], rows))
}

fn learn_transform(p: LearnTransformParams, g: &Globals) -> CliResult<Output> {
    let basis = graph_basis(&p.graph, p.nodes, &p.graph_kind, p.shift, g.seed)?;
    let n = basis.n();
    let x = match &p.signal {
        Some(path) => load_column(path, p.column, n)?,
        None => random_signal(n, g.seed),
    };
    let a_ori = OrderVector::blocks(n, &p.target)?;
    let init = match &p.init {
        Some(v) => OrderVector::blocks(n, v)?,
        None => a_ori.clone(),
    };
    let cfg = TrainConfig { learning_rate: p.lr, epochs: p.epochs, seed: g.seed, ..TrainConfig::default() };
    let res = train_transform_layers(&basis, p.kind, &x, &a_ori, &vec![init; p.layers], &cfg)?;
    write_learn_artifacts(&res, &p.orders_out, &p.progress, p.log_every)?;
    let (header, rows) = progress_table(&res, p.log_every);
    let body = serde_json::json!({
        "nodes": n,
        "target": a_ori,
        "order_sum": res.order_sum(),
        "epochs_run": res.loss_history.len(),
        "result": res,
    });
    let report = envelope("learn-transform", g, &p, body);
    write_report(&p.report, &report)?;
    Ok(Output::new(report, header, rows))
}

fn learn_orders(p: LearnOrdersParams, g: &Globals) -> CliResult<Output> {
    let basis = graph_basis(&p.graph, p.nodes, &p.graph_kind, p.shift, g.seed)?;
    let n = basis.n();
    let tying = match p.tying {
        Tying::Free => OrderTying::Free,
        Tying::Scalar => OrderTying::Scalar,
        Tying::Blocks => OrderTying::blocks(n, p.tying_blocks)?,
    };
    let a0 = OrderVector::constant(n, p.init_order);
    let cfg = TrainConfig { learning_rate: p.lr, epochs: p.epochs, seed: g.seed, ..TrainConfig::default() };
    let (res, extra) = match p.objective {
        Objective::Denoise => {
            let a_ori = OrderVector::blocks(n, &p.target)?;
            let x = make_bandlimited_signal(&basis, p.kind, &a_ori, p.k, g.seed)?;
            let spec = NoiseSpec { sigma: p.sigma, overlap: p.overlap, k: p.k, seed: g.seed.wrapping_add(1) };
            let y = &x + make_structured_noise(&basis, p.kind, &a_ori, &spec)?;
            let mode = match p.filter {
                FilterChoice::Ideal => FilterMode::IdealK(p.k),
                FilterChoice::Learnable => FilterMode::Learnable,
            };
            let res = train_order_and_filter(&basis, p.kind, &y, &x, mode, &a0, &tying, &cfg)?;
            let extra = serde_json::json!({ "snr_in_db": snr_db(&x, &y), "snr_out_db": res.metrics.get("snr_db") });
            (res, extra)
        }
        Objective::Compress => {
            let x = match &p.signal {
                Some(path) => load_column(path, p.column, n)?,
                None => random_signal(n, g.seed),
            };
            let (_, initial) = compress_spectral(&basis, &multipliers(&basis, p.kind, &a0)?, &x, p.ratio)?;
            let res = train_compression_orders(&basis, p.kind, &x, p.ratio, &a0, &tying, &cfg)?;
            let a = &res.orders[0];
            let (_, learned) = compress_spectral(&basis, &multipliers(&basis, p.kind, a)?, &x, p.ratio)?;
            (res, serde_json::json!({ "initial": initial, "learned": learned }))
        }
    };
    write_learn_artifacts(&res, &p.orders_out, &p.progress, p.log_every)?;
    let (header, rows) = progress_table(&res, p.log_every);
    let mut body = serde_json::json!({
        "objective": p.objective,
        "nodes": n,
        "epochs_run": res.loss_history.len(),
        "result": res,
    });
    if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
        b.extend(e);
    }
    let report = envelope("learn-orders", g, &p, body);
    write_report(&p.report, &report)?;
    Ok(Output::new(report, header, rows))
}

fn selftest(g: &Globals) -> CliResult<Output> {
    let checks: Vec<CheckOutcome> = run_selftest(g.seed)?;
    let passed = checks.iter().filter(|c| c.passed).count();
    let ok = passed == checks.len();
    let mut lines: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{} {} / {}: {:.3e} (threshold {:.1e}, {:.2}s)",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.check,
                c.value,
                c.threshold,
                c.seconds
            )
        })
        .collect();
    lines.push(format!("{passed}/{} checks passed", checks.len()));
    let rows = checks
        .iter()
        .map(|c| {
            vec![c.suite.clone(), c.check.clone(), c.passed.to_string(), fmt(c.value), fmt(c.threshold), fmt(c.seconds)]
        })
        .collect();
    let report = serde_json::json!({ "command": "selftest", "seed": g.seed, "passed": ok, "checks": checks });
    Ok(Output {
        report,
        header: vec!["suite", "check", "passed", "value", "threshold", "seconds"],
        rows,
        lines,
        ok,
    })
}
