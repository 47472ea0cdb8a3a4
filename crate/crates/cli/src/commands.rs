use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use hykonv::estimators::{
    chaos_coefficient, estimate_hausdorff, estimate_steiner_point, estimate_v1, estimate_v2_malliavin,
    estimate_v2_mixed_malliavin, estimate_vk_tsirelson, gb_probe, ou_eigen_check, rayleigh_check, vitale_bounds,
    GbFamily,
};
use hykonv::exact::{exact_intrinsic_volume, exact_v2, exact_v2_mixed, v2_mixed_quadrature, QuadratureRule};
use hykonv::experiments::{
    run_ball_sequence, run_box_ball_comparison, run_o_limit, run_rectangle_cross, run_rectangle_sections,
    run_segment_ball, ExperimentRun, LengthRule, BALL_SEQUENCE_N_MAX, BOX_BALL_N_MAX, O_LIMIT_N_MAX, RECTANGLE_N_MAX,
};
use hykonv::hyperbolic::{arccosh_clamped, embedding_roundtrip_error, gns_embed, kernel_value, KernelMatrix, V2Source};
use hykonv::output::format_f64;
use hykonv::{Body, BodyClass, Error, EstimatorResult, SamplerConfig, Vector};

use crate::report::{Cell, Table};
use crate::{Cli, Command, EstimateCommand, Format, MixedMethod, VolumeMethod};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, unknown names.
    Input(String),
    /// Method not available for the given body or parameters.
    Unsupported(String),
    Degenerate(String),
    NotHyperbolic(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Unsupported(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::NotHyperbolic(_) => 5,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m)
            | CliError::Unsupported(m)
            | CliError::Degenerate(m)
            | CliError::NotHyperbolic(m)
            | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidInput(_) | Error::Csv(_) => CliError::Input(msg),
            Error::NotImplemented(_) | Error::OutOfRange { .. } | Error::DimensionMismatch(_) => {
                CliError::Unsupported(msg)
            }
            Error::DegenerateClass(_) => CliError::Degenerate(msg),
            Error::NotHyperbolicType(_) => CliError::NotHyperbolic(msg),
            _ => CliError::Failed(msg),
        }
    }
}

/// Errors from the computation itself: a rejected body at this stage means
/// the method does not apply to it.
fn unsupported(e: Error) -> CliError {
    match e {
        Error::InvalidInput(m) => CliError::Unsupported(m),
        other => other.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult<()> {
    let ctx = Context::new(cli);
    match &cli.command {
        Command::Volume { body, k, method } => ctx.emit(&volume(&ctx, body, *k, *method)?, &[]),
        Command::Distance { a, b, method } => ctx.emit(&distance(&ctx, a, b, *method)?, &[]),
        Command::Embed { inputs, kernel, base, method, kernel_out } => {
            let (table, summary) =
                embed(&ctx, inputs, kernel.as_deref(), base.as_deref(), *method, kernel_out.as_deref())?;
            ctx.emit(&table, &summary)
        }
        Command::Estimate { what } => ctx.emit(&estimate(&ctx, what)?, &[]),
        Command::Experiment { name, n_max, rule, rule_b } => {
            let run = experiment(name, *n_max, rule, rule_b)?;
            ctx.emit(&experiment_table(&run), &[experiment_summary(&run)])
        }
    }
}

struct Context<'a> {
    cli: &'a Cli,
    config: SamplerConfig,
}

impl<'a> Context<'a> {
    fn new(cli: &'a Cli) -> Self {
        let mut config = SamplerConfig::new(cli.seed, cli.samples as usize);
        if let Some(t) = cli.threads {
            config = config.with_threads(t as usize);
        }
        Context { cli, config }
    }

    fn rule(&self, dim: usize) -> hykonv::Result<QuadratureRule> {
        let q = self.cli.quad_points as usize;
        match dim {
            2 => QuadratureRule::circle(q),
            3 => QuadratureRule::sphere(((q / 16) & !1).max(2), q / 2),
            d => Err(Error::NotImplemented(format!("quadrature in dimension {d} (only 2 and 3)"))),
        }
    }

    /// Table to `--out` with the summary on stdout, or table to stdout with
    /// the summary on stderr.
    fn emit(&self, table: &Table, summary: &[String]) -> CliResult<()> {
        let failed = |e: io::Error| CliError::Failed(format!("writing output: {e}"));
        match &self.cli.out {
            Some(path) => {
                let file = File::create(path).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(file);
                self.write_table(table, &mut w).map_err(failed)?;
                w.flush().map_err(failed)?;
                for line in summary {
                    println!("{line}");
                }
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                self.write_table(table, &mut w).map_err(failed)?;
                w.flush().map_err(failed)?;
                for line in summary {
                    eprintln!("{line}");
                }
            }
        }
        Ok(())
    }

    fn write_table<W: Write>(&self, table: &Table, w: W) -> io::Result<()> {
        match self.cli.format {
            Format::Csv => table.write_csv(w),
            Format::Json => table.write_json(w),
        }
    }
}

fn load_body(path: &Path) -> CliResult<Body> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn label_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn estimator_cells(r: &EstimatorResult) -> [Cell; 3] {
    [r.std_error.into(), r.samples.into(), r.seed.into()]
}

fn volume(ctx: &Context, path: &Path, k: usize, method: VolumeMethod) -> CliResult<Table> {
    let body = load_body(path)?;
    let mut table = Table::new(["body", "k", "method", "value", "std_error", "samples", "seed"]);
    let head = |m: &str| -> Vec<Cell> { vec![path.display().to_string().into(), k.into(), m.into()] };
    let estimated = |r: EstimatorResult, m: &str| {
        let mut row = head(m);
        row.push(r.estimate.into());
        row.extend(estimator_cells(&r));
        row
    };
    let row = match method {
        VolumeMethod::Exact => {
            let v = exact_intrinsic_volume(&body, k).map_err(unsupported)?;
            let mut row = head("exact");
            row.extend([v.into(), Cell::Null, Cell::Null, Cell::Null]);
            row
        }
        VolumeMethod::Tsirelson => {
            estimated(estimate_vk_tsirelson(&body, k, &ctx.config).map_err(unsupported)?, "tsirelson")
        }
        VolumeMethod::Malliavin => {
            if k != 2 {
                return Err(CliError::Unsupported(format!("malliavin estimator is for k = 2, not {k}")));
            }
            estimated(estimate_v2_malliavin(&body, &ctx.config).map_err(unsupported)?, "malliavin")
        }
        VolumeMethod::Sudakov => {
            if k != 1 {
                return Err(CliError::Unsupported(format!("sudakov estimator is for k = 1, not {k}")));
            }
            estimated(estimate_v1(&body, &ctx.config).map_err(unsupported)?, "sudakov")
        }
    };
    table.push(row);
    Ok(table)
}

/// A `V₂` value and how it was obtained.
#[derive(Debug, Clone, Copy)]
struct V2Value {
    value: f64,
    std_error: Option<f64>,
    estimate: Option<EstimatorResult>,
    source: &'static str,
}

impl V2Value {
    fn exact(value: f64, source: &'static str) -> Self {
        V2Value { value, std_error: None, estimate: None, source }
    }

    fn estimated(r: EstimatorResult) -> Self {
        V2Value { value: r.estimate, std_error: Some(r.std_error), estimate: Some(r), source: "malliavin" }
    }
}

fn mixed_v2(ctx: &Context, a: &Body, b: &Body, method: MixedMethod) -> CliResult<V2Value> {
    let dim = a.ambient_dim().max(b.ambient_dim());
    let quadrature =
        || -> hykonv::Result<V2Value> { Ok(V2Value::exact(v2_mixed_quadrature(a, b, &ctx.rule(dim)?)?, "quadrature")) };
    let malliavin = || estimate_v2_mixed_malliavin(a, b, &ctx.config).map(V2Value::estimated);
    let v = match method {
        MixedMethod::Exact => exact_v2_mixed(a, b).map(|v| V2Value::exact(v, "exact")),
        MixedMethod::Quadrature => quadrature(),
        MixedMethod::Malliavin => malliavin(),
        MixedMethod::Auto => match exact_v2_mixed(a, b) {
            Ok(v) => Ok(V2Value::exact(v, "exact")),
            Err(Error::NotImplemented(_)) if dim <= 3 => quadrature(),
            Err(Error::NotImplemented(_)) => malliavin(),
            Err(e) => Err(e),
        },
    };
    v.map_err(unsupported)
}

fn self_v2(ctx: &Context, body: &Body, method: MixedMethod) -> CliResult<V2Value> {
    match method {
        MixedMethod::Exact => exact_v2(body).map(|v| V2Value::exact(v, "exact")).map_err(unsupported),
        MixedMethod::Malliavin => estimate_v2_malliavin(body, &ctx.config).map(V2Value::estimated).map_err(unsupported),
        MixedMethod::Quadrature => mixed_v2(ctx, body, body, method),
        MixedMethod::Auto => match exact_v2(body) {
            Ok(v) => Ok(V2Value::exact(v, "exact")),
            Err(Error::NotImplemented(_)) => mixed_v2(ctx, body, body, method),
            Err(e) => Err(unsupported(e)),
        },
    }
}

fn class_of(ctx: &Context, body: Body, method: MixedMethod) -> CliResult<(BodyClass, V2Value)> {
    if body.ambient_dim() < 2 {
        return Err(CliError::Degenerate(format!("body of dimension {} has no homothety class", body.ambient_dim())));
    }
    let v = self_v2(ctx, &body, method)?;
    if let Some(se) = v.std_error {
        if v.value <= 3.0 * se {
            return Err(CliError::Degenerate(format!(
                "estimated V2 = {} is not distinguishable from zero (std error {se})",
                v.value
            )));
        }
    }
    let source = v.estimate.map_or(V2Source::Exact, V2Source::Estimated);
    Ok((BodyClass::with_v2(body, v.value, source)?, v))
}

fn kernel_error(e: Error) -> CliError {
    match e {
        Error::InconsistentInputs(m) => CliError::NotHyperbolic(m),
        other => other.into(),
    }
}

fn distance(ctx: &Context, pa: &Path, pb: &Path, method: MixedMethod) -> CliResult<Table> {
    let (ca, va) = class_of(ctx, load_body(pa)?, method)?;
    let (cb, vb) = class_of(ctx, load_body(pb)?, method)?;
    let vm = mixed_v2(ctx, &ca.body, &cb.body, method)?;
    let beta = kernel_value(&ca, &cb, vm.value).map_err(kernel_error)?;
    let mut table = Table::new([
        "a",
        "b",
        "distance",
        "beta",
        "v2_a",
        "v2_a_source",
        "v2_a_std_error",
        "v2_b",
        "v2_b_source",
        "v2_b_std_error",
        "v2_mixed",
        "v2_mixed_source",
        "v2_mixed_std_error",
    ]);
    let mut row: Vec<Cell> = vec![
        pa.display().to_string().into(),
        pb.display().to_string().into(),
        arccosh_clamped(beta).into(),
        beta.into(),
    ];
    for v in [va, vb, vm] {
        row.extend([v.value.into(), v.source.into(), v.std_error.into()]);
    }
    table.push(row);
    Ok(table)
}

fn collect_body_files(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let entries = fs::read_dir(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn embed(
    ctx: &Context,
    inputs: &[PathBuf],
    kernel_path: Option<&Path>,
    base: Option<&str>,
    method: MixedMethod,
    kernel_out: Option<&Path>,
) -> CliResult<(Table, Vec<String>)> {
    let kernel = match kernel_path {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            KernelMatrix::read_csv(file).map_err(|e| match e {
                Error::NotHyperbolicType(_) => e.into(),
                other => CliError::Input(format!("{}: {other}", path.display())),
            })?
        }
        None => {
            let files = collect_body_files(inputs)?;
            if files.is_empty() {
                return Err(CliError::Input("no bodies to embed".into()));
            }
            let labels: Vec<String> = files.iter().map(|f| label_of(f)).collect();
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return Err(CliError::Input(format!("duplicate label '{l}'")));
                }
            }
            let mut classes = Vec::with_capacity(files.len());
            for f in &files {
                classes.push(class_of(ctx, load_body(f)?, method)?.0);
            }
            let mut failure = None;
            let kernel = KernelMatrix::from_classes(labels, &classes, |a, b| {
                mixed_v2(ctx, &a.body, &b.body, method).map(|v| v.value).map_err(|e| {
                    let msg = e.to_string();
                    failure = Some(e);
                    Error::NumericalDegeneracy(msg)
                })
            });
            if let Some(e) = failure {
                return Err(e);
            }
            kernel.map_err(kernel_error)?
        }
    };
    if let Some(path) = kernel_out {
        let file = File::create(path).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))?;
        kernel.write_csv(BufWriter::new(file))?;
    }
    let base_index = match base {
        Some(label) => {
            kernel.index_of(label).ok_or_else(|| CliError::Input(format!("unknown base label '{label}'")))?
        }
        None => 0,
    };
    let points = gns_embed(&kernel, base_index)?;
    let error = embedding_roundtrip_error(&kernel, &points)?;

    let r = points.iter().map(|p| p.x.len()).max().unwrap_or(0);
    let mut columns = vec!["label".to_string(), "t".to_string()];
    columns.extend((1..=r).map(|i| format!("x{i}")));
    let mut table = Table::new(columns);
    for (label, p) in kernel.labels.iter().zip(&points) {
        let mut row: Vec<Cell> = vec![label.clone().into(), p.t.into()];
        row.extend(p.x.padded(r).0.into_iter().map(Cell::from));
        table.push(row);
    }
    let summary = vec![format!(
        "embed: points={} dimension={r} base={} max_roundtrip_error={}",
        points.len(),
        kernel.labels[base_index],
        format_f64(error)
    )];
    Ok((table, summary))
}

fn parse_multi_index(s: &str) -> CliResult<BTreeMap<usize, usize>> {
    let mut index = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (coord, order) = part
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("multi-index entry '{part}' is not coord:order")))?;
        let parse = |x: &str| {
            x.trim().parse::<usize>().map_err(|e| CliError::Input(format!("multi-index entry '{part}': {e}")))
        };
        let order = parse(order)?;
        if order > 0 {
            *index.entry(parse(coord)?).or_insert(0) += order;
        }
    }
    Ok(index)
}

fn estimate(ctx: &Context, what: &EstimateCommand) -> CliResult<Table> {
    let cfg = &ctx.config;
    match what {
        EstimateCommand::Steiner { body } => {
            let s = estimate_steiner_point(&load_body(body)?, cfg).map_err(unsupported)?;
            let mut table = Table::new(["coordinate", "value", "std_error", "samples", "seed"]);
            for (i, (v, se)) in s.point.0.iter().zip(&s.std_error).enumerate() {
                table.push(vec![(i + 1).into(), (*v).into(), (*se).into(), s.samples.into(), s.seed.into()]);
            }
            Ok(table)
        }
        EstimateCommand::Chaos { body, index } => {
            let mi = parse_multi_index(index)?;
            let c = chaos_coefficient(&load_body(body)?, &mi, cfg).map_err(unsupported)?;
            let label: Vec<String> = c.multi_index.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            let mut table = Table::new(["multi_index", "value", "std_error", "samples", "seed"]);
            table.push(vec![
                label.join(",").into(),
                c.value.into(),
                c.std_error.into(),
                cfg.samples.into(),
                cfg.seed.into(),
            ]);
            Ok(table)
        }
        EstimateCommand::Rayleigh { body } => {
            let r = rayleigh_check(&load_body(body)?, cfg).map_err(unsupported)?;
            let mut table = Table::new(["lhs", "rhs", "std_error", "margin", "samples", "seed"]);
            table.push(vec![
                r.lhs.into(),
                r.rhs.into(),
                r.std_error.into(),
                r.margin.into(),
                cfg.samples.into(),
                cfg.seed.into(),
            ]);
            Ok(table)
        }
        EstimateCommand::Ou { n, direction } => {
            let v = Vector::new(direction.clone())?;
            let c = ou_eigen_check(*n, &v, cfg).map_err(unsupported)?;
            let mut table = Table::new([
                "n",
                "gradient_energy",
                "gradient_energy_std_error",
                "scaled_energy",
                "scaled_energy_std_error",
                "exact",
                "margin",
            ]);
            table.push(vec![
                (*n).into(),
                c.gradient_energy.estimate.into(),
                c.gradient_energy.std_error.into(),
                c.scaled_energy.estimate.into(),
                c.scaled_energy.std_error.into(),
                c.exact.into(),
                c.margin.into(),
            ]);
            Ok(table)
        }
        EstimateCommand::Gb { family, params, rule, dims } => {
            let fam: GbFamily = family.parse()?;
            let top = dims.iter().copied().max().unwrap_or(0);
            let params = match rule {
                Some(r) => r.parse::<LengthRule>()?.lengths(top),
                None => params.clone(),
            };
            let rows = gb_probe(fam, &params, dims, cfg)?;
            let mut table = Table::new(["dim", "expected_sup", "std_error", "samples", "seed"]);
            for (d, r) in rows {
                let mut row: Vec<Cell> = vec![d.into(), r.estimate.into()];
                row.extend(estimator_cells(&r));
                table.push(row);
            }
            Ok(table)
        }
        EstimateCommand::Hausdorff { a, b, directions } => {
            let d = estimate_hausdorff(&load_body(a)?, &load_body(b)?, *directions, cfg)?;
            let mut table = Table::new(["hausdorff_lower", "directions", "seed"]);
            table.push(vec![d.into(), (*directions).into(), cfg.seed.into()]);
            Ok(table)
        }
        EstimateCommand::Vitale { a, b, directions } => {
            let (lo, hi) = vitale_bounds(&load_body(a)?, &load_body(b)?, *directions, cfg)?;
            let mut table = Table::new(["lower", "upper", "directions", "seed"]);
            table.push(vec![lo.into(), hi.into(), (*directions).into(), cfg.seed.into()]);
            Ok(table)
        }
    }
}

fn experiment(name: &str, n_max: Option<usize>, rule: &str, rule_b: &str) -> CliResult<ExperimentRun> {
    let n = |default: usize| n_max.unwrap_or(default);
    let run = match name {
        "ball_sequence" => run_ball_sequence(n(BALL_SEQUENCE_N_MAX)),
        "rectangle_sections" => run_rectangle_sections(rule.parse()?, n(RECTANGLE_N_MAX)),
        "rectangle_cross" => run_rectangle_cross(rule.parse()?, rule_b.parse()?, n(RECTANGLE_N_MAX)),
        "box_ball" => run_box_ball_comparison(n(BOX_BALL_N_MAX)),
        "o_limit" => run_o_limit(n(O_LIMIT_N_MAX)),
        "segment_ball" => run_segment_ball(rule.parse()?, n(BALL_SEQUENCE_N_MAX)),
        other => return Err(CliError::Input(format!("unknown experiment '{other}'"))),
    };
    Ok(run?)
}

fn experiment_table(run: &ExperimentRun) -> Table {
    let mut columns = vec!["experiment".to_string(), "n".to_string()];
    if let Some(first) = run.records.first() {
        columns.extend(first.values.iter().map(|(k, _)| k.clone()));
    }
    let mut table = Table::new(columns);
    for r in &run.records {
        let mut row: Vec<Cell> = vec![r.experiment.clone().into(), r.n.into()];
        row.extend(r.values.iter().map(|(_, v)| Cell::Num(*v)));
        table.push(row);
    }
    table
}

fn experiment_summary(run: &ExperimentRun) -> String {
    let mut parts = vec![format!("{}: rows={}", run.experiment, run.records.len())];
    if let Some(last) = run.records.last() {
        parts.push(format!("final_n={}", last.n));
        parts.extend(last.values.iter().map(|(k, v)| format!("final_{k}={}", format_f64(*v))));
    }
    if let Some(c) = run.cauchy {
        parts.push(format!("cauchy={c}"));
    }
    if run.experiment == "box_ball" {
        let d = run.column("distance");
        parts.push(format!("monotone_decreasing={}", d.windows(2).all(|w| w[1] < w[0])));
    }
    parts.join(" ")
}
