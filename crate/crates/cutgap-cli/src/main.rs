use clap::{Args, Parser, Subcommand, ValueEnum};
use cutgap::cutpoly::{max_cut_exact, parse_custom_inequalities, InequalityFamily, InstanceFile, WeightedInstance};
use cutgap::gapbound::{
    bound_loop, default_k_check, num, verify_certificate, DualCertificate, LoopConfig, SampleGrid, TailOutcome,
    VerifyOptions, VerifyReport, DEFAULT_DIGITS, GRID_TOP,
};
use cutgap::instances::{instance_from_certificate, ratio_trend, trend_csv, InstanceOptions, NESTING_SCHEME};
use cutgap::kernels::{
    alpha2_closed_form, alpha_gw, avidor_zwick_mix, best_single_degree, gw_kernel, windmill_kernel, windmill_reynolds,
    MixedKernel,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "cutgap", version, about = "Certified gap bounds and bad instances for rank-n max-cut relaxations")]
struct Cli {
    /// Seed for every random choice; required by stochastic commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Decimal digits used for verification; 0 verifies in double precision.
    #[arg(long, global = true, default_value_t = DEFAULT_DIGITS)]
    precision: u32,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the separation loop and write a verified dual certificate.
    Bound(BoundArgs),
    /// Re-verify a certificate file.
    Verify(VerifyArgs),
    /// Build a max-cut instance from a certificate's grid weights.
    Instance(InstanceArgs),
    /// Integrality ratios on nested partitions.
    Trend(TrendArgs),
    /// Exact max-cut of an instance file.
    Maxcut(MaxcutArgs),
    /// Print the reference constants.
    Constants(ConstantsArgs),
    /// Plot data for the circle kernels and their ratios.
    Windmill(WindmillArgs),
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    degree: usize,
    #[arg(long, default_value = "triangle,pentagonal,hypermetric7")]
    families: String,
    /// JSON list of extra inequalities `{m, Z, beta}`.
    #[arg(long)]
    custom: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    rounds: usize,
    #[arg(long, default_value_t = 2001)]
    grid_points: usize,
    #[arg(long)]
    k_check: Option<usize>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Fail unless the tail beyond K_check is certified too.
    #[arg(long)]
    require_tail: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    path: PathBuf,
    #[arg(long)]
    k_check: Option<usize>,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    cert: PathBuf,
    #[arg(long, default_value_t = 24)]
    cells: usize,
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct TrendArgs {
    cert: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "8,16,24")]
    cells: Vec<usize>,
    #[arg(long, default_value_t = 200_000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct MaxcutArgs {
    path: PathBuf,
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    /// Largest degree searched for the single-degree table.
    #[arg(long, default_value_t = 50)]
    kmax: usize,
}

#[derive(Args, Debug)]
struct WindmillArgs {
    #[arg(long, default_value_t = 1001)]
    points: usize,
    #[arg(long, default_value_t = 2000)]
    resolution: usize,
}

enum Failure {
    Input(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Check(_) => 1,
        }
    }
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn need_seed(cli: &Cli) -> Result<u64, Failure> {
    cli.seed.ok_or_else(|| Failure::Input("--seed is required for this command".into()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_out(path: &Path, contents: &str) -> Outcome {
    std::fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(cli: &Cli, contents: &str) -> Outcome {
    match &cli.out {
        Some(p) => write_out(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_certificate(path: &Path) -> Result<DualCertificate, Failure> {
    DualCertificate::from_json(&read(path)?).map_err(input)
}

fn r6(x: f64) -> String {
    format!("{x:.6}")
}

#[derive(Serialize)]
struct ReportFile {
    verified_bound: String,
    claimed_bound: String,
    level: String,
    label: String,
    k_check: usize,
    all_degree_bound: Option<String>,
    validity_adjustment: String,
    lambda_bump: String,
    worst_degree: usize,
    steps: Vec<StepRecord>,
}

#[derive(Serialize)]
struct StepRecord {
    step: u8,
    name: String,
    detail: String,
}

fn report_file(r: &VerifyReport) -> ReportFile {
    ReportFile {
        verified_bound: num(r.verified_bound),
        claimed_bound: num(r.claimed_bound),
        level: r.level.to_string(),
        label: r.label(),
        k_check: r.k_check,
        all_degree_bound: r.all_degree_bound().map(num),
        validity_adjustment: num(r.validity_adjustment),
        lambda_bump: num(r.lambda_bump),
        worst_degree: r.worst_degree,
        steps: r
            .steps
            .iter()
            .map(|(s, d)| StepRecord {
                step: s.code(),
                name: s.name().into(),
                detail: d.clone(),
            })
            .collect(),
    }
}

fn print_report(r: &VerifyReport) {
    for (s, d) in &r.steps {
        println!("step {} {:<13} ok  {d}", s.code(), s.name());
    }
    println!("verified bound {} ({})", r6(r.verified_bound), r.label());
    println!("verification level {}", r.level);
    match r.tail {
        TailOutcome::Certified { .. } => {}
        TailOutcome::Failed { .. } => {
            if let Some(b) = r.tail_bound {
                println!("all-degree bound {}", r6(b));
            }
        }
        TailOutcome::Inapplicable => println!("tail not applicable on the circle"),
    }
}

fn cmd_bound(cli: &Cli, a: &BoundArgs) -> Outcome {
    let seed = need_seed(cli)?;
    if a.n < 2 {
        return Err(Failure::Input("--n must be at least 2".into()));
    }
    if a.degree < 1 {
        return Err(Failure::Input("--degree must be at least 1".into()));
    }
    let mut families = Vec::new();
    for name in a.families.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        families.push(InequalityFamily::parse(name).ok_or_else(|| Failure::Input(format!("unknown family {name}")))?);
    }
    if let Some(p) = &a.custom {
        families.push(InequalityFamily::Custom(parse_custom_inequalities(&read(p)?).map_err(input)?));
    }
    let mut cfg = LoopConfig::new(a.n, a.degree, families, a.rounds, seed);
    cfg.grid = SampleGrid::uniform(a.grid_points, -1.0, GRID_TOP).map_err(input)?;
    cfg.bound.k_check = a.k_check.unwrap_or_else(|| default_k_check(a.degree));
    cfg.search.restarts = a.restarts;
    let result = bound_loop(&cfg).map_err(|e| Failure::Check(e.to_string()))?;
    let mut cert = result.certificate;
    cert.meta.created = format!(
        "bound n={} d={} families={} rounds={} grid={} seed={seed}",
        a.n, a.degree, a.families, a.rounds, a.grid_points
    );
    cert.meta.tool_version = env!("CARGO_PKG_VERSION").into();
    let report = verify_certificate(
        &cert,
        &VerifyOptions {
            digits: cli.precision,
            k_check: None,
        },
    )
    .map_err(|e| Failure::Check(e.to_string()))?;
    cert.level = report.level;
    println!("rounds {}", result.rounds);
    println!("constraints {}", cert.constraints.len());
    println!("lp bound {}", r6(result.bound));
    print_report(&report);
    if let Some(p) = &cli.out {
        write_out(p, &cert.to_json())?;
    }
    if a.require_tail && !matches!(report.tail, TailOutcome::Certified { .. }) {
        return Err(Failure::Check("tail beyond K_check not certified".into()));
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Outcome {
    let cert = load_certificate(&a.path)?;
    let opts = VerifyOptions {
        digits: cli.precision,
        k_check: a.k_check,
    };
    match verify_certificate(&cert, &opts) {
        Ok(r) => {
            print_report(&r);
            if let Some(p) = &cli.out {
                let s = serde_json::to_string_pretty(&report_file(&r)).expect("report serializes") + "\n";
                write_out(p, &s)?;
            }
            Ok(())
        }
        Err(e) => {
            println!("step {} {} FAILED  {}", e.step.code(), e.step.name(), e.detail);
            Err(Failure::Check(e.to_string()))
        }
    }
}

fn instance_options(samples: usize) -> InstanceOptions {
    InstanceOptions {
        samples,
        ..InstanceOptions::default()
    }
}

fn cmd_instance(cli: &Cli, a: &InstanceArgs) -> Outcome {
    let seed = need_seed(cli)?;
    let cert = load_certificate(&a.cert)?;
    let r = instance_from_certificate(&cert, a.cells, &instance_options(a.samples), seed).map_err(input)?;
    println!("cells {} (nesting {NESTING_SCHEME}, diameter {})", r.m, r6(r.diameter));
    println!("removed diagonal mass {}", r6(r.az.removed_diagonal));
    println!("sdp1 {} ({})", r6(r.sdp1), r.sdp1_mode.label());
    println!("sdp{} {} (heuristic-lower-bound)", cert.n, r6(r.sdpn));
    println!("ratio {} (noise {})", r6(r.ratio), r6(r.noise));
    if r.is_demonstrated_gap() {
        println!("demonstrated integrality ratio {}", r6(r.ratio));
    }
    if let Some(p) = &cli.out {
        let file: InstanceFile = r.az.instance.to_file(Some(cert.n));
        write_out(p, &(serde_json::to_string_pretty(&file).expect("instance serializes") + "\n"))?;
    }
    Ok(())
}

fn cmd_trend(cli: &Cli, a: &TrendArgs) -> Outcome {
    let seed = need_seed(cli)?;
    let cert = load_certificate(&a.cert)?;
    let rows = ratio_trend(&cert, &a.cells, &instance_options(a.samples), seed).map_err(input)?;
    let text = if cli.format == Some(Format::Json) {
        #[derive(Serialize)]
        struct Row {
            m: usize,
            sdp1: String,
            sdp1_mode: &'static str,
            sdpn: String,
            ratio: String,
            noise: String,
        }
        let rows: Vec<Row> = rows
            .iter()
            .map(|r| Row {
                m: r.m,
                sdp1: num(r.sdp1),
                sdp1_mode: r.sdp1_mode.label(),
                sdpn: num(r.sdpn),
                ratio: num(r.ratio),
                noise: num(r.noise),
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
    } else {
        trend_csv(&rows)
    };
    emit(cli, &text)
}

fn cmd_maxcut(cli: &Cli, a: &MaxcutArgs) -> Outcome {
    let f: InstanceFile = serde_json::from_str(&read(&a.path)?).map_err(input)?;
    let g = WeightedInstance::from_file(&f).map_err(input)?;
    let (v, signs) = max_cut_exact(&g).map_err(input)?;
    let side: Vec<String> = signs.iter().map(|s| if *s > 0 { "+".into() } else { "-".into() }).collect();
    emit(cli, &format!("sdp1 {v}\ncut weight {}\nsides {}\n", v / 4.0, side.join("")))
}

fn cmd_constants(a: &ConstantsArgs) -> Outcome {
    let (agw, tgw) = alpha_gw();
    let mut s = String::new();
    let _ = writeln!(s, "alpha_GW {agw:.7}");
    let _ = writeln!(s, "t_GW {tgw:.6}");
    let _ = writeln!(s, "alpha_2 {:.9}", alpha2_closed_form());
    let _ = writeln!(s, "n,best_degree,1-P_k(t_GW) (k <= {})", a.kmax);
    for n in 2..=10 {
        let (k, v) = best_single_degree(n, tgw, a.kmax).map_err(input)?;
        let _ = writeln!(s, "{n},{k},{v:.6}");
    }
    print!("{s}");
    Ok(())
}

fn cmd_windmill(cli: &Cli, a: &WindmillArgs) -> Outcome {
    if a.points < 2 {
        return Err(Failure::Input("--points must be at least 2".into()));
    }
    let mix = avidor_zwick_mix(a.resolution);
    let gw = MixedKernel { lambda: 0.0 };
    let cos4 = windmill_kernel();
    let mut s = String::from("t,gw,windmill,cos4,mixed,ratio_gw,ratio_windmill,ratio_mixed\n");
    for i in 0..a.points {
        let t = -1.0 + 2.0 * i as f64 / a.points as f64;
        let g = gw_kernel(t).map_err(input)?;
        let w = windmill_reynolds(4, t).map_err(input)?;
        let c = cos4.eval(t).map_err(input)?;
        let m = mix.kernel.eval(t);
        let d = 1.0 - t;
        let _ = writeln!(s, "{t},{g},{w},{c},{m},{},{},{}", (1.0 - g) / d, (1.0 - w) / d, (1.0 - m) / d);
    }
    println!("lambda* {}", r6(mix.lambda));
    println!("alpha {}", r6(mix.alpha));
    println!("alpha_2 {}", r6(alpha2_closed_form()));
    println!("min ratio at lambda=0 {}", r6(gw.min_ratio(a.resolution).0));
    match &cli.out {
        Some(p) => write_out(p, &s),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(input)?;
    }
    match &cli.command {
        Command::Bound(a) => cmd_bound(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Instance(a) => cmd_instance(cli, a),
        Command::Trend(a) => cmd_trend(cli, a),
        Command::Maxcut(a) => cmd_maxcut(cli, a),
        Command::Constants(a) => cmd_constants(a),
        Command::Windmill(a) => cmd_windmill(cli, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Input(m) => format!("error: {m}"),
                Failure::Check(m) => format!("failed: {m}"),
            };
            eprintln!("{msg}");
            ExitCode::from(f.code())
        }
    }
}
