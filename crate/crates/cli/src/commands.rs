use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use randev_core::bitstream::{concat_all, read_file, read_from, write_to};
use randev_core::experiments::{fig2_csv, fig2_curve, prng_demo, validate_approx};
use randev_core::model::{deviation_approx, n_max, predict, NMax};
use randev_core::sources::{check_markov_params, generate};
use randev_core::{par_analyze, AnalysisReport, BitFormat, BitSequence, SourceConfig};

use crate::args::*;
use crate::failure::{Failure, EXIT_ALARM, EXIT_OK};
use crate::monitor::{self, MonitorConfig};
use crate::output::sig6;

type CmdResult = Result<u8, Failure>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Nmax(a) => cmd_nmax(&a),
        Command::Monitor(a) => cmd_monitor(&a),
        Command::ValidateApprox(a) => cmd_validate(&a),
        Command::Fig2(a) => cmd_fig2(&a),
        Command::Concat(a) => cmd_concat(&a),
        Command::PrngDemo(a) => cmd_prng_demo(&a),
    }
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn print(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::io("stdout", e))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::io(path.display(), e))
}

fn read_bits(path: &Path, format: BitFormat, nbits: Option<usize>) -> Result<BitSequence, Failure> {
    let io_context = |e: randev_core::Error| match e {
        randev_core::Error::Io(io) => Failure::io(path.display(), io),
        other => Failure::from(other),
    };
    if is_stdio(path) {
        if format != BitFormat::Raw {
            return Err(Failure::usage("stdin input is accepted in raw format only"));
        }
        read_from(io::stdin().lock(), format, nbits).map_err(io_context)
    } else {
        read_file(path, format, nbits).map_err(io_context)
    }
}

fn source_config(args: &SourceArgs, seed: u64) -> Result<SourceConfig, Failure> {
    let kind = args.kind().map_err(Failure::usage)?;
    let config = SourceConfig::new(kind, seed);
    config.validate()?;
    Ok(config)
}

fn cmd_generate(args: &GenerateArgs) -> CmdResult {
    let config = source_config(&args.source, args.seed)?;
    let bits = generate(&config, args.nbits)?;
    let mut encoded = Vec::new();
    write_to(&bits, &mut encoded, args.format.into())?;
    if is_stdio(&args.out) {
        io::stdout()
            .lock()
            .write_all(&encoded)
            .and_then(|_| io::stdout().flush())
            .map_err(|e| Failure::io("stdout", e))?;
    } else {
        write_output(&args.out, &encoded)?;
    }
    Ok(EXIT_OK)
}

fn chunk_bits(n: usize) -> usize {
    let threads = std::thread::available_parallelism().map_or(1, |t| t.get());
    (n / threads).max(1 << 20)
}

fn cmd_analyze(args: &AnalyzeArgs) -> CmdResult {
    let bits = read_bits(&args.file, args.format.into(), args.nbits)?;
    let report = par_analyze(&bits, args.max_lag, chunk_bits(bits.len()))?;
    let text = if args.json {
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        s
    } else {
        report_table(&report)
    };
    print(&text)?;
    Ok(EXIT_OK)
}

fn n_max_text(n: NMax) -> String {
    match n {
        NMax::Finite(v) => sig6(v),
        NMax::Unbounded => "unbounded".into(),
    }
}

pub fn report_table(r: &AnalysisReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<18}{}", "n_bits", r.n_bits);
    let _ = writeln!(s, "{:<18}{} ± {}", "bias", sig6(r.bias.value), sig6(r.bias.sigma));
    for a in &r.autocorr {
        let _ = writeln!(
            s,
            "{:<18}{} ± {}",
            format!("a_{}", a.lag),
            sig6(a.value),
            sig6(a.sigma)
        );
    }
    let _ = writeln!(s, "{:<18}{}", "mi_lag1", sig6(r.mi_lag1));
    let _ = writeln!(s, "{:<18}{}", "cond_entropy", sig6(r.cond_entropy));
    let _ = writeln!(
        s,
        "{:<18}{} ± {}",
        "deviation_plugin",
        sig6(r.deviation_plugin),
        sig6(r.deviation_sigma)
    );
    let _ = writeln!(s, "{:<18}{}", "deviation_markov", sig6(r.deviation_markov));
    let _ = writeln!(s, "{:<18}{}", "n_max", n_max_text(r.n_max));
    s
}

fn cmd_predict(args: &PredictArgs) -> CmdResult {
    let config = source_config(&args.source, 0)?;
    let prediction = predict(&config)?;
    let mut s = serde_json::to_string_pretty(&prediction).expect("prediction serializes");
    s.push('\n');
    print(&s)?;
    Ok(EXIT_OK)
}

fn cmd_nmax(args: &NmaxArgs) -> CmdResult {
    let d = match (args.deviation, args.a1) {
        (Some(d), _) => d,
        (None, Some(a1)) => {
            let b = args.bias.unwrap_or(0.0);
            check_markov_params(b, a1)?;
            deviation_approx(b, a1)
        }
        (None, None) => return Err(Failure::usage("give --deviation or --a1")),
    };
    if !(d.is_finite() && d >= 0.0) {
        return Err(Failure::usage(format!("deviation must be a non-negative number, got {d}")));
    }
    let n = n_max(d);
    let text = if args.json {
        let value = serde_json::json!({ "deviation": d, "n_max": n });
        format!("{value}\n")
    } else {
        format!("D = {}\nN_max = {}\n", sig6(d), n_max_text(n))
    };
    print(&text)?;
    Ok(EXIT_OK)
}

fn cmd_monitor(args: &MonitorArgs) -> CmdResult {
    let config = MonitorConfig {
        window_bits: args.window_bits,
        sigma_k: args.sigma_k,
        deviation_threshold: args.deviation_threshold,
    };
    config.validate().map_err(Failure::usage)?;
    let out = io::stdout().lock();
    let alarmed = if is_stdio(&args.input) {
        monitor::run(io::stdin().lock(), out, config)
    } else {
        let file = fs::File::open(&args.input).map_err(|e| Failure::io(args.input.display(), e))?;
        monitor::run(file, out, config)
    }
    .map_err(|e| Failure::io(args.input.display(), e))?;
    Ok(if alarmed { EXIT_ALARM } else { EXIT_OK })
}

fn cmd_validate(args: &ValidateArgs) -> CmdResult {
    let grid = validate_approx(args.grid_step, args.nbits, args.seed)?;
    if let Some(path) = &args.out {
        write_output(path, grid.to_csv().as_bytes())?;
    }
    let mut s = String::new();
    let _ = writeln!(s, "grid points: {}", grid.rows.len());
    let _ = writeln!(
        s,
        "max_relative_error: {}% at b={}, a1={}",
        sig6(100.0 * grid.max_relative_error),
        grid.argmax.0,
        grid.argmax.1
    );
    if let Some(z) = grid.max_abs_z() {
        let _ = writeln!(s, "max |z| of simulated deviation: {}", sig6(z));
    }
    print(&s)?;
    Ok(EXIT_OK)
}

fn cmd_fig2(args: &Fig2Args) -> CmdResult {
    let rows = fig2_curve(args.min, args.max, args.step)?;
    let csv = fig2_csv(&rows);
    match &args.out {
        Some(path) => write_output(path, csv.as_bytes())?,
        None => print(&csv)?,
    }
    Ok(EXIT_OK)
}

fn cmd_concat(args: &ConcatArgs) -> CmdResult {
    let format = args.format.into();
    let parts = args
        .inputs
        .iter()
        .map(|p| read_bits(p, format, None))
        .collect::<Result<Vec<_>, _>>()?;
    let joined = concat_all(&parts);
    let mut encoded = Vec::new();
    write_to(&joined, &mut encoded, format)?;
    write_output(&args.out, &encoded)?;
    Ok(EXIT_OK)
}

fn cmd_prng_demo(args: &PrngDemoArgs) -> CmdResult {
    let demo = prng_demo(args.seed, args.length, args.max_lag)?;
    let mut s = String::new();
    let _ = writeln!(s, "xorshift64 seed {} length {}", demo.seed, demo.length);
    let _ = writeln!(s, "reproducible from seed: {}", demo.reproducible);
    let _ = writeln!(s, "entropy bound per bit: {}", sig6(demo.entropy_bound));
    let _ = writeln!(s, "max |z| (bias, a_1..a_{}): {}", args.max_lag, sig6(demo.max_abs_z));
    s.push_str(&report_table(&demo.report));
    print(&s)?;
    Ok(EXIT_OK)
}
