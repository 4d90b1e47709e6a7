use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use upq::suite::{run_suite, RunConfig, SuiteReport, SUITES};

/// Verification suites for the indefinite unitary group toolkit: group
/// axioms, Iwasawa decomposition, truncated Fock fibers, cocycles, point
/// process functionals and current groups.
#[derive(Parser, Debug)]
#[command(name = "upq", version)]
struct Args {
    /// suite to run: group, iwasawa, bargmann, special, extension, qp,
    /// currents, or all
    #[arg(long, default_value = "all")]
    suite: String,

    #[arg(long)]
    p: Option<usize>,

    #[arg(long)]
    q: Option<usize>,

    /// sign vector, comma separated entries of 1 or -1
    #[arg(long)]
    eps: Option<String>,

    /// Fock truncation degree
    #[arg(long)]
    degree: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    samples: Option<usize>,

    #[arg(long)]
    window_min: Option<f64>,

    #[arg(long)]
    window_max: Option<f64>,

    /// directory for JSON reports and the CSV summary
    #[arg(long)]
    out_dir: Option<PathBuf>,

    /// flat key=value file mirroring the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_eps(s: &str) -> Result<Vec<i8>, String> {
    s.split(',')
        .map(|t| match t.trim() {
            "1" | "+1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            other => Err(format!("bad sign entry '{other}'")),
        })
        .collect()
}

fn load_config_file(path: &PathBuf) -> Result<HashMap<String, String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn build_config(args: &Args) -> Result<(RunConfig, String), String> {
    let mut cfg = RunConfig::default();
    let mut suite = args.suite.clone();

    if let Some(path) = &args.config {
        let map = load_config_file(path)?;
        let get = |k: &str| map.get(k).cloned();
        let parse = |v: String, k: &str| -> Result<usize, String> {
            v.parse().map_err(|_| format!("bad value for {k}"))
        };
        if let Some(v) = get("suite") {
            suite = v;
        }
        if let Some(v) = get("p") {
            cfg.p = parse(v, "p")?;
        }
        if let Some(v) = get("q") {
            cfg.q = parse(v, "q")?;
        }
        if let Some(v) = get("eps") {
            cfg.eps = parse_eps(&v)?;
        }
        if let Some(v) = get("degree") {
            cfg.degree = parse(v, "degree")?;
        }
        if let Some(v) = get("seed") {
            cfg.seed = v.parse().map_err(|_| "bad value for seed".to_string())?;
        }
        if let Some(v) = get("samples") {
            cfg.samples = parse(v, "samples")?;
        }
        if let Some(v) = get("window-min") {
            cfg.window_min = v.parse().map_err(|_| "bad value for window-min".to_string())?;
        }
        if let Some(v) = get("window-max") {
            cfg.window_max = v.parse().map_err(|_| "bad value for window-max".to_string())?;
        }
        for k in map.keys() {
            if !matches!(
                k.as_str(),
                "suite" | "p" | "q" | "eps" | "degree" | "seed" | "samples" | "window-min"
                    | "window-max" | "out-dir"
            ) {
                return Err(format!("unknown config key '{k}'"));
            }
        }
    }

    if let Some(p) = args.p {
        cfg.p = p;
        // keep the sign vector consistent unless given explicitly
        if args.eps.is_none() {
            cfg.eps = vec![1; p];
        }
    }
    if let Some(q) = args.q {
        cfg.q = q;
    }
    if let Some(eps) = &args.eps {
        cfg.eps = parse_eps(eps)?;
    }
    if let Some(d) = args.degree {
        cfg.degree = d;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.samples {
        cfg.samples = s;
    }
    if let Some(w) = args.window_min {
        cfg.window_min = w;
    }
    if let Some(w) = args.window_max {
        cfg.window_max = w;
    }

    Ok((cfg, suite))
}

fn write_reports(dir: &PathBuf, reports: &[SuiteReport]) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let mut csv = String::from("suite,check,estimate,std_error,tolerance,n_samples,verdict\n");
    for rep in reports {
        let json = serde_json::to_string_pretty(rep).map_err(|e| e.to_string())?;
        fs::write(dir.join(format!("{}.json", rep.suite)), json).map_err(|e| e.to_string())?;
        csv.push_str(&rep.to_csv());
    }
    fs::write(dir.join("summary.csv"), csv).map_err(|e| e.to_string())?;
    Ok(())
}

/// Growth of the truncated radial integral against log(1/delta), as a
/// standalone vector graphic.
fn write_growth_plot(dir: &PathBuf, cfg: &RunConfig) -> Result<(), String> {
    use upq::iwasawa::TriangularS;
    use upq::measures::radial_log_quadrature;
    let (lo, hi) = cfg.window();
    let sig = upq::group::Signature::new(1, 2).map_err(|e| e.to_string())?;
    let points: Vec<(f64, f64)> = (0..24)
        .map(|k| {
            let d = lo * (hi / lo).powf(k as f64 / 30.0);
            let v = radial_log_quadrature(
                d,
                hi,
                |r| {
                    let s = TriangularS::from_coords(sig, &[r]);
                    (-s.norm() * s.norm()).exp()
                },
                300,
            );
            ((1.0 / d).ln(), v)
        })
        .collect();
    let (w, h) = (480.0, 320.0);
    let xmax = points.iter().map(|(x, _)| *x).fold(f64::MIN, f64::max);
    let xmin = points.iter().map(|(x, _)| *x).fold(f64::MAX, f64::min);
    let ymax = points.iter().map(|(_, y)| *y).fold(f64::MIN, f64::max);
    let path: Vec<String> = points
        .iter()
        .map(|(x, y)| {
            let px = 40.0 + (x - xmin) / (xmax - xmin) * (w - 80.0);
            let py = h - 40.0 - y / ymax * (h - 80.0);
            format!("{px:.1},{py:.1}")
        })
        .collect();
    let svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"{}\"/>\
         <text x=\"{}\" y=\"{}\" font-size=\"12\">truncated radial integral vs log(1/delta)</text>\
         </svg>",
        path.join(" "),
        40,
        20,
    );
    fs::write(dir.join("radial_growth.svg"), svg).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (cfg, suite) = match build_config(&args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        vec![suite.as_str()]
    };
    let mut reports = Vec::new();
    for name in names {
        match run_suite(name, &cfg) {
            Ok(rep) => {
                for row in &rep.rows {
                    println!(
                        "[{}] {:<40} estimate {:>12.5e}  {}",
                        rep.suite, row.check, row.estimate, row.verdict
                    );
                }
                reports.push(rep);
            }
            Err(e) => {
                eprintln!("suite '{name}' failed to run: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if let Some(dir) = &args.out_dir {
        if let Err(e) = write_reports(dir, &reports) {
            eprintln!("report write error: {e}");
            return ExitCode::from(2);
        }
        if reports.iter().any(|r| r.suite == "special") {
            if let Err(e) = write_growth_plot(dir, &cfg) {
                eprintln!("plot write error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.suite.as_str())
        .collect();
    if failed.is_empty() {
        println!("all suites passed");
        ExitCode::SUCCESS
    } else {
        eprintln!("failed suites: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
