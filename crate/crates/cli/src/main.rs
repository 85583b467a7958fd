use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracpow::config::MatrixConfig;
use fracpow::config::Model;
use fracpow::{
    approximate_element, certify, circulant_power_element, convergence_table,
    dispersion_integral_element, lattice_spec, local_solve, truncation_depth, Complex64,
    DriverLimits, Error, LatticeModelParams, Window,
};

const REFERENCE_POINTS: usize = 1 << 20;

#[derive(Parser)]
#[command(name = "fracpow", version, about = "Certified matrix elements of real powers of infinite sparse Hermitian matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate (W^alpha)[m][n] on growing windows until the bound is below --tol
    Approx {
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Largest window dimension P + Q + 1
        #[arg(long, default_value_t = 2049)]
        max_dim: usize,
    },
    /// Evaluate (W^alpha)[m][n] on each listed window and print a CSV table
    Table {
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        /// Comma-separated windows: `R` for P = Q = R, or `P:Q`
        #[arg(long, value_delimiter = ',', required = true)]
        windows: Vec<String>,
    },
    /// Print the exactness depth and tail bound for one window without evaluating the power
    Bound {
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long)]
        p: i64,
        #[arg(long)]
        q: i64,
    },
    /// Solve W x = f locally for the listed output indices
    Solve {
        config: PathBuf,
        /// File of `index, re[, im]` lines; `#` starts a comment
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        out: Vec<i64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 2049)]
        max_dim: usize,
    },
    /// Convergence of the periodic lattice model against its dispersion integral
    Example {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        /// Comma-separated window dimensions N = P + Q + 1
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<i64>,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
    },
}

enum Failure {
    Input(String),
    NotConverged,
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 3,
            Failure::NotConverged => 2,
            Failure::Numerical(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericalFailure(_) | Error::BudgetExceeded { .. } => Failure::Numerical(e.to_string()),
            Error::NotConverged { .. } => Failure::NotConverged,
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn load(path: &Path) -> Result<Model, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let config = MatrixConfig::from_json(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(config.build()?)
}

fn check_finite(name: &str, x: f64) -> Result<(), Failure> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("--{name} must be finite, got {x}")))
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("--tol must be positive, got {tol}")))
    }
}

fn limits(max_dim: usize) -> DriverLimits {
    DriverLimits { max_dim, ..DriverLimits::default() }
}

fn parse_window(s: &str) -> Result<Window, Failure> {
    let bad = || Failure::Input(format!("--windows: cannot parse `{s}`, expected R or P:Q"));
    let s = s.trim();
    let window = match s.split_once(':') {
        Some((p, q)) => Window::new(
            p.trim().parse().map_err(|_| bad())?,
            q.trim().parse().map_err(|_| bad())?,
        ),
        None => Window::symmetric(s.parse().map_err(|_| bad())?),
    };
    window.map_err(|e| Failure::Input(format!("--windows: {e}")))
}

fn parse_rhs(path: &Path) -> Result<BTreeMap<i64, Complex64>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut rhs = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Failure::Input(format!("{}:{}: {what}", path.display(), lineno + 1));
        let fields: Vec<&str> = line
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(bad("expected `index, re[, im]`"));
        }
        let index: i64 = fields[0].parse().map_err(|_| bad("index is not an integer"))?;
        let re: f64 = fields[1].parse().map_err(|_| bad("real part is not a number"))?;
        let im: f64 = match fields.get(2) {
            Some(f) => f.parse().map_err(|_| bad("imaginary part is not a number"))?,
            None => 0.0,
        };
        if !(re.is_finite() && im.is_finite()) {
            return Err(bad("value must be finite"));
        }
        if rhs.insert(index, Complex64::new(re, im)).is_some() {
            return Err(bad("duplicate index"));
        }
    }
    Ok(rhs)
}

fn approx(config: &Path, alpha: f64, m: i64, n: i64, tol: f64, max_dim: usize) -> Result<String, Failure> {
    check_finite("alpha", alpha)?;
    check_tol(tol)?;
    let model = load(config)?;
    match approximate_element(&model.spec, model.policy.as_ref(), alpha, m, n, tol, &limits(max_dim)) {
        Ok(cert) => Ok(cert.to_json() + "\n"),
        Err(Error::NotConverged { best }) => {
            println!("{}", best.to_json());
            eprintln!("fracpow: bound {:e} did not reach tolerance {tol:e} within dimension {max_dim}", best.bound);
            Err(Failure::NotConverged)
        }
        Err(e) => Err(e.into()),
    }
}

fn table(config: &Path, alpha: f64, m: i64, n: i64, windows: &[String]) -> Result<String, Failure> {
    check_finite("alpha", alpha)?;
    let windows = windows.iter().map(|s| parse_window(s)).collect::<Result<Vec<_>, _>>()?;
    let model = load(config)?;
    let max_dim = windows.iter().map(Window::dim).max().unwrap_or(1);
    let rows = convergence_table(&model.spec, model.policy.as_ref(), alpha, m, n, &windows, &limits(max_dim));
    let mut out = String::from("P,Q,value_re,value_im,j_pq,bound\n");
    let mut first_failure = None;
    for row in rows {
        let (p, q) = (row.window.p(), row.window.q());
        match row.outcome {
            Ok(cert) => {
                let depth = if cert.depth.is_unbounded() { "inf".to_string() } else { cert.depth.j_pq.to_string() };
                let _ = writeln!(out, "{p},{q},{},{},{depth},{}", num(cert.value.re), num(cert.value.im), num(cert.bound));
            }
            Err(e) => {
                eprintln!("fracpow: window P = {p}, Q = {q}: {e}");
                let _ = writeln!(out, "{p},{q},NaN,NaN,,NaN");
                first_failure.get_or_insert(Failure::from(e));
            }
        }
    }
    match first_failure {
        None => Ok(out),
        Some(f) => {
            print!("{out}");
            Err(f)
        }
    }
}

fn bound(config: &Path, alpha: f64, m: i64, n: i64, p: i64, q: i64) -> Result<String, Failure> {
    check_finite("alpha", alpha)?;
    let window = Window::new(p, q)?;
    let model = load(config)?;
    let depth = truncation_depth(&model.spec, window, m, n)?;
    let cert = certify(Complex64::default(), alpha, model.spec.envelope(), depth)?;
    let j = if depth.is_unbounded() { "inf".to_string() } else { depth.j_pq.to_string() };
    Ok(format!("P,Q,j_pq,bound\n{p},{q},{j},{}\n", num(cert.bound)))
}

fn solve(config: &Path, rhs: &Path, out_indices: &[i64], tol: f64, max_dim: usize) -> Result<String, Failure> {
    check_tol(tol)?;
    let rhs = parse_rhs(rhs)?;
    let model = load(config)?;
    let solution = local_solve(&model.spec, model.policy.as_ref(), &rhs, out_indices, tol, &limits(max_dim))?;
    let mut out = String::from("index,value_re,value_im,bound\n");
    for &k in out_indices {
        let e = &solution[&k];
        let _ = writeln!(out, "{k},{},{},{}", num(e.value.re), num(e.value.im), num(e.bound));
    }
    Ok(out)
}

fn example(a: f64, b: f64, alpha: f64, sizes: &[i64], m: i64, n: i64) -> Result<String, Failure> {
    check_finite("alpha", alpha)?;
    let params = LatticeModelParams::new(a, b)?;
    let spec = lattice_spec(params);
    let reference = dispersion_integral_element(params, alpha, m, n, REFERENCE_POINTS)?;
    let mut out = String::from("N,value,reference,abs_error,bound\n");
    for &size in sizes {
        if size < 2 {
            return Err(Failure::Input(format!("--sizes: window dimension {size} is below 2")));
        }
        let p = (size - 1) / 2;
        let window = Window::new(p, size - 1 - p)?;
        let value = circulant_power_element(window, params, alpha, m, n)?;
        let depth = truncation_depth(&spec, window, m, n)?;
        let cert = certify(Complex64::new(value, 0.0), alpha, spec.envelope(), depth)?;
        let _ = writeln!(
            out,
            "{size},{},{},{},{}",
            num(value),
            num(reference),
            num((value - reference).abs()),
            num(cert.bound)
        );
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Approx { config, alpha, m, n, tol, max_dim } => approx(&config, alpha, m, n, tol, max_dim),
        Command::Table { config, alpha, m, n, windows } => table(&config, alpha, m, n, &windows),
        Command::Bound { config, alpha, m, n, p, q } => bound(&config, alpha, m, n, p, q),
        Command::Solve { config, rhs, out, tol, max_dim } => solve(&config, &rhs, &out, tol, max_dim),
        Command::Example { a, b, alpha, sizes, m, n } => example(a, b, alpha, &sizes, m, n),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::Input(msg) | Failure::Numerical(msg) => eprintln!("fracpow: {msg}"),
                Failure::NotConverged => {}
            }
            ExitCode::from(f.code())
        }
    }
}
