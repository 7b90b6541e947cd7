//! Command-line driver: reads an OPB file, runs the portfolio and reports in
//! the PB-competition output format (`c`, `o`, `s`, `v` lines).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, ensure, Context, Result};
use clap::Parser;

use parpbo_core::{
    assume_and_propagate, brute_force_solve, generate_instance, parse_opb, run_portfolio,
    write_opb, Assignment, GeneratorParams, PboInstance, PoolConfig, PortfolioConfig, ResultRecord,
    RunStatus, ScoreReport, SearchConfig, Var,
};

pub const EXIT_SATISFIABLE: i32 = 10;
pub const EXIT_UNSATISFIABLE: i32 = 20;
pub const EXIT_UNKNOWN: i32 = 0;
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "parpbo",
    version,
    about = "Parallel local search for pseudo-Boolean optimization"
)]
pub struct Args {
    /// OPB instance file.
    #[arg(required_unless_present_any = ["score_report", "generate"])]
    pub instance: Option<PathBuf>,

    /// Number of worker threads.
    #[arg(long, default_value_t = 32)]
    pub threads: usize,

    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub cutoff: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Per-worker step budget; makes single-worker runs reproducible.
    #[arg(long)]
    pub steps: Option<u64>,

    #[arg(long = "pool-size", default_value_t = 18)]
    pub pool_size: usize,

    /// Weight of the objective rank in the pool rating.
    #[arg(long = "p-star", default_value_t = 0.58)]
    pub p_star: f64,

    /// Smoothing factor of the polarity weights.
    #[arg(long, default_value_t = 0.03)]
    pub beta: f64,

    /// Polarity weights are kept within [1 - epsilon, 1 + epsilon].
    #[arg(long, default_value_t = 0.144)]
    pub epsilon: f64,

    /// Steps between updates of the objective ratio.
    #[arg(long = "K", default_value_t = 566_024)]
    pub k: u64,

    /// Steps without improvement before restarting from the pool.
    #[arg(long = "R", default_value_t = 86_295)]
    pub r: u64,

    /// Ratio multiplier.
    #[arg(long, default_value_t = 1.15)]
    pub inc: f64,

    /// Restart from the worker's own best instead of pool solutions.
    #[arg(long = "no-sharing")]
    pub no_sharing: bool,

    /// Ignore pool polarity weights when scoring flips.
    #[arg(long = "no-polarity")]
    pub no_polarity: bool,

    /// Solve exactly by enumeration (at most 24 variables).
    #[arg(long)]
    pub oracle: bool,

    /// Print the instance simplified under a literal such as `x3` or `-x3`.
    #[arg(long = "dump-presolve", value_name = "LIT", allow_hyphen_values = true)]
    pub dump_presolve: Option<String>,

    /// Score CSV result files with columns instance,solver,cost,status[,offset].
    #[arg(long = "score-report", value_name = "FILES", num_args = 1..)]
    pub score_report: Option<Vec<PathBuf>>,

    /// Print a random instance with a planted model instead of solving.
    #[arg(long)]
    pub generate: bool,

    #[arg(long = "gen-vars", default_value_t = 50)]
    pub gen_vars: usize,

    #[arg(long = "gen-constraints", default_value_t = 30)]
    pub gen_constraints: usize,

    #[arg(long = "gen-max-coeff", default_value_t = 10)]
    pub gen_max_coeff: i64,

    #[arg(long = "gen-density", default_value_t = 0.3)]
    pub gen_density: f64,
}

impl Args {
    pub fn portfolio_config(&self) -> Result<PortfolioConfig> {
        ensure!(
            self.cutoff.is_finite() && self.cutoff > 0.0,
            "--cutoff must be a positive number of seconds"
        );
        let cfg = PortfolioConfig {
            num_workers: self.threads,
            cutoff: Some(Duration::from_secs_f64(self.cutoff)),
            max_steps: self.steps,
            seed: self.seed,
            search: SearchConfig {
                ratio_window: self.k,
                restart_after: self.r,
                ratio_inc: self.inc,
                ..SearchConfig::default()
            },
            pool: PoolConfig {
                capacity: self.pool_size,
                p_star: self.p_star,
                beta: self.beta,
                epsilon: self.epsilon,
            },
            target_objective: None,
            sharing: !self.no_sharing,
            polarity: !self.no_polarity,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse `argv` (including the program name) and run. Every protocol line
/// goes to `out`; errors are reported on stderr with exit code 1.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&args, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(out, "c error: {e:#}");
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn dispatch(args: &Args, out: &mut dyn Write) -> Result<i32> {
    if let Some(files) = &args.score_report {
        return score_report(files, out);
    }
    if args.generate {
        return generate(args, out);
    }
    let path = args.instance.as_deref().context("no instance file given")?;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let inst = parse_opb(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    writeln!(
        out,
        "c parpbo {}: {} variables, {} constraints",
        env!("CARGO_PKG_VERSION"),
        inst.num_vars(),
        inst.constraints().len()
    )?;
    if let Some(lit) = &args.dump_presolve {
        return dump_presolve(&inst, lit, out);
    }
    if args.oracle {
        return oracle(&inst, &text, out);
    }
    solve(args, &inst, &text, out)
}

fn solve(args: &Args, inst: &PboInstance, text: &str, out: &mut dyn Write) -> Result<i32> {
    let cfg = args.portfolio_config()?;
    writeln!(
        out,
        "c threads {} cutoff {}s seed {}{}",
        cfg.num_workers,
        args.cutoff,
        cfg.seed,
        args.steps
            .map(|s| format!(" steps {s}"))
            .unwrap_or_default()
    )?;
    out.flush()?;
    let mut write_err = None;
    let result = run_portfolio(inst, &cfg, &mut |s| {
        let r = writeln!(out, "o {}", s.objective).and_then(|_| out.flush());
        if let Err(e) = r {
            write_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    for d in &result.diagnostics {
        writeln!(out, "c {d}")?;
    }
    let steps: u64 = result.workers.iter().map(|w| w.steps).sum();
    let restarts: u64 = result.workers.iter().map(|w| w.restarts).sum();
    writeln!(
        out,
        "c {} steps, {} restarts in {:.3}s",
        steps,
        restarts,
        result.elapsed.as_secs_f64()
    )?;
    match (result.status, &result.best) {
        (RunStatus::FeasibleFound, Some(best)) => {
            let v = v_line(inst, &best.assignment);
            verify_v_line(text, &v, best.objective)?;
            writeln!(out, "s SATISFIABLE")?;
            writeln!(out, "{v}")?;
            Ok(EXIT_SATISFIABLE)
        }
        _ => {
            writeln!(out, "s UNKNOWN")?;
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn oracle(inst: &PboInstance, text: &str, out: &mut dyn Write) -> Result<i32> {
    match brute_force_solve(inst)? {
        Some((a, obj)) => {
            let v = v_line(inst, &a);
            verify_v_line(text, &v, obj)?;
            writeln!(out, "o {obj}")?;
            writeln!(out, "s SATISFIABLE")?;
            writeln!(out, "{v}")?;
            Ok(EXIT_SATISFIABLE)
        }
        None => {
            writeln!(out, "s UNSATISFIABLE")?;
            Ok(EXIT_UNSATISFIABLE)
        }
    }
}

/// `v x1 -x2 ...` for every variable.
pub fn v_line(inst: &PboInstance, a: &Assignment) -> String {
    let mut line = String::from("v");
    for i in 0..inst.num_vars() {
        let v = Var::new(i);
        line.push(' ');
        if !a.get(v) {
            line.push('-');
        }
        line.push_str(inst.name(v));
    }
    line
}

/// Read a `v` line back into an assignment of an instance with `num_vars`
/// variables named `x1..xn`. Unlisted variables are 0.
pub fn parse_v_line(line: &str, num_vars: usize) -> Result<Assignment> {
    let mut rest = line.split_whitespace();
    ensure!(rest.next() == Some("v"), "not a v line: {line:?}");
    let mut a = Assignment::zeros(num_vars);
    for tok in rest {
        let (value, name) = match tok.strip_prefix('-') {
            Some(n) => (false, n),
            None => (true, tok),
        };
        let index: usize = name
            .strip_prefix('x')
            .and_then(|d| d.parse().ok())
            .with_context(|| format!("bad literal {tok:?}"))?;
        ensure!(
            index >= 1 && index <= num_vars,
            "variable {name} out of range"
        );
        a.set(Var::from_opb(index), value);
    }
    Ok(a)
}

/// Re-parse the input and check the `v` line is a model with objective `obj`.
pub fn verify_v_line(text: &str, v: &str, obj: i64) -> Result<()> {
    let fresh = parse_opb(text)?;
    let a = parse_v_line(v, fresh.num_vars())?;
    ensure!(
        fresh.is_feasible(&a),
        "reported solution violates the instance"
    );
    let got = fresh.objective().value(&a);
    ensure!(
        got == obj,
        "reported objective {obj} but the solution evaluates to {got}"
    );
    Ok(())
}

fn parse_literal(inst: &PboInstance, lit: &str) -> Result<(Var, bool)> {
    let (value, name) = match lit.strip_prefix('-').or_else(|| lit.strip_prefix('~')) {
        Some(n) => (false, n),
        None => (true, lit),
    };
    let index: usize = name
        .strip_prefix('x')
        .and_then(|d| d.parse().ok())
        .with_context(|| format!("bad literal {lit:?}, expected e.g. x3 or -x3"))?;
    if index == 0 || index > inst.num_vars() {
        bail!("variable {name} out of range 1..={}", inst.num_vars());
    }
    Ok((Var::from_opb(index), value))
}

fn dump_presolve(inst: &PboInstance, lit: &str, out: &mut dyn Write) -> Result<i32> {
    let (v, value) = parse_literal(inst, lit)?;
    let r = assume_and_propagate(inst, v, value);
    let Some(simplified) = r.simplified() else {
        writeln!(
            out,
            "c {} = {} propagates to a conflict",
            inst.name(v),
            value as u8
        )?;
        return Ok(EXIT_UNKNOWN);
    };
    let fixed: Vec<String> = r
        .fixed()
        .map(|(u, b)| format!("{}{}", if b { "" } else { "-" }, inst.name(u)))
        .collect();
    writeln!(out, "c fixed {}", fixed.join(" "))?;
    writeln!(out, "c objective offset {}", r.objective_offset())?;
    write!(out, "{}", write_opb(simplified))?;
    Ok(EXIT_UNKNOWN)
}

fn generate(args: &Args, out: &mut dyn Write) -> Result<i32> {
    ensure!(args.gen_vars > 0, "--gen-vars must be positive");
    ensure!(args.gen_max_coeff > 0, "--gen-max-coeff must be positive");
    ensure!(
        args.gen_density > 0.0 && args.gen_density <= 1.0,
        "--gen-density must be in (0, 1]"
    );
    let inst = generate_instance(&GeneratorParams {
        num_vars: args.gen_vars,
        num_constraints: args.gen_constraints,
        max_coeff: args.gen_max_coeff,
        density: args.gen_density,
        seed: args.seed,
    })?;
    write!(out, "{}", write_opb(&inst))?;
    Ok(EXIT_UNKNOWN)
}

/// Load result records from CSV files with a header row. The `offset`
/// column is optional and defaults to 0.
pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(ci), Some(cs), Some(cc)) = (col("instance"), col("solver"), col("cost")) else {
        bail!(
            "{}: header must contain instance, solver and cost",
            path.display()
        );
    };
    let (cst, co) = (col("status"), col("offset"));
    let mut records = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let line = row + 2;
        let status = cst.map(field).unwrap_or("");
        let solved = !matches!(
            status.to_ascii_uppercase().as_str(),
            "UNKNOWN" | "UNSATISFIABLE"
        );
        let cost = match field(cc) {
            "" => None,
            c => Some(
                c.parse::<i64>()
                    .with_context(|| format!("{}:{line}: bad cost {c:?}", path.display()))?,
            ),
        }
        .filter(|_| solved);
        let negative_offset = match co.map(field).unwrap_or("") {
            "" => 0,
            o => o
                .parse::<i64>()
                .ok()
                .filter(|&o| o >= 0)
                .with_context(|| format!("{}:{line}: bad offset {o:?}", path.display()))?,
        };
        records.push(ResultRecord {
            instance: field(ci).to_string(),
            solver: field(cs).to_string(),
            cost,
            negative_offset,
        });
    }
    Ok(records)
}

fn score_report(files: &[PathBuf], out: &mut dyn Write) -> Result<i32> {
    let mut records = Vec::new();
    for f in files {
        records.extend(read_results(f)?);
    }
    // sc* needs cost + offset >= 0; the offset may be given on any row of an instance
    let mut offsets: std::collections::HashMap<&str, i64> = Default::default();
    for r in &records {
        let o = offsets.entry(&r.instance).or_default();
        *o = (*o).max(r.negative_offset);
    }
    if let Some(r) = records
        .iter()
        .find(|r| r.cost.is_some_and(|c| c + offsets[r.instance.as_str()] < 0))
    {
        bail!("{}: cost of {} is below -offset", r.instance, r.solver);
    }
    let report = ScoreReport::from_records(&records);
    writeln!(
        out,
        "{:<24} {:>10} {:>6} {:>8}",
        "solver", "avg_sc*", "#win", "solved"
    )?;
    for s in &report.solvers {
        writeln!(
            out,
            "{:<24} {:>10.4} {:>6} {:>8}",
            s.solver, s.avg_score, s.wins, s.solved
        )?;
    }
    writeln!(out, "c {} instances", report.instances.len())?;
    Ok(EXIT_UNKNOWN)
}
