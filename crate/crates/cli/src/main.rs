use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use odecalc::expr::{degree, joint_degree, Expr};
use odecalc::ode::{
    check_linear, iterate_ivp, solve_linear_closed, AuxClosure, Budget, Driver, Evaluator,
    LinearOdeSystem, Mode, OdeFile, DEFAULT_MAX_STEPS,
};
use odecalc::rm::{compile_with_arity, run, RegisterProgram};
use odecalc::stdlib;
use odecalc::{Error, Valuation, Value, ValueVector};

/// Exact evaluation and analysis of discrete ODEs, length-ODEs and
/// register machines.
#[derive(Parser)]
#[command(name = "odecalc", version)]
struct Cli {
    /// Hard cap on the steps of any single evaluation.
    #[arg(long, global = true, env = "ODECALC_MAX_STEPS", default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Degree table and linearity verdict for a problem file.
    Check { file: PathBuf },
    /// Evaluate a problem file.
    Eval(EvalArgs),
    /// Evaluate and print the step trace as JSON.
    Trace {
        file: PathBuf,
        #[arg(value_parser = value, allow_negative_numbers = true)]
        args: Vec<Value>,
        /// Run under the growth guard.
        #[arg(long)]
        guard: bool,
        /// Write the trace here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Solve a problem with driver `scan: x` as a linear ODE in closed form.
    SolveLinear {
        file: PathBuf,
        #[arg(value_parser = value, allow_negative_numbers = true)]
        args: Vec<Value>,
        /// Also iterate step by step and compare.
        #[arg(long)]
        check: bool,
    },
    /// Compile register-machine assembly to a problem file.
    CompileRm {
        asm: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Number of inputs (default: every register but R0).
        #[arg(long)]
        arity: Option<usize>,
        /// Run for (sum of input lengths)^C steps instead of taking a step count.
        #[arg(long, value_name = "C")]
        clock: Option<u32>,
    },
    /// Run register-machine assembly on the simulator.
    RunRm {
        asm: PathBuf,
        #[arg(value_parser = value)]
        inputs: Vec<Value>,
        #[arg(long, default_value_t = 1 << 20)]
        fuel: u64,
    },
    /// The built-in example functions.
    Stdlib {
        #[command(subcommand)]
        command: StdlibCommand,
    },
}

#[derive(Args)]
struct EvalArgs {
    file: PathBuf,
    #[arg(value_parser = value, allow_negative_numbers = true)]
    args: Vec<Value>,
    /// Write the step trace as JSON.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Run under the growth guard.
    #[arg(long)]
    guard: bool,
    /// Fixed budget polynomial coefficients c0,c1,.. in the input length;
    /// implies --guard.
    #[arg(long, value_delimiter = ',', value_name = "C0,C1,..")]
    budget: Option<Vec<u64>>,
    /// Iterate every index instead of jumping.
    #[arg(long, conflicts_with_all = ["guard", "budget", "length_ode"])]
    naive: bool,
    /// Use the length-ODE view (length driver only).
    #[arg(long, conflicts_with_all = ["guard", "budget"])]
    length_ode: bool,
}

#[derive(Subcommand)]
enum StdlibCommand {
    /// List the functions, problem files and programs.
    List,
    /// Run a function and compare with its reference implementation.
    Run {
        name: String,
        #[arg(value_parser = value)]
        args: Vec<Value>,
    },
    /// Print a shipped problem file or program.
    Show { name: String },
}

fn value(s: &str) -> Result<Value, String> {
    Value::parse_literal(s).map_err(|e| e.to_string())
}

/// Exit status 1 for analysis rejections and failed evaluations; 2 for
/// anything malformed.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::NotEssentiallyLinear { .. }
            | Error::GrowthBoundViolated { .. }
            | Error::BudgetExceeded { .. }
            | Error::StepLimit { .. }
            | Error::DivisionByZero
            | Error::NegativeArgument { .. },
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let ev = Evaluator::new(cli.max_steps);
    match cli.command {
        Command::Check { file } => check(&file),
        Command::Eval(args) => eval(&ev, args).map(|()| 0),
        Command::Trace { file, args, guard, out } => {
            let f = OdeFile::load(&file)?;
            let mode = if guard { Mode::Guarded(Budget::Auto) } else { Mode::Compressed };
            let (_, trace) = f.run(&ev, &args, &mode)?;
            let json = trace.expect("compressed runs are traced").to_json();
            write_or_print(out.as_deref(), &json)?;
            Ok(0)
        }
        Command::SolveLinear { file, args, check } => solve(&ev, &file, &args, check).map(|()| 0),
        Command::CompileRm { asm, emit, arity, clock } => {
            let p = load_program(&asm)?;
            let c = compile_with_arity(&p, arity.unwrap_or(p.registers() - 1))?;
            let text = c.to_file(clock)?.render()?;
            write_or_print(emit.as_deref(), &text)?;
            Ok(0)
        }
        Command::RunRm { asm, inputs, fuel } => {
            let p = load_program(&asm)?;
            let out = run(&p, &inputs, fuel)?;
            println!("output: {}", out.output());
            println!("registers: {}", out.registers());
            println!("halted: {}", out.halted);
            println!("steps: {}", out.steps);
            Ok(0)
        }
        Command::Stdlib { command } => stdlib_command(command),
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write `{}`", p.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn load_program(path: &Path) -> Result<RegisterProgram> {
    let text = fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    Ok(text.parse()?)
}

fn print_values(v: &ValueVector) {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    println!("{}", parts.join(" "));
}

fn check(path: &Path) -> Result<u8> {
    let f = OdeFile::load(path)?;
    let p = f.problem();
    let pivots = p.pivots();
    let header: Vec<&str> = pivots.iter().map(String::as_str).collect();
    println!("component  {}  joint", header.join("  "));
    for (i, e) in p.rhs().iter().enumerate() {
        let row: Vec<String> = pivots
            .iter()
            .map(|t| format!("{:<w$}", degree(e, t), w = t.len()))
            .collect();
        println!("{:<9}  {}  {}", pivots[i], row.join("  "), joint_degree(e, &pivots));
    }
    match check_linear(p) {
        Ok(d) => {
            println!("ACCEPT");
            println!("A:");
            for i in 0..d.q1().rows() {
                let row: Vec<String> = d.q1().row(i).iter().map(ToString::to_string).collect();
                println!("  [{}]", row.join(", "));
            }
            println!("B:");
            for e in d.q2() {
                println!("  [{e}]");
            }
            Ok(0)
        }
        Err(Error::NotEssentiallyLinear { entry, term, degree, witness }) => {
            println!("REJECT");
            println!("component {} has degree {degree} in {term}", pivots[entry]);
            println!("witness: {witness}");
            Ok(1)
        }
        Err(e) => Err(e.into()),
    }
}

fn eval(ev: &Evaluator, a: EvalArgs) -> Result<()> {
    let f = OdeFile::load(&a.file)?;
    let mode = match (a.naive, a.length_ode, a.budget, a.guard) {
        (true, ..) => Mode::Naive,
        (_, true, ..) => Mode::LengthOde,
        (_, _, Some(c), _) => Mode::Guarded(Budget::Fixed(c)),
        (_, _, None, true) => Mode::Guarded(Budget::Auto),
        _ => Mode::Compressed,
    };
    let (out, trace) = f.run(ev, &a.args, &mode)?;
    if let Some(path) = &a.trace {
        let Some(trace) = trace else {
            bail!(Error::InvalidInput("this mode keeps no trace".into()));
        };
        fs::write(path, trace.to_json())
            .with_context(|| format!("cannot write `{}`", path.display()))?;
    }
    print_values(&out);
    Ok(())
}

fn is_identity_driver(d: &Driver) -> bool {
    matches!(d, Driver::Scan(l) if l.render().as_deref() == Some("x"))
}

fn solve(ev: &Evaluator, path: &Path, args: &[Value], cross_check: bool) -> Result<()> {
    let f = OdeFile::load(path)?;
    let p = f.problem();
    if !is_identity_driver(p.driver()) {
        bail!(Error::InvalidInput(
            "solve-linear needs an ordinary ODE, `driver: scan: x`".into()
        ));
    }
    let d = check_linear(p)?;
    let (x, y) = f.bind_args(args, ev)?;
    let g = p.initial(&y, ev)?.into_components().into_iter().map(Expr::Const).collect();
    let mut system = LinearOdeSystem::new(g, d.q1().clone(), d.q2().to_vec())?;
    let y = Arc::new(y);
    for (name, h) in p.aux() {
        let (h, y, ev) = (Arc::clone(h), Arc::clone(&y), ev.clone());
        let closure: AuxClosure = Arc::new(move |t: &Value, _: &Valuation| h.eval(t, &y, &ev));
        system = system.with_aux(name.clone(), closure);
    }
    let params = y
        .iter()
        .enumerate()
        .fold(Valuation::new(), |env, (k, v)| env.bind(format!("y.{k}"), v.clone()));
    let solution = solve_linear_closed(&system, &x, &params)?;
    if cross_check {
        let iterated = iterate_ivp(&system.to_ivp(), &x, &params)?;
        if iterated != solution {
            bail!("closed form {solution} differs from iteration {iterated}");
        }
    }
    print_values(&f.project(solution, &x, &y)?);
    Ok(())
}

fn stdlib_command(c: StdlibCommand) -> Result<u8> {
    match c {
        StdlibCommand::List => {
            println!("functions:");
            for p in stdlib::registry() {
                println!("  {:<14} {:<6} {}", p.name, p.args.join(" "), p.summary);
            }
            println!("problems:");
            for (name, _) in stdlib::PROBLEMS {
                println!("  {name}");
            }
            println!("programs:");
            for (name, _) in stdlib::PROGRAMS {
                println!("  {name}");
            }
            Ok(0)
        }
        StdlibCommand::Run { name, args } => {
            let p = stdlib::find(&name)?;
            let out = p.run(&args)?;
            println!("{out}");
            let oracle = p.oracle(&args)?;
            if oracle != out {
                eprintln!("reference gives {oracle}");
                return Ok(1);
            }
            Ok(0)
        }
        StdlibCommand::Show { name } => {
            let text = stdlib::problem_source(&name)
                .or_else(|_| stdlib::PROGRAMS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or(()))
                .map_err(|()| Error::InvalidInput(format!("nothing named `{name}`")))?;
            print!("{text}");
            Ok(0)
        }
    }
}
