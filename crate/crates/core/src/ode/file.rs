//! The problem file format. See `docs/problem-format.md` for the grammar.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Location, Result};
use crate::expr::{parse_at, Expr};
use crate::numeric::{Valuation, Value, ValueVector};

use super::aux::{parse_aux_at, AuxDef, AuxExpr, AuxFn};
use super::eval::{Budget, EvalTrace, Evaluator};
use super::problem::{f_name, h_name, y_name, Driver, LOdeProblem};

/// How to evaluate a problem file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Naive,
    Compressed,
    LengthOde,
    Guarded(Budget),
}

/// A parsed problem file: the problem plus how user arguments map to
/// `(x, y)` and how the solution maps to the printed result.
pub struct OdeFile {
    problem: LOdeProblem,
    args: Vec<String>,
    bind: Option<(AuxExpr, Vec<AuxExpr>)>,
    output: Option<Expr>,
}

const MAX_NESTING: usize = 16;

fn no_files(path: &str) -> Result<Arc<OdeFile>> {
    Err(Error::InvalidInput(format!(
        "cannot open nested problem `{path}` from an in-memory source"
    )))
}

struct Entry {
    lhs: String,
    rhs: String,
    at: Location,
}

enum Section {
    Line(String, Location),
    Block(Vec<Entry>, Location),
}

impl OdeFile {
    /// Assembles a file from parts. Without `bind`, the arguments are `x`
    /// followed by the parameters.
    pub fn new(
        problem: LOdeProblem,
        args: Option<Vec<String>>,
        bind: Option<(AuxExpr, Vec<AuxExpr>)>,
        output: Option<Expr>,
    ) -> Result<OdeFile> {
        let args = args.unwrap_or_else(|| default_args(problem.params()));
        if let Some((_, ys)) = &bind {
            if ys.len() != problem.params() {
                return Err(Error::InvalidProblem(format!(
                    "bind defines {} parameters, problem has {}",
                    ys.len(),
                    problem.params()
                )));
            }
        } else if args.len() != problem.params() + 1 {
            return Err(Error::InvalidProblem(
                "custom arguments need a bind section".into(),
            ));
        }
        Ok(OdeFile {
            problem,
            args,
            bind,
            output,
        })
    }

    pub fn parse(text: &str) -> Result<OdeFile> {
        Self::parse_with(text, &no_files)
    }

    /// Reads a file; nested `ode("...")` paths are relative to its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<OdeFile> {
        load_nested(path.as_ref(), 0)
    }

    pub fn parse_with(text: &str, loader: &dyn Fn(&str) -> Result<Arc<OdeFile>>) -> Result<OdeFile> {
        let sections = split_sections(text)?;
        let line = |name: &str| -> Option<(&str, Location)> {
            match sections.get(name) {
                Some(Section::Line(s, at)) => Some((s.as_str(), *at)),
                _ => None,
            }
        };
        let block = |name: &str| -> &[Entry] {
            match sections.get(name) {
                Some(Section::Block(e, _)) => e,
                _ => &[],
            }
        };
        let count = |name: &str, default: Option<usize>| -> Result<usize> {
            match line(name) {
                Some((s, at)) => s
                    .parse()
                    .map_err(|_| Error::syntax(at.line, at.column, format!("`{name}` needs a number"))),
                None => default.ok_or_else(|| Error::InvalidProblem(format!("missing `{name}` section"))),
            }
        };
        let dim = count("dim", None)?;
        let params = count("params", Some(0))?;

        let driver = match line("driver") {
            None => Driver::Length,
            Some(("length", _)) => Driver::Length,
            Some((s, at)) => match s.strip_prefix("scan:") {
                Some(rest) => {
                    let offset = s.len() - rest.len();
                    let at = Location {
                        line: at.line,
                        column: at.column + offset,
                    };
                    Driver::Scan(Arc::new(AuxDef::parse(rest, params, at, loader)?))
                }
                None => {
                    return Err(Error::syntax(
                        at.line,
                        at.column,
                        "driver must be `length` or `scan: <expr>`",
                    ))
                }
            },
        };

        let init = component_entries(block("init"), dim, "init")?
            .into_iter()
            .map(|e| Ok(Arc::new(AuxDef::parse(&e.rhs, params, e.at, loader)?) as Arc<dyn AuxFn>))
            .collect::<Result<Vec<_>>>()?;

        let mut aux: Vec<(String, Arc<dyn AuxFn>)> = Vec::new();
        for e in block("aux") {
            if !is_plain_name(&e.lhs) {
                return Err(Error::syntax(e.at.line, 1, format!("bad auxiliary name `{}`", e.lhs)));
            }
            aux.push((e.lhs.clone(), Arc::new(AuxDef::parse(&e.rhs, params, e.at, loader)?)));
        }

        let aux_names: Vec<String> = aux.iter().map(|(n, _)| h_name(n)).collect();
        let rhs_known = |n: &str| {
            n == "x" || is_indexed(n, "f.", dim) || is_indexed(n, "y.", params) || aux_names.iter().any(|a| a == n)
        };
        let rhs = component_entries(block("rhs"), dim, "rhs")?
            .into_iter()
            .map(|e| parse_at(&e.rhs, e.at, &rhs_known))
            .collect::<Result<Vec<_>>>()?;

        let problem = LOdeProblem::builder(dim)
            .params(params)
            .driver(driver)
            .init(init)
            .rhs(rhs)
            .aux_list(aux)
            .build()?;

        let args = match line("args") {
            Some((s, at)) => {
                let names: Vec<String> = s.split_whitespace().map(str::to_string).collect();
                if let Some(bad) = names.iter().find(|n| !is_plain_name(n)) {
                    return Err(Error::syntax(at.line, at.column, format!("bad argument name `{bad}`")));
                }
                Some(names)
            }
            None => None,
        };
        let bind = match (&args, sections.get("bind")) {
            (Some(names), Some(Section::Block(entries, at))) => {
                Some(parse_bind(entries, *at, names, params, loader)?)
            }
            (Some(_), _) => return Err(Error::InvalidProblem("`args` needs a `bind` section".into())),
            (None, Some(Section::Block(_, at))) => {
                return Err(Error::syntax(at.line, at.column, "`bind` needs an `args` line"))
            }
            (None, _) => None,
        };

        let output = match line("output") {
            Some((s, at)) => {
                let known = |n: &str| n == "x" || is_indexed(n, "f.", dim) || is_indexed(n, "y.", params);
                Some(parse_at(s, at, &known)?)
            }
            None => None,
        };

        OdeFile::new(problem, args, bind, output)
    }

    pub fn problem(&self) -> &LOdeProblem {
        &self.problem
    }

    pub fn args(&self) -> &[String] {
        &self.args
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Maps user arguments to the evaluation index and parameters.
    pub fn bind_args(&self, args: &[Value], ev: &Evaluator) -> Result<(Value, Vec<Value>)> {
        if args.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: args.len(),
            });
        }
        match &self.bind {
            None => Ok((args[0].clone(), args[1..].to_vec())),
            Some((x, ys)) => Ok((
                x.eval(args, ev)?,
                ys.iter().map(|e| e.eval(args, ev)).collect::<Result<_>>()?,
            )),
        }
    }

    /// Applies the `output` expression, if any, to a solution value.
    pub fn project(&self, f: ValueVector, x: &Value, y: &[Value]) -> Result<ValueVector> {
        let Some(out) = &self.output else {
            return Ok(f);
        };
        let mut env = Valuation::new();
        env.set("x", x.clone());
        for (k, v) in y.iter().enumerate() {
            env.set(y_name(k), v.clone());
        }
        for (i, v) in f.iter().enumerate() {
            env.set(f_name(i), v.clone());
        }
        Ok(ValueVector::scalar(out.eval(&env)?))
    }

    /// Binds, evaluates in the given mode and projects. Compressed and
    /// guarded evaluation also return their trace.
    pub fn run(&self, ev: &Evaluator, args: &[Value], mode: &Mode) -> Result<(ValueVector, Option<EvalTrace>)> {
        let (x, y) = self.bind_args(args, ev)?;
        let (f, trace) = match mode {
            Mode::Naive => (ev.naive(&self.problem, &x, &y)?, None),
            Mode::LengthOde => (ev.length_ode(&self.problem, &x, &y)?, None),
            Mode::Compressed => {
                let (f, t) = ev.compressed_traced(&self.problem, &x, &y)?;
                (f, Some(t))
            }
            Mode::Guarded(budget) => {
                let (f, t) = ev.guarded(&self.problem, &x, &y, budget.clone())?;
                (f, Some(t))
            }
        };
        Ok((self.project(f, &x, &y)?, trace))
    }

    /// Compressed evaluation without a trace.
    pub fn evaluate(&self, ev: &Evaluator, args: &[Value]) -> Result<ValueVector> {
        let (x, y) = self.bind_args(args, ev)?;
        let f = ev.compressed(&self.problem, &x, &y)?;
        self.project(f, &x, &y)
    }

    /// Writes the file back out. Fails when a component was given as a
    /// closure rather than an expression.
    pub fn render(&self) -> Result<String> {
        let p = &self.problem;
        let text = |h: &Arc<dyn AuxFn>, what: &str| {
            h.render()
                .ok_or_else(|| Error::InvalidProblem(format!("{what} has no textual form")))
        };
        let mut out = String::new();
        let _ = writeln!(out, "dim: {}", p.dim());
        let _ = writeln!(out, "params: {}", p.params());
        match p.driver() {
            Driver::Length => out.push_str("driver: length\n"),
            Driver::Scan(l) => {
                let _ = writeln!(out, "driver: scan: {}", text(l, "driver")?);
            }
        }
        if let Some((x, ys)) = &self.bind {
            let _ = writeln!(out, "args: {}", self.args.join(" "));
            out.push_str("bind:\n");
            let _ = writeln!(out, "  x = {x}");
            for (k, e) in ys.iter().enumerate() {
                let _ = writeln!(out, "  {} = {e}", y_name(k));
            }
        }
        out.push_str("init:\n");
        for (i, g) in p.init().iter().enumerate() {
            let _ = writeln!(out, "  {} = {}", f_name(i), text(g, "initial value")?);
        }
        if !p.aux().is_empty() {
            out.push_str("aux:\n");
            for (name, h) in p.aux() {
                let _ = writeln!(out, "  {name} = {}", text(h, "auxiliary function")?);
            }
        }
        out.push_str("rhs:\n");
        for (i, u) in p.rhs().iter().enumerate() {
            let _ = writeln!(out, "  {} = {u}", f_name(i));
        }
        if let Some(o) = &self.output {
            let _ = writeln!(out, "output: {o}");
        }
        Ok(out)
    }
}

fn default_args(params: usize) -> Vec<String> {
    std::iter::once("x".to_string()).chain((0..params).map(y_name)).collect()
}

fn load_nested(path: &Path, depth: usize) -> Result<OdeFile> {
    if depth > MAX_NESTING {
        return Err(Error::InvalidProblem(format!(
            "nested problems deeper than {MAX_NESTING} at `{}`",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let dir: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loader = move |rel: &str| -> Result<Arc<OdeFile>> { Ok(Arc::new(load_nested(&dir.join(rel), depth + 1)?)) };
    OdeFile::parse_with(&text, &loader)
}

fn is_plain_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_indexed(name: &str, prefix: &str, bound: usize) -> bool {
    name.strip_prefix(prefix)
        .and_then(|k| k.parse::<usize>().ok())
        .is_some_and(|k| k < bound && name == format!("{prefix}{k}"))
}

/// Strips a trailing comment, ignoring `#` inside string literals.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn column_of(line: &str, sub: &str) -> usize {
    let offset = sub.as_ptr() as usize - line.as_ptr() as usize;
    line[..offset].chars().count() + 1
}

const SECTIONS: [&str; 9] = ["dim", "params", "driver", "args", "output", "init", "aux", "rhs", "bind"];
const BLOCKS: [&str; 4] = ["init", "aux", "rhs", "bind"];

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = strip_comment(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let header = trimmed
            .split_once(':')
            .filter(|(name, _)| is_plain_name(name.trim_end()) && !name.contains('='));
        if let Some((name, rest)) = header {
            let name = name.trim_end();
            let at = Location {
                line: line_no,
                column: column_of(raw, trimmed),
            };
            if !SECTIONS.contains(&name) {
                return Err(Error::syntax(at.line, at.column, format!("unknown section `{name}`")));
            }
            if sections.contains_key(name) {
                return Err(Error::syntax(at.line, at.column, format!("duplicate section `{name}`")));
            }
            let value = rest.trim();
            if BLOCKS.contains(&name) {
                if !value.is_empty() {
                    return Err(Error::syntax(at.line, at.column, format!("`{name}:` starts a block; put entries on the following lines")));
                }
                sections.insert(name.to_string(), Section::Block(Vec::new(), at));
                current = Some(name.to_string());
            } else {
                if value.is_empty() {
                    return Err(Error::syntax(at.line, at.column, format!("`{name}` needs a value")));
                }
                let at = Location {
                    line: line_no,
                    column: column_of(raw, value),
                };
                sections.insert(name.to_string(), Section::Line(value.to_string(), at));
                current = None;
            }
            continue;
        }
        let at = Location {
            line: line_no,
            column: column_of(raw, trimmed),
        };
        let Some(Section::Block(entries, _)) = current.as_ref().and_then(|c| sections.get_mut(c)) else {
            return Err(Error::syntax(at.line, at.column, "entry outside of a block section"));
        };
        let Some((lhs, rhs)) = trimmed.split_once('=') else {
            return Err(Error::syntax(at.line, at.column, "expected `name = expression`"));
        };
        let rhs_text = rhs.trim();
        if rhs_text.is_empty() {
            return Err(Error::syntax(at.line, at.column, "missing expression after `=`"));
        }
        entries.push(Entry {
            lhs: lhs.trim().to_string(),
            rhs: rhs_text.to_string(),
            at: Location {
                line: line_no,
                column: column_of(raw, rhs_text),
            },
        });
    }
    Ok(sections)
}

/// Orders `f.i = ...` entries by component, requiring each exactly once.
fn component_entries<'a>(entries: &'a [Entry], dim: usize, what: &str) -> Result<Vec<&'a Entry>> {
    let mut slots: Vec<Option<&Entry>> = vec![None; dim];
    for e in entries {
        let idx = (0..dim).find(|&i| e.lhs == f_name(i)).ok_or_else(|| {
            Error::syntax(e.at.line, 1, format!("`{}` is not a component of dimension {dim}", e.lhs))
        })?;
        if slots[idx].replace(e).is_some() {
            return Err(Error::syntax(e.at.line, 1, format!("`{}` defined twice in `{what}`", e.lhs)));
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| Error::InvalidProblem(format!("`{what}` is missing `{}`", f_name(i)))))
        .collect()
}

fn parse_bind(
    entries: &[Entry],
    at: Location,
    args: &[String],
    params: usize,
    loader: &dyn Fn(&str) -> Result<Arc<OdeFile>>,
) -> Result<(AuxExpr, Vec<AuxExpr>)> {
    let resolve = |n: &str| args.iter().position(|a| a == n);
    let mut x = None;
    let mut ys: Vec<Option<AuxExpr>> = (0..params).map(|_| None).collect();
    for e in entries {
        let expr = parse_aux_at(&e.rhs, e.at, &resolve, loader)?;
        let slot = if e.lhs == "x" {
            &mut x
        } else if let Some(k) = (0..params).find(|&k| e.lhs == y_name(k)) {
            &mut ys[k]
        } else {
            return Err(Error::syntax(e.at.line, 1, format!("cannot bind `{}`", e.lhs)));
        };
        if slot.replace(expr).is_some() {
            return Err(Error::syntax(e.at.line, 1, format!("`{}` bound twice", e.lhs)));
        }
    }
    let missing = |n: String| Error::syntax(at.line, at.column, format!("`bind` is missing `{n}`"));
    let x = x.ok_or_else(|| missing("x".into()))?;
    let ys = ys
        .into_iter()
        .enumerate()
        .map(|(k, e)| e.ok_or_else(|| missing(y_name(k))))
        .collect::<Result<Vec<_>>>()?;
    Ok((x, ys))
}
