//! The `catq` command line.
//!
//! Exit codes: 0 success, 1 diagnostics, 2 resource limit, 3 inconsistent
//! instance.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dsl::printer::{mapping_text, schema_text};
use crate::dsl::render::{csv_table, tables};
use crate::dsl::{
    load, render_model, Diagnostic, DiagnosticKind, ElabOptions, Environment, Format, Outcome,
};
use crate::matcher::{match_mapping, match_span, MatchResult, SimilarityConfig};
use crate::migrate::{invert_mapping, InversionBounds};
use crate::term::SaturationLimits;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_RESOURCE_LIMIT: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "catq",
    version,
    about = "Schemas, instances and functorial data migration"
)]
pub struct Cli {
    /// Most congruence classes per sort during saturation.
    #[arg(
        long,
        global = true,
        env = "CATQ_MAX_CLASSES",
        default_value_t = 10_000
    )]
    pub max_classes: usize,

    /// Most saturation rounds.
    #[arg(long, global = true, default_value_t = 1_000)]
    pub max_rounds: usize,

    /// Report progress on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a program.
    Check { file: PathBuf },
    /// Evaluate a program and print its instances as tables.
    Eval {
        file: PathBuf,
        /// Instance to print; repeatable. Defaults to every instance.
        #[arg(long)]
        show: Vec<String>,
        #[arg(long, default_value = "markdown", value_parser = parse_format)]
        format: Format,
    },
    /// Propose a mapping, or a span, between two schemas of a program.
    Match(MatchArgs),
    /// Search for the inverse of a mapping.
    Invert {
        #[arg(long)]
        mapping: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 1_000_000)]
        candidate_cap: usize,
        file: PathBuf,
    },
    /// Write every instance of a program to a directory.
    Export {
        file: PathBuf,
        #[arg(long, default_value = "json", value_parser = parse_format)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long)]
    pub source: String,
    #[arg(long)]
    pub target: String,
    /// Build a span of projections instead of a single mapping.
    #[arg(long)]
    pub span: bool,
    #[arg(long, default_value_t = 0.5)]
    pub cutoff: f64,
    #[arg(long)]
    pub case_sensitive: bool,
    pub file: PathBuf,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

/// Runs the command line on `args` (program name first) with the process's
/// standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_DIAGNOSTICS
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    execute(&cli, out, err)
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    verbose: bool,
}

impl Ctx<'_> {
    fn fail(&mut self, message: impl std::fmt::Display, code: i32) -> i32 {
        let _ = writeln!(self.err, "error: {message}");
        code
    }

    fn error_code(&mut self, e: &Error) -> i32 {
        let code = if e.is_resource_limit() {
            EXIT_RESOURCE_LIMIT
        } else {
            EXIT_DIAGNOSTICS
        };
        self.fail(e, code)
    }

    /// Loads and elaborates `file`; diagnostics are printed and turned into
    /// an exit code.
    fn load(&mut self, file: &Path, opts: &ElabOptions) -> Result<Environment, i32> {
        let src = fs::read_to_string(file).map_err(|e| {
            self.fail(
                format!("cannot read {}: {e}", file.display()),
                EXIT_DIAGNOSTICS,
            )
        })?;
        let (env, diags) = load(&src, &file.display().to_string(), opts);
        if self.verbose {
            let _ = writeln!(
                self.err,
                "{}: {} object(s), {} diagnostic(s)",
                file.display(),
                env.names().count(),
                diags.len()
            );
        }
        if diags.is_empty() {
            return Ok(env);
        }
        for d in &diags {
            let _ = writeln!(self.err, "{d}");
        }
        Err(diagnostics_code(&diags))
    }

    fn collisions(&mut self, env: &Environment) -> i32 {
        let mut code = EXIT_OK;
        for (name, inst) in env.instances() {
            if let Some(c) = inst.model.collision() {
                let _ = writeln!(self.err, "{name}: inconsistent: {c}");
                code = EXIT_INCONSISTENT;
            }
        }
        code
    }
}

fn diagnostics_code(diags: &[Diagnostic]) -> i32 {
    if diags
        .iter()
        .any(|d| d.kind == DiagnosticKind::ResourceLimit)
    {
        EXIT_RESOURCE_LIMIT
    } else {
        EXIT_DIAGNOSTICS
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut ctx = Ctx {
        out,
        err,
        verbose: cli.verbose,
    };
    let limits = match SaturationLimits::new(cli.max_classes, cli.max_rounds) {
        Ok(l) => l,
        Err(e) => return ctx.error_code(&e),
    };
    let mut opts = ElabOptions {
        limits,
        inversion: InversionBounds {
            limits,
            ..InversionBounds::default()
        },
        matcher: SimilarityConfig::default(),
    };
    match &cli.command {
        Command::Check { file } => match ctx.load(file, &opts) {
            Ok(env) => ctx.collisions(&env),
            Err(code) => code,
        },
        Command::Eval { file, show, format } => {
            let env = match ctx.load(file, &opts) {
                Ok(env) => env,
                Err(code) => return code,
            };
            let code = eval(&mut ctx, &env, show, *format);
            if code != EXIT_OK {
                return code;
            }
            ctx.collisions(&env)
        }
        Command::Match(args) => {
            opts.matcher = match SimilarityConfig::new(args.cutoff) {
                Ok(c) => SimilarityConfig {
                    case_sensitive: args.case_sensitive,
                    ..c
                },
                Err(e) => return ctx.error_code(&e),
            };
            let env = match ctx.load(&args.file, &opts) {
                Ok(env) => env,
                Err(code) => return code,
            };
            let (Some(s), Some(t)) = (env.schema(&args.source), env.schema(&args.target)) else {
                return ctx.fail(
                    format!(
                        "`{}` and `{}` must both be schemas",
                        args.source, args.target
                    ),
                    EXIT_DIAGNOSTICS,
                );
            };
            let result = if args.span {
                match_span(s, t, &opts.matcher)
            } else {
                match_mapping(s, t, &opts.matcher)
            };
            match result {
                Ok(r) => print_match(&mut ctx, &r),
                Err(e) => ctx.error_code(&e),
            }
        }
        Command::Invert {
            mapping,
            depth,
            candidate_cap,
            file,
        } => {
            let env = match ctx.load(file, &opts) {
                Ok(env) => env,
                Err(code) => return code,
            };
            let Some(f) = env.mapping(mapping) else {
                return ctx.fail(format!("`{mapping}` is not a mapping"), EXIT_DIAGNOSTICS);
            };
            let bounds = InversionBounds {
                depth: *depth,
                candidate_cap: *candidate_cap,
                limits,
            };
            match invert_mapping(f, bounds) {
                Ok(Some(g)) => {
                    let _ = ctx.out.write_all(mapping_text(&g).as_bytes());
                    EXIT_OK
                }
                Ok(None) => {
                    let _ = writeln!(
                        ctx.out,
                        "// `{mapping}` has no inverse within depth {depth}"
                    );
                    EXIT_OK
                }
                Err(e) => ctx.error_code(&e),
            }
        }
        Command::Export { file, format, out } => {
            let env = match ctx.load(file, &opts) {
                Ok(env) => env,
                Err(code) => return code,
            };
            match export(&env, *format, out) {
                Ok(paths) => {
                    for p in paths {
                        let _ = writeln!(ctx.out, "{}", p.display());
                    }
                    ctx.collisions(&env)
                }
                Err(e) => ctx.fail(
                    format!("cannot write to {}: {e}", out.display()),
                    EXIT_DIAGNOSTICS,
                ),
            }
        }
    }
}

fn eval(ctx: &mut Ctx<'_>, env: &Environment, show: &[String], format: Format) -> i32 {
    let names: Vec<&str> = if show.is_empty() {
        env.instances().map(|(n, _)| n).collect()
    } else {
        show.iter().map(String::as_str).collect()
    };
    let mut shown = Vec::new();
    for n in &names {
        match env.instance(n) {
            Some(i) => shown.push((*n, i)),
            None => return ctx.fail(format!("`{n}` is not an instance"), EXIT_DIAGNOSTICS),
        }
    }
    let text = match (format, shown.as_slice()) {
        (_, [(_, one)]) => render_model(&one.model, format),
        (Format::Json, many) => {
            let obj: serde_json::Map<String, serde_json::Value> = many
                .iter()
                .map(|(n, i)| (n.to_string(), crate::dsl::render::json_value(&i.model)))
                .collect();
            let mut t = serde_json::to_string_pretty(&obj).expect("json values serialize");
            t.push('\n');
            t
        }
        (_, many) => many
            .iter()
            .map(|(n, i)| format!("# {n}\n\n{}", render_model(&i.model, format)))
            .collect::<Vec<_>>()
            .join("\n"),
    };
    let _ = ctx.out.write_all(text.as_bytes());
    if show.is_empty() && format != Format::Json {
        for o in &env.outcomes {
            let _ = ctx.out.write_all(outcome_text(o).as_bytes());
        }
    }
    EXIT_OK
}

fn outcome_text(o: &Outcome) -> String {
    match o {
        Outcome::Check { name, collision } => match collision {
            Some(c) => format!("\n// check {name}: {c}\n"),
            None => format!("\n// check {name}: ok\n"),
        },
        Outcome::Match { result, .. } => format!("\n{}", match_text(result)),
        Outcome::Invert { mapping, inverse } => match inverse {
            Some(g) => format!("\n{}", mapping_text(g)),
            None => format!("\n// `{mapping}` has no inverse within the search bounds\n"),
        },
    }
}

fn match_text(r: &MatchResult) -> String {
    match r {
        MatchResult::Candidate(c) => {
            let mut text = mapping_text(&c.mapping);
            for a in &c.scores {
                match a.score {
                    Some(s) => text.push_str(&format!("// {} -> {} ({s:.3})\n", a.from, a.to)),
                    None => text.push_str(&format!("// {} -> {} (shortest path)\n", a.from, a.to)),
                }
            }
            match &c.validation_error {
                None => text.push_str("// validated\n"),
                Some(e) => text.push_str(&format!("// not valid: {e}\n")),
            }
            text
        }
        MatchResult::Span(s) => {
            if s.is_empty() {
                return "// empty apex: no pair of entities is similar enough\n".into();
            }
            let mut text = schema_text(&s.apex);
            text.push_str(&mapping_text(&s.left));
            text.push_str(&mapping_text(&s.right));
            for a in &s.scores {
                text.push_str(&format!(
                    "// {} ~ {} ({:.3})\n",
                    a.from,
                    a.to,
                    a.score.unwrap_or(0.0)
                ));
            }
            text
        }
    }
}

fn print_match(ctx: &mut Ctx<'_>, r: &MatchResult) -> i32 {
    let _ = ctx.out.write_all(match_text(r).as_bytes());
    match r {
        MatchResult::Candidate(c) if !c.validated => EXIT_DIAGNOSTICS,
        _ => EXIT_OK,
    }
}

fn export(env: &Environment, format: Format, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, inst) in env.instances() {
        match format {
            Format::Csv => {
                for t in tables(&inst.model) {
                    let p = dir.join(format!("{name}.{}.csv", t.entity));
                    fs::write(&p, csv_table(&t))?;
                    written.push(p);
                }
            }
            Format::Json | Format::Markdown => {
                let ext = if format == Format::Json { "json" } else { "md" };
                let p = dir.join(format!("{name}.{ext}"));
                fs::write(&p, render_model(&inst.model, format))?;
                written.push(p);
            }
        }
    }
    Ok(written)
}
