//! Command dispatch for the `backcoind` binary, kept in a library so tests can
//! drive it without spawning processes.
//!
//! Exit codes: 0 holds or certified, 1 refuted, 2 bounded or unknown,
//! 3 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use backcoind::affine::Valuation;
use backcoind::dollar::escalation_report;
use backcoind::dot::to_dot;
use backcoind::dsl::{self, ParseError};
use backcoind::equilibria::{check_nash, check_sgpe, default_depth_bound, NashVerdict, Refutation, SgpeVerdict};
use backcoind::evaluation::{chosen_path, utility, PathEnd, UtilityResult};
use backcoind::finite::{truncate, TruncationPolicy};
use backcoind::model::{unroll, AgentId, Graph, PrefOrder, ProfileInstance, Unrolled};
use backcoind::trees::{builtin_tree, is_infinite, BuiltinTree};
use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_BOUNDED: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "backcoind", version, about = "Check equilibria of infinite strategy profiles")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide an equilibrium property.
    Check {
        #[command(subcommand)]
        what: CheckCmd,
    },
    /// Utility of an agent along the recorded choices.
    Eval {
        file: PathBuf,
        #[arg(long)]
        agent: String,
        /// Concrete step index; symbolic in `n` when omitted.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Expand the root a number of node layers.
    Unroll {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Step index of the root definition; defaults to the file's root.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Write a Graphviz rendering to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// A `leaf { ... }` file whose utilities replace every hole.
        #[arg(long)]
        pad: Option<PathBuf>,
    },
    /// Infiniteness of the built-in lazy trees.
    Trees { which: TreeArg },
    /// The dollar auction.
    Dollar {
        #[command(subcommand)]
        what: DollarCmd,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCmd {
    /// Subgame perfection, certified for every step index.
    Sgpe {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = PrefArg::Lo)]
        pref: PrefArg,
        #[arg(long)]
        json: bool,
    },
    /// Nash equilibrium at a concrete step, by bounded deviation search.
    Nash {
        file: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Deepest path position an edit may sit at, plus one.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value_t = PrefArg::Lo)]
        pref: PrefArg,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand, Debug)]
enum DollarCmd {
    /// The three escalation results for a given object value.
    Report {
        #[arg(long)]
        v: i64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PrefArg {
    /// Lower is better (costs).
    Lo,
    /// Higher is better (payoffs).
    Hi,
}

impl From<PrefArg> for PrefOrder {
    fn from(p: PrefArg) -> Self {
        match p {
            PrefArg::Lo => PrefOrder::LowerIsBetter,
            PrefArg::Hi => PrefOrder::HigherIsBetter,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TreeArg {
    Zig,
    Zag,
    Backbone,
}

impl From<TreeArg> for BuiltinTree {
    fn from(t: TreeArg) -> Self {
        match t {
            TreeArg::Zig => BuiltinTree::Zig,
            TreeArg::Zag => BuiltinTree::Zag,
            TreeArg::Backbone => BuiltinTree::Backbone,
        }
    }
}

/// Errors that end a command with exit code 3.
#[derive(Debug)]
enum InputError {
    Io(PathBuf, std::io::Error),
    Parse(PathBuf, ParseError),
    Param(String),
    Core(backcoind::Error),
    Json(serde_json::Error),
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            InputError::Parse(p, e) => write!(f, "{}:{e}", p.display()),
            InputError::Param(s) => write!(f, "bad --param `{s}`: expected NAME=INTEGER"),
            InputError::Core(e) => write!(f, "{e}"),
            InputError::Json(e) => write!(f, "{e}"),
        }
    }
}

impl From<backcoind::Error> for InputError {
    fn from(e: backcoind::Error) -> Self {
        InputError::Core(e)
    }
}

impl From<serde_json::Error> for InputError {
    fn from(e: serde_json::Error) -> Self {
        InputError::Json(e)
    }
}

type CmdResult = Result<(i32, String), InputError>;

fn load(path: &Path) -> Result<Graph, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError::Io(path.to_path_buf(), e))?;
    let sys = dsl::parse(&text).map_err(|e| InputError::Parse(path.to_path_buf(), e))?;
    Ok(Graph::new(sys)?)
}

fn parse_params(raw: &[String]) -> Result<Valuation, InputError> {
    raw.iter()
        .map(|s| {
            let (k, v) = s.split_once('=').ok_or_else(|| InputError::Param(s.clone()))?;
            let v: i64 = v.trim().parse().map_err(|_| InputError::Param(s.clone()))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_HOLDS,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match dispatch(cli.cmd) {
        Ok((code, stdout)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn dispatch(cmd: Cmd) -> CmdResult {
    match cmd {
        Cmd::Check {
            what: CheckCmd::Sgpe { file, pref, json },
        } => cmd_sgpe(&file, pref.into(), json),
        Cmd::Check {
            what:
                CheckCmd::Nash {
                    file,
                    n,
                    params,
                    depth,
                    pref,
                    json,
                },
        } => cmd_nash(&file, n, &params, depth, pref.into(), json),
        Cmd::Eval { file, agent, n } => cmd_eval(&file, &agent, n),
        Cmd::Unroll {
            file,
            depth,
            n,
            params,
            dot,
            pad,
        } => cmd_unroll(&file, depth, n, &params, dot.as_deref(), pad.as_deref()),
        Cmd::Trees { which } => {
            let r = is_infinite(&builtin_tree(which.into()));
            let code = if r.root { EXIT_HOLDS } else { EXIT_REFUTED };
            Ok((code, format!("infinite: {}\n", r.root)))
        }
        Cmd::Dollar {
            what: DollarCmd::Report { v, json },
        } => {
            let r = escalation_report(v)?;
            let code = if r.reproduced { EXIT_HOLDS } else { EXIT_BOUNDED };
            let text = if json {
                serde_json::to_string_pretty(&r)? + "\n"
            } else {
                format!("{r}\n")
            };
            Ok((code, text))
        }
    }
}

fn cmd_sgpe(file: &Path, pref: PrefOrder, json: bool) -> CmdResult {
    let g = load(file)?;
    let verdict = check_sgpe(&g, pref)?;
    let code = match &verdict {
        SgpeVerdict::Certified(_) => EXIT_HOLDS,
        SgpeVerdict::Refuted(_) => EXIT_REFUTED,
        SgpeVerdict::Inconclusive(_) => EXIT_BOUNDED,
    };
    if json {
        return Ok((code, serde_json::to_string_pretty(&verdict)? + "\n"));
    }
    let mut out = String::new();
    match &verdict {
        SgpeVerdict::Certified(c) => {
            let _ = writeln!(out, "sgpe: certified for every n >= 0 ({} retraction rounds)", c.rounds);
            for line in c.describe() {
                let _ = writeln!(out, "  {line}");
            }
        }
        SgpeVerdict::Refuted(Refutation::NotAlwaysLeadsToLeaf { label }) => {
            let _ = writeln!(out, "sgpe: refuted, play from {label} never reaches a leaf");
        }
        SgpeVerdict::Refuted(Refutation::LocalFailure {
            first_retracted,
            label,
            n,
            params,
            agent,
            chosen,
            alternative,
            ..
        }) => {
            let ps: String = params.iter().map(|(k, v)| format!(", {k} = {v}")).collect();
            let _ = writeln!(
                out,
                "sgpe: refuted at {label} (n = {n}{ps}): {agent} gets {chosen} but the other branch gives {alternative}"
            );
            let _ = writeln!(out, "  first retracted: {first_retracted}");
        }
        SgpeVerdict::Inconclusive(c) => {
            let _ = writeln!(out, "sgpe: inconclusive, the root claim was retracted without a reachable failure");
            for line in c.describe() {
                let _ = writeln!(out, "  {line}");
            }
        }
    }
    Ok((code, out))
}

fn cmd_nash(file: &Path, n: u64, params: &[String], depth: Option<usize>, pref: PrefOrder, json: bool) -> CmdResult {
    let g = load(file)?;
    let values = parse_params(params)?;
    let bound = depth.unwrap_or_else(|| default_depth_bound(&g));
    let root = g.system().root.def.clone();
    let verdict = check_nash(&g, &ProfileInstance::concrete(root.clone(), n), pref, bound, &values)?;
    let code = match &verdict {
        NashVerdict::NotNash(_) => EXIT_REFUTED,
        NashVerdict::NashUpToDepth { exhaustive: true, .. } | NashVerdict::VacuouslyNash => EXIT_HOLDS,
        NashVerdict::NashUpToDepth { exhaustive: false, .. } => EXIT_BOUNDED,
    };
    if json {
        return Ok((code, serde_json::to_string_pretty(&verdict)? + "\n"));
    }
    let out = match &verdict {
        NashVerdict::NotNash(w) => {
            let mut s = format!(
                "nash: refuted at {root}({n}): {} gets {} instead of {}\n",
                w.agent, w.deviation, w.original
            );
            for e in &w.edits {
                let _ = writeln!(s, "  edit at path depth {}: {}@{} -> {}", e.depth, e.label, e.n, e.choice);
            }
            let _ = writeln!(s, "  reaches {}@{}", w.leaf.label, w.leaf.n);
            s
        }
        NashVerdict::NashUpToDepth { exhaustive: true, .. } => {
            format!("nash: holds at {root}({n}); every deviation was explored\n")
        }
        NashVerdict::NashUpToDepth { depth, exhaustive: false } => {
            format!("nash: no improving deviation up to depth {depth} (bounded, not a proof)\n")
        }
        NashVerdict::VacuouslyNash => format!("nash: vacuous, play from {root}({n}) never reaches a leaf\n"),
    };
    Ok((code, out))
}

fn cmd_eval(file: &Path, agent: &str, n: Option<u64>) -> CmdResult {
    let g = load(file)?;
    let root = g.system().root.def.clone();
    let inst = match n {
        Some(n) => ProfileInstance::concrete(root, n),
        None => ProfileInstance::symbolic(root, 0),
    };
    let agent = AgentId::new(agent);
    let u = utility(&g, &inst, &agent)?;
    let path = chosen_path(&g, &inst)?;
    let mut out = String::new();
    for s in &path.steps {
        let _ = writeln!(out, "{} {} {} (+{})", s.label, s.agent, s.choice, s.shift);
    }
    match &path.end {
        PathEnd::Leaf { label, shift, .. } => {
            let _ = writeln!(out, "{label} leaf (+{shift})");
        }
        PathEnd::DivergenceCycle { label } => {
            let _ = writeln!(out, "cycle back to {label}");
        }
    }
    Ok(match u {
        UtilityResult::Defined(e) => {
            let _ = writeln!(out, "utility of {agent}: {e}");
            (EXIT_HOLDS, out)
        }
        UtilityResult::Diverges => {
            let _ = writeln!(out, "utility of {agent}: diverges");
            (EXIT_REFUTED, out)
        }
    })
}

fn render(t: &Unrolled, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    let site = t.site();
    match t {
        Unrolled::Leaf { payoff, .. } => {
            let body: Vec<String> = payoff.iter().map(|(a, u)| format!("{a}: {u}")).collect();
            let _ = writeln!(out, "{pad}{{{}}} [{}@{}]", body.join(", "), site.label, site.n);
        }
        Unrolled::Hole(_) => {
            let _ = writeln!(out, "{pad}... [{}@{}]", site.label, site.n);
        }
        Unrolled::Node {
            agent,
            choice,
            left,
            right,
            ..
        } => {
            let _ = writeln!(out, "{pad}{agent} {choice} [{}@{}]", site.label, site.n);
            render(left, indent + 1, out);
            render(right, indent + 1, out);
        }
    }
}

fn cmd_unroll(
    file: &Path,
    depth: usize,
    n: Option<u64>,
    params: &[String],
    dot: Option<&Path>,
    pad: Option<&Path>,
) -> CmdResult {
    let g = load(file)?;
    let values = parse_params(params)?;
    let root = g.system().root.clone();
    let inst = ProfileInstance::concrete(root.def.clone(), n.unwrap_or(root.n0));
    let tree = unroll(&g, &inst, depth, &values)?;
    if let Some(path) = dot {
        std::fs::write(path, to_dot(&tree)).map_err(|e| InputError::Io(path.to_path_buf(), e))?;
    }
    let mut out = String::new();
    match pad {
        None => render(&tree, 0, &mut out),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| InputError::Io(p.to_path_buf(), e))?;
            let padding = dsl::parse_leaf(&text).map_err(|e| InputError::Parse(p.to_path_buf(), e))?;
            let mut sys = g.system().clone();
            sys.root.n0 = inst_n(&inst);
            let cut = truncate(&Graph::new(sys)?, &TruncationPolicy { depth, padding }, &values)?;
            let _ = writeln!(out, "{cut}");
        }
    }
    Ok((EXIT_HOLDS, out))
}

fn inst_n(i: &ProfileInstance) -> u64 {
    match i.n {
        backcoind::model::StepIndex::Concrete(n) | backcoind::model::StepIndex::AtLeast(n) => n,
    }
}
