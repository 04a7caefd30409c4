//! The `credit-ledger` command line.
//!
//! Exit codes: 0 success, 1 domain error (validation, duplicate, cycle,
//! unknown product), 2 I/O or usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::engine::{aggregate_rank, transitive_credit, EngineError, PropagationOptions, RankScope};
use crate::graph::{build_graph, CreditGraph, NodeKind};
use crate::jsonld::{parse_creditmap, ParseMode};
use crate::model::{validate_creditmap, EntityId};
use crate::registry::{Registry, RegistryError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_IO: u8 = 2;

pub const REGISTRY_ENV: &str = "CREDIT_LEDGER_HOME";
pub const DEFAULT_REGISTRY: &str = ".credit-ledger";

#[derive(Debug, Parser)]
#[command(name = "credit-ledger", version, about = "Register creditmaps and compute transitive credit")]
struct Cli {
    /// Registry directory.
    #[arg(long, global = true, env = REGISTRY_ENV, default_value = DEFAULT_REGISTRY)]
    registry: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate creditmap files without registering them.
    Validate {
        /// Reject keys and @type values outside the document profile.
        #[arg(long)]
        strict: bool,
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Validate and register creditmap files.
    Ingest {
        /// Replace already registered products.
        #[arg(long)]
        force: bool,
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Transitive credit allocation of one product.
    Credit {
        #[arg(long)]
        product: EntityId,
        /// Print only this entity's share.
        #[arg(long)]
        entity: Option<EntityId>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_depth: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Credit totals across the registry.
    Rank {
        #[arg(long, value_enum, default_value_t = Scope::All)]
        scope: Scope,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_depth: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Export the credit graph.
    Graph {
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
    },
    /// Registered products.
    List {
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
    },
    /// Rebuild index.tsv from the stored documents.
    Reindex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scope {
    All,
    Roots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Dot,
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_IO
                }
            };
        }
    };
    let mut ctx = Context { out, err };
    let result = match cli.command {
        Command::Validate { strict, paths } => ctx.validate(&paths, strict),
        Command::Ingest { force, paths } => ctx.ingest(&cli.registry, &paths, force),
        Command::Credit { product, entity, max_depth, format } => {
            ctx.credit(&cli.registry, &product, entity.as_ref(), depth(max_depth), format)
        }
        Command::Rank { scope, max_depth, format } => {
            let scope = match scope {
                Scope::All => RankScope::AllProducts,
                Scope::Roots => RankScope::RootsOnly,
            };
            ctx.rank(&cli.registry, scope, depth(max_depth), format)
        }
        Command::Graph { format: GraphFormat::Dot } => ctx.graph(&cli.registry),
        Command::List { format } => ctx.list(&cli.registry, format),
        Command::Reindex => ctx.reindex(&cli.registry),
    };
    result.unwrap_or(EXIT_IO)
}

fn depth(max_depth: Option<u64>) -> PropagationOptions {
    max_depth
        .and_then(|d| PropagationOptions::with_max_depth(usize::try_from(d).unwrap_or(usize::MAX)))
        .unwrap_or_default()
}

/// Fixed-point rendering with 12 significant digits.
pub fn format_fraction(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.11}", x);
    }
    let sci = format!("{:.11e}", x);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (11 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

fn write_json(out: &mut dyn Write, value: &serde_json::Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)
}

/// Domain failures while loading the corpus, already reported to stderr.
struct Reported(u8);

struct Context<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Context<'_> {
    fn registry_error(&mut self, e: &RegistryError) -> io::Result<u8> {
        writeln!(self.err, "{}: {e}", e.code())?;
        Ok(match e {
            RegistryError::Storage(_) => EXIT_IO,
            _ => EXIT_DOMAIN,
        })
    }

    fn load_graph(&mut self, root: &Path) -> io::Result<Result<CreditGraph, Reported>> {
        let maps = match Registry::open(root).and_then(|r| r.load_all()) {
            Ok(maps) => maps,
            Err(e) => return Ok(Err(Reported(self.registry_error(&e)?))),
        };
        match build_graph(&maps) {
            Ok(g) => {
                for w in g.warnings() {
                    writeln!(self.err, "warning: {w}")?;
                }
                Ok(Ok(g))
            }
            Err(e) => {
                writeln!(self.err, "{}: {e}", e.code())?;
                Ok(Err(Reported(EXIT_DOMAIN)))
            }
        }
    }

    fn validate(&mut self, paths: &[PathBuf], strict: bool) -> io::Result<u8> {
        let mode = if strict { ParseMode::Strict } else { ParseMode::Lenient };
        let mut code = EXIT_OK;
        for path in paths {
            let shown = path.display();
            let bytes = match fs::read(path) {
                Ok(b) => b,
                Err(e) => {
                    writeln!(self.err, "{shown}:IoError:{e}")?;
                    code = EXIT_IO;
                    continue;
                }
            };
            match parse_creditmap(&bytes, mode) {
                Err(e) => {
                    writeln!(self.out, "{shown}:{}:{e}", e.code())?;
                    code = code.max(EXIT_DOMAIN);
                }
                Ok((map, warnings)) => {
                    for w in &warnings {
                        writeln!(self.out, "{shown}:{}:{w}", w.code.as_str())?;
                    }
                    let violations = validate_creditmap(&map);
                    for v in &violations {
                        writeln!(self.out, "{shown}:{}:{}", v.code, v.message)?;
                    }
                    if !violations.is_empty() {
                        code = code.max(EXIT_DOMAIN);
                    }
                }
            }
        }
        Ok(code)
    }

    fn ingest(&mut self, root: &Path, paths: &[PathBuf], force: bool) -> io::Result<u8> {
        let mut registry = match Registry::open(root) {
            Ok(r) => r,
            Err(e) => return self.registry_error(&e),
        };
        let mut code = EXIT_OK;
        for path in paths {
            let shown = path.display();
            let bytes = match fs::read(path) {
                Ok(b) => b,
                Err(e) => {
                    writeln!(self.err, "{shown}:IoError:{e}")?;
                    code = EXIT_IO;
                    continue;
                }
            };
            match registry.ingest(&bytes, force) {
                Ok(done) => {
                    for w in &done.warnings {
                        writeln!(self.err, "{shown}:{}:{w}", w.code.as_str())?;
                    }
                    let verb = if done.replaced { "replaced" } else { "registered" };
                    writeln!(self.out, "{verb} {}", done.id)?;
                }
                Err(RegistryError::ValidationFailed(violations)) => {
                    for v in &violations {
                        writeln!(self.err, "{shown}:{}:{}", v.code, v.message)?;
                    }
                    code = code.max(EXIT_DOMAIN);
                }
                Err(e) => {
                    writeln!(self.err, "{shown}:{}:{e}", e.code())?;
                    let c = if matches!(e, RegistryError::Storage(_)) { EXIT_IO } else { EXIT_DOMAIN };
                    code = code.max(c);
                }
            }
        }
        Ok(code)
    }

    fn credit(
        &mut self,
        root: &Path,
        product: &EntityId,
        entity: Option<&EntityId>,
        opts: PropagationOptions,
        format: OutputFormat,
    ) -> io::Result<u8> {
        let g = match self.load_graph(root)? {
            Ok(g) => g,
            Err(Reported(code)) => return Ok(code),
        };
        let alloc = match transitive_credit(&g, product, opts) {
            Ok(a) => a,
            Err(e @ EngineError::UnknownProduct(_)) => {
                writeln!(self.err, "UnknownProduct: {e}")?;
                return Ok(EXIT_DOMAIN);
            }
        };

        match (entity, format) {
            (Some(entity), OutputFormat::Table) => {
                writeln!(self.out, "{}", format_fraction(alloc.share(entity)))?;
            }
            (Some(entity), OutputFormat::Json) => {
                let doc = json!({
                    "product": alloc.product,
                    "entity": entity,
                    "share": alloc.share(entity),
                    "truncated_at": alloc.truncated_at,
                });
                write_json(self.out, &doc)?;
            }
            (None, OutputFormat::Table) => {
                let rows = alloc.ranked();
                let width = rows.iter().map(|(id, _)| id.to_string().chars().count()).max().unwrap_or(0);
                for (id, share) in rows {
                    writeln!(self.out, "{:<width$}  {}", id.to_string(), format_fraction(share))?;
                }
            }
            (None, OutputFormat::Json) => {
                let shares: Vec<_> = alloc
                    .ranked()
                    .into_iter()
                    .map(|(id, share)| {
                        let kind = g.node(&id).map(|n| n.kind);
                        json!({ "entity": id, "kind": kind, "share": share })
                    })
                    .collect();
                let doc = json!({
                    "product": alloc.product,
                    "truncated_at": alloc.truncated_at,
                    "total": alloc.total(),
                    "shares": shares,
                });
                write_json(self.out, &doc)?;
            }
        }
        Ok(EXIT_OK)
    }

    fn rank(&mut self, root: &Path, scope: RankScope, opts: PropagationOptions, format: OutputFormat) -> io::Result<u8> {
        let g = match self.load_graph(root)? {
            Ok(g) => g,
            Err(Reported(code)) => return Ok(code),
        };
        let rows = aggregate_rank(&g, scope, opts);
        match format {
            OutputFormat::Table => {
                let width = rows.iter().map(|(id, _)| id.to_string().chars().count()).max().unwrap_or(0);
                let rank_width = rows.len().to_string().len();
                for (i, (id, total)) in rows.iter().enumerate() {
                    writeln!(
                        self.out,
                        "{:>rank_width$} {:<width$} {}",
                        i + 1,
                        id.to_string(),
                        format_fraction(*total)
                    )?;
                }
            }
            OutputFormat::Json => {
                let doc: Vec<_> = rows
                    .iter()
                    .enumerate()
                    .map(|(i, (id, total))| json!({ "rank": i + 1, "entity": id, "total": total }))
                    .collect();
                write_json(self.out, &serde_json::Value::Array(doc))?;
            }
        }
        Ok(EXIT_OK)
    }

    fn graph(&mut self, root: &Path) -> io::Result<u8> {
        let g = match self.load_graph(root)? {
            Ok(g) => g,
            Err(Reported(code)) => return Ok(code),
        };
        self.out.write_all(render_dot(&g).as_bytes())?;
        Ok(EXIT_OK)
    }

    fn list(&mut self, root: &Path, format: OutputFormat) -> io::Result<u8> {
        let rows = match Registry::open(root).and_then(|r| r.list()) {
            Ok(rows) => rows,
            Err(e) => return self.registry_error(&e),
        };
        match format {
            OutputFormat::Table => {
                let width = rows.iter().map(|(id, _)| id.to_string().chars().count()).max().unwrap_or(0);
                for (id, meta) in &rows {
                    writeln!(self.out, "{:<width$}  {}", id.to_string(), meta.headline)?;
                }
            }
            OutputFormat::Json => {
                let doc: Vec<_> = rows
                    .iter()
                    .map(|(id, meta)| {
                        json!({
                            "id": id,
                            "kind": meta.kind,
                            "headline": meta.headline,
                            "date_created": meta.date_created.map(|d| d.to_string()),
                        })
                    })
                    .collect();
                write_json(self.out, &serde_json::Value::Array(doc))?;
            }
        }
        Ok(EXIT_OK)
    }

    fn reindex(&mut self, root: &Path) -> io::Result<u8> {
        let mut registry = match Registry::open(root) {
            Ok(r) => r,
            Err(e) => return self.registry_error(&e),
        };
        match registry.rebuild_index() {
            Ok(()) => {
                writeln!(self.out, "indexed {} product(s)", registry.len())?;
                Ok(EXIT_OK)
            }
            Err(e) => self.registry_error(&e),
        }
    }
}

fn dot_quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                q.push('\\');
                q.push(c);
            }
            '\n' => q.push_str("\\n"),
            _ => q.push(c),
        }
    }
    q.push('"');
    q
}

/// Graphviz rendering: registered products as boxes, people as ellipses,
/// unregistered products as dashed boxes. Nodes and edges sorted by ID.
pub fn render_dot(g: &CreditGraph) -> String {
    if g.nodes().is_empty() {
        return "digraph creditmap {}\n".to_string();
    }
    let mut s = String::from("digraph creditmap {\n");
    for (id, node) in g.nodes() {
        let attrs = match node.kind {
            NodeKind::RegisteredProduct => "shape=box",
            NodeKind::TerminalPerson => "shape=ellipse",
            NodeKind::TerminalProduct => "shape=box, style=dashed",
        };
        s.push_str(&format!("  {} [{attrs}];\n", dot_quote(&id.to_string())));
    }
    let mut edges: Vec<_> = g.all_edges().collect();
    edges.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.target.cmp(&b.1.target)));
    for (src, edge) in edges {
        s.push_str(&format!(
            "  {} -> {} [label=\"{:.4}\"];\n",
            dot_quote(&src.to_string()),
            dot_quote(&edge.target.to_string()),
            edge.weight
        ));
    }
    s.push_str("}\n");
    s
}
