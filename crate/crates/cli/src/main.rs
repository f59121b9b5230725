//! Command-line front end: parse graph description files (or generate seeded
//! instances) and run the analyses, with matching text and JSON output.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use ordgraph::blocks::{blocks, center_block_check};
use ordgraph::eccentricity::{ecc_report, eccentricity, family_eccentricity};
use ordgraph::gen::{gen_random, Profile};
use ordgraph::geodesic::{distance, family_distance, geodesic};
use ordgraph::graph::{expand_probe, parse, render, Graph, Probe, RailSide};
use ordgraph::sections::{sections, spectrum_check};
use ordgraph::tree::{build_h, classify_center, correspondence_check, reduce_to_tree};
use ordgraph::{Error, Result};

#[derive(Parser)]
#[command(name = "ordgraph", about = "exact ordinal metrics on transfinite graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Where the graph comes from: a description file, or a seeded generator.
#[derive(Args)]
struct Input {
    /// graph description file
    path: Option<String>,
    /// generate the input instead of reading a file
    #[arg(long)]
    seed: Option<u64>,
    /// generator profile (with --seed): pristine | cycle_free
    #[arg(long, default_value = "pristine")]
    profile: String,
}

impl Input {
    fn load(&self) -> Result<Graph> {
        match (&self.path, self.seed) {
            (Some(p), None) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {}", p, e)))?;
                parse(&text)
            }
            (None, Some(seed)) => gen_random(seed, self.profile.parse::<Profile>()?),
            _ => Err(Error::Parse("give either a file or --seed, not both".into())),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a graph description
    Validate(Input),
    /// Exact distance between two named nodes, or to a family
    Dist {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// also print a geodesic witness path
        #[arg(long)]
        witness: bool,
    },
    /// Eccentricity of one node or family
    Ecc {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        node: Option<String>,
        #[arg(long)]
        family: Option<String>,
    },
    /// Full eccentricity report: radius, diameter, center, periphery
    Report(Input),
    /// List the rho-sections (default rho = rank - 1)
    Sections {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rho: Option<u32>,
        /// also run the eccentricity-spectrum laws (pristine graphs)
        #[arg(long)]
        spectrum: bool,
    },
    /// Block decomposition and cut nodes at the top rank
    Blocks {
        #[command(flatten)]
        input: Input,
        /// also check that the center lies in one block
        #[arg(long)]
        check_center: bool,
    },
    /// Reduce a cycle-free graph to its finite tree
    Reduce(Input),
    /// Append the two endless-path stars to every top-rank node
    AugmentH(Input),
    /// Name a gadget-interior node and print the expanded graph
    Probe {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        gadget: String,
        #[arg(long)]
        index: u64,
        #[arg(long)]
        name: String,
        /// ladder rail: a | b
        #[arg(long)]
        rail: Option<String>,
    },
}

fn color_enabled() -> bool {
    std::env::var("ORDGRAPH_COLOR").map(|v| v == "1").unwrap_or(false)
}

/// Text mode prints `key: value` lines from the same values JSON carries.
fn print_text(v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    let bold = color_enabled();
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if bold { format!("\x1b[1m{}\x1b[0m", k) } else { k.clone() };
                match v {
                    Value::Object(_) | Value::Array(_) if !flat(v) => {
                        println!("{}{}:", pad, key);
                        print_text(v, indent + 1);
                    }
                    _ => println!("{}{}: {}", pad, key, scalar(v)),
                }
            }
        }
        Value::Array(a) => {
            for v in a {
                if flat(v) {
                    println!("{}- {}", pad, scalar(v));
                } else {
                    println!("{}-", pad);
                    print_text(v, indent + 1);
                }
            }
        }
        _ => println!("{}{}", pad, scalar(v)),
    }
}

fn flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !matches!(x, Value::Object(_) | Value::Array(_))),
        Value::Object(_) => false,
        _ => true,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(scalar).collect::<Vec<_>>().join(", "),
        other => other.to_string(),
    }
}

fn emit(fmt: Format, v: Value) {
    match fmt {
        Format::Json => println!("{}", serde_json::to_string_pretty(&v).unwrap()),
        Format::Text => print_text(&v, 0),
    }
}

fn run(cli: Cli) -> Result<()> {
    let fmt = cli.format;
    match cli.cmd {
        Cmd::Validate(input) => {
            let g = input.load()?;
            let pristine = g.pristine_check();
            emit(
                fmt,
                json!({
                    "graph": g.name,
                    "rank": g.rank,
                    "nodes": g.nodes.len(),
                    "gadgets": g.gadgets.len(),
                    "pristine": pristine.all,
                    "warnings": g.warnings,
                    "ok": true,
                }),
            );
        }
        Cmd::Dist { input, from, to, witness } => {
            let g = input.load()?;
            if to.ends_with("[*]") {
                let fd = family_distance(&g, &from, &to)?;
                let branches: Vec<String> =
                    fd.branches.iter().map(|b| b.to_string()).collect();
                emit(
                    fmt,
                    json!({
                        "from": from, "family": to,
                        "branches": branches,
                        "value_at_1": fd.value_at(1).to_string(),
                    }),
                );
            } else {
                let d = distance(&g, &from, &to)?;
                if fmt == Format::Text && !witness {
                    println!("{}", d);
                } else {
                    let mut obj = Map::new();
                    obj.insert("distance".into(), json!(d.to_string()));
                    if witness {
                        let p = geodesic(&g, &from, &to)?;
                        let ids: Vec<&str> =
                            p.nodes.iter().map(|n| n.id.as_str()).collect();
                        obj.insert("witness".into(), json!(ids));
                    }
                    emit(fmt, Value::Object(obj));
                }
            }
        }
        Cmd::Ecc { input, node, family } => {
            let g = input.load()?;
            match (node, family) {
                (Some(x), None) => {
                    let (e, w) = eccentricity(&g, &x)?;
                    emit(fmt, json!({ "ecc": e.to_string(), "witness": w }));
                }
                (None, Some(f)) => {
                    let e = family_eccentricity(&g, &f)?;
                    emit(fmt, json!({ "ecc": e.to_string() }));
                }
                _ => return Err(Error::Parse("give exactly one of --node/--family".into())),
            }
        }
        Cmd::Report(input) => {
            let g = input.load()?;
            let r = ecc_report(&g)?;
            let nodes: Vec<Value> = r
                .nodes
                .iter()
                .map(|n| json!({"id": n.id, "ecc": n.ecc.to_string(), "witness": n.witness}))
                .collect();
            let families: Vec<Value> = r
                .families
                .iter()
                .map(|(id, e)| json!({"id": id, "ecc": e.to_string()}))
                .collect();
            emit(
                fmt,
                json!({
                    "nodes": nodes,
                    "families": families,
                    "radius": r.radius.to_string(),
                    "diameter": r.diameter.to_string(),
                    "center": r.center,
                    "periphery": r.periphery,
                }),
            );
        }
        Cmd::Sections { input, rho, spectrum } => {
            let g = input.load()?;
            let rho = rho.unwrap_or_else(|| g.rank.saturating_sub(1));
            let secs = sections(&g, rho)?;
            let items: Vec<Value> = secs
                .iter()
                .map(|s| {
                    let name = |ns: &[usize]| -> Vec<String> {
                        ns.iter().map(|&i| g.nodes[i].id.clone()).collect()
                    };
                    json!({
                        "gadgets": s.gadgets.iter().map(|&i| g.gadgets[i].id.clone()).collect::<Vec<_>>(),
                        "internal": name(&s.internal),
                        "bordering": name(&s.bordering),
                        "boundary": name(&s.boundary),
                        "end": s.end,
                    })
                })
                .collect();
            let mut obj = Map::new();
            obj.insert("rho".into(), json!(rho));
            obj.insert("sections".into(), json!(items));
            if spectrum {
                let rep = spectrum_check(&g)?;
                obj.insert(
                    "spectrum".into(),
                    json!({
                        "pass": rep.pass,
                        "m": rep.m,
                        "multipliers": rep.spectrum,
                        "failures": rep.failures,
                    }),
                );
            }
            emit(fmt, Value::Object(obj));
        }
        Cmd::Blocks { input, check_center } => {
            let g = input.load()?;
            let bs = blocks(&g)?;
            let items: Vec<Value> = bs
                .blocks
                .iter()
                .map(|b| {
                    json!({
                        "gadgets": b.gadgets.iter().map(|&i| g.gadgets[i].id.clone()).collect::<Vec<_>>(),
                        "nodes": b.nodes.iter().map(|&i| g.nodes[i].id.clone()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let cuts: Vec<String> =
                bs.cut_nodes.iter().map(|&i| g.nodes[i].id.clone()).collect();
            let mut obj = Map::new();
            obj.insert("blocks".into(), json!(items));
            obj.insert("cut_nodes".into(), json!(cuts));
            if check_center {
                let c = center_block_check(&g)?;
                obj.insert(
                    "center_in_one_block".into(),
                    json!({ "pass": c.pass, "block": c.block, "center": c.center }),
                );
            }
            emit(fmt, Value::Object(obj));
        }
        Cmd::Reduce(input) => {
            let g = input.load()?;
            let t = reduce_to_tree(&g)?;
            let dsl = render(&t.to_graph()?)?;
            let nodes: Vec<Value> = t
                .nodes
                .iter()
                .map(|n| json!({"id": n.id, "kind": format!("{:?}", n.kind), "represents": n.represents}))
                .collect();
            let chk = correspondence_check(&g, &t)?;
            let form = classify_center(&g)?;
            emit(
                fmt,
                json!({
                    "tree": dsl.trim_end(),
                    "nodes": nodes,
                    "correspondence": chk.pass,
                    "center_form": form.tag().to_string(),
                    "center": form.members(),
                }),
            );
        }
        Cmd::AugmentH(input) => {
            let g = input.load()?;
            let h = build_h(&g)?;
            emit_dsl(fmt, &h)?;
        }
        Cmd::Probe { input, gadget, index, name, rail } => {
            let g = input.load()?;
            let rail = match rail.as_deref() {
                None => None,
                Some("a") => Some(RailSide::A),
                Some("b") => Some(RailSide::B),
                Some(x) => return Err(Error::Parse(format!("bad rail `{}`", x))),
            };
            let g2 = expand_probe(&g, &Probe { gadget, rail, index, name })?;
            emit_dsl(fmt, &g2)?;
        }
    }
    Ok(())
}

fn emit_dsl(fmt: Format, g: &Graph) -> Result<()> {
    let dsl = render(g)?;
    match fmt {
        Format::Text => print!("{}", dsl),
        Format::Json => emit(fmt, json!({ "graph": dsl.trim_end() })),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            if e.is_parse() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
