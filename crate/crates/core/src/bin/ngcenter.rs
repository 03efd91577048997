use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ngcenter::centerdata::ModularData;
use ngcenter::centersolver::{CenterTriple, TripleJson};
use ngcenter::neargroup::{catalog, near_group_dim};
use ngcenter::pipeline::{self as pl, PipelineConfig, Source, Stage};
use ngcenter::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ngcenter",
    version,
    about = "Near-group centers, condensation and super-modular data"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct SourceArgs {
    /// Catalog instance, e.g. J6_1
    #[arg(long, conflicts_with = "input")]
    instance: Option<String>,
    /// Near-group JSON file
    #[arg(long)]
    input: Option<PathBuf>,
}

impl SourceArgs {
    fn source(&self) -> Result<Source> {
        match (&self.instance, &self.input) {
            (Some(n), None) => Ok(Source::Instance(n.clone())),
            (None, Some(p)) => Ok(Source::Input(p.clone())),
            _ => Err(Error::Invalid("give exactly one of --instance or --input".into())),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// List the built-in near-groups, or export one as JSON
    Catalog {
        #[arg(long)]
        instance: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Solve for the (xi, tau, omega) triples
    Solve {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long, default_value_t = 240)]
        omega_order: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble and verify the center's modular data
    Center {
        #[command(flatten)]
        src: SourceArgs,
        /// Triples from `solve`; solved afresh when absent
        #[arg(long)]
        triples: Option<PathBuf>,
        #[arg(long, default_value_t = 240)]
        omega_order: u32,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Condense a boson
    Condense {
        #[arg(long)]
        input: PathBuf,
        /// Boson label; the first boson by default
        #[arg(long)]
        boson: Option<String>,
        /// Write partial data when the open entries cannot be resolved
        #[arg(long)]
        emit_partial: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Split off a pointed modular factor
    Factor {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated labels of the pointed factor
        #[arg(long, value_delimiter = ',')]
        pointed: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Fermion sector and its reduced (S_hat, T2_hat)
    Supermodular {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        fermion: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Compare super-modular data with a reference
    Compare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        allow_conjugation: bool,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Run the stages in order, writing every artifact
    Pipeline {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long, default_value = "supermodular")]
        through: String,
        #[arg(long)]
        compare: Option<String>,
        #[arg(long)]
        allow_conjugation: bool,
        #[arg(long, default_value_t = 240)]
        omega_order: u32,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        boson: Option<String>,
        /// Artifact directory
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(Error::from),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn emit_modular(md: &ModularData, out: Option<&Path>, format: Format) -> Result<()> {
    let body = match format {
        Format::Json => pl::to_json_string(&md.to_json())?,
        Format::Text => pl::modular_text(md),
    };
    emit(out, &body)
}

fn run(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::Catalog { instance, out, format } => {
            if let Some(name) = instance {
                let data = pl::load_source(&Source::Instance(name))?;
                let j = data.to_json(data.pairing_m());
                emit(out.as_deref(), &pl::to_json_string(&j)?)?;
                return Ok(0);
            }
            let entries = catalog();
            let body = match format {
                Format::Json => {
                    let names: Vec<_> = entries
                        .iter()
                        .map(|e| serde_json::json!({"name": e.name, "orders": e.orders, "m": e.pairing_m}))
                        .collect();
                    pl::to_json_string(&names)?
                }
                Format::Text => entries
                    .iter()
                    .map(|e| {
                        let n: u32 = e.orders.iter().product();
                        format!(
                            "{:<8} orders {:?} m {:>2} d {:.6}\n",
                            e.name,
                            e.orders,
                            e.pairing_m,
                            near_group_dim(n as usize)
                        )
                    })
                    .collect(),
            };
            emit(out.as_deref(), &body)?;
        }
        Cmd::Solve { src, omega_order, out } => {
            let data = pl::load_source(&src.source()?)?;
            let triples = pl::stage_solve(&data, omega_order)?;
            eprintln!("{} triples", triples.len());
            emit(out.as_deref(), &pl::to_json_string(&pl::triples_json(&triples))?)?;
        }
        Cmd::Center {
            src,
            triples,
            omega_order,
            tol,
            out,
            format,
        } => {
            let data = pl::load_source(&src.source()?)?;
            let triples = match triples {
                Some(p) => {
                    let js: Vec<TripleJson> = serde_json::from_str(&std::fs::read_to_string(p)?)?;
                    js.iter().map(CenterTriple::from_json).collect::<Result<Vec<_>>>()?
                }
                None => pl::stage_solve(&data, omega_order)?,
            };
            let md = pl::stage_center(&data, &triples, tol)?;
            emit_modular(&md, out.as_deref(), format)?;
        }
        Cmd::Condense {
            input,
            boson,
            emit_partial,
            out,
            format,
        } => {
            let md = pl::read_modular(&input)?;
            match pl::condense_and_resolve(&md, boson.as_deref())? {
                Ok(m) => emit_modular(&m, out.as_deref(), format)?,
                Err((pmd, e)) if emit_partial => {
                    eprintln!("open entries unresolved ({e}); writing partial data");
                    let body = match format {
                        Format::Json => pl::to_json_string(&pmd)?,
                        Format::Text => pl::partial_text(&pmd),
                    };
                    emit(out.as_deref(), &body)?;
                }
                Err((_, e)) => return Err(e.at("condense")),
            }
        }
        Cmd::Factor {
            input,
            pointed,
            out,
            format,
        } => {
            let pmd = pl::read_partial(&input)?;
            let fac = pl::stage_factor(&pmd, pointed.as_deref())?;
            eprintln!(
                "pointed factor ({}), kronecker defect {:.2e}",
                fac.pointed.labels.join(", "),
                fac.kronecker_defect
            );
            let body = match format {
                Format::Json => pl::to_json_string(&fac.factor)?,
                Format::Text => pl::partial_text(&fac.factor),
            };
            emit(out.as_deref(), &body)?;
        }
        Cmd::Supermodular {
            input,
            fermion,
            tol,
            out,
            format,
        } => {
            let pmd = pl::read_partial(&input)?;
            let (_, smd, _) = pl::stage_supermodular(&pmd, fermion.as_deref(), tol)?;
            let body = match format {
                Format::Json => pl::to_json_string(&smd.to_json())?,
                Format::Text => pl::super_text(&smd),
            };
            emit(out.as_deref(), &body)?;
        }
        Cmd::Compare {
            input,
            target,
            allow_conjugation,
            tol,
        } => {
            let smd = pl::read_super(&input)?;
            let m = pl::stage_compare(&smd, &target, allow_conjugation, tol)?;
            println!(
                "{target}: matched {} conjugated {} max deviation {:.3e}",
                m.matched, m.conjugated, m.max_deviation
            );
            return Ok(if m.matched { 0 } else { 1 });
        }
        Cmd::Pipeline {
            src,
            through,
            compare,
            allow_conjugation,
            omega_order,
            tol,
            boson,
            out,
            format,
        } => {
            let mut cfg = PipelineConfig::instance("");
            cfg.source = src.source()?;
            cfg.through = through.parse::<Stage>()?;
            cfg.compare = compare;
            cfg.allow_conjugation = allow_conjugation;
            cfg.omega_order = omega_order;
            cfg.tol = tol;
            cfg.boson = boson;
            cfg.out_dir = out;
            let res = pl::run_pipeline(&cfg)?;
            for line in &res.log {
                eprintln!("{line}");
            }
            for (stage, p) in &res.artifacts {
                eprintln!("{}: {}", stage.name(), p.display());
            }
            match format {
                Format::Text => {
                    if let Some(smd) = &res.super_data {
                        print!("{}", pl::super_text(smd));
                    } else if let Some(md) = &res.center {
                        print!("{}", pl::modular_text(md));
                    }
                }
                Format::Json => {
                    if let Some(m) = &res.comparison {
                        print!("{}", pl::to_json_string(m)?);
                    }
                }
            }
            return Ok(res.exit_code());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(pl::error_exit_code(&e) as u8)
        }
    }
}
