//! Single-binary driver: surface generation, cover building, spectra, nodal
//! analysis, and stability experiments, composed through JSON files.
//!
//! Exit codes: 0 success, 1 a checked bound was violated, 2 usage error,
//! 3 ambiguous eigenvalue count.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use covlap::complex::ComplexJson;
use covlap::config::{Meta, RunConfig};
use covlap::cover::{CoverSpec, CoverSpecJson};
use covlap::group::{CosetActionJson, SubgroupWordSet};
use covlap::nodal::NodalJson;
use covlap::stability::{
    Provenance, SigmaSearch, StabilityTarget, Verdict,
};
use covlap::{Error, PresetKind, Result, SurfaceComplex};

#[derive(Parser)]
#[command(name = "covlap", version, about = "Laplace spectra of discrete surfaces under finite coverings")]
struct Cli {
    /// Config file; falls back to $COVLAP_CONFIG, then to defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build preset complexes.
    Surface {
        #[command(subcommand)]
        cmd: SurfaceCmd,
    },
    /// Build covers and inspect preimages.
    Cover {
        #[command(subcommand)]
        cmd: CoverCmd,
    },
    /// Coset actions and subgroup enumeration.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// Laplace spectra.
    Spec {
        #[command(subcommand)]
        cmd: SpecCmd,
    },
    /// Nodal decompositions and cover plans.
    Nodal {
        #[command(subcommand)]
        cmd: NodalCmd,
    },
    /// Stability verdicts and bound ledgers.
    Stab {
        #[command(subcommand)]
        cmd: StabCmd,
    },
    /// Run job files in parallel; each job is {"args": [...], "out": path}.
    Batch {
        #[arg(long, default_value_t = 2)]
        jobs: usize,
        files: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SurfaceCmd {
    Make {
        #[arg(long)]
        kind: String,
        /// Comma-separated integer parameters, e.g. "12" or "8,8".
        #[arg(long)]
        params: String,
    },
}

#[derive(Subcommand)]
enum CoverCmd {
    Build {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    Components {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// JSON file with a vertex id array.
        #[arg(long)]
        subset: PathBuf,
    },
}

#[derive(Subcommand)]
enum GroupCmd {
    Enum {
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        index: usize,
    },
    Orbits {
        #[arg(long)]
        action: PathBuf,
        /// JSON file with a list of words (signed 1-based letters).
        #[arg(long)]
        words: PathBuf,
    },
    Mu {
        /// Cyclic factors of a finite abelian group, e.g. "2,4".
        #[arg(long, conflicts_with = "action")]
        abelian: Option<String>,
        #[arg(long)]
        action: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SpecCmd {
    Compute {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "graph")]
        kind: String,
    },
    /// Coordinate-triplet text dump of the stiffness matrix.
    Operator {
        #[arg(long)]
        complex: PathBuf,
    },
}

#[derive(Subcommand)]
enum NodalCmd {
    Analyze {
        #[arg(long)]
        complex: PathBuf,
        /// Eigenvalue index whose cluster is decomposed.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        eps_zero: Option<f64>,
    },
    Plan {
        #[arg(long)]
        complex: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        domain: usize,
    },
}

#[derive(Subcommand)]
enum StabCmd {
    Verdict {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        /// "lambda1", "lambda2", ... or an interval "a,b".
        #[arg(long)]
        target: String,
    },
    Numberg {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    Tower {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long)]
        roof: f64,
        /// "nodal2" builds degree-2 covers from nodal bands per level.
        #[arg(long, default_value = "nodal2", conflicts_with = "spec")]
        auto: String,
        /// Explicit cover spec files, one per level, applied in order.
        #[arg(long)]
        spec: Vec<PathBuf>,
    },
    Count {
        #[arg(long, conflicts_with = "genus")]
        free_rank: Option<usize>,
        #[arg(long)]
        genus: Option<usize>,
        #[arg(long)]
        n: usize,
    },
    Respec {
        #[arg(long, default_value_t = 100)]
        random: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 50)]
        dim: usize,
    },
    Weyl {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
    Sigma {
        #[arg(long)]
        complex: PathBuf,
        /// Generator budget.
        #[arg(long, default_value_t = 0)]
        l: usize,
        #[arg(long, default_value_t = 4)]
        seeds: usize,
        #[arg(long)]
        max_size: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::AmbiguousCount { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    if let Some(p) = path {
        return RunConfig::load(p);
    }
    if let Ok(p) = std::env::var("COVLAP_CONFIG") {
        return RunConfig::load(Path::new(&p));
    }
    Ok(RunConfig::default())
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn load_complex(path: &Path) -> Result<SurfaceComplex> {
    let text = std::fs::read_to_string(path)?;
    let json: ComplexJson = serde_json::from_str(&text)?;
    SurfaceComplex::try_from(json)
}

fn load_spec(path: &Path) -> Result<CoverSpec> {
    let text = std::fs::read_to_string(path)?;
    let json: CoverSpecJson = serde_json::from_str(&text)?;
    json.into_spec()
}

fn parse_params(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParams { kind: "params".into(), reason: format!("bad integer '{t}'") })
        })
        .collect()
}

#[derive(Serialize)]
struct ComplexArtifact {
    #[serde(flatten)]
    meta: Meta,
    #[serde(flatten)]
    complex: ComplexJson,
}

#[derive(Serialize)]
struct CoverArtifact {
    #[serde(flatten)]
    meta: Meta,
    degree: usize,
    connected: bool,
    projection: Vec<usize>,
    sheet: Vec<usize>,
    total: ComplexJson,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = load_config(&cli.config)?;
    let meta = Meta::of(&cfg);
    let format = cli.format;
    match cli.command {
        Command::Surface { cmd } => match cmd {
            SurfaceCmd::Make { kind, params } => {
                let kind: PresetKind = kind.parse()?;
                let params = parse_params(&params)?;
                let c = covlap::build_preset(kind, &params)?;
                let artifact = ComplexArtifact { meta, complex: ComplexJson::from(&c) };
                write_output(&cli.out, &to_json(&artifact)?)?;
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Cover { cmd } => match cmd {
            CoverCmd::Build { base, spec } => {
                let c = load_complex(&base)?;
                let s = load_spec(&spec)?;
                let cover = covlap::build_cover(&c, &s)?;
                let nv = cover.total().n_vertices();
                let artifact = CoverArtifact {
                    meta,
                    degree: cover.degree(),
                    connected: cover.is_connected(),
                    projection: (0..nv).map(|v| cover.project_vertex(v)).collect(),
                    sheet: (0..nv).map(|v| cover.sheet_of(v)).collect(),
                    total: ComplexJson::from(cover.total()),
                };
                write_output(&cli.out, &to_json(&artifact)?)?;
                Ok(ExitCode::SUCCESS)
            }
            CoverCmd::Components { base, spec, subset } => {
                let c = load_complex(&base)?;
                let s = load_spec(&spec)?;
                let cover = covlap::build_cover(&c, &s)?;
                let sub: Vec<usize> = serde_json::from_str(&std::fs::read_to_string(subset)?)?;
                let comps = covlap::preimage_components(&cover, &sub)?;
                let (count, orbit_count) = covlap::stability::duality_check(&cover, &sub)?;
                #[derive(Serialize)]
                struct Out {
                    #[serde(flatten)]
                    meta: Meta,
                    count: usize,
                    orbit_count: usize,
                    matches: bool,
                    components: Vec<Vec<usize>>,
                }
                let out = Out {
                    meta,
                    count,
                    orbit_count,
                    matches: count == orbit_count,
                    components: comps,
                };
                let code = if count == orbit_count { ExitCode::SUCCESS } else { ExitCode::from(1) };
                write_output(&cli.out, &to_json(&out)?)?;
                Ok(code)
            }
        },
        Command::Group { cmd } => match cmd {
            GroupCmd::Enum { presentation, index } => {
                let p: covlap::Presentation =
                    serde_json::from_str(&std::fs::read_to_string(presentation)?)?;
                let bound =
                    if p.relators.is_empty() { cfg.enum_bound_free } else { cfg.enum_bound_surface };
                let subs = covlap::group::enumerate_index_n(&p, index, bound)?;
                #[derive(Serialize)]
                struct Out {
                    #[serde(flatten)]
                    meta: Meta,
                    index: usize,
                    count: usize,
                    actions: Vec<CosetActionJson>,
                }
                let out = Out {
                    meta,
                    index,
                    count: subs.len(),
                    actions: subs.iter().map(CosetActionJson::from).collect(),
                };
                write_output(&cli.out, &to_json(&out)?)?;
                Ok(ExitCode::SUCCESS)
            }
            GroupCmd::Orbits { action, words } => {
                let a: CosetActionJson = serde_json::from_str(&std::fs::read_to_string(action)?)?;
                let a = covlap::CosetAction::try_from(a)?;
                let w: Vec<covlap::Word> = serde_json::from_str(&std::fs::read_to_string(words)?)?;
                let orbs = covlap::group::orbits(&a, &SubgroupWordSet::new(w))?;
                #[derive(Serialize)]
                struct Out {
                    #[serde(flatten)]
                    meta: Meta,
                    count: usize,
                    orbits: Vec<Vec<usize>>,
                }
                let out = Out {
                    meta,
                    count: orbs.len(),
                    orbits: orbs
                        .into_iter()
                        .map(|o| o.into_iter().map(|x| x + 1).collect())
                        .collect(),
                };
                write_output(&cli.out, &to_json(&out)?)?;
                Ok(ExitCode::SUCCESS)
            }
            GroupCmd::Mu { abelian, action } => {
                let mu = if let Some(factors) = abelian {
                    let torsion = parse_params(&factors)?.into_iter().map(|x| x as u64).collect();
                    covlap::group::abelian_mu(&covlap::AbelianInvariants { rank: 0, torsion })?
                } else if let Some(path) = action {
                    let a: CosetActionJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
                    let a = covlap::CosetAction::try_from(a)?;
                    covlap::group::min_generators_coset(&a, cfg.degree_cap)?
                } else {
                    return Err(Error::InvalidParams {
                        kind: "group mu".into(),
                        reason: "need --abelian or --action".into(),
                    });
                };
                #[derive(Serialize)]
                struct Out {
                    #[serde(flatten)]
                    meta: Meta,
                    mu: usize,
                }
                write_output(&cli.out, &to_json(&Out { meta, mu })?)?;
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Spec { cmd } => match cmd {
            SpecCmd::Compute { complex, m, tol, seed, kind } => {
                let c = load_complex(&complex)?;
                let kind = match kind.as_str() {
                    "graph" => covlap::LaplaceKind::Graph,
                    "cotangent" => covlap::LaplaceKind::Cotangent,
                    other => {
                        return Err(Error::InvalidParams {
                            kind: "spec compute".into(),
                            reason: format!("unknown kind '{other}'"),
                        })
                    }
                };
                let op = covlap::assemble(&c, kind)?;
                let m = m.unwrap_or(cfg.m).min(op.dim());
                let s = covlap::lowest_eigenpairs(
                    &op,
                    m,
                    tol.unwrap_or(cfg.tol),
                    seed.unwrap_or(cfg.seed),
                    cfg.max_iters,
                    cfg.cluster_gap,
                )?;
                match format.unwrap_or(Format::Csv) {
                    Format::Csv => {
                        let mut text = String::from("index,eigenvalue,cluster,residual\n");
                        for i in 0..s.len() {
                            let cluster = s
                                .clusters
                                .iter()
                                .position(|&(a, b)| i >= a && i < b)
                                .unwrap_or(0);
                            text.push_str(&format!(
                                "{},{:.16e},{},{:.3e}\n",
                                i, s.eigenvalues[i], cluster, s.residuals[i]
                            ));
                        }
                        write_output(&cli.out, &text)?;
                    }
                    Format::Json => {
                        #[derive(Serialize)]
                        struct Out {
                            #[serde(flatten)]
                            meta: Meta,
                            eigenvalues: Vec<f64>,
                            clusters: Vec<(usize, usize)>,
                            residuals: Vec<f64>,
                        }
                        let out = Out {
                            meta,
                            eigenvalues: s.eigenvalues.clone(),
                            clusters: s.clusters.clone(),
                            residuals: s.residuals.clone(),
                        };
                        write_output(&cli.out, &to_json(&out)?)?;
                    }
                }
                Ok(ExitCode::SUCCESS)
            }
            SpecCmd::Operator { complex } => {
                let c = load_complex(&complex)?;
                let op = covlap::assemble(&c, covlap::LaplaceKind::Graph)?;
                let mut text = String::new();
                for i in 0..op.dim() {
                    for (j, v) in op.stiffness.row(i) {
                        text.push_str(&format!("{i} {j} {v:.16e}\n"));
                    }
                }
                write_output(&cli.out, &text)?;
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Nodal { cmd } => match cmd {
            NodalCmd::Analyze { complex, k, eps_zero } => {
                let c = load_complex(&complex)?;
                let (lambda, phi) = canonical_vector_at(&c, k, &cfg)?;
                let d = covlap::nodal_decomposition(&c, &phi, eps_zero.unwrap_or(cfg.eps_zero))?;
                #[derive(Serialize)]
                struct Out {
                    #[serde(flatten)]
                    meta: Meta,
                    lambda: f64,
                    nu: usize,
                    #[serde(flatten)]
                    decomposition: NodalJson,
                }
                let out =
                    Out { meta, lambda, nu: d.nu(), decomposition: NodalJson::from(&d) };
                write_output(&cli.out, &to_json(&out)?)?;
                Ok(ExitCode::SUCCESS)
            }
            NodalCmd::Plan { complex, degree, k, domain } => {
                let c = load_complex(&complex)?;
                let (lambda, phi) = canonical_vector_at(&c, k, &cfg)?;
                let d = covlap::nodal_decomposition(&c, &phi, cfg.eps_zero)?;
                let plan = covlap::unstable_cover_plan(&c, &d, domain, degree)?;
                #[derive(Serialize)]
                struct Out {
                    #[serde(flatten)]
                    meta: Meta,
                    lambda: f64,
                    degree: usize,
                    mu_used: usize,
                    mu_total: usize,
                    predicted_extra: usize,
                    connected: bool,
                    eps_sensitive: bool,
                    cover: CoverSpecJson,
                }
                let out = Out {
                    meta,
                    lambda,
                    degree: plan.degree,
                    mu_used: plan.mu_used,
                    mu_total: plan.mu_total,
                    predicted_extra: plan.predicted_extra,
                    connected: plan.connected,
                    eps_sensitive: plan.eps_sensitive,
                    cover: CoverSpecJson::from_spec(&plan.spec, None),
                };
                write_output(&cli.out, &to_json(&out)?)?;
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Stab { cmd } => run_stab(cmd, &cfg, meta, &cli.out, format),
        Command::Batch { jobs, files } => run_batch(jobs, &files),
    }
}

/// Canonical representative of the cluster containing lambda_k, with its
/// eigenvalue.
fn canonical_vector_at(c: &SurfaceComplex, k: usize, cfg: &RunConfig) -> Result<(f64, Vec<f64>)> {
    let op = covlap::assemble(c, covlap::LaplaceKind::Graph)?;
    let mut s = covlap::spectrum_past(
        &op,
        0.0,
        cfg.count_margin,
        cfg.tol,
        cfg.seed,
        cfg.max_iters,
        cfg.cluster_gap,
    )?;
    while s.len() <= k && !s.complete {
        s = covlap::lowest_eigenpairs(
            &op,
            (2 * s.len()).min(op.dim()),
            cfg.tol,
            cfg.seed,
            cfg.max_iters,
            cfg.cluster_gap,
        )?;
    }
    if s.len() <= k {
        return Err(Error::UncertifiedRange { lambda: f64::NAN });
    }
    let lambda = s.eigenvalues[k];
    let cluster = s
        .cluster_at(lambda, s.cluster_gap)
        .ok_or(Error::ClusterNotFound { lambda })?;
    let phi = covlap::canonical_cluster_vector(&op, &s, cluster, cfg.seed);
    Ok((lambda, phi))
}

fn run_stab(
    cmd: StabCmd,
    cfg: &RunConfig,
    meta: Meta,
    out: &Option<PathBuf>,
    format: Option<Format>,
) -> Result<ExitCode> {
    let provenance = Provenance { seed: cfg.seed, tol: cfg.tol, margin: cfg.count_margin };
    match cmd {
        StabCmd::Verdict { base, cover, target } => {
            let c = load_complex(&base)?;
            let spec = load_spec(&cover)?;
            let cov = covlap::build_cover(&c, &spec)?;
            let target = parse_target(&target)?;
            let base_op = covlap::assemble(cov.base(), covlap::LaplaceKind::Graph)?;
            let cover_op = covlap::assemble(cov.total(), covlap::LaplaceKind::Graph)?;
            let lambda_hint = match target {
                StabilityTarget::Interval(_, b) => b,
                StabilityTarget::LambdaK(k) => {
                    let s = covlap::spectrum_past(
                        &base_op, 0.0, cfg.count_margin, cfg.tol, cfg.seed, cfg.max_iters,
                        cfg.cluster_gap,
                    )?;
                    // Grow until k is certified.
                    let mut s = s;
                    while s.len() <= k && !s.complete {
                        s = covlap::lowest_eigenpairs(
                            &base_op,
                            (2 * s.len()).min(base_op.dim()),
                            cfg.tol,
                            cfg.seed,
                            cfg.max_iters,
                            cfg.cluster_gap,
                        )?;
                    }
                    *s.eigenvalues.get(k).ok_or(Error::UncertifiedRange { lambda: f64::NAN })?
                }
            };
            let sb = covlap::spectrum_past(
                &base_op, lambda_hint, 2.0 * cfg.count_margin, cfg.tol, cfg.seed, cfg.max_iters,
                cfg.cluster_gap,
            )?;
            let sc = covlap::spectrum_past(
                &cover_op, lambda_hint, 2.0 * cfg.count_margin, cfg.tol, cfg.seed, cfg.max_iters,
                cfg.cluster_gap,
            )?;
            let report = covlap::stability_verdict(&sb, &sc, target, cfg.count_margin, provenance)?;
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                meta: Meta,
                #[serde(flatten)]
                report: covlap::StabilityReport,
            }
            let verdict = report.verdict;
            write_output(out, &to_json(&Out { meta, report })?)?;
            Ok(match verdict {
                Verdict::Ambiguous => ExitCode::from(3),
                _ => ExitCode::SUCCESS,
            })
        }
        StabCmd::Numberg { base, cover, k } => {
            let c = load_complex(&base)?;
            let spec = load_spec(&cover)?;
            let cov = covlap::build_cover(&c, &spec)?;
            let base_op = covlap::assemble(cov.base(), covlap::LaplaceKind::Graph)?;
            let (lambda, phi) = canonical_vector_at(&c, k, cfg)?;
            let sb = covlap::spectrum_past(
                &base_op, lambda, 2.0 * cfg.count_margin, cfg.tol, cfg.seed, cfg.max_iters,
                cfg.cluster_gap,
            )?;
            let ledger = covlap::numberg_check(&cov, &sb, &phi, lambda, cfg)?;
            let holds = ledger.holds;
            match format.unwrap_or(Format::Json) {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out {
                        #[serde(flatten)]
                        meta: Meta,
                        #[serde(flatten)]
                        ledger: covlap::stability::NumbergLedger,
                    }
                    write_output(out, &to_json(&Out { meta, ledger })?)?;
                }
                Format::Csv => {
                    let text = format!(
                        "name,claimed,observed,pass\nnodal_lifting,{},{},{}\n",
                        ledger.claimed, ledger.observed, ledger.holds
                    );
                    write_output(out, &text)?;
                }
            }
            Ok(if holds { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        StabCmd::Tower { base, levels, l, roof, auto, spec } => {
            let c = load_complex(&base)?;
            let tower = if !spec.is_empty() {
                let specs: Result<Vec<CoverSpec>> = spec.iter().map(|p| load_spec(p)).collect();
                covlap::build_tower(&c, &specs?)?
            } else if auto == "nodal2" {
                covlap::stability::nodal_doubling_tower(&c, levels, cfg)?
            } else {
                return Err(Error::InvalidParams {
                    kind: "stab tower".into(),
                    reason: format!("unknown auto mode '{auto}'"),
                });
            };
            let report = covlap::tower_experiment(&tower, l, roof, cfg.count_margin, cfg)?;
            let ok = report.entered_below_roof && report.composition_ok;
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                meta: Meta,
                #[serde(flatten)]
                report: covlap::stability::TowerReport,
            }
            write_output(out, &to_json(&Out { meta, report })?)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        StabCmd::Count { free_rank, genus, n } => {
            let (p, bound) = match (free_rank, genus) {
                (Some(r), None) => (covlap::Presentation::free(r), cfg.enum_bound_free),
                (None, Some(g)) => (covlap::Presentation::surface(g), cfg.enum_bound_surface),
                _ => {
                    return Err(Error::InvalidParams {
                        kind: "stab count".into(),
                        reason: "need exactly one of --free-rank / --genus".into(),
                    })
                }
            };
            let e = covlap::stability::count_experiment(&p, n, bound)?;
            let ok = e.report.bound_holds;
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                meta: Meta,
                #[serde(flatten)]
                experiment: covlap::stability::CountExperiment,
            }
            write_output(out, &to_json(&Out { meta, experiment: e })?)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        StabCmd::Respec { random, seed, dim } => {
            let seed = seed.unwrap_or(cfg.seed);
            let mut failures: Vec<u64> = Vec::new();
            let mut reports = Vec::new();
            for inst in covlap::respec::trivial_instances() {
                let r = covlap::respec::respec_check(&inst, 1e-9)?;
                if !r.pass {
                    failures.push(u64::MAX);
                }
                reports.push(r);
            }
            for i in 0..random as u64 {
                let inst = covlap::respec::random_instance(dim, seed.wrapping_add(i));
                let r = covlap::respec::respec_check(&inst, 1e-9)?;
                if !r.pass {
                    failures.push(seed.wrapping_add(i));
                }
                reports.push(r);
            }
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                meta: Meta,
                total: usize,
                passed: usize,
                failing_seeds: Vec<u64>,
                reports: Vec<covlap::respec::RespecReport>,
            }
            let ok = failures.is_empty();
            let out_doc = Out {
                meta,
                total: reports.len(),
                passed: reports.iter().filter(|r| r.pass).count(),
                failing_seeds: failures,
                reports,
            };
            write_output(out, &to_json(&out_doc)?)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        StabCmd::Weyl { base, cover, points } => {
            let c = load_complex(&base)?;
            let spec = load_spec(&cover)?;
            let cov = covlap::build_cover(&c, &spec)?;
            let sb = covlap::dense_spectrum(
                &covlap::assemble(cov.base(), covlap::LaplaceKind::Graph)?,
                cfg.cluster_gap,
            );
            let sc = covlap::dense_spectrum(
                &covlap::assemble(cov.total(), covlap::LaplaceKind::Graph)?,
                cfg.cluster_gap,
            );
            let curve = covlap::stability::weyl_ratio(&sb, &sc, cov.degree(), points)?;
            match format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut text = String::from("lambda,ratio\n");
                    for (lam, r) in curve.grid.iter().zip(&curve.ratio) {
                        text.push_str(&format!("{lam:.16e},{r:.6}\n"));
                    }
                    write_output(out, &text)?;
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out {
                        #[serde(flatten)]
                        meta: Meta,
                        #[serde(flatten)]
                        curve: covlap::stability::WeylCurve,
                    }
                    write_output(out, &to_json(&Out { meta, curve })?)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        StabCmd::Sigma { complex, l, seeds, max_size } => {
            let c = load_complex(&complex)?;
            let search = SigmaSearch {
                max_seeds: seeds,
                max_size: max_size.unwrap_or(usize::MAX),
            };
            let report = covlap::sigma_upper_bounds(&c, l, search)?;
            #[derive(Serialize)]
            struct Out {
                #[serde(flatten)]
                meta: Meta,
                #[serde(flatten)]
                report: covlap::stability::SigmaReport,
            }
            write_output(out, &to_json(&Out { meta, report })?)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_target(s: &str) -> Result<StabilityTarget> {
    if let Some(rest) = s.strip_prefix("lambda") {
        let k: usize = rest.parse().map_err(|_| Error::InvalidParams {
            kind: "target".into(),
            reason: format!("bad lambda index '{rest}'"),
        })?;
        return Ok(StabilityTarget::LambdaK(k));
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() == 2 {
        let a: f64 = parts[0].trim().parse().map_err(|_| Error::InvalidParams {
            kind: "target".into(),
            reason: "bad interval".into(),
        })?;
        let b: f64 = parts[1].trim().parse().map_err(|_| Error::InvalidParams {
            kind: "target".into(),
            reason: "bad interval".into(),
        })?;
        return Ok(StabilityTarget::Interval(a, b));
    }
    Err(Error::InvalidParams {
        kind: "target".into(),
        reason: format!("expected 'lambdaK' or 'a,b', got '{s}'"),
    })
}

/// Job file: {"args": ["surface", "make", ...], "out": "file.json"}.
#[derive(serde::Deserialize)]
struct Job {
    args: Vec<String>,
    out: PathBuf,
}

fn run_batch(jobs: usize, files: &[PathBuf]) -> Result<ExitCode> {
    let exe = std::env::current_exe()?;
    let parsed: Result<Vec<Job>> = files
        .iter()
        .map(|f| {
            let text = std::fs::read_to_string(f)?;
            Ok(serde_json::from_str::<Job>(&text)?)
        })
        .collect();
    let parsed = parsed?;
    let mut worst = 0i32;
    for chunk in parsed.chunks(jobs.max(1)) {
        let handles: Vec<std::process::Child> = chunk
            .iter()
            .map(|job| {
                std::process::Command::new(&exe)
                    .args(&job.args)
                    .arg("--out")
                    .arg(&job.out)
                    .spawn()
            })
            .collect::<std::io::Result<_>>()?;
        for mut h in handles {
            let status = h.wait()?;
            worst = worst.max(status.code().unwrap_or(2));
        }
    }
    Ok(ExitCode::from(worst.clamp(0, 255) as u8))
}
