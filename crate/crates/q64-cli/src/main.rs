//! Command-line front end: single-artifact subcommands for each pipeline
//! stage plus campaign orchestration.
//!
//! Exit codes: 0 on success, 1 when an item fails verification or
//! certification, 2 on usage errors.

use clap::{Args, Parser, Subcommand};
use q64::campaign::{self, CampaignManifest, CampaignMode};
use q64::codes::{Code, CodeFile, Provenance};
use q64::e8::{orthogonal_group_order, ShellTable, UPoints};
use q64::invariants::{compare, Distribution, PatternKernel, Verdict};
use q64::isotropic::{enumerate_maximal_isotropic, Geometry, PairType};
use q64::lattice::{LatticeFile, QLattice};
use q64::minvec::{certify_extremal, enumerate_min, read_min_vecs, write_min_vecs, MinVectorSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "q64",
    version,
    about = "Rank-64 extremal lattices from ternary codes"
)]
struct Cli {
    /// Worker threads (0 = automatic). Output bytes never depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The ambient root lattice: shells and isometry group.
    E8 {
        #[command(subcommand)]
        sub: E8Cmd,
    },
    /// Maximal isotropic subspaces of the mod-3 reduction.
    Isotropic {
        #[command(subcommand)]
        sub: IsoCmd,
    },
    /// Ternary code generation.
    Code {
        #[command(subcommand)]
        sub: CodeCmd,
    },
    /// Lattice construction and certification.
    Lattice {
        #[command(subcommand)]
        sub: LatticeCmd,
    },
    /// Minimal-vector enumeration.
    Minvec {
        #[command(subcommand)]
        sub: MinvecCmd,
    },
    /// Intersection-pattern distributions.
    Invariant {
        #[command(subcommand)]
        sub: InvariantCmd,
    },
    /// Automorphism-group certification.
    Aut {
        #[command(subcommand)]
        sub: AutCmd,
    },
    /// Seeded multi-lattice runs.
    Campaign {
        #[command(subcommand)]
        sub: CampaignCmd,
    },
}

#[derive(Subcommand)]
enum E8Cmd {
    /// Count the norm-2/4/6 shells and the mod-3 classes of the norm-6 shell.
    Shells,
    /// Order of the isometry group, computed from the 8 reflections.
    GroupOrder,
}

#[derive(Subcommand)]
enum IsoCmd {
    /// Enumerate the maximal totally isotropic subspaces directly.
    Enumerate,
    /// Orbit and stabilizer census (group orders, complement orbits,
    /// pair stabilizers, order-8 element counts).
    Orbits,
}

#[derive(Subcommand)]
enum CodeCmd {
    /// Draw codes until the pair condition holds.
    Random(CodeArgs),
    /// Draw rotation-invariant codes until the pair condition holds.
    Cyclic(CodeArgs),
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long)]
    seed: u64,
    /// Output path for code.json.
    #[arg(long)]
    out: PathBuf,
    /// Factor types, 8 comma-separated entries of I or II (cyclic mode
    /// requires a uniform type).
    #[arg(long, default_value = "I,I,I,I,I,I,I,I")]
    types: String,
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Build and certify the lattice of a code.
    Build {
        #[arg(long)]
        code: PathBuf,
        /// Output path for lattice.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-verify a stored lattice by rebuilding it from its code.
    Verify {
        #[arg(long)]
        lattice: PathBuf,
    },
}

#[derive(Subcommand)]
enum MinvecCmd {
    /// Enumerate all minimal vectors and certify extremality.
    Enumerate {
        #[arg(long)]
        lattice: PathBuf,
        /// Output path for min.vecs.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum InvariantCmd {
    /// Full intersection-pattern distribution over the minimal vectors.
    Distribution {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        min: PathBuf,
        /// Output path for dist.json.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-vector pattern cache (read when valid, written
        /// otherwise).
        #[arg(long)]
        patterns: Option<PathBuf>,
    },
    /// Compare two stored full distributions.
    Compare { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand)]
enum AutCmd {
    /// Search for a rigidifying basis and certify the automorphism group
    /// ({±1} for random codes, {±1}×Z/8 for rotation-invariant ones).
    Certify {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long)]
        min: PathBuf,
        /// Output path for cert.json.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-vector pattern cache.
        #[arg(long)]
        patterns: Option<PathBuf>,
        /// Search seed; defaults to the code's generation seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = q64::autgroup::RESTART_BUDGET)]
        restarts: usize,
    },
}

#[derive(Subcommand)]
enum CampaignCmd {
    /// Run (or resume) every seed of a manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Campaign directory (per-seed subdirectories plus ledger.jsonl).
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a campaign directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

/// Verification failed for the processed item (exit code 1); usage errors
/// surface as clap errors (exit code 2).
struct Failure(String);

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn parse_types(s: &str) -> Result<[PairType; 8], Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 8 {
        // A malformed flag is a usage error: report through clap for exit 2.
        clap::Error::raw(
            clap::error::ErrorKind::InvalidValue,
            format!(
                "--types needs 8 comma-separated entries, got {}\n",
                parts.len()
            ),
        )
        .exit();
    }
    let mut out = [PairType::I; 8];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = PairType::parse(p)?;
    }
    Ok(out)
}

fn load_lattice(path: &Path) -> Result<QLattice, Failure> {
    let file: LatticeFile = q64::io::read_json(path)?;
    Ok(QLattice::from_file(&file)?)
}

fn load_min_set(q: &QLattice, path: &Path) -> Result<MinVectorSet, Failure> {
    let (vectors, hash) = read_min_vecs(path)?;
    if hash != q.hash() {
        return Err(Failure(format!(
            "{} belongs to a different lattice than the given one",
            path.display()
        )));
    }
    Ok(MinVectorSet::from_sorted_vectors(vectors)?)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    match cli.command {
        Command::E8 { sub } => match sub {
            E8Cmd::Shells => {
                let table = ShellTable::new(6);
                for norm in [2i64, 4, 6] {
                    println!("norm {norm}: {} vectors", table.shell(norm).vectors.len());
                }
                println!("norm 6 mod-3 classes: {}", table.shell(6).classes.len());
            }
            E8Cmd::GroupOrder => {
                let order = orthogonal_group_order(&UPoints::new());
                println!("group order: {order}");
            }
        },
        Command::Isotropic { sub } => match sub {
            IsoCmd::Enumerate => {
                let spaces = enumerate_maximal_isotropic();
                println!("maximal isotropic subspaces: {}", spaces.len());
            }
            IsoCmd::Orbits => {
                let geo = Geometry::new();
                println!("group order: {}", geo.group_order);
                println!("subspace orbit size: {}", geo.space_keys.len());
                println!("reference stabilizer order: {}", geo.stab_v0.order);
                let sizes: Vec<usize> = geo.complement_orbits.iter().map(|o| o.len()).collect();
                println!("complement orbit sizes: {sizes:?}");
                for t in [PairType::I, PairType::II] {
                    let stab = geo.pair_stabilizer(t);
                    let octs = stab.elements_of_order(8, usize::MAX).len();
                    println!(
                        "pair type {}: stabilizer order {}, order-8 elements {}",
                        t.as_str(),
                        stab.order,
                        octs
                    );
                }
            }
        },
        Command::Code { sub } => {
            let (args, mode) = match sub {
                CodeCmd::Random(a) => (a, CampaignMode::Random),
                CodeCmd::Cyclic(a) => (a, CampaignMode::Cyclic),
            };
            let types = parse_types(&args.types)?;
            let census = match mode {
                CampaignMode::Cyclic => {
                    if types.iter().any(|t| *t != types[0]) {
                        return Err(Failure("cyclic codes need a uniform factor type".into()));
                    }
                    Some(campaign::order8_census(types[0]))
                }
                CampaignMode::Random => None,
            };
            let code = campaign::stage_code(&args.out, mode, types, census.as_deref(), args.seed)?;
            println!(
                "code written to {} (pair condition: {})",
                args.out.display(),
                code.satisfies_pair_condition()
            );
        }
        Command::Lattice { sub } => match sub {
            LatticeCmd::Build { code, out } => {
                let file: CodeFile = q64::io::read_json(&code)?;
                let code = Code::from_file(&file)?;
                let q = campaign::stage_lattice(&out, &code)?;
                println!("{}", q64::io::to_canonical_json(&q.report())?);
            }
            LatticeCmd::Verify { lattice } => {
                let q = load_lattice(&lattice)?;
                println!("{}", q64::io::to_canonical_json(&q.report())?);
            }
        },
        Command::Minvec { sub } => match sub {
            MinvecCmd::Enumerate { lattice, out } => {
                let q = load_lattice(&lattice)?;
                let code = q.code.clone().expect("stored lattices embed their code");
                let shells = ShellTable::new(12);
                let set = if out.exists() {
                    load_min_set(&q, &out)?
                } else {
                    let set = enumerate_min(&code, &shells)?;
                    write_min_vecs(&out, &set, &q.hash())?;
                    set
                };
                let cert = certify_extremal(&code, &shells, &set)?;
                println!(
                    "minimal vectors: {} (divisible: {}); empty short shells checked: {}",
                    cert.total_both_signs, cert.divisible_both_signs, cert.budget_tuples_checked
                );
            }
        },
        Command::Invariant { sub } => match sub {
            InvariantCmd::Distribution {
                lattice,
                min,
                out,
                patterns,
            } => {
                let q = load_lattice(&lattice)?;
                let set = load_min_set(&q, &min)?;
                let kernel = PatternKernel::new(&set.vectors)?;
                let dist = match patterns {
                    Some(ppath) => {
                        campaign::stage_patterns_and_distribution(&ppath, &out, &q.hash(), &kernel)?
                            .1
                    }
                    None => {
                        let all = kernel.patterns_all()?;
                        let dist = Distribution::from_patterns(&all);
                        dist.to_file(&out)?;
                        dist
                    }
                };
                println!("distribution digest: {}", dist.digest());
                println!("pattern classes: {}", dist.entries.len());
            }
            InvariantCmd::Compare { a, b } => {
                let da = Distribution::from_file(&a)?;
                let db = Distribution::from_file(&b)?;
                match compare(&da, &db)? {
                    Verdict::Distinct => {
                        println!("distinct: the lattices are not isomorphic")
                    }
                    Verdict::Indistinguishable => {
                        println!("indistinguishable: equal distributions (isomorphism not decided)")
                    }
                }
            }
        },
        Command::Aut { sub } => match sub {
            AutCmd::Certify {
                lattice,
                min,
                out,
                patterns,
                seed,
                restarts,
            } => {
                let q = load_lattice(&lattice)?;
                let code = q.code.clone().expect("stored lattices embed their code");
                let set = load_min_set(&q, &min)?;
                let kernel = PatternKernel::new(&set.vectors)?;
                let (mode, gen_seed) = match &code.provenance {
                    Provenance::Random { seed, .. } => (CampaignMode::Random, *seed),
                    Provenance::Cyclic { seed, .. } => (CampaignMode::Cyclic, *seed),
                };
                let patterns_path = patterns.unwrap_or_else(|| out.with_file_name("patterns.bin"));
                let dist_path = out.with_file_name("dist.json");
                let (all, _) = campaign::stage_patterns_and_distribution(
                    &patterns_path,
                    &dist_path,
                    &q.hash(),
                    &kernel,
                )?;
                let (status, cert) = campaign::stage_aut(
                    &out,
                    &q,
                    &code,
                    &set.vectors,
                    &all,
                    &kernel,
                    mode,
                    seed.unwrap_or(gen_seed),
                    restarts,
                )?;
                match (status, cert) {
                    (campaign::AutStatus::Inconclusive, _) => {
                        println!(
                            "inconclusive: the group contains the expected one; \
                             equality not certified within {restarts} restarts"
                        );
                        return Ok(ExitCode::from(1));
                    }
                    (status, Some(cert)) => {
                        println!("certified group order {}", cert.order);
                        if let campaign::AutStatus::CertifiedPm1xC8 { orbit_pairs } = status {
                            println!("rotation orbits on ± pairs: {orbit_pairs}");
                        }
                        println!("certificate written to {}", out.display());
                    }
                    (_, None) => unreachable!("certified statuses carry a certificate"),
                }
            }
        },
        Command::Campaign { sub } => match sub {
            CampaignCmd::Run { manifest, out } => {
                let mut m = CampaignManifest::from_file(&manifest)?;
                if cli.threads > 0 {
                    m.threads = cli.threads;
                } else if m.threads > 0 {
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(m.threads)
                        .build_global()
                        .ok();
                }
                let rows = campaign::run_campaign(&m, &out)?;
                println!("{}", campaign::report(&out)?);
                if rows.iter().any(|r| r.error.is_some()) {
                    return Ok(ExitCode::from(1));
                }
            }
            CampaignCmd::Report { out } => {
                print!("{}", campaign::report(&out)?);
            }
        },
    }
    Ok(ExitCode::SUCCESS)
}
