use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use unfold_synth::formats::{
    read_json, to_json, EncodingFile, NetlistFile, PhiReport, SequenceFile, TpmFile,
};
use unfold_synth::pipeline::{choose_encoding, run_pipeline, synthesize, EncodingSource, PipelineOptions};
use unfold_synth::{load_fsa, phi_states, Error};
use unfold_synth_core::automaton::validate;
use unfold_synth_core::circuit::verify_against_fsa;
use unfold_synth_core::encoding::{dependency_graph, derive_csa};
use unfold_synth_core::partitions::{find_nested_sequence, sequence_from_encoding, validate_sequence};
use unfold_synth_core::{Basis, CircuitState, Code, Simulator};

const THREADS_VAR: &str = "UNFOLD_SYNTH_THREADS";

#[derive(Parser)]
#[command(
    name = "unfold-synth",
    version,
    about = "Synthesize, unfold and measure finite-state circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an automaton, and optionally a nested sequence or labels for it.
    Validate {
        #[arg(long)]
        fsa: PathBuf,
        /// Nested sequence of partitions to check.
        #[arg(long)]
        sequence: Option<PathBuf>,
        /// Labels to check for bijectivity and hierarchy.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Produce binary labels for the states.
    Encode {
        #[arg(long)]
        fsa: PathBuf,
        #[command(flatten)]
        source: SourceArgs,
        /// Write the dependency graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Find a feed-forward (hierarchical) encoding.
    Unfold {
        #[arg(long)]
        fsa: PathBuf,
        /// Also write the nested sequence of partitions.
        #[arg(long)]
        sequence: Option<PathBuf>,
        /// Write the dependency graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Synthesize a JK flip-flop netlist.
    Synth {
        #[arg(long)]
        fsa: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum, default_value_t = BasisArg::And)]
        basis: BasisArg,
        /// Write the circuit graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Clock a netlist and print its trace.
    Simulate {
        #[arg(long)]
        netlist: PathBuf,
        /// Initial flip-flop values, Q1 first.
        #[arg(long)]
        start: String,
        #[arg(long)]
        steps: usize,
    },
    /// Check that a netlist realizes the automaton under the labels.
    Verify {
        #[arg(long)]
        netlist: PathBuf,
        #[arg(long)]
        fsa: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Big phi for every state.
    Phi {
        #[arg(long, requires = "labels", conflicts_with = "tpm")]
        fsa: Option<PathBuf>,
        #[arg(long, requires = "fsa")]
        labels: Option<PathBuf>,
        /// Transition probability matrix in the shared JSON format.
        #[arg(long, required_unless_present = "fsa")]
        tpm: Option<PathBuf>,
        /// Write the transition probability matrix used.
        #[arg(long)]
        export_tpm: Option<PathBuf>,
    },
    /// Encode, synthesize, verify and optionally measure phi in one go.
    Pipeline {
        #[arg(long)]
        fsa: PathBuf,
        #[command(flatten)]
        source: PipelineSourceArgs,
        #[arg(long, value_enum, default_value_t = BasisArg::And)]
        basis: BasisArg,
        #[arg(long)]
        phi: bool,
        /// Write the circuit graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SourceArgs {
    #[arg(long, required_unless_present = "random", conflicts_with = "random")]
    labels: Option<PathBuf>,
    #[command(flatten)]
    random: RandomArgs,
}

#[derive(Args)]
struct PipelineSourceArgs {
    #[arg(
        long,
        required_unless_present_any = ["unfold", "random"],
        conflicts_with_all = ["unfold", "random"]
    )]
    labels: Option<PathBuf>,
    /// Use the hierarchical encoding found by `unfold`.
    #[arg(long, conflicts_with = "random")]
    unfold: bool,
    #[command(flatten)]
    random: RandomArgs,
}

#[derive(Args)]
struct RandomArgs {
    /// Random bijective labels; needs --seed.
    #[arg(long, requires = "seed")]
    random: bool,
    #[arg(long, requires = "random")]
    seed: Option<u64>,
    /// Pin a state's label, e.g. --fix A=000.
    #[arg(long, value_parser = parse_fix, requires = "random")]
    fix: Vec<(String, String)>,
    /// Label width; defaults to the fewest bits that fit every state.
    #[arg(long, requires = "random")]
    width: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    And,
    Nand,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::And => Basis::AndOrNotXor,
            BasisArg::Nand => Basis::NandOnly,
        }
    }
}

fn parse_fix(s: &str) -> Result<(String, String), String> {
    let (state, code) = s.split_once('=').ok_or("expected STATE=BITS")?;
    if state.is_empty() || code.is_empty() {
        return Err("expected STATE=BITS".into());
    }
    Ok((state.to_string(), code.to_string()))
}

impl RandomArgs {
    fn source(&self) -> EncodingSource {
        EncodingSource::Random {
            width: self.width,
            seed: self.seed.expect("clap requires --seed with --random"),
            fixed: self.fix.iter().cloned().collect(),
        }
    }
}

/// Outcome of a command that ran to completion.
enum Outcome {
    Ok,
    /// Checks failed; exit 1.
    Failed,
}

#[derive(Serialize)]
struct CheckEntry {
    valid: bool,
    violations: Vec<String>,
}

impl CheckEntry {
    fn new(violations: Vec<String>) -> Self {
        CheckEntry {
            valid: violations.is_empty(),
            violations,
        }
    }
}

#[derive(Serialize)]
struct ValidateReport {
    fsa: CheckEntry,
    #[serde(skip_serializing_if = "Option::is_none")]
    sequence: Option<CheckEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<LabelsEntry>,
}

#[derive(Serialize)]
struct LabelsEntry {
    valid: bool,
    violations: Vec<String>,
    hierarchical: bool,
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn print(text: &str) {
    print!("{text}");
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Validate {
            fsa,
            sequence,
            labels,
        } => {
            let file: unfold_synth::formats::FsaFile = read_json(&fsa)?;
            let report = validate(&file.clone().into());
            let mut out = ValidateReport {
                fsa: CheckEntry::new(report.violations.iter().map(ToString::to_string).collect()),
                sequence: None,
                labels: None,
            };
            if report.is_valid() {
                let (a, _) = load_fsa(&fsa)?;
                if let Some(path) = sequence {
                    let file: SequenceFile = read_json(&path)?;
                    let violations = match file.to_sequence(&a) {
                        Ok(ns) => validate_sequence(&ns, &a)
                            .violations
                            .iter()
                            .map(ToString::to_string)
                            .collect(),
                        Err(e) => vec![e.to_string()],
                    };
                    out.sequence = Some(CheckEntry::new(violations));
                }
                if let Some(path) = labels {
                    let file: EncodingFile = read_json(&path)?;
                    out.labels = Some(match file.to_encoding(&a) {
                        Ok(e) => LabelsEntry {
                            valid: true,
                            violations: Vec::new(),
                            hierarchical: validate_sequence(&sequence_from_encoding(&e), &a).is_valid(),
                        },
                        Err(err) => LabelsEntry {
                            valid: false,
                            violations: vec![err.to_string()],
                            hierarchical: false,
                        },
                    });
                }
            }
            print(&to_json(&out));
            let ok = out.fsa.valid
                && out.sequence.as_ref().is_none_or(|s| s.valid)
                && out.labels.as_ref().is_none_or(|l| l.valid);
            Ok(if ok { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Encode { fsa, source, dot } => {
            let (a, _) = load_fsa(&fsa)?;
            let source = match source.labels {
                Some(path) => EncodingSource::Labels(read_json(&path)?),
                None => source.random.source(),
            };
            let (e, _) = choose_encoding(&a, &source)?;
            if let Some(path) = dot {
                write_file(&path, &dependency_graph(&derive_csa(&a, &e)?).to_dot())?;
            }
            print(&to_json(&EncodingFile::from_encoding(&e, &a)));
            Ok(Outcome::Ok)
        }
        Command::Unfold { fsa, sequence, dot } => {
            let (a, _) = load_fsa(&fsa)?;
            let ns = find_nested_sequence(&a)?;
            let e = unfold_synth_core::partitions::encoding_from_sequence(&ns)?;
            if let Some(path) = sequence {
                write_file(&path, &to_json(&SequenceFile::from_sequence(&ns, &a)))?;
            }
            if let Some(path) = dot {
                write_file(&path, &dependency_graph(&derive_csa(&a, &e)?).to_dot())?;
            }
            print(&to_json(&EncodingFile::from_encoding(&e, &a)));
            Ok(Outcome::Ok)
        }
        Command::Synth {
            fsa,
            labels,
            basis,
            dot,
        } => {
            let (a, _) = load_fsa(&fsa)?;
            let e = read_json::<EncodingFile>(&labels)?.to_encoding(&a)?;
            let n = synthesize(&a, &e, basis.into())?;
            if let Some(path) = dot {
                write_file(&path, &n.to_dot())?;
            }
            print(&to_json(&NetlistFile::from(&n)));
            Ok(Outcome::Ok)
        }
        Command::Simulate {
            netlist,
            start,
            steps,
        } => {
            let n = read_json::<NetlistFile>(&netlist)?.to_netlist()?;
            let sim = Simulator::new(&n)?;
            let (code, width) = Code::parse(&start)
                .filter(|&(_, w)| w == sim.width())
                .ok_or_else(|| {
                    Error::Format(format!(
                        "--start {start:?} is not a {}-bit binary string",
                        sim.width()
                    ))
                })?;
            let header: String = n.flipflops.concat();
            let trace = sim.run(&CircuitState::from_code(code, width), steps)?;
            let mut out = String::new();
            for (t, s) in trace.iter().enumerate() {
                out.push_str(&format!("t={t} {header}={s}\n"));
            }
            print(&out);
            Ok(Outcome::Ok)
        }
        Command::Verify { netlist, fsa, labels } => {
            let n = read_json::<NetlistFile>(&netlist)?.to_netlist()?;
            let (a, _) = load_fsa(&fsa)?;
            let e = read_json::<EncodingFile>(&labels)?.to_encoding(&a)?;
            let report = verify_against_fsa(&n, &a, &e)?;
            let entry = unfold_synth::pipeline::VerificationEntry {
                verified: report.is_verified(),
                mismatches: report.mismatches.iter().map(ToString::to_string).collect(),
            };
            print(&to_json(&entry));
            Ok(if entry.verified {
                Outcome::Ok
            } else {
                Outcome::Failed
            })
        }
        Command::Phi {
            fsa,
            labels,
            tpm,
            export_tpm,
        } => {
            let tpm_file = match (tpm, fsa, labels) {
                (Some(path), _, _) => read_json::<TpmFile>(&path)?,
                (None, Some(fsa), Some(labels)) => {
                    let (a, _) = load_fsa(&fsa)?;
                    let e = read_json::<EncodingFile>(&labels)?.to_encoding(&a)?;
                    TpmFile::from_csa(&derive_csa(&a, &e)?)?
                }
                _ => unreachable!("clap enforces --tpm or --fsa with --labels"),
            };
            let t = tpm_file.to_tpm()?;
            if let Some(path) = export_tpm {
                write_file(&path, &to_json(&TpmFile::from(&t)))?;
            }
            let results = phi_states(&t)?;
            print(&to_json(&PhiReport::from_results(&results, t.nodes())));
            Ok(Outcome::Ok)
        }
        Command::Pipeline {
            fsa,
            source,
            basis,
            phi,
            dot,
        } => {
            let (a, file) = load_fsa(&fsa)?;
            let encoding = if let Some(path) = source.labels {
                EncodingSource::Labels(read_json(&path)?)
            } else if source.unfold {
                EncodingSource::Unfold
            } else {
                source.random.source()
            };
            let opts = PipelineOptions {
                encoding,
                basis: basis.into(),
                phi,
                dot,
            };
            let report = run_pipeline(&a, &file, &opts)?;
            print(&to_json(&report));
            for v in &report.violations {
                eprintln!("unfold-synth: {v}");
            }
            Ok(if report.is_ok() {
                Outcome::Ok
            } else {
                Outcome::Failed
            })
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR}={value:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(msg) = configure_threads() {
        eprintln!("unfold-synth: {msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("unfold-synth: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
