//! End to end: automaton, encoding, excitation, netlist, verification and
//! optionally big phi, collected in one deterministic report.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use unfold_synth_core::circuit::verify_against_fsa;
use unfold_synth_core::encoding::{dependency_graph, derive_csa, is_feed_forward, random_encoding};
use unfold_synth_core::iit::tpm_from_csa;
use unfold_synth_core::partitions::{
    encoding_from_sequence, find_nested_sequence, sequence_from_encoding, validate_sequence,
};
use unfold_synth_core::synthesis::{build_netlist_from, excitation_from_csa, minimized_channels};
use unfold_synth_core::{Automaton, Basis, Encoding, Netlist};

use crate::formats::{EncodingFile, FsaFile, NetlistFile, PhiReport, SequenceFile};
use crate::{fsa_digest, phi_states, Error};

/// Phi at or below this counts as zero.
pub const PHI_ZERO: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum EncodingSource {
    Labels(EncodingFile),
    Unfold,
    Random {
        width: Option<u32>,
        seed: u64,
        fixed: BTreeMap<String, String>,
    },
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub encoding: EncodingSource,
    pub basis: Basis,
    pub phi: bool,
    /// Where to write the circuit graph.
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEntry {
    #[serde(rename = "J")]
    pub j: String,
    #[serde(rename = "K")]
    pub k: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationEntry {
    pub verified: bool,
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub fsa_sha256: String,
    pub states: usize,
    /// `labels`, `unfold` or `random`.
    pub encoding_source: String,
    pub encoding: EncodingFile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nested_sequence: Option<SequenceFile>,
    /// Dependency edges `Qi -> Qj`: the update of `Qj` reads `Qi`.
    pub dependencies: Vec<String>,
    pub feed_forward: bool,
    pub channels: BTreeMap<String, ChannelEntry>,
    pub basis: String,
    pub netlist: NetlistFile,
    pub verification: VerificationEntry,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiReport>,
    /// Broken pipeline invariants; empty on success.
    pub violations: Vec<String>,
    pub artifacts: Vec<String>,
}

impl PipelineReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn basis_name(b: Basis) -> &'static str {
    match b {
        Basis::AndOrNotXor => "and",
        Basis::NandOnly => "nand",
    }
}

pub fn choose_encoding(
    a: &Automaton,
    source: &EncodingSource,
) -> Result<(Encoding, Option<SequenceFile>), Error> {
    match source {
        EncodingSource::Labels(file) => Ok((file.to_encoding(a)?, None)),
        EncodingSource::Unfold => {
            let ns = find_nested_sequence(a)?;
            let e = encoding_from_sequence(&ns)?;
            Ok((e, Some(SequenceFile::from_sequence(&ns, a))))
        }
        EncodingSource::Random { width, seed, fixed } => {
            let width = width.unwrap_or_else(|| minimal_width(a.len()));
            Ok((random_encoding(a, width, *seed, fixed)?, None))
        }
    }
}

/// Fewest bits that give every state its own code.
pub fn minimal_width(states: usize) -> u32 {
    states.max(1).next_power_of_two().trailing_zeros()
}

pub fn synthesize(a: &Automaton, e: &Encoding, basis: Basis) -> Result<Netlist, Error> {
    let csa = derive_csa(a, e)?;
    let ex = excitation_from_csa(&csa);
    Ok(build_netlist_from(e.width(), &minimized_channels(&ex), basis))
}

pub fn run_pipeline(a: &Automaton, fsa: &FsaFile, opts: &PipelineOptions) -> Result<PipelineReport, Error> {
    let (e, sequence) = choose_encoding(a, &opts.encoding)?;
    let csa = derive_csa(a, &e)?;
    let graph = dependency_graph(&csa);
    let feed_forward = is_feed_forward(&graph);
    let ex = excitation_from_csa(&csa);
    let exprs = minimized_channels(&ex);
    let netlist = build_netlist_from(e.width(), &exprs, opts.basis);
    let verification = verify_against_fsa(&netlist, a, &e)?;

    let mut violations = Vec::new();
    if !verification.is_verified() {
        violations.push(format!("circuit does not realize the automaton: {verification}"));
    }
    if matches!(opts.encoding, EncodingSource::Unfold) {
        let report = validate_sequence(&sequence_from_encoding(&e), a);
        if !report.is_valid() {
            violations.push(format!("unfolded labels are not hierarchical: {report}"));
        }
        if !feed_forward {
            violations.push("unfolded circuit is not feed-forward".to_string());
        }
    }

    let phi = if opts.phi {
        let tpm = tpm_from_csa(&csa)?;
        let results = phi_states(&tpm)?;
        let report = PhiReport::from_results(&results, tpm.nodes());
        if feed_forward {
            for (state, entry) in &report.states {
                if entry.phi > PHI_ZERO {
                    violations.push(format!(
                        "feed-forward circuit has phi {} in state {state}",
                        entry.phi
                    ));
                }
            }
        }
        Some(report)
    } else {
        None
    };

    let mut artifacts = Vec::new();
    if let Some(path) = &opts.dot {
        std::fs::write(path, netlist.to_dot()).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        artifacts.push(path.display().to_string());
    }

    let channels = exprs
        .iter()
        .enumerate()
        .map(|(k, (j, kk))| {
            (
                format!("Q{}", k + 1),
                ChannelEntry {
                    j: j.to_string(),
                    k: kk.to_string(),
                },
            )
        })
        .collect();

    Ok(PipelineReport {
        fsa_sha256: fsa_digest(fsa),
        states: a.len(),
        encoding_source: match opts.encoding {
            EncodingSource::Labels(_) => "labels",
            EncodingSource::Unfold => "unfold",
            EncodingSource::Random { .. } => "random",
        }
        .to_string(),
        encoding: EncodingFile::from_encoding(&e, a),
        nested_sequence: sequence,
        dependencies: graph
            .edges()
            .iter()
            .map(|&(f, t)| format!("Q{} -> Q{}", f + 1, t + 1))
            .collect(),
        feed_forward,
        channels,
        basis: basis_name(opts.basis).to_string(),
        netlist: NetlistFile::from(&netlist),
        verification: VerificationEntry {
            verified: verification.is_verified(),
            mismatches: verification.mismatches.iter().map(|m| m.to_string()).collect(),
        },
        phi,
        violations,
        artifacts,
    })
}
