//! JSON file formats shared by the CLI, the pipeline report and the golden
//! files of the reference harness.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unfold_synth_core::encoding::encode;
use unfold_synth_core::iit::tpm_from_csa;
use unfold_synth_core::synthesis::{Drive, Gate, GateOp};
use unfold_synth_core::{
    Automaton, Code, Csa, Encoding, FsaDescription, NestedSequence, Netlist, Partition, PhiResult, Tpm,
};

use crate::Error;

/// Tag for the state indexing convention: node 1 varies fastest.
pub const LITTLE_ENDIAN: &str = "little-endian";

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FsaFile {
    pub states: Vec<String>,
    pub next: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
}

impl From<FsaFile> for FsaDescription {
    fn from(f: FsaFile) -> Self {
        FsaDescription {
            states: f.states,
            next: f.next,
            outputs: f.outputs,
            initial: f.initial,
        }
    }
}

impl From<FsaDescription> for FsaFile {
    fn from(d: FsaDescription) -> Self {
        FsaFile {
            states: d.states,
            next: d.next,
            outputs: d.outputs,
            initial: d.initial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingFile {
    pub width: u32,
    pub labels: BTreeMap<String, String>,
}

impl EncodingFile {
    pub fn from_encoding(e: &Encoding, a: &Automaton) -> Self {
        EncodingFile {
            width: e.width(),
            labels: e.labels_by_name(a),
        }
    }

    pub fn to_encoding(&self, a: &Automaton) -> Result<Encoding, Error> {
        let e = encode(a, &self.labels)?;
        if e.width() != self.width {
            return Err(Error::Format(format!(
                "declared width {} but labels have width {}",
                self.width,
                e.width()
            )));
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub levels: Vec<Vec<Vec<String>>>,
}

impl SequenceFile {
    pub fn from_sequence(ns: &NestedSequence, a: &Automaton) -> Self {
        let levels = ns
            .levels
            .iter()
            .map(|p| {
                p.blocks()
                    .iter()
                    .map(|b| b.iter().map(|&s| a.name(s).to_string()).collect())
                    .collect()
            })
            .collect();
        SequenceFile { levels }
    }

    pub fn to_sequence(&self, a: &Automaton) -> Result<NestedSequence, Error> {
        let levels = self
            .levels
            .iter()
            .map(|blocks| Partition::from_names(a, blocks))
            .collect::<Result<_, _>>()?;
        Ok(NestedSequence { levels })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateEntry {
    pub id: String,
    pub op: String,
    #[serde(rename = "in")]
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveEntry {
    #[serde(rename = "J")]
    pub j: String,
    #[serde(rename = "K")]
    pub k: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetlistFile {
    pub flipflops: Vec<String>,
    pub gates: Vec<GateEntry>,
    pub drive: BTreeMap<String, DriveEntry>,
}

impl From<&Netlist> for NetlistFile {
    fn from(n: &Netlist) -> Self {
        NetlistFile {
            flipflops: n.flipflops.clone(),
            gates: n
                .gates
                .iter()
                .map(|g| GateEntry {
                    id: g.id.clone(),
                    op: g.op.name().to_string(),
                    inputs: g.inputs.clone(),
                })
                .collect(),
            drive: n
                .flipflops
                .iter()
                .zip(&n.drive)
                .map(|(ff, d)| {
                    (
                        ff.clone(),
                        DriveEntry {
                            j: d.j.clone(),
                            k: d.k.clone(),
                        },
                    )
                })
                .collect(),
        }
    }
}

impl NetlistFile {
    pub fn to_netlist(&self) -> Result<Netlist, Error> {
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let op = GateOp::from_name(&g.op)
                    .ok_or_else(|| Error::Format(format!("gate {}: unknown op {:?}", g.id, g.op)))?;
                Ok(Gate {
                    id: g.id.clone(),
                    op,
                    inputs: g.inputs.clone(),
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let drive = self
            .flipflops
            .iter()
            .map(|ff| {
                self.drive
                    .get(ff)
                    .map(|d| Drive {
                        j: d.j.clone(),
                        k: d.k.clone(),
                    })
                    .ok_or_else(|| Error::Format(format!("no drive entry for flip-flop {ff}")))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        if let Some(extra) = self.drive.keys().find(|k| !self.flipflops.contains(k)) {
            return Err(Error::Format(format!(
                "drive entry for unknown flip-flop {extra}"
            )));
        }
        Ok(Netlist {
            flipflops: self.flipflops.clone(),
            gates,
            drive,
        })
    }
}

/// Transition probability matrix as exchanged with the reference harness.
/// `tpm[x][j]` is the probability node `j` is on after state `x`, with
/// states indexed little-endian; `cm[i][j] = 1` when node `i` feeds node `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TpmFile {
    pub convention: String,
    pub nodes: usize,
    pub tpm: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cm: Option<Vec<Vec<u8>>>,
}

impl From<&Tpm> for TpmFile {
    fn from(t: &Tpm) -> Self {
        TpmFile {
            convention: LITTLE_ENDIAN.to_string(),
            nodes: t.nodes(),
            tpm: t.rows().to_vec(),
            cm: Some(
                t.cm()
                    .iter()
                    .map(|row| row.iter().map(|&e| u8::from(e)).collect())
                    .collect(),
            ),
        }
    }
}

impl TpmFile {
    pub fn from_csa(c: &Csa) -> Result<Self, Error> {
        Ok(TpmFile::from(&tpm_from_csa(c)?))
    }

    pub fn to_tpm(&self) -> Result<Tpm, Error> {
        if self.convention != LITTLE_ENDIAN {
            return Err(Error::Format(format!(
                "state convention {:?} is not {LITTLE_ENDIAN:?}",
                self.convention
            )));
        }
        if self.tpm.len() != 1usize << self.nodes.min(usize::BITS as usize - 1) {
            return Err(Error::Format(format!(
                "{} nodes need {} rows, found {}",
                self.nodes,
                1u64 << self.nodes.min(63),
                self.tpm.len()
            )));
        }
        let cm = match &self.cm {
            None => None,
            Some(rows) => Some(
                rows.iter()
                    .map(|row| {
                        row.iter()
                            .map(|&e| match e {
                                0 => Ok(false),
                                1 => Ok(true),
                                _ => Err(Error::Format(format!("connectivity entry {e} is not 0 or 1"))),
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        Ok(Tpm::new(self.tpm.clone(), cm)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiEntry {
    pub phi: f64,
    /// Minimizing cut as `Q1 -> Q2,Q3`; absent when phi was settled without
    /// evaluating cuts.
    #[serde(default)]
    pub cut: Option<String>,
}

/// Per-state big phi, keyed by the state printed `Q1Q2..`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiReport {
    pub states: BTreeMap<String, PhiEntry>,
}

impl PhiReport {
    pub fn from_results(results: &[PhiResult], nodes: usize) -> Self {
        let states = results
            .iter()
            .map(|r| {
                (
                    r.state.render(nodes as u32),
                    PhiEntry {
                        phi: r.big_phi,
                        cut: r.mip.map(|c| c.to_string()),
                    },
                )
            })
            .collect();
        PhiReport { states }
    }

    /// Phi by little-endian state index.
    pub fn by_index(&self) -> Result<BTreeMap<u32, f64>, Error> {
        self.states
            .iter()
            .map(|(k, v)| {
                let (code, _) =
                    Code::parse(k).ok_or_else(|| Error::Format(format!("bad state key {k:?}")))?;
                Ok((code.0, v.phi))
            })
            .collect()
    }
}

/// Per-state phi produced by the reference implementation.
///
/// Only `states` is required. A file without `version` is treated as
/// unpinned and its numbers are not compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    #[serde(default)]
    pub tool: Option<String>,
    #[serde(default)]
    pub version: Option<String>,
    #[serde(default)]
    pub settings_digest: Option<String>,
    #[serde(default)]
    pub settings: Option<serde_json::Value>,
    #[serde(default)]
    pub convention: Option<String>,
    /// The network the values were computed on, when the file is
    /// self-contained.
    #[serde(default)]
    pub tpm: Option<TpmFile>,
    pub states: BTreeMap<String, PhiEntry>,
}

pub enum Golden {
    /// No file at the path.
    Absent,
    /// File present but without a version tag.
    Unpinned(GoldenFile),
    Pinned(GoldenFile),
}

impl GoldenFile {
    pub fn load(path: &Path) -> Result<Golden, Error> {
        if !path.exists() {
            return Ok(Golden::Absent);
        }
        let g: GoldenFile = read_json(path)?;
        if let Some(c) = &g.convention {
            if c != LITTLE_ENDIAN {
                return Err(Error::Format(format!(
                    "{}: state convention {c:?} is not {LITTLE_ENDIAN:?}",
                    path.display()
                )));
            }
        }
        Ok(if g.version.is_some() {
            Golden::Pinned(g)
        } else {
            Golden::Unpinned(g)
        })
    }

    pub fn report(&self) -> PhiReport {
        PhiReport {
            states: self.states.clone(),
        }
    }
}
