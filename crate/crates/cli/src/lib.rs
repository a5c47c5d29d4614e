//! File formats, the end-to-end pipeline and helpers behind the
//! `unfold-synth` command line tool.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;
use unfold_synth_core::iit::compute_phi;
use unfold_synth_core::{
    Automaton, AutomatonError, CircuitError, Code, EncodingError, IitError, PartitionError, PhiResult, Tpm,
};

pub mod formats;
pub mod pipeline;

use formats::{read_json, FsaFile};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Iit(#[from] IitError),
}

impl Error {
    /// 2 when an input could not be read or parsed at all, 1 when it was
    /// read but fails a check.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } | Error::Json { .. } => 2,
            _ => 1,
        }
    }
}

/// Read an FSA file and build the automaton.
pub fn load_fsa(path: &Path) -> Result<(Automaton, FsaFile), Error> {
    let file: FsaFile = read_json(path)?;
    let a = Automaton::new(&file.clone().into())?;
    Ok((a, file))
}

/// SHA-256 of the automaton's canonical JSON form, so formatting and key
/// order in the input file do not change it.
pub fn fsa_digest(file: &FsaFile) -> String {
    let canonical = serde_json::to_string(file).expect("plain data serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Big phi of every state, evaluated in parallel and returned in state
/// order.
pub fn phi_states(t: &Tpm) -> Result<Vec<PhiResult>, Error> {
    let states: Vec<u32> = (0..1u32 << t.nodes()).collect();
    let results = states
        .par_iter()
        .map(|&s| compute_phi(t, Code(s)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(results)
}
