//! Binary state snapshots.
//!
//! Layout, all little-endian: the 8-byte magic `SPNSTATE`, `u32` qubit count,
//! `u32` precision in bits (32 or 64), then `2^n` amplitudes as interleaved
//! `(re, im)` pairs of that width.

use std::io::{Read, Write};

use num_complex::Complex;

use super::{Precision, Real, StateVector};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"SPNSTATE";
const MAX_QUBITS: u32 = 34;

/// A snapshot of either precision.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyState {
    F32(StateVector<f32>),
    F64(StateVector<f64>),
}

impl AnyState {
    pub fn to_f64(&self) -> StateVector<f64> {
        match self {
            AnyState::F32(s) => s.cast(),
            AnyState::F64(s) => s.clone(),
        }
    }
}

pub fn write_snapshot<T: Real, W: Write>(state: &StateVector<T>, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(state.n_qubits() as u32).to_le_bytes())?;
    let bits: u32 = match T::PRECISION {
        Precision::F32 => 32,
        Precision::F64 => 64,
    };
    w.write_all(&bits.to_le_bytes())?;
    let mut buf = Vec::with_capacity(state.dim() * bits as usize / 4);
    for a in state.amplitudes() {
        for part in [a.re, a.im] {
            match T::PRECISION {
                Precision::F32 => buf.extend_from_slice(&(part.to_f64() as f32).to_le_bytes()),
                Precision::F64 => buf.extend_from_slice(&part.to_f64().to_le_bytes()),
            }
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<AnyState> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word);
    if n > MAX_QUBITS {
        return Err(Error::Snapshot(format!("{n} qubits is beyond the supported size")));
    }
    r.read_exact(&mut word)?;
    let bits = u32::from_le_bytes(word);
    let dim = 1usize << n;
    match bits {
        32 => {
            let mut raw = vec![0u8; dim * 8];
            r.read_exact(&mut raw)?;
            let amps = raw
                .chunks_exact(8)
                .map(|c| {
                    Complex::new(
                        f32::from_le_bytes(c[..4].try_into().unwrap()),
                        f32::from_le_bytes(c[4..].try_into().unwrap()),
                    )
                })
                .collect();
            Ok(AnyState::F32(StateVector::from_amplitudes(n as usize, amps)?))
        }
        64 => {
            let mut raw = vec![0u8; dim * 16];
            r.read_exact(&mut raw)?;
            let amps = raw
                .chunks_exact(16)
                .map(|c| {
                    Complex::new(
                        f64::from_le_bytes(c[..8].try_into().unwrap()),
                        f64::from_le_bytes(c[8..].try_into().unwrap()),
                    )
                })
                .collect();
            Ok(AnyState::F64(StateVector::from_amplitudes(n as usize, amps)?))
        }
        other => Err(Error::Snapshot(format!("unknown precision flag {other}"))),
    }
}
