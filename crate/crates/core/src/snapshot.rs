//! Binary field snapshots.
//!
//! ```text
//! ELGL1\n
//! n=<int>\n
//! eps=<float>\n
//! t=<float>\n
//! fields=v1,v2,d1,d2,d3\n
//! end\n
//! <5 row-major n×n arrays of little-endian f64>
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result, SnapshotError};
use crate::spectral::{Samples, SpectralGrid};
use crate::state::SimState;

pub const MAGIC: &[u8; 6] = b"ELGL1\n";
const FIELDS: &str = "v1,v2,d1,d2,d3";

/// Serialized form of `state`.
pub fn encode(state: &SimState, epsilon: f64) -> Vec<u8> {
    let n = state.n();
    let mut out = Vec::with_capacity(64 + 5 * n * n * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(format!("n={n}\neps={epsilon:e}\nt={:e}\nfields={FIELDS}\nend\n", state.t()).as_bytes());
    for block in [state.v.physical(), state.d.physical()] {
        for x in block.as_slice() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn header_value<'a>(line: &'a str, key: &str) -> std::result::Result<&'a str, SnapshotError> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| SnapshotError::BadHeader(line.to_string()))
}

/// Parses a snapshot into `(state, epsilon)`. The state restarts its step
/// counter at the stored time.
pub fn decode(bytes: &[u8]) -> std::result::Result<(SimState, f64), SnapshotError> {
    let rest = bytes.strip_prefix(MAGIC.as_slice()).ok_or(SnapshotError::BadMagic)?;
    let mut lines = Vec::with_capacity(5);
    let mut pos = 0;
    while lines.len() < 5 {
        let end = rest[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| SnapshotError::BadHeader("header ends before `end`".into()))?;
        let line = std::str::from_utf8(&rest[pos..pos + end])
            .map_err(|_| SnapshotError::BadHeader("non-ASCII header".into()))?;
        lines.push(line.to_string());
        pos += end + 1;
    }
    let bad = |l: &str| SnapshotError::BadHeader(l.to_string());
    let n: usize = header_value(&lines[0], "n")?.parse().map_err(|_| bad(&lines[0]))?;
    let eps: f64 = header_value(&lines[1], "eps")?.parse().map_err(|_| bad(&lines[1]))?;
    let t: f64 = header_value(&lines[2], "t")?.parse().map_err(|_| bad(&lines[2]))?;
    if header_value(&lines[3], "fields")? != FIELDS {
        return Err(bad(&lines[3]));
    }
    if lines[4] != "end" {
        return Err(bad(&lines[4]));
    }
    let grid = SpectralGrid::new(n).map_err(|_| bad(&lines[0]))?;

    let payload = &rest[pos..];
    let want = 5 * n * n * 8;
    if payload.len() != want {
        let cells = payload.len() / 40;
        let found = (cells as f64).sqrt().round() as usize;
        if payload.len() % 40 == 0 && found * found == cells && found != n {
            return Err(SnapshotError::SizeMismatch { declared: n, found });
        }
        return Err(if payload.len() < want {
            SnapshotError::Truncated {
                missing: want - payload.len(),
            }
        } else {
            SnapshotError::TrailingBytes {
                n,
                extra: payload.len() - want,
            }
        });
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let v = Samples::from_vec(n, 2, values[..2 * n * n].to_vec()).unwrap();
    let d = Samples::from_vec(n, 3, values[2 * n * n..].to_vec()).unwrap();
    let mut state = SimState::new(&grid, v, d).map_err(|e| SnapshotError::BadHeader(e.to_string()))?;
    state.t_start = t;
    Ok((state, eps))
}

pub fn write_snapshot(state: &SimState, epsilon: f64, path: &Path) -> Result<()> {
    fs::write(path, encode(state, epsilon))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SimState, f64)> {
    let bytes = fs::read(path)?;
    decode(&bytes).map_err(|kind| Error::Snapshot {
        path: path.to_path_buf(),
        kind,
    })
}
