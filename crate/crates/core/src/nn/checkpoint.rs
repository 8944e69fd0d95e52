//! Binary network checkpoints.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! offset  size       field
//! 0       4          magic "SHNN"
//! 4       4  u32     format version (1)
//! 8       4  u32     activation (0 tanh, 1 sigmoid, 2 swish)
//! 12      4  u32     number of layer widths L + 1
//! 16      8 (L+1)    u64 widths N_0 .. N_L
//! ..      8          u64 parameter count P
//! ..      8 P        f64 parameters: for each layer, row-major A_l then b_l
//! ```

use std::io::{Read, Write};

use super::network::{Activation, Network};
use crate::error::{Error, Result};

pub const NETWORK_MAGIC: &[u8; 4] = b"SHNN";
pub const FORMAT_VERSION: u32 = 1;

/// Upper bound on widths read from disk, so corrupt files fail cleanly.
const MAX_WIDTH: u64 = 1 << 20;

pub(crate) fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub(crate) fn expect_magic(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    if &b != magic {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&b),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported format version {version}")));
    }
    Ok(())
}

pub fn write_network(w: &mut impl Write, net: &Network) -> Result<()> {
    w.write_all(NETWORK_MAGIC)?;
    write_u32(w, FORMAT_VERSION)?;
    write_u32(w, net.activation().code())?;
    write_u32(w, net.dims().len() as u32)?;
    for &d in net.dims() {
        write_u64(w, d as u64)?;
    }
    write_u64(w, net.params().len() as u64)?;
    for &p in net.params() {
        write_f64(w, p)?;
    }
    Ok(())
}

pub fn read_network(r: &mut impl Read) -> Result<Network> {
    expect_magic(r, NETWORK_MAGIC)?;
    let code = read_u32(r)?;
    let activation =
        Activation::from_code(code).ok_or_else(|| Error::Checkpoint(format!("unknown activation code {code}")))?;
    let n_dims = read_u32(r)?;
    if !(2..=64).contains(&n_dims) {
        return Err(Error::Checkpoint(format!("implausible layer count {n_dims}")));
    }
    let mut dims = Vec::with_capacity(n_dims as usize);
    for _ in 0..n_dims {
        let d = read_u64(r)?;
        if d == 0 || d > MAX_WIDTH {
            return Err(Error::Checkpoint(format!("implausible layer width {d}")));
        }
        dims.push(d as usize);
    }
    let count = read_u64(r)? as usize;
    let expected = Network::zeros(&dims, activation)?.params().len();
    if count != expected {
        return Err(Error::Checkpoint(format!("parameter count {count} does not match widths {dims:?}")));
    }
    let params = (0..count).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    Network::from_params(&dims, activation, params)
}
