//! Constrained NIfTI-1 reader/writer.
//!
//! Accepted inputs: uncompressed single-file ("n+1\0") records, `dim[0] = 3`,
//! datatypes uint8/int16/int32/float32/float64. Byte order is inferred by
//! testing whether `dim[0]` decodes into 1..7 under little-endian; otherwise
//! big-endian is assumed, and `sizeof_hdr` must then decode to 348.
//! Orientation/affine fields are ignored; voxel order is taken as stored.

use super::Volume;
use thiserror::Error;

const HEADER_LEN: usize = 348;
const MIN_LEN: usize = 352;
const MAGIC: &[u8; 4] = b"n+1\0";

#[derive(Debug, Error, PartialEq)]
pub enum NiftiError {
    #[error("truncated file: need {needed} bytes, have {have}")]
    TruncatedFile { needed: u64, have: u64 },
    #[error("bad magic (expected \"n+1\\0\")")]
    BadMagic,
    #[error("unsupported datatype code {0}")]
    UnsupportedDatatype(i16),
    #[error("unsupported dim[0] = {0} (only 3D volumes are accepted)")]
    UnsupportedDim(i16),
    #[error("compressed input is not supported")]
    UnsupportedEncoding,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("non-finite voxel data")]
    NonFiniteData,
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Clone, Copy)]
enum ByteOrder {
    Little,
    Big,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    order: ByteOrder,
}

impl<'a> Cursor<'a> {
    fn u8_at(&self, off: usize) -> u8 {
        self.bytes[off]
    }
    fn i16_at(&self, off: usize) -> i16 {
        let b = [self.bytes[off], self.bytes[off + 1]];
        match self.order {
            ByteOrder::Little => i16::from_le_bytes(b),
            ByteOrder::Big => i16::from_be_bytes(b),
        }
    }
    fn i32_at(&self, off: usize) -> i32 {
        let b: [u8; 4] = self.bytes[off..off + 4].try_into().unwrap();
        match self.order {
            ByteOrder::Little => i32::from_le_bytes(b),
            ByteOrder::Big => i32::from_be_bytes(b),
        }
    }
    fn f32_at(&self, off: usize) -> f32 {
        let b: [u8; 4] = self.bytes[off..off + 4].try_into().unwrap();
        match self.order {
            ByteOrder::Little => f32::from_le_bytes(b),
            ByteOrder::Big => f32::from_be_bytes(b),
        }
    }
    fn f64_at(&self, off: usize) -> f64 {
        let b: [u8; 8] = self.bytes[off..off + 8].try_into().unwrap();
        match self.order {
            ByteOrder::Little => f64::from_le_bytes(b),
            ByteOrder::Big => f64::from_be_bytes(b),
        }
    }
}

fn datatype_size(code: i16) -> Option<usize> {
    match code {
        2 => Some(1),  // uint8
        4 => Some(2),  // int16
        8 => Some(4),  // int32
        16 => Some(4), // float32
        64 => Some(8), // float64
        _ => None,
    }
}

pub fn parse_nifti(bytes: &[u8]) -> Result<Volume, NiftiError> {
    if bytes.len() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b {
        return Err(NiftiError::UnsupportedEncoding);
    }
    if bytes.len() < MIN_LEN {
        return Err(NiftiError::TruncatedFile {
            needed: MIN_LEN as u64,
            have: bytes.len() as u64,
        });
    }

    let le_dim0 = i16::from_le_bytes([bytes[40], bytes[41]]);
    let order = if (1..=7).contains(&le_dim0) {
        ByteOrder::Little
    } else {
        ByteOrder::Big
    };
    let cur = Cursor { bytes, order };

    if cur.i32_at(0) != HEADER_LEN as i32 {
        return Err(NiftiError::BadHeader(format!(
            "sizeof_hdr = {} (expected 348)",
            cur.i32_at(0)
        )));
    }
    if &bytes[344..348] != MAGIC {
        return Err(NiftiError::BadMagic);
    }
    let datatype = cur.i16_at(70);
    let elem_size = datatype_size(datatype).ok_or(NiftiError::UnsupportedDatatype(datatype))?;
    let dim0 = cur.i16_at(40);
    if dim0 != 3 {
        return Err(NiftiError::UnsupportedDim(dim0));
    }

    let mut dims = [0usize; 3];
    for (i, d) in dims.iter_mut().enumerate() {
        let v = cur.i16_at(40 + 2 * (i + 1));
        if v <= 0 {
            return Err(NiftiError::BadHeader(format!("dim[{}] = {}", i + 1, v)));
        }
        *d = v as usize;
    }

    let mut spacing = [0f64; 3];
    for (i, s) in spacing.iter_mut().enumerate() {
        let p = cur.f32_at(76 + 4 * (i + 1));
        if !p.is_finite() {
            return Err(NiftiError::BadHeader(format!("pixdim[{}] = {}", i + 1, p)));
        }
        // Negative pixdim can occur via qfac conventions; magnitude is the
        // physical spacing. Exactly 0 is malformed-but-common: coerce to 1 mm.
        *s = if p == 0.0 {
            log::warn!("pixdim[{}] is 0; coercing to 1.0 mm", i + 1);
            1.0
        } else {
            f64::from(p.abs())
        };
    }

    let vox_offset_f = cur.f32_at(108);
    if !vox_offset_f.is_finite() || vox_offset_f < HEADER_LEN as f32 {
        return Err(NiftiError::BadHeader(format!("vox_offset = {vox_offset_f}")));
    }
    let vox_offset = vox_offset_f as u64;

    let n = dims[0] as u64 * dims[1] as u64 * dims[2] as u64;
    let needed = vox_offset
        .checked_add(n.checked_mul(elem_size as u64).ok_or_else(|| {
            NiftiError::BadHeader("data extent overflows".into())
        })?)
        .ok_or_else(|| NiftiError::BadHeader("data extent overflows".into()))?;
    if (bytes.len() as u64) < needed {
        return Err(NiftiError::TruncatedFile {
            needed,
            have: bytes.len() as u64,
        });
    }

    let raw_slope = f64::from(cur.f32_at(112));
    let raw_inter = f64::from(cur.f32_at(116));
    if !raw_slope.is_finite() || !raw_inter.is_finite() {
        return Err(NiftiError::BadHeader("non-finite scl_slope/scl_inter".into()));
    }
    let slope = if raw_slope == 0.0 { 1.0 } else { raw_slope };
    let inter = raw_inter;

    let base = vox_offset as usize;
    let mut voxels = Vec::with_capacity(n as usize);
    for i in 0..n as usize {
        let v = match datatype {
            2 => f64::from(cur.u8_at(base + i)),
            4 => f64::from(cur.i16_at(base + 2 * i)),
            8 => f64::from(cur.i32_at(base + 4 * i)),
            16 => f64::from(cur.f32_at(base + 4 * i)),
            64 => cur.f64_at(base + 8 * i),
            _ => unreachable!(),
        };
        let v = slope * v + inter;
        if !v.is_finite() {
            return Err(NiftiError::NonFiniteData);
        }
        voxels.push(v);
    }

    Ok(Volume {
        dims: (dims[0], dims[1], dims[2]),
        spacing: (spacing[0], spacing[1], spacing[2]),
        voxels,
        intensity_rescale: (slope, inter),
    })
}

/// Emit a little-endian single-file record: datatype float32, scl_slope 1,
/// scl_inter 0, vox_offset 352.
pub fn write_nifti(v: &Volume) -> Vec<u8> {
    let (nx, ny, nz) = v.dims;
    let mut out = vec![0u8; MIN_LEN + 4 * nx * ny * nz];

    let put_i32 = |buf: &mut [u8], off: usize, val: i32| {
        buf[off..off + 4].copy_from_slice(&val.to_le_bytes())
    };
    let put_i16 = |buf: &mut [u8], off: usize, val: i16| {
        buf[off..off + 2].copy_from_slice(&val.to_le_bytes())
    };
    let put_f32 = |buf: &mut [u8], off: usize, val: f32| {
        buf[off..off + 4].copy_from_slice(&val.to_le_bytes())
    };

    put_i32(&mut out, 0, HEADER_LEN as i32);
    put_i16(&mut out, 40, 3);
    put_i16(&mut out, 42, nx as i16);
    put_i16(&mut out, 44, ny as i16);
    put_i16(&mut out, 46, nz as i16);
    for i in 4..8 {
        put_i16(&mut out, 40 + 2 * i, 1);
    }
    put_i16(&mut out, 70, 16); // float32
    put_i16(&mut out, 72, 32); // bitpix
    put_f32(&mut out, 76, 1.0);
    put_f32(&mut out, 80, v.spacing.0 as f32);
    put_f32(&mut out, 84, v.spacing.1 as f32);
    put_f32(&mut out, 88, v.spacing.2 as f32);
    put_f32(&mut out, 108, MIN_LEN as f32); // vox_offset
    put_f32(&mut out, 112, 1.0); // scl_slope
    put_f32(&mut out, 116, 0.0); // scl_inter
    out[344..348].copy_from_slice(MAGIC);
    // bytes 348..352: extension flag, all zero

    for (i, &val) in v.voxels.iter().enumerate() {
        let off = MIN_LEN + 4 * i;
        out[off..off + 4].copy_from_slice(&(val as f32).to_le_bytes());
    }
    out
}
