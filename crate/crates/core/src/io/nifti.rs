//! Minimal NIfTI-1 single-file (`.nii`, optionally gzip-wrapped) reader and
//! writer for scalar 3D volumes.
//!
//! The in-memory grid keeps the on-disk voxel order: NIfTI stores `x` fastest,
//! so a volume with `dim = [nx, ny, nz]` becomes an [`ImageGrid`] of shape
//! `[nz, ny, nx]`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{FrdError, Result};
use crate::grid::ImageGrid;
use crate::scalar::Real;

const HEADER_SIZE: usize = 348;
const DATA_OFFSET: usize = 352;

/// Voxel storage types supported by the loader.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NiftiDatatype {
    Uint8,
    Int16,
    Int32,
    Float32,
    Float64,
    Int8,
    Uint16,
}

impl NiftiDatatype {
    pub fn code(self) -> i16 {
        match self {
            NiftiDatatype::Uint8 => 2,
            NiftiDatatype::Int16 => 4,
            NiftiDatatype::Int32 => 8,
            NiftiDatatype::Float32 => 16,
            NiftiDatatype::Float64 => 64,
            NiftiDatatype::Int8 => 256,
            NiftiDatatype::Uint16 => 512,
        }
    }

    pub fn from_code(code: i16) -> Result<Self> {
        Ok(match code {
            2 => NiftiDatatype::Uint8,
            4 => NiftiDatatype::Int16,
            8 => NiftiDatatype::Int32,
            16 => NiftiDatatype::Float32,
            64 => NiftiDatatype::Float64,
            256 => NiftiDatatype::Int8,
            512 => NiftiDatatype::Uint16,
            other => return Err(FrdError::UnsupportedDatatype(other)),
        })
    }

    pub fn bytes(self) -> usize {
        match self {
            NiftiDatatype::Uint8 | NiftiDatatype::Int8 => 1,
            NiftiDatatype::Int16 | NiftiDatatype::Uint16 => 2,
            NiftiDatatype::Int32 | NiftiDatatype::Float32 => 4,
            NiftiDatatype::Float64 => 8,
        }
    }

    /// Whether every value of this type is exactly representable in `f32`.
    pub fn fits_f32(self) -> bool {
        !matches!(self, NiftiDatatype::Int32 | NiftiDatatype::Float64)
    }
}

/// The header fields this crate reads or carries over to derived volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct NiftiHeader {
    pub dim: [i16; 8],
    pub datatype: NiftiDatatype,
    pub pixdim: [f32; 8],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub xyzt_units: u8,
    pub descrip: [u8; 80],
    pub qform_code: i16,
    pub sform_code: i16,
    pub quatern: [f32; 3],
    pub qoffset: [f32; 3],
    pub srow: [[f32; 4]; 3],
}

impl NiftiHeader {
    /// Header for a fresh volume of shape `[nz, ny, nx]` with unit spacing.
    pub fn for_shape(shape: &[usize], datatype: NiftiDatatype) -> Self {
        let mut dim = [1i16; 8];
        dim[0] = 3;
        dim[1] = shape[2] as i16;
        dim[2] = shape[1] as i16;
        dim[3] = shape[0] as i16;
        let mut pixdim = [0f32; 8];
        pixdim[..4].copy_from_slice(&[1.0, 1.0, 1.0, 1.0]);
        Self {
            dim,
            datatype,
            pixdim,
            vox_offset: DATA_OFFSET as f32,
            scl_slope: 1.0,
            scl_inter: 0.0,
            xyzt_units: 2,
            descrip: [0; 80],
            qform_code: 0,
            sform_code: 0,
            quatern: [0.0; 3],
            qoffset: [0.0; 3],
            srow: [[0.0; 4]; 3],
        }
    }

    /// Grid shape `[nz, ny, nx]`.
    pub fn grid_shape(&self) -> Result<Vec<usize>> {
        let ndim = self.dim[0];
        if !(1..=7).contains(&ndim) {
            return Err(FrdError::UnsupportedNiftiDims(format!("dim[0] = {ndim}")));
        }
        for axis in 4..=ndim as usize {
            if self.dim[axis] > 1 {
                return Err(FrdError::UnsupportedNiftiDims(format!(
                    "{ndim}D volume with {} entries along axis {axis}",
                    self.dim[axis]
                )));
            }
        }
        let extent = |axis: usize| -> Result<usize> {
            if axis > ndim as usize {
                return Ok(1);
            }
            let e = self.dim[axis];
            if e < 1 {
                return Err(FrdError::UnsupportedNiftiDims(format!("dim[{axis}] = {e}")));
            }
            Ok(e as usize)
        };
        Ok(vec![extent(3)?, extent(2)?, extent(1)?])
    }

    fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_SIZE {
            return Err(FrdError::NotNifti);
        }
        let little = i32::from_le_bytes(bytes[0..4].try_into().unwrap()) == HEADER_SIZE as i32;
        let big = i32::from_be_bytes(bytes[0..4].try_into().unwrap()) == HEADER_SIZE as i32;
        if !(little || big) || &bytes[344..348] != b"n+1\0" {
            return Err(FrdError::NotNifti);
        }
        let rd = Fields { bytes, little };
        let mut dim = [0i16; 8];
        for (k, d) in dim.iter_mut().enumerate() {
            *d = rd.i16(40 + 2 * k);
        }
        let mut pixdim = [0f32; 8];
        for (k, p) in pixdim.iter_mut().enumerate() {
            *p = rd.f32(76 + 4 * k);
        }
        let mut descrip = [0u8; 80];
        descrip.copy_from_slice(&bytes[148..228]);
        let mut srow = [[0f32; 4]; 3];
        for (r, row) in srow.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = rd.f32(280 + 16 * r + 4 * c);
            }
        }
        Ok(Self {
            dim,
            datatype: NiftiDatatype::from_code(rd.i16(70))?,
            pixdim,
            vox_offset: rd.f32(108),
            scl_slope: rd.f32(112),
            scl_inter: rd.f32(116),
            xyzt_units: bytes[123],
            descrip,
            qform_code: rd.i16(252),
            sform_code: rd.i16(254),
            quatern: [rd.f32(256), rd.f32(260), rd.f32(264)],
            qoffset: [rd.f32(268), rd.f32(272), rd.f32(276)],
            srow,
        })
    }

    /// Little-endian 348-byte header followed by the 4-byte empty extension.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = vec![0u8; DATA_OFFSET];
        let put_i16 = |b: &mut Vec<u8>, at: usize, v: i16| b[at..at + 2].copy_from_slice(&v.to_le_bytes());
        let put_f32 = |b: &mut Vec<u8>, at: usize, v: f32| b[at..at + 4].copy_from_slice(&v.to_le_bytes());
        b[0..4].copy_from_slice(&(HEADER_SIZE as i32).to_le_bytes());
        b[38] = b'r';
        for (k, &d) in self.dim.iter().enumerate() {
            put_i16(&mut b, 40 + 2 * k, d);
        }
        put_i16(&mut b, 70, self.datatype.code());
        put_i16(&mut b, 72, (self.datatype.bytes() * 8) as i16);
        for (k, &p) in self.pixdim.iter().enumerate() {
            put_f32(&mut b, 76 + 4 * k, p);
        }
        put_f32(&mut b, 108, DATA_OFFSET as f32);
        put_f32(&mut b, 112, self.scl_slope);
        put_f32(&mut b, 116, self.scl_inter);
        b[123] = self.xyzt_units;
        b[148..228].copy_from_slice(&self.descrip);
        put_i16(&mut b, 252, self.qform_code);
        put_i16(&mut b, 254, self.sform_code);
        for k in 0..3 {
            put_f32(&mut b, 256 + 4 * k, self.quatern[k]);
            put_f32(&mut b, 268 + 4 * k, self.qoffset[k]);
        }
        for (r, row) in self.srow.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                put_f32(&mut b, 280 + 16 * r + 4 * c, v);
            }
        }
        b[344..348].copy_from_slice(b"n+1\0");
        b
    }
}

struct Fields<'a> {
    bytes: &'a [u8],
    little: bool,
}

impl Fields<'_> {
    fn array<const N: usize>(&self, at: usize) -> [u8; N] {
        let mut a: [u8; N] = self.bytes[at..at + N].try_into().unwrap();
        if !self.little {
            a.reverse();
        }
        a
    }

    fn i16(&self, at: usize) -> i16 {
        i16::from_le_bytes(self.array(at))
    }

    fn f32(&self, at: usize) -> f32 {
        f32::from_le_bytes(self.array(at))
    }
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path).and_then(|f| BufReader::new(f).read_to_end(&mut raw)).map_err(|e| FrdError::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out).map_err(|e| FrdError::io(path, e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

/// Reads a volume together with its header.
pub fn read_nifti<T: Real>(path: &Path) -> Result<(ImageGrid<T>, NiftiHeader)> {
    let bytes = read_all(path)?;
    let header = NiftiHeader::parse(&bytes)?;
    let little = i32::from_le_bytes(bytes[0..4].try_into().unwrap()) == HEADER_SIZE as i32;
    let shape = header.grid_shape()?;
    let count: usize = shape.iter().product();
    let offset = header.vox_offset.max(DATA_OFFSET as f32) as usize;
    let width = header.datatype.bytes();
    let end = offset + count * width;
    if bytes.len() < end {
        return Err(FrdError::io(path, std::io::Error::new(std::io::ErrorKind::UnexpectedEof, "voxel data truncated")));
    }
    let rd = Fields { bytes: &bytes, little };
    let slope = header.scl_slope as f64;
    let inter = header.scl_inter as f64;
    let scaled = slope != 0.0 && slope.is_finite() && inter.is_finite();
    let data = (0..count)
        .map(|k| {
            let at = offset + k * width;
            let raw = match header.datatype {
                NiftiDatatype::Uint8 => bytes[at] as f64,
                NiftiDatatype::Int8 => bytes[at] as i8 as f64,
                NiftiDatatype::Int16 => rd.i16(at) as f64,
                NiftiDatatype::Uint16 => u16::from_le_bytes(rd.array(at)) as f64,
                NiftiDatatype::Int32 => i32::from_le_bytes(rd.array(at)) as f64,
                NiftiDatatype::Float32 => rd.f32(at) as f64,
                NiftiDatatype::Float64 => f64::from_le_bytes(rd.array(at)),
            };
            let v = if scaled { slope * raw + inter } else { raw };
            T::lit(v)
        })
        .collect();
    Ok((ImageGrid::new(shape, data)?, header))
}

/// Loads a 3D scalar volume from a `.nii` / `.nii.gz` file.
pub fn load_volume_3d<T: Real>(path: &Path) -> Result<ImageGrid<T>> {
    read_nifti(path).map(|(img, _)| img)
}

/// Writes `image` using `header` for geometry metadata. Values are stored in
/// `header.datatype`; integer types are rounded and saturated. The scaling
/// fields are written as given, so callers writing raw values should keep
/// slope 1 and intercept 0.
pub fn write_nifti<T: Real>(path: &Path, image: &ImageGrid<T>, header: &NiftiHeader) -> Result<()> {
    if image.dims() != 3 {
        return Err(FrdError::InvalidDims(image.dims()));
    }
    let mut header = header.clone();
    let fresh = NiftiHeader::for_shape(image.shape(), header.datatype);
    header.dim = fresh.dim;
    let mut bytes = header.to_bytes();
    bytes.reserve(image.len() * header.datatype.bytes());
    for &v in image.data() {
        let v = v.as_f64();
        match header.datatype {
            NiftiDatatype::Uint8 => bytes.push(v.round().clamp(0.0, 255.0) as u8),
            NiftiDatatype::Int8 => bytes.push(v.round().clamp(-128.0, 127.0) as i8 as u8),
            NiftiDatatype::Int16 => bytes.extend((v.round().clamp(-32768.0, 32767.0) as i16).to_le_bytes()),
            NiftiDatatype::Uint16 => bytes.extend((v.round().clamp(0.0, 65535.0) as u16).to_le_bytes()),
            NiftiDatatype::Int32 => bytes.extend((v.round() as i32).to_le_bytes()),
            NiftiDatatype::Float32 => bytes.extend((v as f32).to_le_bytes()),
            NiftiDatatype::Float64 => bytes.extend(v.to_le_bytes()),
        }
    }
    let gz = path.to_string_lossy().ends_with(".gz");
    let file = File::create(path).map_err(|e| FrdError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = if gz {
        let mut enc = GzEncoder::new(w, Compression::default());
        enc.write_all(&bytes).and_then(|_| enc.finish()).and_then(|mut w| w.flush())
    } else {
        w.write_all(&bytes).and_then(|_| w.flush())
    };
    res.map_err(|e| FrdError::io(path, e))
}

/// Writes a volume with a fresh unit-spacing header.
pub fn save_volume_3d<T: Real>(path: &Path, image: &ImageGrid<T>, datatype: NiftiDatatype) -> Result<()> {
    write_nifti(path, image, &NiftiHeader::for_shape(image.shape(), datatype))
}
