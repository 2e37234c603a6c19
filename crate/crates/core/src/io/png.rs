//! Grayscale PNG (8- and 16-bit) loading and saving.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{FrdError, Result};
use crate::grid::ImageGrid;
use crate::scalar::Real;

/// Sample depth of a grayscale PNG.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PngDepth {
    Eight,
    Sixteen,
}

impl PngDepth {
    pub fn max_value(self) -> f64 {
        match self {
            PngDepth::Eight => 255.0,
            PngDepth::Sixteen => 65535.0,
        }
    }
}

/// Reads a grayscale PNG and reports its bit depth. Samples are converted to
/// floating point without rescaling.
pub fn read_png<T: Real>(path: &Path) -> Result<(ImageGrid<T>, PngDepth)> {
    let file = File::open(path).map_err(|e| FrdError::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| FrdError::Png(format!("{}: {e}", path.display())))?;
    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    if color != png::ColorType::Grayscale {
        return Err(FrdError::UnsupportedColorType(format!("{color:?} in {}", path.display())));
    }
    let depth = match depth {
        png::BitDepth::Eight => PngDepth::Eight,
        png::BitDepth::Sixteen => PngDepth::Sixteen,
        other => {
            return Err(FrdError::Png(format!("{}: unsupported bit depth {other:?}", path.display())));
        }
    };
    let size =
        reader.output_buffer_size().ok_or_else(|| FrdError::Png(format!("{}: image too large", path.display())))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(|e| FrdError::Png(format!("{}: {e}", path.display())))?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let mut data = Vec::with_capacity(w * h);
    for row in buf[..frame.line_size * h].chunks(frame.line_size) {
        match depth {
            PngDepth::Eight => data.extend(row[..w].iter().map(|&b| T::lit(b as f64))),
            PngDepth::Sixteen => {
                data.extend(row[..2 * w].chunks_exact(2).map(|b| T::lit(u16::from_be_bytes([b[0], b[1]]) as f64)))
            }
        }
    }
    Ok((ImageGrid::new(vec![h, w], data)?, depth))
}

/// Loads a 2D grayscale PNG.
pub fn load_image_2d<T: Real>(path: &Path) -> Result<ImageGrid<T>> {
    read_png(path).map(|(img, _)| img)
}

/// Writes a 2D image as grayscale PNG; values are rounded and saturated to
/// the sample range of `depth`.
pub fn save_image_2d<T: Real>(path: &Path, image: &ImageGrid<T>, depth: PngDepth) -> Result<()> {
    if image.dims() != 2 {
        return Err(FrdError::InvalidDims(image.dims()));
    }
    let (h, w) = (image.shape()[0], image.shape()[1]);
    let file = File::create(path).map_err(|e| FrdError::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), w as u32, h as u32);
    encoder.set_color(png::ColorType::Grayscale);
    let max = depth.max_value();
    let quantize = |v: T| v.as_f64().round().clamp(0.0, max);
    let bytes: Vec<u8> = match depth {
        PngDepth::Eight => {
            encoder.set_depth(png::BitDepth::Eight);
            image.data().iter().map(|&v| quantize(v) as u8).collect()
        }
        PngDepth::Sixteen => {
            encoder.set_depth(png::BitDepth::Sixteen);
            image.data().iter().flat_map(|&v| (quantize(v) as u16).to_be_bytes()).collect()
        }
    };
    let png_err = |e: png::EncodingError| FrdError::Png(format!("{}: {e}", path.display()));
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(&bytes).map_err(png_err)?;
    writer.finish().map_err(png_err)
}
