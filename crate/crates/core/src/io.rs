//! File formats: binary PGM/PPM, 8/16-bit PNG, PFM, and 16-bit label PNGs.
//!
//! Samples are rescaled to `[0, 1]` on load by dividing by the format's
//! maximum value. PFM rasters are stored bottom row first, as the format
//! prescribes; we always write little-endian with scale `-1.0`.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{ColorImage, GrayImage, LabelImage};

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Result of decoding an image file.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedImage {
    Gray(GrayImage),
    Color(ColorImage),
}

impl LoadedImage {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            LoadedImage::Gray(g) => g.dims(),
            LoadedImage::Color(c) => c.dims(),
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn magic_of(bytes: &[u8]) -> String {
    let head = &bytes[..bytes.len().min(4)];
    head.iter().map(|b| format!("{b:02x}")).collect::<Vec<_>>().join(" ")
}

/// Loads a PGM (P5), PPM (P6) or PNG file.
pub fn load_image(path: impl AsRef<Path>) -> Result<LoadedImage> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    decode_image(path, &bytes)
}

fn decode_image(path: &Path, bytes: &[u8]) -> Result<LoadedImage> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        return decode_png(path, bytes);
    }
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        return decode_pnm(path, bytes);
    }
    Err(Error::format(
        path,
        format!("unsupported image format (magic bytes: {})", magic_of(bytes)),
    ))
}

struct PnmHeader {
    channels: usize,
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_pnm_header(path: &Path, bytes: &[u8]) -> Result<PnmHeader> {
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        _ => {
            return Err(Error::format(
                path,
                format!("expected P5 or P6 (magic bytes: {})", magic_of(bytes)),
            ))
        }
    };
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, "malformed PNM header"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::format(path, "malformed PNM header"));
    }
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(path, format!("unsupported maxval {maxval}")));
    }
    Ok(PnmHeader {
        channels,
        width: width as usize,
        height: height as usize,
        maxval,
        data_offset: pos + 1,
    })
}

fn pnm_samples(path: &Path, bytes: &[u8], header: &PnmHeader) -> Result<Vec<f64>> {
    let count = header.width * header.height * header.channels;
    let wide = header.maxval > 255;
    let needed = count * if wide { 2 } else { 1 };
    let raster = &bytes[header.data_offset..];
    if raster.len() < needed {
        return Err(Error::format(
            path,
            format!("truncated raster: {} of {needed} bytes", raster.len()),
        ));
    }
    let max = header.maxval as f64;
    let samples: Vec<f64> = if wide {
        raster[..needed]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / max)
            .collect()
    } else {
        raster[..needed].iter().map(|&b| b as f64 / max).collect()
    };
    if samples.iter().any(|&v| v > 1.0) {
        return Err(Error::format(path, "sample exceeds maxval"));
    }
    Ok(samples)
}

fn decode_pnm(path: &Path, bytes: &[u8]) -> Result<LoadedImage> {
    let header = parse_pnm_header(path, bytes)?;
    let samples = pnm_samples(path, bytes, &header)?;
    if header.channels == 1 {
        Ok(LoadedImage::Gray(GrayImage::new(header.width, header.height, samples)?))
    } else {
        let px = samples.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(LoadedImage::Color(ColorImage::new(header.width, header.height, px)?))
    }
}

struct PngRaster {
    width: usize,
    height: usize,
    channels: usize,
    /// Raw integer samples, interleaved.
    samples: Vec<u16>,
    maxval: u16,
}

fn read_png(path: &Path, bytes: &[u8]) -> Result<PngRaster> {
    let png_err = |e: png::DecodingError| Error::format(path, format!("PNG decode error: {e}"));
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "PNG too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    buf.truncate(info.buffer_size());
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        other => return Err(Error::format(path, format!("unsupported PNG colour type {other:?}"))),
    };
    let (samples, maxval) = match info.bit_depth {
        png::BitDepth::Eight => (buf.iter().map(|&b| b as u16).collect(), 255),
        png::BitDepth::Sixteen => (
            buf.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect(),
            65535,
        ),
        other => return Err(Error::format(path, format!("unsupported PNG bit depth {other:?}"))),
    };
    Ok(PngRaster {
        width: info.width as usize,
        height: info.height as usize,
        channels,
        samples,
        maxval,
    })
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<LoadedImage> {
    let raster = read_png(path, bytes)?;
    let max = raster.maxval as f64;
    let (w, h) = (raster.width, raster.height);
    // alpha channels are dropped
    match raster.channels {
        1 | 2 => {
            let data = raster
                .samples
                .chunks_exact(raster.channels)
                .map(|c| c[0] as f64 / max)
                .collect();
            Ok(LoadedImage::Gray(GrayImage::new(w, h, data)?))
        }
        _ => {
            let data = raster
                .samples
                .chunks_exact(raster.channels)
                .map(|c| [c[0] as f64 / max, c[1] as f64 / max, c[2] as f64 / max])
                .collect();
            Ok(LoadedImage::Color(ColorImage::new(w, h, data)?))
        }
    }
}

fn encode_png(
    path: &Path,
    width: usize,
    height: usize,
    color: png::ColorType,
    depth: png::BitDepth,
    data: &[u8],
) -> Result<()> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width as u32, height as u32);
        encoder.set_color(color);
        encoder.set_depth(depth);
        let enc_err = |e: png::EncodingError| Error::format(path, format!("PNG encode error: {e}"));
        let mut writer = encoder.write_header().map_err(enc_err)?;
        writer.write_image_data(data).map_err(enc_err)?;
        writer.finish().map_err(enc_err)?;
    }
    write_bytes(path, &out)
}

fn quantize8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a label image as a 16-bit grayscale PNG whose pixel values are the
/// label integers.
pub fn save_labels(labels: &LabelImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let max = labels.max_label();
    if max > u16::MAX as u32 || labels.num_labels() > u16::MAX as usize {
        return Err(Error::Range(format!("label {max} does not fit a 16-bit PNG")));
    }
    let data: Vec<u8> = labels.labels().iter().flat_map(|&l| (l as u16).to_be_bytes()).collect();
    encode_png(
        path,
        labels.width(),
        labels.height(),
        png::ColorType::Grayscale,
        png::BitDepth::Sixteen,
        &data,
    )
}

/// Reads a label PNG (8- or 16-bit grayscale); pixel values are labels.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelImage> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    if !bytes.starts_with(&PNG_SIGNATURE) {
        return Err(Error::format(
            path,
            format!("label images must be PNG (magic bytes: {})", magic_of(&bytes)),
        ));
    }
    let raster = read_png(path, &bytes)?;
    if raster.channels != 1 {
        return Err(Error::format(path, "label PNG must be single-channel"));
    }
    LabelImage::new(
        raster.width,
        raster.height,
        raster.samples.into_iter().map(u32::from).collect(),
    )
}

/// Writes an 8-bit grayscale PNG.
pub fn save_gray_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = img.data().iter().map(|&v| quantize8(v)).collect();
    encode_png(
        path.as_ref(),
        img.width(),
        img.height(),
        png::ColorType::Grayscale,
        png::BitDepth::Eight,
        &data,
    )
}

/// Writes an 8-bit RGB PNG.
pub fn save_color_png(img: &ColorImage, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = img.data().iter().flat_map(|px| px.map(quantize8)).collect();
    encode_png(
        path.as_ref(),
        img.width(),
        img.height(),
        png::ColorType::Rgb,
        png::BitDepth::Eight,
        &data,
    )
}

/// Writes an 8-bit binary PGM (P5).
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| quantize8(v)));
    write_bytes(path.as_ref(), &out)
}

/// Writes an 8-bit binary PPM (P6).
pub fn save_ppm(img: &ColorImage, path: impl AsRef<Path>) -> Result<()> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().flat_map(|px| px.map(quantize8)));
    write_bytes(path.as_ref(), &out)
}

/// Writes a single-channel PFM (little-endian, scale -1.0).
pub fn save_pfm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let (w, h) = img.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend((img.get(x, y) as f32).to_le_bytes());
        }
    }
    write_bytes(path.as_ref(), &out)
}

/// Reads a single-channel PFM. Samples are returned as stored (not clamped);
/// non-finite samples are rejected.
pub fn load_pfm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f64>)> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    decode_pfm(path, &bytes)
}

pub(crate) fn decode_pfm(path: &Path, bytes: &[u8]) -> Result<(usize, usize, Vec<f64>)> {
    if bytes.starts_with(b"PF") {
        return Err(Error::format(path, "colour PFM is not supported; expected 'Pf'"));
    }
    if !bytes.starts_with(b"Pf") {
        return Err(Error::format(
            path,
            format!("not a PFM file (magic bytes: {})", magic_of(bytes)),
        ));
    }
    // Three whitespace-separated header tokens follow the magic.
    let mut pos = 2;
    let mut tokens = Vec::with_capacity(3);
    while tokens.len() < 3 {
        while bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
            pos += 1;
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(path, "truncated PFM header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    let bad = || Error::format(path, "malformed PFM header");
    let width: usize = tokens[0].parse().map_err(|_| bad())?;
    let height: usize = tokens[1].parse().map_err(|_| bad())?;
    let scale: f64 = tokens[2].parse().map_err(|_| bad())?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(bad());
    }
    let little = scale < 0.0;
    let needed = width * height * 4;
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() < needed {
        return Err(Error::format(
            path,
            format!("truncated raster: {} of {needed} bytes", raster.len()),
        ));
    }
    let mut data = vec![0.0; width * height];
    for (i, chunk) in raster[..needed].chunks_exact(4).enumerate() {
        let arr = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(arr)
        } else {
            f32::from_be_bytes(arr)
        } as f64;
        if !v.is_finite() {
            return Err(Error::format(path, format!("non-finite sample at index {i}")));
        }
        let (x, row_from_bottom) = (i % width, i / width);
        data[(height - 1 - row_from_bottom) * width + x] = v;
    }
    Ok((width, height, data))
}
