//! 8-bit raster images, binary PPM (P6) / PAM (P7) serialization, the
//! quantization convention, and pixel normalization for feature extraction.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channels {
    Rgb,
    Rgba,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Rgb => 3,
            Channels::Rgba => 4,
        }
    }
}

/// Row-major 8-bit pixel buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: Channels,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: Channels) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            data: vec![0; width * height * channels.count()],
        })
    }

    pub fn from_raw(
        width: usize,
        height: usize,
        channels: Channels,
        data: Vec<u8>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expect = width * height * channels.count();
        if data.len() != expect {
            return Err(Error::InvalidArgument(format!(
                "pixel buffer length {} does not match {width}x{height}x{}",
                data.len(),
                channels.count()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let c = self.channels.count();
        let i = (y * self.width + x) * c;
        &self.data[i..i + c]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, value: &[u8]) {
        let c = self.channels.count();
        assert_eq!(value.len(), c);
        let i = (y * self.width + x) * c;
        self.data[i..i + c].copy_from_slice(value);
    }

    /// Binary PPM (P6) bytes; RGB images only.
    pub fn to_ppm(&self) -> Result<Vec<u8>> {
        if self.channels != Channels::Rgb {
            return Err(Error::InvalidArgument(
                "PPM serialization requires an RGB image".into(),
            ));
        }
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        Ok(out)
    }

    /// PAM (P7) bytes; RGBA images only.
    pub fn to_pam(&self) -> Result<Vec<u8>> {
        if self.channels != Channels::Rgba {
            return Err(Error::InvalidArgument(
                "PAM serialization requires an RGBA image".into(),
            ));
        }
        let mut out = format!(
            "P7\nWIDTH {}\nHEIGHT {}\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n",
            self.width, self.height
        )
        .into_bytes();
        out.extend_from_slice(&self.data);
        Ok(out)
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_ppm()?).map_err(|e| Error::io(path, e))
    }

    pub fn write_pam(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_pam()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_ppm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        parse_ppm(&bytes).map_err(|msg| Error::parse(path, 0, msg))
    }

    pub fn read_pam(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        parse_pam(&bytes).map_err(|msg| Error::parse(path, 0, msg))
    }
}

/// Clamp to [0, 1] and quantize to 8 bits, rounding half away from zero.
pub fn quantize_unit(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Real-valued pixel tensor produced by [`normalize_pixels`].
#[derive(Debug, Clone)]
pub struct PixelTensor<T: Scalar> {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    /// Row-major, channel-interleaved.
    pub data: Vec<T>,
}

/// Feature-extraction preprocessing: `(pixel - 127.5) / 128` per channel.
/// Output range is a subset of `(-0.9961, 0.9961]`.
pub fn normalize_pixels<T: Scalar>(image: &RasterImage) -> PixelTensor<T> {
    let data = image
        .data()
        .iter()
        .map(|&p| T::of((p as f64 - 127.5) / 128.0))
        .collect();
    PixelTensor {
        width: image.width(),
        height: image.height(),
        channels: image.channels().count(),
        data,
    }
}

// --- netpbm parsing -------------------------------------------------------

/// Pull the next whitespace-delimited token, skipping `#` comments.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(&bytes[start..*pos])
}

fn parse_usize_token(tok: &[u8]) -> std::result::Result<usize, String> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad integer token `{}`", String::from_utf8_lossy(tok)))
}

fn parse_ppm(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos).ok_or("empty file")?;
    if magic != b"P6" {
        return Err("not a binary PPM (P6) file".into());
    }
    let width = parse_usize_token(next_token(bytes, &mut pos).ok_or("missing width")?)?;
    let height = parse_usize_token(next_token(bytes, &mut pos).ok_or("missing height")?)?;
    let maxval = parse_usize_token(next_token(bytes, &mut pos).ok_or("missing maxval")?)?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}, expected 255"));
    }
    pos += 1; // single whitespace byte after maxval
    let expect = width * height * 3;
    if bytes.len() < pos + expect {
        return Err(format!(
            "truncated pixel data: expected {expect} bytes, found {}",
            bytes.len().saturating_sub(pos)
        ));
    }
    RasterImage::from_raw(
        width,
        height,
        Channels::Rgb,
        bytes[pos..pos + expect].to_vec(),
    )
    .map_err(|e| e.to_string())
}

fn parse_pam(bytes: &[u8]) -> std::result::Result<RasterImage, String> {
    let header_end = bytes
        .windows(7)
        .position(|w| w == b"ENDHDR\n")
        .ok_or("missing ENDHDR")?
        + 7;
    let header = std::str::from_utf8(&bytes[..header_end]).map_err(|_| "non-UTF8 header")?;
    let mut lines = header.lines();
    if lines.next() != Some("P7") {
        return Err("not a PAM (P7) file".into());
    }
    let (mut width, mut height, mut depth, mut maxval) = (None, None, None, None);
    for line in lines {
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next()) {
            (Some("WIDTH"), Some(v)) => width = v.parse().ok(),
            (Some("HEIGHT"), Some(v)) => height = v.parse().ok(),
            (Some("DEPTH"), Some(v)) => depth = v.parse().ok(),
            (Some("MAXVAL"), Some(v)) => maxval = v.parse().ok(),
            (Some("TUPLTYPE"), _) | (Some("ENDHDR"), _) | (None, _) => {}
            (Some(other), _) => return Err(format!("unknown PAM header field `{other}`")),
        }
    }
    let width: usize = width.ok_or("missing WIDTH")?;
    let height: usize = height.ok_or("missing HEIGHT")?;
    if depth != Some(4usize) || maxval != Some(255usize) {
        return Err("only DEPTH 4 / MAXVAL 255 PAM images are supported".into());
    }
    let expect = width * height * 4;
    if bytes.len() < header_end + expect {
        return Err("truncated pixel data".into());
    }
    RasterImage::from_raw(
        width,
        height,
        Channels::Rgba,
        bytes[header_end..header_end + expect].to_vec(),
    )
    .map_err(|e| e.to_string())
}
