//! Binary PNM codec: P5 (gray) and P6 (RGB), maxval 255 or 65535.
//!
//! Samples are normalized to [0,1] on read. On write they are clamped to
//! [0,1] and quantized with round-half-away-from-zero; 16-bit samples are
//! big-endian.

use std::path::Path;

use thiserror::Error;

use crate::image::Image;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PnmError {
    #[error("bad magic at byte {offset}: expected P5 or P6")]
    BadMagic { offset: usize },
    #[error("unexpected end of header at byte {offset}")]
    UnexpectedEof { offset: usize },
    #[error("invalid number at byte {offset}")]
    InvalidNumber { offset: usize },
    #[error("zero image dimension at byte {offset}")]
    ZeroDimension { offset: usize },
    #[error("unsupported maxval {value} at byte {offset}: expected 255 or 65535")]
    UnsupportedMaxval { offset: usize, value: u64 },
    #[error("missing whitespace after header field at byte {offset}")]
    MissingSeparator { offset: usize },
    #[error("truncated raster: missing data at byte {offset}")]
    TruncatedRaster { offset: usize },
    #[error("cannot encode {0} channels: expected 1 or 3")]
    ChannelCount(usize),
    #[error("channels differ in shape")]
    ChannelShape,
    #[error("i/o error: {0}")]
    Io(String),
}

impl PnmError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::BadMagic { .. } => "bad_magic",
            Self::UnexpectedEof { .. } => "unexpected_eof",
            Self::InvalidNumber { .. } => "invalid_number",
            Self::ZeroDimension { .. } => "zero_dimension",
            Self::UnsupportedMaxval { .. } => "unsupported_maxval",
            Self::MissingSeparator { .. } => "missing_separator",
            Self::TruncatedRaster { .. } => "truncated_raster",
            Self::ChannelCount(_) => "channel_count",
            Self::ChannelShape => "channel_shape",
            Self::Io(_) => "io",
        }
    }

    pub fn offset(&self) -> Option<usize> {
        match *self {
            Self::BadMagic { offset }
            | Self::UnexpectedEof { offset }
            | Self::InvalidNumber { offset }
            | Self::ZeroDimension { offset }
            | Self::UnsupportedMaxval { offset, .. }
            | Self::MissingSeparator { offset }
            | Self::TruncatedRaster { offset } => Some(offset),
            _ => None,
        }
    }
}

/// Decoded PNM: one image per channel (1 for P5, 3 for P6).
#[derive(Debug, Clone, PartialEq)]
pub struct PnmImage {
    pub channels: Vec<Image>,
    pub maxval: u16,
}

impl PnmImage {
    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    pub fn is_color(&self) -> bool {
        self.channels.len() == 3
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Whitespace and `#` comments (to end of line).
    fn skip_separators(&mut self) {
        while let Some(b) = self.peek() {
            if b == b'#' {
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    /// A header field preceded by at least one separator.
    fn field(&mut self) -> Result<(u64, usize), PnmError> {
        let before = self.pos;
        self.skip_separators();
        if self.pos == before {
            return Err(match self.peek() {
                None => PnmError::UnexpectedEof { offset: self.pos },
                Some(_) => PnmError::MissingSeparator { offset: self.pos },
            });
        }
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(b) = self.peek().filter(u8::is_ascii_digit) {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((b - b'0') as u64))
                .ok_or(PnmError::InvalidNumber { offset: start })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.peek() {
                None => PnmError::UnexpectedEof { offset: self.pos },
                Some(_) => PnmError::InvalidNumber { offset: self.pos },
            });
        }
        Ok((value, start))
    }
}

pub fn read_pnm(bytes: &[u8]) -> Result<PnmImage, PnmError> {
    if bytes.len() < 2 {
        return Err(if bytes.is_empty() || bytes[0] == b'P' {
            PnmError::UnexpectedEof { offset: bytes.len() }
        } else {
            PnmError::BadMagic { offset: 0 }
        });
    }
    let n_channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        _ => return Err(PnmError::BadMagic { offset: 0 }),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let (width, w_off) = cur.field()?;
    if width == 0 {
        return Err(PnmError::ZeroDimension { offset: w_off });
    }
    let (height, h_off) = cur.field()?;
    if height == 0 {
        return Err(PnmError::ZeroDimension { offset: h_off });
    }
    let (maxval, m_off) = cur.field()?;
    if maxval != 255 && maxval != 65535 {
        return Err(PnmError::UnsupportedMaxval {
            offset: m_off,
            value: maxval,
        });
    }
    match cur.peek() {
        None => return Err(PnmError::UnexpectedEof { offset: cur.pos }),
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => return Err(PnmError::MissingSeparator { offset: cur.pos }),
    }

    let (width, height) = (width as usize, height as usize);
    let bps = if maxval == 255 { 1 } else { 2 };
    let n = width
        .checked_mul(height)
        .and_then(|v| v.checked_mul(n_channels * bps))
        .ok_or(PnmError::InvalidNumber { offset: w_off })?;
    let raster = &bytes[cur.pos..];
    if raster.len() < n {
        return Err(PnmError::TruncatedRaster {
            offset: cur.pos + raster.len(),
        });
    }
    let m = maxval as f64;
    let mut planes = vec![Vec::with_capacity(width * height); n_channels];
    for (i, chunk) in raster[..n].chunks_exact(bps).enumerate() {
        let raw = if bps == 1 {
            chunk[0] as f64
        } else {
            u16::from_be_bytes([chunk[0], chunk[1]]) as f64
        };
        planes[i % n_channels].push(raw / m);
    }
    let channels = planes
        .into_iter()
        .map(|d| Image::from_vec(width, height, d).expect("validated shape"))
        .collect();
    Ok(PnmImage {
        channels,
        maxval: maxval as u16,
    })
}

/// round(clamp(v, 0, 1) * maxval), half away from zero.
pub fn quantize(v: f64, maxval: u16) -> u16 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * maxval as f64).round() as u16
}

pub fn write_pnm(channels: &[Image], maxval: u16) -> Result<Vec<u8>, PnmError> {
    if maxval != 255 && maxval != 65535 {
        return Err(PnmError::UnsupportedMaxval {
            offset: 0,
            value: maxval as u64,
        });
    }
    let magic = match channels.len() {
        1 => "P5",
        3 => "P6",
        n => return Err(PnmError::ChannelCount(n)),
    };
    let (width, height) = channels[0].shape();
    if channels.iter().any(|c| c.shape() != (width, height)) {
        return Err(PnmError::ChannelShape);
    }
    let header = format!("{magic}\n{width} {height}\n{maxval}\n");
    let bps = if maxval == 255 { 1 } else { 2 };
    let mut out = Vec::with_capacity(header.len() + width * height * channels.len() * bps);
    out.extend_from_slice(header.as_bytes());
    for i in 0..width * height {
        for c in channels {
            let q = quantize(c[i], maxval);
            if bps == 1 {
                out.push(q as u8);
            } else {
                out.extend_from_slice(&q.to_be_bytes());
            }
        }
    }
    Ok(out)
}

pub fn read_pnm_file(path: impl AsRef<Path>) -> Result<PnmImage, PnmError> {
    let bytes = std::fs::read(path.as_ref()).map_err(|e| PnmError::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_pnm(&bytes)
}

pub fn write_pnm_file(path: impl AsRef<Path>, channels: &[Image], maxval: u16) -> Result<(), PnmError> {
    let bytes = write_pnm(channels, maxval)?;
    std::fs::write(path.as_ref(), bytes).map_err(|e| PnmError::Io(format!("{}: {e}", path.as_ref().display())))
}
