use crate::{Error, Result};

/// Grayscale raster, row-major, one byte per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::BadParams(format!("image dimensions must be positive, got {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch { left: pixels.len(), right: width * height });
        }
        Ok(Self { width, height, pixels })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Encodes the image as binary PGM (P5, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

struct Header {
    binary: bool,
    width: usize,
    height: usize,
    maxval: u32,
    data_start: usize,
}

fn skip_ws_and_comments(bytes: &[u8], mut pos: usize) -> usize {
    while pos < bytes.len() {
        match bytes[pos] {
            b'#' => {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            }
            b if b.is_ascii_whitespace() => pos += 1,
            _ => break,
        }
    }
    pos
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<u32> {
    *pos = skip_ws_and_comments(bytes, *pos);
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::MalformedHeader(format!("missing {what}")));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedHeader(format!("{what} out of range")))
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(Error::MalformedHeader("expected magic P2 or P5".into())),
    };
    let mut pos = 2;
    if bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
        return Err(Error::MalformedHeader("expected whitespace after magic".into()));
    }
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("nonpositive dimensions {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MalformedHeader(format!("maxval {maxval} outside 1..=65535")));
    }
    // exactly one whitespace byte separates the header from P5 raster data
    if binary {
        match bytes.get(pos) {
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            _ => return Err(Error::MalformedHeader("missing whitespace before raster".into())),
        }
    }
    Ok(Header { binary, width: width as usize, height: height as usize, maxval, data_start: pos })
}

fn rescale(v: u32, maxval: u32) -> u8 {
    if maxval == 255 {
        return v.min(255) as u8;
    }
    let v = v.min(maxval) as u64;
    ((v * 255 + maxval as u64 / 2) / maxval as u64) as u8
}

/// Decodes a plain (P2) or raw (P5) PGM file.
pub fn load_pgm(bytes: &[u8]) -> Result<BinaryImage> {
    let h = parse_header(bytes)?;
    let expected = h.width * h.height;
    let mut pixels = Vec::with_capacity(expected);
    let data = &bytes[h.data_start..];
    if h.binary {
        let wide = h.maxval > 255;
        let per = if wide { 2 } else { 1 };
        let found = data.len() / per;
        if found < expected {
            return Err(Error::TruncatedData { expected, found });
        }
        for i in 0..expected {
            let v = if wide { u32::from(data[2 * i]) << 8 | u32::from(data[2 * i + 1]) } else { u32::from(data[i]) };
            pixels.push(rescale(v, h.maxval));
        }
    } else {
        let text = std::str::from_utf8(data).map_err(|_| Error::MalformedHeader("P2 raster is not ASCII".into()))?;
        for token in text.split(|c: char| c.is_ascii_whitespace()).filter(|t| !t.is_empty()) {
            if pixels.len() == expected {
                break;
            }
            let v: u32 = token
                .parse()
                .map_err(|_| Error::MalformedHeader(format!("invalid pixel value {token:?}")))?;
            pixels.push(rescale(v, h.maxval));
        }
        if pixels.len() < expected {
            return Err(Error::TruncatedData { expected, found: pixels.len() });
        }
    }
    BinaryImage::new(h.width, h.height, pixels)
}
