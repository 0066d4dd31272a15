//! Netpbm graymap (PGM) reading and writing, plain (`P2`) and raw (`P5`).
//!
//! Samples are normalized by `maxval` into `[0, 1]`. Raw files with
//! `maxval > 255` use two bytes per sample, most significant first.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pixels::PixelGrid;

struct Header {
    plain: bool,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first raster byte.
    data_start: usize,
}

fn is_ws(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

/// Reads one ASCII decimal token, skipping whitespace and `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    loop {
        while *pos < bytes.len() && is_ws(bytes[*pos]) {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' && bytes[*pos] != b'\r' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Pgm(format!(
            "expected a decimal number at byte {start}"
        )));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse::<u32>().ok())
        .ok_or_else(|| Error::Pgm(format!("number out of range at byte {start}")))
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::Pgm("missing magic number".into()));
    }
    let plain = match bytes[1] {
        b'2' => true,
        b'5' => false,
        other => return Err(Error::Pgm(format!("unsupported magic P{}", other as char))),
    };
    let mut pos = 2;
    let width = next_token(bytes, &mut pos)? as usize;
    let height = next_token(bytes, &mut pos)? as usize;
    let maxval = next_token(bytes, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(Error::Pgm("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Pgm(format!(
            "maxval {maxval} out of range 1..=65535"
        )));
    }
    if !plain {
        // exactly one whitespace byte separates maxval from the raster
        if pos >= bytes.len() || !is_ws(bytes[pos]) {
            return Err(Error::Pgm("missing whitespace after maxval".into()));
        }
        pos += 1;
    }
    Ok(Header {
        plain,
        width,
        height,
        maxval,
        data_start: pos,
    })
}

/// Parses a PGM image held in memory.
pub fn decode(bytes: &[u8]) -> Result<PixelGrid> {
    let h = parse_header(bytes)?;
    let n = h.width * h.height;
    let scale = 1.0 / h.maxval as f64;
    let mut data = Vec::with_capacity(n);
    if h.plain {
        let mut pos = h.data_start;
        for i in 0..n {
            let v = next_token(bytes, &mut pos)
                .map_err(|_| Error::Pgm(format!("raster truncated at sample {i}")))?;
            if v > h.maxval {
                return Err(Error::Pgm(format!(
                    "sample {v} exceeds maxval {}",
                    h.maxval
                )));
            }
            data.push(v as f64 * scale);
        }
    } else {
        let wide = h.maxval > 255;
        let need = n * if wide { 2 } else { 1 };
        let raster = bytes
            .get(h.data_start..h.data_start + need)
            .ok_or_else(|| Error::Pgm(format!("raster truncated: need {need} bytes")))?;
        if wide {
            for pair in raster.chunks_exact(2) {
                let v = u16::from_be_bytes([pair[0], pair[1]]) as u32;
                if v > h.maxval {
                    return Err(Error::Pgm(format!(
                        "sample {v} exceeds maxval {}",
                        h.maxval
                    )));
                }
                data.push(v as f64 * scale);
            }
        } else {
            for &b in raster {
                if b as u32 > h.maxval {
                    return Err(Error::Pgm(format!(
                        "sample {b} exceeds maxval {}",
                        h.maxval
                    )));
                }
                data.push(b as f64 * scale);
            }
        }
    }
    Ok(PixelGrid::new(h.width, h.height, data))
}

pub fn read(path: impl AsRef<Path>) -> Result<PixelGrid> {
    decode(&std::fs::read(path)?)
}

/// Encodes a grid as 8-bit raw PGM, clamping to `[0, 1]` and rounding.
pub fn encode_p5(grid: &PixelGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.width(), grid.height()).into_bytes();
    out.extend(grid.data().iter().map(|&v| to_byte(v)));
    out
}

/// Encodes a grid as 8-bit plain PGM.
pub fn encode_p2(grid: &PixelGrid) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n255\n", grid.width(), grid.height());
    for row in grid.data().chunks(grid.width()) {
        let line: Vec<String> = row.iter().map(|&v| to_byte(v).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn write_p5(path: impl AsRef<Path>, grid: &PixelGrid) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_p5(grid))?;
    Ok(())
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}
