//! Portable float map. Rows are stored bottom to top; a negative scale
//! marks little-endian data.

use std::io::{BufRead, Write};

use super::HdrImage;

pub fn encode<W: Write>(image: &HdrImage, mut out: W) -> std::io::Result<()> {
    write!(out, "PF\n{} {}\n-1.0\n", image.width, image.height)?;
    let mut row = Vec::with_capacity(image.width * 12);
    for y in (0..image.height).rev() {
        row.clear();
        for px in &image.data[y * image.width..(y + 1) * image.width] {
            for v in px {
                row.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.write_all(&row)?;
    }
    out.flush()
}

/// Reads whitespace-separated header tokens; exactly one whitespace byte
/// separates the last token from the raster.
fn header_tokens<R: BufRead>(input: &mut R, count: usize) -> Result<Vec<String>, String> {
    let mut tokens = Vec::with_capacity(count);
    let mut current = Vec::new();
    let mut byte = [0u8; 1];
    while tokens.len() < count {
        if input.read(&mut byte).map_err(|e| e.to_string())? == 0 {
            return Err("truncated header".into());
        }
        if byte[0].is_ascii_whitespace() {
            if !current.is_empty() {
                tokens.push(String::from_utf8_lossy(&current).into_owned());
                current.clear();
            }
        } else {
            current.push(byte[0]);
            if current.len() > 64 {
                return Err("header token too long".into());
            }
        }
    }
    Ok(tokens)
}

pub fn decode<R: BufRead>(mut input: R) -> Result<HdrImage, String> {
    let tokens = header_tokens(&mut input, 4)?;
    let channels = match tokens[0].as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(format!("not a PFM file (magic {other:?})")),
    };
    let width: usize = tokens[1].parse().map_err(|_| format!("bad width {:?}", tokens[1]))?;
    let height: usize = tokens[2].parse().map_err(|_| format!("bad height {:?}", tokens[2]))?;
    let scale: f32 = tokens[3].parse().map_err(|_| format!("bad scale {:?}", tokens[3]))?;
    if width == 0 || height == 0 {
        return Err(format!("empty image {width}x{height}"));
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(format!("bad scale {scale}"));
    }
    let little = scale < 0.0;

    let row_bytes = width * channels * 4;
    let mut raster = vec![0u8; row_bytes * height];
    input
        .read_exact(&mut raster)
        .map_err(|_| format!("truncated raster, expected {} bytes", raster.len()))?;
    let mut data = vec![[0f32; 3]; width * height];
    for (file_row, bytes) in raster.chunks_exact(row_bytes).enumerate() {
        let y = height - 1 - file_row;
        for (x, px) in bytes.chunks_exact(channels * 4).enumerate() {
            let mut vals = [0f32; 3];
            for (c, b) in px.chunks_exact(4).enumerate() {
                let b = [b[0], b[1], b[2], b[3]];
                vals[c] = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
            }
            if channels == 1 {
                vals = [vals[0]; 3];
            }
            data[y * width + x] = vals;
        }
    }
    Ok(HdrImage {
        width,
        height,
        data,
    })
}
