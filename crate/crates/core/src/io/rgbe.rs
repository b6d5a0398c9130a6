//! Radiance RGBE (`.hdr`) with new-style run-length encoded scanlines.

use std::io::{BufRead, Read, Write};

use super::HdrImage;

const MIN_RLE_WIDTH: usize = 8;
const MAX_RLE_WIDTH: usize = 0x7fff;
const MIN_RUN: usize = 3;

/// Shared-exponent encoding; the largest channel keeps 8 bits of mantissa.
pub(crate) fn to_rgbe(px: [f32; 3]) -> [u8; 4] {
    let m = px[0].max(px[1]).max(px[2]);
    if !(m > 1e-32) {
        return [0; 4];
    }
    let exp = (m as f64).log2().floor() as i32 + 1;
    let mut scale = (-exp as f64).exp2();
    let mut exp = exp;
    // m * scale must land in [0.5, 1)
    if m as f64 * scale >= 1.0 {
        exp += 1;
        scale *= 0.5;
    } else if (m as f64 * scale) < 0.5 {
        exp -= 1;
        scale *= 2.0;
    }
    if exp + 128 > 255 {
        return [255, 255, 255, 255];
    }
    if exp + 128 < 1 {
        return [0; 4];
    }
    let k = scale * 256.0;
    let enc = |v: f32| ((v.max(0.0) as f64) * k).floor().min(255.0) as u8;
    [enc(px[0]), enc(px[1]), enc(px[2]), (exp + 128) as u8]
}

pub(crate) fn from_rgbe(c: [u8; 4]) -> [f32; 3] {
    if c[3] == 0 {
        return [0.0; 3];
    }
    let f = (c[3] as f64 - (128.0 + 8.0)).exp2();
    [c[0], c[1], c[2]].map(|v| ((v as f64 + 0.5) * f) as f32)
}

pub fn encode<W: Write>(image: &HdrImage, mut out: W) -> std::io::Result<()> {
    let (w, h) = (image.width, image.height);
    write!(out, "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y {h} +X {w}\n")?;
    let mut line = Vec::with_capacity(w);
    let mut component = Vec::with_capacity(w);
    let mut packed = Vec::with_capacity(w * 4 + 4);
    for y in 0..h {
        line.clear();
        line.extend(image.data[y * w..(y + 1) * w].iter().map(|&px| to_rgbe(px)));
        packed.clear();
        if (MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&w) {
            packed.extend_from_slice(&[2, 2, (w >> 8) as u8, (w & 0xff) as u8]);
            for c in 0..4 {
                component.clear();
                component.extend(line.iter().map(|px| px[c]));
                rle_component(&component, &mut packed);
            }
        } else {
            packed.extend(line.iter().flatten());
        }
        out.write_all(&packed)?;
    }
    out.flush()
}

fn rle_component(data: &[u8], out: &mut Vec<u8>) {
    let n = data.len();
    let mut i = 0;
    let mut literal_start = 0;
    let flush_literal = |out: &mut Vec<u8>, from: usize, to: usize| {
        for chunk in data[from..to].chunks(128) {
            out.push(chunk.len() as u8);
            out.extend_from_slice(chunk);
        }
    };
    while i < n {
        let mut run = 1;
        while i + run < n && run < 127 && data[i + run] == data[i] {
            run += 1;
        }
        if run >= MIN_RUN {
            flush_literal(out, literal_start, i);
            out.push(128 + run as u8);
            out.push(data[i]);
            i += run;
            literal_start = i;
        } else {
            i += run;
        }
    }
    flush_literal(out, literal_start, n);
}

fn read_line<R: BufRead>(input: &mut R) -> Result<String, String> {
    let mut buf = Vec::new();
    input
        .read_until(b'\n', &mut buf)
        .map_err(|e| format!("truncated header: {e}"))?;
    if buf.is_empty() {
        return Err("truncated header".into());
    }
    while buf.last().is_some_and(|b| *b == b'\n' || *b == b'\r') {
        buf.pop();
    }
    String::from_utf8(buf).map_err(|_| "header is not text".into())
}

pub fn decode<R: BufRead>(mut input: R) -> Result<HdrImage, String> {
    let magic = read_line(&mut input)?;
    if !magic.starts_with("#?") {
        return Err(format!("missing #?RADIANCE signature, found {magic:?}"));
    }
    loop {
        let line = read_line(&mut input)?;
        if line.is_empty() {
            break;
        }
        if let Some(format) = line.strip_prefix("FORMAT=") {
            if format.trim() != "32-bit_rle_rgbe" {
                return Err(format!("unsupported pixel format {format}"));
            }
        }
    }
    let res = read_line(&mut input)?;
    let fields: Vec<&str> = res.split_whitespace().collect();
    let (h, w) = match fields.as_slice() {
        ["-Y", h, "+X", w] => (
            h.parse::<usize>().map_err(|_| format!("bad height in {res:?}"))?,
            w.parse::<usize>().map_err(|_| format!("bad width in {res:?}"))?,
        ),
        _ => return Err(format!("unsupported resolution line {res:?}")),
    };
    if w == 0 || h == 0 {
        return Err(format!("empty image {w}x{h}"));
    }

    let mut data = Vec::with_capacity(w * h);
    let mut line = vec![[0u8; 4]; w];
    for y in 0..h {
        read_scanline(&mut input, &mut line).map_err(|e| format!("scanline {y}: {e}"))?;
        data.extend(line.iter().map(|&c| from_rgbe(c)));
    }
    Ok(HdrImage {
        width: w,
        height: h,
        data,
    })
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<(), String> {
    input.read_exact(buf).map_err(|_| "unexpected end of data".to_string())
}

fn read_scanline<R: Read>(input: &mut R, line: &mut [[u8; 4]]) -> Result<(), String> {
    let w = line.len();
    let mut head = [0u8; 4];
    read_exact(input, &mut head)?;
    let new_rle = (MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&w) && head[0] == 2 && head[1] == 2 && head[2] & 0x80 == 0;
    if new_rle {
        let encoded_width = ((head[2] as usize) << 8) | head[3] as usize;
        if encoded_width != w {
            return Err(format!("run-length width {encoded_width} does not match image width {w}"));
        }
        for c in 0..4 {
            let mut x = 0;
            while x < w {
                let mut count = [0u8; 1];
                read_exact(input, &mut count)?;
                let count = count[0] as usize;
                if count > 128 {
                    let run = count - 128;
                    if x + run > w {
                        return Err("run overflows scanline".into());
                    }
                    let mut value = [0u8; 1];
                    read_exact(input, &mut value)?;
                    for px in &mut line[x..x + run] {
                        px[c] = value[0];
                    }
                    x += run;
                } else {
                    if count == 0 || x + count > w {
                        return Err("bad literal length".into());
                    }
                    let mut values = vec![0u8; count];
                    read_exact(input, &mut values)?;
                    for (px, v) in line[x..x + count].iter_mut().zip(values) {
                        px[c] = v;
                    }
                    x += count;
                }
            }
        }
        return Ok(());
    }

    // flat pixels, possibly with old-style (1,1,1,n) repeat markers
    let mut x = 0;
    let mut shift = 0;
    let mut next = Some(head);
    while x < w {
        let px = match next.take() {
            Some(px) => px,
            None => {
                let mut px = [0u8; 4];
                read_exact(input, &mut px)?;
                px
            }
        };
        if px[0] == 1 && px[1] == 1 && px[2] == 1 {
            if x == 0 {
                return Err("repeat marker at start of scanline".into());
            }
            let count = (px[3] as usize) << shift;
            if x + count > w {
                return Err("repeat overflows scanline".into());
            }
            let prev = line[x - 1];
            line[x..x + count].fill(prev);
            x += count;
            shift += 8;
        } else {
            line[x] = px;
            x += 1;
            shift = 0;
        }
    }
    Ok(())
}
