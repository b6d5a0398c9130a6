use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, Write};
use std::path::Path;

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::image::LdrImage;

/// Reads an 8-bit RGB or grayscale PNG. Grayscale is replicated into all
/// three channels; palette images are expanded.
pub fn read_ldr(path: impl AsRef<Path>) -> Result<LdrImage> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode_ldr(BufReader::new(file)).map_err(|msg| Error::format(path, msg))
}

pub(crate) fn decode_ldr<R: std::io::BufRead + Seek>(reader: R) -> Result<LdrImage, String> {
    let mut decoder = png::Decoder::new(reader);
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| format!("malformed PNG: {e}"))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| "PNG too large".to_string())?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| format!("malformed PNG: {e}"))?;
    if info.bit_depth != BitDepth::Eight {
        return Err(format!("unsupported bit depth {:?}, only 8-bit PNG is supported", info.bit_depth));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let buf = &buf[..info.buffer_size()];
    let codes: Vec<u8> = match info.color_type {
        ColorType::Rgb => rows(buf, info.line_size, w * 3).collect(),
        ColorType::Grayscale => rows(buf, info.line_size, w).flat_map(|g| [g, g, g]).collect(),
        other => return Err(format!("unsupported color type {other:?}, expected RGB or grayscale")),
    };
    LdrImage::from_codes(w, h, &codes).map_err(|e| e.to_string())
}

fn rows(buf: &[u8], stride: usize, used: usize) -> impl Iterator<Item = u8> + '_ {
    buf.chunks(stride).flat_map(move |row| row[..used].iter().copied())
}

pub fn write_ldr(image: &LdrImage, path: impl AsRef<Path>) -> Result<()> {
    write_ldr_with_text(image, path, &[])
}

/// Writes an 8-bit RGB PNG with extra `tEXt` chunks.
pub fn write_ldr_with_text(image: &LdrImage, path: impl AsRef<Path>, text: &[(&str, &str)]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    encode_ldr(image, BufWriter::new(file), text).map_err(|msg| Error::format(path, msg))
}

pub(crate) fn encode_ldr<W: Write>(image: &LdrImage, writer: W, text: &[(&str, &str)]) -> Result<(), String> {
    let mut encoder = png::Encoder::new(writer, image.width() as u32, image.height() as u32);
    encoder.set_color(ColorType::Rgb);
    encoder.set_depth(BitDepth::Eight);
    for (key, value) in text {
        encoder
            .add_text_chunk(key.to_string(), value.to_string())
            .map_err(|e| e.to_string())?;
    }
    let mut writer = encoder.write_header().map_err(|e| e.to_string())?;
    writer.write_image_data(&image.to_codes()).map_err(|e| e.to_string())?;
    writer.finish().map_err(|e| e.to_string())
}

/// Reads the `tEXt` chunk `key`, if present.
pub fn read_text_chunk(path: impl AsRef<Path>, key: &str) -> Result<Option<String>> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, format!("malformed PNG: {e}")))?;
    Ok(reader
        .info()
        .uncompressed_latin1_text
        .iter()
        .find(|chunk| chunk.keyword == key)
        .map(|chunk| chunk.text.clone()))
}
