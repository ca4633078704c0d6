//! Minimal, header-correct image files. `salt` lands in a comment or
//! metadata block so equal sizes can still yield distinct digests.

pub fn gif(w: u16, h: u16, salt: u64) -> Vec<u8> {
    let mut b = b"GIF89a".to_vec();
    b.extend_from_slice(&w.to_le_bytes());
    b.extend_from_slice(&h.to_le_bytes());
    // Global color table with two entries.
    b.extend_from_slice(&[0x80, 0x00, 0x00, 0xFF, 0xFF, 0xFF, 0x00, 0x00, 0x00]);
    let note = salt.to_string();
    b.extend_from_slice(&[0x21, 0xFE, note.len() as u8]);
    b.extend_from_slice(note.as_bytes());
    b.push(0x00);
    b.extend_from_slice(&[0x2C, 0, 0, 0, 0]);
    b.extend_from_slice(&w.to_le_bytes());
    b.extend_from_slice(&h.to_le_bytes());
    b.extend_from_slice(&[0x00, 0x02, 0x02, 0x44, 0x01, 0x00, 0x3B]);
    b
}

fn png_chunk(out: &mut Vec<u8>, kind: &[u8; 4], data: &[u8]) {
    out.extend_from_slice(&(data.len() as u32).to_be_bytes());
    let mut crc = crc32fast::Hasher::new();
    crc.update(kind);
    crc.update(data);
    out.extend_from_slice(kind);
    out.extend_from_slice(data);
    out.extend_from_slice(&crc.finalize().to_be_bytes());
}

pub fn png(w: u32, h: u32, salt: u64) -> Vec<u8> {
    let mut b = b"\x89PNG\r\n\x1a\n".to_vec();
    let mut ihdr = Vec::new();
    ihdr.extend_from_slice(&w.to_be_bytes());
    ihdr.extend_from_slice(&h.to_be_bytes());
    ihdr.extend_from_slice(&[8, 6, 0, 0, 0]);
    png_chunk(&mut b, b"IHDR", &ihdr);
    png_chunk(&mut b, b"tEXt", format!("Comment\0{salt}").as_bytes());
    png_chunk(&mut b, b"IEND", &[]);
    b
}

pub fn jpeg(w: u16, h: u16, salt: u64) -> Vec<u8> {
    let mut b = vec![0xFF, 0xD8];
    b.extend_from_slice(&[0xFF, 0xE0, 0x00, 0x10]);
    b.extend_from_slice(b"JFIF\0\x01\x01\x00\x00\x01\x00\x01\x00\x00");
    let note = salt.to_string();
    b.extend_from_slice(&[0xFF, 0xFE]);
    b.extend_from_slice(&((note.len() + 2) as u16).to_be_bytes());
    b.extend_from_slice(note.as_bytes());
    b.extend_from_slice(&[0xFF, 0xC0, 0x00, 0x11, 0x08]);
    b.extend_from_slice(&h.to_be_bytes());
    b.extend_from_slice(&w.to_be_bytes());
    b.extend_from_slice(&[0x03, 0x01, 0x22, 0x00, 0x02, 0x11, 0x01, 0x03, 0x11, 0x01]);
    b.extend_from_slice(&[0xFF, 0xD9]);
    b
}

/// Lossless (VP8L) WebP header.
pub fn webp(w: u32, h: u32, salt: u64) -> Vec<u8> {
    let bits = (w - 1) | ((h - 1) << 14);
    let mut chunk = vec![0x2F];
    chunk.extend_from_slice(&bits.to_le_bytes());
    chunk.extend_from_slice(&salt.to_le_bytes());
    let mut b = b"RIFF".to_vec();
    b.extend_from_slice(&((4 + 8 + chunk.len()) as u32).to_le_bytes());
    b.extend_from_slice(b"WEBPVP8L");
    b.extend_from_slice(&(chunk.len() as u32).to_le_bytes());
    b.extend_from_slice(&chunk);
    b
}

pub fn svg(w: &str, h: &str, salt: u64) -> Vec<u8> {
    format!(
        "<?xml version=\"1.0\"?>\n<!-- {salt} -->\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\"><rect width=\"1\" height=\"1\"/></svg>\n"
    )
    .into_bytes()
}
