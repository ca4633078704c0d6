//! MIME sniffing, declared pixel dimensions and the invisibility rule.
//!
//! Only headers are read; no pixel data is decoded.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::corpus::ContentDigest;
use crate::error::ImageError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MimeType {
    Gif,
    Jpeg,
    Png,
    Svg,
    Webp,
    Other(String),
}

impl MimeType {
    pub fn as_str(&self) -> &str {
        match self {
            MimeType::Gif => "image/gif",
            MimeType::Jpeg => "image/jpeg",
            MimeType::Png => "image/png",
            MimeType::Svg => "image/svg+xml",
            MimeType::Webp => "image/webp",
            MimeType::Other(raw) => raw,
        }
    }

    pub fn is_raster(&self) -> bool {
        matches!(
            self,
            MimeType::Gif | MimeType::Jpeg | MimeType::Png | MimeType::Webp
        )
    }
}

impl fmt::Display for MimeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MimeType {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match mime_essence(s).as_str() {
            "image/gif" => MimeType::Gif,
            "image/jpeg" | "image/jpg" | "image/pjpeg" => MimeType::Jpeg,
            "image/png" => MimeType::Png,
            "image/svg" | "image/svg+xml" => MimeType::Svg,
            "image/webp" => MimeType::Webp,
            _ => MimeType::Other(s.to_string()),
        })
    }
}

impl Serialize for MimeType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for MimeType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Ok(raw.parse().unwrap_or_else(|never| match never {}))
    }
}

fn mime_essence(content_type: &str) -> String {
    content_type
        .split(';')
        .next()
        .unwrap_or("")
        .trim()
        .to_ascii_lowercase()
}

/// Declared size. Raster sizes are whole pixels; SVG lengths may be fractional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dimensions {
    pub width: f64,
    pub height: f64,
}

impl Dimensions {
    pub fn new(width: f64, height: f64) -> Self {
        Dimensions { width, height }
    }
}

const PNG_SIGNATURE: &[u8; 8] = b"\x89PNG\r\n\x1a\n";

/// Identifies the image type from magic numbers. The `Content-Type` header
/// is consulted only to recognize SVG text.
pub fn sniff_mime(bytes: &[u8], content_type: Option<&str>) -> MimeType {
    if bytes.starts_with(b"GIF87a") || bytes.starts_with(b"GIF89a") {
        return MimeType::Gif;
    }
    if bytes.starts_with(PNG_SIGNATURE) {
        return MimeType::Png;
    }
    if bytes.starts_with(&[0xFF, 0xD8, 0xFF]) {
        return MimeType::Jpeg;
    }
    if bytes.len() >= 12 && &bytes[..4] == b"RIFF" && &bytes[8..12] == b"WEBP" {
        return MimeType::Webp;
    }
    let essence = content_type.map(mime_essence);
    if matches!(essence.as_deref(), Some("image/svg" | "image/svg+xml")) || looks_like_svg(bytes)
    {
        return MimeType::Svg;
    }
    MimeType::Other(essence.unwrap_or_else(|| "application/octet-stream".to_string()))
}

fn looks_like_svg(bytes: &[u8]) -> bool {
    let body = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    if body.iter().find(|b| !b.is_ascii_whitespace()) != Some(&b'<') {
        return false;
    }
    let Ok(text) = std::str::from_utf8(body) else {
        return false;
    };
    svg_root(text).is_some()
}

fn svg_root(text: &str) -> Option<(Option<String>, Option<String>)> {
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(text, opts).ok()?;
    let root = doc.root_element();
    if !root.tag_name().name().eq_ignore_ascii_case("svg") {
        return None;
    }
    Some((
        root.attribute("width").map(str::to_string),
        root.attribute("height").map(str::to_string),
    ))
}

fn be16(b: &[u8], at: usize) -> u32 {
    u32::from(u16::from_be_bytes([b[at], b[at + 1]]))
}

fn le16(b: &[u8], at: usize) -> u32 {
    u32::from(u16::from_le_bytes([b[at], b[at + 1]]))
}

fn need(bytes: &[u8], len: usize) -> Result<(), ImageError> {
    if bytes.len() < len {
        Err(ImageError::TruncatedImage)
    } else {
        Ok(())
    }
}

/// Reads the declared pixel size from a raster header.
pub fn raster_dimensions(bytes: &[u8], mime: &MimeType) -> Result<Dimensions, ImageError> {
    let (w, h) = match mime {
        MimeType::Gif => {
            // Logical screen descriptor, not individual frames.
            need(bytes, 10)?;
            (le16(bytes, 6), le16(bytes, 8))
        }
        MimeType::Png => {
            need(bytes, 24)?;
            if &bytes[12..16] != b"IHDR" {
                return Err(ImageError::UnsupportedVariant);
            }
            let w = u32::from_be_bytes(bytes[16..20].try_into().unwrap());
            let h = u32::from_be_bytes(bytes[20..24].try_into().unwrap());
            (w, h)
        }
        MimeType::Jpeg => jpeg_dimensions(bytes)?,
        MimeType::Webp => webp_dimensions(bytes)?,
        MimeType::Svg | MimeType::Other(_) => return Err(ImageError::UnsupportedVariant),
    };
    if w == 0 || h == 0 {
        return Err(ImageError::ZeroDimension);
    }
    Ok(Dimensions::new(f64::from(w), f64::from(h)))
}

fn is_sof(marker: u8) -> bool {
    matches!(marker, 0xC0..=0xCF) && !matches!(marker, 0xC4 | 0xC8 | 0xCC)
}

fn jpeg_dimensions(b: &[u8]) -> Result<(u32, u32), ImageError> {
    let mut pos = 2;
    loop {
        // Skip anything up to the next marker prefix, then fill bytes.
        while pos < b.len() && b[pos] != 0xFF {
            pos += 1;
        }
        while pos < b.len() && b[pos] == 0xFF {
            pos += 1;
        }
        if pos >= b.len() {
            return Err(ImageError::TruncatedImage);
        }
        let marker = b[pos];
        pos += 1;
        match marker {
            0x01 | 0xD0..=0xD8 => continue,
            0xD9 | 0xDA => return Err(ImageError::UnsupportedVariant),
            _ => {}
        }
        need(b, pos + 2)?;
        let len = be16(b, pos) as usize;
        if len < 2 {
            return Err(ImageError::UnsupportedVariant);
        }
        if is_sof(marker) {
            need(b, pos + 7)?;
            let height = be16(b, pos + 3);
            let width = be16(b, pos + 5);
            return Ok((width, height));
        }
        pos += len;
    }
}

fn webp_dimensions(b: &[u8]) -> Result<(u32, u32), ImageError> {
    need(b, 16)?;
    match &b[12..16] {
        b"VP8 " => {
            need(b, 30)?;
            if b[23..26] != [0x9D, 0x01, 0x2A] {
                return Err(ImageError::UnsupportedVariant);
            }
            Ok((le16(b, 26) & 0x3FFF, le16(b, 28) & 0x3FFF))
        }
        b"VP8L" => {
            need(b, 25)?;
            if b[20] != 0x2F {
                return Err(ImageError::UnsupportedVariant);
            }
            let bits = u32::from_le_bytes(b[21..25].try_into().unwrap());
            Ok(((bits & 0x3FFF) + 1, ((bits >> 14) & 0x3FFF) + 1))
        }
        b"VP8X" => {
            need(b, 30)?;
            let w = u32::from_le_bytes([b[24], b[25], b[26], 0]) + 1;
            let h = u32::from_le_bytes([b[27], b[28], b[29], 0]) + 1;
            Ok((w, h))
        }
        _ => Err(ImageError::UnsupportedVariant),
    }
}

fn svg_length(raw: &str) -> Option<f64> {
    let t = raw.trim();
    let t = t
        .strip_suffix("px")
        .or_else(|| t.strip_suffix("PX"))
        .unwrap_or(t)
        .trim_end();
    let v: f64 = t.parse().ok()?;
    (v.is_finite() && v >= 0.0).then_some(v)
}

/// Width and height of the root `<svg>` element, when both are plain or
/// `px` lengths. Percentages, other units and missing attributes give `None`.
pub fn svg_dimensions(text: &str) -> Option<Dimensions> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let (w, h) = svg_root(text)?;
    Some(Dimensions::new(svg_length(&w?)?, svg_length(&h?)?))
}

/// Raster: exactly 1×1. SVG: both lengths at most one. Unknown size: false.
pub fn is_invisible(mime: &MimeType, dims: Option<Dimensions>) -> bool {
    let Some(d) = dims else { return false };
    match mime {
        MimeType::Svg => d.width <= 1.0 && d.height <= 1.0,
        m if m.is_raster() => d.width == 1.0 && d.height == 1.0,
        _ => false,
    }
}

pub fn content_digest(bytes: &[u8]) -> ContentDigest {
    ContentDigest(Sha256::digest(bytes).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GIF_1X1: &[u8] = b"GIF89a\x01\x00\x01\x00\x80\x00\x00\xff\xff\xff\x00\x00\x00!\xf9\x04\x01\x00\x00\x00\x00,\x00\x00\x00\x00\x01\x00\x01\x00\x00\x02\x02D\x01\x00;";

    fn png_header(w: u32, h: u32) -> Vec<u8> {
        let mut v = PNG_SIGNATURE.to_vec();
        v.extend_from_slice(&13u32.to_be_bytes());
        v.extend_from_slice(b"IHDR");
        v.extend_from_slice(&w.to_be_bytes());
        v.extend_from_slice(&h.to_be_bytes());
        v.extend_from_slice(&[8, 6, 0, 0, 0]);
        v.extend_from_slice(&[0, 0, 0, 0]);
        v
    }

    #[test]
    fn sniffs_magic_numbers() {
        assert_eq!(sniff_mime(GIF_1X1, None), MimeType::Gif);
        assert_eq!(sniff_mime(b"GIF87a\x02\x00", None), MimeType::Gif);
        assert_eq!(sniff_mime(&png_header(2, 1), None), MimeType::Png);
        assert_eq!(sniff_mime(&[0xFF, 0xD8, 0xFF, 0xE0], None), MimeType::Jpeg);
        assert_eq!(sniff_mime(b"RIFF\0\0\0\0WEBPVP8 ", None), MimeType::Webp);
        assert_eq!(
            sniff_mime(b"<html/>", Some("text/html; charset=utf-8")),
            MimeType::Other("text/html".into())
        );
        assert_eq!(
            sniff_mime(b"", None),
            MimeType::Other("application/octet-stream".into())
        );
    }

    #[test]
    fn magic_beats_content_type() {
        assert_eq!(sniff_mime(GIF_1X1, Some("image/svg+xml")), MimeType::Gif);
    }

    #[test]
    fn svg_by_header_or_by_root_element() {
        let svg = br#"<svg xmlns="http://www.w3.org/2000/svg" width="1" height="1"/>"#;
        assert_eq!(sniff_mime(svg, Some("image/svg+xml")), MimeType::Svg);
        assert_eq!(sniff_mime(svg, None), MimeType::Svg);
        assert_eq!(sniff_mime(b"garbage", Some("image/svg")), MimeType::Svg);
        let xml = br#"<?xml version="1.0"?><!-- c --><svg width="3" height="4"></svg>"#;
        assert_eq!(sniff_mime(xml, Some("text/plain")), MimeType::Svg);
        assert!(matches!(sniff_mime(b"<html></html>", None), MimeType::Other(_)));
    }

    #[test]
    fn gif_and_png_dimensions() {
        assert_eq!(
            raster_dimensions(GIF_1X1, &MimeType::Gif),
            Ok(Dimensions::new(1.0, 1.0))
        );
        assert_eq!(GIF_1X1.len(), 43);
        assert_eq!(
            raster_dimensions(&png_header(2, 1), &MimeType::Png),
            Ok(Dimensions::new(2.0, 1.0))
        );
        assert_eq!(
            raster_dimensions(&png_header(0, 1), &MimeType::Png),
            Err(ImageError::ZeroDimension)
        );
        assert_eq!(
            raster_dimensions(&GIF_1X1[..9], &MimeType::Gif),
            Err(ImageError::TruncatedImage)
        );
    }

    #[test]
    fn jpeg_sof_scan() {
        // SOI, APP0 (len 4), SOF2 with height 3 width 5.
        let jpg = [
            0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x04, 0x00, 0x00, 0xFF, 0xC2, 0x00, 0x0B, 0x08, 0x00,
            0x03, 0x00, 0x05, 0x01, 0x01, 0x11, 0x00,
        ];
        assert_eq!(
            raster_dimensions(&jpg, &MimeType::Jpeg),
            Ok(Dimensions::new(5.0, 3.0))
        );
        // DHT (C4) is not a frame header.
        let no_sof = [0xFF, 0xD8, 0xFF, 0xC4, 0x00, 0x02, 0xFF, 0xDA, 0x00, 0x02];
        assert_eq!(
            raster_dimensions(&no_sof, &MimeType::Jpeg),
            Err(ImageError::UnsupportedVariant)
        );
        assert_eq!(
            raster_dimensions(&jpg[..12], &MimeType::Jpeg),
            Err(ImageError::TruncatedImage)
        );
    }

    #[test]
    fn svg_lengths() {
        assert_eq!(
            svg_dimensions(r#"<svg width="1" height="1"/>"#),
            Some(Dimensions::new(1.0, 1.0))
        );
        assert_eq!(svg_dimensions(r#"<svg width="100%" height="1"/>"#), None);
        assert_eq!(
            svg_dimensions(r#"<svg width="0.5px" height="1px"/>"#),
            Some(Dimensions::new(0.5, 1.0))
        );
        assert_eq!(svg_dimensions(r#"<svg width="1em" height="1"/>"#), None);
        assert_eq!(svg_dimensions(r#"<svg height="1"/>"#), None);
        assert_eq!(svg_dimensions("<svg width="), None);
    }

    #[test]
    fn invisibility_rule() {
        let one = Some(Dimensions::new(1.0, 1.0));
        assert!(is_invisible(&MimeType::Gif, one));
        assert!(!is_invisible(&MimeType::Gif, Some(Dimensions::new(1.0, 2.0))));
        assert!(is_invisible(&MimeType::Svg, Some(Dimensions::new(0.5, 1.0))));
        assert!(!is_invisible(&MimeType::Svg, None));
        assert!(!is_invisible(&MimeType::Png, Some(Dimensions::new(0.5, 1.0))));
        assert!(!is_invisible(&MimeType::Other("x".into()), one));
    }

    #[test]
    fn digest_known_values() {
        assert_eq!(
            content_digest(b"").to_hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(content_digest(GIF_1X1), content_digest(GIF_1X1));
        let mut other = GIF_1X1.to_vec();
        other[20] ^= 1;
        assert_ne!(content_digest(GIF_1X1), content_digest(&other));
    }

    proptest! {
        #[test]
        fn header_readers_total_on_random_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let mime = sniff_mime(&bytes, None);
            for m in [MimeType::Gif, MimeType::Png, MimeType::Jpeg, MimeType::Webp, mime] {
                let _ = raster_dimensions(&bytes, &m);
            }
        }

        #[test]
        fn header_readers_total_on_prefixed_bytes(
            prefix in 0usize..4,
            tail in proptest::collection::vec(any::<u8>(), 0..48),
        ) {
            let heads: [&[u8]; 4] = [b"GIF89a", PNG_SIGNATURE, &[0xFF, 0xD8, 0xFF], b"RIFF\0\0\0\0WEBP"];
            let mut bytes = heads[prefix].to_vec();
            bytes.extend(tail);
            let mime = sniff_mime(&bytes, None);
            prop_assert!(mime.is_raster());
            let _ = raster_dimensions(&bytes, &mime);
        }

        #[test]
        fn enlarging_an_invisible_raster_makes_it_visible(dw in 0u32..1000, dh in 0u32..1000) {
            prop_assume!(dw + dh > 0);
            let d = Dimensions::new(1.0 + f64::from(dw), 1.0 + f64::from(dh));
            prop_assert!(!is_invisible(&MimeType::Gif, Some(d)));
            prop_assert!(!is_invisible(&MimeType::Png, Some(d)));
        }
    }
}
