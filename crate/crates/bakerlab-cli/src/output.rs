//! Deterministic file output: fixed numeric formatting, insertion-ordered
//! JSON, binary PGM, and atomic writes. Identical invocations must produce
//! byte-identical files.

use std::fs;
use std::io;
use std::path::Path;

/// Reals are serialized with 17 significant digits in scientific notation;
/// infinities keep a compact marker and negative zero is normalized.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{x:.16e}")
}

/// Minimal JSON document with insertion-ordered object fields.
pub enum Json {
    Null,
    Bool(bool),
    UInt(u64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(&'static str, Json)>),
}

impl Json {
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::UInt(u) => out.push_str(&u.to_string()),
            Json::Float(x) => {
                // JSON has no infinity literal.
                if x.is_finite() {
                    out.push_str(&fmt_f64(*x));
                } else {
                    out.push('"');
                    out.push_str(&fmt_f64(*x));
                    out.push('"');
                }
            }
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c if (c as u32) < 0x20 => {
                            out.push_str(&format!("\\u{:04x}", c as u32));
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    out.push_str(&"  ".repeat(indent + 1));
                    item.write(out, indent + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            Json::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (i, (key, value)) in fields.iter().enumerate() {
                    out.push_str(&"  ".repeat(indent + 1));
                    out.push('"');
                    out.push_str(key);
                    out.push_str("\": ");
                    value.write(out, indent + 1);
                    if i + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

/// Binary P5 image of a basin raster: maxval 255, row 0 at the top
/// (`y = 1` side), gray levels nonconvergent=0, P_D=64, CDCD=128,
/// B_inv=192, C_inv=255.
pub fn pgm_bytes(raster: &bakerlab::ensemble::BasinRaster) -> Vec<u8> {
    use bakerlab::ensemble::AttractorId;
    let res = raster.resolution();
    let mut bytes = format!("P5\n{res} {res}\n255\n").into_bytes();
    bytes.extend(raster.cells().iter().map(|id| match id {
        AttractorId::Nonconvergent => 0u8,
        AttractorId::PD => 64,
        AttractorId::CDCD => 128,
        AttractorId::BInv => 192,
        AttractorId::CInv => 255,
    }));
    bytes
}

/// Writes to a sibling temp file, then renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?
        .to_string_lossy()
        .into_owned();
    let tmp = path.with_file_name(format!("{file_name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(-0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn json_rendering() {
        let doc = Json::Object(vec![
            ("a", Json::UInt(3)),
            ("b", Json::Array(vec![Json::Bool(true), Json::Null])),
            ("c", Json::Str("x\"y".into())),
        ]);
        let s = doc.render();
        assert!(s.starts_with("{\n  \"a\": 3,\n"));
        assert!(s.contains("\"c\": \"x\\\"y\""));
        assert!(s.ends_with("}\n"));
    }
}
