//! Deterministic rendering of reports.
//!
//! JSON objects come out with sorted keys (serde_json's default map) and
//! every float in `{:.16e}` form, so identical inputs give identical bytes.

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use std::io;

/// Pretty printer that writes floats with 17 significant digits.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::with_indent(b"  ")));
    serde::Serialize::serialize(value, &mut ser).expect("in-memory write");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Four significant digits.
pub fn sig4(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        format!("{:.*}", (3 - exp).max(0) as usize, x)
    } else {
        format!("{x:.3e}")
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) if n.is_f64() => Some(sig4(n.as_f64().unwrap_or(f64::NAN))),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Indented `key: value` listing; arrays of scalars stay on one line.
pub fn to_text(value: &Value) -> String {
    let mut out = String::new();
    write_text(&mut out, value, 0);
    out
}

fn write_text(out: &mut String, value: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match inline(v) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_text(out, v, depth + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                match inline(v) {
                    Some(s) => out.push_str(&format!("{pad}[{i}] {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        write_text(out, v, depth + 1);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

fn inline(v: &Value) -> Option<String> {
    if let Some(s) = scalar(v) {
        return Some(s);
    }
    let Value::Array(items) = v else { return None };
    let parts: Option<Vec<String>> = items
        .iter()
        .map(|item| match item {
            Value::Array(_) => inline(item),
            _ => scalar(item),
        })
        .collect();
    parts.map(|p| format!("[{}]", p.join(", ")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_keep_full_precision() {
        let text = to_json(&json!({"b": 0.1, "a": 2, "c": [1.0 / 3.0]}));
        assert_eq!(
            text,
            "{\n  \"a\": 2,\n  \"b\": 1.0000000000000001e-1,\n  \"c\": [\n    3.3333333333333331e-1\n  ]\n}\n"
        );
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["c"][0].as_f64().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn four_significant_digits() {
        assert_eq!(sig4(0.676776695), "0.6768");
        assert_eq!(sig4(1.0), "1.000");
        assert_eq!(sig4(-123.456), "-123.5");
        assert_eq!(sig4(1.5e-7), "1.500e-7");
    }

    #[test]
    fn text_listing() {
        let text = to_text(&json!({"x": {"c": [0.5, 0.25, 0.0]}, "ok": true}));
        assert_eq!(text, "ok: true\nx:\n  c: [0.5000, 0.2500, 0]\n");
    }
}
