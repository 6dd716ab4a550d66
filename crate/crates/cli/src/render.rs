//! Plain text rendering of report values.

use serde_json::Value;
use std::fmt::Write;

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn inline(v: &Value) -> Option<String> {
    if let Some(s) = scalar(v) {
        return Some(s);
    }
    match v {
        Value::Array(items) if items.len() <= 32 => {
            let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
            parts.map(|p| format!("[{}]", p.join(", ")))
        }
        Value::Object(map) if map.is_empty() => Some("{}".into()),
        _ => None,
    }
}

fn walk(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    if let Some(s) = inline(v) {
        let _ = writeln!(out, "{pad}{key}: {s}");
        return;
    }
    let _ = writeln!(out, "{pad}{key}:");
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                walk(out, k, child, depth + 1);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                walk(out, &format!("- {i}"), child, depth + 1);
            }
        }
        _ => unreachable!(),
    }
}

/// Indented `key: value` lines; short scalar arrays stay on one line.
pub fn text(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                walk(&mut out, k, child, 0);
            }
        }
        other => walk(&mut out, "value", other, 0),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nests_objects_and_inlines_short_arrays() {
        let v = json!({"a": 1, "b": {"c": [1, 2], "d": null}, "e": [{"f": true}]});
        assert_eq!(text(&v), "a: 1\nb:\n  c: [1, 2]\n  d: -\ne:\n  - 0:\n    f: true\n");
    }
}
