use serde_json::Value;

/// What a command hands back: its report and the exit status to use.
pub struct Outcome {
    pub report: Value,
    pub code: u8,
}

impl Outcome {
    pub fn ok(report: Value) -> Self {
        Outcome { report, code: crate::error::exit::OK }
    }
}

/// Human form: one `key: value` line per JSON leaf, nested keys joined with
/// dots, so the two forms carry the same fields.
pub fn render(report: &Value) -> String {
    let mut out = String::new();
    walk("", report, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.6}"),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn walk(prefix: &str, v: &Value, out: &mut String) {
    let line = |out: &mut String, text: &str| {
        out.push_str(prefix);
        out.push_str(": ");
        out.push_str(text);
        out.push('\n');
    };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                walk(&key, child, out);
            }
        }
        Value::Array(items) => {
            if let Some(parts) = items.iter().map(scalar).collect::<Option<Vec<_>>>() {
                line(out, &parts.join(" "));
            } else {
                for (i, child) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), child, out);
                }
            }
        }
        other => line(out, &scalar(other).unwrap_or_default()),
    }
}

pub fn print(report: &Value, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).expect("serialisable report"));
    } else {
        print!("{}", render(report));
    }
}
