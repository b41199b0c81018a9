//! Reports: a sorted JSON tree rendered either as flattened text lines or
//! as pretty JSON, both headed by the schema tag.

use serde_json::{Map, Value};

pub const SCHEMA: &str = "defwb-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

pub struct Report {
    command: String,
    body: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            body: Map::new(),
        }
    }

    /// Dotted keys nest: `set("a.b", v)` stores `{"a": {"b": v}}`.
    pub fn set(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        let mut parts: Vec<&str> = key.split('.').collect();
        let last = parts.pop().expect("split yields one part");
        let mut node = &mut self.body;
        for p in parts {
            let entry = node.entry(p).or_insert_with(|| Value::Object(Map::new()));
            if !entry.is_object() {
                *entry = Value::Object(Map::new());
            }
            node = entry.as_object_mut().expect("object");
        }
        node.insert(last.to_string(), v.into());
        self
    }

    /// Module-level limitations the results depend on.
    pub fn certificate(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        let c = self
            .body
            .entry("certificates")
            .or_insert_with(|| Value::Object(Map::new()));
        if let Value::Object(m) = c {
            m.insert(key.to_string(), v.into());
        }
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => {
                let mut top = Map::new();
                top.insert("schema".into(), SCHEMA.into());
                top.insert("command".into(), self.command.clone().into());
                top.insert("report".into(), Value::Object(self.body.clone()));
                let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("serializable");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut out = format!("{SCHEMA}\ncommand: {}\n", self.command);
                for (k, v) in &self.body {
                    flatten(k, v, &mut out);
                }
                out
            }
        }
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str(&format!("{prefix}: {{}}\n"));
            }
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(a) => {
            let flat: Option<Vec<String>> = a.iter().map(scalar_text).collect();
            match flat {
                Some(items) => out.push_str(&format!("{prefix}: [{}]\n", items.join(", "))),
                None => {
                    for (i, x) in a.iter().enumerate() {
                        flatten(&format!("{prefix}[{i}]"), x, out);
                    }
                }
            }
        }
        _ => out.push_str(&format!("{prefix}: {}\n", scalar_text(v).unwrap_or_default())),
    }
}
