//! Output envelopes: a `metadata` block plus a `payload`, rendered as JSON
//! (all real values as decimal strings) or CSV (header row; triangles keep
//! the visual shape of the reference table, cells above the diagonal empty).

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct Envelope {
    pub metadata: Map<String, Value>,
    pub payload: Value,
    /// CSV rendering: header plus rows; `csv_preamble` lines are emitted
    /// before the header, prefixed with '#'.
    pub csv_preamble: Vec<String>,
    pub csv_header: Vec<String>,
    pub csv_rows: Vec<Vec<String>>,
}

impl Envelope {
    pub fn new(command: &str, mu: Option<f64>, digits: u32, format: Format) -> Self {
        let mut metadata = Map::new();
        metadata.insert("tool".into(), json!("frackell"));
        metadata.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        metadata.insert("command".into(), json!(command));
        if let Some(mu) = mu {
            metadata.insert("mu".into(), json!(mu.to_string()));
        }
        metadata.insert("digits".into(), json!(digits));
        metadata.insert(
            "format".into(),
            json!(match format {
                Format::Json => "json",
                Format::Csv => "csv",
            }),
        );
        Envelope {
            metadata,
            payload: Value::Null,
            csv_preamble: Vec::new(),
            csv_header: Vec::new(),
            csv_rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: Value) {
        self.metadata.insert(key.into(), value);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let doc = json!({
                    "metadata": Value::Object(self.metadata.clone()),
                    "payload": self.payload,
                });
                serde_json::to_string_pretty(&doc).expect("serializable envelope")
            }
            Format::Csv => {
                let mut out = String::new();
                for line in &self.csv_preamble {
                    out.push_str("# ");
                    out.push_str(line);
                    out.push('\n');
                }
                out.push_str(&self.csv_header.join(","));
                out.push('\n');
                for row in &self.csv_rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            }
        }
    }
}
