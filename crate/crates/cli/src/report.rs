use std::io::Write;

use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "energy-space/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// One analysis run: echoed inputs, tolerances, results, and the flat
/// (level, quantity, value) rows used for CSV output.
pub struct Report {
    command: &'static str,
    anchor: &'static str,
    inputs: Map<String, Value>,
    tolerances: Map<String, Value>,
    results: Map<String, Value>,
    rows: Vec<[String; 3]>,
}

impl Report {
    pub fn new(command: &'static str, anchor: &'static str) -> Self {
        Self {
            command,
            anchor,
            inputs: Map::new(),
            tolerances: Map::new(),
            results: Map::new(),
            rows: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.inputs.insert(key.into(), value.into());
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.into(), json!(value));
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.results.insert(key.into(), value.into());
        self
    }

    pub fn row(
        &mut self,
        level: impl ToString,
        quantity: impl ToString,
        value: impl Into<Value>,
    ) -> &mut Self {
        let value = match value.into() {
            Value::String(s) => s,
            v => v.to_string(),
        };
        self.rows
            .push([level.to_string(), quantity.to_string(), value]);
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "paper_anchor": self.anchor,
            "inputs": self.inputs,
            "tolerances": self.tolerances,
            "results": self.results,
        })
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> anyhow::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["level", "quantity", "value"])?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}
