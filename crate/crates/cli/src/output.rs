use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

/// CSV writer with a fixed header; floats use the shortest round-trip form so
/// equal runs give byte-identical files.
pub struct Csv {
    inner: csv::Writer<BufWriter<File>>,
    buf: Vec<String>,
}

impl Csv {
    pub fn create(path: &Path, header: &[&str]) -> anyhow::Result<Self> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut inner = csv::Writer::from_writer(BufWriter::new(file));
        inner.write_record(header)?;
        Ok(Self { inner, buf: Vec::new() })
    }

    pub fn row(&mut self, values: &[f64]) -> anyhow::Result<()> {
        self.buf.clear();
        self.buf.extend(values.iter().map(|v| format!("{v:?}")));
        self.inner.write_record(&self.buf)?;
        Ok(())
    }

    pub fn record(&mut self, fields: &[&str]) -> anyhow::Result<()> {
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
