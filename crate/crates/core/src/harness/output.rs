use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::HarnessError;

/// What every output file starts with: the command, the fully resolved
/// configuration and the seed. A timestamp is added only on request, so
/// repeated runs produce identical files.
#[derive(Debug, Clone, Serialize)]
pub struct RunHeader {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub timestamp: Option<u64>,
}

impl RunHeader {
    pub fn new(command: &str, config: &impl Serialize, seed: Option<u64>) -> Result<Self, HarnessError> {
        Ok(Self { command: command.to_string(), config: serde_json::to_value(config)?, seed, timestamp: None })
    }

    /// Stamps the header with the current Unix time in seconds.
    pub fn with_timestamp(mut self) -> Self {
        self.timestamp = Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        self
    }

    fn comment_lines(&self) -> Result<String, HarnessError> {
        let mut s = format!("# command: {}\n# config: {}\n", self.command, serde_json::to_string(&self.config)?);
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        if let Some(ts) = self.timestamp {
            s.push_str(&format!("# timestamp: {ts}\n"));
        }
        Ok(s)
    }
}

/// An output directory. CSV files get the header as `#` comment lines
/// followed by an RFC 4180 body; JSON files wrap the report as
/// `{"header": ..., "report": ...}` with keys in sorted order.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
    header: RunHeader,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>, header: RunHeader) -> Result<Self, HarnessError> {
        fs::create_dir_all(root.as_ref())?;
        Ok(Self { root: root.as_ref().to_path_buf(), header })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn header(&self) -> &RunHeader {
        &self.header
    }

    /// Writes `name` with the header comment followed by whatever `body`
    /// produces.
    pub fn write_csv<F>(&self, name: &str, body: F) -> Result<PathBuf, HarnessError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), HarnessError>,
    {
        let mut buf = self.header.comment_lines()?.into_bytes();
        body(&mut buf)?;
        let path = self.path(name);
        fs::write(&path, buf)?;
        Ok(path)
    }

    /// Writes a CSV from a header row and string records.
    pub fn write_table(&self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, HarnessError> {
        self.write_csv(name, |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(columns)?;
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    pub fn write_json(&self, name: &str, report: &impl Serialize) -> Result<PathBuf, HarnessError> {
        let value = serde_json::json!({ "header": self.header, "report": report });
        let path = self.path(name);
        let mut file = fs::File::create(&path)?;
        serde_json::to_writer_pretty(&mut file, &value)?;
        file.write_all(b"\n")?;
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, HarnessError> {
        let path = self.path(name);
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// Shortest round-tripping form, with an exponent for very small or large
/// magnitudes.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_deterministic_without_timestamp() {
        let dir = tempfile::tempdir().unwrap();
        let header = RunHeader::new("demo", &serde_json::json!({"b": 1, "a": [1, 2]}), Some(7)).unwrap();
        let out = OutputDir::create(dir.path(), header).unwrap();
        let path = out.write_table("t.csv", &["x", "y"], &[vec!["1".into(), "a,b".into()]]).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(text, "# command: demo\n# config: {\"a\":[1,2],\"b\":1}\n# seed: 7\nx,y\n1,\"a,b\"\n");
        let json = fs::read_to_string(out.write_json("r.json", &serde_json::json!({"z": 1, "m": 2})).unwrap()).unwrap();
        assert!(json.find("\"m\"").unwrap() < json.find("\"z\"").unwrap());
        assert!(!json.contains("timestamp\": 1"));
    }

    #[test]
    fn timestamp_only_on_request() {
        let header = RunHeader::new("demo", &serde_json::json!({}), None).unwrap().with_timestamp();
        assert!(header.comment_lines().unwrap().contains("# timestamp: "));
    }
}
