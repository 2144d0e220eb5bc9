//! Artifact writing: CSV traces and JSON reports, each stamped with the
//! generator version and the config digest.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const ENV_OUT_DIR: &str = "COUPLED_OSC_OUT";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `--out`, then the config's `output.dir`, then the environment, then `./out`.
pub fn resolve_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    if let Some(p) = flag.or(config) {
        return p.to_path_buf();
    }
    match std::env::var_os(ENV_OUT_DIR) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("out"),
    }
}

/// Provenance shared by every artifact of one run.
#[derive(Clone, Debug)]
pub struct Stamp {
    pub digest: String,
    pub scenario: String,
    pub tolerance: f64,
}

impl Stamp {
    fn header(&self) -> String {
        format!(
            "# coupled-osc {VERSION}\n# config-sha256 {}\n# scenario {}\n# tolerance {:e}\n",
            self.digest, self.scenario, self.tolerance
        )
    }

    fn generator(&self) -> Value {
        json!({
            "name": "coupled-osc",
            "version": VERSION,
            "config_sha256": self.digest,
            "scenario": self.scenario,
            "tolerance": self.tolerance,
        })
    }
}

/// Column-oriented table rendered as CSV.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, stamp: &Stamp) -> String {
        let mut out = stamp.header();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| fmt_float(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

pub enum Artifact {
    Csv(Table),
    Json(Value),
}

pub struct Writer {
    pub dir: PathBuf,
    pub prefix: String,
    pub stamp: Stamp,
}

impl Writer {
    /// Writes `<prefix><suffix>` and returns its path.
    pub fn write(&self, suffix: &str, artifact: &Artifact) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let (ext, body) = match artifact {
            Artifact::Csv(t) => ("csv", t.render(&self.stamp)),
            Artifact::Json(v) => {
                let doc = json!({ "generator": self.stamp.generator(), "data": v });
                let mut s = serde_json::to_string_pretty(&doc).expect("json values always serialize");
                s.push('\n');
                ("json", s)
            }
        };
        let path = self.dir.join(format!("{}{suffix}.{ext}", self.prefix));
        std::fs::write(&path, body)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(digest(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn floats_roundtrip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(-0.0), "0");
    }

    #[test]
    fn table_renders_header_first() {
        let stamp = Stamp { digest: "d".into(), scenario: "s".into(), tolerance: 1e-10 };
        let mut t = Table::new(["t", "p"]);
        t.push(vec![0.0, 0.5]);
        let text = t.render(&stamp);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# coupled-osc "));
        assert_eq!(lines[1], "# config-sha256 d");
        assert_eq!(lines[4], "t,p");
        assert_eq!(lines[5], "0,0.5");
    }
}
