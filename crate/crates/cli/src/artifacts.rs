//! Output bundle of one run: CSV tables, SVG figures drawn from them and a
//! JSON summary carrying everything needed to replay the run.

use crate::plot::{render_svg, PlotSpec};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Artifacts {
    dir: PathBuf,
    command: String,
    argv: Vec<String>,
    params: Value,
    seed: Option<u64>,
    hash: String,
    outputs: Vec<String>,
    plots: Vec<Value>,
    started: Instant,
}

/// SHA-256 of the command name and its resolved parameters.
pub fn config_hash(command: &str, params: &Value) -> String {
    let canon = json!({ "command": command, "params": params }).to_string();
    format!("{:x}", Sha256::digest(canon.as_bytes()))
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str, argv: Vec<String>, params: Value, seed: Option<u64>) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let hash = config_hash(command, &params);
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.into(),
            argv,
            params,
            seed,
            hash,
            outputs: Vec::new(),
            plots: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Writes `<name>.csv` and returns its text.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<String> {
        let mut text = format!(
            "# rmtlab {VERSION} command={} config={} seed={}\n",
            self.command,
            self.hash,
            self.seed.map_or("none".into(), |s| s.to_string())
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        text.push_str(&String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("CSV is UTF-8"));
        let file = format!("{name}.csv");
        fs::write(self.path(&file), &text)?;
        self.record(&file);
        Ok(text)
    }

    /// Writes `<name>.svg` rendered from `csv_text`.
    pub fn plot(&mut self, name: &str, csv_text: &str, spec: PlotSpec) -> std::io::Result<()> {
        let svg = render_svg(csv_text, &spec).map_err(std::io::Error::other)?;
        let meta = format!(
            "<!-- rmtlab {VERSION} command={} config={} -->\n",
            self.command, self.hash
        );
        let file = format!("{name}.svg");
        fs::write(self.path(&file), meta + &svg)?;
        self.record(&file);
        self.plots.push(json!({ "file": file, "csv": format!("{name}.csv"), "spec": spec }));
        Ok(())
    }

    pub fn bytes(&mut self, file: &str, data: &[u8]) -> std::io::Result<()> {
        fs::write(self.path(file), data)?;
        self.record(file);
        Ok(())
    }

    pub fn summary(&self, metrics: &Value) -> Value {
        json!({
            "tool": "rmtlab",
            "version": VERSION,
            "command": self.command,
            "argv": self.argv,
            "params": self.params,
            "config_hash": self.hash,
            "seed": self.seed,
            "outputs": self.outputs,
            "plots": self.plots,
            "metrics": metrics,
            "runtime_s": self.started.elapsed().as_secs_f64(),
        })
    }

    /// Writes `<command>.json` and returns the summary.
    pub fn finish(mut self, metrics: Value) -> std::io::Result<Value> {
        let file = format!("{}.json", self.command);
        self.record(&file);
        let s = self.summary(&metrics);
        fs::write(self.path(&file), serde_json::to_string_pretty(&s)? + "\n")?;
        Ok(s)
    }
}

/// Shortest round-trip text of a float, in exponent form when very small or large.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
