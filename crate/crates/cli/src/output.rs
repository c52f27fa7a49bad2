//! Run directory layout: one CSV per table, each headed by the config
//! echo as `#` comment lines, plus `manifest.txt`.
//!
//! The manifest is TOML with dotted keys. Its `run` and `check` sections
//! are ignored by the config parser, so `gmlab run --config manifest.txt`
//! repeats the run.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::experiments::{Check, Csv};

pub struct RunInfo<'a> {
    pub kind: &'a str,
    pub mode: &'a str,
    pub workers: usize,
    pub wall_time_s: f64,
    pub exit_code: i32,
    pub error: Option<String>,
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

pub fn write_csv(dir: &Path, echo: &[(String, String)], t: &Csv) -> io::Result<PathBuf> {
    let path = dir.join(format!("{}.csv", t.name));
    let mut f = io::BufWriter::new(fs::File::create(&path)?);
    for (k, v) in echo {
        writeln!(f, "# {k} = {v}")?;
    }
    writeln!(f, "{}", t.columns.join(","))?;
    for r in &t.rows {
        writeln!(f, "{}", r.join(","))?;
    }
    f.flush()?;
    Ok(path)
}

pub fn write_manifest(
    dir: &Path,
    info: &RunInfo<'_>,
    files: &[String],
    checks: &[Check],
    notes: &[String],
    echo: &[(String, String)],
) -> io::Result<PathBuf> {
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    line("run.version", quote(env!("CARGO_PKG_VERSION")));
    line("run.kind", quote(info.kind));
    line("run.mode", quote(info.mode));
    line("run.workers", info.workers.to_string());
    line("run.wall_time_s", format!("{:.3}", info.wall_time_s));
    line("run.exit_code", info.exit_code.to_string());
    let list: Vec<String> = files.iter().map(|f| quote(f)).collect();
    line("run.files", format!("[{}]", list.join(", ")));
    if let Some(e) = &info.error {
        line("run.error", quote(e));
    }
    let list: Vec<String> = notes.iter().map(|n| quote(n)).collect();
    line("run.notes", format!("[{}]", list.join(", ")));
    for c in checks {
        line(&format!("check.{}.passed", c.label), c.passed.to_string());
        line(&format!("check.{}.detail", c.label), quote(&c.detail));
    }
    for (k, v) in echo {
        line(k, v.clone());
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, s)?;
    Ok(path)
}
