//! Exit codes, artifact staging and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use snlevy::levy::config::{load_model, LoadedModel, Tolerances};
use snlevy::Error;

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_NUMERIC: u8 = 65;

/// Environment variable read by the thread pool.
pub const THREADS_ENV: &str = "RAYON_NUM_THREADS";

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(msg: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: format!("error[input]: {msg}"),
        }
    }

    /// A numeric failure tagged with the innermost stage, or `fallback`.
    pub fn numeric(err: Error, fallback: &str) -> Self {
        let stage = innermost_stage(&err).unwrap_or(fallback);
        Failure {
            code: EXIT_NUMERIC,
            message: format!("error[{stage}]: {}", err.root()),
        }
    }

    pub fn io(err: std::io::Error, path: &Path) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: format!("error[output]: {}: {err}", path.display()),
        }
    }
}

fn innermost_stage(err: &Error) -> Option<&'static str> {
    match err {
        Error::Stage { stage, source } => innermost_stage(source).or(Some(stage)),
        _ => None,
    }
}

pub type CmdResult = Result<u8, Failure>;

/// Model file plus tolerances after command-line overrides.
pub struct Input {
    pub loaded: LoadedModel,
    pub tolerances: Tolerances,
}

pub fn load_input(path: &Path, overrides: &[(String, f64)]) -> Result<Input, Failure> {
    let loaded = load_model(path).map_err(Failure::usage)?;
    let tolerances = apply_overrides(loaded.config.tolerances, overrides)?;
    Ok(Input { loaded, tolerances })
}

pub fn apply_overrides(mut tol: Tolerances, overrides: &[(String, f64)]) -> Result<Tolerances, Failure> {
    for (k, v) in overrides {
        tol.set(k, *v).map_err(Failure::usage)?;
    }
    Ok(tol)
}

/// Artifacts are held in memory and written together once a command has
/// succeeded, so a failed run leaves nothing behind.
pub struct Run {
    started: Instant,
    command: &'static str,
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
    manifest: serde_json::Map<String, Value>,
}

impl Run {
    pub fn new(command: &'static str, dir: &Path) -> Self {
        Run {
            started: Instant::now(),
            command,
            dir: dir.to_path_buf(),
            files: Vec::new(),
            manifest: serde_json::Map::new(),
        }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serialises");
        text.push('\n');
        self.add(name, text.into_bytes());
    }

    /// Records a manifest entry.
    pub fn note<T: Serialize>(&mut self, key: &str, value: T) {
        self.manifest.insert(
            key.to_string(),
            serde_json::to_value(value).expect("manifest entry serialises"),
        );
    }

    pub fn note_input(&mut self, input: &Input) {
        let l = &input.loaded;
        self.note(
            "model",
            json!({
                "path": l.path.display().to_string(),
                "name": l.config.name,
                "family": l.config.family,
                "source": l.source,
            }),
        );
        self.note("tolerances", input.tolerances);
    }

    /// Writes every artifact and then `manifest.json`.
    pub fn finish(mut self) -> Result<(), Failure> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Failure::io(e, &self.dir))?;
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Failure::io(e, &path))?;
        }
        let names: Vec<&str> = self.files.iter().map(|(n, _)| n.as_str()).collect();
        let threads = std::env::var(THREADS_ENV).ok();
        let mut m = serde_json::Map::new();
        m.insert("tool".into(), json!("snlevy"));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("command".into(), json!(self.command));
        m.insert("argv".into(), json!(std::env::args().collect::<Vec<_>>()));
        m.insert("output_dir".into(), json!(self.dir.display().to_string()));
        m.insert("threads_env".into(), json!({ THREADS_ENV: threads }));
        m.append(&mut self.manifest);
        m.insert("artifacts".into(), json!(names));
        m.insert("wall_time_s".into(), json!(self.started.elapsed().as_secs_f64()));
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&Value::Object(m)).expect("manifest serialises");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Failure::io(e, &path))
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip an `f64`.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}
