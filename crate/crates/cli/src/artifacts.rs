use crate::config::RunConfig;
use crate::CliError;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Writes artifacts into the output directory, each with a `<name>.meta.json` sidecar.
///
/// JSON artifacts also carry the config hash and seed inline. The creation time lives only in
/// the sidecar, so reruns reproduce every artifact byte for byte.
pub struct Artifacts {
    dir: PathBuf,
    command: &'static str,
    hash: String,
    seed: u64,
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    config_hash: &'a str,
    seed: u64,
    version: &'static str,
    created_unix: u64,
}

/// Inline provenance for JSON artifacts.
#[derive(Serialize)]
pub struct Stamped<'a, T: Serialize> {
    pub config_hash: &'a str,
    pub seed: u64,
    #[serde(flatten)]
    pub body: T,
}

impl Artifacts {
    pub fn new(command: &'static str, cfg: &RunConfig) -> Result<Self, CliError> {
        let dir = cfg.output.dir.clone();
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir, command, hash: cfg.hash(), seed: cfg.mc.seed })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = Meta { command: self.command, config_hash: &self.hash, seed: self.seed, version: env!("CARGO_PKG_VERSION"), created_unix };
        let meta_path = self.dir.join(format!("{name}.meta.json"));
        let text = serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n";
        std::fs::write(&meta_path, text).map_err(|e| CliError::Io(format!("{}: {e}", meta_path.display())))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, body: T) -> Result<(), CliError> {
        let stamped = Stamped { config_hash: &self.hash, seed: self.seed, body };
        let text = serde_json::to_string_pretty(&stamped).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        self.write_text(name, &text)
    }
}
