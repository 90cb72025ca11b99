use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const MANIFEST: &str = "run_manifest.json";

/// Files produced by one run, written together once the run succeeds.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn table(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) {
        let mut buf = Vec::new();
        write(&mut buf).expect("writing to memory cannot fail");
        self.files.push((name.to_string(), buf));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut buf = serde_json::to_vec_pretty(value).expect("output records serialize");
        buf.push(b'\n');
        self.files.push((name.to_string(), buf));
    }

    fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    library_version: &'static str,
    subcommand: &'a str,
    seed: u64,
    rng: &'static str,
    config: &'a RunConfig,
    outputs: Vec<&'a str>,
}

pub fn write_all(dir: &Path, subcommand: &str, config: &RunConfig, outputs: &Outputs) -> Result<(), CliError> {
    let io_err = |path: &Path, e: std::io::Error| CliError::data(format!("cannot write {}: {e}", path.display()));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (name, bytes) in &outputs.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        library_version: collectivity::VERSION,
        subcommand,
        seed: config.seed.unwrap_or_default(),
        rng: collectivity::weierstrass::RNG_ALGORITHM,
        config,
        outputs: outputs.names(),
    };
    let path = dir.join(MANIFEST);
    let mut buf = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    buf.push(b'\n');
    std::fs::write(&path, buf).map_err(|e| io_err(&path, e))?;
    log::info!("wrote {} files to {}", outputs.files.len() + 1, dir.display());
    Ok(())
}
