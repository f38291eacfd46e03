use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every knob a command may read. A config file supplies any subset; flags
/// override it; the rest falls back to [`RunConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub docs: usize,
    pub dim: usize,
    pub hash_seed: u64,
    pub target: usize,
    pub strategy: String,
    pub t_max: f64,
    pub k: usize,
    pub with_ddai: bool,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            docs: 50,
            dim: 256,
            hash_seed: 0,
            target: 250,
            strategy: "medium".into(),
            t_max: 0.35,
            k: 10,
            with_ddai: false,
            out_dir: PathBuf::from("cirlab-out"),
        }
    }
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub docs: Option<usize>,
    pub dim: Option<usize>,
    pub hash_seed: Option<u64>,
    pub target: Option<usize>,
    pub strategy: Option<String>,
    pub t_max: Option<f64>,
    pub k: Option<usize>,
    pub with_ddai: bool,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CliError::MissingInput(path.to_path_buf()).into())
            }
            Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
        };
        toml::from_str(&text)
            .map_err(|e| CliError::BadConfig(format!("{}: {}", path.display(), e.message())).into())
    }

    pub fn resolve(file: Option<&Path>, o: Overrides) -> anyhow::Result<Self> {
        let mut c = match file {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { c.$f = v; } )* };
        }
        take!(seed, docs, dim, hash_seed, target, strategy, t_max, k, out_dir);
        c.with_ddai |= o.with_ddai;
        Ok(c)
    }

    pub fn to_toml(&self, command: &str) -> String {
        format!(
            "# resolved configuration for `cirlab {command}`\n{}",
            toml::to_string(self).expect("config serializes")
        )
    }
}
