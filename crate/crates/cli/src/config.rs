//! Experiment configuration, artifact writing and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_ENV: &str = "CUBIC_LAB_OUT";
pub const DEFAULT_OUT: &str = "cubic-lab-out";

/// Contents of a `--config` file. The tables are checked key by key
/// against what the chosen experiment understands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default)]
    pub tolerances: toml::Table,
    #[serde(default)]
    pub grids: toml::Table,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    /// Reads a TOML config, or the `config` section of a JSON run manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let bad = |e: String| CliError::Usage(format!("{}: {e}", path.display()));
        if path.extension().is_some_and(|x| x == "json") {
            let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            serde_json::from_value(value).map_err(|e| bad(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| bad(e.to_string()))
        }
    }
}

/// Override layers for one section, lowest priority first.
#[derive(Debug, Default)]
pub struct Layers {
    pub params: Vec<toml::Table>,
    pub tolerances: Vec<toml::Table>,
    pub grids: Vec<toml::Table>,
}

impl Layers {
    pub fn push_config(&mut self, c: &ExperimentConfig) {
        self.params.push(c.params.clone());
        self.tolerances.push(c.tolerances.clone());
        self.grids.push(c.grids.clone());
    }

    /// Adds `--set` overrides: `key=value` targets params, `section.key=value`
    /// targets the named section. Values are TOML literals; anything that
    /// does not parse is taken as a string.
    pub fn push_sets(&mut self, sets: &[String]) -> Result<(), CliError> {
        let (mut p, mut t, mut g) = (toml::Table::new(), toml::Table::new(), toml::Table::new());
        for s in sets {
            let (key, raw) = s
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
            let value = parse_literal(raw.trim());
            let (section, key) = key.trim().split_once('.').unwrap_or(("params", key.trim()));
            let target = match section {
                "params" => &mut p,
                "tolerances" => &mut t,
                "grids" => &mut g,
                other => return Err(CliError::Usage(format!("unknown config section `{other}`"))),
            };
            target.insert(key.to_string(), value);
        }
        self.params.push(p);
        self.tolerances.push(t);
        self.grids.push(g);
        Ok(())
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies override layers to `defaults`. Keys absent from the defaults
/// are rejected, and the merged table must deserialize back into `T`.
pub fn overlay<T: Serialize + DeserializeOwned>(section: &str, defaults: &T, layers: &[toml::Table]) -> Result<T, CliError> {
    let mut table = match toml::Value::try_from(defaults) {
        Ok(toml::Value::Table(t)) => t,
        _ => unreachable!("section defaults serialize to a table"),
    };
    for layer in layers {
        for (k, v) in layer {
            if !table.contains_key(k) {
                let known: Vec<&str> = table.keys().map(String::as_str).collect();
                return Err(CliError::Usage(format!(
                    "unknown key `{section}.{k}`; known keys: {}",
                    if known.is_empty() { "none".to_string() } else { known.join(", ") }
                )));
            }
            table.insert(k.clone(), v.clone());
        }
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| CliError::Usage(format!("invalid `{section}`: {e}")))
}

/// Sections of an experiment that take no keys.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NoKeys {}

#[derive(Debug, Clone, Serialize)]
struct ArtifactEntry {
    file: String,
    sha256: String,
    bytes: usize,
}

/// One experiment run: the resolved config, its hash and the artifacts
/// written so far.
pub struct Run {
    pub experiment: &'static str,
    pub dir: PathBuf,
    pub config: serde_json::Value,
    pub hash: String,
    artifacts: Vec<ArtifactEntry>,
}

impl Run {
    /// The hash covers everything that affects results. The output
    /// directory and thread count are left out.
    pub fn new(
        experiment: &'static str,
        dir: PathBuf,
        params: &impl Serialize,
        tolerances: &impl Serialize,
        grids: &impl Serialize,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let config = json!({
            "experiment": experiment,
            "params": params,
            "tolerances": tolerances,
            "grids": grids,
            "seed": seed,
        });
        let hash = format!("{:x}", Sha256::digest(serde_json::to_vec(&config).map_err(CliError::other)?));
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Run { experiment, dir, config, hash, artifacts: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.artifacts.push(ArtifactEntry {
            file: name.to_string(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// CSV with an explicit header row, so empty tables still carry one.
    /// Row types are expected to end with a `config_hash` field.
    pub fn write_csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: &[R]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(header).map_err(CliError::other)?;
        for r in rows {
            w.serialize(r).map_err(CliError::other)?;
        }
        let bytes = w.into_inner().map_err(CliError::other)?;
        self.write(name, bytes)
    }

    /// Pretty JSON with `schema_version` and `config_hash` added at the top level.
    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut v = serde_json::to_value(value).map_err(CliError::other)?;
        if let Some(obj) = v.as_object_mut() {
            obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
            obj.insert("config_hash".into(), json!(self.hash));
        }
        let mut bytes = serde_json::to_vec_pretty(&v).map_err(CliError::other)?;
        bytes.push(b'\n');
        self.write(name, bytes)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let body = format!("# config_hash {}\n{text}", self.hash);
        self.write(name, body.into_bytes())
    }

    /// Writes `manifest.json`. Its `config` section can be passed back
    /// through `--config` to replay the run.
    pub fn finish(self, passed: bool, summary: serde_json::Value) -> Result<(), CliError> {
        let manifest = json!({
            "schema_version": SCHEMA_VERSION,
            "tool": "cubic-lab",
            "version": env!("CARGO_PKG_VERSION"),
            "experiment": self.experiment,
            "config_hash": self.hash,
            "config": self.config,
            "artifacts": self.artifacts,
            "passed": passed,
            "summary": summary,
        });
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(CliError::other)?;
        bytes.push(b'\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// Output directory: the flag, then the config, then the environment.
pub fn output_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| config.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct P {
        m: usize,
        x: f64,
    }

    fn table(s: &str) -> toml::Table {
        toml::from_str(s).unwrap()
    }

    #[test]
    fn overlay_replaces_known_keys_and_widens_integers() {
        let got = overlay("params", &P { m: 6, x: 0.5 }, &[table("m = 8"), table("x = 2")]).unwrap();
        assert_eq!(got, P { m: 8, x: 2.0 });
    }

    #[test]
    fn overlay_rejects_unknown_and_mistyped_keys() {
        let err = overlay("params", &P { m: 6, x: 0.5 }, &[table("q = 1")]).unwrap_err();
        assert!(err.to_string().contains("params.q"), "{err}");
        assert!(overlay("params", &P { m: 6, x: 0.5 }, &[table("m = 1.5")]).is_err());
    }

    #[test]
    fn set_literals_and_sections() {
        let mut l = Layers::default();
        l.push_sets(&["m=8".into(), "tolerances.slope=1e-3".into(), "perturbation=none".into()]).unwrap();
        assert_eq!(l.params[0]["m"], toml::Value::Integer(8));
        assert_eq!(l.params[0]["perturbation"], toml::Value::String("none".into()));
        assert_eq!(l.tolerances[0]["slope"], toml::Value::Float(1e-3));
        assert!(l.push_sets(&["bogus.k=1".into()]).is_err());
        assert!(l.push_sets(&["novalue".into()]).is_err());
    }

    #[test]
    fn config_rejects_unknown_top_level_keys() {
        assert!(toml::from_str::<ExperimentConfig>("experiment = \"cantor\"\ncolour = 1").is_err());
        let c: ExperimentConfig = toml::from_str("experiment = \"cantor\"\n[params]\nm = 8").unwrap();
        assert_eq!(c.params["m"], toml::Value::Integer(8));
    }
}
