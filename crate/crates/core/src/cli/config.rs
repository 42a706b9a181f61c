//! Run configuration file (TOML) and scorer-registry assembly.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::descriptors::FragmentScoreTable;
use crate::neural::{GraphModel, GraphPredictor, GraphTrainConfig, HeadKind, PretrainConfig};
use crate::moo::RlConfig;
use crate::scorers::{
    default_source, ingest_external_scores, preset_registry, Preset, RawSource, ScorerKind, ScorerRegistry, ScorerSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    pub n: usize,
    pub temperature: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { n: 1000, temperature: 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Run seed; `--seed` takes precedence. Overrides every section seed.
    pub seed: Option<u64>,
    /// Scorer preset, `egfr-1` .. `egfr-4` or `ache-1` .. `ache-4`.
    pub preset: Option<String>,
    pub pretrain: PretrainConfig,
    pub graph: GraphTrainConfig,
    pub rl: RlConfig,
    pub sample: SampleConfig,
    /// Per-scorer overrides and additions.
    pub scorers: Vec<ScorerSpec>,
    /// Directory that relative paths are resolved against; not serialised.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig { base_dir: PathBuf::from("."), ..Default::default() });
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf();
        Ok(cfg)
    }

    /// Fixes the run seed into every section.
    pub fn apply_seed(&mut self, flag: Option<u64>) -> u64 {
        let seed = flag.or(self.seed).unwrap_or(0);
        self.seed = Some(seed);
        self.pretrain.seed = seed;
        self.graph.seed = seed;
        self.rl.seed = seed;
        seed
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn preset(&self, flag: Option<&str>) -> Result<Preset, CliError> {
        let name = flag.or(self.preset.as_deref()).ok_or_else(|| CliError::Config("no scorer preset given".into()))?;
        Preset::parse(name).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Preset registry with the configured overrides, additions and sources.
    /// Returns the registry and every file it read.
    pub fn registry(&self, preset: Preset) -> Result<(ScorerRegistry, Vec<PathBuf>), CliError> {
        let mut reg = preset_registry(preset);
        let mut inputs = Vec::new();
        for spec in &self.scorers {
            let existing = reg.scorer(&spec.name).map(|s| s.kind);
            let kind = match existing {
                Some(kind) => {
                    if spec.kind.is_some_and(|k| k != kind) {
                        return Err(CliError::Config(format!("scorer '{}' cannot change kind", spec.name)));
                    }
                    spec.apply(reg.scorer_mut(&spec.name).expect("present")).map_err(|e| CliError::Config(e.to_string()))?;
                    kind
                }
                None => {
                    let s = spec.build_new().map_err(|e| CliError::Config(e.to_string()))?;
                    let kind = s.kind;
                    reg.push(s, default_source(kind)).map_err(|e| CliError::Config(e.to_string()))?;
                    kind
                }
            };
            if let Some(src) = self.source(spec, kind, preset, &mut inputs)? {
                reg.set_source(&spec.name, src).map_err(|e| CliError::Config(e.to_string()))?;
            }
        }
        Ok((reg, inputs))
    }

    fn source(
        &self,
        spec: &ScorerSpec,
        kind: ScorerKind,
        preset: Preset,
        inputs: &mut Vec<PathBuf>,
    ) -> Result<Option<RawSource>, CliError> {
        let given = [spec.external.is_some(), spec.model.is_some(), spec.references.is_some(), spec.motif.is_some(), spec.sa_table.is_some()];
        if given.iter().filter(|&&g| g).count() > 1 {
            return Err(CliError::Config(format!("scorer '{}' names more than one raw source", spec.name)));
        }
        if let Some(p) = &spec.external {
            let p = self.resolve(p);
            let ext = ingest_external_scores(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            for w in &ext.warnings {
                log::warn!("{}: {w}", p.display());
            }
            inputs.push(p);
            return Ok(Some(RawSource::External(Arc::new(ext))));
        }
        if let Some(p) = &spec.model {
            let p = self.resolve(p);
            let model = GraphModel::load(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            let class = spec.class.unwrap_or(match (model.arch.head, kind) {
                (HeadKind::Binary, _) => 1,
                (HeadKind::Multiclass, ScorerKind::ResidueAffinity) => preset.target.residue_class(),
                _ => 0,
            });
            if class >= model.arch.class_count() {
                return Err(CliError::Config(format!("scorer '{}': class {class} out of range", spec.name)));
            }
            inputs.push(p);
            return Ok(Some(RawSource::Predictor(Arc::new(GraphPredictor { model: Arc::new(model), class }))));
        }
        if let Some(refs) = &spec.references {
            let r: Vec<&str> = refs.iter().map(String::as_str).collect();
            return RawSource::tanimoto_references(&r).map(Some).map_err(|e| CliError::Config(e.to_string()));
        }
        if let Some(m) = &spec.motif {
            return RawSource::motif(m).map(Some).map_err(|e| CliError::Config(e.to_string()));
        }
        if let Some(p) = &spec.sa_table {
            let p = self.resolve(p);
            let t = FragmentScoreTable::load(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            inputs.push(p);
            return Ok(Some(RawSource::Sa(Arc::new(t))));
        }
        Ok(None)
    }
}
