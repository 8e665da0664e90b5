//! Study configuration files.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use timeblock_core::ansatz::{AnsatzSpec, Base};
use timeblock_core::sim::{NoiseModel, MAX_QUBITS};

use crate::failure::Failure;

/// Reference text for `timeblock run --help`.
pub const CONFIG_HELP: &str = "\
Config file (TOML). Relative paths are resolved against the config file's directory.

  name = \"study\"            required; output goes to <output.dir>/<name>/
  seed = 0                  master seed for orderings, angles, trials and baselines

  [instances]
  n = 10                    qubits; required unless `files` is given (max 26)
  count = 10                number of generated instances
  seed = 0                  instance i uses generator seed `seed + i`
  files = [\"a.json\"]       alternative to n/count/seed: instance files from `generate`

  [ansatz]
  base = \"qaoa\"             qaoa | qampa
  k = [10]                  sublayers per time block (list)
  p = [1]                   time blocks (list)

  [search]
  strategy = \"random\"       random | tpe
  angle_sets = 100          random: uniform angle draws
  orderings = 10            random: gate orderings per angle set; tpe: orderings to choose from
  trials = 1000             tpe: total trials (the first is all angles 0.1, ordering 0)
  batch = 4                 tpe: concurrent suggestions per round

  [sampling]
  shots = 1000              shots per trial
  baseline_reps = 1000      repetitions of the uniform-random baseline

  [noise]                   all default to 0
  amp_damping_per_2q = 0.0
  depolarizing_per_2q = 0.0
  readout_flip_01 = 0.0
  readout_flip_10 = 0.0

  [output]
  dir = \"out\"
";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub instances: InstanceSource,
    pub ansatz: AnsatzGrid,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub output: Output,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
    /// The file text, copied next to the outputs.
    #[serde(skip)]
    pub source: String,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    pub n: Option<usize>,
    pub count: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub files: Option<Vec<PathBuf>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzGrid {
    pub base: Base,
    pub k: Vec<usize>,
    pub p: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Random,
    Tpe,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub strategy: StrategyKind,
    pub angle_sets: usize,
    pub orderings: usize,
    pub trials: usize,
    pub batch: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { strategy: StrategyKind::Random, angle_sets: 100, orderings: 10, trials: 1000, batch: 4 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub shots: usize,
    pub baseline_reps: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { shots: 1000, baseline_reps: 1000 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: PathBuf::from("out") }
    }
}

fn field(name: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("{name}: {msg}"))
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, Failure> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))?;
        config.base_dir = base_dir.to_path_buf();
        config.source = text.to_string();
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &dir)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// `<output.dir>/<name>`.
    pub fn study_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir).join(&self.name)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(field("name", "must be a non-empty file name"));
        }
        let src = &self.instances;
        match (&src.files, src.n, src.count) {
            (Some(files), None, None) => {
                if files.is_empty() {
                    return Err(field("instances.files", "must list at least one file"));
                }
            }
            (Some(_), _, _) => return Err(field("instances", "give either `files` or `n`/`count`, not both")),
            (None, Some(n), Some(_)) => {
                if !(2..=MAX_QUBITS).contains(&n) {
                    return Err(field("instances.n", format!("must be in 2..={MAX_QUBITS}, got {n}")));
                }
            }
            (None, None, _) => return Err(field("instances.n", "required when `files` is not given")),
            (None, Some(_), None) => return Err(field("instances.count", "required when `files` is not given")),
        }
        if self.ansatz.k.is_empty() {
            return Err(field("ansatz.k", "must list at least one value"));
        }
        if self.ansatz.p.is_empty() {
            return Err(field("ansatz.p", "must list at least one value"));
        }
        if let Some(n) = src.n {
            for &k in &self.ansatz.k {
                for &p in &self.ansatz.p {
                    AnsatzSpec::new(self.ansatz.base, n, k, p)
                        .map_err(|e| field("ansatz", format!("k={k}, p={p}: {e}")))?;
                }
            }
        }
        if self.ansatz.k.contains(&0) {
            return Err(field("ansatz.k", "values must be >= 1"));
        }
        if self.ansatz.p.contains(&0) {
            return Err(field("ansatz.p", "values must be >= 1"));
        }
        let s = &self.search;
        if s.orderings == 0 {
            return Err(field("search.orderings", "must be >= 1"));
        }
        match s.strategy {
            StrategyKind::Random if s.angle_sets == 0 => return Err(field("search.angle_sets", "must be >= 1")),
            StrategyKind::Tpe if s.trials == 0 => return Err(field("search.trials", "must be >= 1")),
            StrategyKind::Tpe if s.batch == 0 => return Err(field("search.batch", "must be >= 1")),
            _ => {}
        }
        if self.sampling.shots == 0 {
            return Err(field("sampling.shots", "must be >= 1"));
        }
        if self.sampling.baseline_reps == 0 {
            return Err(field("sampling.baseline_reps", "must be >= 1"));
        }
        self.noise.validate().map_err(|e| field("noise", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "name = \"t\"\n[instances]\nn = 6\ncount = 2\n[ansatz]\nbase = \"qaoa\"\nk = [6]\np = [1]\n";

    fn parse(text: &str) -> Result<RunConfig, Failure> {
        RunConfig::parse(text, Path::new("/tmp"))
    }

    fn message(text: &str) -> String {
        match parse(text) {
            Err(Failure::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.sampling.shots, 1000);
        assert_eq!(c.search.angle_sets, 100);
        assert_eq!(c.search.orderings, 10);
        assert_eq!(c.study_dir(), PathBuf::from("/tmp/out/t"));
    }

    #[test]
    fn errors_name_the_field() {
        assert!(message(&MINIMAL.replace("k = [6]", "k = [0]")).contains("ansatz"));
        assert!(message(&MINIMAL.replace("n = 6", "n = 40")).contains("instances.n"));
        assert!(message(&format!("{MINIMAL}[sampling]\nshots = 0\n")).contains("sampling.shots"));
        assert!(message(&format!("{MINIMAL}[noise]\namp_damping_per_2q = 2.0\n")).contains("noise"));
        assert!(message(&MINIMAL.replace("base = \"qaoa\"", "base = \"xyz\"")).contains("base"));
        assert!(message(&format!("{MINIMAL}[search]\nbogus = 1\n")).contains("bogus"));
    }
}
