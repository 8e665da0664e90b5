//! Study grids over instances, `k` and `p`, and the analyses built on their logs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use timeblock_core::ansatz::{build_circuit, equivalent_standard_depth, AngleVector, AnsatzSpec, GateOrdering};
use timeblock_core::circuit::count_gates;
use timeblock_core::ising::{exact_spectrum, generate_sk, SkInstance, SpectrumSummary};
use timeblock_core::metrics::{
    mean_and_stderr, random_baseline, renormalized_ratio, spread_analysis, tail_curve, tail_grid, RandomBaseline,
};
use timeblock_core::optimizer::{
    evaluate_trial, generate_orderings, run_study, SearchSpace, Strategy, Study, StudyConfig, TpeConfig,
};
use timeblock_core::rng::{derive_seed, tags};
use timeblock_core::sim::MAX_QUBITS;

use crate::config::{RunConfig, StrategyKind};
use crate::failure::Failure;

pub const SUMMARY_HEADER: &str =
    "instance,base,n,k,p,depth_fraction,two_qubit_gates,best_ar,mean_go_best_ar,baseline_best_ar";

#[derive(Clone, Debug)]
pub struct LoadedInstance {
    pub instance: SkInstance,
    pub spectrum: Option<SpectrumSummary>,
}

impl LoadedInstance {
    pub fn c_min(&self) -> Option<i64> {
        self.spectrum.as_ref().map(|s| s.c_min)
    }

    fn require_c_min(&self, index: usize) -> Result<i64, Failure> {
        self.c_min().ok_or_else(|| Failure::OracleUnavailable(format!("instance {index} has no ground energy")))
    }
}

pub fn instance_file_name(n: usize, index: usize) -> String {
    format!("sk_n{n}_i{index}.json")
}

/// Writes `count` instances (with spectra when enumerable) to `out_dir`.
pub fn generate(n: usize, count: usize, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    if n < 2 {
        return Err(Failure::Config(format!("n: must be >= 2, got {n}")));
    }
    fs::create_dir_all(out_dir)?;
    (0..count)
        .map(|i| {
            let instance = generate_sk(n, seed + i as u64)?;
            let spectrum = match exact_spectrum(&instance) {
                Ok(s) => Some(s),
                Err(timeblock_core::Error::OracleUnavailable { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let path = out_dir.join(instance_file_name(n, i));
            fs::write(&path, instance.to_json(spectrum.as_ref()))?;
            Ok(path)
        })
        .collect()
}

pub fn load_instances(config: &RunConfig) -> Result<Vec<LoadedInstance>, Failure> {
    let src = &config.instances;
    if let Some(files) = &src.files {
        return files
            .iter()
            .map(|f| {
                let path = config.resolve(f);
                let text = fs::read_to_string(&path)
                    .map_err(|e| Failure::Config(format!("instances.files: cannot read {}: {e}", path.display())))?;
                let (instance, stored) = SkInstance::from_json(&text)
                    .map_err(|e| Failure::Config(format!("instances.files: {}: {e}", path.display())))?;
                if instance.n() > MAX_QUBITS {
                    return Err(Failure::Config(format!(
                        "instances.files: {} has n = {} > {MAX_QUBITS}",
                        path.display(),
                        instance.n()
                    )));
                }
                let spectrum = match stored {
                    Some(s) => Some(s),
                    None => Some(exact_spectrum(&instance)?),
                };
                Ok(LoadedInstance { instance, spectrum })
            })
            .collect();
    }
    let (n, count) = (src.n.unwrap_or(0), src.count.unwrap_or(0));
    (0..count)
        .map(|i| {
            let instance = generate_sk(n, src.seed + i as u64)?;
            let spectrum = Some(exact_spectrum(&instance)?);
            Ok(LoadedInstance { instance, spectrum })
        })
        .collect()
}

fn grid(config: &RunConfig) -> impl Iterator<Item = (usize, usize)> + '_ {
    config.ansatz.k.iter().flat_map(move |&k| config.ansatz.p.iter().map(move |&p| (k, p)))
}

/// The trial-level configuration of one `(instance, k, p)` cell.
pub fn study_config(
    config: &RunConfig,
    index: usize,
    loaded: &LoadedInstance,
    k: usize,
    p: usize,
) -> Result<StudyConfig, Failure> {
    let n = loaded.instance.n();
    let spec = AnsatzSpec::new(config.ansatz.base, n, k, p)
        .map_err(|e| Failure::Config(format!("ansatz: instance {index}: k={k}, p={p}: {e}")))?;
    let s = &config.search;
    let orderings = generate_orderings(n, s.orderings, derive_seed(config.seed, &[tags::ORDERINGS, index as u64]));
    let strategy = match s.strategy {
        StrategyKind::Random => Strategy::Random { angle_sets: s.angle_sets, orderings_used: s.orderings },
        StrategyKind::Tpe => Strategy::Tpe { trials: s.trials, batch: s.batch, config: TpeConfig::default() },
    };
    Ok(StudyConfig {
        instance: loaded.instance.clone(),
        c_min: loaded.c_min(),
        spec,
        space: SearchSpace::for_ansatz(p, orderings)?,
        strategy,
        shots: config.sampling.shots,
        noise: config.noise,
        seed: derive_seed(config.seed, &[index as u64, k as u64, p as u64]),
    })
}

pub fn baseline(config: &RunConfig, index: usize, loaded: &LoadedInstance) -> Result<Option<RandomBaseline>, Failure> {
    let Some(c_min) = loaded.c_min() else { return Ok(None) };
    let seed = derive_seed(config.seed, &[tags::BASELINE, index as u64]);
    Ok(Some(random_baseline(&loaded.instance, c_min, config.sampling.shots, config.sampling.baseline_reps, seed)?))
}

pub fn instance_dir(config: &RunConfig, index: usize) -> PathBuf {
    config.study_dir().join(format!("instance_{index}"))
}

pub fn log_path(config: &RunConfig, index: usize, k: usize, p: usize) -> PathBuf {
    instance_dir(config, index).join(format!("k{k}_p{p}.jsonl"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub instance: usize,
    pub spec: AnsatzSpec,
    pub depth_fraction: f64,
    pub two_qubit_gates: usize,
    pub best_ar: Option<f64>,
    pub mean_go_best_ar: Option<f64>,
    pub baseline_best_ar: Option<f64>,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl SummaryRow {
    fn new(index: usize, cfg: &StudyConfig, study: &Study, baseline: Option<&RandomBaseline>) -> Result<Self, Failure> {
        let identity = GateOrdering::identity(cfg.spec.n);
        let angles = AngleVector::constant(cfg.spec.p, 0.0, 0.0);
        let (circuit, _) = build_circuit(&cfg.instance, &cfg.spec, &identity, &angles)?;
        Ok(SummaryRow {
            instance: index,
            spec: cfg.spec,
            depth_fraction: equivalent_standard_depth(&cfg.spec),
            two_qubit_gates: count_gates(&circuit).two_qubit,
            best_ar: study.best().ar,
            mean_go_best_ar: study.mean_ordering_best_ar(),
            baseline_best_ar: baseline.map(|b| b.best_ar),
        })
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.spec.base,
            self.spec.n,
            self.spec.k,
            self.spec.p,
            self.depth_fraction,
            self.two_qubit_gates,
            opt(self.best_ar),
            opt(self.mean_go_best_ar),
            opt(self.baseline_best_ar),
        )
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Runs every `(instance, k, p)` study, writes logs and `summary.csv`.
pub fn run(config: &RunConfig) -> Result<Vec<SummaryRow>, Failure> {
    let instances = load_instances(config)?;
    let root = config.study_dir();
    fs::create_dir_all(&root)?;
    fs::write(root.join("config.toml"), &config.source)?;
    let mut rows = Vec::new();
    for (index, loaded) in instances.iter().enumerate() {
        let dir = instance_dir(config, index);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("instance.json"), loaded.instance.to_json(loaded.spectrum.as_ref()))?;
        let base = baseline(config, index, loaded)?;
        for (k, p) in grid(config) {
            let cfg = study_config(config, index, loaded, k, p)?;
            let study = run_study(&cfg)?;
            fs::write(log_path(config, index, k, p), study.to_jsonl())?;
            rows.push(SummaryRow::new(index, &cfg, &study, base.as_ref())?);
        }
    }
    fs::write(root.join("summary.csv"), summary_csv(&rows))?;
    Ok(rows)
}

fn read_study(config: &RunConfig, index: usize, k: usize, p: usize) -> Result<Study, Failure> {
    let path = log_path(config, index, k, p);
    let text = fs::read_to_string(&path)
        .map_err(|e| Failure::Mismatch(format!("cannot read {}: {e}", path.display())))?;
    Ok(Study::from_jsonl(&text)?)
}

/// Recomputes `summary.csv` from the trial logs and compares it byte for byte.
pub fn verify(config: &RunConfig) -> Result<usize, Failure> {
    let instances = load_instances(config)?;
    let mut rows = Vec::new();
    for (index, loaded) in instances.iter().enumerate() {
        let base = baseline(config, index, loaded)?;
        for (k, p) in grid(config) {
            let cfg = study_config(config, index, loaded, k, p)?;
            let study = read_study(config, index, k, p)?;
            let best = study.trials().iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
            if study.best().objective != best {
                return Err(Failure::Mismatch(format!("instance {index} k={k} p={p}: best trial inconsistent")));
            }
            rows.push(SummaryRow::new(index, &cfg, &study, base.as_ref())?);
        }
    }
    let expected = summary_csv(&rows);
    let path = config.study_dir().join("summary.csv");
    let actual = fs::read_to_string(&path)
        .map_err(|e| Failure::Mismatch(format!("cannot read {}: {e}", path.display())))?;
    if let Some((line, (a, b))) =
        expected.lines().zip(actual.lines()).enumerate().find(|(_, (a, b))| a != b)
    {
        return Err(Failure::Mismatch(format!("summary line {}: expected `{a}`, found `{b}`", line + 1)));
    }
    if expected.lines().count() != actual.lines().count() {
        return Err(Failure::Mismatch(format!(
            "summary has {} lines, expected {}",
            actual.lines().count(),
            expected.lines().count()
        )));
    }
    Ok(rows.len())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailRow {
    pub s_tilde: usize,
    pub mean_renormalized_ar: f64,
    pub stderr: f64,
    /// Number of curves averaged.
    pub count: usize,
}

/// Renormalized tail curve of one sample set against a baseline tail curve.
///
/// Tail sizes at which the baseline already reaches the ground energy in every
/// repetition have no renormalized value and are left out.
pub fn renormalized_tail(
    samples: &timeblock_core::metrics::EnergySamples,
    c_min: i64,
    baseline: &RandomBaseline,
) -> Result<Vec<(usize, f64)>, Failure> {
    let grid = tail_grid(samples.len().min(baseline.shots));
    let curve = tail_curve(samples, &grid, c_min)?;
    let mut out = Vec::with_capacity(curve.len());
    for point in curve {
        let r_random = baseline
            .tail_curve
            .iter()
            .find(|b| b.s_tilde == point.s_tilde)
            .map(|b| b.ar)
            .ok_or_else(|| Failure::Core(timeblock_core::Error::InvalidArgument("baseline grid mismatch".into())))?;
        if r_random < 1.0 {
            out.push((point.s_tilde, renormalized_ratio(point.ar, r_random)?));
        }
    }
    Ok(out)
}

/// Mean renormalized tail curves per `k`, over instances and every `p` whose
/// depth fraction lies in `[1, 2]`. Best trials are re-simulated from their
/// logged seeds.
pub fn tails(config: &RunConfig) -> Result<BTreeMap<usize, Vec<TailRow>>, Failure> {
    let instances = load_instances(config)?;
    let mut curves: BTreeMap<usize, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for (index, loaded) in instances.iter().enumerate() {
        let c_min = loaded.require_c_min(index)?;
        let base = baseline(config, index, loaded)?.expect("ground energy present");
        for (k, p) in grid(config) {
            let cfg = study_config(config, index, loaded, k, p)?;
            let depth = equivalent_standard_depth(&cfg.spec);
            if !(1.0..=2.0).contains(&depth) {
                continue;
            }
            let study = read_study(config, index, k, p)?;
            let best = study.best();
            let outcome = evaluate_trial(&cfg, &best.angles(), best.ordering_index, best.seed)?;
            for (s_tilde, value) in renormalized_tail(&outcome.samples, c_min, &base)? {
                curves.entry(k).or_default().entry(s_tilde).or_default().push(value);
            }
        }
    }
    if curves.is_empty() {
        return Err(Failure::Config("ansatz: no (k, p) with depth fraction p*k/n in [1, 2]".into()));
    }
    Ok(curves
        .into_iter()
        .map(|(k, by_s)| {
            let rows = by_s
                .into_iter()
                .map(|(s_tilde, values)| {
                    let (mean, stderr) = mean_and_stderr(&values);
                    TailRow { s_tilde, mean_renormalized_ar: mean, stderr, count: values.len() }
                })
                .collect();
            (k, rows)
        })
        .collect())
}

pub fn tails_csv(rows: &[TailRow]) -> String {
    let mut out = String::from("s_tilde,mean_renormalized_ar,stderr\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.s_tilde, r.mean_renormalized_ar, r.stderr);
    }
    out
}

pub fn write_tails(config: &RunConfig) -> Result<Vec<PathBuf>, Failure> {
    let curves = tails(config)?;
    let root = config.study_dir();
    fs::create_dir_all(&root)?;
    curves
        .iter()
        .map(|(k, rows)| {
            let path = root.join(format!("tails_k{k}.csv"));
            fs::write(&path, tails_csv(rows))?;
            Ok(path)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpreadRow {
    pub k: usize,
    pub p: usize,
    pub depth_fraction: f64,
    pub delta_max_over_orderings: f64,
    pub delta_max_over_angles: f64,
}

/// AR grid of a Cartesian random-search log: rows are orderings, columns angle sets.
pub fn ar_grid(study: &Study, orderings: usize) -> Result<Vec<Vec<f64>>, Failure> {
    let trials = study.trials();
    if trials.len() % orderings != 0 {
        return Err(Failure::Mismatch(format!("{} trials do not form a grid over {orderings} orderings", trials.len())));
    }
    let angle_sets = trials.len() / orderings;
    let mut grid = vec![vec![f64::NAN; angle_sets]; orderings];
    for t in trials {
        let ar = t.ar.ok_or_else(|| Failure::OracleUnavailable(format!("trial {} has no AR", t.trial_index)))?;
        grid[t.trial_index % orderings][t.trial_index / orderings] = ar;
    }
    Ok(grid)
}

/// Ordering-versus-angle spread for every `(k, p)`, averaged over instances.
pub fn spread(config: &RunConfig) -> Result<Vec<SpreadRow>, Failure> {
    if config.search.strategy != StrategyKind::Random {
        return Err(Failure::Config("search.strategy: spread analysis needs a random-search study".into()));
    }
    let instances = load_instances(config)?;
    let mut rows = Vec::new();
    for (k, p) in grid(config) {
        let mut over_orderings = Vec::new();
        let mut over_angles = Vec::new();
        let mut depth = 0.0;
        for (index, loaded) in instances.iter().enumerate() {
            loaded.require_c_min(index)?;
            let cfg = study_config(config, index, loaded, k, p)?;
            depth = equivalent_standard_depth(&cfg.spec);
            let study = read_study(config, index, k, p)?;
            let s = spread_analysis(&ar_grid(&study, config.search.orderings)?)?;
            over_orderings.push(s.delta_max_over_orderings);
            over_angles.push(s.delta_max_over_angles);
        }
        rows.push(SpreadRow {
            k,
            p,
            depth_fraction: depth,
            delta_max_over_orderings: mean_and_stderr(&over_orderings).0,
            delta_max_over_angles: mean_and_stderr(&over_angles).0,
        });
    }
    Ok(rows)
}

pub fn spread_csv(rows: &[SpreadRow]) -> String {
    let mut out = String::from("k,p,depth_fraction,delta_max_over_orderings,delta_max_over_angles\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.k, r.p, r.depth_fraction, r.delta_max_over_orderings, r.delta_max_over_angles
        );
    }
    out
}
