//! Line-oriented `key = value` run configuration.
//!
//! Keys are dotted (`model.hidden`, `strategy.temperature`). `#` starts a
//! comment. Lists are comma-separated; pairs inside a list use `:`.
//! `arl.*` is accepted as an alias of `strategy.*`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::arl::ArlConfig;
use crate::data::SynthSpec;
use crate::model::{FusionKind, ModelConfig};
use crate::train::{OptimizerConfig, StrategyKind};

/// Where a config entry was set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    /// 1-based line in the config file.
    Line(usize),
    Override,
}

/// One diagnostic: where it came from and what is wrong. `origin` is
/// `None` for checks spanning several keys or relying on defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigIssue {
    pub origin: Option<Origin>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(l) => write!(f, "line {l}"),
            Origin::Override => f.write_str("the command line"),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.origin {
            Some(Origin::Line(l)) => write!(f, "line {l}: ")?,
            Some(Origin::Override) => write!(f, "override: ")?,
            None => {}
        }
        if let Some(k) = &self.key {
            write!(f, "{k}: ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvSource {
    pub path: PathBuf,
    /// Separate held-out file; when absent the main file is split 80/20
    /// per class.
    pub test_path: Option<PathBuf>,
    pub modality_dims: Vec<usize>,
    pub num_classes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Synth(SynthSpec),
    Csv(CsvSource),
}

impl DataSource {
    pub fn input_dims(&self) -> Vec<usize> {
        match self {
            DataSource::Synth(s) => s.feature_dims.clone(),
            DataSource::Csv(c) => c.modality_dims.clone(),
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            DataSource::Synth(s) => s.num_classes,
            DataSource::Csv(c) => c.num_classes,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyName {
    Vanilla,
    Balanced,
    Arl,
}

impl FromStr for StrategyName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "vanilla" => Ok(Self::Vanilla),
            "balanced" => Ok(Self::Balanced),
            "arl" => Ok(Self::Arl),
            other => Err(format!("unknown strategy '{other}' (expected vanilla, balanced or arl)")),
        }
    }
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Vanilla => "vanilla",
            Self::Balanced => "balanced",
            Self::Arl => "arl",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryConfig {
    /// Random unbiased variance pairs drawn uniformly from
    /// `[variance_min, variance_max]`.
    pub num_cases: usize,
    pub variance_min: f64,
    pub variance_max: f64,
    /// Extra variance pairs checked in addition to the random ones.
    pub cases: Vec<(f64, f64)>,
    /// Bias pairs for the bias-cancelling solution.
    pub bias_cases: Vec<(f64, f64)>,
    pub samples: usize,
    pub grid_step: f64,
    pub se_batches: usize,
    pub seed: u64,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            num_cases: 20,
            variance_min: 0.25,
            variance_max: 9.0,
            cases: Vec::new(),
            bias_cases: Vec::new(),
            samples: 100_000,
            grid_step: 0.01,
            se_batches: 20,
            seed: 0,
        }
    }
}

/// A sweep axis: a canonical config key and the values it takes.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub data: DataSource,
    pub hidden: Vec<usize>,
    pub rep_dims: Vec<usize>,
    pub fusion: FusionKind,
    pub strategy: StrategyName,
    pub arl: ArlConfig,
    /// `seed` is unused; each run takes its seed from `seeds`.
    pub optim: OptimizerConfig,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub theory: TheoryConfig,
    pub sweep: Vec<SweepAxis>,
}

impl RunConfig {
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            input_dims: self.data.input_dims(),
            hidden: self.hidden.clone(),
            rep_dims: self.rep_dims.clone(),
            fusion: self.fusion,
            num_classes: self.data.num_classes(),
        }
    }

    pub fn strategy_kind(&self) -> StrategyKind {
        match self.strategy {
            StrategyName::Vanilla => StrategyKind::Vanilla,
            StrategyName::Balanced => StrategyKind::Balanced(self.arl.clone()),
            StrategyName::Arl => StrategyKind::Arl(self.arl.clone()),
        }
    }

    pub fn optimizer(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig { seed, ..self.optim.clone() }
    }

    /// Parses a config file's text, then applies `key=value` overrides in
    /// order (last one wins).
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut issues = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            match content.split_once('=') {
                Some((k, v)) => {
                    let key = canonical_key(k.trim());
                    if let Some(prev) = raw.entries.get(&key) {
                        issues.push(ConfigIssue {
                            origin: Some(Origin::Line(i + 1)),
                            key: Some(key.clone()),
                            message: format!("duplicate key (first set on {})", prev.origin),
                        });
                        continue;
                    }
                    raw.insert(key, v.trim(), Origin::Line(i + 1));
                }
                None => issues.push(ConfigIssue {
                    origin: Some(Origin::Line(i + 1)),
                    key: None,
                    message: format!("expected 'key = value', found '{content}'"),
                }),
            }
        }
        for o in overrides {
            match o.split_once('=') {
                Some((k, v)) => raw.insert(canonical_key(k.trim()), v.trim(), Origin::Override),
                None => issues.push(ConfigIssue {
                    origin: Some(Origin::Override),
                    key: Some(o.clone()),
                    message: "override must have the form key=value".into(),
                }),
            }
        }
        let cfg = build(&mut raw, &mut issues);
        if issues.is_empty() {
            Ok(cfg.expect("no issues implies a config"))
        } else {
            Err(ConfigError(issues))
        }
    }

    /// The effective configuration with every field spelled out. Parsing it
    /// back yields an equal `RunConfig`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &self.data {
            DataSource::Synth(s) => {
                kv("synth.num_classes", s.num_classes.to_string());
                kv("synth.samples_per_class", s.samples_per_class.to_string());
                kv("synth.feature_dims", join(&s.feature_dims));
                kv("synth.noise", join_f(&s.noise));
                kv("synth.separation", fmt_f(s.separation));
                kv("synth.seed", s.seed.to_string());
            }
            DataSource::Csv(c) => {
                kv("csv.path", c.path.display().to_string());
                kv(
                    "csv.test_path",
                    c.test_path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "none".into()),
                );
                kv("csv.modality_dims", join(&c.modality_dims));
                kv("csv.num_classes", c.num_classes.to_string());
            }
        }
        kv("model.hidden", join(&self.hidden));
        kv("model.rep_dims", join(&self.rep_dims));
        kv("model.fusion", self.fusion.to_string());
        kv("strategy.kind", self.strategy.to_string());
        kv("strategy.temperature", fmt_f(self.arl.temperature));
        kv("strategy.gamma", fmt_f(self.arl.gamma));
        kv("strategy.entropy_floor", fmt_f(self.arl.entropy_floor));
        kv("strategy.use_ur", self.arl.use_ur.to_string());
        kv("strategy.use_al", self.arl.use_al.to_string());
        kv("strategy.use_gr", self.arl.use_gr.to_string());
        kv("strategy.ema_decay", self.arl.ema_decay.map(fmt_f).unwrap_or_else(|| "none".into()));
        kv("optim.lr", fmt_f(self.optim.lr));
        kv("optim.momentum", fmt_f(self.optim.momentum));
        kv("optim.weight_decay", fmt_f(self.optim.weight_decay));
        kv("optim.epochs", self.optim.epochs.to_string());
        kv("optim.batch_size", self.optim.batch_size.to_string());
        kv("run.seeds", join(&self.seeds));
        kv("run.output_dir", self.output_dir.display().to_string());
        let t = &self.theory;
        kv("theory.num_cases", t.num_cases.to_string());
        kv("theory.variance_min", fmt_f(t.variance_min));
        kv("theory.variance_max", fmt_f(t.variance_max));
        kv("theory.cases", join_pairs(&t.cases));
        kv("theory.bias_cases", join_pairs(&t.bias_cases));
        kv("theory.samples", t.samples.to_string());
        kv("theory.grid_step", fmt_f(t.grid_step));
        kv("theory.se_batches", t.se_batches.to_string());
        kv("theory.seed", t.seed.to_string());
        for axis in &self.sweep {
            kv(&format!("sweep.{}", axis.key), axis.values.join(", "));
        }
        out
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:?}")
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn join_f(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f(x)).collect::<Vec<_>>().join(", ")
}

fn join_pairs(xs: &[(f64, f64)]) -> String {
    xs.iter()
        .map(|&(a, b)| format!("{}:{}", fmt_f(a), fmt_f(b)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Maps aliases onto canonical keys. Inside `sweep.*`, `T` and `gamma`
/// name the strategy's temperature and gamma.
pub fn canonical_key(key: &str) -> String {
    match key.strip_prefix("sweep.") {
        Some(rest) => format!("sweep.{}", canonical_target(rest, true)),
        None => canonical_target(key, false),
    }
}

fn canonical_target(key: &str, in_sweep: bool) -> String {
    let key = match key.strip_prefix("arl.") {
        Some(rest) => format!("strategy.{rest}"),
        None => key.to_string(),
    };
    match key.as_str() {
        "strategy.T" => "strategy.temperature".into(),
        "T" | "temperature" if in_sweep => "strategy.temperature".into(),
        "gamma" if in_sweep => "strategy.gamma".into(),
        _ => key,
    }
}

#[derive(Clone, Debug)]
struct RawValue {
    value: String,
    origin: Origin,
}

#[derive(Default)]
struct RawConfig {
    entries: BTreeMap<String, RawValue>,
    /// Sweep keys in first-seen order.
    sweep_order: Vec<String>,
}

impl RawConfig {
    fn insert(&mut self, key: String, value: &str, origin: Origin) {
        if key.starts_with("sweep.") && !self.sweep_order.contains(&key) {
            self.sweep_order.push(key.clone());
        }
        self.entries.insert(
            key,
            RawValue {
                value: value.to_string(),
                origin,
            },
        );
    }

    fn has_prefix(&self, prefix: &str) -> Option<&RawValue> {
        self.entries
            .iter()
            .find(|(k, _)| k.starts_with(prefix))
            .map(|(_, v)| v)
    }
}

struct Reader<'a> {
    raw: &'a mut RawConfig,
    issues: &'a mut Vec<ConfigIssue>,
}

impl Reader<'_> {
    fn issue(&mut self, key: &str, origin: Option<Origin>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            origin,
            key: Some(key.to_string()),
            message: message.into(),
        });
    }

    fn take_with<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> T {
        match self.raw.entries.remove(key) {
            None => default,
            Some(RawValue { value, origin }) => match parse(&value) {
                Ok(v) => v,
                Err(e) => {
                    self.issue(key, Some(origin), e);
                    default
                }
            },
        }
    }

    fn take<T: FromStr>(&mut self, key: &str, default: T) -> T
    where
        T::Err: fmt::Display,
    {
        self.take_with(key, default, |s| s.parse::<T>().map_err(|e| format!("invalid value '{s}': {e}")))
    }

    fn take_list<T: FromStr>(&mut self, key: &str, default: Vec<T>) -> Vec<T>
    where
        T::Err: fmt::Display,
    {
        self.take_with(key, default, parse_list)
    }

    fn take_pairs(&mut self, key: &str) -> Vec<(f64, f64)> {
        self.take_with(key, Vec::new(), |s| {
            split_list(s)
                .into_iter()
                .map(|item| {
                    let (a, b) = item
                        .split_once(':')
                        .ok_or_else(|| format!("expected 'a:b' pairs, found '{item}'"))?;
                    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("invalid number '{x}': {e}"));
                    Ok((p(a)?, p(b)?))
                })
                .collect()
        })
    }

    fn origin_of(&self, key: &str) -> Option<Origin> {
        self.raw.entries.get(key).map(|v| v.origin)
    }
}

fn split_list(s: &str) -> Vec<&str> {
    if s.trim().is_empty() {
        return Vec::new();
    }
    s.split(',').map(str::trim).collect()
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    split_list(s)
        .into_iter()
        .map(|x| x.parse::<T>().map_err(|e| format!("invalid list item '{x}': {e}")))
        .collect()
}

fn parse_opt_f64(s: &str) -> Result<Option<f64>, String> {
    if s == "none" {
        Ok(None)
    } else {
        s.parse::<f64>()
            .map(Some)
            .map_err(|e| format!("expected a number or 'none', found '{s}': {e}"))
    }
}

fn build(raw: &mut RawConfig, issues: &mut Vec<ConfigIssue>) -> Option<RunConfig> {
    let synth_seen = raw.has_prefix("synth.").map(|v| v.origin);
    let csv_seen = raw.has_prefix("csv.").map(|v| v.origin);
    let sweep_order = raw.sweep_order.clone();
    let mut r = Reader { raw, issues };

    let data = match (synth_seen, csv_seen) {
        (Some(_), Some(origin)) => {
            r.issue(
                "csv",
                Some(origin),
                "conflicting data sources: both synth.* and csv.* are set; choose exactly one",
            );
            r.raw
                .entries
                .retain(|k, _| !k.starts_with("synth.") && !k.starts_with("csv."));
            None
        }
        (_, Some(_)) => {
            let path_origin = r.origin_of("csv.path");
            let path: Option<PathBuf> = r.take_with("csv.path", None, |s| Ok(Some(PathBuf::from(s))));
            let test_path = r.take_with("csv.test_path", None, |s| {
                Ok(if s == "none" { None } else { Some(PathBuf::from(s)) })
            });
            let modality_dims = r.take_list::<usize>("csv.modality_dims", Vec::new());
            let num_classes = r.take::<usize>("csv.num_classes", 0);
            if path.is_none() {
                r.issue("csv.path", path_origin, "required when reading data from CSV");
            }
            if modality_dims.is_empty() {
                r.issue("csv.modality_dims", None, "required when reading data from CSV");
            }
            if num_classes == 0 {
                r.issue("csv.num_classes", None, "required and must be >= 1");
            }
            path.map(|path| {
                DataSource::Csv(CsvSource {
                    path,
                    test_path,
                    modality_dims,
                    num_classes,
                })
            })
        }
        _ => {
            let spec = SynthSpec {
                num_classes: r.take("synth.num_classes", 4),
                samples_per_class: r.take("synth.samples_per_class", 200),
                feature_dims: r.take_list("synth.feature_dims", vec![16, 16]),
                noise: r.take_list("synth.noise", vec![0.3, 2.0]),
                separation: r.take("synth.separation", 1.0),
                seed: r.take("synth.seed", 0),
            };
            if let Err(e) = spec.validate() {
                r.issue("synth", None, e.to_string());
            }
            Some(DataSource::Synth(spec))
        }
    };

    let hidden = r.take_list("model.hidden", vec![32]);
    let k = data.as_ref().map(|d| d.input_dims().len()).unwrap_or(2);
    let rep_origin = r.origin_of("model.rep_dims");
    let rep_dims = r.take_list("model.rep_dims", vec![16; k]);
    let fusion = r.take("model.fusion", FusionKind::Concat);
    if let Some(d) = &data {
        let mc = ModelConfig {
            input_dims: d.input_dims(),
            hidden: hidden.clone(),
            rep_dims: rep_dims.clone(),
            fusion,
            num_classes: d.num_classes(),
        };
        if let Err(e) = mc.validate() {
            r.issue("model", rep_origin, e.to_string());
        }
    }

    let strategy = r.take("strategy.kind", StrategyName::Arl);
    let d = ArlConfig::default();
    let arl = ArlConfig {
        temperature: r.take("strategy.temperature", d.temperature),
        gamma: r.take("strategy.gamma", d.gamma),
        entropy_floor: r.take("strategy.entropy_floor", d.entropy_floor),
        use_ur: r.take("strategy.use_ur", d.use_ur),
        use_al: r.take("strategy.use_al", d.use_al),
        use_gr: r.take("strategy.use_gr", d.use_gr),
        ema_decay: r.take_with("strategy.ema_decay", d.ema_decay, parse_opt_f64),
    };
    if let Err(e) = arl.validate() {
        r.issue("strategy", None, e.to_string());
    }

    let o = OptimizerConfig::default();
    let optim = OptimizerConfig {
        lr: r.take("optim.lr", o.lr),
        momentum: r.take("optim.momentum", o.momentum),
        weight_decay: r.take("optim.weight_decay", o.weight_decay),
        epochs: r.take("optim.epochs", o.epochs),
        batch_size: r.take("optim.batch_size", o.batch_size),
        seed: 0,
    };
    if let Err(e) = optim.validate() {
        r.issue("optim", None, e.to_string());
    }

    let seeds_origin = r.origin_of("run.seeds");
    let seeds: Vec<u64> = r.take_list("run.seeds", vec![0]);
    if seeds.is_empty() {
        r.issue("run.seeds", seeds_origin, "at least one seed is required");
    }
    let output_dir = r.take_with("run.output_dir", PathBuf::from("runs"), |s| {
        if s.is_empty() {
            Err("must not be empty".into())
        } else {
            Ok(PathBuf::from(s))
        }
    });

    let t = TheoryConfig::default();
    let theory = TheoryConfig {
        num_cases: r.take("theory.num_cases", t.num_cases),
        variance_min: r.take("theory.variance_min", t.variance_min),
        variance_max: r.take("theory.variance_max", t.variance_max),
        cases: r.take_pairs("theory.cases"),
        bias_cases: r.take_pairs("theory.bias_cases"),
        samples: r.take("theory.samples", t.samples),
        grid_step: r.take("theory.grid_step", t.grid_step),
        se_batches: r.take("theory.se_batches", t.se_batches),
        seed: r.take("theory.seed", t.seed),
    };
    if !(theory.variance_min > 0.0 && theory.variance_min <= theory.variance_max && theory.variance_max.is_finite()) {
        r.issue("theory.variance_min", None, "need 0 < variance_min <= variance_max");
    }
    if !(theory.grid_step > 0.0 && theory.grid_step <= 0.1) {
        r.issue("theory.grid_step", None, "must be in (0, 0.1]");
    }
    if theory.samples < 2 * theory.se_batches.max(1) {
        r.issue("theory.samples", None, "must be at least twice theory.se_batches");
    }
    if let Some(&(a, b)) = theory.cases.iter().find(|(a, b)| !(*a > 0.0 && *b > 0.0)) {
        r.issue("theory.cases", None, format!("variances must be > 0, found {a}:{b}"));
    }

    let mut sweep = Vec::new();
    for key in sweep_order {
        let Some(RawValue { value, origin }) = r.raw.entries.remove(&key) else {
            continue;
        };
        let target = key.trim_start_matches("sweep.").to_string();
        if !is_sweepable(&target) {
            r.issue(&key, Some(origin), format!("'{target}' cannot be swept"));
            continue;
        }
        let values: Vec<String> = split_list(&value).into_iter().map(String::from).collect();
        if values.is_empty() {
            r.issue(&key, Some(origin), "sweep axis needs at least one value");
            continue;
        }
        sweep.push(SweepAxis { key: target, values });
    }

    let leftovers: Vec<(String, RawValue)> = std::mem::take(&mut r.raw.entries).into_iter().collect();
    for (key, v) in leftovers {
        r.issue(&key, Some(v.origin), "unknown key");
    }

    Some(RunConfig {
        data: data?,
        hidden,
        rep_dims,
        fusion,
        strategy,
        arl,
        optim,
        seeds,
        output_dir,
        theory,
        sweep,
    })
}

fn is_sweepable(key: &str) -> bool {
    key.starts_with("strategy.")
        || key.starts_with("optim.")
        || key.starts_with("model.")
        || matches!(key, "synth.noise" | "synth.separation" | "synth.seed" | "synth.samples_per_class")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_echoed_defaults() {
        let cfg = RunConfig::parse("", &[]).unwrap();
        assert_eq!(cfg.strategy, StrategyName::Arl);
        assert_eq!(cfg.arl.gamma, 4.0);
        let text = cfg.to_text();
        assert!(text.contains("strategy.gamma = 4.0"));
        assert!(text.contains("optim.batch_size = 64"));
        assert_eq!(RunConfig::parse(&text, &[]).unwrap(), cfg);
    }

    #[test]
    fn comments_aliases_and_overrides() {
        let text = "# header\narl.temperature = 8 # inline\nstrategy.gamma = 2\n";
        let cfg = RunConfig::parse(text, &["strategy.gamma=0".into(), "strategy.gamma=1".into()]).unwrap();
        assert_eq!(cfg.arl.temperature, 8.0);
        assert_eq!(cfg.arl.gamma, 1.0);
    }

    #[test]
    fn conflicting_sources_are_named() {
        let err = RunConfig::parse("synth.num_classes = 3\ncsv.path = x.csv\n", &[]).unwrap_err();
        assert!(err.to_string().contains("both synth.* and csv.*"), "{err}");
    }

    #[test]
    fn issues_carry_line_numbers() {
        let err = RunConfig::parse("optim.lr = 0.1\noptim.epochs = many\nbogus.key = 1\n", &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2: optim.epochs"), "{msg}");
        assert!(msg.contains("line 3: bogus.key: unknown key"), "{msg}");
    }

    #[test]
    fn issues_name_their_origin() {
        let err = RunConfig::parse("strategy.temperature = -1\n", &["optim.epochs=x".into()]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("override: optim.epochs"), "{msg}");
        assert!(msg.lines().any(|l| l.starts_with("strategy: invalid ARL config")), "{msg}");
    }

    #[test]
    fn duplicate_keys_in_file_are_rejected() {
        let err = RunConfig::parse("optim.lr = 0.1\noptim.lr = 0.2\n", &[]).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn sweep_axes_keep_order_and_round_trip() {
        let text = "sweep.gamma = 0, 4\nsweep.T = 1, 2, 4, 8\n";
        let cfg = RunConfig::parse(text, &[]).unwrap();
        assert_eq!(cfg.sweep[0].key, "strategy.gamma");
        assert_eq!(cfg.sweep[1].key, "strategy.temperature");
        assert_eq!(cfg.sweep[1].values.len(), 4);
        assert_eq!(RunConfig::parse(&cfg.to_text(), &[]).unwrap(), cfg);
    }

    #[test]
    fn csv_source_round_trips() {
        let text = "csv.path = data/train.csv\ncsv.modality_dims = 3, 5\ncsv.num_classes = 2\n";
        let cfg = RunConfig::parse(text, &[]).unwrap();
        assert_eq!(cfg.rep_dims, vec![16, 16]);
        assert_eq!(RunConfig::parse(&cfg.to_text(), &[]).unwrap(), cfg);
    }

    #[test]
    fn theory_pairs_parse() {
        let cfg = RunConfig::parse("theory.cases = 1:4, 2:3\ntheory.bias_cases = 0.5:-0.25\n", &[]).unwrap();
        assert_eq!(cfg.theory.cases, vec![(1.0, 4.0), (2.0, 3.0)]);
        assert_eq!(cfg.theory.bias_cases, vec![(0.5, -0.25)]);
        assert_eq!(RunConfig::parse(&cfg.to_text(), &[]).unwrap(), cfg);
    }

    #[test]
    fn invalid_values_are_reported_together() {
        let err = RunConfig::parse("optim.lr = -1\nstrategy.temperature = 0\n", &[]).unwrap_err();
        assert!(err.0.len() >= 2, "{err}");
    }
}
