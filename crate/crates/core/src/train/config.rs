use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::OverlapKind;
use crate::model::{AblationSwitches, B2bMode, DEFAULT_LEAKY_SLOPE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    #[default]
    Bgcn,
    MfBpr,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Bgcn => "bgcn",
            ModelKind::MfBpr => "mf-bpr",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bgcn" => Ok(ModelKind::Bgcn),
            "mf" | "mf-bpr" | "mfbpr" => Ok(ModelKind::MfBpr),
            _ => Err(Error::config("model", format!("unknown model {s:?}"))),
        }
    }
}

/// Which hard-candidate families the second training phase draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HardFamilies {
    /// Uniform negatives only; training stops after the first phase.
    None,
    /// Item coverage candidates of the user.
    Item,
    /// Overlap candidates of the positive bundle.
    Bundle,
    #[default]
    Both,
}

impl HardFamilies {
    pub fn item(self) -> bool {
        matches!(self, HardFamilies::Item | HardFamilies::Both)
    }

    pub fn bundle(self) -> bool {
        matches!(self, HardFamilies::Bundle | HardFamilies::Both)
    }
}

impl fmt::Display for HardFamilies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HardFamilies::None => "none",
            HardFamilies::Item => "item",
            HardFamilies::Bundle => "bundle",
            HardFamilies::Both => "both",
        })
    }
}

impl FromStr for HardFamilies {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(HardFamilies::None),
            "item" => Ok(HardFamilies::Item),
            "bundle" => Ok(HardFamilies::Bundle),
            "both" => Ok(HardFamilies::Both),
            _ => Err(Error::config("hard", format!("unknown family {s:?}"))),
        }
    }
}

/// Ablation variant names accepted by [`TrainConfig::apply_ablation`].
pub const ABLATION_NAMES: [&str; 10] = [
    "item-level",
    "bundle-level",
    "both-levels",
    "no-b2b",
    "unweighted-b2b",
    "weighted-b2b",
    "no-hard",
    "hard-item",
    "hard-bundle",
    "hard-both",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub lr: f64,
    pub lambda: f64,
    pub batch_size: usize,
    pub dim: usize,
    pub layers: usize,
    pub message_dropout: f64,
    pub node_dropout: f64,
    pub p_hard: f64,
    pub tau: f64,
    pub min_overlap: u32,
    pub hard: HardFamilies,
    pub patience: usize,
    pub max_epochs: usize,
    pub eval_every: usize,
    pub seed: u64,
    /// Seed of the per-user train/validation/test split.
    pub split_seed: u64,
    pub switches: AblationSwitches,
    pub overlap: OverlapKind,
    pub eval_ks: Vec<usize>,
    /// Validation Recall@K used for convergence and model selection.
    pub select_k: usize,
    pub leaky_slope: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Bgcn,
            lr: 1e-3,
            lambda: 1e-4,
            batch_size: 2048,
            dim: 64,
            layers: 2,
            message_dropout: 0.0,
            node_dropout: 0.0,
            p_hard: 0.8,
            tau: 0.5,
            min_overlap: 1,
            hard: HardFamilies::Both,
            patience: 5,
            max_epochs: 200,
            eval_every: 1,
            seed: 0,
            split_seed: 0,
            switches: AblationSwitches::default(),
            overlap: OverlapKind::Count,
            eval_ks: vec![20, 40, 80],
            select_k: 20,
            leaky_slope: DEFAULT_LEAKY_SLOPE,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "on" | "yes" => Ok(true),
        "false" | "0" | "off" | "no" => Ok(false),
        _ => Err(Error::config(
            key,
            format!("expected a boolean, got {value:?}"),
        )),
    }
}

pub(crate) fn parse_usize_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl TrainConfig {
    /// Applies one named ablation variant.
    pub fn apply_ablation(&mut self, name: &str) -> Result<()> {
        let sw = &mut self.switches;
        match name.trim() {
            "item-level" => {
                sw.item_level = true;
                sw.bundle_level = false;
            }
            "bundle-level" => {
                sw.item_level = false;
                sw.bundle_level = true;
            }
            "both-levels" => {
                sw.item_level = true;
                sw.bundle_level = true;
            }
            "no-b2b" => sw.b2b = B2bMode::None,
            "unweighted-b2b" => sw.b2b = B2bMode::Unweighted,
            "weighted-b2b" => sw.b2b = B2bMode::Weighted,
            "no-hard" => self.hard = HardFamilies::None,
            "hard-item" => self.hard = HardFamilies::Item,
            "hard-bundle" => self.hard = HardFamilies::Bundle,
            "hard-both" => self.hard = HardFamilies::Both,
            other => {
                return Err(Error::config(
                    "ablation",
                    format!("unknown variant {other:?}; expected one of {ABLATION_NAMES:?}"),
                ))
            }
        }
        Ok(())
    }

    /// Sets one field from its `key=value` spelling.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "model" => self.model = v.parse()?,
            "lr" => self.lr = parse(key, v)?,
            "lambda" => self.lambda = parse(key, v)?,
            "batch_size" => self.batch_size = parse(key, v)?,
            "dim" => self.dim = parse(key, v)?,
            "layers" => self.layers = parse(key, v)?,
            "message_dropout" => self.message_dropout = parse(key, v)?,
            "node_dropout" => self.node_dropout = parse(key, v)?,
            "p_hard" => self.p_hard = parse(key, v)?,
            "tau" => self.tau = parse(key, v)?,
            "min_overlap" => self.min_overlap = parse(key, v)?,
            "hard" => self.hard = v.parse()?,
            "patience" => self.patience = parse(key, v)?,
            "max_epochs" => self.max_epochs = parse(key, v)?,
            "eval_every" => self.eval_every = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "split_seed" => self.split_seed = parse(key, v)?,
            "item_level" => self.switches.item_level = parse_bool(key, v)?,
            "bundle_level" => self.switches.bundle_level = parse_bool(key, v)?,
            "b2b" => self.switches.b2b = v.parse()?,
            "overlap" => {
                self.overlap = match v {
                    "count" => OverlapKind::Count,
                    "jaccard" => OverlapKind::Jaccard,
                    _ => return Err(Error::config(key, format!("unknown overlap {v:?}"))),
                }
            }
            "eval_ks" => self.eval_ks = parse_usize_list(key, v)?,
            "select_k" => self.select_k = parse(key, v)?,
            "leaky_slope" => self.leaky_slope = parse(key, v)?,
            "ablation" => {
                for name in v.split(',').filter(|s| !s.trim().is_empty()) {
                    self.apply_ablation(name)?;
                }
            }
            other => return Err(Error::config(other, "unknown config key")),
        }
        Ok(())
    }

    /// Overlays `key=value` lines; `#` starts a comment.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", n + 1),
                    format!("expected key=value, got {line:?}"),
                )
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical `key=value` echo; parsing it back gives an equal config.
    pub fn to_kv_text(&self) -> String {
        let overlap = match self.overlap {
            OverlapKind::Count => "count",
            OverlapKind::Jaccard => "jaccard",
        };
        let ks: Vec<String> = self.eval_ks.iter().map(|k| k.to_string()).collect();
        let lines = [
            format!("model={}", self.model),
            format!("lr={:e}", self.lr),
            format!("lambda={:e}", self.lambda),
            format!("batch_size={}", self.batch_size),
            format!("dim={}", self.dim),
            format!("layers={}", self.layers),
            format!("message_dropout={}", self.message_dropout),
            format!("node_dropout={}", self.node_dropout),
            format!("p_hard={}", self.p_hard),
            format!("tau={}", self.tau),
            format!("min_overlap={}", self.min_overlap),
            format!("hard={}", self.hard),
            format!("patience={}", self.patience),
            format!("max_epochs={}", self.max_epochs),
            format!("eval_every={}", self.eval_every),
            format!("seed={}", self.seed),
            format!("split_seed={}", self.split_seed),
            format!("item_level={}", self.switches.item_level),
            format!("bundle_level={}", self.switches.bundle_level),
            format!("b2b={}", self.switches.b2b),
            format!("overlap={overlap}"),
            format!("eval_ks={}", ks.join(",")),
            format!("select_k={}", self.select_k),
            format!("leaky_slope={}", self.leaky_slope),
        ];
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, field: &str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(field, msg))
            }
        };
        check(
            self.lr > 0.0 && self.lr.is_finite(),
            "lr",
            "must be positive",
        )?;
        check(
            self.lambda >= 0.0 && self.lambda.is_finite(),
            "lambda",
            "must be >= 0",
        )?;
        check(self.batch_size > 0, "batch_size", "must be positive")?;
        check(self.dim > 0, "dim", "must be positive")?;
        check(
            (0.0..1.0).contains(&self.message_dropout),
            "message_dropout",
            "must be in [0,1)",
        )?;
        check(
            (0.0..1.0).contains(&self.node_dropout),
            "node_dropout",
            "must be in [0,1)",
        )?;
        check(
            (0.0..=1.0).contains(&self.p_hard),
            "p_hard",
            "must be in [0,1]",
        )?;
        check(self.tau > 0.0 && self.tau <= 1.0, "tau", "must be in (0,1]")?;
        check(self.patience > 0, "patience", "must be positive")?;
        check(self.eval_every > 0, "eval_every", "must be positive")?;
        check(self.select_k > 0, "select_k", "must be positive")?;
        check(
            !self.eval_ks.is_empty() && self.eval_ks.iter().all(|&k| k > 0),
            "eval_ks",
            "must be a nonempty list of positive K",
        )?;
        check(
            (0.0..1.0).contains(&self.leaky_slope),
            "leaky_slope",
            "must be in [0,1)",
        )?;
        self.switches.validate()
    }

    /// Validation cutoffs: `eval_ks` plus `select_k`, sorted and deduplicated.
    pub fn validation_ks(&self) -> Vec<usize> {
        let mut ks = self.eval_ks.clone();
        ks.push(self.select_k);
        ks.sort_unstable();
        ks.dedup();
        ks
    }
}
