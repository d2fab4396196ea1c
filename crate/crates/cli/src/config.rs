use std::path::{Path, PathBuf};

use causeway::io::{GraphFormat, IngestOptions};
use causeway::pc::{CandidatePool, PcConfig, SkeletonMode};
use causeway::Linkage;
use serde::{Deserialize, Serialize};

use crate::cli::{Grid, IngestOpts, PcOpts, Significance};
use crate::error::{Failure, Outcome};

/// Settings file. Every key is optional and mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub soe: Option<f64>,
    pub depth: Option<usize>,
    pub candidates: Option<String>,
    pub mode: Option<String>,
    pub tiers: Option<PathBuf>,
    pub k: Option<usize>,
    pub linkage: Option<String>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub n: Option<usize>,
    pub alphas: Option<Vec<f64>>,
    pub soes: Option<Vec<f64>>,
    pub formats: Option<Vec<String>>,
    pub raw_truth: Option<bool>,
    pub standardize: Option<bool>,
    pub key_patterns: Option<Vec<String>>,
    pub delimiter: Option<String>,
    pub threads: Option<usize>,
    pub mean_degree: Option<f64>,
    pub tier_blocks: Option<usize>,
    pub network_seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Outcome<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::runtime(anyhow::Error::new(e).context(format!("reading {}", path.display()))))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| Failure::invalid(anyhow::Error::new(e).context(format!("config {}", path.display()))))?;
        // relative paths in the file are relative to the file
        if let (Some(t), Some(dir)) = (&cfg.tiers, path.parent()) {
            if t.is_relative() {
                cfg.tiers = Some(dir.join(t));
            }
        }
        Ok(cfg)
    }
}

pub const DEFAULT_K: usize = 50;
pub const DEFAULT_ALPHAS: [f64; 4] = [0.001, 0.01, 0.05, 0.1];
pub const DEFAULT_SOES: [f64; 3] = [0.0, 0.05, 0.1];

fn first_nonempty<T: Clone>(flag: &[T], file: &Option<Vec<T>>, default: &[T]) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else {
        file.clone().unwrap_or_else(|| default.to_vec())
    }
}

fn parse_delimiter(s: &str) -> Outcome<u8> {
    match s {
        "," | "comma" => Ok(b','),
        "\t" | "tab" | "\\t" => Ok(b'\t'),
        _ => Err(Failure::invalid_msg(format!("--delimiter must be `,` or `tab`, got `{s}`"))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSettings {
    pub delimiter: Option<char>,
    pub key_patterns: Vec<String>,
    pub standardize: bool,
}

impl IngestSettings {
    pub fn resolve(flags: &IngestOpts, file: &FileConfig) -> Outcome<Self> {
        let defaults = IngestOptions::default();
        let delimiter = match flags.delimiter.as_ref().or(file.delimiter.as_ref()) {
            Some(s) => Some(parse_delimiter(s)? as char),
            None => None,
        };
        Ok(Self {
            delimiter,
            key_patterns: first_nonempty(&flags.key_patterns, &file.key_patterns, &defaults.key_patterns),
            standardize: !flags.no_standardize && file.standardize.unwrap_or(true),
        })
    }

    pub fn options(&self) -> IngestOptions {
        IngestOptions {
            delimiter: self.delimiter.map(|c| c as u8),
            key_patterns: self.key_patterns.clone(),
            standardize: self.standardize,
        }
    }
}

fn parse_candidates(s: &str) -> Outcome<CandidatePool> {
    match s {
        "two-sided" => Ok(CandidatePool::TwoSided),
        "paper-strict" => Ok(CandidatePool::PaperStrict),
        _ => Err(Failure::invalid_msg(format!("--candidates must be two-sided or paper-strict, got `{s}`"))),
    }
}

fn parse_mode(s: &str) -> Outcome<SkeletonMode> {
    match s {
        "sequential" => Ok(SkeletonMode::Sequential),
        "level-parallel" => Ok(SkeletonMode::LevelParallel),
        _ => Err(Failure::invalid_msg(format!("--mode must be sequential or level-parallel, got `{s}`"))),
    }
}

/// PC settings plus the tier file; alpha and soe come from `sig` when given.
pub fn resolve_pc(sig: Option<&Significance>, flags: &PcOpts, file: &FileConfig) -> Outcome<(PcConfig, Option<PathBuf>)> {
    let d = PcConfig::default();
    let cfg = PcConfig {
        alpha: sig.and_then(|s| s.alpha).or(file.alpha).unwrap_or(d.alpha),
        soe: sig.and_then(|s| s.soe).or(file.soe).unwrap_or(d.soe),
        depth: flags.depth.or(file.depth),
        candidates: match flags.candidates.as_ref().or(file.candidates.as_ref()) {
            Some(s) => parse_candidates(s)?,
            None => d.candidates,
        },
        mode: match flags.mode.as_ref().or(file.mode.as_ref()) {
            Some(s) => parse_mode(s)?,
            None => d.mode,
        },
    };
    cfg.validate().map_err(Failure::invalid)?;
    Ok((cfg, flags.tiers.clone().or_else(|| file.tiers.clone())))
}

pub fn resolve_linkage(flag: &Option<String>, file: &FileConfig) -> Outcome<Linkage> {
    match flag.as_ref().or(file.linkage.as_ref()) {
        Some(s) => s.parse().map_err(Failure::invalid),
        None => Ok(Linkage::default()),
    }
}

pub fn resolve_formats(flag: &[String], file: &FileConfig) -> Outcome<Vec<GraphFormat>> {
    let names = first_nonempty(flag, &file.formats, &["dot".to_string()]);
    let mut out: Vec<GraphFormat> = Vec::new();
    for n in names {
        let f: GraphFormat = n.parse().map_err(Failure::invalid)?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSettings {
    pub alphas: Vec<f64>,
    pub soes: Vec<f64>,
    pub replicates: usize,
    pub n: usize,
    pub raw_truth: bool,
}

impl GridSettings {
    pub fn resolve(flags: &Grid, file: &FileConfig) -> Self {
        Self {
            alphas: first_nonempty(&flags.alphas, &file.alphas, &DEFAULT_ALPHAS),
            soes: first_nonempty(&flags.soes, &file.soes, &DEFAULT_SOES),
            replicates: flags.replicates.or(file.replicates).unwrap_or(10),
            n: flags.n.or(file.n).unwrap_or(50_000),
            raw_truth: flags.raw_truth || file.raw_truth.unwrap_or(false),
        }
    }
}
