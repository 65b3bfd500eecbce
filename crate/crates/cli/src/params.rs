use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use readscroll_core::aggregate::{FeatureSelection, SubgroupFilter};
use readscroll_core::classifier::Averaging;
use readscroll_core::interaction::LengthBasis;
use readscroll_core::stats::PairingMethod;
use readscroll_core::text::LengthFeature;
use sha2::{Digest, Sha256};

use crate::fail::CliError;

/// Every command accepts the full flag set so that artifacts written by
/// different commands under the same flags carry the same config hash.
/// Flags a command does not use are still recorded.
#[derive(Debug, Clone, Args)]
pub struct Params {
    /// Corpus directory: one subdirectory per article.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Canonical session file (JSON lines).
    #[arg(long)]
    pub sessions: Option<PathBuf>,
    /// Participant CSV.
    #[arg(long)]
    pub participants: Option<PathBuf>,
    /// Age-of-acquisition CSV (`word,aoa[,lemma]`).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Adapter mapping (TOML) for a foreign export; replaces --sessions.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub proficiency_min: i32,
    #[arg(long, default_value_t = 5)]
    pub proficiency_max: i32,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for folds and permutation blocks.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    pub jobs: u64,

    /// Drop every reading of a participant with any unengaged reading.
    #[arg(long)]
    pub drop_partial_participants: bool,
    /// Denominator for normalized measures.
    #[arg(long, default_value = "word_count", value_parser = parse_basis)]
    pub length_basis: LengthBasis,
    /// Length feature in the baseline block.
    #[arg(long, default_value = "words", value_parser = parse_length_feature)]
    pub length_feature: LengthFeature,

    /// Subgroup filter, e.g. `l1=english,tamil;age=25-34;proficiency=3-5`.
    #[arg(long, value_parser = parse_filter)]
    pub filter: Option<SubgroupFilter>,
    #[arg(long, default_value = "scroll_all", value_parser = parse_selection)]
    pub features: FeatureSelection,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// SVM regularization strength.
    #[arg(long = "C", id = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value = "weighted", value_parser = parse_averaging)]
    pub averaging: Averaging,

    #[arg(long, default_value_t = 10_000)]
    pub n_permutations: usize,
    #[arg(long, default_value = "participant", value_parser = parse_pairing)]
    pub pairing: PairingMethod,
    /// Number of tests the Table-1 correlations are corrected for.
    #[arg(long, default_value_t = 16)]
    pub family_size: usize,
    /// First-language cohorts for the score-correlate analysis.
    #[arg(long, value_delimiter = ',', default_value = "english,tamil")]
    pub l1: Vec<String>,
    /// Subgroups evaluated in the scroll ablation table (repeatable).
    #[arg(long = "subgroup", default_value = "age=25-34", value_parser = parse_filter)]
    pub subgroups: Vec<SubgroupFilter>,
    /// Histogram bin width for average speed, px/ms.
    #[arg(long, default_value_t = 0.1)]
    pub bin_width: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SynthParams {
    #[arg(long, default_value_t = 300)]
    pub n_participants: usize,
    #[arg(long, default_value_t = 30)]
    pub n_articles: usize,
    /// Distinct articles per participant, alternating levels.
    #[arg(long, default_value_t = 2)]
    pub sessions_per_participant: usize,
    /// Sessions generated to fail the engagement rule.
    #[arg(long, default_value_t = 82)]
    pub n_disengaged: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SynthParams {
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_basis(s: &str) -> Result<LengthBasis, String> {
    LengthBasis::parse(s).ok_or_else(|| format!("expected word_count or content_height, got `{s}`"))
}

fn parse_length_feature(s: &str) -> Result<LengthFeature, String> {
    match s {
        "words" => Ok(LengthFeature::Words),
        "characters" | "chars" => Ok(LengthFeature::Characters),
        _ => Err(format!("expected words or characters, got `{s}`")),
    }
}

fn parse_filter(s: &str) -> Result<SubgroupFilter, String> {
    SubgroupFilter::parse(s).map_err(|e| e.to_string())
}

fn parse_selection(s: &str) -> Result<FeatureSelection, String> {
    FeatureSelection::parse(s).ok_or_else(|| {
        let names: Vec<&str> = FeatureSelection::ALL.iter().map(|f| f.as_str()).collect();
        format!("expected one of {}, got `{s}`", names.join(", "))
    })
}

fn parse_averaging(s: &str) -> Result<Averaging, String> {
    Averaging::parse(s).ok_or_else(|| format!("expected weighted, macro or micro, got `{s}`"))
}

fn parse_pairing(s: &str) -> Result<PairingMethod, String> {
    match s {
        "participant" => Ok(PairingMethod::Participant),
        "article" => Ok(PairingMethod::Article),
        _ => Err(format!("expected participant or article, got `{s}`")),
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), CliError> {
        for (flag, path) in [
            ("--corpus", &self.corpus),
            ("--sessions", &self.sessions),
            ("--participants", &self.participants),
            ("--lexicon", &self.lexicon),
            ("--mapping", &self.mapping),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(CliError::data(
                        "missing_input",
                        format!("{flag} {} does not exist", p.display()),
                    ));
                }
            }
        }
        if self.proficiency_min > self.proficiency_max {
            return Err(CliError::usage("--proficiency-min exceeds --proficiency-max"));
        }
        if self.k < 2 {
            return Err(CliError::usage("--k must be at least 2"));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(CliError::usage("--C must be positive"));
        }
        if self.n_permutations == 0 {
            return Err(CliError::usage("--n-permutations must be positive"));
        }
        if self.family_size == 0 {
            return Err(CliError::usage("--family-size must be positive"));
        }
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(CliError::usage("--bin-width must be positive"));
        }
        Ok(())
    }

    pub fn require<'a>(&self, flag: &str, path: &'a Option<PathBuf>) -> Result<&'a Path, CliError> {
        path.as_deref()
            .ok_or_else(|| CliError::usage(format!("{flag} is required for this command")))
    }

    /// Short hex digest over every parameter and the bytes of every input.
    /// Paths themselves are not hashed, so moving inputs keeps the hash.
    pub fn config_hash(&self) -> Result<String, CliError> {
        let mut h = Sha256::new();
        let filter = self
            .filter
            .as_ref()
            .map(|f| f.to_string())
            .unwrap_or_else(|| "all".into());
        let subgroups: Vec<String> = self.subgroups.iter().map(|f| f.to_string()).collect();
        let canonical = format!(
            "prof={}..{};seed={};drop_partial={};basis={};length={:?};filter={};features={};k={};c={};avg={};perm={};pairing={};family={};l1={};subgroups={};bin={}",
            self.proficiency_min,
            self.proficiency_max,
            self.seed,
            self.drop_partial_participants,
            self.length_basis.as_str(),
            self.length_feature,
            filter,
            self.features.as_str(),
            self.k,
            self.c,
            self.averaging,
            self.n_permutations,
            self.pairing.tag(),
            self.family_size,
            self.l1.join(","),
            subgroups.join("|"),
            self.bin_width,
        );
        h.update(canonical.as_bytes());
        for (name, path) in [
            ("corpus", &self.corpus),
            ("sessions", &self.sessions),
            ("participants", &self.participants),
            ("lexicon", &self.lexicon),
            ("mapping", &self.mapping),
        ] {
            if let Some(p) = path {
                h.update(name.as_bytes());
                hash_path(&mut h, p, Path::new(""))?;
            }
        }
        let digest = h.finalize();
        Ok(digest[..8].iter().map(|b| format!("{b:02x}")).collect())
    }
}

fn hash_path(h: &mut Sha256, path: &Path, rel: &Path) -> Result<(), CliError> {
    let read_err = |e: std::io::Error| CliError::data("io", format!("{}: {e}", path.display()));
    if path.is_dir() {
        let mut entries: Vec<_> = fs::read_dir(path)
            .map_err(read_err)?
            .collect::<Result<Vec<_>, _>>()
            .map_err(read_err)?;
        entries.sort_by_key(|e| e.file_name());
        for e in entries {
            hash_path(h, &e.path(), &rel.join(e.file_name()))?;
        }
    } else {
        h.update(rel.to_string_lossy().as_bytes());
        h.update(fs::read(path).map_err(read_err)?);
    }
    Ok(())
}
