//! Named certificate suites and their configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::coherent::{default_cutoff, transform_certificates};
use crate::density::density_certificates;
use crate::kahler::{kahler_certificates, KahlerSampling};
use crate::lie::{parse_model_file, LieModel};
use crate::psh::psh_certificates;
use crate::reduction::reduction_certificates;
use crate::report::CheckReport;
use crate::stratum::{stratum_certificates, DEFAULT_GRID};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Kahler,
    Psh,
    Transform,
    Reduction,
    Density,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] =
        ["kahler", "psh", "transform", "reduction", "density", "all"];

    /// The concrete suites this selection runs, in report order.
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Kahler,
                Suite::Psh,
                Suite::Transform,
                Suite::Reduction,
                Suite::Density,
            ],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kahler" => Ok(Suite::Kahler),
            "psh" => Ok(Suite::Psh),
            "transform" => Ok(Suite::Transform),
            "reduction" => Ok(Suite::Reduction),
            "density" => Ok(Suite::Density),
            "all" => Ok(Suite::All),
            other => Err(Error::Usage(format!(
                "unknown suite '{other}'; available suites: {}",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = *self as usize;
        f.write_str(Suite::NAMES[i])
    }
}

/// Everything a run depends on. Equal configs give byte-identical reports.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    /// A built-in model name or `file:<path>` for a model file.
    pub model: String,
    pub suite: Suite,
    pub seed: u64,
    /// Label cutoff; the model default when `None`.
    pub cutoff: Option<usize>,
    /// Grid size per axis of the density demo.
    pub grid: usize,
    pub kahler_samples: usize,
    /// Tolerance overrides keyed by check id.
    pub tolerances: BTreeMap<String, f64>,
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            model: "su2".into(),
            suite: Suite::All,
            seed: 0,
            cutoff: None,
            grid: DEFAULT_GRID,
            kahler_samples: KahlerSampling::default().j_samples,
            tolerances: BTreeMap::new(),
            out: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad value '{value}' for '{key}'"),
    })
}

impl SuiteConfig {
    /// Apply one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        match key {
            "model" => self.model = value.to_string(),
            "suite" => self.suite = value.parse()?,
            "seed" => self.seed = parse_value(key, value, line)?,
            "cutoff" => self.cutoff = Some(parse_value(key, value, line)?),
            "grid" => self.grid = parse_value(key, value, line)?,
            "kahler_samples" => self.kahler_samples = parse_value(key, value, line)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => {
                if let Some(id) = key.strip_prefix("tol.") {
                    let tol: f64 = parse_value(key, value, line)?;
                    self.tolerances.insert(id.to_string(), tol);
                } else {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key '{key}'"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Flat `key=value` text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.merge_text(text)?;
        Ok(c)
    }

    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                message: "expected key=value".into(),
            })?;
            self.set(key.trim(), value.trim(), k + 1)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((id, t)) = self
            .tolerances
            .iter()
            .find(|(_, t)| !(**t > 0.0 && t.is_finite()))
        {
            return Err(Error::Usage(format!(
                "tolerance for '{id}' must be positive, got {t}"
            )));
        }
        if self.grid < 64 {
            return Err(Error::Usage(format!(
                "density grid {} is below the minimum 64",
                self.grid
            )));
        }
        if self.kahler_samples == 0 {
            return Err(Error::Usage("kahler_samples must be positive".into()));
        }
        Ok(())
    }

    pub fn load_model(&self) -> Result<LieModel> {
        match self.model.strip_prefix("file:") {
            Some(path) => parse_model_file(&std::fs::read_to_string(path)?),
            None => LieModel::by_name(&self.model),
        }
    }
}

/// A failed computation, reported instead of aborting the run.
fn error_report(suite: Suite, e: &Error) -> CheckReport {
    CheckReport::new(
        &format!("{suite}.error"),
        "suite could not complete",
        0.0,
        f64::INFINITY,
    )
    .with("error", e.to_string())
}

fn run_one(model: &LieModel, suite: Suite, config: &SuiteConfig) -> Vec<CheckReport> {
    let cutoff = config.cutoff.unwrap_or_else(|| default_cutoff(model));
    let result = match suite {
        Suite::Kahler => {
            let sampling = KahlerSampling {
                j_samples: config.kahler_samples,
                completeness_samples: config.kahler_samples,
                ..KahlerSampling::default()
            };
            Ok(kahler_certificates(model, sampling, config.seed))
        }
        Suite::Psh => psh_certificates(model, config.seed),
        Suite::Transform => transform_certificates(model, cutoff, config.seed),
        Suite::Reduction => reduction_certificates(model, cutoff, config.seed),
        Suite::Density => density_certificates(model, cutoff, config.seed).and_then(|mut v| {
            v.extend(stratum_certificates(config.grid)?);
            Ok(v)
        }),
        Suite::All => unreachable!("expanded before dispatch"),
    };
    result.unwrap_or_else(|e| vec![error_report(suite, &e)])
}

/// Replace the tolerance of `id`, here or in nested parts, and recompute
/// the pass flags.
pub fn override_tolerance(report: &mut CheckReport, id: &str, tol: f64) -> bool {
    let mut hit = false;
    if let Some(parts) = report.metadata.get("parts").cloned() {
        if let Ok(mut parts) = serde_json::from_value::<Vec<CheckReport>>(parts) {
            for p in &mut parts {
                hit |= override_tolerance(p, id, tol);
            }
            if hit {
                let combined =
                    CheckReport::combine(&report.check_id, &report.citation, parts.clone());
                report.max_error = combined.max_error;
                report.pass = combined.pass;
                report.metadata.insert(
                    "parts".into(),
                    serde_json::to_value(&parts).unwrap_or_default(),
                );
            }
        }
    }
    if report.check_id == id {
        report.tolerance = tol;
        report.pass = report.max_error <= tol;
        hit = true;
    }
    hit
}

/// Run the selected suites. Unknown models or suites and invalid settings
/// are errors; failing checks are part of the result.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    config.validate()?;
    let model = config.load_model()?;
    let suites = config.suite.expand();
    let batches: Vec<Vec<CheckReport>> = suites
        .par_iter()
        .map(|s| run_one(&model, *s, config))
        .collect();
    let mut out: Vec<CheckReport> = batches.into_iter().flatten().collect();
    for (id, tol) in &config.tolerances {
        let mut hit = false;
        for r in &mut out {
            hit |= override_tolerance(r, id, *tol);
        }
        if !hit {
            return Err(Error::Usage(format!(
                "tolerance override for unknown check '{id}'"
            )));
        }
    }
    for r in &mut out {
        r.metadata.insert("seed".into(), config.seed.into());
        r.metadata.insert("model".into(), model.name().into());
    }
    Ok(out)
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c =
            SuiteConfig::parse("# run\nmodel = u1\nsuite=psh\nseed=9\ntol.psh.twist.spin = 1e-3\n")
                .unwrap();
        assert_eq!(c.model, "u1");
        assert_eq!(c.suite, Suite::Psh);
        assert_eq!(c.seed, 9);
        assert_eq!(c.tolerances["psh.twist.spin"], 1e-3);
        assert!(matches!(
            SuiteConfig::parse("seed=x"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            SuiteConfig::parse("colour=blue"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!("e8".parse::<Suite>(), Err(Error::Usage(_))));
        assert_eq!(Suite::Reduction.to_string(), "reduction");
    }

    #[test]
    fn invalid_inputs() {
        let c = SuiteConfig {
            model: "e8".into(),
            ..SuiteConfig::default()
        };
        assert!(matches!(run_suite(&c), Err(Error::Usage(_))));
        let mut c = SuiteConfig::default();
        c.tolerances.insert("x".into(), -1.0);
        assert!(matches!(run_suite(&c), Err(Error::Usage(_))));
    }

    #[test]
    fn nested_override() {
        let inner = vec![
            CheckReport::new("a", "c", 1e-9, 1e-6),
            CheckReport::new("b", "c", 1e-3, 1e-6),
        ];
        let mut r = CheckReport::combine("top", "c", inner);
        assert!(!r.pass);
        assert!(override_tolerance(&mut r, "a", 1e-5));
        assert!(r.pass);
    }

    #[test]
    fn psh_suite_on_u1() {
        let c = SuiteConfig {
            model: "u1".into(),
            suite: Suite::Psh,
            ..SuiteConfig::default()
        };
        let r = run_suite(&c).unwrap();
        assert!(all_pass(&r));
        assert!(r.iter().all(|x| x.metadata["seed"] == 0));
    }
}
