//! Per-equation certificates: every constant, bound, convergent and search
//! range of a run, serialized deterministically (sorted keys, big integers as
//! decimal strings, no timestamps or runtimes).

use std::path::Path;

use serde::Serialize;

use crate::baker::{GammaBound, MatveevInstance};
use crate::equation::Equation;
use crate::error::{Error, Result};
use crate::real::{ConstantEntry, MinimalPolyReport};
use crate::reduction::ReductionChain;
use crate::search::SearchReport;
use crate::two_adic::{BlockCaps, PrintedBranchAudit};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Toolchain {
    pub version: String,
    pub precision_digits: u32,
    /// Precision at which every reduction decision settled.
    pub reduction_digits: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct BinetAudit {
    pub n_max: u64,
    pub form: String,
    pub holds: bool,
    pub unshifted_form: String,
    pub unshifted_first_failure: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsSection {
    pub digits: u32,
    pub entries: Vec<ConstantEntry>,
    pub alpha_in_1_83_1_84: bool,
    pub c_alpha_in_0_18_0_19: bool,
    pub binet: BinetAudit,
    pub minimal_polynomial: MinimalPolyReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableSummary {
    pub range_min: u64,
    pub range_max: u64,
    pub rows: usize,
    pub all_consistent: bool,
    pub interpreted_typos: Vec<String>,
    pub closed_form_range_max: u64,
    pub closed_form_mismatch_count: u64,
    pub printed_plus_branch: PrintedBranchAudit,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapsSection {
    pub caps: BlockCaps,
    pub tables: TableSummary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyKind {
    /// A printed value the recomputation could not reproduce as stated.
    OpenQuestion,
    /// A printed argument that recomputation shows to be incorrect or loose.
    AuditFinding,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub location: String,
    pub kind: DiscrepancyKind,
    pub printed_value: String,
    pub recomputed_value: String,
}

impl Discrepancy {
    pub fn new(location: &str, kind: DiscrepancyKind, printed: impl Into<String>, recomputed: impl Into<String>) -> Self {
        Discrepancy {
            location: location.into(),
            kind,
            printed_value: printed.into(),
            recomputed_value: recomputed.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub equation: Equation,
    pub toolchain: Toolchain,
    pub constants: ConstantsSection,
    pub caps: Option<CapsSection>,
    pub matveev: Option<MatveevInstance>,
    pub gamma_bounds: Vec<GammaBound>,
    /// One chain per `|Gamma|` model; the search ceiling dominates all of them.
    pub reductions: Vec<ReductionChain>,
    pub search: SearchReport,
    pub expected_outcome: String,
    pub outcome_confirmed: bool,
    pub discrepancies: Vec<Discrepancy>,
}

impl Certificate {
    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Io(e.to_string()))?;
        let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn file_name(&self) -> String {
        format!("certificate-{}.json", self.equation)
    }

    pub fn write_to_dir(&self, dir: &Path) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_json()?)?;
        Ok(path)
    }

    /// Each stage's input bound must be the previous stage's output, and the
    /// search must cover every chain's final bound.
    pub fn check_consistency(&self) -> Result<()> {
        for chain in &self.reductions {
            let mut bound = chain.initial.bound;
            for stage in &chain.stages {
                if stage.input_bound != bound || stage.new_bound > bound {
                    return Err(Error::certification(
                        "certificate",
                        format!("{:?} stage {} does not continue from {bound}", chain.model, stage.stage),
                    ));
                }
                bound = stage.new_bound;
            }
            if bound != chain.final_bound || self.search.space.n_max + 1 < chain.final_bound {
                return Err(Error::certification(
                    "certificate",
                    format!("search to n = {} does not cover n < {}", self.search.space.n_max, chain.final_bound),
                ));
            }
        }
        Ok(())
    }
}
