//! JSON interchange documents.
//!
//! A family document stores each projector as a `d x d` array of `[re, im]`
//! pairs. Numbers are written in shortest round-trip form, so saving and
//! loading reproduces every entry bit for bit. Loading validates every
//! matrix; nothing in a document is trusted.

use crate::algebra::{MubFamily, ProjectorMatrix, StateVector, C64};
use crate::error::{MubError, Result};
use crate::reconstruct::eigen_hermitian;
use crate::search::{RestartRecord, SearchConfig, SearchResult};
use crate::verify::VerificationReport;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub const FORMAT_VERSION: &str = "1.0";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Tolerance for Hermiticity, trace and PSD checks on load.
pub const LOAD_TOL: f64 = 1e-9;

pub type Pair = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectorEntry {
    pub alpha: usize,
    pub matrix: Vec<Vec<Pair>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub basis_index: usize,
    pub projectors: Vec<ProjectorEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub alpha: usize,
    pub amplitudes: Vec<Pair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateBasisEntry {
    pub basis_index: usize,
    pub vectors: Vec<StateEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDocument {
    pub format_version: String,
    pub dimension: usize,
    pub bases: Vec<BasisEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<StateBasisEntry>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn invalid(msg: String) -> MubError {
    MubError::InvalidDocument(msg)
}

/// Checks that `labels` is a permutation of `0..n` and returns the order
/// that sorts them.
fn label_order(labels: &[usize], what: &str, context: &str) -> Result<Vec<usize>> {
    let n = labels.len();
    let mut slot = vec![None; n];
    for (pos, &label) in labels.iter().enumerate() {
        if label >= n {
            return Err(invalid(format!("{context}{what} {label} out of range 0..{n}")));
        }
        if slot[label].replace(pos).is_some() {
            return Err(invalid(format!("{context}duplicate {what} {label}")));
        }
    }
    Ok(slot.into_iter().map(|s| s.unwrap()).collect())
}

impl FamilyDocument {
    pub fn from_family(f: &MubFamily) -> Self {
        let d = f.dim();
        let bases = f
            .bases()
            .iter()
            .enumerate()
            .map(|(a, basis)| BasisEntry {
                basis_index: a,
                projectors: basis
                    .iter()
                    .enumerate()
                    .map(|(alpha, m)| ProjectorEntry {
                        alpha,
                        matrix: (0..d)
                            .map(|p| (0..d).map(|q| pair(m.entry(p, q))).collect())
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION.to_string(),
            dimension: d,
            bases,
            states: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_states(mut self, states: &[Vec<StateVector>]) -> Self {
        self.states = Some(
            states
                .iter()
                .enumerate()
                .map(|(a, basis)| StateBasisEntry {
                    basis_index: a,
                    vectors: basis
                        .iter()
                        .enumerate()
                        .map(|(alpha, s)| StateEntry {
                            alpha,
                            amplitudes: s.amplitudes().iter().copied().map(pair).collect(),
                        })
                        .collect(),
                })
                .collect(),
        );
        self
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    fn check_header(&self) -> Result<usize> {
        if self.format_version.split('.').next() != Some("1") {
            return Err(invalid(format!(
                "unsupported format_version {:?}",
                self.format_version
            )));
        }
        let d = self.dimension;
        if d == 0 {
            return Err(invalid("dimension must be positive".into()));
        }
        if self.bases.is_empty() {
            return Err(invalid("no bases".into()));
        }
        if self.bases.len() > d + 1 {
            return Err(invalid(format!(
                "{} bases exceed the maximum d + 1 = {}",
                self.bases.len(),
                d + 1
            )));
        }
        Ok(d)
    }

    /// Validated family; errors name the offending `(basis_index, alpha, entry)`.
    pub fn to_family(&self) -> Result<MubFamily> {
        let d = self.check_header()?;
        let labels: Vec<usize> = self.bases.iter().map(|b| b.basis_index).collect();
        let order = label_order(&labels, "basis_index", "")?;
        let mut bases = Vec::with_capacity(order.len());
        for &pos in &order {
            let basis = &self.bases[pos];
            let a = basis.basis_index;
            let ctx = format!("basis_index {a}: ");
            if basis.projectors.len() != d {
                return Err(invalid(format!(
                    "{ctx}expected {d} projectors, found {}",
                    basis.projectors.len()
                )));
            }
            let alphas: Vec<usize> = basis.projectors.iter().map(|p| p.alpha).collect();
            let inner = label_order(&alphas, "alpha", &ctx)?;
            let mut projectors = Vec::with_capacity(d);
            for &j in &inner {
                let entry = &basis.projectors[j];
                projectors.push(matrix_from_entry(d, a, entry)?);
            }
            bases.push(projectors);
        }
        MubFamily::new(d, bases)
    }

    /// Validated states, if the document carries them.
    pub fn to_states(&self) -> Result<Option<Vec<Vec<StateVector>>>> {
        let Some(states) = &self.states else {
            return Ok(None);
        };
        let d = self.check_header()?;
        let labels: Vec<usize> = states.iter().map(|b| b.basis_index).collect();
        let order = label_order(&labels, "basis_index", "states: ")?;
        let mut out = Vec::with_capacity(order.len());
        for &pos in &order {
            let basis = &states[pos];
            let ctx = format!("states basis_index {}: ", basis.basis_index);
            let alphas: Vec<usize> = basis.vectors.iter().map(|v| v.alpha).collect();
            let inner = label_order(&alphas, "alpha", &ctx)?;
            let mut vectors = Vec::with_capacity(inner.len());
            for &j in &inner {
                let entry = &basis.vectors[j];
                if entry.amplitudes.len() != d {
                    return Err(invalid(format!(
                        "{ctx}alpha {}: expected {d} amplitudes, found {}",
                        entry.alpha,
                        entry.amplitudes.len()
                    )));
                }
                let amps = entry.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
                let s = StateVector::new(amps)
                    .map_err(|e| invalid(format!("{ctx}alpha {}: {e}", entry.alpha)))?;
                let defect = (s.norm_sqr() - 1.0).abs();
                if defect > LOAD_TOL {
                    return Err(invalid(format!(
                        "{ctx}alpha {}: norm defect {defect:e}",
                        entry.alpha
                    )));
                }
                vectors.push(s);
            }
            out.push(vectors);
        }
        Ok(Some(out))
    }
}

fn matrix_from_entry(d: usize, a: usize, entry: &ProjectorEntry) -> Result<ProjectorMatrix> {
    let alpha = entry.alpha;
    let ctx = format!("basis_index {a}, alpha {alpha}");
    if entry.matrix.len() != d || entry.matrix.iter().any(|row| row.len() != d) {
        return Err(invalid(format!("{ctx}: matrix is not {d}x{d}")));
    }
    let entries = entry
        .matrix
        .iter()
        .flatten()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    let m = ProjectorMatrix::new(d, entries).map_err(|e| invalid(format!("{ctx}: {e}")))?;
    for p in 0..d {
        for q in p..d {
            let residual = (m.entry(p, q) - m.entry(q, p).conj()).norm();
            if residual > LOAD_TOL {
                return Err(invalid(format!(
                    "{ctx}, entry ({p},{q}): not Hermitian (residual {residual:e})"
                )));
            }
        }
    }
    let trace_defect = (m.trace() - 1.0).norm();
    if trace_defect > LOAD_TOL {
        return Err(invalid(format!("{ctx}: trace differs from 1 by {trace_defect:e}")));
    }
    let lowest = eigen_hermitian(&m)
        .map_err(|e| invalid(format!("{ctx}: {e}")))?
        .min_eigenvalue();
    if lowest < -LOAD_TOL {
        return Err(invalid(format!("{ctx}: not positive semidefinite (eigenvalue {lowest:e})")));
    }
    Ok(m)
}

pub fn parse_document(text: &str) -> Result<FamilyDocument> {
    Ok(serde_json::from_str(text)?)
}

/// Parses and validates a family document.
pub fn parse_family(text: &str) -> Result<MubFamily> {
    parse_document(text)?.to_family()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| MubError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| MubError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_document(path: &Path) -> Result<FamilyDocument> {
    parse_document(&read(path)?)
}

pub fn load_family(path: &Path) -> Result<MubFamily> {
    parse_family(&read(path)?)
}

pub fn save_family(f: &MubFamily, path: &Path) -> Result<()> {
    write_json(&FamilyDocument::from_family(f), path)
}

/// Lowercase hex SHA-256.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A verification report with provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool_version: String,
    pub input_sha256: String,
    pub report: VerificationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchLog {
    pub tool_version: String,
    pub config: SearchConfig,
    pub status: String,
    pub converged: bool,
    pub best_objective: f64,
    pub best_restart: usize,
    pub restarts_used: usize,
    pub iterations_used: usize,
    pub restarts: Vec<RestartRecord>,
}

impl SearchLog {
    pub fn new(cfg: &SearchConfig, result: &SearchResult) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            config: cfg.clone(),
            status: result.status().to_string(),
            converged: result.converged,
            best_objective: result.best_objective,
            best_restart: result.best_restart,
            restarts_used: result.restarts_used,
            iterations_used: result.iterations_used,
            restarts: result.history.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_family, ConstructionRequest};

    fn qutrit_doc() -> FamilyDocument {
        FamilyDocument::from_family(&build_family(&ConstructionRequest::complete(3)).unwrap())
    }

    #[test]
    fn document_shape() {
        let doc = FamilyDocument::from_family(&build_family(&ConstructionRequest::complete(2)).unwrap());
        assert_eq!(doc.dimension, 2);
        assert_eq!(doc.bases.len(), 3);
        let [re, im] = doc.bases[1].projectors[0].matrix[0][1];
        assert!(re.abs() < 1e-16 && im == 0.5);
        let json: Value = serde_json::to_value(&doc).unwrap();
        assert_eq!(json["format_version"], "1.0");
        assert!(json.get("states").is_none());
    }

    #[test]
    fn shuffled_labels_are_reordered() {
        let mut doc = qutrit_doc();
        let f = doc.to_family().unwrap();
        doc.bases.reverse();
        doc.bases[0].projectors.swap(0, 2);
        assert_eq!(doc.to_family().unwrap(), f);
    }

    #[test]
    fn non_hermitian_entry_is_named() {
        let mut doc = qutrit_doc();
        doc.bases[2].projectors[1].matrix[0][2][1] += 1e-3;
        let msg = doc.to_family().unwrap_err().to_string();
        assert!(msg.contains("basis_index 2, alpha 1, entry (0,2)"), "{msg}");
    }

    #[test]
    fn trace_and_psd_violations() {
        let mut doc = qutrit_doc();
        doc.bases[0].projectors[0].matrix[1][1][0] += 0.1;
        assert!(doc.to_family().unwrap_err().to_string().contains("trace"));

        let mut doc = FamilyDocument::from_family(&build_family(&ConstructionRequest::complete(2)).unwrap());
        doc.bases[2].projectors[0].matrix = vec![vec![[1.5, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [-0.5, 0.0]]];
        let msg = doc.to_family().unwrap_err().to_string();
        assert!(msg.contains("basis_index 2, alpha 0") && msg.contains("semidefinite"), "{msg}");
    }

    #[test]
    fn structural_errors() {
        let mut doc = qutrit_doc();
        doc.bases[1].basis_index = 0;
        assert!(doc.to_family().unwrap_err().to_string().contains("duplicate basis_index 0"));

        let mut doc = qutrit_doc();
        doc.bases[3].projectors.pop();
        assert!(doc.to_family().unwrap_err().to_string().contains("expected 3 projectors"));

        let mut doc = qutrit_doc();
        doc.bases[0].projectors[2].matrix[1].pop();
        assert!(doc.to_family().unwrap_err().to_string().contains("not 3x3"));

        let mut doc = qutrit_doc();
        doc.format_version = "2.0".into();
        assert!(doc.to_family().is_err());

        let mut doc = qutrit_doc();
        let extra = doc.bases[0].clone();
        doc.bases.push(extra);
        assert!(doc.to_family().is_err());
    }

    #[test]
    fn truncated_text_is_a_parse_error() {
        let text = serde_json::to_string(&qutrit_doc()).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(parse_family(cut), Err(MubError::Parse(_))));
    }

    #[test]
    fn states_round_trip_and_validation() {
        let f = build_family(&ConstructionRequest::complete(2)).unwrap();
        let states = crate::reconstruct::reconstruct_all(&f, 1e-10).unwrap();
        let doc = FamilyDocument::from_family(&f).with_states(&states);
        let text = serde_json::to_string(&doc).unwrap();
        let back = parse_document(&text).unwrap();
        assert_eq!(back.to_states().unwrap().unwrap(), states);

        let mut bad = doc.clone();
        bad.states.as_mut().unwrap()[0].vectors[1].amplitudes[0] = [2.0, 0.0];
        assert!(bad.to_states().unwrap_err().to_string().contains("norm defect"));
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            content_hash(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
