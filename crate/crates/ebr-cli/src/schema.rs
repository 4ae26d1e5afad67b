//! JSON document schemas and loaders for the CLI.
//!
//! Every emitted document carries `"schema": "ebr/1"`. States come in two
//! interchangeable forms: a complex matrix (`"matrix"`, rows of [re, im]
//! pairs) or Bloch coordinates (`"bloch"`, with an optional `"basis"` tag).
//! Loading validates every type invariant before the value is used.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use ebr_core::linalg::CMatrix;
use ebr_core::state_space::{density_from_bloch, to_bloch, BlochVector, DensityMatrix};
use ebr_core::su_basis::{build_gell_mann, build_tensor_basis, Determination, GeneratorBasis};

pub const SCHEMA: &str = "ebr/1";

/// A complex entry as [re, im].
pub type ComplexPair = [f64; 2];

/// Which generator determination a document refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BasisKind {
    Gellmann,
    Tensor,
}

impl BasisKind {
    pub fn label(&self) -> &'static str {
        match self {
            BasisKind::Gellmann => "gellmann",
            BasisKind::Tensor => "tensor",
        }
    }

    pub fn build(&self, n: usize) -> Result<GeneratorBasis> {
        match self {
            BasisKind::Gellmann => Ok(build_gell_mann(n)?),
            BasisKind::Tensor => {
                if n != 4 {
                    bail!("the tensor basis is only defined for n = 4, got n = {n}");
                }
                Ok(build_tensor_basis(2, 2)?)
            }
        }
    }

    pub fn parse_label(label: &str) -> Result<Self> {
        match label {
            "gellmann" => Ok(BasisKind::Gellmann),
            "tensor" => Ok(BasisKind::Tensor),
            other => bail!("unknown basis '{other}' (expected 'gellmann' or 'tensor')"),
        }
    }
}

/// On-disk state document: exactly one of `matrix` or `bloch`.
#[derive(Debug, Serialize, Deserialize)]
pub struct StateDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<ComplexPair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
}

/// On-disk observable document (matrix form only).
#[derive(Debug, Serialize, Deserialize)]
pub struct ObservableDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub n: usize,
    pub matrix: Vec<Vec<ComplexPair>>,
}

fn check_schema(schema: &Option<String>) -> Result<()> {
    if let Some(s) = schema {
        if s != SCHEMA {
            bail!("field 'schema': expected \"{SCHEMA}\", got \"{s}\"");
        }
    }
    Ok(())
}

/// Rows of [re, im] pairs to a complex matrix, shape-checked against `n`.
pub fn matrix_from_rows(rows: &[Vec<ComplexPair>], n: usize) -> Result<CMatrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        bail!("field 'matrix': expected {n} rows of {n} [re, im] pairs");
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<ComplexPair>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// A state loaded from disk, in both representations.
pub struct LoadedState {
    pub density: DensityMatrix,
    pub bloch: BlochVector,
    pub basis: GeneratorBasis,
    /// Which representation the file used.
    pub was_bloch: bool,
}

/// Load and validate a state file. `basis_flag` overrides the document's
/// own `basis` tag; the default is the Gell-Mann determination.
pub fn load_state(path: &Path, basis_flag: Option<BasisKind>) -> Result<LoadedState> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read state file {}", path.display()))?;
    let doc: StateDoc = serde_json::from_str(&text)
        .with_context(|| format!("state file {} is not valid JSON", path.display()))?;
    check_schema(&doc.schema)?;

    let kind = match basis_flag {
        Some(k) => k,
        None => match &doc.basis {
            Some(label) => BasisKind::parse_label(label)?,
            None => BasisKind::Gellmann,
        },
    };
    let basis = kind.build(doc.n)?;

    match (&doc.matrix, &doc.bloch) {
        (Some(rows), None) => {
            let mat = matrix_from_rows(rows, doc.n)?;
            let density = DensityMatrix::new(mat).map_err(|e| anyhow!("field 'matrix': {e}"))?;
            let bloch = to_bloch(&density, &basis)?;
            Ok(LoadedState {
                density,
                bloch,
                basis,
                was_bloch: false,
            })
        }
        (None, Some(components)) => {
            let bloch = BlochVector::from_slice(doc.n, components)
                .map_err(|e| anyhow!("field 'bloch': {e}"))?;
            let density =
                density_from_bloch(&bloch, &basis).map_err(|e| anyhow!("field 'bloch': {e}"))?;
            Ok(LoadedState {
                density,
                bloch,
                basis,
                was_bloch: true,
            })
        }
        (Some(_), Some(_)) => bail!("state file has both 'matrix' and 'bloch'; use exactly one"),
        (None, None) => bail!("state file needs a 'matrix' or 'bloch' field"),
    }
}

/// Load an observable: a named built-in ("pauli-x|y|z",
/// "spin-product a=<deg> b=<deg>") or a path to a matrix document.
pub fn load_observable(source: &str) -> Result<(usize, CMatrix, String)> {
    match source {
        "pauli-x" => Ok((2, ebr_core::linalg::pauli()[0].clone(), source.into())),
        "pauli-y" => Ok((2, ebr_core::linalg::pauli()[1].clone(), source.into())),
        "pauli-z" => Ok((2, ebr_core::linalg::pauli()[2].clone(), source.into())),
        _ if source.starts_with("spin-product") => {
            let (theta_a, theta_b) = parse_spin_product(source)?;
            let a = ebr_core::linalg::pauli_dot(&ebr_core::bell_rod::coplanar_axis(theta_a));
            let b = ebr_core::linalg::pauli_dot(&ebr_core::bell_rod::coplanar_axis(theta_b));
            Ok((4, a.kronecker(&b), source.into()))
        }
        path => {
            let p = Path::new(path);
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read observable file {path}"))?;
            let doc: ObservableDoc = serde_json::from_str(&text)
                .with_context(|| format!("observable file {path} is not valid JSON"))?;
            check_schema(&doc.schema)?;
            let mat = matrix_from_rows(&doc.matrix, doc.n)?;
            Ok((doc.n, mat, path.into()))
        }
    }
}

/// "spin-product a=30 b=45" -> (30.0, 45.0); angles in degrees in the
/// x-z plane.
fn parse_spin_product(source: &str) -> Result<(f64, f64)> {
    let mut theta_a = None;
    let mut theta_b = None;
    for token in source.split_whitespace().skip(1) {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| anyhow!("spin-product: expected a=<deg> b=<deg>, got '{token}'"))?;
        let angle: f64 = value
            .parse()
            .with_context(|| format!("spin-product: bad angle '{value}'"))?;
        match key {
            "a" => theta_a = Some(angle),
            "b" => theta_b = Some(angle),
            other => bail!("spin-product: unknown key '{other}'"),
        }
    }
    match (theta_a, theta_b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => bail!("spin-product: both a=<deg> and b=<deg> are required"),
    }
}

/// Emit a state document in matrix form.
pub fn matrix_doc(density: &DensityMatrix) -> StateDoc {
    StateDoc {
        schema: Some(SCHEMA.into()),
        n: density.dimension(),
        matrix: Some(matrix_to_rows(density.matrix())),
        bloch: None,
        basis: None,
    }
}

/// Emit a state document in Bloch form, tagged with its basis.
pub fn bloch_doc(bloch: &BlochVector, basis: &GeneratorBasis) -> StateDoc {
    let label = match basis.determination() {
        Determination::GellMann => "gellmann",
        Determination::TensorProduct { .. } => "tensor",
    };
    StateDoc {
        schema: Some(SCHEMA.into()),
        n: bloch.dimension(),
        matrix: None,
        bloch: Some(bloch.components().iter().cloned().collect()),
        basis: Some(label.into()),
    }
}
