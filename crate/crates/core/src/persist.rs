//! Versioned JSON model files.
//!
//! Plain model:
//!
//! ```json
//! {"format_version":1,"visible_type":"binary","visN":3,"hidN":2,
//!  "W":[...row-major visN×hidN...],"b_vis":[...],"b_hid":[...]}
//! ```
//!
//! Transfer target: the same header fields plus
//! `{"spec":{"W_t":[...],"b_t":[...],"theta":1.0,"source_indices":[...]},"U":[...],"b_u":[...],"b_vis":[...]}`
//! where `hidN = k + m`. Numbers use the shortest decimal form that round-trips, so
//! save → load → save is byte-identical.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rbm::{Rbm, VisibleType};
use crate::transfer::{TargetRbm, TransferSpec};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct RbmDoc {
    format_version: u32,
    visible_type: VisibleType,
    #[serde(rename = "visN")]
    n_visible: usize,
    #[serde(rename = "hidN")]
    n_hidden: usize,
    #[serde(rename = "W")]
    weights: Vec<f64>,
    b_vis: Vec<f64>,
    b_hid: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpecDoc {
    #[serde(rename = "W_t")]
    weights: Vec<f64>,
    b_t: Vec<f64>,
    theta: f64,
    source_indices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TargetDoc {
    format_version: u32,
    visible_type: VisibleType,
    #[serde(rename = "visN")]
    n_visible: usize,
    #[serde(rename = "hidN")]
    n_hidden: usize,
    spec: SpecDoc,
    #[serde(rename = "U")]
    adaptive_weights: Vec<f64>,
    b_u: Vec<f64>,
    b_vis: Vec<f64>,
}

fn row_major(a: &Array2<f64>) -> Vec<f64> {
    a.rows().into_iter().flat_map(|r| r.to_vec()).collect()
}

fn matrix(values: Vec<f64>, rows: usize, cols: usize, name: &str) -> Result<Array2<f64>> {
    Array2::from_shape_vec((rows, cols), values)
        .map_err(|_| Error::Format(format!("{name} does not have {rows}x{cols} entries")))
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format_version {v}")));
    }
    Ok(())
}

fn finite(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("model parameters must be finite to serialize".into()));
    }
    Ok(())
}

pub fn rbm_to_json(rbm: &Rbm) -> Result<String> {
    rbm.validate()?;
    let doc = RbmDoc {
        format_version: FORMAT_VERSION,
        visible_type: rbm.visible_type,
        n_visible: rbm.n_visible(),
        n_hidden: rbm.n_hidden(),
        weights: row_major(&rbm.weights),
        b_vis: rbm.visible_bias.to_vec(),
        b_hid: rbm.hidden_bias.to_vec(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn rbm_from_json(text: &str) -> Result<Rbm> {
    let doc: RbmDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    check_version(doc.format_version)?;
    Rbm::from_parts(
        matrix(doc.weights, doc.n_visible, doc.n_hidden, "W")?,
        Array1::from(doc.b_vis),
        Array1::from(doc.b_hid),
        doc.visible_type,
    )
}

pub fn target_to_json(t: &TargetRbm) -> Result<String> {
    t.validate()?;
    finite(&[t.spec.theta])?;
    let doc = TargetDoc {
        format_version: FORMAT_VERSION,
        visible_type: t.visible_type(),
        n_visible: t.n_visible(),
        n_hidden: t.k() + t.m(),
        spec: SpecDoc {
            weights: row_major(&t.spec.weights),
            b_t: t.spec.hidden_bias.to_vec(),
            theta: t.spec.theta,
            source_indices: t.spec.source_indices.clone(),
        },
        adaptive_weights: row_major(&t.adaptive.weights),
        b_u: t.adaptive.hidden_bias.to_vec(),
        b_vis: t.adaptive.visible_bias.to_vec(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn target_from_json(text: &str) -> Result<TargetRbm> {
    let doc: TargetDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    check_version(doc.format_version)?;
    let k = doc.spec.b_t.len();
    let m = doc.b_u.len();
    if k + m != doc.n_hidden {
        return Err(Error::Format(format!("hidN {} != k {k} + m {m}", doc.n_hidden)));
    }
    let t = TargetRbm {
        spec: TransferSpec {
            weights: matrix(doc.spec.weights, doc.n_visible, k, "W_t")?,
            hidden_bias: Array1::from(doc.spec.b_t),
            theta: doc.spec.theta,
            source_indices: doc.spec.source_indices,
        },
        adaptive: Rbm {
            weights: matrix(doc.adaptive_weights, doc.n_visible, m, "U")?,
            visible_bias: Array1::from(doc.b_vis),
            hidden_bias: Array1::from(doc.b_u),
            visible_type: doc.visible_type,
        },
    };
    t.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(t)
}

/// Either kind of model file.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelFile {
    Plain(Rbm),
    Target(TargetRbm),
}

impl ModelFile {
    /// The model used for feature extraction: a target file becomes its combined
    /// `[W_t | U]` model with unscaled up-weights.
    pub fn into_feature_model(self) -> Rbm {
        match self {
            ModelFile::Plain(r) => r,
            ModelFile::Target(t) => Rbm {
                weights: ndarray::concatenate![ndarray::Axis(1), t.spec.weights, t.adaptive.weights],
                visible_bias: t.adaptive.visible_bias,
                hidden_bias: ndarray::concatenate![ndarray::Axis(0), t.spec.hidden_bias, t.adaptive.hidden_bias],
                visible_type: t.adaptive.visible_type,
            },
        }
    }
}

pub fn model_from_json(text: &str) -> Result<ModelFile> {
    let probe: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if probe.get("spec").is_some() {
        target_from_json(text).map(ModelFile::Target)
    } else {
        rbm_from_json(text).map(ModelFile::Plain)
    }
}

pub fn save_rbm(path: impl AsRef<Path>, rbm: &Rbm) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, rbm_to_json(rbm)?).map_err(|e| Error::io(path, e))
}

pub fn save_target(path: impl AsRef<Path>, t: &TargetRbm) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, target_to_json(t)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

pub fn load_rbm(path: impl AsRef<Path>) -> Result<Rbm> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    rbm_from_json(&text)
}
