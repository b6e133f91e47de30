//! JSON form of a symbol:
//! `{k, s, kind, name, coefficients: [{index, values}] | expression, params}`,
//! where `values` holds the `s×s` coefficient row-major as `re, im` pairs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MatrixSymbol, MultiIndex, SymbolKind};
use crate::dsl;
use crate::error::{Error, Result};
use crate::numerics::matrix::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKindTag {
    Trig,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub index: Vec<i64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolDocument {
    pub k: usize,
    pub s: usize,
    pub kind: SymbolKindTag,
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<CoefficientEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl MatrixSymbol {
    pub fn to_document(&self) -> Result<SymbolDocument> {
        let (kind, coefficients) = match self.kind() {
            SymbolKind::Trig(t) => {
                let entries = t
                    .iter()
                    .map(|(j, c)| CoefficientEntry {
                        index: j.as_slice().to_vec(),
                        values: c.as_slice().iter().flat_map(|z| [z.re, z.im]).collect(),
                    })
                    .collect();
                (SymbolKindTag::Trig, entries)
            }
            SymbolKind::General(_) => {
                if self.expression().is_none() {
                    return Err(Error::Format(format!(
                        "general symbol '{}' has no expression and cannot be serialized",
                        self.name()
                    )));
                }
                (SymbolKindTag::General, Vec::new())
            }
        };
        Ok(SymbolDocument {
            k: self.k(),
            s: self.s(),
            kind,
            name: self.name().to_string(),
            coefficients,
            expression: self.expression().map(str::to_string),
            params: self.params().clone(),
        })
    }

    pub fn from_document(doc: &SymbolDocument) -> Result<MatrixSymbol> {
        let (k, s) = (doc.k, doc.s);
        let sym = match doc.kind {
            SymbolKindTag::Trig => {
                if doc.coefficients.is_empty() {
                    if let Some(text) = &doc.expression {
                        return Ok(dsl::compile_text(text, k, s, &doc.params)?.with_name(doc.name.clone()));
                    }
                }
                let mut coeffs = Vec::with_capacity(doc.coefficients.len());
                for entry in &doc.coefficients {
                    if entry.values.len() != 2 * s * s {
                        return Err(Error::Format(format!(
                            "coefficient {:?} has {} values, expected {}",
                            entry.index,
                            entry.values.len(),
                            2 * s * s
                        )));
                    }
                    let data = entry
                        .values
                        .chunks_exact(2)
                        .map(|p| num_complex::Complex64::new(p[0], p[1]))
                        .collect();
                    coeffs.push((MultiIndex::new(entry.index.clone())?, ComplexMatrix::from_vec(s, s, data)?));
                }
                let mut sym = MatrixSymbol::trig(k, s, coeffs)?;
                if let Some(text) = &doc.expression {
                    sym = sym.with_expression(text.clone(), doc.params.clone());
                }
                sym
            }
            SymbolKindTag::General => {
                let text = doc
                    .expression
                    .as_ref()
                    .ok_or_else(|| Error::Format("general symbol needs an 'expression' field".into()))?;
                dsl::compile_text(text, k, s, &doc.params)?
            }
        };
        Ok(sym.with_name(doc.name.clone()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document()?)?)
    }

    pub fn from_json(text: &str) -> Result<MatrixSymbol> {
        let doc: SymbolDocument = serde_json::from_str(text)?;
        MatrixSymbol::from_document(&doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MatrixSymbol> {
        MatrixSymbol::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{catalog, CaseId};

    #[test]
    fn trig_round_trip_is_exact() {
        let (f1, g1) = catalog(CaseId::One, Some(4.8)).unwrap();
        for sym in [f1, g1] {
            let back = MatrixSymbol::from_json(&sym.to_json().unwrap()).unwrap();
            assert_eq!(back.trig_table(), sym.trig_table());
            assert_eq!(back.name(), sym.name());
        }
    }

    #[test]
    fn general_round_trip_through_expression() {
        let (f4, _) = catalog(CaseId::Four, None).unwrap();
        let back = MatrixSymbol::from_json(&f4.to_json().unwrap()).unwrap();
        for x in [-3.0, -1.2, 0.4, 2.2] {
            assert!(back.evaluate(&[x]).unwrap().max_abs_diff(&f4.evaluate(&[x]).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn bad_documents_rejected() {
        let short = r#"{"k":1,"s":1,"kind":"trig","coefficients":[{"index":[0],"values":[1.0]}]}"#;
        assert!(matches!(MatrixSymbol::from_json(short), Err(Error::Format(_))));
        let missing = r#"{"k":1,"s":1,"kind":"general"}"#;
        assert!(matches!(MatrixSymbol::from_json(missing), Err(Error::Format(_))));
        assert!(MatrixSymbol::from_json("{").is_err());
    }

    #[test]
    fn opaque_general_symbol_cannot_be_saved() {
        let (f1, _) = catalog(CaseId::One, Some(1.0)).unwrap();
        let inv = f1.inverse().unwrap();
        assert!(matches!(inv.to_json(), Err(Error::Format(_))));
    }
}
