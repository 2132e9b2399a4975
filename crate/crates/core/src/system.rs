//! The system-description file: one JSON document holding the space, named
//! covers, the potential, and named measures. Reproducible experiments need
//! a single auditable input artifact, so the CLI accepts no inline math.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::error::{Error, Result};
use crate::lattice::{FiniteSubset, LatticePoint};
use crate::measure::InvariantMeasure;
use crate::potential::Potential;
use crate::space::{ClopenSet, Cover, ForbiddenPattern, ShiftSpace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForbiddenSpec {
    pub window: Vec<Vec<i64>>,
    pub pattern: Vec<u8>,
}

/// A named cover: per element, the list of allowed patterns on the window
/// (each pattern one symbol per window point, in the window's sorted
/// order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub window: Vec<Vec<i64>>,
    pub elements: Vec<Vec<Vec<u8>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    Additive {
        window: Vec<Vec<i64>>,
        table: Vec<f64>,
    },
    Matrix {
        window: Vec<Vec<i64>>,
        size: usize,
        /// One row-major matrix per window pattern, lexicographic order.
        matrices: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureSpec {
    Bernoulli {
        p: Vec<f64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stationary: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDescription {
    pub dimension: usize,
    pub alphabet: u8,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden: Vec<ForbiddenSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub covers: BTreeMap<String, CoverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measures: BTreeMap<String, MeasureSpec>,
}

fn window_from_rows(dimension: usize, rows: &[Vec<i64>], field: &str) -> Result<FiniteSubset> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != dimension {
            return Err(Error::InvalidArgument(format!(
                "{field}.window[{i}] has {} coordinates, expected {dimension}",
                r.len()
            )));
        }
    }
    let set = FiniteSubset::new(dimension, rows.iter().map(|r| LatticePoint(r.clone())))?;
    if set.len() != rows.len() {
        return Err(Error::InvalidArgument(format!(
            "{field}.window contains duplicate points"
        )));
    }
    Ok(set)
}

impl SystemDescription {
    pub fn from_json(text: &str) -> Result<SystemDescription> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("system file parse error: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable description")
    }

    pub fn build_space(&self) -> Result<ShiftSpace> {
        let mut forbidden = Vec::with_capacity(self.forbidden.len());
        for (i, f) in self.forbidden.iter().enumerate() {
            let window = window_from_rows(self.dimension, &f.window, &format!("forbidden[{i}]"))?;
            if f.pattern.len() != window.len() {
                return Err(Error::InvalidArgument(format!(
                    "forbidden[{i}].pattern length {} does not match its window size {}",
                    f.pattern.len(),
                    window.len()
                )));
            }
            forbidden.push(ForbiddenPattern {
                window,
                symbols: f.pattern.clone(),
            });
        }
        ShiftSpace::new(self.dimension, self.alphabet, forbidden)
    }

    pub fn cover_names(&self) -> Vec<&str> {
        self.covers.keys().map(|s| s.as_str()).collect()
    }

    pub fn build_cover(&self, space: &ShiftSpace, name: &str, budgets: &Budgets) -> Result<Cover> {
        let spec = self.covers.get(name).ok_or_else(|| {
            Error::InvalidArgument(format!("covers.{name}: no such cover in the system file"))
        })?;
        let window = window_from_rows(self.dimension, &spec.window, &format!("covers.{name}"))?;
        if spec.elements.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "covers.{name}.elements is empty"
            )));
        }
        let mut sets = Vec::with_capacity(spec.elements.len());
        for (i, patterns) in spec.elements.iter().enumerate() {
            for (j, p) in patterns.iter().enumerate() {
                if p.len() != window.len() {
                    return Err(Error::InvalidArgument(format!(
                        "covers.{name}.elements[{i}][{j}] has length {}, expected {}",
                        p.len(),
                        window.len()
                    )));
                }
                if p.iter().any(|&s| s >= self.alphabet) {
                    return Err(Error::InvalidArgument(format!(
                        "covers.{name}.elements[{i}][{j}] uses a symbol outside the alphabet"
                    )));
                }
            }
            sets.push(ClopenSet::new(window.clone(), patterns.clone())?);
        }
        let cover = Cover::from_clopen_sets(space, sets, budgets)?;
        if !cover.covers_space(space, budgets)? {
            return Err(Error::InvalidArgument(format!(
                "covers.{name} does not cover every admissible pattern on its window"
            )));
        }
        Ok(cover)
    }

    pub fn build_potential(&self) -> Result<Potential> {
        let spec = self.potential.as_ref().ok_or_else(|| {
            Error::InvalidArgument("potential: missing from the system file".into())
        })?;
        match spec {
            PotentialSpec::Additive { window, table } => {
                let window = window_from_rows(self.dimension, window, "potential")?;
                let expect = (self.alphabet as usize).pow(window.len() as u32);
                if table.len() != expect {
                    return Err(Error::InvalidArgument(format!(
                        "potential.table has {} entries, expected alphabet^|window| = {expect}",
                        table.len()
                    )));
                }
                Ok(Potential::Additive {
                    alphabet: self.alphabet,
                    window,
                    table: table.clone(),
                })
            }
            PotentialSpec::Matrix {
                window,
                size,
                matrices,
            } => {
                let window = window_from_rows(self.dimension, window, "potential")?;
                let expect = (self.alphabet as usize).pow(window.len() as u32);
                if matrices.len() != expect {
                    return Err(Error::InvalidArgument(format!(
                        "potential.matrices has {} entries, expected alphabet^|window| = {expect}",
                        matrices.len()
                    )));
                }
                for (i, m) in matrices.iter().enumerate() {
                    if m.len() != size * size {
                        return Err(Error::InvalidArgument(format!(
                            "potential.matrices[{i}] has {} entries, expected size^2 = {}",
                            m.len(),
                            size * size
                        )));
                    }
                    if m.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                        return Err(Error::InvalidArgument(format!(
                            "potential.matrices[{i}] has a negative or non-finite entry"
                        )));
                    }
                }
                Ok(Potential::Matrix {
                    alphabet: self.alphabet,
                    window,
                    size: *size,
                    tables: matrices.clone(),
                })
            }
        }
    }

    pub fn measure_names(&self) -> Vec<&str> {
        self.measures.keys().map(|s| s.as_str()).collect()
    }

    pub fn build_measure(&self, name: &str) -> Result<InvariantMeasure> {
        let spec = self.measures.get(name).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "measures.{name}: no such measure in the system file"
            ))
        })?;
        let mu = match spec {
            MeasureSpec::Bernoulli { p } => InvariantMeasure::bernoulli(p.clone())
                .map_err(|e| Error::InvalidArgument(format!("measures.{name}.p: {e}")))?,
            MeasureSpec::Markov {
                transition,
                stationary,
            } => {
                if self.dimension != 1 {
                    return Err(Error::InvalidArgument(format!(
                        "measures.{name}: Markov measures are restricted to dimension 1"
                    )));
                }
                InvariantMeasure::markov(transition.clone(), stationary.clone()).map_err(|e| {
                    Error::InvalidArgument(format!("measures.{name}.transition: {e}"))
                })?
            }
        };
        if mu.alphabet() != self.alphabet as usize {
            return Err(Error::InvalidArgument(format!(
                "measures.{name}: measure alphabet {} does not match the system alphabet {}",
                mu.alphabet(),
                self.alphabet
            )));
        }
        Ok(mu)
    }
}
