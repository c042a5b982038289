//! Documents, instance generation, the experiment harness and emission of
//! diagrams in JSON, CSV and SVG.

mod experiment;
mod svg;

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::complex_core::{validate_complex, DiscreteMorseFunction, LefschetzComplex};
use crate::error::{Error, Result};
use crate::forbidden_regions::Staircase;
use crate::pairing_relations::{PairClass, RelationGraph, RelationKind};
use crate::simplification::MorseState;
use crate::transposition_engine::ReducedState;

pub use experiment::{
    banded, cone_dmf, random_dmf, run_experiment, scaling_probe, simplex_skeleton,
    ComplexityReport, ExperimentOptions, ExperimentReport, ScalingPoint, ScalingReport,
    MAX_SKELETON_DIM,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDocument {
    pub id: String,
    pub dim: usize,
    #[serde(default)]
    pub facets: Vec<String>,
}

/// A complex with an optional function. Facets may name cells listed later.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexDocument {
    pub cells: Vec<CellDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, f64>>,
}

impl ComplexDocument {
    pub fn of(x: &LefschetzComplex, h: Option<&DiscreteMorseFunction>) -> ComplexDocument {
        let cells = x
            .cells()
            .map(|c| CellDocument {
                id: x.name(c).to_string(),
                dim: x.dim(c),
                facets: x.facets(c).iter().map(|&f| x.name(f).to_string()).collect(),
            })
            .collect();
        ComplexDocument {
            cells,
            values: h.map(|h| h.to_map(x)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

/// Parses a JSON complex document and validates the complex and, when
/// present, the function.
pub fn parse_complex(text: &str) -> Result<(LefschetzComplex, Option<DiscreteMorseFunction>)> {
    let doc: ComplexDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let cells: Vec<(&str, usize, Vec<&str>)> = doc
        .cells
        .iter()
        .map(|c| {
            (
                c.id.as_str(),
                c.dim,
                c.facets.iter().map(String::as_str).collect(),
            )
        })
        .collect();
    let x = LefschetzComplex::new(&cells)?;
    let report = validate_complex(&x);
    if !report.is_valid() {
        return Err(Error::InvalidComplex(report.describe(&x).join("; ")));
    }
    let h = match &doc.values {
        None => None,
        Some(map) => {
            if let Some(k) = map.keys().find(|k| x.id(k).is_err()) {
                return Err(Error::UnknownCell(k.clone()));
            }
            let h = DiscreteMorseFunction::from_map(&x, map)?;
            let r = crate::complex_core::validate_dmf(&x, &h)?;
            if !r.is_valid() {
                return Err(Error::InvalidDmf(r.describe(&x).join("; ")));
            }
            Some(h)
        }
    };
    Ok((x, h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDocument {
    pub dim: usize,
    pub birth: String,
    pub death: Option<String>,
    pub birth_value: f64,
    pub death_value: Option<f64>,
    pub class: PairClass,
}

/// A relation `from → to` between pairs, each named by its birth cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDocument {
    pub from: String,
    pub to: String,
    pub kind: RelationKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionDocument {
    pub death: Staircase,
    pub birth: Staircase,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagramDocument {
    pub pairs: Vec<PairDocument>,
    pub relations: Vec<RelationDocument>,
    /// Forbidden regions of off-diagonal pairs, keyed by birth cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<BTreeMap<String, RegionDocument>>,
}

impl DiagramDocument {
    /// Pairs in birth order and relations between distinct pairs.
    pub fn of(ms: &MorseState, with_regions: bool) -> Result<DiagramDocument> {
        let x = ms.complex();
        let h = ms.function();
        let name = |c| x.name(c).to_string();
        let all = ms.pairs()?;
        let pairs = all
            .iter()
            .map(|p| PairDocument {
                dim: p.dim,
                birth: name(p.birth),
                death: p.death.map(name),
                birth_value: h.value(p.birth),
                death_value: p.death.map(|d| h.value(d)),
                class: p.class(h),
            })
            .collect();
        let relations = RelationGraph::of(ms.reduced())
            .pair_relations(ms.reduced())
            .into_iter()
            .filter(|(b, a, _)| b != a)
            .map(|(b, a, kind)| RelationDocument {
                from: name(b.birth),
                to: name(a.birth),
                kind,
            })
            .collect();
        let regions = if with_regions {
            let mut m = BTreeMap::new();
            for p in ms.off_diagonal() {
                let r = ms.regions(&p)?;
                m.insert(
                    name(p.birth),
                    RegionDocument {
                        death: r.death_region,
                        birth: r.birth_region,
                    },
                );
            }
            Some(m)
        } else {
            None
        };
        Ok(DiagramDocument {
            pairs,
            relations,
            regions,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn from_json(text: &str) -> Result<DiagramDocument> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// One pair per row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "dim",
            "birth",
            "death",
            "birth_value",
            "death_value",
            "class",
        ])
        .unwrap();
        for p in &self.pairs {
            let class = match p.class {
                PairClass::OffDiagonal => "off-diagonal",
                PairClass::Diagonal => "diagonal",
                PairClass::Essential => "essential",
            };
            w.write_record([
                p.dim.to_string(),
                p.birth.clone(),
                p.death.clone().unwrap_or_default(),
                p.birth_value.to_string(),
                p.death_value.map(|t| t.to_string()).unwrap_or_default(),
                class.to_string(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn to_svg(&self) -> String {
        svg::render(self)
    }
}

/// One column of a reduced boundary matrix, with cells in filtration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnDocument {
    pub cell: String,
    pub low: Option<String>,
    pub r: Vec<String>,
    pub v: Vec<String>,
    pub u: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    /// Dimension of the column cells.
    pub dim: usize,
    pub dual: bool,
    pub columns: Vec<ColumnDocument>,
}

/// The lazy reductions `R = D·V`, `D = R·U` of every boundary matrix and of
/// its dual.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReductionDocument {
    pub order: Vec<String>,
    pub matrices: Vec<MatrixDocument>,
}

impl ReductionDocument {
    pub fn of(state: &ReducedState) -> ReductionDocument {
        let x = state.complex();
        let order = state
            .order()
            .order()
            .iter()
            .map(|&c| x.name(c).to_string())
            .collect();
        let mut matrices = Vec::new();
        for dual in [false, true] {
            for n in 0..x.num_dims() {
                let Some(m) = (if dual { state.dual(n) } else { state.primal(n) }) else {
                    continue;
                };
                if m.ncols() == 0 {
                    continue;
                }
                let rows = |rs: &[u32]| {
                    let mut v: Vec<u32> = rs.to_vec();
                    v.sort_by_key(|&r| m.row_pos(r));
                    v.into_iter()
                        .map(|r| x.name(m.row_cell(r)).to_string())
                        .collect::<Vec<_>>()
                };
                let cols = |cs: &[u32]| {
                    let mut v: Vec<u32> = cs.to_vec();
                    v.sort_by_key(|&c| m.col_pos(c));
                    v.into_iter()
                        .map(|c| x.name(m.col_cell(c)).to_string())
                        .collect::<Vec<_>>()
                };
                let columns = m
                    .col_order()
                    .iter()
                    .map(|&c| ColumnDocument {
                        cell: x.name(m.col_cell(c)).to_string(),
                        low: m.low(c).map(|r| x.name(m.row_cell(r)).to_string()),
                        r: rows(m.r_col(c)),
                        v: cols(m.v_col(c)),
                        u: cols(m.u_col(c)),
                    })
                    .collect();
                matrices.push(MatrixDocument {
                    dim: x.dim(m.col_cell(m.col_order()[0])),
                    dual,
                    columns,
                });
            }
        }
        ReductionDocument { order, matrices }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

pub fn emit_diagram(ms: &MorseState, format: Format, with_regions: bool) -> Result<String> {
    let doc = DiagramDocument::of(ms, with_regions)?;
    Ok(match format {
        Format::Json => doc.to_json(),
        Format::Csv => doc.to_csv(),
        Format::Svg => doc.to_svg(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::sync::Arc;

    fn triangle_state() -> MorseState {
        let x = Arc::new(fixtures::hollow_triangle());
        MorseState::new(x, DiscreteMorseFunction::new(vec![0., 1., 2., 3., 4., 5.])).unwrap()
    }

    #[test]
    fn complex_round_trip() {
        let ms = triangle_state();
        let text = ComplexDocument::of(ms.complex(), Some(ms.function())).to_json();
        let (x, h) = parse_complex(&text).unwrap();
        assert_eq!(x.len(), 6);
        assert_eq!(h.as_ref(), Some(ms.function()));
    }

    #[test]
    fn parse_errors_name_the_cell() {
        assert_eq!(parse_complex(r#"{"cells": []}"#).unwrap().0.len(), 0);
        let bad =
            r#"{"cells": [{"id": "e", "dim": 1, "facets": ["u", "w"]}, {"id": "u", "dim": 0}]}"#;
        assert_eq!(
            parse_complex(bad).unwrap_err(),
            Error::UnknownCell("w".into())
        );
        assert!(matches!(parse_complex("{"), Err(Error::Parse(_))));
        let non_dmf = r#"{"cells": [{"id": "u", "dim": 0}, {"id": "w", "dim": 0},
            {"id": "e", "dim": 1, "facets": ["u", "w"]}], "values": {"u": 3, "w": 3, "e": 0}}"#;
        assert!(matches!(parse_complex(non_dmf), Err(Error::InvalidDmf(_))));
    }

    #[test]
    fn triangle_diagram() {
        let ms = triangle_state();
        let doc = DiagramDocument::of(&ms, true).unwrap();
        let count = |c| doc.pairs.iter().filter(|p| p.class == c).count();
        assert_eq!(count(PairClass::OffDiagonal), 2);
        assert_eq!(count(PairClass::Essential), 2);
        let text = doc.to_json();
        assert_eq!(DiagramDocument::from_json(&text).unwrap().to_json(), text);
        assert_eq!(doc.to_csv().lines().count(), 5);
        assert!(doc.to_svg().starts_with("<svg"));
        assert_eq!(
            "xml".parse::<Format>(),
            Err(Error::UnknownFormat("xml".into()))
        );
    }

    #[test]
    fn empty_complex_documents() {
        let x = Arc::new(LefschetzComplex::new::<&str>(&[]).unwrap());
        let ms = MorseState::new(x, DiscreteMorseFunction::new(vec![])).unwrap();
        let doc = DiagramDocument::of(&ms, false).unwrap();
        assert!(doc.pairs.is_empty() && doc.relations.is_empty());
        assert_eq!(doc.to_csv().lines().count(), 1);
    }
}
