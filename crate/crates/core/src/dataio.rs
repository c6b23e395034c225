//! Upload data format and the region join.
//!
//! The upload format is a JSON array of objects, one per region (or per
//! flow edge):
//!
//! ```json
//! [
//!   {"name": "China", "value": 1411, "label": "Most populous until 2023"},
//!   {"country": "India", "data": 1428, "category": "emerging"},
//!   {"name": "Mexico", "to": "United States of America", "value": 11}
//! ]
//! ```
//!
//! Accepted keys: `name` or `country` for the region, `value` or `data` for
//! the payload, optional `label`, optional `category` (a secondary
//! categorical attribute used by hue in dual encodings) and `to`, which
//! marks a flow row whose `value` is the flow magnitude.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::geodata::{normalize_key, RegionSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("malformed data: {0}")]
    MalformedInput(String),
    #[error("data mixes numeric and text values (row {0})")]
    MixedKinds(usize),
    #[error("data table is empty")]
    EmptyTable,
    #[error("no data row matched a region")]
    NoMatches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Quantitative,
    Categorical,
    Flow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DataValue {
    Quantitative(f64),
    Categorical(String),
}

impl DataValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            DataValue::Quantitative(v) => Some(*v),
            DataValue::Categorical(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataRow {
    pub region_name: String,
    pub value: DataValue,
    pub label: Option<String>,
    pub category: Option<String>,
    pub flow_to: Option<String>,
    pub flow_magnitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataTable {
    pub rows: Vec<DataRow>,
    pub field_kind: FieldKind,
}

pub fn parse_data(text: &str) -> Result<DataTable, DataError> {
    let root: Value = serde_json::from_str(text).map_err(|e| DataError::MalformedInput(e.to_string()))?;
    let items = root
        .as_array()
        .ok_or_else(|| DataError::MalformedInput("top level must be an array of objects".into()))?;
    if items.is_empty() {
        return Err(DataError::EmptyTable);
    }

    let mut rows = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let obj = item
            .as_object()
            .ok_or_else(|| DataError::MalformedInput(format!("row {i} is not an object")))?;
        rows.push(parse_row(i, obj)?);
    }

    let flow_rows = rows.iter().filter(|r| r.flow_to.is_some()).count();
    let field_kind = if flow_rows > 0 {
        if flow_rows != rows.len() {
            return Err(DataError::MalformedInput(
                "flow data requires a \"to\" key on every row".into(),
            ));
        }
        FieldKind::Flow
    } else {
        let first_numeric = matches!(rows[0].value, DataValue::Quantitative(_));
        if let Some(i) = rows
            .iter()
            .position(|r| matches!(r.value, DataValue::Quantitative(_)) != first_numeric)
        {
            return Err(DataError::MixedKinds(i));
        }
        if first_numeric {
            FieldKind::Quantitative
        } else {
            FieldKind::Categorical
        }
    };
    Ok(DataTable { rows, field_kind })
}

fn parse_row(i: usize, obj: &Map<String, Value>) -> Result<DataRow, DataError> {
    let bad = |msg: &str| DataError::MalformedInput(format!("row {i}: {msg}"));
    let text_field = |keys: &[&str]| -> Result<Option<String>, DataError> {
        match keys.iter().find_map(|k| obj.get(*k)) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(bad(&format!("{:?} must be a string", keys[0]))),
        }
    };

    let region_name = text_field(&["name", "country"])?
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| bad("missing region name (\"name\" or \"country\")"))?;
    let value = match obj.get("value").or_else(|| obj.get("data")) {
        Some(Value::Number(n)) => {
            let v = n.as_f64().filter(|v| v.is_finite()).ok_or_else(|| bad("value is not finite"))?;
            DataValue::Quantitative(v)
        }
        Some(Value::String(s)) => DataValue::Categorical(s.clone()),
        Some(_) => return Err(bad("value must be a number or a string")),
        None => return Err(bad("missing value (\"value\" or \"data\")")),
    };
    let label = text_field(&["label"])?;
    let category = text_field(&["category", "group"])?;
    let flow_to = text_field(&["to"])?;
    let flow_magnitude = match (&flow_to, &value) {
        (None, _) => None,
        (Some(_), DataValue::Quantitative(v)) if *v >= 0.0 => Some(*v),
        (Some(_), _) => return Err(bad("flow magnitude must be a number >= 0")),
    };
    Ok(DataRow {
        region_name,
        value,
        label,
        category,
        flow_to,
        flow_magnitude,
    })
}

/// Parses an alias table: either a JSON object `{"USA": "United States of
/// America"}` or an array of two-element string arrays.
pub fn parse_aliases(text: &str) -> Result<BTreeMap<String, String>, DataError> {
    let root: Value = serde_json::from_str(text).map_err(|e| DataError::MalformedInput(e.to_string()))?;
    let pairs: Vec<(String, String)> = match root {
        Value::Object(map) => map
            .into_iter()
            .map(|(k, v)| match v {
                Value::String(s) => Ok((k, s)),
                _ => Err(DataError::MalformedInput(format!("alias {k:?} must map to a string"))),
            })
            .collect::<Result<_, _>>()?,
        Value::Array(items) => items
            .into_iter()
            .map(|item| match item.as_array().map(|a| a.as_slice()) {
                Some([Value::String(a), Value::String(b)]) => Ok((a.clone(), b.clone())),
                _ => Err(DataError::MalformedInput("alias rows must be [from, to] string pairs".into())),
            })
            .collect::<Result<_, _>>()?,
        _ => return Err(DataError::MalformedInput("alias table must be an object or an array".into())),
    };
    Ok(pairs.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JoinedRow {
    pub key: String,
    pub region_name: String,
    pub row: DataRow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowEdge {
    pub from: String,
    pub to: String,
    pub magnitude: f64,
    pub label: Option<String>,
}

impl FlowEdge {
    /// Stable identifier used for marks and legends.
    pub fn key(&self) -> String {
        format!("{}>{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JoinedData {
    pub field_kind: FieldKind,
    pub matched: Vec<JoinedRow>,
    pub flows: Vec<FlowEdge>,
    pub unmatched_names: Vec<String>,
    pub uncovered_regions: Vec<String>,
}

impl JoinedData {
    pub fn is_empty(&self) -> bool {
        self.matched.is_empty() && self.flows.is_empty()
    }
}

/// Joins rows to regions by normalized key, applying `aliases` first.
/// Rows that do not resolve are reported in `unmatched_names`; regions
/// without data in `uncovered_regions`.
pub fn join(
    regions: &RegionSet,
    table: &DataTable,
    aliases: Option<&BTreeMap<String, String>>,
) -> Result<JoinedData, DataError> {
    let alias_map: HashMap<String, String> = aliases
        .map(|m| m.iter().map(|(k, v)| (normalize_key(k), normalize_key(v))).collect())
        .unwrap_or_default();
    let resolve = |name: &str| -> Option<String> {
        let key = normalize_key(name);
        let key = alias_map.get(&key).cloned().unwrap_or(key);
        regions.contains_key(&key).then_some(key)
    };

    let mut matched = Vec::new();
    let mut flows = Vec::new();
    let mut unmatched_names = Vec::new();
    let mut covered: HashSet<String> = HashSet::new();

    for row in &table.rows {
        if let Some(to) = &row.flow_to {
            match (resolve(&row.region_name), resolve(to)) {
                (Some(from), Some(to)) if from != to => {
                    covered.insert(from.clone());
                    covered.insert(to.clone());
                    flows.push(FlowEdge {
                        from,
                        to,
                        magnitude: row.flow_magnitude.unwrap_or(0.0),
                        label: row.label.clone(),
                    });
                }
                (None, _) => unmatched_names.push(row.region_name.clone()),
                (Some(_), None) => unmatched_names.push(to.clone()),
                (Some(_), Some(_)) => unmatched_names.push(row.region_name.clone()),
            }
            continue;
        }
        match resolve(&row.region_name) {
            Some(key) if !covered.contains(&key) => {
                covered.insert(key.clone());
                let region_name = regions.get(&key).map(|r| r.name.clone()).unwrap_or_default();
                matched.push(JoinedRow {
                    key,
                    region_name,
                    row: row.clone(),
                });
            }
            _ => unmatched_names.push(row.region_name.clone()),
        }
    }

    if matched.is_empty() && flows.is_empty() {
        return Err(DataError::NoMatches);
    }
    let uncovered_regions = regions
        .regions()
        .iter()
        .filter(|r| !covered.contains(&r.key))
        .map(|r| r.key.clone())
        .collect();
    Ok(JoinedData {
        field_kind: table.field_kind,
        matched,
        flows,
        unmatched_names,
        uncovered_regions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::parse_boundaries;

    fn regions(names: &[&str]) -> RegionSet {
        let features: Vec<String> = names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let x = i as f64 * 2.0;
                format!(
                    r#"{{"type":"Feature","properties":{{"name":"{n}"}},"geometry":{{"type":"Polygon","coordinates":[[[{x},0],[{},0],[{},1],[{x},1],[{x},0]]]}}}}"#,
                    x + 1.0,
                    x + 1.0
                )
            })
            .collect();
        parse_boundaries(&format!(r#"{{"type":"FeatureCollection","features":[{}]}}"#, features.join(","))).unwrap()
    }

    #[test]
    fn quantitative_table() {
        let t = parse_data(r#"[{"name":"A","value":3},{"name":"B","value":5}]"#).unwrap();
        assert_eq!(t.field_kind, FieldKind::Quantitative);
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn mixed_kinds() {
        assert_eq!(
            parse_data(r#"[{"name":"A","value":"alpine"},{"name":"B","value":2}]"#),
            Err(DataError::MixedKinds(1))
        );
    }

    #[test]
    fn flow_table() {
        let t = parse_data(r#"[{"name":"A","to":"B","value":10}]"#).unwrap();
        assert_eq!(t.field_kind, FieldKind::Flow);
        assert_eq!(t.rows[0].flow_magnitude, Some(10.0));
    }

    #[test]
    fn alternate_key_spellings() {
        let t = parse_data(r#"[{"country":"A","data":"x","label":"note","group":"g"}]"#).unwrap();
        assert_eq!(t.field_kind, FieldKind::Categorical);
        assert_eq!(t.rows[0].label.as_deref(), Some("note"));
        assert_eq!(t.rows[0].category.as_deref(), Some("g"));
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(parse_data("[]"), Err(DataError::EmptyTable));
        for text in ["{}", "[1]", r#"[{"value":1}]"#, r#"[{"name":"A"}]"#, r#"[{"name":"A","value":[1]}]"#, "[{"] {
            assert!(matches!(parse_data(text), Err(DataError::MalformedInput(_))), "{text}");
        }
        assert!(matches!(
            parse_data(r#"[{"name":"A","to":"B","value":1},{"name":"C","value":2}]"#),
            Err(DataError::MalformedInput(_))
        ));
        assert!(matches!(
            parse_data(r#"[{"name":"A","to":"B","value":-1}]"#),
            Err(DataError::MalformedInput(_))
        ));
    }

    #[test]
    fn join_all_matched() {
        let set = regions(&["A", "B"]);
        let t = parse_data(r#"[{"name":"A","value":1},{"name":"b","value":2}]"#).unwrap();
        let j = join(&set, &t, None).unwrap();
        assert_eq!(j.matched.len(), 2);
        assert!(j.unmatched_names.is_empty());
        assert!(j.uncovered_regions.is_empty());
    }

    #[test]
    fn join_reports_unmatched_and_uncovered() {
        let set = regions(&["A", "C"]);
        let t = parse_data(r#"[{"name":"A","value":1},{"name":"Z","value":2}]"#).unwrap();
        let j = join(&set, &t, None).unwrap();
        assert_eq!(j.matched.len(), 1);
        assert_eq!(j.unmatched_names, vec!["Z".to_string()]);
        assert_eq!(j.uncovered_regions, vec!["c".to_string()]);
    }

    #[test]
    fn join_with_alias() {
        let set = regions(&["United States of America"]);
        let t = parse_data(r#"[{"name":"USA","value":1}]"#).unwrap();
        let aliases = parse_aliases(r#"{"USA": "united states of america"}"#).unwrap();
        assert!(matches!(join(&set, &t, None), Err(DataError::NoMatches)));
        let j = join(&set, &t, Some(&aliases)).unwrap();
        assert_eq!(j.matched[0].key, "united states of america");
        assert_eq!(j.matched[0].region_name, "United States of America");
    }

    #[test]
    fn alias_pairs_form() {
        let a = parse_aliases(r#"[["USA","United States of America"],["UK","United Kingdom"]]"#).unwrap();
        assert_eq!(a.len(), 2);
        assert!(parse_aliases(r#"[["USA"]]"#).is_err());
    }

    #[test]
    fn flows_join_both_endpoints() {
        let set = regions(&["A", "B"]);
        let t = parse_data(r#"[{"name":"A","to":"B","value":4},{"name":"A","to":"Q","value":1},{"name":"B","to":"B","value":1}]"#)
            .unwrap();
        let j = join(&set, &t, None).unwrap();
        assert_eq!(j.flows.len(), 1);
        assert_eq!(j.flows[0].key(), "a>b");
        assert_eq!(j.unmatched_names, vec!["Q".to_string(), "B".to_string()]);
    }

    #[test]
    fn duplicate_rows_for_one_region() {
        let set = regions(&["A"]);
        let t = parse_data(r#"[{"name":"A","value":1},{"name":" a ","value":2}]"#).unwrap();
        let j = join(&set, &t, None).unwrap();
        assert_eq!(j.matched.len(), 1);
        assert_eq!(j.unmatched_names.len(), 1);
    }
}
