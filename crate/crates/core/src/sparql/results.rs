use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AnswerValue {
    Uri {
        value: String,
    },
    Literal {
        value: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        datatype: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lang: Option<String>,
    },
    Bnode {
        value: String,
    },
    Boolean {
        value: bool,
    },
    /// Variable with no binding in this row.
    Unbound,
}

impl AnswerValue {
    pub fn uri(value: impl Into<String>) -> Self {
        AnswerValue::Uri { value: value.into() }
    }

    pub fn literal(value: impl Into<String>) -> Self {
        AnswerValue::Literal {
            value: value.into(),
            datatype: None,
            lang: None,
        }
    }

    /// Comparison string: URIs verbatim, literals by lexical form, booleans
    /// as `true`/`false`. None for unbound cells.
    pub fn canonical(&self) -> Option<String> {
        match self {
            AnswerValue::Uri { value } | AnswerValue::Literal { value, .. } => Some(value.clone()),
            AnswerValue::Bnode { value } => Some(format!("_:{value}")),
            AnswerValue::Boolean { value } => Some(value.to_string()),
            AnswerValue::Unbound => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AnswerTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<AnswerValue>>,
    /// Set when rows were dropped at the configured cap.
    pub truncated: bool,
}

pub const ASK_COLUMN: &str = "answer";

impl AnswerTable {
    pub fn boolean(value: bool) -> Self {
        Self {
            columns: vec![ASK_COLUMN.to_string()],
            rows: vec![vec![AnswerValue::Boolean { value }]],
            truncated: false,
        }
    }

    /// The ASK result, if this table holds one.
    pub fn as_boolean(&self) -> Option<bool> {
        match self.rows.as_slice() {
            [row] if self.columns.len() == 1 => match row.as_slice() {
                [AnswerValue::Boolean { value }] => Some(*value),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&AnswerValue>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Every bound cell, canonicalized, deduplicated, sorted.
    pub fn answer_set(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .rows
            .iter()
            .flatten()
            .filter_map(AnswerValue::canonical)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn truncate(&mut self, max_rows: usize) {
        if self.rows.len() > max_rows {
            self.rows.truncate(max_rows);
            self.truncated = true;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed SPARQL results: {0}")]
pub struct MalformedResults(pub String);

fn bad(msg: impl Into<String>) -> MalformedResults {
    MalformedResults(msg.into())
}

/// Decodes the SPARQL 1.1 JSON results format.
pub fn parse_results(body: &str) -> Result<AnswerTable, MalformedResults> {
    let doc: Value = serde_json::from_str(body).map_err(|e| bad(e.to_string()))?;
    let doc = doc.as_object().ok_or_else(|| bad("top level is not an object"))?;
    if let Some(b) = doc.get("boolean") {
        let value = b.as_bool().ok_or_else(|| bad("`boolean` is not a boolean"))?;
        return Ok(AnswerTable::boolean(value));
    }
    let vars = doc
        .get("head")
        .and_then(|h| h.get("vars"))
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing head.vars"))?;
    let columns = vars
        .iter()
        .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad("non-string variable name")))
        .collect::<Result<Vec<_>, _>>()?;
    let bindings = doc
        .get("results")
        .and_then(|r| r.get("bindings"))
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing results.bindings"))?;
    let mut rows = Vec::with_capacity(bindings.len());
    for (i, b) in bindings.iter().enumerate() {
        let b = b
            .as_object()
            .ok_or_else(|| bad(format!("binding {i} is not an object")))?;
        let row = columns
            .iter()
            .map(|c| match b.get(c) {
                None => Ok(AnswerValue::Unbound),
                Some(cell) => parse_cell(cell).map_err(|m| bad(format!("binding {i}, ?{c}: {m}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(AnswerTable {
        columns,
        rows,
        truncated: false,
    })
}

fn parse_cell(cell: &Value) -> Result<AnswerValue, String> {
    let obj = cell.as_object().ok_or("cell is not an object")?;
    let value = obj
        .get("value")
        .and_then(Value::as_str)
        .ok_or("missing string `value`")?
        .to_string();
    let opt = |k: &str| obj.get(k).and_then(Value::as_str).map(str::to_string);
    match obj.get("type").and_then(Value::as_str) {
        Some("uri") => Ok(AnswerValue::Uri { value }),
        Some("literal") | Some("typed-literal") => Ok(AnswerValue::Literal {
            value,
            datatype: opt("datatype"),
            lang: opt("xml:lang"),
        }),
        Some("bnode") => Ok(AnswerValue::Bnode { value }),
        Some(other) => Err(format!("unknown term type `{other}`")),
        None => Err("missing `type`".into()),
    }
}

/// Encodes a table in the SPARQL 1.1 JSON results format.
pub fn serialize_results(table: &AnswerTable) -> String {
    if let Some(value) = table.as_boolean() {
        return json!({ "head": {}, "boolean": value }).to_string();
    }
    let bindings: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (c, v) in table.columns.iter().zip(row) {
                let cell = match v {
                    AnswerValue::Uri { value } => json!({"type": "uri", "value": value}),
                    AnswerValue::Literal { value, datatype, lang } => {
                        let mut o = json!({"type": "literal", "value": value});
                        if let Some(d) = datatype {
                            o["datatype"] = json!(d);
                        }
                        if let Some(l) = lang {
                            o["xml:lang"] = json!(l);
                        }
                        o
                    }
                    AnswerValue::Bnode { value } => json!({"type": "bnode", "value": value}),
                    AnswerValue::Boolean { value } => json!({
                        "type": "literal",
                        "value": value.to_string(),
                        "datatype": "http://www.w3.org/2001/XMLSchema#boolean",
                    }),
                    AnswerValue::Unbound => continue,
                };
                m.insert(c.clone(), cell);
            }
            Value::Object(m)
        })
        .collect();
    json!({
        "head": { "vars": table.columns },
        "results": { "bindings": bindings },
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BY_THREE: &str = r#"{
      "head": {"vars": ["firstanswer", "secondanswer"]},
      "results": {"bindings": [
        {"firstanswer": {"type": "uri", "value": "https://dblp.org/pid/69/4618"},
         "secondanswer": {"type": "literal", "value": "ACL"}},
        {"firstanswer": {"type": "uri", "value": "https://dblp.org/pid/69/4618"},
         "secondanswer": {"type": "literal", "value": "ICESS", "xml:lang": "en"}},
        {"firstanswer": {"type": "uri", "value": "https://dblp.org/pid/00/1"}}
      ]}
    }"#;

    #[test]
    fn two_columns_three_rows() {
        let t = parse_results(TWO_BY_THREE).unwrap();
        assert_eq!(t.columns, vec!["firstanswer", "secondanswer"]);
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[2][1], AnswerValue::Unbound);
        assert!(t.answer_set().contains(&"ICESS".to_string()));
        assert_eq!(parse_results(&serialize_results(&t)).unwrap(), t);
    }

    #[test]
    fn empty_table() {
        let t = parse_results(r#"{"head":{"vars":[]},"results":{"bindings":[]}}"#).unwrap();
        assert!(t.columns.is_empty() && t.rows.is_empty());
    }

    #[test]
    fn ask_result() {
        let t = parse_results(r#"{"head":{},"boolean":false}"#).unwrap();
        assert_eq!(t.as_boolean(), Some(false));
        assert_eq!(t.columns, vec![ASK_COLUMN]);
        assert_eq!(parse_results(&serialize_results(&t)).unwrap(), t);
        assert_eq!(t.answer_set(), vec!["false"]);
    }

    #[test]
    fn typed_literal_keeps_lexical_form() {
        let t = parse_results(
            r#"{"head":{"vars":["y"]},"results":{"bindings":[{"y":{"type":"literal","value":"2019","datatype":"http://www.w3.org/2001/XMLSchema#gYear"}}]}}"#,
        )
        .unwrap();
        assert_eq!(t.rows[0][0].canonical().as_deref(), Some("2019"));
    }

    #[test]
    fn truncated_json_is_malformed() {
        assert!(parse_results(&TWO_BY_THREE[..40]).is_err());
        assert!(parse_results(r#"{"head":{"vars":["x"]}}"#).is_err());
        assert!(parse_results(r#"{"head":{"vars":["x"]},"results":{"bindings":[{"x":{"type":"weird","value":"v"}}]}}"#).is_err());
    }

    #[test]
    fn truncate_sets_flag() {
        let mut t = parse_results(TWO_BY_THREE).unwrap();
        t.truncate(3);
        assert!(!t.truncated);
        t.truncate(1);
        assert!(t.truncated && t.rows.len() == 1);
    }
}
