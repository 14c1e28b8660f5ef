//! Term models as tables: one per entity, an ID column of labels, then one
//! column per attribute and foreign key.

use std::fmt::Write;
use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::{json, Map, Value as Json};

use crate::term::{Literal, TermModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!(
                "unknown format `{other}` (expected markdown, csv or json)"
            )),
        }
    }
}

/// One cell: its text, and the literal behind it when it is one.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub text: String,
    pub literal: Option<Literal>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub entity: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// The tables of `m` in entity declaration order, rows in label order.
pub fn tables(m: &TermModel) -> Vec<Table> {
    let schema = m.schema();
    schema
        .entities
        .iter()
        .map(|e| {
            let cols: Vec<_> = schema.columns_of(e).collect();
            let mut header = vec!["ID".to_string()];
            header.extend(cols.iter().map(|c| c.name.clone()));
            let rows = m
                .carrier(e)
                .iter()
                .map(|&x| {
                    let mut row = vec![Cell {
                        text: m.display(x),
                        literal: None,
                    }];
                    for c in &cols {
                        let v = m.apply(&c.name, x).expect("column of this entity");
                        row.push(Cell {
                            text: m.display(v),
                            literal: m.literal(v).cloned(),
                        });
                    }
                    row
                })
                .collect();
            Table {
                entity: e.clone(),
                header,
                rows,
            }
        })
        .collect()
}

pub fn render_model(m: &TermModel, format: Format) -> String {
    match format {
        Format::Markdown => markdown(m),
        Format::Csv => tables(m)
            .iter()
            .map(|t| format!("# {}\n{}", t.entity, csv_table(t)))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Json => {
            let mut text =
                serde_json::to_string_pretty(&json_value(m)).expect("json values serialize");
            text.push('\n');
            text
        }
    }
}

fn markdown(m: &TermModel) -> String {
    let mut out = String::new();
    for (i, t) in tables(m).iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "## {}\n", t.entity);
        let _ = writeln!(out, "| {} |", t.header.join(" | "));
        let _ = writeln!(out, "|{}", " --- |".repeat(t.header.len()));
        for row in &t.rows {
            let cells: Vec<_> = row.iter().map(|c| c.text.replace('|', "\\|")).collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
    }
    out
}

/// One entity as CSV, header included.
pub fn csv_table(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header).expect("writing to memory");
    for row in &t.rows {
        w.write_record(row.iter().map(|c| c.text.as_str()))
            .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv of utf-8 is utf-8")
}

/// `{"schema": ..., "entities": {name: [{"id": ..., column: ...}]}}`.
/// Integer literals that fit in 64 bits become JSON numbers; everything
/// else, nulls included, is a string.
pub fn json_value(m: &TermModel) -> Json {
    let mut entities = Map::new();
    for t in tables(m) {
        let rows: Vec<Json> = t
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                obj.insert("id".into(), Json::String(row[0].text.clone()));
                for (h, c) in t.header.iter().zip(row).skip(1) {
                    obj.insert(h.clone(), cell_json(c));
                }
                Json::Object(obj)
            })
            .collect();
        entities.insert(t.entity.clone(), Json::Array(rows));
    }
    json!({ "schema": m.schema().name, "entities": entities })
}

fn cell_json(c: &Cell) -> Json {
    match &c.literal {
        Some(Literal::Int(n)) => match i64::try_from(n) {
            Ok(v) => Json::from(v),
            Err(_) => Json::String(BigInt::to_string(n)),
        },
        _ => Json::String(c.text.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::migrate::fixtures::*;
    use crate::migrate::sigma;
    use crate::schema::fixtures::*;
    use crate::schema::InstancePresentation;
    use crate::term::SaturationLimits;
    use std::sync::Arc;

    #[test]
    fn left_tables() {
        let m = model(instance_i());
        let text = render_model(&m, Format::Markdown);
        assert!(text.contains("| ID | name | salary | f |"), "{text}");
        assert!(text.contains("| ID | age |"), "{text}");
        assert!(text.contains("| 1 | Alice | 100 |"), "{text}");
    }

    #[test]
    fn empty_instance_has_headers_only() {
        let m = model(InstancePresentation::empty("E", schema_s()));
        let text = render_model(&m, Format::Csv);
        assert_eq!(text, "# N1\nID,name,salary,f\n\n# N2\nID,age\n");
    }

    #[test]
    fn sigma_table_shows_null_terms() {
        let r = sigma(
            &mapping_f0(),
            &Arc::new(instance_i0()),
            SaturationLimits::default(),
        )
        .unwrap();
        let text = render_model(&r.output, Format::Markdown);
        assert!(text.contains("age(1)"), "{text}");
        let t = &tables(&r.output)[0];
        assert_eq!(t.rows.len(), 6);
    }

    #[test]
    fn json_shape() {
        let m = model(instance_i());
        let v = json_value(&m);
        assert_eq!(v["schema"], "S");
        assert_eq!(v["entities"]["N1"][0]["id"], "1");
        assert_eq!(v["entities"]["N1"][0]["name"], "Alice");
        assert_eq!(v["entities"]["N1"][0]["salary"], 100);
        assert_eq!(v["entities"]["N2"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn formats_parse() {
        assert_eq!("md".parse::<Format>(), Ok(Format::Markdown));
        assert!("xml".parse::<Format>().is_err());
    }
}
