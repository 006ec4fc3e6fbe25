//! CSV and JSON export. Both carry the same columns in the same order.
//! CSV numbers use 17 significant digits (`{:.16e}`), which round-trips
//! binary64 exactly; missing values are empty fields.

use serde_json::{json, Map, Value};

use super::run::{BranchCells, SweepResult, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(Option<f64>),
    Bool(bool),
    Count(usize),
}

const BRANCH_FIELDS: [&str; 11] = [
    "sigma_re",
    "sigma_im",
    "s_re",
    "s_im",
    "c",
    "d",
    "g",
    "h",
    "log_a_term",
    "log_b_term",
    "log_f_a",
];

/// Column names, in export order.
pub fn columns() -> Vec<String> {
    let mut cols = vec!["k".to_string()];
    for side in ["A", "B"] {
        cols.extend(BRANCH_FIELDS.iter().map(|f| format!("{f}_{side}")));
    }
    cols.extend(
        [
            "log_lambda",
            "degenerate",
            "no_eigenvalue",
            "unlabelled_roots",
        ]
        .map(String::from),
    );
    cols
}

fn branch_cells(cells: Option<&BranchCells>) -> [Cell; 11] {
    match cells {
        None => [Cell::Num(None); 11],
        Some(c) => [
            Some(c.sigma_re),
            Some(c.sigma_im),
            Some(c.s_re),
            Some(c.s_im),
            Some(c.c),
            Some(c.d),
            Some(c.g),
            Some(c.h),
            c.log_a_term,
            c.log_b_term,
            c.log_f_a,
        ]
        .map(Cell::Num),
    }
}

pub fn row_cells(row: &SweepRow) -> Vec<Cell> {
    let mut out = vec![Cell::Num(Some(row.k))];
    out.extend(branch_cells(row.a_side.as_ref()));
    out.extend(branch_cells(row.b_side.as_ref()));
    out.extend([
        Cell::Num(Some(row.log_lambda)),
        Cell::Bool(row.degenerate),
        Cell::Bool(row.no_eigenvalue),
        Cell::Count(row.unlabelled_roots),
    ]);
    out
}

fn csv_field(cell: Cell) -> String {
    match cell {
        Cell::Num(None) => String::new(),
        Cell::Num(Some(x)) => format!("{x:.16e}"),
        Cell::Bool(b) => b.to_string(),
        Cell::Count(n) => n.to_string(),
    }
}

pub fn to_csv(result: &SweepResult) -> String {
    let mut out = columns().join(",");
    out.push('\n');
    for row in &result.rows {
        let fields: Vec<String> = row_cells(row).into_iter().map(csv_field).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn json_value(cell: Cell) -> Value {
    match cell {
        Cell::Num(Some(x)) if x.is_finite() => json!(x),
        Cell::Num(_) => Value::Null,
        Cell::Bool(b) => Value::Bool(b),
        Cell::Count(n) => json!(n),
    }
}

/// Schema version of the JSON sweep document.
pub const SWEEP_SCHEMA_VERSION: u32 = 1;

pub fn to_json(result: &SweepResult) -> String {
    let cols = columns();
    let rows: Vec<Value> = result
        .rows
        .iter()
        .map(|row| {
            let map: Map<String, Value> = cols
                .iter()
                .cloned()
                .zip(row_cells(row).into_iter().map(json_value))
                .collect();
            Value::Object(map)
        })
        .collect();
    let doc = json!({
        "schema_version": SWEEP_SCHEMA_VERSION,
        "config_hash": result.config_hash,
        "params": result.params,
        "k_grid": result.k_grid,
        "normalization": result.normalization,
        "columns": cols,
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("sweep serialises");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{parse_config, run_sweep};

    fn parse_num(field: &str) -> Option<f64> {
        (!field.is_empty()).then(|| field.parse().unwrap())
    }

    #[test]
    fn csv_round_trips_bit_exactly() {
        let result = run_sweep(&parse_config("normalization = constant\n").unwrap()).unwrap();
        let text = to_csv(&result);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), columns().len());
        let mut count = 0;
        for (line, row) in lines.zip(&result.rows) {
            for (field, cell) in line.split(',').zip(row_cells(row)) {
                if let Cell::Num(v) = cell {
                    assert_eq!(parse_num(field).map(f64::to_bits), v.map(f64::to_bits));
                }
            }
            count += 1;
        }
        assert_eq!(count, 200);
    }

    #[test]
    fn json_mirrors_csv() {
        let result =
            run_sweep(&parse_config("normalization = constant\nk_count = 20\n").unwrap()).unwrap();
        let doc: Value = serde_json::from_str(&to_json(&result)).unwrap();
        let rows = doc["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 20);
        for (obj, row) in rows.iter().zip(&result.rows) {
            let keys: Vec<&String> = obj.as_object().unwrap().keys().collect();
            assert_eq!(keys, columns().iter().collect::<Vec<_>>());
            for (col, cell) in columns().iter().zip(row_cells(row)) {
                if let Cell::Num(Some(x)) = cell {
                    assert_eq!(obj[col].as_f64().unwrap().to_bits(), x.to_bits(), "{col}");
                }
            }
        }
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut result =
            run_sweep(&parse_config("normalization = constant\nk_count = 2\n").unwrap()).unwrap();
        result.rows.clear();
        let csv = to_csv(&result);
        assert_eq!(csv.lines().count(), 1);
        assert_eq!(csv.trim_end(), columns().join(","));
    }
}
