//! CSV formats for the three assessment tables.
//!
//! * `dissim.csv`: an `(N+1) x (N+1)` grid with product ids in the first row
//!   and column; each cell is an integer code or `*` when unobserved.
//! * `appeal.csv`: `id,score`.
//! * `rules.csv`: `id,d1,d2,d3,R1,R2,R3`.

use std::collections::BTreeMap;

use crate::model::{
    AppealScores, DesignParams, ModelError, ProductId, Rule, RuleAssessmentSet,
    SparseDissimilarityMatrix,
};

const UNOBSERVED: &str = "*";

fn records(text: &str) -> Result<Vec<(usize, Vec<String>)>, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| ModelError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn parse_err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_id(line: usize, cell: &str) -> Result<ProductId, ModelError> {
    cell.parse::<ProductId>()
        .ok()
        .filter(|id| *id > 0)
        .ok_or_else(|| parse_err(line, format!("invalid product id `{cell}`")))
}

fn parse_real(line: usize, name: &str, cell: &str) -> Result<f64, ModelError> {
    // Accept a decimal comma as printed in the source tables ("9,5") only when
    // the cell is quoted; unquoted commas are field separators.
    let v: f64 = cell
        .replace(',', ".")
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {name} `{cell}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(line, format!("non-finite {name}")))
    }
}

fn check_header(line: usize, got: &[String], expected: &[&str]) -> Result<(), ModelError> {
    let matches = got.len() == expected.len()
        && got
            .iter()
            .zip(expected)
            .all(|(g, e)| g.eq_ignore_ascii_case(e));
    if matches {
        Ok(())
    } else {
        Err(parse_err(
            line,
            format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
        ))
    }
}

/// Parses a square dissimilarity grid. Mirrored cells must agree (an observed
/// cell facing `*` is an asymmetry) and the diagonal must be 0.
///
/// Codes above 3 are kept so that validation can report them.
pub fn load_matrix(text: &str) -> Result<SparseDissimilarityMatrix, ModelError> {
    let rows = records(text)?;
    let Some(((header_line, header), body)) = rows.split_first() else {
        return Err(parse_err(1, "empty matrix"));
    };
    let n = header.len().saturating_sub(1);
    if n < 2 {
        return Err(parse_err(*header_line, "matrix needs at least 2 products"));
    }
    for (k, cell) in header.iter().enumerate().skip(1) {
        if parse_id(*header_line, cell)? != k {
            return Err(parse_err(*header_line, format!("header column {k} must be id {k}")));
        }
    }
    if body.len() != n {
        return Err(parse_err(
            *header_line,
            format!("expected {n} data rows, found {}", body.len()),
        ));
    }

    let mut cells = vec![vec![None::<u8>; n]; n];
    for (r, (line, row)) in body.iter().enumerate() {
        if row.len() != n + 1 {
            return Err(parse_err(*line, format!("expected {} cells, found {}", n + 1, row.len())));
        }
        if parse_id(*line, &row[0])? != r + 1 {
            return Err(parse_err(*line, format!("row {} must start with id {}", r + 1, r + 1)));
        }
        for (c, cell) in row[1..].iter().enumerate() {
            cells[r][c] = if cell == UNOBSERVED {
                None
            } else {
                Some(
                    cell.parse::<u8>()
                        .map_err(|_| parse_err(*line, format!("invalid dissimilarity `{cell}`")))?,
                )
            };
        }
    }

    let mut matrix = SparseDissimilarityMatrix::new(n);
    for i in 0..n {
        if cells[i][i] != Some(0) {
            return Err(ModelError::NonZeroDiagonal(i + 1));
        }
        for j in i + 1..n {
            if cells[i][j] != cells[j][i] {
                return Err(ModelError::Asymmetry { i: i + 1, j: j + 1 });
            }
            if let Some(v) = cells[i][j] {
                matrix.insert_unchecked(i + 1, j + 1, v)?;
            }
        }
    }
    Ok(matrix)
}

pub fn write_matrix(matrix: &SparseDissimilarityMatrix) -> String {
    let n = matrix.n();
    let mut out = String::new();
    let header: Vec<String> = std::iter::once(String::new())
        .chain((1..=n).map(|k| k.to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 1..=n {
        let mut row = vec![i.to_string()];
        for j in 1..=n {
            row.push(match matrix.get(i, j) {
                Some(v) => v.to_string(),
                None => UNOBSERVED.to_string(),
            });
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn load_appeal(text: &str) -> Result<AppealScores, ModelError> {
    let rows = records(text)?;
    let Some(((line, header), body)) = rows.split_first() else {
        return Err(parse_err(1, "empty appeal file"));
    };
    check_header(*line, header, &["id", "score"])?;
    let mut scores = BTreeMap::new();
    for (line, row) in body {
        if row.len() != 2 {
            return Err(parse_err(*line, format!("expected 2 cells, found {}", row.len())));
        }
        let id = parse_id(*line, &row[0])?;
        let score = parse_real(*line, "score", &row[1])?;
        if !(0.0..=10.0).contains(&score) {
            return Err(ModelError::OutOfRange {
                line: *line,
                message: format!("appeal score {score} outside [0, 10]"),
            });
        }
        if scores.insert(id, score).is_some() {
            return Err(parse_err(*line, format!("duplicate product {id}")));
        }
    }
    AppealScores::new(scores)
}

pub fn write_appeal(scores: &AppealScores) -> String {
    let mut out = String::from("id,score\n");
    for (id, score) in scores.iter() {
        out.push_str(&format!("{id},{score}\n"));
    }
    out
}

/// One parsed row of `rules.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleRow {
    pub id: ProductId,
    pub dims: DesignParams,
    pub codes: [i8; 3],
}

const RULES_HEADER: [&str; 7] = ["id", "d1", "d2", "d3", "R1", "R2", "R3"];

pub fn load_rule_rows(text: &str) -> Result<Vec<RuleRow>, ModelError> {
    let rows = records(text)?;
    let Some(((line, header), body)) = rows.split_first() else {
        return Err(parse_err(1, "empty rules file"));
    };
    check_header(*line, header, &RULES_HEADER)?;
    let mut out: Vec<RuleRow> = Vec::with_capacity(body.len());
    for (line, row) in body {
        if row.len() != RULES_HEADER.len() {
            return Err(parse_err(
                *line,
                format!("expected {} cells, found {}", RULES_HEADER.len(), row.len()),
            ));
        }
        let id = parse_id(*line, &row[0])?;
        if out.iter().any(|r| r.id == id) {
            return Err(parse_err(*line, format!("duplicate product {id}")));
        }
        let mut d = [0.0; 3];
        for k in 0..3 {
            d[k] = parse_real(*line, RULES_HEADER[k + 1], &row[k + 1])?;
            if d[k] <= 0.0 {
                return Err(ModelError::OutOfRange {
                    line: *line,
                    message: format!("{} must be positive, got {}", RULES_HEADER[k + 1], d[k]),
                });
            }
        }
        let mut codes = [0i8; 3];
        for rule in Rule::ALL {
            let k = rule.index();
            let cell = &row[k + 4];
            let code: i8 = cell
                .parse()
                .map_err(|_| parse_err(*line, format!("invalid {rule} code `{cell}`")))?;
            if !(-1..=1).contains(&code) {
                return Err(ModelError::OutOfRange {
                    line: *line,
                    message: format!("{rule} code {code} outside {{-1, 0, 1}}"),
                });
            }
            codes[k] = code;
        }
        out.push(RuleRow {
            id,
            dims: DesignParams::from_array(d),
            codes,
        });
    }
    Ok(out)
}

pub fn load_rules(text: &str) -> Result<RuleAssessmentSet, ModelError> {
    let rows = load_rule_rows(text)?;
    RuleAssessmentSet::new(rows.iter().map(|r| (r.id, r.codes)).collect())
}

pub fn load_dims(text: &str) -> Result<BTreeMap<ProductId, DesignParams>, ModelError> {
    Ok(load_rule_rows(text)?.into_iter().map(|r| (r.id, r.dims)).collect())
}

/// Writes `rules.csv` for the products present in both maps.
pub fn write_rules(dims: &BTreeMap<ProductId, DesignParams>, rules: &RuleAssessmentSet) -> String {
    let mut out = RULES_HEADER.join(",");
    out.push('\n');
    for (id, codes) in rules.iter() {
        let Some(d) = dims.get(&id) else { continue };
        out.push_str(&format!(
            "{id},{},{},{},{},{},{}\n",
            d.d1, d.d2, d.d3, codes[0], codes[1], codes[2]
        ));
    }
    out
}
