//! The canonical MSP file format.
//!
//! Line-oriented, `#` starts a comment anywhere, blank lines ignored:
//!
//! ```text
//! MSP v1
//! field <q>
//! players <n>
//! dims <d> <l>
//! labels <p_1> ... <p_d>
//! row <a_1> ... <a_l>      # repeated d times
//! ```
//!
//! [`serialize_msp`] emits the canonical form — single spaces, no
//! trailing whitespace, one trailing newline — and [`parse_msp`] is its
//! exact inverse on that form while accepting arbitrary inter-token
//! whitespace, comments, and blank lines.

use thiserror::Error;

use crate::gf::PrimeField;
use crate::linalg::Matrix;
use crate::msp::Msp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    SyntaxError { line: usize, msg: String },
    #[error("labels are not surjective: missing players {missing:?}")]
    NonSurjectiveLabels { missing: Vec<usize> },
    #[error("line {line}: entry {value} is out of range for field modulus {q}")]
    EntryOutOfRange { line: usize, value: u64, q: u64 },
    #[error("bad field modulus {0}: must be a prime below 2^31")]
    BadModulus(u64),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::SyntaxError {
        line,
        msg: msg.into(),
    }
}

/// Emits the canonical text form of a scheme.
pub fn serialize_msp(scheme: &Msp) -> String {
    let mut lines = Vec::with_capacity(5 + scheme.rows());
    lines.push("MSP v1".to_string());
    lines.push(format!("field {}", scheme.field().modulus()));
    lines.push(format!("players {}", scheme.players()));
    lines.push(format!("dims {} {}", scheme.rows(), scheme.cols()));
    let labels: Vec<String> = scheme.labels().iter().map(|p| p.to_string()).collect();
    lines.push(format!("labels {}", labels.join(" ")));
    for r in 0..scheme.rows() {
        let row: Vec<String> = scheme.matrix().row(r).iter().map(|v| v.to_string()).collect();
        lines.push(format!("row {}", row.join(" ")));
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

/// One semantic statement: its 1-based source line and its tokens.
struct Statement<'a> {
    line: usize,
    tokens: Vec<&'a str>,
}

fn statements(text: &str) -> Vec<Statement<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if tokens.is_empty() {
                None
            } else {
                Some(Statement {
                    line: i + 1,
                    tokens,
                })
            }
        })
        .collect()
}

fn parse_number<T: std::str::FromStr>(
    token: &str,
    line: usize,
    what: &str,
) -> Result<T, FormatError> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("expected {what}, got `{token}`")))
}

/// Parses the canonical MSP text form.
pub fn parse_msp(text: &str) -> Result<Msp, FormatError> {
    let stmts = statements(text);
    let mut iter = stmts.iter();
    let mut next = |what: &str| {
        iter.next()
            .ok_or_else(|| syntax(text.lines().count() + 1, format!("missing {what}")))
    };

    let header = next("`MSP v1` header")?;
    if header.tokens != ["MSP", "v1"] {
        return Err(syntax(header.line, "expected `MSP v1` header"));
    }

    let field_stmt = next("`field <q>` statement")?;
    if field_stmt.tokens.len() != 2 || field_stmt.tokens[0] != "field" {
        return Err(syntax(field_stmt.line, "expected `field <q>`"));
    }
    let q: u64 = parse_number(field_stmt.tokens[1], field_stmt.line, "a field modulus")?;
    let field = PrimeField::new(q).map_err(|_| FormatError::BadModulus(q))?;

    let players_stmt = next("`players <n>` statement")?;
    if players_stmt.tokens.len() != 2 || players_stmt.tokens[0] != "players" {
        return Err(syntax(players_stmt.line, "expected `players <n>`"));
    }
    let n: usize = parse_number(players_stmt.tokens[1], players_stmt.line, "a player count")?;
    if n == 0 {
        return Err(syntax(players_stmt.line, "player count must be positive"));
    }

    let dims_stmt = next("`dims <d> <l>` statement")?;
    if dims_stmt.tokens.len() != 3 || dims_stmt.tokens[0] != "dims" {
        return Err(syntax(dims_stmt.line, "expected `dims <d> <l>`"));
    }
    let d: usize = parse_number(dims_stmt.tokens[1], dims_stmt.line, "a row count")?;
    let l: usize = parse_number(dims_stmt.tokens[2], dims_stmt.line, "a column count")?;
    if d == 0 || l == 0 {
        return Err(syntax(dims_stmt.line, "dimensions must be positive"));
    }

    let labels_stmt = next("`labels …` statement")?;
    if labels_stmt.tokens.first() != Some(&"labels") {
        return Err(syntax(labels_stmt.line, "expected `labels <p_1> … <p_d>`"));
    }
    if labels_stmt.tokens.len() != d + 1 {
        return Err(syntax(
            labels_stmt.line,
            format!("expected {d} labels, got {}", labels_stmt.tokens.len() - 1),
        ));
    }
    let mut labels = Vec::with_capacity(d);
    for token in &labels_stmt.tokens[1..] {
        let p: usize = parse_number(token, labels_stmt.line, "a player label")?;
        if p == 0 || p > n {
            return Err(syntax(
                labels_stmt.line,
                format!("label {p} out of range 1..{n}"),
            ));
        }
        labels.push(p);
    }
    let mut seen = vec![false; n];
    for &p in &labels {
        seen[p - 1] = true;
    }
    let missing: Vec<usize> = (1..=n).filter(|&p| !seen[p - 1]).collect();
    if !missing.is_empty() {
        return Err(FormatError::NonSurjectiveLabels { missing });
    }

    let mut rows = Vec::with_capacity(d);
    for _ in 0..d {
        let row_stmt = next("`row …` statement")?;
        if row_stmt.tokens.first() != Some(&"row") {
            return Err(syntax(row_stmt.line, "expected `row <a_1> … <a_l>`"));
        }
        if row_stmt.tokens.len() != l + 1 {
            return Err(syntax(
                row_stmt.line,
                format!("expected {l} entries, got {}", row_stmt.tokens.len() - 1),
            ));
        }
        let mut row = Vec::with_capacity(l);
        for token in &row_stmt.tokens[1..] {
            let value: u64 = parse_number(token, row_stmt.line, "a field element")?;
            if value >= q {
                return Err(FormatError::EntryOutOfRange {
                    line: row_stmt.line,
                    value,
                    q,
                });
            }
            row.push(value);
        }
        rows.push(row);
    }

    if let Some(extra) = iter.next() {
        return Err(syntax(extra.line, "unexpected content after last row"));
    }

    Msp::new(Matrix::from_rows(field, &rows), labels)
        .map_err(|e| syntax(0, format!("inconsistent scheme: {e}")))
}
