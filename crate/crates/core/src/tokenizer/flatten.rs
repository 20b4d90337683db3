//! Payloads as strings of digit symbols, optionally with a `,` after each row.

use super::TokenizerError;
use crate::problems::GraphBits;

pub const DELIMITER: char = ',';

/// Writes each payload entry as a digit, and a delimiter after every row when
/// `rows` is given.
pub fn flatten_rows(payload: &[u8], rows: Option<&[usize]>) -> String {
    let mut out = String::with_capacity(payload.len() + rows.map_or(0, <[usize]>::len));
    match rows {
        None => out.extend(payload.iter().map(|&v| char::from(b'0' + v))),
        Some(rows) => {
            let mut rest = payload;
            for &len in rows {
                let (row, tail) = rest.split_at(len);
                out.extend(row.iter().map(|&v| char::from(b'0' + v)));
                out.push(DELIMITER);
                rest = tail;
            }
            debug_assert!(rest.is_empty());
        }
    }
    out
}

/// Inverse of [`flatten_rows`]. Digits must be below `alphabet`; with rows,
/// every row must have its declared length and end with a delimiter.
pub fn unflatten_rows(s: &str, len: usize, rows: Option<&[usize]>, alphabet: u8) -> Result<Vec<u8>, TokenizerError> {
    let digit = |c: char| -> Result<u8, TokenizerError> {
        match c.to_digit(10) {
            Some(d) if (d as u8) < alphabet => Ok(d as u8),
            _ => Err(TokenizerError::UnknownSymbol(c)),
        }
    };
    let payload = match rows {
        None => s.chars().map(digit).collect::<Result<Vec<u8>, _>>()?,
        Some(rows) => {
            let body = s
                .strip_suffix(DELIMITER)
                .ok_or_else(|| TokenizerError::RowStructure("missing final delimiter".into()))?;
            let parts: Vec<&str> = body.split(DELIMITER).collect();
            if parts.len() != rows.len() {
                return Err(TokenizerError::RowStructure(format!(
                    "{} rows, expected {}",
                    parts.len(),
                    rows.len()
                )));
            }
            let mut payload = Vec::with_capacity(len);
            for (i, (part, &want)) in parts.iter().zip(rows).enumerate() {
                if part.chars().count() != want {
                    return Err(TokenizerError::RowStructure(format!(
                        "row {i} has {} entries, expected {want}",
                        part.chars().count()
                    )));
                }
                for c in part.chars() {
                    payload.push(digit(c)?);
                }
            }
            payload
        }
    };
    if payload.len() != len {
        return Err(TokenizerError::Length {
            expected: len,
            got: payload.len(),
        });
    }
    Ok(payload)
}

fn graph_rows(n: usize) -> Vec<usize> {
    (1..n).rev().collect()
}

/// Row-major upper triangle; with delimiters, a `,` closes each of the `n - 1` rows.
pub fn flatten_graph(g: &GraphBits, delimiters: bool) -> String {
    let rows = graph_rows(g.n());
    flatten_rows(g.bits(), delimiters.then_some(rows.as_slice()))
}

pub fn unflatten_graph(n: usize, s: &str, delimiters: bool) -> Result<GraphBits, TokenizerError> {
    let rows = graph_rows(n);
    let bits = unflatten_rows(s, n * (n - 1) / 2, delimiters.then_some(rows.as_slice()), 2)?;
    Ok(GraphBits::from_bits(n, bits).expect("length and alphabet already checked"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_vertex_example() {
        let g = GraphBits::from_edges(4, &[(0, 2), (1, 3)]);
        assert_eq!(flatten_graph(&g, false), "010010");
        assert_eq!(flatten_graph(&g, true), "010,01,0,");
        assert_eq!(unflatten_graph(4, "010,01,0,", true).unwrap(), g);
        assert_eq!(unflatten_graph(4, "010010", false).unwrap(), g);
    }

    #[test]
    fn empty_graph() {
        let s = flatten_graph(&GraphBits::empty(20), false);
        assert_eq!(s.len(), 190);
        assert!(s.chars().all(|c| c == '0'));
        let d = flatten_graph(&GraphBits::empty(20), true);
        assert_eq!(d.matches(',').count(), 19);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        assert!(unflatten_graph(4, "01,001,0,", true).is_err());
        assert!(unflatten_graph(4, "010,01,0", true).is_err());
        assert!(unflatten_graph(4, "010,01,", true).is_err());
        assert!(unflatten_graph(4, "01001", false).is_err());
        assert!(unflatten_graph(4, "010012", false).is_err());
    }
}
