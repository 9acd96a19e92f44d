//! Canonical serialization: one byte form per dataset value, so equal
//! content always yields equal digests.
//!
//! Rules: UTF-8, `,` delimiter, LF line endings, trailing newline, header
//! row first. Fields are quoted only when they contain a delimiter, quote,
//! or line break; quotes are doubled inside quoted fields. Missing cells
//! serialize as the empty field, booleans as `true`/`false`, integers in
//! base 10, and reals in shortest round-trip form.

use std::borrow::Cow;
use std::path::Path;

use sha2::{Digest as _, Sha256};

use super::{Cell, Dataset, DatasetError, Digest};

/// The canonical token for a cell. Real values use Rust's shortest
/// round-trip formatting, which keeps a decimal point for integral values
/// (`2.0`) and switches to exponent notation for extremes (`1e300`), so a
/// real column stays real across a write/load round trip.
pub fn cell_token(cell: &Cell) -> Cow<'_, str> {
    match cell {
        Cell::Missing => Cow::Borrowed(""),
        Cell::Int(v) => Cow::Owned(v.to_string()),
        Cell::Real(v) => Cow::Owned(format!("{v:?}")),
        Cell::Bool(true) => Cow::Borrowed("true"),
        Cell::Bool(false) => Cow::Borrowed("false"),
        Cell::Text(s) => Cow::Borrowed(s),
    }
}

fn push_field(out: &mut Vec<u8>, field: &str) {
    let needs_quoting = field.contains([',', '"', '\n', '\r']);
    if needs_quoting {
        out.push(b'"');
        for b in field.bytes() {
            if b == b'"' {
                out.push(b'"');
            }
            out.push(b);
        }
        out.push(b'"');
    } else {
        out.extend_from_slice(field.as_bytes());
    }
}

fn push_row<'a>(out: &mut Vec<u8>, fields: impl Iterator<Item = Cow<'a, str>>) {
    for (i, field) in fields.enumerate() {
        if i > 0 {
            out.push(b',');
        }
        push_field(out, &field);
    }
    out.push(b'\n');
}

/// The full canonical byte form of a dataset.
pub fn canonical_bytes(dataset: &Dataset) -> Vec<u8> {
    let cols = dataset.columns();
    // Rough preallocation: 8 bytes per cell plus the header.
    let mut out = Vec::with_capacity(8 * cols.len() * (dataset.row_count() + 1));
    push_row(&mut out, cols.iter().map(|c| Cow::Borrowed(c.name.as_str())));
    for row in 0..dataset.row_count() {
        push_row(&mut out, cols.iter().map(|c| cell_token(&c.cells[row])));
    }
    out
}

/// SHA-256 over [`canonical_bytes`].
pub fn canonical_hash(dataset: &Dataset) -> Digest {
    let digest = Sha256::digest(canonical_bytes(dataset));
    Digest(digest.into())
}

/// Write the canonical byte form to `path`, replacing any existing file.
pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    std::fs::write(path, canonical_bytes(dataset))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, Role, ValueType};

    #[test]
    fn cell_tokens_are_canonical() {
        assert_eq!(cell_token(&Cell::Missing), "");
        assert_eq!(cell_token(&Cell::Int(-42)), "-42");
        assert_eq!(cell_token(&Cell::Bool(true)), "true");
        assert_eq!(cell_token(&Cell::Bool(false)), "false");
        assert_eq!(cell_token(&Cell::Real(2.0)), "2.0");
        assert_eq!(cell_token(&Cell::Real(0.1)), "0.1");
        assert_eq!(cell_token(&Cell::Real(1e300)), "1e300");
        assert_eq!(cell_token(&Cell::Real(1.5e-9)), "1.5e-9");
        assert_eq!(cell_token(&Cell::Text("plain".into())), "plain");
    }

    #[test]
    fn quoting_applies_only_when_needed() {
        let mut out = Vec::new();
        push_field(&mut out, "plain text");
        assert_eq!(out, b"plain text");

        let mut out = Vec::new();
        push_field(&mut out, "a,b");
        assert_eq!(out, b"\"a,b\"");

        let mut out = Vec::new();
        push_field(&mut out, "say \"hi\"");
        assert_eq!(out, b"\"say \"\"hi\"\"\"");

        let mut out = Vec::new();
        push_field(&mut out, "line\nbreak");
        assert_eq!(out, b"\"line\nbreak\"");
    }

    #[test]
    fn canonical_bytes_and_digest_match_frozen_form() {
        let x = Column::new(
            "x",
            ValueType::Integer,
            Role::Feature,
            vec![Cell::Int(1), Cell::Missing, Cell::Int(3)],
        );
        let name = Column::new(
            "name",
            ValueType::Text,
            Role::Feature,
            vec![
                Cell::Text("a".into()),
                Cell::Text("b,c".into()),
                Cell::Text("d".into()),
            ],
        );
        let ds = Dataset::from_columns(vec![x, name], "mem", "baseline").unwrap();
        assert_eq!(canonical_bytes(&ds), b"x,name\n1,a\n,\"b,c\"\n3,d\n");
        assert_eq!(
            ds.digest().to_hex(),
            "97a04884f1aa98336b08a40a812094b5dd80cda2e13521f738c0aebd444ccaa2"
        );
    }
}
