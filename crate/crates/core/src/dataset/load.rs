//! CSV ingestion: parse, infer types, and assemble a typed [`Dataset`].

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use super::infer::infer_column;
use super::{Cell, Column, Dataset, DatasetError, IngestConfig, TypeOverride, ValueType};

/// Load a delimited text file into a typed dataset.
///
/// Source tokens are never trimmed or case-folded; a token is missing only
/// when it exactly matches one of the configured missing tokens. Cells that
/// fail to parse as their column's declared type are kept verbatim as text
/// and counted as type violations. Non-finite real tokens (`inf`, `NaN` and
/// friends, when not already missing tokens) cannot be represented and
/// become missing, with a warning recorded on the dataset.
pub fn load_dataset(path: &Path, config: &IngestConfig) -> Result<Dataset, DatasetError> {
    config.validate()?;
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DatasetError::FileNotFound(path.display().to_string()),
        _ => DatasetError::Io(e),
    })?;

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(config.delimiter as u8)
        .has_headers(false)
        .flexible(false)
        .from_reader(BufReader::new(file));

    let mut records = Vec::new();
    for result in reader.records() {
        records.push(result.map_err(csv_error)?);
    }

    let mut records = records.into_iter().peekable();
    let names: Vec<String> = if config.has_header {
        match records.next() {
            Some(header) => header.iter().map(str::to_string).collect(),
            None => return Err(DatasetError::EmptyDataset),
        }
    } else {
        match records.peek() {
            Some(first) => (1..=first.len()).map(|i| format!("c{i}")).collect(),
            None => return Err(DatasetError::EmptyDataset),
        }
    };

    for name in config.roles.keys().chain(config.type_overrides.keys()) {
        if !names.iter().any(|n| n == name) {
            return Err(DatasetError::Config(format!(
                "override for unknown column: {name}"
            )));
        }
    }

    let mut raw: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    for record in records {
        for (i, field) in record.iter().enumerate() {
            raw[i].push(field.to_string());
        }
    }
    let row_count = raw.first().map_or(0, Vec::len);
    if row_count == 0 {
        return Err(DatasetError::EmptyDataset);
    }

    let mut columns = Vec::with_capacity(names.len());
    let mut warnings = Vec::new();
    for (name, tokens) in names.into_iter().zip(raw) {
        let non_missing: Vec<&str> = tokens
            .iter()
            .map(String::as_str)
            .filter(|t| !config.missing_tokens.contains(*t))
            .collect();
        let inferred = infer_column(&non_missing, row_count, config.type_dominance_threshold);
        let (value_type, force_categorical) = match config.type_overrides.get(&name) {
            Some(TypeOverride::Integer) => (ValueType::Integer, false),
            Some(TypeOverride::Real) => (ValueType::Real, false),
            Some(TypeOverride::Boolean) => (ValueType::Boolean, false),
            Some(TypeOverride::Text) => (ValueType::Text, false),
            Some(TypeOverride::Categorical) => (inferred.value_type, true),
            None => (inferred.value_type, false),
        };

        // Warnings cite 1-based source-file rows, counting the header line.
        let row_offset = if config.has_header { 2 } else { 1 };
        let mut cells = Vec::with_capacity(row_count);
        for (row, token) in tokens.iter().enumerate() {
            if config.missing_tokens.contains(token) {
                cells.push(Cell::Missing);
                continue;
            }
            cells.push(type_cell(token, value_type, &name, row + row_offset, &mut warnings));
        }

        let role = config.roles.get(&name).copied().unwrap_or_default();
        let mut column = Column::new(name, value_type, role, cells);
        if force_categorical {
            column = column.with_forced_categorical();
        }
        columns.push(column);
    }

    let mut dataset = Dataset::from_columns(
        columns,
        path.display().to_string(),
        config.version_label.clone(),
    )?;
    for w in warnings {
        dataset.push_warning(w);
    }
    Ok(dataset)
}

fn type_cell(
    token: &str,
    value_type: ValueType,
    column: &str,
    row: usize,
    warnings: &mut Vec<String>,
) -> Cell {
    match value_type {
        ValueType::Integer => match token.parse::<i64>() {
            Ok(v) => Cell::Int(v),
            Err(_) => Cell::Text(token.to_string()),
        },
        ValueType::Real => match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Real(v),
            Ok(_) => {
                warnings.push(format!(
                    "column {column}, row {row}: non-finite value {token:?} treated as missing"
                ));
                Cell::Missing
            }
            Err(_) => Cell::Text(token.to_string()),
        },
        ValueType::Boolean => {
            if token.eq_ignore_ascii_case("true") {
                Cell::Bool(true)
            } else if token.eq_ignore_ascii_case("false") {
                Cell::Bool(false)
            } else {
                Cell::Text(token.to_string())
            }
        }
        ValueType::Text => Cell::Text(token.to_string()),
    }
}

fn csv_error(err: csv::Error) -> DatasetError {
    let row = err
        .position()
        .map(csv::Position::line)
        .unwrap_or_default();
    match err.kind() {
        csv::ErrorKind::Io(_) => match err.into_kind() {
            csv::ErrorKind::Io(e) => DatasetError::Io(e),
            _ => unreachable!(),
        },
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => DatasetError::Parse {
            row,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        csv::ErrorKind::Utf8 { .. } => DatasetError::Parse {
            row,
            message: "invalid UTF-8".to_string(),
        },
        other => DatasetError::Parse {
            row,
            message: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{write_dataset, Role};
    use std::io::Write as _;

    fn write_tmp(content: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content).unwrap();
        f.flush().unwrap();
        f
    }

    fn load(content: &str, config: &IngestConfig) -> Result<Dataset, DatasetError> {
        let f = write_tmp(content.as_bytes());
        load_dataset(f.path(), config)
    }

    #[test]
    fn typed_ingestion_with_default_missing_tokens() {
        let ds = load(
            "age,height,active,city\n31,1.82,true,Paris\n?,1.65,false,Lyon\n44,NA,TRUE,\n",
            &IngestConfig::default(),
        )
        .unwrap();
        assert_eq!(ds.row_count(), 3);

        let age = ds.column("age").unwrap();
        assert_eq!(age.value_type, ValueType::Integer);
        assert_eq!(age.cells, vec![Cell::Int(31), Cell::Missing, Cell::Int(44)]);

        let height = ds.column("height").unwrap();
        assert_eq!(height.value_type, ValueType::Real);
        assert_eq!(
            height.cells,
            vec![Cell::Real(1.82), Cell::Real(1.65), Cell::Missing]
        );

        let active = ds.column("active").unwrap();
        assert_eq!(active.value_type, ValueType::Boolean);
        assert_eq!(
            active.cells,
            vec![Cell::Bool(true), Cell::Bool(false), Cell::Bool(true)]
        );

        let city = ds.column("city").unwrap();
        assert_eq!(city.value_type, ValueType::Text);
        assert_eq!(city.cells[2], Cell::Missing);
        assert!(city.categorical);
    }

    #[test]
    fn names_and_tokens_are_never_trimmed() {
        let ds = load(" a ,b\n x ,1\ny,2\n", &IngestConfig::default()).unwrap();
        let col = ds.column(" a ").unwrap();
        assert_eq!(col.cells[0], Cell::Text(" x ".into()));
    }

    #[test]
    fn quoted_fields_and_crlf_round_trip_to_canonical_form() {
        let ds = load("name,n\r\n\"x,y\",1\r\nplain,2\r\n", &IngestConfig::default()).unwrap();
        assert_eq!(ds.column("name").unwrap().cells[0], Cell::Text("x,y".into()));

        let out = tempfile::NamedTempFile::new().unwrap();
        write_dataset(&ds, out.path()).unwrap();
        let reloaded = load_dataset(out.path(), &IngestConfig::default()).unwrap();
        assert_eq!(reloaded.digest(), ds.digest());
        let bytes = std::fs::read(out.path()).unwrap();
        assert_eq!(bytes, b"name,n\n\"x,y\",1\nplain,2\n");
    }

    #[test]
    fn violating_cells_stay_verbatim_and_are_counted() {
        // 19 integers + one stray token: dominance 0.95 keeps the column integer.
        let mut body = String::from("v\n");
        for i in 0..19 {
            body.push_str(&i.to_string());
            body.push('\n');
        }
        body.push_str("oops\n");
        let ds = load(&body, &IngestConfig::default()).unwrap();
        let col = ds.column("v").unwrap();
        assert_eq!(col.value_type, ValueType::Integer);
        assert_eq!(col.type_violations, 1);
        assert_eq!(col.cells[19], Cell::Text("oops".into()));
    }

    #[test]
    fn non_finite_reals_become_missing_with_warning() {
        let mut config = IngestConfig::default();
        config
            .type_overrides
            .insert("x".to_string(), TypeOverride::Real);
        let ds = load("x\n1.5\ninf\n2.5\n", &config).unwrap();
        let col = ds.column("x").unwrap();
        assert_eq!(
            col.cells,
            vec![Cell::Real(1.5), Cell::Missing, Cell::Real(2.5)]
        );
        assert_eq!(col.type_violations, 0);
        assert_eq!(ds.ingest_warnings().len(), 1);
        assert!(ds.ingest_warnings()[0].contains("row 3"));
        assert!(ds.ingest_warnings()[0].contains("non-finite"));
    }

    #[test]
    fn categorical_override_forces_the_tag() {
        let mut body = String::from("id\n");
        for i in 0..100 {
            body.push_str(&i.to_string());
            body.push('\n');
        }
        let plain = load(&body, &IngestConfig::default()).unwrap();
        assert!(!plain.column("id").unwrap().categorical);

        let mut config = IngestConfig::default();
        config
            .type_overrides
            .insert("id".to_string(), TypeOverride::Categorical);
        let forced = load(&body, &config).unwrap();
        let col = forced.column("id").unwrap();
        assert!(col.categorical);
        assert_eq!(col.value_type, ValueType::Integer);
    }

    #[test]
    fn roles_come_from_config_and_are_validated() {
        let mut config = IngestConfig::default();
        config.roles.insert("label".to_string(), Role::Target);
        let ds = load("label,x\nyes,1\nno,2\nyes,3\n", &config).unwrap();
        assert_eq!(ds.column("label").unwrap().role, Role::Target);
        assert_eq!(ds.target_column().unwrap().name, "label");

        // A continuous column cannot be a target.
        let mut config = IngestConfig::default();
        config.roles.insert("x".to_string(), Role::Target);
        let mut body = String::from("x,y\n");
        for i in 0..500 {
            body.push_str(&format!("{i}.5,{i}\n"));
        }
        let err = load(&body, &config).unwrap_err();
        assert!(matches!(err, DatasetError::RoleConstraint { .. }));
    }

    #[test]
    fn override_for_unknown_column_is_a_config_error() {
        let mut config = IngestConfig::default();
        config.roles.insert("nope".to_string(), Role::Target);
        let err = load("a\n1\n", &config).unwrap_err();
        assert!(matches!(err, DatasetError::Config(_)));
    }

    #[test]
    fn structural_errors() {
        let err = load("a,b\n", &IngestConfig::default()).unwrap_err();
        assert!(matches!(err, DatasetError::EmptyDataset));

        let err = load("a,a\n1,2\n", &IngestConfig::default()).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateColumnName(_)));

        let err = load("a,b\n1,2\n3\n", &IngestConfig::default()).unwrap_err();
        match err {
            DatasetError::Parse { row, .. } => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }

        let err = load_dataset(Path::new("/no/such/file.csv"), &IngestConfig::default())
            .unwrap_err();
        assert!(matches!(err, DatasetError::FileNotFound(_)));
    }

    #[test]
    fn headerless_input_synthesizes_column_names() {
        let mut config = IngestConfig::default();
        config.has_header = false;
        let ds = load("1,a\n2,b\n", &config).unwrap();
        assert_eq!(ds.column_count(), 2);
        assert!(ds.column("c1").is_some());
        assert!(ds.column("c2").is_some());
        assert_eq!(ds.row_count(), 2);
    }

    #[test]
    fn semicolon_delimiter() {
        let mut config = IngestConfig::default();
        config.delimiter = ';';
        let ds = load("a;b\n1;x\n2;y\n", &config).unwrap();
        assert_eq!(ds.column("a").unwrap().value_type, ValueType::Integer);
        assert_eq!(ds.column("b").unwrap().cells[1], Cell::Text("y".into()));
    }
}
