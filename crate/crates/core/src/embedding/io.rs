//! Text embedding format.
//!
//! ```text
//! <vocab_size> <dim>
//! <surface> <v_1> ... <v_dim> <src_count> <tgt_count>
//! ```
//!
//! Floats are written in shortest round-trip form, so save followed by load
//! reproduces every vector exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::EmbeddingTable;
use crate::corpus::write_atomic;
use crate::{Error, Result};

pub fn write_table(table: &EmbeddingTable, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{} {}", table.len(), table.dim())?;
    let mut line = String::new();
    for id in 0..table.len() {
        line.clear();
        line.push_str(table.surface(id));
        for v in table.vector(id) {
            write!(line, " {v}").expect("writing to a String");
        }
        let (s, t) = table.provenance(id);
        writeln!(out, "{line} {s} {t}")?;
    }
    Ok(())
}

pub fn save_table(table: &EmbeddingTable, path: &Path) -> Result<()> {
    write_atomic(path, |w| write_table(table, w))
}

/// Parses the text format. `origin` labels error messages.
pub fn read_table<R: Read>(reader: R, origin: &Path) -> Result<EmbeddingTable> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let encoding = |line| Error::Encoding {
        path: origin.to_path_buf(),
        line,
    };
    let header = match lines.next() {
        Some((_, l)) => l.map_err(|_| encoding(1))?,
        None => return Err(Error::format(origin, 1, "missing header")),
    };
    let parts: Vec<&str> = header.split_whitespace().collect();
    let (size, dim) = match parts.as_slice() {
        [a, b] => match (a.parse::<usize>(), b.parse::<usize>()) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Err(Error::format(origin, 1, format!("malformed header {header:?}"))),
        },
        _ => return Err(Error::format(origin, 1, format!("malformed header {header:?}"))),
    };
    let mut table = EmbeddingTable::new(dim);
    let mut vector = Vec::with_capacity(dim);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|_| encoding(lineno))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != dim + 3 {
            return Err(Error::format(
                origin,
                lineno,
                format!("expected {} fields, found {}", dim + 3, fields.len()),
            ));
        }
        if table.len() == size {
            return Err(Error::format(origin, lineno, format!("more rows than the {size} declared")));
        }
        vector.clear();
        for f in &fields[1..=dim] {
            let v = f
                .parse::<f32>()
                .map_err(|_| Error::format(origin, lineno, format!("bad float {f:?}")))?;
            vector.push(v);
        }
        let count = |f: &str| {
            f.parse::<u64>()
                .map_err(|_| Error::format(origin, lineno, format!("bad count {f:?}")))
        };
        let (src, tgt) = (count(fields[dim + 1])?, count(fields[dim + 2])?);
        table
            .push(fields[0], &vector, src, tgt)
            .map_err(|e| Error::format(origin, lineno, e.to_string()))?;
    }
    if table.len() != size {
        return Err(Error::format(
            origin,
            table.len() + 2,
            format!("header declares {size} rows, found {}", table.len()),
        ));
    }
    Ok(table)
}

pub fn load_table(path: &Path) -> Result<EmbeddingTable> {
    let file = fs::File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    read_table(file, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn parse(text: &str) -> Result<EmbeddingTable> {
        read_table(text.as_bytes(), &PathBuf::from("mem"))
    }

    #[test]
    fn round_trip_is_exact() {
        let mut t = EmbeddingTable::new(3);
        t.push("I've_never", &[0.1, -2.5e-7, 3.0], 4, 0).unwrap();
        t.push("nah", &[f32::MIN_POSITIVE, 1.0 / 3.0, -0.0], 0, 9).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), t);
    }

    #[test]
    fn row_count_must_match_header() {
        let err = parse("3 4\na 1 2 3 4 0 1\nb 1 2 3 4 1 0\n").unwrap_err();
        assert!(matches!(err, Error::Format { .. }), "{err}");
    }

    #[test]
    fn arity_error_cites_line() {
        match parse("2 2\na 1 2 0 1\nb 1 0 1\n") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("two 2\n").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn empty_table() {
        let t = EmbeddingTable::new(5);
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        assert_eq!(buf, b"0 5\n");
        assert_eq!(parse("0 5\n").unwrap().dim(), 5);
    }
}
