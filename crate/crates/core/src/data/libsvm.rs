//! LIBSVM / SVMlight sparse text format.
//!
//! Each nonempty line is `label idx:value idx:value ...` with 1-based,
//! strictly increasing indices. Text after `#` is ignored. Two label symbols
//! are mapped to -1 (smaller) and +1 (larger), numerically when both parse as
//! numbers and lexicographically otherwise.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::data::dataset::{Dataset, LabelSymbols, SparseRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Symbol {
    text: String,
    numeric: Option<f64>,
}

impl Symbol {
    fn parse(text: &str) -> Self {
        Symbol {
            text: text.to_string(),
            numeric: text.parse::<f64>().ok().filter(|v| v.is_finite()),
        }
    }

    fn same_as(&self, other: &Symbol) -> bool {
        match (self.numeric, other.numeric) {
            (Some(a), Some(b)) => a == b,
            _ => self.text == other.text,
        }
    }

    fn cmp(&self, other: &Symbol) -> Ordering {
        match (self.numeric, other.numeric) {
            (Some(a), Some(b)) => a.total_cmp(&b),
            _ => self.text.cmp(&other.text),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse_libsvm<R: Read>(reader: R) -> Result<Dataset> {
    parse_libsvm_with(reader, None)
}

/// Parses with an optional fixed column count. Without one, `n_cols` is the
/// largest index seen.
pub fn parse_libsvm_with<R: Read>(reader: R, n_cols: Option<usize>) -> Result<Dataset> {
    let reader = BufReader::new(reader);
    let mut rows = Vec::new();
    let mut raw_labels: Vec<usize> = Vec::new();
    let mut symbols: Vec<Symbol> = Vec::new();
    let mut max_index = 0usize;

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| parse_err(lineno, format!("unreadable line: {e}")))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_text = tokens.next().expect("nonempty content has a token");
        if label_text.contains(':') {
            return Err(parse_err(lineno, format!("missing label before '{label_text}'")));
        }
        let sym = Symbol::parse(label_text);
        let class = match symbols.iter().position(|s| s.same_as(&sym)) {
            Some(c) => c,
            None if symbols.len() == 2 => {
                return Err(parse_err(
                    lineno,
                    format!(
                        "third distinct label '{label_text}' (already saw '{}' and '{}')",
                        symbols[0].text, symbols[1].text
                    ),
                ));
            }
            None => {
                symbols.push(sym);
                symbols.len() - 1
            }
        };

        let mut indices = Vec::new();
        let mut values = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("malformed token '{tok}'")))?;
            let idx: u32 = idx
                .parse()
                .ok()
                .filter(|&j| j > 0)
                .ok_or_else(|| parse_err(lineno, format!("bad feature index in '{tok}'")))?;
            let val: f64 = val
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(lineno, format!("non-numeric value in '{tok}'")))?;
            if indices.last().is_some_and(|&last| idx <= last) {
                return Err(parse_err(
                    lineno,
                    format!("feature index {idx} does not increase"),
                ));
            }
            indices.push(idx);
            values.push(val);
        }
        max_index = max_index.max(indices.last().copied().unwrap_or(0) as usize);
        rows.push(SparseRow::new(indices, values).map_err(|e| parse_err(lineno, e.to_string()))?);
        raw_labels.push(class);
    }

    let n_cols = match n_cols {
        Some(n) if n < max_index => {
            return Err(Error::Parse {
                line: 0,
                message: format!("feature index {max_index} exceeds declared n_cols = {n}"),
            });
        }
        Some(n) => n,
        None => max_index,
    };

    // class position -> ±1
    let (map, label_symbols) = match symbols.as_slice() {
        [] => (vec![], LabelSymbols::default()),
        [only] => {
            let positive = only.numeric.is_none_or(|v| v > 0.0);
            let mut ls = LabelSymbols::default();
            if positive {
                ls.positive = Some(only.text.clone());
            } else {
                ls.negative = Some(only.text.clone());
            }
            (vec![if positive { 1i8 } else { -1 }], ls)
        }
        [a, b] => {
            let a_neg = a.cmp(b) == Ordering::Less;
            let (neg, pos) = if a_neg { (a, b) } else { (b, a) };
            (
                if a_neg { vec![-1, 1] } else { vec![1, -1] },
                LabelSymbols {
                    negative: Some(neg.text.clone()),
                    positive: Some(pos.text.clone()),
                },
            )
        }
        _ => unreachable!("at most two label symbols are admitted"),
    };
    let labels = raw_labels.into_iter().map(|c| map[c]).collect();
    Dataset::with_symbols(n_cols, rows, labels, label_symbols)
}

/// Writes rows using the original label symbols; reparsing yields an equal
/// dataset.
pub fn write_libsvm<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    let symbols = dataset.symbols();
    for (row, &label) in dataset.rows().iter().zip(dataset.labels()) {
        let sym = if label > 0 {
            symbols.positive.as_deref().unwrap_or("+1")
        } else {
            symbols.negative.as_deref().unwrap_or("-1")
        };
        write!(out, "{sym}")?;
        for (j, v) in row.indices().iter().zip(row.values()) {
            write!(out, " {j}:{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn to_libsvm_string(dataset: &Dataset) -> String {
    let mut buf = Vec::new();
    write_libsvm(dataset, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("LIBSVM output is UTF-8")
}

/// Loads a LIBSVM file, decompressing when the name ends in `.gz`.
pub fn load_libsvm(path: &Path) -> Result<Dataset> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        parse_libsvm(GzDecoder::new(file))
    } else {
        parse_libsvm(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_format() {
        let d = parse_libsvm("+1 1:0.5 3:2.0\n-1 2:1.0".as_bytes()).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.n_cols(), 3);
        assert_eq!(d.labels(), &[1, -1]);
        assert_eq!(d.row(0).values(), &[0.5, 2.0]);
    }

    #[test]
    fn zero_one_labels_map_smaller_to_negative() {
        let d = parse_libsvm("0 1:1\n1 2:1".as_bytes()).unwrap();
        assert_eq!(d.labels(), &[-1, 1]);
        assert_eq!(d.symbols().negative.as_deref(), Some("0"));
        assert_eq!(d.symbols().positive.as_deref(), Some("1"));
    }

    #[test]
    fn numeric_order_beats_text_order() {
        // "10" < "9" lexicographically, but 9 < 10 numerically.
        let d = parse_libsvm("10 1:1\n9 1:2".as_bytes()).unwrap();
        assert_eq!(d.labels(), &[1, -1]);
        let d = parse_libsvm("pos 1:1\nneg 1:2".as_bytes()).unwrap();
        assert_eq!(d.labels(), &[1, -1]);
    }

    #[test]
    fn blank_lines_and_comments_skipped() {
        let d = parse_libsvm("+1 1:1\n\n   \n# header\n-1 2:1 # trailing\n".as_bytes()).unwrap();
        assert_eq!(d.n_rows(), 2);
    }

    #[test]
    fn empty_feature_rows() {
        let d = parse_libsvm("+1\n-1 4:2\n".as_bytes()).unwrap();
        assert_eq!(d.row(0).nnz(), 0);
        assert_eq!(d.n_cols(), 4);
    }

    #[test]
    fn equivalent_numeric_spellings_are_one_label() {
        let d = parse_libsvm("+1 1:1\n1 1:2\n-1 1:3".as_bytes()).unwrap();
        assert_eq!(d.labels(), &[1, 1, -1]);
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse_libsvm("+1 1:1\n-1 2-1".as_bytes()).unwrap_err()), 2);
        assert_eq!(line_of(parse_libsvm("+1 1:abc".as_bytes()).unwrap_err()), 1);
        assert_eq!(line_of(parse_libsvm("+1 1:nan".as_bytes()).unwrap_err()), 1);
        assert_eq!(line_of(parse_libsvm("+1 3:1 2:1".as_bytes()).unwrap_err()), 1);
        assert_eq!(line_of(parse_libsvm("+1 2:1 2:1".as_bytes()).unwrap_err()), 1);
        assert_eq!(line_of(parse_libsvm("+1 0:1".as_bytes()).unwrap_err()), 1);
        assert_eq!(line_of(parse_libsvm("1 1:1\n2 1:1\n\n3 1:1".as_bytes()).unwrap_err()), 4);
        assert_eq!(line_of(parse_libsvm("1:1 2:1".as_bytes()).unwrap_err()), 1);
    }

    #[test]
    fn declared_column_count() {
        let d = parse_libsvm_with("+1 2:1".as_bytes(), Some(5)).unwrap();
        assert_eq!(d.n_cols(), 5);
        assert!(parse_libsvm_with("+1 6:1".as_bytes(), Some(5)).is_err());
    }

    #[test]
    fn single_class_sign() {
        assert_eq!(parse_libsvm("-1 1:1".as_bytes()).unwrap().labels(), &[-1]);
        assert_eq!(parse_libsvm("0 1:1".as_bytes()).unwrap().labels(), &[-1]);
        assert_eq!(parse_libsvm("+1 1:1".as_bytes()).unwrap().labels(), &[1]);
    }
}
