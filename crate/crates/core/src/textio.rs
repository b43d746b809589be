//! Plain-text matrix format shared by every CLI command.
//!
//! ```text
//! 2 2
//! 3:0 1:0
//! 4:0 2:0
//! ```
//!
//! The first line holds `rows cols`, then one line per row with `cols`
//! whitespace-separated `re:im` tokens. A bare `re` token is read as a real
//! number. Vectors are `m x 1` matrices. Blank lines and lines starting with
//! `#` are ignored when parsing.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ComplexVector, C64};

/// Formats `x` with 15 significant digits, dropping trailing zeros.
///
/// Short enough to read (`0.16` rather than `0.15999999999999998`) while
/// round-tripping to within one part in 1e15.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.14e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mant.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".to_string()
    } else {
        t.to_string()
    }
}

pub fn fmt_complex(z: C64) -> String {
    format!("{}:{}", fmt_real(z.re), fmt_real(z.im))
}

fn parse_token(tok: &str, line: usize) -> Result<C64> {
    let bad = |msg: String| Error::Parse { line, msg };
    let (re, im) = match tok.split_once(':') {
        Some((re, im)) => (re, im),
        None => (tok, "0"),
    };
    let re: f64 = re
        .parse()
        .map_err(|_| bad(format!("invalid real part in `{tok}`")))?;
    let im: f64 = im
        .parse()
        .map_err(|_| bad(format!("invalid imaginary part in `{tok}`")))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad(format!("non-finite entry `{tok}`")));
    }
    Ok(C64::new(re, im))
}

/// Lines that carry content, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses one matrix from an iterator of content lines.
fn parse_matrix_lines<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<ComplexMatrix> {
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing `rows cols` header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| -> Result<usize> {
        s.parse::<usize>().map_err(|_| Error::Parse {
            line: hline,
            msg: format!("invalid dimension `{s}`"),
        })
    };
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            msg: format!("expected `rows cols`, got `{header}`"),
        });
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            line: hline,
            msg: "dimensions must be positive".into(),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let (ln, row) = lines.next().ok_or(Error::Parse {
            line: hline,
            msg: format!("expected {rows} rows, found {r}"),
        })?;
        let toks: Vec<&str> = row.split_whitespace().collect();
        if toks.len() != cols {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {cols} entries, found {}", toks.len()),
            });
        }
        for tok in toks {
            data.push(parse_token(tok, ln)?);
        }
    }
    ComplexMatrix::new(rows, cols, data)
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut lines = content_lines(text);
    let m = parse_matrix_lines(&mut lines)?;
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse {
            line: ln,
            msg: "trailing content after matrix".into(),
        });
    }
    Ok(m)
}

pub fn parse_vector(text: &str) -> Result<ComplexVector> {
    parse_matrix(text)?.to_vector()
}

pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&z| fmt_complex(z)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_vector(v: &ComplexVector) -> String {
    format_matrix(&v.to_column())
}

/// A real vector written as an `n x 1` matrix with zero imaginary parts.
pub fn format_real_vector(v: &[f64]) -> String {
    let mut out = format!("{} 1\n", v.len());
    for &x in v {
        let _ = writeln!(out, "{}:0", fmt_real(x));
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<ComplexVector> {
    parse_vector(&std::fs::read_to_string(path)?)
}

/// A document made of named sections: a line `@name` followed either by a
/// matrix in the text format or by a single line of scalar values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SectionDoc {
    pub sections: Vec<(String, Section)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Section {
    Matrix(ComplexMatrix),
    Values(String),
}

impl SectionDoc {
    pub fn push_matrix(&mut self, name: &str, m: ComplexMatrix) {
        self.sections.push((name.to_string(), Section::Matrix(m)));
    }

    pub fn push_values(&mut self, name: &str, v: impl Into<String>) {
        self.sections
            .push((name.to_string(), Section::Values(v.into())));
    }

    fn find(&self, name: &str) -> Result<&Section> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("missing section @{name}"),
            })
    }

    pub fn matrix(&self, name: &str) -> Result<&ComplexMatrix> {
        match self.find(name)? {
            Section::Matrix(m) => Ok(m),
            Section::Values(_) => Err(Error::Parse {
                line: 0,
                msg: format!("section @{name} is not a matrix"),
            }),
        }
    }

    pub fn values(&self, name: &str) -> Result<&str> {
        match self.find(name)? {
            Section::Values(v) => Ok(v),
            Section::Matrix(_) => Err(Error::Parse {
                line: 0,
                msg: format!("section @{name} is not a value line"),
            }),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = SectionDoc::default();
        let mut lines = content_lines(text).peekable();
        while let Some((ln, line)) = lines.next() {
            let rest = line.strip_prefix('@').ok_or(Error::Parse {
                line: ln,
                msg: format!("expected a `@section` line, got `{line}`"),
            })?;
            let (name, inline) = match rest.split_once(char::is_whitespace) {
                Some((n, v)) => (n, Some(v.trim())),
                None => (rest, None),
            };
            match inline {
                Some(v) => doc.push_values(name, v),
                None => {
                    let m = parse_matrix_lines(&mut lines)?;
                    doc.push_matrix(name, m);
                }
            }
        }
        Ok(doc)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, sec) in &self.sections {
            match sec {
                Section::Matrix(m) => {
                    let _ = writeln!(out, "@{name}");
                    out.push_str(&format_matrix(m));
                }
                Section::Values(v) => {
                    let _ = writeln!(out, "@{name} {v}");
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn short_decimal_output() {
        assert_eq!(fmt_real(25.0), "25");
        assert_eq!(fmt_real(0.15999999999999998), "0.16");
        assert_eq!(fmt_real(-0.25), "-0.25");
        assert_eq!(fmt_real(-0.0), "0");
        assert_eq!(fmt_real(1.5e-9), "1.5e-9");
        assert_eq!(fmt_real(3.0e20), "3e20");
    }

    #[test]
    fn parses_fixture() {
        let m = parse_matrix("2 2\n3:0 1:0\n4:0 2:0\n").unwrap();
        assert_eq!(
            m,
            ComplexMatrix::from_real(2, 2, &[3.0, 1.0, 4.0, 2.0]).unwrap()
        );
        let m = parse_matrix("# comment\n1 2\n\n1.5:-0.25   7\n").unwrap();
        assert_eq!(m[(0, 0)], C64::new(1.5, -0.25));
        assert_eq!(m[(0, 1)], C64::new(7.0, 0.0));
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2 2\n1 2\n").is_err());
        assert!(parse_matrix("1 2\n1 2 3\n").is_err());
        assert!(parse_matrix("1 1\nx:1\n").is_err());
        assert!(parse_matrix("1 1\n1:nan\n").is_err());
        assert!(parse_vector("1 2\n1 2\n").is_err());
    }

    #[test]
    fn sections_round_trip() {
        let mut doc = SectionDoc::default();
        doc.push_values("noise_var", "0.5");
        doc.push_matrix("A", ComplexMatrix::identity(2));
        let back = SectionDoc::parse(&doc.render()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.values("noise_var").unwrap(), "0.5");
        assert!(back.matrix("noise_var").is_err());
        assert!(back.matrix("y").is_err());
    }

    proptest! {
        #[test]
        fn matrix_text_round_trip(
            rows in 1usize..5, cols in 1usize..5,
            vals in proptest::collection::vec(-1e6f64..1e6, 50)
        ) {
            let m = ComplexMatrix::from_fn(rows, cols, |i, j| {
                let k = 2 * (i * cols + j);
                C64::new(vals[k], vals[k + 1])
            });
            let back = parse_matrix(&format_matrix(&m)).unwrap();
            prop_assert!(back.max_abs_diff(&m) <= 1e-14 * (1.0 + m.frobenius()));
        }
    }
}
