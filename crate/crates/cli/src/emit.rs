//! Table emitters. CSV and Markdown stream row by row; JSON buffers and
//! writes one array at the end.

use std::io::{self, Write};

use num_bigint::BigInt;
use quadlucas::verifier::{render_number, round15};
use serde_json::{Map, Value};

use crate::args::Format;

#[derive(Clone, Debug)]
pub enum Cell {
    Int(BigInt),
    Num(f64),
    Text(String),
    Flag(bool),
    Empty,
}

impl Cell {
    pub fn text(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Num(x) => render_number(*x),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(n) => match i64::try_from(n) {
                Ok(i) => Value::from(i),
                Err(_) => Value::String(n.to_string()),
            },
            Cell::Num(x) => Value::from(round15(*x)),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Flag(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(BigInt::from(x))
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(BigInt::from(x))
    }
}

impl From<&BigInt> for Cell {
    fn from(x: &BigInt) -> Self {
        Cell::Int(x.clone())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

pub struct TableWriter<W: Write> {
    format: Format,
    header: Vec<&'static str>,
    out: W,
    json: Vec<Value>,
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

impl<W: Write> TableWriter<W> {
    pub fn new(format: Format, header: Vec<&'static str>, mut out: W) -> io::Result<Self> {
        match format {
            Format::Csv => out.write_all(&csv_line(header.iter().copied())?)?,
            Format::Md => {
                writeln!(out, "| {} |", header.join(" | "))?;
                writeln!(out, "|{}", "---|".repeat(header.len()))?;
            }
            Format::Json => {}
        }
        Ok(TableWriter {
            format,
            header,
            out,
            json: Vec::new(),
        })
    }

    pub fn row(&mut self, cells: Vec<Cell>) -> io::Result<()> {
        debug_assert_eq!(cells.len(), self.header.len());
        match self.format {
            Format::Csv => self.out.write_all(&csv_line(cells.iter().map(Cell::text))?)?,
            Format::Md => {
                let texts: Vec<String> = cells.iter().map(|c| md_escape(&c.text())).collect();
                writeln!(self.out, "| {} |", texts.join(" | "))?;
            }
            Format::Json => {
                let mut m = Map::new();
                for (k, c) in self.header.iter().zip(&cells) {
                    m.insert(k.to_string(), c.json());
                }
                self.json.push(Value::Object(m));
            }
        }
        self.out.flush()
    }

    pub fn finish(mut self) -> io::Result<W> {
        if self.format == Format::Json {
            let s = serde_json::to_string_pretty(&Value::Array(std::mem::take(&mut self.json)))?;
            writeln!(self.out, "{s}")?;
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

fn csv_line<I, T>(fields: I) -> io::Result<Vec<u8>>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields)?;
    w.into_inner().map_err(|e| e.into_error())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(format: Format) -> String {
        let mut t = TableWriter::new(format, vec!["n", "P", "ratio", "note"], Vec::new()).unwrap();
        t.row(vec![5u64.into(), (&BigInt::from(41)).into(), Cell::Num(8.197_333_333_333_3), "a|b".into()]).unwrap();
        String::from_utf8(t.finish().unwrap()).unwrap()
    }

    #[test]
    fn formats() {
        assert_eq!(render(Format::Csv), "n,P,ratio,note\n5,41,8.1973333333333,a|b\n");
        assert_eq!(render(Format::Md), "| n | P | ratio | note |\n|---|---|---|---|\n| 5 | 41 | 8.1973333333333 | a\\|b |\n");
        let v: Value = serde_json::from_str(&render(Format::Json)).unwrap();
        assert_eq!(v[0]["P"], Value::from(41));
        assert_eq!(v[0]["ratio"].to_string(), "8.1973333333333");
    }

    #[test]
    fn header_only() {
        let t = TableWriter::new(Format::Csv, vec!["n", "P"], Vec::new()).unwrap();
        assert_eq!(String::from_utf8(t.finish().unwrap()).unwrap(), "n,P\n");
        let t = TableWriter::new(Format::Json, vec!["n"], Vec::new()).unwrap();
        assert_eq!(String::from_utf8(t.finish().unwrap()).unwrap(), "[]\n");
    }

    #[test]
    fn huge_integers_stay_exact() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        assert_eq!(Cell::Int(big.clone()).json(), Value::String(big.to_string()));
    }
}
