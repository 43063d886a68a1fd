//! Plain-text file formats. Node and community indices in files are 1-based.
//!
//! * graph: header `i,j,label`, one row per nonzero label with `i < j`
//! * attributes: no header, row `i` holds the `d` coordinates of node `i`
//! * assignment: header `i,community`

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::CommunityAssignment;
use crate::sampler::{AttributeMatrix, LabeledGraph};

fn reader(path: &Path, headers: bool) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::parse(path, e.to_string())
    }
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, record: &csv::StringRecord, at: usize) -> Result<T> {
    let raw = record
        .get(at)
        .ok_or_else(|| Error::parse(path, format!("line {line}: missing column {}", at + 1)))?;
    raw.parse()
        .map_err(|_| Error::parse(path, format!("line {line}: cannot parse {raw:?}")))
}

fn expect_header(path: &Path, rdr: &mut csv::Reader<std::fs::File>, want: &[&str]) -> Result<()> {
    let got = rdr.headers().map_err(|e| csv_error(path, e))?;
    if got.iter().ne(want.iter().copied()) {
        return Err(Error::parse(path, format!("expected header {:?}", want.join(","))));
    }
    Ok(())
}

pub fn write_graph(graph: &LabeledGraph, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let mut put = |rec: &[String]| w.write_record(rec).map_err(|e| csv_error(path, e));
    put(&["i".into(), "j".into(), "label".into()])?;
    for (i, j, l) in graph.edges() {
        put(&[(i + 1).to_string(), (j + 1).to_string(), l.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a graph on `n` nodes. Every listed pair must satisfy `1 <= i < j <= n`.
pub fn read_graph(path: &Path, n: usize) -> Result<LabeledGraph> {
    let mut rdr = reader(path, true)?;
    expect_header(path, &mut rdr, &["i", "j", "label"])?;
    let mut g = LabeledGraph::empty(n);
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = row + 2;
        let i: usize = field(path, line, &rec, 0)?;
        let j: usize = field(path, line, &rec, 1)?;
        let l: u16 = field(path, line, &rec, 2)?;
        if !(1 <= i && i < j && j <= n) {
            return Err(Error::parse(path, format!("line {line}: need 1 <= i < j <= {n}, got ({i}, {j})")));
        }
        if l == 0 {
            return Err(Error::parse(path, format!("line {line}: label 0 must be omitted")));
        }
        g.set(i - 1, j - 1, l);
    }
    Ok(g)
}

pub fn write_attributes(attrs: &AttributeMatrix, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    for col in attrs.0.column_iter() {
        w.write_record(col.iter().map(|v| format!("{v:?}")))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_attributes(path: &Path) -> Result<AttributeMatrix> {
    let mut rdr = reader(path, false)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let vals = (0..rec.len())
            .map(|c| field(path, row + 1, &rec, c))
            .collect::<Result<Vec<f64>>>()?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, format!("line {}: non-finite attribute", row + 1)));
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, "no attribute rows"));
    }
    let d = rows[0].len();
    Ok(AttributeMatrix(DMatrix::from_fn(d, rows.len(), |r, i| rows[i][r])))
}

pub fn write_assignment(sigma: &CommunityAssignment, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["i", "community"]).map_err(|e| csv_error(path, e))?;
    for (i, c) in sigma.labels().iter().enumerate() {
        w.write_record([(i + 1).to_string(), (c + 1).to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read an assignment; rows must list nodes `1..=n` in order. Returns the
/// 0-indexed assignment and the largest community index seen.
pub fn read_assignment(path: &Path) -> Result<(CommunityAssignment, usize)> {
    let mut rdr = reader(path, true)?;
    expect_header(path, &mut rdr, &["i", "community"])?;
    let mut labels = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = row + 2;
        let i: usize = field(path, line, &rec, 0)?;
        let c: usize = field(path, line, &rec, 1)?;
        if i != row + 1 {
            return Err(Error::parse(path, format!("line {line}: expected node {}, got {i}", row + 1)));
        }
        if c == 0 {
            return Err(Error::parse(path, format!("line {line}: communities are 1-indexed")));
        }
        labels.push(c - 1);
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    Ok((CommunityAssignment(labels), k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::two_block;
    use crate::sampler::sample_clsbm;

    #[test]
    fn round_trips() {
        let p = two_block(20, 0.4, 0.1, [[1.0, -0.5], [0.25, 3.0]]);
        let ds = sample_clsbm(&p, 5);
        let dir = tempfile::tempdir().unwrap();
        let (g, x, s) = (dir.path().join("g.csv"), dir.path().join("x.csv"), dir.path().join("s.csv"));
        write_graph(&ds.graph, &g).unwrap();
        write_attributes(&ds.attrs, &x).unwrap();
        write_assignment(&ds.sigma, &s).unwrap();
        assert_eq!(read_graph(&g, 20).unwrap(), ds.graph);
        assert_eq!(read_attributes(&x).unwrap(), ds.attrs);
        let (sigma, k) = read_assignment(&s).unwrap();
        assert_eq!(sigma, ds.sigma);
        assert!(k <= 2);
    }

    #[test]
    fn graph_file_is_one_based_upper_triangle() {
        let mut g = LabeledGraph::empty(3);
        g.set(2, 0, 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        write_graph(&g, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "i,j,label\n1,3,4\n");
    }

    #[test]
    fn rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        for body in ["i,j,label\n2,1,1\n", "i,j,label\n1,4,1\n", "i,j,label\n1,2,0\n", "a,b\n1,2\n", "i,j,label\n1,x,1\n"] {
            std::fs::write(&path, body).unwrap();
            assert!(matches!(read_graph(&path, 3), Err(Error::Parse { .. })), "{body}");
        }
        std::fs::write(&path, "i,community\n1,1\n3,2\n").unwrap();
        assert!(read_assignment(&path).is_err());
        std::fs::write(&path, "1.0,2.0\n3.0\n").unwrap();
        assert!(read_attributes(&path).is_err());
        assert!(matches!(
            read_attributes(&dir.path().join("missing.csv")),
            Err(Error::Io { .. })
        ));
    }
}
