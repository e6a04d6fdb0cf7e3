//! Plain-text persistence: coordinate files for adjacency matrices and a
//! support-list format for coarsening maps.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::coarsening::CoarseningMap;
use crate::error::{Error, Result};
use crate::sbm::FineGraph;

/// Write a symmetric binary adjacency in coordinate form: header `n n nnz`,
/// then 1-indexed `row col value` triples for the upper triangle plus
/// diagonal, sorted row-major.
pub fn write_adjacency(path: &Path, g: &FineGraph) -> Result<()> {
    let n = g.n();
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i..n {
            if g.a[[i, j]] != 0.0 {
                triples.push((i + 1, j + 1, g.a[[i, j]]));
            }
        }
    }
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{n} {n} {}", triples.len())?;
    for (i, j, v) in triples {
        writeln!(w, "{i} {j} {v}")?;
    }
    Ok(())
}

pub fn read_adjacency(path: &Path) -> Result<FineGraph> {
    let f = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(f).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty adjacency file".into()))??;
    let parts: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header: {header}"))))
        .collect::<Result<_>>()?;
    if parts.len() != 3 || parts[0] != parts[1] {
        return Err(Error::Parse(format!("bad header: {header}")));
    }
    let (n, nnz) = (parts[0], parts[2]);
    let mut a = Array2::<f64>::zeros((n, n));
    let mut count = 0usize;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::Parse(format!("bad triple: {line}")));
        }
        let i: usize = toks[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad triple: {line}")))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad triple: {line}")))?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad triple: {line}")))?;
        if i < 1 || j < 1 || i > n || j > n || j < i {
            return Err(Error::Parse(format!("index out of range: {line}")));
        }
        a[[i - 1, j - 1]] = v;
        a[[j - 1, i - 1]] = v;
        count += 1;
    }
    if count != nnz {
        return Err(Error::Parse(format!(
            "header promised {nnz} entries, found {count}"
        )));
    }
    Ok(FineGraph { a })
}

/// Write a coarsening map: header `m n r`, then one line of r 1-indexed
/// support indices per coarse node.
pub fn write_coarsening(path: &Path, map: &CoarseningMap) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{} {} {}", map.m, map.n, map.r)?;
    for row in &map.supports {
        let line: Vec<String> = row.iter().map(|&v| (v + 1).to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_coarsening(path: &Path) -> Result<CoarseningMap> {
    let f = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(f).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty coarsening file".into()))??;
    let parts: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header: {header}"))))
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        return Err(Error::Parse(format!("bad header: {header}")));
    }
    let (m, n, r) = (parts[0], parts[1], parts[2]);
    let mut supports = Vec::with_capacity(m);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<usize> = line
            .split_whitespace()
            .map(|t| {
                let v: usize = t
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad index: {t}")))?;
                if v < 1 || v > n {
                    return Err(Error::Parse(format!("index out of range: {v}")));
                }
                Ok(v - 1)
            })
            .collect::<Result<_>>()?;
        supports.push(row);
    }
    if supports.len() != m {
        return Err(Error::Parse(format!(
            "header promised {m} rows, found {}",
            supports.len()
        )));
    }
    CoarseningMap::from_supports(n, r, supports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn adjacency_round_trip() {
        let g = FineGraph {
            a: array![
                [1.0, 1.0, 0.0],
                [1.0, 0.0, 1.0],
                [0.0, 1.0, 0.0]
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_adjacency(&path, &g).unwrap();
        let back = read_adjacency(&path).unwrap();
        assert_eq!(g.a, back.a);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("3 3 3\n"));
    }

    #[test]
    fn coarsening_round_trip() {
        let map = CoarseningMap::from_supports(8, 2, vec![vec![0, 1], vec![4, 6]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        write_coarsening(&path, &map).unwrap();
        let back = read_coarsening(&path).unwrap();
        assert_eq!(map.supports, back.supports);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "2 8 2\n1 2\n5 7\n");
    }

    #[test]
    fn rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "3 4 0\n").unwrap();
        assert!(read_adjacency(&path).is_err());
        std::fs::write(&path, "2 2 1\n2 1 1\n").unwrap();
        assert!(read_adjacency(&path).is_err(), "lower-triangle entry accepted");
    }
}
