//! Matrix ingestion and result serialization.
//!
//! Three text formats come in: `coo` (triplet sparse matrix with an
//! `n m nnz` header), `dense-csv` (square symmetric matrix), and `docword`
//! (bag-of-words triplets with a three-line header, binarized by default).
//! Results go out as a line-oriented text record plus a machine-readable CSV
//! twin. All file indices are 1-based; conversion happens only here.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrixView;
use crate::solver::{MatrixInput, SparsePrincipalComponent};
use crate::sparse::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Coo,
    DenseCsv,
    Docword,
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coo" => Ok(Self::Coo),
            "dense-csv" => Ok(Self::DenseCsv),
            "docword" => Ok(Self::Docword),
            other => Err(Error::InvalidArgument(format!(
                "unknown format {other:?} (expected coo, dense-csv, or docword)"
            ))),
        }
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, message: message.into() }
}

#[derive(Debug, Clone, Copy)]
pub struct ReadOptions {
    /// Keep raw `docword` counts instead of binarizing to 0/1.
    pub keep_counts: bool,
    /// Relative symmetry tolerance for `dense-csv` input.
    pub symmetry_tol: f64,
}

impl Default for ReadOptions {
    fn default() -> Self {
        Self { keep_counts: false, symmetry_tol: crate::tol::SYMMETRY }
    }
}

/// Reads a matrix file.
pub fn read_matrix(path: &Path, format: MatrixFormat, opts: &ReadOptions) -> Result<MatrixInput> {
    let text = fs::read_to_string(path)?;
    match format {
        MatrixFormat::Coo => read_coo(path, &text),
        MatrixFormat::DenseCsv => read_dense_csv(path, &text, opts.symmetry_tol),
        MatrixFormat::Docword => read_docword(path, &text, opts.keep_counts),
    }
}

fn read_coo(path: &Path, text: &str) -> Result<MatrixInput> {
    let mut lines = text.lines().enumerate();
    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file; expected `n m nnz` header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(path, header_no + 1, "header must be `n m nnz`"));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(path, header_no + 1, "bad feature count"))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(path, header_no + 1, "bad sample count"))?;
    let nnz: usize =
        fields[2].parse().map_err(|_| parse_err(path, header_no + 1, "bad nnz count"))?;

    let mut triplets = Vec::with_capacity(nnz);
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(path, line_no + 1, "expected `i j value`"));
        }
        let i: usize =
            fields[0].parse().map_err(|_| parse_err(path, line_no + 1, "bad row index"))?;
        let j: usize =
            fields[1].parse().map_err(|_| parse_err(path, line_no + 1, "bad column index"))?;
        let value: f64 =
            fields[2].parse().map_err(|_| parse_err(path, line_no + 1, "bad value"))?;
        if i == 0 || i > n {
            return Err(parse_err(path, line_no + 1, format!("row index {i} outside 1..={n}")));
        }
        if j == 0 || j > m {
            return Err(parse_err(path, line_no + 1, format!("column index {j} outside 1..={m}")));
        }
        triplets.push((i - 1, j - 1, value));
    }
    if triplets.len() != nnz {
        return Err(parse_err(
            path,
            1,
            format!("header declares {nnz} entries, file has {}", triplets.len()),
        ));
    }
    let matrix = DataMatrix::from_triplets(n, m, &triplets)?;
    Ok(MatrixInput::Data { matrix, scale: 1.0 })
}

fn read_dense_csv(path: &Path, text: &str, symmetry_tol: f64) -> Result<MatrixInput> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| parse_err(path, line_no + 1, "bad numeric field"))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    path,
                    line_no + 1,
                    format!("row has {} fields, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(path, 1, "empty matrix"));
    }
    if rows[0].len() != n {
        return Err(parse_err(path, 1, format!("matrix is {n}×{}, expected square", rows[0].len())));
    }
    let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(MatrixInput::View(SymmetricMatrixView::dense_with_tol(dense, symmetry_tol)?))
}

fn read_docword(path: &Path, text: &str, keep_counts: bool) -> Result<MatrixInput> {
    let mut lines = text.lines().enumerate();
    let mut header = [0usize; 3];
    for (slot, field) in header.iter_mut().enumerate() {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, slot + 1, "expected 3-line header (D, W, NNZ)"))?;
        *field = line
            .trim()
            .parse()
            .map_err(|_| parse_err(path, line_no + 1, "bad header count"))?;
    }
    let [docs, words, nnz] = header;
    let mut triplets = Vec::with_capacity(nnz);
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(path, line_no + 1, "expected `docID wordID count`"));
        }
        let doc: usize =
            fields[0].parse().map_err(|_| parse_err(path, line_no + 1, "bad doc id"))?;
        let word: usize =
            fields[1].parse().map_err(|_| parse_err(path, line_no + 1, "bad word id"))?;
        let count: f64 =
            fields[2].parse().map_err(|_| parse_err(path, line_no + 1, "bad count"))?;
        if doc == 0 || doc > docs {
            return Err(parse_err(path, line_no + 1, format!("doc id {doc} outside 1..={docs}")));
        }
        if word == 0 || word > words {
            return Err(parse_err(
                path,
                line_no + 1,
                format!("word id {word} outside 1..={words}"),
            ));
        }
        // features are words: S is words × docs
        let value = if keep_counts { count } else { 1.0 };
        triplets.push((word - 1, doc - 1, value));
    }
    if triplets.len() != nnz {
        return Err(parse_err(
            path,
            3,
            format!("header declares {nnz} entries, file has {}", triplets.len()),
        ));
    }
    let matrix = DataMatrix::from_triplets(words, docs, &triplets)?;
    Ok(MatrixInput::Data { matrix, scale: 1.0 })
}

/// Writes a data matrix in `coo` format (the inverse of [`read_matrix`]).
pub fn write_coo(matrix: &DataMatrix, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", matrix.n_features(), matrix.n_samples(), matrix.nnz());
    for (i, j, v) in matrix.triplets() {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, v);
    }
    fs::write(path, out)?;
    Ok(())
}

/// One solved component, ready for serialization. Indices are 0-based in
/// memory and 1-based on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRecord {
    pub rank_used: usize,
    pub support: Vec<usize>,
    /// Loadings aligned with `support`.
    pub loadings: Vec<f64>,
    pub value: f64,
    pub epsilon_d: Option<f64>,
    pub ratio_lower: Option<f64>,
}

impl ComponentRecord {
    pub fn from_component(pc: &SparsePrincipalComponent) -> Self {
        Self {
            rank_used: pc.rank_used,
            support: pc.support.clone(),
            loadings: pc.support.iter().map(|&i| pc.loadings[i]).collect(),
            value: pc.value,
            epsilon_d: Some(pc.bound.epsilon_d),
            ratio_lower: Some(pc.bound.ratio_lower),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultDocument {
    pub k: usize,
    pub explained_variance_ratio: Option<f64>,
    pub components: Vec<ComponentRecord>,
}

/// Writes the result record at `path` and a CSV twin at `path` + `.csv`.
/// Floating-point fields use the shortest round-trip representation, so a
/// read-back reproduces them exactly.
pub fn write_result(doc: &ResultDocument, path: &Path) -> Result<()> {
    if let Some(r) = doc.explained_variance_ratio {
        if !(-1e-9..=1.0 + 1e-9).contains(&r) {
            return Err(Error::InvalidArgument(format!(
                "explained variance ratio {r} outside [0, 1]"
            )));
        }
    }
    let ratio = doc.explained_variance_ratio.map(|r| r.clamp(0.0, 1.0));

    let mut out = String::new();
    let _ = writeln!(out, "spca-result v1");
    let _ = writeln!(out, "k {}", doc.k);
    let _ = writeln!(out, "components {}", doc.components.len());
    if let Some(r) = ratio {
        let _ = writeln!(out, "explained_variance_ratio {r}");
    }
    for (idx, c) in doc.components.iter().enumerate() {
        let _ = writeln!(out, "component {}", idx + 1);
        let _ = writeln!(out, "rank_used {}", c.rank_used);
        let _ = writeln!(out, "value {}", c.value);
        if let Some(e) = c.epsilon_d {
            let _ = writeln!(out, "epsilon_d {e}");
        }
        if let Some(r) = c.ratio_lower {
            let _ = writeln!(out, "ratio_lower {r}");
        }
        let support: Vec<String> = c.support.iter().map(|&i| (i + 1).to_string()).collect();
        let _ = writeln!(out, "support {}", support.join(" "));
        let loadings: Vec<String> = c.loadings.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "loadings {}", loadings.join(" "));
        let _ = writeln!(out, "end");
    }
    fs::write(path, &out)?;

    let mut csv = String::from(
        "component,rank_used,k,value,epsilon_d,ratio_lower,explained_variance_ratio,support,loadings\n",
    );
    for (idx, c) in doc.components.iter().enumerate() {
        let support: Vec<String> = c.support.iter().map(|&i| (i + 1).to_string()).collect();
        let loadings: Vec<String> = c.loadings.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},\"{}\",\"{}\"",
            idx + 1,
            c.rank_used,
            doc.k,
            c.value,
            c.epsilon_d.map(|e| e.to_string()).unwrap_or_default(),
            c.ratio_lower.map(|r| r.to_string()).unwrap_or_default(),
            ratio.map(|r| r.to_string()).unwrap_or_default(),
            support.join(" "),
            loadings.join(" "),
        );
    }
    fs::write(csv_twin_path(path), csv)?;
    Ok(())
}

/// CSV twin path: the result path with `.csv` appended.
pub fn csv_twin_path(path: &Path) -> std::path::PathBuf {
    let mut twin = path.as_os_str().to_owned();
    twin.push(".csv");
    std::path::PathBuf::from(twin)
}

/// Parses a result record written by [`write_result`].
pub fn read_result(path: &Path) -> Result<ResultDocument> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().peekable();
    let expect = |got: Option<(usize, &str)>, what: &str| -> Result<(usize, String)> {
        got.map(|(n, l)| (n, l.to_string()))
            .ok_or_else(|| parse_err(path, 0, format!("unexpected end of file, wanted {what}")))
    };

    let (line_no, magic) = expect(lines.next(), "magic line")?;
    if magic.trim() != "spca-result v1" {
        return Err(parse_err(path, line_no + 1, "not an spca-result v1 file"));
    }
    let mut k: Option<usize> = None;
    let mut count: Option<usize> = None;
    let mut ratio: Option<f64> = None;
    let mut components = Vec::new();

    while let Some((line_no, line)) = lines.next() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["k", v] => k = Some(v.parse().map_err(|_| parse_err(path, line_no + 1, "bad k"))?),
            ["components", v] => {
                count = Some(v.parse().map_err(|_| parse_err(path, line_no + 1, "bad count"))?)
            }
            ["explained_variance_ratio", v] => {
                ratio =
                    Some(v.parse().map_err(|_| parse_err(path, line_no + 1, "bad ratio"))?)
            }
            ["component", _] => {
                let mut record = ComponentRecord {
                    rank_used: 0,
                    support: Vec::new(),
                    loadings: Vec::new(),
                    value: 0.0,
                    epsilon_d: None,
                    ratio_lower: None,
                };
                for (inner_no, inner) in lines.by_ref() {
                    let fields: Vec<&str> = inner.split_whitespace().collect();
                    match fields.as_slice() {
                        ["end"] => break,
                        ["rank_used", v] => {
                            record.rank_used = v
                                .parse()
                                .map_err(|_| parse_err(path, inner_no + 1, "bad rank"))?
                        }
                        ["value", v] => {
                            record.value = v
                                .parse()
                                .map_err(|_| parse_err(path, inner_no + 1, "bad value"))?
                        }
                        ["epsilon_d", v] => {
                            record.epsilon_d = Some(
                                v.parse()
                                    .map_err(|_| parse_err(path, inner_no + 1, "bad epsilon"))?,
                            )
                        }
                        ["ratio_lower", v] => {
                            record.ratio_lower = Some(
                                v.parse()
                                    .map_err(|_| parse_err(path, inner_no + 1, "bad ratio"))?,
                            )
                        }
                        ["support", rest @ ..] => {
                            record.support = rest
                                .iter()
                                .map(|v| {
                                    v.parse::<usize>()
                                        .map(|i| i - 1)
                                        .map_err(|_| parse_err(path, inner_no + 1, "bad index"))
                                })
                                .collect::<Result<_>>()?
                        }
                        ["loadings", rest @ ..] => {
                            record.loadings = rest
                                .iter()
                                .map(|v| {
                                    v.parse::<f64>().map_err(|_| {
                                        parse_err(path, inner_no + 1, "bad loading")
                                    })
                                })
                                .collect::<Result<_>>()?
                        }
                        [] => {}
                        _ => {
                            return Err(parse_err(path, inner_no + 1, "unknown component field"))
                        }
                    }
                }
                components.push(record);
            }
            [] => {}
            _ => return Err(parse_err(path, line_no + 1, "unknown field")),
        }
    }
    let k = k.ok_or_else(|| parse_err(path, 0, "missing k"))?;
    let count = count.ok_or_else(|| parse_err(path, 0, "missing component count"))?;
    if components.len() != count {
        return Err(parse_err(
            path,
            0,
            format!("declared {count} components, found {}", components.len()),
        ));
    }
    Ok(ResultDocument { k, explained_variance_ratio: ratio, components })
}

/// Table-style recovery output: one CSV row per method.
pub fn write_recovery_csv(
    report: &crate::experiments::RecoveryReport,
    path: &Path,
) -> Result<()> {
    let mut out = String::from("method,n,m,k,trials,successes,p_rec\n");
    for (i, method) in report.config.methods.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            method.label(),
            report.config.n,
            report.config.m,
            report.config.k,
            report.config.trials,
            report.successes[i],
            report.p_rec(i),
        );
    }
    fs::write(path, out)?;
    Ok(())
}
