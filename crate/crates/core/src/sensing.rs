//! Measurement matrices: dense Gaussian and sparse binary expanders.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rng;

const DENSE_MAGIC: &[u8; 4] = b"GSDM";
const EXPANDER_MAGIC: &[u8; 4] = b"GSEX";

#[derive(Debug, Error)]
pub enum SensingError {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("expander degree {d} must be between 1 and m = {m}")]
    BadDegree { d: usize, m: usize },
    #[error("matrix dimensions must be positive")]
    EmptyMatrix,
    #[error("noise norm {norm} exceeds the bound {bound}")]
    NoiseBound { norm: f64, bound: f64 },
    #[error("malformed matrix file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    m: usize,
    n: usize,
    /// Row-major.
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_rows(m: usize, n: usize, data: Vec<f64>) -> Result<Self, SensingError> {
        if m == 0 || n == 0 {
            return Err(SensingError::EmptyMatrix);
        }
        if data.len() != m * n {
            return Err(SensingError::DimensionMismatch { expected: m * n, got: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(SensingError::Format("non-finite entry".into()));
        }
        Ok(DenseMatrix { m, n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        DenseMatrix { m: n, n, data }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpanderMatrix {
    m: usize,
    d: usize,
    /// Sorted row indices of the ones in each column.
    columns: Vec<Vec<u32>>,
}

impl ExpanderMatrix {
    pub fn from_columns(m: usize, d: usize, mut columns: Vec<Vec<u32>>) -> Result<Self, SensingError> {
        if m == 0 || columns.is_empty() {
            return Err(SensingError::EmptyMatrix);
        }
        if d == 0 || d > m {
            return Err(SensingError::BadDegree { d, m });
        }
        for (i, col) in columns.iter_mut().enumerate() {
            col.sort_unstable();
            col.dedup();
            if col.len() != d || col.iter().any(|&r| r as usize >= m) {
                return Err(SensingError::Format(format!("column {i} does not hold {d} distinct rows below {m}")));
            }
        }
        Ok(ExpanderMatrix { m, d, columns })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn column(&self, i: usize) -> &[u32] {
        &self.columns[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SensingMatrix {
    Dense(DenseMatrix),
    Expander(ExpanderMatrix),
}

impl SensingMatrix {
    pub fn rows(&self) -> usize {
        match self {
            SensingMatrix::Dense(a) => a.rows(),
            SensingMatrix::Expander(a) => a.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            SensingMatrix::Dense(a) => a.cols(),
            SensingMatrix::Expander(a) => a.cols(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SensingMatrix::Dense(_) => "gaussian",
            SensingMatrix::Expander(_) => "expander",
        }
    }

    pub fn as_expander(&self) -> Option<&ExpanderMatrix> {
        match self {
            SensingMatrix::Expander(a) => Some(a),
            SensingMatrix::Dense(_) => None,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, SensingError> {
        match self {
            SensingMatrix::Dense(a) => apply_dense(a, x),
            SensingMatrix::Expander(a) => apply_expander(a, x),
        }
    }

    pub fn apply_adjoint(&self, z: &[f64]) -> Result<Vec<f64>, SensingError> {
        match self {
            SensingMatrix::Dense(a) => adjoint_dense(a, z),
            SensingMatrix::Expander(a) => adjoint_expander(a, z),
        }
    }

    pub fn write_to(&self, out: &mut impl Write) -> Result<(), SensingError> {
        match self {
            SensingMatrix::Dense(a) => {
                write_header(out, DENSE_MAGIC, a.m, a.n, 0)?;
                for v in &a.data {
                    out.write_all(&v.to_le_bytes())?;
                }
            }
            SensingMatrix::Expander(a) => {
                write_header(out, EXPANDER_MAGIC, a.m, a.cols(), a.d)?;
                for col in &a.columns {
                    for r in col {
                        out.write_all(&r.to_le_bytes())?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_from(input: &mut impl Read) -> Result<Self, SensingError> {
        let mut header = [0u8; 16];
        input.read_exact(&mut header)?;
        let word = |k: usize| u32::from_le_bytes(header[4 * k..4 * k + 4].try_into().unwrap()) as usize;
        let (m, n, extra) = (word(1), word(2), word(3));
        let mut body = Vec::new();
        input.read_to_end(&mut body)?;
        match &header[..4] {
            magic if magic == DENSE_MAGIC => {
                if body.len() != m * n * 8 {
                    return Err(SensingError::Format(format!("expected {} data bytes, found {}", m * n * 8, body.len())));
                }
                let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
                Ok(SensingMatrix::Dense(DenseMatrix::from_rows(m, n, data)?))
            }
            magic if magic == EXPANDER_MAGIC => {
                let d = extra;
                if d == 0 || body.len() != n * d * 4 {
                    return Err(SensingError::Format(format!("expected {} index bytes, found {}", n * d * 4, body.len())));
                }
                let rows: Vec<u32> = body.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
                let columns = rows.chunks_exact(d).map(<[u32]>::to_vec).collect();
                Ok(SensingMatrix::Expander(ExpanderMatrix::from_columns(m, d, columns)?))
            }
            other => Err(SensingError::Format(format!("unknown magic {other:?}"))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), SensingError> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SensingError> {
        SensingMatrix::read_from(&mut BufReader::new(File::open(path)?))
    }
}

fn write_header(out: &mut impl Write, magic: &[u8; 4], a: usize, b: usize, c: usize) -> Result<(), SensingError> {
    out.write_all(magic)?;
    for v in [a, b, c] {
        let v = u32::try_from(v).map_err(|_| SensingError::Format(format!("dimension {v} exceeds u32")))?;
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn check(expected: usize, got: usize) -> Result<(), SensingError> {
    if expected != got {
        return Err(SensingError::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn apply_dense(a: &DenseMatrix, x: &[f64]) -> Result<Vec<f64>, SensingError> {
    check(a.n, x.len())?;
    Ok(a.data.chunks_exact(a.n).map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect())
}

fn adjoint_dense(a: &DenseMatrix, z: &[f64]) -> Result<Vec<f64>, SensingError> {
    check(a.m, z.len())?;
    let mut out = vec![0.0; a.n];
    for (row, &zr) in a.data.chunks_exact(a.n).zip(z) {
        if zr != 0.0 {
            for (o, r) in out.iter_mut().zip(row) {
                *o += r * zr;
            }
        }
    }
    Ok(out)
}

fn apply_expander(a: &ExpanderMatrix, x: &[f64]) -> Result<Vec<f64>, SensingError> {
    check(a.cols(), x.len())?;
    let mut y = vec![0.0; a.m];
    for (col, &xi) in a.columns.iter().zip(x) {
        if xi != 0.0 {
            for &r in col {
                y[r as usize] += xi;
            }
        }
    }
    Ok(y)
}

fn adjoint_expander(a: &ExpanderMatrix, z: &[f64]) -> Result<Vec<f64>, SensingError> {
    check(a.m, z.len())?;
    Ok(a.columns.iter().map(|col| col.iter().map(|&r| z[r as usize]).sum()).collect())
}

/// Entries i.i.d. `N(0, 1) / sqrt(m)`.
pub fn gen_gaussian(m: usize, n: usize, seed: u64) -> Result<DenseMatrix, SensingError> {
    gaussian_from_rng(m, n, &mut rng::stream(seed, &[]))
}

pub fn gaussian_from_rng(m: usize, n: usize, rng: &mut impl Rng) -> Result<DenseMatrix, SensingError> {
    if m == 0 || n == 0 {
        return Err(SensingError::EmptyMatrix);
    }
    let scale = 1.0 / (m as f64).sqrt();
    let data = (0..m * n).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
    Ok(DenseMatrix { m, n, data })
}

/// Each column gets `d` distinct rows drawn uniformly (partial Fisher-Yates).
pub fn gen_expander(m: usize, n: usize, d: usize, seed: u64) -> Result<ExpanderMatrix, SensingError> {
    expander_from_rng(m, n, d, &mut rng::stream(seed, &[]))
}

pub fn expander_from_rng(m: usize, n: usize, d: usize, rng: &mut impl Rng) -> Result<ExpanderMatrix, SensingError> {
    if m == 0 || n == 0 {
        return Err(SensingError::EmptyMatrix);
    }
    if d == 0 || d > m {
        return Err(SensingError::BadDegree { d, m });
    }
    let mut pool: Vec<u32> = (0..m as u32).collect();
    let columns = (0..n)
        .map(|_| {
            for t in 0..d {
                let s = rng.random_range(t..m);
                pool.swap(t, s);
            }
            let mut col = pool[..d].to_vec();
            col.sort_unstable();
            col
        })
        .collect();
    Ok(ExpanderMatrix { m, d, columns })
}

/// Median of a non-empty list; even lengths average the two middle values.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty list");
    values.sort_unstable_by(f64::total_cmp);
    let h = values.len() / 2;
    if values.len() % 2 == 1 {
        values[h]
    } else {
        0.5 * (values[h - 1] + values[h])
    }
}

/// Component `i` is the median of `z` over the rows of column `i`.
pub fn median_op(a: &ExpanderMatrix, z: &[f64]) -> Result<Vec<f64>, SensingError> {
    check(a.m, z.len())?;
    let mut buf = Vec::with_capacity(a.d);
    Ok(a
        .columns
        .iter()
        .map(|col| {
            buf.clear();
            buf.extend(col.iter().map(|&r| z[r as usize]));
            median(&mut buf)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVector {
    values: Vec<f64>,
    bound: Option<f64>,
}

impl NoiseVector {
    pub fn zero(m: usize) -> Self {
        NoiseVector { values: vec![0.0; m], bound: Some(0.0) }
    }

    pub fn new(values: Vec<f64>, bound: Option<f64>) -> Result<Self, SensingError> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if let Some(bound) = bound {
            if norm > bound {
                return Err(SensingError::NoiseBound { norm, bound });
            }
        }
        Ok(NoiseVector { values, bound })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }
}
