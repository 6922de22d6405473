//! Point sets, covariance assembly (dense and CSR), Cholesky factorization and
//! simple kriging.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernels::{Correlation, KernelSpec};

/// Largest matrix order that will be densified for factorization (≈ 3.2 GB).
pub const MAX_DENSE_N: usize = 20_000;

/// `n` locations in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return domain("points need at least one coordinate");
        }
        if coords.len() % d != 0 {
            return Err(Error::DimensionMismatch { expected: d * (coords.len() / d + 1), got: coords.len() });
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return domain(format!("coordinates must be finite, found {bad}"));
        }
        Ok(Self { d, coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(1, Vec::len);
        let mut coords = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: r.len() });
            }
            coords.extend_from_slice(r);
        }
        Self::new(d, coords)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        euclid(self.point(i), self.point(j))
    }

    /// Points reordered so that the k-th output is input `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let coords = perm.iter().flat_map(|&i| self.point(i).iter().copied()).collect();
        Self { d: self.d, coords }
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }
}

/// All pairwise Euclidean distances.
pub fn pairwise_dist(points: &PointSet) -> DenseMatrix {
    let n = points.len();
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = points.dist(i, j);
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

/// Compressed sparse row storage of a symmetric matrix (both triangles stored).
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(DenseMatrix),
    Csr(Csr),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageHint {
    #[default]
    Dense,
    Csr,
}

/// Covariance matrix σ²R + nugget·I.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    storage: Storage,
    n: usize,
    sigma2: f64,
    nugget: f64,
    zero_count: u64,
    pairs_examined: u64,
}

impl CovMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    /// Number of exactly zero entries among all n² entries.
    pub fn zero_count(&self) -> u64 {
        self.zero_count
    }

    /// Percentage of exactly zero entries among all n² entries.
    pub fn pct_zero(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        100.0 * self.zero_count as f64 / (self.n as f64 * self.n as f64)
    }

    /// Number of distinct point pairs whose distance was computed during assembly.
    pub fn pairs_examined(&self) -> u64 {
        self.pairs_examined
    }

    /// Stored (structurally non-zero) entries.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.data.len(),
            Storage::Csr(c) => c.values.len(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.get(i, j),
            Storage::Csr(c) => {
                let cols = &c.col_idx[c.row_ptr[i]..c.row_ptr[i + 1]];
                match cols.binary_search(&j) {
                    Ok(k) => c.values[c.row_ptr[i] + k],
                    Err(_) => 0.0,
                }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Csr(c) => {
                let mut m = DenseMatrix::zeros(self.n);
                for i in 0..self.n {
                    for k in c.row_ptr[i]..c.row_ptr[i + 1] {
                        m.set(i, c.col_idx[k], c.values[k]);
                    }
                }
                m
            }
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(m) => m.mul_vec(v),
            Storage::Csr(c) => (0..self.n)
                .map(|i| (c.row_ptr[i]..c.row_ptr[i + 1]).map(|k| c.values[k] * v[c.col_idx[k]]).sum())
                .collect(),
        }
    }
}

fn check_scales(sigma2: f64, nugget: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return domain(format!("sigma2 must be finite and positive, got {sigma2}"));
    }
    if !(nugget >= 0.0 && nugget.is_finite()) {
        return domain(format!("nugget must be finite and non-negative, got {nugget}"));
    }
    Ok(())
}

/// Covariance matrix of `spec` at `points`; the spec must pass the validity gate.
pub fn assemble(spec: &KernelSpec, sigma2: f64, nugget: f64, points: &PointSet, hint: StorageHint) -> Result<CovMatrix> {
    let kernel = spec.compile()?;
    check_dim(spec.d, points.dim())?;
    assemble_with(&kernel, sigma2, nugget, points, hint)
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Covariance matrix for an arbitrary correlation evaluator.
pub fn assemble_with(
    corr: &dyn Correlation,
    sigma2: f64,
    nugget: f64,
    points: &PointSet,
    hint: StorageHint,
) -> Result<CovMatrix> {
    check_scales(sigma2, nugget)?;
    let support = corr.support();
    match hint {
        StorageHint::Dense => assemble_dense(corr, sigma2, nugget, points, support),
        StorageHint::Csr => assemble_csr(corr, sigma2, nugget, points, support),
    }
}

fn entry(corr: &dyn Correlation, sigma2: f64, x: f64, support: f64) -> Result<f64> {
    if x >= support {
        Ok(0.0)
    } else {
        Ok(sigma2 * corr.correlation(x)?)
    }
}

fn assemble_dense(corr: &dyn Correlation, sigma2: f64, nugget: f64, points: &PointSet, support: f64) -> Result<CovMatrix> {
    let n = points.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| entry(corr, sigma2, points.dist(i, j), support)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut m = DenseMatrix::zeros(n);
    let mut zeros = 0u64;
    for (i, row) in upper.iter().enumerate() {
        m.set(i, i, sigma2 + nugget);
        for (k, &v) in row.iter().enumerate() {
            let j = i + 1 + k;
            m.set(i, j, v);
            m.set(j, i, v);
            if v == 0.0 {
                zeros += 2;
            }
        }
    }
    let pairs = (n as u64) * (n as u64).saturating_sub(1) / 2;
    Ok(CovMatrix { storage: Storage::Dense(m), n, sigma2, nugget, zero_count: zeros, pairs_examined: pairs })
}

/// Candidate neighbours of each point through a uniform grid of cells with edge
/// `support`.
struct CellIndex {
    edge: f64,
    d: usize,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    offsets: Vec<Vec<i64>>,
}

impl CellIndex {
    fn new(points: &PointSet, edge: f64) -> Self {
        let d = points.dim();
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for i in 0..points.len() {
            cells.entry(Self::key(points.point(i), edge)).or_default().push(i);
        }
        let mut offsets = vec![Vec::new()];
        for _ in 0..d {
            offsets = offsets
                .into_iter()
                .flat_map(|o| {
                    (-1..=1).map(move |s| {
                        let mut o = o.clone();
                        o.push(s);
                        o
                    })
                })
                .collect();
        }
        Self { edge, d, cells, offsets }
    }

    fn key(p: &[f64], edge: f64) -> Vec<i64> {
        p.iter().map(|c| (c / edge).floor() as i64).collect()
    }

    /// Indices `j > i` in the 3^d cells around point `i`, ascending.
    fn upper_candidates(&self, points: &PointSet, i: usize) -> Vec<usize> {
        let home = Self::key(points.point(i), self.edge);
        let mut out = Vec::new();
        let mut key = vec![0i64; self.d];
        for o in &self.offsets {
            for k in 0..self.d {
                key[k] = home[k] + o[k];
            }
            if let Some(list) = self.cells.get(&key) {
                let start = list.partition_point(|&j| j <= i);
                out.extend_from_slice(&list[start..]);
            }
        }
        out.sort_unstable();
        out
    }
}

fn assemble_csr(corr: &dyn Correlation, sigma2: f64, nugget: f64, points: &PointSet, support: f64) -> Result<CovMatrix> {
    let n = points.len();
    let index = support.is_finite().then(|| CellIndex::new(points, support));
    let upper: Vec<(Vec<(usize, f64)>, u64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let candidates: Vec<usize> = match &index {
                Some(ix) => ix.upper_candidates(points, i),
                None => (i + 1..n).collect(),
            };
            let mut row = Vec::new();
            for &j in &candidates {
                let x = points.dist(i, j);
                if x < support {
                    row.push((j, entry(corr, sigma2, x, support)?));
                }
            }
            Ok((row, candidates.len() as u64))
        })
        .collect::<Result<_>>()?;
    let pairs_examined = upper.iter().map(|(_, c)| c).sum();
    let mut lower_count = vec![0usize; n];
    for (row, _) in &upper {
        for &(j, _) in row {
            lower_count[j] += 1;
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    for i in 0..n {
        row_ptr.push(row_ptr[i] + lower_count[i] + 1 + upper[i].0.len());
    }
    let nnz = row_ptr[n];
    let mut col_idx = vec![0usize; nnz];
    let mut values = vec![0.0; nnz];
    let mut fill: Vec<usize> = row_ptr[..n].to_vec();
    // rows visited in ascending order, so lower-triangle columns land sorted
    for i in 0..n {
        col_idx[fill[i]] = i;
        values[fill[i]] = sigma2 + nugget;
        fill[i] += 1;
        for &(j, v) in &upper[i].0 {
            col_idx[fill[i]] = j;
            values[fill[i]] = v;
            fill[i] += 1;
            col_idx[fill[j]] = i;
            values[fill[j]] = v;
            fill[j] += 1;
        }
    }
    let nonzero = values.iter().filter(|&&v| v != 0.0).count() as u64;
    let zero_count = (n as u64) * (n as u64) - nonzero;
    Ok(CovMatrix {
        storage: Storage::Csr(Csr { row_ptr, col_idx, values }),
        n,
        sigma2,
        nugget,
        zero_count,
        pairs_examined,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for k in 0..chunks {
        for m in 0..4 {
            acc[m] += a[4 * k + m] * b[4 * k + m];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..n {
        s += a[k] * b[k];
    }
    s
}

/// Lower Cholesky factor L with A = L·Lᵀ.
#[derive(Debug, Clone, PartialEq)]
pub struct CholFactor {
    n: usize,
    /// Row-major n×n with zeros above the diagonal.
    l: Vec<f64>,
    log_det: f64,
}

impl CholFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.l[i * self.n..i * self.n + i + 1]
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: len });
        }
        Ok(())
    }

    /// y with L·y = b.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check(b.len())?;
        let mut y = b.to_vec();
        for i in 0..self.n {
            let r = self.row(i);
            y[i] = (y[i] - dot(&r[..i], &y[..i])) / r[i];
        }
        Ok(y)
    }

    /// x with Lᵀ·x = y.
    pub fn solve_upper(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y.len())?;
        let mut x = y.to_vec();
        for i in (0..self.n).rev() {
            let r = self.row(i);
            x[i] /= r[i];
            let xi = x[i];
            for (xk, lk) in x[..i].iter_mut().zip(&r[..i]) {
                *xk -= lk * xi;
            }
        }
        Ok(x)
    }

    /// x with L·Lᵀ·x = b.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_upper(&self.solve_lower(b)?)
    }

    /// L·Lᵀ.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..=i {
                let v = dot(&self.row(i)[..=j], &self.row(j)[..=j]);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }
}

/// Cholesky factorization; CSR input is densified first.
pub fn cholesky(m: &CovMatrix) -> Result<CholFactor> {
    if m.n > MAX_DENSE_N {
        return Err(Error::Precondition(format!("order {} exceeds the dense factorization limit {MAX_DENSE_N}", m.n)));
    }
    match &m.storage {
        Storage::Dense(d) => cholesky_dense(d),
        Storage::Csr(_) => cholesky_dense(&m.to_dense()),
    }
}

/// Row-oriented (Banachiewicz) Cholesky of the lower triangle of `a`.
///
/// Leading zeros of each row are preserved by the factor, so every dot product
/// starts at the later of the two rows' first non-zero columns.
pub fn cholesky_dense(a: &DenseMatrix) -> Result<CholFactor> {
    let n = a.n;
    let first: Vec<usize> = (0..n).map(|i| a.row(i)[..i].iter().position(|&v| v != 0.0).unwrap_or(i)).collect();
    let mut l = vec![0.0; n * n];
    let mut log_det = 0.0;
    for i in 0..n {
        let (done, rest) = l.split_at_mut(i * n);
        let row_i = &mut rest[..n];
        let fi = first[i];
        for j in fi..i {
            let row_j = &done[j * n..j * n + j + 1];
            let k0 = fi.max(first[j]);
            let s = a.get(i, j) - dot(&row_i[k0..j], &row_j[k0..j]);
            row_i[j] = s / row_j[j];
        }
        let s = a.get(i, i) - dot(&row_i[fi..i], &row_i[fi..i]);
        if !(s > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: i, value: s });
        }
        row_i[i] = s.sqrt();
        log_det += s.ln();
    }
    Ok(CholFactor { n, l, log_det })
}

/// x with (L·Lᵀ)x = rhs.
pub fn solve(f: &CholFactor, rhs: &[f64]) -> Result<Vec<f64>> {
    f.solve(rhs)
}

/// Simple-kriging predictions and variances at target locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kriging {
    pub predictions: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Zero-mean simple kriging.
pub fn simple_krige(
    spec: &KernelSpec,
    sigma2: f64,
    nugget: f64,
    data_points: &PointSet,
    data_values: &[f64],
    targets: &PointSet,
) -> Result<Kriging> {
    check_dim(spec.d, targets.dim())?;
    if data_values.len() != data_points.len() {
        return Err(Error::DimensionMismatch { expected: data_points.len(), got: data_values.len() });
    }
    let kernel = spec.compile()?;
    let cov = assemble(spec, sigma2, nugget, data_points, StorageHint::Dense)?;
    let chol = cholesky(&cov)?;
    let weights = chol.solve(data_values)?;
    let support = kernel.support();
    let out: Vec<(f64, f64)> = (0..targets.len())
        .into_par_iter()
        .map(|t| {
            let target = targets.point(t);
            let c = (0..data_points.len())
                .map(|i| entry(&kernel, sigma2, euclid(target, data_points.point(i)), support))
                .collect::<Result<Vec<_>>>()?;
            let v = chol.solve_lower(&c)?;
            Ok((dot(&c, &weights), sigma2 + nugget - dot(&v, &v)))
        })
        .collect::<Result<_>>()?;
    let (predictions, variances) = out.into_iter().unzip();
    Ok(Kriging { predictions, variances })
}
