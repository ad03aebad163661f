//! Complex operator matrices over a truncated Fock basis.
//!
//! Ladder-built operators are stored as CSR; anything produced from a dense
//! operand (eigenvectors, resolvents) is dense. Mixed products promote to dense.

use std::ops::{Add, Mul, Neg, Sub};

use faer::Mat;
use num_complex::Complex64 as C64;

use super::TruncatedBasis;
use crate::error::{Error, Result};
use crate::exec;

/// 2x2 complex matrix acting on the spin factor.
pub type Spin2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl Csr {
    pub fn zeros(n: usize) -> Self {
        Csr {
            n,
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    fn from_rows(n: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Csr {
            n,
            indptr,
            indices,
            values,
        }
    }

    /// Builds from (row, col, value) triplets; duplicates are summed in input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            rows[r].push((c, v));
        }
        let rows = rows.into_iter().map(compress_row).collect();
        Csr::from_rows(n, rows)
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b]
            .iter()
            .copied()
            .zip(self.values[a..b].iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[a..b].binary_search(&c) {
            Ok(k) => self.values[a + k],
            Err(_) => ZERO,
        }
    }

    fn map_rows<F>(&self, f: F) -> Csr
    where
        F: Fn(usize) -> Vec<(usize, C64)> + Sync + Send,
    {
        Csr::from_rows(self.n, exec::map_indexed(self.n, f))
    }

    fn matmul(&self, other: &Csr) -> Csr {
        self.map_rows(|r| {
            let mut acc: Vec<(usize, C64)> = Vec::new();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    acc.push((c, a * b));
                }
            }
            compress_row(acc)
        })
    }

    fn lincomb(&self, alpha: C64, other: &Csr, beta: C64) -> Csr {
        self.map_rows(|r| {
            let mut acc: Vec<(usize, C64)> = self.row(r).map(|(c, v)| (c, alpha * v)).collect();
            acc.extend(other.row(r).map(|(c, v)| (c, beta * v)));
            compress_row(acc)
        })
    }

    fn adjoint(&self) -> Csr {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.n];
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                rows[c].push((r, v.conj()));
            }
        }
        Csr::from_rows(self.n, rows)
    }

    fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    fn submatrix(&self, k: usize) -> Csr {
        let rows = (0..k)
            .map(|r| self.row(r).filter(|&(c, _)| c < k).collect())
            .collect();
        Csr::from_rows(k, rows)
    }
}

/// Sorts by column (stable, so equal columns keep input order), sums
/// duplicates and drops exact zeros.
fn compress_row(mut row: Vec<(usize, C64)>) -> Vec<(usize, C64)> {
    row.sort_by_key(|&(c, _)| c);
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|&(_, v)| v != ZERO);
    out
}

#[derive(Clone, Debug)]
pub enum Storage {
    Sparse(Csr),
    Dense(Mat<C64>),
}

/// Operator on (truncated Fock space) tensor C^spin_dim, spin index fastest.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    basis: TruncatedBasis,
    spin_dim: usize,
    storage: Storage,
    hermitian: bool,
}

impl OperatorMatrix {
    pub fn zeros(basis: TruncatedBasis, spin_dim: usize) -> Self {
        let n = basis.dim() * spin_dim;
        OperatorMatrix {
            basis,
            spin_dim,
            storage: Storage::Sparse(Csr::zeros(n)),
            hermitian: true,
        }
    }

    pub fn identity(basis: TruncatedBasis, spin_dim: usize) -> Self {
        let n = basis.dim() * spin_dim;
        Self::diagonal(basis, spin_dim, &vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(basis: TruncatedBasis, spin_dim: usize, diag: &[C64]) -> Self {
        let n = basis.dim() * spin_dim;
        assert_eq!(diag.len(), n, "diagonal length");
        let t: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(basis, spin_dim, &t)
    }

    pub fn from_triplets(
        basis: TruncatedBasis,
        spin_dim: usize,
        triplets: &[(usize, usize, C64)],
    ) -> Self {
        let n = basis.dim() * spin_dim;
        OperatorMatrix {
            basis,
            spin_dim,
            storage: Storage::Sparse(Csr::from_triplets(n, triplets)),
            hermitian: false,
        }
    }

    pub fn from_dense(basis: TruncatedBasis, spin_dim: usize, m: Mat<C64>) -> Result<Self> {
        let n = basis.dim() * spin_dim;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for dimension {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(OperatorMatrix {
            basis,
            spin_dim,
            storage: Storage::Dense(m),
            hermitian: false,
        })
    }

    pub fn basis(&self) -> TruncatedBasis {
        self.basis
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.dim() * self.spin_dim
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Whether hermiticity has been certified by [`certify_hermitian`](Self::certify_hermitian).
    pub fn hermitian_flag(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        match &self.storage {
            Storage::Sparse(s) => s.get(r, c),
            Storage::Dense(m) => m[(r, c)],
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match &self.storage {
            Storage::Sparse(s) => s.to_dense(),
            Storage::Dense(m) => m.clone(),
        }
    }

    /// Dense copy converted back to sparse, dropping entries below `tol`.
    pub fn sparsified(&self, tol: f64) -> Self {
        match &self.storage {
            Storage::Sparse(_) => self.clone(),
            Storage::Dense(m) => {
                let n = self.dim();
                let rows = exec::map_indexed(n, |r| {
                    (0..n)
                        .filter_map(|c| {
                            let v = m[(r, c)];
                            (v.norm() > tol).then_some((c, v))
                        })
                        .collect()
                });
                self.with_storage(Storage::Sparse(Csr::from_rows(n, rows)))
            }
        }
    }

    pub fn densified(&self) -> Self {
        self.with_storage(Storage::Dense(self.to_dense()))
    }

    fn with_storage(&self, storage: Storage) -> Self {
        OperatorMatrix {
            basis: self.basis,
            spin_dim: self.spin_dim,
            storage,
            hermitian: false,
        }
    }

    fn check_compatible(&self, other: &Self) {
        assert!(
            self.basis == other.basis && self.spin_dim == other.spin_dim,
            "operator shapes differ: Nmax {} spin {} vs Nmax {} spin {}",
            self.basis.nmax(),
            self.spin_dim,
            other.basis.nmax(),
            other.spin_dim
        );
    }

    pub fn matmul(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.matmul(b)),
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a * b),
            (Storage::Sparse(a), Storage::Dense(b)) => Storage::Dense(sparse_dense(a, b)),
            (Storage::Dense(a), Storage::Sparse(b)) => Storage::Dense(dense_sparse(a, b)),
        };
        self.with_storage(storage)
    }

    /// alpha * self + beta * other.
    pub fn lincomb(&self, alpha: C64, other: &Self, beta: C64) -> Self {
        self.check_compatible(other);
        let storage = match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.lincomb(alpha, b, beta)),
            _ => {
                let a = self.to_dense();
                let b = other.to_dense();
                let n = self.dim();
                Storage::Dense(Mat::from_fn(n, n, |r, c| alpha * a[(r, c)] + beta * b[(r, c)]))
            }
        };
        self.with_storage(storage)
    }

    pub fn scale(&self, alpha: C64) -> Self {
        let storage = match &self.storage {
            Storage::Sparse(s) => {
                let mut s = s.clone();
                s.values.iter_mut().for_each(|v| *v *= alpha);
                if alpha == ZERO {
                    s = Csr::zeros(s.n);
                }
                Storage::Sparse(s)
            }
            Storage::Dense(m) => {
                let n = self.dim();
                Storage::Dense(Mat::from_fn(n, n, |r, c| alpha * m[(r, c)]))
            }
        };
        self.with_storage(storage)
    }

    pub fn scale_re(&self, alpha: f64) -> Self {
        self.scale(C64::new(alpha, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let storage = match &self.storage {
            Storage::Sparse(s) => Storage::Sparse(s.adjoint()),
            Storage::Dense(m) => Storage::Dense(m.adjoint().to_owned()),
        };
        let mut out = self.with_storage(storage);
        out.hermitian = self.hermitian;
        out
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        let storage = match &self.storage {
            Storage::Sparse(s) => {
                let mut s = s.clone();
                s.values.iter_mut().for_each(|v| *v = v.conj());
                Storage::Sparse(s)
            }
            Storage::Dense(m) => Storage::Dense(m.conjugate().to_owned()),
        };
        self.with_storage(storage)
    }

    /// [self, other] = self other - other self.
    pub fn commutator(&self, other: &Self) -> Self {
        let one = C64::new(1.0, 0.0);
        self.matmul(other).lincomb(one, &other.matmul(self), -one)
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diag().into_iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Sparse(s) => s.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Storage::Dense(m) => {
                let n = self.dim();
                let mut best = 0.0f64;
                for c in 0..n {
                    for r in 0..n {
                        best = best.max(m[(r, c)].norm());
                    }
                }
                best
            }
        }
    }

    /// max |self - other| entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let one = C64::new(1.0, 0.0);
        self.lincomb(one, other, -one).max_abs()
    }

    /// Sets the hermitian flag when max |A - A^dagger| <= tol.
    pub fn certify_hermitian(&mut self, tol: f64) -> bool {
        let ok = self.max_abs_diff(&self.adjoint()) <= tol;
        self.hermitian = ok;
        ok
    }

    pub fn certified(mut self, tol: f64) -> Self {
        self.certify_hermitian(tol);
        self
    }

    /// Restriction to states with n1 + n2 <= Nmax - margin.
    ///
    /// With level-major ordering this is the leading principal block.
    pub fn interior_block(&self, margin: usize) -> Self {
        let margin = margin.min(self.basis.nmax());
        if margin == 0 {
            return self.clone();
        }
        let basis = TruncatedBasis::new(self.basis.nmax() - margin);
        let k = basis.dim() * self.spin_dim;
        let storage = match &self.storage {
            Storage::Sparse(s) => Storage::Sparse(s.submatrix(k)),
            Storage::Dense(m) => Storage::Dense(m.submatrix(0, 0, k, k).to_owned()),
        };
        OperatorMatrix {
            basis,
            spin_dim: self.spin_dim,
            storage,
            hermitian: self.hermitian,
        }
    }

    /// Kronecker product T (x) M with the spin index fastest.
    pub fn tensor_spin(&self, m: &Spin2) -> Result<Self> {
        if self.spin_dim != 1 {
            return Err(Error::Dimension(format!(
                "tensor with spin needs spin_dim 1, got {}",
                self.spin_dim
            )));
        }
        let n = self.basis.dim();
        let storage = match &self.storage {
            Storage::Sparse(s) => {
                let rows = exec::map_indexed(2 * n, |r| {
                    let (i, a) = (r / 2, r % 2);
                    let mut row = Vec::new();
                    for (j, v) in s.row(i) {
                        for (b, mab) in m[a].iter().enumerate() {
                            row.push((2 * j + b, v * mab));
                        }
                    }
                    compress_row(row)
                });
                Storage::Sparse(Csr::from_rows(2 * n, rows))
            }
            Storage::Dense(d) => Storage::Dense(Mat::from_fn(2 * n, 2 * n, |r, c| {
                d[(r / 2, c / 2)] * m[r % 2][c % 2]
            })),
        };
        Ok(OperatorMatrix {
            basis: self.basis,
            spin_dim: 2,
            storage,
            hermitian: false,
        })
    }

    /// Block (a, b) of a spin-2 operator, as a spin-1 operator.
    pub fn spin_block(&self, a: usize, b: usize) -> Result<Self> {
        if self.spin_dim != 2 {
            return Err(Error::Dimension("spin_block needs spin_dim 2".into()));
        }
        let n = self.basis.dim();
        let storage = match &self.storage {
            Storage::Sparse(s) => {
                let rows = (0..n)
                    .map(|i| {
                        s.row(2 * i + a)
                            .filter(|&(c, _)| c % 2 == b)
                            .map(|(c, v)| (c / 2, v))
                            .collect()
                    })
                    .collect();
                Storage::Sparse(Csr::from_rows(n, rows))
            }
            Storage::Dense(d) => Storage::Dense(Mat::from_fn(n, n, |r, c| d[(2 * r + a, 2 * c + b)])),
        };
        Ok(OperatorMatrix {
            basis: self.basis,
            spin_dim: 1,
            storage,
            hermitian: false,
        })
    }

    /// Partial trace over the spin factor.
    pub fn spin_trace(&self) -> Result<Self> {
        if self.spin_dim == 1 {
            return Ok(self.clone());
        }
        let one = C64::new(1.0, 0.0);
        Ok(self.spin_block(0, 0)?.lincomb(one, &self.spin_block(1, 1)?, one))
    }

    /// Assembles a spin-2 operator from four spin-1 blocks [[b00, b01], [b10, b11]].
    pub fn from_spin_blocks(blocks: [[&Self; 2]; 2]) -> Result<Self> {
        let basis = blocks[0][0].basis;
        for row in &blocks {
            for b in row {
                if b.spin_dim != 1 || b.basis != basis {
                    return Err(Error::Dimension("spin blocks must share a spin-1 basis".into()));
                }
            }
        }
        let n = basis.dim();
        let sparse: Vec<[Csr; 2]> = blocks
            .iter()
            .map(|row| [as_csr(row[0]), as_csr(row[1])])
            .collect();
        let rows = exec::map_indexed(2 * n, |r| {
            let (i, a) = (r / 2, r % 2);
            let mut row = Vec::new();
            for (b, s) in sparse[a].iter().enumerate() {
                row.extend(s.row(i).map(|(c, v)| (2 * c + b, v)));
            }
            compress_row(row)
        });
        Ok(OperatorMatrix {
            basis,
            spin_dim: 2,
            storage: Storage::Sparse(Csr::from_rows(2 * n, rows)),
            hermitian: false,
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim());
        match &self.storage {
            Storage::Sparse(s) => exec::map_indexed(self.dim(), |r| s.row(r).map(|(c, a)| a * v[c]).sum()),
            Storage::Dense(m) => {
                exec::map_indexed(self.dim(), |r| (0..self.dim()).map(|c| m[(r, c)] * v[c]).sum())
            }
        }
    }

    /// Little-endian serialization: u64 Nmax, u64 spin_dim, then the dense
    /// matrix row-major as (re, im) f64 pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.dim();
        let mut out = Vec::with_capacity(16 + 16 * n * n);
        out.extend_from_slice(&(self.basis.nmax() as u64).to_le_bytes());
        out.extend_from_slice(&(self.spin_dim as u64).to_le_bytes());
        let d = self.to_dense();
        for r in 0..n {
            for c in 0..n {
                let v = d[(r, c)];
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |k: usize| -> Result<u64> {
            bytes
                .get(8 * k..8 * k + 8)
                .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| Error::Dimension("truncated header".into()))
        };
        let nmax = word(0)? as usize;
        let spin_dim = word(1)? as usize;
        if spin_dim != 1 && spin_dim != 2 {
            return Err(Error::Dimension(format!("spin_dim {spin_dim}")));
        }
        let basis = TruncatedBasis::new(nmax);
        let n = basis.dim() * spin_dim;
        if bytes.len() != 16 + 16 * n * n {
            return Err(Error::Dimension(format!(
                "payload of {} bytes for dimension {n}",
                bytes.len()
            )));
        }
        let f = |k: usize| f64::from_le_bytes(bytes[16 + 8 * k..24 + 8 * k].try_into().unwrap());
        let m = Mat::from_fn(n, n, |r, c| {
            let k = 2 * (r * n + c);
            C64::new(f(k), f(k + 1))
        });
        Ok(OperatorMatrix::from_dense(basis, spin_dim, m)?.sparsified(0.0))
    }
}

fn as_csr(op: &OperatorMatrix) -> Csr {
    match &op.storage {
        Storage::Sparse(s) => s.clone(),
        Storage::Dense(_) => match op.sparsified(0.0).storage {
            Storage::Sparse(s) => s,
            Storage::Dense(_) => unreachable!(),
        },
    }
}

fn sparse_dense(a: &Csr, b: &Mat<C64>) -> Mat<C64> {
    let n = a.n;
    let rows: Vec<Vec<C64>> = exec::map_indexed(n, |r| {
        let mut out = vec![ZERO; n];
        for (k, v) in a.row(r) {
            for (c, o) in out.iter_mut().enumerate() {
                *o += v * b[(k, c)];
            }
        }
        out
    });
    Mat::from_fn(n, n, |r, c| rows[r][c])
}

fn dense_sparse(a: &Mat<C64>, b: &Csr) -> Mat<C64> {
    let n = b.n;
    let rows: Vec<Vec<C64>> = exec::map_indexed(n, |r| {
        let mut out = vec![ZERO; n];
        for k in 0..n {
            let v = a[(r, k)];
            if v != ZERO {
                for (c, w) in b.row(k) {
                    out[c] += v * w;
                }
            }
        }
        out
    });
    Mat::from_fn(n, n, |r, c| rows[r][c])
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        let one = C64::new(1.0, 0.0);
        self.lincomb(one, rhs, one)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        let one = C64::new(1.0, 0.0);
        self.lincomb(one, rhs, -one)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        self.matmul(rhs)
    }
}

impl Mul<&OperatorMatrix> for C64 {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        rhs.scale(self)
    }
}

impl Mul<&OperatorMatrix> for f64 {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        rhs.scale_re(self)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale_re(-1.0)
    }
}

pub fn spin_identity() -> Spin2 {
    let one = C64::new(1.0, 0.0);
    [[one, ZERO], [ZERO, one]]
}

/// Pauli matrix sigma_k, k in 1..=3.
pub fn pauli(k: usize) -> Spin2 {
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match k {
        1 => [[ZERO, one], [one, ZERO]],
        2 => [[ZERO, -i], [i, ZERO]],
        3 => [[one, ZERO], [ZERO, -one]],
        _ => panic!("pauli index {k}"),
    }
}

pub fn spin_mul(a: &Spin2, b: &Spin2) -> Spin2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn spin_lincomb(terms: &[(C64, Spin2)]) -> Spin2 {
    let mut out = [[ZERO; 2]; 2];
    for (a, m) in terms {
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += a * m[r][c];
            }
        }
    }
    out
}

pub fn spin_max_abs(m: &Spin2) -> f64 {
    m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
}
