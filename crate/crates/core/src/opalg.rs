//! Dense complex operator algebra on N-qubit registers.
//!
//! Basis convention: qubit 0 is the leftmost tensor factor, so in a
//! computational-basis index qubit `q` of an `n`-qubit register lives at bit
//! `n - 1 - q` (qubit 0 is the most significant bit).

use faer::{c64, Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub type Operator = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues down to this value are treated as roundoff of a zero eigenvalue.
pub const PSD_TOL: f64 = 1e-10;
pub const EIG_INPUT_TOL: f64 = 1e-8;
pub const KRAUS_COMPLETENESS_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> Operator {
    let n = values.len();
    Operator::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

/// Builds a 2x2 operator from row-major entries.
pub fn mat2(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> Operator {
    Operator::from_row_slice(2, 2, &[a, b, cc, d])
}

pub fn max_abs(x: &Operator) -> f64 {
    x.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Elementwise max |a - b|.
pub fn max_abs_diff(a: &Operator, b: &Operator) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Elementwise max |A - A†|.
pub fn hermiticity_defect(x: &Operator) -> f64 {
    let n = x.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((x[(i, j)] - x[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(x: &Operator) -> Operator {
    (x + x.adjoint()).scale(0.5)
}

pub fn trace(x: &Operator) -> Complex64 {
    x.trace()
}

fn qubits_for_dim(dim: usize) -> Option<usize> {
    (dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

/// Validated N-qubit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: Operator,
}

impl DensityMatrix {
    /// Validates `mat` against all density-matrix invariants.
    pub fn new(mat: Operator) -> Result<Self> {
        let dm = Self::from_parts(mat)?;
        dm.check_invariants()?;
        Ok(dm)
    }

    /// Wraps a matrix checking only the shape. Used by operations that
    /// preserve the invariants by construction (CPTP maps, reductions).
    pub(crate) fn from_parts(mat: Operator) -> Result<Self> {
        if !mat.is_square() {
            return domain(format!("density matrix must be square, got {:?}", mat.shape()));
        }
        let n_qubits = qubits_for_dim(mat.nrows()).ok_or_else(|| {
            Error::Domain(format!("dimension {} is not a power of two", mat.nrows()))
        })?;
        Ok(Self { n_qubits, mat })
    }

    /// Projector onto the normalised pure state `psi`.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::Degenerate("state vector has zero norm".into()));
        }
        let d = psi.len();
        let mat = Operator::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self::from_parts(mat)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Operator {
        &self.mat
    }

    pub fn into_matrix(self) -> Operator {
        self.mat
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = hermiticity_defect(&self.mat);
        if herm > HERMITIAN_TOL {
            return Err(Error::Contract(format!("density matrix not Hermitian (defect {herm:e})")));
        }
        let tr = self.mat.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::Contract(format!("density matrix trace {tr} != 1")));
        }
        let eig = herm_eig(&self.mat)?;
        if let Some(&lo) = eig.eigenvalues.first() {
            if lo < -PSD_TOL {
                return Err(Error::Contract(format!(
                    "density matrix has negative eigenvalue {lo:e}"
                )));
            }
        }
        Ok(())
    }
}

/// Eigenvalues in ascending order and the unitary whose columns are the
/// matching eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Operator,
}

impl EigenDecomposition {
    /// V Λ V†
    pub fn reconstruct(&self) -> Operator {
        let v = &self.eigenvectors;
        let lambda = diag(&self.eigenvalues);
        v * lambda * v.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn herm_eig(h: &Operator) -> Result<EigenDecomposition> {
    if !h.is_square() {
        return Err(Error::Contract(format!("eigendecomposition of non-square {:?}", h.shape())));
    }
    let defect = hermiticity_defect(h);
    if !(defect <= EIG_INPUT_TOL) {
        return Err(Error::Contract(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    let sym = hermitian_part(h);
    let n = h.nrows();
    let m = Mat::<c64>::from_fn(n, n, |i, j| c64::new(sym[(i, j)].re, sym[(i, j)].im));
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("eigensolver did not converge: {e:?}")))?;
    let (s, u) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| s[k].re).collect();
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite eigenvalue".into()));
    }
    let eigenvectors = Operator::from_fn(n, n, |i, j| {
        let z = u[(i, order[j])];
        Complex64::new(z.re, z.im)
    });
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Largest singular value, via the eigenvalues of A†A.
pub fn op_norm(a: &Operator) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let gram = a.adjoint() * a;
    let eig = herm_eig(&hermitian_part(&gram)).expect("A†A is Hermitian");
    eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Kronecker product; `(a⊗b)[i*db + k, j*db + l] = a[i,j] b[k,l]`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Operator>) -> Operator {
    factors
        .into_iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

#[inline]
fn bit_of(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

fn check_qubit(n_qubits: usize, qubit: usize) -> Result<()> {
    if qubit >= n_qubits {
        return domain(format!("qubit index {qubit} out of range for {n_qubits} qubits"));
    }
    Ok(())
}

/// Reduced state on the qubits in `keep`. The result orders the kept
/// qubits by ascending index regardless of the order given.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep.is_empty() {
        return domain("partial trace needs at least one kept qubit");
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return domain("duplicate qubit index in partial trace");
    }
    for &q in &kept {
        check_qubit(n, q)?;
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();

    let embed = |qubits: &[usize], local: usize| -> usize {
        let m = qubits.len();
        qubits.iter().enumerate().fold(0, |acc, (pos, &q)| {
            if local & (1 << (m - 1 - pos)) != 0 {
                acc | bit_of(n, q)
            } else {
                acc
            }
        })
    };
    let kept_full: Vec<usize> = (0..1usize << kept.len()).map(|i| embed(&kept, i)).collect();
    let traced_full: Vec<usize> = (0..1usize << traced.len()).map(|i| embed(&traced, i)).collect();

    let dk = kept_full.len();
    let m = rho.matrix();
    let out = Operator::from_fn(dk, dk, |i, j| {
        traced_full
            .iter()
            .map(|&t| m[(kept_full[i] | t, kept_full[j] | t)])
            .sum()
    });
    DensityMatrix::from_parts(out)
}

/// Single-qubit reduction of qubit `qubit`.
pub fn reduce_to_qubit(rho: &DensityMatrix, qubit: usize) -> Result<DensityMatrix> {
    partial_trace(rho, &[qubit])
}

/// Partial transpose of an arbitrary operator on `n_qubits` with respect to `qubit`.
pub fn partial_transpose_op(x: &Operator, n_qubits: usize, qubit: usize) -> Result<Operator> {
    check_qubit(n_qubits, qubit)?;
    if x.nrows() != 1 << n_qubits || !x.is_square() {
        return domain(format!("operator shape {:?} does not match {n_qubits} qubits", x.shape()));
    }
    let mask = bit_of(n_qubits, qubit);
    let d = x.nrows();
    Ok(Operator::from_fn(d, d, |r, col| {
        let (rb, cb) = (r & mask, col & mask);
        x[((r & !mask) | cb, (col & !mask) | rb)]
    }))
}

pub fn partial_transpose(rho: &DensityMatrix, qubit: usize) -> Result<Operator> {
    partial_transpose_op(rho.matrix(), rho.n_qubits(), qubit)
}

pub type Block = [[Complex64; 2]; 2];

/// Applies a linear map on 2x2 blocks to the tensor slot of `qubit`,
/// i.e. `(id ⊗ ... ⊗ map ⊗ ... ⊗ id)(x)` for any single-qubit superoperator `map`.
pub fn map_local_blocks<F>(x: &Operator, n_qubits: usize, qubit: usize, map: F) -> Operator
where
    F: Fn(&Block) -> Block,
{
    let mask = bit_of(n_qubits, qubit);
    let d = x.nrows();
    let mut out = Operator::zeros(d, d);
    for r in (0..d).filter(|r| r & mask == 0) {
        let rows = [r, r | mask];
        for col in (0..d).filter(|col| col & mask == 0) {
            let cols = [col, col | mask];
            let block = [
                [x[(rows[0], cols[0])], x[(rows[0], cols[1])]],
                [x[(rows[1], cols[0])], x[(rows[1], cols[1])]],
            ];
            let mapped = map(&block);
            for a in 0..2 {
                for b in 0..2 {
                    out[(rows[a], cols[b])] = mapped[a][b];
                }
            }
        }
    }
    out
}

fn to_block(k: &Operator) -> Block {
    [[k[(0, 0)], k[(0, 1)]], [k[(1, 0)], k[(1, 1)]]]
}

fn block_mul(a: &Block, b: &Block) -> Block {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn block_adjoint(a: &Block) -> Block {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Residual ‖Σ K†K − I‖_max of a single-qubit Kraus set.
pub fn kraus_completeness_defect(kraus: &[Operator]) -> f64 {
    let mut sum = Operator::zeros(2, 2);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    max_abs_diff(&sum, &identity(2))
}

fn check_kraus(kraus: &[Operator]) -> Result<()> {
    if kraus.is_empty() || kraus.iter().any(|k| k.shape() != (2, 2)) {
        return Err(Error::Contract("local Kraus operators must be a nonempty set of 2x2 matrices".into()));
    }
    let defect = kraus_completeness_defect(kraus);
    if !(defect <= KRAUS_COMPLETENESS_TOL) {
        return Err(Error::Contract(format!("Kraus set is not trace preserving (defect {defect:e})")));
    }
    Ok(())
}

/// Applies a single-qubit Kraus map to slot `qubit` of any operator.
pub fn apply_local_kraus_op(
    x: &Operator,
    n_qubits: usize,
    kraus: &[Operator],
    qubit: usize,
) -> Result<Operator> {
    check_qubit(n_qubits, qubit)?;
    check_kraus(kraus)?;
    let blocks: Vec<(Block, Block)> = kraus
        .iter()
        .map(|k| {
            let b = to_block(k);
            (b, block_adjoint(&b))
        })
        .collect();
    Ok(map_local_blocks(x, n_qubits, qubit, |blk| {
        let mut acc = [[ZERO; 2]; 2];
        for (k, kd) in &blocks {
            let term = block_mul(&block_mul(k, blk), kd);
            for i in 0..2 {
                for j in 0..2 {
                    acc[i][j] += term[i][j];
                }
            }
        }
        acc
    }))
}

pub fn apply_local_kraus(rho: &DensityMatrix, kraus: &[Operator], qubit: usize) -> Result<DensityMatrix> {
    let out = apply_local_kraus_op(rho.matrix(), rho.n_qubits(), kraus, qubit)?;
    DensityMatrix::from_parts(out)
}

/// Embeds a single-qubit operator at slot `qubit` of an `n_qubits` register.
pub fn embed_local(op: &Operator, n_qubits: usize, qubit: usize) -> Operator {
    let id2 = identity(2);
    let factors: Vec<&Operator> = (0..n_qubits).map(|q| if q == qubit { op } else { &id2 }).collect();
    kron_all(factors)
}

pub fn purity_of(x: &Operator) -> f64 {
    // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
    x.iter().map(|z| z.norm_sqr()).sum()
}
