//! Dense finite-dimensional state vectors and operators.
//!
//! Conventions fixed here and relied on everywhere else:
//! * inner products are conjugate-linear in the FIRST argument;
//! * tensor products index with the LEFTMOST factor slowest, i.e.
//!   `(u ⊗ v)[i*dim_v + j] = u[i] * v[j]`;
//! * operators are dense, row-major, and carry a hermiticity flag checked
//!   at construction.
//!
//! Vectors carry a role flag: `Normalized` states satisfy |⟨v|v⟩ − 1| within
//! tolerance, `Free` vectors (residuals, intermediate results) do not
//! promise anything about their norm.

use crate::error::{Error, Result};
use crate::scalar::{cre, real, Real, C};
use num_complex::Complex;

/// Whether a vector promises unit norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorRole {
    /// Unit-norm state: |⟨v|v⟩ − 1| ≤ `T::NORM_TOL` at construction.
    Normalized,
    /// No norm promise (residuals and other derived vectors).
    Free,
}

/// Dense complex vector with an optional basis labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amplitudes: Vec<C<T>>,
    role: VectorRole,
    labels: Option<Vec<String>>,
}

impl<T: Real> StateVector<T> {
    /// Builds a normalised state, verifying the norm.
    pub fn normalized(amplitudes: Vec<C<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("amplitudes", "empty state vector"));
        }
        let n2 = norm_sqr_slice(&amplitudes);
        let dev = (n2 - T::one()).abs();
        if dev > T::NORM_TOL {
            return Err(Error::NotNormalized {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            amplitudes,
            role: VectorRole::Normalized,
            labels: None,
        })
    }

    /// Builds a normalised state by rescaling. Errors on the zero vector.
    pub fn unit(mut amplitudes: Vec<C<T>>) -> Result<Self> {
        let n = norm_sqr_slice(&amplitudes).sqrt();
        if n == T::zero() || !n.is_finite() {
            return Err(Error::invalid(
                "amplitudes",
                "cannot normalise zero or non-finite vector",
            ));
        }
        for a in &mut amplitudes {
            *a = a.unscale(n);
        }
        Ok(Self {
            amplitudes,
            role: VectorRole::Normalized,
            labels: None,
        })
    }

    /// Builds a vector with no norm promise.
    pub fn free(amplitudes: Vec<C<T>>) -> Self {
        Self {
            amplitudes,
            role: VectorRole::Free,
            labels: None,
        }
    }

    /// Computational basis vector `|k⟩` of the given dimension.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::invalid(
                "k",
                format!("basis index {k} out of range for dim {dim}"),
            ));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[k] = Complex::new(T::one(), T::zero());
        Ok(Self {
            amplitudes,
            role: VectorRole::Normalized,
            labels: None,
        })
    }

    /// Attaches basis labels (must match the dimension).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: labels.len(),
                right: self.dim(),
                context: "basis labels",
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn role(&self) -> VectorRole {
        self.role
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> C<T> {
        self.amplitudes[k]
    }

    /// ⟨self|self⟩, always real and non-negative.
    pub fn norm_sqr(&self) -> T {
        norm_sqr_slice(&self.amplitudes)
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Multiplies by a complex scalar; result carries no norm promise.
    pub fn scaled(&self, factor: C<T>) -> StateVector<T> {
        StateVector::free(self.amplitudes.iter().map(|a| a * factor).collect())
    }

    /// self + other.
    pub fn add(&self, other: &StateVector<T>) -> Result<StateVector<T>> {
        self.zip_with(other, |a, b| a + b, "vector addition")
    }

    /// self - other.
    pub fn sub(&self, other: &StateVector<T>) -> Result<StateVector<T>> {
        self.zip_with(other, |a, b| a - b, "vector subtraction")
    }

    /// self + factor * other.
    pub fn axpy(&self, factor: C<T>, other: &StateVector<T>) -> Result<StateVector<T>> {
        self.zip_with(other, |a, b| a + factor * b, "vector axpy")
    }

    fn zip_with(
        &self,
        other: &StateVector<T>,
        f: impl Fn(C<T>, C<T>) -> C<T>,
        context: &'static str,
    ) -> Result<StateVector<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
                context,
            });
        }
        Ok(StateVector::free(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// Renormalises in place semantics: returns the unit-norm copy.
    pub fn renormalized(&self) -> Result<StateVector<T>> {
        StateVector::unit(self.amplitudes.clone())
    }
}

fn norm_sqr_slice<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|a| a.norm_sqr()).fold(T::zero(), |s, x| s + x)
}

/// ⟨u|v⟩, conjugate-linear in `u`.
pub fn inner<T: Real>(u: &StateVector<T>, v: &StateVector<T>) -> Result<C<T>> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
            context: "inner product",
        });
    }
    let mut acc = Complex::new(T::zero(), T::zero());
    for (a, b) in u.amplitudes.iter().zip(&v.amplitudes) {
        acc += a.conj() * b;
    }
    Ok(acc)
}

/// u ⊗ v with the leftmost factor slowest.
pub fn tensor<T: Real>(u: &StateVector<T>, v: &StateVector<T>) -> StateVector<T> {
    let mut out = Vec::with_capacity(u.dim() * v.dim());
    for a in &u.amplitudes {
        for b in &v.amplitudes {
            out.push(a * b);
        }
    }
    let role = if u.role == VectorRole::Normalized && v.role == VectorRole::Normalized {
        VectorRole::Normalized
    } else {
        VectorRole::Free
    };
    StateVector {
        amplitudes: out,
        role,
        labels: None,
    }
}

/// Factor dimensions of a tensor-product space, leftmost slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorFactorization {
    dims: Vec<usize>,
}

impl TensorFactorization {
    pub fn new(dims: Vec<usize>, ambient: usize) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::invalid("dims", "factor dimensions must be positive"));
        }
        let product: usize = dims.iter().product();
        if product != ambient {
            return Err(Error::BadFactorization { product, ambient });
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimension of the space complementary to `factor`.
    pub fn complement_dim(&self, factor: usize) -> usize {
        self.dims
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != factor)
            .map(|(_, &d)| d)
            .product()
    }

    /// Ambient index for (complement index, factor index) with the factor at
    /// position `factor`. Complement indices keep their relative order.
    fn embed(&self, factor: usize, comp_index: usize, factor_index: usize) -> usize {
        let mut rem = comp_index;
        // mixed-radix digits of comp_index over the complementary dims,
        // leftmost slowest
        let comp_dims: Vec<usize> = self
            .dims
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != factor)
            .map(|(_, &d)| d)
            .collect();
        let mut digits = vec![0usize; comp_dims.len()];
        for (slot, &d) in comp_dims.iter().enumerate().rev() {
            digits[slot] = rem % d;
            rem /= d;
        }
        let mut ambient = 0usize;
        let mut comp_slot = 0usize;
        for (i, &d) in self.dims.iter().enumerate() {
            let digit = if i == factor {
                factor_index
            } else {
                let dg = digits[comp_slot];
                comp_slot += 1;
                dg
            };
            ambient = ambient * d + digit;
        }
        ambient
    }
}

/// Dense complex matrix with a hermiticity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T: Real> {
    dim: usize,
    entries: Vec<C<T>>, // row-major
    hermitian: bool,
}

impl<T: Real> Operator<T> {
    /// Builds a Hermitian operator, verifying H = H^dagger.
    pub fn hermitian(dim: usize, entries: Vec<C<T>>) -> Result<Self> {
        let op = Self::general(dim, entries)?;
        let dev = op.hermiticity_deviation();
        if dev > T::HERM_TOL {
            return Err(Error::NotHermitian {
                deviation: dev.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            hermitian: true,
            ..op
        })
    }

    /// Builds a general operator (measurement effects need not be Hermitian).
    pub fn general(dim: usize, entries: Vec<C<T>>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: entries.len(),
                right: dim * dim,
                context: "operator entries",
            });
        }
        Ok(Self {
            dim,
            entries,
            hermitian: false,
        })
    }

    /// Diagonal Hermitian operator from real eigenvalues.
    pub fn diagonal(values: &[T]) -> Self {
        let dim = values.len();
        let mut entries = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for (k, &v) in values.iter().enumerate() {
            entries[k * dim + k] = cre(v);
        }
        Self {
            dim,
            entries,
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![T::one(); dim])
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex::new(T::zero(), T::zero()); dim * dim],
            hermitian: true,
        }
    }

    /// |ket⟩⟨bra|; Hermitian when ket and bra are the same vector.
    pub fn outer(ket: &StateVector<T>, bra: &StateVector<T>) -> Result<Self> {
        if ket.dim() != bra.dim() {
            return Err(Error::DimensionMismatch {
                left: ket.dim(),
                right: bra.dim(),
                context: "outer product",
            });
        }
        let dim = ket.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(ket.amplitude(r) * bra.amplitude(c).conj());
            }
        }
        let hermitian = std::ptr::eq(ket, bra)
            || ket
                .amplitudes()
                .iter()
                .zip(bra.amplitudes())
                .all(|(a, b)| (*a - *b).norm() == T::zero());
        Ok(Self {
            dim,
            entries,
            hermitian,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn entry(&self, row: usize, col: usize) -> C<T> {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C<T>] {
        &self.entries
    }

    /// max |H[i][j] - conj(H[j][i])|.
    pub fn hermiticity_deviation(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let d = (self.entry(i, j) - self.entry(j, i).conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// H |v⟩; the result makes no norm promise.
    pub fn apply(&self, v: &StateVector<T>) -> Result<StateVector<T>> {
        if self.dim != v.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: v.dim(),
                context: "operator application",
            });
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim];
        for (row, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            let base = row * self.dim;
            for col in 0..self.dim {
                acc += self.entries[base + col] * v.amplitudes[col];
            }
            *slot = acc;
        }
        Ok(StateVector::free(out))
    }

    /// ⟨v|H|v⟩.
    pub fn expectation(&self, v: &StateVector<T>) -> Result<C<T>> {
        let hv = self.apply(v)?;
        inner(v, &hv)
    }

    pub fn adjoint(&self) -> Operator<T> {
        let mut entries = vec![Complex::new(T::zero(), T::zero()); self.dim * self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries[j * self.dim + i] = self.entry(i, j).conj();
            }
        }
        Operator {
            dim: self.dim,
            entries,
            hermitian: self.hermitian,
        }
    }

    pub fn add(&self, other: &Operator<T>) -> Result<Operator<T>> {
        self.zip_with(other, |a, b| a + b, "operator addition")
    }

    pub fn sub(&self, other: &Operator<T>) -> Result<Operator<T>> {
        self.zip_with(other, |a, b| a - b, "operator subtraction")
    }

    fn zip_with(
        &self,
        other: &Operator<T>,
        f: impl Fn(C<T>, C<T>) -> C<T>,
        context: &'static str,
    ) -> Result<Operator<T>> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
                context,
            });
        }
        Ok(Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn scaled(&self, factor: C<T>) -> Operator<T> {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * factor).collect(),
            hermitian: self.hermitian && factor.im == T::zero(),
        }
    }

    /// Adds `shift * 1` to the operator.
    pub fn shifted(&self, shift: T) -> Operator<T> {
        let mut out = self.clone();
        for k in 0..self.dim {
            out.entries[k * self.dim + k] += cre(shift);
        }
        out
    }

    /// Matrix product self * other.
    pub fn matmul(&self, other: &Operator<T>) -> Result<Operator<T>> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
                context: "matrix product",
            });
        }
        let n = self.dim;
        let mut entries = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Operator::general(n, entries)
    }

    /// Kronecker product, leftmost factor slowest (matches `tensor`).
    pub fn kron(&self, other: &Operator<T>) -> Operator<T> {
        let n = self.dim;
        let m = other.dim;
        let nm = n * m;
        let mut entries = vec![Complex::new(T::zero(), T::zero()); nm * nm];
        for i in 0..n {
            for j in 0..n {
                let a = self.entries[i * n + j];
                for p in 0..m {
                    for q in 0..m {
                        entries[(i * m + p) * nm + (j * m + q)] = a * other.entries[p * m + q];
                    }
                }
            }
        }
        Operator {
            dim: nm,
            entries,
            hermitian: self.hermitian && other.hermitian,
        }
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> T {
        self.entries
            .iter()
            .map(|e| e.norm_sqr())
            .fold(T::zero(), |s, x| s + x)
            .sqrt()
    }
}

/// Contracts `op` on both sides with `state` living in the given `factor`,
/// returning the operator on the complementary factors.
///
/// For a two-factor space with `factor = 1` this is the partial sandwich
/// ⟨b|Op|b⟩ acting on the first factor.
pub fn partial_expectation<T: Real>(
    op: &Operator<T>,
    factorization: &TensorFactorization,
    factor: usize,
    state: &StateVector<T>,
) -> Result<Operator<T>> {
    let dims = factorization.dims();
    if factor >= dims.len() {
        return Err(Error::invalid(
            "factor",
            format!("factor {factor} out of range"),
        ));
    }
    let ambient: usize = dims.iter().product();
    if op.dim() != ambient {
        return Err(Error::DimensionMismatch {
            left: op.dim(),
            right: ambient,
            context: "partial expectation operator",
        });
    }
    let df = dims[factor];
    if state.dim() != df {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: df,
            context: "partial expectation state",
        });
    }
    let dc = factorization.complement_dim(factor);
    let mut entries = vec![Complex::new(T::zero(), T::zero()); dc * dc];
    for ci in 0..dc {
        for cj in 0..dc {
            let mut acc = Complex::new(T::zero(), T::zero());
            for a in 0..df {
                let row = factorization.embed(factor, ci, a);
                let sa = state.amplitude(a).conj();
                if sa == Complex::new(T::zero(), T::zero()) {
                    continue;
                }
                for b in 0..df {
                    let col = factorization.embed(factor, cj, b);
                    acc += sa * op.entry(row, col) * state.amplitude(b);
                }
            }
            entries[ci * dc + cj] = acc;
        }
    }
    let mut out = Operator::general(dc, entries)?;
    // a Hermitian sandwich stays Hermitian
    out.hermitian = op.hermitian;
    Ok(out)
}

/// Splits `v` into components parallel and perpendicular to the normalised
/// `reference`: v = ⟨ref|v⟩ ref + v_perp. Returns (parallel coefficient,
/// perpendicular part).
pub fn split_parallel<T: Real>(
    v: &StateVector<T>,
    reference: &StateVector<T>,
) -> Result<(C<T>, StateVector<T>)> {
    let coeff = inner(reference, v)?;
    let perp = v.axpy(-coeff, reference)?;
    Ok((coeff, perp))
}

/// Eigendecomposition of a Hermitian operator by cyclic Jacobi rotations.
///
/// Returns ascending real eigenvalues and the unitary of eigenvectors as
/// columns, such that H = V diag(w) V^dagger.
pub fn eigh<T: Real>(op: &Operator<T>) -> Result<(Vec<T>, Operator<T>)> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: op.hermiticity_deviation().to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = op.dim();
    let mut a = op.entries.clone();
    let mut v = Operator::<T>::identity(n).entries;
    let scale = op.frobenius().max(T::one());
    let tol = T::epsilon() * scale * real::<T>(1e2);
    let max_sweeps = 64;

    for _sweep in 0..max_sweeps {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= tol * real::<T>(1e-3) {
                    continue;
                }
                // phase that makes the pivot real, then a classical
                // symmetric Jacobi rotation on the 2x2 block
                let phase = apq.unscale(mag); // e^{i arg}
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (mag + mag);
                let t = {
                    let s = if tau >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    s / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // column rotation matrix R: R[p][p]=c, R[p][q]=s*phase,
                // R[q][p]=-s*conj(phase), R[q][q]=c; apply A <- R^dag A R
                let rpp = cre(c);
                let rpq = phase.scale(s);
                let rqp = -phase.conj().scale(s);
                let rqq = cre(c);
                // rows of A
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = rpp.conj() * apj + rqp.conj() * aqj;
                    a[q * n + j] = rpq.conj() * apj + rqq.conj() * aqj;
                }
                // columns of A
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = aip * rpp + aiq * rqp;
                    a[i * n + q] = aip * rpq + aiq * rqq;
                }
                // accumulate V <- V R
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip * rpp + viq * rqp;
                    v[i * n + q] = vip * rpq + viq * rqq;
                }
            }
        }
    }

    let mut pairs: Vec<(T, usize)> = (0..n).map(|k| (a[k * n + k].re, k)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let eigenvalues: Vec<T> = pairs.iter().map(|&(w, _)| w).collect();
    let mut vs = vec![Complex::new(T::zero(), T::zero()); n * n];
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for row in 0..n {
            vs[row * n + new_col] = v[row * n + old_col];
        }
    }
    Ok((
        eigenvalues,
        Operator {
            dim: n,
            entries: vs,
            hermitian: false,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateVector<f64> {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        StateVector::unit(amps).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Operator<f64> {
        let mut entries = vec![c(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = c(rng.random::<f64>() - 0.5, 0.0);
            for j in (i + 1)..dim {
                let z = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                entries[i * dim + j] = z;
                entries[j * dim + i] = z.conj();
            }
        }
        Operator::hermitian(dim, entries).unwrap()
    }

    #[test]
    fn inner_product_conventions() {
        // oracle by hand: u = (1, i)/sqrt(2), v = (1, 1)/sqrt(2)
        // <u|v> = (conj(1)*1 + conj(i)*1)/2 = (1 - i)/2
        let u = StateVector::normalized(vec![c(1.0 / 2f64.sqrt(), 0.0), c(0.0, 1.0 / 2f64.sqrt())])
            .unwrap();
        let v = StateVector::normalized(vec![c(1.0 / 2f64.sqrt(), 0.0), c(1.0 / 2f64.sqrt(), 0.0)])
            .unwrap();
        let ip = inner(&u, &v).unwrap();
        assert!((ip - c(0.5, -0.5)).norm() < 1e-15);
        // conjugate symmetry
        let ip2 = inner(&v, &u).unwrap();
        assert!((ip2 - ip.conj()).norm() < 1e-15);
    }

    #[test]
    fn normalized_constructor_rejects_bad_norm() {
        let err = StateVector::normalized(vec![c(1.0, 0.0), c(0.5, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn tensor_leftmost_slowest() {
        // (a0,a1) x (b0,b1,b2) -> index i*3+j
        let u = StateVector::free(vec![c(1.0, 0.0), c(2.0, 0.0)]);
        let v = StateVector::free(vec![c(3.0, 0.0), c(5.0, 0.0), c(7.0, 0.0)]);
        let t = tensor(&u, &v);
        let expect = [3.0, 5.0, 7.0, 6.0, 10.0, 14.0];
        for (k, &e) in expect.iter().enumerate() {
            assert_eq!(t.amplitude(k), c(e, 0.0));
        }
    }

    #[test]
    fn tensor_bilinear_and_norm_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let u = random_state(&mut rng, 3);
            let v = random_state(&mut rng, 4);
            let t = tensor(&u, &v);
            assert!((t.norm() - u.norm() * v.norm()).abs() < 1e-12);
            // bilinearity in the left argument
            let w = random_state(&mut rng, 3);
            let lhs = tensor(&u.add(&w).unwrap(), &v);
            let rhs = tensor(&u, &v).add(&tensor(&w, &v)).unwrap();
            for k in 0..12 {
                assert!((lhs.amplitude(k) - rhs.amplitude(k)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn apply_is_linear_and_hermitian_expectation_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random_hermitian(&mut rng, 5);
        let u = random_state(&mut rng, 5);
        let v = random_state(&mut rng, 5);
        let a = c(0.3, -0.7);
        let lin_lhs = h.apply(&u.axpy(a, &v).unwrap()).unwrap();
        let lin_rhs = h.apply(&u).unwrap().axpy(a, &h.apply(&v).unwrap()).unwrap();
        for k in 0..5 {
            assert!((lin_lhs.amplitude(k) - lin_rhs.amplitude(k)).norm() < 1e-12);
        }
        let e = h.expectation(&u).unwrap();
        assert!(e.im.abs() < 1e-12);
    }

    #[test]
    fn hermitian_constructor_rejects_non_hermitian() {
        let err = Operator::hermitian(2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn partial_expectation_two_qubit_hand_oracle() {
        // oracle by hand: Op = Z (x) X on 2x2 factors, contract factor 1
        // with |b> = (|0>+|1>)/sqrt2. <b|X|b> = 1, so result must be Z * 1.
        let z = Operator::diagonal(&[1.0, -1.0]);
        let x = Operator::hermitian(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let op = z.kron(&x);
        let fact = TensorFactorization::new(vec![2, 2], 4).unwrap();
        let b = StateVector::normalized(vec![c(1.0 / 2f64.sqrt(), 0.0), c(1.0 / 2f64.sqrt(), 0.0)])
            .unwrap();
        let got = partial_expectation(&op, &fact, 1, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((got.entry(i, j) - z.entry(i, j)).norm() < 1e-14);
            }
        }
        // contracting factor 0 with |0>: <0|Z|0> = 1, result must be X.
        let k0 = StateVector::basis(2, 0).unwrap();
        let got0 = partial_expectation(&op, &fact, 0, &k0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((got0.entry(i, j) - x.entry(i, j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn partial_expectation_full_sandwich_consistency() {
        // contracting both factors one after the other equals <a(x)b|Op|a(x)b>
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..25 {
            let h = random_hermitian(&mut rng, 6);
            let fact = TensorFactorization::new(vec![3, 2], 6).unwrap();
            let a = random_state(&mut rng, 3);
            let b = random_state(&mut rng, 2);
            let on_a = partial_expectation(&h, &fact, 1, &b).unwrap();
            let scalar = on_a.expectation(&a).unwrap();
            let full = h.expectation(&tensor(&a, &b)).unwrap();
            assert!((scalar - full).norm() < 1e-12);
            assert!(on_a.hermiticity_deviation() < 1e-12);
        }
    }

    #[test]
    fn partial_expectation_three_factor_middle() {
        // contract the middle factor of a triple Kronecker product; oracle is
        // the Kronecker of the outer factors scaled by <s|M|s>
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = random_hermitian(&mut rng, 2);
        let m = random_hermitian(&mut rng, 3);
        let b = random_hermitian(&mut rng, 2);
        let op = a.kron(&m).kron(&b);
        let fact = TensorFactorization::new(vec![2, 3, 2], 12).unwrap();
        let s = random_state(&mut rng, 3);
        let got = partial_expectation(&op, &fact, 1, &s).unwrap();
        let scalar = m.expectation(&s).unwrap();
        let expect = a.kron(&b).scaled(scalar);
        for i in 0..4 {
            for j in 0..4 {
                assert!((got.entry(i, j) - expect.entry(i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn factorization_rejects_wrong_product() {
        let err = TensorFactorization::new(vec![2, 3], 5).unwrap_err();
        assert!(matches!(
            err,
            Error::BadFactorization {
                product: 6,
                ambient: 5
            }
        ));
    }

    #[test]
    fn split_parallel_reconstructs_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let reference = random_state(&mut rng, 4);
            let v = StateVector::free(
                (0..4)
                    .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect(),
            );
            let (coeff, perp) = split_parallel(&v, &reference).unwrap();
            let rebuilt = perp.axpy(coeff, &reference).unwrap();
            for k in 0..4 {
                assert!((rebuilt.amplitude(k) - v.amplitude(k)).norm() < 1e-12);
            }
            assert!(inner(&reference, &perp).unwrap().norm() < 1e-12);
            // norm pythagoras
            let lhs = v.norm_sqr();
            let rhs = perp.norm_sqr() + coeff.norm_sqr();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_reconstructs_and_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for &dim in &[2usize, 3, 5, 8] {
            let h = random_hermitian(&mut rng, dim);
            let (w, v) = eigh(&h).unwrap();
            // ascending
            for k in 1..dim {
                assert!(w[k] >= w[k - 1]);
            }
            // V unitary: V^dag V = 1
            let vdv = v.adjoint().matmul(&v).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((vdv.entry(i, j) - c(expect, 0.0)).norm() < 1e-12);
                }
            }
            // H = V diag(w) V^dag
            let rebuilt = v
                .matmul(&Operator::diagonal(&w))
                .unwrap()
                .matmul(&v.adjoint())
                .unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    assert!((rebuilt.entry(i, j) - h.entry(i, j)).norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn eigh_known_two_level_oracle() {
        // oracle by hand: H = [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let h = Operator::hermitian(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)])
            .unwrap();
        let (w, _) = eigh(&h).unwrap();
        assert!((w[0] - 0.0).abs() < 1e-14);
        assert!((w[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kron_mixed_product_identity() {
        // (A x B)(C x D) = (AC) x (BD)
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 3);
        let cm = random_hermitian(&mut rng, 2);
        let d = random_hermitian(&mut rng, 3);
        let lhs = a.kron(&b).matmul(&cm.kron(&d)).unwrap();
        let rhs = a.matmul(&cm).unwrap().kron(&b.matmul(&d).unwrap());
        assert_eq!(lhs.dim(), 6);
        for k in 0..6 * 6 {
            let (i, j) = (k / 6, k % 6);
            assert!((lhs.entry(i, j) - rhs.entry(i, j)).norm() < 1e-12);
        }
    }

    #[test]
    fn f32_instantiation_smoke() {
        let u: StateVector<f32> =
            StateVector::unit(vec![Complex::new(1.0f32, 0.0), Complex::new(0.0, 2.0)]).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-6);
        let h: Operator<f32> = Operator::diagonal(&[1.0, -1.0]);
        let e = h.expectation(&u).unwrap();
        assert!((e.re - (0.2f32 - 0.8)).abs() < 1e-5);
    }
}
