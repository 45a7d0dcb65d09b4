//! Sparse symmetric factorizations with a fixed pattern, backed by faer.
//!
//! The pattern (upper triangle, CSC) is analysed once with AMD ordering and
//! then refactored numerically as often as needed.

use std::collections::BTreeSet;

use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::linalg::cholesky::llt::factor::LltRegularization;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, LdltRef, LltRef, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par, Side};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinSolveError {
    #[error("symbolic analysis failed: {0}")]
    Symbolic(String),
    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),
    #[error("zero pivot at {0}")]
    ZeroPivot(usize),
    #[error("no numeric factorization available")]
    NotFactored,
}

/// Upper-triangular CSC pattern of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymPattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl SymPattern {
    /// Builds the pattern from `(row, col)` pairs in either triangle; the
    /// diagonal is always included.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut cols: Vec<BTreeSet<usize>> = (0..n).map(|j| BTreeSet::from([j])).collect();
        for (r, c) in entries {
            let (r, c) = if r <= c { (r, c) } else { (c, r) };
            cols[c].insert(r);
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for set in cols {
            row_idx.extend(set);
            col_ptr.push(row_idx.len());
        }
        Self { n, col_ptr, row_idx }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Position of entry `(r, c)` (either triangle) in the value array.
    pub fn index(&self, r: usize, c: usize) -> Option<usize> {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        let lo = self.col_ptr[c];
        let hi = self.col_ptr[c + 1];
        self.row_idx[lo..hi].binary_search(&r).ok().map(|k| lo + k)
    }

    pub fn diag_index(&self, j: usize) -> usize {
        // the diagonal is the last stored row of an upper column
        self.col_ptr[j + 1] - 1
    }

    /// Symmetric Ruiz equilibration: returns `d` such that `diag(d) A diag(d)`
    /// has rows of max-abs close to one.
    pub fn equilibrate(&self, vals: &[f64], passes: usize) -> Vec<f64> {
        let mut d = vec![1.0; self.n];
        let mut rmax = vec![0.0f64; self.n];
        for _ in 0..passes {
            rmax.iter_mut().for_each(|v| *v = 0.0);
            for c in 0..self.n {
                for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                    let r = self.row_idx[k];
                    let v = (d[r] * vals[k] * d[c]).abs();
                    rmax[r] = rmax[r].max(v);
                    rmax[c] = rmax[c].max(v);
                }
            }
            let mut done = true;
            for (di, &m) in d.iter_mut().zip(&rmax) {
                if m > 0.0 && m.is_finite() {
                    *di /= m.sqrt();
                    done &= (m - 1.0).abs() < 1e-2;
                }
            }
            if done {
                break;
            }
        }
        d
    }

    /// Values of `diag(d) A diag(d)`.
    pub fn scale_values(&self, vals: &[f64], d: &[f64]) -> Vec<f64> {
        let mut out = vals.to_vec();
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                out[k] *= d[self.row_idx[k]] * d[c];
            }
        }
        out
    }

    fn symbolic(&self) -> SymbolicSparseColMatRef<'_, usize> {
        SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.col_ptr, None, &self.row_idx)
    }

    /// `y += A x` for the symmetric matrix with upper values `vals`.
    pub fn sym_matvec(&self, vals: &[f64], x: &[f64], y: &mut [f64]) {
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                let r = self.row_idx[k];
                let v = vals[k];
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    None,
    Llt,
    Ldlt,
}

/// Reusable factorization for one pattern.
pub struct SymFactor {
    pattern: SymPattern,
    symbolic: SymbolicCholesky<usize>,
    l_values: Vec<f64>,
    mem: MemBuffer,
    kind: Kind,
}

impl SymFactor {
    pub fn analyze(pattern: SymPattern) -> Result<Self, LinSolveError> {
        let symbolic = factorize_symbolic_cholesky(
            pattern.symbolic(),
            Side::Upper,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams::default(),
        )
        .map_err(|e| LinSolveError::Symbolic(format!("{e:?}")))?;
        let req = StackReq::any_of(&[
            symbolic.factorize_numeric_ldlt_scratch::<f64>(Par::Seq, Default::default()),
            symbolic.factorize_numeric_llt_scratch::<f64>(Par::Seq, Default::default()),
            symbolic.solve_in_place_scratch::<f64>(1, Par::Seq),
        ]);
        let mem = MemBuffer::new(req);
        let l_values = vec![0.0; symbolic.len_val()];
        Ok(Self { pattern, symbolic, l_values, mem, kind: Kind::None })
    }

    pub fn pattern(&self) -> &SymPattern {
        &self.pattern
    }

    /// Cholesky factorization; fails when a pivot is not positive.
    pub fn factor_llt(&mut self, vals: &[f64]) -> Result<(), LinSolveError> {
        self.kind = Kind::None;
        let a = SparseColMatRef::new(self.pattern.symbolic(), vals);
        let stack = MemStack::new(&mut self.mem);
        self.symbolic
            .factorize_numeric_llt(
                &mut self.l_values,
                a,
                Side::Upper,
                LltRegularization { dynamic_regularization_delta: 0.0, dynamic_regularization_epsilon: 0.0 },
                Par::Seq,
                stack,
                Default::default(),
            )
            .map_err(|e| match e {
                faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index } => {
                    LinSolveError::NotPositiveDefinite(index)
                }
            })?;
        self.kind = Kind::Llt;
        Ok(())
    }

    /// LDLᵀ with dynamic regularization: pivot `i` is forced to sign
    /// `signs[i]` with magnitude at least `delta` whenever it is smaller than
    /// `eps` or of the wrong sign.
    pub fn factor_ldlt(&mut self, vals: &[f64], signs: &[i8], delta: f64, eps: f64) -> Result<(), LinSolveError> {
        self.kind = Kind::None;
        let a = SparseColMatRef::new(self.pattern.symbolic(), vals);
        let stack = MemStack::new(&mut self.mem);
        self.symbolic
            .factorize_numeric_ldlt(
                &mut self.l_values,
                a,
                Side::Upper,
                LdltRegularization {
                    dynamic_regularization_signs: Some(signs),
                    dynamic_regularization_delta: delta,
                    dynamic_regularization_epsilon: eps,
                },
                Par::Seq,
                stack,
                Default::default(),
            )
            .map_err(|e| match e {
                faer::linalg::cholesky::ldlt::factor::LdltError::ZeroPivot { index } => {
                    LinSolveError::ZeroPivot(index)
                }
            })?;
        self.kind = Kind::Ldlt;
        Ok(())
    }

    pub fn solve_in_place(&mut self, rhs: &mut [f64]) -> Result<(), LinSolveError> {
        let n = self.pattern.n;
        let stack = MemStack::new(&mut self.mem);
        let m = MatMut::from_column_major_slice_mut(rhs, n, 1);
        match self.kind {
            Kind::Llt => LltRef::new(&self.symbolic, &self.l_values).solve_in_place_with_conj(Conj::No, m, Par::Seq, stack),
            Kind::Ldlt => {
                LdltRef::new(&self.symbolic, &self.l_values).solve_in_place_with_conj(Conj::No, m, Par::Seq, stack)
            }
            Kind::None => return Err(LinSolveError::NotFactored),
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(LinSolveError::ZeroPivot(usize::MAX));
        }
        Ok(())
    }

    /// Solves `A x = b` with iterative refinement against `vals` (which may
    /// differ slightly from the factored values, e.g. without regularization).
    /// A correction is kept only if it lowers the residual.
    pub fn solve_refined(&mut self, vals: &[f64], b: &[f64], steps: usize) -> Result<Vec<f64>, LinSolveError> {
        let pattern = self.pattern.clone();
        let residual = |x: &[f64]| -> (Vec<f64>, f64) {
            let mut r = b.to_vec();
            let mut ax = vec![0.0; b.len()];
            pattern.sym_matvec(vals, x, &mut ax);
            for (ri, ai) in r.iter_mut().zip(&ax) {
                *ri -= ai;
            }
            let nrm = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            (r, nrm)
        };
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        let bnorm = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let (mut r, mut rnorm) = residual(&x);
        for _ in 0..steps {
            if rnorm <= 1e-16 * (1.0 + bnorm) {
                break;
            }
            let mut d = r.clone();
            self.solve_in_place(&mut d)?;
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
            let (tr, tn) = residual(&trial);
            if !(tn < rnorm) {
                break;
            }
            x = trial;
            r = tr;
            rnorm = tn;
        }
        Ok(x)
    }
}

impl SymFactor {
    /// Restarted GMRES on `A x = b` (values `vals`), right-preconditioned by
    /// the current factorization. Returns the solution and the final residual
    /// 2-norm.
    pub fn solve_gmres(
        &mut self,
        vals: &[f64],
        b: &[f64],
        restart: usize,
        cycles: usize,
        tol: f64,
    ) -> Result<(Vec<f64>, f64), LinSolveError> {
        let n = b.len();
        let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
        let pattern = self.pattern.clone();
        let matvec = |x: &[f64]| {
            let mut y = vec![0.0; n];
            pattern.sym_matvec(vals, x, &mut y);
            y
        };
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        let mut rnorm = 0.0;
        for _ in 0..cycles.max(1) {
            let ax = matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            rnorm = dot(&r, &r).sqrt();
            if rnorm <= tol || !rnorm.is_finite() {
                break;
            }
            let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / rnorm).collect()];
            let mut h: Vec<Vec<f64>> = Vec::new();
            let mut cs: Vec<(f64, f64)> = Vec::new();
            let mut g = vec![rnorm];
            for j in 0..restart {
                let mut z = basis[j].clone();
                self.solve_in_place(&mut z)?;
                let mut w = matvec(&z);
                let mut col = vec![0.0; j + 2];
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot(&w, v);
                    col[i] = hij;
                    w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
                }
                let wn = dot(&w, &w).sqrt();
                col[j + 1] = wn;
                for (i, &(c, s)) in cs.iter().enumerate() {
                    let (a, bb) = (col[i], col[i + 1]);
                    col[i] = c * a + s * bb;
                    col[i + 1] = -s * a + c * bb;
                }
                let den = col[j].hypot(col[j + 1]);
                let (c, s) = if den == 0.0 { (1.0, 0.0) } else { (col[j] / den, col[j + 1] / den) };
                col[j] = den;
                col[j + 1] = 0.0;
                cs.push((c, s));
                let gj = g[j];
                g[j] = c * gj;
                g.push(-s * gj);
                h.push(col);
                if g[j + 1].abs() <= tol || wn == 0.0 {
                    break;
                }
                basis.push(w.iter().map(|v| v / wn).collect());
            }
            let k = h.len();
            let mut yk = vec![0.0; k];
            for i in (0..k).rev() {
                let mut acc = g[i];
                for l in i + 1..k {
                    acc -= h[l][i] * yk[l];
                }
                yk[i] = if h[i][i] != 0.0 { acc / h[i][i] } else { 0.0 };
            }
            let mut u = vec![0.0; n];
            for (v, &c) in basis.iter().zip(&yk) {
                u.iter_mut().zip(v).for_each(|(ui, vi)| *ui += c * vi);
            }
            self.solve_in_place(&mut u)?;
            x.iter_mut().zip(&u).for_each(|(xi, ui)| *xi += ui);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LinSolveError::ZeroPivot(usize::MAX));
        }
        let ax = matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        rnorm = rnorm.min(dot(&r, &r).sqrt());
        Ok((x, rnorm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, d: f64) -> (SymPattern, Vec<f64>) {
        let pat = SymPattern::new(n, (1..n).map(|i| (i - 1, i)));
        let mut vals = vec![0.0; pat.nnz()];
        for i in 0..n {
            vals[pat.diag_index(i)] = d;
            if i > 0 {
                vals[pat.index(i - 1, i).unwrap()] = -1.0;
            }
        }
        (pat, vals)
    }

    #[test]
    fn llt_solves_spd() {
        let (pat, vals) = tridiag(6, 4.0);
        let mut f = SymFactor::analyze(pat.clone()).unwrap();
        f.factor_llt(&vals).unwrap();
        let b = vec![1.0; 6];
        let x = f.solve_refined(&vals, &b, 2).unwrap();
        let mut ax = vec![0.0; 6];
        pat.sym_matvec(&vals, &x, &mut ax);
        for v in ax {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn llt_rejects_indefinite() {
        let pat = SymPattern::new(2, [(0, 1)]);
        let mut vals = vec![0.0; pat.nnz()];
        vals[pat.diag_index(0)] = 1.0;
        vals[pat.diag_index(1)] = -1.0;
        let mut f = SymFactor::analyze(pat).unwrap();
        assert!(matches!(f.factor_llt(&vals), Err(LinSolveError::NotPositiveDefinite(_))));
    }

    #[test]
    fn ldlt_solves_quasidefinite() {
        // [[2, 1], [1, -1]] x = [3, 0] -> x = [1, 1]
        let pat = SymPattern::new(2, [(0, 1)]);
        let mut vals = vec![0.0; pat.nnz()];
        vals[pat.diag_index(0)] = 2.0;
        vals[pat.diag_index(1)] = -1.0;
        vals[pat.index(0, 1).unwrap()] = 1.0;
        let mut f = SymFactor::analyze(pat).unwrap();
        f.factor_ldlt(&vals, &[1, -1], 1e-12, 1e-14).unwrap();
        let x = f.solve_refined(&vals, &[3.0, 0.0], 2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilibration_balances_rows() {
        let pat = SymPattern::new(2, [(0, 1)]);
        let mut vals = vec![0.0; pat.nnz()];
        vals[pat.diag_index(0)] = 1e8;
        vals[pat.diag_index(1)] = 1e-6;
        vals[pat.index(0, 1).unwrap()] = 1.0;
        let d = pat.equilibrate(&vals, 20);
        let s = pat.scale_values(&vals, &d);
        assert!(s.iter().all(|v| v.abs() <= 1.0 + 1e-9));
        assert!((s[pat.diag_index(0)] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn gmres_corrects_a_poor_preconditioner() {
        let (pat, vals) = tridiag(30, 2.5);
        let mut f = SymFactor::analyze(pat.clone()).unwrap();
        let mut shifted = vals.clone();
        for i in 0..30 {
            shifted[pat.diag_index(i)] += 1.0;
        }
        f.factor_llt(&shifted).unwrap();
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let (x, res) = f.solve_gmres(&vals, &b, 30, 3, 1e-12).unwrap();
        assert!(res <= 1e-12);
        let mut ax = vec![0.0; 30];
        pat.sym_matvec(&vals, &x, &mut ax);
        for (a, bb) in ax.iter().zip(&b) {
            assert!((a - bb).abs() < 1e-11);
        }
    }

    #[test]
    fn pattern_lookup_is_symmetric() {
        let pat = SymPattern::new(4, [(3, 1), (0, 2)]);
        assert_eq!(pat.index(1, 3), pat.index(3, 1));
        assert!(pat.index(0, 3).is_none());
        assert_eq!(pat.nnz(), 6);
    }
}
