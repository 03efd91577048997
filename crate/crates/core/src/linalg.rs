//! Dense complex matrices, SVD-based affine solves and damped Newton.
//!
//! The SVD itself comes from `nalgebra`; everything here is small (at most
//! 108×108), so no attempt is made at blocking or sparsity.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(
            n,
            n,
            |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) },
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        ComplexMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let base = i * out.cols;
                for (j, &b) in orow.iter().enumerate() {
                    out.data[base + j] += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "shape mismatch in product");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.max_abs_diff(&self.transpose())
    }

    /// `‖A·A† − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        self.mul(&self.adjoint()).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let c = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(ComplexMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|[a, b]| C64::new(a, b)).collect())
                .collect(),
        ))
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solutions of `A x = z` as `particular + span(basis)`.
#[derive(Clone, Debug)]
pub struct AffineSolutionSet {
    pub particular: Vec<C64>,
    pub basis: Vec<Vec<C64>>,
    pub rank: usize,
    pub consistent: bool,
    /// `‖A·particular − z‖₂`.
    pub residual: f64,
}

/// Minimum-norm least-squares solve with an SVD rank cut at
/// `rank_tol · σ_max`.
///
/// Works on the real `2m × 2n` embedding: nalgebra's complex SVD loses
/// accuracy on some of the matrices that occur here.
pub fn solve_affine(a: &ComplexMatrix, z: &[C64], rank_tol: f64) -> AffineSolutionSet {
    assert_eq!(a.rows(), z.len(), "rhs length");
    let (m, n) = (a.rows(), a.cols());
    let dim = 2 * m.max(n);
    let mut re = DMatrix::<f64>::zeros(dim, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let v = a[(i, j)];
            re[(i, j)] = v.re;
            re[(i, j + n)] = -v.im;
            re[(i + m, j)] = v.im;
            re[(i + m, j + n)] = v.re;
        }
    }
    let mut rhs = vec![0.0; dim];
    for i in 0..m {
        rhs[i] = z[i].re;
        rhs[i + m] = z[i].im;
    }
    let svd = re.svd(true, true);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let sig = &svd.singular_values;
    let smax = sig.iter().cloned().fold(0.0, f64::max);
    let thr = rank_tol * smax;
    let mut x = vec![0.0; 2 * n];
    let mut null = Vec::new();
    for (k, &s) in sig.iter().enumerate() {
        if s > thr && s > 0.0 {
            let coef: f64 = (0..dim).map(|i| u[(i, k)] * rhs[i]).sum::<f64>() / s;
            for (j, p) in x.iter_mut().enumerate() {
                *p += vt[(k, j)] * coef;
            }
        } else {
            null.push((0..n).map(|j| C64::new(vt[(k, j)], vt[(k, j + n)])).collect::<Vec<_>>());
        }
    }
    // Real null vectors come in pairs `v`, `i·v`; keep a complex-independent set.
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for mut v in null {
        for w in &basis {
            orth_against(&mut v, w);
        }
        let nv = norm2(&v);
        if nv > 0.5 {
            basis.push(v.iter().map(|x| x / nv).collect());
        }
    }
    let particular: Vec<C64> = (0..n).map(|j| C64::new(x[j], x[j + n])).collect();
    let ax = a.mul_vec(&particular);
    let residual = norm2(&ax.iter().zip(z).map(|(p, q)| p - q).collect::<Vec<_>>());
    let consistent = residual <= rank_tol * norm2(z).max(f64::MIN_POSITIVE);
    AffineSolutionSet {
        particular,
        rank: n - basis.len(),
        basis,
        consistent,
        residual,
    }
}

fn orth_against(v: &mut [C64], w: &[C64]) {
    let c: C64 = w.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    for (x, y) in v.iter_mut().zip(w) {
        *x -= c * y;
    }
}

/// Finite-difference step for Newton Jacobians.
pub const FD_STEP: f64 = 1e-7;

/// Damped Newton (Gauss–Newton for non-square systems) on a complex residual
/// treated as a real map `ℝ^{2n} → ℝ^{2m}`.
///
/// Returns `Err(final ‖F‖∞)` when `max_iter` steps do not reach `tol`.
pub fn newton_polish<F>(residual: F, x0: &[C64], tol: f64, max_iter: usize) -> Result<Vec<C64>, f64>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let mut x = x0.to_vec();
    let mut f = residual(&x);
    let mut fnorm = norm_inf(&f);
    for _ in 0..max_iter {
        if fnorm < tol {
            return Ok(x);
        }
        let jac = real_jacobian(&residual, &x);
        let rhs = DVector::from_iterator(2 * f.len(), f.iter().flat_map(|z| [-z.re, -z.im]));
        let step = match jac.svd(true, true).solve(&rhs, 1e-14) {
            Ok(s) => s,
            Err(_) => return Err(fnorm),
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-6 {
            let trial: Vec<C64> = x
                .iter()
                .enumerate()
                .map(|(i, z)| z + C64::new(step[2 * i], step[2 * i + 1]) * alpha)
                .collect();
            let ft = residual(&trial);
            let ftn = norm_inf(&ft);
            if ftn.is_finite() && ftn < fnorm {
                x = trial;
                f = ft;
                fnorm = ftn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if fnorm < tol {
        Ok(x)
    } else {
        Err(fnorm)
    }
}

fn real_jacobian<F>(residual: &F, x: &[C64]) -> DMatrix<f64>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = x.len();
    let m = residual(x).len();
    let mut jac = DMatrix::<f64>::zeros(2 * m, 2 * n);
    let mut xp = x.to_vec();
    for k in 0..2 * n {
        let dir = if k % 2 == 0 {
            C64::new(FD_STEP, 0.0)
        } else {
            C64::new(0.0, FD_STEP)
        };
        let i = k / 2;
        xp[i] = x[i] + dir;
        let fp = residual(&xp);
        xp[i] = x[i] - dir;
        let fm = residual(&xp);
        xp[i] = x[i];
        for r in 0..m {
            let d = (fp[r] - fm[r]) / (2.0 * FD_STEP);
            jac[(2 * r, k)] = d.re;
            jac[(2 * r + 1, k)] = d.im;
        }
    }
    jac
}
