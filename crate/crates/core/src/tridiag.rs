//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration with a pivoted tridiagonal LU factorization.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit 2-norm eigenvector.
    pub vector: Vec<f64>,
    /// `||T v - value v||_2`.
    pub residual: f64,
    pub converged: bool,
}

const MAX_BISECTIONS: usize = 200;
const MAX_INVERSE_ITERATIONS: usize = 8;

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        if off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "off-diagonal has {} entries for a {}x{} matrix",
                off.len(),
                diag.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix entries must be finite".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// `T + c I`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|d| d + c).collect(),
            off: self.off.clone(),
        }
    }

    /// Interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn norm_inf(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(1.0f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * emax
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() <= pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() <= pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based), bracketed from below by `floor`.
    fn bisect(&self, index: usize, floor: f64, ceiling: f64) -> f64 {
        let mut lo = floor;
        let mut hi = ceiling;
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn eigenvalue(&self, index: usize) -> Result<f64> {
        if index >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue {index} requested from a {}x{} matrix",
                self.len(),
                self.len()
            )));
        }
        let (lo, hi) = self.widened_bounds();
        Ok(self.bisect(index, lo, hi))
    }

    fn widened_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.gershgorin();
        let pad = 2.0 * f64::EPSILON * self.norm_inf().max(1.0) * self.len() as f64 + self.pivmin();
        (lo - pad, hi + pad)
    }

    /// The `count` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        if count > self.len() {
            return Err(Error::InvalidParameter(format!(
                "{count} eigenvalues requested from a {}x{} matrix",
                self.len(),
                self.len()
            )));
        }
        let (lo, hi) = self.widened_bounds();
        let mut values: Vec<f64> = Vec::with_capacity(count);
        for index in 0..count {
            let floor = values.last().copied().unwrap_or(lo).max(lo);
            values.push(self.bisect(index, floor, hi));
        }
        Ok(values)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        self.matvec(x)
            .iter()
            .zip(x)
            .map(|(tx, xi)| {
                let r = tx - lambda * xi;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Inverse iteration for the eigenvector of `lambda`, kept orthogonal
    /// to `previous`.
    pub fn eigenvector(&self, lambda: f64, previous: &[Vec<f64>]) -> EigenPair {
        let n = self.len();
        let norm = self.norm_inf().max(f64::MIN_POSITIVE);
        let tol = 16.0 * (n as f64).sqrt() * f64::EPSILON * norm;
        let lu = ShiftedLu::factor(self, lambda, f64::EPSILON * norm);

        let mut x = start_vector(n);
        let mut residual = f64::INFINITY;
        let mut converged = false;
        for iteration in 0..MAX_INVERSE_ITERATIONS {
            orthogonalize(&mut x, previous);
            lu.solve(&mut x);
            orthogonalize(&mut x, previous);
            if !normalize(&mut x) {
                x = start_vector(n);
                continue;
            }
            residual = self.residual(lambda, &x);
            if iteration >= 1 && residual <= tol {
                converged = true;
                break;
            }
        }
        EigenPair {
            value: lambda,
            vector: x,
            residual,
            converged,
        }
    }

    /// The `count` lowest eigenpairs, eigenvectors mutually orthogonal.
    pub fn lowest_eigenpairs(&self, count: usize) -> Result<Vec<EigenPair>> {
        let values = self.lowest_eigenvalues(count)?;
        let mut pairs: Vec<EigenPair> = Vec::with_capacity(count);
        for value in values {
            let previous: Vec<Vec<f64>> = pairs.iter().map(|p| p.vector.clone()).collect();
            pairs.push(self.eigenvector(value, &previous));
        }
        Ok(pairs)
    }
}

fn start_vector(n: usize) -> Vec<f64> {
    // Fixed xorshift sequence so results are reproducible.
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            0.5 + (state >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

fn orthogonalize(x: &mut [f64], against: &[Vec<f64>]) {
    for v in against {
        let dot: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi -= dot * vi;
        }
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return false;
    }
    for v in x.iter_mut() {
        *v /= scale;
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
    true
}

/// LU factors of `T - lambda I` with partial pivoting.
struct ShiftedLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, lambda: f64, tiny: f64) -> Self {
        let n = t.len();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - lambda).collect();
        let mut du = t.off.clone();
        let mut dl = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self {
            d,
            du,
            du2,
            dl,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 200;
        let t = laplacian(n);
        let values = t.lowest_eigenvalues(5).unwrap();
        for (j, v) in values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * PI / (n + 1) as f64).cos();
            assert_relative_eq!(*v, exact, max_relative = 1e-10);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let t = laplacian(300);
        let pairs = t.lowest_eigenpairs(4).unwrap();
        for (i, p) in pairs.iter().enumerate() {
            assert!(p.converged, "pair {i} residual {}", p.residual);
            let norm: f64 = p.vector.iter().map(|v| v * v).sum();
            assert_relative_eq!(norm, 1.0, max_relative = 1e-12);
            for q in &pairs[..i] {
                let dot: f64 = p.vector.iter().zip(&q.vector).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shape_errors() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![1.0, f64::NAN], vec![0.0]).is_err());
        assert!(laplacian(5).lowest_eigenvalues(6).is_err());
    }

    #[test]
    fn one_by_one() {
        let t = SymTridiagonal::new(vec![3.5], vec![]).unwrap();
        let pairs = t.lowest_eigenpairs(1).unwrap();
        assert_relative_eq!(pairs[0].value, 3.5, max_relative = 1e-14);
        assert_relative_eq!(pairs[0].vector[0].abs(), 1.0);
    }

    proptest! {
        #[test]
        fn sturm_count_matches_eigenvalues(
            diag in prop::collection::vec(-10.0f64..10.0, 12),
            off in prop::collection::vec(-3.0f64..3.0, 11),
        ) {
            let t = SymTridiagonal::new(diag, off).unwrap();
            let values = t.lowest_eigenvalues(12).unwrap();
            for w in values.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            let trace: f64 = t.diag().iter().sum();
            prop_assert!((values.iter().sum::<f64>() - trace).abs() < 1e-9 * (1.0 + trace.abs()));
        }

        #[test]
        fn shift_moves_every_eigenvalue(
            diag in prop::collection::vec(-5.0f64..5.0, 30),
            off in prop::collection::vec(0.1f64..2.0, 29),
            c in -50.0f64..50.0,
        ) {
            let t = SymTridiagonal::new(diag, off).unwrap();
            let base = t.lowest_eigenvalues(3).unwrap();
            let moved = t.shifted(c).lowest_eigenvalues(3).unwrap();
            for (a, b) in base.iter().zip(&moved) {
                prop_assert!((b - a - c).abs() < 1e-10 * (1.0 + c.abs()));
            }
        }
    }
}
