//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues, shifted inverse iteration for the eigenvectors.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix with diagonal `d[0..n]` and off-diagonal `e[0..n-1]`.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Self {
        assert_eq!(e.len(), d.len().saturating_sub(1), "off-diagonal length");
        Self { d, e }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of eigenvalues strictly below `lambda` (LDL^T inertia).
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let n = self.d.len();
        if n == 0 {
            return 0;
        }
        let guard = f64::MIN_POSITIVE / f64::EPSILON;
        let mut count = 0;
        let mut q = self.d[0] - lambda;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let qs = if q.abs() < guard { guard.copysign(q) } else { q };
            q = (self.d[i] - lambda) - self.e[i - 1] * self.e[i - 1] / qs;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n {
            let mut s = self.d[i] * x[i];
            if i > 0 {
                s += self.e[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.e[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// The `index`-th smallest eigenvalue (0-based), bracketed in `[lo, hi]`,
    /// to relative tolerance `rel_tol`. Also returns the final lower bracket,
    /// which still has at most `index` eigenvalues below it.
    pub fn bisect_eigenvalue(&self, index: usize, mut lo: f64, mut hi: f64, rel_tol: f64) -> (f64, f64) {
        debug_assert!(self.sturm_count(lo) <= index && self.sturm_count(hi) > index);
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) || mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (0.5 * (lo + hi), lo)
    }

    /// The lowest `count` eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, count: usize, rel_tol: f64) -> Vec<f64> {
        let count = count.min(self.len());
        let (glo, ghi) = self.gershgorin();
        let top = ghi + 1.0;
        let mut lo = glo - 1.0;
        let mut out: Vec<f64> = Vec::with_capacity(count);
        for index in 0..count {
            let base = out.last().copied().unwrap_or(lo);
            let mut step = 1e-2 * base.abs().max(1.0);
            let mut hi = (base + step).min(top);
            while hi < top && self.sturm_count(hi) <= index {
                step *= 2.0;
                hi = (base + step).min(top);
            }
            let (lam, new_lo) = self.bisect_eigenvalue(index, lo, hi, rel_tol);
            out.push(lam);
            lo = new_lo;
        }
        out
    }

    /// Eigenvector for the eigenvalue `lambda` by inverse iteration.
    /// Returns the unit vector and the final residual ||T x - lambda x||.
    pub fn inverse_iteration(
        &self,
        index: usize,
        lambda: f64,
        max_sweeps: usize,
        residual_tol: f64,
    ) -> Result<(Vec<f64>, f64)> {
        let n = self.len();
        let lu = TridiagLu::factor(self, lambda);
        // Deterministic start vector with components of both signs.
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).sin())
            .collect();
        normalize(&mut x);
        let mut work = vec![0.0; n];
        let mut residual = f64::INFINITY;
        let scale = self.gershgorin().1.abs().max(self.gershgorin().0.abs());
        for sweep in 0..max_sweeps {
            let mut y = x.clone();
            lu.solve(&mut y);
            normalize(&mut y);
            // Fix the sign so successive iterates are comparable.
            let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            if dot < 0.0 {
                y.iter_mut().for_each(|v| *v = -*v);
            }
            x = y;
            self.matvec(&x, &mut work);
            residual = work
                .iter()
                .zip(&x)
                .map(|(tx, xi)| (tx - lambda * xi).powi(2))
                .sum::<f64>()
                .sqrt();
            if sweep >= 1 && (residual <= residual_tol * scale || 1.0 - dot.abs() < 1e-15) {
                return Ok((x, residual));
            }
        }
        Err(Error::Solver {
            index,
            residual,
            sweeps: max_sweeps,
        })
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// LU factorization of T - sigma I with partial pivoting (second
/// superdiagonal fill-in), as in LAPACK's gttrf.
struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(t: &SymTridiagonal, sigma: f64) -> Self {
        let n = t.len();
        let mut d: Vec<f64> = t.d.iter().map(|v| v - sigma).collect();
        let mut dl = t.e.clone();
        let mut du = t.e.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * t.gershgorin().1.abs().max(1.0);
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
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = tiny.copysign(*v);
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swap,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * b[i + 2];
            }
            b[i] = s / self.d[i];
        }
    }
}
