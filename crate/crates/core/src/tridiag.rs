//! Symmetric tridiagonal eigensolver with a constant off-diagonal.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration with reorthogonalization inside clusters. Any index range can be
//! computed on its own, which is what makes high-frequency spectral windows
//! affordable: the cost is O(n) per eigenpair plus the cluster work.

/// Relative gap (in units of the local scale `|λ| + 4|e|`) below which neighbours are reorthogonalized.
const CLUSTER_GAP: f64 = 1e-6;
const INVERSE_ITERATIONS: usize = 3;

#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: f64,
}

/// LU factors of `T − λI` with partial pivoting (LAPACK `gttrf` layout).
struct ShiftedLu {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(t: &SymTridiag, shift: f64, pivmin: f64) -> Self {
        let n = t.diag.len();
        let mut a: Vec<f64> = t.diag.iter().map(|d| d - shift).collect();
        let mut b = vec![t.off; n.saturating_sub(1)];
        let mut c = vec![t.off; n.saturating_sub(1)];
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if a[i].abs() >= c[i].abs() {
                if a[i] != 0.0 {
                    let fact = c[i] / a[i];
                    c[i] = fact;
                    a[i + 1] -= fact * b[i];
                }
            } else {
                let fact = a[i] / c[i];
                a[i] = c[i];
                c[i] = fact;
                let temp = b[i];
                b[i] = a[i + 1];
                a[i + 1] = temp - fact * a[i + 1];
                if i + 2 < n {
                    du2[i] = b[i + 1];
                    b[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for p in a.iter_mut() {
            if p.abs() < pivmin {
                *p = if *p < 0.0 { -pivmin } else { pivmin };
            }
        }
        Self { a, b, c, du2, swapped }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = temp - self.c[i] * x[i];
            } else {
                x[i + 1] -= self.c[i] * x[i];
            }
        }
        x[n - 1] /= self.a[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.b[n - 2] * x[n - 1]) / self.a[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.b[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.a[i];
        }
    }
}

fn normalize(v: &mut [f64]) {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

fn scale_down(v: &mut [f64]) {
    let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if m > 0.0 && m.is_finite() {
        v.iter_mut().for_each(|x| *x /= m);
    }
}

fn remove_component(v: &mut [f64], u: &[f64]) {
    let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
    v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Max-row-sum norm, which bounds the spectral radius.
    pub fn norm(&self) -> f64 {
        self.diag.iter().fold(0.0f64, |m, d| m.max(d.abs())) + 2.0 * self.off.abs()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let e = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, &d| m.min(d)) - e;
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d)) + e;
        (lo, hi)
    }

    /// Scale on which eigenvalues near `lambda` are resolved; graded diagonals do not enter.
    fn local_scale(&self, lambda: f64) -> f64 {
        (lambda.abs() + 4.0 * self.off.abs()).max(f64::MIN_POSITIVE)
    }

    fn pivmin(&self) -> f64 {
        f64::MIN_POSITIVE * self.off.powi(2).max(1.0) * 1e3
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        self.count_below_batch(&[x; 1])[0]
    }

    /// Sturm counts for several shifts at once; the independent recurrences interleave.
    fn count_below_batch<const L: usize>(&self, x: &[f64; L]) -> [usize; L] {
        let e2 = self.off * self.off;
        let pivmin = self.pivmin();
        let mut count = [0usize; L];
        let mut q = [f64::INFINITY; L];
        for &d in &self.diag {
            for l in 0..L {
                let mut v = d - x[l] - e2 / q[l];
                if v.abs() < pivmin {
                    v = -pivmin;
                }
                count[l] += (v < 0.0) as usize;
                q[l] = v;
            }
        }
        count
    }

    /// Eigenvalues with indices in `range`, ascending.
    pub fn eigenvalues(&self, range: std::ops::Range<usize>) -> Vec<f64> {
        const LANES: usize = 8;
        let (glo, ghi) = self.gershgorin();
        let abs_tol = f64::EPSILON * 4.0 * self.off.abs();
        let pad = |x: f64| 4.0 * f64::EPSILON * self.local_scale(x) + f64::MIN_POSITIVE;
        let (glo, ghi) = (glo - pad(glo), ghi + pad(ghi));
        let mut out = Vec::with_capacity(range.len());
        let mut lower = glo;
        let mut k0 = range.start;
        while k0 < range.end {
            let width = (range.end - k0).min(LANES);
            let idx: [usize; LANES] = std::array::from_fn(|l| k0 + l.min(width - 1));
            let mut lo = [lower; LANES];
            let mut hi = [ghi; LANES];
            for _ in 0..200 {
                let mut mid = [0.0; LANES];
                let mut active = false;
                for l in 0..LANES {
                    mid[l] = 0.5 * (lo[l] + hi[l]);
                    let tol = 2.0 * f64::EPSILON * lo[l].abs().max(hi[l].abs()) + abs_tol;
                    if hi[l] - lo[l] > tol && mid[l] > lo[l] && mid[l] < hi[l] {
                        active = true;
                    }
                }
                if !active {
                    break;
                }
                let counts = self.count_below_batch(&mid);
                for l in 0..LANES {
                    if counts[l] > idx[l] {
                        hi[l] = hi[l].min(mid[l]);
                    } else {
                        lo[l] = lo[l].max(mid[l]);
                    }
                    // a count also brackets the other lanes
                    for m in 0..LANES {
                        if counts[l] > idx[m] {
                            hi[m] = hi[m].min(mid[l]);
                        } else {
                            lo[m] = lo[m].max(mid[l]);
                        }
                    }
                }
            }
            for l in 0..width {
                out.push(0.5 * (lo[l] + hi[l]));
            }
            let last = out.last().copied().unwrap_or(lower);
            lower = last - pad(last);
            k0 += width;
        }
        out
    }

    /// Eigenpairs for the index range; vectors are Euclidean-normalized.
    pub fn eigenpairs(&self, range: std::ops::Range<usize>) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.len();
        let values = self.eigenvalues(range.clone());
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0;
        for (j, &lam) in values.iter().enumerate() {
            let scale = self.local_scale(lam);
            if j == 0 || lam - values[j - 1] > CLUSTER_GAP * scale {
                cluster_start = j;
            }
            let lu = ShiftedLu::new(self, lam, f64::EPSILON * scale);
            let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ ((range.start + j) as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            let mut v: Vec<f64> = (0..n)
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            for _ in 0..INVERSE_ITERATIONS {
                scale_down(&mut v);
                for u in &vectors[cluster_start..j] {
                    remove_component(&mut v, u);
                }
                lu.solve(&mut v);
            }
            normalize(&mut v);
            let near = j.saturating_sub(2).min(cluster_start);
            for u in &vectors[near..j] {
                remove_component(&mut v, u);
            }
            normalize(&mut v);
            // sign: first clearly nonzero component positive
            let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * vmax) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            vectors.push(v);
        }
        (values, vectors)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solve `(T + shift·I) x = rhs` for a diagonally dominant shifted matrix (Thomas algorithm).
    pub fn solve_shifted_spd(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        let mut denom = self.diag[0] + shift;
        cp[0] = self.off / denom;
        dp[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] + shift - self.off * cp[i - 1];
            cp[i] = self.off / denom;
            dp[i] = (rhs[i] - self.off * dp[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn sample(n: usize, seed: u64) -> SymTridiag {
        let mut s = seed;
        let diag = (0..n)
            .map(|i| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                2.0 + (i as f64 * 0.05).exp().min(50.0) + ((s >> 33) as f64 / 2f64.powi(31))
            })
            .collect();
        SymTridiag { diag, off: -1.0 }
    }

    fn dense(t: &SymTridiag) -> DMatrix<f64> {
        let n = t.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                t.diag[i]
            } else if i.abs_diff(j) == 1 {
                t.off
            } else {
                0.0
            }
        })
    }

    #[test]
    fn matches_dense_solver() {
        let t = sample(120, 7);
        let eig = SymmetricEigen::new(dense(&t));
        let mut oracle: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        let (vals, vecs) = t.eigenpairs(0..t.len());
        for (a, b) in vals.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-11 * t.norm(), "{a} vs {b}");
        }
        for (lam, v) in vals.iter().zip(&vecs) {
            let av = t.matvec(v);
            let res = av.iter().zip(v).map(|(x, y)| (x - lam * y).abs()).fold(0.0, f64::max);
            assert!(res < 1e-9 * (lam.abs() + t.norm()));
        }
        for i in 0..vecs.len() {
            for j in 0..vecs.len() {
                let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((d - e).abs() < 1e-10, "({i},{j}) {d}");
            }
        }
    }

    #[test]
    fn sub_ranges_agree_with_full() {
        let t = sample(200, 3);
        let (full, fv) = t.eigenpairs(0..200);
        let (part, pv) = t.eigenpairs(50..70);
        for (k, (a, v)) in part.iter().zip(&pv).enumerate() {
            assert!((a - full[50 + k]).abs() < 1e-13 * t.norm());
            let d: f64 = v.iter().zip(&fv[50 + k]).map(|(x, y)| x * y).sum();
            assert!((d - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn laplacian_spectrum_and_clusters() {
        // Dirichlet Laplacian: λ_j = 2 − 2cos(jπ/(n+1)); closely spaced at the bottom.
        let n = 400;
        let t = SymTridiag { diag: vec![2.0; n], off: -1.0 };
        let (vals, vecs) = t.eigenpairs(0..n);
        for (j, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (((j + 1) as f64) * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-13, "{j}");
        }
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                worst = worst.max((d - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn sturm_count_is_monotone() {
        let t = sample(50, 1);
        let (lo, hi) = t.gershgorin();
        assert_eq!(t.count_below(lo - 1.0), 0);
        assert_eq!(t.count_below(hi + 1.0), 50);
        let mut prev = 0;
        for k in 0..100 {
            let c = t.count_below(lo + (hi - lo) * k as f64 / 99.0);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn thomas_solver() {
        let t = sample(60, 9);
        let x: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let mut rhs = t.matvec(&x);
        rhs.iter_mut().zip(&x).for_each(|(r, xi)| *r += 0.5 * xi);
        let got = t.solve_shifted_spd(0.5, &rhs);
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
