//! Symmetric positive-definite solvers: envelope Cholesky on a reverse
//! Cuthill–McKee ordering, and Jacobi-preconditioned conjugate gradients.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Linear solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Direct factorization unless the envelope would be very large.
    #[default]
    Auto,
    Direct,
    ConjugateGradient,
}

/// Envelope entries above which `Auto` switches to conjugate gradients.
const DIRECT_ENVELOPE_LIMIT: usize = 150_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖A x − b‖ / ‖b‖` (zero when `b = 0`).
    pub relative_residual: f64,
    pub direct: bool,
}

/// Solves `A x = b` for symmetric positive-definite `A`. The iterative
/// solver stops after `max_iterations` (default `20 n`).
pub fn solve_spd(
    a: &CsrMatrix,
    b: &[f64],
    kind: SolverKind,
    tolerance: f64,
    max_iterations: Option<usize>,
) -> Result<(Vec<f64>, SolveStats)> {
    if a.n == 0 {
        return Ok((Vec::new(), SolveStats { iterations: 0, relative_residual: 0.0, direct: true }));
    }
    let use_direct = match kind {
        SolverKind::Direct => true,
        SolverKind::ConjugateGradient => false,
        SolverKind::Auto => EnvelopeCholesky::envelope_size(a, &reverse_cuthill_mckee(a)) <= DIRECT_ENVELOPE_LIMIT,
    };
    if use_direct {
        let chol = EnvelopeCholesky::factor(a)?;
        let mut x = chol.solve(b);
        // one step of iterative refinement
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
        let dx = chol.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        let relative_residual = relative_residual(a, &x, b);
        log::debug!("direct solve: n = {}, relative residual {relative_residual:.3e}", a.n);
        Ok((x, SolveStats { iterations: 0, relative_residual, direct: true }))
    } else {
        conjugate_gradient(a, b, tolerance, max_iterations.unwrap_or(20 * a.n))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let bn = norm(b);
    let r: Vec<f64> = a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
    if bn == 0.0 {
        norm(&r)
    } else {
        norm(&r) / bn
    }
}

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let adj: Vec<Vec<usize>> = (0..n).map(|r| a.row(r).map(|(c, _)| c).filter(|&c| c != r).collect()).collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(start, &adj, &degree);
        let begin = order.len();
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
        order[begin..].reverse();
    }
    order
}

/// Repeated BFS towards the farthest low-degree vertex.
fn pseudo_peripheral(start: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut root = start;
    let mut depth = 0;
    for _ in 0..8 {
        let levels = bfs_levels(root, adj);
        let max_level = levels.iter().filter_map(|&l| l).max().unwrap_or(0);
        let far = (0..adj.len())
            .filter(|&v| levels[v] == Some(max_level))
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(root);
        if max_level <= depth {
            break;
        }
        depth = max_level;
        root = far;
    }
    root
}

fn bfs_levels(root: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut levels = vec![None; adj.len()];
    levels[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let l = levels[v].unwrap();
        for &w in &adj[v] {
            if levels[w].is_none() {
                levels[w] = Some(l + 1);
                queue.push_back(w);
            }
        }
    }
    levels
}

/// Row-oriented envelope (skyline) Cholesky factor `P A Pᵀ = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    /// First column of each row's envelope.
    first: Vec<usize>,
    /// Offset of each row's envelope (entries `first[i] ..= i`) in `values`.
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    fn envelope_size(a: &CsrMatrix, perm: &[usize]) -> usize {
        let inv = inverse(perm);
        (0..a.n).map(|i| i - a.row(perm[i]).map(|(c, _)| inv[c]).filter(|&c| c <= i).min().unwrap_or(i) + 1).sum()
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let perm = reverse_cuthill_mckee(a);
        let inv = inverse(&perm);
        let mut first = vec![0; n];
        let mut start = vec![0; n + 1];
        for i in 0..n {
            first[i] = a.row(perm[i]).map(|(c, _)| inv[c]).filter(|&c| c <= i).min().unwrap_or(i);
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut values = vec![0.0; start[n]];
        for i in 0..n {
            for (c, v) in a.row(perm[i]) {
                let j = inv[c];
                if j <= i {
                    values[start[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let diag = values[start[i] + i - fi];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let len = j - k0;
                let (lo, hi) = values.split_at_mut(start[i]);
                let row_j = &lo[start[j] + k0 - fj..start[j] + k0 - fj + len];
                let row_i = &hi[k0 - fi..k0 - fi + len];
                let dot: f64 = row_i.iter().zip(row_j).map(|(x, y)| x * y).sum();
                let ljj = lo[start[j] + j - fj];
                hi[j - fi] = (hi[j - fi] - dot) / ljj;
            }
            let row = &values[start[i]..start[i] + i - fi];
            let pivot = diag - row.iter().map(|x| x * x).sum::<f64>();
            if !(pivot > 1e-12 * diag.abs()) {
                return Err(Error::UnderConstrained(format!(
                    "non-positive pivot {pivot:.3e} at unknown {} (rigid mode or unconstrained DOF)",
                    perm[i]
                )));
            }
            values[start[i] + i - fi] = pivot.sqrt();
        }
        Ok(Self { perm, first, start, values })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (l, v) in row[..i - fi].iter().zip(&mut y[fi..i]) {
                *v -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Jacobi-preconditioned conjugate gradients to `‖r‖ ≤ tol ‖b‖`.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n;
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::UnderConstrained(format!("unknown {i} has no stiffness")));
    }
    let bn = norm(b);
    let mut x = vec![0.0; n];
    if bn == 0.0 {
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0, direct: false }));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 1..=max_iter {
        let ap = a.mul_vec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(Error::UnderConstrained("conjugate gradients met a direction of zero stiffness".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm(&r) / bn;
        if res <= tol {
            // confirm with the true residual
            let true_res = relative_residual(a, &x, b);
            if true_res <= tol {
                log::debug!("CG converged in {it} iterations, relative residual {true_res:.3e}");
                return Ok((x, SolveStats { iterations: it, relative_residual: true_res, direct: false }));
            }
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure { iterations: max_iter, residual: relative_residual(a, &x, b) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// 1D Laplacian with Dirichlet ends, `n` unknowns, randomly relabelled.
    fn laplacian(n: usize, shuffle: &[usize]) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((shuffle[i], shuffle[i], 2.0));
            if i + 1 < n {
                t.push((shuffle[i], shuffle[i + 1], -1.0));
                t.push((shuffle[i + 1], shuffle[i], -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn rcm_recovers_small_bandwidth() {
        let n = 40;
        let shuffle: Vec<usize> = (0..n).map(|i| (i * 17) % n).collect();
        let a = laplacian(n, &shuffle);
        let perm = reverse_cuthill_mckee(&a);
        let inv = inverse(&perm);
        let bandwidth = (0..n).flat_map(|r| a.row(r).map(move |(c, _)| (r, c))).map(|(r, c)| inv[r].abs_diff(inv[c])).max();
        assert_eq!(bandwidth, Some(1));
        let mut sorted = perm.clone();
        sorted.sort();
        assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn direct_and_cg_agree() {
        let n = 30;
        let shuffle: Vec<usize> = (0..n).map(|i| (i * 7) % n).collect();
        let a = laplacian(n, &shuffle);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (xd, sd) = solve_spd(&a, &b, SolverKind::Direct, 1e-12, None).unwrap();
        let (xc, sc) = solve_spd(&a, &b, SolverKind::ConjugateGradient, 1e-12, None).unwrap();
        assert!(sd.relative_residual <= 1e-14);
        assert!(sc.relative_residual <= 1e-12);
        let diff = xd.iter().zip(&xc).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-9, "{diff}");
    }

    #[test]
    fn singular_matrix_is_under_constrained() {
        // free-free bar: rigid translation in the kernel
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)]);
        assert!(matches!(EnvelopeCholesky::factor(&a), Err(Error::UnderConstrained(_))));
        let z = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0)]);
        assert!(matches!(conjugate_gradient(&z, &[1.0, 1.0], 1e-12, 40), Err(Error::UnderConstrained(_))));
    }

    proptest! {
        #[test]
        fn cholesky_solves_random_spd(n in 1usize..25, seed in proptest::collection::vec(-1.0f64..1.0, 625)) {
            // A = Mᵀ M + n I with a sparse M
            let mut m = nalgebra::DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let v = seed[i * 25 + j];
                    if v.abs() > 0.6 {
                        m[(i, j)] = v;
                    }
                }
            }
            let dense = m.transpose() * &m + nalgebra::DMatrix::identity(n, n) * n as f64;
            let t: Vec<(usize, usize, f64)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| dense[(i, j)] != 0.0).map(|(i, j)| (i, j, dense[(i, j)])).collect();
            let a = CsrMatrix::from_triplets(n, t);
            let b: Vec<f64> = (0..n).map(|i| seed[i] + 0.5).collect();
            let x = EnvelopeCholesky::factor(&a).unwrap().solve(&b);
            prop_assert!(relative_residual(&a, &x, &b) <= 1e-12);
        }
    }
}
