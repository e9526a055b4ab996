//! The majorization preorder on real vectors and its two constructive
//! companions: the Hardy–Littlewood–Pólya chain of T-transforms realizing
//! `x = P·y` for any majorized pair, and the Birkhoff–von Neumann
//! decomposition of the resulting doubly stochastic matrix into permutations.
//!
//! Permutation convention, used everywhere in this crate: a permutation `π`
//! acts on vectors by `(Π_π v)(i) = v(π(i))`, i.e. permutation matrices are
//! row selectors with `Π[i, π(i)] = 1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tol;

/// A bijection on `{0..n-1}`, stored as the image list `π(0), …, π(n-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &image in &map {
            if image >= n || seen[image] {
                return Err(Error::InvalidInput(
                    "permutation must be a bijection on 0..n".into(),
                ));
            }
            seen[image] = true;
        }
        Ok(Permutation(map))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Transposition of positions `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Permutation(map)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Row-selector matrix: `Π[i, π(i)] = 1`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &j) in self.0.iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        m
    }

    /// `(Π_π v)(i) = v(π(i))`.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.0.iter().map(|&j| v[j]))
    }
}

/// Nonnegative matrix whose rows and columns all sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublyStochasticMatrix {
    entries: DMatrix<f64>,
}

impl DoublyStochasticMatrix {
    /// Validates nonnegativity (round-off undershoot up to `−1e−12` is
    /// clamped to zero) and unit row/column sums within `1e−10`.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidInput(format!(
                "expected a square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let mut clamped = entries;
        for v in clamped.iter_mut() {
            if *v < 0.0 {
                if *v < tol::DS_NEGATIVE {
                    return Err(Error::InvalidInput(format!(
                        "matrix entry {v} is negative beyond round-off"
                    )));
                }
                *v = 0.0;
            }
        }
        let n = clamped.nrows();
        for i in 0..n {
            let row_sum: f64 = clamped.row(i).sum();
            let col_sum: f64 = clamped.column(i).sum();
            if (row_sum - 1.0).abs() > tol::DS_SUM || (col_sum - 1.0).abs() > tol::DS_SUM {
                return Err(Error::InvalidInput(format!(
                    "row/column {i} sums ({row_sum}, {col_sum}) are not 1"
                )));
            }
        }
        Ok(DoublyStochasticMatrix { entries: clamped })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.entries * v
    }
}

/// Convex combination of permutation matrices reconstructing a doubly
/// stochastic matrix: weights in `(0, 1]` summing to 1, at most
/// `(n−1)² + 1` terms.
#[derive(Debug, Clone)]
pub struct BirkhoffDecomposition {
    terms: Vec<(f64, Permutation)>,
}

impl BirkhoffDecomposition {
    pub fn terms(&self) -> &[(f64, Permutation)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ weight · Π_π`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.terms[0].1.len();
        let mut acc = DMatrix::zeros(n, n);
        for (w, p) in &self.terms {
            for (i, &j) in p.as_slice().iter().enumerate() {
                acc[(i, j)] += w;
            }
        }
        acc
    }
}

/// `majorizes(y, x, tol)` is true iff `x ≺ y`: the sums agree within `tol`
/// and every prefix sum of `x` sorted descending is at most the matching
/// prefix sum of `y` sorted descending, plus `tol`.
pub fn majorizes(y: &DVector<f64>, x: &DVector<f64>, tol: f64) -> Result<bool> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: x.len(),
        });
    }
    let mut ys: Vec<f64> = y.iter().copied().collect();
    let mut xs: Vec<f64> = x.iter().copied().collect();
    ys.sort_by(|a, b| b.partial_cmp(a).expect("non-finite entry"));
    xs.sort_by(|a, b| b.partial_cmp(a).expect("non-finite entry"));
    let mut prefix_x = 0.0;
    let mut prefix_y = 0.0;
    for i in 0..xs.len() {
        prefix_x += xs[i];
        prefix_y += ys[i];
        if i + 1 < xs.len() {
            if prefix_x > prefix_y + tol {
                return Ok(false);
            }
        } else if (prefix_x - prefix_y).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Stable descending sort; returns sorted values and the index map
/// `perm[i] = original index of the i-th largest value`.
fn sort_descending(v: &DVector<f64>) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).expect("non-finite entry"));
    let sorted = idx.iter().map(|&i| v[i]).collect();
    (sorted, idx)
}

/// Doubly stochastic `P` with `x = P·y`, built as a product of at most
/// `n − 1` T-transforms (two-coordinate averaging operations).
///
/// The chain works on descending-sorted copies. Each step picks the largest
/// index `j` where the working vector still exceeds the target and the
/// smallest `k > j` where it falls short; transferring
/// `δ = min(w_j − x_j, x_k − w_k)` between them closes at least one of the
/// two gaps while keeping the working vector sorted, so `n − 1` steps
/// always suffice. The sorting permutations of the inputs are tracked so
/// the returned matrix maps the original `y` to the original `x`.
pub fn hlp_transfer_matrix(y: &DVector<f64>, x: &DVector<f64>) -> Result<DoublyStochasticMatrix> {
    let n = y.len();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if !majorizes(y, x, tol::MAJORIZATION)? {
        return Err(Error::NotMajorized(
            "hlp_transfer_matrix requires x ≺ y".into(),
        ));
    }
    let scale = 1.0 + y.iter().chain(x.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let gap_tol = 1e-13 * scale;

    let (ys, perm_y) = sort_descending(y);
    let (xs, perm_x) = sort_descending(x);
    let mut w = ys;
    let mut p_sorted = DMatrix::<f64>::identity(n, n);

    for _ in 0..n.saturating_sub(1) {
        let Some(j) = (0..n).rev().find(|&i| w[i] - xs[i] > gap_tol) else {
            break;
        };
        let Some(k) = ((j + 1)..n).find(|&i| xs[i] - w[i] > gap_tol) else {
            return Err(Error::NumericalDegeneracy(
                "majorized pair has a surplus with no matching deficit".into(),
            ));
        };
        let delta = (w[j] - xs[j]).min(xs[k] - w[k]);
        let span = w[j] - w[k];
        debug_assert!(span > 0.0);
        let lam = 1.0 - delta / span;
        // T-transform on coordinates (j, k), applied to w and to P from the left
        let wj = w[j];
        let wk = w[k];
        w[j] = lam * wj + (1.0 - lam) * wk;
        w[k] = (1.0 - lam) * wj + lam * wk;
        for c in 0..n {
            let pj = p_sorted[(j, c)];
            let pk = p_sorted[(k, c)];
            p_sorted[(j, c)] = lam * pj + (1.0 - lam) * pk;
            p_sorted[(k, c)] = (1.0 - lam) * pj + lam * pk;
        }
    }

    let residual = (0..n).map(|i| (w[i] - xs[i]).abs()).fold(0.0f64, f64::max);
    if residual > tol::MAJORIZATION * scale {
        return Err(Error::NumericalDegeneracy(format!(
            "transfer chain did not converge: residual {residual:.3e}"
        )));
    }

    // Undo the sorting: x = Qxᵀ · P_sorted · Qy · y, realized by index placement.
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(perm_x[i], perm_y[j])] = p_sorted[(i, j)];
        }
    }
    DoublyStochasticMatrix::new(p)
}

/// Kuhn's augmenting-path matching on the bipartite positivity graph.
/// `adj[row]` lists admissible columns; returns a column for every row, or
/// `None` when no perfect matching exists.
fn perfect_matching(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut col_to_row: Vec<Option<usize>> = vec![None; n];

    fn try_augment(
        row: usize,
        adj: &[Vec<usize>],
        visited: &mut [bool],
        col_to_row: &mut [Option<usize>],
    ) -> bool {
        for &col in &adj[row] {
            if visited[col] {
                continue;
            }
            visited[col] = true;
            match col_to_row[col] {
                None => {
                    col_to_row[col] = Some(row);
                    return true;
                }
                Some(prev) => {
                    if try_augment(prev, adj, visited, col_to_row) {
                        col_to_row[col] = Some(row);
                        return true;
                    }
                }
            }
        }
        false
    }

    for row in 0..n {
        let mut visited = vec![false; n];
        if !try_augment(row, adj, &mut visited, &mut col_to_row) {
            return None;
        }
    }
    let mut row_to_col = vec![0usize; n];
    for (col, row) in col_to_row.iter().enumerate() {
        row_to_col[row.expect("perfect matching covers every row")] = col;
    }
    Some(row_to_col)
}

/// Decompose a doubly stochastic matrix into a convex combination of
/// permutation matrices.
///
/// Greedy peeling: find a permutation supported on the strictly positive
/// entries (a perfect matching of the positivity graph), subtract it with
/// the smallest matched entry as weight, and repeat until the residual mass
/// is gone. The greedy term count is then reduced to the `(n−1)² + 1`
/// bound by eliminating affine dependencies among the permutation matrices
/// (Carathéodory, since the Birkhoff polytope has dimension `(n−1)²`).
pub fn birkhoff_decompose(p: &DoublyStochasticMatrix) -> Result<BirkhoffDecomposition> {
    let n = p.dim();
    let mut residual = p.entries().clone();
    let mut terms: Vec<(f64, Permutation)> = Vec::new();
    let max_iterations = n * n + 1;

    for _ in 0..max_iterations {
        let max_entry = residual.iter().fold(0.0f64, |m, v| m.max(*v));
        if max_entry <= tol::BIRKHOFF_RESIDUAL {
            break;
        }
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| residual[(i, j)] > tol::BIRKHOFF_RESIDUAL)
                    .collect()
            })
            .collect();
        let Some(matching) = perfect_matching(&adj) else {
            return Err(Error::NumericalDegeneracy(
                "no perfect matching on the residual support; tolerances are misconfigured"
                    .into(),
            ));
        };
        let weight = matching
            .iter()
            .enumerate()
            .map(|(i, &j)| residual[(i, j)])
            .fold(f64::INFINITY, f64::min);
        for (i, &j) in matching.iter().enumerate() {
            residual[(i, j)] -= weight;
        }
        terms.push((weight, Permutation(matching)));
    }

    let max_left = residual.iter().fold(0.0f64, |m, v| m.max(*v));
    if max_left > tol::BIRKHOFF_RESIDUAL {
        return Err(Error::NumericalDegeneracy(
            "greedy loop exhausted its iteration budget".into(),
        ));
    }

    let bound = (n - 1) * (n - 1) + 1;
    while terms.len() > bound {
        reduce_affine_dependency(&mut terms)?;
    }
    terms.retain(|(w, _)| *w > tol::NEGLIGIBLE_WEIGHT);
    terms.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("non-finite weight"));
    Ok(BirkhoffDecomposition { terms })
}

/// Remove one term from a convex combination of permutation matrices
/// without changing its value: find `μ ≠ 0` with `Σ μᵢ Πᵢ = 0` and
/// `Σ μᵢ = 0` (guaranteed to exist once the term count exceeds the affine
/// dimension plus one), then walk to the boundary of the weight simplex.
fn reduce_affine_dependency(terms: &mut Vec<(f64, Permutation)>) -> Result<()> {
    let m = terms.len();
    let n = terms[0].1.len();
    // columns: vectorized permutation matrices stacked over a row of ones
    let mut b = DMatrix::<f64>::zeros(n * n + 1, m);
    for (t, (_, p)) in terms.iter().enumerate() {
        for (i, &j) in p.as_slice().iter().enumerate() {
            b[(i * n + j, t)] = 1.0;
        }
        b[(n * n, t)] = 1.0;
    }
    let svd = b.svd(false, true);
    let v_t = svd.v_t.expect("svd with right singular vectors");
    let (min_idx, min_sv) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, v)| (i, *v))
        .expect("at least one singular value");
    // with more terms than the affine dimension allows, an exact dependency
    // exists and the smallest singular value is numerically zero
    if min_sv >= 1e-9 {
        return Err(Error::NumericalDegeneracy(
            "no affine dependency found among permutation terms".into(),
        ));
    }
    let mut mu: Vec<f64> = v_t.row(min_idx).iter().copied().collect();
    let max_pos = mu.iter().fold(0.0f64, |acc, v| acc.max(*v));
    if max_pos <= 1e-12 {
        for v in mu.iter_mut() {
            *v = -*v;
        }
    }
    let (drop_idx, step) = terms
        .iter()
        .enumerate()
        .filter(|(i, _)| mu[*i] > 1e-12)
        .map(|(i, (w, _))| (i, w / mu[i]))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .ok_or_else(|| {
            Error::NumericalDegeneracy("degenerate dependency direction".into())
        })?;
    for (i, (w, _)) in terms.iter_mut().enumerate() {
        *w -= step * mu[i];
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    terms[drop_idx].0 = 0.0;
    terms.retain(|(w, _)| *w > tol::NEGLIGIBLE_WEIGHT);
    Ok(())
}

/// `Π_π · λ_D`: entry `i` of the result is `D.values[π(i)]`.
pub fn permute_spectrum(d: &crate::calculus::SpectrumD, perm: &Permutation) -> Result<DVector<f64>> {
    if perm.len() != d.len() {
        return Err(Error::DimensionMismatch {
            expected: d.len(),
            found: perm.len(),
        });
    }
    Ok(perm.apply(d.values()))
}
