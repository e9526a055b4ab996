//! Multiplicative compounds `∧ᵏX` (matrices of k×k minors) and additive
//! compounds `A^[k]`, together with the multi-index bookkeeping that fixes
//! their entry layout.
//!
//! `∧ᵏX` represents the action of `X` on k-dimensional oriented volumes; it
//! is multiplicative (`∧ᵏ(XY) = ∧ᵏX · ∧ᵏY`, the Cauchy–Binet formula) and
//! sends orthogonal to orthogonal, symmetric to symmetric. `A^[k]` is its
//! infinitesimal counterpart, defined by `∧ᵏ(e^{tA}) = e^{t·A^[k]}`: for
//! symmetric `A` with eigenvalues `a₁ ≥ … ≥ aₙ` the eigenvalues of `A^[k]`
//! are all k-fold sums `a_{i₁}+…+a_{i_k}`, the largest being the top-k sum.
//! These two facts drive the growth bounds checked by the simulation audit.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Strictly increasing k-tuples from `{1..n}` in lexicographic order: the
/// ordered multi-index basis of the k-th exterior power. Tuples are stored
/// 0-based; [`MultiIndexBasis::label`] renders them 1-based for display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexBasis {
    n: usize,
    k: usize,
    indices: Vec<Vec<usize>>,
}

impl MultiIndexBasis {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::InvalidInput(format!(
                "compound order k = {k} must satisfy 1 <= k <= n = {n}"
            )));
        }
        let mut indices = Vec::with_capacity(binomial(n, k));
        let mut current: Vec<usize> = (0..k).collect();
        loop {
            indices.push(current.clone());
            // advance to the next increasing k-tuple in lexicographic order
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(MultiIndexBasis { n, k, indices });
                }
                i -= 1;
                if current[i] != i + n - k {
                    break;
                }
            }
            current[i] += 1;
            for j in (i + 1)..k {
                current[j] = current[j - 1] + 1;
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.indices
    }

    /// 1-based display label, e.g. `(1,3)` for the 0-based tuple `[0,2]`.
    pub fn label(&self, row: usize) -> String {
        let inner: Vec<String> = self.indices[row].iter().map(|i| (i + 1).to_string()).collect();
        format!("({})", inner.join(","))
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result = 1usize;
    for i in 0..k {
        result = result * (n - i) / (i + 1);
    }
    result
}

/// Lexicographic enumeration of the k-element subsets of `{1..n}`.
pub fn k_subsets(n: usize, k: usize) -> Result<MultiIndexBasis> {
    MultiIndexBasis::new(n, k)
}

/// A compound matrix together with the basis that labels its rows/columns.
#[derive(Debug, Clone)]
pub struct CompoundMatrix {
    basis: MultiIndexBasis,
    entries: DMatrix<f64>,
}

impl CompoundMatrix {
    pub fn basis(&self) -> &MultiIndexBasis {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Entry addressed by multi-index positions.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }
}

fn check_square(x: &DMatrix<f64>) -> Result<usize> {
    if !x.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(x.nrows())
}

/// Determinant of the submatrix of `x` with the given (0-based) rows and
/// columns. Hardcoded cofactor expansion up to 3x3, LU beyond.
fn minor(x: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        1 => x[(rows[0], cols[0])],
        2 => {
            x[(rows[0], cols[0])] * x[(rows[1], cols[1])]
                - x[(rows[0], cols[1])] * x[(rows[1], cols[0])]
        }
        3 => {
            let a = |i: usize, j: usize| x[(rows[i], cols[j])];
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        }
        k => {
            let sub = DMatrix::from_fn(k, k, |i, j| x[(rows[i], cols[j])]);
            sub.determinant()
        }
    }
}

/// The k-th multiplicative compound: entry `(I, J)` is the k×k minor of `x`
/// with rows `I` and columns `J`. `∧¹X = X` and `∧ⁿX = (det X)`. When
/// `k > rank(X)` every k-minor vanishes, so the compound is the zero matrix.
pub fn multiplicative_compound(x: &DMatrix<f64>, k: usize) -> Result<CompoundMatrix> {
    let n = check_square(x)?;
    let basis = MultiIndexBasis::new(n, k)?;
    let m = basis.len();
    let entries = DMatrix::from_fn(m, m, |r, c| minor(x, &basis.indices[r], &basis.indices[c]));
    Ok(CompoundMatrix { basis, entries })
}

/// The k-th additive compound, the generator of `∧ᵏ(e^{tA})`:
///
/// - diagonal entry `(I, I)` is `Σ_ℓ A(i_ℓ, i_ℓ)`;
/// - if `I` and `J` differ in exactly one element, `i_r ≠ j_s` with the rest
///   shared, the entry is `(−1)^{r+s} A(i_r, j_s)` (positions 1-based);
/// - entries where `I` and `J` differ in two or more elements vanish.
///
/// `A^[1] = A` and `A^[n] = (tr A)`.
pub fn additive_compound(a: &DMatrix<f64>, k: usize) -> Result<CompoundMatrix> {
    let n = check_square(a)?;
    let basis = MultiIndexBasis::new(n, k)?;
    let m = basis.len();
    let mut entries = DMatrix::zeros(m, m);
    for r in 0..m {
        let tuple_i = &basis.indices[r];
        entries[(r, r)] = tuple_i.iter().map(|&i| a[(i, i)]).sum();
        for c in 0..m {
            if r == c {
                continue;
            }
            let tuple_j = &basis.indices[c];
            if let Some((pos_r, pos_s)) = single_difference(tuple_i, tuple_j) {
                let sign = if (pos_r + pos_s) % 2 == 0 { 1.0 } else { -1.0 };
                entries[(r, c)] = sign * a[(tuple_i[pos_r], tuple_j[pos_s])];
            }
        }
    }
    Ok(CompoundMatrix { basis, entries })
}

/// If `I` and `J` share all but one element, return the (0-based) positions
/// of the differing element in each; otherwise `None`. Position parity is
/// unchanged by 0- vs 1-basing since the signs depend on `r + s`.
fn single_difference(i: &[usize], j: &[usize]) -> Option<(usize, usize)> {
    let only_in_i: Vec<usize> = (0..i.len()).filter(|&p| !j.contains(&i[p])).collect();
    let only_in_j: Vec<usize> = (0..j.len()).filter(|&p| !i.contains(&j[p])).collect();
    match (only_in_i.as_slice(), only_in_j.as_slice()) {
        (&[p], &[q]) => Some((p, q)),
        _ => None,
    }
}

/// `‖∧ᵏX‖ = σ₁(X)⋯σ_k(X)`: the spectral norm of the k-th multiplicative
/// compound equals the product of the top k singular values of `X`.
pub fn compound_top_singular_value(x: &DMatrix<f64>, k: usize) -> Result<f64> {
    let n = check_square(x)?;
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!(
            "compound order k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    let mut sv: Vec<f64> = x.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("non-finite singular value"));
    Ok(sv[..k].iter().product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, DVector};

    #[test]
    fn subsets_3_choose_2() {
        let basis = k_subsets(3, 2).unwrap();
        assert_eq!(basis.tuples(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(basis.label(0), "(1,2)");
        assert_eq!(basis.label(2), "(2,3)");
    }

    #[test]
    fn subsets_full_order() {
        let basis = k_subsets(4, 4).unwrap();
        assert_eq!(basis.tuples(), &[vec![0, 1, 2, 3]]);
    }

    #[test]
    fn subsets_4_choose_2() {
        let basis = k_subsets(4, 2).unwrap();
        assert_eq!(basis.len(), 6);
        assert_eq!(
            basis.tuples(),
            &[
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn subsets_rejects_bad_order() {
        assert!(k_subsets(3, 0).is_err());
        assert!(k_subsets(3, 4).is_err());
    }

    #[test]
    fn compound_of_identity() {
        for k in 1..=4 {
            let c = multiplicative_compound(&DMatrix::identity(4, 4), k).unwrap();
            let m = binomial(4, k);
            assert!((c.entries() - DMatrix::identity(m, m)).norm() < 1e-15);
        }
    }

    #[test]
    fn compound_of_diagonal_is_product_diagonal() {
        let x = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0, 5.0]));
        let c = multiplicative_compound(&x, 2).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![6.0, 10.0, 15.0]));
        assert!((c.entries() - expected).norm() < 1e-14);
    }

    #[test]
    fn compound_entries_are_minors() {
        // a 3x3 with distinct entries; compare every 2x2 minor directly
        let x = dmatrix![
            1.0, 2.0, 3.0;
            4.0, 5.0, 6.0;
            7.0, 8.0, 10.0
        ];
        let c = multiplicative_compound(&x, 2).unwrap();
        let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
        for (r, &(i1, i2)) in pairs.iter().enumerate() {
            for (s, &(j1, j2)) in pairs.iter().enumerate() {
                let det = x[(i1, j1)] * x[(i2, j2)] - x[(i1, j2)] * x[(i2, j1)];
                assert!((c.entry(r, s) - det).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn top_compound_is_determinant() {
        let x = dmatrix![
            1.0, 2.0, 0.5;
            0.0, 3.0, 1.0;
            2.0, 1.0, 4.0
        ];
        let c = multiplicative_compound(&x, 3).unwrap();
        assert_eq!(c.dim(), 1);
        assert!((c.entry(0, 0) - x.determinant()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_compound_vanishes() {
        // rank 1, so every 2x2 minor is zero
        let x = dmatrix![
            1.0, 2.0, 3.0;
            2.0, 4.0, 6.0;
            3.0, 6.0, 9.0
        ];
        let c = multiplicative_compound(&x, 2).unwrap();
        assert!(c.entries().norm() < 1e-12);
    }

    #[test]
    fn additive_compound_of_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, -4.0]));
        let c = additive_compound(&a, 2).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, -1.0, -3.0]));
        assert_eq!(c.entries(), &expected);
        let top = additive_compound(&a, 3).unwrap();
        assert_eq!(top.entry(0, 0), 0.0);
    }

    #[test]
    fn additive_compound_sign_template() {
        // the 3x3, k=2 template with rows/cols (1,2),(1,3),(2,3):
        //   [a11+a22,  a23,   -a13]
        //   [a32,      a11+a33, a12]
        //   [-a31,     a21,   a22+a33]
        let a = dmatrix![
            1.0, 2.0, 3.0;
            4.0, 5.0, 6.0;
            7.0, 8.0, 9.0
        ];
        let c = additive_compound(&a, 2).unwrap();
        let expected = dmatrix![
            6.0, 6.0, -3.0;
            8.0, 10.0, 2.0;
            -7.0, 4.0, 14.0
        ];
        assert_eq!(c.entries(), &expected);
    }

    #[test]
    fn additive_compound_first_order_is_original() {
        let a = dmatrix![
            0.0, 1.0;
            1.0, 2.0
        ];
        let c = additive_compound(&a, 1).unwrap();
        assert_eq!(c.entries(), &a);
    }

    #[test]
    fn top_singular_value_products() {
        // orthogonal input: all products are 1
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = dmatrix![
            s, -s;
            s, s
        ];
        for k in 1..=2 {
            assert!((compound_top_singular_value(&q, k).unwrap() - 1.0).abs() < 1e-12);
        }
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 0.5]));
        assert!((compound_top_singular_value(&d, 2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn top_singular_value_matches_compound_norm() {
        let x = dmatrix![
            0.3, 1.2, -0.7, 0.1;
            2.0, 0.4, 0.9, -1.1;
            -0.5, 0.8, 1.5, 0.2;
            1.0, -0.3, 0.6, 0.9
        ];
        for k in 1..=4 {
            let product = compound_top_singular_value(&x, k).unwrap();
            let compound = multiplicative_compound(&x, k).unwrap();
            let mut sv: Vec<f64> = compound
                .entries()
                .clone()
                .svd(false, false)
                .singular_values
                .iter()
                .copied()
                .collect();
            sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert!(
                (product - sv[0]).abs() < 1e-10 * (1.0 + sv[0]),
                "k = {k}: product {product} vs norm {}",
                sv[0]
            );
        }
    }
}
