use nalgebra::{DMatrix, DVector};

use crate::fockspace::sparse::Csr;
use crate::C64;

/// `exp(−iHt)` for a Hermitian `h`, via its eigendecomposition.
pub(crate) fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let n = h.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if n == 1 {
        return DMatrix::from_element(1, 1, C64::new(0.0, -h[(0, 0)].re * t).exp());
    }
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&l| C64::new(0.0, -l * t).exp()),
    );
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

/// Connected components of the sparsity graph of `m` (entries treated as
/// undirected edges). Singletons are included.
pub(crate) fn components(m: &Csr) -> Vec<Vec<usize>> {
    let n = m.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (r, c, _) in m.triplets() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        groups[root].push(i);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

/// `exp(−iHt)` for a sparse Hermitian `h` that decomposes into small
/// decoupled blocks (beam splitters and sidebands conserve an excitation
/// number, so every block is a single manifold).
pub(crate) fn expm_hermitian_blocks(h: &Csr, t: f64) -> Csr {
    let mut triplets = Vec::new();
    for block in components(h) {
        let k = block.len();
        let local = DMatrix::from_fn(k, k, |i, j| h.get(block[i], block[j]));
        let u = expm_hermitian(&local, t);
        for i in 0..k {
            for j in 0..k {
                triplets.push((block[i], block[j], u[(i, j)]));
            }
        }
    }
    let mut out = Csr::from_triplets(h.dim(), triplets);
    out.prune(1e-15);
    out
}

/// Ordinary least squares `min ‖A x − b‖₂` with the unscaled covariance
/// `(AᵀA)⁻¹`. Returns `None` if `A` is numerically rank deficient.
pub(crate) fn least_squares(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let cols = a.ncols();
    if a.nrows() < cols || cols == 0 {
        return None;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > smax * 1e-10) {
        return None;
    }
    let x = svd.solve(b, 0.0).ok()?;
    let v_t = svd.v_t.as_ref()?;
    let inv_sq = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / (s * s)));
    let cov = v_t.transpose() * inv_sq * v_t;
    Some((x, cov))
}
