use nalgebra::{DMatrix, DVector};

/// Nonzero singular triplets of a matrix, largest first.
pub(super) struct ThinSvd {
    pub values: Vec<f64>,
    pub left: Vec<DVector<f64>>,
    pub right: Vec<DVector<f64>>,
}

/// Singular triplets from the symmetric eigenproblem of the smaller Gram
/// matrix. nalgebra's bidiagonal SVD returned factorizations that do not
/// reconstruct some rank-deficient wide inputs; the symmetric solver does.
/// Values below `smax * sqrt(eps * dim)` are dropped as numerical zero.
pub(super) fn thin_svd(x: &DMatrix<f64>) -> ThinSvd {
    let (n, d) = x.shape();
    let wide = d > n;
    let gram = if wide { x * x.transpose() } else { x.transpose() * x };
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let s_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max).sqrt();
    let tol = s_max * (f64::EPSILON * n.max(d) as f64).sqrt();
    let mut out = ThinSvd { values: Vec::new(), left: Vec::new(), right: Vec::new() };
    for k in order {
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        if s <= tol || s == 0.0 {
            break;
        }
        let vec = eig.eigenvectors.column(k).into_owned();
        let (u, v) = if wide {
            let v = x.transpose() * &vec / s;
            (vec, v)
        } else {
            let u = x * &vec / s;
            (u, vec)
        };
        out.values.push(s);
        out.left.push(u);
        out.right.push(v);
    }
    out
}
