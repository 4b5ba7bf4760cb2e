use super::Matrix;

/// Central-difference gradient.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let fp = f(&p);
            p[i] = x[i] - h;
            let fm = f(&p);
            p[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian from four evaluations per entry, symmetrized.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Matrix {
    let n = x.len();
    let mut out = Matrix::zeros(n, n);
    let mut p = x.to_vec();
    let mut at = |di: f64, i: usize, dj: f64, j: usize| {
        p.copy_from_slice(x);
        p[i] += di;
        p[j] += dj;
        f(&p)
    };
    for i in 0..n {
        for j in i..n {
            let v = (at(h, i, h, j) - at(h, i, -h, j) - at(-h, i, h, j) + at(-h, i, -h, j))
                / (4.0 * h * h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}
