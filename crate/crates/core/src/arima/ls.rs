//! Least squares by modified Gram-Schmidt on column-scaled regressors.

const RANK_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Indices of a maximal set of linearly independent columns, chosen
/// greedily left to right. All-zero columns are never selected.
pub fn independent_columns(cols: &[&[f64]]) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut keep = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let nc = norm(c);
        if nc == 0.0 || !nc.is_finite() {
            continue;
        }
        let mut q: Vec<f64> = c.iter().map(|v| v / nc).collect();
        for b in &basis {
            let r = dot(b, &q);
            for (qi, bi) in q.iter_mut().zip(b) {
                *qi -= r * bi;
            }
        }
        let nq = norm(&q);
        if nq > RANK_TOL.sqrt() {
            q.iter_mut().for_each(|v| *v /= nq);
            basis.push(q);
            keep.push(j);
        }
    }
    keep
}

/// Solution of `min ||y - X b||` with `X` given by columns. Returns the
/// coefficients and the residual vector, or `None` if `X` is rank deficient.
pub fn lstsq(cols: &[&[f64]], y: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = cols.len();
    let mut resid = y.to_vec();
    if k == 0 {
        return Some((Vec::new(), resid));
    }
    let mut scale = Vec::with_capacity(k);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![vec![0.0; k]; k];
    for (j, c) in cols.iter().enumerate() {
        let s = norm(c);
        if s == 0.0 || !s.is_finite() {
            return None;
        }
        scale.push(s);
        let mut v: Vec<f64> = c.iter().map(|x| x / s).collect();
        for i in 0..j {
            let rij = dot(&q[i], &v);
            r[i][j] = rij;
            for (vt, qt) in v.iter_mut().zip(&q[i]) {
                *vt -= rij * qt;
            }
        }
        let nv = norm(&v);
        if nv < RANK_TOL {
            return None;
        }
        r[j][j] = nv;
        v.iter_mut().for_each(|x| *x /= nv);
        q.push(v);
    }
    let mut z = vec![0.0; k];
    for i in 0..k {
        z[i] = dot(&q[i], &resid);
        for (rt, qt) in resid.iter_mut().zip(&q[i]) {
            *rt -= z[i] * qt;
        }
    }
    let mut b = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = z[i];
        for j in i + 1..k {
            s -= r[i][j] * b[j];
        }
        b[i] = s / r[i][i];
    }
    for (bi, s) in b.iter_mut().zip(&scale) {
        *bi /= s;
    }
    Some((b, resid))
}
