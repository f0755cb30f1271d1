/// Index `i` with `xs[i] <= x < xs[i+1]`, clamped to the valid panel range.
pub fn locate(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let n = xs.len();
    if x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    }
}

/// Cubic Hermite interpolation from values and slopes at the two panel ends.
/// Returns the value and its derivative.
#[inline]
pub fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let deriv = dh00 * f0 + dh10 * d0 + dh01 * f1 + dh11 * d1;
    (value, deriv)
}

/// Fritsch–Carlson limiter: clip the node slopes so that the Hermite
/// interpolant is monotone on every panel where the data are.
pub fn monotone_slopes(xs: &[f64], ys: &[f64], slopes: &[f64]) -> Vec<f64> {
    let mut d = slopes.to_vec();
    for i in 0..xs.len() - 1 {
        let delta = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        if delta == 0.0 {
            d[i] = 0.0;
            d[i + 1] = 0.0;
            continue;
        }
        let a = d[i] / delta;
        let b = d[i + 1] / delta;
        if a < 0.0 {
            d[i] = 0.0;
        }
        if b < 0.0 {
            d[i + 1] = 0.0;
        }
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            d[i] = tau * a * delta;
            d[i + 1] = tau * b * delta;
        }
    }
    d
}

/// Finite-difference weights (Fornberg) for derivatives `0..=m` at `z` from
/// arbitrary nodes. `w[k][j]` multiplies `f(nodes[j])` for derivative `k`.
pub fn fd_weights(z: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// First derivative of tabulated data by five-point stencils (centred in the
/// interior, shifted at the ends) on a possibly non-uniform grid.
pub fn derivative_5pt(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(n >= 5, "five-point stencil needs at least five nodes");
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(2).min(n - 5);
            let nodes = &xs[start..start + 5];
            let w = fd_weights(xs[i], nodes, 1);
            w[1].iter().zip(&ys[start..start + 5]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_brackets() {
        let xs = [0.0, 1.0, 2.0, 4.0];
        assert_eq!(locate(&xs, -1.0), 0);
        assert_eq!(locate(&xs, 1.0), 1);
        assert_eq!(locate(&xs, 3.9), 2);
        assert_eq!(locate(&xs, 9.0), 2);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| x * x * x - x;
        let df = |x: f64| 3.0 * x * x - 1.0;
        let (v, d) = hermite(0.5, 1.5, f(0.5), f(1.5), df(0.5), df(1.5), 1.1);
        assert!((v - f(1.1)).abs() < 1e-14);
        assert!((d - df(1.1)).abs() < 1e-13);
    }

    #[test]
    fn fornberg_central_weights() {
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let expect1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[1].iter().zip(expect1) {
            assert!((a - b).abs() < 1e-14);
        }
        let expect2 = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[2].iter().zip(expect2) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn five_point_derivative_on_geometric_grid() {
        let xs: Vec<f64> = (0..240).map(|i| 0.01 * 1.02f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let d = derivative_5pt(&xs, &ys);
        for (x, dv) in xs.iter().zip(d) {
            assert!((dv - x.cos()).abs() < 1e-6, "{x}: {dv}");
        }
    }

    #[test]
    fn limiter_keeps_monotone_data_monotone() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [0.0, 0.0, 1.0, 1.0];
        let d = monotone_slopes(&xs, &ys, &[0.0, 5.0, 5.0, 0.0]);
        for i in 0..3 {
            let mut prev = ys[i];
            for k in 1..=20 {
                let x = xs[i] + k as f64 / 20.0;
                let (v, _) = hermite(xs[i], xs[i + 1], ys[i], ys[i + 1], d[i], d[i + 1], x);
                assert!(v >= prev - 1e-15);
                prev = v;
            }
        }
    }
}
