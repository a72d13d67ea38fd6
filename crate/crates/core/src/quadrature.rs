//! Small numerical building blocks: Gauss–Legendre rules, barycentric
//! Lagrange weights, and Chebyshev interpolation.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Barycentric weights `1 / Π_{k≠i}(t_i - t_k)`, rescaled to unit maximum.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let mut w: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(i, &ti)| {
            1.0 / nodes.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &tk)| ti - tk).product::<f64>()
        })
        .collect();
    let max = w.iter().map(|v| v.abs()).fold(0.0, f64::max);
    w.iter_mut().for_each(|v| *v /= max);
    w
}

/// Values of all Lagrange basis polynomials of `nodes` at `t`, written to `out`.
pub fn lagrange_basis(nodes: &[f64], bary: &[f64], t: f64, out: &mut [f64]) {
    if let Some(i) = nodes.iter().position(|&x| x == t) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[i] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for ((o, &x), &w) in out.iter_mut().zip(nodes).zip(bary) {
        *o = w / (t - x);
        denom += *o;
    }
    out.iter_mut().for_each(|v| *v /= denom);
}

/// Chebyshev interpolant of a function on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    /// Interpolates `f` at the `n` Chebyshev points of the first kind.
    pub fn fit(a: f64, b: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> Self {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let values: Vec<f64> = (0..n)
            .map(|k| f(mid + half * (PI * (k as f64 + 0.5) / n as f64).cos()))
            .collect();
        let coeffs = (0..n)
            .map(|j| {
                let s: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                    .sum();
                let c = 2.0 * s / n as f64;
                if j == 0 {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        Self { a, b, coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }
}
