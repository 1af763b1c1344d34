//! Composite Gauss–Legendre quadrature.
//!
//! Nodes and weights on `[-1, 1]` are computed by Newton iteration on the
//! Legendre polynomials; composite rules split `[a, b]` into equal panels.
//! An n-node rule is exact for polynomials of degree `2n - 1` per panel.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Panel count and per-panel node count of a composite Gauss–Legendre rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadLevel {
    pub panels: usize,
    pub nodes: usize,
}

impl QuadLevel {
    pub const fn new(panels: usize, nodes: usize) -> Self {
        Self { panels, nodes }
    }
}

impl Default for QuadLevel {
    fn default() -> Self {
        // 8 panels x 4 nodes: exact to degree 7 per panel.
        Self { panels: 8, nodes: 4 }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the n-node rule. Newton iteration on P_n from the Chebyshev
    /// initial guess converges to machine precision in a handful of steps.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidData("quadrature rule needs >= 1 node".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Ok(Self { nodes, weights })
    }

    /// Integrates `f` over `[a, b]` with this rule on a single panel.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::ZERO;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * w;
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss–Legendre integral of a complex-valued integrand over
/// `[a, b]`. Degenerate intervals integrate to zero; `a > b` flips the sign.
pub fn integrate(level: QuadLevel, a: f64, b: f64, f: &dyn Fn(f64) -> Complex64) -> Result<Complex64> {
    if level.panels == 0 {
        return Err(Error::InvalidData("quadrature needs >= 1 panel".into()));
    }
    if a == b {
        return Ok(Complex64::ZERO);
    }
    let rule = GaussLegendre::new(level.nodes)?;
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let h = (hi - lo) / level.panels as f64;
    let mut acc = Complex64::ZERO;
    for p in 0..level.panels {
        let pa = lo + p as f64 * h;
        acc += rule.integrate(pa, pa + h, &f);
    }
    Ok(acc * sign)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real(level: QuadLevel, a: f64, b: f64, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    integrate(level, a, b, &|x| Complex64::new(f(x), 0.0)).map(|z| z.re)
}
