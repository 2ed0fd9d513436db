//! Chebyshev nodes, barycentric Lagrange interpolation over the initial-value
//! space, and the Chebyshev spectral differentiation matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative distance below which an evaluation point counts as a node.
const NODE_HIT_TOL: f64 = 1e-14;

/// Which Chebyshev point family samples the initial-value space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeKind {
    /// First kind (roots of T_M); never touches the endpoints.
    #[default]
    Gauss,
    /// Second kind (extrema of T_{M-1}); includes both endpoints when M >= 2.
    Lobatto,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Gauss => "gauss",
            NodeKind::Lobatto => "lobatto",
        }
    }
}

impl std::str::FromStr for NodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gauss" | "first" | "first-kind" => Ok(NodeKind::Gauss),
            "lobatto" | "second" | "second-kind" => Ok(NodeKind::Lobatto),
            other => Err(Error::InvalidArgument(format!("unknown node kind '{other}'"))),
        }
    }
}

/// Interval `[a, b]` of plausible slice-entry values, sampled with `m` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialValueSpace {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub kind: NodeKind,
}

impl InitialValueSpace {
    pub fn new(a: f64, b: f64, m: usize, kind: NodeKind) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        Ok(Self { a, b, m, kind })
    }

    pub fn nodes(&self) -> Vec<f64> {
        match self.kind {
            NodeKind::Gauss => cheb_nodes(self.m, self.a, self.b),
            NodeKind::Lobatto => cheb_lobatto_nodes(self.m, self.a, self.b),
        }
    }

    /// Node spacing scale `(b - a) / M`.
    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.m as f64
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }
}

/// First-kind Chebyshev points `(a+b)/2 + (b-a)/2 cos((2k-1) pi / 2M)`, ascending.
pub fn cheb_nodes(m: usize, a: f64, b: f64) -> Vec<f64> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut x: Vec<f64> = (1..=m)
        .map(|k| mid + half * ((2 * k - 1) as f64 * PI / (2 * m) as f64).cos())
        .collect();
    x.reverse();
    symmetrize(&mut x, mid);
    x
}

/// Second-kind Chebyshev points `(a+b)/2 - (b-a)/2 cos(k pi / (M-1))`, ascending.
/// A single point is the midpoint.
pub fn cheb_lobatto_nodes(m: usize, a: f64, b: f64) -> Vec<f64> {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    if m == 1 {
        return vec![mid];
    }
    let mut x: Vec<f64> = (0..m)
        .map(|k| mid - half * (k as f64 * PI / (m - 1) as f64).cos())
        .collect();
    x[0] = a;
    x[m - 1] = b;
    symmetrize(&mut x, mid);
    x
}

// cos is not exactly odd about pi/2 in floating point; mirror the upper half
// so that x_k + x_{M+1-k} = a + b holds to rounding of the sum.
fn symmetrize(x: &mut [f64], mid: f64) {
    let m = x.len();
    for k in 0..m / 2 {
        let d = 0.5 * ((x[m - 1 - k] - mid) - (x[k] - mid));
        x[k] = mid - d;
        x[m - 1 - k] = mid + d;
    }
    if m % 2 == 1 {
        x[m / 2] = mid;
    }
}

/// `w_k = 1 / prod_{j != k} (x_k - x_j)`, rescaled so that `max |w_k| = 1`.
pub fn barycentric_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    let mut w = Vec::with_capacity(nodes.len());
    for (k, &xk) in nodes.iter().enumerate() {
        let mut prod = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if j != k {
                let d = xk - xj;
                if d == 0.0 {
                    return Err(Error::DuplicateNodes { index: k.max(j), value: xk });
                }
                prod *= d;
            }
        }
        w.push(1.0 / prod);
    }
    let scale = w.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale > 0.0 && scale.is_finite() {
        w.iter_mut().for_each(|v| *v /= scale);
    }
    Ok(w)
}

/// Lagrange interpolant in barycentric form.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl Interpolant {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidArgument("interpolant needs at least one node".into()));
        }
        if nodes.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: nodes.len(),
                got: values.len(),
            });
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[0] < w[1])) {
            return if nodes[i] == nodes[i + 1] {
                Err(Error::DuplicateNodes { index: i + 1, value: nodes[i] })
            } else {
                Err(Error::InvalidArgument("interpolation nodes must be ascending".into()))
            };
        }
        let weights = barycentric_weights(&nodes)?;
        Ok(Self { nodes, weights, values })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.nodes.len() == 1 {
            return self.values[0];
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xk, &wk), &vk) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = x - xk;
            if d.abs() <= NODE_HIT_TOL * xk.abs().max(1.0) {
                return vk;
            }
            let c = wk / d;
            num += c * vk;
            den += c;
        }
        num / den
    }

    /// True when `x` lies outside the node hull.
    pub fn extrapolates(&self, x: f64) -> bool {
        x < self.nodes[0] || x > self.nodes[self.nodes.len() - 1]
    }
}

/// Chebyshev differentiation matrix on the `M + 1` second-kind points mapped
/// to `[a, b]`. The grid is returned in ascending order.
pub fn cheb_diff_matrix(m: usize, a: f64, b: f64) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if m < 2 {
        return Err(Error::BadGrid(format!("differentiation matrix needs M >= 2, got {m}")));
    }
    if !(a < b) {
        return Err(Error::BadGrid(format!("empty interval [{a}, {b}]")));
    }
    let n = m + 1;
    // Reference points on [-1, 1], ascending: -cos(j pi / M).
    let mut s: Vec<f64> = (0..n).map(|j| -(j as f64 * PI / m as f64).cos()).collect();
    s[0] = -1.0;
    s[m] = 1.0;
    symmetrize(&mut s, 0.0);

    let c = |j: usize| -> f64 {
        let base = if j == 0 || j == m { 2.0 } else { 1.0 };
        if j % 2 == 0 {
            base
        } else {
            -base
        }
    };
    let scale = 2.0 / (b - a);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = c(i) / c(j) / (s[i] - s[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        // negative-sum trick keeps rows summing to zero
        d[(i, i)] = -row_sum;
    }
    d *= scale;
    let grid = s.iter().map(|si| a + (si + 1.0) / scale).collect();
    Ok((d, grid))
}
