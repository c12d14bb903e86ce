//! Cell meshes with Chebyshev–Lobatto nodes.
//!
//! Each cell carries `CELL_NODES` nodes; neighbouring cells share their common
//! edge node, so a mesh with `n` cells has `n * CELL_DEGREE + 1` nodes in
//! strictly increasing order. Integration and differentiation are done with the
//! cell's interpolating polynomial.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Polynomial degree inside a cell.
pub const CELL_DEGREE: usize = 6;
pub const CELL_NODES: usize = CELL_DEGREE + 1;

type Row = [f64; CELL_NODES];

struct Reference {
    t: Row,
    bary: Row,
    /// `tail[i][j] = ∫_{t_i}^{1} ℓ_j(t) dt` on [-1, 1].
    tail: [Row; CELL_NODES],
    diff: [Row; CELL_NODES],
}

fn reference() -> &'static Reference {
    static REF: OnceLock<Reference> = OnceLock::new();
    REF.get_or_init(|| {
        let m = CELL_DEGREE as f64;
        let mut t = [0.0; CELL_NODES];
        let mut bary = [0.0; CELL_NODES];
        for l in 0..CELL_NODES {
            t[l] = -(std::f64::consts::PI * l as f64 / m).cos();
            bary[l] = if l % 2 == 0 { 1.0 } else { -1.0 };
        }
        t[0] = -1.0;
        t[CELL_DEGREE] = 1.0;
        if CELL_DEGREE % 2 == 0 {
            t[CELL_DEGREE / 2] = 0.0;
        }
        bary[0] *= 0.5;
        bary[CELL_DEGREE] *= 0.5;

        let (gx, gw) = gauss_legendre(CELL_NODES);
        let mut tail = [[0.0; CELL_NODES]; CELL_NODES];
        for i in 0..CELL_NODES {
            let (lo, hi) = (t[i], 1.0);
            let half = 0.5 * (hi - lo);
            for (x, w) in gx.iter().zip(&gw) {
                let s = lo + half * (x + 1.0);
                let basis = lagrange_basis(&t, &bary, s);
                for j in 0..CELL_NODES {
                    tail[i][j] += half * w * basis[j];
                }
            }
        }
        let mut diff = [[0.0; CELL_NODES]; CELL_NODES];
        for i in 0..CELL_NODES {
            let mut diag = 0.0;
            for j in 0..CELL_NODES {
                if i != j {
                    let d = (bary[j] / bary[i]) / (t[i] - t[j]);
                    diff[i][j] = d;
                    diag -= d;
                }
            }
            diff[i][i] = diag;
        }
        Reference {
            t,
            bary,
            tail,
            diff,
        }
    })
}

fn lagrange_basis(t: &Row, bary: &Row, s: f64) -> Row {
    let mut out = [0.0; CELL_NODES];
    for (l, &tl) in t.iter().enumerate() {
        if s == tl {
            out[l] = 1.0;
            return out;
        }
    }
    let mut denom = 0.0;
    for l in 0..CELL_NODES {
        let q = bary[l] / (s - t[l]);
        out[l] = q;
        denom += q;
    }
    for v in &mut out {
        *v /= denom;
    }
    out
}

/// A 1D mesh of Chebyshev–Lobatto cells.
#[derive(Clone, Debug)]
pub struct Mesh {
    edges: Vec<f64>,
    nodes: Vec<f64>,
}

impl Mesh {
    /// Builds a mesh from strictly increasing cell edges (at least two).
    pub fn from_edges(edges: Vec<f64>) -> Mesh {
        assert!(edges.len() >= 2, "a mesh needs at least one cell");
        assert!(
            edges.windows(2).all(|w| w[0] < w[1]),
            "mesh edges must be strictly increasing"
        );
        let r = reference();
        let mut nodes = Vec::with_capacity((edges.len() - 1) * CELL_DEGREE + 1);
        nodes.push(edges[0]);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            for l in 1..CELL_DEGREE {
                nodes.push(a + half * (r.t[l] + 1.0));
            }
            nodes.push(b);
        }
        Mesh { edges, nodes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.edges[0]
    }

    pub fn end(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Same domain with every cell split in two.
    pub fn refined(&self) -> Mesh {
        let mut edges = Vec::with_capacity(2 * self.edges.len() - 1);
        for w in self.edges.windows(2) {
            edges.push(w[0]);
            edges.push(0.5 * (w[0] + w[1]));
        }
        edges.push(self.end());
        Mesh::from_edges(edges)
    }

    /// Index of the node exactly at `x`, if it is a cell edge.
    pub fn edge_node(&self, x: f64) -> Option<usize> {
        self.edges
            .binary_search_by(|e| e.partial_cmp(&x).unwrap())
            .ok()
            .map(|c| c * CELL_DEGREE)
    }

    fn check(&self, f: &[Complex64]) -> Result<()> {
        if f.len() != self.nodes.len() {
            return Err(Error::MeshMismatch(f.len(), self.nodes.len()));
        }
        Ok(())
    }

    fn cell_of(&self, x: f64) -> usize {
        let n = self.cells();
        match self.edges.binary_search_by(|e| e.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    /// `F(x_i) = ∫_{x_i}^{end} f`.
    pub fn integral_from_right(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(f)?;
        let r = reference();
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        let mut acc = Complex64::new(0.0, 0.0);
        for c in (0..self.cells()).rev() {
            let half = 0.5 * (self.edges[c + 1] - self.edges[c]);
            let base = c * CELL_DEGREE;
            let vals = &f[base..base + CELL_NODES];
            for i in 0..CELL_NODES {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..CELL_NODES {
                    s += vals[j] * r.tail[i][j];
                }
                out[base + i] = acc + s * half;
            }
            acc = out[base];
        }
        Ok(out)
    }

    /// ∫ over the whole mesh.
    pub fn integral(&self, f: &[Complex64]) -> Result<Complex64> {
        Ok(self.integral_from_right(f)?[0])
    }

    /// Derivative by cell-wise polynomial differentiation; shared edge nodes
    /// take the mean of both one-sided cell derivatives.
    pub fn differentiate(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(f)?;
        let r = reference();
        let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
        let n = self.cells();
        for c in 0..n {
            let scale = 2.0 / (self.edges[c + 1] - self.edges[c]);
            let base = c * CELL_DEGREE;
            for i in 0..CELL_NODES {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..CELL_NODES {
                    s += f[base + j] * r.diff[i][j];
                }
                s *= scale;
                if i == 0 && c > 0 {
                    out[base] = 0.5 * (out[base] + s);
                } else {
                    out[base + i] = s;
                }
            }
        }
        Ok(out)
    }

    /// Barycentric interpolation of a nodal field at `x` (clamped to the mesh).
    pub fn interpolate(&self, f: &[Complex64], x: f64) -> Result<Complex64> {
        self.check(f)?;
        let x = x.clamp(self.start(), self.end());
        let c = self.cell_of(x);
        let (a, b) = (self.edges[c], self.edges[c + 1]);
        let s = 2.0 * (x - a) / (b - a) - 1.0;
        let r = reference();
        let basis = lagrange_basis(&r.t, &r.bary, s.clamp(-1.0, 1.0));
        let base = c * CELL_DEGREE;
        Ok((0..CELL_NODES).map(|j| f[base + j] * basis[j]).sum())
    }
}

/// Precomputed kernel for damped tail integrals
///
/// `J(x) = ∫_x^{end} exp(-2 ∫_x^y rate) source(y) dy + exp(-2 ∫_x^{end} rate) J_end`
///
/// for a fixed `rate` field with positive real part.
pub struct DampedKernel {
    halves: Vec<f64>,
    /// Per cell, `exp(-2 φ_l)` and `exp(2 φ_l)` with `φ_l = ∫_{x_l}^{cell end} rate`.
    down: Vec<[Complex64; CELL_NODES]>,
    up: Vec<[Complex64; CELL_NODES]>,
}

impl DampedKernel {
    pub fn new(mesh: &Mesh, rate: &[Complex64]) -> Result<DampedKernel> {
        mesh.check(rate)?;
        let r = reference();
        let n = mesh.cells();
        let mut halves = Vec::with_capacity(n);
        let mut down = Vec::with_capacity(n);
        let mut up = Vec::with_capacity(n);
        for c in 0..n {
            let half = 0.5 * (mesh.edges[c + 1] - mesh.edges[c]);
            let base = c * CELL_DEGREE;
            let mut d = [Complex64::new(0.0, 0.0); CELL_NODES];
            let mut u = [Complex64::new(0.0, 0.0); CELL_NODES];
            for i in 0..CELL_NODES {
                let mut phi = Complex64::new(0.0, 0.0);
                for j in 0..CELL_NODES {
                    phi += rate[base + j] * r.tail[i][j];
                }
                phi *= 2.0 * half;
                d[i] = (-phi).exp();
                u[i] = phi.exp();
            }
            halves.push(half);
            down.push(d);
            up.push(u);
        }
        Ok(DampedKernel { halves, down, up })
    }

    /// Evaluates `J` at every node for the given source and end value.
    pub fn apply(&self, mesh: &Mesh, source: &[Complex64], end_value: Complex64) -> Result<Vec<Complex64>> {
        mesh.check(source)?;
        let r = reference();
        let mut out = vec![Complex64::new(0.0, 0.0); source.len()];
        let mut jb = end_value;
        for c in (0..self.halves.len()).rev() {
            let base = c * CELL_DEGREE;
            let mut g = [Complex64::new(0.0, 0.0); CELL_NODES];
            for l in 0..CELL_NODES {
                g[l] = self.up[c][l] * source[base + l];
            }
            for i in 0..CELL_NODES {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..CELL_NODES {
                    s += g[j] * r.tail[i][j];
                }
                out[base + i] = self.down[c][i] * (s * self.halves[c] + jb);
            }
            jb = out[base];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn uniform(a: f64, b: f64, n: usize) -> Mesh {
        Mesh::from_edges((0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect())
    }

    #[test]
    fn nodes_are_increasing_and_shared() {
        let m = uniform(0.0, 1.0, 3);
        assert_eq!(m.len(), 3 * CELL_DEGREE + 1);
        assert!(m.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(m.edge_node(m.edges()[1]), Some(CELL_DEGREE));
        assert_eq!(m.edge_node(0.5), None);
        assert_eq!(m.edge_node(m.edges()[2]), Some(2 * CELL_DEGREE));
    }

    #[test]
    fn integrates_and_differentiates_smooth_functions() {
        let m = uniform(0.0, 2.0, 8);
        let f: Vec<_> = m.nodes().iter().map(|&x| c(x.sin())).collect();
        let tail = m.integral_from_right(&f).unwrap();
        for (x, t) in m.nodes().iter().zip(&tail) {
            assert!((t.re - (x.cos() - 2f64.cos())).abs() < 1e-11);
        }
        let d = m.differentiate(&f).unwrap();
        for (x, d) in m.nodes().iter().zip(&d) {
            assert!((d.re - x.cos()).abs() < 1e-7, "{x} {d}");
        }
        let v = m.interpolate(&f, 1.2345).unwrap();
        assert!((v.re - 1.2345f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn damped_kernel_constant_rate_is_exact() {
        // ∫_x^b e^{-2λ(y-x)} dy = (1 - e^{-2λ(b-x)}) / (2λ)
        let lam = 10.0;
        let m = uniform(0.0, 1.0, 40);
        let rate = vec![c(lam); m.len()];
        let one = vec![c(1.0); m.len()];
        let k = DampedKernel::new(&m, &rate).unwrap();
        let j = k.apply(&m, &one, c(0.0)).unwrap();
        for (x, v) in m.nodes().iter().zip(&j) {
            let exact = (1.0 - (-2.0 * lam * (1.0 - x)).exp()) / (2.0 * lam);
            assert!((v.re - exact).abs() <= 1e-9 * exact, "{x}: {} vs {exact}", v.re);
        }
    }

    #[test]
    fn mismatched_field_is_rejected() {
        let m = uniform(0.0, 1.0, 2);
        assert!(matches!(
            m.integral(&[c(1.0)]),
            Err(Error::MeshMismatch(1, _))
        ));
    }
}
