//! Differentiable layers: the KAN layer (learnable spline edge activations
//! plus a silu base path) and a plain affine layer for coefficient heads and
//! the domain classifier. Forward passes are pure; backward passes recompute
//! what they need from `(params, input)` and return exact analytic gradients.

use crate::error::{Error, Result};
use crate::spline::{SplineGrid, MAX_DEGREE};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn silu(z: f64) -> f64 {
    z / (1.0 + (-z).exp())
}

pub fn silu_deriv(z: f64) -> f64 {
    let s = 1.0 / (1.0 + (-z).exp());
    s * (1.0 + z * (1.0 - s))
}

/// One KAN layer. Every edge `(o, i)` carries
/// `phi(x) = base_weight[o,i] * silu(x) + spline_scale[o,i] * spline(coeffs[o,i,:], x)`
/// and node `o` outputs the sum of its incoming edges.
#[derive(Debug, Clone)]
pub struct KanLayerParams {
    in_dim: usize,
    out_dim: usize,
    grid: SplineGrid,
    /// `[out_dim, in_dim, basis_count]`, flat.
    pub spline_coeffs: Vec<f64>,
    /// `[out_dim, in_dim]`, flat.
    pub base_weight: Vec<f64>,
    /// `[out_dim, in_dim]`, flat.
    pub spline_scale: Vec<f64>,
}

/// Gradients for every learnable array of a [`KanLayerParams`].
#[derive(Debug, Clone)]
pub struct KanGrads {
    pub spline_coeffs: Vec<f64>,
    pub base_weight: Vec<f64>,
    pub spline_scale: Vec<f64>,
}

/// Input gradient plus parameter gradients from one backward call.
#[derive(Debug, Clone)]
pub struct KanGradBundle {
    pub grad_input: Vec<f64>,
    pub grads: KanGrads,
}

impl KanLayerParams {
    /// All-zero parameters (spline_scale included), mainly for tests.
    pub fn zeros(in_dim: usize, out_dim: usize, grid: SplineGrid) -> Self {
        let basis = grid.basis_count();
        Self {
            in_dim,
            out_dim,
            grid,
            spline_coeffs: vec![0.0; out_dim * in_dim * basis],
            base_weight: vec![0.0; out_dim * in_dim],
            spline_scale: vec![0.0; out_dim * in_dim],
        }
    }

    /// Standard initialization: spline coefficients from a small Gaussian
    /// (sigma = 0.1/sqrt(basis_count)), base weights uniform in
    /// +-1/sqrt(in_dim), spline_scale = 1.
    pub fn init_with_rng(in_dim: usize, out_dim: usize, grid: SplineGrid, rng: &mut ChaCha8Rng) -> Self {
        let basis = grid.basis_count();
        let sigma = 0.1 / (basis as f64).sqrt();
        let normal = Normal::new(0.0, sigma).expect("valid normal");
        let bound = 1.0 / (in_dim as f64).sqrt();
        let spline_coeffs = (0..out_dim * in_dim * basis)
            .map(|_| normal.sample(rng))
            .collect();
        let base_weight = (0..out_dim * in_dim)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self {
            in_dim,
            out_dim,
            grid,
            spline_coeffs,
            base_weight,
            spline_scale: vec![1.0; out_dim * in_dim],
        }
    }

    /// Deterministic standalone initializer: same seed, same parameters.
    pub fn init(in_dim: usize, out_dim: usize, grid: SplineGrid, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init_with_rng(in_dim, out_dim, grid, &mut rng)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn grid(&self) -> &SplineGrid {
        &self.grid
    }

    pub fn basis_count(&self) -> usize {
        self.grid.basis_count()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.in_dim {
            return Err(Error::Shape(format!(
                "kan layer expects input length {}, got {}",
                self.in_dim,
                x.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut out = vec![0.0; self.out_dim];
        self.forward_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        let p = self.grid.degree();
        let basis = self.grid.basis_count();
        let mut window = [0.0_f64; MAX_DEGREE + 1];
        out.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            let w = &mut window[..=p];
            let start = self.grid.basis_nonzero(xi, w);
            let si = silu(xi);
            for o in 0..self.out_dim {
                let edge = o * self.in_dim + i;
                let coeffs = &self.spline_coeffs[edge * basis + start..edge * basis + start + p + 1];
                let mut sval = 0.0;
                for r in 0..=p {
                    sval += coeffs[r] * w[r];
                }
                out[o] += self.base_weight[edge] * si + self.spline_scale[edge] * sval;
            }
        }
    }

    /// Gradients of `<grad_out, forward(x)>` with respect to the input and
    /// every parameter array.
    pub fn backward(&self, x: &[f64], grad_out: &[f64]) -> Result<KanGradBundle> {
        let mut grads = KanGrads::zeros_like(self);
        let mut grad_input = vec![0.0; self.in_dim];
        self.backward_into(x, grad_out, &mut grads, &mut grad_input)?;
        Ok(KanGradBundle { grad_input, grads })
    }

    /// Accumulating backward: parameter gradients are added into `grads`,
    /// `grad_input` is overwritten.
    pub fn backward_into(
        &self,
        x: &[f64],
        grad_out: &[f64],
        grads: &mut KanGrads,
        grad_input: &mut [f64],
    ) -> Result<()> {
        self.check_input(x)?;
        if grad_out.len() != self.out_dim {
            return Err(Error::Shape(format!(
                "kan layer expects output gradient length {}, got {}",
                self.out_dim,
                grad_out.len()
            )));
        }
        let p = self.grid.degree();
        let basis = self.grid.basis_count();
        let mut vals = [0.0_f64; MAX_DEGREE + 1];
        let mut ders = [0.0_f64; MAX_DEGREE + 1];
        for (i, &xi) in x.iter().enumerate() {
            let start = self
                .grid
                .basis_nonzero_deriv(xi, &mut vals[..=p], &mut ders[..=p]);
            let si = silu(xi);
            let dsi = silu_deriv(xi);
            // The spline path is constant outside the grid domain (clamped
            // input), so its input derivative vanishes there.
            let inside = if self.grid.contains(xi) { 1.0 } else { 0.0 };
            let mut gx = 0.0;
            for o in 0..self.out_dim {
                let g = grad_out[o];
                let edge = o * self.in_dim + i;
                let scale = self.spline_scale[edge];
                let cbase = edge * basis + start;
                let mut sval = 0.0;
                let mut sder = 0.0;
                for r in 0..=p {
                    let c = self.spline_coeffs[cbase + r];
                    sval += c * vals[r];
                    sder += c * ders[r];
                    grads.spline_coeffs[cbase + r] += g * scale * vals[r];
                }
                grads.base_weight[edge] += g * si;
                grads.spline_scale[edge] += g * sval;
                gx += g * (self.base_weight[edge] * dsi + scale * sder * inside);
            }
            grad_input[i] = gx;
        }
        Ok(())
    }

    /// Edge activation `phi_{o,i}` sampled at `n_samples` uniform points over
    /// the grid domain (inclusive endpoints).
    pub fn dump_activations(&self, n_samples: usize) -> Result<Vec<ActivationSample>> {
        if n_samples < 2 {
            return Err(Error::Config(
                "activation dump needs at least 2 samples per edge".into(),
            ));
        }
        let (lo, hi) = self.grid.domain();
        let p = self.grid.degree();
        let basis = self.grid.basis_count();
        let mut window = [0.0_f64; MAX_DEGREE + 1];
        let mut rows = Vec::with_capacity(self.out_dim * self.in_dim * n_samples);
        for o in 0..self.out_dim {
            for i in 0..self.in_dim {
                let edge = o * self.in_dim + i;
                for s in 0..n_samples {
                    let x = lo + (hi - lo) * s as f64 / (n_samples - 1) as f64;
                    let w = &mut window[..=p];
                    let start = self.grid.basis_nonzero(x, w);
                    let mut sval = 0.0;
                    for r in 0..=p {
                        sval += self.spline_coeffs[edge * basis + start + r] * w[r];
                    }
                    let phi = self.base_weight[edge] * silu(x) + self.spline_scale[edge] * sval;
                    rows.push(ActivationSample {
                        edge_out: o,
                        edge_in: i,
                        x,
                        phi,
                    });
                }
            }
        }
        Ok(rows)
    }

    pub fn param_count(&self) -> usize {
        self.spline_coeffs.len() + self.base_weight.len() + self.spline_scale.len()
    }
}

impl KanGrads {
    pub fn zeros_like(layer: &KanLayerParams) -> Self {
        Self {
            spline_coeffs: vec![0.0; layer.spline_coeffs.len()],
            base_weight: vec![0.0; layer.base_weight.len()],
            spline_scale: vec![0.0; layer.spline_scale.len()],
        }
    }
}

/// One sampled point of an edge activation, for external plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSample {
    pub edge_out: usize,
    pub edge_in: usize,
    pub x: f64,
    pub phi: f64,
}

/// Affine layer `y = W x + b`.
#[derive(Debug, Clone)]
pub struct LinearLayerParams {
    in_dim: usize,
    out_dim: usize,
    /// `[out_dim, in_dim]`, flat.
    pub weight: Vec<f64>,
    /// `[out_dim]`.
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LinearGrads {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LinearGradBundle {
    pub grad_input: Vec<f64>,
    pub grads: LinearGrads,
}

impl LinearLayerParams {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![0.0; out_dim * in_dim],
            bias: vec![0.0; out_dim],
        }
    }

    /// Uniform +-1/sqrt(in_dim) weights, zero bias.
    pub fn init_with_rng(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        Self {
            in_dim,
            out_dim,
            weight: (0..out_dim * in_dim)
                .map(|_| rng.random_range(-bound..bound))
                .collect(),
            bias: vec![0.0; out_dim],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.in_dim {
            return Err(Error::Shape(format!(
                "linear layer expects input length {}, got {}",
                self.in_dim,
                x.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut out = vec![0.0; self.out_dim];
        self.forward_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        for o in 0..self.out_dim {
            let row = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.bias[o];
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            out[o] = acc;
        }
    }

    pub fn backward(&self, x: &[f64], grad_out: &[f64]) -> Result<LinearGradBundle> {
        let mut grads = LinearGrads::zeros_like(self);
        let mut grad_input = vec![0.0; self.in_dim];
        self.backward_into(x, grad_out, &mut grads, &mut grad_input)?;
        Ok(LinearGradBundle { grad_input, grads })
    }

    pub fn backward_into(
        &self,
        x: &[f64],
        grad_out: &[f64],
        grads: &mut LinearGrads,
        grad_input: &mut [f64],
    ) -> Result<()> {
        self.check_input(x)?;
        if grad_out.len() != self.out_dim {
            return Err(Error::Shape(format!(
                "linear layer expects output gradient length {}, got {}",
                self.out_dim,
                grad_out.len()
            )));
        }
        grad_input.fill(0.0);
        for o in 0..self.out_dim {
            let g = grad_out[o];
            grads.bias[o] += g;
            let row = o * self.in_dim;
            for i in 0..self.in_dim {
                grads.weight[row + i] += g * x[i];
                grad_input[i] += g * self.weight[row + i];
            }
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

impl LinearGrads {
    pub fn zeros_like(layer: &LinearLayerParams) -> Self {
        Self {
            weight: vec![0.0; layer.weight.len()],
            bias: vec![0.0; layer.bias.len()],
        }
    }
}
