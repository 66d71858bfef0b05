//! B-spline basis evaluation on a uniform extended knot grid.
//!
//! Every edge activation in a KAN layer is a spline curve over a grid shared
//! by the whole layer. The grid covers a closed domain `[lo, hi]` with `G`
//! intervals and is extended by `degree` extra uniform knots past each
//! boundary, giving `G + degree` basis functions. Inputs outside the domain
//! are clamped to the boundary, so spline values are constant beyond it and
//! gradients stay bounded.

use crate::error::{Error, Result};

/// Largest supported spline degree. Keeps the evaluation scratch on the stack.
pub const MAX_DEGREE: usize = 10;

/// Uniform extended B-spline knot grid over a closed domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineGrid {
    degree: usize,
    interior_count: usize,
    lo: f64,
    hi: f64,
    knots: Vec<f64>,
}

impl SplineGrid {
    /// Build a uniform grid with `interior_count` intervals on `[lo, hi]`
    /// and `degree` replicated-spacing knots extended past each boundary.
    pub fn new(degree: usize, interior_count: usize, lo: f64, hi: f64) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::Config(format!(
                "spline degree {degree} exceeds the supported maximum {MAX_DEGREE}"
            )));
        }
        if interior_count == 0 {
            return Err(Error::Config("spline grid needs at least 1 interval".into()));
        }
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::Config(format!(
                "spline domain [{lo}, {hi}] must be a finite non-empty interval"
            )));
        }
        let h = (hi - lo) / interior_count as f64;
        let n_knots = interior_count + 2 * degree + 1;
        let knots: Vec<f64> = (0..n_knots)
            .map(|i| lo + (i as f64 - degree as f64) * h)
            .collect();
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "spline knot vector is not strictly increasing".into(),
            ));
        }
        Ok(Self {
            degree,
            interior_count,
            lo,
            hi,
            knots,
        })
    }

    /// Cubic grid with 5 intervals on [-1, 1].
    pub fn default_grid() -> Self {
        Self::new(3, 5, -1.0, 1.0).expect("default grid parameters are valid")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn interior_count(&self) -> usize {
        self.interior_count
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions: `G + degree`.
    pub fn basis_count(&self) -> usize {
        self.interior_count + self.degree
    }

    /// Clamp an input to the grid domain.
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// True when x lies inside the closed domain.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Knot span index for a clamped input, in `[degree, degree + G - 1]`.
    fn span_of(&self, xc: f64) -> usize {
        let h = (self.hi - self.lo) / self.interior_count as f64;
        let raw = ((xc - self.lo) / h).floor() as isize + self.degree as isize;
        raw.clamp(self.degree as isize, (self.degree + self.interior_count - 1) as isize) as usize
    }

    /// Evaluate the `degree + 1` possibly nonzero basis values at `x`
    /// (clamped to the domain). `out` must have length `degree + 1`.
    /// Returns the index of the first basis function the values belong to.
    pub fn basis_nonzero(&self, x: f64, out: &mut [f64]) -> usize {
        debug_assert_eq!(out.len(), self.degree + 1);
        let xc = self.clamp(x);
        let span = self.span_of(xc);
        self.basis_kernel(xc, span, self.degree, out);
        span - self.degree
    }

    // Local triangular recursion (the de Boor basis-function scheme): fills
    // `out[0..=p]` with N_{span-p..span, p}(xc).
    fn basis_kernel(&self, xc: f64, span: usize, p: usize, out: &mut [f64]) {
        let t = &self.knots;
        let mut left = [0.0_f64; MAX_DEGREE + 1];
        let mut right = [0.0_f64; MAX_DEGREE + 1];
        out[0] = 1.0;
        for j in 1..=p {
            left[j] = xc - t[span + 1 - j];
            right[j] = t[span + j] - xc;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = out[r] / (right[r + 1] + left[j - r]);
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
    }

    /// Evaluate values and first derivatives of the `degree + 1` possibly
    /// nonzero basis functions at `x` (clamped). Derivatives at a boundary
    /// are the one-sided derivatives. Returns the first basis index.
    pub fn basis_nonzero_deriv(&self, x: f64, vals: &mut [f64], derivs: &mut [f64]) -> usize {
        debug_assert_eq!(vals.len(), self.degree + 1);
        debug_assert_eq!(derivs.len(), self.degree + 1);
        let p = self.degree;
        let xc = self.clamp(x);
        let span = self.span_of(xc);
        self.basis_kernel(xc, span, p, vals);
        if p == 0 {
            derivs[0] = 0.0;
            return span;
        }
        // Degree-lowering formula: N'_{i,p} = p * ( N_{i,p-1}/(t[i+p]-t[i])
        //                                         - N_{i+1,p-1}/(t[i+p+1]-t[i+1]) ).
        // At span j the nonzero degree-(p-1) functions are i = j-p+1 ..= j.
        let mut lower = [0.0_f64; MAX_DEGREE + 1];
        self.basis_kernel(xc, span, p - 1, &mut lower[..p]);
        let t = &self.knots;
        let start = span - p;
        for r in 0..=p {
            let i = start + r;
            let mut d = 0.0;
            if r >= 1 {
                let den = t[i + p] - t[i];
                if den > 0.0 {
                    d += lower[r - 1] / den;
                }
            }
            if r <= p - 1 {
                let den = t[i + p + 1] - t[i + 1];
                if den > 0.0 {
                    d -= lower[r] / den;
                }
            }
            derivs[r] = p as f64 * d;
        }
        span - p
    }
}

/// Spline coefficients paired with a grid; length always equals the grid's
/// basis count.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineCoeffs {
    values: Vec<f64>,
}

impl SplineCoeffs {
    pub fn new(grid: &SplineGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.basis_count() {
            return Err(Error::Shape(format!(
                "spline coefficient count {} does not match basis count {}",
                values.len(),
                grid.basis_count()
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// All basis values at `x`, as a dense vector of length `basis_count`.
pub fn basis_eval(grid: &SplineGrid, x: f64) -> Vec<f64> {
    let mut window = [0.0_f64; MAX_DEGREE + 1];
    let w = &mut window[..=grid.degree()];
    let start = grid.basis_nonzero(x, w);
    let mut full = vec![0.0; grid.basis_count()];
    full[start..start + w.len()].copy_from_slice(w);
    full
}

/// First derivatives of all basis functions at `x`, dense vector.
pub fn basis_eval_deriv(grid: &SplineGrid, x: f64) -> Vec<f64> {
    let mut vals = [0.0_f64; MAX_DEGREE + 1];
    let mut ders = [0.0_f64; MAX_DEGREE + 1];
    let p = grid.degree();
    let start = grid.basis_nonzero_deriv(x, &mut vals[..=p], &mut ders[..=p]);
    let mut full = vec![0.0; grid.basis_count()];
    full[start..start + p + 1].copy_from_slice(&ders[..=p]);
    full
}

/// Spline curve value: dot product of the coefficients with the basis at `x`.
pub fn spline_eval(grid: &SplineGrid, coeffs: &SplineCoeffs, x: f64) -> f64 {
    let mut window = [0.0_f64; MAX_DEGREE + 1];
    let w = &mut window[..=grid.degree()];
    let start = grid.basis_nonzero(x, w);
    w.iter()
        .zip(&coeffs.values()[start..])
        .map(|(b, c)| b * c)
        .sum()
}
