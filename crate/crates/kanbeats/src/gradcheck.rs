//! Finite-difference gradient checking.
//!
//! The checkers here evaluate a scalar function twice per coordinate with a
//! central difference and compare against analytic gradients. They know
//! nothing about the layers they are checking, so they stay an independent
//! oracle for every backward pass in the crate.

/// Central difference of `f` at `x0` with step `h`.
pub fn central_diff(x0: f64, h: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    (f(x0 + h) - f(x0 - h)) / (2.0 * h)
}

/// Default comparison used throughout: relative error at most `rel_tol`,
/// except that near-zero pairs (|a| + |b| < abs_floor) are compared
/// absolutely against `abs_floor`.
pub fn gradients_close(analytic: f64, numeric: f64, rel_tol: f64, abs_floor: f64) -> bool {
    let scale = analytic.abs() + numeric.abs();
    if scale < abs_floor {
        (analytic - numeric).abs() <= abs_floor
    } else {
        (analytic - numeric).abs() / scale <= rel_tol
    }
}

/// Panics with a diagnostic when the analytic/numeric pair disagrees.
pub fn check_close(analytic: f64, numeric: f64, rel_tol: f64, abs_floor: f64) {
    assert!(
        gradients_close(analytic, numeric, rel_tol, abs_floor),
        "gradient mismatch: analytic {analytic} vs numeric {numeric}"
    );
}

/// Result of sweeping a full gradient vector.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradCheckReport {
    pub checked: usize,
    pub failures: usize,
    pub max_rel_err: f64,
}

impl GradCheckReport {
    pub fn ok(&self) -> bool {
        self.failures == 0
    }

    pub fn record(&mut self, analytic: f64, numeric: f64, rel_tol: f64, abs_floor: f64) {
        self.checked += 1;
        let scale = analytic.abs() + numeric.abs();
        if scale >= abs_floor {
            let rel = (analytic - numeric).abs() / scale;
            if rel > self.max_rel_err {
                self.max_rel_err = rel;
            }
        }
        if !gradients_close(analytic, numeric, rel_tol, abs_floor) {
            self.failures += 1;
        }
    }

    pub fn merge(&mut self, other: GradCheckReport) {
        self.checked += other.checked;
        self.failures += other.failures;
        self.max_rel_err = self.max_rel_err.max(other.max_rel_err);
    }
}

/// Sweep every coordinate of a parameter array: `loss_at(j, v)` must return
/// the scalar loss with coordinate `j` temporarily set to `v` (the caller
/// restores it). `analytic[j]` is compared against the central difference.
pub fn sweep_array(
    values: &[f64],
    analytic: &[f64],
    h: f64,
    rel_tol: f64,
    abs_floor: f64,
    mut loss_at: impl FnMut(usize, f64) -> f64,
) -> GradCheckReport {
    assert_eq!(values.len(), analytic.len());
    let mut report = GradCheckReport::default();
    for j in 0..values.len() {
        let x0 = values[j];
        let up = loss_at(j, x0 + h);
        let dn = loss_at(j, x0 - h);
        let numeric = (up - dn) / (2.0 * h);
        report.record(analytic[j], numeric, rel_tol, abs_floor);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_diff_of_square() {
        let d = central_diff(3.0, 1e-6, |x| x * x);
        assert!((d - 6.0).abs() < 1e-8);
    }

    #[test]
    fn close_checks() {
        assert!(gradients_close(1.0, 1.0 + 5e-5, 1e-4, 1e-8));
        assert!(!gradients_close(1.0, 1.01, 1e-4, 1e-8));
        assert!(gradients_close(0.0, 5e-9, 1e-4, 1e-8));
    }

    #[test]
    fn sweep_reports_failures() {
        let values = [1.0, 2.0];
        let analytic = [2.0, 999.0];
        let report = sweep_array(&values, &analytic, 1e-6, 1e-4, 1e-8, |j, v| {
            let mut x = values;
            x[j] = v;
            x[0] * x[0] + x[1] * x[1]
        });
        assert_eq!(report.checked, 2);
        assert_eq!(report.failures, 1);
    }
}
