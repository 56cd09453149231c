//! Central-difference gradient verification.

/// Largest relative error between `analytic` and the central difference
/// `(f(x+h) - f(x-h)) / 2h` over every coordinate. The denominator is
/// `max(1, |analytic|)`.
pub fn finite_diff_check<F>(loss: F, params: &[f64], analytic: &[f64], h: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let all: Vec<usize> = (0..params.len()).collect();
    finite_diff_check_probes(loss, params, analytic, h, &all)
}

/// Same as [`finite_diff_check`], restricted to the listed coordinates.
pub fn finite_diff_check_probes<F>(
    loss: F,
    params: &[f64],
    analytic: &[f64],
    h: f64,
    probes: &[usize],
) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    assert!(h > 0.0, "step must be positive");
    assert_eq!(params.len(), analytic.len(), "gradient shape");
    let mut x = params.to_vec();
    let mut worst = 0.0f64;
    for &i in probes {
        let orig = x[i];
        x[i] = orig + h;
        let up = loss(&x);
        x[i] = orig - h;
        let down = loss(&x);
        x[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let rel = (numeric - analytic[i]).abs() / analytic[i].abs().max(1.0);
        worst = worst.max(rel);
    }
    worst
}
