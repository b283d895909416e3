use num_complex::Complex64;

use super::LinalgError;

const MAX_ITERATIONS: usize = 500;
const NEWTON_POLISH_STEPS: usize = 4;

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a polynomial given by ascending coefficients, by
/// Aberth–Ehrlich iteration followed by Newton polishing. Intended for
/// square-free inputs; repeated roots converge only to about half precision.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>, LinalgError> {
    let mut c = coeffs.to_vec();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let c: Vec<f64> = c.iter().map(|v| v / lead).collect();
    if n == 1 {
        return Ok(vec![Complex64::new(-c[0], 0.0)]);
    }

    // Start on a circle whose radius is the geometric mean of the root moduli.
    let radius = if c[0] != 0.0 {
        c[0].abs().powf(1.0 / n as f64)
    } else {
        1.0
    };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect();

    let mut converged = false;
    let mut last_step = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner(&c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        last_step = max_step;
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged && last_step > 1e-10 {
        return Err(LinalgError::RootFindingFailure {
            degree: n,
            iterations: MAX_ITERATIONS,
        });
    }

    for root in z.iter_mut() {
        for _ in 0..NEWTON_POLISH_STEPS {
            let (p, dp) = horner(&c, *root);
            if p.norm() == 0.0 || dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *root -= step;
        }
    }
    Ok(z)
}
