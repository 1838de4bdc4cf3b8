//! Gauss–Hermite and Gauss–Legendre rules plus a refining trapezoid rule.
//!
//! Nodes are found by Newton iteration on the three-term recurrences, which
//! is O(n²) per rule. Rules are cached per order because the distortion
//! routines request the same handful of orders thousands of times.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::gaussian::GaussianDensity;

/// Nodes and weights of an n-point rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Family {
    Hermite,
    Legendre,
}

type RuleCache = Mutex<HashMap<(Family, usize), Arc<Rule>>>;

fn cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(family: Family, n: usize, build: fn(usize) -> Rule) -> Arc<Rule> {
    assert!(n >= 1, "quadrature order must be positive");
    let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
    map.entry((family, n))
        .or_insert_with(|| Arc::new(build(n)))
        .clone()
}

/// Physicists' Gauss–Hermite rule: `∫ e^{-x²} f(x) dx ≈ Σ wᵢ f(xᵢ)`.
pub fn gauss_hermite(n: usize) -> Arc<Rule> {
    cached(Family::Hermite, n, build_hermite)
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    cached(Family::Legendre, n, build_legendre)
}

fn build_hermite(n: usize) -> Rule {
    // π^{-1/4}
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            // orthonormal Hermite recurrence, so no overflow at high order
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // ascending order
    x.reverse();
    w.reverse();
    Rule {
        nodes: x,
        weights: w,
    }
}

fn build_legendre(n: usize) -> Rule {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    Rule {
        nodes: x,
        weights: w,
    }
}

/// `E[f(X)]` for `X ~ density`, via an n-point Gauss–Hermite rule after the
/// substitution `x = μ + √2 σ t`. Exact for polynomials of degree `< 2n`.
pub fn gaussian_expectation(density: &GaussianDensity, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss_hermite(n);
    let scale = (2.0 * density.variance()).sqrt();
    let mu = density.mean();
    let sum: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| w * f(mu + scale * t))
        .sum();
    sum / PI.sqrt()
}

/// `∫_lo^hi f(x) dx` with an n-point Gauss–Legendre rule.
pub fn legendre_integral(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let sum: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&t, &w)| w * f(mid + half * t))
        .sum();
    half * sum
}

/// Trapezoid rule on `[lo, hi]`, halving the step until two successive
/// estimates agree to `rel_tol`. For smooth integrands that decay to zero at
/// both ends this converges geometrically.
pub fn trapezoid_refined(
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_levels: u32,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut panels = 16_usize;
    let mut h = (hi - lo) / panels as f64;
    let mut sum = 0.5 * (f(lo) + f(hi)) + (1..panels).map(|i| f(lo + i as f64 * h)).sum::<f64>();
    let mut estimate = h * sum;
    let mut change = f64::INFINITY;
    for _ in 0..max_levels {
        // only the new midpoints need evaluating
        let mids: f64 = (0..panels).map(|i| f(lo + (i as f64 + 0.5) * h)).sum();
        sum += mids;
        panels *= 2;
        h *= 0.5;
        let refined = h * sum;
        change = (refined - estimate).abs() / refined.abs().max(f64::MIN_POSITIVE);
        estimate = refined;
        if change <= rel_tol {
            return Ok(estimate);
        }
    }
    Err(Error::Quadrature {
        what: "refined trapezoid",
        nodes: panels / 2 + 1,
        refined: panels + 1,
        rel_change: change,
        tolerance: rel_tol,
    })
}

/// Evaluates `eval(nodes)` and `eval(2·nodes)`; fails if the two disagree by
/// more than `rel_tol`, otherwise returns the refined value.
pub(crate) fn with_refinement(
    what: &'static str,
    nodes: usize,
    rel_tol: f64,
    eval: impl Fn(usize) -> f64,
) -> Result<f64> {
    let coarse = eval(nodes);
    let fine = eval(2 * nodes);
    let rel_change = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    // negated so that NaN fails
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(rel_change <= rel_tol) {
        return Err(Error::Quadrature {
            what,
            nodes,
            refined: 2 * nodes,
            rel_change,
            tolerance: rel_tol,
        });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 16, 64, 96, 192] {
            let rule = gauss_hermite(n);
            let total: f64 = rule.weights.iter().sum();
            assert_relative_eq!(total, PI.sqrt(), max_relative = 1e-13);
            assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]), "n={n}");
        }
    }

    #[test]
    fn hermite_integrates_even_moments() {
        // ∫ x^4 e^{-x²} = 3√π/4
        let rule = gauss_hermite(10);
        let m4: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(4))
            .sum();
        assert_relative_eq!(m4, 0.75 * PI.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn gaussian_expectation_moments() {
        let g = GaussianDensity::new(1.5, 0.7).unwrap();
        assert_relative_eq!(gaussian_expectation(&g, 64, |x| x), 1.5, epsilon = 1e-13);
        assert_relative_eq!(
            gaussian_expectation(&g, 64, |x| x * x),
            1.5 * 1.5 + 0.7,
            max_relative = 1e-13
        );
    }

    #[test]
    fn legendre_polynomial_exactness() {
        for n in [2, 7, 96, 192] {
            let rule = gauss_legendre(n);
            let total: f64 = rule.weights.iter().sum();
            assert_relative_eq!(total, 2.0, max_relative = 1e-13);
        }
        let v = legendre_integral(0.0, 2.0, 4, |x| x.powi(7));
        assert_relative_eq!(v, 32.0, max_relative = 1e-13);
    }

    #[test]
    fn trapezoid_on_gaussian_bump() {
        let v = trapezoid_refined(-12.0, 12.0, 1e-13, 20, |x| (-x * x).exp()).unwrap();
        assert_relative_eq!(v, PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn refinement_failure_reports_diagnostics() {
        let err = with_refinement("test", 16, 1e-6, |n| n as f64).unwrap_err();
        match err {
            Error::Quadrature { nodes, refined, .. } => assert_eq!((nodes, refined), (16, 32)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
