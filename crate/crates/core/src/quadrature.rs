//! Numerical integration against the standard normal density.
//!
//! Two rules live here:
//!
//! - [`GaussHermite`]: an `n`-point rule for `∫ f(z) φ(z) dz`. Used for the
//!   homogeneous order-statistic integrals, whose integrands are polynomials
//!   in `Φ(z)` and converge quickly under node doubling.
//! - [`integrate_normal_adaptive`]: adaptive Gauss–Kronrod (7/15) on a
//!   truncated standardized domain. Heterogeneous revenue integrands carry CDF
//!   steps far out in the tails at large lease durations, where a fixed
//!   Hermite rule has too few nodes.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{LeaseError, Result};
use crate::normal;

/// Gauss–Hermite rule for the probabilists' weight `φ(z)`; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the `n`-point rule: eigenvalues of the Jacobi matrix give the
    /// nodes, which are then polished by Newton steps on the orthonormal
    /// recurrence. Weights come from the Christoffel formula in log space so
    /// the outermost nodes do not overflow.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LeaseError::QuadratureNonConvergence(
                "Gauss-Hermite rule needs at least one node".into(),
            ));
        }
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let x = polish_root(eig.eigenvalues[i], n);
                let w = christoffel_weight(x, n).unwrap_or(eig.eigenvectors[(0, i)].powi(2));
                (x, w)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Enforce the exact symmetry of the rule.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (pairs[j].0 - pairs[i].0);
            let w = 0.5 * (pairs[i].1 + pairs[j].1);
            pairs[i] = (-x, w);
            pairs[j] = (x, w);
        }
        if n % 2 == 1 {
            pairs[n / 2].0 = 0.0;
        }
        if pairs.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
            return Err(LeaseError::QuadratureNonConvergence(format!(
                "non-finite {n}-point Hermite rule"
            )));
        }
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f(z) φ(z) dz`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }
}

/// `(p_n(x) / p_{n-1}(x), log|p_{n-1}(x)|)` for the probabilists' Hermite
/// polynomials orthonormal under `φ`, via ratios to avoid overflow.
fn hermite_ratio(x: f64, n: usize) -> (f64, f64) {
    let mut r = x;
    let mut log_prev = 0.0;
    for j in 1..n {
        log_prev += r.abs().ln();
        let jf = j as f64;
        r = (x - jf.sqrt() / r) / (jf + 1.0).sqrt();
    }
    (r, log_prev)
}

fn polish_root(mut x: f64, n: usize) -> f64 {
    for _ in 0..8 {
        let (r, _) = hermite_ratio(x, n);
        let step = r / (n as f64).sqrt();
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// `1 / (n p_{n-1}(x)^2)`.
fn christoffel_weight(x: f64, n: usize) -> Option<f64> {
    let (_, log_prev) = hermite_ratio(x, n);
    let w = (-(n as f64).ln() - 2.0 * log_prev).exp();
    w.is_finite().then_some(w)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Half-width of the standardized domain; `Φ(-10) ≈ 7.6e-24`.
pub const NORMAL_DOMAIN: f64 = 10.0;
const INITIAL_PANELS: usize = 16;
const MAX_DEPTH: u32 = 40;

/// Adaptive Gauss–Kronrod estimate of `∫ f(z) φ(z) dz` over `[-10, 10]`.
///
/// Panels are bisected until each local error estimate falls below its share
/// of `tol` (proportional to width). Panel order is fixed, so the result is
/// deterministic for a given `f`.
pub fn integrate_normal_adaptive<F: FnMut(f64) -> f64>(mut f: F, tol: f64) -> Result<f64> {
    let lo = -NORMAL_DOMAIN;
    let hi = NORMAL_DOMAIN;
    let total = hi - lo;
    let mut g = |z: f64| f(z) * normal::pdf(z);
    let mut sum = 0.0;
    let step = total / INITIAL_PANELS as f64;
    let mut stack: Vec<(f64, f64, u32)> = (0..INITIAL_PANELS)
        .rev()
        .map(|i| (lo + i as f64 * step, lo + (i + 1) as f64 * step, 0))
        .collect();
    while let Some((a, b, depth)) = stack.pop() {
        let (val, err) = gk15(&mut g, a, b);
        let local_tol = tol * (b - a) / total;
        if err <= local_tol || err <= 1e-15 * val.abs() {
            sum += val;
            continue;
        }
        if depth >= MAX_DEPTH {
            return Err(LeaseError::QuadratureNonConvergence(format!(
                "panel [{a}, {b}] error {err:e} above {local_tol:e} at max depth"
            )));
        }
        let m = 0.5 * (a + b);
        stack.push((m, b, depth + 1));
        stack.push((a, m, depth + 1));
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_weights_sum_to_one_and_moments_match() {
        for n in [5, 16, 64, 128, 256, 512] {
            let rule = GaussHermite::new(n).unwrap();
            assert_eq!(rule.len(), n);
            let m0: f64 = rule.integrate(|_| 1.0);
            let m1: f64 = rule.integrate(|z| z);
            let m2: f64 = rule.integrate(|z| z * z);
            let m4: f64 = rule.integrate(|z| z.powi(4));
            assert!((m0 - 1.0).abs() < 1e-13, "n={n} m0={m0}");
            assert!(m1.abs() < 1e-13);
            assert!((m2 - 1.0).abs() < 1e-12);
            assert!((m4 - 3.0).abs() < 1e-11);
        }
    }

    #[test]
    fn tiny_rules() {
        let one = GaussHermite::new(1).unwrap();
        assert_eq!((one.nodes(), one.weights()), (&[0.0][..], &[1.0][..]));
        let two = GaussHermite::new(2).unwrap();
        assert!((two.nodes()[1] - 1.0).abs() < 1e-15);
        assert!((two.weights()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hermite_nodes_are_sorted_and_symmetric() {
        let rule = GaussHermite::new(64).unwrap();
        let nodes = rule.nodes();
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        for i in 0..nodes.len() {
            assert!((nodes[i] + nodes[nodes.len() - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_rule_handles_far_tail_step() {
        // ∫ Φ(z - 7) φ(z) dz = Φ(-7/√2)
        let exact = normal::cdf(-7.0 / std::f64::consts::SQRT_2);
        let got = integrate_normal_adaptive(|z| normal::cdf(z - 7.0), 1e-14).unwrap();
        assert!((got - exact).abs() < 1e-14, "{got} vs {exact}");
    }

    #[test]
    fn adaptive_rule_moments() {
        let m2 = integrate_normal_adaptive(|z| z * z, 1e-13).unwrap();
        assert!((m2 - 1.0).abs() < 1e-12);
    }
}
