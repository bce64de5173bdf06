//! Quadrature rules and small numerical helpers shared by the other modules.

use std::f64::consts::PI;

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = KahanSum::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(x));
        }
        acc.total()
    }

    /// Affinely maps a rule on `[-1, 1]` onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> Rule {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        Rule {
            nodes: self.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: self.weights.iter().map(|&w| half * w).collect(),
        }
    }
}

/// Gauss–Legendre rule with `n` points on `[-1, 1]`.
///
/// Nodes are found by Newton's method on the three-term recurrence, starting
/// from the asymptotic guess `cos(π(i + 3/4)/(n + 1/2))`. Nodes come out in
/// ascending order.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Chebyshev rule of the first kind: `∫ f(t)/√(1−t²) dt ≈ (π/n) Σ f(t_k)`.
pub fn gauss_chebyshev(n: usize) -> Rule {
    assert!(n >= 1);
    let w = PI / n as f64;
    let nodes = (0..n)
        .map(|k| -((2 * k + 1) as f64 * PI / (2 * n) as f64).cos())
        .collect();
    Rule {
        nodes,
        weights: vec![w; n],
    }
}

/// Chebyshev–Lobatto points `cos(jπ/n)`, `j = 0..=n`, in ascending order.
pub fn chebyshev_lobatto(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (0..=n)
        .map(|j| -(j as f64 * PI / n as f64).cos())
        .map(|x| if x.abs() < 1e-300 { 0.0 } else { x })
        .collect()
}

/// Cumulative Clenshaw–Curtis integration in the angular variable.
///
/// Given samples `g_j = g(θ_j)` of a smooth, even, 2π-periodic function at
/// `θ_j = jπ/n`, returns `∫_{θ_j}^{π} g(φ) dφ` for every `j`. The cosine
/// series of `g` is recovered by a type-I DCT and integrated term by term,
/// which is exact when `g` is a trigonometric polynomial of degree ≤ n.
pub fn cumulative_cosine_integral(samples: &[f64]) -> Vec<f64> {
    let coeffs = cosine_coefficients(samples);
    let n = samples.len() - 1;
    (0..=n)
        .map(|j| {
            let theta = j as f64 * PI / n as f64;
            let mut acc = KahanSum::default();
            acc.add(coeffs[0] * (PI - theta));
            for (k, &c) in coeffs.iter().enumerate().skip(1) {
                acc.add(-c * (k as f64 * theta).sin() / k as f64);
            }
            acc.total()
        })
        .collect()
}

/// Cosine coefficients `c_k` with `g(θ) = Σ_k c_k cos(kθ)` interpolating the
/// samples at `θ_j = jπ/n`.
pub fn cosine_coefficients(samples: &[f64]) -> Vec<f64> {
    let n = samples.len() - 1;
    assert!(n >= 1);
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let mut acc = KahanSum::default();
            for (j, &g) in samples.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                acc.add(w * g * (PI * (k * j % (2 * n)) as f64 / nf).cos());
            }
            let scale = if k == 0 || k == n { 1.0 / nf } else { 2.0 / nf };
            scale * acc.total()
        })
        .collect()
}

/// Barycentric interpolation through Chebyshev–Lobatto points (as produced by
/// [`chebyshev_lobatto`]).
pub fn barycentric_lobatto(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, (&xj, &fj)) in nodes.iter().zip(values).enumerate() {
        let d = x - xj;
        if d == 0.0 {
            return fj;
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            w *= 0.5;
        }
        let t = w / d;
        num += t * fj;
        den += t;
    }
    num / den
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn ksum(iter: impl IntoIterator<Item = f64>) -> f64 {
    iter.into_iter().collect::<KahanSum>().total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 12, 40] {
            let rule = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                let got = rule.integrate(|x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg} got={got}");
            }
        }
    }

    #[test]
    fn large_gauss_legendre_weights_sum_to_two() {
        let rule = gauss_legendre(4096);
        assert!((ksum(rule.weights.iter().copied()) - 2.0).abs() < 1e-13);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        let gauss = rule.integrate(|x| (-x * x).exp());
        assert!((gauss - 1.493_648_265_624_854).abs() < 1e-13);
    }

    #[test]
    fn gauss_chebyshev_integrates_weighted_polynomials() {
        let rule = gauss_chebyshev(8);
        // ∫ t² / √(1−t²) = π/2
        assert!((rule.integrate(|t| t * t) - PI / 2.0).abs() < 1e-14);
        assert!((rule.integrate(|_| 1.0) - PI).abs() < 1e-14);
    }

    #[test]
    fn cumulative_cosine_integral_of_sin_squared() {
        let n = 16;
        let samples: Vec<f64> = (0..=n)
            .map(|j| (j as f64 * PI / n as f64).sin().powi(2))
            .collect();
        let cum = cumulative_cosine_integral(&samples);
        for (j, c) in cum.iter().enumerate() {
            let th = j as f64 * PI / n as f64;
            // ∫_θ^π sin² = (π − θ)/2 + sin(2θ)/4
            let exact = 0.5 * (PI - th) + (2.0 * th).sin() / 4.0;
            assert!((c - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn barycentric_reproduces_polynomials() {
        let nodes = chebyshev_lobatto(10);
        let vals: Vec<f64> = nodes.iter().map(|x| 3.0 * x.powi(5) - x + 0.5).collect();
        for x in [-0.93, -0.1, 0.0, 0.4444, 0.99] {
            let exact = 3.0 * f64::powi(x, 5) - x + 0.5;
            assert!((barycentric_lobatto(&nodes, &vals, x) - exact).abs() < 1e-13);
        }
    }
}
