//! Shape-preserving (monotone) piecewise cubic Hermite interpolation.

/// Piecewise cubic Hermite interpolant that preserves monotonicity of the data.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant with PCHIP (Fritsch–Butland) slopes.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2, "need at least two nodes");
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            let (d0, d1) = (secants[i - 1], secants[i]);
            if d0 * d1 > 0.0 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                slopes[i] = (w0 + w1) / (w0 / d0 + w1 / d1);
            }
        }
        slopes[0] = end_slope(xs[1] - xs[0], xs.get(2).map_or(1.0, |x| x - xs[1]), secants[0], *secants.get(1).unwrap_or(&secants[0]));
        slopes[n - 1] = end_slope(
            xs[n - 1] - xs[n - 2],
            if n > 2 { xs[n - 2] - xs[n - 3] } else { 1.0 },
            secants[n - 2],
            if n > 2 { secants[n - 3] } else { secants[n - 2] },
        );
        MonotoneCubic { xs, ys, slopes }
    }

    /// Builds the interpolant from known derivative values, limited
    /// (Fritsch–Carlson) so that the result stays monotone on every interval
    /// where the data are.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, mut slopes: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert_eq!(xs.len(), slopes.len());
        let n = xs.len();
        for i in 0..n - 1 {
            let d = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
            if d == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            if slopes[i] * d < 0.0 {
                slopes[i] = 0.0;
            }
            if slopes[i + 1] * d < 0.0 {
                slopes[i + 1] = 0.0;
            }
            let a = slopes[i] / d;
            let b = slopes[i + 1] / d;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * a * d;
                slopes[i + 1] = tau * b * d;
            }
        }
        MonotoneCubic { xs, ys, slopes }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    /// Evaluates the interpolant; outside the node range the end values are
    /// returned.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}
