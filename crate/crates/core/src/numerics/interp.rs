//! Piecewise cubic Hermite interpolation.

/// Cubic Hermite interpolant through `(x_i, y_i)` with slopes `d_i`.
/// `x` must be strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Self {
        debug_assert!(x.len() == y.len() && y.len() == d.len() && x.len() >= 2);
        debug_assert!(x.windows(2).all(|w| w[0] < w[1]));
        Self { x, y, d }
    }

    /// Monotone (Fritsch–Carlson) slopes: the interpolant stays between the
    /// endpoint values on every interval.
    pub fn pchip(x: Vec<f64>, y: Vec<f64>) -> Self {
        let d = pchip_slopes(&x, &y);
        Self::new(x, y, d)
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    /// Index `i` of the interval `[x_i, x_{i+1}]` containing `t` (clamped).
    pub fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Evaluates the interpolant; outside the knot range the end cubic is
    /// extrapolated.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.interval(t);
        self.eval_in(i, t)
    }

    pub fn eval_in(&self, i: usize, t: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h * h10 * self.d[i] + h01 * self.y[i + 1] + h * h11 * self.d[i + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let dh00 = (6.0 * s2 - 6.0 * s) / h;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = (-6.0 * s2 + 6.0 * s) / h;
        let dh11 = 3.0 * s2 - 2.0 * s;
        dh00 * self.y[i] + dh10 * self.d[i] + dh01 * self.y[i + 1] + dh11 * self.d[i + 1]
    }

    /// Exact integral of the interpolant over `[x_i, x_{i+1}]`.
    pub fn interval_integral(&self, i: usize) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        h * (self.y[i] + self.y[i + 1]) / 2.0 + h * h * (self.d[i] - self.d[i + 1]) / 12.0
    }

    /// Exact integral over `[x_i, t]` for `t` inside interval `i`.
    pub fn partial_integral(&self, i: usize, t: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        // antiderivatives of the Hermite basis in s
        let a00 = s4 / 2.0 - s3 + s;
        let a10 = s4 / 4.0 - 2.0 * s3 / 3.0 + s2 / 2.0;
        let a01 = -s4 / 2.0 + s3;
        let a11 = s4 / 4.0 - s3 / 3.0;
        h * (a00 * self.y[i] + h * a10 * self.d[i] + a01 * self.y[i + 1] + h * a11 * self.d[i + 1])
    }

    /// Largest |derivative| over the whole knot range.
    pub fn max_abs_derivative(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.x.len() - 1 {
            let h = self.x[i + 1] - self.x[i];
            let delta = (self.y[i + 1] - self.y[i]) / h;
            let (d0, d1) = (self.d[i], self.d[i + 1]);
            // p'(s) = d0 + (6 delta - 4 d0 - 2 d1) s + (3 d0 + 3 d1 - 6 delta) s^2
            let b = 6.0 * delta - 4.0 * d0 - 2.0 * d1;
            let a = 3.0 * d0 + 3.0 * d1 - 6.0 * delta;
            best = best.max(d0.abs()).max(d1.abs());
            if a != 0.0 {
                let s = -b / (2.0 * a);
                if s > 0.0 && s < 1.0 {
                    best = best.max((d0 + b * s + a * s * s).abs());
                }
            }
        }
        best
    }
}

/// Fritsch–Carlson slopes with the three-point end formula.
pub fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            s = 0.0;
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            s = 3.0 * d0;
        }
        s
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}
