//! Monotone piecewise cubic Hermite interpolation (Fritsch–Carlson slopes).

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// Builds the interpolant through `(x_i, y_i)`; `x` strictly increasing.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::Parameter("pchip needs at least two matching samples".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("pchip abscissae must be strictly increasing".into()));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
            return Ok(Pchip { x, y, d });
        }
        for k in 1..n - 1 {
            if delta[k - 1] * delta[k] > 0.0 {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Ok(Pchip { x, y, d })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Interpolated value; `None` outside the sampled range.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return None;
        }
        let k = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            i if i >= self.x.len() => self.x.len() - 2,
            i => i - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        Some(h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1])
    }
}

// Three-point one-sided slope, limited to keep monotonicity.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= 0.0 {
        0.0
    } else if del0 * del1 <= 0.0 && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_linear_data() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let p = Pchip::new(x, y).unwrap();
        for t in [0.0, 0.11, 1.37, 2.69] {
            assert!((p.eval(t).unwrap() - (2.0 * t - 1.0)).abs() < 1e-14);
        }
        assert!(p.eval(2.71).is_none());
    }

    #[test]
    fn smooth_function_accuracy() {
        let x: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| (-v).exp()).collect();
        let p = Pchip::new(x, y).unwrap();
        let err = (0..1000)
            .map(|i| {
                let t = i as f64 * 0.00999;
                (p.eval(t).unwrap() - (-t).exp()).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
    }

    proptest! {
        #[test]
        fn preserves_monotonicity(steps in prop::collection::vec(0.0f64..5.0, 3..20)) {
            let x: Vec<f64> = (0..=steps.len()).map(|i| i as f64).collect();
            let mut y = vec![0.0];
            for s in &steps { y.push(y.last().unwrap() + s); }
            let p = Pchip::new(x.clone(), y).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=(steps.len() * 17) {
                let t = i as f64 / 17.0;
                let v = p.eval(t).unwrap();
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
