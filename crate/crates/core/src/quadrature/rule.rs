//! Gauss–Kronrod 7/15 panels and a globally adaptive bisection driver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae on [-1, 1]; odd indices are the embedded Gauss nodes.
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

/// One 15-point Kronrod panel with the 7-point Gauss estimate embedded.
#[derive(Clone, Copy, Debug)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: f64,
    pub error: f64,
}

pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs();
    Panel { a, b, value, error }
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Ranked(Panel);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .error
            .total_cmp(&other.0.error)
            .then_with(|| other.0.a.total_cmp(&self.0.a))
    }
}

/// Globally adaptive integration of `f` over `[a, b]`: the panel with the
/// largest error estimate is bisected until the summed estimate drops below
/// `max(abs_tol, rel_tol·|value|)` or `max_panels` is reached.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> AdaptiveResult {
    if a == b {
        return AdaptiveResult { value: 0.0, error: 0.0, evaluations: 0, converged: true };
    }
    let first = gk15(f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Ranked(first));
    let target = |v: f64| abs_tol.max(rel_tol * v.abs());
    while error > target(value) && heap.len() < max_panels {
        let Some(Ranked(worst)) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution.
            heap.push(Ranked(Panel { error: 0.0, ..worst }));
            error = heap.iter().map(|p| p.0.error).sum();
            if error <= target(value) {
                break;
            }
            continue;
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(Ranked(left));
        heap.push(Ranked(right));
    }
    // Re-sum in panel order so the result does not depend on update history.
    let mut panels: Vec<Panel> = heap.into_iter().map(|r| r.0).collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    AdaptiveResult { value, error, evaluations, converged: error <= target(value) }
}

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Five-point Gauss–Legendre nodes for `∫_a^b g(r) dr`, `0 < a < b`, placed
/// in `s = log r` on panels of width at most `1/4`. Returns `(r, weight)`
/// pairs with the Jacobian `r` folded into the weight.
pub fn log_gauss_nodes(a: f64, b: f64) -> Vec<(f64, f64)> {
    let (la, lb) = (a.ln(), b.ln());
    let m = 1 + ((lb - la) / 0.25).floor() as usize;
    let h = (lb - la) / m as f64;
    let mut out = Vec::with_capacity(5 * m);
    for k in 0..m {
        let c = la + (k as f64 + 0.5) * h;
        for (x, w) in GL5_X.iter().zip(GL5_W) {
            let r = (c + 0.5 * h * x).exp();
            out.push((r, w * 0.5 * h * r));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_nodes_integrate_powers() {
        // ∫_{1e-6}^{1} r^{-1/2} dr = 2 (1 - 1e-3)
        let v: f64 = log_gauss_nodes(1e-6, 1.0).iter().map(|(r, w)| w / r.sqrt()).sum();
        assert!((v - 2.0 * (1.0 - 1e-3)).abs() < 1e-13);
    }

    #[test]
    fn polynomial_exact() {
        // GK15 integrates degree 22 exactly; the 7-point Gauss rule degree 13.
        let p = gk15(&|x: f64| x.powi(12), 0.0, 1.0);
        assert!((p.value - 1.0 / 13.0).abs() < 1e-15);
        assert!(p.error < 1e-14);
    }

    #[test]
    fn adaptive_handles_peak() {
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let r = adaptive(&f, -1.0, 1.0, 1e-12, 0.0, 2000);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-10 * exact);
    }
}
