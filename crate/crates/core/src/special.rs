//! Special functions and geometric constants.

use statrs::function::gamma::gamma;

/// Surface area of the unit sphere in `R^n`, `2 π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: u32) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma(half)
}

/// Volume of the ball of radius `r` in `R^n`.
pub fn ball_volume(n: u32, r: f64) -> f64 {
    sphere_area(n) * r.powi(n as i32) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    // Γ(n/2) by the recursion Γ(x+1) = xΓ(x) from Γ(1) = 1, Γ(1/2) = √π.
    fn gamma_half_integer(n: u32) -> f64 {
        let (mut x, mut g) = if n % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
        while x < n as f64 / 2.0 {
            g *= x;
            x += 1.0;
        }
        g
    }

    #[test]
    fn sphere_area_matches_recursion() {
        for n in 2..=12 {
            let exact = 2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n);
            let rel = (sphere_area(n) - exact).abs() / exact;
            assert!(rel < 1e-12, "n = {n}: rel err {rel}");
        }
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn ball_volume_three() {
        assert!((ball_volume(3, 0.5) - 4.0 / 3.0 * PI * 0.125).abs() < 1e-14);
    }
}
