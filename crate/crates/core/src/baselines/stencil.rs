//! Four-point Lagrange stencils centred at the half node `x_{n+1/2}`.
//!
//! Values are ordered `[y_{n-1}, y_n, y_{n+1}, y_{n+2}]` on a uniform mesh of
//! spacing `h`. Polynomial exactness at the centre: `d1` through degree 4,
//! `d2` through degree 3 (it returns `5h²` on `x⁴`), `d3` through degree 4
//! (it returns `15h²` on `x⁵`).

pub fn stencil_d1_4pt(y: &[f64; 4], h: f64) -> f64 {
    (27.0 * (y[2] - y[1]) - (y[3] - y[0])) / (24.0 * h)
}

pub fn stencil_d2_4pt(y: &[f64; 4], h: f64) -> f64 {
    (y[3] - (y[2] + y[1]) + y[0]) / (2.0 * h * h)
}

pub fn stencil_d3_4pt(y: &[f64; 4], h: f64) -> f64 {
    (y[3] - 3.0 * y[2] + 3.0 * y[1] - y[0]) / (h * h * h)
}

/// Three-point central first derivative at `x_n` from `[y_{n-1}, y_n, y_{n+1}]`.
pub fn central_d1_3pt(y: &[f64; 3], h: f64) -> f64 {
    (y[2] - y[0]) / (2.0 * h)
}

/// Three-point central second derivative at `x_n`.
pub fn central_d2_3pt(y: &[f64; 3], h: f64) -> f64 {
    (y[2] - 2.0 * y[1] + y[0]) / (h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Samples `f` on the four nodes around `centre`.
    fn sample(f: impl Fn(f64) -> f64, centre: f64, h: f64) -> [f64; 4] {
        [-1.5, -0.5, 0.5, 1.5].map(|k| f(centre + k * h))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + b.abs())
    }

    #[test]
    fn first_derivative_exact_through_degree_four() {
        for &h in &[0.5, 0.1, 0.01] {
            assert!(rel(stencil_d1_4pt(&sample(|x| x, 0.3, h), h), 1.0) < 1e-12);
            assert_eq!(stencil_d1_4pt(&sample(|_| 4.0, 0.3, h), h), 0.0);
            assert!(stencil_d1_4pt(&sample(|x| x * x * x, 0.0, h), h).abs() < 1e-12);
            let c: f64 = 0.7;
            let quartic = |x: f64| x.powi(4) - 2.0 * x.powi(3) + x;
            let exact = 4.0 * c.powi(3) - 6.0 * c * c + 1.0;
            assert!(rel(stencil_d1_4pt(&sample(quartic, c, h), h), exact) < 1e-11);
        }
    }

    #[test]
    fn second_derivative_exact_through_degree_three() {
        for &h in &[0.5, 0.1, 0.01] {
            assert!(rel(stencil_d2_4pt(&sample(|x| x * x, 0.0, h), h), 2.0) < 1e-12);
            assert!(stencil_d2_4pt(&sample(|x| 3.0 * x - 1.0, 0.2, h), h).abs() < 1e-9);
            let c: f64 = -0.4;
            let cubic = |x: f64| x.powi(3) + x * x;
            assert!(rel(stencil_d2_4pt(&sample(cubic, c, h), h), 6.0 * c + 2.0) < 1e-9);
            // x⁴ at the centre 0: truncation term 5h².
            assert!(rel(stencil_d2_4pt(&sample(|x| x.powi(4), 0.0, h), h), 5.0 * h * h) < 1e-12);
        }
    }

    #[test]
    fn third_derivative_exact_through_degree_four() {
        for &h in &[0.5, 0.1] {
            assert!(rel(stencil_d3_4pt(&sample(|x| x * x * x, 0.0, h), h), 6.0) < 1e-12);
            assert!(stencil_d3_4pt(&sample(|x| x * x - x, 0.1, h), h).abs() < 1e-9);
            let c: f64 = 0.25;
            let exact = 24.0 * c;
            assert!(rel(stencil_d3_4pt(&sample(|x| x.powi(4), c, h), h), exact) < 1e-10);
            let quintic = stencil_d3_4pt(&sample(|x| x.powi(5), 0.0, h), h);
            assert!(rel(quintic, 15.0 * h * h) < 1e-12);
        }
    }

    #[test]
    fn third_derivative_of_sine_is_second_order() {
        let c = 0.9;
        let err = |h: f64| (stencil_d3_4pt(&sample(f64::sin, c, h), h) + f64::cos(c)).abs();
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 < 1e-4);
        assert!((e1 / e2).log2() > 1.8);
    }

    #[test]
    fn central_stencils() {
        let h = 0.1;
        let y = [0.9, 1.0, 1.1].map(|x: f64| x * x);
        assert!((central_d1_3pt(&y, h) - 2.0).abs() < 1e-12);
        assert!((central_d2_3pt(&y, h) - 2.0).abs() < 1e-12);
    }
}
