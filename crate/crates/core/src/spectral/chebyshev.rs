//! Chebyshev polynomials of the second kind.

use num_complex::Complex64;

/// Beyond this `|x|` the closed hyperbolic form replaces the recurrence.
const RECURRENCE_LIMIT: f64 = 1.5;

/// `U_n(x)`: forward three-term recurrence for `|x| ≤ 1.5`, and
/// `±sinh((n+1)θ)/sinh θ` with `cosh θ = |x|` beyond.
pub fn chebyshev_u(n: usize, x: f64) -> f64 {
    if x.abs() <= RECURRENCE_LIMIT {
        let (mut prev, mut cur) = (1.0, 2.0 * x);
        if n == 0 {
            return prev;
        }
        for _ in 1..n {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        let theta = x.abs().acosh();
        let v = ((n as f64 + 1.0) * theta).sinh() / theta.sinh();
        if x < 0.0 && n % 2 == 1 {
            -v
        } else {
            v
        }
    }
}

/// `U_n'(x)` by differentiating the recurrence:
/// `U'_{k+1} = 2 U_k + 2x U'_k − U'_{k−1}`.
pub fn chebyshev_u_derivative(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (mut u_prev, mut u_cur) = (1.0, 2.0 * x);
    let (mut d_prev, mut d_cur) = (0.0, 2.0);
    for _ in 1..n {
        let u_next = 2.0 * x * u_cur - u_prev;
        let d_next = 2.0 * u_cur + 2.0 * x * d_cur - d_prev;
        u_prev = u_cur;
        u_cur = u_next;
        d_prev = d_cur;
        d_cur = d_next;
    }
    d_cur
}

/// `U_n(z)` for complex argument by the recurrence.
pub fn chebyshev_u_complex(n: usize, z: Complex64) -> Complex64 {
    let (mut prev, mut cur) = (Complex64::new(1.0, 0.0), z * 2.0);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = z * 2.0 * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn low_orders() {
        for x in [-3.0, -0.3, 0.0, 0.9, 7.0] {
            assert_eq!(chebyshev_u(0, x), 1.0);
        }
        assert_eq!(chebyshev_u(1, 0.5), 1.0);
        let x: f64 = 0.37;
        assert!((chebyshev_u(2, x) - (4.0 * x * x - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn trig_identity() {
        let th = PI / 5.0;
        assert!((chebyshev_u(3, th.cos()) * th.sin() - (4.0 * th).sin()).abs() < 1e-12);
        for n in 0..30 {
            for k in 1..20 {
                let th = k as f64 * PI / 20.5;
                let trig = ((n as f64 + 1.0) * th).sin() / th.sin();
                assert!((chebyshev_u(n, th.cos()) - trig).abs() < 1e-12 * trig.abs().max(1.0));
            }
        }
    }

    #[test]
    fn hyperbolic_branch_matches_recurrence() {
        for n in 0..25 {
            for x in [1.6, -1.6, 2.3, -4.0, 10.0] {
                let mut rec = [1.0, 2.0 * x];
                for _ in 1..n {
                    rec = [rec[1], 2.0 * x * rec[1] - rec[0]];
                }
                let r = if n == 0 { 1.0 } else { rec[1] };
                let h = chebyshev_u(n, x);
                assert!(
                    (h - r).abs() <= 1e-12 * r.abs().max(1.0),
                    "n={n} x={x}: {h} vs {r}"
                );
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for n in 0..15 {
            for x in [-1.4, -0.6, 0.0, 0.3, 1.2, 2.5] {
                let h = 1e-6;
                let fd = (chebyshev_u(n, x + h) - chebyshev_u(n, x - h)) / (2.0 * h);
                let d = chebyshev_u_derivative(n, x);
                assert!((fd - d).abs() < 1e-5 * d.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn complex_agrees_on_real_axis() {
        for n in 0..12 {
            let x = 0.77;
            assert!(
                (chebyshev_u_complex(n, Complex64::new(x, 0.0)).re - chebyshev_u(n, x)).abs()
                    < 1e-13
            );
        }
    }
}
