//! Power-series solution of the biconfluent Heun equation
//!
//! ```text
//! h'' + [(2|l|+1)/r − 2r] h' + [Λ − 2 − 2|l| − ξ/r] h = 0
//! ```
//!
//! and the radial wavefunction `F(r) = e^{−r²/2} r^{|l|} h(r)`.

use crate::error::{Error, Result};

/// Coefficients `c_0..=c_K` of `h(r) = Σ c_k r^k`, normalized with `c_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub l_abs: u32,
    pub xi: f64,
    pub scaled_eigenvalue: f64,
    pub coeffs: Vec<f64>,
}

impl SeriesCoefficients {
    /// Highest computed index `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// `h(r)` truncated after `c_{n_trunc}`.
    pub fn polynomial(&self, r: f64, n_trunc: usize) -> f64 {
        self.coeffs[..=n_trunc.min(self.order())]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc.mul_add(r, c))
    }
}

/// `a*b + c*d` with error-free products and a compensated sum.
fn dot2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let p = a * b;
    let ep = a.mul_add(b, -p);
    let q = c * d;
    let eq = c.mul_add(d, -q);
    let s = p + q;
    let bb = s - p;
    let es = (p - (s - bb)) + (q - bb);
    s + (es + ep + eq)
}

/// Runs the three-term recurrence
///
/// ```text
/// c_1     = ξ c_0 / (1 + 2|l|)
/// c_{k+2} = [ξ c_{k+1} − (Λ − 2 − 2|l| − 2k) c_k] / ((k+2)(k+2+2|l|))
/// ```
///
/// from `c_0 = 1` up to `c_order`.
pub fn coefficients(l_abs: u32, xi: f64, scaled_eigenvalue: f64, order: usize) -> SeriesCoefficients {
    let order = order.max(1);
    let two_l = 2.0 * f64::from(l_abs);
    let mut c = Vec::with_capacity(order + 1);
    c.push(1.0);
    c.push(xi / (1.0 + two_l));
    for k in 0..order - 1 {
        let kf = k as f64;
        let shift = scaled_eigenvalue - 2.0 - two_l - 2.0 * kf;
        let denom = (kf + 2.0) * (kf + 2.0 + two_l);
        c.push(dot2(xi, c[k + 1], -shift, c[k]) / denom);
    }
    SeriesCoefficients {
        l_abs,
        xi,
        scaled_eigenvalue,
        coeffs: c,
    }
}

/// `Λ = 2n + 2 + 2|l|`, the value fixed by the first truncation condition.
pub fn terminating_eigenvalue(n: u32, l_abs: u32) -> f64 {
    f64::from(2 * n + 2 + 2 * l_abs)
}

/// `c_{n+1}(ξ)` with `Λ = 2n + 2 + 2|l|`; zero exactly when the series
/// terminates into a degree-`n` polynomial.
pub fn termination_residual(n: u32, l_abs: u32, xi: f64) -> f64 {
    let s = coefficients(l_abs, xi, terminating_eigenvalue(n, l_abs), n as usize + 1);
    s.coeffs[n as usize + 1]
}

/// `F(r) = e^{−r²/2} r^{|l|} Σ_{k ≤ n_trunc} c_k r^k`.
pub fn eval_radial(s: &SeriesCoefficients, r: f64, n_trunc: usize) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::NegativeRadius(r));
    }
    let envelope = (-0.5 * r * r).exp() * r.powi(s.l_abs as i32);
    Ok(envelope * s.polynomial(r, n_trunc))
}

/// Samples of `F` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSamples {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub l_abs: u32,
    pub normalized: bool,
}

impl RadialSamples {
    /// Uniform samples of `F` on `[0, r_max]` (`count` points, endpoints included).
    pub fn uniform(s: &SeriesCoefficients, n_trunc: usize, r_max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(r_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 samples on a positive interval, got {count} on [0, {r_max}]"
            )));
        }
        let step = r_max / (count - 1) as f64;
        let grid: Vec<f64> = (0..count).map(|i| i as f64 * step).collect();
        let values = grid
            .iter()
            .map(|&r| eval_radial(s, r, n_trunc))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            values,
            l_abs: s.l_abs,
            normalized: false,
        })
    }

    fn peak(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `∫ |F|² r dr` by the trapezoidal rule on the sample grid.
    pub fn norm_squared(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(r, f)| 0.5 * (r[1] - r[0]) * (f[0] * f[0] * r[0] + f[1] * f[1] * r[1]))
            .sum()
    }
}

/// Strict sign changes of `F` on `r > 0`.
///
/// Values within `1e-12 · max|F|` of zero are ignored so round-off wiggles
/// and the `r^{|l|}` zero at the origin are never counted.
pub fn node_count(samples: &RadialSamples) -> usize {
    let band = 1e-12 * samples.peak();
    let mut last_sign = 0.0;
    let mut nodes = 0;
    for (&r, &v) in samples.grid.iter().zip(&samples.values) {
        if r <= 0.0 || v.abs() <= band {
            continue;
        }
        let sign = v.signum();
        if last_sign != 0.0 && sign != last_sign {
            nodes += 1;
        }
        last_sign = sign;
    }
    nodes
}

/// Rescales the samples so that `∫ |F|² r dr = 1` on the given grid.
pub fn normalize(samples: &RadialSamples) -> Result<RadialSamples> {
    let peak = samples.peak();
    let tail = samples.values.last().copied().unwrap_or(0.0).abs();
    if !(peak > 0.0) || tail >= 1e-8 * peak {
        return Err(Error::TailNotDecayed { tail, peak });
    }
    let scale = samples.norm_squared().sqrt().recip();
    Ok(RadialSamples {
        grid: samples.grid.clone(),
        values: samples.values.iter().map(|v| v * scale).collect(),
        l_abs: samples.l_abs,
        normalized: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn first_coefficients() {
        let s = coefficients(0, 1.0, 123.0, 1);
        assert_eq!(s.coeffs, vec![1.0, 1.0]);
        let s = coefficients(0, SQRT2, 4.0, 2);
        assert!(s.coeffs[2].abs() < 1e-15);
        let s = coefficients(0, 1.0, 4.0, 2);
        assert_eq!(s.coeffs[2], -0.25);
    }

    #[test]
    fn c1_relation_holds_for_all_l() {
        for l in 0..6 {
            for xi in [-3.0, -0.5, 0.0, 0.7, 2.5] {
                let s = coefficients(l, xi, 7.0, 3);
                assert_eq!(s.coeffs[0], 1.0);
                assert_relative_eq!(s.coeffs[1] * (1.0 + 2.0 * f64::from(l)), xi, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn c2_matches_unrolled_formula() {
        // c_2 = ξ²/(2(2+2|l|)(1+2|l|)) − (Λ − 2 − 2|l|)/(2(2+2|l|))
        for l in 0..5u32 {
            let lf = f64::from(l);
            for (xi, lam) in [(0.3, 1.0), (2.0, 9.5), (-1.7, 4.0)] {
                let expected = xi * xi / (2.0 * (2.0 + 2.0 * lf) * (1.0 + 2.0 * lf))
                    - (lam - 2.0 - 2.0 * lf) / (2.0 * (2.0 + 2.0 * lf));
                let s = coefficients(l, xi, lam, 2);
                assert_relative_eq!(s.coeffs[2], expected, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn residual_examples() {
        assert!(termination_residual(1, 0, SQRT2).abs() < 1e-15);
        assert_eq!(termination_residual(1, 0, 0.0), -0.5);
        assert_relative_eq!(termination_residual(3, 0, 2.0), -0.0625, max_relative = 1e-14);
    }

    #[test]
    fn quartic_for_n3_l0() {
        for xi in [-4.0f64, -1.0, 0.3, 1.7, 5.5, 9.0] {
            let expected = (xi.powi(4) - 40.0 * xi * xi + 108.0) / 576.0;
            assert_relative_eq!(
                termination_residual(3, 0, xi),
                expected,
                epsilon = 1e-14,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn even_xi_zero_kills_odd_coefficients() {
        for l in 0..4 {
            let s = coefficients(l, 0.0, 11.3, 40);
            for (k, c) in s.coeffs.iter().enumerate() {
                if k % 2 == 1 {
                    assert_eq!(*c, 0.0);
                }
            }
        }
    }

    #[test]
    fn eval_radial_examples() {
        let s = coefficients(2, 0.7, 5.0, 3);
        assert_eq!(eval_radial(&s, 0.0, 3).unwrap(), 0.0);
        let one = SeriesCoefficients {
            l_abs: 0,
            xi: 0.0,
            scaled_eigenvalue: 0.0,
            coeffs: vec![1.0],
        };
        assert_eq!(eval_radial(&one, 0.0, 0).unwrap(), 1.0);
        let ground = coefficients(0, SQRT2, 4.0, 2);
        let v = eval_radial(&ground, 1.0, 1).unwrap();
        assert_relative_eq!(v, (-0.5f64).exp() * (1.0 + SQRT2), max_relative = 1e-15);
        assert_relative_eq!(v, 1.4642945, max_relative = 1e-7);
        assert_eq!(eval_radial(&ground, -0.1, 1), Err(Error::NegativeRadius(-0.1)));
    }

    /// Positive real roots of a polynomial by dense scanning plus bisection.
    fn brute_force_positive_roots(coeffs: &[f64], r_max: f64) -> usize {
        let p = |r: f64| coeffs.iter().rev().fold(0.0, |a, &c| a * r + c);
        let steps = 200_000;
        let mut count = 0;
        let mut prev = p(1e-9);
        for i in 1..=steps {
            let v = p(r_max * i as f64 / steps as f64);
            if v != 0.0 && prev != 0.0 && v.signum() != prev.signum() {
                count += 1;
            }
            if v != 0.0 {
                prev = v;
            }
        }
        count
    }

    #[test]
    fn node_count_examples() {
        let ground = coefficients(0, SQRT2, 4.0, 1);
        let s = RadialSamples::uniform(&ground, 1, 10.0, 2001).unwrap();
        assert_eq!(node_count(&s), 0);

        let flat = RadialSamples {
            grid: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            values: vec![1.0, 2.0, 0.5, 0.1, 1e-30],
            l_abs: 0,
            normalized: false,
        };
        assert_eq!(node_count(&flat), 0);

        // smaller positive root of ξ⁴ − 40ξ² + 108
        let xi = (20.0 - 292f64.sqrt()).sqrt();
        assert_relative_eq!(xi, 1.7064561, max_relative = 1e-7);
        let state = coefficients(0, xi, 8.0, 3);
        assert_eq!(brute_force_positive_roots(&state.coeffs, 20.0), 1);
        let s = RadialSamples::uniform(&state, 3, 10.0, 4001).unwrap();
        assert_eq!(node_count(&s), 1);

        // attractive coupling flips the linear term: 1 − √2 r has one node
        let flipped = coefficients(0, -SQRT2, 4.0, 1);
        let s = RadialSamples::uniform(&flipped, 1, 10.0, 2001).unwrap();
        assert_eq!(node_count(&s), 1);
    }

    #[test]
    fn node_count_ignores_roundoff_wiggle() {
        let s = RadialSamples {
            grid: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            values: vec![0.0, 1.0, -1e-14, 1e-14, 0.5, 0.2],
            l_abs: 1,
            normalized: false,
        };
        assert_eq!(node_count(&s), 0);
    }

    #[test]
    fn normalize_ground_state() {
        let ground = coefficients(0, SQRT2, 4.0, 1);
        let s = RadialSamples::uniform(&ground, 1, 10.0, 4000).unwrap();
        let n = normalize(&s).unwrap();
        assert!(n.normalized);
        assert!((n.norm_squared() - 1.0).abs() < 1e-8);
        // ∫ e^{-r²}(1 + √2 r)² r dr = 3/2 + √(2π)/2
        let exact = 1.5 + (2.0 * std::f64::consts::PI).sqrt() / 2.0;
        assert_relative_eq!(n.values[0], exact.sqrt().recip(), max_relative = 1e-5);

        let again = normalize(&n).unwrap();
        for (a, b) in again.values.iter().zip(&n.values) {
            assert!((a - b).abs() < 1e-10);
        }

        let scaled = RadialSamples {
            values: s.values.iter().map(|v| 7.0 * v).collect(),
            ..s.clone()
        };
        let ns = normalize(&scaled).unwrap();
        for (a, b) in ns.values.iter().zip(&n.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_truncated_tail() {
        let ground = coefficients(0, SQRT2, 4.0, 1);
        let s = RadialSamples::uniform(&ground, 1, 2.0, 500).unwrap();
        assert!(matches!(normalize(&s), Err(Error::TailNotDecayed { .. })));
    }

    #[test]
    fn decay_dominates_far_out() {
        for (n, l, xi) in [(1u32, 0u32, SQRT2), (2, 1, 4.0), (3, 2, -3.0)] {
            let s = coefficients(l, xi, terminating_eigenvalue(n, l), n as usize);
            for i in 0..200 {
                let r = 12.0 + 0.1 * i as f64;
                let f = eval_radial(&s, r, n as usize).unwrap();
                assert!(f.abs() <= (-r * r / 4.0).exp(), "r = {r}");
            }
        }
    }

    proptest! {
        #[test]
        fn residual_parity(n in 1u32..=10, l in 0u32..=5, xi in -12.0f64..12.0) {
            let a = termination_residual(n, l, xi);
            let b = termination_residual(n, l, -xi);
            let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((b - sign * a).abs() <= 1e-14 * a.abs().max(1e-300));
        }

        #[test]
        fn recurrence_satisfied(l in 0u32..6, xi in -8.0f64..8.0, lam in 0.0f64..40.0) {
            let s = coefficients(l, xi, lam, 30);
            let lf = f64::from(l);
            let scale = s.max_abs();
            for k in 0..29 {
                let kf = k as f64;
                let lhs = (kf + 2.0) * (kf + 2.0 + 2.0 * lf) * s.coeffs[k + 2];
                let rhs = xi * s.coeffs[k + 1] - (lam - 2.0 - 2.0 * lf - 2.0 * kf) * s.coeffs[k];
                prop_assert!((lhs - rhs).abs() <= 1e-12 * scale * (1.0 + kf * kf));
            }
        }
    }
}
