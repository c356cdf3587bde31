//! Quantization by series truncation.
//!
//! A polynomial state of degree `n` requires `Λ = 2n + 2 + 2|l|` and
//! `c_{n+1}(ξ) = 0`. The second condition is a degree `n+1` polynomial in the
//! single coupling `ξ = 2mϑ/√δ`; each of its positive roots fixes `δ`, and
//! with it two admissible cyclotron frequencies and the energy.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::heun::{self, SeriesCoefficients};
use crate::model::{frequency_radicand, PhysicalParams};

/// `c_{n+1}` as an exact polynomial in ξ (monomial basis, index = power).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintPolynomial {
    pub n: u32,
    pub l_abs: u32,
    pub coeffs: Vec<BigRational>,
}

fn rational(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl ConstraintPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.coeffs_f64().iter().rev().fold(0.0, |acc, &c| acc.mul_add(xi, c))
    }

    /// `Σ |a_k| |ξ|^k`, the natural scale for round-off in [`Self::eval`].
    pub fn eval_scale(&self, xi: f64) -> f64 {
        self.coeffs_f64()
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * xi.abs() + c.abs())
    }

    /// Whether only powers with the parity of `n + 1` are present.
    pub fn has_expected_parity(&self) -> bool {
        let parity = (self.n as usize + 1) % 2;
        self.coeffs
            .iter()
            .enumerate()
            .all(|(k, c)| k % 2 == parity || c.is_zero())
    }
}

impl fmt::Display for ConstraintPolynomial {
    /// Exact coefficients from the constant term upward, separated by `;`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Exact coefficients of `c_{n+1}(ξ)` with `Λ − 2 − 2|l| = 2n`.
pub fn constraint_polynomial(n: u32, l_abs: u32) -> Result<ConstraintPolynomial> {
    if n == 0 {
        return Err(Error::InvalidParameter("level index n must be >= 1".into()));
    }
    let two_l = 2 * i64::from(l_abs);
    let n = i64::from(n);
    let mut prev = vec![rational(1)];
    let mut cur = vec![rational(0), BigRational::new(BigInt::from(1), BigInt::from(1 + two_l))];
    for k in 0..n {
        let shift = rational(2 * n - 2 * k);
        let denom = rational((k + 2) * (k + 2 + two_l));
        let mut next = vec![rational(0); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= &shift * c;
        }
        for c in next.iter_mut() {
            *c /= &denom;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(ConstraintPolynomial {
        n: n as u32,
        l_abs,
        coeffs: cur,
    })
}

/// `(c_{n+1}, dc_{n+1}/dξ)` by running the recurrence and its ξ-derivative.
fn residual_and_slope(n: u32, l_abs: u32, xi: f64) -> (f64, f64) {
    let two_l = 2.0 * f64::from(l_abs);
    let lam_shift = 2.0 * f64::from(n);
    let (mut c0, mut c1) = (1.0, xi / (1.0 + two_l));
    let (mut d0, mut d1) = (0.0, 1.0 / (1.0 + two_l));
    for k in 0..n {
        let kf = f64::from(k);
        let shift = lam_shift - 2.0 * kf;
        let denom = (kf + 2.0) * (kf + 2.0 + two_l);
        let c2 = (xi * c1 - shift * c0) / denom;
        let d2 = (c1 + xi * d1 - shift * d0) / denom;
        (c0, c1) = (c1, c2);
        (d0, d1) = (d1, d2);
    }
    (c1, d1)
}

/// Number of roots of `c_{n+1}` strictly above `x`.
///
/// The recurrence coefficients make `c_0, …, c_{n+1}` a Sturm sequence, so
/// this is the count of sign changes along it (zeros take the previous sign).
fn roots_above(n: u32, l_abs: u32, x: f64) -> usize {
    let s = heun::coefficients(l_abs, x, heun::terminating_eigenvalue(n, l_abs), n as usize + 1);
    let mut last = 1.0;
    let mut changes = 0;
    for &c in &s.coeffs {
        if c == 0.0 {
            continue;
        }
        if c.signum() != last {
            changes += 1;
            last = c.signum();
        }
    }
    changes
}

/// Gershgorin bound on the roots, taken from the symmetrized Jacobi matrix
/// whose eigenvalues are the roots of `c_{n+1}`.
fn root_bound(n: u32, l_abs: u32) -> f64 {
    let two_l = 2.0 * f64::from(l_abs);
    let off: Vec<f64> = (0..n)
        .map(|j| {
            let j = f64::from(j);
            ((j + 1.0) * (j + 1.0 + two_l) * 2.0 * (f64::from(n) - j)).sqrt()
        })
        .collect();
    let gersh = (0..=n as usize)
        .map(|i| {
            let left = if i > 0 { off[i - 1] } else { 0.0 };
            let right = off.get(i).copied().unwrap_or(0.0);
            left + right
        })
        .fold(0.0, f64::max);
    let heuristic = 2.0 * (heun::terminating_eigenvalue(n, l_abs) * f64::from(n + 2)).sqrt();
    gersh.max(heuristic) * 1.01 + 1.0
}

/// Strictly positive roots of the constraint polynomial, ascending.
///
/// Each root is bracketed by bisection on the Sturm count and then polished
/// with Newton steps on the recurrence.
pub fn solve_xi(n: u32, l_abs: u32) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("level index n must be >= 1".into()));
    }
    let mut hi_bound = root_bound(n, l_abs);
    while roots_above(n, l_abs, hi_bound) > 0 {
        hi_bound *= 2.0;
    }
    let positive = roots_above(n, l_abs, 0.0);
    if positive == 0 {
        return Err(Error::NoPositiveRoot { n, l_abs });
    }
    let mut roots = Vec::with_capacity(positive);
    for j in 0..positive {
        // the j-th positive root is the one with (positive - j - 1) roots above it
        let above = positive - j - 1;
        let (mut lo, mut hi) = (roots.last().copied().unwrap_or(0.0), hi_bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if roots_above(n, l_abs, mid) > above {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..4 {
            let (f, df) = residual_and_slope(n, l_abs, x);
            if df == 0.0 || f == 0.0 {
                break;
            }
            let step = f / df;
            let candidate = x - step;
            if !(candidate > lo - 1e-13 * hi && candidate < hi + 1e-13 * hi) {
                break;
            }
            x = candidate;
            if step.abs() <= 1e-16 * x {
                break;
            }
        }
        roots.push(x);
    }
    Ok(roots)
}

/// Which solution of `ω²/4 + Ωω = δ²/m²` a mode sits on: `Plus` lies above
/// the forbidden band, `Minus` below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One solved level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizedMode {
    pub n: u32,
    pub l: i32,
    pub root_index: usize,
    pub branch: Branch,
    /// Root of the constraint polynomial carrying the sign of ϑ.
    pub xi_star: f64,
    pub delta: f64,
    pub omega: f64,
    pub energy: f64,
}

impl QuantizedMode {
    pub fn l_abs(&self) -> u32 {
        self.l.unsigned_abs()
    }

    /// `Λ = 2n + 2 + 2|l|`.
    pub fn scaled_eigenvalue(&self) -> f64 {
        heun::terminating_eigenvalue(self.n, self.l_abs())
    }

    /// The terminated polynomial `h` (coefficients up to `c_{n+1}`).
    pub fn series(&self) -> SeriesCoefficients {
        heun::coefficients(
            self.l_abs(),
            self.xi_star,
            self.scaled_eigenvalue(),
            self.n as usize + 1,
        )
    }
}

/// `δ = 4m²ϑ²/ξ²`.
pub fn delta_from_root(p: &PhysicalParams, xi_star: f64) -> Result<f64> {
    if p.potential_strength == 0.0 {
        return Err(Error::ZeroTheta);
    }
    if xi_star == 0.0 || !xi_star.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "root must be finite and non-zero, got {xi_star}"
        )));
    }
    let a = 2.0 * p.mass * p.potential_strength / xi_star;
    Ok(a * a)
}

/// Both solutions of `ω²/4 + Ωω = ϖ²`, i.e. `ω = −2Ω ± 2√(Ω² + ϖ²)`,
/// evaluated without cancellation on either side of the band.
pub(crate) fn frequency_pair(rotation: f64, varpi: f64) -> (f64, f64) {
    let s = rotation.hypot(varpi);
    let v2 = varpi * varpi;
    let plus = if rotation >= 0.0 {
        2.0 * v2 / (s + rotation)
    } else {
        2.0 * (s - rotation)
    };
    let minus = if rotation <= 0.0 {
        -2.0 * v2 / (s - rotation)
    } else {
        -2.0 * (s + rotation)
    };
    (plus, minus)
}

/// Allowed cyclotron frequencies `(ω₊, ω₋)` for a root `ξ*`; regular at `Ω = 0`
/// where they reduce to `±2δ/m`.
pub fn omega_from_root(p: &PhysicalParams, xi_star: f64) -> Result<(f64, f64)> {
    let delta = delta_from_root(p, xi_star)?;
    Ok(frequency_pair(p.rotation, delta / p.mass))
}

/// `E = ϖ(n + |l| + 1) − ωl/2 − Ωl` with the rotating frequency `ϖ = δ/m`
/// supplied directly.
pub fn energy_from_varpi(n: u32, l: i32, omega: f64, varpi: f64, rotation: f64) -> f64 {
    let lf = f64::from(l);
    varpi * f64::from(n + l.unsigned_abs() + 1) - 0.5 * omega * lf - rotation * lf
}

/// `E = √(ω²/4 + Ωω)(n + |l| + 1) − ωl/2 − Ωl`.
pub fn energy_general(n: u32, l: i32, omega: f64, rotation: f64) -> Result<f64> {
    let radicand = frequency_radicand(omega, rotation);
    if !(radicand > 0.0) {
        return Err(Error::NonPositiveRadicand { omega, radicand });
    }
    Ok(energy_from_varpi(n, l, omega, radicand.sqrt(), rotation))
}

/// Both branches of a closed-form level. `degenerate` marks `ϑ = 0`, where the
/// constraint is vacuous and `δ` collapses to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub plus: QuantizedMode,
    pub minus: QuantizedMode,
    pub degenerate: bool,
}

/// Shared evaluation of the `n = 1, 2` formulas
/// `ω = −2Ω ± 2|Ω|√(1 + q/Ω²)`, `E = E₀ ∓ |Ω| l √(1 + q/Ω²)`.
fn closed_form(p: &PhysicalParams, n: u32, l: i32, sqrt_q: f64, base_energy: f64, xi_abs: f64) -> Result<ClosedForm> {
    p.validate()?;
    let rot = p.rotation;
    let lf = f64::from(l);
    let (plus_w, minus_w, shift) = if rot == 0.0 {
        (2.0 * sqrt_q, -2.0 * sqrt_q, lf * sqrt_q)
    } else {
        let y = (sqrt_q / rot).powi(2);
        let s = (1.0 + y).sqrt();
        let a = rot.abs();
        let (up, down) = if rot > 0.0 {
            (2.0 * a * y / (s + 1.0), -2.0 * a * (1.0 + s))
        } else {
            (2.0 * a * (1.0 + s), -2.0 * a * y / (s + 1.0))
        };
        (up, down, a * lf * s)
    };
    let xi_star = xi_abs.copysign(p.potential_strength);
    let degenerate = p.potential_strength == 0.0;
    let mode = |branch: Branch, omega: f64, energy: f64| QuantizedMode {
        n,
        l,
        root_index: 0,
        branch,
        xi_star: if degenerate { 0.0 } else { xi_star },
        delta: p.mass * sqrt_q,
        omega,
        energy,
    };
    Ok(ClosedForm {
        plus: mode(Branch::Plus, plus_w, base_energy - shift),
        minus: mode(Branch::Minus, minus_w, base_energy + shift),
        degenerate,
    })
}

/// Lowest level, `n = 1`:
/// `ω = −2Ω ± 2Ω√(1 + 4m²ϑ⁴/(Ω²(1+2|l|)²))`,
/// `E = 2mϑ²(|l|+2)/(1+2|l|) ∓ Ωl√(…)`.
pub fn closed_form_n1(p: &PhysicalParams, l: i32) -> Result<ClosedForm> {
    let m = p.mass;
    let th2 = p.potential_strength * p.potential_strength;
    let la = f64::from(l.unsigned_abs());
    let sqrt_q = 2.0 * m * th2 / (1.0 + 2.0 * la);
    let e0 = 2.0 * m * th2 * (la + 2.0) / (1.0 + 2.0 * la);
    closed_form(p, 1, l, sqrt_q, e0, (2.0 * (1.0 + 2.0 * la)).sqrt())
}

/// First excited level, `n = 2`:
/// `ω = −2Ω ± 2Ω√(1 + m²ϑ⁴/(Ω²(3+4|l|)²))`,
/// `E = mϑ²(3+|l|)/(3+4|l|) ∓ Ωl√(…)`.
pub fn closed_form_n2(p: &PhysicalParams, l: i32) -> Result<ClosedForm> {
    let m = p.mass;
    let th2 = p.potential_strength * p.potential_strength;
    let la = f64::from(l.unsigned_abs());
    let sqrt_q = m * th2 / (3.0 + 4.0 * la);
    let e0 = m * th2 * (3.0 + la) / (3.0 + 4.0 * la);
    closed_form(p, 2, l, sqrt_q, e0, 2.0 * (3.0 + 4.0 * la).sqrt())
}

/// All modes of level `(n, l)`: one per positive root and branch, ordered by
/// `(root_index, branch)`.
pub fn solve_level(p: &PhysicalParams, n: u32, l: i32) -> Result<Vec<QuantizedMode>> {
    p.validate()?;
    if p.potential_strength == 0.0 {
        return Err(Error::ZeroTheta);
    }
    let roots = solve_xi(n, l.unsigned_abs())?;
    let mut modes = Vec::with_capacity(2 * roots.len());
    for (root_index, root) in roots.into_iter().enumerate() {
        let xi_star = root.copysign(p.potential_strength);
        let delta = delta_from_root(p, xi_star)?;
        let varpi = delta / p.mass;
        let (plus, minus) = frequency_pair(p.rotation, varpi);
        for (branch, omega) in [(Branch::Plus, plus), (Branch::Minus, minus)] {
            modes.push(QuantizedMode {
                n,
                l,
                root_index,
                branch,
                xi_star,
                delta,
                omega,
                energy: energy_from_varpi(n, l, omega, varpi, p.rotation),
            });
        }
    }
    Ok(modes)
}

/// Rotating Landau-type levels at `ϑ = 0` for an arbitrary admissible ω:
/// `E = √(ω²/4 + Ωω)(2n_r + |l| + 1) − ωl/2 − Ωl`.
pub fn landau_limit(p: &PhysicalParams, n_r: u32, l: i32, omega: f64) -> Result<f64> {
    if p.potential_strength != 0.0 {
        return Err(Error::ThetaNotZero(p.potential_strength));
    }
    let radicand = frequency_radicand(omega, p.rotation);
    if !(radicand > 0.0) {
        return Err(Error::NonPositiveRadicand { omega, radicand });
    }
    let lf = f64::from(l);
    Ok(radicand.sqrt() * f64::from(2 * n_r + l.unsigned_abs() + 1) - 0.5 * omega * lf - p.rotation * lf)
}

/// Checks a rational polynomial against its expected leading sign; used to
/// keep the parity/degree structure honest in tests and diagnostics.
pub fn leading_coefficient_positive(poly: &ConstraintPolynomial) -> bool {
    poly.coeffs.get(poly.degree()).map(|c| c.is_positive()).unwrap_or(false)
}
