//! Physical parameters and the derived scalar quantities of the scaled radial
//! problem.
//!
//! Natural units (ħ = c = 1) are used throughout. The radial equation in the
//! scaled coordinate `r = √δ ρ` reads
//!
//! ```text
//! F'' + F'/r − l²F/r² − r²F − ξF/r + ΛF = 0
//! ```
//!
//! with `δ² = m²ω²/4 + m²Ωω`, `Θ = 2mE + 2mΩl + mωl`, `Λ = Θ/δ` and
//! `ξ = 2mϑ/√δ`.

use crate::error::{Error, Result};

/// Experiment knobs: mass, quadrupole moment, charge density, rotation rate
/// and strength of the `ϑ/ρ` scalar potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mass: f64,
    /// Scalar `M` of the two-component quadrupole tensor `M_ρz = M_zρ = M`.
    pub quadrupole: f64,
    /// Charge-density parameter `λ` of the radial field `E = λρ²/2`.
    pub charge_density: f64,
    /// Angular velocity `Ω` of the frame about `z`.
    pub rotation: f64,
    /// Strength `ϑ` of `V(ρ) = ϑ/ρ`.
    pub potential_strength: f64,
}

impl PhysicalParams {
    pub fn new(
        mass: f64,
        quadrupole: f64,
        charge_density: f64,
        rotation: f64,
        potential_strength: f64,
    ) -> Result<Self> {
        let p = Self {
            mass,
            quadrupole,
            charge_density,
            rotation,
            potential_strength,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters relevant to quantization only; `M` and `λ` are set to 1 and 0.
    pub fn rotating(mass: f64, rotation: f64, potential_strength: f64) -> Result<Self> {
        Self::new(mass, 1.0, 0.0, rotation, potential_strength)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("quadrupole", self.quadrupole),
            ("charge_density", self.charge_density),
            ("rotation", self.rotation),
            ("potential_strength", self.potential_strength),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.mass <= 0.0 {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {}", self.mass)));
        }
        if self.quadrupole <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "quadrupole moment must be > 0, got {}",
                self.quadrupole
            )));
        }
        Ok(())
    }

    pub fn with_rotation(self, rotation: f64) -> Self {
        Self { rotation, ..self }
    }

    pub fn with_potential_strength(self, potential_strength: f64) -> Self {
        Self {
            potential_strength,
            ..self
        }
    }
}

/// Scales entering the dimensionless radial equation for one choice of ω and E.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    pub omega: f64,
    pub delta: f64,
    /// Dimensionless eigenvalue `Λ = Θ/δ`.
    pub scaled_eigenvalue: f64,
    /// Dimensionless Coulomb coupling `ξ = 2mϑ/√δ`.
    pub xi: f64,
}

impl DerivedScales {
    pub fn compute(p: &PhysicalParams, omega: f64, energy: f64, l: i32) -> Result<Self> {
        let delta = delta_from_omega(p, omega)?;
        let theta = theta_capital(p, energy, l, omega);
        Ok(Self {
            omega,
            delta,
            scaled_eigenvalue: theta / delta,
            xi: xi_coupling(p, delta)?,
        })
    }
}

/// Landau-type cyclotron frequency `ω = 2Mλ/m`.
pub fn cyclotron_frequency(p: &PhysicalParams) -> f64 {
    2.0 * p.quadrupole * p.charge_density / p.mass
}

/// z-component of the effective field `B_eff = λM ẑ`.
pub fn effective_field(p: &PhysicalParams) -> f64 {
    p.charge_density * p.quadrupole
}

/// Radicand `ω²/4 + Ωω` written as `ω(ω + 4Ω)/4`, which keeps relative
/// accuracy near the edge `ω = −4Ω` of the forbidden band.
pub(crate) fn frequency_radicand(omega: f64, rotation: f64) -> f64 {
    omega * (omega + 4.0 * rotation) / 4.0
}

/// Positive root of `δ² = m²ω²/4 + m²Ωω`.
///
/// Frequencies in the closed band between `0` and `−4Ω` leave no decaying
/// scale and are rejected.
pub fn delta_from_omega(p: &PhysicalParams, omega: f64) -> Result<f64> {
    let radicand = frequency_radicand(omega, p.rotation);
    if !(radicand > 0.0) {
        return Err(Error::NonPositiveRadicand {
            omega,
            radicand: p.mass * p.mass * radicand,
        });
    }
    Ok(p.mass * radicand.sqrt())
}

/// `Θ = 2mE + 2mΩl + mωl`.
pub fn theta_capital(p: &PhysicalParams, energy: f64, l: i32, omega: f64) -> f64 {
    let l = f64::from(l);
    2.0 * p.mass * energy + 2.0 * p.mass * p.rotation * l + p.mass * omega * l
}

/// `ξ = 2mϑ/√δ`; carries the sign of ϑ.
pub fn xi_coupling(p: &PhysicalParams, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::NonPositiveDelta(delta));
    }
    Ok(2.0 * p.mass * p.potential_strength / delta.sqrt())
}
