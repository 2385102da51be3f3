//! Phase and sign conventions used throughout the crate.
//!
//! Every module imports these helpers instead of restating the phases. The
//! same rules are listed in `CONVENTIONS.md` at the repository root.
//!
//! * OAM basis `|ℓ⟩`, `ℓ ∈ ℤ`, truncated to `[-L, L]`. Index `ℓ` lives at
//!   position `ℓ + L` in every vector and matrix.
//! * Angle basis: `⟨φ|ℓ⟩ = e^{iℓφ} / √(2π)`, so `L̂` acts as `-i ∂_φ` on
//!   angular wavefunctions and `e^{-iφ′L̂}` rotates a wavefunction forward,
//!   `ψ(φ) ↦ ψ(φ - φ′)`.
//! * `Ê = e^{-iφ̂}` lowers the charge, `Ê|ℓ⟩ = |ℓ - 1⟩`; `Ê^{-ℓ}` raises by `ℓ`.
//! * Displacement `D(ℓ, φ) = e^{iα(ℓ,φ)} Ê^{-ℓ} e^{-iφL̂}`, so
//!   `D|n⟩ = e^{iα} e^{-iφn} |n + ℓ⟩`.
//! * Free propagator `U_t = e^{-itL̂²/2}` evolves states forward:
//!   `ρ ↦ U_t ρ U_t†`, i.e. `ρ_mn ↦ e^{-it(m² - n²)/2} ρ_mn`.
//! * Tomogram pairing: the coefficient cell `(ℓ, φ)` with `ℓ ≠ 0` is read
//!   from the tomogram taken at `t = -φ/ℓ`. With `F` the `ℓ`-th Fourier
//!   mode of that tomogram, the zero-gauge coefficient is
//!   `ρ₀(ℓ, φ) = e^{-iℓφ/2} F`, and a gauge `α` gives
//!   `ρ_α(ℓ, φ) = e^{-iα(ℓ, φ)} ρ₀(ℓ, φ)`. Because the scheduled band is
//!   symmetric in `ℓ`, the set of times `{-φ_j/ℓ}` equals `{φ_j/ℓ}`.
//! * The symmetric gauge `α(ℓ, φ) = -ℓφ/2` takes `φ` in `[-π, π)`; its branch
//!   cut sits at `φ = π`.

use std::f64::consts::PI;

use crate::C64;

/// `⟨φ|ℓ⟩`.
pub fn angle_overlap(l: i64, phi: f64) -> C64 {
    C64::from_polar(1.0 / (2.0 * PI).sqrt(), l as f64 * phi)
}

/// Position of charge `l` inside a truncated vector of half width `l_max`.
#[inline]
pub fn index_of(l: i64, l_max: usize) -> usize {
    debug_assert!(l.unsigned_abs() as usize <= l_max);
    (l + l_max as i64) as usize
}

#[inline]
pub fn charge_at(index: usize, l_max: usize) -> i64 {
    index as i64 - l_max as i64
}

/// Phase picked up by `ρ_mn` under `ρ ↦ U_t ρ U_t†`.
#[inline]
pub fn free_phase(m: i64, n: i64, t: f64) -> C64 {
    C64::from_polar(1.0, -t * ((m * m - n * n) as f64) / 2.0)
}

/// Evolution time whose tomogram carries the coefficient cell `(l, phi)`.
#[inline]
pub fn tomogram_time(l: i64, phi: f64) -> f64 {
    -phi / l as f64
}

/// Zero-gauge coefficient recovered from the `l`-th Fourier mode of the
/// tomogram recorded at [`tomogram_time`]`(l, phi)`.
#[inline]
pub fn zero_gauge_coefficient(l: i64, phi: f64, mode: C64) -> C64 {
    mode * C64::from_polar(1.0, -(l as f64) * phi / 2.0)
}
