//! Displacement operators, the Wigner kernel and phase-space maps on the
//! discrete cylinder.
//!
//! The Wigner kernel used here has the closed-form matrix elements
//!
//! ```text
//! ⟨m|ŵ(ℓ,φ)|n⟩ = K(ℓ, m+n) e^{-i(m-n)φ}
//! K(ℓ, S) = δ_{S,2ℓ} / 2π                         S even
//! K(ℓ, S) = (-1)^{(S-1)/2 - ℓ} / (π² (S - 2ℓ))    S odd
//! ```
//!
//! which is the double Fourier transform of the displacement operators in the
//! symmetric gauge with `φ′` running over `[-π, π)`. The odd part has support
//! on every row `ℓ ∈ ℤ`; rows beyond the truncation are not stored, but their
//! sum is kept per angle (see [`WignerMap::outer`]).

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conventions::index_of;
use crate::numerics::{centered_mode_integral, circle_integrate_real, fourier_coefficient, Angle, PeriodicGrid};
use crate::states::DensityMatrix;
use crate::{Error, Result, C64};

/// Largest imaginary part tolerated in `Tr[ρ ŵ]` before it is discarded.
pub const IMAGINARY_TOL: f64 = 1e-12;

/// Gauge `α(ℓ, φ)` fixing the phase of `D(ℓ, φ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaConvention {
    /// `α = 0`.
    #[default]
    Zero,
    /// `α = -ℓφ/2` with `φ ∈ [-π, π)`.
    Symmetric,
}

impl AlphaConvention {
    pub fn alpha(self, l: i64, phi: Angle) -> f64 {
        match self {
            AlphaConvention::Zero => 0.0,
            AlphaConvention::Symmetric => -(l as f64) * phi.centered() / 2.0,
        }
    }

    /// `e^{iα(ℓ, φ)}`.
    pub fn phase(self, l: i64, phi: Angle) -> C64 {
        C64::from_polar(1.0, self.alpha(l, phi))
    }

    pub fn name(self) -> &'static str {
        match self {
            AlphaConvention::Zero => "zero",
            AlphaConvention::Symmetric => "symmetric",
        }
    }
}

impl std::str::FromStr for AlphaConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(AlphaConvention::Zero),
            "symmetric" => Ok(AlphaConvention::Symmetric),
            other => Err(Error::InvalidArgument(format!("unknown convention '{other}'"))),
        }
    }
}

/// `D(l, φ) = e^{iα} Ê^{-l} e^{-iφL̂}` on `[-L, L]`; entry `(m, n)` is
/// `e^{iα} e^{-iφn} δ_{m, n+l}`. Columns shifted out of the truncation are dropped.
pub fn displacement_matrix(l: i64, phi: Angle, l_max: usize, conv: AlphaConvention) -> DMatrix<C64> {
    let dim = 2 * l_max + 1;
    let lm = l_max as i64;
    let gauge = conv.phase(l, phi);
    let mut d = DMatrix::zeros(dim, dim);
    for n in -lm..=lm {
        let m = n + l;
        if m.abs() <= lm {
            d[(index_of(m, l_max), index_of(n, l_max))] = gauge * C64::from_polar(1.0, -phi.value() * n as f64);
        }
    }
    d
}

/// Weight `K(ℓ, m+n)` of the kernel entry `(m, n)` on row `ℓ`.
pub fn kernel_weight(l: i64, charge_sum: i64) -> f64 {
    let s = charge_sum - 2 * l;
    if charge_sum % 2 == 0 {
        if s == 0 {
            1.0 / TAU
        } else {
            0.0
        }
    } else {
        let sign = if (s - 1).div_euclid(2) % 2 == 0 { 1.0 } else { -1.0 };
        sign / (PI * PI * s as f64)
    }
}

/// Sum of [`kernel_weight`] over the rows `|ℓ| > l_max`.
///
/// Uses `Σ_{ℓ∈ℤ} K(ℓ, S) = 1/2π` (for odd `S` this is the Leibniz series
/// summed symmetrically).
pub fn outer_kernel_weight(charge_sum: i64, l_max: usize) -> f64 {
    let lm = l_max as i64;
    let inner: f64 = (-lm..=lm).map(|l| kernel_weight(l, charge_sum)).sum();
    1.0 / TAU - inner
}

pub fn kernel_entry(l: i64, phi: Angle, m: i64, n: i64) -> C64 {
    C64::from_polar(kernel_weight(l, m + n), -((m - n) as f64) * phi.value())
}

/// Wigner kernel `ŵ(l, φ)` restricted to `[-L, L]`.
pub fn kernel_matrix(l: i64, phi: Angle, l_max: usize) -> DMatrix<C64> {
    let dim = 2 * l_max + 1;
    let lm = l_max as i64;
    DMatrix::from_fn(dim, dim, |i, k| kernel_entry(l, phi, i as i64 - lm, k as i64 - lm))
}

/// Real Wigner function sampled on integer rows `ℓ ∈ [-L, L]` and a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerMap {
    l_max: usize,
    grid: PeriodicGrid,
    convention: AlphaConvention,
    /// Row-major, row `ℓ` at `(ℓ + L) * n_points`.
    values: Vec<f64>,
    outer: Vec<f64>,
    imaginary_residue: f64,
}

impl WignerMap {
    pub fn from_parts(
        l_max: usize,
        grid: PeriodicGrid,
        convention: AlphaConvention,
        values: Vec<f64>,
        outer: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != (2 * l_max + 1) * grid.len() || outer.len() != grid.len() {
            return Err(Error::InvalidArgument("Wigner map shape does not match its grid".into()));
        }
        Ok(WignerMap { l_max, grid, convention, values, outer, imaginary_residue: 0.0 })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    /// Gauge of the coefficients the map was synthesized from. Maps taken
    /// directly from the kernel report [`AlphaConvention::Symmetric`], the
    /// gauge in which the kernel is a plain double Fourier transform.
    pub fn convention(&self) -> AlphaConvention {
        self.convention
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn charges(&self) -> impl Iterator<Item = i64> {
        let l = self.l_max as i64;
        -l..=l
    }

    pub fn row(&self, l: i64) -> &[f64] {
        let n = self.grid.len();
        let start = index_of(l, self.l_max) * n;
        &self.values[start..start + n]
    }

    pub fn value(&self, l: i64, j: usize) -> f64 {
        self.row(l)[j]
    }

    /// `Σ_{|ℓ|>L} W(ℓ, φ_j)`: the rows beyond the truncation, summed in closed form.
    pub fn outer(&self) -> &[f64] {
        &self.outer
    }

    /// Largest `|Im Tr[ρŵ]|` discarded while building the map.
    pub fn imaginary_residue(&self) -> f64 {
        self.imaginary_residue
    }

    /// Rows next to the truncation boundary, where a state that was cut off
    /// would show its truncation error first.
    pub fn edge_rows(&self) -> Vec<i64> {
        let l = self.l_max as i64;
        if l == 0 {
            vec![0]
        } else {
            vec![-l, l]
        }
    }

    /// `Σ_ℓ ∫ W dφ` over the stored rows.
    pub fn total_mass(&self) -> f64 {
        self.charges().map(|l| circle_integrate_real(self.row(l))).sum()
    }

    /// Most negative entry as `(value, ℓ, φ)`.
    pub fn min_entry(&self) -> (f64, i64, f64) {
        self.extreme(|a, b| a < b)
    }

    pub fn max_entry(&self) -> (f64, i64, f64) {
        self.extreme(|a, b| a > b)
    }

    fn extreme(&self, better: impl Fn(f64, f64) -> bool) -> (f64, i64, f64) {
        let n = self.grid.len();
        let mut best = (self.values[0], -(self.l_max as i64), 0.0);
        for (idx, &v) in self.values.iter().enumerate() {
            if better(v, best.0) {
                best = (v, (idx / n) as i64 - self.l_max as i64, self.grid.point(idx % n));
            }
        }
        best
    }

    /// Largest absolute difference over the rows `|ℓ| ≤ rows`.
    pub fn max_abs_diff(&self, other: &WignerMap, rows: usize) -> f64 {
        let r = rows.min(self.l_max).min(other.l_max) as i64;
        (-r..=r)
            .flat_map(|l| self.row(l).iter().zip(other.row(l)).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

/// `W(ℓ, φ_j) = Tr[ρ ŵ(ℓ, φ_j)]`.
pub fn wigner_map(rho: &DensityMatrix, grid: &PeriodicGrid) -> Result<WignerMap> {
    let l_max = rho.l_max();
    grid.check_resolves(l_max)?;
    let lm = l_max as i64;
    let span = 2 * lm;

    // Tr[ρŵ] = Σ_d e^{-idφ} Σ_{m-n=d} ρ_nm K(ℓ, m+n)
    let diagonal_sums = |weight: &dyn Fn(i64) -> f64| -> Vec<C64> {
        (-span..=span)
            .map(|d| {
                let mut acc = C64::new(0.0, 0.0);
                for n in -lm..=lm {
                    let m = n + d;
                    if m.abs() <= lm {
                        let w = weight(m + n);
                        if w != 0.0 {
                            acc += rho.entry(n, m) * w;
                        }
                    }
                }
                acc
            })
            .collect()
    };
    let synth = |coeffs: &[C64], j: usize| -> C64 {
        coeffs
            .iter()
            .zip(-span..=span)
            .map(|(c, d)| c * grid.mode(-d, j))
            .sum()
    };

    let rows: Vec<(Vec<f64>, f64, usize)> = (-lm..=lm)
        .into_par_iter()
        .map(|l| {
            let coeffs = diagonal_sums(&|s| kernel_weight(l, s));
            let mut residue = 0.0f64;
            let mut worst = 0;
            let row = (0..grid.len())
                .map(|j| {
                    let v = synth(&coeffs, j);
                    if v.im.abs() > residue {
                        residue = v.im.abs();
                        worst = j;
                    }
                    v.re
                })
                .collect();
            (row, residue, worst)
        })
        .collect();

    let outer_coeffs = diagonal_sums(&|s| outer_kernel_weight(s, l_max));
    let outer: Vec<f64> = (0..grid.len()).map(|j| synth(&outer_coeffs, j).re).collect();

    assemble(l_max, *grid, AlphaConvention::Symmetric, rows, outer)
}

fn assemble(
    l_max: usize,
    grid: PeriodicGrid,
    convention: AlphaConvention,
    rows: Vec<(Vec<f64>, f64, usize)>,
    outer: Vec<f64>,
) -> Result<WignerMap> {
    let mut residue = 0.0f64;
    for (i, (_, r, j)) in rows.iter().enumerate() {
        if *r >= IMAGINARY_TOL {
            return Err(Error::ImaginaryResidue {
                l: i as i64 - l_max as i64,
                phi: grid.point(*j),
                residue: *r,
            });
        }
        residue = residue.max(*r);
    }
    let values = rows.into_iter().flat_map(|(row, _, _)| row).collect();
    let mut map = WignerMap::from_parts(l_max, grid, convention, values, outer)?;
    map.imaginary_residue = residue;
    Ok(map)
}

/// Expansion coefficients `ρ(ℓ, φ) = Tr[ρ D†(ℓ, φ)] / 2π` on rows `|ℓ| ≤ band`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMap {
    l_max: usize,
    band: usize,
    grid: PeriodicGrid,
    convention: AlphaConvention,
    values: Vec<C64>,
}

impl CoefficientMap {
    pub fn from_parts(
        l_max: usize,
        band: usize,
        grid: PeriodicGrid,
        convention: AlphaConvention,
        values: Vec<C64>,
    ) -> Result<Self> {
        if values.len() != (2 * band + 1) * grid.len() {
            return Err(Error::InvalidArgument("coefficient map shape does not match its grid".into()));
        }
        Ok(CoefficientMap { l_max, band, grid, convention, values })
    }

    pub fn zeros(l_max: usize, grid: PeriodicGrid, convention: AlphaConvention) -> Self {
        let band = 2 * l_max;
        CoefficientMap {
            l_max,
            band,
            grid,
            convention,
            values: vec![C64::new(0.0, 0.0); (2 * band + 1) * grid.len()],
        }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn convention(&self) -> AlphaConvention {
        self.convention
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn row(&self, l: i64) -> &[C64] {
        let n = self.grid.len();
        let start = index_of(l, self.band) * n;
        &self.values[start..start + n]
    }

    pub fn value(&self, l: i64, j: usize) -> C64 {
        self.row(l)[j]
    }

    /// Same operator expansion written in another gauge:
    /// `ρ_β = e^{-i(β - α)} ρ_α`.
    pub fn regauge(&self, target: AlphaConvention) -> CoefficientMap {
        let n = self.grid.len();
        let band = self.band as i64;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                let l = (idx / n) as i64 - band;
                let phi = Angle::new(self.grid.point(idx % n));
                v * (self.convention.phase(l, phi) * target.phase(l, phi).conj())
            })
            .collect();
        CoefficientMap { values, convention: target, ..self.clone() }
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &CoefficientMap) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `Tr[ρ D₀†(ℓ, φ_j)] / 2π = (1/2π) Σ_n ρ_{n+ℓ, n} e^{iφ_j n}` (zero gauge).
fn zero_gauge_row(rho: &DensityMatrix, l: i64, grid: &PeriodicGrid) -> Vec<C64> {
    let lm = rho.l_max() as i64;
    let terms: Vec<(i64, C64)> = (-lm..=lm)
        .filter(|n| (n + l).abs() <= lm)
        .map(|n| (n, rho.entry(n + l, n)))
        .collect();
    (0..grid.len())
        .map(|j| terms.iter().map(|&(n, c)| c * grid.mode(n, j)).sum::<C64>() / TAU)
        .collect()
}

/// `ρ_α(ℓ, φ_j)` for `|ℓ| ≤ 2L`.
pub fn coefficient_map(rho: &DensityMatrix, grid: &PeriodicGrid, conv: AlphaConvention) -> Result<CoefficientMap> {
    let l_max = rho.l_max();
    grid.check_resolves(l_max)?;
    let band = 2 * l_max as i64;
    let values: Vec<C64> = (-band..=band)
        .into_par_iter()
        .flat_map_iter(|l| {
            zero_gauge_row(rho, l, grid)
                .into_iter()
                .enumerate()
                .map(move |(j, c)| c * conv.phase(l, Angle::new(grid.point(j))).conj())
        })
        .collect();
    CoefficientMap::from_parts(l_max, band as usize, *grid, conv, values)
}

/// Rebuilds the Wigner function from expansion coefficients,
/// `W(ℓ, φ) = (1/2π) Σ_{ℓ′} ∫ dφ′ ρ(ℓ′, φ′) e^{i(ℓ′φ - ℓφ′)}`.
///
/// The gauge recorded in `coeffs` is stripped first, leaving a periodic
/// band-limited function of `φ′` whose Fourier modes come from the grid
/// samples. Only the modes `n` a truncated state can populate are kept,
/// `|n| ≤ L` and `|n + ℓ′| ≤ L`; this set maps onto itself under the
/// Hermitian pairing of rows `ℓ′` and `-ℓ′`, so Hermitian data (noisy or not)
/// synthesize a real map. The `φ′` integral over `[-π, π)` is then taken mode
/// by mode against the symmetric-gauge factor `e^{iℓ′φ′/2}`, so the result is
/// the same Wigner function whatever gauge the coefficients were written in.
pub fn wigner_from_coefficients(coeffs: &CoefficientMap) -> Result<WignerMap> {
    let l_max = coeffs.l_max();
    let grid = coeffs.grid();
    grid.check_resolves(l_max)?;
    let lm = l_max as i64;
    let band = coeffs.band() as i64;
    let conv = coeffs.convention();

    // spectra[ℓ′] = Fourier modes k ∈ [lo(ℓ′), hi(ℓ′)] of ρ_α(ℓ′, ·) e^{iα(ℓ′, ·)}
    let support = |lp: i64| (-lm).max(-lm - lp)..=lm.min(lm - lp);
    let spectra: Vec<Vec<C64>> = (-band..=band)
        .into_par_iter()
        .map(|lp| {
            let stripped: Vec<C64> = coeffs
                .row(lp)
                .iter()
                .enumerate()
                .map(|(j, &c)| c * conv.phase(lp, Angle::new(grid.point(j))))
                .collect();
            support(lp)
                .map(|k| fourier_coefficient(&stripped, k))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // c(ℓ, ℓ′) = Σ_k ĝ_k ∫_{-π}^{π} e^{i(k + ℓ′/2 - ℓ)φ′} dφ′
    let project = |weight: &dyn Fn(i64) -> f64| -> Vec<C64> {
        spectra
            .iter()
            .zip(-band..=band)
            .map(|(spec, lp)| {
                spec.iter()
                    .zip(support(lp))
                    .map(|(g, k)| g * weight(2 * k + lp))
                    .sum()
            })
            .collect()
    };
    let synth = |c: &[C64], j: usize| -> C64 {
        c.iter().zip(-band..=band).map(|(v, lp)| v * grid.mode(lp, j)).sum::<C64>() / TAU
    };

    let rows: Vec<(Vec<f64>, f64, usize)> = (-lm..=lm)
        .into_par_iter()
        .map(|l| {
            let c = project(&|doubled| centered_mode_integral(doubled - 2 * l));
            let mut residue = 0.0f64;
            let mut worst = 0;
            let row = (0..grid.len())
                .map(|j| {
                    let v = synth(&c, j);
                    if v.im.abs() > residue {
                        residue = v.im.abs();
                        worst = j;
                    }
                    v.re
                })
                .collect();
            (row, residue, worst)
        })
        .collect();

    // rows |ℓ| > L: Σ_{ℓ∈ℤ} ∫ e^{i(a-ℓ)φ′} dφ′ = 2π for integer or half-integer a
    let c_outer = project(&|doubled| {
        TAU - (-lm..=lm).map(|l| centered_mode_integral(doubled - 2 * l)).sum::<f64>()
    });
    let outer = (0..grid.len()).map(|j| synth(&c_outer, j).re).collect();

    assemble(l_max, grid, conv, rows, outer)
}

/// OAM and angle marginals of a Wigner map.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    /// `∫ W(ℓ, φ) dφ`, ordered by charge.
    pub oam: Vec<f64>,
    /// `Σ_{ℓ∈ℤ} W(ℓ, φ_j)`, including the rows beyond the truncation.
    pub angle: Vec<f64>,
}

pub fn marginals(map: &WignerMap) -> Marginals {
    let oam = map.charges().map(|l| circle_integrate_real(map.row(l))).collect();
    let angle = (0..map.grid().len())
        .map(|j| map.charges().map(|l| map.value(l, j)).sum::<f64>() + map.outer()[j])
        .collect();
    Marginals { oam, angle }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{coherent_state, oam_eigenstate, random_pure_state, superposition_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trace(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
        (a * b).trace()
    }

    #[test]
    fn displacement_examples() {
        let id = displacement_matrix(0, Angle::ZERO, 3, AlphaConvention::Zero);
        assert_eq!(id, DMatrix::identity(7, 7));
        let shift = displacement_matrix(1, Angle::ZERO, 3, AlphaConvention::Zero);
        // |ℓ⟩ ↦ |ℓ+1⟩: column ℓ has its one in row ℓ+1
        for n in -3..3i64 {
            assert_eq!(shift[(index_of(n + 1, 3), index_of(n, 3))], C64::new(1.0, 0.0));
        }
        assert_eq!(shift.column(index_of(3, 3)).iter().map(|z| z.norm()).sum::<f64>(), 0.0);
    }

    #[test]
    fn displacement_unitary_on_interior() {
        let l_max = 5;
        for conv in [AlphaConvention::Zero, AlphaConvention::Symmetric] {
            for l in [-3i64, -1, 2] {
                let d = displacement_matrix(l, Angle::new(1.3), l_max, conv);
                let p = &d * d.adjoint();
                let inner = (l_max as i64) - l.abs();
                for m in -inner..=inner {
                    for n in -inner..=inner {
                        let expect = if m == n { 1.0 } else { 0.0 };
                        let got = p[(index_of(m, l_max), index_of(n, l_max))];
                        assert!((got - C64::new(expect, 0.0)).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn unitarity_condition_of_gauges() {
        // α(ℓ,φ) + α(-ℓ,-φ) ≡ -ℓφ (mod 2π) away from the branch cut at φ = π
        for l in -6i64..=6 {
            for phi in [0.0, 0.4, 1.9, 3.0, 3.3, 5.0, 6.2] {
                let a = Angle::new(phi);
                let sum = AlphaConvention::Symmetric.alpha(l, a) + AlphaConvention::Symmetric.alpha(-l, -a);
                let target = -(l as f64) * phi;
                assert!(Angle::new(sum).approx_eq(Angle::new(target), 1e-12), "l={l} phi={phi}");
            }
        }
    }

    #[test]
    fn kernel_examples() {
        for phi in [0.0, 1.0, 4.0] {
            for l in -2i64..=2 {
                let k = kernel_matrix(l, Angle::new(phi), 4);
                assert!((k[(index_of(l, 4), index_of(l, 4))] - C64::new(1.0 / TAU, 0.0)).norm() < 1e-15);
            }
        }
        let k = kernel_matrix(0, Angle::ZERO, 4);
        assert!((k[(index_of(1, 4), index_of(0, 4))].re - 1.0 / (PI * PI)).abs() < 1e-16);
        assert!(k.iter().zip(k.adjoint().iter()).all(|(a, b)| (a - b).norm() < 1e-16));
    }

    #[test]
    fn kernel_rows_sum_to_comb() {
        // slow partial sums of Σ_ℓ K(ℓ, S) approach 1/2π
        for s in [-5i64, -1, 1, 3, 7] {
            let partial: f64 = (-200_000i64..=200_000).map(|l| kernel_weight(l, s)).sum();
            assert!((partial - 1.0 / TAU).abs() < 1e-5, "S = {s}");
        }
    }

    #[test]
    fn kernel_is_displaced_parity() {
        let l_max = 6;
        let parity = kernel_matrix(0, Angle::ZERO, l_max);
        for (l, phi) in [(1i64, 0.7), (-2, 2.5), (2, 5.0)] {
            let d = displacement_matrix(l, Angle::new(phi), l_max, AlphaConvention::Zero);
            let moved = &d * &parity * d.adjoint();
            let direct = kernel_matrix(l, Angle::new(phi), l_max);
            let inner = l_max as i64 - l.abs();
            for m in -inner..=inner {
                for n in -inner..=inner {
                    let (i, k) = (index_of(m, l_max), index_of(n, l_max));
                    // entries fed from outside the truncation are not reproduced
                    if (m - l).abs() <= l_max as i64 && (n - l).abs() <= l_max as i64 {
                        assert!((moved[(i, k)] - direct[(i, k)]).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn oam_eigenstate_wigner_is_flat_slice() {
        let grid = PeriodicGrid::new(32).unwrap();
        let rho = oam_eigenstate(2, 4).unwrap().density_matrix();
        let w = wigner_map(&rho, &grid).unwrap();
        for l in -4i64..=4 {
            let expect = if l == 2 { 1.0 / TAU } else { 0.0 };
            assert!(w.row(l).iter().all(|v| (v - expect).abs() < 1e-15));
        }
        let m = marginals(&w);
        assert!((m.oam[index_of(2, 4)] - 1.0).abs() < 1e-14);
        assert!(m.angle.iter().all(|a| (a - 1.0 / TAU).abs() < 1e-14));
    }

    #[test]
    fn superposition_interference_row() {
        let grid = PeriodicGrid::new(64).unwrap();
        let rho = superposition_state(3, Angle::new(PI), 4).unwrap().density_matrix();
        let w = wigner_map(&rho, &grid).unwrap();
        for (j, phi) in grid.points().enumerate() {
            assert!((w.value(0, j) - (6.0 * phi - PI).cos() / TAU).abs() < 1e-14);
            assert!((w.value(3, j) - 1.0 / (2.0 * TAU)).abs() < 1e-14);
            assert!((w.value(-3, j) - 1.0 / (2.0 * TAU)).abs() < 1e-14);
        }
    }

    #[test]
    fn wigner_map_is_trace_against_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_pure_state(3, 3, &mut rng).unwrap().density_matrix();
        let grid = PeriodicGrid::new(16).unwrap();
        let w = wigner_map(&rho, &grid).unwrap();
        for l in -3i64..=3 {
            for (j, phi) in grid.points().enumerate() {
                let direct = trace(rho.entries(), &kernel_matrix(l, Angle::new(phi), 3));
                assert!(direct.im.abs() < 1e-14);
                assert!((w.value(l, j) - direct.re).abs() < 1e-14);
            }
        }
        assert!((w.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_negativity_and_peak() {
        let grid = PeriodicGrid::new(256).unwrap();
        let rho = coherent_state(0, Angle::ZERO, 8).unwrap().density_matrix();
        let w = wigner_map(&rho, &grid).unwrap();
        let (max, l, phi) = w.max_entry();
        assert_eq!((l, phi), (0, 0.0));
        assert!(max > 0.0);
        let pi_index = grid.len() / 2;
        assert!(w.value(1, pi_index) < 0.0);
        assert!(w.value(-1, pi_index) < 0.0);
    }

    #[test]
    fn coefficient_examples() {
        let grid = PeriodicGrid::new(32).unwrap();
        let rho = oam_eigenstate(3, 4).unwrap().density_matrix();
        let c = coefficient_map(&rho, &grid, AlphaConvention::Zero).unwrap();
        assert_eq!(c.band(), 8);
        for (j, phi) in grid.points().enumerate() {
            assert!((c.value(0, j) - C64::from_polar(1.0 / TAU, 3.0 * phi)).norm() < 1e-15);
            assert!(c.value(1, j).norm() < 1e-15);
        }
        let mixed = DensityMatrix::maximally_mixed(2);
        let grid = PeriodicGrid::new(16).unwrap();
        let c = coefficient_map(&mixed, &grid, AlphaConvention::Zero).unwrap();
        for (j, phi) in grid.points().enumerate() {
            let comb: C64 = (-2..=2).map(|l| C64::from_polar(1.0, l as f64 * phi)).sum::<C64>() / (5.0 * TAU);
            assert!((c.value(0, j) - comb).norm() < 1e-15);
            for l in [-4i64, -1, 2, 4] {
                assert!(c.value(l, j).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn coefficients_match_trace_with_displacement() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = random_pure_state(2, 3, &mut rng).unwrap().density_matrix();
        let grid = PeriodicGrid::new(14).unwrap();
        for conv in [AlphaConvention::Zero, AlphaConvention::Symmetric] {
            let c = coefficient_map(&rho, &grid, conv).unwrap();
            for l in -6i64..=6 {
                for (j, phi) in grid.points().enumerate() {
                    let d = displacement_matrix(l, Angle::new(phi), 3, conv);
                    let direct = trace(rho.entries(), &d.adjoint()) / TAU;
                    assert!((c.value(l, j) - direct).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn symmetric_coefficients_are_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = random_pure_state(3, 3, &mut rng).unwrap().density_matrix();
        let grid = PeriodicGrid::new(15).unwrap();
        let c = coefficient_map(&rho, &grid, AlphaConvention::Symmetric).unwrap();
        // odd grid: no point sits on the branch cut
        for l in -6i64..=6 {
            for j in 0..grid.len() {
                let mirrored = c.value(-l, grid.mirror(j));
                assert!((mirrored - c.value(l, j).conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn synthesis_round_trip() {
        let grid = PeriodicGrid::new(64).unwrap();
        let rho = oam_eigenstate(1, 4).unwrap().density_matrix();
        for conv in [AlphaConvention::Zero, AlphaConvention::Symmetric] {
            let w = wigner_from_coefficients(&coefficient_map(&rho, &grid, conv).unwrap()).unwrap();
            for l in -4i64..=4 {
                let expect = if l == 1 { 1.0 / TAU } else { 0.0 };
                assert!(w.row(l).iter().all(|v| (v - expect).abs() < 1e-10));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_pure_state(4, 4, &mut rng).unwrap().density_matrix();
        let direct = wigner_map(&rho, &grid).unwrap();
        for conv in [AlphaConvention::Zero, AlphaConvention::Symmetric] {
            let w = wigner_from_coefficients(&coefficient_map(&rho, &grid, conv).unwrap()).unwrap();
            assert!(w.max_abs_diff(&direct, 4) < 1e-8);
            let outer_gap = w.outer().iter().zip(direct.outer()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(outer_gap < 1e-8);
        }
        let zero = CoefficientMap::zeros(3, PeriodicGrid::new(16).unwrap(), AlphaConvention::Zero);
        let w = wigner_from_coefficients(&zero).unwrap();
        assert!(w.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn regauge_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_pure_state(2, 2, &mut rng).unwrap().density_matrix();
        let grid = PeriodicGrid::new(16).unwrap();
        let zero = coefficient_map(&rho, &grid, AlphaConvention::Zero).unwrap();
        let sym = coefficient_map(&rho, &grid, AlphaConvention::Symmetric).unwrap();
        assert!(zero.regauge(AlphaConvention::Symmetric).max_abs_diff(&sym) < 1e-15);
        assert!(sym.regauge(AlphaConvention::Zero).max_abs_diff(&zero) < 1e-15);
    }

    #[test]
    fn grid_must_resolve_truncation() {
        let rho = DensityMatrix::maximally_mixed(4);
        let grid = PeriodicGrid::new(17).unwrap();
        assert!(matches!(wigner_map(&rho, &grid), Err(Error::GridTooCoarse { .. })));
        assert!(matches!(
            coefficient_map(&rho, &grid, AlphaConvention::Zero),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn non_hermitian_input_is_flagged() {
        let mut m = DMatrix::from_diagonal_element(3, 3, C64::new(1.0 / 3.0, 0.0));
        m[(0, 1)] = C64::new(0.2, 0.0);
        let rho = DensityMatrix::from_entries(1, m).unwrap();
        let grid = PeriodicGrid::new(8).unwrap();
        assert!(matches!(wigner_map(&rho, &grid), Err(Error::ImaginaryResidue { .. })));
    }
}
