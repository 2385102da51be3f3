//! Truncated quantum states in the OAM basis.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::conventions::{angle_overlap, charge_at, index_of};
use crate::numerics::{sinc, theta3, Angle};
use crate::{Error, Result, C64};

/// Largest norm a truncated coherent state may discard.
pub const MAX_COHERENT_LEAKAGE: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-10;

/// Pure state `Σ c_ℓ |ℓ⟩` with `ℓ ∈ [-L, L]`, normalized after truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    l_max: usize,
    amplitudes: Vec<C64>,
    /// Norm the untruncated state carried outside `[-L, L]`.
    leakage: f64,
}

impl PureState {
    /// Normalizes `amplitudes` (length `2L+1`) and records `leakage`.
    pub fn from_amplitudes(l_max: usize, amplitudes: Vec<C64>, leakage: f64) -> Result<Self> {
        if amplitudes.len() != 2 * l_max + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes for l_max = {l_max}, got {}",
                2 * l_max + 1,
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidArgument("state has zero or non-finite norm".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|c| c / norm).collect();
        Ok(PureState { l_max, amplitudes, leakage })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// `c_ℓ`, zero outside the truncation.
    pub fn amplitude(&self, l: i64) -> C64 {
        if l.unsigned_abs() as usize > self.l_max {
            C64::new(0.0, 0.0)
        } else {
            self.amplitudes[index_of(l, self.l_max)]
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn charges(&self) -> impl Iterator<Item = i64> {
        let l = self.l_max as i64;
        -l..=l
    }

    /// `⟨φ|ψ⟩` by Fourier synthesis.
    pub fn angular_wavefunction(&self, phi: f64) -> C64 {
        self.charges().map(|l| self.amplitude(l) * angle_overlap(l, phi)).sum()
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amplitudes);
        DensityMatrix { l_max: self.l_max, entries: &v * v.adjoint() }
    }
}

/// Density matrix on `[-L, L]`, entry `(m, n)` at `(m + L, n + L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    l_max: usize,
    entries: DMatrix<C64>,
}

/// Outcome of [`DensityMatrix::validate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

impl DensityMatrix {
    /// Wraps a square matrix of size `2L+1`. Physical validity is not checked
    /// here; see [`validate`](Self::validate).
    pub fn from_entries(l_max: usize, entries: DMatrix<C64>) -> Result<Self> {
        let dim = 2 * l_max + 1;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::InvalidArgument(format!(
                "density matrix for l_max = {l_max} must be {dim}x{dim}, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("density matrix has non-finite entries".into()));
        }
        Ok(DensityMatrix { l_max, entries })
    }

    pub fn maximally_mixed(l_max: usize) -> Self {
        let dim = 2 * l_max + 1;
        let entries = DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        DensityMatrix { l_max, entries }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn dim(&self) -> usize {
        2 * self.l_max + 1
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// `⟨m|ρ|n⟩`, zero outside the truncation.
    pub fn entry(&self, m: i64, n: i64) -> C64 {
        let l = self.l_max as i64;
        if m.abs() > l || n.abs() > l {
            return C64::new(0.0, 0.0);
        }
        self.entries[(index_of(m, self.l_max), index_of(n, self.l_max))]
    }

    pub fn charges(&self) -> impl Iterator<Item = i64> {
        let l = self.l_max as i64;
        -l..=l
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Populations `⟨ℓ|ρ|ℓ⟩` ordered by charge.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    /// `⟨φ|ρ|φ⟩`.
    pub fn angular_density(&self, phi: f64) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, m) in self.charges().enumerate() {
            for (k, n) in self.charges().enumerate() {
                acc += angle_overlap(m, phi) * self.entries[(i, k)] * angle_overlap(n, phi).conj();
            }
        }
        acc.re
    }

    /// Applies a unitary `u` (same dimension): `u ρ u†`.
    pub fn conjugate_by(&self, u: &DMatrix<C64>) -> DensityMatrix {
        DensityMatrix { l_max: self.l_max, entries: u * &self.entries * u.adjoint() }
    }

    pub fn validate(&self) -> ValidationReport {
        let hermiticity_defect = (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let trace_defect = (self.trace() - C64::new(1.0, 0.0)).norm();
        // eigenvalues of the Hermitian part
        let herm = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        let min_eigenvalue = herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        let passed = hermiticity_defect < HERMITIAN_TOL && trace_defect < TRACE_TOL && min_eigenvalue >= -EIGEN_TOL;
        ValidationReport { hermiticity_defect, trace_defect, min_eigenvalue, passed }
    }
}

fn check_charge(l: i64, l_max: usize) -> Result<()> {
    if l.unsigned_abs() as usize > l_max {
        return Err(Error::OutOfTruncation { l, l_max });
    }
    Ok(())
}

/// `|ℓ₀⟩`.
pub fn oam_eigenstate(l0: i64, l_max: usize) -> Result<PureState> {
    check_charge(l0, l_max)?;
    let mut amplitudes = vec![C64::new(0.0, 0.0); 2 * l_max + 1];
    amplitudes[index_of(l0, l_max)] = C64::new(1.0, 0.0);
    PureState::from_amplitudes(l_max, amplitudes, 0.0)
}

/// Nome of the OAM profile of a cylinder coherent state: `|c_ℓ|² ∝ q^{(ℓ-ℓ₀)²}`.
pub fn coherent_nome() -> f64 {
    (-1.0f64).exp()
}

/// Cylinder coherent state `|ℓ₀, φ₀⟩` with
/// `c_ℓ = e^{-iℓφ₀} e^{-(ℓ-ℓ₀)²/2} / √θ₃(0, e⁻¹)`.
pub fn coherent_state(l0: i64, phi0: Angle, l_max: usize) -> Result<PureState> {
    check_charge(l0, l_max)?;
    let norm = theta3(C64::new(0.0, 0.0), coherent_nome())?.re;
    let weight = |l: i64| (-((l - l0) as f64).powi(2) / 2.0).exp() / norm.sqrt();
    let lm = l_max as i64;
    let amplitudes: Vec<C64> = (-lm..=lm)
        .map(|l| C64::from_polar(weight(l), -(l as f64) * phi0.value()))
        .collect();
    // tail mass beyond the truncation, summed outward until it underflows
    let mut leakage = 0.0;
    for d in 1.. {
        let w = weight(lm + d).powi(2) + weight(-lm - d).powi(2);
        leakage += w;
        if w < 1e-30 * leakage.max(f64::MIN_POSITIVE) || w == 0.0 {
            break;
        }
    }
    if leakage >= MAX_COHERENT_LEAKAGE {
        return Err(Error::ExcessLeakage { leakage });
    }
    PureState::from_amplitudes(l_max, amplitudes, leakage)
}

/// Angular wavefunction of `|ℓ₀, φ₀⟩` written through θ₃:
/// `e^{iℓ₀(φ-φ₀)} θ₃((φ-φ₀)/2, e^{-1/2}) / √(2π θ₃(0, e⁻¹))`.
pub fn coherent_angular_wavefunction(l0: i64, phi0: Angle, phi: f64) -> Result<C64> {
    let delta = phi - phi0.value();
    let norm = theta3(C64::new(0.0, 0.0), coherent_nome())?.re;
    let profile = theta3(C64::new(delta / 2.0, 0.0), (-0.5f64).exp())?;
    Ok(C64::from_polar(1.0, l0 as f64 * delta) * profile / (TAU * norm).sqrt())
}

/// `(|ℓ₀⟩ + e^{iφ₀}|-ℓ₀⟩)/√2`.
pub fn superposition_state(l0: i64, phi0: Angle, l_max: usize) -> Result<PureState> {
    if l0 <= 0 {
        return Err(Error::InvalidArgument(format!("superposition needs l0 > 0, got {l0}")));
    }
    check_charge(l0, l_max)?;
    let mut amplitudes = vec![C64::new(0.0, 0.0); 2 * l_max + 1];
    amplitudes[index_of(l0, l_max)] = C64::new(1.0, 0.0);
    amplitudes[index_of(-l0, l_max)] = C64::from_polar(1.0, phi0.value());
    PureState::from_amplitudes(l_max, amplitudes, 0.0)
}

/// Smallest wedge resolvable at truncation `l_max`.
pub fn min_wedge_width(l_max: usize) -> f64 {
    TAU / (2 * l_max + 1) as f64
}

/// Top-hat angular wavefunction `1/√w` on `|φ - φ₀| < w/2`, truncated to
/// `[-L, L]`: `c_ℓ = √(w/2π) e^{-iℓφ₀} sinc(ℓw/2)`.
pub fn wedge_state(phi0: Angle, width: f64, l_max: usize) -> Result<PureState> {
    let min_width = min_wedge_width(l_max);
    if !(width.is_finite() && width > 0.0 && width <= TAU) {
        return Err(Error::InvalidArgument(format!("wedge width must lie in (0, 2π], got {width}")));
    }
    if width < min_width {
        return Err(Error::UnresolvableWedge { width, min_width });
    }
    let lm = l_max as i64;
    let scale = (width / TAU).sqrt();
    let amplitudes: Vec<C64> = (-lm..=lm)
        .map(|l| C64::from_polar(scale * sinc(l as f64 * width / 2.0), -(l as f64) * phi0.value()))
        .collect();
    let kept: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
    PureState::from_amplitudes(l_max, amplitudes, (1.0 - kept).max(0.0))
}

/// Haar-like random pure state supported on `|ℓ| ≤ support`.
pub fn random_pure_state<R: Rng + ?Sized>(support: usize, l_max: usize, rng: &mut R) -> Result<PureState> {
    if support > l_max {
        return Err(Error::OutOfTruncation { l: support as i64, l_max });
    }
    let s = support as i64;
    let amplitudes = (0..2 * l_max + 1)
        .map(|i| {
            let l = charge_at(i, l_max);
            if l.abs() <= s {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    PureState::from_amplitudes(l_max, amplitudes, 0.0)
}

/// Full-rank random density matrix `G G† / Tr` on `|ℓ| ≤ support`, `G` Ginibre.
pub fn random_density_matrix<R: Rng + ?Sized>(support: usize, l_max: usize, rng: &mut R) -> Result<DensityMatrix> {
    if support > l_max {
        return Err(Error::OutOfTruncation { l: support as i64, l_max });
    }
    let dim = 2 * l_max + 1;
    let s = support as i64;
    let inside = |i: usize| charge_at(i, l_max).abs() <= s;
    let g = DMatrix::from_fn(dim, dim, |i, k| {
        if inside(i) && inside(k) {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    // exact Hermitian symmetrization
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::from_entries(l_max, rho)
}
