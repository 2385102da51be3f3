//! Special functions and quadrature on the circle.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// An angle reduced into `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(radians: f64) -> Self {
        let r = radians.rem_euclid(TAU);
        // rem_euclid rounds tiny negative inputs up to exactly 2π
        Angle(if r >= TAU { 0.0 } else { r })
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Representative in `[-π, π)`.
    pub fn centered(self) -> f64 {
        if self.0 >= PI {
            self.0 - TAU
        } else {
            self.0
        }
    }

    /// Periodic comparison: distance on the circle below `tol`.
    pub fn approx_eq(self, other: Angle, tol: f64) -> bool {
        let d = (self.0 - other.0).abs();
        d.min(TAU - d) < tol
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle::new(v)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl std::ops::Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle::new(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle::new(self.0 - rhs.0)
    }
}

impl std::ops::Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle::new(-self.0)
    }
}

/// Uniform grid `φ_j = 2πj/n`, `j = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    n_points: usize,
}

impl PeriodicGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidArgument("grid needs at least one point".into()));
        }
        Ok(PeriodicGrid { n_points })
    }

    /// Grid that resolves spectra of width `2 l_max`, i.e. `n ≥ 4 l_max + 2`.
    pub fn for_truncation(n_points: usize, l_max: usize) -> Result<Self> {
        let grid = Self::new(n_points)?;
        grid.check_resolves(l_max)?;
        Ok(grid)
    }

    pub fn check_resolves(&self, l_max: usize) -> Result<()> {
        let required = min_points(l_max);
        if self.n_points < required {
            return Err(Error::GridTooCoarse { n_points: self.n_points, l_max, required });
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        TAU / self.n_points as f64
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_points as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.point(j))
    }

    /// Index of the grid point `-φ_j`.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        (self.n_points - j % self.n_points) % self.n_points
    }

    /// `e^{i k φ_j}` with the phase reduced in integer arithmetic first.
    #[inline]
    pub fn mode(&self, k: i64, j: usize) -> C64 {
        let n = self.n_points as i64;
        let r = (k * j as i64).rem_euclid(n);
        C64::from_polar(1.0, TAU * r as f64 / n as f64)
    }

    /// Largest `|n|` that [`fourier_coefficient`] accepts on this grid.
    #[inline]
    pub fn max_frequency(&self) -> i64 {
        (self.n_points as i64 - 1) / 2
    }
}

/// Smallest grid resolving a density matrix of half width `l_max`.
pub fn min_points(l_max: usize) -> usize {
    4 * l_max + 2
}

const THETA_MAX_TERMS: u32 = 64;
const THETA_REL_TOL: f64 = 1e-15;

/// Third Jacobi theta function `θ₃(z, q) = Σ_{n∈ℤ} q^{n²} e^{2inz}` with nome `q`.
///
/// Terms are paired as `n` and `-n`. Summation stops once both members of the
/// next pair are past the peak of the Gaussian envelope and below `1e-15`
/// times the partial sum.
pub fn theta3(z: C64, q: f64) -> Result<C64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("theta3 nome must lie in (0, 1), got {q}")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("theta3 argument must be finite, got {z}")));
    }
    let log_q = q.ln();
    // term magnitude exp(n² ln q ∓ 2n Im z) peaks at n = |Im z| / (-ln q)
    let peak = z.im.abs() / -log_q;
    let mut sum = C64::new(1.0, 0.0);
    for n in 1..=THETA_MAX_TERMS {
        let nf = n as f64;
        let base = nf * nf * log_q;
        let up = C64::from_polar((base - 2.0 * nf * z.im).exp(), 2.0 * nf * z.re);
        let down = C64::from_polar((base + 2.0 * nf * z.im).exp(), -2.0 * nf * z.re);
        sum += up + down;
        let largest = up.norm().max(down.norm());
        if nf > peak && (largest <= THETA_REL_TOL * sum.norm() || largest == 0.0) {
            return Ok(sum);
        }
    }
    Err(Error::NonconvergentTheta { z, q })
}

/// Truncated periodic delta `(1/2π) Σ_{|n|≤l_max} e^{inφ}`.
pub fn dirichlet_delta(phi: Angle, l_max: usize) -> f64 {
    let order = (2 * l_max + 1) as f64;
    let half = phi.value() / 2.0;
    let s = half.sin();
    if s.abs() < 1e-12 {
        // φ → 0 (or 2π): every term equals one
        return order / TAU;
    }
    (order * half).sin() / (TAU * s)
}

/// Rectangle rule `(2π/n) Σ_j f(φ_j)` on the periodic grid the samples live on.
pub fn circle_integrate(samples: &[C64]) -> C64 {
    if samples.is_empty() {
        return C64::new(0.0, 0.0);
    }
    let total: C64 = samples.iter().sum();
    total * (TAU / samples.len() as f64)
}

pub fn circle_integrate_real(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().sum::<f64>() * TAU / samples.len() as f64
}

/// `(1/2π) ∫ f(φ) e^{-inφ} dφ` from grid samples.
pub fn fourier_coefficient(samples: &[C64], n: i64) -> Result<C64> {
    let grid = PeriodicGrid::new(samples.len())?;
    check_alias(&grid, n)?;
    let acc: C64 = samples
        .iter()
        .enumerate()
        .map(|(j, s)| s * grid.mode(-n, j))
        .sum();
    Ok(acc / samples.len() as f64)
}

/// Real-sample variant of [`fourier_coefficient`].
pub fn fourier_coefficient_real(samples: &[f64], n: i64) -> Result<C64> {
    let grid = PeriodicGrid::new(samples.len())?;
    check_alias(&grid, n)?;
    let acc: C64 = samples
        .iter()
        .enumerate()
        .map(|(j, &s)| grid.mode(-n, j) * s)
        .sum();
    Ok(acc / samples.len() as f64)
}

fn check_alias(grid: &PeriodicGrid, n: i64) -> Result<()> {
    // |n| < n_points / 2
    if 2 * n.unsigned_abs() >= grid.len() as u64 {
        return Err(Error::AliasRisk { n, n_points: grid.len() });
    }
    Ok(())
}

/// `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `∫_{-π}^{π} e^{iaφ} dφ` for `a = doubled / 2`, integer or half-integer.
pub fn centered_mode_integral(doubled: i64) -> f64 {
    if doubled == 0 {
        TAU
    } else if doubled % 2 == 0 {
        0.0
    } else {
        // 2 sin(πa)/a with sin(πa) = (-1)^((doubled-1)/2)
        let sign = if (doubled - 1).div_euclid(2) % 2 == 0 { 1.0 } else { -1.0 };
        4.0 * sign / doubled as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const THETA3_0_INV_E: f64 = 1.772_637_204_826_652;

    #[test]
    fn angle_reduction() {
        assert_eq!(Angle::new(TAU).value(), 0.0);
        assert_eq!(Angle::new(-1e-20).value(), 0.0);
        assert!((Angle::new(-PI / 2.0).value() - 1.5 * PI).abs() < 1e-15);
        assert!((Angle::new(1e6).value() - 1e6f64.rem_euclid(TAU)).abs() < 1e-9);
        assert!(Angle::new(1e-13).approx_eq(Angle::new(TAU - 1e-13), 1e-12));
        assert_eq!(Angle::new(PI).centered(), -PI);
        assert!((Angle::new(3.0).centered() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn theta3_small_nome_is_one() {
        let v = theta3(C64::new(0.0, 0.0), 1e-300).unwrap();
        assert_eq!(v, C64::new(1.0, 0.0));
    }

    #[test]
    fn theta3_at_inverse_e() {
        let v = theta3(C64::new(0.0, 0.0), (-1.0f64).exp()).unwrap();
        assert!((v.re - THETA3_0_INV_E).abs() < 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn theta3_reference_values() {
        // 40-digit values
        let q = (-1.0f64).exp();
        let v = theta3(C64::new(0.3, 0.0), q).unwrap();
        assert!((v.re - 1.620_465_393_217_829_2).abs() < 1e-14);
        let v = theta3(C64::new(0.3, 0.2), (-0.5f64).exp()).unwrap();
        assert!((v - C64::new(2.203_082_802_923_710_4, -0.539_131_000_154_186_7)).norm() < 1e-14);
        let v = theta3(C64::new(0.0, 0.0), (-2.0f64).exp()).unwrap();
        assert!((v.re - 1.271_341_522_189_015_2).abs() < 1e-14);
    }

    #[test]
    fn theta3_is_even() {
        let q = (-1.0f64).exp();
        let a = theta3(C64::new(0.3, 0.0), q).unwrap();
        let b = theta3(C64::new(-0.3, 0.0), q).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn theta3_rejects_bad_nome_and_slow_series() {
        assert!(matches!(theta3(C64::new(0.0, 0.0), 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(theta3(C64::new(0.0, 0.0), 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            theta3(C64::new(0.0, 0.0), 0.9999),
            Err(Error::NonconvergentTheta { .. })
        ));
    }

    #[test]
    fn dirichlet_examples() {
        assert!((dirichlet_delta(Angle::ZERO, 4) - 9.0 / TAU).abs() < 1e-15);
        for phi in [0.0, 0.4, 2.0, 5.9] {
            assert!((dirichlet_delta(Angle::new(phi), 0) - 1.0 / TAU).abs() < 1e-15);
        }
        let grid = PeriodicGrid::new(256).unwrap();
        let samples: Vec<f64> = grid.points().map(|p| dirichlet_delta(Angle::new(p), 4)).collect();
        assert!((circle_integrate_real(&samples) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_matches_direct_sum() {
        for phi in [1e-13, 1e-7, 0.3, PI, 4.0] {
            let direct: f64 = (-5..=5i64).map(|n| (n as f64 * phi).cos()).sum::<f64>() / TAU;
            assert!((dirichlet_delta(Angle::new(phi), 5) - direct).abs() < 1e-12, "phi = {phi}");
        }
    }

    #[test]
    fn circle_integrate_examples() {
        let g8 = PeriodicGrid::new(8).unwrap();
        let ones = vec![C64::new(1.0, 0.0); 8];
        assert!((circle_integrate(&ones) - C64::new(TAU, 0.0)).norm() < 1e-15);
        let e1: Vec<C64> = (0..8).map(|j| g8.mode(1, j)).collect();
        assert!(circle_integrate(&e1).norm() < 1e-14);
        let g16 = PeriodicGrid::new(16).unwrap();
        let cos2: Vec<C64> = g16.points().map(|p| C64::new(p.cos().powi(2), 0.0)).collect();
        assert!((circle_integrate(&cos2) - C64::new(PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fourier_coefficient_examples() {
        let g = PeriodicGrid::new(32).unwrap();
        let f: Vec<C64> = g.points().map(|p| C64::from_polar(1.0, 3.0 * p)).collect();
        assert!((fourier_coefficient(&f, 3).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(fourier_coefficient(&f, 2).unwrap().norm() < 1e-14);
        let flat = vec![C64::new(1.0 / TAU, 0.0); 32];
        assert!((fourier_coefficient(&flat, 0).unwrap().re - 1.0 / TAU).abs() < 1e-16);
        assert!(matches!(fourier_coefficient(&f, 16), Err(Error::AliasRisk { n: 16, n_points: 32 })));
        assert!(matches!(fourier_coefficient(&f, -16), Err(Error::AliasRisk { .. })));
        assert!(fourier_coefficient(&f, 15).is_ok());
    }

    #[test]
    fn centered_mode_integral_matches_closed_form() {
        for doubled in -9i64..=9 {
            let a = doubled as f64 / 2.0;
            let expect = if doubled == 0 { TAU } else { 2.0 * (PI * a).sin() / a };
            assert!((centered_mode_integral(doubled) - expect).abs() < 1e-14, "a = {a}");
        }
    }

    #[test]
    fn grid_resolution_check() {
        assert!(PeriodicGrid::for_truncation(18, 4).is_ok());
        assert!(matches!(
            PeriodicGrid::for_truncation(17, 4),
            Err(Error::GridTooCoarse { required: 18, .. })
        ));
        assert!(PeriodicGrid::new(0).is_err());
        let g = PeriodicGrid::new(10).unwrap();
        assert_eq!(g.mirror(0), 0);
        assert_eq!(g.mirror(3), 7);
    }

    // independent route: magnitudes from exp(n² ln q) directly, compensated summation
    // returns (sum, Σ|terms|); the latter bounds the attainable absolute accuracy
    fn theta3_compensated(z: C64, q: f64) -> (C64, f64) {
        let mut sum = C64::new(0.0, 0.0);
        let mut comp = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for n in -200i64..=200 {
            let term = (C64::new((n * n) as f64 * q.ln(), 0.0) + C64::new(0.0, 2.0 * n as f64) * z).exp();
            scale += term.norm();
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        (sum, scale)
    }

    proptest! {
        #[test]
        fn theta3_matches_compensated_series(re in -PI..PI, im in -1.0f64..1.0, q in 0.05f64..0.8) {
            let z = C64::new(re, im * -q.ln() * 0.9);
            let fast = theta3(z, q).unwrap();
            let (slow, scale) = theta3_compensated(z, q);
            prop_assert!((fast - slow).norm() <= 1e-14 * scale, "{fast} vs {slow}");
        }

        #[test]
        fn dirichlet_integrates_to_one(l_max in 0usize..20, extra in 1usize..40) {
            let grid = PeriodicGrid::new(2 * l_max + 1 + extra).unwrap();
            let samples: Vec<f64> = grid.points().map(|p| dirichlet_delta(Angle::new(p), l_max)).collect();
            prop_assert!((circle_integrate_real(&samples) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn mode_orthogonality(n_points in 4usize..64, m_raw in 0i64..64, n_raw in 0i64..64) {
            let grid = PeriodicGrid::new(n_points).unwrap();
            let kmax = grid.max_frequency();
            let m = m_raw % (2 * kmax + 1) - kmax;
            let n = n_raw % (2 * kmax + 1) - kmax;
            let samples: Vec<C64> = (0..n_points).map(|j| grid.mode(m, j) * grid.mode(-n, j)).collect();
            let expect = if m == n { TAU } else { 0.0 };
            prop_assert!((circle_integrate(&samples) - C64::new(expect, 0.0)).norm() < 1e-12);
        }
    }
}
