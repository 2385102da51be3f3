//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use vortex_wigner::numerics::Angle;
use vortex_wigner::phase_space::{displacement_matrix, AlphaConvention};
use vortex_wigner::states::DensityMatrix;
use vortex_wigner::C64;

/// θ₃(0, e⁻¹) = 1.772637204826652153… (mpmath), rounded to `f64`.
pub const THETA3_0_EXP_M1: f64 = 1.772_637_204_826_652;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss–Legendre rule on `[a, b]`: `panels` panels of `order` nodes.
pub fn composite_gl(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + p as f64 * h;
            base.iter().map(move |&(x, w)| (lo + (x + 1.0) * h / 2.0, w * h / 2.0))
        })
        .collect()
}

/// The 512-point `φ′` rule used by the kernel oracle.
pub fn angle_rule() -> Vec<(f64, f64)> {
    composite_gl(-PI, PI, 64, 8)
}

/// Kernel as a numerical double Fourier transform of the symmetric-gauge
/// displacement operators over `φ′ ∈ [-π, π)`.
pub struct NumericalKernel {
    l_max: usize,
    /// `m[(ℓ + L)][(ℓ′ + 2L)] = ∫ e^{iℓφ′} D(ℓ′, φ′) dφ′`.
    m: Vec<Vec<DMatrix<C64>>>,
}

impl NumericalKernel {
    pub fn new(l_max: usize) -> Self {
        let rule = angle_rule();
        let (l, band) = (l_max as i64, 2 * l_max as i64);
        let dim = 2 * l_max + 1;
        let mut m = vec![vec![DMatrix::<C64>::zeros(dim, dim); (2 * band + 1) as usize]; dim];
        for &(phi, w) in &rule {
            for lp in -band..=band {
                let d = displacement_matrix(lp, Angle::new(phi), l_max, AlphaConvention::Symmetric);
                for ell in -l..=l {
                    let f = C64::from_polar(w, ell as f64 * phi);
                    m[(ell + l) as usize][(lp + band) as usize] += &d * f;
                }
            }
        }
        NumericalKernel { l_max, m }
    }

    pub fn kernel(&self, ell: i64, phi: f64) -> DMatrix<C64> {
        let band = 2 * self.l_max as i64;
        let dim = 2 * self.l_max + 1;
        let mut out = DMatrix::<C64>::zeros(dim, dim);
        for lp in -band..=band {
            let f = C64::from_polar(1.0 / (TAU * TAU), -(lp as f64) * phi);
            out += &self.m[(ell + self.l_max as i64) as usize][(lp + band) as usize] * f;
        }
        out
    }
}

/// `⟨φ|ρ|φ⟩ = (1/2π) Σ_{mn} ρ_mn e^{i(m-n)φ}`.
pub fn angle_density(rho: &DensityMatrix, phi: f64) -> f64 {
    let l = rho.l_max() as i64;
    let mut s = C64::new(0.0, 0.0);
    for m in -l..=l {
        for n in -l..=l {
            s += rho.entries()[((m + l) as usize, (n + l) as usize)] * C64::from_polar(1.0, (m - n) as f64 * phi);
        }
    }
    s.re / TAU
}

/// `θ₃(0, e⁻¹) = 1 + 2 Σ_{n≥1} e^{-n²}` in fixed point with `digits` decimals.
pub fn theta3_origin_exp_m1(digits: u32) -> f64 {
    let guard = digits + 10;
    let one = BigInt::from(10).pow(guard);
    // e⁻¹ = Σ (-1)^k / k!
    let mut e_inv = BigInt::from(0);
    let mut term = one.clone();
    let mut k = 0u32;
    while term != BigInt::from(0) {
        if k.is_multiple_of(2) {
            e_inv += &term;
        } else {
            e_inv -= &term;
        }
        k += 1;
        term /= k;
    }
    let mut sum = one.clone();
    // e^{-n²} = e^{-(n-1)²} · e^{-(2n-1)}
    let mut prev = one.clone();
    let mut odd = e_inv.clone(); // e^{-(2n-1)}, starting at n = 1
    let e_inv2 = &e_inv * &e_inv / &one;
    for _ in 1..40 {
        let cur = &prev * &odd / &one;
        if cur == BigInt::from(0) {
            break;
        }
        sum += &cur * 2;
        prev = cur;
        odd = &odd * &e_inv2 / &one;
    }
    // integer part is a single digit
    let text = sum.to_string();
    format!("{}.{}", &text[..1], &text[1..]).parse().unwrap()
}
