//! Free-rotor evolution, simulated angular measurements and linear inversion
//! of tomograms back to expansion coefficients and the Wigner function.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::conventions::{free_phase, tomogram_time, zero_gauge_coefficient};
use crate::numerics::{circle_integrate_real, fourier_coefficient_real, sinc, Angle, PeriodicGrid};
use crate::phase_space::{wigner_from_coefficients, AlphaConvention, CoefficientMap, WignerMap};
use crate::states::DensityMatrix;
use crate::{Error, Result, C64};

/// Most negative angular density accepted before it is floored at zero.
pub const NEGATIVE_DENSITY_TOL: f64 = 1e-8;

/// `U_t ρ U_t†` with `U_t = e^{-itL̂²/2}`.
pub fn free_evolve(rho: &DensityMatrix, t: f64) -> DensityMatrix {
    let l_max = rho.l_max();
    let entries = nalgebra::DMatrix::from_fn(rho.dim(), rho.dim(), |i, k| {
        let (m, n) = (i as i64 - l_max as i64, k as i64 - l_max as i64);
        rho.entries()[(i, k)] * free_phase(m, n, t)
    });
    DensityMatrix::from_entries(l_max, entries).expect("evolution preserves shape")
}

/// Evolution time `2π · num / den`, kept as a reduced fraction so that
/// coincident schedule entries collapse exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeKey {
    num: i64,
    den: i64,
}

impl TimeKey {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "time key with zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = den.signum();
        TimeKey { num: sign * num / g, den: sign * den / g }
    }

    /// Key of the tomogram read by coefficient cell `(l, φ_j)`.
    pub fn for_cell(l: i64, j: usize, grid: &PeriodicGrid) -> Self {
        // t = -φ_j / l = 2π (-j) / (n l)
        TimeKey::new(-(j as i64), grid.len() as i64 * l)
    }

    pub fn time(&self) -> f64 {
        TAU * self.num as f64 / self.den as f64
    }

    /// Recovers the key of a serialized time whose denominator divides
    /// `n_points · l` for some `1 ≤ l ≤ band`.
    pub fn recover(time: f64, n_points: usize, band: usize) -> Option<Self> {
        (1..=band as i64).find_map(|l| {
            let den = n_points as i64 * l;
            let num = (time * den as f64 / TAU).round() as i64;
            let key = TimeKey::new(num, den);
            ((key.time() - time).abs() <= 1e-12 * time.abs().max(1.0)).then_some(key)
        })
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Angular distribution `ω(φ_j, t)` after free evolution for time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tomogram {
    pub time: f64,
    pub grid: PeriodicGrid,
    /// Probability density samples; integrates to one on the grid.
    pub density: Vec<f64>,
    /// Shots behind an empirical density, `None` for the ideal distribution.
    pub shots: Option<u64>,
}

impl Tomogram {
    pub fn total_probability(&self) -> f64 {
        circle_integrate_real(&self.density)
    }

    /// Binomial standard error of each density sample, `None` for ideal data.
    pub fn sigma(&self) -> Option<Vec<f64>> {
        let shots = self.shots? as f64;
        let width = self.grid.spacing();
        Some(
            self.density
                .iter()
                .map(|d| {
                    let p = (d * width).clamp(0.0, 1.0);
                    (p * (1.0 - p) / shots).sqrt() / width
                })
                .collect(),
        )
    }
}

/// `ω(φ) = (1/2π) Σ_d e^{idφ} s_d` with `s_d = Σ_{m-n=d} ρ′_mn`; returns `s_d/2π`.
fn angular_spectrum(rho: &DensityMatrix, t: f64) -> Vec<C64> {
    let lm = rho.l_max() as i64;
    (-2 * lm..=2 * lm)
        .map(|d| {
            (-lm..=lm)
                .filter(|n| (n + d).abs() <= lm)
                .map(|n| rho.entry(n + d, n) * free_phase(n + d, n, t))
                .sum::<C64>()
                / TAU
        })
        .collect()
}

fn floor_density(values: Vec<f64>, grid: &PeriodicGrid) -> Result<Vec<f64>> {
    values
        .into_iter()
        .enumerate()
        .map(|(j, v)| {
            if v < -NEGATIVE_DENSITY_TOL {
                Err(Error::NegativeDensity { phi: grid.point(j), value: v })
            } else {
                Ok(v.max(0.0))
            }
        })
        .collect()
}

/// `ω(φ_j, t) = ⟨φ_j| U_t ρ U_t† |φ_j⟩`.
pub fn angular_distribution(rho: &DensityMatrix, t: f64, grid: &PeriodicGrid) -> Result<Tomogram> {
    grid.check_resolves(rho.l_max())?;
    let lm = rho.l_max() as i64;
    let spectrum = angular_spectrum(rho, t);
    let raw = (0..grid.len())
        .map(|j| {
            spectrum
                .iter()
                .zip(-2 * lm..=2 * lm)
                .map(|(s, d)| s * grid.mode(d, j))
                .sum::<C64>()
                .re
        })
        .collect();
    Ok(Tomogram { time: t, grid: *grid, density: floor_density(raw, grid)?, shots: None })
}

/// Probability of each detector wedge `[φ_j - Δ/2, φ_j + Δ/2)`.
fn wedge_probabilities(rho: &DensityMatrix, t: f64, grid: &PeriodicGrid) -> Result<Vec<f64>> {
    let lm = rho.l_max() as i64;
    let width = grid.spacing();
    let spectrum = angular_spectrum(rho, t);
    let raw = (0..grid.len())
        .map(|j| {
            width
                * spectrum
                    .iter()
                    .zip(-2 * lm..=2 * lm)
                    .map(|(s, d)| s * grid.mode(d, j) * sinc(d as f64 * width / 2.0))
                    .sum::<C64>()
                    .re
        })
        .collect();
    floor_density(raw, grid)
}

/// Multinomial draw by sequential conditional binomials.
fn multinomial(shots: u64, probabilities: &[f64], rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass: f64 = probabilities.iter().sum();
    let mut counts = Vec::with_capacity(probabilities.len());
    for (i, &p) in probabilities.iter().enumerate() {
        if i + 1 == probabilities.len() {
            counts.push(remaining);
            break;
        }
        let share = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = if remaining == 0 || share == 0.0 {
            0
        } else {
            Binomial::new(remaining, share).expect("valid binomial").sample(rng)
        };
        counts.push(k);
        remaining -= k;
        mass -= p;
    }
    counts
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Measurement bookkeeping carried with a tomogram set.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Provenance {
    pub seed: Option<u64>,
    /// Shots per evolution time; `None` for ideal distributions.
    pub shots: Option<u64>,
    /// Width of the detector wedges for binned data.
    pub wedge_width: Option<f64>,
}

/// Tomograms indexed by exact evolution time.
#[derive(Clone, Debug, PartialEq)]
pub struct TomogramSet {
    pub l_max: usize,
    /// Largest `|ℓ|` of the coefficient band the schedule covers.
    pub band: usize,
    pub grid: PeriodicGrid,
    pub provenance: Provenance,
    pub tomograms: BTreeMap<TimeKey, Tomogram>,
}

impl TomogramSet {
    pub fn empty(l_max: usize, grid: PeriodicGrid) -> Self {
        TomogramSet {
            l_max,
            band: 2 * l_max,
            grid,
            provenance: Provenance::default(),
            tomograms: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tomograms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tomograms.is_empty()
    }

    pub fn get(&self, key: &TimeKey) -> Option<&Tomogram> {
        self.tomograms.get(key)
    }

    /// Per-bin standard errors pooled over all tomograms: `(mean, max)`.
    pub fn sigma_summary(&self) -> Option<(f64, f64)> {
        let mut total = 0.0;
        let mut count = 0usize;
        let mut max = 0.0f64;
        for tomo in self.tomograms.values() {
            for s in tomo.sigma()? {
                total += s;
                count += 1;
                max = max.max(s);
            }
        }
        (count > 0).then(|| (total / count as f64, max))
    }
}

/// Deduplicated evolution times `t = φ_j/ℓ′` for `0 < |ℓ′| ≤ band`.
pub fn schedule(band: usize, grid: &PeriodicGrid) -> Vec<TimeKey> {
    let mut keys: Vec<TimeKey> = (1..=band as i64)
        .flat_map(|l| [l, -l])
        .flat_map(|l| (0..grid.len()).map(move |j| TimeKey::new(j as i64, grid.len() as i64 * l)))
        .collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Simulates every tomogram the inversion on `grid` needs for the band
/// `0 < |ℓ′| ≤ band`.
///
/// With `shots`, each evolution time gets an independent multinomial sample
/// over the grid wedges. Stream `0` of the seed is reserved for the OAM
/// channel; tomogram `i` of the sorted schedule uses stream `i + 1`.
pub fn simulate_tomogram_set(
    rho: &DensityMatrix,
    band: usize,
    grid: &PeriodicGrid,
    shots: Option<u64>,
    seed: Option<u64>,
) -> Result<TomogramSet> {
    grid.check_resolves(rho.l_max())?;
    if 2 * band >= grid.len() {
        return Err(Error::AliasRisk { n: band as i64, n_points: grid.len() });
    }
    let seed = match (shots, seed) {
        (Some(0), _) => return Err(Error::InvalidArgument("shots must be positive".into())),
        (Some(_), None) => return Err(Error::InvalidArgument("a seed is required when shots are set".into())),
        (_, s) => s,
    };
    let keys = schedule(band, grid);
    let tomograms: Vec<(TimeKey, Tomogram)> = keys
        .par_iter()
        .enumerate()
        .map(|(i, &key)| {
            let t = key.time();
            let tomo = match (shots, seed) {
                (Some(n), Some(seed)) => {
                    let probabilities = wedge_probabilities(rho, t, grid)?;
                    let mut rng = stream_rng(seed, i as u64 + 1);
                    let counts = multinomial(n, &probabilities, &mut rng);
                    let scale = 1.0 / (n as f64 * grid.spacing());
                    Tomogram {
                        time: t,
                        grid: *grid,
                        density: counts.iter().map(|&c| c as f64 * scale).collect(),
                        shots: Some(n),
                    }
                }
                _ => angular_distribution(rho, t, grid)?,
            };
            Ok((key, tomo))
        })
        .collect::<Result<_>>()?;
    Ok(TomogramSet {
        l_max: rho.l_max(),
        band,
        grid: *grid,
        provenance: Provenance { seed, shots, wedge_width: shots.map(|_| grid.spacing()) },
        tomograms: tomograms.into_iter().collect(),
    })
}

/// Populations `⟨ℓ|ρ|ℓ⟩` from the OAM-basis measurement channel.
#[derive(Clone, Debug, PartialEq)]
pub struct OamHistogram {
    pub l_max: usize,
    pub probabilities: Vec<f64>,
    pub shots: Option<u64>,
}

impl OamHistogram {
    pub fn from_probabilities(probabilities: Vec<f64>, shots: Option<u64>) -> Result<Self> {
        if probabilities.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument("OAM histogram needs 2L+1 entries".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("OAM probabilities must be nonnegative and sum to 1, got {total}")));
        }
        Ok(OamHistogram { l_max: probabilities.len() / 2, probabilities, shots })
    }

    pub fn probability(&self, l: i64) -> f64 {
        self.probabilities[crate::conventions::index_of(l, self.l_max)]
    }

    /// Binomial standard error per level, `None` for ideal data.
    pub fn sigma(&self) -> Option<Vec<f64>> {
        let n = self.shots? as f64;
        Some(self.probabilities.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect())
    }
}

/// Exact populations, or a multinomial sample of them with `shots`.
pub fn measure_oam(rho: &DensityMatrix, shots: Option<u64>, seed: Option<u64>) -> Result<OamHistogram> {
    let exact: Vec<f64> = rho.populations().into_iter().map(|p| p.max(0.0)).collect();
    let total: f64 = exact.iter().sum();
    let exact: Vec<f64> = exact.into_iter().map(|p| p / total).collect();
    match (shots, seed) {
        (None, _) => OamHistogram::from_probabilities(exact, None),
        (Some(0), _) => Err(Error::InvalidArgument("shots must be positive".into())),
        (Some(_), None) => Err(Error::InvalidArgument("a seed is required when shots are set".into())),
        (Some(n), Some(seed)) => {
            let counts = multinomial(n, &exact, &mut stream_rng(seed, 0));
            let freq = counts.iter().map(|&c| c as f64 / n as f64).collect();
            OamHistogram::from_probabilities(freq, Some(n))
        }
    }
}

/// Linear inversion of the tomograms to `ρ_α(ℓ, φ_j)` on `|ℓ| ≤ band`.
///
/// Row `ℓ = 0` comes from the OAM histogram; every other cell from the
/// `ℓ`-th Fourier mode of the tomogram at `t = -φ_j/ℓ` (see
/// [`crate::conventions`]). Binned data are divided by the wedge transfer
/// factor `sinc(ℓΔ/2)`. Finally each pair of cells related by Hermiticity,
/// `ρ₀(ℓ, φ) = e^{-iℓφ} ρ₀(-ℓ, -φ)*`, is averaged; for ideal data this is a
/// no-op, for noisy data it keeps the Wigner function real.
pub fn reconstruct_coefficients(
    set: &TomogramSet,
    oam: &OamHistogram,
    conv: AlphaConvention,
) -> Result<CoefficientMap> {
    let grid = set.grid;
    let band = set.band as i64;
    grid.check_resolves(set.l_max)?;
    if oam.l_max != set.l_max {
        return Err(Error::InvalidArgument(format!(
            "OAM histogram covers l_max = {} but tomograms were taken at l_max = {}",
            oam.l_max, set.l_max
        )));
    }
    if set.is_empty() {
        return Err(Error::MissingTomogram { l: if band > 0 { 1 } else { 0 }, phi: 0.0 });
    }
    let n = grid.len();

    let zero_gauge: Vec<Vec<C64>> = (-band..=band)
        .into_par_iter()
        .map(|l| {
            if l == 0 {
                let lm = oam.l_max as i64;
                return Ok((0..n)
                    .map(|j| {
                        (-lm..=lm)
                            .map(|k| grid.mode(k, j) * oam.probability(k))
                            .sum::<C64>()
                            / TAU
                    })
                    .collect());
            }
            let transfer = set.provenance.wedge_width.map_or(1.0, |w| sinc(l as f64 * w / 2.0));
            (0..n)
                .map(|j| {
                    let key = TimeKey::for_cell(l, j, &grid);
                    let tomo = set.get(&key).ok_or(Error::MissingTomogram { l, phi: grid.point(j) })?;
                    debug_assert!((tomo.time - tomogram_time(l, grid.point(j))).abs() < 1e-9);
                    let mode = fourier_coefficient_real(&tomo.density, l)? / transfer;
                    Ok(zero_gauge_coefficient(l, grid.point(j), mode))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let row = |l: i64| &zero_gauge[(l + band) as usize];
    let values = (-band..=band)
        .flat_map(|l| {
            let row = &row;
            (0..n).map(move |j| {
                let direct = row(l)[j];
                let partner = row(-l)[grid.mirror(j)].conj() * grid.mode(-l, j);
                let phi = Angle::new(grid.point(j));
                (direct + partner) / 2.0 * conv.phase(l, phi).conj()
            })
        })
        .collect();
    CoefficientMap::from_parts(set.l_max, set.band, grid, conv, values)
}

/// Reconstructed Wigner function: the inverted coefficients synthesized with
/// the kernel matching their gauge.
pub fn reconstruct_wigner(set: &TomogramSet, oam: &OamHistogram, conv: AlphaConvention) -> Result<WignerMap> {
    wigner_from_coefficients(&reconstruct_coefficients(set, oam, conv)?)
}
