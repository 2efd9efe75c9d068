//! Monte Carlo ensembles: seeded sampling, trajectory evolution, empirical
//! contraction histograms and ratio fits, attractor classification, basin
//! rasters and basin-measure estimates.
//!
//! Reproducibility contract: sample index `i` draws from its own ChaCha
//! stream derived from `(seed, i)`, and every aggregation is an integer
//! reduction (bin counts, class counts), which is associative and
//! order-insensitive. Identical inputs therefore produce bit-identical
//! results for any rayon worker count, and for the sequential fallback
//! compiled when the `parallel` feature is disabled. The `*_seq` variants
//! of the heavy operations are always available for comparison.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::analysis::{cdcd_attractor, fixed_points, invariant_rectangles, CdcdLines, Rectangle};
use crate::error::Error;
use crate::map::{apply_l, net_contraction_count, MapKind, Params, Point, Region};
use crate::measure::{steady_state_mean_contraction, LambdaHistogram};

/// Default iteration budget for attractor classification.
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Default sup-norm capture tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default per-bin count threshold for ratio fits.
pub const DEFAULT_MIN_COUNT: u64 = 10;

/// Initial distributions over the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Uniform,
    /// Density proportional to `x^a * y^b` with `a, b >= 0`.
    Power { a: f64, b: f64 },
    /// Isotropic Gaussian at `(cx, cy)` with standard deviation `s`,
    /// redrawn until the sample lands inside the unit square.
    GaussianClipped { cx: f64, cy: f64, s: f64 },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            DistributionSpec::Uniform => Ok(()),
            DistributionSpec::Power { a, b } => {
                if a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "power exponents must be finite and nonnegative, got ({a}, {b})"
                    )))
                }
            }
            DistributionSpec::GaussianClipped { cx, cy, s } => {
                if (0.0..=1.0).contains(&cx)
                    && (0.0..=1.0).contains(&cy)
                    && s.is_finite()
                    && s > 0.0
                    && s <= 10.0
                {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "gaussian center must lie in the unit square and 0 < s <= 10, \
                         got ({cx}, {cy}, {s})"
                    )))
                }
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Point {
        match *self {
            DistributionSpec::Uniform => Point {
                x: rng.random(),
                y: rng.random(),
            },
            DistributionSpec::Power { a, b } => {
                // Inverse CDF of t^(e) density on [0, 1].
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                Point {
                    x: u.powf(1.0 / (a + 1.0)),
                    y: v.powf(1.0 / (b + 1.0)),
                }
            }
            DistributionSpec::GaussianClipped { cx, cy, s } => loop {
                let (gx, gy) = standard_normal_pair(rng);
                let p = Point {
                    x: cx + s * gx,
                    y: cy + s * gy,
                };
                if p.in_unit_square() {
                    return p;
                }
            },
        }
    }
}

fn standard_normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box-Muller; 1 - u keeps the logarithm away from zero.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

fn rng_for_index(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The `index`-th sample of the stream defined by `(dist, seed)`.
pub fn sample_point_at(dist: DistributionSpec, seed: u64, index: u64) -> Point {
    dist.draw(&mut rng_for_index(seed, index))
}

/// Materializes `count` samples. Deterministic in `(dist, count, seed)`.
pub fn sample_points(
    dist: DistributionSpec,
    count: u64,
    seed: u64,
) -> Result<Vec<Point>, Error> {
    dist.validate()?;
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    Ok((0..count).map(|i| sample_point_at(dist, seed, i)).collect())
}

fn bin_index(k: i64, n: usize) -> usize {
    (k + n as i64) as usize
}

fn count_bins_seq(
    dist: DistributionSpec,
    count: u64,
    seed: u64,
    n: usize,
    params: &Params,
) -> Vec<u64> {
    let mut bins = vec![0u64; 2 * n + 1];
    for i in 0..count {
        let p = sample_point_at(dist, seed, i);
        let k = net_contraction_count(p, n, MapKind::L, params);
        bins[bin_index(k, n)] += 1;
    }
    bins
}

#[cfg(feature = "parallel")]
fn count_bins_par(
    dist: DistributionSpec,
    count: u64,
    seed: u64,
    n: usize,
    params: &Params,
) -> Vec<u64> {
    (0..count)
        .into_par_iter()
        .fold(
            || vec![0u64; 2 * n + 1],
            |mut bins, i| {
                let p = sample_point_at(dist, seed, i);
                let k = net_contraction_count(p, n, MapKind::L, params);
                bins[bin_index(k, n)] += 1;
                bins
            },
        )
        .reduce(
            || vec![0u64; 2 * n + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

fn histogram_from_bins(params: &Params, n: usize, bins: Vec<u64>, total: u64) -> LambdaHistogram {
    let counts: BTreeMap<i64, u64> = bins
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, c)| (i as i64 - n as i64, c))
        .collect();
    LambdaHistogram::empirical_from_counts(params, n, counts, total)
}

fn validate_ensemble_args(dist: DistributionSpec, count: u64, n: usize) -> Result<(), Error> {
    dist.validate()?;
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "step count must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Empirical distribution of the `n`-step time-average contraction rate
/// over `count` trajectories started from `dist`.
pub fn ensemble_lambda_histogram(
    dist: DistributionSpec,
    count: u64,
    seed: u64,
    n: usize,
    params: &Params,
) -> Result<LambdaHistogram, Error> {
    validate_ensemble_args(dist, count, n)?;
    #[cfg(feature = "parallel")]
    let bins = count_bins_par(dist, count, seed, n, params);
    #[cfg(not(feature = "parallel"))]
    let bins = count_bins_seq(dist, count, seed, n, params);
    Ok(histogram_from_bins(params, n, bins, count))
}

/// Sequential reference path of [`ensemble_lambda_histogram`].
pub fn ensemble_lambda_histogram_seq(
    dist: DistributionSpec,
    count: u64,
    seed: u64,
    n: usize,
    params: &Params,
) -> Result<LambdaHistogram, Error> {
    validate_ensemble_args(dist, count, n)?;
    let bins = count_bins_seq(dist, count, seed, n, params);
    Ok(histogram_from_bins(params, n, bins, count))
}

/// One qualifying bin pair of a ratio fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrFitPoint {
    pub k: i64,
    pub a: f64,
    pub lhs: f64,
    pub count_plus: u64,
    pub count_minus: u64,
}

/// Least-squares slope of `lhs` against `a` through the origin, over the
/// bin pairs with at least `min_count` samples on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct FrFit {
    pub points: Vec<FrFitPoint>,
    pub slope: f64,
    pub n: usize,
    /// Set when fewer than two bin pairs qualified; the slope then rests on
    /// a single abscissa.
    pub underdetermined: bool,
}

/// Fits the fluctuation-ratio slope of an empirical histogram.
pub fn empirical_fr_fit(hist: &LambdaHistogram, min_count: u64) -> Result<FrFit, Error> {
    if hist.kind() != crate::measure::HistogramKind::Empirical {
        return Err(Error::InvalidParameter(
            "ratio fit needs an empirical histogram".into(),
        ));
    }
    if hist.phi() <= 0.0 {
        return Err(Error::DegenerateAtEquilibrium);
    }
    let n = hist.n();
    let mut points = Vec::new();
    for k in 1..=n as i64 {
        let count_plus = hist.count(k);
        let count_minus = hist.count(-k);
        if count_plus >= min_count && count_minus >= min_count {
            points.push(FrFitPoint {
                k,
                a: hist.lambda_value(k),
                lhs: (count_plus as f64 / count_minus as f64).ln() / n as f64,
                count_plus,
                count_minus,
            });
        }
    }
    if points.is_empty() {
        return Err(Error::NoQualifyingBins { min_count });
    }
    let num: f64 = points.iter().map(|p| p.lhs * p.a).sum();
    let den: f64 = points.iter().map(|p| p.a * p.a).sum();
    Ok(FrFit {
        slope: num / den,
        underdetermined: points.len() < 2,
        points,
        n,
    })
}

/// Attractors a trajectory can be captured by. The repellers `P_A` and
/// `AB` have measure-zero basins and never appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttractorId {
    PD,
    CDCD,
    BInv,
    CInv,
    Nonconvergent,
}

impl AttractorId {
    pub const ALL: [AttractorId; 5] = [
        AttractorId::PD,
        AttractorId::CDCD,
        AttractorId::BInv,
        AttractorId::CInv,
        AttractorId::Nonconvergent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttractorId::PD => "P_D",
            AttractorId::CDCD => "CDCD",
            AttractorId::BInv => "B_inv",
            AttractorId::CInv => "C_inv",
            AttractorId::Nonconvergent => "nonconvergent",
        }
    }
}

/// Classification outcome with the step at which capture was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub attractor: AttractorId,
    pub steps: usize,
}

fn sup_distance_to_rect(p: Point, r: &Rectangle) -> f64 {
    let dx = (r.x_lo - p.x).max(p.x - r.x_hi).max(0.0);
    let dy = (r.y_lo - p.y).max(p.y - r.y_hi).max(0.0);
    dx.max(dy)
}

/// Precomputed targets for attractor classification.
struct Classifier {
    params: Params,
    equilibrium: bool,
    p_d: Point,
    cdcd: Option<CdcdLines>,
    b_inv: Rectangle,
    c_inv: Rectangle,
}

impl Classifier {
    fn new(params: &Params) -> Self {
        let (_, p_d) = fixed_points(params);
        let (b_inv, c_inv) = invariant_rectangles(params);
        Self {
            params: *params,
            equilibrium: params.is_equilibrium(),
            p_d,
            cdcd: cdcd_attractor(params).ok(),
            b_inv,
            c_inv,
        }
    }

    /// Iterates `L`, checking capture at every state.
    ///
    /// Membership in a neutral rectangle counts as capture only after four
    /// consecutive states inside it (one full cycle). A transient can touch
    /// the closed boundary of `B_inv` and still leave through the corner
    /// that maps onto the column edge; requiring the full cycle keeps such
    /// grazing orbits out. The reported step is the first of the four.
    ///
    /// At `ell = 1/4` there are no attractors and everything is reported
    /// nonconvergent at step 0.
    fn classify(&self, p: Point, max_iter: usize, tol: f64) -> Classification {
        if self.equilibrium {
            return Classification {
                attractor: AttractorId::Nonconvergent,
                steps: 0,
            };
        }
        let mut q = p;
        let mut b_run = 0usize;
        let mut c_run = 0usize;
        for step in 0..=max_iter {
            if self.b_inv.contains(q) {
                b_run += 1;
                if b_run == 4 {
                    return Classification {
                        attractor: AttractorId::BInv,
                        steps: step - 3,
                    };
                }
            } else {
                b_run = 0;
            }
            if self.c_inv.contains(q) {
                c_run += 1;
                if c_run == 4 {
                    return Classification {
                        attractor: AttractorId::CInv,
                        steps: step - 3,
                    };
                }
            } else {
                c_run = 0;
            }
            if q.sup_distance(self.p_d) <= tol {
                return Classification {
                    attractor: AttractorId::PD,
                    steps: step,
                };
            }
            if let Some(lines) = &self.cdcd {
                if sup_distance_to_rect(q, &lines.vertical) <= tol
                    || sup_distance_to_rect(q, &lines.horizontal) <= tol
                {
                    return Classification {
                        attractor: AttractorId::CDCD,
                        steps: step,
                    };
                }
            }
            if step < max_iter {
                q = apply_l(q, &self.params);
            }
        }
        Classification {
            attractor: AttractorId::Nonconvergent,
            steps: max_iter,
        }
    }
}

/// Classifies the forward orbit of a single point.
pub fn classify_attractor(
    p: Point,
    params: &Params,
    max_iter: usize,
    tol: f64,
) -> Classification {
    Classifier::new(params).classify(p, max_iter, tol)
}

/// Row-major grid of attractor classifications; row 0 is the top of the
/// square (the `y = 1` side).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasinRaster {
    resolution: usize,
    cells: Vec<AttractorId>,
}

impl BasinRaster {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cell(&self, row: usize, col: usize) -> AttractorId {
        self.cells[row * self.resolution + col]
    }

    /// Cells in row-major order from the top row.
    pub fn cells(&self) -> &[AttractorId] {
        &self.cells
    }

    /// Center of the cell at `(row, col)`.
    pub fn cell_center(resolution: usize, row: usize, col: usize) -> Point {
        Point {
            x: (col as f64 + 0.5) / resolution as f64,
            y: ((resolution - row) as f64 - 0.5) / resolution as f64,
        }
    }
}

fn raster_cells_seq(
    classifier: &Classifier,
    resolution: usize,
    max_iter: usize,
    tol: f64,
) -> Vec<AttractorId> {
    (0..resolution * resolution)
        .map(|idx| {
            let p = BasinRaster::cell_center(resolution, idx / resolution, idx % resolution);
            classifier.classify(p, max_iter, tol).attractor
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn raster_cells_par(
    classifier: &Classifier,
    resolution: usize,
    max_iter: usize,
    tol: f64,
) -> Vec<AttractorId> {
    (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let p = BasinRaster::cell_center(resolution, idx / resolution, idx % resolution);
            classifier.classify(p, max_iter, tol).attractor
        })
        .collect()
}

/// Classifies the cell-center grid of the unit square.
pub fn basin_raster(params: &Params, resolution: usize, max_iter: usize, tol: f64) -> BasinRaster {
    assert!(resolution >= 2, "raster needs at least 2x2 cells");
    let classifier = Classifier::new(params);
    #[cfg(feature = "parallel")]
    let cells = raster_cells_par(&classifier, resolution, max_iter, tol);
    #[cfg(not(feature = "parallel"))]
    let cells = raster_cells_seq(&classifier, resolution, max_iter, tol);
    BasinRaster { resolution, cells }
}

/// Sequential reference path of [`basin_raster`].
pub fn basin_raster_seq(
    params: &Params,
    resolution: usize,
    max_iter: usize,
    tol: f64,
) -> BasinRaster {
    assert!(resolution >= 2, "raster needs at least 2x2 cells");
    let classifier = Classifier::new(params);
    let cells = raster_cells_seq(&classifier, resolution, max_iter, tol);
    BasinRaster { resolution, cells }
}

/// Fraction of classifications per attractor, every attractor present as a
/// key (nonconvergent included, reported under its own key).
pub fn basin_measures_from_classifications<I>(classifications: I) -> BTreeMap<AttractorId, f64>
where
    I: IntoIterator<Item = AttractorId>,
{
    let mut counts: BTreeMap<AttractorId, u64> = BTreeMap::new();
    let mut total = 0u64;
    for c in classifications {
        *counts.entry(c).or_insert(0) += 1;
        total += 1;
    }
    assert!(total > 0, "no classifications supplied");
    AttractorId::ALL
        .iter()
        .map(|&id| {
            (
                id,
                counts.get(&id).copied().unwrap_or(0) as f64 / total as f64,
            )
        })
        .collect()
}

/// Basin-measure estimates from a raster.
pub fn basin_measures_from_raster(raster: &BasinRaster) -> BTreeMap<AttractorId, f64> {
    basin_measures_from_classifications(raster.cells().iter().copied())
}

/// Two routes to the steady-state mean contraction, and their mismatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateCheck {
    /// Ensemble time average of the contraction rate over the last half of
    /// the trajectory window.
    pub lhs: f64,
    /// Basin-measure formula evaluated with estimated measures.
    pub rhs: f64,
    pub rel_error: f64,
    pub nonconvergent_fraction: f64,
}

fn steady_state_sample(
    classifier: &Classifier,
    dist: DistributionSpec,
    seed: u64,
    index: u64,
    window_start: usize,
    n_long: usize,
) -> (i64, AttractorId) {
    let p = sample_point_at(dist, seed, index);
    let mut q = p;
    let mut window_k = 0i64;
    for step in 0..n_long {
        if step >= window_start {
            match crate::map::classify_region(q, &classifier.params) {
                Region::A => window_k -= 1,
                Region::D => window_k += 1,
                _ => {}
            }
        }
        q = apply_l(q, &classifier.params);
    }
    let class = classifier.classify(p, DEFAULT_MAX_ITER, DEFAULT_TOL);
    (window_k, class.attractor)
}

fn attractor_slot(id: AttractorId) -> usize {
    match id {
        AttractorId::PD => 0,
        AttractorId::CDCD => 1,
        AttractorId::BInv => 2,
        AttractorId::CInv => 3,
        AttractorId::Nonconvergent => 4,
    }
}

fn steady_state_from_totals(
    params: &Params,
    count: u64,
    window_len: usize,
    sum_k: i64,
    class_counts: [u64; 5],
) -> Result<SteadyStateCheck, Error> {
    let lhs = params.phi() * sum_k as f64 / (count as f64 * window_len as f64);
    let measures: BTreeMap<AttractorId, f64> = AttractorId::ALL
        .iter()
        .map(|&id| (id, class_counts[attractor_slot(id)] as f64 / count as f64))
        .collect();
    let nonconvergent_fraction = measures[&AttractorId::Nonconvergent];
    if !params.is_equilibrium() && nonconvergent_fraction > 0.001 {
        return Err(Error::ExcessiveNonconvergence {
            fraction: nonconvergent_fraction,
        });
    }
    let rhs = steady_state_mean_contraction(params, &measures);
    Ok(SteadyStateCheck {
        lhs,
        rhs,
        rel_error: (lhs - rhs).abs() / rhs.abs().max(1e-12),
        nonconvergent_fraction,
    })
}

/// Compares the ensemble time average of the contraction rate against the
/// basin-measure formula, from `count` uniform samples evolved `n_long`
/// steps (the average runs over the last `n_long - n_long/2` steps).
pub fn steady_state_consistency(
    params: &Params,
    count: u64,
    seed: u64,
    n_long: usize,
) -> Result<SteadyStateCheck, Error> {
    validate_ensemble_args(DistributionSpec::Uniform, count, n_long)?;
    let classifier = Classifier::new(params);
    let window_start = n_long / 2;
    let window_len = n_long - window_start;

    #[cfg(feature = "parallel")]
    let (sum_k, class_counts) = (0..count)
        .into_par_iter()
        .fold(
            || (0i64, [0u64; 5]),
            |(mut sum, mut counts), i| {
                let (k, id) = steady_state_sample(
                    &classifier,
                    DistributionSpec::Uniform,
                    seed,
                    i,
                    window_start,
                    n_long,
                );
                sum += k;
                counts[attractor_slot(id)] += 1;
                (sum, counts)
            },
        )
        .reduce(
            || (0i64, [0u64; 5]),
            |(sa, ca), (sb, cb)| {
                let mut merged = ca;
                for (m, v) in merged.iter_mut().zip(cb) {
                    *m += v;
                }
                (sa + sb, merged)
            },
        );

    #[cfg(not(feature = "parallel"))]
    let (sum_k, class_counts) = {
        let mut sum = 0i64;
        let mut counts = [0u64; 5];
        for i in 0..count {
            let (k, id) = steady_state_sample(
                &classifier,
                DistributionSpec::Uniform,
                seed,
                i,
                window_start,
                n_long,
            );
            sum += k;
            counts[attractor_slot(id)] += 1;
        }
        (sum, counts)
    };

    steady_state_from_totals(params, count, window_len, sum_k, class_counts)
}

/// Configures the global rayon pool; `0` keeps the automatic size. A no-op
/// without the `parallel` feature.
pub fn configure_thread_pool(threads: usize) -> Result<(), Error> {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return Ok(());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::exact_lambda_distribution;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn params(ell: f64) -> Params {
        Params::new(ell).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        let dist = DistributionSpec::Uniform;
        let a = sample_points(dist, 1000, 99).unwrap();
        let b = sample_points(dist, 1000, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_points(dist, 1000, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn distribution_validation() {
        assert!(DistributionSpec::Power { a: -1.0, b: 0.0 }.validate().is_err());
        assert!(DistributionSpec::Power { a: 1.0, b: 2.5 }.validate().is_ok());
        assert!(DistributionSpec::GaussianClipped {
            cx: 1.5,
            cy: 0.5,
            s: 0.2
        }
        .validate()
        .is_err());
        assert!(DistributionSpec::GaussianClipped {
            cx: 0.5,
            cy: 0.5,
            s: 0.0
        }
        .validate()
        .is_err());
        assert!(sample_points(DistributionSpec::Uniform, 0, 1).is_err());
    }

    #[test]
    fn sample_means_match_their_densities() {
        let n = 1_000_000u64;
        let uni = sample_points(DistributionSpec::Uniform, n, 12345).unwrap();
        let mean_x: f64 = uni.iter().map(|p| p.x).sum::<f64>() / n as f64;
        let se = (1.0f64 / 12.0).sqrt() / (n as f64).sqrt();
        assert!((mean_x - 0.5).abs() <= 3.5 * se, "mean_x = {mean_x}");

        let pow = sample_points(DistributionSpec::Power { a: 1.0, b: 0.0 }, n, 12345).unwrap();
        let mean_x: f64 = pow.iter().map(|p| p.x).sum::<f64>() / n as f64;
        let se = (1.0f64 / 18.0).sqrt() / (n as f64).sqrt();
        assert!((mean_x - 2.0 / 3.0).abs() <= 3.5 * se, "mean_x = {mean_x}");
    }

    #[test]
    fn clipped_gaussian_stays_inside() {
        let dist = DistributionSpec::GaussianClipped {
            cx: 0.1,
            cy: 0.9,
            s: 0.5,
        };
        for p in sample_points(dist, 20_000, 5).unwrap() {
            assert!(p.in_unit_square());
        }
    }

    #[test]
    fn one_step_histogram_matches_column_areas() {
        let p = params(0.2);
        let h =
            ensemble_lambda_histogram(DistributionSpec::Uniform, 1_000_000, 7, 1, &p).unwrap();
        assert!(close(h.mass(1), 0.25, 0.0015), "mass(+1) = {}", h.mass(1));
        assert!(close(h.mass(-1), 0.2, 0.0015), "mass(-1) = {}", h.mass(-1));
        assert_eq!(
            h.count(-1) + h.count(0) + h.count(1),
            1_000_000
        );
    }

    #[test]
    fn equilibrium_collapses_to_zero_contraction() {
        let p = params(0.25);
        let h = ensemble_lambda_histogram(DistributionSpec::Uniform, 10_000, 3, 8, &p).unwrap();
        for k in h.support() {
            assert_eq!(h.lambda_value(k), 0.0);
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_agree_exactly() {
        let p = params(0.2);
        let dist = DistributionSpec::Power { a: 2.0, b: 1.0 };
        let par = ensemble_lambda_histogram(dist, 40_000, 17, 6, &p).unwrap();
        let seq = ensemble_lambda_histogram_seq(dist, 40_000, 17, 6, &p).unwrap();
        for k in par.support() {
            assert_eq!(par.count(k), seq.count(k));
        }
        let raster_par = basin_raster(&p, 64, 10_000, DEFAULT_TOL);
        let raster_seq = basin_raster_seq(&p, 64, 10_000, DEFAULT_TOL);
        assert_eq!(raster_par, raster_seq);
    }

    #[test]
    fn fit_recovers_exact_two_step_violation() {
        // Counts proportional to the exact n = 2 masses; the through-origin
        // slope over both qualifying pairs is 1.1949, not 1.
        let p = params(0.2);
        let exact = exact_lambda_distribution(&p, 2).unwrap();
        let scale = 1e9;
        let counts: BTreeMap<i64, u64> = exact
            .support()
            .map(|k| (k, (exact.mass(k) * scale).round() as u64))
            .collect();
        let total: u64 = counts.values().sum();
        let h = LambdaHistogram::empirical_from_counts(&p, 2, counts, total);
        let fit = empirical_fr_fit(&h, DEFAULT_MIN_COUNT).unwrap();
        assert_eq!(fit.points.len(), 2);
        assert!(!fit.underdetermined);
        assert!(close(fit.slope, 1.19489, 1e-3), "slope = {}", fit.slope);
    }

    #[test]
    fn fit_edge_cases() {
        let p = params(0.2);
        let mut counts = BTreeMap::new();
        counts.insert(-1i64, 100u64);
        counts.insert(1i64, 120u64);
        let h = LambdaHistogram::empirical_from_counts(&p, 1, counts, 220);
        let fit = empirical_fr_fit(&h, 10).unwrap();
        assert!(fit.underdetermined);
        assert_eq!(fit.points.len(), 1);

        let mut counts = BTreeMap::new();
        counts.insert(0i64, 100u64);
        let h = LambdaHistogram::empirical_from_counts(&p, 1, counts, 100);
        assert!(matches!(
            empirical_fr_fit(&h, 10),
            Err(Error::NoQualifyingBins { .. })
        ));

        let exact = exact_lambda_distribution(&p, 2).unwrap();
        assert!(empirical_fr_fit(&exact, 10).is_err());
    }

    #[test]
    fn classification_examples() {
        let p = params(0.2);
        let c = classify_attractor(Point { x: 0.6, y: 0.7 }, &p, 1000, DEFAULT_TOL);
        assert_eq!(c.attractor, AttractorId::CInv);
        assert_eq!(c.steps, 0);

        let pd = crate::analysis::fixed_points(&p).1;
        let c = classify_attractor(pd, &p, 1000, DEFAULT_TOL);
        assert_eq!(c.attractor, AttractorId::PD);
        assert_eq!(c.steps, 0);

        // Grazes the B_inv corner on its way to P_D.
        let c = classify_attractor(Point { x: 0.3, y: 0.25 }, &p, 10_000, DEFAULT_TOL);
        assert_eq!(c.attractor, AttractorId::PD);

        let interior = Point { x: 0.45, y: 0.3 };
        let c = classify_attractor(interior, &p, 1000, DEFAULT_TOL);
        assert_eq!(c.attractor, AttractorId::BInv);
        assert_eq!(c.steps, 0);
    }

    #[test]
    fn equilibrium_reports_nonconvergent() {
        let p = params(0.25);
        let c = classify_attractor(Point { x: 0.3, y: 0.3 }, &p, 1000, DEFAULT_TOL);
        assert_eq!(c.attractor, AttractorId::Nonconvergent);
        let raster = basin_raster(&p, 8, 100, DEFAULT_TOL);
        assert!(raster
            .cells()
            .iter()
            .all(|&c| c == AttractorId::Nonconvergent));
    }

    #[test]
    fn cdcd_gated_by_threshold() {
        let p = params(0.05);
        let raster = basin_raster(&p, 64, 10_000, DEFAULT_TOL);
        assert!(!raster.cells().contains(&AttractorId::CDCD));

        let p = params(0.2);
        let raster = basin_raster(&p, 64, 10_000, DEFAULT_TOL);
        assert!(raster.cells().contains(&AttractorId::CDCD));
    }

    #[test]
    fn raster_orientation_and_c_inv_block() {
        let p = params(0.2);
        let res = 64;
        let raster = basin_raster(&p, res, 10_000, DEFAULT_TOL);
        // C_inv occupies x in [1/2, 3/4], y in [1/2, 1]: the top rows,
        // right-center columns.
        let cell = raster.cell(1, 40); // x ~ 0.633, y ~ 0.977
        assert_eq!(cell, AttractorId::CInv);
        let center = BasinRaster::cell_center(res, 1, 40);
        assert!(close(center.x, 40.5 / 64.0, 1e-15));
        assert!(close(center.y, 62.5 / 64.0, 1e-15));
        // Every cell center inside the rectangle classifies C_inv.
        let (_, c_inv) = invariant_rectangles(&p);
        for row in 0..res {
            for col in 0..res {
                let q = BasinRaster::cell_center(res, row, col);
                if q.x > c_inv.x_lo && q.x < c_inv.x_hi && q.y > c_inv.y_lo && q.y < c_inv.y_hi {
                    assert_eq!(raster.cell(row, col), AttractorId::CInv);
                }
            }
        }
    }

    #[test]
    fn basin_measures_include_every_key() {
        let p = params(0.2);
        let raster = basin_raster(&p, 64, 10_000, DEFAULT_TOL);
        let measures = basin_measures_from_raster(&raster);
        assert_eq!(measures.len(), 5);
        let total: f64 = measures.values().sum();
        assert!(close(total, 1.0, 1e-12));
        assert!(measures[&AttractorId::CInv] >= 0.125);
    }

    #[test]
    fn steady_state_consistency_small() {
        let p = params(0.1);
        let check = steady_state_consistency(&p, 100_000, 11, 200).unwrap();
        assert!(
            check.rel_error <= 0.01,
            "lhs = {}, rhs = {}",
            check.lhs,
            check.rhs
        );
        assert!(check.nonconvergent_fraction < 0.001);

        let eq = steady_state_consistency(&params(0.25), 1000, 11, 50).unwrap();
        assert_eq!(eq.lhs, 0.0);
        assert_eq!(eq.rhs, 0.0);
        assert_eq!(eq.rel_error, 0.0);
        assert_eq!(eq.nonconvergent_fraction, 1.0);
    }
}
