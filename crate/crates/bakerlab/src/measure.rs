//! Exact Lebesgue measures of itinerary cylinder sets.
//!
//! A cylinder set is the set of initial points sharing a given length-`n`
//! region itinerary. Every branch of `L` is a diagonal affine map followed
//! by the quarter turn, so it sends axis-aligned rectangles to axis-aligned
//! rectangles; a cylinder is therefore a rectangle, and its forward image
//! after `n` steps is again a rectangle. Enumeration propagates these
//! images forward, intersecting with the next column at each step, and
//! recovers the initial measure from the accumulated determinant. This is
//! exact up to floating-point rounding, with no sampling involved.
//!
//! Enumeration is sequential; the output is canonically sorted by
//! itinerary, so it is independent of how callers schedule it.

use std::collections::BTreeMap;

use crate::analysis::Rectangle;
use crate::ensemble::AttractorId;
use crate::error::Error;
use crate::map::{Params, Point, Region};

/// Default depth guard for enumeration.
pub const DEFAULT_MAX_DEPTH: usize = 14;
/// Default bound on live cylinders before enumeration aborts.
pub const DEFAULT_LIVE_LIMIT: usize = 50_000_000;

/// Clips keeping at most this fraction of the parent image width are
/// boundary-touch slivers and are treated as empty.
const PRUNE_RATIO: f64 = 1e-15;
/// Final measures at or below this are dropped.
const PRUNE_MEASURE: f64 = 1e-18;

/// Overridable guards for [`enumerate_cylinders_with`].
#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    pub max_depth: usize,
    pub live_limit: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_depth: DEFAULT_MAX_DEPTH,
            live_limit: DEFAULT_LIVE_LIMIT,
        }
    }
}

/// One branch of `L` in the form `(x, y) -> (xa + xb*y, ya + yb*x)`.
#[derive(Debug, Clone, Copy)]
struct BranchAffine {
    xa: f64,
    xb: f64,
    ya: f64,
    yb: f64,
}

fn branch_affine(r: Region, params: &Params) -> BranchAffine {
    let ell = params.ell();
    match r {
        Region::A => BranchAffine {
            xa: 0.5,
            xb: -0.5,
            ya: 0.5,
            yb: 1.0 / (2.0 * ell),
        },
        Region::B => BranchAffine {
            xa: 1.0 - 2.0 * ell,
            xb: -(1.0 - 2.0 * ell),
            ya: -ell / (1.0 - 2.0 * ell),
            yb: 1.0 / (1.0 - 2.0 * ell),
        },
        Region::C => BranchAffine {
            xa: 1.0,
            xb: -0.5,
            ya: -0.5,
            yb: 2.0,
        },
        Region::D => BranchAffine {
            xa: 1.0,
            xb: -2.0 * ell,
            ya: -1.5,
            yb: 2.0,
        },
    }
}

impl BranchAffine {
    fn image(&self, r: &Rectangle) -> Rectangle {
        let x1 = self.xa + self.xb * r.y_lo;
        let x2 = self.xa + self.xb * r.y_hi;
        let y1 = self.ya + self.yb * r.x_lo;
        let y2 = self.ya + self.yb * r.x_hi;
        Rectangle {
            x_lo: x1.min(x2),
            x_hi: x1.max(x2),
            y_lo: y1.min(y2),
            y_hi: y1.max(y2),
        }
    }

    fn pull_back(&self, p: Point) -> Point {
        Point {
            x: (p.y - self.ya) / self.yb,
            y: (p.x - self.xa) / self.xb,
        }
    }
}

fn column(r: Region, params: &Params) -> Rectangle {
    let (lo, hi) = r.x_bounds(params);
    Rectangle {
        x_lo: lo,
        x_hi: hi,
        y_lo: 0.0,
        y_hi: 1.0,
    }
}

/// A nonempty cylinder: its itinerary, the forward image of its initial
/// rectangle after `itinerary.len()` steps, and the Lebesgue measure of the
/// initial rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSet {
    pub itinerary: Vec<Region>,
    pub image: Rectangle,
    pub measure: f64,
}

impl CylinderSet {
    /// Net `#D - #A` count of the itinerary.
    pub fn net_count(&self) -> i64 {
        self.itinerary
            .iter()
            .map(|r| match r {
                Region::A => -1,
                Region::D => 1,
                _ => 0,
            })
            .sum()
    }

    /// Center of the initial rectangle, recovered by pulling the image
    /// center back through the branch inverses.
    pub fn initial_center(&self, params: &Params) -> Point {
        let mut p = self.image.center();
        for &r in self.itinerary.iter().rev() {
            p = branch_affine(r, params).pull_back(p);
        }
        p
    }

    pub fn itinerary_string(&self) -> String {
        self.itinerary.iter().map(|r| r.label()).collect()
    }
}

struct Node {
    itinerary: Vec<Region>,
    image: Rectangle,
    measure: f64,
}

/// Enumerates every nonempty length-`n` cylinder with the default guards.
pub fn enumerate_cylinders(params: &Params, n: usize) -> Result<Vec<CylinderSet>, Error> {
    enumerate_cylinders_with(params, n, EnumerationLimits::default())
}

/// Enumerates every nonempty length-`n` cylinder.
///
/// The returned list is sorted by itinerary (A < B < C < D). Measures are
/// carried forward multiplicatively: each intersection with the next
/// column scales the running measure by the fraction of the image width
/// that survives the clip. A column never cuts the y side, and an uncut x
/// side contributes an exact factor of one, so the measure of a cylinder
/// whose image is never cut (deep D runs at small `ell`) stays exact even
/// when the image itself has contracted below the noise floor of its own
/// coordinates. Boundary-touch slivers keeping less than `1e-15` of the
/// parent width are pruned, as are final measures at or below `1e-18`.
pub fn enumerate_cylinders_with(
    params: &Params,
    n: usize,
    limits: EnumerationLimits,
) -> Result<Vec<CylinderSet>, Error> {
    if n < 1 || n > limits.max_depth {
        return Err(Error::DepthOutOfRange {
            requested: n,
            max: limits.max_depth,
        });
    }

    let branches: Vec<BranchAffine> = Region::ALL
        .iter()
        .map(|&r| branch_affine(r, params))
        .collect();
    let columns: Vec<Rectangle> = Region::ALL.iter().map(|&r| column(r, params)).collect();

    let mut frontier: Vec<Node> = Region::ALL
        .iter()
        .map(|&r| Node {
            itinerary: vec![r],
            image: branches[r as usize].image(&columns[r as usize]),
            measure: columns[r as usize].width(),
        })
        .collect();

    for depth in 2..=n {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for node in &frontier {
            for &r in &Region::ALL {
                let Some(clip) = node.image.intersect(&columns[r as usize]) else {
                    continue;
                };
                let ratio = if clip.x_lo == node.image.x_lo && clip.x_hi == node.image.x_hi {
                    1.0
                } else {
                    clip.width() / node.image.width()
                };
                if ratio <= PRUNE_RATIO {
                    continue;
                }
                let mut itinerary = Vec::with_capacity(depth);
                itinerary.extend_from_slice(&node.itinerary);
                itinerary.push(r);
                next.push(Node {
                    itinerary,
                    image: branches[r as usize].image(&clip),
                    measure: node.measure * ratio,
                });
                if next.len() > limits.live_limit {
                    return Err(Error::CylinderBudget {
                        live: next.len(),
                        depth,
                        limit: limits.live_limit,
                    });
                }
            }
        }
        frontier = next;
    }

    let mut out: Vec<CylinderSet> = frontier
        .into_iter()
        .filter_map(|node| {
            (node.measure > PRUNE_MEASURE).then_some(CylinderSet {
                itinerary: node.itinerary,
                image: node.image,
                measure: node.measure,
            })
        })
        .collect();
    out.sort_by(|a, b| a.itinerary.cmp(&b.itinerary));
    Ok(out)
}

/// Whether a histogram carries exact masses or sampled counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramKind {
    Exact,
    Empirical,
}

/// Distribution of the time-average contraction rate, binned by the integer
/// net count `k`; the value of bin `k` is `k * phi / n`.
#[derive(Debug, Clone)]
pub struct LambdaHistogram {
    n: usize,
    phi: f64,
    kind: HistogramKind,
    masses: BTreeMap<i64, f64>,
    counts: BTreeMap<i64, u64>,
    total_count: u64,
}

impl LambdaHistogram {
    pub fn exact_from_bins(params: &Params, n: usize, masses: BTreeMap<i64, f64>) -> Self {
        Self {
            n,
            phi: params.phi(),
            kind: HistogramKind::Exact,
            masses,
            counts: BTreeMap::new(),
            total_count: 0,
        }
    }

    pub fn empirical_from_counts(
        params: &Params,
        n: usize,
        counts: BTreeMap<i64, u64>,
        total_count: u64,
    ) -> Self {
        let masses = counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / total_count as f64))
            .collect();
        Self {
            n,
            phi: params.phi(),
            kind: HistogramKind::Empirical,
            masses,
            counts,
            total_count,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn kind(&self) -> HistogramKind {
        self.kind
    }

    pub fn mass(&self, k: i64) -> f64 {
        self.masses.get(&k).copied().unwrap_or(0.0)
    }

    /// Sample count of bin `k`; zero for exact histograms.
    pub fn count(&self, k: i64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn total_count(&self) -> u64 {
        self.total_count
    }

    /// Populated bins in increasing `k` order.
    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.masses.keys().copied()
    }

    /// The contraction value of bin `k`.
    pub fn lambda_value(&self, k: i64) -> f64 {
        k as f64 * self.phi / self.n as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Total-variation distance to another histogram over the union of
    /// supports.
    pub fn tv_distance(&self, other: &LambdaHistogram) -> f64 {
        let keys: std::collections::BTreeSet<i64> =
            self.support().chain(other.support()).collect();
        0.5 * keys
            .into_iter()
            .map(|k| (self.mass(k) - other.mass(k)).abs())
            .sum::<f64>()
    }
}

/// Bins a cylinder list by net count.
pub fn distribution_from_cylinders(
    params: &Params,
    n: usize,
    cylinders: &[CylinderSet],
) -> LambdaHistogram {
    debug_assert!(cylinders.iter().all(|c| c.itinerary.len() == n));
    let mut masses: BTreeMap<i64, f64> = BTreeMap::new();
    for c in cylinders {
        *masses.entry(c.net_count()).or_insert(0.0) += c.measure;
    }
    LambdaHistogram::exact_from_bins(params, n, masses)
}

/// Exact distribution of the `n`-step time-average contraction rate under
/// the uniform initial distribution.
pub fn exact_lambda_distribution(params: &Params, n: usize) -> Result<LambdaHistogram, Error> {
    let cylinders = enumerate_cylinders(params, n)?;
    Ok(distribution_from_cylinders(params, n, &cylinders))
}

/// One abscissa of the fluctuation-ratio curve.
///
/// When one of the two conjugate bins is empty, `lhs` and `deviation` carry
/// the matching infinity instead of being dropped: the one-sidedness is a
/// finding, not an artifact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrPoint {
    pub k: i64,
    pub a: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub lhs: f64,
    pub deviation: f64,
}

impl FrPoint {
    pub fn is_paired(&self) -> bool {
        self.lhs.is_finite()
    }
}

/// The ratio curve of a distribution: for each `k > 0` with either bin
/// populated, `lhs = ln(P(k)/P(-k)) / n` against `a = k * phi / n`.
pub fn fr_curve_from_distribution(hist: &LambdaHistogram) -> Vec<FrPoint> {
    let n = hist.n() as f64;
    let ks: std::collections::BTreeSet<i64> =
        hist.support().filter(|&k| k != 0).map(|k| k.abs()).collect();
    ks.into_iter()
        .map(|k| {
            let p_plus = hist.mass(k);
            let p_minus = hist.mass(-k);
            let a = hist.lambda_value(k);
            let lhs = if p_plus > 0.0 && p_minus > 0.0 {
                (p_plus / p_minus).ln() / n
            } else if p_plus > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            FrPoint {
                k,
                a,
                p_plus,
                p_minus,
                lhs,
                deviation: lhs - a,
            }
        })
        .collect()
}

/// Exact fluctuation-ratio curve at step count `n`.
///
/// Rejected at `ell = 1/4`, where every bin value collapses to zero and the
/// ratio carries no information.
pub fn exact_fr_curve(params: &Params, n: usize) -> Result<Vec<FrPoint>, Error> {
    exact_fr_curve_with(params, n, EnumerationLimits::default())
}

/// [`exact_fr_curve`] with explicit enumeration guards.
pub fn exact_fr_curve_with(
    params: &Params,
    n: usize,
    limits: EnumerationLimits,
) -> Result<Vec<FrPoint>, Error> {
    if params.is_equilibrium() {
        return Err(Error::DegenerateAtEquilibrium);
    }
    let cylinders = enumerate_cylinders_with(params, n, limits)?;
    let hist = distribution_from_cylinders(params, n, &cylinders);
    Ok(fr_curve_from_distribution(&hist))
}

/// A representative initial condition realizing net count `-k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateWitness {
    pub point: Point,
    pub itinerary: Vec<Region>,
}

/// Searches the length-`n` cylinders for one with net count `-k` and
/// returns the center of its initial rectangle.
pub fn conjugate_cylinder_exists(
    params: &Params,
    n: usize,
    k: i64,
) -> Result<Option<ConjugateWitness>, Error> {
    let cylinders = enumerate_cylinders(params, n)?;
    Ok(cylinders
        .iter()
        .find(|c| c.net_count() == -k)
        .map(|c| ConjugateWitness {
            point: c.initial_center(params),
            itinerary: c.itinerary.clone(),
        }))
}

/// Steady-state ensemble average of the contraction rate from basin
/// measures: `phi * (mu(P_D) + mu(CDCD) / 2)`. The neutral rectangles
/// contribute zero and the repellers have measure-zero basins.
pub fn steady_state_mean_contraction(
    params: &Params,
    basin_measures: &BTreeMap<AttractorId, f64>,
) -> f64 {
    let mu = |id: AttractorId| basin_measures.get(&id).copied().unwrap_or(0.0);
    debug_assert!(basin_measures.values().all(|&m| m >= 0.0));
    params.phi() * (mu(AttractorId::PD) + 0.5 * mu(AttractorId::CDCD))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{orbit, MapKind};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn params(ell: f64) -> Params {
        Params::new(ell).unwrap()
    }

    fn find<'a>(cyls: &'a [CylinderSet], itinerary: &str) -> Option<&'a CylinderSet> {
        cyls.iter().find(|c| c.itinerary_string() == itinerary)
    }

    #[test]
    fn depth_validation() {
        let p = params(0.2);
        assert!(enumerate_cylinders(&p, 0).is_err());
        assert!(enumerate_cylinders(&p, 15).is_err());
        let limits = EnumerationLimits {
            max_depth: 16,
            ..Default::default()
        };
        assert!(enumerate_cylinders_with(&p, 15, limits).is_ok());
    }

    #[test]
    fn live_limit_guard() {
        let p = params(0.2);
        let limits = EnumerationLimits {
            max_depth: 14,
            live_limit: 10,
        };
        match enumerate_cylinders_with(&p, 8, limits) {
            Err(Error::CylinderBudget { live, .. }) => assert!(live > 10),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn depth_one_measures_are_column_widths() {
        let p = params(0.2);
        let cyls = enumerate_cylinders(&p, 1).unwrap();
        assert_eq!(cyls.len(), 4);
        let expect = [("A", 0.2), ("B", 0.3), ("C", 0.25), ("D", 0.25)];
        for (label, width) in expect {
            let c = find(&cyls, label).unwrap();
            assert!(close(c.measure, width, 1e-15), "{label}");
        }
    }

    #[test]
    fn depth_two_analytic_measures() {
        let p = params(0.2);
        let cyls = enumerate_cylinders(&p, 2).unwrap();
        assert!(close(find(&cyls, "DD").unwrap().measure, 0.15625, 1e-15));
        assert!(close(find(&cyls, "AA").unwrap().measure, 0.08, 1e-15));
        assert!(close(find(&cyls, "AB").unwrap().measure, 0.12, 1e-15));
        assert!(close(find(&cyls, "CD").unwrap().measure, 0.125, 1e-15));
        assert!(close(find(&cyls, "DC").unwrap().measure, 0.09375, 1e-15));
        assert!(find(&cyls, "BD").is_none());

        // For ell <= 1/8 all of D maps into D.
        let p = params(0.1);
        let cyls = enumerate_cylinders(&p, 2).unwrap();
        assert!(close(find(&cyls, "DD").unwrap().measure, 0.25, 1e-15));
        assert!(find(&cyls, "DC").is_none());
    }

    #[test]
    fn measures_partition_the_square() {
        for &ell in &[0.05, 0.1, 0.2, 0.24] {
            let p = params(ell);
            for n in 1..=12 {
                let cyls = enumerate_cylinders(&p, n).unwrap();
                let total: f64 = cyls.iter().map(|c| c.measure).sum();
                assert!(
                    close(total, 1.0, 1e-12),
                    "ell = {ell}, n = {n}: total = {total}"
                );
            }
        }
    }

    #[test]
    fn measure_equals_image_area_over_det_product() {
        use crate::map::jacobian;
        for &(ell, n) in &[(0.2, 6usize), (0.05, 8)] {
            let p = params(ell);
            for c in enumerate_cylinders(&p, n).unwrap() {
                let det: f64 = c
                    .itinerary
                    .iter()
                    .map(|&r| jacobian(r, &p).det)
                    .product();
                assert!(
                    close(c.measure, c.image.area() / det, 1e-12),
                    "ell = {ell}, {}",
                    c.itinerary_string()
                );
                assert!(c.measure > 0.0);
            }
        }
    }

    #[test]
    fn refinement_is_consistent() {
        for &ell in &[0.05, 0.2] {
            let p = params(ell);
            let coarse = enumerate_cylinders(&p, 6).unwrap();
            let fine = enumerate_cylinders(&p, 7).unwrap();
            let mut sums: BTreeMap<Vec<Region>, f64> = BTreeMap::new();
            for c in &fine {
                *sums
                    .entry(c.itinerary[..6].to_vec())
                    .or_insert(0.0) += c.measure;
            }
            for c in &coarse {
                let refined = sums.get(&c.itinerary).copied().unwrap_or(0.0);
                assert!(
                    close(c.measure, refined, 1e-12),
                    "ell = {ell}, {}",
                    c.itinerary_string()
                );
            }
        }
    }

    #[test]
    fn observed_transitions_match_branch_geometry() {
        // Feasible successors, derived from the branch images: the B column
        // reaches D only while 1 - 2*ell > 3/4, and D reaches C only when
        // 1 - 2*ell < 3/4.
        fn feasible(from: Region, to: Region, ell: f64) -> bool {
            match from {
                Region::A => matches!(to, Region::A | Region::B),
                Region::B => {
                    matches!(to, Region::A | Region::B | Region::C)
                        || (to == Region::D && ell < 0.125)
                }
                Region::C => matches!(to, Region::C | Region::D),
                Region::D => to == Region::D || (to == Region::C && ell > 0.125),
            }
        }
        for &ell in &[0.05, 0.2] {
            let p = params(ell);
            let mut seen = std::collections::BTreeSet::new();
            for c in enumerate_cylinders(&p, 6).unwrap() {
                for w in c.itinerary.windows(2) {
                    seen.insert((w[0], w[1]));
                    assert!(feasible(w[0], w[1], ell), "ell = {ell}: {w:?}");
                }
            }
            if ell < 0.125 {
                assert!(seen.contains(&(Region::B, Region::D)));
                assert!(!seen.contains(&(Region::D, Region::C)));
            } else {
                assert!(!seen.contains(&(Region::B, Region::D)));
                assert!(seen.contains(&(Region::D, Region::C)));
            }
        }
    }

    #[test]
    fn exact_distribution_small_n() {
        let p = params(0.2);
        let h = exact_lambda_distribution(&p, 1).unwrap();
        assert!(close(h.mass(-1), 0.2, 1e-15));
        assert!(close(h.mass(0), 0.55, 1e-15));
        assert!(close(h.mass(1), 0.25, 1e-15));
        assert!(close(h.total_mass(), 1.0, 1e-12));

        let h = exact_lambda_distribution(&p, 2).unwrap();
        assert!(close(h.mass(2), 0.15625, 1e-15));
        assert!(close(h.mass(-2), 0.08, 1e-15));
        assert!(close(h.mass(1), 0.21875, 1e-15));
        assert!(close(h.mass(-1), 0.22, 1e-15));
        assert!(close(h.mass(0), 0.325, 1e-15));
    }

    #[test]
    fn fr_identity_at_one_step() {
        for &ell in &[0.05, 0.1, 0.2, 0.24] {
            let p = params(ell);
            let curve = exact_fr_curve(&p, 1).unwrap();
            assert_eq!(curve.len(), 1);
            let point = curve[0];
            assert_eq!(point.k, 1);
            assert!(point.is_paired());
            assert!(
                point.deviation.abs() <= 1e-14,
                "ell = {ell}: deviation = {}",
                point.deviation
            );
        }
    }

    #[test]
    fn fr_violation_at_two_steps() {
        let p = params(0.2);
        let curve = exact_fr_curve(&p, 2).unwrap();
        let at2 = curve.iter().find(|q| q.k == 2).unwrap();
        assert!(close(at2.lhs, 1.5 * p.phi(), 1e-12));
        assert!(close(at2.deviation, p.phi() / 2.0, 1e-12));
        // The k = 1 pair is also skewed, in the opposite direction.
        let at1 = curve.iter().find(|q| q.k == 1).unwrap();
        assert!(at1.deviation < -0.1);
    }

    #[test]
    fn fr_curve_rejects_equilibrium() {
        assert!(matches!(
            exact_fr_curve(&params(0.25), 3),
            Err(Error::DegenerateAtEquilibrium)
        ));
    }

    #[test]
    fn unpaired_bins_are_marked_not_dropped() {
        let p = params(0.2);
        let mut masses = BTreeMap::new();
        masses.insert(0i64, 0.5);
        masses.insert(2i64, 0.3);
        masses.insert(-1i64, 0.2);
        let h = LambdaHistogram::exact_from_bins(&p, 4, masses);
        let curve = fr_curve_from_distribution(&h);
        assert_eq!(curve.len(), 2);
        let k1 = curve.iter().find(|q| q.k == 1).unwrap();
        assert_eq!(k1.lhs, f64::NEG_INFINITY);
        assert_eq!(k1.deviation, f64::NEG_INFINITY);
        let k2 = curve.iter().find(|q| q.k == 2).unwrap();
        assert_eq!(k2.lhs, f64::INFINITY);
        assert!(!k2.is_paired());
    }

    #[test]
    fn conjugate_witnesses() {
        let p = params(0.2);
        // k = +2 at n = 2: the witness lives in the AA cylinder.
        let w = conjugate_cylinder_exists(&p, 2, 2).unwrap().unwrap();
        assert_eq!(w.itinerary, vec![Region::A, Region::A]);
        assert!(w.point.x < 0.2 && w.point.y > 0.6);
        // k = 0 pairs with itself.
        assert!(conjugate_cylinder_exists(&p, 1, 0).unwrap().is_some());
        // Counts beyond the depth have no cylinder at all.
        assert!(conjugate_cylinder_exists(&p, 2, 3).unwrap().is_none());
        // Every populated bin at n = 6 has a populated conjugate.
        let h = exact_lambda_distribution(&p, 6).unwrap();
        for k in h.support() {
            assert!(
                conjugate_cylinder_exists(&p, 6, k).unwrap().is_some(),
                "k = {k}"
            );
        }
    }

    #[test]
    fn witness_reproduces_its_itinerary() {
        let p = params(0.2);
        for n in [4usize, 8] {
            let h = exact_lambda_distribution(&p, n).unwrap();
            for k in h.support() {
                let w = conjugate_cylinder_exists(&p, n, k).unwrap().unwrap();
                let o = orbit(w.point, n, MapKind::L, &p);
                assert_eq!(o.itinerary, w.itinerary, "n = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn initial_center_pulls_back_correctly() {
        let p = params(0.2);
        let cyls = enumerate_cylinders(&p, 1).unwrap();
        let a = find(&cyls, "A").unwrap();
        let c = a.initial_center(&p);
        assert!(close(c.x, 0.1, 1e-14) && close(c.y, 0.5, 1e-14));
    }

    #[test]
    fn mean_contraction_formula() {
        let mut measures = BTreeMap::new();
        measures.insert(AttractorId::PD, 0.8);
        assert!(close(
            steady_state_mean_contraction(&params(0.1), &measures),
            0.8 * 0.4f64.ln().abs(),
            1e-12
        ));
        measures.insert(AttractorId::PD, 0.5);
        measures.insert(AttractorId::CDCD, 0.3);
        assert!(close(
            steady_state_mean_contraction(&params(0.2), &measures),
            0.2231436 * 0.65,
            1e-6
        ));
        assert_eq!(
            steady_state_mean_contraction(&params(0.25), &measures),
            0.0
        );
    }

    #[test]
    fn empirical_histogram_bookkeeping() {
        let p = params(0.2);
        let mut counts = BTreeMap::new();
        counts.insert(-1i64, 200u64);
        counts.insert(0i64, 550);
        counts.insert(1i64, 250);
        let h = LambdaHistogram::empirical_from_counts(&p, 1, counts, 1000);
        assert_eq!(h.kind(), HistogramKind::Empirical);
        assert_eq!(h.count(1), 250);
        assert_eq!(h.count(5), 0);
        assert!(close(h.mass(-1), 0.2, 1e-15));
        assert!(close(h.total_mass(), 1.0, 1e-15));
        assert!(close(h.lambda_value(1), p.phi(), 1e-15));
        let exact = exact_lambda_distribution(&p, 1).unwrap();
        assert!(h.tv_distance(&exact) <= 1e-12);
    }
}
