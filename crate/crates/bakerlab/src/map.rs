//! The parameterized piecewise-affine map of the unit square.
//!
//! The base transformation `M` acts on `U = [0,1] x [0,1]` through four
//! affine branches selected by the `x` coordinate, with column widths
//! `ell`, `1/2 - ell`, `1/4`, `1/4`. Composing with the quarter-turn
//! `R(x, y) = (1 - y, x)` gives the map `L = R o M` studied throughout the
//! crate. The single control parameter `ell` lies in `(0, 1/4]`; the derived
//! constant `phi = -ln(4 ell)` is the per-step phase-space contraction in
//! the right-most column (and the expansion in the left-most one), so
//! `ell = 1/4` is the area-preserving "equilibrium" case.
//!
//! Everything here is a pure function of its inputs and safe to call from
//! any number of threads.

use crate::error::Error;

/// Map parameters: the column width `ell` and the derived contraction `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    ell: f64,
    phi: f64,
}

impl Params {
    /// Builds parameters, rejecting `ell` outside `(0, 1/4]`.
    ///
    /// `ell = 0` is rejected because branch A divides by `2 ell`; callers
    /// probing the most dissipative regime should use a small positive
    /// value such as `1e-4` instead.
    pub fn new(ell: f64) -> Result<Self, Error> {
        if !ell.is_finite() || ell <= 0.0 || ell > 0.25 {
            return Err(Error::InvalidParameter(format!(
                "ell must lie in (0, 0.25], got {ell}"
            )));
        }
        Ok(Self {
            ell,
            phi: -(4.0 * ell).ln(),
        })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Per-step contraction magnitude `phi = -ln(4 ell) >= 0`.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// True exactly when `ell = 1/4`, i.e. `phi = 0`.
    pub fn is_equilibrium(&self) -> bool {
        self.phi == 0.0
    }
}

/// A position in the closed unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    /// Validating constructor for externally supplied coordinates.
    pub fn new(x: f64, y: f64) -> Result<Self, Error> {
        let p = Self { x, y };
        if !p.in_unit_square() {
            return Err(Error::InvalidParameter(format!(
                "point ({x}, {y}) outside the unit square"
            )));
        }
        Ok(p)
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    /// Sup-norm distance.
    pub fn sup_distance(&self, other: Point) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

/// The four branch columns. Intervals are closed on the left, open on the
/// right, except that `x = 1` belongs to `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    A,
    B,
    C,
    D,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::A, Region::B, Region::C, Region::D];

    pub fn label(self) -> char {
        match self {
            Region::A => 'A',
            Region::B => 'B',
            Region::C => 'C',
            Region::D => 'D',
        }
    }

    /// The column `[lo, hi)` of this region (closed at 1 for D).
    pub fn x_bounds(self, params: &Params) -> (f64, f64) {
        match self {
            Region::A => (0.0, params.ell()),
            Region::B => (params.ell(), 0.5),
            Region::C => (0.5, 0.75),
            Region::D => (0.75, 1.0),
        }
    }
}

/// Which map drives an orbit: the base transformation or its rotated
/// composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    M,
    L,
}

/// Region of a point under the half-open branch conditions.
pub fn classify_region(p: Point, params: &Params) -> Region {
    debug_assert!(p.in_unit_square());
    if p.x < params.ell {
        Region::A
    } else if p.x < 0.5 {
        Region::B
    } else if p.x < 0.75 {
        Region::C
    } else {
        Region::D
    }
}

/// One step of the base map `M`.
pub fn apply_m(p: Point, params: &Params) -> Point {
    let ell = params.ell;
    match classify_region(p, params) {
        Region::A => Point {
            x: p.x / (2.0 * ell) + 0.5,
            y: 0.5 * p.y + 0.5,
        },
        Region::B => Point {
            x: (p.x - ell) / (1.0 - 2.0 * ell),
            y: (1.0 - 2.0 * ell) * p.y + 2.0 * ell,
        },
        Region::C => Point {
            x: 2.0 * p.x - 0.5,
            y: 0.5 * p.y,
        },
        Region::D => Point {
            x: 2.0 * p.x - 1.5,
            y: 2.0 * ell * p.y,
        },
    }
}

/// The quarter-turn `R(x, y) = (1 - y, x)`.
pub fn apply_r(p: Point) -> Point {
    Point {
        x: 1.0 - p.y,
        y: p.x,
    }
}

/// One step of the composition `L = R o M`.
pub fn apply_l(p: Point, params: &Params) -> Point {
    apply_r(apply_m(p, params))
}

/// One step of the selected map.
pub fn apply(kind: MapKind, p: Point, params: &Params) -> Point {
    match kind {
        MapKind::M => apply_m(p, params),
        MapKind::L => apply_l(p, params),
    }
}

/// Constant per-branch derivative of `L`, with its determinant.
///
/// Every branch matrix is antidiagonal: `[[0, -a], [b, 0]]` with `a, b > 0`,
/// so the determinant `a * b` is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchJacobian {
    pub matrix: [[f64; 2]; 2],
    pub det: f64,
}

/// Derivative matrix of `L` on the given branch.
pub fn jacobian(r: Region, params: &Params) -> BranchJacobian {
    let ell = params.ell;
    let (a, b) = match r {
        Region::A => (0.5, 1.0 / (2.0 * ell)),
        Region::B => (1.0 - 2.0 * ell, 1.0 / (1.0 - 2.0 * ell)),
        Region::C => (0.5, 2.0),
        Region::D => (2.0 * ell, 2.0),
    };
    BranchJacobian {
        matrix: [[0.0, -a], [b, 0.0]],
        det: a * b,
    }
}

/// Local phase-space contraction rate: `-phi` on A, `0` on B and C, `+phi`
/// on D. Identical for `M` and `L`.
pub fn local_contraction(r: Region, params: &Params) -> f64 {
    match r {
        Region::A => -params.phi,
        Region::B | Region::C => 0.0,
        Region::D => params.phi,
    }
}

/// An `n`-step trajectory: `n + 1` points and the regions of the first `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub points: Vec<Point>,
    pub itinerary: Vec<Region>,
    pub map_kind: MapKind,
}

/// Iterates the selected map `n` times from `p`.
pub fn orbit(p: Point, n: usize, map_kind: MapKind, params: &Params) -> Orbit {
    let mut points = Vec::with_capacity(n + 1);
    let mut itinerary = Vec::with_capacity(n);
    let mut q = p;
    points.push(q);
    for _ in 0..n {
        itinerary.push(classify_region(q, params));
        q = apply(map_kind, q, params);
        points.push(q);
    }
    Orbit {
        points,
        itinerary,
        map_kind,
    }
}

/// Net count of contracting minus expanding steps over the first `n`
/// iterates: `#D - #A` visits.
pub fn net_contraction_count(p: Point, n: usize, map_kind: MapKind, params: &Params) -> i64 {
    let mut q = p;
    let mut k = 0i64;
    for _ in 0..n {
        match classify_region(q, params) {
            Region::A => k -= 1,
            Region::D => k += 1,
            Region::B | Region::C => {}
        }
        q = apply(map_kind, q, params);
    }
    k
}

/// Time average of the contraction rate together with the integer count it
/// derives from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaAverage {
    pub value: f64,
    pub net_count: i64,
}

/// `n`-step time average of the contraction rate along the orbit of `p`.
///
/// The value is always `net_count * phi / n`, computed from the integer
/// region count rather than by accumulating logarithms, so it is an exact
/// rational multiple of `phi`.
pub fn lambda_time_average(p: Point, n: usize, map_kind: MapKind, params: &Params) -> LambdaAverage {
    assert!(n >= 1, "time average needs at least one step");
    let net_count = net_contraction_count(p, n, map_kind, params);
    LambdaAverage {
        value: net_count as f64 * params.phi / n as f64,
        net_count,
    }
}
