//! Closed-form invariant objects of the map and their Lyapunov exponents.
//!
//! For every admissible `ell` the map `L` has two fixed points (`P_A`
//! repelling, `P_D` attracting) and a hyperbolic period-2 orbit straddling
//! the A and B columns. For `ell >= 1/8` a one-parameter family of
//! attracting period-4 cycles appears, living on a vertical segment in
//! column C and a horizontal segment in column D (the "CDCD" lines).
//! Two rectangles, one in column B and one in column C, are filled with
//! neutral period-4 cycles at every `ell`.
//!
//! All exponents here are exact per-step logarithms; the finite-time
//! routine accumulates the actual 2x2 derivative product and agrees with
//! the closed forms on the invariant sets.

use crate::error::Error;
use crate::map::{apply_l, classify_region, jacobian, Params, Point};

/// The invariant sets, ordered by their steady-state contraction value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InvariantSetId {
    PD,
    CDCD,
    BInv,
    CInv,
    AB,
    PA,
}

impl InvariantSetId {
    /// Display name matching the conventional labels.
    pub fn name(self) -> &'static str {
        match self {
            InvariantSetId::PD => "P_D",
            InvariantSetId::CDCD => "CDCD",
            InvariantSetId::BInv => "B_inv",
            InvariantSetId::CInv => "C_inv",
            InvariantSetId::AB => "AB",
            InvariantSetId::PA => "P_A",
        }
    }
}

/// Axis-wise Lyapunov exponents in nats per step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovPair {
    pub lambda_x: f64,
    pub lambda_y: f64,
}

/// An axis-aligned rectangle inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rectangle {
    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    /// Closed-rectangle membership.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_lo && p.x <= self.x_hi && p.y >= self.y_lo && p.y <= self.y_hi
    }

    pub fn center(&self) -> Point {
        Point {
            x: 0.5 * (self.x_lo + self.x_hi),
            y: 0.5 * (self.y_lo + self.y_hi),
        }
    }

    /// Intersection, or `None` when the overlap has no interior.
    pub fn intersect(&self, other: &Rectangle) -> Option<Rectangle> {
        let r = Rectangle {
            x_lo: self.x_lo.max(other.x_lo),
            x_hi: self.x_hi.min(other.x_hi),
            y_lo: self.y_lo.max(other.y_lo),
            y_hi: self.y_hi.min(other.y_hi),
        };
        if r.width() > 0.0 && r.height() > 0.0 {
            Some(r)
        } else {
            None
        }
    }
}

/// The fixed points `(P_A, P_D)` of `L`.
pub fn fixed_points(params: &Params) -> (Point, Point) {
    let ell = params.ell();
    let denom = 1.0 + 4.0 * ell;
    let p_a = Point {
        x: ell / denom,
        y: (1.0 + 2.0 * ell) / denom,
    };
    let p_d = Point {
        x: (1.0 + 3.0 * ell) / denom,
        y: 1.0 / (2.0 * denom),
    };
    (p_a, p_d)
}

/// The hyperbolic period-2 orbit: one point in column A, one in column B.
pub fn ab_orbit(params: &Params) -> (Point, Point) {
    let ell = params.ell();
    let in_a = Point {
        x: ell * (1.0 - 2.0 * ell),
        y: (1.0 - 2.0 * ell) / (3.0 - 4.0 * ell),
    };
    let in_b = Point {
        x: (1.0 - ell) / (3.0 - 4.0 * ell),
        y: 1.0 - ell,
    };
    (in_a, in_b)
}

/// The two orthogonal segments carrying the attracting period-4 cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdcdLines {
    /// Abscissa of the vertical segment in column C.
    pub x_line: f64,
    /// Ordinate of the horizontal segment in column D.
    pub y_line: f64,
    /// The vertical segment `x = x_line`, `y in [0, 1/2]` (degenerate width).
    pub vertical: Rectangle,
    /// The horizontal segment `y = y_line`, `x in [3/4, 1]` (degenerate height).
    pub horizontal: Rectangle,
}

/// Location of the CDCD attractor.
///
/// Fails for `ell < 1/8`: the formula then places the vertical line at
/// `x >= 3/4`, outside column C, and the cycle does not exist.
pub fn cdcd_attractor(params: &Params) -> Result<CdcdLines, Error> {
    let ell = params.ell();
    if ell < 0.125 {
        return Err(Error::CycleAbsent { ell });
    }
    let denom = 1.0 + 4.0 * ell;
    let x_line = (1.0 + ell) / denom;
    let y_line = 3.0 / (2.0 * denom);
    Ok(CdcdLines {
        x_line,
        y_line,
        vertical: Rectangle {
            x_lo: x_line,
            x_hi: x_line,
            y_lo: 0.0,
            y_hi: 0.5,
        },
        horizontal: Rectangle {
            x_lo: 0.75,
            x_hi: 1.0,
            y_lo: y_line,
            y_hi: y_line,
        },
    })
}

/// Value of the CDCD line formula without the existence gate; lies in
/// `[3/4, 1]` when `ell < 1/8`, which is exactly why the cycle is absent
/// there.
pub fn cdcd_line_formula(params: &Params) -> f64 {
    (1.0 + params.ell()) / (1.0 + 4.0 * params.ell())
}

/// The neutral invariant rectangles `(B_inv, C_inv)`.
///
/// `C_inv = [1/2, 3/4] x [1/2, 1]` for every `ell`. The B-column rectangle
/// is `[(1-2 ell)/2, 1/2] x [(1-4 ell)/(2(1-2 ell)), 1/2]`; requiring the
/// four-step branch-B cycle to stay in column B forces the x lower bound
/// `(1-2 ell)/2`, and the y bounds follow from it.
pub fn invariant_rectangles(params: &Params) -> (Rectangle, Rectangle) {
    let ell = params.ell();
    let b_inv = Rectangle {
        x_lo: (1.0 - 2.0 * ell) / 2.0,
        x_hi: 0.5,
        y_lo: (1.0 - 4.0 * ell) / (2.0 * (1.0 - 2.0 * ell)),
        y_hi: 0.5,
    };
    let c_inv = Rectangle {
        x_lo: 0.5,
        x_hi: 0.75,
        y_lo: 0.5,
        y_hi: 1.0,
    };
    (b_inv, c_inv)
}

/// Closed-form Lyapunov exponents of an invariant set.
///
/// The AB and CDCD orbits are rejected for `ell < 1/8`. The CDCD pair is
/// reported for a point on the vertical (column C) segment; on the
/// horizontal segment the axes swap.
pub fn lyapunov_analytic(set: InvariantSetId, params: &Params) -> Result<LyapunovPair, Error> {
    let ell = params.ell();
    let pair = match set {
        InvariantSetId::PA => {
            // Written as the negation of the P_D exponent so the
            // reciprocity between the two fixed points is exact.
            let l = -(0.5 * (4.0 * ell).ln());
            LyapunovPair {
                lambda_x: l,
                lambda_y: l,
            }
        }
        InvariantSetId::PD => {
            let l = 0.5 * (4.0 * ell).ln();
            LyapunovPair {
                lambda_x: l,
                lambda_y: l,
            }
        }
        InvariantSetId::CDCD => {
            if ell < 0.125 {
                return Err(Error::CycleAbsent { ell });
            }
            LyapunovPair {
                lambda_x: 0.5 * (4.0 * ell).ln(),
                lambda_y: 0.0,
            }
        }
        InvariantSetId::AB => {
            if ell < 0.125 {
                return Err(Error::CycleAbsent { ell });
            }
            LyapunovPair {
                lambda_x: 0.5 * ((1.0 - 2.0 * ell) / (2.0 * ell)).ln(),
                lambda_y: 0.5 * (1.0 / (2.0 * (1.0 - 2.0 * ell))).ln(),
            }
        }
        InvariantSetId::BInv | InvariantSetId::CInv => LyapunovPair {
            lambda_x: 0.0,
            lambda_y: 0.0,
        },
    };
    Ok(pair)
}

/// Orbits closing within this sup-norm distance over their first few steps
/// are treated as periodic.
const PERIOD_SNAP_TOL: f64 = 1e-12;

/// Finite-time Lyapunov exponents along the `L` orbit of `p`.
///
/// The step count must be even: single branch derivatives are antidiagonal
/// and only products of even length are diagonal, which is what gives the
/// exponents their axis labels. The 2x2 product is accumulated directly
/// and rescaled every 64 steps with a log accumulator so large `n` cannot
/// overflow.
///
/// Orbits that close within `1e-12` during the first four steps are
/// treated as exactly periodic and their symbolic cycle is repeated. This
/// keeps the computation on the true orbit for repelling fixed points and
/// short cycles, where bare floating-point iteration would otherwise be
/// thrown off the orbit and onto an attractor.
pub fn lyapunov_finite_time(p: Point, n: usize, params: &Params) -> Result<LyapunovPair, Error> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::OddStepCount(n));
    }

    let mut probe = [p; 5];
    for i in 1..=4 {
        probe[i] = apply_l(probe[i - 1], params);
    }
    let period = (1..=4).find(|&m| probe[m].sup_distance(p) <= PERIOD_SNAP_TOL);

    let mut m = [[1.0f64, 0.0], [0.0, 1.0]];
    let mut log_scale = 0.0f64;
    let mut q = p;
    for step in 0..n {
        let point = match period {
            Some(cycle) => probe[step % cycle],
            None => {
                let current = q;
                q = apply_l(q, params);
                current
            }
        };
        let j = jacobian(classify_region(point, params), params).matrix;
        m = [
            [
                j[0][0] * m[0][0] + j[0][1] * m[1][0],
                j[0][0] * m[0][1] + j[0][1] * m[1][1],
            ],
            [
                j[1][0] * m[0][0] + j[1][1] * m[1][0],
                j[1][0] * m[0][1] + j[1][1] * m[1][1],
            ],
        ];
        if step % 64 == 63 {
            let scale = m
                .iter()
                .flatten()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            if scale > 0.0 {
                for row in &mut m {
                    for v in row {
                        *v /= scale;
                    }
                }
                log_scale += scale.ln();
            }
        }
    }

    // Even-length products of antidiagonal branch matrices are diagonal;
    // the off-diagonal entries are structural zeros.
    debug_assert_eq!(m[0][1], 0.0);
    debug_assert_eq!(m[1][0], 0.0);
    Ok(LyapunovPair {
        lambda_x: (m[0][0].abs().ln() + log_scale) / n as f64,
        lambda_y: (m[1][1].abs().ln() + log_scale) / n as f64,
    })
}

/// Sum of the exponent sums of the conjugate AB and CDCD orbits; vanishes
/// identically.
pub fn conjugacy_defect(params: &Params) -> Result<f64, Error> {
    let ab = lyapunov_analytic(InvariantSetId::AB, params)?;
    let cd = lyapunov_analytic(InvariantSetId::CDCD, params)?;
    Ok(ab.lambda_x + ab.lambda_y + cd.lambda_x + cd.lambda_y)
}

/// One row of the steady-state contraction table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaTableRow {
    pub set: InvariantSetId,
    pub lambda: f64,
}

/// Number of invariant sets at this `ell`: 6 for `ell >= 1/8`, 4 below.
pub fn invariant_set_count(params: &Params) -> usize {
    if params.ell() >= 0.125 {
        6
    } else {
        4
    }
}

/// Steady-state time-average contraction per invariant set, in decreasing
/// order of value.
pub fn steady_state_lambda_table(params: &Params) -> Vec<LambdaTableRow> {
    let phi = params.phi();
    if params.ell() >= 0.125 {
        vec![
            LambdaTableRow {
                set: InvariantSetId::PD,
                lambda: phi,
            },
            LambdaTableRow {
                set: InvariantSetId::CDCD,
                lambda: phi / 2.0,
            },
            LambdaTableRow {
                set: InvariantSetId::BInv,
                lambda: 0.0,
            },
            LambdaTableRow {
                set: InvariantSetId::CInv,
                lambda: 0.0,
            },
            LambdaTableRow {
                set: InvariantSetId::AB,
                lambda: -phi / 2.0,
            },
            LambdaTableRow {
                set: InvariantSetId::PA,
                lambda: -phi,
            },
        ]
    } else {
        vec![
            LambdaTableRow {
                set: InvariantSetId::PD,
                lambda: phi,
            },
            LambdaTableRow {
                set: InvariantSetId::BInv,
                lambda: 0.0,
            },
            LambdaTableRow {
                set: InvariantSetId::CInv,
                lambda: 0.0,
            },
            LambdaTableRow {
                set: InvariantSetId::PA,
                lambda: -phi,
            },
        ]
    }
}
