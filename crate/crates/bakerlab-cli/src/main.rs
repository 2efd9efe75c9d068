//! Command-line experiments for the map laboratory.
//!
//! Every subcommand validates its flags, runs one experiment, and writes
//! its results to files with fixed formatting, so identical invocations
//! produce byte-identical outputs. Exit codes: 1 for validation failures,
//! 2 for I/O failures, 3 when the enumeration resource guard trips.
//! `BAKERLAB_THREADS` caps the worker pool (0 or unset = automatic).

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bakerlab::analysis::{
    ab_orbit, cdcd_attractor, conjugacy_defect, fixed_points, invariant_rectangles,
    invariant_set_count, lyapunov_analytic, lyapunov_finite_time, steady_state_lambda_table,
    InvariantSetId, Rectangle,
};
use bakerlab::ensemble::{
    basin_measures_from_raster, basin_raster, configure_thread_pool, empirical_fr_fit,
    ensemble_lambda_histogram, steady_state_consistency, AttractorId, DistributionSpec,
    DEFAULT_MAX_ITER, DEFAULT_MIN_COUNT, DEFAULT_TOL,
};
use bakerlab::map::{classify_region, orbit};
use bakerlab::measure::{
    enumerate_cylinders_with, exact_fr_curve_with, EnumerationLimits, DEFAULT_MAX_DEPTH,
};
use bakerlab::{MapKind, Params, Point};

use output::{fmt_f64, pgm_bytes, write_atomic, Json};

#[derive(Parser)]
#[command(
    name = "bakerlab",
    version,
    about = "Exact-measure and Monte Carlo experiments on a piecewise-affine baker-type map"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate one orbit; CSV columns step, x, y, region, lambda_cumavg
    Orbit {
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        y0: f64,
        #[arg(long)]
        steps: usize,
        /// Map to iterate: M or L
        #[arg(long, default_value = "L", value_parser = parse_map_kind)]
        map: MapKind,
        #[arg(long, default_value = "orbit.csv")]
        out: PathBuf,
    },
    /// Fixed points, periodic orbits, invariant rectangles and the
    /// steady-state contraction table, as JSON
    Invariants {
        #[arg(long)]
        ell: f64,
        #[arg(long, default_value = "invariants.json")]
        out: PathBuf,
    },
    /// Lyapunov exponents of an invariant set, analytic and optionally
    /// finite-time
    Lyapunov {
        #[arg(long)]
        ell: f64,
        /// One of PA, PD, AB, CDCD, BINV, CINV
        #[arg(long, value_parser = parse_set)]
        set: InvariantSetId,
        /// Also compute the finite-time pair along the orbit
        #[arg(long)]
        numeric: bool,
        /// Steps for the finite-time pair (even)
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value = "lyapunov.json")]
        out: PathBuf,
    },
    /// Exact fluctuation-ratio curve; CSV columns k, A, P_plus, P_minus,
    /// lhs, deviation
    FrExact {
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        steps: usize,
        /// Enumeration depth guard
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        #[arg(long, default_value = "fr_exact.csv")]
        out: PathBuf,
    },
    /// Monte Carlo fluctuation-ratio test; CSV of bin pairs plus a JSON
    /// summary with the fitted slope
    FrMc {
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// uniform | power:a,b | gaussian:cx,cy,s
        #[arg(long, default_value = "uniform", value_parser = parse_dist)]
        dist: DistributionSpec,
        #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
        min_count: u64,
        #[arg(long, default_value = "fr_mc.csv")]
        out: PathBuf,
        #[arg(long, default_value = "fr_mc_summary.json")]
        summary_out: PathBuf,
    },
    /// Exact cylinder sets; CSV columns itinerary, measure, image bounds
    Cylinders {
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        #[arg(long, default_value = "cylinders.csv")]
        out: PathBuf,
    },
    /// Basin-of-attraction raster (PGM) and basin measures (JSON)
    Basins {
        #[arg(long)]
        ell: f64,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value = "basins.pgm")]
        out: PathBuf,
        #[arg(long, default_value = "basin_measures.json")]
        measures_out: PathBuf,
    },
    /// Steady-state consistency check: ensemble time average of the
    /// contraction rate against the basin-measure formula
    SteadyState {
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trajectory length; the average runs over the last half
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value = "steady_state.json")]
        out: PathBuf,
    },
}

fn parse_map_kind(s: &str) -> Result<MapKind, String> {
    match s.to_ascii_uppercase().as_str() {
        "M" => Ok(MapKind::M),
        "L" => Ok(MapKind::L),
        _ => Err(format!("unknown map '{s}' (expected M or L)")),
    }
}

fn parse_set(s: &str) -> Result<InvariantSetId, String> {
    match s.to_ascii_uppercase().as_str() {
        "PA" => Ok(InvariantSetId::PA),
        "PD" => Ok(InvariantSetId::PD),
        "AB" => Ok(InvariantSetId::AB),
        "CDCD" => Ok(InvariantSetId::CDCD),
        "BINV" => Ok(InvariantSetId::BInv),
        "CINV" => Ok(InvariantSetId::CInv),
        _ => Err(format!(
            "unknown set '{s}' (expected PA, PD, AB, CDCD, BINV or CINV)"
        )),
    }
}

fn parse_dist(s: &str) -> Result<DistributionSpec, String> {
    let parse_fields = |body: &str, expected: usize| -> Result<Vec<f64>, String> {
        let fields: Vec<&str> = body.split(',').collect();
        if fields.len() != expected {
            return Err(format!(
                "expected {expected} comma-separated parameters, got '{body}'"
            ));
        }
        fields
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad number '{f}' in distribution spec"))
            })
            .collect()
    };
    let spec = if s == "uniform" {
        DistributionSpec::Uniform
    } else if let Some(body) = s.strip_prefix("power:") {
        let v = parse_fields(body, 2)?;
        DistributionSpec::Power { a: v[0], b: v[1] }
    } else if let Some(body) = s.strip_prefix("gaussian:") {
        let v = parse_fields(body, 3)?;
        DistributionSpec::GaussianClipped {
            cx: v[0],
            cy: v[1],
            s: v[2],
        }
    } else {
        return Err(format!(
            "unknown distribution '{s}' (expected uniform, power:a,b or gaussian:cx,cy,s)"
        ));
    };
    // Parameter ranges are checked downstream, with the other semantic
    // validation, so the diagnostics stay single-line.
    Ok(spec)
}

enum CmdError {
    Validation(String),
    Io(std::io::Error),
    Guard(String),
}

impl CmdError {
    fn code(&self) -> u8 {
        match self {
            CmdError::Validation(_) => 1,
            CmdError::Io(_) => 2,
            CmdError::Guard(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CmdError::Validation(m) | CmdError::Guard(m) => m.clone(),
            CmdError::Io(e) => e.to_string(),
        }
    }
}

impl From<bakerlab::Error> for CmdError {
    fn from(e: bakerlab::Error) -> Self {
        match e {
            bakerlab::Error::CylinderBudget { .. } => CmdError::Guard(e.to_string()),
            _ => CmdError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    if let Err(e) = setup_threads() {
        eprintln!("error: {}", e.message());
        return ExitCode::from(e.code());
    }

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn setup_threads() -> Result<(), CmdError> {
    match std::env::var("BAKERLAB_THREADS") {
        Err(_) => Ok(()),
        Ok(v) if v.is_empty() => Ok(()),
        Ok(v) => {
            let threads: usize = v.parse().map_err(|_| {
                CmdError::Validation(format!("BAKERLAB_THREADS must be an integer, got '{v}'"))
            })?;
            configure_thread_pool(threads).map_err(CmdError::from)
        }
    }
}

fn wrote(path: &PathBuf) {
    println!("wrote {}", path.display());
}

fn run(command: Command) -> Result<(), CmdError> {
    match command {
        Command::Orbit {
            ell,
            x0,
            y0,
            steps,
            map,
            out,
        } => {
            let params = Params::new(ell)?;
            let start = Point::new(x0, y0)?;
            let o = orbit(start, steps, map, &params);
            let mut csv = String::from("step,x,y,region,lambda_cumavg\n");
            let mut net = 0i64;
            for (s, p) in o.points.iter().enumerate() {
                let cumavg = if s == 0 {
                    0.0
                } else {
                    net as f64 * params.phi() / s as f64
                };
                csv.push_str(&format!(
                    "{s},{},{},{},{}\n",
                    fmt_f64(p.x),
                    fmt_f64(p.y),
                    classify_region(*p, &params).label(),
                    fmt_f64(cumavg)
                ));
                if s < o.itinerary.len() {
                    match o.itinerary[s] {
                        bakerlab::Region::A => net -= 1,
                        bakerlab::Region::D => net += 1,
                        _ => {}
                    }
                }
            }
            write_atomic(&out, csv.as_bytes())?;
            wrote(&out);
            Ok(())
        }

        Command::Invariants { ell, out } => {
            let params = Params::new(ell)?;
            let doc = invariants_json(&params);
            write_atomic(&out, doc.render().as_bytes())?;
            wrote(&out);
            Ok(())
        }

        Command::Lyapunov {
            ell,
            set,
            numeric,
            steps,
            out,
        } => {
            let params = Params::new(ell)?;
            let analytic = lyapunov_analytic(set, &params)?;
            let mut fields = vec![
                ("ell", Json::Float(params.ell())),
                ("set", Json::Str(set.name().to_string())),
                (
                    "analytic",
                    Json::Object(vec![
                        ("lambda_x", Json::Float(analytic.lambda_x)),
                        ("lambda_y", Json::Float(analytic.lambda_y)),
                    ]),
                ),
            ];
            if numeric {
                let start = representative_point(set, &params)?;
                let pair = lyapunov_finite_time(start, steps, &params)?;
                fields.push((
                    "numeric",
                    Json::Object(vec![
                        ("lambda_x", Json::Float(pair.lambda_x)),
                        ("lambda_y", Json::Float(pair.lambda_y)),
                    ]),
                ));
                fields.push(("numeric_steps", Json::UInt(steps as u64)));
            } else {
                fields.push(("numeric", Json::Null));
                fields.push(("numeric_steps", Json::Null));
            }
            if set == InvariantSetId::AB || set == InvariantSetId::CDCD {
                fields.push(("conjugacy_defect", Json::Float(conjugacy_defect(&params)?)));
            }
            write_atomic(&out, Json::Object(fields).render().as_bytes())?;
            wrote(&out);
            Ok(())
        }

        Command::FrExact {
            ell,
            steps,
            max_depth,
            out,
        } => {
            let params = Params::new(ell)?;
            let limits = EnumerationLimits {
                max_depth,
                ..Default::default()
            };
            let curve = exact_fr_curve_with(&params, steps, limits)?;
            let mut csv = String::from("k,A,P_plus,P_minus,lhs,deviation\n");
            for p in &curve {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.k,
                    fmt_f64(p.a),
                    fmt_f64(p.p_plus),
                    fmt_f64(p.p_minus),
                    fmt_f64(p.lhs),
                    fmt_f64(p.deviation)
                ));
            }
            write_atomic(&out, csv.as_bytes())?;
            wrote(&out);
            Ok(())
        }

        Command::FrMc {
            ell,
            steps,
            samples,
            seed,
            dist,
            min_count,
            out,
            summary_out,
        } => {
            let params = Params::new(ell)?;
            if min_count == 0 {
                return Err(CmdError::Validation(
                    "min-count must be at least 1".to_string(),
                ));
            }
            let hist = ensemble_lambda_histogram(dist, samples, seed, steps, &params)?;
            let mut csv = String::from("k,A,count_plus,count_minus,lhs\n");
            for k in 1..=steps as i64 {
                let plus = hist.count(k);
                let minus = hist.count(-k);
                if plus == 0 && minus == 0 {
                    continue;
                }
                let lhs = if plus > 0 && minus > 0 {
                    (plus as f64 / minus as f64).ln() / steps as f64
                } else if plus > 0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                };
                csv.push_str(&format!(
                    "{k},{},{plus},{minus},{}\n",
                    fmt_f64(hist.lambda_value(k)),
                    fmt_f64(lhs)
                ));
            }
            write_atomic(&out, csv.as_bytes())?;
            wrote(&out);

            let fit = empirical_fr_fit(&hist, min_count);
            let (slope, qualifying, underdetermined) = match &fit {
                Ok(f) => (
                    Json::Float(f.slope),
                    f.points.len() as u64,
                    Json::Bool(f.underdetermined),
                ),
                Err(bakerlab::Error::NoQualifyingBins { .. }) => {
                    (Json::Null, 0, Json::Bool(true))
                }
                Err(e) => return Err(e.clone().into()),
            };
            let summary = Json::Object(vec![
                ("ell", Json::Float(params.ell())),
                ("steps", Json::UInt(steps as u64)),
                ("samples", Json::UInt(samples)),
                ("seed", Json::UInt(seed)),
                ("dist", Json::Str(dist_string(dist))),
                ("min_count", Json::UInt(min_count)),
                ("qualifying_bins", Json::UInt(qualifying)),
                ("underdetermined", underdetermined),
                ("slope", slope),
            ]);
            write_atomic(&summary_out, summary.render().as_bytes())?;
            wrote(&summary_out);
            Ok(())
        }

        Command::Cylinders {
            ell,
            steps,
            max_depth,
            out,
        } => {
            let params = Params::new(ell)?;
            let limits = EnumerationLimits {
                max_depth,
                ..Default::default()
            };
            let cylinders = enumerate_cylinders_with(&params, steps, limits)?;
            let mut csv = String::from("itinerary,measure,x_lo,x_hi,y_lo,y_hi\n");
            for c in &cylinders {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    c.itinerary_string(),
                    fmt_f64(c.measure),
                    fmt_f64(c.image.x_lo),
                    fmt_f64(c.image.x_hi),
                    fmt_f64(c.image.y_lo),
                    fmt_f64(c.image.y_hi)
                ));
            }
            write_atomic(&out, csv.as_bytes())?;
            wrote(&out);
            Ok(())
        }

        Command::Basins {
            ell,
            resolution,
            max_iter,
            tol,
            out,
            measures_out,
        } => {
            let params = Params::new(ell)?;
            if resolution < 2 {
                return Err(CmdError::Validation(
                    "resolution must be at least 2".to_string(),
                ));
            }
            if max_iter == 0 {
                return Err(CmdError::Validation(
                    "max-iter must be at least 1".to_string(),
                ));
            }
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CmdError::Validation(format!(
                    "tol must be a positive real, got {tol}"
                )));
            }
            let raster = basin_raster(&params, resolution, max_iter, tol);
            write_atomic(&out, &pgm_bytes(&raster))?;
            wrote(&out);

            let measures = basin_measures_from_raster(&raster);
            let doc = Json::Object(vec![
                ("ell", Json::Float(params.ell())),
                ("resolution", Json::UInt(resolution as u64)),
                ("max_iter", Json::UInt(max_iter as u64)),
                ("tol", Json::Float(tol)),
                (
                    "measures",
                    Json::Object(
                        AttractorId::ALL
                            .iter()
                            .map(|id| (id.name(), Json::Float(measures[id])))
                            .collect(),
                    ),
                ),
            ]);
            write_atomic(&measures_out, doc.render().as_bytes())?;
            wrote(&measures_out);
            Ok(())
        }

        Command::SteadyState {
            ell,
            samples,
            seed,
            steps,
            out,
        } => {
            let params = Params::new(ell)?;
            let check = steady_state_consistency(&params, samples, seed, steps)?;
            let doc = Json::Object(vec![
                ("ell", Json::Float(params.ell())),
                ("samples", Json::UInt(samples)),
                ("seed", Json::UInt(seed)),
                ("steps", Json::UInt(steps as u64)),
                ("lhs", Json::Float(check.lhs)),
                ("rhs", Json::Float(check.rhs)),
                ("rel_error", Json::Float(check.rel_error)),
                (
                    "nonconvergent_fraction",
                    Json::Float(check.nonconvergent_fraction),
                ),
            ]);
            write_atomic(&out, doc.render().as_bytes())?;
            wrote(&out);
            Ok(())
        }
    }
}

fn dist_string(dist: DistributionSpec) -> String {
    match dist {
        DistributionSpec::Uniform => "uniform".to_string(),
        DistributionSpec::Power { a, b } => format!("power:{a},{b}"),
        DistributionSpec::GaussianClipped { cx, cy, s } => format!("gaussian:{cx},{cy},{s}"),
    }
}

/// A point on the requested invariant set, used as the start of the
/// finite-time exponent orbit. The CDCD representative sits on the vertical
/// (column C) segment, matching the axis convention of the analytic pair.
fn representative_point(set: InvariantSetId, params: &Params) -> Result<Point, bakerlab::Error> {
    Ok(match set {
        InvariantSetId::PA => fixed_points(params).0,
        InvariantSetId::PD => fixed_points(params).1,
        InvariantSetId::AB => ab_orbit(params).0,
        InvariantSetId::CDCD => {
            let lines = cdcd_attractor(params)?;
            Point {
                x: lines.x_line,
                y: 0.3,
            }
        }
        InvariantSetId::BInv => invariant_rectangles(params).0.center(),
        InvariantSetId::CInv => invariant_rectangles(params).1.center(),
    })
}

fn point_json(p: Point) -> Json {
    Json::Object(vec![("x", Json::Float(p.x)), ("y", Json::Float(p.y))])
}

fn rect_json(r: &Rectangle) -> Json {
    Json::Object(vec![
        ("x_lo", Json::Float(r.x_lo)),
        ("x_hi", Json::Float(r.x_hi)),
        ("y_lo", Json::Float(r.y_lo)),
        ("y_hi", Json::Float(r.y_hi)),
    ])
}

fn invariants_json(params: &Params) -> Json {
    let (p_a, p_d) = fixed_points(params);
    let (ab_a, ab_b) = ab_orbit(params);
    let (b_inv, c_inv) = invariant_rectangles(params);
    let cdcd = match cdcd_attractor(params) {
        Ok(lines) => Json::Object(vec![
            ("x_line", Json::Float(lines.x_line)),
            ("y_line", Json::Float(lines.y_line)),
            ("vertical", rect_json(&lines.vertical)),
            ("horizontal", rect_json(&lines.horizontal)),
        ]),
        Err(_) => Json::Null,
    };
    let table = steady_state_lambda_table(params)
        .into_iter()
        .map(|row| {
            Json::Object(vec![
                ("set", Json::Str(row.set.name().to_string())),
                ("lambda", Json::Float(row.lambda)),
            ])
        })
        .collect();
    Json::Object(vec![
        ("ell", Json::Float(params.ell())),
        ("phi", Json::Float(params.phi())),
        (
            "n_invariant_sets",
            Json::UInt(invariant_set_count(params) as u64),
        ),
        (
            "fixed_points",
            Json::Object(vec![("p_a", point_json(p_a)), ("p_d", point_json(p_d))]),
        ),
        (
            "ab_orbit",
            Json::Object(vec![("in_a", point_json(ab_a)), ("in_b", point_json(ab_b))]),
        ),
        ("cdcd", cdcd),
        (
            "rectangles",
            Json::Object(vec![
                ("b_inv", rect_json(&b_inv)),
                ("c_inv", rect_json(&c_inv)),
            ]),
        ),
        ("lambda_table", Json::Array(table)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use bakerlab::map::lambda_time_average;

    #[test]
    fn exit_codes_by_error_kind() {
        let guard: CmdError = bakerlab::Error::CylinderBudget {
            live: 11,
            depth: 3,
            limit: 10,
        }
        .into();
        assert_eq!(guard.code(), 3);
        let validation: CmdError = bakerlab::Error::InvalidParameter("x".into()).into();
        assert_eq!(validation.code(), 1);
        let io: CmdError = std::io::Error::other("disk").into();
        assert_eq!(io.code(), 2);
    }

    #[test]
    fn dist_parsing() {
        assert_eq!(parse_dist("uniform").unwrap(), DistributionSpec::Uniform);
        assert_eq!(
            parse_dist("power:1,0").unwrap(),
            DistributionSpec::Power { a: 1.0, b: 0.0 }
        );
        assert_eq!(
            parse_dist("gaussian:0.5,0.5,0.25").unwrap(),
            DistributionSpec::GaussianClipped {
                cx: 0.5,
                cy: 0.5,
                s: 0.25
            }
        );
        assert!(parse_dist("power:1").is_err());
        assert!(parse_dist("triangle").is_err());
        // Range checking is deferred to the semantic validation pass.
        assert!(parse_dist("power:-1,0").is_ok());
    }

    #[test]
    fn set_parsing_is_case_insensitive() {
        assert_eq!(parse_set("cdcd").unwrap(), InvariantSetId::CDCD);
        assert_eq!(parse_set("Binv").unwrap(), InvariantSetId::BInv);
        assert!(parse_set("XY").is_err());
    }

    #[test]
    fn orbit_csv_accumulator_matches_time_average() {
        let params = Params::new(0.2).unwrap();
        let p = Point { x: 0.81, y: 0.13 };
        let avg = lambda_time_average(p, 7, MapKind::L, &params);
        let o = orbit(p, 7, MapKind::L, &params);
        let mut net = 0i64;
        for r in &o.itinerary {
            match r {
                bakerlab::Region::A => net -= 1,
                bakerlab::Region::D => net += 1,
                _ => {}
            }
        }
        assert_eq!(net, avg.net_count);
    }
}
