mod expr;
mod family;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nonlocal_core::geometry::{
    emit_regions, hu_curve_point, region_report, symmetric_slice_point, violation_identity, Region,
    RegionRequest, Sampling, Setup, BOUNDARY_TOL,
};
use nonlocal_core::lhv::{lhv_feasibility_in, sample_raffle, FEASIBILITY_TOL};
use nonlocal_core::{
    balance_array, check_nonsignaling, find_broken_arrows, relabel_array, ChiPoint,
    CorrelationArray, Outcome, Raffle, Relabeling, Scenario, Side, DEFAULT_TOL,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use family::{Family, FamilyArgs, FamilyKind};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters outside a model's domain (exit 2).
    Validation(String),
    /// Anything else (exit 1).
    Internal(String),
}

impl From<nonlocal_core::Error> for CliError {
    fn from(e: nonlocal_core::Error) -> Self {
        match e {
            nonlocal_core::Error::Lp(_) => CliError::Internal(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

/// Hardy and Hardy-Unruh correlations: states, arrays, broken arrows,
/// raffle models and correlation geometry.
#[derive(Parser, Debug, Serialize)]
#[command(name = "nonlocal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct Common {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Zero/boundary tolerance; each command has its own default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
enum Command {
    /// Amplitudes in a chosen basis pair.
    State {
        #[command(flatten)]
        family: FamilyArgs,
        /// Alice's and Bob's basis labels, e.g. `b,b`.
        #[arg(long, value_name = "A,B")]
        settings: Option<String>,
    },
    /// Correlation array over every setting pair.
    Array {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum)]
        relabel: Option<RelabelKind>,
        /// Replace each cell by its balanced version `(d, s, s, d)`.
        #[arg(long)]
        balance: bool,
    },
    /// Direct conditionals, their chains, and broken arrows.
    Chains {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum)]
        relabel: Option<RelabelKind>,
    },
    /// Raffle-ticket models.
    Lhv {
        #[command(subcommand)]
        action: LhvCommand,
    },
    /// Local/quantum/non-signaling membership of a point or a family array.
    Geometry {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = Setup::SymmetricChsh)]
        setup: Setup,
        /// Correlation coordinates `x,y,z`.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "family")]
        point: Option<String>,
    },
    /// The Hardy-Unruh curve and its CHSH violation on an alpha grid over [0, pi/2].
    Curve {
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Sample a region of the local, quantum or non-signaling set.
    Regions {
        #[arg(long, default_value_t = Setup::Mermin)]
        setup: Setup,
        #[arg(long, default_value_t = Region::L)]
        region: Region,
        #[arg(long, value_enum, default_value_t = SamplingKind::Grid)]
        sampling: SamplingKind,
        /// Fixed coordinate for sections and projections (0, 1 or 2).
        #[arg(long)]
        axis: Option<usize>,
        /// Value of the fixed coordinate for sections.
        #[arg(long, allow_hyphen_values = true)]
        value: Option<String>,
        #[arg(long, default_value_t = 21)]
        resolution: usize,
    },
    /// Repeat an analysis over an alpha grid.
    Sweep {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum)]
        what: SweepWhat,
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Grid start (default 0).
        #[arg(long, allow_hyphen_values = true)]
        from: Option<String>,
        /// Grid end (default pi/2).
        #[arg(long, allow_hyphen_values = true)]
        to: Option<String>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
enum LhvCommand {
    /// Does some raffle reproduce the family's array?
    Feasibility {
        #[command(flatten)]
        family: FamilyArgs,
        /// Tickets carry one set of settings with opposite outcomes per half.
        #[arg(long)]
        shared: bool,
    },
    /// Monte Carlo draws from a raffle.
    Sample {
        #[command(flatten)]
        family: FamilyArgs,
        /// `family` uses the weights found for the family's array.
        #[arg(long, value_enum, default_value_t = RaffleKind::Family)]
        raffle: RaffleKind,
        #[arg(long, default_value_t = 100_000)]
        draws: u64,
        #[arg(long)]
        shared: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RelabelKind {
    /// Maps a Hardy-Unruh array onto the Hardy pattern.
    HuToHardy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RaffleKind {
    Family,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SamplingKind {
    Grid,
    Boundary,
    Section,
    Projection,
    Curve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SweepWhat {
    Array,
    Chains,
    Lhv,
    Geometry,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|bytes| {
        match &cli.common.out {
            Some(path) => fs::write(path, bytes)?,
            None => io::stdout().lock().write_all(&bytes)?,
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Everything a command produces, before formatting.
struct Report {
    tol: f64,
    json: Vec<(&'static str, Value)>,
    csv: Vec<u8>,
}

fn run(cli: &Cli) -> Result<Vec<u8>> {
    if let Some(t) = cli.common.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Validation(format!(
                "--tol must be positive, got {t}"
            )));
        }
    }
    let tol = |default: f64| cli.common.tol.unwrap_or(default);
    let want_csv = cli.common.format == Format::Csv;
    let report = match &cli.command {
        Command::State { family, settings } => {
            state(family, settings.as_deref(), tol(DEFAULT_TOL))?
        }
        Command::Array {
            family,
            relabel,
            balance,
        } => array(family, *relabel, *balance, tol(DEFAULT_TOL))?,
        Command::Chains { family, relabel } => chains(family, *relabel, tol(DEFAULT_TOL))?,
        Command::Lhv { action } => match action {
            LhvCommand::Feasibility { family, shared } => {
                feasibility(family, *shared, tol(FEASIBILITY_TOL))?
            }
            LhvCommand::Sample {
                family,
                raffle,
                draws,
                shared,
            } => sample(
                family,
                *raffle,
                *draws,
                *shared,
                cli.common.seed,
                tol(FEASIBILITY_TOL),
            )?,
        },
        Command::Geometry {
            family,
            setup,
            point,
        } => geometry(family, *setup, point.as_deref(), tol(BOUNDARY_TOL))?,
        Command::Curve { points } => curve(*points)?,
        Command::Regions {
            setup,
            region,
            sampling,
            axis,
            value,
            resolution,
        } => {
            let sampling = match sampling {
                SamplingKind::Grid => Sampling::Grid,
                SamplingKind::Boundary => Sampling::Boundary,
                SamplingKind::Curve => Sampling::Curve,
                SamplingKind::Section => {
                    let value = value.as_deref().ok_or_else(|| {
                        CliError::Validation("section sampling needs --value".into())
                    })?;
                    Sampling::Section {
                        axis: axis.ok_or_else(|| {
                            CliError::Validation("section sampling needs --axis".into())
                        })?,
                        value: expr::eval(value).map_err(CliError::Validation)?,
                    }
                }
                SamplingKind::Projection => Sampling::Projection {
                    axis: axis.ok_or_else(|| {
                        CliError::Validation("projection sampling needs --axis".into())
                    })?,
                },
            };
            let request = RegionRequest {
                setup: *setup,
                region: *region,
                sampling,
                resolution: *resolution,
                tol: tol(BOUNDARY_TOL),
            };
            regions(request)?
        }
        Command::Sweep {
            family,
            what,
            points,
            from,
            to,
        } => {
            let default_tol = match what {
                SweepWhat::Lhv => FEASIBILITY_TOL,
                SweepWhat::Geometry => BOUNDARY_TOL,
                _ => DEFAULT_TOL,
            };
            sweep(
                family,
                *what,
                *points,
                from.as_deref(),
                to.as_deref(),
                tol(default_tol),
                want_csv,
            )?
        }
    };

    if want_csv {
        return Ok(report.csv);
    }
    let mut doc = Map::new();
    doc.insert(
        "meta".into(),
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": serde_json::to_value(cli)?,
            "tol": report.tol,
            "seed": cli.common.seed,
        }),
    );
    for (key, value) in report.json {
        doc.insert(key.into(), value);
    }
    let mut bytes = serde_json::to_vec_pretty(&Value::Object(doc))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Shortest text that parses back to the same `f64`, switching to
/// exponent notation for very small or large magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn state(args: &FamilyArgs, settings: Option<&str>, tol: f64) -> Result<Report> {
    let fam = args.resolve()?;
    let st = match settings {
        None => fam.state.clone(),
        Some(pair) => {
            let (a, b) = pair.split_once(',').ok_or_else(|| {
                CliError::Validation(format!("--settings wants two labels `A,B`, got `{pair}`"))
            })?;
            let sa = fam.setting(Side::Alice, a.trim())?;
            let sb = fam.setting(Side::Bob, b.trim())?;
            fam.state.in_basis(sa, sb)?
        }
    };
    let labels = ["++", "+-", "-+", "--"];
    let rows = labels.iter().zip(st.amplitudes()).map(|(l, z)| {
        vec![
            st.basis_a().label.clone(),
            st.basis_b().label.clone(),
            l.to_string(),
            num(z.re),
            num(z.im),
        ]
    });
    Ok(Report {
        tol,
        csv: csv_bytes(&["basis_a", "basis_b", "component", "re", "im"], rows)?,
        json: vec![("state", serde_json::to_value(&st)?)],
    })
}

fn family_array(fam: &Family, relabel: Option<RelabelKind>) -> Result<CorrelationArray> {
    let array = fam.array()?;
    Ok(match relabel {
        None => array,
        Some(RelabelKind::HuToHardy) => relabel_array(&array, &Relabeling::hu_to_hardy())?,
    })
}

fn array(
    args: &FamilyArgs,
    relabel: Option<RelabelKind>,
    balance: bool,
    tol: f64,
) -> Result<Report> {
    let fam = args.resolve()?;
    let mut array = family_array(&fam, relabel)?;
    if balance {
        array = balance_array(&array);
    }
    let mut csv = Vec::new();
    array.write_csv(&mut csv)?;
    Ok(Report {
        tol,
        csv,
        json: vec![
            (
                "nonsignaling",
                serde_json::to_value(check_nonsignaling(&array, tol))?,
            ),
            ("correlators", serde_json::to_value(array.correlators())?),
            ("array", serde_json::to_value(&array)?),
        ],
    })
}

fn chains(args: &FamilyArgs, relabel: Option<RelabelKind>, tol: f64) -> Result<Report> {
    let fam = args.resolve()?;
    let array = family_array(&fam, relabel)?;
    let report = find_broken_arrows(&array, tol);
    let rows = report.broken.iter().map(|b| {
        vec![
            b.antecedent.to_string(),
            b.consequent.to_string(),
            b.witness_outcome.to_string(),
            num(b.witness_probability),
        ]
    });
    Ok(Report {
        tol,
        csv: csv_bytes(
            &[
                "antecedent",
                "consequent",
                "witness_outcome",
                "witness_probability",
            ],
            rows,
        )?,
        json: vec![("report", serde_json::to_value(&report)?)],
    })
}

fn scenario_for(array: &CorrelationArray, shared: bool) -> Result<Scenario> {
    let scenario = Scenario::of_array(array);
    if !shared {
        return Ok(scenario);
    }
    if scenario.alice != scenario.bob {
        return Err(CliError::Validation(
            "--shared needs the same setting labels on both sides".into(),
        ));
    }
    let labels: Vec<&str> = scenario.alice.iter().map(String::as_str).collect();
    Ok(Scenario::shared(&labels)?)
}

fn feasibility(args: &FamilyArgs, shared: bool, tol: f64) -> Result<Report> {
    let fam = args.resolve()?;
    let array = fam.array()?;
    let scenario = scenario_for(&array, shared)?;
    let result = lhv_feasibility_in(&array, &scenario, tol)?;

    let mut header: Vec<String> = scenario.alice.iter().map(|l| format!("A_{l}")).collect();
    header.extend(scenario.bob.iter().map(|l| format!("B_{l}")));
    header.push("weight".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = result.tickets.iter().enumerate().map(|(k, t)| {
        let mut row: Vec<String> = t
            .alice
            .iter()
            .chain(&t.bob)
            .map(|o| o.symbol().to_string())
            .collect();
        row.push(result.weights.as_ref().map_or(String::new(), |w| num(w[k])));
        row
    });
    Ok(Report {
        tol,
        csv: csv_bytes(&header, rows)?,
        json: vec![("result", serde_json::to_value(&result)?)],
    })
}

fn sample(
    args: &FamilyArgs,
    kind: RaffleKind,
    draws: u64,
    shared: bool,
    seed: u64,
    tol: f64,
) -> Result<Report> {
    let raffle = match kind {
        RaffleKind::Uniform => {
            let scenario = if args.family.is_some() {
                scenario_for(&args.resolve()?.array()?, shared)?
            } else if shared {
                Scenario::shared(&["a", "b"])?
            } else {
                Scenario::distinct(&["a", "b"], &["a", "b"])?
            };
            Raffle::uniform(scenario)?
        }
        RaffleKind::Family => {
            let array = args.resolve()?.array()?;
            let scenario = scenario_for(&array, shared)?;
            let result = lhv_feasibility_in(&array, &scenario, tol)?;
            let weights = result.weights.ok_or_else(|| {
                CliError::Validation(format!(
                    "no raffle reproduces this array (LP slack {:e}); try --raffle uniform",
                    result.objective
                ))
            })?;
            Raffle::new(scenario, result.tickets, weights)?
        }
    };
    let s = sample_raffle(&raffle, draws, seed)?;
    let sc = raffle.scenario();
    let mut rows = Vec::new();
    for (i, a) in sc.alice.iter().enumerate() {
        for (j, b) in sc.bob.iter().enumerate() {
            let k = i * sc.bob.len() + j;
            let mut row = vec![a.clone(), b.clone(), s.pair_counts[k].to_string()];
            row.extend(s.counts[k].iter().map(u64::to_string));
            rows.push(row);
        }
    }
    Ok(Report {
        tol,
        csv: csv_bytes(
            &["setting_a", "setting_b", "draws", "pp", "pm", "mp", "mm"],
            rows,
        )?,
        json: vec![
            ("raffle", serde_json::to_value(&raffle)?),
            ("sample", serde_json::to_value(&s)?),
        ],
    })
}

fn parse_point(src: &str) -> Result<ChiPoint> {
    let coords: Vec<f64> = src
        .split(',')
        .map(|p| expr::eval(p).map_err(CliError::Validation))
        .collect::<Result<_>>()?;
    let c: [f64; 3] = coords.try_into().map_err(|v: Vec<f64>| {
        CliError::Validation(format!("--point wants three coordinates, got {}", v.len()))
    })?;
    Ok(ChiPoint::new(c)?)
}

const REPORT_HEADER: [&str; 9] = [
    "x",
    "y",
    "z",
    "label",
    "in_l",
    "in_q",
    "in_p",
    "min_facet_slack",
    "quantum_residual",
];

fn report_row(r: &nonlocal_core::RegionReport) -> Vec<String> {
    let mut row: Vec<String> = r.point.coords().iter().map(|&x| num(x)).collect();
    row.push(r.label().to_string());
    row.extend([r.in_l, r.in_q, r.in_p].map(|b| b.to_string()));
    row.push(num(r.facets.min_slack()));
    row.push(num(r.quantum_residual));
    row
}

fn geometry(args: &FamilyArgs, setup: Setup, point: Option<&str>, tol: f64) -> Result<Report> {
    let mut json = Vec::new();
    let p = match point {
        Some(src) => parse_point(src)?,
        None => {
            if setup != Setup::SymmetricChsh {
                return Err(CliError::Validation(format!(
                    "the {setup} setup needs --point; family arrays have two settings per side"
                )));
            }
            let array = args.resolve()?.array()?;
            json.push(("correlators", serde_json::to_value(array.correlators())?));
            symmetric_slice_point(&array)?
        }
    };
    let report = region_report(setup, &p, tol);
    json.push(("report", serde_json::to_value(&report)?));
    Ok(Report {
        tol,
        csv: csv_bytes(&REPORT_HEADER, [report_row(&report)])?,
        json,
    })
}

/// `n` evenly spaced points on `[lo, hi]`, endpoints included.
fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn curve(points: usize) -> Result<Report> {
    if points == 0 {
        return Err(CliError::Validation("--points must be positive".into()));
    }
    let alphas = grid(0.0, std::f64::consts::FRAC_PI_2, points);
    let mut rows = Vec::with_capacity(points);
    let mut entries = Vec::with_capacity(points);
    for &alpha in &alphas {
        let p = hu_curve_point(alpha)?;
        let v = violation_identity(alpha)?;
        let [x, y, z] = p.chi.coords();
        rows.push([alpha, x, y, z, v.lhs, v.witness].map(num).to_vec());
        entries.push(json!({
            "alpha": alpha,
            "chi": p.chi,
            "lhs": v.lhs,
            "rhs": v.rhs,
            "witness": v.witness,
        }));
    }
    Ok(Report {
        tol: DEFAULT_TOL,
        csv: csv_bytes(&["alpha", "chi1", "chi2", "chi3", "lhs", "witness"], rows)?,
        json: vec![("points", Value::Array(entries))],
    })
}

fn regions(request: RegionRequest) -> Result<Report> {
    let data = emit_regions(&request)?;
    let mut csv = Vec::new();
    data.write_csv(&mut csv)?;
    Ok(Report {
        tol: request.tol,
        csv,
        json: vec![("regions", serde_json::to_value(&data)?)],
    })
}

fn sweep(
    args: &FamilyArgs,
    what: SweepWhat,
    points: usize,
    from: Option<&str>,
    to: Option<&str>,
    tol: f64,
    want_csv: bool,
) -> Result<Report> {
    let kind = args.kind()?;
    if kind == FamilyKind::HuGeneric {
        return Err(CliError::Validation(
            "sweep runs over the angle families only".into(),
        ));
    }
    if args.alpha.is_some() || args.alpha_cos.is_some() {
        return Err(CliError::Validation(
            "sweep takes --from/--to instead of an angle".into(),
        ));
    }
    if points == 0 {
        return Err(CliError::Validation("--points must be positive".into()));
    }
    let bound = |src: Option<&str>, default: f64| -> Result<f64> {
        match src {
            None => Ok(default),
            Some(s) => {
                let v = expr::eval(s).map_err(CliError::Validation)?;
                Ok(if args.degrees { v.to_radians() } else { v })
            }
        }
    };
    let lo = bound(from, 0.0)?;
    let hi = bound(to, std::f64::consts::FRAC_PI_2)?;
    let alphas = grid(lo, hi, points);

    // Each grid point is independent; collecting keeps grid order.
    let rows: Vec<(Value, Vec<Vec<String>>)> = alphas
        .par_iter()
        .map(|&alpha| sweep_point(kind, what, alpha, tol, want_csv))
        .collect::<Result<_>>()?;

    let header: &[&str] = match what {
        SweepWhat::Array => &["alpha", "setting_a", "setting_b", "pp", "pm", "mp", "mm"],
        SweepWhat::Chains => &[
            "alpha",
            "conditionals",
            "entailed",
            "broken",
            "max_witness_probability",
        ],
        SweepWhat::Lhv => &["alpha", "feasible", "objective", "max_residual"],
        SweepWhat::Geometry => &[
            "alpha",
            "x",
            "y",
            "z",
            "label",
            "in_l",
            "in_q",
            "in_p",
            "min_facet_slack",
            "quantum_residual",
        ],
    };
    let (json_rows, csv_rows): (Vec<Value>, Vec<Vec<Vec<String>>>) = rows.into_iter().unzip();
    Ok(Report {
        tol,
        csv: csv_bytes(header, csv_rows.into_iter().flatten())?,
        json: vec![("rows", Value::Array(json_rows))],
    })
}

fn sweep_point(
    kind: FamilyKind,
    what: SweepWhat,
    alpha: f64,
    tol: f64,
    want_csv: bool,
) -> Result<(Value, Vec<Vec<String>>)> {
    let array = Family::at(kind, alpha)?.array()?;
    let a = num(alpha);
    let mut csv = Vec::new();
    let json = match what {
        SweepWhat::Array => {
            if want_csv {
                for (i, sa) in array.settings_a().iter().enumerate() {
                    for (j, sb) in array.settings_b().iter().enumerate() {
                        let cell = array.cell(i, j);
                        let mut row = vec![a.clone(), sa.label.clone(), sb.label.clone()];
                        for x in Outcome::BOTH {
                            for y in Outcome::BOTH {
                                row.push(num(cell.get(x, y)));
                            }
                        }
                        csv.push(row);
                    }
                }
            }
            json!({ "alpha": alpha, "array": array })
        }
        SweepWhat::Chains => {
            let report = find_broken_arrows(&array, tol);
            let max_witness = report
                .broken
                .iter()
                .map(|b| b.witness_probability)
                .fold(0.0, f64::max);
            csv.push(vec![
                a,
                report.conditionals.len().to_string(),
                report.entailed.len().to_string(),
                report.broken.len().to_string(),
                num(max_witness),
            ]);
            json!({ "alpha": alpha, "report": report })
        }
        SweepWhat::Lhv => {
            let result = lhv_feasibility_in(&array, &Scenario::of_array(&array), tol)?;
            csv.push(vec![
                a,
                result.feasible.to_string(),
                num(result.objective),
                num(result.max_residual),
            ]);
            json!({ "alpha": alpha, "result": result })
        }
        SweepWhat::Geometry => {
            let report = region_report(Setup::SymmetricChsh, &symmetric_slice_point(&array)?, tol);
            let mut row = vec![a];
            row.extend(report_row(&report));
            csv.push(row);
            json!({ "alpha": alpha, "report": report })
        }
    };
    Ok((json, csv))
}
