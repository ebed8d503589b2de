//! Membership tests for the local polytope (L), the quantum convex set (Q)
//! and the non-signaling cube (P) in two three-dimensional pictures:
//!
//! * Mermin: `(χ_ab, χ_ac, χ_bc)` for three shared settings;
//! * symmetric CHSH slice: `(χ_a'c', χ_a'd' = χ_b'c', χ_b'd')`.
//!
//! Also the balanced Hardy-Unruh curve, the identity tying its CHSH
//! violation to the broken-arrow probability, and grid/boundary emitters.

use std::fmt;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{
    balance_array, born_array, cell_moments, correlation_coefficient, CorrelationArray, Outcome,
};
use crate::error::{Error, Result};
use crate::qstate::{family_settings, hu_state};

/// Tolerance on membership flags; residuals are always reported raw.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// `(χ_ab, χ_ac, χ_bc)` of the four deterministic shared-setting raffles.
pub const MERMIN_VERTICES: [[f64; 3]; 4] = [
    [-1.0, -1.0, -1.0],
    [-1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, -1.0],
];

/// Normals `s` of the Mermin facet pairs `−3 ≤ s·χ ≤ 1`.
const MERMIN_NORMALS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Sign patterns of the four CHSH expressions over `(χ_a'c', χ_a'd', χ_b'c', χ_b'd')`.
const CHSH_SIGNS: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0, -1.0],
    [-1.0, -1.0, 1.0, -1.0],
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ChiPoint([f64; 3]);

impl From<ChiPoint> for [f64; 3] {
    fn from(p: ChiPoint) -> Self {
        p.0
    }
}

impl TryFrom<[f64; 3]> for ChiPoint {
    type Error = Error;

    fn try_from(c: [f64; 3]) -> Result<Self> {
        ChiPoint::new(c)
    }
}

impl ChiPoint {
    /// Coordinates within 1e-12 outside the cube are clamped onto it.
    pub fn new(c: [f64; 3]) -> Result<Self> {
        for &x in &c {
            if !x.is_finite() || x.abs() > 1.0 + 1e-12 {
                return Err(Error::Domain {
                    value: x,
                    min: -1.0,
                    max: 1.0,
                });
            }
        }
        Ok(Self(c.map(|x| x.clamp(-1.0, 1.0))))
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    /// The four CHSH correlators `(a'c', a'd', b'c', b'd')` of a slice point.
    pub fn chsh_chis(&self) -> [f64; 4] {
        let [x, y, z] = self.0;
        [x, y, y, z]
    }
}

/// Three unit vectors `e_a`, `e_b`, `e_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    e: [[f64; 3]; 3],
}

impl DirectionSet {
    pub fn new(e: [[f64; 3]; 3]) -> Result<Self> {
        for v in &e {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NonUnitDirection(norm));
            }
        }
        Ok(Self { e })
    }

    pub fn vectors(&self) -> [[f64; 3]; 3] {
        self.e
    }
}

fn dot(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `χ_xy = −e_x·e_y`, the correlations of the singlet measured along the
/// three directions.
pub fn gram_from_directions(d: &DirectionSet) -> ChiPoint {
    let [a, b, c] = &d.e;
    ChiPoint::new([-dot(a, b), -dot(a, c), -dot(b, c)]).expect("dot products of unit vectors")
}

/// Values of a set of paired facet inequalities `lo ≤ v ≤ hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetReport {
    pub values: Vec<f64>,
    /// `hi − v` and `v − lo` for each pair, in that order.
    pub slacks: Vec<f64>,
    pub inside: bool,
}

impl FacetReport {
    fn new(values: Vec<f64>, lo: f64, hi: f64, tol: f64) -> Self {
        let slacks: Vec<f64> = values.iter().flat_map(|v| [hi - v, v - lo]).collect();
        let inside = slacks.iter().all(|s| *s >= -tol);
        Self {
            values,
            slacks,
            inside,
        }
    }

    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A nonlinear boundary test; `residual ≥ 0` inside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumReport {
    pub residual: f64,
    pub inside: bool,
}

/// The four Mermin facet pairs `−3 ≤ s·χ ≤ 1`.
pub fn mermin_local_test(p: &ChiPoint, tol: f64) -> FacetReport {
    let values = MERMIN_NORMALS.iter().map(|s| dot(s, &p.0)).collect();
    FacetReport::new(values, -3.0, 1.0, tol)
}

/// `1 − χ_ab² − χ_ac² − χ_bc² − 2χ_abχ_acχ_bc`, the determinant of the
/// correlation matrix with the sign convention `χ = −e·e`.
pub fn elliptope_test(p: &ChiPoint, tol: f64) -> QuantumReport {
    let [x, y, z] = p.0;
    let residual = 1.0 - x * x - y * y - z * z - 2.0 * x * y * z;
    QuantumReport {
        residual,
        inside: residual >= -tol,
    }
}

/// The four CHSH expressions over `(χ_a'c', χ_a'd', χ_b'c', χ_b'd')`, each
/// bounded by ±2 for local correlations.
pub fn chsh_local_test(chis: &[f64; 4], tol: f64) -> FacetReport {
    let values = CHSH_SIGNS
        .iter()
        .map(|s| s.iter().zip(chis).map(|(a, b)| a * b).sum())
        .collect();
    FacetReport::new(values, -2.0, 2.0, tol)
}

/// `√(1−χ_a'c'²)√(1−χ_b'c'²) + √(1−χ_a'd'²)√(1−χ_b'd'²) − |χ_a'c'χ_b'c' − χ_a'd'χ_b'd'|`.
pub fn landau_test(chis: &[f64; 4], tol: f64) -> QuantumReport {
    let [ac, ad, bc, bd] = *chis;
    let root = |x: f64| (1.0 - x * x).max(0.0).sqrt();
    let residual = root(ac) * root(bc) + root(ad) * root(bd) - (ac * bc - ad * bd).abs();
    QuantumReport {
        residual,
        inside: residual >= -tol,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setup {
    Mermin,
    SymmetricChsh,
}

impl FromStr for Setup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mermin" => Ok(Setup::Mermin),
            "symmetric-chsh" | "chsh" => Ok(Setup::SymmetricChsh),
            other => Err(Error::InvalidRegion(format!("unknown setup `{other}`"))),
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setup::Mermin => "mermin",
            Setup::SymmetricChsh => "symmetric-chsh",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    L,
    Q,
    P,
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "l" => Ok(Region::L),
            "Q" | "q" => Ok(Region::Q),
            "P" | "p" => Ok(Region::P),
            other => Err(Error::InvalidRegion(format!("unknown region `{other}`"))),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::L => "L",
            Region::Q => "Q",
            Region::P => "P",
        })
    }
}

/// Membership of one point in L, Q and P.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub setup: Setup,
    pub point: ChiPoint,
    pub in_l: bool,
    pub in_q: bool,
    pub in_p: bool,
    pub facets: FacetReport,
    /// Elliptope residual (Mermin) or Landau residual (CHSH slice).
    pub quantum_residual: f64,
}

impl RegionReport {
    pub fn contains(&self, region: Region) -> bool {
        match region {
            Region::L => self.in_l,
            Region::Q => self.in_q,
            Region::P => self.in_p,
        }
    }

    /// Innermost region containing the point.
    pub fn label(&self) -> &'static str {
        if self.in_l {
            "L"
        } else if self.in_q {
            "Q"
        } else if self.in_p {
            "P"
        } else {
            "outside"
        }
    }
}

pub fn region_report(setup: Setup, p: &ChiPoint, tol: f64) -> RegionReport {
    let (facets, quantum) = match setup {
        Setup::Mermin => (mermin_local_test(p, tol), elliptope_test(p, tol)),
        Setup::SymmetricChsh => {
            let chis = p.chsh_chis();
            (chsh_local_test(&chis, tol), landau_test(&chis, tol))
        }
    };
    RegionReport {
        setup,
        point: *p,
        in_l: facets.inside,
        in_q: quantum.inside,
        in_p: p.0.iter().all(|x| x.abs() <= 1.0 + tol),
        facets,
        quantum_residual: quantum.residual,
    }
}

/// `(χ_ab, χ_ac, χ_bc)` from a three-setting array, reading Alice's first
/// setting against Bob's second and so on.
pub fn mermin_point(array: &CorrelationArray) -> Result<ChiPoint> {
    if array.settings_a().len() != 3 || array.settings_b().len() != 3 {
        return Err(Error::InvalidArray(
            "Mermin point needs three settings per side".into(),
        ));
    }
    let chi = |i, j| correlation_coefficient(array.cell(i, j)).map(|c| c.value());
    ChiPoint::new([chi(0, 1)?, chi(0, 2)?, chi(1, 2)?])
}

/// `4⟨AB⟩` of the `aa`, `ab` and `bb` cells of a 2×2 array whose `ab` and
/// `ba` covariances agree.
pub fn symmetric_slice_point(array: &CorrelationArray) -> Result<ChiPoint> {
    if array.settings_a().len() != 2 || array.settings_b().len() != 2 {
        return Err(Error::InvalidArray("slice point needs a 2x2 array".into()));
    }
    let chi = |i, j| 4.0 * cell_moments(array.cell(i, j)).cov;
    let (ab, ba) = (chi(0, 1), chi(1, 0));
    if (ab - ba).abs() > 1e-12 {
        return Err(Error::InvalidArray(format!(
            "ab and ba correlations differ: {ab} vs {ba}"
        )));
    }
    ChiPoint::new([chi(0, 0), ab, chi(1, 1)])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub chi: ChiPoint,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha) {
        return Err(Error::Domain {
            value: alpha,
            min: 0.0,
            max: std::f64::consts::FRAC_PI_2,
        });
    }
    Ok(())
}

/// Balanced Hardy-Unruh correlations in closed form.
pub fn hu_curve_point(alpha: f64) -> Result<CurvePoint> {
    check_alpha(alpha)?;
    let (s, c) = alpha.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let d = 1.0 + c2;
    let aa = (2.0 * c2 * c2 * c2 - s2 * d * d - c2 * c2 * s2) / d;
    let ab = (c2 * c2 + 1.0 - c2 * s2) / d;
    let bb = (2.0 * c2 - s2) / d;
    Ok(CurvePoint {
        alpha,
        chi: ChiPoint::new([aa, ab, bb])?,
    })
}

pub fn hu_curve(alphas: &[f64]) -> Result<Vec<CurvePoint>> {
    alphas.iter().map(|&a| hu_curve_point(a)).collect()
}

/// The same point computed from Born probabilities of the balanced array.
pub fn hu_curve_point_born(alpha: f64) -> Result<ChiPoint> {
    check_alpha(alpha)?;
    let s = family_settings(alpha);
    let state = hu_state(alpha, (&s[0], &s[0]))?;
    symmetric_slice_point(&balance_array(&born_array(&state, &s, &s)?))
}

/// `Pr(+−|aa)` for the Hardy-Unruh state, `cos⁴α sin²α / (1 + cos²α)`.
pub fn hu_witness(alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    c.powi(4) * s * s / (1.0 + c * c)
}

/// `Pr(++|bb)` for the Hardy state, `sin⁴α cos²α / (1 + sin²α)`.
pub fn hardy_witness(alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    s.powi(4) * c * c / (1.0 + s * s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationIdentity {
    pub alpha: f64,
    /// `χ_a'c' − χ_a'd' − χ_b'c' − χ_b'd'` on the curve.
    pub lhs: f64,
    /// `−2 − 4 cos⁴α sin²α / (1 + cos²α)`.
    pub rhs: f64,
    /// `Pr(+−|aa)` from the Born rule.
    pub witness: f64,
}

pub fn violation_identity(alpha: f64) -> Result<ViolationIdentity> {
    let p = hu_curve_point(alpha)?;
    let [ac, ad, bc, bd] = p.chi.chsh_chis();
    let s = family_settings(alpha);
    let state = hu_state(alpha, (&s[0], &s[0]))?;
    let witness =
        crate::qstate::born_cell(&state, &s[0], &s[0])?.get(Outcome::Plus, Outcome::Minus);
    Ok(ViolationIdentity {
        alpha,
        lhs: ac - ad - bc - bd,
        rhs: -2.0 - 4.0 * hu_witness(alpha),
        witness,
    })
}

/// `½(5√5 − 11)`, the largest broken-arrow probability in either family.
pub fn max_witness_closed_form() -> f64 {
    0.5 * (5.0 * 5f64.sqrt() - 11.0)
}

/// Maximizes `f` on `[0, π/2]`: best point of a 10⁴-point grid, refined by
/// golden-section search on the neighbouring grid interval.
pub fn maximize_on_quarter_turn(f: impl Fn(f64) -> f64) -> (f64, f64) {
    const GRID: usize = 10_000;
    let h = std::f64::consts::FRAC_PI_2 / (GRID - 1) as f64;
    let best = (0..GRID)
        .max_by(|&i, &j| f(i as f64 * h).total_cmp(&f(j as f64 * h)))
        .unwrap();
    let mut lo = best.saturating_sub(1) as f64 * h;
    let mut hi = (best + 1).min(GRID - 1) as f64 * h;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// What [`emit_regions`] samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// `resolution³` points spanning the cube.
    Grid,
    /// Boundary of the region along rays from the origin, on a
    /// `resolution × 2·resolution` polar grid of directions.
    Boundary,
    /// `resolution²` points on the plane where coordinate `axis` is `value`.
    Section { axis: usize, value: f64 },
    /// `resolution²` points of the other two coordinates, each inside if
    /// some value of coordinate `axis` (scanned on `4·resolution + 1` points)
    /// is.
    Projection { axis: usize },
    /// Hardy-Unruh curve points (symmetric CHSH slice only).
    Curve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRequest {
    pub setup: Setup,
    pub region: Region,
    pub sampling: Sampling,
    pub resolution: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSample {
    /// Three coordinates, or the two kept ones for sections and projections.
    pub coords: Vec<f64>,
    pub in_l: bool,
    pub in_q: bool,
    pub in_p: bool,
    pub inside: bool,
    pub min_facet_slack: f64,
    pub quantum_residual: f64,
}

impl RegionSample {
    fn from_report(coords: Vec<f64>, r: &RegionReport, region: Region) -> Self {
        Self {
            coords,
            in_l: r.in_l,
            in_q: r.in_q,
            in_p: r.in_p,
            inside: r.contains(region),
            min_facet_slack: r.facets.min_slack(),
            quantum_residual: r.quantum_residual,
        }
    }

    pub fn label(&self) -> &'static str {
        if self.in_l {
            "L"
        } else if self.in_q {
            "Q"
        } else if self.in_p {
            "P"
        } else {
            "outside"
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionData {
    pub request: RegionRequest,
    pub samples: Vec<RegionSample>,
}

impl RegionData {
    /// Columns `x, y[, z], label, in_l, in_q, in_p, inside, min_facet_slack, quantum_residual`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let dims = self.samples.first().map_or(3, |s| s.coords.len());
        let mut header: Vec<&str> = ["x", "y", "z"][..dims].to_vec();
        header.extend([
            "label",
            "in_l",
            "in_q",
            "in_p",
            "inside",
            "min_facet_slack",
            "quantum_residual",
        ]);
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.coords.iter().map(|x| format!("{x:?}")).collect();
            row.push(s.label().to_string());
            for flag in [s.in_l, s.in_q, s.in_p, s.inside] {
                row.push(flag.to_string());
            }
            row.push(format!("{:?}", s.min_facet_slack));
            row.push(format!("{:?}", s.quantum_residual));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn linspace(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64)
        .collect()
}

fn report_at(req: &RegionRequest, c: [f64; 3]) -> RegionReport {
    let p = ChiPoint::new(c).expect("sample inside the cube");
    region_report(req.setup, &p, req.tol)
}

fn insert_axis(axis: usize, u: f64, v: f64, w: f64) -> [f64; 3] {
    match axis {
        0 => [w, u, v],
        1 => [u, w, v],
        _ => [u, v, w],
    }
}

/// Exact-boundary predicate for bisection: no tolerance, so the located
/// point sits on the boundary itself.
fn strictly_inside(setup: Setup, region: Region, c: [f64; 3]) -> bool {
    if c.iter().any(|x| x.abs() > 1.0) {
        return false;
    }
    region_report(setup, &ChiPoint(c), 0.0).contains(region)
}

fn boundary_residual(setup: Setup, region: Region, c: [f64; 3]) -> f64 {
    let r = region_report(setup, &ChiPoint(c), 0.0);
    match region {
        Region::L => r.facets.min_slack(),
        Region::Q => r.quantum_residual,
        Region::P => c
            .iter()
            .map(|x| 1.0 - x.abs())
            .fold(f64::INFINITY, f64::min),
    }
}

/// Grid, boundary, section, projection or curve samples of one region,
/// ordered by grid index.
pub fn emit_regions(req: &RegionRequest) -> Result<RegionData> {
    if req.resolution == 0 {
        return Err(Error::InvalidRegion("resolution must be positive".into()));
    }
    if req.tol.is_nan() || req.tol <= 0.0 {
        return Err(Error::InvalidRegion("tolerance must be positive".into()));
    }
    let n = req.resolution;
    let samples = match &req.sampling {
        Sampling::Grid => {
            let axis = linspace(n);
            (0..n * n * n)
                .into_par_iter()
                .map(|k| {
                    let c = [axis[k / (n * n)], axis[(k / n) % n], axis[k % n]];
                    RegionSample::from_report(c.to_vec(), &report_at(req, c), req.region)
                })
                .collect()
        }
        Sampling::Boundary => {
            let (nt, np) = (n, 2 * n);
            (0..nt * np)
                .into_par_iter()
                .map(|k| {
                    let theta =
                        std::f64::consts::PI * (k / np) as f64 / nt.max(2).saturating_sub(1) as f64;
                    let theta = theta.min(std::f64::consts::PI);
                    let phi = 2.0 * std::f64::consts::PI * (k % np) as f64 / np as f64;
                    let d = [
                        theta.sin() * phi.cos(),
                        theta.sin() * phi.sin(),
                        theta.cos(),
                    ];
                    let t_max = 1.0 / d.iter().map(|x| x.abs()).fold(0.0, f64::max);
                    let at = |t: f64| d.map(|x| (x * t).clamp(-1.0, 1.0));
                    let (mut lo, mut hi) = (0.0, t_max);
                    if strictly_inside(req.setup, req.region, at(hi)) {
                        lo = hi;
                    } else {
                        for _ in 0..200 {
                            let mid = 0.5 * (lo + hi);
                            if mid <= lo || mid >= hi {
                                break;
                            }
                            if strictly_inside(req.setup, req.region, at(mid)) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                    }
                    let c = at(lo);
                    let mut s =
                        RegionSample::from_report(c.to_vec(), &report_at(req, c), req.region);
                    // Report the residual of the requested region's boundary.
                    s.quantum_residual = boundary_residual(req.setup, req.region, c);
                    s
                })
                .collect()
        }
        Sampling::Section { axis, value } => {
            if *axis > 2 || !(-1.0..=1.0).contains(value) {
                return Err(Error::InvalidRegion(format!(
                    "bad section axis {axis} / value {value}"
                )));
            }
            let grid = linspace(n);
            (0..n * n)
                .into_par_iter()
                .map(|k| {
                    let (u, v) = (grid[k / n], grid[k % n]);
                    let c = insert_axis(*axis, u, v, *value);
                    RegionSample::from_report(vec![u, v], &report_at(req, c), req.region)
                })
                .collect()
        }
        Sampling::Projection { axis } => {
            if *axis > 2 {
                return Err(Error::InvalidRegion(format!("bad projection axis {axis}")));
            }
            let grid = linspace(n);
            let scan = linspace(4 * n + 1);
            (0..n * n)
                .into_par_iter()
                .map(|k| {
                    let (u, v) = (grid[k / n], grid[k % n]);
                    let reports: Vec<RegionReport> = scan
                        .iter()
                        .map(|&w| report_at(req, insert_axis(*axis, u, v, w)))
                        .collect();
                    RegionSample {
                        coords: vec![u, v],
                        in_l: reports.iter().any(|r| r.in_l),
                        in_q: reports.iter().any(|r| r.in_q),
                        in_p: reports.iter().any(|r| r.in_p),
                        inside: reports.iter().any(|r| r.contains(req.region)),
                        min_facet_slack: reports
                            .iter()
                            .map(|r| r.facets.min_slack())
                            .fold(f64::NEG_INFINITY, f64::max),
                        quantum_residual: reports
                            .iter()
                            .map(|r| r.quantum_residual)
                            .fold(f64::NEG_INFINITY, f64::max),
                    }
                })
                .collect()
        }
        Sampling::Curve => {
            if req.setup != Setup::SymmetricChsh {
                return Err(Error::InvalidRegion(
                    "the curve lives in the symmetric CHSH slice".into(),
                ));
            }
            let alphas: Vec<f64> = (0..n)
                .map(|k| std::f64::consts::FRAC_PI_2 * k as f64 / (n.max(2) - 1) as f64)
                .collect();
            hu_curve(&alphas)?
                .iter()
                .map(|p| {
                    let r = region_report(req.setup, &p.chi, req.tol);
                    RegionSample::from_report(p.chi.coords().to_vec(), &r, req.region)
                })
                .collect()
        }
    };
    Ok(RegionData {
        request: req.clone(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn pt(c: [f64; 3]) -> ChiPoint {
        ChiPoint::new(c).unwrap()
    }

    #[test]
    fn mermin_examples() {
        assert!(mermin_local_test(&pt([-1.0, -1.0, -1.0]), BOUNDARY_TOL).inside);
        assert!(mermin_local_test(&pt([0.0; 3]), BOUNDARY_TOL).inside);
        let r = mermin_local_test(&pt([0.5; 3]), BOUNDARY_TOL);
        assert!(!r.inside);
        assert_eq!(r.values[0], 1.5);
        for v in MERMIN_VERTICES {
            let r = mermin_local_test(&pt(v), BOUNDARY_TOL);
            assert!(r.inside);
            assert_eq!(r.min_slack(), 0.0);
        }
    }

    #[test]
    fn elliptope_examples() {
        assert_eq!(elliptope_test(&pt([0.0; 3]), 0.0).residual, 1.0);
        assert_eq!(elliptope_test(&pt([0.5; 3]), 0.0).residual, 0.0);
        assert_eq!(elliptope_test(&pt([-1.0; 3]), 0.0).residual, 0.0);
        assert!(!elliptope_test(&pt([1.0; 3]), BOUNDARY_TOL).inside);
    }

    #[test]
    fn gram_examples() {
        let id = DirectionSet::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(gram_from_directions(&id).coords(), [-0.0; 3]);
        let t = 2.0 * PI / 3.0;
        let planar = DirectionSet::new([
            [1.0, 0.0, 0.0],
            [t.cos(), t.sin(), 0.0],
            [(2.0 * t).cos(), (2.0 * t).sin(), 0.0],
        ])
        .unwrap();
        for x in gram_from_directions(&planar).coords() {
            assert!((x - 0.5).abs() < 1e-15);
        }
        let same = DirectionSet::new([[0.0, 0.6, 0.8]; 3]).unwrap();
        for x in gram_from_directions(&same).coords() {
            assert!((x + 1.0).abs() < 1e-15);
        }
        assert!(matches!(
            DirectionSet::new([[1.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
            Err(Error::NonUnitDirection(_))
        ));
    }

    #[test]
    fn chsh_examples() {
        let r = chsh_local_test(&[0.0; 4], BOUNDARY_TOL);
        assert!(r.inside);
        assert!(r.slacks.iter().all(|s| *s == 2.0));
        let ang = [3.0 * FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, FRAC_PI_4];
        let chis = ang.map(|p: f64| -p.cos());
        let r = chsh_local_test(&chis, BOUNDARY_TOL);
        assert!(!r.inside);
        assert!((r.values[2] - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        let q = landau_test(&chis, BOUNDARY_TOL);
        assert!(q.residual.abs() < 1e-14);
        assert_eq!(landau_test(&[1.0; 4], 0.0).residual, 0.0);
    }

    #[test]
    fn deterministic_patterns_touch_chsh_facets() {
        for m in 0..8u32 {
            let s = |k: u32| if m >> k & 1 == 0 { 1.0 } else { -1.0 };
            let (ac, ad, bc) = (s(0), s(1), s(2));
            let chis = [ac, ad, bc, ac * ad * bc];
            let r = chsh_local_test(&chis, 0.0);
            assert!(r.inside);
            assert!(r.values.iter().any(|v| v.abs() == 2.0));
        }
    }

    #[test]
    fn curve_endpoints_and_midpoint() {
        let p0 = hu_curve_point(0.0).unwrap().chi.coords();
        assert_eq!(p0, [1.0, 1.0, 1.0]);
        let p1 = hu_curve_point(FRAC_PI_2).unwrap().chi.coords();
        for (x, e) in p1.iter().zip([-1.0, 1.0, -1.0]) {
            assert!((x - e).abs() < 1e-15);
        }
        let mid = hu_curve_point(FRAC_PI_4).unwrap().chi.coords();
        let expected = 4.0 * 0.25 * (2.0 / 8.0 - 0.5 * 9.0 / 4.0 - 1.0 / 8.0) / 1.5;
        assert!((mid[0] - expected).abs() < 1e-15);
        let born = hu_curve_point_born(FRAC_PI_4).unwrap().coords();
        for (x, y) in mid.iter().zip(born) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(hu_curve_point(-0.1).is_err());
    }

    #[test]
    fn curve_violates_only_third_pair() {
        for k in 1..50 {
            let alpha = k as f64 * FRAC_PI_2 / 50.0;
            let chis = hu_curve_point(alpha).unwrap().chi.chsh_chis();
            let r = chsh_local_test(&chis, 1e-12);
            let violated: Vec<usize> = (0..8).filter(|&i| r.slacks[i] < -1e-12).collect();
            assert_eq!(violated, [5], "alpha {alpha}");
            assert!((r.slacks[5] + 4.0 * hu_witness(alpha)).abs() < 1e-12);
            assert!(landau_test(&chis, 1e-12).inside);
        }
    }

    #[test]
    fn violation_identity_examples() {
        let v = violation_identity(FRAC_PI_4).unwrap();
        assert!((v.lhs + 7.0 / 3.0).abs() < 1e-14);
        assert!((v.witness - 1.0 / 12.0).abs() < 1e-15);
        assert!((v.lhs - v.rhs).abs() < 1e-12);
        assert_eq!(violation_identity(0.0).unwrap().lhs, -2.0);
        assert!((violation_identity(FRAC_PI_2).unwrap().lhs + 2.0).abs() < 1e-15);
    }

    #[test]
    fn maximum_witness() {
        let (_, hu) = maximize_on_quarter_turn(hu_witness);
        let (_, hardy) = maximize_on_quarter_turn(hardy_witness);
        let closed = max_witness_closed_form();
        assert!((hu - closed).abs() < 1e-9);
        assert!((hardy - closed).abs() < 1e-9);
        assert!((closed - (2.0 / (1.0 + 5f64.sqrt())).powi(5)).abs() < 1e-12);
    }

    #[test]
    fn region_nesting_and_labels() {
        let corners: Vec<[f64; 3]> = (0..8)
            .map(|m| [0, 1, 2].map(|k| if m >> k & 1 == 0 { 1.0 } else { -1.0 }))
            .collect();
        for c in corners {
            let r = region_report(Setup::Mermin, &pt(c), BOUNDARY_TOL);
            let vertex = MERMIN_VERTICES.contains(&c);
            assert_eq!(r.label(), if vertex { "L" } else { "P" }, "{c:?}");
        }
    }

    fn request(
        setup: Setup,
        region: Region,
        sampling: Sampling,
        resolution: usize,
    ) -> RegionRequest {
        RegionRequest {
            setup,
            region,
            sampling,
            resolution,
            tol: BOUNDARY_TOL,
        }
    }

    #[test]
    fn grid_points_labeled_consistently() {
        let data = emit_regions(&request(Setup::Mermin, Region::L, Sampling::Grid, 11)).unwrap();
        assert_eq!(data.samples.len(), 1331);
        for s in &data.samples {
            let c = [s.coords[0], s.coords[1], s.coords[2]];
            assert_eq!(s.inside, mermin_local_test(&pt(c), BOUNDARY_TOL).inside);
            assert!(!s.in_l || s.in_q);
        }
    }

    #[test]
    fn elliptope_boundary_points() {
        let data =
            emit_regions(&request(Setup::Mermin, Region::Q, Sampling::Boundary, 12)).unwrap();
        assert_eq!(data.samples.len(), 12 * 24);
        for s in &data.samples {
            assert!(s.quantum_residual.abs() < 1e-9, "{s:?}");
        }
        let data = emit_regions(&request(Setup::Mermin, Region::L, Sampling::Boundary, 6)).unwrap();
        for s in &data.samples {
            assert!(s.min_facet_slack.abs() < 1e-9, "{s:?}");
        }
    }

    #[test]
    fn section_projection_and_curve() {
        let sec = emit_regions(&request(
            Setup::SymmetricChsh,
            Region::Q,
            Sampling::Section {
                axis: 1,
                value: 0.5,
            },
            9,
        ))
        .unwrap();
        assert_eq!(sec.samples.len(), 81);
        let proj = emit_regions(&request(
            Setup::SymmetricChsh,
            Region::Q,
            Sampling::Projection { axis: 1 },
            9,
        ))
        .unwrap();
        // A projection contains every section through the same plane.
        for (s, p) in sec.samples.iter().zip(&proj.samples) {
            assert!(!s.inside || p.inside);
        }
        let curve = emit_regions(&request(
            Setup::SymmetricChsh,
            Region::Q,
            Sampling::Curve,
            21,
        ))
        .unwrap();
        let n = curve.samples.len();
        for (k, s) in curve.samples.iter().enumerate() {
            assert!(s.in_q);
            assert_eq!(s.in_l, k == 0 || k == n - 1);
        }
        assert!(emit_regions(&request(Setup::Mermin, Region::Q, Sampling::Curve, 5)).is_err());
    }

    #[test]
    fn region_parsing_and_csv() {
        assert!("X".parse::<Region>().is_err());
        assert_eq!("Q".parse::<Region>().unwrap(), Region::Q);
        let data = emit_regions(&request(
            Setup::Mermin,
            Region::P,
            Sampling::Section {
                axis: 2,
                value: 0.0,
            },
            3,
        ))
        .unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("x,y,label,in_l,in_q,in_p,inside,min_facet_slack,quantum_residual\n")
        );
        assert_eq!(text.lines().count(), 10);
    }
}
