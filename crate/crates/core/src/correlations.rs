//! Cells, correlation arrays and their moments.

use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{born_cell, Setting, TwoQubitState};

/// Tolerance on the sum of a cell's entries.
pub const CELL_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Alice,
    Bob,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Alice => Side::Bob,
            Side::Bob => Side::Alice,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Side::Alice => 'A',
            Side::Bob => 'B',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Alice => f.write_str("Alice"),
            Side::Bob => f.write_str("Bob"),
        }
    }
}

/// A measurement outcome, valued ±½.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 0.5,
            Outcome::Minus => -0.5,
        }
    }

    pub fn flip(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

/// Joint outcome probabilities for one pair of settings, `(++, +−, −+, −−)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Cell {
    p: [f64; 4],
}

impl From<Cell> for [f64; 4] {
    fn from(c: Cell) -> Self {
        c.p
    }
}

impl TryFrom<[f64; 4]> for Cell {
    type Error = Error;

    fn try_from(p: [f64; 4]) -> Result<Self> {
        Cell::new(p)
    }
}

impl Cell {
    /// Entries within [`CELL_SUM_TOL`] below zero are clamped to zero.
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCell(format!("non-finite entry in {p:?}")));
        }
        if p.iter()
            .any(|&x| !(-CELL_SUM_TOL..=1.0 + CELL_SUM_TOL).contains(&x))
        {
            return Err(Error::InvalidCell(format!("entry outside [0, 1] in {p:?}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > CELL_SUM_TOL {
            return Err(Error::InvalidCell(format!("entries sum to {sum}")));
        }
        Ok(Self {
            p: p.map(|x| x.clamp(0.0, 1.0)),
        })
    }

    pub fn uniform() -> Self {
        Self { p: [0.25; 4] }
    }

    /// The deterministic cell in which both outcomes are fixed.
    pub fn deterministic(a: Outcome, b: Outcome) -> Self {
        let mut p = [0.0; 4];
        p[2 * a.index() + b.index()] = 1.0;
        Self { p }
    }

    pub fn probs(&self) -> [f64; 4] {
        self.p
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.p[2 * a.index() + b.index()]
    }

    pub fn p_pp(&self) -> f64 {
        self.p[0]
    }

    pub fn p_pm(&self) -> f64 {
        self.p[1]
    }

    pub fn p_mp(&self) -> f64 {
        self.p[2]
    }

    pub fn p_mm(&self) -> f64 {
        self.p[3]
    }

    /// Marginal probability that `side` finds `outcome`.
    pub fn marginal(&self, side: Side, outcome: Outcome) -> f64 {
        Outcome::BOTH
            .iter()
            .map(|&o| match side {
                Side::Alice => self.get(outcome, o),
                Side::Bob => self.get(o, outcome),
            })
            .sum()
    }
}

/// `⟨A⟩`, `⟨B⟩` and the second moment `⟨AB⟩` of a cell with outcomes ±½.
///
/// `cov` is the uncentred product moment; it equals the covariance when both
/// marginals are balanced, and it is what sign-flip balancing preserves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub exp_a: f64,
    pub exp_b: f64,
    pub cov: f64,
}

pub fn cell_moments(cell: &Cell) -> Moments {
    let [pp, pm, mp, mm] = cell.p;
    Moments {
        exp_a: 0.5 * (pp + pm) - 0.5 * (mp + mm),
        exp_b: 0.5 * (pp + mp) - 0.5 * (pm + mm),
        cov: 0.25 * (pp + mm) - 0.25 * (pm + mp),
    }
}

/// Solves the four linear equations for the probabilities:
/// `Pr(±±) = ¼ ± ½⟨A⟩ ± ½⟨B⟩ + (±)(±)⟨AB⟩`.
pub fn moments_to_cell(m: &Moments) -> Result<Cell> {
    let Moments { exp_a, exp_b, cov } = *m;
    let p = [
        0.25 + 0.5 * exp_a + 0.5 * exp_b + cov,
        0.25 + 0.5 * exp_a - 0.5 * exp_b - cov,
        0.25 - 0.5 * exp_a + 0.5 * exp_b - cov,
        0.25 - 0.5 * exp_a - 0.5 * exp_b + cov,
    ];
    if p.iter()
        .any(|x| !x.is_finite() || *x < -CELL_SUM_TOL || *x > 1.0 + CELL_SUM_TOL)
    {
        return Err(Error::InfeasibleMoments(p));
    }
    Cell::new(p)
}

/// A correlation coefficient, `|χ| ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChiValue(f64);

impl ChiValue {
    /// Values within 1e-12 outside `[-1, 1]` are clamped; others are rejected.
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidCell(format!(
                "correlation coefficient {value} outside [-1, 1]"
            )));
        }
        Ok(Self(value.clamp(-1.0, 1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Pearson correlation coefficient of the two outcomes in `cell`.
///
/// Uses the centred covariance `⟨AB⟩ − ⟨A⟩⟨B⟩`; for balanced cells this
/// reduces to `4⟨AB⟩`.
pub fn correlation_coefficient(cell: &Cell) -> Result<ChiValue> {
    const VAR_TOL: f64 = 1e-14;
    let m = cell_moments(cell);
    let var_a = 0.25 - m.exp_a * m.exp_a;
    let var_b = 0.25 - m.exp_b * m.exp_b;
    if var_a <= VAR_TOL {
        return Err(Error::ZeroVariance(Side::Alice));
    }
    if var_b <= VAR_TOL {
        return Err(Error::ZeroVariance(Side::Bob));
    }
    let cov = m.cov - m.exp_a * m.exp_b;
    ChiValue::new(cov / (var_a.sqrt() * var_b.sqrt()))
}

/// A grid of cells, one per (Alice setting, Bob setting), row-major by
/// Alice's setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArray", into = "RawArray")]
pub struct CorrelationArray {
    settings_a: Vec<Setting>,
    settings_b: Vec<Setting>,
    cells: Vec<Cell>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawArray {
    settings_a: Vec<Setting>,
    settings_b: Vec<Setting>,
    cells: Vec<Cell>,
}

impl From<CorrelationArray> for RawArray {
    fn from(a: CorrelationArray) -> Self {
        RawArray {
            settings_a: a.settings_a,
            settings_b: a.settings_b,
            cells: a.cells,
        }
    }
}

impl TryFrom<RawArray> for CorrelationArray {
    type Error = Error;

    fn try_from(r: RawArray) -> Result<Self> {
        CorrelationArray::new(r.settings_a, r.settings_b, r.cells)
    }
}

fn check_labels(side: Side, settings: &[Setting]) -> Result<()> {
    if settings.is_empty() {
        return Err(Error::InvalidArray(format!("{side} has no settings")));
    }
    for (i, s) in settings.iter().enumerate() {
        if settings[..i].iter().any(|t| t.label == s.label) {
            return Err(Error::InvalidArray(format!(
                "duplicate {side} setting `{}`",
                s.label
            )));
        }
    }
    Ok(())
}

impl CorrelationArray {
    pub fn new(
        settings_a: Vec<Setting>,
        settings_b: Vec<Setting>,
        cells: Vec<Cell>,
    ) -> Result<Self> {
        check_labels(Side::Alice, &settings_a)?;
        check_labels(Side::Bob, &settings_b)?;
        if cells.len() != settings_a.len() * settings_b.len() {
            return Err(Error::InvalidArray(format!(
                "{} cells for a {}x{} grid",
                cells.len(),
                settings_a.len(),
                settings_b.len()
            )));
        }
        Ok(Self {
            settings_a,
            settings_b,
            cells,
        })
    }

    pub fn settings(&self, side: Side) -> &[Setting] {
        match side {
            Side::Alice => &self.settings_a,
            Side::Bob => &self.settings_b,
        }
    }

    pub fn settings_a(&self) -> &[Setting] {
        &self.settings_a
    }

    pub fn settings_b(&self) -> &[Setting] {
        &self.settings_b
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.settings_b.len() + j]
    }

    pub fn index_of(&self, side: Side, label: &str) -> Option<usize> {
        self.settings(side).iter().position(|s| s.label == label)
    }

    pub fn cell_by_label(&self, a: &str, b: &str) -> Option<&Cell> {
        let i = self.index_of(Side::Alice, a)?;
        let j = self.index_of(Side::Bob, b)?;
        Some(self.cell(i, j))
    }

    /// `4⟨AB⟩` for each cell, row-major. Equals the correlation coefficient
    /// for balanced cells.
    pub fn correlators(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|c| 4.0 * cell_moments(c).cov)
            .collect()
    }

    /// Largest absolute entry-wise difference; `None` if labels or shapes differ.
    pub fn max_entry_difference(&self, other: &CorrelationArray) -> Option<f64> {
        let same_labels = |x: &[Setting], y: &[Setting]| {
            x.len() == y.len() && x.iter().zip(y).all(|(s, t)| s.label == t.label)
        };
        if !same_labels(&self.settings_a, &other.settings_a)
            || !same_labels(&self.settings_b, &other.settings_b)
        {
            return None;
        }
        Some(
            self.cells
                .iter()
                .zip(&other.cells)
                .flat_map(|(c, d)| c.p.iter().zip(d.p).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max),
        )
    }

    /// Writes one row per (setting pair, outcome pair).
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["setting_a", "setting_b", "outcome", "probability"])?;
        for (i, sa) in self.settings_a.iter().enumerate() {
            for (j, sb) in self.settings_b.iter().enumerate() {
                let cell = self.cell(i, j);
                for a in Outcome::BOTH {
                    for b in Outcome::BOTH {
                        let outcome: String = [a.symbol(), b.symbol()].iter().collect();
                        w.write_record([
                            sa.label.as_str(),
                            sb.label.as_str(),
                            outcome.as_str(),
                            format!("{:?}", cell.get(a, b)).as_str(),
                        ])?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Born-rule correlation array for every pair of the given settings.
pub fn born_array(
    state: &TwoQubitState,
    settings_a: &[Setting],
    settings_b: &[Setting],
) -> Result<CorrelationArray> {
    let mut cells = Vec::with_capacity(settings_a.len() * settings_b.len());
    for sa in settings_a {
        for sb in settings_b {
            cells.push(born_cell(state, sa, sb)?);
        }
    }
    CorrelationArray::new(settings_a.to_vec(), settings_b.to_vec(), cells)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonSignalingReport {
    pub max_discrepancy: f64,
    pub passed: bool,
}

/// Checks that each party's marginals do not depend on the other party's
/// setting.
pub fn check_nonsignaling(array: &CorrelationArray, tol: f64) -> NonSignalingReport {
    let na = array.settings_a.len();
    let nb = array.settings_b.len();
    let mut worst: f64 = 0.0;
    let mut spread = |values: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
        worst = worst.max(hi - lo);
    };
    for i in 0..na {
        spread(&mut (0..nb).map(|j| array.cell(i, j).marginal(Side::Alice, Outcome::Plus)));
    }
    for j in 0..nb {
        spread(&mut (0..na).map(|i| array.cell(i, j).marginal(Side::Bob, Outcome::Plus)));
    }
    NonSignalingReport {
        max_discrepancy: worst,
        passed: worst <= tol,
    }
}

/// Replaces each cell by the average of itself and its sign-flipped copy:
/// both diagonal entries become their mean, and likewise the skew diagonal.
/// Expectation values vanish and `⟨AB⟩` is unchanged.
pub fn balance_array(array: &CorrelationArray) -> CorrelationArray {
    let cells = array
        .cells
        .iter()
        .map(|c| {
            let d = 0.5 * (c.p[0] + c.p[3]);
            let s = 0.5 * (c.p[1] + c.p[2]);
            Cell { p: [d, s, s, d] }
        })
        .collect();
    CorrelationArray {
        settings_a: array.settings_a.clone(),
        settings_b: array.settings_b.clone(),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{family_settings, hardy_state, hu_state, singlet};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn chi_cell(chi: f64) -> Cell {
        let d = 0.25 * (1.0 + chi);
        let o = 0.25 * (1.0 - chi);
        Cell::new([d, o, o, d]).unwrap()
    }

    #[test]
    fn cell_validation() {
        assert!(Cell::new([0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(Cell::new([-0.1, 0.6, 0.5, 0.0]).is_err());
        assert!(Cell::new([f64::NAN, 0.0, 0.0, 1.0]).is_err());
        let c = Cell::new([-1e-14, 0.5, 0.5, 1e-14]).unwrap();
        assert_eq!(c.p_pp(), 0.0);
    }

    #[test]
    fn moments_of_chi_cell() {
        let m = cell_moments(&chi_cell(0.3));
        assert_abs_diff_eq!(m.cov, 0.3 / 4.0, epsilon = 1e-16);
        assert_abs_diff_eq!(m.exp_a, 0.0, epsilon = 1e-16);
        let u = cell_moments(&Cell::uniform());
        assert_eq!((u.exp_a, u.exp_b, u.cov), (0.0, 0.0, 0.0));
    }

    #[test]
    fn moments_of_hu_aa_cell() {
        let alpha = 0.7_f64;
        let [a, _] = family_settings(alpha);
        let st = hu_state(alpha, (&a, &a)).unwrap();
        let cell = born_cell(&st, &a, &a).unwrap();
        let (s, c) = alpha.sin_cos();
        let expected = 0.25 * (2.0 * c.powi(6) - s * s * (1.0 + c * c).powi(2) - c.powi(4) * s * s)
            / (1.0 + c * c);
        assert_abs_diff_eq!(cell_moments(&cell).cov, expected, epsilon = 1e-14);
    }

    #[test]
    fn moments_to_cell_examples() {
        let perfect = moments_to_cell(&Moments {
            exp_a: 0.0,
            exp_b: 0.0,
            cov: 0.25,
        })
        .unwrap();
        assert_eq!(perfect.probs(), [0.5, 0.0, 0.0, 0.5]);
        let indep = moments_to_cell(&Moments {
            exp_a: 0.0,
            exp_b: 0.0,
            cov: 0.0,
        })
        .unwrap();
        assert_eq!(indep.probs(), [0.25; 4]);
        let bad = moments_to_cell(&Moments {
            exp_a: 0.5,
            exp_b: -0.5,
            cov: 0.25,
        });
        assert!(matches!(bad, Err(Error::InfeasibleMoments(_))));
    }

    #[test]
    fn singlet_correlation_is_minus_cos() {
        let phi = 2.2_f64;
        let [a, b] = family_settings(phi / 2.0);
        let cell = born_cell(&singlet(), &a, &b).unwrap();
        let chi = correlation_coefficient(&cell).unwrap();
        assert_abs_diff_eq!(chi.value(), -phi.cos(), epsilon = 1e-14);
    }

    #[test]
    fn coefficient_equals_parameter_for_balanced() {
        for chi in [-1.0, -0.4, 0.0, 0.55, 1.0] {
            let cell = chi_cell(chi);
            let rho = correlation_coefficient(&cell).unwrap().value();
            assert_abs_diff_eq!(rho, chi, epsilon = 1e-15);
            assert_abs_diff_eq!(rho, 4.0 * cell_moments(&cell).cov, epsilon = 1e-15);
        }
    }

    #[test]
    fn deterministic_marginal_has_no_coefficient() {
        let cell = Cell::new([0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(
            correlation_coefficient(&cell),
            Err(Error::ZeroVariance(Side::Alice))
        );
        let cell = Cell::new([0.5, 0.0, 0.5, 0.0]).unwrap();
        assert_eq!(
            correlation_coefficient(&cell),
            Err(Error::ZeroVariance(Side::Bob))
        );
    }

    #[test]
    fn hardy_arrays_are_nonsignaling() {
        for k in 0..=10 {
            let alpha = k as f64 * std::f64::consts::FRAC_PI_2 / 10.0;
            let s = family_settings(alpha);
            let st = hardy_state(alpha, (&s[0], &s[0])).unwrap();
            let arr = born_array(&st, &s, &s).unwrap();
            let r = check_nonsignaling(&arr, 1e-12);
            assert!(r.passed, "alpha {alpha}: {r:?}");
        }
    }

    #[test]
    fn signaling_counterexample_fails() {
        let arr = CorrelationArray::new(
            vec![Setting::label_only("a"), Setting::label_only("b")],
            vec![Setting::label_only("a")],
            vec![
                Cell::deterministic(Outcome::Plus, Outcome::Plus),
                Cell::deterministic(Outcome::Plus, Outcome::Minus),
            ],
        )
        .unwrap();
        let r = check_nonsignaling(&arr, 1e-10);
        assert!(!r.passed);
        assert_eq!(r.max_discrepancy, 1.0);
    }

    #[test]
    fn balancing_hu_ab_cell() {
        let alpha = 0.8_f64;
        let s = family_settings(alpha);
        let st = hu_state(alpha, (&s[1], &s[1])).unwrap();
        let arr = balance_array(&born_array(&st, &s, &s).unwrap());
        let (sn, c) = alpha.sin_cos();
        let n2 = 1.0 / (1.0 + c * c);
        let d = n2 * (c.powi(4) + 1.0) / 2.0;
        let o = n2 * c * c * sn * sn / 2.0;
        let cell = arr.cell(0, 1);
        for (x, e) in cell.probs().iter().zip([d, o, o, d]) {
            assert_abs_diff_eq!(*x, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn balancing_is_idempotent_and_preserves_cov() {
        let s = family_settings(FRAC_PI_4);
        let st = hardy_state(FRAC_PI_4, (&s[0], &s[0])).unwrap();
        let arr = born_array(&st, &s, &s).unwrap();
        let once = balance_array(&arr);
        assert_eq!(balance_array(&once), once);
        for (x, y) in arr.cells().iter().zip(once.cells()) {
            let (mx, my) = (cell_moments(x), cell_moments(y));
            assert!((mx.cov - my.cov).abs() < 1e-15);
            assert!(my.exp_a.abs() < 1e-15 && my.exp_b.abs() < 1e-15);
            for side in [Side::Alice, Side::Bob] {
                assert_abs_diff_eq!(y.marginal(side, Outcome::Plus), 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn array_shape_checks() {
        let a = vec![Setting::label_only("a")];
        assert!(CorrelationArray::new(a.clone(), a.clone(), vec![]).is_err());
        let dup = vec![Setting::label_only("a"), Setting::label_only("a")];
        assert!(CorrelationArray::new(dup, a, vec![Cell::uniform(); 2]).is_err());
    }

    #[test]
    fn csv_and_json_export() {
        let s = family_settings(0.4);
        let arr = born_array(&singlet(), &s, &s).unwrap();
        let mut buf = Vec::new();
        arr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "setting_a,setting_b,outcome,probability");
        assert_eq!(lines.len(), 1 + 16);
        assert!(lines[2].starts_with("a,a,+-,"));

        let json = serde_json::to_value(&arr).unwrap();
        assert_eq!(json["cells"].as_array().unwrap().len(), 4);
        assert_eq!(json["settingsB"][1]["label"], "b");
        let back: CorrelationArray = serde_json::from_value(json).unwrap();
        assert_eq!(back, arr);
    }
}
