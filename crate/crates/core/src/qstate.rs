//! Two-qubit pure states, one-qubit measurement bases, and the singlet, Hardy
//! and Hardy-Unruh state families.
//!
//! Amplitudes are always ordered `(++, +−, −+, −−)`, Alice's outcome first.
//!
//! A [`Setting`] is a measurement basis for one particle. Bases on the common
//! great circle are given by a half-angle `θ` relative to a reference basis:
//!
//! ```text
//! |+⟩_θ = cos θ |+⟩_ref + sin θ |−⟩_ref
//! |−⟩_θ = −sin θ |+⟩_ref + cos θ |−⟩_ref
//! ```
//!
//! so that a setting `b` at half-angle `α` and the reference setting `a`
//! satisfy `|+⟩_a = cos α |+⟩_b − sin α |−⟩_b`.

use std::f64::consts::FRAC_PI_2;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlations::Cell;
use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Re-normalization is accepted only within this distance of unit norm.
pub const NORM_TOL: f64 = 1e-9;

/// Unitarity check for basis matrices.
pub const UNITARY_TOL: f64 = 1e-12;

const ZERO: Amplitude = Complex64::new(0.0, 0.0);
const ONE: Amplitude = Complex64::new(1.0, 0.0);

/// A 2×2 unitary taking coordinates in one basis to coordinates in another.
///
/// Row `i` holds the complex conjugate of target basis vector `i` expanded in
/// the source basis, so `target = M · source`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[[[f64; 2]; 2]; 2]", try_from = "[[[f64; 2]; 2]; 2]")]
pub struct BasisRotation {
    m: [[Amplitude; 2]; 2],
}

impl BasisRotation {
    pub fn identity() -> Self {
        Self {
            m: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    /// Builds a rotation from its matrix, rejecting non-unitary input.
    pub fn from_matrix(m: [[Amplitude; 2]; 2]) -> Result<Self> {
        let r = Self { m };
        let defect = r.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(r)
    }

    /// Builds the coordinate map into the basis `{|+⟩, |−⟩}` whose vectors are
    /// given in source coordinates.
    pub fn from_basis_vectors(plus: [Amplitude; 2], minus: [Amplitude; 2]) -> Result<Self> {
        Self::from_matrix([
            [plus[0].conj(), plus[1].conj()],
            [minus[0].conj(), minus[1].conj()],
        ])
    }

    pub fn matrix(&self) -> [[Amplitude; 2]; 2] {
        self.m
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &BasisRotation) -> BasisRotation {
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        BasisRotation { m: out }
    }

    pub fn adjoint(&self) -> BasisRotation {
        let m = self.m;
        BasisRotation {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    pub fn apply(&self, v: [Amplitude; 2]) -> [Amplitude; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Largest entry of `|MᴴM − 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().then_after(self);
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((p.m[i][j] - target).norm());
            }
        }
        worst
    }
}

impl From<BasisRotation> for [[[f64; 2]; 2]; 2] {
    fn from(r: BasisRotation) -> Self {
        r.m.map(|row| row.map(|z| [z.re, z.im]))
    }
}

impl TryFrom<[[[f64; 2]; 2]; 2]> for BasisRotation {
    type Error = Error;

    fn try_from(raw: [[[f64; 2]; 2]; 2]) -> Result<Self> {
        Self::from_matrix(raw.map(|row| row.map(|[re, im]| Complex64::new(re, im))))
    }
}

/// Rotation with rows `(cos α, −sin α)` and `(sin α, cos α)`.
///
/// This maps `b`-basis coordinates to `a`-basis coordinates when `α` is half
/// the angle between the peeling directions `a` and `b`. Its inverse is
/// `rotate_basis(-alpha)`.
pub fn rotate_basis(alpha: f64) -> BasisRotation {
    let (s, c) = alpha.sin_cos();
    BasisRotation {
        m: [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
    }
}

/// A measurement setting ("peeling") for one particle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub label: String,
    /// Half the angle between this peeling direction and the reference one,
    /// reduced to `[0, π)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_angle: Option<f64>,
    /// General complex basis, as the coordinate map from the reference basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisRotation>,
}

impl Setting {
    pub fn new(label: impl Into<String>, half_angle: f64) -> Self {
        Self {
            label: label.into(),
            half_angle: Some(half_angle.rem_euclid(PI)),
            basis: None,
        }
    }

    pub fn reference(label: impl Into<String>) -> Self {
        Self::new(label, 0.0)
    }

    pub fn with_basis(label: impl Into<String>, from_reference: BasisRotation) -> Self {
        Self {
            label: label.into(),
            half_angle: None,
            basis: Some(from_reference),
        }
    }

    /// A setting known only by name (raffle or relabeled arrays).
    pub fn label_only(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            half_angle: None,
            basis: None,
        }
    }

    /// Coordinate map from the reference basis into this setting's basis.
    pub fn from_reference(&self) -> Result<BasisRotation> {
        if let Some(b) = self.basis {
            return Ok(b);
        }
        match self.half_angle {
            Some(theta) => Ok(rotate_basis(-theta)),
            None => Err(Error::NoBasis(self.label.clone())),
        }
    }
}

/// The two peelings `a` (reference) and `b` (half-angle `alpha`) shared by the
/// singlet, Hardy and Hardy-Unruh branches.
pub fn family_settings(alpha: f64) -> [Setting; 2] {
    [Setting::reference("a"), Setting::new("b", alpha)]
}

/// A normalized two-qubit pure state expressed in a product basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct TwoQubitState {
    amplitudes: [Amplitude; 4],
    basis_a: Setting,
    basis_b: Setting,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawState {
    basis_a: Setting,
    basis_b: Setting,
    amplitudes: [[f64; 2]; 4],
}

impl From<TwoQubitState> for RawState {
    fn from(s: TwoQubitState) -> Self {
        RawState {
            basis_a: s.basis_a,
            basis_b: s.basis_b,
            amplitudes: s.amplitudes.map(|z| [z.re, z.im]),
        }
    }
}

impl TryFrom<RawState> for TwoQubitState {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        TwoQubitState::new(
            raw.amplitudes.map(|[re, im]| Complex64::new(re, im)),
            raw.basis_a,
            raw.basis_b,
        )
    }
}

fn norm_sqr(amps: &[Amplitude; 4]) -> f64 {
    amps.iter().map(|z| z.norm_sqr()).sum()
}

impl TwoQubitState {
    /// Accepts amplitudes whose norm is within [`NORM_TOL`] of one and
    /// renormalizes them exactly.
    pub fn new(amplitudes: [Amplitude; 4], basis_a: Setting, basis_b: Setting) -> Result<Self> {
        let n2 = norm_sqr(&amplitudes);
        if !n2.is_finite() || (n2.sqrt() - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self::scaled(amplitudes, n2, basis_a, basis_b))
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalize(
        amplitudes: [Amplitude; 4],
        basis_a: Setting,
        basis_b: Setting,
    ) -> Result<Self> {
        let n2 = norm_sqr(&amplitudes);
        if !n2.is_finite() || n2 == 0.0 {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self::scaled(amplitudes, n2, basis_a, basis_b))
    }

    fn scaled(amplitudes: [Amplitude; 4], n2: f64, basis_a: Setting, basis_b: Setting) -> Self {
        let k = 1.0 / n2.sqrt();
        Self {
            amplitudes: amplitudes.map(|z| z * k),
            basis_a,
            basis_b,
        }
    }

    pub fn amplitudes(&self) -> &[Amplitude; 4] {
        &self.amplitudes
    }

    pub fn basis_a(&self) -> &Setting {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &Setting {
        &self.basis_b
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    /// Born probabilities in the current basis, `(++, +−, −+, −−)`.
    pub fn probabilities(&self) -> [f64; 4] {
        self.amplitudes.map(|z| z.norm_sqr())
    }

    /// Re-expresses the state in the product basis of `a` (Alice) and `b` (Bob).
    pub fn in_basis(&self, a: &Setting, b: &Setting) -> Result<TwoQubitState> {
        let ma = a
            .from_reference()?
            .then_after(&self.basis_a.from_reference()?.adjoint());
        let mb = b
            .from_reference()?
            .then_after(&self.basis_b.from_reference()?.adjoint());
        let (ma, mb) = (ma.matrix(), mb.matrix());
        let mut out = [ZERO; 4];
        for (i, ra) in ma.iter().enumerate() {
            for (j, rb) in mb.iter().enumerate() {
                let mut acc = ZERO;
                for (k, x) in ra.iter().enumerate() {
                    for (l, y) in rb.iter().enumerate() {
                        acc += x * y * self.amplitudes[2 * k + l];
                    }
                }
                out[2 * i + j] = acc;
            }
        }
        Ok(TwoQubitState {
            amplitudes: out,
            basis_a: a.clone(),
            basis_b: b.clone(),
        })
    }

    /// Largest amplitude difference after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &TwoQubitState) -> f64 {
        let overlap: Amplitude = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| x.conj() * y)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| (x * phase - y).norm())
            .fold(0.0, f64::max)
    }
}

fn real(x: f64) -> Amplitude {
    Complex64::new(x, 0.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&alpha) {
        return Err(Error::Domain {
            value: alpha,
            min: 0.0,
            max: FRAC_PI_2,
        });
    }
    Ok(())
}

/// `(|+−⟩ − |−+⟩)/√2` in the reference basis on both sides.
pub fn singlet() -> TwoQubitState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    TwoQubitState {
        amplitudes: [ZERO, real(h), real(-h), ZERO],
        basis_a: Setting::reference("a"),
        basis_b: Setting::reference("a"),
    }
}

/// Hardy state for peelings `a`, `b` separated by half-angle `alpha`,
/// re-expressed in `basis`.
///
/// In the `aa` basis it is `N(α)(0, −sin α, −sin α, cos α)` with
/// `N(α) = 1/√(1 + sin²α)`.
pub fn hardy_state(alpha: f64, basis: (&Setting, &Setting)) -> Result<TwoQubitState> {
    check_alpha(alpha)?;
    let (s, c) = alpha.sin_cos();
    let a = Setting::reference("a");
    let aa = TwoQubitState::normalize([ZERO, real(-s), real(-s), real(c)], a.clone(), a)?;
    aa.in_basis(basis.0, basis.1)
}

/// Hardy-Unruh state on the `(u, v, w) = (cos α, sin α, cos α)` branch,
/// re-expressed in `basis`.
///
/// In the `bb` basis it is `N(α)(cos α, −sin α, 0, −cos α)` with
/// `N(α) = 1/√(1 + cos²α)`.
pub fn hu_state(alpha: f64, basis: (&Setting, &Setting)) -> Result<TwoQubitState> {
    check_alpha(alpha)?;
    let (s, c) = alpha.sin_cos();
    let b = Setting::new("b", alpha);
    let bb = TwoQubitState::normalize([real(c), real(-s), ZERO, real(-c)], b.clone(), b)?;
    bb.in_basis(basis.0, basis.1)
}

/// A generic Hardy-Unruh state with its four peelings.
///
/// `b` and `b_prime` are the reference bases on Alice's and Bob's side; `a`
/// and `a_prime` are derived from the coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HuGeneric {
    pub state: TwoQubitState,
    pub a: Setting,
    pub b: Setting,
    pub a_prime: Setting,
    pub b_prime: Setting,
}

impl HuGeneric {
    pub fn alice_settings(&self) -> [Setting; 2] {
        [self.a.clone(), self.b.clone()]
    }

    pub fn bob_settings(&self) -> [Setting; 2] {
        [self.a_prime.clone(), self.b_prime.clone()]
    }
}

/// Builds `N(u|++⟩ − v|+−⟩ − w|−−⟩)` in the `bb′` basis together with the
/// peelings `a` and `a′` that give it zero `+−` components in the `ab′` and
/// `ba′` bases:
///
/// ```text
/// |−⟩_a  = (v|+⟩_b + w|−⟩_b)/√(|v|²+|w|²),   |+⟩_a  = (w̄|+⟩_b − v̄|−⟩_b)/√(|v|²+|w|²)
/// |+⟩_a′ = (u|+⟩_b′ − v|−⟩_b′)/√(|u|²+|v|²), |−⟩_a′ = (v̄|+⟩_b′ + ū|−⟩_b′)/√(|u|²+|v|²)
/// ```
pub fn hu_state_generic(u: Amplitude, v: Amplitude, w: Amplitude) -> Result<HuGeneric> {
    const DEGENERATE: f64 = 1e-24;
    let vw = v.norm_sqr() + w.norm_sqr();
    let uv = u.norm_sqr() + v.norm_sqr();
    if vw.is_nan() || vw <= DEGENERATE {
        return Err(Error::Degenerate(format!("|v|² + |w|² = {vw:e}")));
    }
    if uv.is_nan() || uv <= DEGENERATE {
        return Err(Error::Degenerate(format!("|u|² + |v|² = {uv:e}")));
    }
    let b = Setting::reference("b");
    let b_prime = Setting::reference("b'");
    let state = TwoQubitState::normalize([u, -v, ZERO, -w], b.clone(), b_prime.clone())?;

    let n = vw.sqrt();
    let a_basis = BasisRotation::from_basis_vectors([w.conj() / n, -v.conj() / n], [v / n, w / n])?;
    let m = uv.sqrt();
    let a_prime_basis =
        BasisRotation::from_basis_vectors([u / m, -v / m], [v.conj() / m, u.conj() / m])?;
    Ok(HuGeneric {
        state,
        a: Setting::with_basis("a", a_basis),
        b,
        a_prime: Setting::with_basis("a'", a_prime_basis),
        b_prime,
    })
}

/// Born-rule outcome probabilities when Alice measures `setting_a` and Bob
/// measures `setting_b`.
pub fn born_cell(state: &TwoQubitState, setting_a: &Setting, setting_b: &Setting) -> Result<Cell> {
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2));
    }
    let p = state.in_basis(setting_a, setting_b)?.probabilities();
    Cell::new(p)
}
