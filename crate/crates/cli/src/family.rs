//! Turning `--family`/`--alpha`/`--uvw` flags into a state and its settings.

use clap::{Args, ValueEnum};
use nonlocal_core::qstate::HuGeneric;
use nonlocal_core::{
    born_array, family_settings, hardy_state, hu_state, hu_state_generic, singlet, Amplitude,
    CorrelationArray, Setting, Side, TwoQubitState,
};
use serde::Serialize;

use crate::expr;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Hardy,
    Hu,
    HuGeneric,
    Singlet,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct FamilyArgs {
    /// State family.
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    /// Half-angle between the `a` and `b` peelings, e.g. `pi/4`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Cosine of the half-angle, e.g. `sqrt(2/5)`.
    #[arg(long, conflicts_with = "alpha", allow_hyphen_values = true)]
    pub alpha_cos: Option<String>,
    /// Read `--alpha` in degrees.
    #[arg(long)]
    pub degrees: bool,
    /// Generic Hardy-Unruh coefficients as three `re,im` pairs.
    #[arg(long, num_args = 3, value_names = ["U", "V", "W"], allow_hyphen_values = true)]
    pub uvw: Option<Vec<String>>,
}

impl FamilyArgs {
    pub fn kind(&self) -> Result<FamilyKind, CliError> {
        self.family
            .ok_or_else(|| CliError::Validation("--family is required".into()))
    }

    /// The half-angle given by `--alpha` or `--alpha-cos`, if any.
    pub fn alpha(&self) -> Result<Option<f64>, CliError> {
        if let Some(src) = &self.alpha {
            let v = expr::eval(src).map_err(CliError::Validation)?;
            return Ok(Some(if self.degrees { v.to_radians() } else { v }));
        }
        if let Some(src) = &self.alpha_cos {
            let c = expr::eval(src).map_err(CliError::Validation)?;
            if !(-1.0..=1.0).contains(&c) {
                return Err(CliError::Validation(format!(
                    "cos alpha = {c} is outside [-1, 1]"
                )));
            }
            return Ok(Some(c.acos()));
        }
        Ok(None)
    }

    pub fn uvw(&self) -> Result<Option<[Amplitude; 3]>, CliError> {
        let Some(parts) = &self.uvw else {
            return Ok(None);
        };
        let mut out = [Amplitude::new(0.0, 0.0); 3];
        for (slot, part) in out.iter_mut().zip(parts) {
            let (re, im) = part.split_once(',').unwrap_or((part, "0"));
            let re = expr::eval(re).map_err(CliError::Validation)?;
            let im = expr::eval(im).map_err(CliError::Validation)?;
            *slot = Amplitude::new(re, im);
        }
        Ok(Some(out))
    }

    pub fn resolve(&self) -> Result<Family, CliError> {
        let kind = self.kind()?;
        let alpha = self.alpha()?;
        let uvw = self.uvw()?;
        match kind {
            FamilyKind::HuGeneric => {
                if alpha.is_some() {
                    return Err(CliError::Validation(
                        "hu-generic takes --uvw, not an angle".into(),
                    ));
                }
                let [u, v, w] =
                    uvw.ok_or_else(|| CliError::Validation("hu-generic needs --uvw".into()))?;
                Family::generic(u, v, w)
            }
            _ => {
                if uvw.is_some() {
                    return Err(CliError::Validation(format!(
                        "--uvw only applies to hu-generic, not {kind:?}"
                    )));
                }
                let alpha = alpha.ok_or_else(|| {
                    CliError::Validation("--alpha or --alpha-cos is required".into())
                })?;
                Family::at(kind, alpha)
            }
        }
    }
}

/// A state with the settings each side may measure.
#[derive(Clone, Debug)]
pub struct Family {
    pub state: TwoQubitState,
    pub alice: Vec<Setting>,
    pub bob: Vec<Setting>,
}

impl Family {
    /// One of the single-angle families at half-angle `alpha`.
    pub fn at(kind: FamilyKind, alpha: f64) -> Result<Self, CliError> {
        let s = family_settings(alpha);
        let state = match kind {
            FamilyKind::Hardy => hardy_state(alpha, (&s[0], &s[0]))?,
            FamilyKind::Hu => hu_state(alpha, (&s[1], &s[1]))?,
            FamilyKind::Singlet => singlet(),
            FamilyKind::HuGeneric => {
                return Err(CliError::Validation(
                    "hu-generic has no angle parameter".into(),
                ))
            }
        };
        Ok(Self {
            state,
            alice: s.to_vec(),
            bob: s.to_vec(),
        })
    }

    pub fn generic(u: Amplitude, v: Amplitude, w: Amplitude) -> Result<Self, CliError> {
        let g: HuGeneric = hu_state_generic(u, v, w)?;
        Ok(Self {
            alice: g.alice_settings().to_vec(),
            bob: g.bob_settings().to_vec(),
            state: g.state,
        })
    }

    pub fn array(&self) -> Result<CorrelationArray, CliError> {
        Ok(born_array(&self.state, &self.alice, &self.bob)?)
    }

    pub fn setting(&self, side: Side, label: &str) -> Result<&Setting, CliError> {
        let list = match side {
            Side::Alice => &self.alice,
            Side::Bob => &self.bob,
        };
        list.iter().find(|s| s.label == label).ok_or_else(|| {
            let known: Vec<&str> = list.iter().map(|s| s.label.as_str()).collect();
            CliError::Validation(format!(
                "no setting `{label}` for {side}; expected one of {}",
                known.join(", ")
            ))
        })
    }
}
