//! The worked examples as realization arrays.
//!
//! * `f(z) = 1/(2(2z+1))` and its array inverse `g(z) = 2(2+z)/z`.
//! * The 2×2 lossless positive-real triple `F₁, F₂, F₃` with parameters
//!   `a ≠ 0, b`, where `R_{F₂} = R_{F₁}⁻¹` as constant matrices.
//!
//! The printed `F₃` equals `a⁻²·F₁(z)⁻¹`, so `F₃F₁ ≡ I₂` only for `a = ±1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realization::{real_realization, Realization};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum FixtureId {
    #[serde(rename = "f")]
    F,
    #[serde(rename = "g")]
    G,
    F1 { a: f64, b: f64 },
    F2 { a: f64, b: f64 },
    F3 { a: f64, b: f64 },
}

impl FixtureId {
    pub const DEFAULT_A: f64 = 1.0;
    pub const DEFAULT_B: f64 = 1.0;

    /// Parses `f`, `g`, `F1`, `F2`, `F3`; parameters only apply to the triple.
    pub fn parse(name: &str, a: f64, b: f64) -> Result<Self> {
        match name {
            "f" => Ok(FixtureId::F),
            "g" => Ok(FixtureId::G),
            "F1" => Ok(FixtureId::F1 { a, b }),
            "F2" => Ok(FixtureId::F2 { a, b }),
            "F3" => Ok(FixtureId::F3 { a, b }),
            other => Err(Error::BadParams(format!("unknown fixture '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FixtureId::F => "f",
            FixtureId::G => "g",
            FixtureId::F1 { .. } => "F1",
            FixtureId::F2 { .. } => "F2",
            FixtureId::F3 { .. } => "F3",
        }
    }

    pub fn params(&self) -> Option<(f64, f64)> {
        match *self {
            FixtureId::F | FixtureId::G => None,
            FixtureId::F1 { a, b } | FixtureId::F2 { a, b } | FixtureId::F3 { a, b } => Some((a, b)),
        }
    }
}

fn check_params(a: f64, b: f64) -> Result<()> {
    if a == 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::BadParams(format!("need finite a ≠ 0 and finite b, got a = {a}, b = {b}")));
    }
    Ok(())
}

pub fn fixture(id: FixtureId) -> Result<Realization> {
    match id {
        FixtureId::F => Ok(real_realization(1, 1, &[&[-1.0, 1.0], &[1.0, 0.0]])?.scaled(0.5)),
        FixtureId::G => Ok(real_realization(1, 1, &[&[0.0, 1.0], &[1.0, 1.0]])?.scaled(2.0)),
        FixtureId::F1 { a, b } => {
            check_params(a, b)?;
            let (ia, ia2, ba2) = (1.0 / a, 1.0 / (a * a), b / (a * a));
            real_realization(
                2,
                2,
                &[
                    &[0.0, 0.0, ia, 0.0],
                    &[0.0, 0.0, ba2, -ia],
                    &[ia, ba2, 0.0, ia2],
                    &[0.0, -ia, -ia2, 0.0],
                ],
            )
        }
        FixtureId::F2 { a, b } => {
            check_params(a, b)?;
            real_realization(
                2,
                2,
                &[&[0.0, 1.0, a, b], &[-1.0, 0.0, 0.0, -a], &[a, 0.0, 0.0, 0.0], &[b, -a, 0.0, 0.0]],
            )
        }
        FixtureId::F3 { a, b } => {
            check_params(a, b)?;
            let r = b / a;
            real_realization(
                2,
                2,
                &[&[0.0, 1.0, 1.0, r], &[-1.0, 0.0, 0.0, 1.0], &[1.0, 0.0, 0.0, -1.0], &[r, 1.0, 1.0, 0.0]],
            )
        }
    }
}
