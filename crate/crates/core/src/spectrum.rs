//! Single-particle spectra of the oscillator-family models.
//!
//! All energies are in units of `hbar omega_0 = 1`. A level `(n, l)` of the
//! oscillator family has `l` in `n, n-2, ..., 1 or 0` and holds `2(2l+1)`
//! particles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{q_number_unchecked, DeformationParameter};

/// Hard ceiling on the number of bands `enumerate_levels` will visit.
pub const MAX_BANDS: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: u32,
    pub l: u32,
    pub energy: f64,
    pub degeneracy: u32,
}

impl Level {
    pub fn new(n: u32, l: u32, energy: f64) -> Self {
        Self {
            n,
            l,
            energy,
            degeneracy: degeneracy(l),
        }
    }
}

/// Particles a level of angular momentum `l` accommodates, spin included.
pub fn degeneracy(l: u32) -> u32 {
    2 * (2 * l + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelId {
    QExact,
    QTaylor2,
    Nilsson,
    PlainHo,
    Pseudo3nl,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::QExact,
        ModelId::QTaylor2,
        ModelId::Nilsson,
        ModelId::PlainHo,
        ModelId::Pseudo3nl,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelId::QExact => "q-exact",
            ModelId::QTaylor2 => "q-taylor2",
            ModelId::Nilsson => "nilsson",
            ModelId::PlainHo => "plain-ho",
            ModelId::Pseudo3nl => "pseudo-3nl",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown model '{s}'")))
    }
}

/// A model together with the parameter its energy rule needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    QExact(DeformationParameter),
    QTaylor2 { tau: f64 },
    /// Nilsson's modified oscillator without spin-orbit; `mu_prime` has no default.
    Nilsson { mu_prime: f64 },
    PlainHo,
    /// Levels grouped by `k = 3n + l`, `n` counting radial nodes; energy is `k`.
    Pseudo3nl,
}

impl Model {
    pub fn id(&self) -> ModelId {
        match self {
            Model::QExact(_) => ModelId::QExact,
            Model::QTaylor2 { .. } => ModelId::QTaylor2,
            Model::Nilsson { .. } => ModelId::Nilsson,
            Model::PlainHo => ModelId::PlainHo,
            Model::Pseudo3nl => ModelId::Pseudo3nl,
        }
    }

    pub fn q_exact(tau: f64) -> Result<Self> {
        Ok(Model::QExact(DeformationParameter::new(tau)?))
    }

    /// Energy of `(n, l)` under this model.
    pub fn energy(&self, n: u32, l: u32) -> Result<f64> {
        match *self {
            Model::QExact(dp) => energy_q_exact(n, l, dp),
            Model::QTaylor2 { tau } => energy_q_taylor(n, l, tau),
            Model::Nilsson { mu_prime } => energy_nilsson(n, l, mu_prime),
            Model::PlainHo => energy_plain_ho(n, l),
            Model::Pseudo3nl => Ok(f64::from(3 * n + l)),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Model::QTaylor2 { tau } if !tau.is_finite() => {
                Err(Error::invalid(format!("tau must be finite, got {tau}")))
            }
            Model::Nilsson { mu_prime } if !(mu_prime.is_finite() && mu_prime >= 0.0) => Err(
                Error::invalid(format!("mu' must be finite and non-negative, got {mu_prime}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Oscillator-family selection rule: `0 <= l <= n` with `n - l` even.
pub fn is_valid_pair(n: u32, l: u32) -> bool {
    l <= n && (n - l).is_multiple_of(2)
}

fn check_pair(n: u32, l: u32) -> Result<()> {
    if is_valid_pair(n, l) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "l = {l} is not allowed in band n = {n} (need l = n, n-2, ..., 1 or 0)"
        )))
    }
}

/// Allowed `l` values of band `n`, from `l = n` downwards.
pub fn band_ls(n: u32) -> impl Iterator<Item = u32> {
    (0..=n).rev().step_by(2)
}

fn fill_band(n: u32, model: &Model) -> Vec<Level> {
    band_ls(n)
        .map(|l| Level::new(n, l, model.energy(n, l).expect("band members are valid pairs")))
        .collect()
}

/// `E = [n] q^(n+1) - q (q - 1/q) / [2] * [l][l+1]`, the last factor being
/// the so_q(3) Casimir eigenvalue.
pub fn energy_q_exact(n: u32, l: u32, dp: DeformationParameter) -> Result<f64> {
    check_pair(n, l)?;
    if dp.is_classical() {
        return Ok(f64::from(n));
    }
    let (n, l) = (f64::from(n), f64::from(l));
    let q = dp.q();
    let qn = |x: f64| q_number_unchecked(x, dp);
    let casimir = qn(l) * qn(l + 1.0);
    Ok(qn(n) * q.powf(n + 1.0) - q * (q - q.recip()) / qn(2.0) * casimir)
}

/// Second-order expansion of [`energy_q_exact`] in `tau`.
pub fn energy_q_taylor(n: u32, l: u32, tau: f64) -> Result<f64> {
    check_pair(n, l)?;
    if !tau.is_finite() {
        return Err(Error::invalid(format!("tau must be finite, got {tau}")));
    }
    let (n, l) = (f64::from(n), f64::from(l));
    let ll = l * (l + 1.0);
    let nn = n * (n + 1.0);
    Ok(n - tau * (ll - nn) - tau * tau * (ll - n * (n + 1.0) * (2.0 * n + 1.0) / 3.0))
}

/// Nilsson's modified oscillator, `E = n - mu' (l(l+1) - n(n+3)/2)`.
pub fn energy_nilsson(n: u32, l: u32, mu_prime: f64) -> Result<f64> {
    check_pair(n, l)?;
    Model::Nilsson { mu_prime }.validate()?;
    let (n, l) = (f64::from(n), f64::from(l));
    Ok(n - mu_prime * (l * (l + 1.0) - n * (n + 3.0) / 2.0))
}

pub fn energy_plain_ho(n: u32, l: u32) -> Result<f64> {
    check_pair(n, l)?;
    Ok(f64::from(n))
}

/// Every level of `model` with energy at or below `e_cut`, unsorted.
///
/// Bands are visited in increasing `n` until two consecutive bands lie
/// entirely above the cut.
pub fn enumerate_levels(model: &Model, e_cut: f64) -> Result<Vec<Level>> {
    if !(e_cut.is_finite() && e_cut > 0.0) {
        return Err(Error::invalid(format!("e_cut must be positive and finite, got {e_cut}")));
    }
    model.validate()?;
    if let Model::Pseudo3nl = model {
        return Ok(enumerate_pseudo_3nl(e_cut));
    }

    let mut levels = Vec::new();
    let mut bands_above = 0;
    for n in 0..MAX_BANDS {
        let band = fill_band(n, model);
        let band_min = band.iter().map(|lv| lv.energy).fold(f64::INFINITY, f64::min);
        if band_min > e_cut {
            bands_above += 1;
            if bands_above == 2 {
                return Ok(levels);
            }
        } else {
            bands_above = 0;
            levels.extend(band.into_iter().filter(|lv| lv.energy <= e_cut));
        }
    }
    Err(Error::invalid(format!(
        "spectrum of {} does not exceed e_cut = {e_cut} within {MAX_BANDS} bands",
        model.id()
    )))
}

fn enumerate_pseudo_3nl(e_cut: f64) -> Vec<Level> {
    let k_max = e_cut.floor() as u32;
    let mut levels = Vec::new();
    for nodes in 0..=k_max / 3 {
        for l in 0..=(k_max - 3 * nodes) {
            levels.push(Level::new(nodes, l, f64::from(3 * nodes + l)));
        }
    }
    levels
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoGroup {
    pub k: u32,
    pub occupancy: u32,
    pub cumulative: u32,
}

/// Occupancies of the `k = 3n + l` groups for `k = 0..=k_max`.
pub fn pseudo_3nl_fill(k_max: u32) -> Vec<PseudoGroup> {
    let mut cumulative = 0;
    (0..=k_max)
        .map(|k| {
            let occupancy: u32 = (0..=k / 3).map(|nodes| degeneracy(k - 3 * nodes)).sum();
            cumulative += occupancy;
            PseudoGroup {
                k,
                occupancy,
                cumulative,
            }
        })
        .collect()
}
