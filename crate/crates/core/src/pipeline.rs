//! Enumerate-then-tabulate for the q-deformed oscillator, with the
//! reference parameters of the sodium-cluster fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shells::{build_shell_table, ShellTable};
use crate::spectrum::{enumerate_levels, Level, Model};

/// Deformation that reproduces the sodium-cluster magic numbers.
pub const REFERENCE_TAU: f64 = 0.038;

/// Cut that keeps exactly the levels up to `(n, l) = (13, 3)` at the
/// reference deformation (1516 particles).
pub const REFERENCE_E_CUT: f64 = 22.6;

/// Particle count covered by the reference level table.
pub const REFERENCE_PARTICLES: u32 = 1516;

/// Magic numbers of the reference table at threshold 0.39.
pub const REFERENCE_MAGIC: [u32; 25] = [
    2, 8, 20, 34, 40, 58, 92, 138, 198, 254, 268, 338, 440, 556, 676, 694, 832, 912, 1012, 1100,
    1206, 1284, 1314, 1410, 1502,
];

/// Where to truncate the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ECut {
    /// Keep levels with energy at or below this value.
    Energy(f64),
    /// Keep levels up to and including the first one at which the running
    /// count reaches this many particles (plus anything degenerate with it).
    Particles(u32),
}

impl Default for ECut {
    fn default() -> Self {
        ECut::Energy(REFERENCE_E_CUT)
    }
}

/// Levels of `model` truncated according to `cut`.
pub fn levels_for(model: &Model, cut: ECut) -> Result<Vec<Level>> {
    match cut {
        ECut::Energy(e) => enumerate_levels(model, e),
        ECut::Particles(target) => {
            if target == 0 {
                return Err(Error::invalid("particle cut must be positive"));
            }
            let mut e = 1.0;
            loop {
                let mut levels = enumerate_levels(model, e)?;
                let total: u32 = levels.iter().map(|lv| lv.degeneracy).sum();
                if total >= target {
                    let table = build_shell_table(&levels, 1.0)?;
                    let closing = table
                        .rows()
                        .iter()
                        .find(|r| r.cumulative >= target)
                        .expect("total reaches target");
                    let e_close = closing.level.energy;
                    levels.retain(|lv| lv.energy <= e_close);
                    return Ok(levels);
                }
                e *= 1.5;
            }
        }
    }
}

/// Shell table of the q-deformed oscillator at deformation `tau`.
pub fn q_shell_table(tau: f64, threshold: f64, cut: ECut) -> Result<ShellTable> {
    let model = Model::q_exact(tau)?;
    build_shell_table(&levels_for(&model, cut)?, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shells::DEFAULT_THRESHOLD;

    #[test]
    fn reference_table() {
        let t = q_shell_table(REFERENCE_TAU, DEFAULT_THRESHOLD, ECut::default()).unwrap();
        assert_eq!(t.rows().len(), 62);
        assert_eq!(t.total_particles(), REFERENCE_PARTICLES);
        assert_eq!(t.magic().values(), &REFERENCE_MAGIC);
    }

    #[test]
    fn particle_cut_matches_reference_cut() {
        let by_energy = q_shell_table(REFERENCE_TAU, DEFAULT_THRESHOLD, ECut::default()).unwrap();
        let by_count =
            q_shell_table(REFERENCE_TAU, DEFAULT_THRESHOLD, ECut::Particles(REFERENCE_PARTICLES)).unwrap();
        assert_eq!(by_energy, by_count);
    }

    #[test]
    fn particle_cut_keeps_degenerate_band() {
        let t = q_shell_table(0.0, DEFAULT_THRESHOLD, ECut::Particles(21)).unwrap();
        // band n = 3 holds 20 particles and completes at 40
        assert_eq!(t.total_particles(), 40);
        assert!(q_shell_table(0.0, DEFAULT_THRESHOLD, ECut::Particles(0)).is_err());
    }

    #[test]
    fn cut_above_reference_adds_levels() {
        // (13,1) at 22.957 and (14,8) at 22.994 enter, and 1516 acquires a gap of 0.397
        let t = q_shell_table(REFERENCE_TAU, DEFAULT_THRESHOLD, ECut::Energy(23.0)).unwrap();
        assert_eq!(t.rows().len(), 64);
        assert!(t.magic().contains(1516));
    }
}
