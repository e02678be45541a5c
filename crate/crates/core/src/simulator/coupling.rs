use crate::configuration::{check_same_circle, Configuration};
use crate::error::{check_steps, require_positive, Result};
use crate::kernels::params::SystemParams;
use crate::simulator::step::{apply_step, substream, StepNoise};

/// Populations of several systems driven by the same arrivals, interpolling
/// times, scan points and tie coins, differing only in the scan radius.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPaths {
    pub radii: Vec<f64>,
    /// `populations[i][t]` is `‖W_t‖` of the system with radius `radii[i]`.
    pub populations: Vec<Vec<u64>>,
}

impl CoupledPaths {
    /// Whether system `lower` never exceeds system `upper`.
    pub fn dominated(&self, lower: usize, upper: usize) -> bool {
        self.populations[lower]
            .iter()
            .zip(&self.populations[upper])
            .all(|(a, b)| a <= b)
    }
}

/// Runs one copy of the chain per radius from `initial`, sharing all driving
/// randomness. `params.r()` is ignored.
pub fn coupled_paths(
    params: &SystemParams,
    radii: &[f64],
    steps: u64,
    seed: u64,
    initial: &Configuration,
) -> Result<CoupledPaths> {
    check_steps(steps)?;
    check_same_circle(initial.circumference(), params.circumference())?;
    for &r in radii {
        require_positive("r", r)?;
    }
    let mut rng = substream(seed, 0);
    let mut noise = StepNoise::default();
    let mut states: Vec<Configuration> = radii.iter().map(|_| initial.clone()).collect();
    let mut populations: Vec<Vec<u64>> = radii
        .iter()
        .map(|_| {
            let mut v = Vec::with_capacity(steps as usize + 1);
            v.push(initial.total_variation());
            v
        })
        .collect();
    for _ in 0..steps {
        noise.draw(params, &mut rng);
        for ((zeta, pop), &r) in states.iter_mut().zip(&mut populations).zip(radii) {
            apply_step(zeta, &noise, r);
            pop.push(zeta.total_variation());
        }
    }
    Ok(CoupledPaths {
        radii: radii.to_vec(),
        populations,
    })
}
