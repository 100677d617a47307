//! Seeded random grid functions for sweeps and property checks.
//!
//! Every stream is a ChaCha8 generator keyed by one 64-bit seed; independent
//! purposes use distinct stream ids so results do not depend on call order.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{apply_transform, GridFunction, Lattice, RigidTransform};

use std::sync::Arc;

/// Generator for `(seed, stream)`.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Independent uniform node values and far field.
    Noise,
    /// A few Gaussian bumps of random sign, width and center.
    Bumps,
    /// Piecewise-linear tent of random center, width and height.
    Hat,
    /// `c·u + d` for a reference function `u`.
    Affine,
    /// Reference function plus small noise.
    Perturbed,
    /// Reference function shifted by a random lattice offset.
    Translated,
}

pub const ALL_FAMILIES: [Family; 6] =
    [Family::Noise, Family::Bumps, Family::Hat, Family::Affine, Family::Perturbed, Family::Translated];

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws one function. Families built on a reference fall back to bumps when
/// `reference` is `None`.
pub fn sample(lattice: &Arc<Lattice>, family: Family, reference: Option<&GridFunction>, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
    let n = lattice.dim();
    let l = lattice.half_extent();
    match (family, reference) {
        (Family::Noise, _) => {
            let values = (0..lattice.len()).map(|_| uniform(rng, -1.0, 1.0)).collect();
            GridFunction::new(lattice.clone(), values, uniform(rng, -1.0, 1.0))
        }
        (Family::Hat, _) => {
            let center = [uniform(rng, -0.5 * l, 0.5 * l), if n == 2 { uniform(rng, -0.5 * l, 0.5 * l) } else { 0.0 }];
            let width = uniform(rng, 0.5, 0.5 * l);
            let height = uniform(rng, -2.0, 2.0);
            let base = uniform(rng, -0.5, 0.5);
            GridFunction::from_fn(lattice.clone(), base, |x| {
                let r = (x[0] - center[0]).hypot(x[1] - center[1]);
                base + height * (1.0 - r / width).max(0.0)
            })
        }
        (Family::Affine, Some(u)) => {
            let c = uniform(rng, -3.0, 3.0);
            let d = uniform(rng, -1.0, 1.0);
            u.map(|v| c * v + d)
        }
        (Family::Perturbed, Some(u)) => {
            let eps = uniform(rng, 1e-3, 5e-2);
            let mut v = u.clone();
            for x in v.values_mut() {
                *x += eps * uniform(rng, -1.0, 1.0);
            }
            Ok(v)
        }
        (Family::Translated, Some(u)) => {
            let k = lattice.radius_index() as i64 / 4;
            let shift = [rng.random_range(-k..=k), if n == 2 { rng.random_range(-k..=k) } else { 0 }];
            apply_transform(u, &RigidTransform::Translate(shift))
        }
        _ => {
            let count = rng.random_range(1..=3);
            let bumps: Vec<([f64; 2], f64, f64)> = (0..count)
                .map(|_| {
                    let c = [uniform(rng, -0.5 * l, 0.5 * l), if n == 2 { uniform(rng, -0.5 * l, 0.5 * l) } else { 0.0 }];
                    (c, uniform(rng, 0.3, 0.4 * l), uniform(rng, -2.0, 2.0))
                })
                .collect();
            GridFunction::from_fn(lattice.clone(), 0.0, |x| {
                bumps
                    .iter()
                    .map(|(c, width, amp)| {
                        let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                        amp * (-r2 / (width * width)).exp()
                    })
                    .sum()
            })
        }
    }
}
