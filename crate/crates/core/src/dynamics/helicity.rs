//! Monte Carlo helicity ratio on S³.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{BeltramiError, Result};
use crate::s3_construct::{random_s3, S3Field};

pub const MIN_HELICITY_NODES: usize = 10_000;
const CHUNK: usize = 4096;

/// ∫u·curl u / ∫|u|² from `nodes` uniform points, each chunk of points on its own ChaCha stream so
/// the estimate does not depend on the thread count.
pub fn s3_helicity_ratio(field: &dyn S3Field, nodes: usize, seed: u64) -> Result<f64> {
    if nodes < MIN_HELICITY_NODES {
        return Err(BeltramiError::Aliasing { nodes, required: MIN_HELICITY_NODES });
    }
    if field.curl([0.0, 0.0, 0.0, 1.0]).is_none() {
        return Err(BeltramiError::Precondition("field has no closed-form curl".into()));
    }
    let chunks = nodes.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(nodes - c * CHUNK);
            let (mut num, mut den) = (0.0, 0.0);
            for _ in 0..count {
                let p = random_s3(&mut rng);
                let u = field.eval(p);
                let w = field.curl(p).unwrap_or([f64::NAN; 4]);
                num += (0..4).map(|i| u[i] * w[i]).sum::<f64>();
                den += u.iter().map(|v| v * v).sum::<f64>();
            }
            (num, den)
        })
        .collect();
    let (num, den) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    if !(den > 0.0) {
        return Err(BeltramiError::ZeroField);
    }
    Ok(num / den)
}
