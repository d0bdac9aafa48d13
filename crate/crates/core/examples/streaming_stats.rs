//! Streaming global and class statistics, compared with a batch recomputation.

use exll::{normalize, ClassState, CovarianceInit, GlobalStats};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> exll::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let raw: Vec<Vec<f64>> = (0..500).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let units: Vec<_> = raw.iter().map(|r| normalize(r)).collect::<exll::Result<_>>()?;

    let mut global = GlobalStats::new(4, CovarianceInit::Zero);
    let mut class = ClassState::new(0, &units[0], "s0");
    global.update(&units[0])?;
    for x in &units[1..] {
        global.update(x)?;
        class.update(x)?;
    }

    let n = units.len() as f64;
    let mean = units.iter().fold(DVector::zeros(4), |acc, x| acc + x.as_vector()) / n;
    println!("samples            {}", global.count());
    println!("mean error         {:.2e}", (global.mean() - &mean).amax());
    println!("class mean error   {:.2e}", (class.mean() - &mean).amax());
    // The recurrence centers each sample on the mean known at its own step, so it
    // drifts a little from the batch covariance taken about the final mean.
    let batch = units.iter().fold(DMatrix::zeros(4, 4), |acc, x| {
        let c = x.as_vector() - &mean;
        acc + &c * c.transpose()
    }) / n;
    println!("covariance drift   {:.2e}", (global.covariance() - batch).amax());
    println!("mean squared norm  {:.6} (unit vectors)", global.scalar_product());
    Ok(())
}
