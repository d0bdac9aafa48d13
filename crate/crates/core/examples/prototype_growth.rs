//! Watch prototypes appear as a class spreads over several clusters.

use exll::{Exll, ExllConfig, FeatureVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> exll::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let centers = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut model = Exll::new(ExllConfig { record_trace: true, ..Default::default() })?;

    for i in 0..300 {
        let c = centers[(i / 100) % 3];
        let v: Vec<f64> = c.iter().map(|a| a + noise.sample(&mut rng)).collect();
        model.train_sample(&FeatureVector::labeled(format!("s{i}"), 0, v))?;
        if (i + 1) % 50 == 0 {
            println!("after {:3} samples: {} prototypes", i + 1, model.prototype_count());
        }
    }

    let novel = model.trace().iter().filter(|e| e.novel).count();
    println!("novel samples: {novel}");
    let class = model.class(0)?;
    for (j, p) in class.prototypes().iter().enumerate() {
        println!("prototype {j}: support {:3}, radius {:.3}", p.support(), p.radius());
    }
    for (a, b, n) in class.edges().upper_edges() {
        println!("edge {a}-{b}: {n}");
    }
    model.check_invariants()
}
