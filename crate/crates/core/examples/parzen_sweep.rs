//! Parzen estimates of a 36-dim Gaussian's test log-likelihood as the number
//! of samples grows.
//!
//!     cargo run --release --example parzen_sweep

use geneval::experiment::{parzen_sweep, ParzenSweepConfig};
use geneval::rng::Seed;

fn main() -> geneval::Result<()> {
    let cfg = ParzenSweepConfig {
        sample_counts: vec![100, 300, 1000, 3000],
        ..Default::default()
    };
    let s = parzen_sweep(&cfg, Seed(0))?;
    println!("true model: {:.3} nats", s.reference);
    for r in &s.rows {
        println!(
            "n = {:5}  h = {:7.3}  {:.3} +- {:.3}  gap {:.3}",
            r.sample_count,
            r.bandwidth,
            r.mean_test_ll,
            r.std_error,
            s.reference - r.mean_test_ll
        );
    }
    Ok(())
}
