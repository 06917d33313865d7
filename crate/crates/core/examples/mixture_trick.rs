//! A 1% good / 99% bad mixture loses at most ln 100 nats, and its samples
//! are almost all bad.
//!
//!     cargo run --release --example mixture_trick

use geneval::experiment::{mixture_demo, MixtureDemoConfig};
use geneval::rng::Seed;

fn main() -> geneval::Result<()> {
    let cfg = MixtureDemoConfig {
        samples: 10_000,
        ..Default::default()
    };
    let rep = mixture_demo(&cfg, Seed(0))?;
    let worst = rep.patches.iter().map(|s| s.log_p - s.log_mixture).fold(0.0, f64::max);
    println!("ln 100 = {:.4}", 100f64.ln());
    println!("largest log-likelihood loss over {} patches: {worst:.6}", rep.patches.len());
    println!("patches with alpha > {}: {:.1}%", cfg.alpha_threshold, 100.0 * rep.fraction_alpha_above(cfg.alpha_threshold));
    println!("mixture samples drawn from the bad model: {:.2}%", 100.0 * rep.bad_fraction);
    Ok(())
}
