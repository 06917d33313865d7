//! Fit an isotropic Gaussian to the two-mode target under KLD, MMD and JSD.
//!
//!     cargo run --release --example fit_divergence

use geneval::experiment::{fit_divergence, FitDivergenceConfig};
use geneval::rng::Seed;

fn main() -> geneval::Result<()> {
    let rep = fit_divergence(&FitDivergenceConfig::default(), Seed(0))?;
    println!("kld  mean {:?} sigma {:.4}", rep.kld.mean(), rep.kld.sigma());
    for (name, fit) in [("mmd", &rep.mmd), ("jsd", &rep.jsd)] {
        println!(
            "{name}  mean {:?} sigma {:.4} objective {:.5} after {} iterations",
            fit.model.mean(),
            fit.model.sigma(),
            fit.objective,
            fit.iterations
        );
    }
    Ok(())
}
