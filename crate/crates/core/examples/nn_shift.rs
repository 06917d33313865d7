//! Nearest-neighbor precision of shifted image windows.
//!
//!     cargo run --release --example nn_shift [cifar-10-batches-bin]
//!
//! Without an argument synthetic images are used. The full CIFAR-10 run
//! takes a couple of minutes.

use geneval::datasets::read_cifar10;
use geneval::experiment::{nn_shift, NnShiftConfig};
use geneval::images::{ImageGeometry, QuantizedImageSet};
use geneval::rng::Seed;

fn main() -> geneval::Result<()> {
    let images = match std::env::args().nth(1) {
        Some(dir) => read_cifar10(dir)?,
        None => QuantizedImageSet::synthetic(2000, ImageGeometry::new(32, 32, 3)?, Seed(3))?,
    };
    let cfg = NnShiftConfig {
        n_queries: 200,
        ..Default::default()
    };
    for p in nn_shift(&images, &cfg, Seed(0))? {
        println!(
            "shift {}  precision {:5.1}%  90% CI [{:.1}, {:.1}]",
            p.shift,
            100.0 * p.precision,
            100.0 * p.ci_low,
            100.0 * p.ci_high
        );
    }
    Ok(())
}
