//! Parzen scores of k-means centroids vs real samples.
//!
//!     cargo run --release --example kmeans_exploit [train-images-idx3-ubyte t10k-images-idx3-ubyte]
//!
//! Without arguments a small synthetic image set stands in for MNIST.

use geneval::datasets::read_mnist_idx;
use geneval::experiment::{kmeans_exploit, ParzenBenchmarkConfig};
use geneval::images::{ImageGeometry, QuantizedImageSet};
use geneval::rng::Seed;

fn main() -> geneval::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (train, test, cfg) = if let [train, test] = args.as_slice() {
        (read_mnist_idx(train)?, read_mnist_idx(test)?, ParzenBenchmarkConfig::default())
    } else {
        let g = ImageGeometry::new(12, 12, 1)?;
        let cfg = ParzenBenchmarkConfig {
            train_size: 2000,
            validation_size: 200,
            true_samples: 200,
            test_size: 200,
            k: 200,
            generated_samples: 200,
            ..Default::default()
        };
        (QuantizedImageSet::synthetic(2400, g, Seed(1))?, QuantizedImageSet::synthetic(200, g, Seed(2))?, cfg)
    };
    let rep = kmeans_exploit(&train, &test, &cfg, Seed(0))?;
    println!("k-means inertia {:.2} after {} iterations", rep.kmeans_inertia, rep.kmeans_iterations);
    for r in &rep.rows {
        println!("{:14} h = {:.4}  {:9.3} +- {:.3} nats", r.name, r.bandwidth, r.mean_nats, r.std_error);
    }
    Ok(())
}
