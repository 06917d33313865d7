//! Read CIFAR-10 and MNIST files and check them against pinned checksums.
//!
//!     cargo run --release --example read_datasets -- data/cifar-10-batches-bin data/mnist

use std::path::Path;

use geneval::datasets::{read_cifar10, read_mnist_idx, verify_file, CATALOG};

fn main() -> geneval::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (cifar, mnist) = match args.as_slice() {
        [c, m] => (Path::new(c), Path::new(m)),
        _ => {
            eprintln!("usage: read_datasets <cifar-10-batches-bin> <mnist dir>");
            std::process::exit(2);
        }
    };
    let c = read_cifar10(cifar)?;
    println!("cifar10: {} images, {:?}", c.len(), c.geometry());
    for name in ["train-images-idx3-ubyte", "t10k-images-idx3-ubyte"] {
        let m = read_mnist_idx(mnist.join(name))?;
        println!("{name}: {} images, {:?}", m.len(), m.geometry());
    }
    for e in CATALOG {
        let dir = if e.dataset == "cifar10" { cifar } else { mnist };
        let path = dir.join(e.file);
        if path.exists() {
            println!("{}: checksum {}", e.file, if verify_file(&path)? == Some(true) { "ok" } else { "MISMATCH" });
        }
    }
    Ok(())
}
