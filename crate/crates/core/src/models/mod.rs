//! Test objectives and classifiers.

mod data;
mod init;
mod network;
mod quadratic;
mod rosenbrock;

pub use data::DatasetBatch;
pub use init::init_params;
pub use network::{Backend, Layer, NetObjective, Network, ParamBlock, Precision};
pub use quadratic::Quadratic;
pub use rosenbrock::{rosenbrock, Rosenbrock};

use crate::{Error, Result};

/// Pixels per MNIST image.
pub const MNIST_FEATURES: usize = 784;
pub const MNIST_CLASSES: usize = 10;

/// Multinomial logistic regression, 784 → 10 (7850 parameters).
pub fn logistic_regression() -> Network {
    Network::new(MNIST_FEATURES, vec![Layer::Dense { inputs: MNIST_FEATURES, outputs: MNIST_CLASSES }])
        .expect("static architecture")
}

/// Fully connected network with ReLU between layers; `sizes` includes the
/// input and output widths.
pub fn mlp(sizes: &[usize]) -> Result<Network> {
    if sizes.len() < 2 {
        return Err(Error::Config("mlp needs at least input and output sizes".into()));
    }
    let mut layers = Vec::new();
    for (i, w) in sizes.windows(2).enumerate() {
        if i > 0 {
            layers.push(Layer::Relu);
        }
        layers.push(Layer::Dense { inputs: w[0], outputs: w[1] });
    }
    Network::new(sizes[0], layers)
}

/// Two conv/ReLU/pool stages and a two-layer head on 28×28 grayscale input.
pub fn cnn_small() -> Network {
    Network::new(
        MNIST_FEATURES,
        vec![
            Layer::Conv2d { in_channels: 1, out_channels: 8, kernel: 3, height: 28, width: 28 },
            Layer::Relu,
            Layer::MaxPool2 { channels: 8, height: 28, width: 28 },
            Layer::Conv2d { in_channels: 8, out_channels: 16, kernel: 3, height: 14, width: 14 },
            Layer::Relu,
            Layer::MaxPool2 { channels: 16, height: 14, width: 14 },
            Layer::Dense { inputs: 784, outputs: 64 },
            Layer::Relu,
            Layer::Dense { inputs: 64, outputs: MNIST_CLASSES },
        ],
    )
    .expect("static architecture")
}
