//! Every fixture file, built from code.

use superchannel::choi::ChannelChoi;
use superchannel::extend::QscAction;
use superchannel::instances::{block_trace, block_trace_mixture, diagonal_no_tp, no_tp_qsc, random_superchannel};
use superchannel::matcore::Matrix;
use superchannel::random::{random_unitary, rng};
use superchannel::supermap::Superchannel;
use superchannel::Complex;

use crate::io::to_pretty;

fn perturbed_compression() -> Superchannel {
    let g1: Superchannel = block_trace(2, 0).expect("fixed dimensions");
    let mut c = g1.choi().clone();
    c[(3, 3)] = Complex::new(-0.1, 0.0);
    Superchannel::new(2, 2, 1, 1, c).expect("fixed dimensions")
}

fn cnot() -> Matrix {
    let mut u = Matrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        u[(i, j)] = Complex::new(1.0, 0.0);
    }
    u
}

/// `(relative path, file contents)` for every fixture.
pub fn generate() -> Vec<(String, String)> {
    let mut g = rng(2024);
    let mut out = Vec::new();
    let mut add = |name: &str, text: String| out.push((name.to_string(), text));

    add("channels/identity_2.json", to_pretty(&ChannelChoi::<f64>::identity(2)));
    add("channels/depolarizing_2.json", to_pretty(&ChannelChoi::<f64>::depolarizing(2, 2)));
    add("channels/transpose_2.json", to_pretty(&ChannelChoi::<f64>::transpose(2)));
    add("channels/trace_2.json", to_pretty(&ChannelChoi::<f64>::trace_map(2)));
    add("channels/random_2_3.json", to_pretty(&ChannelChoi::<f64>::random(2, 3, 2, 1).expect("valid rank")));

    let g1: Superchannel = block_trace(2, 0).expect("fixed dimensions");
    let g2: Superchannel = block_trace(2, 1).expect("fixed dimensions");
    add("supermaps/compression_1.json", to_pretty(&g1));
    add("supermaps/compression_2.json", to_pretty(&g2));
    add(
        "supermaps/compression_midpoint.json",
        to_pretty(&block_trace_mixture::<f64>(2, 0.5).expect("fixed dimensions")),
    );
    add("supermaps/compression_1_perturbed.json", to_pretty(&perturbed_compression()));
    add("supermaps/identity_2_2.json", to_pretty(&Superchannel::<f64>::identity(2, 2)));
    let (u1, u2): (Matrix, Matrix) = (random_unitary(2, &mut g), random_unitary(2, &mut g));
    add("supermaps/unitary_2.json", to_pretty(&Superchannel::unitary(&u1, &u2).expect("unitary pair")));
    let random_e2: Superchannel = random_superchannel(2, 2, 2, 2, 2, 5).expect("valid shape");
    add("supermaps/random_e2.json", to_pretty(&random_e2));
    add("supermaps/diagonal_no_tp.json", to_pretty(&diagonal_no_tp::<f64>()));

    add("qsc/compression.json", to_pretty(&QscAction::from_superchannel(&g1).expect("fixed dimensions")));
    add("qsc/no_tp.json", to_pretty(&no_tp_qsc::<f64>()));
    add("qsc/random_e2.json", to_pretty(&QscAction::from_superchannel(&random_e2).expect("valid shape")));

    let (a, b): (Matrix, Matrix) = (random_unitary(2, &mut g), random_unitary(3, &mut g));
    add("unitaries/product_2_3.json", to_pretty(&a.kron(&b)));
    add("unitaries/cnot.json", to_pretty(&cnot()));
    out
}
