//! Transforms a signal on a random sensor graph with per-frequency orders,
//! checks the inverse, then compresses it with the signal-adapted basis.
//!
//! cargo run --example sensor_graph -p mpgfrft

use std::sync::Arc;

use mpgfrft::compression::compress_adapted;
use mpgfrft::graph::{build_random_sensor_graph, shift_operator, ShiftKind};
use mpgfrft::linalg::random_signal;
use mpgfrft::spectral::{gft_basis, FractionalOperator, OrderVector, TransformKind, DISTINCTNESS_TOL};

fn main() -> mpgfrft::Result<()> {
    let n = 24;
    let graph = build_random_sensor_graph(n, 7)?;
    let basis = Arc::new(gft_basis(&shift_operator(&graph, ShiftKind::Laplacian), DISTINCTNESS_TOL)?);
    let x = random_signal(n, 7);
    let a = OrderVector::blocks(n, &[0.7, 0.2, 0.5])?;

    for kind in [TransformKind::MpgfrftI, TransformKind::MpgfrftII] {
        let op = FractionalOperator::new(&basis, kind, &a)?;
        let y = op.apply(&x)?;
        let back = op.inverse_apply(&y)?;
        let err = (&back - &x).camax();
        println!("{:<11} |F x| = {:.4}  inverse error {err:.2e}", kind.as_str(), y.norm());
    }

    let (_, rep) = compress_adapted(&x, 1.0 / n as f64, 7)?;
    println!("adapted basis, one coefficient: RE {:.2e}, CC {:.6}", rep.re, rep.cc_pearson);
    Ok(())
}
