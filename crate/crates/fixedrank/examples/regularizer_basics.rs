//! Evaluating the rank-aware regularizer and its proximal operator.
//!
//! ```bash
//! cargo run --release -p fixedrank --example regularizer_basics
//! ```

use fixedrank::regularizer::{eval_rr, ksupport_sq, prox_rr, subgrad_representative};
use fixedrank::spectral::{singular_values, Mat, Vec64};

fn main() {
    // R_r vanishes on matrices of rank <= r and grows off that set.
    let x = Mat::from_diagonal(&Vec64::from_vec(vec![3.0, 2.0, 1.0]));
    for r in [1usize, 2] {
        println!(
            "R_{r}(diag(3,2,1)) = {:.6}   ||.||_{{{r}*}}^2 = {:.6}",
            eval_rr(&x, r).unwrap(),
            ksupport_sq(&x, r).unwrap()
        );
    }
    let flat = Mat::from_diagonal(&Vec64::from_vec(vec![1.0, 1.0]));
    println!(
        "R_1(diag(1,1)) = {} (the gauge reduces to the squared nuclear norm: {})",
        eval_rr(&flat, 1).unwrap(),
        ksupport_sq(&flat, 1).unwrap()
    );

    // The prox interpolates between hard truncation (tau = 1) and a
    // gentler spectrum reshaping for tau > 1.
    let m = Mat::from_diagonal(&Vec64::from_vec(vec![3.0, 2.0, 1.0]));
    for tau in [1.0, 1.5, 2.0, 5.0] {
        let p = prox_rr(&m, 1, tau).unwrap();
        println!(
            "prox(tau = {tau}): spectrum = {:?}, objective = {:.6}, s = {:.6}",
            p.spectrum
                .values()
                .iter()
                .map(|v| (v * 1e6).round() / 1e6)
                .collect::<Vec<_>>(),
            p.objective,
            p.s_value
        );
    }

    // A spectral tie at the truncation boundary marks the prox result as
    // one representative of a solution set.
    let tie = Mat::from_diagonal(&Vec64::from_vec(vec![3.0, 2.0, 2.0]));
    let p = prox_rr(&tie, 2, 1.0).unwrap();
    println!("tie at the boundary: degenerate = {}", p.degenerate);

    // Subgradient representatives of G at a low-rank point: the top of
    // the spectrum is pinned, the tail is free in [0, x_r].
    let u = Mat::from_fn(4, 2, |i, j| ((i * 3 + j) as f64).sin());
    let v = Mat::from_fn(4, 2, |i, j| ((i + 2 * j) as f64).cos());
    let low = u * v.transpose();
    let spectrum = singular_values(&low).unwrap();
    let x_r = spectrum[1];
    let z = subgrad_representative(&low, 2, &[x_r, x_r * 0.5]).unwrap();
    println!(
        "subgradient representative spectrum: {:?}",
        singular_values(&z)
            .unwrap()
            .values()
            .iter()
            .map(|v| (v * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );
}
