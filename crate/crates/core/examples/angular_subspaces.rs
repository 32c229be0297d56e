//! DFT angular supports and the subspace projector of one RRH-UE link.
//!
//! ```text
//! cargo run --release --example angular_subspaces
//! ```

use std::f64::consts::PI;

use cellfree::channel::{angular_support, dft_submatrix, draw_channel};
use cellfree::rng::SeedTree;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn main() {
    let m = 64;
    for spread in [PI / 16.0, PI / 8.0, PI / 4.0, PI / 2.0] {
        let s = angular_support(0.3, spread, m);
        println!("spread {spread:.3} rad: {} of {m} beams {:?}", s.len(), s.indices());
    }

    let a = angular_support(0.3, PI / 16.0, m);
    let b = angular_support(2.0, PI / 16.0, m);
    println!("supports at 0.3 and 2.0 rad disjoint: {}", a.is_disjoint(&b));

    let fa = dft_submatrix(&a, m);
    let p = fa.projector();
    let idem = (&p * &p - &p).norm();
    let herm = (&p - p.adjoint()).norm();
    let gram = fa.matrix().adjoint() * fa.matrix() - DMatrix::<Complex64>::identity(fa.dim(), fa.dim());
    println!("projector: |P^2 - P| = {idem:.2e}, |P - P^H| = {herm:.2e}, |F^H F - I| = {:.2e}", gram.norm());

    let beta = 1e-9;
    let draws = 2000;
    let mut rng = SeedTree::new(7).rng();
    let mut energy = 0.0;
    let mut leak = 0.0;
    let pb = dft_submatrix(&b, m).projector();
    for _ in 0..draws {
        let h = draw_channel(beta, &fa, &mut rng);
        energy += h.norm_squared();
        leak += (&pb * &h).norm_squared();
    }
    println!("E|h|^2 / (beta M) = {:.3}", energy / draws as f64 / (beta * m as f64));
    println!("energy leaking into the disjoint subspace: {:.2e}", leak / energy);
}
