//! Solve a generalized Sylvester equation and compare against the dense
//! Kronecker system.

use mrmc::linalg::{c, crandn, hermitize, solve, unvec, vec_of, CMat};
use mrmc::optimizer::SylvesterSystem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn psd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let g = crandn(rng, n, n);
    hermitize(&(&g * g.adjoint()))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (p, q) = (4, 2);
    let a = psd(&mut rng, p) + CMat::identity(p, p) * c(0.5, 0.0);
    let terms = vec![(psd(&mut rng, p), psd(&mut rng, q)), (psd(&mut rng, p), psd(&mut rng, q))];
    let rhs = crandn(&mut rng, p, q);
    let sys = SylvesterSystem::new(a, terms, rhs);

    let (x, residual) = sys.solve()?;
    let dense = solve(&sys.kronecker_matrix(), &CMat::from_column_slice(p * q, 1, vec_of(&sys.c).as_slice())).ok_or("singular")?;
    let x_dense = unvec(&dense.column(0).into_owned(), p, q);
    println!("relative residual {residual:.2e}");
    println!("difference to the Kronecker solve {:.2e}", (&x - &x_dense).norm() / x_dense.norm());
    Ok(())
}
