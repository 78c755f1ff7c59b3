//! Project random slow-time codes onto the power and PAR constraint set.

use mrmc::linalg::{c, crandn, CVec};
use mrmc::optimizer::par_project;
use mrmc::signal_model::column_par;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = 8;
    let p_r = 0.01;
    for gamma in [1.0, 1.5, 10f64.powf(0.3), 4.0] {
        let z: CVec = crandn(&mut rng, k, 1).column(0).into_owned() * c(0.1, 0.0);
        let a = par_project(&z, p_r, gamma);
        let mags: Vec<String> = a.iter().map(|v| format!("{:.4}", v.norm())).collect();
        println!(
            "gamma {gamma:.3}: PAR in {:.3} out {:.3}, power {:.3e}, distance {:.3e}, |a| = [{}]",
            column_par(&z),
            column_par(&a),
            a.norm_squared(),
            (&a - &z).norm(),
            mags.join(", ")
        );
    }
}
