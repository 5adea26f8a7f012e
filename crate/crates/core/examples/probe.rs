//! Manual probe for the minimizer: `probe <y> <N> [restarts] [max_iters]`
//! estimates lambda_min at (0, y) and prints a sampled descent history.

use spintorus::lattice::ModuliPoint;
use spintorus::minimize::{estimate_lambda_min, MinimizeConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let y: f64 = args[1].parse().unwrap();
    let n: usize = args[2].parse().unwrap();
    let restarts: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(2);
    let iters: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(5000);
    let cfg = MinimizeConfig {
        window: n,
        restarts,
        max_iters: iters,
        seed: 1,
        ..MinimizeConfig::default()
    };
    let t = std::time::Instant::now();
    let r = estimate_lambda_min(ModuliPoint::new(0.0, y), &cfg).unwrap();
    println!(
        "lambda_hat={} iters={} converged={} elapsed={:?}",
        r.lambda_hat,
        r.iterations,
        r.converged,
        t.elapsed()
    );
    let h = &r.history;
    let step = (h.len() / 20).max(1);
    for (i, v) in h.iter().enumerate() {
        if i % step == 0 || i + 1 == h.len() {
            println!("  it {i}: J = {v}");
        }
    }
}
