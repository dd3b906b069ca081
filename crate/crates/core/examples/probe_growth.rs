// Scratch probe for tuning the growth experiment parameters.

use lacuna::experiments::{fit_exponent, growth_experiment, GrowthConfig, SetFamily};

fn main() {
    lacuna::init_thread_pool_from_env();
    let args: Vec<String> = std::env::args().collect();
    let d: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let lam: (u64, u64) = match d {
        1 => (15, 16),
        _ => (7, 8),
    };
    let grid: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(512);
    let probes: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);
    let iters: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(10);
    let op = args.get(5).cloned().unwrap_or_else(|| "max_hilbert".to_string());

    let cfg = GrowthConfig {
        operator: op.clone(),
        sets: SetFamily::Canonical { d, lambda: [lam.0, lam.1] },
        sizes: vec![4, 8, 16, 32, 64],
        grid,
        p: 2.0,
        probes,
        iters,
        seed: 42,
        scale_levels: if op == "max_average" { Some(vec![0, 2, 4, 6]) } else { None },
    };
    let t0 = std::time::Instant::now();
    let rows = growth_experiment(&cfg).unwrap();
    for r in &rows {
        println!("{} n={:3} value={:.6} ({} ms)", r.operator, r.set_size, r.value, r.runtime_ms);
    }
    let pts: Vec<(usize, f64)> = rows.iter().map(|r| (r.set_size, r.value)).collect();
    match fit_exponent(&pts) {
        Ok(fit) => println!(
            "alpha = {:.4}  c = {:.4}  residual = {:.4}  total {:?}",
            fit.alpha,
            fit.log_c.exp(),
            fit.residual,
            t0.elapsed()
        ),
        Err(e) => println!("fit failed: {e}"),
    }
    let spread = rows.iter().map(|r| r.value).fold(0.0f64, f64::max)
        / rows.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    println!("spread max/min = {spread:.4}");
}
