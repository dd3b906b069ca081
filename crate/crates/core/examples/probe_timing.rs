// Scratch timing probe for the maximal-operator hot path.

use lacuna::directions::canonical_lacunary;
use lacuna::dyadic::RatioQ;
use lacuna::field::{dft_forward, dft_inverse, random_bandlimited};
use lacuna::operators::max_hilbert;
use std::time::Instant;

fn main() {
    lacuna::init_thread_pool_from_env();
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let m: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(64);
    let set = canonical_lacunary(1, RatioQ::new(15, 16), &[m]).unwrap();
    let mut rng = lacuna::rng::seeded_rng(1);
    let f = random_bandlimited::<f64>(n, &mut rng, |a, b| a < 0 && b > 0).unwrap();

    let t = Instant::now();
    let spec = dft_forward(&f);
    println!("forward dft: {:?}", t.elapsed());

    let t = Instant::now();
    let back = dft_inverse(&spec);
    println!("inverse dft: {:?}", t.elapsed());
    assert!(back.max_abs() > 0.0);

    let t = Instant::now();
    let masked = spec.multiplied(|x1, x2| {
        if set.dirs()[0].dot_ge(x1, x2, 0.0) {
            lacuna::Complex::new(1.0, 0.0)
        } else {
            lacuna::Complex::new(0.0, 0.0)
        }
    });
    println!("one mask: {:?}", t.elapsed());
    assert!(masked.energy() > 0.0);

    let t = Instant::now();
    let r = max_hilbert(&f, &set, false).unwrap();
    println!("max_hilbert over {} dirs: {:?}", m, t.elapsed());
    assert!(r.value.max() > 0.0);
}
