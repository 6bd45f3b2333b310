use q64::codes::random_code;
use q64::e8::ShellTable;
use q64::invariants::PatternKernel;
use q64::isotropic::PairType;
use q64::minvec::enumerate_min;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let code = random_code([PairType::I; 8], 7);
    let shells = ShellTable::new(12);
    let set = enumerate_min(&code, &shells).unwrap();
    println!(
        "enumerate_min: {:?} ({} vectors)",
        t0.elapsed(),
        set.vectors.len()
    );

    let t1 = Instant::now();
    let kernel = PatternKernel::new(&set.vectors).unwrap();
    println!(
        "kernel build: {:?} (simd = {})",
        t1.elapsed(),
        kernel.uses_simd()
    );

    let t2 = Instant::now();
    let probes = 20_000;
    let sample = kernel.sampled_patterns(probes, 0).unwrap();
    let dt = t2.elapsed();
    println!(
        "{} probes in {:?} -> full pass estimate {:.1} min",
        probes,
        dt,
        dt.as_secs_f64() * (set.vectors.len() as f64 / probes as f64) / 60.0
    );
    println!("sample head: {:?}", &sample[..3]);
}
