#![no_main]
use hesslab::numeric::c;
use hesslab::poly::Poly;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|src: &str| {
    if let Ok(p) = Poly::parse(src) {
        let n = p.num_vars();
        let x: Vec<_> = (0..n).map(|k| c(0.5 + k as f64, -0.25)).collect();
        let _ = p.eval(&x);
        let _ = p.gradient(n);
        let _ = Poly::parse(&p.to_string());
    }
});
