#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(f) = hesslab::spec_io::parse_spec_json(src) {
        if let Ok(spec) = f.build() {
            let _ = f.initial_state(&spec);
        }
    }
});
