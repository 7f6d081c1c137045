#![no_main]
use libfuzzer_sys::fuzz_target;

// first byte picks n, the rest is the state object
fuzz_target!(|data: &[u8]| {
    let Some((&k, rest)) = data.split_first() else { return };
    let Ok(v) = serde_json::from_slice::<serde_json::Value>(rest) else { return };
    let _ = hesslab::spec_io::decode_state(3 + (k % 6) as usize, &v);
});
