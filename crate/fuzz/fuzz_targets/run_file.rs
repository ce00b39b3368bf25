#![no_main]

use adaptive_guidance::harness::{RunConfig, RunFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = RunFile::parse(text) {
        let _ = RunConfig::from_file(file);
    }
});
