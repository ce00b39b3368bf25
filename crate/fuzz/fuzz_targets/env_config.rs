#![no_main]

use adaptive_guidance::envs::EnvConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = EnvConfig::from_toml_str(text);
    }
});
