#![no_main]

use adaptive_guidance::nets::Checkpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ckpt) = Checkpoint::decode(data) {
        assert_eq!(ckpt.encode(), data, "accepted checkpoints re-encode to the same bytes");
    }
});
