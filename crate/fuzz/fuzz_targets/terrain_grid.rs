#![no_main]

use adaptive_guidance::altimeter::TerrainMap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(map) = TerrainMap::parse_grid(text) {
        let text = map.to_grid_string();
        let again = TerrainMap::parse_grid(&text).expect("serialized grid parses");
        assert_eq!(again.to_grid_string(), text);
        let _ = map.mirror();
    }
});
