//! Replays the checked-in fuzz corpus through the same entry points as the
//! fuzz targets, so every seed is exercised by a plain `cargo test`.

use std::path::PathBuf;

use adaptive_guidance::altimeter::TerrainMap;
use adaptive_guidance::envs::EnvConfig;
use adaptive_guidance::harness::{RunConfig, RunFile};
use adaptive_guidance::nets::Checkpoint;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn terrain_grid_seeds() {
    let mut accepted = 0;
    for (_, bytes) in seeds("terrain_grid") {
        if let Ok(map) = TerrainMap::parse_grid(std::str::from_utf8(&bytes).unwrap()) {
            let text = map.to_grid_string();
            assert_eq!(TerrainMap::parse_grid(&text).unwrap(), map);
            let _ = map.mirror();
            accepted += 1;
        }
    }
    assert!(accepted >= 1);
}

#[test]
fn checkpoint_seeds_round_trip() {
    let mut accepted = 0;
    for (path, bytes) in seeds("checkpoint_decode") {
        if let Ok(ckpt) = Checkpoint::decode(&bytes) {
            assert_eq!(ckpt.encode(), bytes, "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted >= 1);
}

#[test]
fn env_config_seeds() {
    let results: Vec<bool> = seeds("env_config")
        .iter()
        .map(|(_, b)| EnvConfig::from_toml_str(std::str::from_utf8(b).unwrap()).is_ok())
        .collect();
    assert!(results.contains(&true) && results.contains(&false));
}

#[test]
fn run_file_seeds() {
    let results: Vec<bool> = seeds("run_file")
        .iter()
        .map(|(_, b)| {
            RunFile::parse(std::str::from_utf8(b).unwrap())
                .and_then(RunConfig::from_file)
                .is_ok()
        })
        .collect();
    assert!(results.contains(&true) && results.contains(&false));
}
