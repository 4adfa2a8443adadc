//! Small report plumbing shared by the CLI and tests: a stable 64-bit hash
//! for config fingerprints and JSON-to-disk helpers.

use serde::Serialize;
use std::path::Path;

/// FNV-1a over the canonical JSON bytes of any serializable value; stable
/// across runs and platforms, used to fingerprint configs and scenarios.
pub fn stable_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable value");
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

/// Pretty-printed JSON dump.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    std::fs::write(path, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Demo {
        a: u32,
        b: &'static str,
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let h1 = stable_hash(&Demo { a: 1, b: "x" });
        let h2 = stable_hash(&Demo { a: 1, b: "x" });
        let h3 = stable_hash(&Demo { a: 2, b: "x" });
        assert_eq!(h1, h2);
        assert_ne!(h1, h3);
        assert_eq!(h1.len(), 16);
    }
}
