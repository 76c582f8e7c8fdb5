//! Run manifests and numeric formatting for CSV reports.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// 17 significant digits: enough to reproduce any f64 exactly on re-parse.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.16e}", x);
    // normalize "1.2300000000000000e-5" by trimming trailing zeros in the
    // mantissa; re-parse always recovers the same bits
    let (mant, exp) = s.split_once('e').expect("exponent marker");
    let mant = mant.trim_end_matches('0').trim_end_matches('.');
    let exp: i32 = exp.parse().expect("exponent");
    if exp == 0 {
        mant.to_string()
    } else {
        format!("{mant}e{exp}")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn digest_file(path: &Path) -> std::io::Result<FileDigest> {
    let data = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&data);
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", hasher.finalize()),
        bytes: data.len() as u64,
    })
}

/// Provenance record written next to every CLI output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub duration_ms: u64,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            duration_ms: 0,
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, body + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_round_trips_bits() {
        for &x in &[
            0.1,
            2.0 / 3.0,
            1.0 + f64::EPSILON,
            6.675392243908929e-6,
            -3.7712345e300,
            1e-300,
        ] {
            let s = fmt_g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
    }

    #[test]
    fn digest_is_stable() {
        let dir = std::env::temp_dir().join("upwind-sbp-report-test");
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("x.csv");
        std::fs::write(&f, "a,b\n1,2\n").unwrap();
        let d1 = digest_file(&f).unwrap();
        let d2 = digest_file(&f).unwrap();
        assert_eq!(d1.sha256, d2.sha256);
        assert_eq!(d1.bytes, 8);
    }
}
