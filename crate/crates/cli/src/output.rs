//! CSV and JSON emission with fixed float formatting, and run manifests.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Decimal rendering with nine significant digits, trailing zeros removed.
/// Magnitudes outside `[1e-5, 1e15)` use exponent notation.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    if !(-5..15).contains(&exp) {
        let mut m = mantissa.trim_end_matches('0').to_owned();
        if m.ends_with('.') {
            m.pop();
        }
        return format!("{sign}{m}e{exp}");
    }
    let mut out = String::from(sign);
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if digits.len() <= int_len {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
            return out;
        }
        out.push_str(&digits[..int_len]);
        out.push('.');
        out.push_str(&digits[int_len..]);
    }
    let trimmed = out.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_owned()
}

/// `x` rounded to nine significant digits, for JSON output.
pub fn round_float(x: f64) -> f64 {
    format_float(x).parse().unwrap_or(x)
}

pub fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl FileDigest {
    pub fn of(path: &Path, bytes: &[u8]) -> Self {
        Self {
            path: path.display().to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        }
    }
}

/// Output directory that remembers every file written, in order.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_owned(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes a CSV with the given header; every row must match its width.
    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.path(name);
        let io_err = |e: csv::Error| -> CliError {
            let source = match e.into_kind() {
                csv::ErrorKind::Io(e) => e,
                other => std::io::Error::other(format!("{other:?}")),
            };
            CliError::io(&path, source)
        };
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record(header).map_err(io_err)?;
        for row in rows {
            w.write_record(row).map_err(io_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    /// Streams into a file through `write`, then records it.
    pub fn stream(&mut self, name: &str, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::with_capacity(1 << 20, file);
        write(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    /// Digests of everything written so far.
    pub fn digests(&self) -> Result<Vec<FileDigest>> {
        self.written
            .iter()
            .map(|p| {
                let bytes = fs::read(p).map_err(|e| CliError::io(p, e))?;
                let name = p.file_name().map(Path::new).unwrap_or(p);
                Ok(FileDigest::of(name, &bytes))
            })
            .collect()
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp: String,
    pub threads: usize,
    pub inputs: Vec<FileDigest>,
    /// SHA-256 of the canonical corpus configuration JSON.
    pub config_sha256: Option<String>,
    pub outputs: Vec<FileDigest>,
    /// Resident-set high-water mark, where the platform reports one.
    pub peak_memory_bytes: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<FileDigest>, config_sha256: Option<String>) -> Self {
        Self {
            tool: "contrafact",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            threads: rayon::current_num_threads(),
            inputs,
            config_sha256,
            outputs: Vec::new(),
            peak_memory_bytes: None,
        }
    }

    /// Fills in output digests and peak memory, then writes `manifest.json`.
    pub fn finish(mut self, out: &mut OutputDir) -> Result<()> {
        self.outputs = out.digests()?;
        self.peak_memory_bytes = peak_memory_bytes();
        let path = out.path("manifest.json");
        let mut text = serde_json::to_string_pretty(&self).expect("serializable");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

/// `VmHWM` from `/proc/self/status`.
pub fn peak_memory_bytes() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
