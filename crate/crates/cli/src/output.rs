use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with twelve significant digits, in plain notation for
/// moderate magnitudes and scientific notation otherwise.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exponent) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // Rounding may carry into a new leading digit, e.g. 9.99.. -> 10.0..
        if s.trim_start_matches('-')
            .replace('.', "")
            .trim_start_matches('0')
            .len()
            > SIGNIFICANT_DIGITS
        {
            format!("{x:.prec$}", prec = decimals.saturating_sub(1))
        } else {
            s
        }
    } else {
        format!("{x:.prec$e}", prec = SIGNIFICANT_DIGITS - 1)
    }
}

/// Rate display unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Units {
    pub bits: bool,
}

impl Units {
    pub fn rate(self, nats: f64) -> f64 {
        if self.bits {
            nats / std::f64::consts::LN_2
        } else {
            nats
        }
    }

    pub fn name(self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }
}

pub struct Csv {
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_string(self) -> Result<String> {
        let bytes = self.writer.into_inner().context("flushing CSV")?;
        Ok(String::from_utf8(bytes)?)
    }
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(0.372330123456789), "0.372330123457");
        assert_eq!(fmt_float(1.0), "1.00000000000");
        assert_eq!(fmt_float(-12.5), "-12.5000000000");
        assert_eq!(fmt_float(9.9999999999999), "10.0000000000");
        assert_eq!(fmt_float(1.5e-9), "1.50000000000e-9");
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_uses_line_feeds() {
        let mut c = Csv::new(&["a", "b"]).unwrap();
        c.row(["1", "x,y"]).unwrap();
        assert_eq!(c.into_string().unwrap(), "a,b\n1,\"x,y\"\n");
    }
}
