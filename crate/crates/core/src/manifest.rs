//! `key = value` text manifests.

use std::fmt::Display;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered key/value record; later keys with the same name replace earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Display) -> &mut Self {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    /// Stores a float with full round-trip precision.
    pub fn set_f64(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, format!("{value:e}"))
    }

    pub fn set_list(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let text: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
        self.set(key, text.join(","))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("manifest key `{key}` missing")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        v.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("`{key}` = `{v}` is not a number")))
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.require(key)?;
        if v.trim().is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("`{key}` has bad entry `{s}`")))
            })
            .collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}")?;
        }
        Ok(())
    }

    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut m = Manifest::new();
        for (no, line) in input.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", no + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", no + 1)));
            }
            m.set(k, v.trim());
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut m = Manifest::new();
        m.set("domain", "disk:1")
            .set_f64("eps", 1.0 / 3.0)
            .set_list("times", &[0.1, 0.25]);
        m.set("domain", "square:1");
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = Manifest::read(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get("domain"), Some("square:1"));
        assert_eq!(back.f64("eps").unwrap(), 1.0 / 3.0);
        assert_eq!(back.list("times").unwrap(), vec![0.1, 0.25]);
    }

    #[test]
    fn comments_and_errors() {
        let m = Manifest::read("# note\n\np = 1.5\n".as_bytes()).unwrap();
        assert_eq!(m.f64("p").unwrap(), 1.5);
        assert!(m.f64("q").is_err());
        assert!(Manifest::read("just text\n".as_bytes()).is_err());
        assert!(Manifest::read(" = 3\n".as_bytes()).is_err());
    }
}
