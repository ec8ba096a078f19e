//! `key = value` configuration files; keys are long flag names, `#` starts
//! a comment. Values from the command line take precedence.

use std::collections::BTreeMap;
use std::path::Path;

pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn empty() -> Self {
        ConfigFile {
            values: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            let v = v.trim();
            let v = v
                .strip_prefix('"')
                .and_then(|s| s.strip_suffix('"'))
                .unwrap_or(v);
            values.insert(k.trim().replace('_', "-"), v.to_string());
        }
        Ok(ConfigFile { values })
    }

    /// Fills `slot` from the file when the flag was not given.
    pub fn fill<T: std::str::FromStr>(
        &self,
        key: &str,
        slot: &mut Option<T>,
    ) -> Result<(), String> {
        if slot.is_none() {
            if let Some(v) = self.values.get(key) {
                *slot = Some(
                    v.parse()
                        .map_err(|_| format!("config key {key}: cannot parse {v:?}"))?,
                );
            }
        }
        Ok(())
    }

    pub fn flag(&self, key: &str, slot: &mut bool) -> Result<(), String> {
        if !*slot {
            if let Some(v) = self.values.get(key) {
                *slot = v
                    .parse()
                    .map_err(|_| format!("config key {key}: expected true or false"))?;
            }
        }
        Ok(())
    }
}
