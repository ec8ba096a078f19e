//! LMFDB isogeny-class labels: local decoding, bundled fixtures, an on-disk
//! cache and an HTTP fallback.
//!
//! A label `g.q.c1_c2_..._cg` lists a_1..a_g of
//! h = x^{2g} + a_1 x^{2g-1} + ... + a_g x^g + q a_{g-1} x^{g-1} + ... + q^g,
//! each a_i in base 26 with digits a..z and a leading `a` marking a negative.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

pub const DEFAULT_ENDPOINT: &str = "https://www.lmfdb.org/api/av_fq_isog/";
pub const CACHE_VERSION: &str = "v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LmfdbLabel {
    pub g: u32,
    pub q: u64,
    /// a_1..a_g
    pub coeffs: Vec<i64>,
}

fn decode_coeff(s: &str) -> Option<i64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_lowercase()) {
        return None;
    }
    let (neg, digits) = if s.len() > 1 && s.starts_with('a') {
        (true, &s[1..])
    } else {
        (false, s)
    };
    if digits.len() > 1 && digits.starts_with('a') {
        return None;
    }
    let mut n: i64 = 0;
    for b in digits.bytes() {
        n = n.checked_mul(26)?.checked_add((b - b'a') as i64)?;
    }
    if neg && n == 0 {
        return None;
    }
    Some(if neg { -n } else { n })
}

fn encode_coeff(n: i64) -> String {
    let mut m = n.unsigned_abs();
    let mut digits = Vec::new();
    loop {
        digits.push(b'a' + (m % 26) as u8);
        m /= 26;
        if m == 0 {
            break;
        }
    }
    if n < 0 {
        digits.push(b'a');
    }
    digits.reverse();
    String::from_utf8(digits).unwrap()
}

/// The prime p with q = p^k, k ≥ 1.
pub fn prime_of_power(q: u64) -> Option<u64> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
    }
    (r == 1).then_some(p)
}

impl LmfdbLabel {
    pub fn parse(label: &str) -> Result<Self> {
        let bad = || Error::BadLabel(label.to_string());
        let mut parts = label.splitn(3, '.');
        let g: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|&g| g > 0)
            .ok_or_else(bad)?;
        let q_str = parts.next().ok_or_else(bad)?;
        let q: u64 = q_str.parse().map_err(|_| bad())?;
        if q_str.starts_with('0') || prime_of_power(q).is_none() {
            return Err(bad());
        }
        let coeffs = parts
            .next()
            .ok_or_else(bad)?
            .split('_')
            .map(decode_coeff)
            .collect::<Option<Vec<i64>>>()
            .ok_or_else(bad)?;
        if coeffs.len() != g as usize {
            return Err(bad());
        }
        Ok(LmfdbLabel { g, q, coeffs })
    }

    pub fn p(&self) -> u64 {
        prime_of_power(self.q).unwrap()
    }

    /// Coefficients of h, low degree first.
    pub fn weil_polynomial(&self) -> Result<Vec<i64>> {
        let g = self.g as usize;
        let overflow = || Error::BadLabel(format!("{self}: coefficients overflow 64 bits"));
        let mut a = vec![1i64];
        a.extend(&self.coeffs);
        let mut h = vec![0i64; 2 * g + 1];
        for i in 0..=g {
            h[2 * g - i] = a[i];
        }
        let mut qj: i64 = 1;
        for j in 1..=g {
            qj = qj.checked_mul(self.q as i64).ok_or_else(overflow)?;
            h[g - j] = qj.checked_mul(a[g - j]).ok_or_else(overflow)?;
        }
        Ok(h)
    }

    /// p does not divide the middle coefficient a_g.
    pub fn is_ordinary(&self) -> bool {
        self.coeffs[self.g as usize - 1].rem_euclid(self.p() as i64) != 0
    }
}

impl std::fmt::Display for LmfdbLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let code: Vec<String> = self.coeffs.iter().map(|&c| encode_coeff(c)).collect();
        write!(f, "{}.{}.{}", self.g, self.q, code.join("_"))
    }
}

/// (g, q, h) with h low degree first.
pub fn decode_label(label: &str) -> Result<(u32, u64, Vec<i64>)> {
    let l = LmfdbLabel::parse(label)?;
    Ok((l.g, l.q, l.weil_polynomial()?))
}

/// Inverse of `decode_label` on q-symmetric polynomials.
pub fn encode_label(g: u32, q: u64, h: &[i64]) -> Result<String> {
    let g_us = g as usize;
    if h.len() != 2 * g_us + 1 || h[2 * g_us] != 1 || !weil_symmetric(h, q) {
        return Err(Error::InvalidInput(
            "not a monic q-symmetric polynomial of degree 2g".into(),
        ));
    }
    prime_of_power(q).ok_or_else(|| Error::InvalidInput(format!("{q} is not a prime power")))?;
    let coeffs = (1..=g_us).map(|i| h[2 * g_us - i]).collect();
    Ok(LmfdbLabel { g, q, coeffs }.to_string())
}

/// x^{2g} h(q/x) = q^g h(x), i.e. h_{g-j} = q^j h_{g+j}.
pub fn weil_symmetric(h: &[i64], q: u64) -> bool {
    if h.len().is_multiple_of(2) {
        return false;
    }
    let g = h.len() / 2;
    let mut qj: i128 = 1;
    for j in 0..=g {
        if h[g - j] as i128 != qj * h[g + j] as i128 {
            return false;
        }
        qj = match qj.checked_mul(q as i128) {
            Some(x) => x,
            None => return j == g,
        };
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LmfdbRecord {
    pub label: String,
    pub g: u32,
    pub q: u64,
    pub p: u64,
    /// Low degree first.
    pub h: Vec<i64>,
    pub is_ordinary: bool,
}

impl LmfdbRecord {
    pub fn from_label(label: &LmfdbLabel) -> Result<Self> {
        Ok(LmfdbRecord {
            label: label.to_string(),
            g: label.g,
            q: label.q,
            p: label.p(),
            h: label.weil_polynomial()?,
            is_ordinary: label.is_ordinary(),
        })
    }

    /// Consistency with the label and the q-Weil symmetry.
    fn check(&self, label: &LmfdbLabel) -> Result<()> {
        let expect = LmfdbRecord::from_label(label)?;
        if *self != expect || !weil_symmetric(&self.h, self.q) {
            return Err(Error::UpstreamSchemaChange(format!(
                "record for {} does not match its label",
                self.label
            )));
        }
        Ok(())
    }
}

const FIXTURES: [(&str, &str); 9] = [
    (
        "2.101.o_dl",
        include_str!("../fixtures/lmfdb/v1/2.101.o_dl.json"),
    ),
    (
        "2.3.a_ac",
        include_str!("../fixtures/lmfdb/v1/2.3.a_ac.json"),
    ),
    (
        "3.11.al_cm_ajv",
        include_str!("../fixtures/lmfdb/v1/3.11.al_cm_ajv.json"),
    ),
    (
        "3.11.b_e_cv",
        include_str!("../fixtures/lmfdb/v1/3.11.b_e_cv.json"),
    ),
    (
        "3.25.g_cg_ji",
        include_str!("../fixtures/lmfdb/v1/3.25.g_cg_ji.json"),
    ),
    (
        "3.4.ab_d_ah",
        include_str!("../fixtures/lmfdb/v1/3.4.ab_d_ah.json"),
    ),
    (
        "3.5.c_ab_ae",
        include_str!("../fixtures/lmfdb/v1/3.5.c_ab_ae.json"),
    ),
    (
        "4.5.e_f_ax_adi",
        include_str!("../fixtures/lmfdb/v1/4.5.e_f_ax_adi.json"),
    ),
    (
        "6.2.b_e_d_l_l_be",
        include_str!("../fixtures/lmfdb/v1/6.2.b_e_d_l_l_be.json"),
    ),
];

pub fn fixture_labels() -> Vec<&'static str> {
    FIXTURES.iter().map(|(l, _)| *l).collect()
}

pub fn fixture(label: &str) -> Option<LmfdbRecord> {
    FIXTURES
        .iter()
        .find(|(l, _)| *l == label)
        .map(|(_, text)| serde_json::from_str(text).unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Cache,
    Fixture,
    Network,
}

/// `WEILGRAPH_CACHE_DIR`, else `$XDG_CACHE_HOME/weilgraph`, else
/// `$HOME/.cache/weilgraph`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os("WEILGRAPH_CACHE_DIR") {
        return PathBuf::from(d);
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(d).join("weilgraph");
    }
    let home = std::env::var_os("HOME")
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    home.join(".cache").join("weilgraph")
}

/// `WEILGRAPH_LMFDB_ENDPOINT`, else the public API.
pub fn default_endpoint() -> String {
    std::env::var("WEILGRAPH_LMFDB_ENDPOINT").unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string())
}

fn inflight(key: String) -> Arc<Mutex<()>> {
    static MAP: OnceLock<Mutex<HashMap<String, Arc<Mutex<()>>>>> = OnceLock::new();
    MAP.get_or_init(Default::default)
        .lock()
        .unwrap()
        .entry(key)
        .or_default()
        .clone()
}

#[derive(Clone, Debug)]
pub struct LmfdbClient {
    pub cache_dir: PathBuf,
    pub endpoint: String,
    pub offline: bool,
}

impl Default for LmfdbClient {
    fn default() -> Self {
        LmfdbClient {
            cache_dir: default_cache_dir(),
            endpoint: default_endpoint(),
            offline: false,
        }
    }
}

impl LmfdbClient {
    pub fn new(cache_dir: impl Into<PathBuf>, endpoint: impl Into<String>, offline: bool) -> Self {
        LmfdbClient {
            cache_dir: cache_dir.into(),
            endpoint: endpoint.into(),
            offline,
        }
    }

    fn entry_path(&self, label: &str) -> PathBuf {
        self.cache_dir
            .join(CACHE_VERSION)
            .join(format!("{label}.json"))
    }

    fn read_cache(&self, label: &LmfdbLabel) -> Result<Option<LmfdbRecord>> {
        let path = self.entry_path(&label.to_string());
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::Io(format!("{}: {e}", path.display()))),
        };
        let rec: LmfdbRecord = serde_json::from_str(&text)
            .map_err(|e| Error::Io(format!("corrupt cache entry {}: {e}", path.display())))?;
        rec.check(label)?;
        Ok(Some(rec))
    }

    /// Writes to a temporary file and renames it; existing entries are kept.
    fn write_cache(&self, rec: &LmfdbRecord) -> Result<()> {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let path = self.entry_path(&rec.label);
        if path.exists() {
            return Ok(());
        }
        let dir = path.parent().unwrap();
        let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let tmp = dir.join(format!(
            ".{}.{}.{}.tmp",
            rec.label,
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::write(&tmp, serde_json::to_string_pretty(rec).unwrap() + "\n").map_err(io)?;
        std::fs::rename(&tmp, &path).map_err(io)
    }

    fn fetch_remote(&self, label: &LmfdbLabel) -> Result<LmfdbRecord> {
        let name = label.to_string();
        let resp = ureq::get(&self.endpoint)
            .query("label", &name)
            .query("_format", "json")
            .call()
            .map_err(|e| match e {
                ureq::Error::Status(code, _) => {
                    Error::UpstreamSchemaChange(format!("HTTP status {code} for {name}"))
                }
                ureq::Error::Transport(t) => Error::NetworkUnavailable(t.to_string()),
            })?;
        let body = resp
            .into_string()
            .map_err(|e| Error::NetworkUnavailable(e.to_string()))?;
        let expect = LmfdbRecord::from_label(label)?;
        parse_upstream(&body, &expect)
    }

    /// Cache, then bundled fixture, then network (unless offline).
    pub fn fetch(&self, label: &str) -> Result<(LmfdbRecord, Source)> {
        let parsed = LmfdbLabel::parse(label)?;
        let key = format!("{}\u{0}{}", self.cache_dir.display(), parsed);
        let guard = inflight(key);
        let _lock = guard.lock().unwrap();
        if let Some(rec) = self.read_cache(&parsed)? {
            return Ok((rec, Source::Cache));
        }
        if let Some(rec) = fixture(&parsed.to_string()) {
            rec.check(&parsed)?;
            return Ok((rec, Source::Fixture));
        }
        if self.offline {
            return Err(Error::NetworkUnavailable(format!(
                "{parsed} is not cached and offline mode is on"
            )));
        }
        let rec = self.fetch_remote(&parsed)?;
        self.write_cache(&rec)?;
        Ok((rec, Source::Network))
    }

    pub fn cache_path(&self, label: &str) -> Result<PathBuf> {
        Ok(self.entry_path(&LmfdbLabel::parse(label)?.to_string()))
    }
}

/// Reads `{"data": [{"poly": [...], ...}]}`, accepting the polynomial in
/// either coefficient order, and compares it with the label's h.
pub fn parse_upstream(body: &str, expect: &LmfdbRecord) -> Result<LmfdbRecord> {
    let schema = |m: &str| Error::UpstreamSchemaChange(format!("{}: {m}", expect.label));
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|_| schema("response is not JSON"))?;
    let data = v
        .get("data")
        .and_then(|d| d.as_array())
        .ok_or_else(|| schema("missing data array"))?;
    let row = match data.as_slice() {
        [] => {
            return Err(Error::BadLabel(format!(
                "{} is unknown upstream",
                expect.label
            )))
        }
        [row] => row,
        _ => return Err(schema("several records for one label")),
    };
    let poly: Vec<i64> = row
        .get("poly")
        .and_then(|p| p.as_array())
        .and_then(|p| p.iter().map(|c| c.as_i64()).collect())
        .ok_or_else(|| schema("missing integer poly field"))?;
    let mut reversed = poly.clone();
    reversed.reverse();
    if poly != expect.h && reversed != expect.h {
        return Err(schema("poly disagrees with the label"));
    }
    if !weil_symmetric(&expect.h, expect.q) {
        return Err(schema("poly is not q-symmetric"));
    }
    Ok(expect.clone())
}
