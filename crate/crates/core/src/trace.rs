//! Text access traces: one `<domain_id> <R|W> <hex_address>` per line.
//! `#` starts a comment; blank lines are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::{Cache, CacheError, DomainStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Access { line: usize, source: CacheError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AccessKind {
    #[serde(rename = "R")]
    Read,
    #[serde(rename = "W")]
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// 1-based source line.
    pub line: usize,
    pub domain: u32,
    pub kind: AccessKind,
    pub addr: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl FromStr for Trace {
    type Err = TraceError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut records = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| TraceError::Parse { line, message };
            let fields: Vec<&str> = body.split_whitespace().collect();
            let [domain, kind, addr] = fields[..] else {
                return Err(err(format!("expected `<domain> <R|W> <hex address>`, got `{body}`")));
            };
            let domain = domain
                .parse::<u32>()
                .map_err(|e| err(format!("bad domain id `{domain}`: {e}")))?;
            let kind = match kind {
                "R" | "r" => AccessKind::Read,
                "W" | "w" => AccessKind::Write,
                other => return Err(err(format!("access kind must be R or W, got `{other}`"))),
            };
            let digits = addr.strip_prefix("0x").or_else(|| addr.strip_prefix("0X")).unwrap_or(addr);
            let addr = u64::from_str_radix(digits, 16)
                .map_err(|e| err(format!("bad hex address `{addr}`: {e}")))?;
            records.push(TraceRecord { line, domain, kind, addr });
        }
        Ok(Trace { records })
    }
}

impl Trace {
    pub fn push(&mut self, domain: u32, kind: AccessKind, addr: u64) {
        let line = self.records.len() + 1;
        self.records.push(TraceRecord { line, domain, kind, addr });
    }

    /// Renders the trace in the text format; parsing the result gives back
    /// the same accesses.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let k = match r.kind {
                AccessKind::Read => 'R',
                AccessKind::Write => 'W',
            };
            let _ = writeln!(out, "{} {} {:#x}", r.domain, k, r.addr);
        }
        out
    }

    /// Replays every record through `cache`. Reads and writes are placed the
    /// same way.
    pub fn replay(&self, cache: &mut Cache) -> Result<BTreeMap<u32, DomainStats>, TraceError> {
        for r in &self.records {
            cache
                .access(r.domain, r.addr)
                .map_err(|source| TraceError::Access { line: r.line, source })?;
        }
        Ok(cache.stats().clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::CacheConfig;
    use crate::field::FieldSpec;
    use crate::skew::SkewParams;

    #[test]
    fn parses_comments_and_blanks() {
        let t: Trace = "# header\n\n0 R 0x40\n1 W 1c0  # trailing\n".parse().unwrap();
        assert_eq!(t.records.len(), 2);
        assert_eq!(t.records[0], TraceRecord { line: 3, domain: 0, kind: AccessKind::Read, addr: 0x40 });
        assert_eq!(t.records[1].addr, 0x1c0);
        assert_eq!(t.records[1].line, 4);
    }

    #[test]
    fn reports_bad_lines() {
        let e = "0 R 0x40\n0 X 0x40\n".parse::<Trace>().unwrap_err();
        assert!(matches!(e, TraceError::Parse { line: 2, .. }));
        assert!(matches!("1 R zz".parse::<Trace>(), Err(TraceError::Parse { line: 1, .. })));
        assert!(matches!("-1 R 0".parse::<Trace>(), Err(TraceError::Parse { line: 1, .. })));
        assert!(matches!("0 R".parse::<Trace>(), Err(TraceError::Parse { line: 1, .. })));
    }

    #[test]
    fn replay_counts() {
        let sp = SkewParams::standard(FieldSpec::binary(2).unwrap());
        let mut cache = Cache::new(CacheConfig::galois(sp)).unwrap();
        assert!(Trace::default().replay(&mut cache).unwrap().is_empty());

        let t: Trace = "2 R 0x1000\n2 W 0x1000\n".parse().unwrap();
        let stats = t.replay(&mut cache).unwrap();
        assert_eq!(stats[&2], DomainStats { hits: 1, misses: 1, ..Default::default() });

        let bad: Trace = "\n9 R 0x0\n".parse().unwrap();
        assert!(matches!(bad.replay(&mut cache), Err(TraceError::Access { line: 2, .. })));
    }

    #[test]
    fn text_round_trip() {
        let mut t = Trace::default();
        t.push(3, AccessKind::Write, 0xdead_beef);
        t.push(0, AccessKind::Read, 0);
        let back: Trace = t.to_text().parse().unwrap();
        assert_eq!(back, t);
    }
}
