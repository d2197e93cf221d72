//! Text instance files.
//!
//! ```text
//! sd3 <n> <k> <w>            | doom3 <n> <k> <w> <z>
//! <n-k rows of H, n trits each>
//! <1 or z syndromes, n-k trits each>
//! [planted <n trits>]
//! [index <i>]                 (DOOM only, 1-based)
//! ```
//!
//! Lines end with LF. Parsing is strict: no extra whitespace, no blank
//! lines, no other characters. The seed is not stored; parsed instances
//! carry seed 0.

use ternisd_core::instances::{DoomInstance, SdInstance};
use ternisd_core::{TritMatrix, TritVector};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("instance is inconsistent: {0}")]
    Invalid(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Sd(SdInstance),
    Doom(DoomInstance),
}

fn trit_line(s: &str, len: usize, line: usize) -> Result<TritVector, FormatError> {
    if s.len() != len {
        return Err(syntax(line, format!("expected {len} trits, found {} characters", s.len())));
    }
    let mut trits = Vec::with_capacity(len);
    for c in s.bytes() {
        match c {
            b'0'..=b'2' => trits.push(c - b'0'),
            _ => return Err(syntax(line, format!("unexpected character {:?}", c as char))),
        }
    }
    TritVector::from_trits(&trits).map_err(|e| syntax(line, e.to_string()))
}

fn count(s: &str, line: usize) -> Result<usize, FormatError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
        return Err(syntax(line, format!("bad count {s:?}")));
    }
    s.parse().map_err(|_| syntax(line, format!("bad count {s:?}")))
}

/// Parses either instance kind.
pub fn parse(text: &str) -> Result<Instance, FormatError> {
    let body = text.strip_suffix('\n').ok_or_else(|| syntax(1, "file must end with a newline"))?;
    let lines: Vec<&str> = body.split('\n').collect();
    let header: Vec<&str> = lines[0].split(' ').collect();
    let (doom, n, k, w, z) = match header.as_slice() {
        ["sd3", n, k, w] => (false, count(n, 1)?, count(k, 1)?, count(w, 1)?, 1),
        ["doom3", n, k, w, z] => (true, count(n, 1)?, count(k, 1)?, count(w, 1)?, count(z, 1)?),
        _ => return Err(syntax(1, "header must be `sd3 n k w` or `doom3 n k w z`")),
    };
    if k == 0 || k >= n || w > n || z == 0 {
        return Err(syntax(1, "need 0 < k < n, w <= n, z >= 1"));
    }
    let r = n - k;
    let mut idx = 1;
    let next = |idx: &mut usize, what: &str| -> Result<(usize, &str), FormatError> {
        let l = *lines.get(*idx).ok_or_else(|| syntax(*idx + 1, format!("missing {what}")))?;
        *idx += 1;
        Ok((*idx, l))
    };
    let mut rows = Vec::with_capacity(r);
    for _ in 0..r {
        let (ln, l) = next(&mut idx, "matrix row")?;
        rows.push(trit_line(l, n, ln)?);
    }
    let mut syndromes = Vec::with_capacity(z);
    for _ in 0..z {
        let (ln, l) = next(&mut idx, "syndrome")?;
        syndromes.push(trit_line(l, r, ln)?);
    }
    let h = TritMatrix::from_rows(rows, n).map_err(|e| FormatError::Invalid(e.to_string()))?;
    let mut planted = None;
    let mut planted_index = None;
    if idx < lines.len() {
        let (ln, l) = next(&mut idx, "planted")?;
        let rest = l.strip_prefix("planted ").ok_or_else(|| syntax(ln, "expected `planted <trits>`"))?;
        planted = Some(trit_line(rest, n, ln)?);
        if doom {
            let (ln, l) = next(&mut idx, "index")?;
            let rest = l.strip_prefix("index ").ok_or_else(|| syntax(ln, "expected `index <i>`"))?;
            let i = count(rest, ln)?;
            if i == 0 || i > z {
                return Err(syntax(ln, "index must lie in 1..=z"));
            }
            planted_index = Some(i - 1);
        }
    }
    if idx < lines.len() {
        return Err(syntax(idx + 1, "trailing content"));
    }
    if doom {
        let inst = DoomInstance { n, k, w, h, syndromes, planted_index, planted, seed: 0 };
        inst.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(Instance::Doom(inst))
    } else {
        let s = syndromes.pop().expect("one syndrome");
        let inst = SdInstance { n, k, w, h, s, planted, seed: 0 };
        inst.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(Instance::Sd(inst))
    }
}

fn push_matrix(out: &mut String, h: &TritMatrix) {
    for row in h.rows() {
        out.push_str(&row.to_string());
        out.push('\n');
    }
}

pub fn serialize_sd(inst: &SdInstance) -> String {
    let mut out = format!("sd3 {} {} {}\n", inst.n, inst.k, inst.w);
    push_matrix(&mut out, &inst.h);
    out.push_str(&inst.s.to_string());
    out.push('\n');
    if let Some(e) = &inst.planted {
        out.push_str(&format!("planted {e}\n"));
    }
    out
}

pub fn serialize_doom(inst: &DoomInstance) -> String {
    let mut out = format!("doom3 {} {} {} {}\n", inst.n, inst.k, inst.w, inst.z());
    push_matrix(&mut out, &inst.h);
    for s in &inst.syndromes {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    if let (Some(e), Some(i)) = (&inst.planted, inst.planted_index) {
        out.push_str(&format!("planted {e}\nindex {}\n", i + 1));
    }
    out
}

pub fn serialize(inst: &Instance) -> String {
    match inst {
        Instance::Sd(i) => serialize_sd(i),
        Instance::Doom(i) => serialize_doom(i),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_stray_characters() {
        let bad = "sd3 4 2 1\n1010\n0101\n1x\n";
        assert!(matches!(parse(bad), Err(FormatError::Syntax { line: 4, .. })));
    }

    #[test]
    fn rejects_missing_newline() {
        assert!(parse("sd3 4 2 1\n1010\n0101\n10").is_err());
    }

    #[test]
    fn round_trip_small() {
        let text = "sd3 4 2 1\n1000\n0100\n10\nplanted 1000\n";
        let inst = parse(text).unwrap();
        assert_eq!(serialize(&inst), text);
    }
}
