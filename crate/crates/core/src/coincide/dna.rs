//! FASTA input and the Kimura two-parameter distance.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DistanceMatrix;
use crate::error::{Error, Result};

/// An aligned DNA sequence over `A, C, G, T`, with `N` marking masked sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    id: String,
    bases: String,
}

impl SequenceRecord {
    /// Uppercases `bases`; any other symbol is an error unless `mask` is set,
    /// in which case it becomes `N`.
    pub fn new(id: impl Into<String>, bases: &str, mask: bool) -> Result<Self> {
        let id = id.into();
        if bases.is_empty() {
            return Err(Error::InvalidSequence {
                id,
                reason: "empty sequence".into(),
            });
        }
        let mut clean = String::with_capacity(bases.len());
        for (pos, c) in bases.chars().enumerate() {
            match c.to_ascii_uppercase() {
                b @ ('A' | 'C' | 'G' | 'T') => clean.push(b),
                _ if mask => clean.push('N'),
                other => {
                    return Err(Error::InvalidSequence {
                        id,
                        reason: format!("non-ACGT symbol '{other}' at position {}", pos + 1),
                    })
                }
            }
        }
        Ok(SequenceRecord { id, bases: clean })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn bases(&self) -> &str {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    fn codes(&self) -> Vec<u8> {
        self.bases.bytes().map(encode).collect()
    }
}

impl fmt::Display for SequenceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, ">{}", self.id)?;
        for chunk in self.bases.as_bytes().chunks(70) {
            writeln!(f, "{}", String::from_utf8_lossy(chunk))?;
        }
        Ok(())
    }
}

const MASKED: u8 = 4;

// Purines A, G are even; pyrimidines C, T are odd.
fn encode(b: u8) -> u8 {
    match b {
        b'A' => 0,
        b'C' => 1,
        b'G' => 2,
        b'T' => 3,
        _ => MASKED,
    }
}

/// Parses FASTA text. Sequence lines may wrap; blank lines are ignored.
pub fn parse_fasta(text: &str, mask: bool) -> Result<Vec<SequenceRecord>> {
    let mut out = Vec::new();
    let mut current: Option<(String, String)> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            if let Some((id, seq)) = current.take() {
                out.push(SequenceRecord::new(id, &seq, mask)?);
            }
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            current = Some((id, String::new()));
        } else {
            match current.as_mut() {
                Some((_, seq)) => seq.push_str(line),
                None => return Err(Error::Parse(format!("line {}: sequence data before first header", lineno + 1))),
            }
        }
    }
    if let Some((id, seq)) = current {
        out.push(SequenceRecord::new(id, &seq, mask)?);
    }
    if out.is_empty() {
        return Err(Error::Parse("no FASTA records".into()));
    }
    Ok(out)
}

/// Transition and transversion fractions over sites unmasked in both.
pub fn substitution_fractions(a: &SequenceRecord, b: &SequenceRecord) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::InvalidSequence {
            id: b.id.clone(),
            reason: format!("length {} differs from {} ({})", b.len(), a.id, a.len()),
        });
    }
    fractions(&a.codes(), &b.codes()).ok_or_else(|| Error::InvalidSequence {
        id: b.id.clone(),
        reason: format!("no unmasked sites shared with {}", a.id),
    })
}

fn fractions(a: &[u8], b: &[u8]) -> Option<(f64, f64)> {
    let (mut sites, mut ts, mut tv) = (0u32, 0u32, 0u32);
    for (&x, &y) in a.iter().zip(b) {
        if x == MASKED || y == MASKED {
            continue;
        }
        sites += 1;
        if x != y {
            if (x ^ y) & 1 == 0 {
                ts += 1;
            } else {
                tv += 1;
            }
        }
    }
    (sites > 0).then(|| (ts as f64 / sites as f64, tv as f64 / sites as f64))
}

/// `−½ ln((1 − 2P − Q) √(1 − 2Q))` from the transition fraction `P` and the
/// transversion fraction `Q`.
pub fn kimura_from_fractions(p: f64, q: f64) -> Result<f64> {
    let u = 1.0 - 2.0 * p - q;
    let v = 1.0 - 2.0 * q;
    if u <= 0.0 || v <= 0.0 {
        return Err(Error::SaturatedDistance);
    }
    // Avoid -0.0 for identical sequences.
    Ok((-0.5 * (u * v.sqrt()).ln()).max(0.0))
}

pub fn kimura2p(a: &SequenceRecord, b: &SequenceRecord) -> Result<f64> {
    let (p, q) = substitution_fractions(a, b)?;
    kimura_from_fractions(p, q)
}

/// Pairwise Kimura distances, computed in parallel over rows.
pub fn kimura_matrix(records: &[SequenceRecord]) -> Result<DistanceMatrix> {
    let n = records.len();
    if let Some(first) = records.first() {
        if let Some(bad) = records.iter().find(|r| r.len() != first.len()) {
            return Err(Error::InvalidSequence {
                id: bad.id.clone(),
                reason: format!("length {} differs from {} ({})", bad.len(), first.id, first.len()),
            });
        }
    }
    let codes: Vec<Vec<u8>> = records.iter().map(SequenceRecord::codes).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        return Ok(0.0);
                    }
                    let (p, q) = fractions(&codes[i], &codes[j]).ok_or_else(|| Error::InvalidSequence {
                        id: records[j].id.clone(),
                        reason: format!("no unmasked sites shared with {}", records[i].id),
                    })?;
                    kimura_from_fractions(p, q)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    DistanceMatrix::new(rows.concat(), n)
}
