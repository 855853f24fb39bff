//! Clause export and decoding.
//!
//! A clause's included positive literals form a hypervector in input space;
//! so do its included negated literals. Decoding compares each against every
//! token of every role codebook, rotated by the role's shift. A token matches
//! when at least `ceil(nbits / 2)` of its bits are covered. Matches from the
//! positive half vote for the clause's pattern ("pro"), matches from the
//! negated half vote against it ("against").

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::codebook::TokenCodebook;
use crate::encoders::Encoder;
use crate::error::{Error, Result};
use crate::hv::Hypervector;
use crate::tm::{ClauseBank, Polarity, TsetlinMachine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Pro,
    Against,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenMatch {
    pub token: String,
    pub role: String,
    pub stance: Stance,
    pub overlap: usize,
    /// `overlap / nbits`, in `[0, 1]`.
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseReport {
    pub class_id: usize,
    pub clause_index: usize,
    pub polarity: Polarity,
    /// Included literals `k < D`, as feature positions.
    pub positive: Vec<usize>,
    /// Included literals `D + k`, as the negated feature position `k`.
    pub negated: Vec<usize>,
    pub matches: Vec<TokenMatch>,
}

impl ClauseReport {
    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negated.is_empty()
    }
}

/// A codebook whose tokens appear in the input rotated by `shift`.
#[derive(Clone, Debug)]
pub struct DecodeRole<'a> {
    pub name: String,
    pub codebook: &'a TokenCodebook,
    pub shift: i64,
}

impl<'a> DecodeRole<'a> {
    pub fn new(name: impl Into<String>, codebook: &'a TokenCodebook, shift: i64) -> Self {
        Self {
            name: name.into(),
            codebook,
            shift,
        }
    }
}

/// The roles an encoder binds tokens under. Raw-feature encoders have none.
pub fn roles_of(encoder: &Encoder) -> Vec<DecodeRole<'_>> {
    match encoder {
        Encoder::Vanilla { .. } | Encoder::BagOfWords(_) => Vec::new(),
        Encoder::Image(e) => {
            let s = e.spec();
            let mut roles = vec![
                DecodeRole::new("row", e.row_codebook(), s.row_shift),
                DecodeRole::new("column", e.col_codebook(), s.col_shift),
            ];
            if s.position_binding {
                let (gr, gc) = e.grid();
                for r in 0..gr {
                    for c in 0..gc {
                        roles.push(DecodeRole::new(
                            format!("patch@{},{}", r * s.stride, c * s.stride),
                            e.patch_codebook(),
                            e.patch_shift(r, c),
                        ));
                    }
                }
            } else {
                roles.push(DecodeRole::new("patch", e.patch_codebook(), 0));
            }
            roles
        }
        Encoder::Text(e) => vec![DecodeRole::new("word", e.vocabulary(), 0)],
        Encoder::Fingerprint(e) => vec![DecodeRole::new("bit", e.codebook(), 0)],
    }
}

fn report_for(bank: &ClauseBank, class_id: usize, j: usize) -> ClauseReport {
    let d = bank.num_features();
    let (positive, negated): (Vec<usize>, Vec<usize>) =
        bank.included_literals(j).into_iter().partition(|&k| k < d);
    ClauseReport {
        class_id,
        clause_index: j,
        polarity: bank.polarity(j),
        positive,
        negated: negated.into_iter().map(|k| k - d).collect(),
        matches: Vec::new(),
    }
}

/// Undecoded reports for every clause of every bank, in bank then clause
/// order.
pub fn export_clauses(banks: &[ClauseBank]) -> Vec<ClauseReport> {
    banks
        .iter()
        .enumerate()
        .flat_map(|(c, bank)| (0..bank.num_clauses()).map(move |j| report_for(bank, c, j)))
        .collect()
}

/// Overlap between `target` and `token` rotated right by `shift`.
fn shifted_overlap(target: &Hypervector, token: &Hypervector, shift: i64) -> usize {
    let d = target.size() as i64;
    token
        .positions()
        .into_iter()
        .filter(|&p| target.get((p as i64 + shift).rem_euclid(d) as usize))
        .count()
}

/// Fills `report.matches`, best first, keeping at most `top_k` when given.
///
/// Ties are broken by role order, then codebook insertion order. With no
/// included literals the match list is empty.
pub fn decode_clause(
    report: &ClauseReport,
    hv_size: usize,
    roles: &[DecodeRole<'_>],
    top_k: Option<usize>,
) -> Result<ClauseReport> {
    let mut out = report.clone();
    out.matches.clear();
    if report.is_empty() || top_k == Some(0) {
        return Ok(out);
    }
    if roles.is_empty() {
        return Err(Error::config("codebooks", "no codebook supplied for decoding"));
    }
    for r in roles {
        if r.codebook.size() != hv_size {
            return Err(Error::DimensionMismatch {
                expected: hv_size,
                found: r.codebook.size(),
            });
        }
    }
    let halves = [
        (Stance::Pro, Hypervector::from_positions(hv_size, &report.positive)?),
        (Stance::Against, Hypervector::from_positions(hv_size, &report.negated)?),
    ];
    for (stance, target) in &halves {
        if target.is_zero() {
            continue;
        }
        for role in roles {
            let nbits = role.codebook.nbits();
            let need = nbits.div_ceil(2);
            for (id, v) in role.codebook.iter() {
                let overlap = shifted_overlap(target, v, role.shift);
                if overlap >= need {
                    out.matches.push(TokenMatch {
                        token: id.to_string(),
                        role: role.name.clone(),
                        stance: *stance,
                        overlap,
                        score: overlap as f64 / nbits as f64,
                    });
                }
            }
        }
    }
    out.matches
        .sort_by(|a, b| b.score.partial_cmp(&a.score).expect("scores are finite"));
    if let Some(k) = top_k {
        out.matches.truncate(k);
    }
    Ok(out)
}

/// Exports and decodes every clause of `machine` against `encoder`'s roles
/// plus any `extra` roles.
pub fn explain_machine(
    machine: &TsetlinMachine,
    encoder: &Encoder,
    extra: &[DecodeRole<'_>],
    top_k: Option<usize>,
) -> Result<Vec<ClauseReport>> {
    let mut roles = roles_of(encoder);
    roles.extend(extra.iter().cloned());
    let d = machine.config().num_features;
    export_clauses(machine.banks())
        .iter()
        .map(|r| {
            if roles.is_empty() {
                Ok(r.clone())
            } else {
                decode_clause(r, d, &roles, top_k)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegatedShare {
    pub included: usize,
    pub negated: usize,
    /// `negated / included`, or 0 when nothing is included.
    pub fraction: f64,
    pub zero_denominator: bool,
}

impl NegatedShare {
    fn new(included: usize, negated: usize) -> Self {
        Self {
            included,
            negated,
            fraction: if included == 0 {
                0.0
            } else {
                negated as f64 / included as f64
            },
            zero_denominator: included == 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegatedLiteralFraction {
    pub per_class: Vec<NegatedShare>,
    pub overall: NegatedShare,
}

/// Share of included literals that are negated, per bank and pooled.
pub fn negated_literal_fraction(banks: &[ClauseBank]) -> NegatedLiteralFraction {
    let per_class: Vec<NegatedShare> = banks
        .iter()
        .map(|b| {
            let d = b.num_features();
            let (mut inc, mut neg) = (0, 0);
            for j in 0..b.num_clauses() {
                let lits = b.included_literals(j);
                inc += lits.len();
                neg += lits.iter().filter(|&&k| k >= d).count();
            }
            NegatedShare::new(inc, neg)
        })
        .collect();
    let inc = per_class.iter().map(|s| s.included).sum();
    let neg = per_class.iter().map(|s| s.negated).sum();
    NegatedLiteralFraction {
        per_class,
        overall: NegatedShare::new(inc, neg),
    }
}

/// One JSON object per line.
pub fn to_jsonl(reports: &[ClauseReport]) -> Result<String> {
    let mut s = String::new();
    for r in reports {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    Ok(s)
}

/// Human-readable rendering, one block per clause.
pub fn render_text(reports: &[ClauseReport], class_names: &[String]) -> String {
    let mut s = String::new();
    for r in reports {
        let class = class_names
            .get(r.class_id)
            .map_or_else(|| r.class_id.to_string(), Clone::clone);
        let sign = match r.polarity {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        };
        let _ = writeln!(s, "class {class} clause {} ({sign})", r.clause_index);
        if r.is_empty() {
            let _ = writeln!(s, "  empty");
        } else {
            let _ = writeln!(
                s,
                "  includes {} positive, {} negated",
                r.positive.len(),
                r.negated.len()
            );
        }
        for m in &r.matches {
            let stance = match m.stance {
                Stance::Pro => "pro",
                Stance::Against => "against",
            };
            let _ = writeln!(
                s,
                "  {stance} {} {} score {:.3} overlap {}",
                m.role, m.token, m.score, m.overlap
            );
        }
        s.push('\n');
    }
    s
}
