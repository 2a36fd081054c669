//! Named dichotomous supports used as fixtures and CLI shortcuts.

use crate::error::{Error, Result};
use crate::qlinalg::BipartiteDims;
use crate::search::SupportSet;

/// `(name, description)` of every named support.
pub const SUPPORT_NAMES: &[(&str, &str)] = &[
    ("eq21", "4x4, six cells, PPT with CCNR value 6"),
    ("eq27", "4x6, ten cells, PPT and detected by CCNR"),
    ("eq28", "4x6, ten cells, PPT and detected by CCNR"),
    ("fig3a", "3x3, five cells, violates the phase condition"),
    ("fig3b", "3x3 diagonal, satisfies the phase condition"),
    ("fig3c", "same support as eq21"),
    ("fig3d", "6x6, fifteen cells, 9-displacement homogeneous, not PPT"),
    ("fig3e", "same support as eq27"),
    ("fig3f", "same support as eq28"),
];

fn from_rows(rows: &[&str]) -> SupportSet {
    let d_b = rows[0].len();
    let dims = BipartiteDims::new(rows.len(), d_b).expect("fixture dimensions");
    let points = rows
        .iter()
        .enumerate()
        .flat_map(|(a, r)| r.bytes().enumerate().filter(|(_, c)| *c == b'1').map(move |(b, _)| (a, b)))
        .collect();
    SupportSet::new(dims, points).expect("fixture support")
}

/// Support of a named fixture.
pub fn named_support(name: &str) -> Result<SupportSet> {
    let rows: &[&str] = match name.to_ascii_lowercase().as_str() {
        "eq21" | "fig3c" => &["1000", "0111", "0010", "0010"],
        "eq27" | "fig3e" => &["101000", "111010", "101000", "000101"],
        "eq28" | "fig3f" => &["100010", "111110", "100010", "000001"],
        "fig3a" => &["100", "011", "011"],
        "fig3b" => &["100", "010", "001"],
        "fig3d" => &["011000", "110101", "010010", "000010", "110000", "011101"],
        _ => {
            let known: Vec<&str> = SUPPORT_NAMES.iter().map(|(n, _)| *n).collect();
            return Err(Error::InvalidInput(format!("unknown builtin '{name}', expected one of {}", known.join(", "))));
        }
    };
    Ok(from_rows(rows))
}
