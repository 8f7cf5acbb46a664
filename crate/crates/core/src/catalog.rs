//! Built-in code systems with their recorded best construction parameters.

use crate::code::CodeSystem;
use crate::error::{Error, Result};
use crate::glue::GlueParams;

/// Best known glued construction for an entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub params: GlueParams,
    /// Rate truncated to nine decimals.
    pub rate: &'static str,
    /// Seed rate truncated to four decimals.
    pub seed_rate: &'static str,
    /// Improved rate truncated to four decimals.
    pub improved_rate: &'static str,
    /// Entropy bound rounded up to four decimals.
    pub upper: &'static str,
    /// Dimension of the improved code.
    pub improved_dim: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub system: CodeSystem,
    pub expected: Option<Expected>,
}

/// `(n, g, rate, seed_rate, improved_rate, upper, improved_dim)`
type RawExpected = (
    u64,
    &'static [u64],
    &'static str,
    &'static str,
    &'static str,
    &'static str,
    u64,
);

struct Raw {
    name: &'static str,
    d: u32,
    codes: &'static [&'static [u64]],
    expected: Option<RawExpected>,
}

const RAW: &[Raw] = &[
    Raw {
        name: "lindstrom",
        d: 2,
        codes: &[&[1, 2, 3], &[0, 3]],
        expected: None,
    },
    Raw {
        name: "T2-MO",
        d: 6,
        codes: &[
            &[3, 4, 7, 10, 14, 17, 21, 27, 32, 36, 42, 49, 56, 59, 60],
            &[8, 9, 16, 18, 24, 29, 30, 31, 32, 33, 34, 39, 45, 47, 54, 55],
        ],
        expected: Some((142, &[24], "1.318446971", "1.3178", "1.3184", "1.5000", 852)),
    },
    Raw {
        name: "T3",
        d: 6,
        codes: &[
            &[3, 4, 7, 24, 27, 28, 32, 35, 36, 56],
            &[0, 2, 12, 14, 16, 18, 30, 33, 45, 47, 49, 51, 56, 61, 63],
            &[9, 21, 42, 54],
        ],
        expected: Some((72, &[21, 11], "1.539572454", "1.5381", "1.5395", "1.8113", 432)),
    },
    Raw {
        name: "T4-KO",
        d: 4,
        codes: &[&[0, 7, 8, 14], &[4, 5, 10, 11], &[2, 6, 9, 13], &[3, 12]],
        expected: Some((245, &[20, 20, 0], "1.750590009", "1.7500", "1.7505", "2.0307", 980)),
    },
    Raw {
        name: "T5",
        d: 4,
        codes: &[&[0, 4, 11], &[0, 3, 5, 6, 9, 10, 12, 15], &[1, 14], &[2, 13], &[7, 8]],
        expected: Some((224, &[30, 30, 30, 30], "1.897008675", "1.8962", "1.8970", "2.1982", 896)),
    },
    Raw {
        name: "T6-KM",
        d: 4,
        codes: &[&[0, 2, 8, 10], &[1, 2, 13, 14], &[0, 15], &[5, 10], &[3, 12], &[6, 9]],
        expected: Some((26, &[8, 12, 0, 0, 0], "2.005264438", "2.0000", "2.0052", "2.3334", 104)),
    },
    Raw {
        name: "T7-KM",
        d: 8,
        codes: &[
            &[0, 2, 8, 10, 32, 34, 40, 42, 128, 130, 136, 138, 160, 162, 168, 170],
            &[17, 18, 29, 30, 33, 34, 45, 46, 209, 210, 221, 222, 225, 226, 237, 238],
            &[0, 240, 255],
            &[15, 240],
            &[85, 90, 165, 170],
            &[51, 60, 195, 204],
            &[102, 105, 150, 153],
        ],
        expected: Some((
            16,
            &[10, 16, 0, 0, 0, 0],
            "2.077479836",
            "2.0731",
            "2.0774",
            "2.4467",
            128,
        )),
    },
    Raw {
        name: "T8-KM",
        d: 6,
        codes: &[
            &[0, 8, 16, 24, 32, 40, 48, 56],
            &[2, 16, 38, 52],
            &[0, 63],
            &[9, 54],
            &[18, 27, 36, 45],
            &[21, 28, 35, 42],
            &[7, 56],
            &[14, 49],
        ],
        expected: Some((
            69,
            &[17, 39, 17, 17, 0, 0, 0],
            "2.168328140",
            "2.1666",
            "2.1683",
            "2.5442",
            414,
        )),
    },
];

fn build(raw: &Raw) -> CatalogEntry {
    let codes = raw.codes.iter().map(|c| c.to_vec()).collect();
    CatalogEntry {
        name: raw.name,
        system: CodeSystem::new(raw.d, codes).expect("catalog codes are valid"),
        expected: raw
            .expected
            .map(|(n, g, rate, seed_rate, improved_rate, upper, improved_dim)| Expected {
                params: GlueParams::new(n, g.to_vec()),
                rate,
                seed_rate,
                improved_rate,
                upper,
                improved_dim,
            }),
    }
}

pub fn names() -> Vec<&'static str> {
    RAW.iter().map(|r| r.name).collect()
}

/// Every entry, in listing order.
pub fn all() -> Vec<CatalogEntry> {
    RAW.iter().map(build).collect()
}

/// Looks up an entry by name (case-insensitive).
pub fn catalog_get(name: &str) -> Result<CatalogEntry> {
    RAW.iter()
        .find(|r| r.name.eq_ignore_ascii_case(name))
        .map(build)
        .ok_or_else(|| Error::UnknownCatalog {
            name: name.to_string(),
            valid: names().join(", "),
        })
}
