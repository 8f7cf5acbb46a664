//! Code-system files.
//!
//! The native format is a small TOML record:
//!
//! ```text
//! name = "lindstrom"
//! d = 2
//! codes = [
//!   [1, 2, 3],
//!   [0, 3],
//! ]
//! ```
//!
//! The same record as a JSON object is accepted too. Codewords are decimal,
//! bit `k` being coordinate `k + 1`.

use serde::{Deserialize, Serialize};

use crate::code::CodeSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    d: u32,
    codes: Vec<Vec<u64>>,
}

/// A parsed file: the system plus its optional name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeFile {
    pub name: Option<String>,
    pub system: CodeSystem,
}

pub fn parse_code_record(text: &str) -> Result<CodeFile> {
    let record: Record = if text.trim_start().starts_with('{') {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e)))?
    } else {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))?
    };
    let system = CodeSystem::new(record.d, record.codes)?;
    Ok(CodeFile {
        name: record.name,
        system,
    })
}

/// Parses and validates a code file, dropping the name.
pub fn parse_code_file(text: &str) -> Result<CodeSystem> {
    parse_code_record(text).map(|f| f.system)
}

/// Writes the TOML form, one constituent code per line.
pub fn serialize_code_file(sys: &CodeSystem, name: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(n) = name {
        out.push_str(&format!(
            "name = {}\n",
            serde_json::to_string(n).expect("string serializes")
        ));
    }
    out.push_str(&format!("d = {}\ncodes = [\n", sys.dim()));
    for code in sys.codes() {
        let words: Vec<String> = code.iter().map(u64::to_string).collect();
        out.push_str(&format!("  [{}],\n", words.join(", ")));
    }
    out.push_str("]\n");
    out
}

pub fn to_json(sys: &CodeSystem, name: Option<&str>) -> String {
    serde_json::to_string(&Record {
        name: name.map(str::to_string),
        d: sys.dim(),
        codes: sys.codes().to_vec(),
    })
    .expect("record serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use proptest::prelude::*;

    #[test]
    fn lindstrom_file() {
        let f = parse_code_record("name = \"pair\"\nd = 2\ncodes = [[1, 2, 3], [0, 3]]\n").unwrap();
        assert_eq!(f.name.as_deref(), Some("pair"));
        assert_eq!(f.system, catalog::catalog_get("lindstrom").unwrap().system);
    }

    #[test]
    fn json_is_accepted() {
        let s = parse_code_file(r#"{"d": 2, "codes": [[1, 2, 3], [0, 3]]}"#).unwrap();
        assert_eq!(s.sizes(), vec![3, 2]);
    }

    #[test]
    fn errors_are_positional() {
        let e = parse_code_file("d = 2\ncodes = [[4]]\n").unwrap_err();
        assert_eq!(e.to_string(), "codes[0][0]: value 4 does not fit in dimension 2");
        let e = parse_code_file("d = 2\ncodes = [[0], [3, 3]]\n").unwrap_err();
        assert!(matches!(
            e,
            Error::Duplicate {
                code: 1,
                position: 1,
                value: 3
            }
        ));
        let e = parse_code_file("d = 2\ncodes = [[0], [3,\n").unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.contains("line")), "{e:?}");
        let e = parse_code_file("d = 2\ncode = [[0]]\n").unwrap_err();
        assert!(matches!(e, Error::Parse(_)));
    }

    #[test]
    fn catalog_round_trips() {
        for entry in catalog::all() {
            let text = serialize_code_file(&entry.system, Some(entry.name));
            let back = parse_code_record(&text).unwrap();
            assert_eq!(back.system, entry.system);
            assert_eq!(back.name.as_deref(), Some(entry.name));
            assert_eq!(parse_code_file(&to_json(&entry.system, None)).unwrap(), entry.system);
        }
    }

    proptest! {
        #[test]
        fn random_systems_round_trip(d in 1u32..=64, raw in prop::collection::vec(prop::collection::btree_set(any::<u64>(), 1..6), 1..5)) {
            let mask = crate::code::full_mask(d);
            let codes: Vec<Vec<u64>> = raw
                .into_iter()
                .map(|s| s.into_iter().map(|w| w & mask).collect::<std::collections::BTreeSet<_>>().into_iter().collect())
                .collect();
            let sys = CodeSystem::new(d, codes).unwrap();
            prop_assert_eq!(parse_code_file(&serialize_code_file(&sys, None)).unwrap(), sys);
        }
    }
}
