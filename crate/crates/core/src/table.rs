//! Summary table for the catalog entries that carry recorded parameters.

use crate::bounds::upper_bound;
use crate::catalog::{self, CatalogEntry};
use crate::code::sum_rate_seed;
use crate::decimal::{round_up, truncate};
use crate::error::Result;
use crate::glue::improved_sizes;

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub name: &'static str,
    pub users: usize,
    pub d_old: u32,
    pub r_old: String,
    pub d_new: u64,
    pub r_new: String,
    pub r_upper: String,
    /// Nine-decimal rate at the recorded parameters.
    pub rate: String,
}

/// A recomputed field that disagrees with the recorded value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub name: &'static str,
    pub field: &'static str,
    pub computed: String,
    pub recorded: String,
}

fn row(entry: &CatalogEntry) -> Result<Option<TableRow>> {
    let Some(exp) = &entry.expected else {
        return Ok(None);
    };
    let sys = &entry.system;
    let res = improved_sizes(sys, &exp.params)?;
    Ok(Some(TableRow {
        name: entry.name,
        users: sys.users(),
        d_old: sys.dim(),
        r_old: truncate(sum_rate_seed(sys), 4),
        d_new: res.dim,
        r_new: truncate(res.rate, 4),
        r_upper: round_up(upper_bound::<f64>(sys.users() as u32), 4),
        rate: truncate(res.rate, 9),
    }))
}

/// Recomputes every row from the stored codes and parameters.
pub fn table_rows() -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for e in catalog::all() {
        if let Some(r) = row(&e)? {
            rows.push(r);
        }
    }
    Ok(rows)
}

pub fn mismatches(rows: &[TableRow]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for r in rows {
        let Ok(entry) = catalog::catalog_get(r.name) else {
            continue;
        };
        let Some(exp) = entry.expected else {
            continue;
        };
        let checks = [
            ("R_old", &r.r_old, exp.seed_rate.to_string()),
            ("R_new", &r.r_new, exp.improved_rate.to_string()),
            ("R_upper", &r.r_upper, exp.upper.to_string()),
            ("rate", &r.rate, exp.rate.to_string()),
            ("d_new", &r.d_new.to_string(), exp.improved_dim.to_string()),
        ];
        for (field, computed, recorded) in checks {
            if *computed != recorded {
                out.push(Mismatch {
                    name: r.name,
                    field,
                    computed: computed.clone(),
                    recorded,
                });
            }
        }
    }
    out
}

/// Plain-text rendering with one header line.
pub fn render(rows: &[TableRow]) -> String {
    let mut s = format!(
        "{:<8} {:>2} {:>5} {:>7} {:>5} {:>7} {:>7}\n",
        "name", "T", "d_old", "R_old", "d_new", "R_new", "R_upper"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<8} {:>2} {:>5} {:>7} {:>5} {:>7} {:>7}\n",
            r.name, r.users, r.d_old, r.r_old, r.d_new, r.r_new, r.r_upper
        ));
    }
    s
}
