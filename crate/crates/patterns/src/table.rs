use std::collections::BTreeMap;
use std::io::Write;

use hermitian_core::par::{self, Exec};
use serde::{Deserialize, Serialize};

use crate::moment::moment_block_layout;
use crate::Regime;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub regime: Regime,
    pub n: usize,
    pub t: usize,
    pub block_size: usize,
    pub multiplicity: usize,
}

/// Moment block sizes with multiplicities for every `(n, t)` cell, summed over
/// all `s'`. Rows are ordered by `n`, then `t`, then decreasing block size.
pub fn block_size_table(exec: Exec, ns: &[usize], ts: &[usize], regime: Regime) -> Vec<TableRow> {
    let cells: Vec<(usize, usize)> = ns.iter().flat_map(|&n| ts.iter().map(move |&t| (n, t))).collect();
    let per_cell = par::map(exec, &cells, |&(n, t)| {
        let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
        for layout in moment_block_layout(n, t, regime) {
            for b in &layout.blocks {
                *sizes.entry(b.basis.len()).or_insert(0) += 1;
            }
        }
        sizes
            .into_iter()
            .rev()
            .map(|(block_size, multiplicity)| TableRow { regime, n, t, block_size, multiplicity })
            .collect::<Vec<_>>()
    });
    per_cell.into_iter().flatten().collect()
}

/// CSV with header `regime,n,t,block_size,multiplicity`.
pub fn write_table_csv<W: Write>(rows: &[TableRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["regime", "n", "t", "block_size", "multiplicity"])?;
    for r in rows {
        w.write_record([
            r.regime.as_str().to_string(),
            r.n.to_string(),
            r.t.to_string(),
            r.block_size.to_string(),
            r.multiplicity.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
