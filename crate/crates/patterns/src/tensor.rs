use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::exponent::sequences;
use crate::{PatternError, Regime};

/// Equivalence-class key of a tensor index `i0 i1..it` under a regime's
/// sparsity pattern at transpose depth `s`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitKey {
    pub regime: Regime,
    pub depth: usize,
    pub key: Vec<i32>,
}

/// Class key of the index `(i0, i)` in the graph attached to
/// `rho_{AB[t]}^{T_{B[1:s]}}`.
///
/// * CLDUI: `e_{i0} + alpha(i[..s]) - alpha(i[s..])`
/// * LDUI: `e_{i0} - alpha(i[..s]) + alpha(i[s..])`
/// * LDOI: `(e_{i0} + alpha(i)) mod 2`
/// * Generic: a single class.
pub fn clique_key(n: usize, i0: usize, i: &[usize], s: usize, regime: Regime) -> OrbitKey {
    assert!(s <= i.len(), "transpose depth exceeds level");
    let mut key = vec![0i32; n];
    match regime {
        Regime::Generic => key.clear(),
        Regime::Cldui | Regime::Ldui => {
            let sign = if regime == Regime::Cldui { 1 } else { -1 };
            key[i0] += 1;
            for (p, &x) in i.iter().enumerate() {
                key[x] += if p < s { sign } else { -sign };
            }
        }
        Regime::Ldoi => {
            key[i0] ^= 1;
            for &x in i {
                key[x] ^= 1;
            }
        }
    }
    let depth = if matches!(regime, Regime::Cldui | Regime::Ldui) { s } else { 0 };
    OrbitKey { regime, depth, key }
}

/// Direct adjacency test between two tensor indices, written from the
/// support definitions rather than the class keys.
pub fn tensor_adjacent(n: usize, a: &[usize], b: &[usize], s: usize, regime: Regime) -> bool {
    let (i0, i) = (a[0], &a[1..]);
    let (j0, j) = (b[0], &b[1..]);
    let count = |head: usize, tail: &[usize]| {
        let mut v = vec![0i32; n];
        v[head] += 1;
        for &x in tail {
            v[x] += 1;
        }
        v
    };
    // Entry (a, b) of the partially transposed tensor reads entry (a', b')
    // of the tensor itself, with the first s B-symbols exchanged.
    let swapped_i: Vec<usize> = j[..s].iter().chain(&i[s..]).copied().collect();
    let swapped_j: Vec<usize> = i[..s].iter().chain(&j[s..]).copied().collect();
    match regime {
        Regime::Generic => true,
        Regime::Cldui => count(i0, &swapped_j) == count(j0, &swapped_i),
        Regime::Ldui => count(i0, &swapped_i) == count(j0, &swapped_j),
        Regime::Ldoi => {
            let mut v = count(i0, i);
            for (k, c) in count(j0, j).into_iter().enumerate() {
                v[k] += c;
            }
            v.iter().all(|c| c % 2 == 0)
        }
    }
}

/// A maximal clique: tensor indices `(i0, i1, .., it)` sharing one key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clique {
    pub key: OrbitKey,
    pub members: Vec<Vec<usize>>,
}

/// Block-diagonal skeleton of `rho_{AB[t]}^{T_{B[1:s]}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorLayout {
    pub n: usize,
    pub t: usize,
    pub s: usize,
    pub regime: Regime,
    pub cliques: Vec<Clique>,
}

impl TensorLayout {
    /// Clique sizes with multiplicities.
    pub fn size_multiset(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for c in &self.cliques {
            *out.entry(c.members.len()).or_insert(0) += 1;
        }
        out
    }
}

/// Groups `[n]^{t+1}` into cliques by [`clique_key`]. Cliques are ordered by
/// key and members lexicographically.
pub fn tensor_block_layout(n: usize, t: usize, s: usize, regime: Regime) -> Result<TensorLayout, PatternError> {
    if s > t {
        return Err(PatternError::InvalidDepth { s, t });
    }
    let mut groups: BTreeMap<OrbitKey, Vec<Vec<usize>>> = BTreeMap::new();
    for seq in sequences(n, t + 1) {
        let key = clique_key(n, seq[0], &seq[1..], s, regime);
        groups.entry(key).or_default().push(seq);
    }
    let cliques = groups.into_iter().map(|(key, members)| Clique { key, members }).collect();
    Ok(TensorLayout { n, t, s, regime, cliques })
}

/// Renders a 0-based sequence with 1-based digits, e.g. `[0, 1, 2]` as `"123"`.
pub fn format_seq(seq: &[usize]) -> String {
    seq.iter().map(|&x| (x + 1).to_string()).collect::<Vec<_>>().join(if seq.iter().any(|&x| x >= 9) {
        ","
    } else {
        ""
    })
}
