use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::exponent::{exponents, ExponentVec};
use crate::{PatternError, Regime};

/// Row label `x_{i0} y^beta conj(y)^{beta'}` of a moment block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MomentLabel {
    pub i0: usize,
    pub beta: ExponentVec,
    pub beta_p: ExponentVec,
}

/// Key `(gamma, gamma', delta, delta')` of the moment
/// `L(x^gamma conj(x)^gamma' y^delta conj(y)^delta')`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MomentKey {
    pub gamma: ExponentVec,
    pub gamma_p: ExponentVec,
    pub delta: ExponentVec,
    pub delta_p: ExponentVec,
}

impl MomentKey {
    pub fn conjugate(&self) -> Self {
        Self {
            gamma: self.gamma_p.clone(),
            gamma_p: self.gamma.clone(),
            delta: self.delta_p.clone(),
            delta_p: self.delta.clone(),
        }
    }

    /// Canonical representative under conjugation plus a flag telling
    /// whether the original is the conjugate of the representative.
    pub fn canonical(self) -> (Self, bool) {
        let c = self.conjugate();
        if c < self {
            (c, true)
        } else {
            (self, false)
        }
    }

    /// True when the moment equals its own conjugate, hence is real.
    pub fn is_self_conjugate(&self) -> bool {
        self.gamma == self.gamma_p && self.delta == self.delta_p
    }
}

/// Reference to a canonical moment, conjugated when `conj` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarRef {
    pub key: MomentKey,
    pub conj: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Entry {
    Zero,
    Var(VarRef),
}

/// Basis of `I_{1,s'}`: labels with `|beta| = (t+s')/2`, `|beta'| = (t-s')/2`.
pub fn moment_basis(n: usize, t: usize, s_prime: i64) -> Result<Vec<MomentLabel>, PatternError> {
    let ti = t as i64;
    if s_prime.abs() > ti || (ti - s_prime).rem_euclid(2) != 0 {
        return Err(PatternError::ParityMismatch { t, s_prime });
    }
    let wb = ((ti + s_prime) / 2) as usize;
    let wbp = ((ti - s_prime) / 2) as usize;
    let betas = exponents(n, wb);
    let betas_p = exponents(n, wbp);
    let mut out = Vec::with_capacity(n * betas.len() * betas_p.len());
    for i0 in 0..n {
        for b in &betas {
            for bp in &betas_p {
                out.push(MomentLabel { i0, beta: b.clone(), beta_p: bp.clone() });
            }
        }
    }
    Ok(out)
}

/// Sub-block key of a label: labels in different classes meet only in
/// entries that the regime forces to vanish.
pub fn moment_sub_block_key(regime: Regime, label: &MomentLabel) -> Vec<i32> {
    let n = label.beta.len();
    let mut k = vec![0i32; n];
    match regime {
        Regime::Generic => return Vec::new(),
        Regime::Cldui | Regime::Ldui => {
            let sign = if regime == Regime::Cldui { 1 } else { -1 };
            k[label.i0] += 1;
            for a in 0..n {
                k[a] += sign * (label.beta_p.0[a] as i32 - label.beta.0[a] as i32);
            }
        }
        Regime::Ldoi => {
            k[label.i0] += 1;
            for a in 0..n {
                k[a] = (k[a] + label.beta.0[a] as i32 + label.beta_p.0[a] as i32) % 2;
            }
        }
    }
    k
}

/// Entry `(a, b)` of the moment matrix: the moment of
/// `x_{a.i0} conj(x_{b.i0}) y^{a.beta + b.beta'} conj(y)^{a.beta' + b.beta}`,
/// or zero when the regime's filter kills that monomial.
pub fn moment_entry(regime: Regime, a: &MomentLabel, b: &MomentLabel) -> Entry {
    let n = a.beta.len();
    let key = MomentKey {
        gamma: ExponentVec::unit(n, a.i0),
        gamma_p: ExponentVec::unit(n, b.i0),
        delta: a.beta.add(&b.beta_p),
        delta_p: a.beta_p.add(&b.beta),
    };
    let alive = match regime {
        Regime::Generic => true,
        // gamma + delta' == gamma' + delta
        Regime::Cldui => key.gamma.add(&key.delta_p) == key.gamma_p.add(&key.delta),
        // gamma + delta == gamma' + delta'
        Regime::Ldui => key.gamma.add(&key.delta) == key.gamma_p.add(&key.delta_p),
        Regime::Ldoi => {
            let total = key.gamma.add(&key.gamma_p).add(&key.delta).add(&key.delta_p);
            total.0.iter().all(|e| e % 2 == 0)
        }
    };
    if !alive {
        return Entry::Zero;
    }
    let (key, conj) = key.canonical();
    Entry::Var(VarRef { key, conj })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentBlock {
    pub key: Vec<i32>,
    pub basis: Vec<MomentLabel>,
}

/// Moment matrix restricted to `I_{1,s'}`, split into regime sub-blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub regime: Regime,
    pub n: usize,
    pub t: usize,
    pub s_prime: i64,
    pub blocks: Vec<MomentBlock>,
}

impl BlockLayout {
    /// Number of transposed B-registers this block family corresponds to.
    pub fn depth(&self) -> usize {
        ((self.t as i64 - self.s_prime) / 2) as usize
    }

    pub fn entry(&self, block: usize, r: usize, c: usize) -> Entry {
        let b = &self.blocks[block];
        moment_entry(self.regime, &b.basis[r], &b.basis[c])
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.basis.len()).collect()
    }

    pub fn basis_len(&self) -> usize {
        self.blocks.iter().map(|b| b.basis.len()).sum()
    }
}

/// One layout per `s' in {-t, -t+2, .., t}`.
pub fn moment_block_layout(n: usize, t: usize, regime: Regime) -> Vec<BlockLayout> {
    let ti = t as i64;
    (0..=t)
        .map(|k| -ti + 2 * k as i64)
        .map(|s_prime| {
            let basis = moment_basis(n, t, s_prime).expect("parity holds by construction");
            let mut groups: BTreeMap<Vec<i32>, Vec<MomentLabel>> = BTreeMap::new();
            for label in basis {
                groups.entry(moment_sub_block_key(regime, &label)).or_default().push(label);
            }
            let blocks = groups.into_iter().map(|(key, basis)| MomentBlock { key, basis }).collect();
            BlockLayout { regime, n, t, s_prime, blocks }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binomial;

    #[test]
    fn basis_cardinalities() {
        assert_eq!(moment_basis(3, 2, 0).unwrap().len(), 27);
        assert_eq!(moment_basis(3, 2, 2).unwrap().len(), 18);
        assert_eq!(moment_basis(3, 2, -2).unwrap().len(), 18);
        assert_eq!(moment_basis(4, 3, 1).unwrap().len(), 160);
        assert!(moment_basis(3, 2, 1).is_err());
        assert!(moment_basis(3, 2, 4).is_err());
        for n in 1..5 {
            for t in 1..5usize {
                for k in 0..=t {
                    let sp = 2 * k as i64 - t as i64;
                    let wb = (t as i64 + sp) as usize / 2;
                    let want = n as u128 * binomial(n - 1 + t - wb, n - 1) * binomial(n - 1 + wb, n - 1);
                    assert_eq!(moment_basis(n, t, sp).unwrap().len() as u128, want);
                }
            }
        }
    }

    #[test]
    fn entries_are_hermitian() {
        for regime in Regime::ALL {
            for layout in moment_block_layout(3, 2, regime) {
                for (bi, b) in layout.blocks.iter().enumerate() {
                    for r in 0..b.basis.len() {
                        for c in 0..b.basis.len() {
                            let (Entry::Var(x), Entry::Var(y)) = (layout.entry(bi, r, c), layout.entry(bi, c, r))
                            else {
                                panic!("zero inside a sub-block");
                            };
                            assert_eq!(x.key, y.key);
                            assert!(x.conj != y.conj || x.key.is_self_conjugate());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cross_block_entries_vanish() {
        for regime in [Regime::Cldui, Regime::Ldui, Regime::Ldoi] {
            for layout in moment_block_layout(3, 2, regime) {
                for (p, a) in layout.blocks.iter().enumerate() {
                    for b in &layout.blocks[p + 1..] {
                        for x in &a.basis {
                            for y in &b.basis {
                                assert_eq!(moment_entry(regime, x, y), Entry::Zero);
                            }
                        }
                    }
                }
            }
        }
    }
}
