use serde::{Deserialize, Serialize};

use crate::PatternError;

/// Exponent vector in `N^n`, compared lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExponentVec(pub Vec<u16>);

impl ExponentVec {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Index of the single nonzero entry of a unit vector.
    pub fn unit_index(&self) -> Option<usize> {
        if self.weight() != 1 {
            return None;
        }
        self.0.iter().position(|&e| e == 1)
    }

    /// Any sequence with these multiplicities, in nondecreasing order.
    pub fn to_sequence(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (i, &e) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(i, e as usize));
        }
        out
    }
}

/// Occurrence counts of each symbol of `seq` in `0..n`.
pub fn alpha(seq: &[usize], n: usize) -> Result<ExponentVec, PatternError> {
    let mut v = vec![0u16; n];
    for &s in seq {
        if s >= n {
            return Err(PatternError::SymbolOutOfRange { symbol: s, n });
        }
        v[s] += 1;
    }
    Ok(ExponentVec(v))
}

/// All exponent vectors of length `n` and the given weight, in lexicographic order.
pub fn exponents(n: usize, weight: usize) -> Vec<ExponentVec> {
    let mut out = Vec::new();
    if n == 0 {
        if weight == 0 {
            out.push(ExponentVec(Vec::new()));
        }
        return out;
    }
    let mut cur = vec![0u16; n];
    fill(&mut cur, 0, weight, &mut out);
    out
}

fn fill(cur: &mut [u16], pos: usize, left: usize, out: &mut Vec<ExponentVec>) {
    if pos + 1 == cur.len() {
        cur[pos] = left as u16;
        out.push(ExponentVec(cur.to_vec()));
        return;
    }
    for e in 0..=left {
        cur[pos] = e as u16;
        fill(cur, pos + 1, left - e, out);
    }
    cur[pos] = 0;
}

/// All sequences in `[n]^len`, in lexicographic order.
pub fn sequences(n: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.checked_pow(len as u32).expect("sequence count overflows");
    (0..total).map(move |mut idx| {
        let mut s = vec![0; len];
        for p in (0..len).rev() {
            s[p] = idx % n;
            idx /= n;
        }
        s
    })
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Multinomial coefficient `|mu|! / prod mu_i!`.
pub fn multinomial(mu: &ExponentVec) -> u128 {
    let mut left = mu.weight();
    let mut r: u128 = 1;
    for &e in &mu.0 {
        r *= binomial(left, e as usize);
        left -= e as usize;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(&[0, 0, 1], 3).unwrap(), ExponentVec(vec![2, 1, 0]));
        assert_eq!(alpha(&[], 3).unwrap(), ExponentVec::zero(3));
        assert!(alpha(&[3], 3).is_err());
        let j = [1, 2, 2];
        let joined = alpha(&[0, 1, 2, 2], 3).unwrap();
        assert_eq!(joined, ExponentVec::unit(3, 0).add(&alpha(&j, 3).unwrap()));
    }

    #[test]
    fn exponent_counts() {
        for n in 1..5 {
            for w in 0..5 {
                let e = exponents(n, w);
                assert_eq!(e.len() as u128, binomial(n - 1 + w, n - 1));
                assert!(e.windows(2).all(|p| p[0] < p[1]));
            }
        }
    }

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&ExponentVec(vec![2, 1, 0])), 3);
        assert_eq!(multinomial(&ExponentVec(vec![1, 1, 1])), 6);
        assert_eq!(multinomial(&ExponentVec::zero(4)), 1);
    }

    #[test]
    fn sequences_lex() {
        let s: Vec<_> = sequences(2, 2).collect();
        assert_eq!(s, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
