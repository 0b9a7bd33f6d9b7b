use crate::{Error, Result};

/// Row-major factorization of an index range into tensor registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterShape {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl RegisterShape {
    pub fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1; dims.len()];
        for a in (0..dims.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        Self { dims: dims.to_vec(), strides }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn size(&self) -> usize {
        self.dims.iter().product()
    }

    /// Splits a flat index into per-register digits.
    pub fn digits(&self, mut index: usize, out: &mut [usize]) {
        for a in 0..self.dims.len() {
            out[a] = index / self.strides[a];
            index %= self.strides[a];
        }
    }

    /// Joins per-register digits into a flat index.
    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    /// Validates a register subset and returns a membership mask.
    pub fn mask(&self, subset: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.dims.len()];
        for &r in subset {
            if r >= self.dims.len() {
                return Err(Error::InvalidRegister { index: r, count: self.dims.len() });
            }
            mask[r] = true;
        }
        Ok(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        let shape = RegisterShape::new(&[2, 3, 4]);
        let mut d = [0; 3];
        for i in 0..24 {
            shape.digits(i, &mut d);
            assert_eq!(shape.index(&d), i);
        }
        shape.digits(17, &mut d);
        assert_eq!(d, [1, 1, 1]);
    }

    #[test]
    fn mask_rejects_out_of_range() {
        let shape = RegisterShape::new(&[2, 2]);
        assert!(shape.mask(&[2]).is_err());
        assert_eq!(shape.mask(&[1]).unwrap(), vec![false, true]);
    }
}
