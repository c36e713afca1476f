//! Unscrambled Sobol sequence with 32-bit Gray-code construction.
//!
//! Direction numbers come from the Joe–Kuo `new-joe-kuo-6.21201` table,
//! truncated to the first 1111 dimensions. The first dimension is the van der
//! Corput sequence in base 2. Point `i` is the XOR of the direction numbers
//! selected by the bits of `gray(i) = i ^ (i >> 1)`, so the sequence starts at
//! the origin and agrees with other unscrambled Joe–Kuo implementations.

use super::sobol_table::{DIRECTIONS, MAX_DIM};
use crate::error::{Error, Result};

const BITS: usize = 32;

/// Largest supported dimension.
pub const SOBOL_MAX_DIM: usize = MAX_DIM;

#[derive(Clone, Debug)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: format!("the Sobol direction table supports 1..={MAX_DIM} dimensions"),
            });
        }
        let directions = DIRECTIONS[..dim]
            .iter()
            .map(|&(poly, m)| direction_numbers(poly, m))
            .collect();
        Ok(Self { directions })
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    /// Integer coordinates of point `index`, scaled by 2³².
    pub fn point_bits(&self, index: u64, out: &mut [u32]) {
        let gray = index ^ (index >> 1);
        for (o, v) in out.iter_mut().zip(&self.directions) {
            let mut x = 0u32;
            let mut g = gray;
            let mut k = 0;
            while g != 0 {
                if g & 1 == 1 {
                    x ^= v[k];
                }
                g >>= 1;
                k += 1;
            }
            *o = x;
        }
    }

    /// `count` consecutive points in `[0, 1)^dim` starting at `start`, row-major.
    pub fn unit_points(&self, start: u64, count: usize) -> Result<Vec<f64>> {
        let end = start
            .checked_add(count as u64)
            .filter(|&e| e <= 1u64 << BITS)
            .ok_or_else(|| Error::param("Sobol index range exceeds 2^32 points"))?;
        let dim = self.dim();
        let mut bits = vec![0u32; dim];
        let mut out = Vec::with_capacity(count * dim);
        if count == 0 {
            return Ok(out);
        }
        self.point_bits(start, &mut bits);
        let scale = 1.0 / (1u64 << BITS) as f64;
        for i in start..end {
            if i > start {
                // gray(i) differs from gray(i - 1) in the lowest zero bit of i - 1
                let c = (!(i - 1)).trailing_zeros() as usize;
                for (b, v) in bits.iter_mut().zip(&self.directions) {
                    *b ^= v[c];
                }
            }
            out.extend(bits.iter().map(|&b| b as f64 * scale));
        }
        Ok(out)
    }
}

fn direction_numbers(poly: u32, m: &[u32]) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    let s = (31 - poly.leading_zeros()) as usize;
    if s == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1u32 << (BITS - 1 - k);
        }
        return v;
    }
    for k in 0..s.min(BITS) {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (poly >> (s - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points_in_five_dimensions() {
        let s = Sobol::new(5).unwrap();
        let pts = s.unit_points(0, 8).unwrap();
        let expect: [[f64; 5]; 8] = [
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.5, 0.5, 0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25, 0.25, 0.75],
            [0.25, 0.75, 0.75, 0.75, 0.25],
            [0.375, 0.375, 0.625, 0.875, 0.375],
            [0.875, 0.875, 0.125, 0.375, 0.875],
            [0.625, 0.125, 0.875, 0.625, 0.625],
            [0.125, 0.625, 0.375, 0.125, 0.125],
        ];
        for (row, e) in pts.chunks(5).zip(expect) {
            assert_eq!(row, e);
        }
    }

    #[test]
    fn high_dimensions_match_reference_values() {
        let s = Sobol::new(1111).unwrap();
        let p = s.unit_points(1000, 1).unwrap();
        let expect = [
            0.6279296875, 0.4052734375, 0.9013671875, 0.3486328125, 0.4814453125, 0.6904296875,
            0.5771484375, 0.1142578125, 0.6123046875, 0.9892578125, 0.3701171875,
        ];
        assert_eq!(&p[1100..], &expect);
        let p = s.unit_points(777, 1).unwrap();
        let picks: Vec<f64> = [0, 1, 2, 50, 500, 1110].iter().map(|&j| p[j]).collect();
        assert_eq!(
            picks,
            vec![0.6923828125, 0.9365234375, 0.1630859375, 0.0830078125, 0.8701171875, 0.5849609375]
        );
    }

    #[test]
    fn offset_start_matches_full_run() {
        let s = Sobol::new(7).unwrap();
        let all = s.unit_points(0, 300).unwrap();
        let tail = s.unit_points(123, 50).unwrap();
        assert_eq!(&all[123 * 7..173 * 7], &tail[..]);
    }

    #[test]
    fn rejects_unsupported_dimension() {
        let err = Sobol::new(1112).unwrap_err();
        assert!(err.to_string().contains("1111"));
        assert!(Sobol::new(0).is_err());
    }
}
