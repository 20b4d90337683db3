//! Grid points as single integers.

use super::TokenizerError;
use crate::problems::Point3;

/// `(a0, a1, a2) -> a0 n^2 + a1 n + a2`.
pub fn point_encode(p: &Point3, n: usize) -> Result<usize, TokenizerError> {
    p.iter().try_fold(0usize, |acc, &a| {
        if a < 0 || a >= n as i64 {
            Err(TokenizerError::Coordinate { value: a, n })
        } else {
            Ok(acc * n + a as usize)
        }
    })
}

pub fn point_decode(i: usize, n: usize) -> Result<Point3, TokenizerError> {
    if i >= n.pow(3) {
        return Err(TokenizerError::UnknownToken(i as u32));
    }
    Ok([(i / (n * n)) as i64, (i / n % n) as i64, (i % n) as i64])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_base_n() {
        assert_eq!(point_encode(&[0, 0, 0], 7).unwrap(), 0);
        assert_eq!(point_encode(&[1, 2, 3], 10).unwrap(), 123);
        assert_eq!(point_encode(&[4, 4, 4], 5).unwrap(), 124);
        assert!(point_encode(&[5, 0, 0], 5).is_err());
        assert!(point_encode(&[-1, 0, 0], 5).is_err());
        for i in 0..216 {
            assert_eq!(point_encode(&point_decode(i, 6).unwrap(), 6).unwrap(), i);
        }
        assert!(point_decode(216, 6).is_err());
    }
}
