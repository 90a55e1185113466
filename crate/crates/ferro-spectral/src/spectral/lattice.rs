use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// Integer wavevector.
pub type Wavevector = [i32; 3];

/// Squared Euclidean length of a wavevector.
#[inline]
pub fn norm_sq(k: Wavevector) -> i64 {
    k.iter().map(|&c| i64::from(c) * i64::from(c)).sum()
}

/// Strict upper half of the lattice: exactly one of `k`, `-k` qualifies for `k ≠ 0`.
#[inline]
pub fn in_upper_half(k: Wavevector) -> bool {
    k[2] > 0 || (k[2] == 0 && (k[1] > 0 || (k[1] == 0 && k[0] > 0)))
}

/// Function space a field or basis belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpaceTag {
    V,
    W,
    V1,
    V2,
    Grad,
}

impl SpaceTag {
    pub const ALL: [SpaceTag; 5] = [SpaceTag::V, SpaceTag::W, SpaceTag::V1, SpaceTag::V2, SpaceTag::Grad];

    pub fn as_str(self) -> &'static str {
        match self {
            SpaceTag::V => "V",
            SpaceTag::W => "W",
            SpaceTag::V1 => "V1",
            SpaceTag::V2 => "V2",
            SpaceTag::Grad => "Grad",
        }
    }
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpaceTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "V" => Ok(SpaceTag::V),
            "W" => Ok(SpaceTag::W),
            "V1" => Ok(SpaceTag::V1),
            "V2" => Ok(SpaceTag::V2),
            "Grad" => Ok(SpaceTag::Grad),
            other => Err(Error::InvalidConfig(alloc::format!("unknown space tag `{other}`"))),
        }
    }
}

/// The full cube `‖k‖∞ ≤ k_max` of wavevectors, stored densely.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cube {
    k_max: usize,
}

impl Cube {
    pub fn new(k_max: usize) -> Self {
        Cube { k_max }
    }

    #[inline]
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.k_max + 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        let s = self.side();
        s * s * s
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, k: Wavevector) -> bool {
        let m = self.k_max as i32;
        k.iter().all(|&c| -m <= c && c <= m)
    }

    #[inline]
    pub fn index(&self, k: Wavevector) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        Some(self.index_unchecked(k))
    }

    #[inline]
    pub(crate) fn index_unchecked(&self, k: Wavevector) -> usize {
        let m = self.k_max as i32;
        let s = self.side();
        let i = (k[0] + m) as usize;
        let j = (k[1] + m) as usize;
        let l = (k[2] + m) as usize;
        (i * s + j) * s + l
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> Wavevector {
        let s = self.side();
        let m = self.k_max as i32;
        let l = idx % s;
        let j = (idx / s) % s;
        let i = idx / (s * s);
        [i as i32 - m, j as i32 - m, l as i32 - m]
    }

    /// Index of `-k` for the wavevector stored at `idx`.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Wavevector)> + '_ {
        (0..self.len()).map(move |i| (i, self.wavevector(i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_and_mirror() {
        let cube = Cube::new(2);
        for (i, k) in cube.iter() {
            assert_eq!(cube.index(k), Some(i));
            let neg = [-k[0], -k[1], -k[2]];
            assert_eq!(cube.mirror(i), cube.index(neg).unwrap());
        }
    }

    #[test]
    fn upper_half_splits_nonzero_lattice() {
        let cube = Cube::new(2);
        for (_, k) in cube.iter() {
            if k == [0, 0, 0] {
                assert!(!in_upper_half(k));
                continue;
            }
            let neg = [-k[0], -k[1], -k[2]];
            assert!(in_upper_half(k) ^ in_upper_half(neg));
        }
    }
}
