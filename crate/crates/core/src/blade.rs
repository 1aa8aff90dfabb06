//! Basis blades of the 4-dimensional exterior algebra.
//!
//! A blade is an ordered subset of the coordinate indices {0,1,2,3}, stored
//! as a bitmask. Bit `i` set means the factor `dx^i` is present; factors are
//! always kept in ascending index order, so the bitmask is a canonical form.
//! There are 16 blades, grades 0 through 4.

use std::fmt;

#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct Blade(u8);

pub const DIM: usize = 4;
pub const BLADE_COUNT: usize = 16;

impl Blade {
    pub const SCALAR: Blade = Blade(0);

    /// Blade from a bitmask over the low four bits.
    pub fn from_bits(bits: u8) -> Blade {
        debug_assert!(bits < 16);
        Blade(bits)
    }

    /// Blade from strictly increasing indices.
    pub fn from_indices(indices: &[usize]) -> Blade {
        let mut bits = 0u8;
        for w in indices.windows(2) {
            assert!(w[0] < w[1], "blade indices must be strictly increasing");
        }
        for &i in indices {
            assert!(i < DIM);
            bits |= 1 << i;
        }
        Blade(bits)
    }

    pub fn axis(i: usize) -> Blade {
        assert!(i < DIM);
        Blade(1 << i)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    /// Ascending list of the indices present.
    pub fn indices(self) -> Vec<usize> {
        (0..DIM).filter(|&i| self.contains(i)).collect()
    }

    /// Lowest index present; None for the scalar blade.
    pub fn first_index(self) -> Option<usize> {
        (0..DIM).find(|&i| self.contains(i))
    }

    pub fn remove(self, i: usize) -> Blade {
        Blade(self.0 & !(1 << i))
    }

    pub fn all() -> impl Iterator<Item = Blade> {
        (0u8..16).map(Blade)
    }

    /// All blades of the given grade, in canonical order.
    pub fn of_grade(k: usize) -> impl Iterator<Item = Blade> {
        Blade::all().filter(move |b| b.grade() == k)
    }
}

// Canonical order: by grade, then lexicographically by index list, so that
// printed output is stable ({} < {0} < {1} < .. < {0,1} < {0,2} < {0,3} <
// {1,2} < ...).
impl Ord for Blade {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.grade(), self.indices()).cmp(&(other.grade(), other.indices()))
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for i in self.indices() {
            if !first {
                write!(f, "^")?;
            }
            write!(f, "dx{i}")?;
            first = false;
        }
        Ok(())
    }
}

/// Sort a list of indices, counting transpositions. Returns the canonical
/// blade and the permutation sign, or None when an index repeats.
pub fn sort_indices(indices: &mut Vec<usize>) -> Option<(Blade, i32)> {
    let mut sign = 1;
    let n = indices.len();
    for i in 1..n {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in indices.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((Blade::from_indices(indices), sign))
}
