//! Fixed-width role bitsets used as search states.

use smallvec::{smallvec, SmallVec};

pub(crate) type Bits = SmallVec<[u64; 2]>;

pub(crate) fn empty(words: usize) -> Bits {
    smallvec![0; words]
}

pub(crate) fn words_for(roles: usize) -> usize {
    roles.div_ceil(64).max(1)
}

#[inline]
pub(crate) fn has(bits: &[u64], i: usize) -> bool {
    bits[i / 64] & (1 << (i % 64)) != 0
}

#[inline]
pub(crate) fn set(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

#[inline]
pub(crate) fn clear(bits: &mut [u64], i: usize) {
    bits[i / 64] &= !(1 << (i % 64));
}

#[inline]
pub(crate) fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

#[inline]
pub(crate) fn disjoint(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & y == 0)
}

pub(crate) fn union_with(a: &mut [u64], b: &[u64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x |= y;
    }
}

pub(crate) fn intersect(a: &[u64], b: &[u64]) -> Bits {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

pub(crate) fn minus(a: &[u64], b: &[u64]) -> Bits {
    a.iter().zip(b).map(|(x, y)| x & !y).collect()
}

pub(crate) fn is_zero(a: &[u64]) -> bool {
    a.iter().all(|&x| x == 0)
}

pub(crate) fn ones(bits: &[u64]) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let tz = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w * 64 + tz)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut a = empty(words_for(130));
        assert_eq!(a.len(), 3);
        set(&mut a, 0);
        set(&mut a, 64);
        set(&mut a, 129);
        assert!(has(&a, 129) && !has(&a, 128));
        assert_eq!(ones(&a).collect::<Vec<_>>(), vec![0, 64, 129]);
        let mut b = a.clone();
        clear(&mut b, 64);
        assert!(subset(&b, &a) && !subset(&a, &b));
        assert_eq!(ones(&minus(&a, &b)).collect::<Vec<_>>(), vec![64]);
        assert!(disjoint(&minus(&a, &b), &b));
        assert_eq!(intersect(&a, &b), b);
        assert!(is_zero(&empty(2)));
        assert_eq!(words_for(0), 1);
    }
}
