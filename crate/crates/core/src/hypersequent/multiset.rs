//! Finite multisets as sorted vectors.

pub(crate) fn count<T: Ord>(v: &[T], x: &T) -> usize {
    v.iter().filter(|y| *y == x).count()
}

pub(crate) fn sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v
}

/// `a ⊎ b`.
pub(crate) fn sum<T: Ord + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    sorted(a.iter().chain(b).cloned().collect())
}

/// `a ⊎ b^n`.
pub(crate) fn add_times<T: Ord + Clone>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut v = a.to_vec();
    for _ in 0..n {
        v.extend(b.iter().cloned());
    }
    sorted(v)
}

/// `a - x^n`, if `a` holds at least `n` copies of `x`.
pub(crate) fn remove_n<T: Ord + Clone>(a: &[T], x: &T, n: usize) -> Option<Vec<T>> {
    let mut v = a.to_vec();
    for _ in 0..n {
        let i = v.iter().position(|y| y == x)?;
        v.remove(i);
    }
    Some(v)
}

/// `a - b`, if `b ⊆ a`.
pub(crate) fn diff<T: Ord + Clone>(a: &[T], b: &[T]) -> Option<Vec<T>> {
    let mut v = a.to_vec();
    for x in b {
        let i = v.iter().position(|y| y == x)?;
        v.remove(i);
    }
    Some(v)
}

pub(crate) fn is_sub<T: Ord + Clone>(b: &[T], a: &[T]) -> bool {
    diff(a, b).is_some()
}

/// Distinct elements in order.
pub(crate) fn distinct<T: Ord + Clone>(a: &[T]) -> Vec<T> {
    let mut v = a.to_vec();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operations() {
        let a = vec![1, 1, 2, 3];
        assert_eq!(count(&a, &1), 2);
        assert_eq!(sum(&a, &[0, 2]), vec![0, 1, 1, 2, 2, 3]);
        assert_eq!(remove_n(&a, &1, 2), Some(vec![2, 3]));
        assert_eq!(remove_n(&a, &1, 3), None);
        assert_eq!(diff(&a, &[1, 3]), Some(vec![1, 2]));
        assert!(is_sub(&[1, 1], &a));
        assert!(!is_sub(&[2, 2], &a));
        assert_eq!(add_times(&[5], &[1, 2], 2), vec![1, 1, 2, 2, 5]);
        assert_eq!(distinct(&a), vec![1, 2, 3]);
    }
}
