/// Levenshtein distance over token sequences (unit-cost insert, delete,
/// substitute).
pub fn token_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance divided by the longer length; 0 when both are empty.
pub fn normalized_distance<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    token_edit_distance(a, b) as f64 / longest as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_substitution_over_two_tokens() {
        assert_eq!(normalized_distance(&["SELECT", "?x"], &["SELECT", "?y"]), 0.5);
    }

    #[test]
    fn empty_cases() {
        let e: [&str; 0] = [];
        assert_eq!(normalized_distance(&e, &e), 0.0);
        assert_eq!(normalized_distance(&e, &["a", "b"]), 1.0);
        assert_eq!(token_edit_distance(&["a", "b", "c"], &e), 3);
    }

    #[test]
    fn classic_kitten_sitting() {
        let a: Vec<char> = "kitten".chars().collect();
        let b: Vec<char> = "sitting".chars().collect();
        assert_eq!(token_edit_distance(&a, &b), 3);
    }
}
