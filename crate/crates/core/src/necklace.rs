//! Rotation classes of digit words.

use crate::lft::DigitWord;

/// Start index of the lexicographically least rotation (Booth).
pub fn least_rotation_index(s: &[u64]) -> usize {
    let n = s.len();
    let mut f: Vec<isize> = vec![-1; 2 * n];
    let mut k: usize = 0;
    for j in 1..2 * n {
        let sj = s[j % n];
        let at = |k: usize, i: isize| s[(k as isize + i + 1) as usize % n];
        let mut i = f[j - k - 1];
        while i != -1 && sj != at(k, i) {
            if sj < at(k, i) {
                k = (j as isize - i - 1) as usize;
            }
            i = f[i as usize];
        }
        if i == -1 && sj != at(k, i) {
            if sj < at(k, i) {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k
}

pub fn canonical_rotation(w: &DigitWord) -> DigitWord {
    w.rotated(least_rotation_index(w.digits()))
}

/// Smallest `p` such that the word is `u^{n/p}` with `|u| = p`.
pub fn primitive_period(s: &[u64]) -> usize {
    let n = s.len();
    // prefix function
    let mut pi = vec![0usize; n];
    for i in 1..n {
        let mut k = pi[i - 1];
        while k > 0 && s[i] != s[k] {
            k = pi[k - 1];
        }
        if s[i] == s[k] {
            k += 1;
        }
        pi[i] = k;
    }
    let p = n - pi[n - 1];
    if n % p == 0 {
        p
    } else {
        n
    }
}

pub fn is_primitive(w: &DigitWord) -> bool {
    primitive_period(w.digits()) == w.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(v: &[u64]) -> DigitWord {
        DigitWord::new(v.to_vec()).unwrap()
    }

    fn naive_min_rotation(v: &[u64]) -> Vec<u64> {
        (0..v.len())
            .map(|r| {
                let mut x = v.to_vec();
                x.rotate_left(r);
                x
            })
            .min()
            .unwrap()
    }

    #[test]
    fn rotations() {
        assert_eq!(canonical_rotation(&word(&[2, 1])), word(&[1, 2]));
        assert_eq!(canonical_rotation(&word(&[1, 2, 1])), word(&[1, 1, 2]));
        assert_eq!(canonical_rotation(&word(&[3])), word(&[3]));
        assert_eq!(canonical_rotation(&word(&[2, 1, 2, 1])), word(&[1, 2, 1, 2]));
    }

    #[test]
    fn primitivity() {
        assert!(is_primitive(&word(&[1, 2])));
        assert!(!is_primitive(&word(&[1, 2, 1, 2])));
        assert!(is_primitive(&word(&[1, 1, 2])));
        assert!(!is_primitive(&word(&[5, 5, 5])));
        assert!(is_primitive(&word(&[1, 2, 1])));
    }

    #[test]
    fn exhaustive_against_naive() {
        // every word of length <= 7 over {1, 2, 3}
        for n in 1..=7u32 {
            for code in 0..3u64.pow(n) {
                let mut c = code;
                let v: Vec<u64> = (0..n)
                    .map(|_| {
                        let d = c % 3 + 1;
                        c /= 3;
                        d
                    })
                    .collect();
                let w = word(&v);
                assert_eq!(canonical_rotation(&w).digits(), naive_min_rotation(&v).as_slice());
                let naive_prim = (1..v.len())
                    .filter(|p| v.len() % p == 0)
                    .all(|p| v.chunks(p).any(|ch| ch != &v[..p]));
                assert_eq!(is_primitive(&w), naive_prim, "{v:?}");
            }
        }
    }
}
