use crate::error::{arg, Result};

/// A monomial in the coordinates of a [`DgSpace`](super::DgSpace), stored as an
/// exponent vector in the canonical (basis-index) order.
///
/// Odd coordinates never appear with exponent above one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub(crate) Vec<u16>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn from_exponents(e: Vec<u16>) -> Self {
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.0[i]
    }

    /// Polynomial degree (number of factors).
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    /// Internal ℤ-degree Σ deg(x_i)·e_i.
    pub fn weight(&self, degrees: &[i32]) -> i32 {
        self.0.iter().zip(degrees).map(|(&e, &d)| e as i32 * d).sum()
    }

    /// Parity of the internal degree.
    pub fn is_odd(&self, degrees: &[i32]) -> bool {
        self.weight(degrees).rem_euclid(2) == 1
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Factors in canonical order, each index repeated by its exponent.
    pub fn factors(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree() as usize);
        for (i, &e) in self.0.iter().enumerate() {
            for _ in 0..e {
                out.push(i);
            }
        }
        out
    }

    /// Normalizes an ordered word of factors into canonical order.
    ///
    /// Returns `None` when an odd coordinate repeats, otherwise the monomial
    /// and the Koszul sign picked up while sorting.
    pub fn from_factors(factors: &[usize], degrees: &[i32]) -> Option<(Monomial, i32)> {
        let n = degrees.len();
        let mut word: Vec<usize> = factors.to_vec();
        let mut sign = 1;
        // insertion sort; every adjacent swap of two odd factors flips the sign
        for k in 1..word.len() {
            let mut j = k;
            while j > 0 && word[j - 1] > word[j] {
                if odd(degrees[word[j - 1]]) && odd(degrees[word[j]]) {
                    sign = -sign;
                }
                word.swap(j - 1, j);
                j -= 1;
            }
        }
        let mut e = vec![0u16; n];
        for &f in &word {
            e[f] += 1;
            if e[f] > 1 && odd(degrees[f]) {
                return None;
            }
        }
        Some((Monomial(e), sign))
    }

    /// Graded-commutative product with its Koszul sign.
    pub fn mul(&self, other: &Monomial, degrees: &[i32]) -> Option<(Monomial, i32)> {
        let n = self.0.len();
        let mut e = Vec::with_capacity(n);
        // parity of odd factors of `self` strictly after position b
        let mut suffix_odd = vec![0u32; n + 1];
        for i in (0..n).rev() {
            let p = if odd(degrees[i]) { self.0[i] as u32 & 1 } else { 0 };
            suffix_odd[i] = suffix_odd[i + 1] ^ p;
        }
        let mut parity = 0u32;
        for i in 0..n {
            let s = self.0[i] + other.0[i];
            if odd(degrees[i]) {
                if s > 1 {
                    return None;
                }
                if other.0[i] & 1 == 1 {
                    parity ^= suffix_odd[i + 1];
                }
            }
            e.push(s);
        }
        Some((Monomial(e), if parity == 0 { 1 } else { -1 }))
    }

    /// Left derivative ∂/∂x_i: returns (monomial, integer factor with sign).
    pub fn left_derivative(&self, i: usize, degrees: &[i32]) -> Option<(Monomial, i64)> {
        let e = self.0[i];
        if e == 0 {
            return None;
        }
        let mut sign = 1i64;
        if odd(degrees[i]) {
            let before: u32 = (0..i).filter(|&j| odd(degrees[j])).map(|j| self.0[j] as u32).sum();
            if before % 2 == 1 {
                sign = -1;
            }
        }
        let mut m = self.0.clone();
        m[i] -= 1;
        Some((Monomial(m), sign * e as i64))
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.is_one() {
            return "1".into();
        }
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(names[i].clone()),
                e => parts.push(format!("{}^{}", names[i], e)),
            }
        }
        parts.join("*")
    }
}

pub(crate) fn odd(d: i32) -> bool {
    d.rem_euclid(2) == 1
}

/// Koszul sign of reordering a word of graded factors.
///
/// `degrees[k]` is the degree of the k-th factor in the original word and the
/// reordered word is `perm[0], perm[1], ...`. Every pair of odd factors whose
/// relative order is reversed contributes a factor −1.
pub fn koszul_sign(perm: &[usize], degrees: &[i32]) -> Result<i32> {
    if perm.len() != degrees.len() {
        return arg(format!(
            "permutation has length {} but {} degrees were given",
            perm.len(),
            degrees.len()
        ));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return arg("not a permutation");
        }
        seen[p] = true;
    }
    let mut sign = 1;
    for a in 0..perm.len() {
        for b in a + 1..perm.len() {
            if perm[a] > perm[b] && odd(degrees[perm[a]]) && odd(degrees[perm[b]]) {
                sign = -sign;
            }
        }
    }
    Ok(sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn koszul_examples() {
        assert_eq!(koszul_sign(&[0, 1, 2], &[1, 1, 1]).unwrap(), 1);
        assert_eq!(koszul_sign(&[1, 0], &[1, 1]).unwrap(), -1);
        assert_eq!(koszul_sign(&[1, 0], &[0, 1]).unwrap(), 1);
        assert_eq!(koszul_sign(&[1, 0], &[-1, 3]).unwrap(), -1);
        assert!(koszul_sign(&[0, 1], &[1]).is_err());
        assert!(koszul_sign(&[0, 0], &[1, 1]).is_err());
    }

    #[test]
    fn koszul_multiplicative() {
        let d = [1, 0, 1, 1];
        let p = [2, 0, 3, 1];
        let r = [1, 3, 0, 2];
        // word after p, then reorder that word by r
        let composed: Vec<usize> = r.iter().map(|&k| p[k]).collect();
        let dp: Vec<i32> = p.iter().map(|&k| d[k]).collect();
        assert_eq!(
            koszul_sign(&composed, &d).unwrap(),
            koszul_sign(&p, &d).unwrap() * koszul_sign(&r, &dp).unwrap()
        );
    }

    #[test]
    fn odd_square_vanishes() {
        let d = [0, -1];
        assert!(Monomial::from_factors(&[1, 1], &d).is_none());
        let (m, s) = Monomial::from_factors(&[1, 0, 0], &d).unwrap();
        assert_eq!(m.exponents(), &[2, 1]);
        assert_eq!(s, 1);
    }

    #[test]
    fn mul_sign_matches_word_sort() {
        let d = [1, 0, 1, -1];
        let a = Monomial(vec![1, 1, 0, 1]);
        let b = Monomial(vec![0, 2, 1, 0]);
        let mut word = a.factors();
        word.extend(b.factors());
        let (m1, s1) = a.mul(&b, &d).unwrap();
        let (m2, s2) = Monomial::from_factors(&word, &d).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(s1, s2);
    }
}
