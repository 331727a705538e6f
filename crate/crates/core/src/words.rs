//! Combinatorics of the free semigroup on `n` generators and of its
//! abelianization `Z_n^+`.
//!
//! Words are value objects ordered by length first and lexicographically
//! within a length. That order is the index order of every kernel matrix
//! built on top of them, so matrix layouts are reproducible.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A word in the generators `g_1, ..., g_n`. Letters are 1-based; the empty
/// word is the neutral element `g_0`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u16>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn generator(i: usize) -> Self {
        assert!(i >= 1 && i <= u16::MAX as usize, "generator index out of range");
        Word(vec![i as u16])
    }

    /// Builds a word, checking every letter lies in `1..=n`.
    pub fn new(letters: &[usize], n: usize) -> Result<Self> {
        let mut out = Vec::with_capacity(letters.len());
        for &l in letters {
            if l == 0 || l > n || l > u16::MAX as usize {
                return Err(Error::InvalidWord(format!("letter {l} outside 1..={n}")));
            }
            out.push(l as u16);
        }
        Ok(Word(out))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> impl ExactSizeIterator<Item = usize> + DoubleEndedIterator + '_ {
        self.0.iter().map(|&l| l as usize)
    }

    /// Largest letter, 0 for the empty word.
    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `g_i` prepended to this word.
    pub fn prepend(&self, i: usize) -> Word {
        Word::generator(i).concat(self)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// All suffixes, from the word itself down to `g_0`.
    pub fn suffixes(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.len()).map(move |k| Word(self.0[k..].to_vec()))
    }

    /// Every factorization `self = alpha * beta`, `alpha` growing.
    pub fn factorizations(&self) -> impl Iterator<Item = (Word, Word)> + '_ {
        (0..=self.len()).map(move |k| (Word(self.0[..k].to_vec()), Word(self.0[k..].to_vec())))
    }

    fn raw(&self) -> &[u16] {
        &self.0
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("g0")
        } else {
            write!(f, "w[{self}]")
        }
    }
}

/// Parses the dot-joined key format; the empty string is `g_0`.
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let mut out = Vec::new();
        for part in s.split('.') {
            let l: u16 = part
                .trim()
                .parse()
                .map_err(|_| Error::InvalidWord(format!("bad letter {part:?} in {s:?}")))?;
            if l == 0 {
                return Err(Error::InvalidWord(format!("letter 0 in {s:?}")));
            }
            out.push(l);
        }
        Ok(Word(out))
    }
}

/// Returns `tau` with `sigma = alpha * tau` when `alpha` is a prefix of
/// `sigma`. `tau` is non-empty exactly when `alpha < sigma` strictly.
pub fn prefix_quotient(sigma: &Word, alpha: &Word) -> Option<Word> {
    sigma
        .raw()
        .strip_prefix(alpha.raw())
        .map(|rest| Word(rest.to_vec()))
}

/// All words of length exactly `len` over `n` generators, in canonical order.
pub fn words_of_length(n: usize, len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * n);
        for w in &out {
            for l in 1..=n {
                let mut v = w.0.clone();
                v.push(l as u16);
                next.push(Word(v));
            }
        }
        out = next;
    }
    out
}

/// All words of length at most `depth`, in canonical order.
pub fn words_up_to(n: usize, depth: usize) -> Vec<Word> {
    (0..=depth).flat_map(|k| words_of_length(n, k)).collect()
}

/// Multi-index in `Z_n^+`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut k = vec![0; n];
        k[i - 1] = 1;
        MultiIndex(k)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    /// Product order `self << other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Parses the comma-joined key format, e.g. `"1,2"`.
impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidWord(format!("bad multi-index {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }
}

/// The canonical homomorphism onto `Z_n^+`: letter counts.
pub fn abelianize(w: &Word, n: usize) -> MultiIndex {
    let mut k = vec![0; n];
    for l in w.letters() {
        k[l - 1] += 1;
    }
    MultiIndex(k)
}

/// `g_1^{k_1} ... g_n^{k_n}`.
pub fn multiindex_to_word(k: &MultiIndex) -> Word {
    let mut v = Vec::with_capacity(k.degree());
    for (i, &c) in k.0.iter().enumerate() {
        v.extend(core::iter::repeat_n((i + 1) as u16, c));
    }
    Word(v)
}

/// A finite suffix-closed word set together with its factorization set
/// `{(alpha, beta) : alpha * beta in Sigma}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleSet {
    n: usize,
    words: Vec<Word>,
    index: BTreeMap<Word, usize>,
    pairs: Vec<(Word, Word)>,
    pair_index: BTreeMap<(Word, Word), usize>,
}

impl AdmissibleSet {
    /// Validates suffix closure of an explicit word set.
    pub fn new(n: usize, words: impl IntoIterator<Item = Word>) -> Result<Self> {
        let set: BTreeSet<Word> = words.into_iter().collect();
        if set.is_empty() {
            return Err(Error::NotAdmissible("empty word set".into()));
        }
        for w in &set {
            check_letters(w, n)?;
            if let Some(s) = w.suffixes().find(|s| !set.contains(s)) {
                return Err(Error::NotAdmissible(format!(
                    "suffix {:?} of {:?} is missing",
                    s, w
                )));
            }
        }
        Ok(Self::from_sorted(n, set.into_iter().collect()))
    }

    /// Smallest suffix-closed superset of `words`.
    pub fn suffix_closure(n: usize, words: impl IntoIterator<Item = Word>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for w in words {
            check_letters(&w, n)?;
            set.extend(w.suffixes());
        }
        if set.is_empty() {
            return Err(Error::NotAdmissible("empty word set".into()));
        }
        Ok(Self::from_sorted(n, set.into_iter().collect()))
    }

    /// Words of length at most `depth`.
    pub fn truncation(n: usize, depth: usize) -> Self {
        Self::from_sorted(n, words_up_to(n, depth))
    }

    fn from_sorted(n: usize, words: Vec<Word>) -> Self {
        let index = words.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect();
        let pairs = lambda_pairs(&words);
        let pair_index = pairs.iter().cloned().enumerate().map(|(k, p)| (p, k)).collect();
        AdmissibleSet {
            n,
            words,
            index,
            pairs,
            pair_index,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.index.contains_key(w)
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// The factorization set, ordered by `(alpha, beta)`.
    pub fn pairs(&self) -> &[(Word, Word)] {
        &self.pairs
    }

    pub fn pair_index(&self, alpha: &Word, beta: &Word) -> Option<usize> {
        // Cloning keeps the map keyed by owned pairs; sets are desk sized.
        self.pair_index.get(&(alpha.clone(), beta.clone())).copied()
    }

    pub fn max_len(&self) -> usize {
        self.words.last().map_or(0, Word::len)
    }

    /// Exhaustive suffix-closure check.
    pub fn is_suffix_closed(&self) -> bool {
        self.words
            .iter()
            .all(|w| w.suffixes().all(|s| self.contains(&s)))
    }
}

fn check_letters(w: &Word, n: usize) -> Result<()> {
    if w.max_letter() > n {
        return Err(Error::InvalidWord(format!(
            "{:?} uses a generator above n = {n}",
            w
        )));
    }
    Ok(())
}

fn lambda_pairs(words: &[Word]) -> Vec<(Word, Word)> {
    let mut pairs: Vec<(Word, Word)> = words.iter().flat_map(Word::factorizations).collect();
    pairs.sort();
    pairs
}

/// All factorizations `(alpha, beta)` with `alpha * beta` in `sigma`.
pub fn build_lambda_set(sigma: &AdmissibleSet) -> Vec<(Word, Word)> {
    sigma.pairs().to_vec()
}

/// `Sigma_pi`: the preimage of a downward-closed `pi` under abelianization.
/// Fails when `pi` is not downward closed or the preimage exceeds `cap`.
pub fn sigma_pi(n: usize, pi: &[MultiIndex], cap: usize) -> Result<AdmissibleSet> {
    let set: BTreeSet<&MultiIndex> = pi.iter().collect();
    if set.is_empty() {
        return Err(Error::NotAdmissible("empty index set".into()));
    }
    for k in &set {
        if k.n() != n {
            return Err(Error::NotAdmissible(format!("{k} has arity {} != {n}", k.n())));
        }
        for i in 0..n {
            if k.0[i] > 0 {
                let mut m = (*k).clone();
                m.0[i] -= 1;
                if !set.contains(&m) {
                    return Err(Error::NotAdmissible(format!(
                        "({m}) << ({k}) but ({m}) is not in the set"
                    )));
                }
            }
        }
    }
    let size: usize = set.iter().map(|k| multinomial(k)).sum();
    if size > cap {
        return Err(Error::SigmaTooLarge { size, cap });
    }
    let mut words = Vec::with_capacity(size);
    for k in set {
        let mut counts: Vec<usize> = k.0.clone();
        let mut cur = Vec::with_capacity(k.degree());
        multiset_permutations(&mut counts, &mut cur, k.degree(), &mut words);
    }
    words.sort();
    Ok(AdmissibleSet::from_sorted(n, words))
}

fn multinomial(k: &MultiIndex) -> usize {
    let mut acc: u128 = 1;
    let mut total: u128 = 0;
    for &c in &k.0 {
        for j in 1..=c as u128 {
            total += 1;
            acc = acc * total / j;
        }
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

fn multiset_permutations(counts: &mut [usize], cur: &mut Vec<u16>, len: usize, out: &mut Vec<Word>) {
    if cur.len() == len {
        out.push(Word(cur.clone()));
        return;
    }
    for i in 0..counts.len() {
        if counts[i] > 0 {
            counts[i] -= 1;
            cur.push((i + 1) as u16);
            multiset_permutations(counts, cur, len, out);
            cur.pop();
            counts[i] += 1;
        }
    }
}

/// Commutation coefficients `lambda_{ji}`, `i < j`, of the relations
/// `T_j T_i = lambda_{ji} T_i T_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSpec {
    n: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl LambdaSpec {
    /// All coefficients equal to one: the commuting case.
    pub fn ones(n: usize) -> Self {
        let mut entries = BTreeMap::new();
        for j in 1..=n {
            for i in 1..j {
                entries.insert((j, i), Complex64::new(1.0, 0.0));
            }
        }
        LambdaSpec { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, j: usize, i: usize, value: Complex64) -> Result<()> {
        if !(1 <= i && i < j && j <= self.n) {
            return Err(Error::InvalidWord(format!(
                "lambda index ({j},{i}) needs 1 <= i < j <= {}",
                self.n
            )));
        }
        self.entries.insert((j, i), value);
        Ok(())
    }

    pub fn get(&self, j: usize, i: usize) -> Complex64 {
        self.entries
            .get(&(j, i))
            .copied()
            .unwrap_or(Complex64::new(1.0, 0.0))
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries.values().all(|v| *v == Complex64::new(1.0, 0.0))
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }
}

/// The scalar `eps(w)` with `T_w = eps(w) T^{phi(w)}` under the relations
/// of `lam`, found by bubble-sorting `w` with adjacent swaps.
pub fn signature(w: &Word, lam: &LambdaSpec) -> Result<Complex64> {
    let mut letters: Vec<usize> = w.letters().collect();
    let mut eps = Complex64::new(1.0, 0.0);
    let mut swapped = true;
    while swapped {
        swapped = false;
        for k in 1..letters.len() {
            let (j, i) = (letters[k - 1], letters[k]);
            if j > i {
                let l = lam.get(j, i);
                if l == Complex64::new(0.0, 0.0) {
                    return Err(Error::ZeroLambda { j, i });
                }
                eps *= l;
                letters.swap(k - 1, k);
                swapped = true;
            }
        }
    }
    Ok(eps)
}

/// A noncommutative polynomial `sum_j a_j alpha_j` with distinct words.
#[derive(Clone, Debug, PartialEq)]
pub struct FreePolynomial {
    terms: Vec<(Complex64, Word)>,
}

impl FreePolynomial {
    /// Merges repeated words and drops zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (Complex64, Word)>) -> Self {
        let mut acc: BTreeMap<Word, Complex64> = BTreeMap::new();
        for (a, w) in terms {
            *acc.entry(w).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        FreePolynomial {
            terms: acc
                .into_iter()
                .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
                .map(|(w, a)| (a, w))
                .collect(),
        }
    }

    /// `g_i g_j - g_j g_i`.
    pub fn commutator(i: usize, j: usize) -> Self {
        Self::new([
            (Complex64::new(1.0, 0.0), Word::generator(i).concat(&Word::generator(j))),
            (Complex64::new(-1.0, 0.0), Word::generator(j).concat(&Word::generator(i))),
        ])
    }

    /// `g_j g_i - lambda g_i g_j`.
    pub fn lambda_relation(j: usize, i: usize, lambda: Complex64) -> Self {
        Self::new([
            (Complex64::new(1.0, 0.0), Word::generator(j).concat(&Word::generator(i))),
            (-lambda, Word::generator(i).concat(&Word::generator(j))),
        ])
    }

    pub fn terms(&self) -> &[(Complex64, Word)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degree().is_some()
    }

    /// Common length of all words, `None` if they differ or `p = 0`.
    pub fn degree(&self) -> Option<usize> {
        let d = self.terms.first()?.1.len();
        self.terms.iter().all(|(_, w)| w.len() == d).then_some(d)
    }

    /// `omega * p * beta`.
    pub fn sandwich(&self, omega: &Word, beta: &Word) -> FreePolynomial {
        FreePolynomial {
            terms: self
                .terms
                .iter()
                .map(|(a, w)| (*a, omega.concat(w).concat(beta)))
                .collect(),
        }
    }

    pub fn max_letter(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.max_letter()).max().unwrap_or(0)
    }
}

impl fmt::Display for FreePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (a, w)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({}{:+}i)[{}]", a.re, a.im, w)?;
        }
        Ok(())
    }
}

/// Every `(omega, beta)` for which some `omega alpha_j beta` lies in `sigma`.
/// Other translates meet `sigma` trivially.
pub(crate) fn touching_translates(sigma: &AdmissibleSet, p: &FreePolynomial) -> BTreeSet<(Word, Word)> {
    let mut out = BTreeSet::new();
    for (_, alpha) in p.terms() {
        let a = alpha.raw();
        for s in sigma.words() {
            let raw = s.raw();
            if raw.len() < a.len() {
                continue;
            }
            for start in 0..=raw.len() - a.len() {
                if &raw[start..start + a.len()] == a {
                    out.insert((
                        Word(raw[..start].to_vec()),
                        Word(raw[start + a.len()..].to_vec()),
                    ));
                }
            }
        }
    }
    out
}

/// True when every translate `{omega alpha_j beta}` of `p` lies entirely
/// inside or entirely outside `sigma`.
pub fn is_compatible(sigma: &AdmissibleSet, p: &FreePolynomial) -> bool {
    touching_translates(sigma, p).iter().all(|(omega, beta)| {
        p.terms()
            .iter()
            .all(|(_, alpha)| sigma.contains(&omega.concat(alpha).concat(beta)))
    })
}

pub fn is_admissible_pair(sigma: &AdmissibleSet, polys: &[FreePolynomial]) -> bool {
    sigma.is_suffix_closed() && polys.iter().all(|p| is_compatible(sigma, p))
}

const IDEAL_PIVOT_TOL: f64 = 1e-10;

/// A linearly independent subset of `{omega p beta}` spanning the degree-`degree`
/// component of the two-sided ideal generated by homogeneous `polys`.
pub fn ideal_span_basis(polys: &[FreePolynomial], degree: usize, n: usize) -> Result<Vec<FreePolynomial>> {
    let mut reduced: Vec<(Word, BTreeMap<Word, Complex64>)> = Vec::new();
    let mut basis = Vec::new();
    for p in polys {
        let e = p.degree().ok_or(Error::NotHomogeneous)?;
        if e > degree || p.is_zero() {
            continue;
        }
        let free = degree - e;
        for left in 0..=free {
            for omega in words_of_length(n, left) {
                for beta in words_of_length(n, free - left) {
                    let cand = p.sandwich(&omega, &beta);
                    let mut v: BTreeMap<Word, Complex64> =
                        cand.terms().iter().map(|(a, w)| (w.clone(), *a)).collect();
                    for (pivot, row) in &reduced {
                        if let Some(&c) = v.get(pivot) {
                            for (w, a) in row {
                                *v.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0)) -= c * a;
                            }
                        }
                    }
                    let best = v
                        .iter()
                        .map(|(w, a)| (w, a.norm()))
                        .max_by(|x, y| x.1.total_cmp(&y.1));
                    if let Some((w, mag)) = best {
                        if mag > IDEAL_PIVOT_TOL {
                            let pivot = w.clone();
                            let scale = v[&pivot].inv();
                            let row = v
                                .into_iter()
                                .filter(|(_, a)| a.norm() > 0.0)
                                .map(|(w, a)| (w, a * scale))
                                .collect();
                            reduced.push((pivot, row));
                            basis.push(cand);
                        }
                    }
                }
            }
        }
    }
    Ok(basis)
}

/// Human-readable key for a factorization pair, `"alpha|beta"`.
pub fn pair_key(alpha: &Word, beta: &Word) -> String {
    let mut s = alpha.to_string();
    s.push('|');
    s.push_str(&beta.to_string());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn prefix_quotient_cases() {
        assert_eq!(prefix_quotient(&w("1.2.1"), &w("1.2")), Some(w("1")));
        assert_eq!(prefix_quotient(&w("1"), &w("1")), Some(Word::empty()));
        assert_eq!(prefix_quotient(&w("1.2"), &w("2")), None);
    }

    #[test]
    fn suffix_closure_cases() {
        let s = AdmissibleSet::suffix_closure(2, [w("1.2")]).unwrap();
        assert_eq!(s.words(), &[Word::empty(), w("2"), w("1.2")]);
        let s = AdmissibleSet::suffix_closure(2, [Word::empty()]).unwrap();
        assert_eq!(s.len(), 1);
        let t = AdmissibleSet::suffix_closure(2, words_up_to(2, 2)).unwrap();
        assert_eq!(t.len(), 7);
        assert_eq!(t, AdmissibleSet::truncation(2, 2));
    }

    #[test]
    fn explicit_set_must_be_suffix_closed() {
        assert!(AdmissibleSet::new(2, [Word::empty(), w("1.2")]).is_err());
        assert!(AdmissibleSet::new(2, [Word::empty(), w("2"), w("1.2")]).is_ok());
        assert!(AdmissibleSet::new(1, [Word::empty(), w("2")]).is_err());
    }

    #[test]
    fn lambda_set_cases() {
        let s = AdmissibleSet::truncation(1, 0);
        assert_eq!(build_lambda_set(&s), vec![(Word::empty(), Word::empty())]);
        let s = AdmissibleSet::truncation(1, 1);
        assert_eq!(
            build_lambda_set(&s),
            vec![
                (Word::empty(), Word::empty()),
                (Word::empty(), w("1")),
                (w("1"), Word::empty())
            ]
        );
        assert_eq!(AdmissibleSet::truncation(2, 2).pairs().len(), 17);
    }

    #[test]
    fn abelianization() {
        assert_eq!(abelianize(&w("2.1.2"), 2), MultiIndex(vec![1, 2]));
        assert_eq!(abelianize(&Word::empty(), 3), MultiIndex::zero(3));
        assert_eq!(multiindex_to_word(&MultiIndex(vec![1, 2])), w("1.2.2"));
        assert_eq!(multiindex_to_word(&MultiIndex(vec![0, 0])), Word::empty());
    }

    #[test]
    fn sigma_pi_cases() {
        let s = sigma_pi(2, &[MultiIndex(vec![0, 0])], 100).unwrap();
        assert_eq!(s.words(), &[Word::empty()]);
        let box11 = [
            MultiIndex(vec![0, 0]),
            MultiIndex(vec![1, 0]),
            MultiIndex(vec![0, 1]),
            MultiIndex(vec![1, 1]),
        ];
        let s = sigma_pi(2, &box11, 100).unwrap();
        assert_eq!(
            s.words(),
            &[Word::empty(), w("1"), w("2"), w("1.2"), w("2.1")]
        );
        let bad = [MultiIndex(vec![0, 0]), MultiIndex(vec![1, 1])];
        assert!(matches!(sigma_pi(2, &bad, 100), Err(Error::NotAdmissible(_))));
        assert!(matches!(
            sigma_pi(2, &box11, 4),
            Err(Error::SigmaTooLarge { size: 5, cap: 4 })
        ));
    }

    #[test]
    fn signature_cases() {
        let q = Complex64::new(0.3, -0.7);
        let mut lam = LambdaSpec::ones(2);
        lam.set(2, 1, q).unwrap();
        assert_eq!(signature(&w("2.1"), &lam).unwrap(), q);
        assert_eq!(signature(&w("1.2"), &lam).unwrap(), Complex64::new(1.0, 0.0));
        assert!((signature(&w("2.2.1"), &lam).unwrap() - q * q).norm() < 1e-15);
        lam.set(2, 1, Complex64::new(0.0, 0.0)).unwrap();
        assert!(matches!(
            signature(&w("2.1"), &lam),
            Err(Error::ZeroLambda { j: 2, i: 1 })
        ));
    }

    #[test]
    fn compatibility_cases() {
        let comm = FreePolynomial::commutator(1, 2);
        assert!(is_compatible(&AdmissibleSet::truncation(2, 2), &comm));
        let partial =
            AdmissibleSet::new(2, [Word::empty(), w("1"), w("2"), w("1.2")]).unwrap();
        assert!(!is_compatible(&partial, &comm));
        assert!(is_compatible(&AdmissibleSet::truncation(2, 0), &comm));

        let gen = AdmissibleSet::suffix_closure(2, [w("1.2")]).unwrap();
        assert!(!is_admissible_pair(&gen, core::slice::from_ref(&comm)));
        assert!(is_admissible_pair(&AdmissibleSet::truncation(2, 3), &[]));
        assert!(is_admissible_pair(&AdmissibleSet::truncation(2, 3), &[comm]));
    }

    #[test]
    fn ideal_basis_sizes() {
        let comm = [FreePolynomial::commutator(1, 2)];
        assert_eq!(ideal_span_basis(&comm, 2, 2).unwrap().len(), 1);
        assert!(ideal_span_basis(&comm, 0, 2).unwrap().is_empty());
        assert_eq!(ideal_span_basis(&comm, 3, 2).unwrap().len(), 4);
        let mixed = FreePolynomial::new([
            (Complex64::new(1.0, 0.0), w("1")),
            (Complex64::new(1.0, 0.0), w("1.2")),
        ]);
        assert!(matches!(
            ideal_span_basis(&[mixed], 2, 2),
            Err(Error::NotHomogeneous)
        ));
    }

    #[test]
    fn polynomial_normalizes() {
        let p = FreePolynomial::new([
            (Complex64::new(1.0, 0.0), w("1.2")),
            (Complex64::new(-1.0, 0.0), w("1.2")),
            (Complex64::new(2.0, 0.0), w("2.1")),
        ]);
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.degree(), Some(2));
    }

    #[test]
    fn word_key_roundtrip() {
        for s in ["", "1", "1.2.1", "3.10"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert!("1..2".parse::<Word>().is_err());
        assert!("0".parse::<Word>().is_err());
    }
}
