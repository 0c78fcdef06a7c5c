//! Deterministic, context-free L-systems with per-symbol generation tags.
//!
//! Rewriting is parallel. Tags follow an inheritance rule: the first symbol of a
//! rule body keeps its parent's generation and every later body symbol gets
//! the parent's generation plus one. Under `A -> AB, B -> A` this gives
//! `A0 B1 A1 A1 B2 A1 B2 A2` at depth 4, so deeper material is the material
//! introduced by later rewrites.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::Rng;

/// One symbol of an expanded string with its generation tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedSymbol {
    pub symbol: char,
    pub generation: u32,
}

/// Expansion result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolString {
    pub symbols: Vec<TaggedSymbol>,
    pub depth: u32,
}

impl SymbolString {
    pub fn from_chars(s: &str) -> Self {
        let symbols = s.chars().map(|symbol| TaggedSymbol { symbol, generation: 0 }).collect();
        Self { symbols, depth: 0 }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn chars(&self) -> Vec<char> {
        self.symbols.iter().map(|t| t.symbol).collect()
    }

    pub fn generations(&self) -> Vec<u32> {
        self.symbols.iter().map(|t| t.generation).collect()
    }

    /// Tags written as `A0 B1 A1 ...`.
    pub fn tagged(&self) -> String {
        self.symbols.iter().map(|t| format!("{}{}", t.symbol, t.generation)).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.symbols {
            write!(f, "{}", t.symbol)?;
        }
        Ok(())
    }
}

/// Config form: `{"alphabet": "AB", "axiom": "A", "rules": {"A": "AB", "B": "A"}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarSpec {
    pub alphabet: String,
    pub axiom: String,
    #[serde(default)]
    pub rules: BTreeMap<char, String>,
}

/// Validated grammar with interned symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GrammarSpec", into = "GrammarSpec")]
pub struct Grammar {
    alphabet: Vec<char>,
    axiom: Vec<usize>,
    rules: Vec<Option<Vec<usize>>>,
}

impl TryFrom<GrammarSpec> for Grammar {
    type Error = Error;

    fn try_from(spec: GrammarSpec) -> Result<Self> {
        let alphabet: Vec<char> = spec.alphabet.chars().collect();
        let mut index = HashMap::new();
        for (i, &c) in alphabet.iter().enumerate() {
            if index.insert(c, i).is_some() {
                return Err(Error::InvalidGrammar(format!("symbol {c:?} listed twice in alphabet")));
            }
        }
        let intern = |c: char, what: &str| {
            index.get(&c).copied().ok_or_else(|| Error::InvalidGrammar(format!("{what} symbol {c:?} is not in the alphabet")))
        };
        let axiom = spec.axiom.chars().map(|c| intern(c, "axiom")).collect::<Result<Vec<_>>>()?;
        let mut rules = vec![None; alphabet.len()];
        for (head, body) in &spec.rules {
            let h = intern(*head, "rule head")?;
            rules[h] = Some(body.chars().map(|c| intern(c, "rule body")).collect::<Result<Vec<_>>>()?);
        }
        Ok(Self { alphabet, axiom, rules })
    }
}

impl From<Grammar> for GrammarSpec {
    fn from(g: Grammar) -> Self {
        let render = |ids: &[usize]| ids.iter().map(|&i| g.alphabet[i]).collect::<String>();
        let rules = g
            .rules
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().map(|body| (g.alphabet[i], render(body))))
            .collect();
        GrammarSpec { alphabet: g.alphabet.iter().collect(), axiom: render(&g.axiom), rules }
    }
}

impl Grammar {
    pub fn new(alphabet: &str, axiom: &str, rules: &[(char, &str)]) -> Result<Self> {
        GrammarSpec {
            alphabet: alphabet.to_string(),
            axiom: axiom.to_string(),
            rules: rules.iter().map(|(h, b)| (*h, b.to_string())).collect(),
        }
        .try_into()
    }

    /// `A -> AB, B -> A` from axiom `A`.
    pub fn fibonacci() -> Self {
        Self::new("AB", "A", &[('A', "AB"), ('B', "A")]).expect("fibonacci grammar is valid")
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    /// Applies parallel rewriting `depth` times to the axiom.
    pub fn expand(&self, depth: u32) -> Result<SymbolString> {
        let mut cur: Vec<(usize, u32)> = self.axiom.iter().map(|&s| (s, 0)).collect();
        for _ in 0..depth {
            let mut next = Vec::with_capacity(cur.len() * 2);
            for &(s, g) in &cur {
                match &self.rules[s] {
                    Some(body) => {
                        for (k, &b) in body.iter().enumerate() {
                            next.push((b, if k == 0 { g } else { g + 1 }));
                        }
                    }
                    None => next.push((s, g)),
                }
            }
            cur = next;
        }
        let symbols = cur.into_iter().map(|(s, generation)| TaggedSymbol { symbol: self.alphabet[s], generation }).collect();
        Ok(SymbolString { symbols, depth })
    }
}

/// Uniform random permutation of `s` with the same symbol multiset. Tags travel
/// with their symbols.
pub fn shuffle_preserving_counts(s: &SymbolString, seed: u64) -> SymbolString {
    let mut out = s.clone();
    Rng::new(seed).shuffle(&mut out.symbols);
    out
}

pub fn symbol_counts(s: &SymbolString) -> BTreeMap<char, usize> {
    let mut counts = BTreeMap::new();
    for t in &s.symbols {
        *counts.entry(t.symbol).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fib(n: usize) -> usize {
        let (mut a, mut b) = (1, 1);
        for _ in 2..n {
            (a, b) = (b, a + b);
        }
        if n <= 2 {
            1
        } else {
            b
        }
    }

    #[test]
    fn depth_four_string() {
        let s = Grammar::fibonacci().expand(4).unwrap();
        assert_eq!(s.to_string(), "ABAABABA");
        assert_eq!(s.tagged(), "A0 B1 A1 A1 B2 A1 B2 A2");
    }

    #[test]
    fn lengths_are_fibonacci() {
        let g = Grammar::fibonacci();
        for n in 0..=12u32 {
            assert_eq!(g.expand(n).unwrap().len(), fib(n as usize + 2), "depth {n}");
        }
    }

    #[test]
    fn counts_by_depth() {
        let g = Grammar::fibonacci();
        let expect = [(4, 5, 3), (5, 8, 5), (6, 13, 8), (7, 21, 13)];
        for (d, a, b) in expect {
            let c = symbol_counts(&g.expand(d).unwrap());
            assert_eq!((c[&'A'], c[&'B']), (a, b));
        }
    }

    #[test]
    fn depth_zero_is_axiom() {
        let g = Grammar::new("XY", "XYX", &[('X', "YY")]).unwrap();
        let s = g.expand(0).unwrap();
        assert_eq!(s.to_string(), "XYX");
        assert!(s.generations().iter().all(|&g| g == 0));
    }

    #[test]
    fn generation_never_exceeds_depth() {
        let g = Grammar::fibonacci();
        for d in 0..10 {
            assert!(g.expand(d).unwrap().generations().iter().all(|&x| x <= d));
        }
    }

    #[test]
    fn unknown_axiom_symbol() {
        assert!(matches!(Grammar::new("AB", "C", &[]), Err(Error::InvalidGrammar(_))));
        assert!(matches!(Grammar::new("AB", "A", &[('A', "AZ")]), Err(Error::InvalidGrammar(_))));
    }

    #[test]
    fn json_round_trip() {
        let g: Grammar = serde_json::from_str(r#"{"alphabet":"AB","axiom":"A","rules":{"A":"AB","B":"A"}}"#).unwrap();
        assert_eq!(g, Grammar::fibonacci());
        let back: Grammar = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn empty_counts() {
        assert!(symbol_counts(&SymbolString::from_chars("")).is_empty());
    }

    #[test]
    fn single_symbol_shuffle() {
        let s = SymbolString::from_chars("A");
        assert_eq!(shuffle_preserving_counts(&s, 3), s);
    }

    proptest! {
        #[test]
        fn shuffle_keeps_multiset(
            bodies in proptest::collection::vec("[ABC]{1,3}", 3),
            depth in 0u32..7,
            seed in any::<u64>(),
        ) {
            let g = Grammar::new("ABC", "A", &[('A', &bodies[0]), ('B', &bodies[1]), ('C', &bodies[2])]).unwrap();
            let s = g.expand(depth).unwrap();
            let t = shuffle_preserving_counts(&s, seed);
            prop_assert_eq!(symbol_counts(&s), symbol_counts(&t));
            prop_assert_eq!(t.clone(), shuffle_preserving_counts(&s, seed));
        }

        #[test]
        fn expand_is_deterministic(depth in 0u32..14) {
            let g = Grammar::fibonacci();
            prop_assert_eq!(g.expand(depth).unwrap(), g.expand(depth).unwrap());
        }
    }
}
