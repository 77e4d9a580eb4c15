use std::fmt;

/// A set of true facts, packed as a fixed-size bitset over the fact universe.
///
/// Two states over the same universe are equal iff the same facts are set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    words: Box<[u64]>,
}

impl State {
    pub fn empty(num_facts: usize) -> Self {
        State { words: vec![0; num_facts.div_ceil(64)].into_boxed_slice() }
    }

    pub fn from_facts(num_facts: usize, facts: impl IntoIterator<Item = usize>) -> Self {
        let mut s = State::empty(num_facts);
        for f in facts {
            s.insert(f);
        }
        s
    }

    #[inline]
    pub fn contains(&self, fact: usize) -> bool {
        self.words
            .get(fact / 64)
            .is_some_and(|w| w & (1 << (fact % 64)) != 0)
    }

    #[inline]
    pub(crate) fn insert(&mut self, fact: usize) {
        self.words[fact / 64] |= 1 << (fact % 64);
    }

    #[inline]
    pub(crate) fn remove(&mut self, fact: usize) {
        self.words[fact / 64] &= !(1 << (fact % 64));
    }

    pub fn contains_all(&self, facts: &[usize]) -> bool {
        facts.iter().all(|&f| self.contains(f))
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Set facts in increasing id order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + bit)
            })
        })
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
