use crate::logic::Var;

/// Dense bitset over 1-based variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub(crate) struct VarSet {
    words: Vec<u64>,
}

impl VarSet {
    pub fn new() -> Self {
        VarSet::default()
    }

    pub fn singleton(v: Var) -> Self {
        let mut s = VarSet::new();
        s.insert(v);
        s
    }

    pub fn insert(&mut self, v: Var) {
        let (w, b) = (v.slot() / 64, v.slot() % 64);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn contains(&self, v: Var) -> bool {
        let (w, b) = (v.slot() / 64, v.slot() % 64);
        self.words.get(w).is_some_and(|x| x >> b & 1 == 1)
    }

    pub fn union_with(&mut self, other: &VarSet) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    /// Some variable in both sets.
    pub fn first_common(&self, other: &VarSet) -> Option<Var> {
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find_map(|(i, (a, b))| {
                let x = a & b;
                (x != 0).then(|| Var::new((i * 64) as u32 + x.trailing_zeros() + 1))
            })
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = Var> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64)
                .filter(move |b| w >> b & 1 == 1)
                .map(move |b| Var::new((i * 64 + b) as u32 + 1))
        })
    }

    /// Variables of `self` missing from `other`.
    pub fn difference<'a>(&'a self, other: &'a VarSet) -> impl Iterator<Item = Var> + 'a {
        self.iter().filter(move |v| !other.contains(*v))
    }
}

impl FromIterator<Var> for VarSet {
    fn from_iter<I: IntoIterator<Item = Var>>(iter: I) -> Self {
        let mut s = VarSet::new();
        for v in iter {
            s.insert(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_ops() {
        let a: VarSet = [1, 3, 70].into_iter().map(Var::new).collect();
        let b: VarSet = [70, 2].into_iter().map(Var::new).collect();
        assert_eq!(a.len(), 3);
        assert_eq!(a.first_common(&b), Some(Var::new(70)));
        assert_eq!(a.difference(&b).collect::<Vec<_>>(), vec![Var::new(1), Var::new(3)]);
        let mut u = a.clone();
        u.union_with(&b);
        assert_eq!(u.len(), 4);
        assert!(u.contains(Var::new(2)) && !u.contains(Var::new(4)));
    }
}
