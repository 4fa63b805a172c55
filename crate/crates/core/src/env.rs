/// Typing context indexed by de Bruijn index: index 0 is the most recently bound variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Env<T> {
    entries: Vec<T>,
}

impl<T> Env<T> {
    pub fn new() -> Self {
        Env {
            entries: Vec::new(),
        }
    }

    /// Builds an environment from outermost to innermost binding.
    pub fn from_outermost(entries: Vec<T>) -> Self {
        Env { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, index: usize) -> Option<&T> {
        let n = self.entries.len();
        if index < n {
            self.entries.get(n - 1 - index)
        } else {
            None
        }
    }

    pub fn push(&mut self, entry: T) {
        self.entries.push(entry);
    }

    pub fn pop(&mut self) -> Option<T> {
        self.entries.pop()
    }

    /// Returns a copy extended with `entry` as index 0.
    pub fn extended(&self, entry: T) -> Self
    where
        T: Clone,
    {
        let mut env = self.clone();
        env.push(entry);
        env
    }

    /// Entries from outermost to innermost.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &T> + ExactSizeIterator {
        self.entries.iter()
    }

    /// `(index, entry)` pairs, innermost first.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, &T)> {
        self.entries.iter().rev().enumerate()
    }
}
