//! Name resolution for one recursion level.
//!
//! An operand names either a value defined earlier in the schedule or a slot,
//! meaning whatever the slot currently holds. Both the executor and the
//! symbolic validator walk schedules through a `Frame`.

use std::collections::HashMap;

use super::Slot;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Resolve {
    Ok(Slot),
    /// The value's slot has been written or destroyed since.
    Stale { slot: Slot },
    /// A slot named directly holds garbage.
    Uninitialized { slot: Slot },
    Undefined,
}

#[derive(Clone, Debug)]
struct Cell<T> {
    gen: u64,
    content: Option<T>,
}

#[derive(Clone, Debug)]
pub(crate) struct Frame<T> {
    cells: Vec<Cell<T>>,
    names: HashMap<String, (Slot, u64)>,
    next_gen: u64,
}

impl<T> Frame<T> {
    /// `init(slot)` gives the initial content; `None` marks garbage.
    pub fn new(mut init: impl FnMut(Slot) -> Option<T>) -> Self {
        let cells = Slot::ALL.iter().map(|&s| Cell { gen: 0, content: init(s) }).collect();
        Frame { cells, names: HashMap::new(), next_gen: 1 }
    }

    pub fn resolve(&self, name: &str) -> Resolve {
        if let Some(&(slot, gen)) = self.names.get(name) {
            let cell = &self.cells[slot.index()];
            return if cell.gen == gen && cell.content.is_some() { Resolve::Ok(slot) } else { Resolve::Stale { slot } };
        }
        match Slot::parse(name) {
            Some(slot) => {
                let cell = &self.cells[slot.index()];
                if cell.content.is_some() {
                    Resolve::Ok(slot)
                } else {
                    Resolve::Uninitialized { slot }
                }
            }
            None => Resolve::Undefined,
        }
    }

    pub fn content(&self, slot: Slot) -> Option<&T> {
        self.cells[slot.index()].content.as_ref()
    }

    pub fn define(&mut self, name: &str, slot: Slot, content: T) {
        let gen = self.bump();
        self.cells[slot.index()] = Cell { gen, content: Some(content) };
        self.names.insert(name.to_string(), (slot, gen));
    }

    /// Marks a slot as holding garbage.
    pub fn clobber(&mut self, slot: Slot) {
        let gen = self.bump();
        self.cells[slot.index()] = Cell { gen, content: None };
    }

    fn bump(&mut self) -> u64 {
        let g = self.next_gen;
        self.next_gen += 1;
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stale_and_initial_resolution() {
        let mut f: Frame<u8> = Frame::new(|s| (s != Slot::X).then_some(0));
        assert_eq!(f.resolve("A11"), Resolve::Ok(Slot::A11));
        assert_eq!(f.resolve("X"), Resolve::Uninitialized { slot: Slot::X });
        assert_eq!(f.resolve("S1"), Resolve::Undefined);
        f.define("S1", Slot::X, 1);
        assert_eq!(f.resolve("S1"), Resolve::Ok(Slot::X));
        f.define("S2", Slot::X, 2);
        assert_eq!(f.resolve("S1"), Resolve::Stale { slot: Slot::X });
        f.define("T1", Slot::A11, 3);
        assert_eq!(f.resolve("A11"), Resolve::Ok(Slot::A11));
        assert_eq!(f.content(Slot::A11), Some(&3));
        f.clobber(Slot::X);
        assert_eq!(f.resolve("X"), Resolve::Uninitialized { slot: Slot::X });
        assert_eq!(f.resolve("S2"), Resolve::Stale { slot: Slot::X });
    }
}
