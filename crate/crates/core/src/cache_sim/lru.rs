//! Fully associative LRU set of cache lines with dirty bits.

use rustc_hash::FxHashMap;

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    line: u64,
    prev: u32,
    next: u32,
    dirty: bool,
    tag: u16,
}

/// Exact LRU over line numbers, O(1) per operation.
#[derive(Debug, Clone)]
pub struct LruCache {
    capacity: usize,
    map: FxHashMap<u64, u32>,
    nodes: Vec<Node>,
    free: Vec<u32>,
    /// Most recently used.
    head: u32,
    /// Least recently used.
    tail: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evicted {
    pub line: u64,
    pub dirty: bool,
    /// Stream tag of the access that installed the line.
    pub tag: u16,
}

impl LruCache {
    pub fn new(capacity_lines: usize) -> Self {
        LruCache {
            capacity: capacity_lines,
            map: FxHashMap::default(),
            nodes: Vec::new(),
            free: Vec::new(),
            head: NIL,
            tail: NIL,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn contains(&self, line: u64) -> bool {
        self.map.contains_key(&line)
    }

    /// Touch `line`. Returns whether it hit and what was evicted to make
    /// room on a miss. With zero capacity nothing is retained and the line
    /// itself is reported as evicted.
    pub fn access(&mut self, line: u64, dirty: bool, tag: u16) -> (bool, Option<Evicted>) {
        if let Some(&idx) = self.map.get(&line) {
            self.nodes[idx as usize].dirty |= dirty;
            self.move_to_front(idx);
            return (true, None);
        }
        (false, self.insert(line, dirty, tag))
    }

    fn insert(&mut self, line: u64, dirty: bool, tag: u16) -> Option<Evicted> {
        if self.capacity == 0 {
            return Some(Evicted { line, dirty, tag });
        }
        let mut evicted = None;
        if self.map.len() >= self.capacity {
            evicted = self.pop_lru();
        }
        let node = Node {
            line,
            prev: NIL,
            next: self.head,
            dirty,
            tag,
        };
        let idx = match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        if self.head != NIL {
            self.nodes[self.head as usize].prev = idx;
        }
        self.head = idx;
        if self.tail == NIL {
            self.tail = idx;
        }
        self.map.insert(line, idx);
        evicted
    }

    fn pop_lru(&mut self) -> Option<Evicted> {
        if self.tail == NIL {
            return None;
        }
        let idx = self.tail;
        self.unlink(idx);
        let node = &self.nodes[idx as usize];
        let ev = Evicted {
            line: node.line,
            dirty: node.dirty,
            tag: node.tag,
        };
        self.map.remove(&ev.line);
        self.free.push(idx);
        Some(ev)
    }

    fn unlink(&mut self, idx: u32) {
        let (prev, next) = {
            let n = &self.nodes[idx as usize];
            (n.prev, n.next)
        };
        if prev != NIL {
            self.nodes[prev as usize].next = next;
        } else {
            self.head = next;
        }
        if next != NIL {
            self.nodes[next as usize].prev = prev;
        } else {
            self.tail = prev;
        }
    }

    fn move_to_front(&mut self, idx: u32) {
        if self.head == idx {
            return;
        }
        self.unlink(idx);
        let n = &mut self.nodes[idx as usize];
        n.prev = NIL;
        n.next = self.head;
        if self.head != NIL {
            self.nodes[self.head as usize].prev = idx;
        }
        self.head = idx;
        if self.tail == NIL {
            self.tail = idx;
        }
    }

    /// Remove every line, returning the dirty ones from LRU to MRU.
    pub fn drain_dirty(&mut self) -> Vec<Evicted> {
        let mut out = Vec::new();
        let mut idx = self.tail;
        while idx != NIL {
            let n = &self.nodes[idx as usize];
            if n.dirty {
                out.push(Evicted {
                    line: n.line,
                    dirty: true,
                    tag: n.tag,
                });
            }
            idx = n.prev;
        }
        self.map.clear();
        self.nodes.clear();
        self.free.clear();
        self.head = NIL;
        self.tail = NIL;
        out
    }

    /// Lines from MRU to LRU.
    pub fn lines(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len());
        let mut idx = self.head;
        while idx != NIL {
            out.push(self.nodes[idx as usize].line);
            idx = self.nodes[idx as usize].next;
        }
        out
    }
}
