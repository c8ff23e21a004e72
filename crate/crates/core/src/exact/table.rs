use std::collections::HashMap;

/// Either side of a cut: a free letter or a substring that must itself be a
/// member of the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Letter(u32),
    Member(u32),
}

/// Distinct substrings of length >= 2, numbered longest first and then by
/// leftmost occurrence, so id 0 is the word itself and the lowest unresolved
/// id is always a longest unresolved member.
pub(crate) struct SubstringTable {
    pub codes: Vec<u32>,
    /// Leftmost occurrence of each member.
    pub start: Vec<u32>,
    pub len: Vec<u32>,
    /// Member id of `codes[i..j]`, stored at `i * (n + 1) + j` for `j - i >= 2`.
    id_at: Vec<u32>,
    pub words: usize,
}

impl SubstringTable {
    pub fn new(codes: Vec<u32>) -> Self {
        let n = codes.len();
        let mut first: HashMap<&[u32], u32> = HashMap::new();
        let mut order: Vec<(u32, u32)> = Vec::new();
        for len in (2..=n).rev() {
            for i in 0..=n - len {
                let s = &codes[i..i + len];
                if !first.contains_key(s) {
                    first.insert(s, order.len() as u32);
                    order.push((i as u32, len as u32));
                }
            }
        }
        let mut id_at = vec![u32::MAX; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in i + 2..=n {
                id_at[i * (n + 1) + j] = first[&codes[i..j]];
            }
        }
        let (start, len) = order.into_iter().unzip();
        let members = n * n.saturating_sub(1) / 2;
        drop(first);
        Self {
            words: members.div_ceil(64).max(1),
            codes,
            start,
            len,
            id_at,
        }
    }

    pub fn member_count(&self) -> usize {
        self.start.len()
    }

    pub fn part(&self, i: usize, j: usize) -> Part {
        if j - i == 1 {
            Part::Letter(self.codes[i])
        } else {
            Part::Member(self.id_at[i * (self.codes.len() + 1) + j])
        }
    }

    /// The two parts of member `id` when cut after `cut` symbols.
    pub fn split(&self, id: u32, cut: u32) -> [Part; 2] {
        let s = self.start[id as usize] as usize;
        let l = self.len[id as usize] as usize;
        let c = cut as usize;
        [self.part(s, s + c), self.part(s + c, s + l)]
    }
}
