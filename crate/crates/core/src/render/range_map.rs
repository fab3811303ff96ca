// Copyright (c) The symslice Contributors
// SPDX-License-Identifier: Apache-2.0

//! Byte ranges of the source mapped to emission directives.

use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Directive {
    /// Copy the range verbatim.
    Emit,
    Delete,
    Replace(String),
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("range {new:?} partially overlaps {existing:?}")]
pub struct RangeConflict {
    pub new: (usize, usize),
    pub existing: (usize, usize),
}

/// Directives keyed by `(start, end)`. Any two ranges are disjoint or
/// nested; when nested, the outer directive decides the output.
#[derive(Clone, Debug, Default)]
pub struct RangeMap {
    entries: BTreeMap<(usize, usize), Directive>,
}

impl RangeMap {
    pub fn new() -> Self {
        RangeMap::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds a directive. Re-inserting an existing range overwrites it.
    pub fn insert(&mut self, start: usize, end: usize, d: Directive) -> Result<(), RangeConflict> {
        assert!(start <= end, "inverted range {start}..{end}");
        for &(s, e) in self.entries.keys() {
            let disjoint = e <= start || end <= s;
            let nested = (s <= start && end <= e) || (start <= s && e <= end);
            if !disjoint && !nested {
                return Err(RangeConflict { new: (start, end), existing: (s, e) });
            }
        }
        self.entries.insert((start, end), d);
        Ok(())
    }

    /// Moves every directive of `other` into `self`.
    pub fn merge(&mut self, other: RangeMap) -> Result<(), RangeConflict> {
        for ((s, e), d) in other.entries {
            self.insert(s, e, d)?;
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &Directive)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    /// True when no two ranges partially overlap.
    pub fn is_well_nested(&self) -> bool {
        let keys: Vec<_> = self.entries.keys().copied().collect();
        keys.iter().enumerate().all(|(i, &(s1, e1))| {
            keys[i + 1..].iter().all(|&(s2, e2)| e1 <= s2 || e2 <= s1 || (s1 <= s2 && e2 <= e1) || (s2 <= s1 && e1 <= e2))
        })
    }

    /// Text of `src[start..end]` with the directives applied.
    pub fn apply(&self, src: &str, start: usize, end: usize) -> String {
        let mut out = String::with_capacity(end - start);
        let mut cursor = start;
        // Outer ranges first: by start, then longest.
        // Deletions reaching past the window are clipped to it.
        let mut order: Vec<((usize, usize), &Directive)> = self
            .entries
            .iter()
            .filter_map(|(&(s, e), d)| match d {
                Directive::Delete if s < end && start < e => Some(((s.max(start), e.min(end)), d)),
                _ if start <= s && e <= end => Some(((s, e), d)),
                _ => None,
            })
            .collect();
        order.sort_by_key(|((s, e), _)| (*s, std::cmp::Reverse(*e)));
        for ((s, e), d) in order {
            if s < cursor {
                continue;
            }
            out.push_str(&src[cursor..s]);
            match d {
                Directive::Emit => out.push_str(&src[s..e]),
                Directive::Delete => {}
                Directive::Replace(text) => out.push_str(text),
            }
            cursor = e;
        }
        out.push_str(&src[cursor..end]);
        out
    }
}
