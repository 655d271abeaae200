//! Channel interning.
//!
//! Feature channels are symbolic names at the configuration boundary
//! ("hue", "alcohol", "c3") but every hot-path structure stores compact
//! `u16` indices instead. The table is built once per experiment from the
//! union of all dataset channels and never grows afterwards.
//!
//! Names are interned in lexicographic order, so comparing index lists is
//! the same as comparing name lists. Subset tie-breaking relies on this.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelTable {
    names: Vec<String>,
}

impl ChannelTable {
    /// Builds a table from any iterator of names; duplicates collapse.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut names: Vec<String> = names.into_iter().map(|s| s.as_ref().to_string()).collect();
        names.sort_unstable();
        names.dedup();
        assert!(names.len() <= u16::MAX as usize + 1, "too many channels");
        ChannelTable { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Result<u16, Error> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .map(|i| i as u16)
            .map_err(|_| Error::UnknownChannel(name.to_string()))
    }

    pub fn name(&self, index: u16) -> &str {
        &self.names[index as usize]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|s| s.as_str())
    }

    /// Interns a sorted, deduplicated index list for a batch of names.
    pub fn indices<'a, I>(&self, names: I) -> Result<Vec<u16>, Error>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out: Vec<u16> = names
            .into_iter()
            .map(|n| self.index(n))
            .collect::<Result<_, _>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Intersects two sorted index slices.
pub(crate) fn intersect_sorted(a: &[u16], b: &[u16]) -> Vec<u16> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn interning_is_lexicographic_and_stable() {
        let table = ChannelTable::from_names(["hue", "area", "hue", "zpos"]);
        assert_eq!(table.len(), 3);
        assert_eq!(table.name(0), "area");
        assert_eq!(table.name(1), "hue");
        assert_eq!(table.name(2), "zpos");
        assert_eq!(table.index("hue").unwrap(), 1);
        assert!(matches!(table.index("saturation"), Err(Error::UnknownChannel(_))));
    }

    #[test]
    fn numeric_suffixes_sort_as_strings() {
        // "c10" < "c2" in lexicographic order; index order must agree.
        let table = ChannelTable::from_names(["c2", "c10", "c1"]);
        assert_eq!(table.name(0), "c1");
        assert_eq!(table.name(1), "c10");
        assert_eq!(table.name(2), "c2");
    }

    #[test]
    fn intersect_is_ordered_and_exact() {
        assert_eq!(intersect_sorted(&[0, 2, 4, 9], &[2, 3, 4, 10]), vec![2, 4]);
        assert_eq!(intersect_sorted(&[], &[1]), Vec::<u16>::new());
        assert_eq!(intersect_sorted(&[1, 5], &[0, 6]), Vec::<u16>::new());
    }
}
