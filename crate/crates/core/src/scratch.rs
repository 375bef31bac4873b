//! Thread-local recycling of witness-length buffers.
//!
//! A Stern round touches several vectors of length L. At L ≈ 10⁶ a fresh
//! allocation is mapped and faulted in page by page on every round, which
//! costs more than the arithmetic done on it.

use std::cell::RefCell;
use std::ops::{Deref, DerefMut};

const KEEP: usize = 16;
const MIN_CAP: usize = 1 << 14;

pub(crate) trait Pooled: Copy + 'static {
    fn with_pool<R>(f: impl FnOnce(&mut Vec<Vec<Self>>) -> R) -> Option<R>;
}

macro_rules! pooled {
    ($t:ty, $name:ident) => {
        thread_local! {
            static $name: RefCell<Vec<Vec<$t>>> = const { RefCell::new(Vec::new()) };
        }

        impl Pooled for $t {
            fn with_pool<R>(f: impl FnOnce(&mut Vec<Vec<Self>>) -> R) -> Option<R> {
                $name
                    .try_with(|p| p.try_borrow_mut().ok().map(|mut p| f(&mut p)))
                    .ok()
                    .flatten()
            }
        }
    };
}

pooled!(i32, POOL_I32);
pooled!(u32, POOL_U32);

#[derive(Debug)]
pub(crate) struct Scratch<T: Pooled>(Vec<T>);

impl<T: Pooled> Scratch<T> {
    /// An empty buffer with at least `cap` capacity, reused when possible.
    pub(crate) fn with_capacity(cap: usize) -> Self {
        let reused = T::with_pool(|p| {
            p.iter()
                .position(|v| v.capacity() >= cap)
                .map(|i| p.swap_remove(i))
        })
        .flatten();
        let mut v = reused.unwrap_or_else(|| Vec::with_capacity(cap));
        v.clear();
        Self(v)
    }

    pub(crate) fn collect(len: usize, it: impl IntoIterator<Item = T>) -> Self {
        let mut s = Self::with_capacity(len);
        s.0.extend(it);
        s
    }

    pub(crate) fn into_vec(mut self) -> Vec<T> {
        std::mem::take(&mut self.0)
    }
}

impl<T: Pooled> Deref for Scratch<T> {
    type Target = Vec<T>;
    fn deref(&self) -> &Vec<T> {
        &self.0
    }
}

impl<T: Pooled> DerefMut for Scratch<T> {
    fn deref_mut(&mut self) -> &mut Vec<T> {
        &mut self.0
    }
}

impl<T: Pooled> Clone for Scratch<T> {
    fn clone(&self) -> Self {
        Self::collect(self.len(), self.iter().copied())
    }
}

impl<T: Pooled + PartialEq> PartialEq for Scratch<T> {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl<T: Pooled + Eq> Eq for Scratch<T> {}

impl<T: Pooled> Drop for Scratch<T> {
    fn drop(&mut self) {
        if self.0.capacity() >= MIN_CAP {
            let v = std::mem::take(&mut self.0);
            T::with_pool(|p| {
                if p.len() < KEEP {
                    p.push(v);
                }
            });
        }
    }
}
