use std::collections::{HashMap, VecDeque};

use crate::attribute::AttributeId;
use crate::cache::Minutes;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowItem {
    pub attribute: AttributeId,
    pub timestamp: Minutes,
}

/// An item removed from the front of the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Popped {
    pub item: WindowItem,
    /// No newer reading of the same attribute remains in the window.
    pub last_of_attribute: bool,
}

/// Bounded FIFO of recent readings, oldest at the front.
#[derive(Debug, Clone)]
pub struct SlidingWindow {
    buffer: VecDeque<WindowItem>,
    counts: HashMap<AttributeId, usize>,
    window_size: usize,
}

impl SlidingWindow {
    pub fn new(window_size: usize) -> Self {
        assert!(window_size >= 1, "window size must be at least 1");
        Self {
            buffer: VecDeque::with_capacity(window_size),
            counts: HashMap::new(),
            window_size,
        }
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn count(&self, attribute: &AttributeId) -> usize {
        self.counts.get(attribute).copied().unwrap_or(0)
    }

    pub fn front(&self) -> Option<&WindowItem> {
        self.buffer.front()
    }

    pub fn iter(&self) -> impl Iterator<Item = &WindowItem> {
        self.buffer.iter()
    }

    /// Append a reading; a full window first drops its oldest item, which is returned.
    pub fn push(&mut self, attribute: AttributeId, timestamp: Minutes) -> Option<Popped> {
        *self.counts.entry(attribute.clone()).or_insert(0) += 1;
        self.buffer.push_back(WindowItem { attribute, timestamp });
        if self.buffer.len() > self.window_size {
            self.pop_front()
        } else {
            None
        }
    }

    pub fn pop_front(&mut self) -> Option<Popped> {
        let item = self.buffer.pop_front()?;
        let count = self.counts.get_mut(&item.attribute).expect("counted on push");
        *count -= 1;
        let last_of_attribute = *count == 0;
        if last_of_attribute {
            self.counts.remove(&item.attribute);
        }
        Some(Popped { item, last_of_attribute })
    }

    /// Pop every front item whose age at `now` exceeds `threshold`.
    pub fn pop_expired(&mut self, now: Minutes, threshold: Minutes) -> Vec<Popped> {
        let mut popped = Vec::new();
        while self.front().is_some_and(|front| now - front.timestamp > threshold) {
            popped.extend(self.pop_front());
        }
        popped
    }
}
