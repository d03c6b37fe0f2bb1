//! Context freshness caching lab.
//!
//! Prioritises the attributes of a context with the analytic hierarchy
//! process, keeps the top-ranked attributes fresh in a threshold-monitored
//! sliding-window cache, and compares that cache against FIFO, LFU and
//! recency baselines on seeded synthetic traces.

pub mod ahp;
pub mod attribute;
pub mod cache;
pub mod cli;
pub mod freshness_cache;
pub mod harness;
pub mod metrics;
pub mod policies;
pub mod workload;

pub use attribute::AttributeId;
