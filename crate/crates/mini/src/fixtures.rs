//! Reference programs used by tests and the command-line harness. The same
//! programs live in `fixtures/*.mini`.

/// Iterates over one bucket of a hash table.
pub const BUCKET: &str = include_str!("../fixtures/bucket.mini");

/// Iterates over every bucket by calling `bucket`.
pub const HASHTABLE: &str = include_str!("../fixtures/hashtable.mini");

/// `fail` throws, `forward` calls `fail`, and `main` catches what comes back.
pub const EXCEPTIONS: &str = include_str!("../fixtures/exceptions.mini");

/// Like [`EXCEPTIONS`], but nothing catches the exception.
pub const UNCAUGHT: &str = include_str!("../fixtures/uncaught.mini");
