//! Key = value reports and CSV tables.
