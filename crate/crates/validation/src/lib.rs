//! Holds the acceptance suite (`cargo test -p cpi-validation`); no library code.
