//! Attacks (stub).
