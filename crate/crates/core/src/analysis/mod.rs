//! Analysis (stub).
