//! Criterion benchmarks for jet construction, evaluation and rank checks.
