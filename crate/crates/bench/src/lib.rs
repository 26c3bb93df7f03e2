//! Criterion benchmarks for webrank-core; see `benches/`.
