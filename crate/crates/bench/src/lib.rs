//! Criterion benchmarks for the code algebra, the simulator and the
//! checkers. Run them with `cargo bench -p causalec-bench`.
