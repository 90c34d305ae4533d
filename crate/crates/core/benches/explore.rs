//! Placeholder; replaced by the parallel-vs-sequential exploration benches
//! once the exploration layer lands.

fn main() {}
