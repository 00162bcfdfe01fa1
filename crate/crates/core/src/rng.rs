use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent, reproducible generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream used to sample the circuit of snapshot `id`.
pub fn circuit_stream(id: u64) -> u64 {
    2 * id
}

/// Stream used to sample the measurement outcome of snapshot `id`.
pub fn outcome_stream(id: u64) -> u64 {
    2 * id + 1
}
