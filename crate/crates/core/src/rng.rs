//! Named random streams derived from one master seed.
//!
//! Each stochastic feature draws from its own ChaCha stream, so enabling or
//! disabling one feature never shifts the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Initialization,
    Sex,
    Inheritance,
    Noise,
    Partition,
    Location,
    Success,
    Analysis,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Initialization => 1,
            Stream::Sex => 2,
            Stream::Inheritance => 3,
            Stream::Noise => 4,
            Stream::Partition => 5,
            Stream::Location => 6,
            Stream::Success => 7,
            Stream::Analysis => 8,
        }
    }
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}

/// Bundle of every stream the simulation engine consumes.
#[derive(Debug, Clone)]
pub struct Streams {
    pub init: ChaCha8Rng,
    pub sex: ChaCha8Rng,
    pub inheritance: ChaCha8Rng,
    pub noise: ChaCha8Rng,
    pub partition: ChaCha8Rng,
    pub location: ChaCha8Rng,
    pub success: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams {
            init: stream(seed, Stream::Initialization),
            sex: stream(seed, Stream::Sex),
            inheritance: stream(seed, Stream::Inheritance),
            noise: stream(seed, Stream::Noise),
            partition: stream(seed, Stream::Partition),
            location: stream(seed, Stream::Location),
            success: stream(seed, Stream::Success),
        }
    }
}
