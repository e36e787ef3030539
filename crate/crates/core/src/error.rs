use crate::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate vector: (phi^+, phi) = {norm_sq:e} is below the projector floor")]
    DegenerateVector { norm_sq: f64 },

    #[error("spectral pole: 2*lambda + i*(eta - delta) vanishes at lambda = {lambda}, eta - delta = {detuning}")]
    SpectralPole { lambda: C64, detuning: f64 },

    #[error("broadening node set is empty")]
    EmptyNodeSet,

    #[error("broadening width must be positive, got {0}")]
    NonpositiveWidth(f64),

    #[error("broadening cutoff must be positive, got {0}")]
    NonpositiveCutoff(f64),

    #[error("broadening needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("broadening weight at index {index} is invalid ({weight})")]
    InvalidWeight { index: usize, weight: f64 },

    #[error("level populations ({n_am}, {n_ap}, {n_b}) must lie in [0, 1] and sum to 1")]
    PopulationsOutOfRange { n_am: f64, n_ap: f64, n_b: f64 },

    #[error("pump amplitude must be nonzero")]
    ZeroPumpAmplitude,

    #[error("spectral parameter {lambda} sits on a branch point +-|E| of the periodic background")]
    BranchPointAtE { lambda: C64 },

    #[error("wave constants must not all vanish")]
    ZeroConstants,

    #[error("spectral parameter {mu} has zero real part; the dressing step is trivial")]
    TrivialStep { mu: C64 },

    #[error("spectral parameter {mu} repeats an earlier step")]
    RepeatedSpectralParameter { mu: C64 },

    #[error("spectral parameter {lambda} hits a pole of the dressed wavefunction")]
    DressingPole { lambda: C64 },

    #[error("left/right inner product (chi, phi) = {value} vanishes")]
    DegenerateInnerProduct { value: C64 },

    #[error("state carries no pure-state amplitudes")]
    MissingPureState,

    #[error("pure-state norm drifted by {drift:e} under dressing")]
    NormDriftExceeded { drift: f64 },

    #[error("two-soliton determinant vanished ({value:e})")]
    DeterminantVanished { value: f64 },

    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("the NLS background does not solve the Maxwell-Bloch zeta equations")]
    NotMaxwellBloch,

    #[error("empirical convergence order {order:.3} is below {required}")]
    ConvergenceOrderTooLow { order: f64, required: f64 },

    #[error("broadening node index {index} out of range ({len} nodes)")]
    NodeOutOfRange { index: usize, len: usize },

    #[error("at (tau, zeta) = ({tau}, {zeta}): {source}")]
    At {
        tau: f64,
        zeta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("dressing step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("symmetry term {index}: {source}")]
    Term {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, tau: f64, zeta: f64) -> Self {
        match self {
            e @ Error::At { .. } => e,
            e => Error::At { tau, zeta, source: Box::new(e) },
        }
    }

    pub fn in_step(self, index: usize) -> Self {
        Error::Step { index, source: Box::new(self) }
    }

    /// Innermost error, stripping location and step wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } | Error::Step { source, .. } | Error::Term { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for errors that mark a singular evaluation point rather than bad input.
    pub fn is_singularity(&self) -> bool {
        matches!(
            self.root(),
            Error::DegenerateVector { .. }
                | Error::SpectralPole { .. }
                | Error::BranchPointAtE { .. }
                | Error::DressingPole { .. }
                | Error::DegenerateInnerProduct { .. }
                | Error::DeterminantVanished { .. }
                | Error::NormDriftExceeded { .. }
        )
    }
}
