use serde::Serialize;
use thiserror::Error;

/// Which condition of the ladder definition failed, and where.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NotALadderReason {
    /// A rung above the base has more than one maximal ideal over l while
    /// some of them is singular.
    MultipleMaximalIdeals { rung: usize, count: usize },
    /// An l-overorder lies strictly between two consecutive rungs, so the
    /// multiplicator ring of the lower rung's prime skips it.
    MultiplicatorRingJump { rung: usize },
    /// l-overorders exist that are not comparable with the chain.
    ExtraOverorders { found: usize, rungs: usize },
}

impl std::fmt::Display for NotALadderReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NotALadderReason::MultipleMaximalIdeals { rung, count } => {
                write!(
                    f,
                    "rung {rung} has {count} maximal ideals above l, not all regular"
                )
            }
            NotALadderReason::MultiplicatorRingJump { rung } => {
                write!(f, "multiplicator-ring jump above rung {rung}")
            }
            NotALadderReason::ExtraOverorders { found, rungs } => {
                write!(f, "{found} l-overorders but only {rungs} rungs")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("h(0) = 0, so pi is not invertible")]
    NotInvertible,
    #[error("element is a zero divisor")]
    ZeroDivisor,
    #[error("objects live in different algebras")]
    MismatchedAlgebra,
    #[error("lattice is not contained in the other")]
    NotContained,
    #[error("element is not integral")]
    NotIntegral,
    #[error("generators do not span a full-rank lattice")]
    RankDeficient,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("could not factor cofactor {cofactor}")]
    FactorizationIncomplete { cofactor: String },
    #[error("maximal ideal is not singular")]
    NotSingular,
    #[error("(l:l) is not the unique minimal l-overorder")]
    NotMinimal,
    #[error("not a multiplicator ladder: {reason}")]
    NotALadder { reason: NotALadderReason },
    #[error("ladder length {constructed} disagrees with conductor valuation {from_conductor}")]
    ValuationMismatch {
        constructed: usize,
        from_conductor: usize,
    },
    #[error("quotient of size {size} exceeds enumeration limit {limit}")]
    EnumerationTooLarge { size: String, limit: String },
    #[error("unit index not supplied and not computable")]
    UnknownUnitIndex,
    #[error("order is not Bass at l")]
    NotBass,
    #[error("algebra is not an imaginary quadratic field")]
    NotImaginaryQuadratic,
    #[error("class data schema error: {0}")]
    SchemaError(String),
    #[error(
        "class data ratio inconsistent at level {level}: kernel {kernel}, expected {expected}"
    )]
    InconsistentRatios {
        level: usize,
        kernel: String,
        expected: String,
    },
    #[error("isogeny class kind needs a user-supplied orbit count N")]
    NeedUserN,
    #[error("isogeny class kind has no O_min, so d_min must be user-supplied")]
    NeedUserDMin,
    #[error("no rung of the ladder contains O_min")]
    LadderDisjoint,
    #[error("class data lacks the class of l*O_{level}")]
    MissingPrincipalityData { level: usize },
    #[error("bad label: {0}")]
    BadLabel(String),
    #[error("network unavailable: {0}")]
    NetworkUnavailable(String),
    #[error("upstream schema change: {0}")]
    UpstreamSchemaChange(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Module that raised the error.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            NotSquarefree | NotInvertible | ZeroDivisor => "algebra_core",
            MismatchedAlgebra | NotContained => "lattices",
            NotIntegral | RankDeficient | InvalidInput(_) => "orders",
            FactorizationIncomplete { .. } => "maximalization",
            NotSingular
            | NotMinimal
            | NotALadder { .. }
            | ValuationMismatch { .. }
            | EnumerationTooLarge { .. } => "ladders",
            UnknownUnitIndex
            | NotBass
            | NotImaginaryQuadratic
            | SchemaError(_)
            | InconsistentRatios { .. } => "classgroup",
            NeedUserN | NeedUserDMin | LadderDisjoint => "graph",
            MissingPrincipalityData { .. } => "volcano",
            BadLabel(_) | NetworkUnavailable(_) | UpstreamSchemaChange(_) | Io(_) => "lmfdb_client",
        }
    }

    /// Stable machine code.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            NotSquarefree => "not_squarefree",
            NotInvertible => "not_invertible",
            ZeroDivisor => "zero_divisor",
            MismatchedAlgebra => "mismatched_algebra",
            NotContained => "not_contained",
            NotIntegral => "not_integral",
            RankDeficient => "rank_deficient",
            InvalidInput(_) => "invalid_input",
            FactorizationIncomplete { .. } => "factorization_incomplete",
            NotSingular => "not_singular",
            NotMinimal => "not_minimal",
            NotALadder { .. } => "not_a_ladder",
            ValuationMismatch { .. } => "valuation_mismatch",
            EnumerationTooLarge { .. } => "enumeration_too_large",
            UnknownUnitIndex => "unknown_unit_index",
            NotBass => "not_bass",
            NotImaginaryQuadratic => "not_imaginary_quadratic",
            SchemaError(_) => "schema_error",
            InconsistentRatios { .. } => "inconsistent_ratios",
            NeedUserN => "need_user_n",
            NeedUserDMin => "need_user_d_min",
            LadderDisjoint => "ladder_disjoint",
            MissingPrincipalityData { .. } => "missing_principality_data",
            BadLabel(_) => "bad_label",
            NetworkUnavailable(_) => "network_unavailable",
            UpstreamSchemaChange(_) => "upstream_schema_change",
            Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
