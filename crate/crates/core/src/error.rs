use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("user placement failed after {attempts} re-draws: {reason}")]
    Placement { attempts: u32, reason: &'static str },

    #[error("pair {pair} is not a member of package {package:#b}")]
    NotAMember { pair: usize, package: u64 },

    #[error("allocation is infeasible: {0}")]
    Infeasible(String),

    #[error("package universe too large: {0}")]
    TooLarge(String),

    #[error("auction did not terminate within {0} rounds")]
    NonTermination(usize),

    #[error("invariant violated: {0}")]
    Invariant(String),
}
