//! Assembly index of strings.
//!
//! The assembly index of a word is the minimum number of binary
//! concatenations needed to build it from its letters when every
//! intermediate can be reused. A plan of `k` concatenations is the same
//! object as a straight-line program with `k` binary rules, so this crate
//! treats the two views interchangeably: [`plan_to_slp`] and
//! [`slp_to_plan`] convert between them at equal cost.
//!
//! Computing the index is NP-hard. [`asi_exact`] is an exponential-time
//! branch-and-bound search meant for short words; [`approx_best`] and the
//! [`bounds`] module give certified upper and lower bounds at any length,
//! and [`oracle`] is a deliberately naive exhaustive search used to check
//! everything else.
//!
//! ```
//! use asmgram::{asi_exact, verify_plan, ExactConfig, Word};
//!
//! let w = Word::parse("01010").unwrap();
//! let result = asi_exact(&w, &ExactConfig::default()).unwrap();
//! assert_eq!(result.value, 3);
//! assert!(verify_plan(&result.plan, &w, 3).unwrap().accepted);
//! ```

pub mod approx;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod model;
pub mod oracle;

pub use approx::{approx_best, balanced_shared, repair_compress, ApproxMethod, ApproxResult};
pub use bounds::{bounds_report, lz77_factorize, lz_lower, log_lower, trivial_upper, BoundsReport, LzFactor};
pub use error::{ModelError, ParseError};
pub use exact::{asi_decide, asi_exact, enumerate_splits, Decision, DecisionOutcome, ExactConfig, SolveError, SolveResult, SolveStats};
pub use model::convert::{plan_to_slp, slp_to_plan};
pub use model::plan::{plan_cost, verify_plan, AssemblyPlan, AssemblyStep, Operand, Rejection, Verdict};
pub use model::slp::{expand_slp, slp_size, RuleRhs, Slp, SlpRule, SlpSymbol, DEFAULT_MAX_EXPANSION};
pub use model::text::{format_grammar, format_plan, parse_grammar, parse_plan};
pub use model::witness::{decode_witness, encode_witness, witness_bound_bits, witness_encoding_size};
pub use model::word::{Alphabet, Word};
pub use oracle::{asi_oracle, oracle_audit, AuditReport, AuditRow, OracleConfig};
