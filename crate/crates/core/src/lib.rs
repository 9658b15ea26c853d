//! The `(k+2, k)` Hadamard minimum-storage-regenerating code.
//!
//! `k` systematic nodes and two parity nodes each store `N = 2^(k+1)` field
//! symbols per chunk. Any two nodes may be lost and the data decoded; any
//! single node can be rebuilt by downloading only `N/2` symbols from each of
//! the `k + 1` survivors.
//!
//! Two repair strategies are provided. [`Strategy::New`] builds its repair
//! matrices on the standard basis, so every row has two `±1` entries and a
//! repair costs `(3k+1)N/2` field additions. [`Strategy::Original`] uses the
//! same column pattern over the Sylvester Hadamard basis. Both are metered
//! with [`OpCounter`] so their computation load can be compared.
//!
//! ```
//! use hadamard_msr::{encode, CodeParams, OpCounter, RepairPlan, Strategy};
//!
//! let params = CodeParams::example_k2();
//! let f = params.field();
//! let data: Vec<Vec<_>> = (0..2)
//!     .map(|i| (0..params.n()).map(|t| f.elem((3 * t + i) as i64)).collect())
//!     .collect();
//! let codeword = encode(&params, &data).unwrap();
//!
//! let plan = RepairPlan::build(&params, 1, Strategy::New).unwrap();
//! let mut counter = OpCounter::new();
//! let rebuilt = plan.execute(&codeword.without(1), &mut counter).unwrap();
//! assert_eq!(rebuilt, codeword.node(1));
//! assert_eq!(counter.adds(), 28);
//! ```

pub mod cluster;
pub mod codec;
pub mod design;
pub mod error;
pub mod field;
pub mod linalg;
pub mod metering;
pub mod repair;

pub use codec::{decode, encode, CodeParams, Codeword, DiagMatrix, NodeClass, Packing};
pub use error::{Error, Result};
pub use field::{Fe, OpCounter, Phase, PrimeField};
pub use metering::CostReport;
pub use repair::{verify_rank_conditions, RankReport, RepairPlan, Strategy};
