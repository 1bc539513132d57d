//! p-adic toolkit for plectic Stark–Heegner points.
//!
//! Layers, bottom up: [`padic`] scalars, completed unit groups ([`units`]),
//! Tate curves ([`tate`]), truncated group algebras ([`grpalg`]), symmetric
//! powers ([`symalg`]), the plectic operators and identity checks
//! ([`plectic`]), and the scenario runner ([`scenario`], [`report`]).

pub mod grpalg;
pub mod padic;
pub mod plectic;
pub mod report;
pub mod scenario;
pub mod symalg;
pub mod tate;
pub mod units;
