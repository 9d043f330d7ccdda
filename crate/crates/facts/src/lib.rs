//! FACTS service side: the complaint server, the client state machine, the
//! wire protocol, a loopback messenger stub, a WAN link simulator and the
//! experiment harness. The CCBF and tag primitives come from `facts-core`.

pub mod client;
pub mod config;
pub mod eems;
pub mod error;
pub mod latency;
pub mod server;
pub mod sim;
pub mod wire;

pub use client::{AuditCheck, ClientOptions, ComplaintOutcome, Connection, FactsClient, InboxEntry};
pub use config::ServerConfig;
pub use eems::Eems;
pub use error::{FactsError, ServerError};
pub use server::{Credential, FactsServer};
