mod net;
mod state;

pub use net::{spawn, spawn_epoch_timer, Direction, FrameRecord, ServerHandle, Transcript};
pub use state::{
    overlapping_sessions, ComplaintSession, Credential, EpochStats, FactsServer, SessionOutcome,
    SessionRecord, UserRecord,
};
