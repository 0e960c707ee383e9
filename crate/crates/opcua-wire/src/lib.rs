//! A minimal OPC UA binary protocol stack, written from scratch.
//!
//! Covers exactly what the honeypot needs to look like a live controller:
//! TCP transport framing (HEL/ACK/ERR/OPN/MSG/CLO), secure channels with
//! security policy None, anonymous sessions, and the Browse/Read/Write
//! services over a small address space. Subscriptions, certificates and
//! multi-chunk messages are deliberately out of scope; clients poll Read.
//!
//! Numeric service ids, attribute ids and status codes follow the published
//! OPC UA registry so standard tooling recognizes the traffic.

mod address_space;
mod client;
mod codec;
mod intrusion;
mod messages;
mod server;
mod status;
mod transport;

pub use address_space::{published_nodes, AddressSpace, NodeClass, NodeDef, PUBLISHED_VAR_COUNT};
pub use client::Client;
pub use codec::{
    now_ticks, ticks_from_system_time, ByteReader, ByteWriter, NodeId, NodeIdValue, Variant,
};
pub use intrusion::{IntrusionEvent, IntrusionLog};
pub use messages::{
    service_ids, BrowseDescription, BrowseResult, DataValue, ReadValueId, ReferenceDescription,
    RequestHeader, ResponseHeader, WriteValue, ATTRIBUTE_VALUE,
};
pub use server::{Server, ServerHandle};
pub use status::StatusCode;
pub use transport::{read_frame, write_frame, Ack, ErrorMessage, Frame, Hello, MessageType};

use thiserror::Error;

/// Default OPC UA TCP port.
pub const DEFAULT_PORT: u16 = 4840;

/// Hard cap on one transport message, including the 8-byte header.
pub const MAX_MESSAGE_SIZE: u32 = 65536;

/// The only security policy this stack speaks.
pub const SECURITY_POLICY_NONE: &str = "http://opcfoundation.org/UA/SecurityPolicy#None";

#[derive(Debug, Error)]
pub enum Error {
    #[error("message truncated while reading {context}")]
    Truncated { context: &'static str },
    #[error("invalid encoding byte 0x{byte:02x} in {context}")]
    InvalidEncodingByte { context: &'static str, byte: u8 },
    #[error("transport violation: {0}")]
    ProtocolViolation(String),
    #[error("peer sent ERR 0x{code:08x}: {reason}")]
    PeerError { code: u32, reason: String },
    #[error("service fault 0x{0:08x}")]
    ServiceFault(u32),
    #[error("i/o failure")]
    IoFailure(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
