//! The TCP server: framing, secure-channel and session state machines, and
//! the six services the honeypot answers.
//!
//! Each connection gets its own thread. Faults never kill the process: a
//! malformed frame draws an ERR message, a malformed service body draws a
//! fault response, and only transport-level violations close the socket.
//! Requests for any security policy other than None are refused with an ERR
//! message but the connection is left open so the client can retry, which is
//! what real stacks do during endpoint discovery.

use std::collections::HashMap;
use std::io::{self, ErrorKind, Read};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use crate::address_space::AddressSpace;
use crate::codec::{now_ticks, ByteReader, ByteWriter, NodeId, NodeIdValue, QualifiedName, Variant};
use crate::intrusion::{IntrusionEvent, IntrusionLog};
use crate::messages::{
    service_ids as ids, ActivateSessionRequest, ActivateSessionResponse, BrowseRequest,
    BrowseResponse, BrowseResult, ChannelSecurityToken, CloseSecureChannelRequest,
    CloseSessionRequest, CloseSessionResponse,
    CreateSessionRequest, CreateSessionResponse, DataValue, OpenSecureChannelRequest,
    OpenSecureChannelResponse, ReadRequest, ReadResponse, ReferenceDescription, RequestHeader,
    ResponseHeader, ServiceFault, SignatureData, WriteRequest, WriteResponse, WriteValue,
    ATTRIBUTE_VALUE,
};
use crate::status::StatusCode;
use crate::transport::{read_frame, write_frame, Ack, ErrorMessage, MessageType};
use crate::{Error, Result, MAX_MESSAGE_SIZE, SECURITY_POLICY_NONE};

/// How often blocked reads wake up to check the shutdown flag.
const READ_POLL: Duration = Duration::from_millis(250);
const TOKEN_LIFETIME_MS: u32 = 3_600_000;

struct Session {
    id: NodeId,
    activated: bool,
}

#[derive(Default)]
struct SessionTable {
    by_token: HashMap<NodeId, Session>,
    created: u32,
}

struct Shared {
    space: Arc<AddressSpace>,
    log: Arc<IntrusionLog>,
    sessions: Mutex<SessionTable>,
    next_channel_id: AtomicU32,
    shutdown: AtomicBool,
}

pub struct Server {
    listener: TcpListener,
    shared: Arc<Shared>,
}

impl Server {
    pub fn bind(
        addr: impl ToSocketAddrs,
        space: Arc<AddressSpace>,
        log: Arc<IntrusionLog>,
    ) -> io::Result<Server> {
        Ok(Server {
            listener: TcpListener::bind(addr)?,
            shared: Arc::new(Shared {
                space,
                log,
                sessions: Mutex::new(SessionTable::default()),
                next_channel_id: AtomicU32::new(1),
                shutdown: AtomicBool::new(false),
            }),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener has an address")
    }

    /// Starts the accept loop and returns a handle that stops it.
    pub fn spawn(self) -> ServerHandle {
        let addr = self.local_addr();
        let handle_shared = Arc::clone(&self.shared);
        let shared = Arc::clone(&self.shared);
        let workers: Arc<Mutex<Vec<JoinHandle<()>>>> = Arc::new(Mutex::new(Vec::new()));
        let accept_workers = Arc::clone(&workers);
        let accept = std::thread::spawn(move || {
            for incoming in self.listener.incoming() {
                if shared.shutdown.load(Ordering::SeqCst) {
                    break;
                }
                match incoming {
                    Ok(stream) => {
                        let shared = Arc::clone(&shared);
                        let worker = std::thread::spawn(move || serve_connection(stream, &shared));
                        accept_workers.lock().expect("worker list").push(worker);
                    }
                    Err(e) => {
                        log::warn!("accept failed: {e}");
                        std::thread::sleep(Duration::from_millis(50));
                    }
                }
            }
        });
        ServerHandle {
            addr,
            shared: handle_shared,
            accept: Some(accept),
            workers,
        }
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    shared: Arc<Shared>,
    accept: Option<JoinHandle<()>>,
    workers: Arc<Mutex<Vec<JoinHandle<()>>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting, wakes every connection thread and joins them all.
    pub fn shutdown(&mut self) {
        if self.shared.shutdown.swap(true, Ordering::SeqCst) {
            return;
        }
        // The accept loop only rechecks the flag when a connection arrives.
        let _ = TcpStream::connect(self.addr);
        if let Some(accept) = self.accept.take() {
            let _ = accept.join();
        }
        let workers = std::mem::take(&mut *self.workers.lock().expect("worker list"));
        for worker in workers {
            let _ = worker.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Blocks like a plain socket read but wakes every `READ_POLL` to honor the
/// shutdown flag, so idle connections never pin the process.
struct PatientReader<'a> {
    stream: &'a TcpStream,
    shutdown: &'a AtomicBool,
}

impl Read for PatientReader<'_> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        loop {
            if self.shutdown.load(Ordering::SeqCst) {
                return Err(io::Error::new(
                    ErrorKind::ConnectionAborted,
                    "server shutting down",
                ));
            }
            let mut stream = self.stream;
            match stream.read(buf) {
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    continue
                }
                other => return other,
            }
        }
    }
}

struct ChannelState {
    id: u32,
    token_id: u32,
}

struct Connection<'a> {
    stream: TcpStream,
    shared: &'a Shared,
    channel: Option<ChannelState>,
    said_hello: bool,
    out_seq: u32,
}

fn serve_connection(stream: TcpStream, shared: &Shared) {
    if let Err(e) = stream.set_read_timeout(Some(READ_POLL)) {
        log::warn!("read timeout rejected: {e}");
        return;
    }
    let _ = stream.set_nodelay(true);
    let peer = stream.peer_addr().map(|a| a.to_string());
    let mut connection = Connection {
        stream,
        shared,
        channel: None,
        said_hello: false,
        out_seq: 0,
    };
    match connection.serve() {
        Ok(()) => {}
        Err(Error::IoFailure(e)) if e.kind() == ErrorKind::ConnectionAborted => {}
        Err(e) => log::debug!("connection from {peer:?} ended: {e}"),
    }
}

impl Connection<'_> {
    fn serve(&mut self) -> Result<()> {
        loop {
            let mut reader = PatientReader {
                stream: &self.stream,
                shutdown: &self.shared.shutdown,
            };
            let frame = match read_frame(&mut reader) {
                Ok(Some(frame)) => frame,
                Ok(None) => return Ok(()),
                Err(Error::ProtocolViolation(message)) => {
                    let code = if message.contains("limit") {
                        StatusCode::BAD_TCP_MESSAGE_TOO_LARGE
                    } else {
                        StatusCode::BAD_TCP_MESSAGE_TYPE_INVALID
                    };
                    let _ = self.send_error(code, &message);
                    return Ok(());
                }
                Err(e) => return Err(e),
            };
            let keep_going = match frame.kind {
                MessageType::Hello if !self.said_hello => self.handle_hello(&frame.body)?,
                MessageType::Hello => {
                    self.send_error(StatusCode::BAD_TCP_MESSAGE_TYPE_INVALID, "duplicate hello")?;
                    false
                }
                _ if !self.said_hello => {
                    self.send_error(
                        StatusCode::BAD_TCP_MESSAGE_TYPE_INVALID,
                        "the first message must be a hello",
                    )?;
                    false
                }
                MessageType::Open => self.handle_open(&frame.body)?,
                MessageType::Msg => self.handle_msg(&frame.body)?,
                MessageType::Close => {
                    self.handle_close(&frame.body);
                    false
                }
                MessageType::Ack | MessageType::Error => {
                    self.send_error(
                        StatusCode::BAD_TCP_MESSAGE_TYPE_INVALID,
                        "unexpected acknowledge or error from a client",
                    )?;
                    false
                }
            };
            if !keep_going {
                return Ok(());
            }
        }
    }

    fn send_error(&self, code: StatusCode, reason: &str) -> Result<()> {
        let body = ErrorMessage::new(code.0, reason).encode();
        let mut writer = &self.stream;
        write_frame(&mut writer, MessageType::Error, &body)
    }

    fn send_frame(&self, kind: MessageType, body: &[u8]) -> Result<()> {
        let mut writer = &self.stream;
        write_frame(&mut writer, kind, body)
    }

    fn handle_hello(&mut self, body: &[u8]) -> Result<bool> {
        let hello = match crate::transport::Hello::decode(body) {
            Ok(hello) => hello,
            Err(e) => {
                self.send_error(StatusCode::BAD_DECODING_ERROR, &e.to_string())?;
                return Ok(false);
            }
        };
        let ack = Ack::negotiate(&hello);
        self.send_frame(MessageType::Ack, &ack.encode())?;
        self.said_hello = true;
        Ok(true)
    }

    fn handle_open(&mut self, body: &[u8]) -> Result<bool> {
        let mut r = ByteReader::new(body, "open secure channel");
        let parsed = (|| -> Result<_> {
            let channel_id = r.read_u32()?;
            let policy = r.read_string()?;
            let _sender_certificate = r.read_bytestring()?;
            let _receiver_thumbprint = r.read_bytestring()?;
            Ok((channel_id, policy))
        })();
        let (channel_id, policy) = match parsed {
            Ok(parts) => parts,
            Err(e) => {
                self.send_error(StatusCode::BAD_DECODING_ERROR, &e.to_string())?;
                return Ok(false);
            }
        };
        if policy.as_deref() != Some(SECURITY_POLICY_NONE) {
            self.send_error(
                StatusCode::BAD_SECURITY_POLICY_REJECTED,
                "only the None security policy is served",
            )?;
            return Ok(true);
        }
        let request = (|| -> Result<_> {
            let _seq = r.read_u32()?;
            let request_id = r.read_u32()?;
            let type_id = r.read_node_id()?;
            if type_id.as_numeric() != Some((0, ids::OPEN_SECURE_CHANNEL_REQUEST)) {
                return Err(Error::ProtocolViolation(format!(
                    "expected an open-channel request, got type {type_id}"
                )));
            }
            Ok((request_id, OpenSecureChannelRequest::decode(&mut r)?))
        })();
        let (request_id, request) = match request {
            Ok(parts) => parts,
            Err(e) => {
                self.send_error(StatusCode::BAD_DECODING_ERROR, &e.to_string())?;
                return Ok(false);
            }
        };
        if request.security_mode != 1 {
            self.send_error(
                StatusCode::BAD_SECURITY_POLICY_REJECTED,
                "only security mode None is served",
            )?;
            return Ok(true);
        }
        match (request.request_type, self.channel.as_mut()) {
            (0, _) => {
                let id = self.shared.next_channel_id.fetch_add(1, Ordering::SeqCst);
                self.channel = Some(ChannelState { id, token_id: 1 });
            }
            (1, Some(channel)) if channel.id == channel_id => channel.token_id += 1,
            _ => {
                self.send_error(
                    StatusCode::BAD_SECURE_CHANNEL_ID_INVALID,
                    "token renewal for an unknown channel",
                )?;
                return Ok(false);
            }
        }
        let channel = self.channel.as_ref().expect("channel was just set");
        let requested = request.requested_lifetime_ms;
        let response = OpenSecureChannelResponse {
            header: ResponseHeader::ok(request.header.request_handle),
            server_protocol_version: 0,
            token: ChannelSecurityToken {
                channel_id: channel.id,
                token_id: channel.token_id,
                created_at: now_ticks(),
                revised_lifetime_ms: if requested == 0 {
                    TOKEN_LIFETIME_MS
                } else {
                    requested.min(TOKEN_LIFETIME_MS)
                },
            },
            server_nonce: None,
        };
        self.out_seq += 1;
        let mut w = ByteWriter::new();
        w.write_u32(channel.id);
        w.write_string(Some(SECURITY_POLICY_NONE));
        w.write_bytestring(None);
        w.write_bytestring(None);
        w.write_u32(self.out_seq);
        w.write_u32(request_id);
        w.write_node_id(&NodeId::numeric(0, ids::OPEN_SECURE_CHANNEL_RESPONSE));
        response.encode(&mut w);
        self.send_frame(MessageType::Open, &w.into_vec())?;
        Ok(true)
    }

    fn respond(
        &mut self,
        request_id: u32,
        type_id: u32,
        encode: impl FnOnce(&mut ByteWriter),
    ) -> Result<()> {
        let channel = self.channel.as_ref().expect("responding requires a channel");
        let (channel_id, token_id) = (channel.id, channel.token_id);
        self.out_seq += 1;
        let mut w = ByteWriter::new();
        w.write_u32(channel_id);
        w.write_u32(token_id);
        w.write_u32(self.out_seq);
        w.write_u32(request_id);
        w.write_node_id(&NodeId::numeric(0, type_id));
        encode(&mut w);
        self.send_frame(MessageType::Msg, &w.into_vec())
    }

    fn fault(&mut self, request_id: u32, request_handle: u32, status: StatusCode) -> Result<()> {
        let fault = ServiceFault {
            header: ResponseHeader::fault(request_handle, status),
        };
        self.respond(request_id, ids::SERVICE_FAULT, |w| fault.encode(w))
    }

    fn decode_body<T>(
        &mut self,
        r: &mut ByteReader,
        request_id: u32,
        request_handle: u32,
        decode: impl FnOnce(&mut ByteReader) -> Result<T>,
    ) -> Result<Option<T>> {
        match decode(r) {
            Ok(body) if r.remaining() == 0 => Ok(Some(body)),
            _ => {
                self.fault(request_id, request_handle, StatusCode::BAD_DECODING_ERROR)?;
                Ok(None)
            }
        }
    }

    /// Session id for the request's token, or the fault to answer with.
    fn active_session(&self, header: &RequestHeader) -> std::result::Result<NodeId, StatusCode> {
        let table = self.shared.sessions.lock().expect("session table");
        match table.by_token.get(&header.auth_token) {
            None => Err(StatusCode::BAD_SESSION_ID_INVALID),
            Some(session) if !session.activated => Err(StatusCode::BAD_SESSION_NOT_ACTIVATED),
            Some(session) => Ok(session.id.clone()),
        }
    }

    /// The connection ends regardless of what the close frame says; parsing
    /// it only decides whether the closure is logged as orderly or sloppy.
    fn handle_close(&self, body: &[u8]) {
        let mut r = ByteReader::new(body, "close envelope");
        let parsed = (|| -> Result<CloseSecureChannelRequest> {
            let _channel_id = r.read_u32()?;
            let _token_id = r.read_u32()?;
            let _seq = r.read_u32()?;
            let _request_id = r.read_u32()?;
            let type_id = r.read_node_id()?;
            if type_id.as_numeric() != Some((0, ids::CLOSE_SECURE_CHANNEL_REQUEST)) {
                return Err(Error::ProtocolViolation(format!(
                    "close frame carries service {type_id}"
                )));
            }
            CloseSecureChannelRequest::decode(&mut r)
        })();
        match parsed {
            Ok(request) => log::debug!(
                "channel closed by client, request handle {}",
                request.header.request_handle
            ),
            Err(e) => log::debug!("malformed close request ignored: {e}"),
        }
    }

    fn handle_msg(&mut self, body: &[u8]) -> Result<bool> {
        let mut r = ByteReader::new(body, "message envelope");
        let envelope = (|| -> Result<_> {
            let channel_id = r.read_u32()?;
            let _token_id = r.read_u32()?;
            let _seq = r.read_u32()?;
            Ok((channel_id, r.read_u32()?))
        })();
        let (channel_id, request_id) = match envelope {
            Ok(parts) => parts,
            Err(e) => {
                self.send_error(StatusCode::BAD_DECODING_ERROR, &e.to_string())?;
                return Ok(false);
            }
        };
        match &self.channel {
            Some(channel) if channel.id == channel_id => {}
            _ => {
                self.send_error(
                    StatusCode::BAD_SECURE_CHANNEL_ID_INVALID,
                    "message on an unopened channel",
                )?;
                return Ok(false);
            }
        }
        let service = match r.read_node_id().map(|id| id.as_numeric()) {
            Ok(Some((0, id))) => id,
            Ok(_) => {
                self.fault(request_id, 0, StatusCode::BAD_SERVICE_UNSUPPORTED)?;
                return Ok(true);
            }
            Err(_) => {
                self.fault(request_id, 0, StatusCode::BAD_DECODING_ERROR)?;
                return Ok(true);
            }
        };
        // Every request body starts with a request header; peek at it for the
        // handle to echo in faults, then rewind so each service decodes the
        // complete structure it defines.
        let header_start = r.position();
        let header = match RequestHeader::decode(&mut r) {
            Ok(header) => header,
            Err(_) => {
                self.fault(request_id, 0, StatusCode::BAD_DECODING_ERROR)?;
                return Ok(true);
            }
        };
        r.seek(header_start);
        let handle = header.request_handle;
        match service {
            ids::CREATE_SESSION_REQUEST => {
                let Some(request) =
                    self.decode_body(&mut r, request_id, handle, CreateSessionRequest::decode)?
                else {
                    return Ok(true);
                };
                self.create_session(request_id, &header, &request)?;
            }
            ids::ACTIVATE_SESSION_REQUEST => {
                let Some(_request) =
                    self.decode_body(&mut r, request_id, handle, ActivateSessionRequest::decode)?
                else {
                    return Ok(true);
                };
                self.activate_session(request_id, &header)?;
            }
            ids::CLOSE_SESSION_REQUEST => {
                let Some(_request) =
                    self.decode_body(&mut r, request_id, handle, CloseSessionRequest::decode)?
                else {
                    return Ok(true);
                };
                self.close_session(request_id, &header)?;
            }
            ids::BROWSE_REQUEST => {
                let Some(request) =
                    self.decode_body(&mut r, request_id, handle, BrowseRequest::decode)?
                else {
                    return Ok(true);
                };
                self.browse(request_id, &header, &request)?;
            }
            ids::READ_REQUEST => {
                let Some(request) =
                    self.decode_body(&mut r, request_id, handle, ReadRequest::decode)?
                else {
                    return Ok(true);
                };
                self.read(request_id, &header, &request)?;
            }
            ids::WRITE_REQUEST => {
                let Some(request) =
                    self.decode_body(&mut r, request_id, handle, WriteRequest::decode)?
                else {
                    return Ok(true);
                };
                self.write(request_id, &header, &request)?;
            }
            _ => self.fault(request_id, handle, StatusCode::BAD_SERVICE_UNSUPPORTED)?,
        }
        Ok(true)
    }

    fn create_session(
        &mut self,
        request_id: u32,
        header: &RequestHeader,
        request: &CreateSessionRequest,
    ) -> Result<()> {
        let (session_id, auth_token) = {
            let mut table = self.shared.sessions.lock().expect("session table");
            table.created += 1;
            let n = table.created;
            let session_id = NodeId::numeric(1, 1000 + n);
            let mut token = vec![0xA5];
            token.extend_from_slice(&n.to_le_bytes());
            token.extend_from_slice(&now_ticks().to_le_bytes());
            let auth_token = NodeId {
                namespace: 1,
                value: NodeIdValue::Bytes(token),
            };
            table.by_token.insert(
                auth_token.clone(),
                Session {
                    id: session_id.clone(),
                    activated: false,
                },
            );
            (session_id, auth_token)
        };
        let requested = request.requested_session_timeout_ms;
        let response = CreateSessionResponse {
            header: ResponseHeader::ok(header.request_handle),
            session_id,
            auth_token,
            revised_session_timeout_ms: if requested > 0.0 && requested.is_finite() {
                requested.min(3_600_000.0)
            } else {
                600_000.0
            },
            server_nonce: Some(vec![0; 32]),
            server_certificate: None,
            server_signature: SignatureData::null(),
            max_request_message_size: MAX_MESSAGE_SIZE,
        };
        self.respond(request_id, ids::CREATE_SESSION_RESPONSE, |w| {
            response.encode(w)
        })
    }

    fn activate_session(&mut self, request_id: u32, header: &RequestHeader) -> Result<()> {
        let known = {
            let mut table = self.shared.sessions.lock().expect("session table");
            match table.by_token.get_mut(&header.auth_token) {
                Some(session) => {
                    session.activated = true;
                    true
                }
                None => false,
            }
        };
        if !known {
            return self.fault(
                request_id,
                header.request_handle,
                StatusCode::BAD_SESSION_ID_INVALID,
            );
        }
        let response = ActivateSessionResponse {
            header: ResponseHeader::ok(header.request_handle),
            server_nonce: Some(vec![0; 32]),
            results: Vec::new(),
        };
        self.respond(request_id, ids::ACTIVATE_SESSION_RESPONSE, |w| {
            response.encode(w)
        })
    }

    fn close_session(&mut self, request_id: u32, header: &RequestHeader) -> Result<()> {
        let removed = {
            let mut table = self.shared.sessions.lock().expect("session table");
            table.by_token.remove(&header.auth_token).is_some()
        };
        if !removed {
            return self.fault(
                request_id,
                header.request_handle,
                StatusCode::BAD_SESSION_ID_INVALID,
            );
        }
        let response = CloseSessionResponse {
            header: ResponseHeader::ok(header.request_handle),
        };
        self.respond(request_id, ids::CLOSE_SESSION_RESPONSE, |w| {
            response.encode(w)
        })
    }

    fn browse(
        &mut self,
        request_id: u32,
        header: &RequestHeader,
        request: &BrowseRequest,
    ) -> Result<()> {
        if let Err(code) = self.active_session(header) {
            return self.fault(request_id, header.request_handle, code);
        }
        let limit = match request.requested_max_references_per_node {
            0 => usize::MAX,
            n => n as usize,
        };
        let results: Vec<BrowseResult> = request
            .nodes_to_browse
            .iter()
            .map(|description| match self
                .shared
                .space
                .children_of(&description.node_id)
            {
                None => BrowseResult {
                    status_code: StatusCode::BAD_NODE_ID_UNKNOWN.0,
                    continuation_point: None,
                    references: Vec::new(),
                },
                Some(children) => BrowseResult {
                    status_code: StatusCode::GOOD.0,
                    continuation_point: None,
                    references: children
                        .into_iter()
                        .take(limit)
                        .map(|(reference, node)| ReferenceDescription {
                            reference_type_id: NodeId::numeric(0, reference),
                            is_forward: true,
                            node_id: node.id().clone(),
                            browse_name: QualifiedName {
                                namespace: node.name_namespace(),
                                name: Some(node.name().to_string()),
                            },
                            display_name: crate::codec::LocalizedText::plain(node.name()),
                            node_class: node.class().wire(),
                            type_definition: node.type_definition(),
                        })
                        .collect(),
                },
            })
            .collect();
        let response = BrowseResponse {
            header: ResponseHeader::ok(header.request_handle),
            results,
        };
        self.respond(request_id, ids::BROWSE_RESPONSE, |w| response.encode(w))
    }

    fn read(&mut self, request_id: u32, header: &RequestHeader, request: &ReadRequest) -> Result<()> {
        if let Err(code) = self.active_session(header) {
            return self.fault(request_id, header.request_handle, code);
        }
        let results: Vec<DataValue> = request
            .nodes_to_read
            .iter()
            .map(|rv| {
                if rv.attribute_id != ATTRIBUTE_VALUE {
                    return DataValue::bad(StatusCode::BAD_ATTRIBUTE_ID_INVALID);
                }
                match self.shared.space.read_value(&rv.node_id) {
                    Some((value, stamp)) => DataValue::good(Variant::Double(value), stamp),
                    None => match self.shared.space.lookup(&rv.node_id) {
                        Some(_) => DataValue::bad(StatusCode::BAD_ATTRIBUTE_ID_INVALID),
                        None => DataValue::bad(StatusCode::BAD_NODE_ID_UNKNOWN),
                    },
                }
            })
            .collect();
        let response = ReadResponse {
            header: ResponseHeader::ok(header.request_handle),
            results,
        };
        self.respond(request_id, ids::READ_RESPONSE, |w| response.encode(w))
    }

    fn write(
        &mut self,
        request_id: u32,
        header: &RequestHeader,
        request: &WriteRequest,
    ) -> Result<()> {
        match self.active_session(header) {
            Err(code) => {
                for wv in &request.nodes_to_write {
                    self.log_write_attempt("-", wv, code);
                }
                self.fault(request_id, header.request_handle, code)
            }
            Ok(session_id) => {
                let session = session_id.to_string();
                let results: Vec<u32> = request
                    .nodes_to_write
                    .iter()
                    .map(|wv| {
                        let status = self.apply_write(wv);
                        self.log_write_attempt(&session, wv, status);
                        status.0
                    })
                    .collect();
                let response = WriteResponse {
                    header: ResponseHeader::ok(header.request_handle),
                    results,
                };
                self.respond(request_id, ids::WRITE_RESPONSE, |w| response.encode(w))
            }
        }
    }

    fn apply_write(&self, wv: &WriteValue) -> StatusCode {
        let Some(node) = self.shared.space.lookup(&wv.node_id) else {
            return StatusCode::BAD_NODE_ID_UNKNOWN;
        };
        if wv.attribute_id != ATTRIBUTE_VALUE || !node.has_value() {
            return StatusCode::BAD_ATTRIBUTE_ID_INVALID;
        }
        if !node.is_writable() {
            return StatusCode::BAD_NOT_WRITABLE;
        }
        match &wv.value.value {
            Some(Variant::Double(value)) => {
                let stamp = wv.value.source_timestamp.unwrap_or_else(now_ticks);
                self.shared.space.set_value(&wv.node_id, *value, stamp);
                StatusCode::GOOD
            }
            _ => StatusCode::BAD_TYPE_MISMATCH,
        }
    }

    fn log_write_attempt(&self, session: &str, wv: &WriteValue, status: StatusCode) {
        let event = IntrusionEvent::now(
            session,
            "write",
            wv.node_id.to_string(),
            describe_value(&wv.value),
            status.display(),
        );
        if let Err(e) = self.shared.log.record(&event) {
            log::warn!("intrusion log write failed: {e}");
        }
    }
}

fn describe_value(dv: &DataValue) -> String {
    match &dv.value {
        None => "(no value)".to_string(),
        Some(Variant::Null) => "Null".to_string(),
        Some(Variant::Boolean(b)) => b.to_string(),
        Some(Variant::Int32(i)) => i.to_string(),
        Some(Variant::UInt32(u)) => u.to_string(),
        Some(Variant::Double(x)) => x.to_string(),
        Some(Variant::String(s)) => format!("{:?}", s.as_deref().unwrap_or("")),
        Some(Variant::DateTime(t)) => format!("DateTime({t})"),
        Some(Variant::NodeId(id)) => id.to_string(),
        Some(Variant::StatusCode(c)) => StatusCode(*c).display(),
    }
}
