//! Client for the same wire subset the server speaks.
//!
//! Used by the integration tests and by operators poking at a running
//! honeypot. One instance owns one connection and, at most, one session.

use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use crate::codec::{ByteReader, ByteWriter, ExtensionObject, NodeId};
use crate::messages::{
    service_ids as ids, ActivateSessionRequest, ActivateSessionResponse, ApplicationDescription,
    BrowseDescription, BrowseRequest, BrowseResponse, BrowseResult, ChannelSecurityToken,
    CloseSecureChannelRequest, CloseSessionRequest, CloseSessionResponse, CreateSessionRequest,
    CreateSessionResponse, DataValue, OpenSecureChannelRequest, OpenSecureChannelResponse,
    ReadRequest, ReadResponse, ReadValueId, ReferenceDescription, RequestHeader, ServiceFault,
    SignatureData, ViewDescription, WriteRequest, WriteResponse, WriteValue,
};
use crate::status::StatusCode;
use crate::transport::{read_frame, write_frame, Ack, ErrorMessage, Frame, Hello, MessageType};
use crate::{Error, Result, MAX_MESSAGE_SIZE, SECURITY_POLICY_NONE};

const REQUEST_TIMEOUT: Duration = Duration::from_secs(10);

pub struct Client {
    stream: TcpStream,
    endpoint_url: String,
    channel_id: u32,
    token_id: u32,
    next_seq: u32,
    next_request_id: u32,
    next_handle: u32,
    auth_token: NodeId,
    session_id: Option<NodeId>,
}

impl Client {
    /// Connects and completes the hello/acknowledge exchange.
    pub fn connect(addr: impl ToSocketAddrs) -> Result<Client> {
        let stream = TcpStream::connect(addr)?;
        stream.set_read_timeout(Some(REQUEST_TIMEOUT))?;
        let _ = stream.set_nodelay(true);
        let endpoint_url = format!("opc.tcp://{}", stream.peer_addr()?);
        let hello = Hello {
            protocol_version: 0,
            receive_buffer_size: MAX_MESSAGE_SIZE,
            send_buffer_size: MAX_MESSAGE_SIZE,
            max_message_size: MAX_MESSAGE_SIZE,
            max_chunk_count: 1,
            endpoint_url: Some(endpoint_url.clone()),
        };
        let mut client = Client {
            stream,
            endpoint_url,
            channel_id: 0,
            token_id: 0,
            next_seq: 0,
            next_request_id: 0,
            next_handle: 0,
            auth_token: NodeId::null(),
            session_id: None,
        };
        client.send_frame(MessageType::Hello, &hello.encode())?;
        let frame = client.must_read()?;
        match frame.kind {
            MessageType::Ack => {
                Ack::decode(&frame.body)?;
                Ok(client)
            }
            MessageType::Error => Err(peer_error(&frame.body)),
            other => Err(Error::ProtocolViolation(format!(
                "expected an acknowledge, got {other:?}"
            ))),
        }
    }

    pub fn open_channel(&mut self) -> Result<()> {
        self.open_channel_with_policy(SECURITY_POLICY_NONE)
    }

    /// Opens a secure channel under the given policy URI. The server only
    /// accepts the None policy; anything else draws a peer error while the
    /// connection stays usable for another attempt.
    pub fn open_channel_with_policy(&mut self, policy: &str) -> Result<()> {
        let token = self.open_secure_channel(policy, 0, 0)?;
        self.channel_id = token.channel_id;
        self.token_id = token.token_id;
        Ok(())
    }

    /// Requests a fresh token for the already open channel.
    pub fn renew_token(&mut self) -> Result<()> {
        let token = self.open_secure_channel(SECURITY_POLICY_NONE, 1, self.channel_id)?;
        self.channel_id = token.channel_id;
        self.token_id = token.token_id;
        Ok(())
    }

    fn open_secure_channel(
        &mut self,
        policy: &str,
        request_type: u32,
        channel_id: u32,
    ) -> Result<ChannelSecurityToken> {
        self.next_seq += 1;
        self.next_request_id += 1;
        self.next_handle += 1;
        let request = OpenSecureChannelRequest {
            header: RequestHeader::new(NodeId::null(), self.next_handle),
            client_protocol_version: 0,
            request_type,
            security_mode: 1,
            client_nonce: None,
            requested_lifetime_ms: 3_600_000,
        };
        let mut w = ByteWriter::new();
        w.write_u32(channel_id);
        w.write_string(Some(policy));
        w.write_bytestring(None);
        w.write_bytestring(None);
        w.write_u32(self.next_seq);
        w.write_u32(self.next_request_id);
        w.write_node_id(&NodeId::numeric(0, ids::OPEN_SECURE_CHANNEL_REQUEST));
        request.encode(&mut w);
        self.send_frame(MessageType::Open, &w.into_vec())?;

        let frame = self.must_read()?;
        match frame.kind {
            MessageType::Open => {
                let mut r = ByteReader::new(&frame.body, "open channel response");
                r.read_u32()?;
                r.read_string()?;
                r.read_bytestring()?;
                r.read_bytestring()?;
                r.read_u32()?;
                r.read_u32()?;
                let type_id = r.read_node_id()?;
                if type_id.as_numeric() != Some((0, ids::OPEN_SECURE_CHANNEL_RESPONSE)) {
                    return Err(Error::ProtocolViolation(format!(
                        "unexpected open-channel response type {type_id}"
                    )));
                }
                Ok(OpenSecureChannelResponse::decode(&mut r)?.token)
            }
            MessageType::Error => Err(peer_error(&frame.body)),
            other => Err(Error::ProtocolViolation(format!(
                "expected an open-channel response, got {other:?}"
            ))),
        }
    }

    /// Sends one service request and decodes the matching response. Fault
    /// responses surface as [`Error::ServiceFault`]. Exposed so tools can
    /// probe services the server does not implement.
    pub fn invoke<T>(
        &mut self,
        request_type_id: u32,
        response_type_id: u32,
        encode: impl FnOnce(&mut ByteWriter),
        decode: impl FnOnce(&mut ByteReader) -> Result<T>,
    ) -> Result<T> {
        self.next_seq += 1;
        self.next_request_id += 1;
        let mut w = ByteWriter::new();
        w.write_u32(self.channel_id);
        w.write_u32(self.token_id);
        w.write_u32(self.next_seq);
        w.write_u32(self.next_request_id);
        w.write_node_id(&NodeId::numeric(0, request_type_id));
        encode(&mut w);
        self.send_frame(MessageType::Msg, &w.into_vec())?;

        let frame = self.must_read()?;
        match frame.kind {
            MessageType::Msg => {
                let mut r = ByteReader::new(&frame.body, "service response envelope");
                r.read_u32()?;
                r.read_u32()?;
                r.read_u32()?;
                r.read_u32()?;
                let type_id = r.read_node_id()?;
                match type_id.as_numeric() {
                    Some((0, id)) if id == response_type_id => {
                        let out = decode(&mut r)?;
                        if r.remaining() != 0 {
                            return Err(Error::ProtocolViolation(
                                "trailing bytes in a service response".into(),
                            ));
                        }
                        Ok(out)
                    }
                    Some((0, ids::SERVICE_FAULT)) => {
                        let fault = ServiceFault::decode(&mut r)?;
                        Err(Error::ServiceFault(fault.header.service_result))
                    }
                    _ => Err(Error::ProtocolViolation(format!(
                        "unexpected response type {type_id}"
                    ))),
                }
            }
            MessageType::Error => Err(peer_error(&frame.body)),
            other => Err(Error::ProtocolViolation(format!(
                "expected a service response, got {other:?}"
            ))),
        }
    }

    fn next_header(&mut self) -> RequestHeader {
        self.next_handle += 1;
        RequestHeader::new(self.auth_token.clone(), self.next_handle)
    }

    pub fn create_session(&mut self, name: &str) -> Result<NodeId> {
        let request = CreateSessionRequest {
            header: self.next_header(),
            client_description: ApplicationDescription::client(),
            server_uri: None,
            endpoint_url: Some(self.endpoint_url.clone()),
            session_name: Some(name.to_string()),
            client_nonce: Some(vec![0; 32]),
            client_certificate: None,
            requested_session_timeout_ms: 600_000.0,
            max_response_message_size: MAX_MESSAGE_SIZE,
        };
        let response = self.invoke(
            ids::CREATE_SESSION_REQUEST,
            ids::CREATE_SESSION_RESPONSE,
            |w| request.encode(w),
            CreateSessionResponse::decode,
        )?;
        self.auth_token = response.auth_token;
        self.session_id = Some(response.session_id.clone());
        Ok(response.session_id)
    }

    pub fn activate_session(&mut self) -> Result<()> {
        let mut token_body = ByteWriter::new();
        token_body.write_string(Some("anonymous"));
        let request = ActivateSessionRequest {
            header: self.next_header(),
            client_signature: SignatureData::null(),
            locale_ids: vec![Some("en".to_string())],
            identity_token: ExtensionObject {
                type_id: NodeId::numeric(0, ids::ANONYMOUS_IDENTITY_TOKEN),
                body: Some(token_body.into_vec()),
            },
            user_token_signature: SignatureData::null(),
        };
        self.invoke(
            ids::ACTIVATE_SESSION_REQUEST,
            ids::ACTIVATE_SESSION_RESPONSE,
            |w| request.encode(w),
            ActivateSessionResponse::decode,
        )?;
        Ok(())
    }

    pub fn browse(&mut self, nodes: &[NodeId]) -> Result<Vec<BrowseResult>> {
        let request = BrowseRequest {
            header: self.next_header(),
            view: ViewDescription::none(),
            requested_max_references_per_node: 0,
            nodes_to_browse: nodes
                .iter()
                .cloned()
                .map(BrowseDescription::forward)
                .collect(),
        };
        let response = self.invoke(
            ids::BROWSE_REQUEST,
            ids::BROWSE_RESPONSE,
            |w| request.encode(w),
            BrowseResponse::decode,
        )?;
        if response.results.len() != nodes.len() {
            return Err(Error::ProtocolViolation(format!(
                "asked to browse {} nodes, got {} results",
                nodes.len(),
                response.results.len()
            )));
        }
        Ok(response.results)
    }

    /// Browses one node and returns its forward references, mapping a bad
    /// per-node status to a fault error.
    pub fn browse_children(&mut self, node: &NodeId) -> Result<Vec<ReferenceDescription>> {
        let mut results = self.browse(std::slice::from_ref(node))?;
        let result = results.remove(0);
        if !StatusCode(result.status_code).is_good() {
            return Err(Error::ServiceFault(result.status_code));
        }
        Ok(result.references)
    }

    /// Reads the value attribute of each node, results in request order.
    pub fn read(&mut self, nodes: &[NodeId]) -> Result<Vec<DataValue>> {
        self.read_value_ids(
            nodes
                .iter()
                .cloned()
                .map(ReadValueId::value_of)
                .collect::<Vec<_>>(),
        )
    }

    pub fn read_value_ids(&mut self, nodes_to_read: Vec<ReadValueId>) -> Result<Vec<DataValue>> {
        let expected = nodes_to_read.len();
        let request = ReadRequest {
            header: self.next_header(),
            max_age_ms: 0.0,
            timestamps_to_return: 0,
            nodes_to_read,
        };
        let response = self.invoke(
            ids::READ_REQUEST,
            ids::READ_RESPONSE,
            |w| request.encode(w),
            ReadResponse::decode,
        )?;
        if response.results.len() != expected {
            return Err(Error::ProtocolViolation(format!(
                "asked to read {expected} nodes, got {} results",
                response.results.len()
            )));
        }
        Ok(response.results)
    }

    /// Writes each value and returns the per-node statuses in request order.
    pub fn write(&mut self, nodes_to_write: Vec<WriteValue>) -> Result<Vec<StatusCode>> {
        let expected = nodes_to_write.len();
        let request = WriteRequest {
            header: self.next_header(),
            nodes_to_write,
        };
        let response = self.invoke(
            ids::WRITE_REQUEST,
            ids::WRITE_RESPONSE,
            |w| request.encode(w),
            WriteResponse::decode,
        )?;
        if response.results.len() != expected {
            return Err(Error::ProtocolViolation(format!(
                "asked to write {expected} nodes, got {} results",
                response.results.len()
            )));
        }
        Ok(response.results.into_iter().map(StatusCode).collect())
    }

    pub fn close_session(&mut self) -> Result<()> {
        let request = CloseSessionRequest {
            header: self.next_header(),
            delete_subscriptions: true,
        };
        self.invoke(
            ids::CLOSE_SESSION_REQUEST,
            ids::CLOSE_SESSION_RESPONSE,
            |w| request.encode(w),
            CloseSessionResponse::decode,
        )?;
        self.auth_token = NodeId::null();
        self.session_id = None;
        Ok(())
    }

    /// Tells the server to drop the channel; no response is expected.
    pub fn close_channel(&mut self) -> Result<()> {
        self.next_seq += 1;
        self.next_request_id += 1;
        let request = CloseSecureChannelRequest {
            header: self.next_header(),
        };
        let mut w = ByteWriter::new();
        w.write_u32(self.channel_id);
        w.write_u32(self.token_id);
        w.write_u32(self.next_seq);
        w.write_u32(self.next_request_id);
        w.write_node_id(&NodeId::numeric(0, ids::CLOSE_SECURE_CHANNEL_REQUEST));
        request.encode(&mut w);
        self.send_frame(MessageType::Close, &w.into_vec())
    }

    pub fn session_id(&self) -> Option<&NodeId> {
        self.session_id.as_ref()
    }

    pub fn channel_id(&self) -> u32 {
        self.channel_id
    }

    pub fn token_id(&self) -> u32 {
        self.token_id
    }

    pub fn auth_token(&self) -> &NodeId {
        &self.auth_token
    }

    /// Replaces the session token sent with each request; lets tests imitate
    /// a client guessing tokens.
    pub fn set_auth_token(&mut self, token: NodeId) {
        self.auth_token = token;
    }

    /// Corrupts the channel id sent with each request; test hook.
    pub fn set_channel_id(&mut self, channel_id: u32) {
        self.channel_id = channel_id;
    }

    fn send_frame(&self, kind: MessageType, body: &[u8]) -> Result<()> {
        let mut writer = &self.stream;
        write_frame(&mut writer, kind, body)
    }

    fn must_read(&mut self) -> Result<Frame> {
        let mut reader = &self.stream;
        match read_frame(&mut reader)? {
            Some(frame) => Ok(frame),
            None => Err(Error::ProtocolViolation(
                "server closed the connection".into(),
            )),
        }
    }
}

fn peer_error(body: &[u8]) -> Error {
    match ErrorMessage::decode(body) {
        Ok(e) => Error::PeerError {
            code: e.code,
            reason: e.reason.unwrap_or_default(),
        },
        Err(e) => e,
    }
}
