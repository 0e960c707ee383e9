//! Service request/response structures and their binary layout.
//!
//! Numeric ids are the `Encoding_DefaultBinary` node ids from the OPC UA
//! registry. Every structure encodes and decodes symmetrically; the decoder
//! accepts exactly the subset this stack produces plus whatever a client
//! within that subset may legally vary.

use crate::codec::{
    now_ticks, ByteReader, ByteWriter, ExtensionObject, LocalizedText, NodeId, QualifiedName,
    Variant,
};
use crate::status::StatusCode;
use crate::{Error, Result};

pub mod service_ids {
    pub const SERVICE_FAULT: u32 = 397;
    pub const OPEN_SECURE_CHANNEL_REQUEST: u32 = 446;
    pub const OPEN_SECURE_CHANNEL_RESPONSE: u32 = 449;
    pub const CLOSE_SECURE_CHANNEL_REQUEST: u32 = 452;
    pub const CREATE_SESSION_REQUEST: u32 = 461;
    pub const CREATE_SESSION_RESPONSE: u32 = 464;
    pub const ACTIVATE_SESSION_REQUEST: u32 = 467;
    pub const ACTIVATE_SESSION_RESPONSE: u32 = 470;
    pub const CLOSE_SESSION_REQUEST: u32 = 473;
    pub const CLOSE_SESSION_RESPONSE: u32 = 476;
    pub const BROWSE_REQUEST: u32 = 527;
    pub const BROWSE_RESPONSE: u32 = 530;
    pub const READ_REQUEST: u32 = 631;
    pub const READ_RESPONSE: u32 = 634;
    pub const WRITE_REQUEST: u32 = 673;
    pub const WRITE_RESPONSE: u32 = 676;
    pub const ANONYMOUS_IDENTITY_TOKEN: u32 = 321;
}

/// Attribute id of a variable's current value.
pub const ATTRIBUTE_VALUE: u32 = 13;

/// Reference type ids used in browse results.
pub const REF_HIERARCHICAL: u32 = 33;
pub const REF_ORGANIZES: u32 = 35;
pub const REF_HAS_COMPONENT: u32 = 47;

fn write_diagnostic_infos(w: &mut ByteWriter) {
    w.write_array_len(0);
}

fn read_diagnostic_infos(r: &mut ByteReader) -> Result<()> {
    let n = r.read_array_len()?;
    for _ in 0..n {
        let mask = r.read_u8()?;
        if mask != 0 {
            return Err(Error::InvalidEncodingByte {
                context: "diagnostic info",
                byte: mask,
            });
        }
    }
    Ok(())
}

fn read_status_array(r: &mut ByteReader) -> Result<Vec<u32>> {
    let n = r.read_array_len()?;
    (0..n).map(|_| r.read_u32()).collect()
}

fn write_status_array(w: &mut ByteWriter, statuses: &[u32]) {
    w.write_array_len(statuses.len());
    for s in statuses {
        w.write_u32(*s);
    }
}

/// Common prefix of every service request.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestHeader {
    pub auth_token: NodeId,
    pub timestamp: i64,
    pub request_handle: u32,
    pub return_diagnostics: u32,
    pub audit_entry_id: Option<String>,
    pub timeout_hint: u32,
}

impl RequestHeader {
    pub fn new(auth_token: NodeId, request_handle: u32) -> RequestHeader {
        RequestHeader {
            auth_token,
            timestamp: now_ticks(),
            request_handle,
            return_diagnostics: 0,
            audit_entry_id: None,
            timeout_hint: 10_000,
        }
    }

    pub fn encode(&self, w: &mut ByteWriter) {
        w.write_node_id(&self.auth_token);
        w.write_i64(self.timestamp);
        w.write_u32(self.request_handle);
        w.write_u32(self.return_diagnostics);
        w.write_string(self.audit_entry_id.as_deref());
        w.write_u32(self.timeout_hint);
        w.write_extension_object(&ExtensionObject::null());
    }

    pub fn decode(r: &mut ByteReader) -> Result<RequestHeader> {
        let header = RequestHeader {
            auth_token: r.read_node_id()?,
            timestamp: r.read_i64()?,
            request_handle: r.read_u32()?,
            return_diagnostics: r.read_u32()?,
            audit_entry_id: r.read_string()?,
            timeout_hint: r.read_u32()?,
        };
        r.read_extension_object()?;
        Ok(header)
    }
}

/// Common prefix of every service response.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseHeader {
    pub timestamp: i64,
    pub request_handle: u32,
    pub service_result: u32,
}

impl ResponseHeader {
    pub fn ok(request_handle: u32) -> ResponseHeader {
        ResponseHeader {
            timestamp: now_ticks(),
            request_handle,
            service_result: StatusCode::GOOD.0,
        }
    }

    pub fn fault(request_handle: u32, status: StatusCode) -> ResponseHeader {
        ResponseHeader {
            timestamp: now_ticks(),
            request_handle,
            service_result: status.0,
        }
    }

    pub fn encode(&self, w: &mut ByteWriter) {
        w.write_i64(self.timestamp);
        w.write_u32(self.request_handle);
        w.write_u32(self.service_result);
        w.write_u8(0);
        w.write_array_len(0);
        w.write_extension_object(&ExtensionObject::null());
    }

    pub fn decode(r: &mut ByteReader) -> Result<ResponseHeader> {
        let header = ResponseHeader {
            timestamp: r.read_i64()?,
            request_handle: r.read_u32()?,
            service_result: r.read_u32()?,
        };
        let diag = r.read_u8()?;
        if diag != 0 {
            return Err(Error::InvalidEncodingByte {
                context: "service diagnostics",
                byte: diag,
            });
        }
        let strings = r.read_array_len()?;
        for _ in 0..strings {
            r.read_string()?;
        }
        r.read_extension_object()?;
        Ok(header)
    }
}

/// Bare fault response carrying only a header.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceFault {
    pub header: ResponseHeader,
}

impl ServiceFault {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
    }

    pub fn decode(r: &mut ByteReader) -> Result<ServiceFault> {
        Ok(ServiceFault {
            header: ResponseHeader::decode(r)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureData {
    pub algorithm: Option<String>,
    pub signature: Option<Vec<u8>>,
}

impl SignatureData {
    pub fn null() -> SignatureData {
        SignatureData {
            algorithm: None,
            signature: None,
        }
    }

    fn encode(&self, w: &mut ByteWriter) {
        w.write_string(self.algorithm.as_deref());
        w.write_bytestring(self.signature.as_deref());
    }

    fn decode(r: &mut ByteReader) -> Result<SignatureData> {
        Ok(SignatureData {
            algorithm: r.read_string()?,
            signature: r.read_bytestring()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApplicationDescription {
    pub application_uri: Option<String>,
    pub product_uri: Option<String>,
    pub application_name: LocalizedText,
    pub application_type: u32,
    pub gateway_server_uri: Option<String>,
    pub discovery_profile_uri: Option<String>,
    pub discovery_urls: Vec<Option<String>>,
}

impl ApplicationDescription {
    /// Anonymous client placeholder; type 1 is "client".
    pub fn client() -> ApplicationDescription {
        ApplicationDescription {
            application_uri: None,
            product_uri: None,
            application_name: LocalizedText {
                locale: None,
                text: None,
            },
            application_type: 1,
            gateway_server_uri: None,
            discovery_profile_uri: None,
            discovery_urls: Vec::new(),
        }
    }

    fn encode(&self, w: &mut ByteWriter) {
        w.write_string(self.application_uri.as_deref());
        w.write_string(self.product_uri.as_deref());
        w.write_localized_text(&self.application_name);
        w.write_u32(self.application_type);
        w.write_string(self.gateway_server_uri.as_deref());
        w.write_string(self.discovery_profile_uri.as_deref());
        w.write_array_len(self.discovery_urls.len());
        for url in &self.discovery_urls {
            w.write_string(url.as_deref());
        }
    }

    fn decode(r: &mut ByteReader) -> Result<ApplicationDescription> {
        Ok(ApplicationDescription {
            application_uri: r.read_string()?,
            product_uri: r.read_string()?,
            application_name: r.read_localized_text()?,
            application_type: r.read_u32()?,
            gateway_server_uri: r.read_string()?,
            discovery_profile_uri: r.read_string()?,
            discovery_urls: {
                let n = r.read_array_len()?;
                (0..n).map(|_| r.read_string()).collect::<Result<_>>()?
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenSecureChannelRequest {
    pub header: RequestHeader,
    pub client_protocol_version: u32,
    /// 0 issues a new token, 1 renews the current channel's token.
    pub request_type: u32,
    pub security_mode: u32,
    pub client_nonce: Option<Vec<u8>>,
    pub requested_lifetime_ms: u32,
}

impl OpenSecureChannelRequest {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        w.write_u32(self.client_protocol_version);
        w.write_u32(self.request_type);
        w.write_u32(self.security_mode);
        w.write_bytestring(self.client_nonce.as_deref());
        w.write_u32(self.requested_lifetime_ms);
    }

    pub fn decode(r: &mut ByteReader) -> Result<OpenSecureChannelRequest> {
        Ok(OpenSecureChannelRequest {
            header: RequestHeader::decode(r)?,
            client_protocol_version: r.read_u32()?,
            request_type: r.read_u32()?,
            security_mode: r.read_u32()?,
            client_nonce: r.read_bytestring()?,
            requested_lifetime_ms: r.read_u32()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSecurityToken {
    pub channel_id: u32,
    pub token_id: u32,
    pub created_at: i64,
    pub revised_lifetime_ms: u32,
}

impl ChannelSecurityToken {
    fn encode(&self, w: &mut ByteWriter) {
        w.write_u32(self.channel_id);
        w.write_u32(self.token_id);
        w.write_i64(self.created_at);
        w.write_u32(self.revised_lifetime_ms);
    }

    fn decode(r: &mut ByteReader) -> Result<ChannelSecurityToken> {
        Ok(ChannelSecurityToken {
            channel_id: r.read_u32()?,
            token_id: r.read_u32()?,
            created_at: r.read_i64()?,
            revised_lifetime_ms: r.read_u32()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenSecureChannelResponse {
    pub header: ResponseHeader,
    pub server_protocol_version: u32,
    pub token: ChannelSecurityToken,
    pub server_nonce: Option<Vec<u8>>,
}

impl OpenSecureChannelResponse {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        w.write_u32(self.server_protocol_version);
        self.token.encode(w);
        w.write_bytestring(self.server_nonce.as_deref());
    }

    pub fn decode(r: &mut ByteReader) -> Result<OpenSecureChannelResponse> {
        Ok(OpenSecureChannelResponse {
            header: ResponseHeader::decode(r)?,
            server_protocol_version: r.read_u32()?,
            token: ChannelSecurityToken::decode(r)?,
            server_nonce: r.read_bytestring()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloseSecureChannelRequest {
    pub header: RequestHeader,
}

impl CloseSecureChannelRequest {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
    }

    pub fn decode(r: &mut ByteReader) -> Result<CloseSecureChannelRequest> {
        Ok(CloseSecureChannelRequest {
            header: RequestHeader::decode(r)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CreateSessionRequest {
    pub header: RequestHeader,
    pub client_description: ApplicationDescription,
    pub server_uri: Option<String>,
    pub endpoint_url: Option<String>,
    pub session_name: Option<String>,
    pub client_nonce: Option<Vec<u8>>,
    pub client_certificate: Option<Vec<u8>>,
    pub requested_session_timeout_ms: f64,
    pub max_response_message_size: u32,
}

impl CreateSessionRequest {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        self.client_description.encode(w);
        w.write_string(self.server_uri.as_deref());
        w.write_string(self.endpoint_url.as_deref());
        w.write_string(self.session_name.as_deref());
        w.write_bytestring(self.client_nonce.as_deref());
        w.write_bytestring(self.client_certificate.as_deref());
        w.write_f64(self.requested_session_timeout_ms);
        w.write_u32(self.max_response_message_size);
    }

    pub fn decode(r: &mut ByteReader) -> Result<CreateSessionRequest> {
        Ok(CreateSessionRequest {
            header: RequestHeader::decode(r)?,
            client_description: ApplicationDescription::decode(r)?,
            server_uri: r.read_string()?,
            endpoint_url: r.read_string()?,
            session_name: r.read_string()?,
            client_nonce: r.read_bytestring()?,
            client_certificate: r.read_bytestring()?,
            requested_session_timeout_ms: r.read_f64()?,
            max_response_message_size: r.read_u32()?,
        })
    }
}

/// Endpoint and certificate arrays are always empty in this stack, so the
/// decoder refuses non-empty ones instead of implementing their layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CreateSessionResponse {
    pub header: ResponseHeader,
    pub session_id: NodeId,
    pub auth_token: NodeId,
    pub revised_session_timeout_ms: f64,
    pub server_nonce: Option<Vec<u8>>,
    pub server_certificate: Option<Vec<u8>>,
    pub server_signature: SignatureData,
    pub max_request_message_size: u32,
}

impl CreateSessionResponse {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        w.write_node_id(&self.session_id);
        w.write_node_id(&self.auth_token);
        w.write_f64(self.revised_session_timeout_ms);
        w.write_bytestring(self.server_nonce.as_deref());
        w.write_bytestring(self.server_certificate.as_deref());
        w.write_array_len(0);
        w.write_array_len(0);
        self.server_signature.encode(w);
        w.write_u32(self.max_request_message_size);
    }

    pub fn decode(r: &mut ByteReader) -> Result<CreateSessionResponse> {
        let header = ResponseHeader::decode(r)?;
        let session_id = r.read_node_id()?;
        let auth_token = r.read_node_id()?;
        let revised_session_timeout_ms = r.read_f64()?;
        let server_nonce = r.read_bytestring()?;
        let server_certificate = r.read_bytestring()?;
        if r.read_array_len()? != 0 {
            return Err(Error::ProtocolViolation(
                "endpoint descriptions are not supported".into(),
            ));
        }
        if r.read_array_len()? != 0 {
            return Err(Error::ProtocolViolation(
                "software certificates are not supported".into(),
            ));
        }
        Ok(CreateSessionResponse {
            header,
            session_id,
            auth_token,
            revised_session_timeout_ms,
            server_nonce,
            server_certificate,
            server_signature: SignatureData::decode(r)?,
            max_request_message_size: r.read_u32()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivateSessionRequest {
    pub header: RequestHeader,
    pub client_signature: SignatureData,
    pub locale_ids: Vec<Option<String>>,
    /// Anonymous identity token wrapped as an extension object.
    pub identity_token: ExtensionObject,
    pub user_token_signature: SignatureData,
}

impl ActivateSessionRequest {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        self.client_signature.encode(w);
        w.write_array_len(0);
        w.write_array_len(self.locale_ids.len());
        for l in &self.locale_ids {
            w.write_string(l.as_deref());
        }
        w.write_extension_object(&self.identity_token);
        self.user_token_signature.encode(w);
    }

    pub fn decode(r: &mut ByteReader) -> Result<ActivateSessionRequest> {
        let header = RequestHeader::decode(r)?;
        let client_signature = SignatureData::decode(r)?;
        if r.read_array_len()? != 0 {
            return Err(Error::ProtocolViolation(
                "software certificates are not supported".into(),
            ));
        }
        let locales = r.read_array_len()?;
        let locale_ids = (0..locales)
            .map(|_| r.read_string())
            .collect::<Result<_>>()?;
        Ok(ActivateSessionRequest {
            header,
            client_signature,
            locale_ids,
            identity_token: r.read_extension_object()?,
            user_token_signature: SignatureData::decode(r)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivateSessionResponse {
    pub header: ResponseHeader,
    pub server_nonce: Option<Vec<u8>>,
    pub results: Vec<u32>,
}

impl ActivateSessionResponse {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        w.write_bytestring(self.server_nonce.as_deref());
        write_status_array(w, &self.results);
        write_diagnostic_infos(w);
    }

    pub fn decode(r: &mut ByteReader) -> Result<ActivateSessionResponse> {
        let out = ActivateSessionResponse {
            header: ResponseHeader::decode(r)?,
            server_nonce: r.read_bytestring()?,
            results: read_status_array(r)?,
        };
        read_diagnostic_infos(r)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloseSessionRequest {
    pub header: RequestHeader,
    pub delete_subscriptions: bool,
}

impl CloseSessionRequest {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        w.write_bool(self.delete_subscriptions);
    }

    pub fn decode(r: &mut ByteReader) -> Result<CloseSessionRequest> {
        Ok(CloseSessionRequest {
            header: RequestHeader::decode(r)?,
            delete_subscriptions: r.read_bool()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloseSessionResponse {
    pub header: ResponseHeader,
}

impl CloseSessionResponse {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
    }

    pub fn decode(r: &mut ByteReader) -> Result<CloseSessionResponse> {
        Ok(CloseSessionResponse {
            header: ResponseHeader::decode(r)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewDescription {
    pub view_id: NodeId,
    pub timestamp: i64,
    pub view_version: u32,
}

impl ViewDescription {
    pub fn none() -> ViewDescription {
        ViewDescription {
            view_id: NodeId::null(),
            timestamp: 0,
            view_version: 0,
        }
    }

    fn encode(&self, w: &mut ByteWriter) {
        w.write_node_id(&self.view_id);
        w.write_i64(self.timestamp);
        w.write_u32(self.view_version);
    }

    fn decode(r: &mut ByteReader) -> Result<ViewDescription> {
        Ok(ViewDescription {
            view_id: r.read_node_id()?,
            timestamp: r.read_i64()?,
            view_version: r.read_u32()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrowseDescription {
    pub node_id: NodeId,
    pub browse_direction: u32,
    pub reference_type_id: NodeId,
    pub include_subtypes: bool,
    pub node_class_mask: u32,
    pub result_mask: u32,
}

impl BrowseDescription {
    /// Forward hierarchical references, all classes, all result fields.
    pub fn forward(node_id: NodeId) -> BrowseDescription {
        BrowseDescription {
            node_id,
            browse_direction: 0,
            reference_type_id: NodeId::numeric(0, REF_HIERARCHICAL),
            include_subtypes: true,
            node_class_mask: 0,
            result_mask: 0x3F,
        }
    }

    fn encode(&self, w: &mut ByteWriter) {
        w.write_node_id(&self.node_id);
        w.write_u32(self.browse_direction);
        w.write_node_id(&self.reference_type_id);
        w.write_bool(self.include_subtypes);
        w.write_u32(self.node_class_mask);
        w.write_u32(self.result_mask);
    }

    fn decode(r: &mut ByteReader) -> Result<BrowseDescription> {
        Ok(BrowseDescription {
            node_id: r.read_node_id()?,
            browse_direction: r.read_u32()?,
            reference_type_id: r.read_node_id()?,
            include_subtypes: r.read_bool()?,
            node_class_mask: r.read_u32()?,
            result_mask: r.read_u32()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrowseRequest {
    pub header: RequestHeader,
    pub view: ViewDescription,
    pub requested_max_references_per_node: u32,
    pub nodes_to_browse: Vec<BrowseDescription>,
}

impl BrowseRequest {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        self.view.encode(w);
        w.write_u32(self.requested_max_references_per_node);
        w.write_array_len(self.nodes_to_browse.len());
        for node in &self.nodes_to_browse {
            node.encode(w);
        }
    }

    pub fn decode(r: &mut ByteReader) -> Result<BrowseRequest> {
        Ok(BrowseRequest {
            header: RequestHeader::decode(r)?,
            view: ViewDescription::decode(r)?,
            requested_max_references_per_node: r.read_u32()?,
            nodes_to_browse: {
                let n = r.read_array_len()?;
                (0..n)
                    .map(|_| BrowseDescription::decode(r))
                    .collect::<Result<_>>()?
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDescription {
    pub reference_type_id: NodeId,
    pub is_forward: bool,
    pub node_id: NodeId,
    pub browse_name: QualifiedName,
    pub display_name: LocalizedText,
    pub node_class: u32,
    pub type_definition: NodeId,
}

impl ReferenceDescription {
    fn encode(&self, w: &mut ByteWriter) {
        w.write_node_id(&self.reference_type_id);
        w.write_bool(self.is_forward);
        w.write_expanded_node_id(&self.node_id);
        w.write_qualified_name(&self.browse_name);
        w.write_localized_text(&self.display_name);
        w.write_u32(self.node_class);
        w.write_expanded_node_id(&self.type_definition);
    }

    fn decode(r: &mut ByteReader) -> Result<ReferenceDescription> {
        Ok(ReferenceDescription {
            reference_type_id: r.read_node_id()?,
            is_forward: r.read_bool()?,
            node_id: r.read_expanded_node_id()?,
            browse_name: r.read_qualified_name()?,
            display_name: r.read_localized_text()?,
            node_class: r.read_u32()?,
            type_definition: r.read_expanded_node_id()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrowseResult {
    pub status_code: u32,
    pub continuation_point: Option<Vec<u8>>,
    pub references: Vec<ReferenceDescription>,
}

impl BrowseResult {
    fn encode(&self, w: &mut ByteWriter) {
        w.write_u32(self.status_code);
        w.write_bytestring(self.continuation_point.as_deref());
        w.write_array_len(self.references.len());
        for reference in &self.references {
            reference.encode(w);
        }
    }

    fn decode(r: &mut ByteReader) -> Result<BrowseResult> {
        Ok(BrowseResult {
            status_code: r.read_u32()?,
            continuation_point: r.read_bytestring()?,
            references: {
                let n = r.read_array_len()?;
                (0..n)
                    .map(|_| ReferenceDescription::decode(r))
                    .collect::<Result<_>>()?
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrowseResponse {
    pub header: ResponseHeader,
    pub results: Vec<BrowseResult>,
}

impl BrowseResponse {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        w.write_array_len(self.results.len());
        for result in &self.results {
            result.encode(w);
        }
        write_diagnostic_infos(w);
    }

    pub fn decode(r: &mut ByteReader) -> Result<BrowseResponse> {
        let out = BrowseResponse {
            header: ResponseHeader::decode(r)?,
            results: {
                let n = r.read_array_len()?;
                (0..n)
                    .map(|_| BrowseResult::decode(r))
                    .collect::<Result<_>>()?
            },
        };
        read_diagnostic_infos(r)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadValueId {
    pub node_id: NodeId,
    pub attribute_id: u32,
    pub index_range: Option<String>,
    pub data_encoding: QualifiedName,
}

impl ReadValueId {
    pub fn value_of(node_id: NodeId) -> ReadValueId {
        ReadValueId {
            node_id,
            attribute_id: ATTRIBUTE_VALUE,
            index_range: None,
            data_encoding: QualifiedName {
                namespace: 0,
                name: None,
            },
        }
    }

    fn encode(&self, w: &mut ByteWriter) {
        w.write_node_id(&self.node_id);
        w.write_u32(self.attribute_id);
        w.write_string(self.index_range.as_deref());
        w.write_qualified_name(&self.data_encoding);
    }

    fn decode(r: &mut ByteReader) -> Result<ReadValueId> {
        Ok(ReadValueId {
            node_id: r.read_node_id()?,
            attribute_id: r.read_u32()?,
            index_range: r.read_string()?,
            data_encoding: r.read_qualified_name()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadRequest {
    pub header: RequestHeader,
    pub max_age_ms: f64,
    pub timestamps_to_return: u32,
    pub nodes_to_read: Vec<ReadValueId>,
}

impl ReadRequest {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        w.write_f64(self.max_age_ms);
        w.write_u32(self.timestamps_to_return);
        w.write_array_len(self.nodes_to_read.len());
        for node in &self.nodes_to_read {
            node.encode(w);
        }
    }

    pub fn decode(r: &mut ByteReader) -> Result<ReadRequest> {
        Ok(ReadRequest {
            header: RequestHeader::decode(r)?,
            max_age_ms: r.read_f64()?,
            timestamps_to_return: r.read_u32()?,
            nodes_to_read: {
                let n = r.read_array_len()?;
                (0..n)
                    .map(|_| ReadValueId::decode(r))
                    .collect::<Result<_>>()?
            },
        })
    }
}

/// A value with its quality and timestamps, encoded behind a presence mask.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataValue {
    pub value: Option<Variant>,
    pub status: Option<u32>,
    pub source_timestamp: Option<i64>,
    pub server_timestamp: Option<i64>,
}

impl DataValue {
    pub fn good(value: Variant, source_timestamp: i64) -> DataValue {
        DataValue {
            value: Some(value),
            status: None,
            source_timestamp: Some(source_timestamp),
            server_timestamp: None,
        }
    }

    pub fn bad(status: StatusCode) -> DataValue {
        DataValue {
            value: None,
            status: Some(status.0),
            source_timestamp: None,
            server_timestamp: None,
        }
    }

    /// Missing status means Good by convention.
    pub fn status_code(&self) -> StatusCode {
        StatusCode(self.status.unwrap_or(0))
    }

    pub fn encode(&self, w: &mut ByteWriter) {
        let mask = (self.value.is_some() as u8)
            | ((self.status.is_some() as u8) << 1)
            | ((self.source_timestamp.is_some() as u8) << 2)
            | ((self.server_timestamp.is_some() as u8) << 3);
        w.write_u8(mask);
        if let Some(v) = &self.value {
            w.write_variant(v);
        }
        if let Some(s) = self.status {
            w.write_u32(s);
        }
        if let Some(t) = self.source_timestamp {
            w.write_i64(t);
        }
        if let Some(t) = self.server_timestamp {
            w.write_i64(t);
        }
    }

    pub fn decode(r: &mut ByteReader) -> Result<DataValue> {
        let mask = r.read_u8()?;
        if mask & !0x0F != 0 {
            return Err(Error::InvalidEncodingByte {
                context: "data value",
                byte: mask,
            });
        }
        Ok(DataValue {
            value: if mask & 0x01 != 0 {
                Some(r.read_variant()?)
            } else {
                None
            },
            status: if mask & 0x02 != 0 {
                Some(r.read_u32()?)
            } else {
                None
            },
            source_timestamp: if mask & 0x04 != 0 {
                Some(r.read_i64()?)
            } else {
                None
            },
            server_timestamp: if mask & 0x08 != 0 {
                Some(r.read_i64()?)
            } else {
                None
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadResponse {
    pub header: ResponseHeader,
    pub results: Vec<DataValue>,
}

impl ReadResponse {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        w.write_array_len(self.results.len());
        for result in &self.results {
            result.encode(w);
        }
        write_diagnostic_infos(w);
    }

    pub fn decode(r: &mut ByteReader) -> Result<ReadResponse> {
        let out = ReadResponse {
            header: ResponseHeader::decode(r)?,
            results: {
                let n = r.read_array_len()?;
                (0..n)
                    .map(|_| DataValue::decode(r))
                    .collect::<Result<_>>()?
            },
        };
        read_diagnostic_infos(r)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WriteValue {
    pub node_id: NodeId,
    pub attribute_id: u32,
    pub index_range: Option<String>,
    pub value: DataValue,
}

impl WriteValue {
    pub fn value_of(node_id: NodeId, value: Variant) -> WriteValue {
        WriteValue {
            node_id,
            attribute_id: ATTRIBUTE_VALUE,
            index_range: None,
            value: DataValue {
                value: Some(value),
                status: None,
                source_timestamp: None,
                server_timestamp: None,
            },
        }
    }

    fn encode(&self, w: &mut ByteWriter) {
        w.write_node_id(&self.node_id);
        w.write_u32(self.attribute_id);
        w.write_string(self.index_range.as_deref());
        self.value.encode(w);
    }

    fn decode(r: &mut ByteReader) -> Result<WriteValue> {
        Ok(WriteValue {
            node_id: r.read_node_id()?,
            attribute_id: r.read_u32()?,
            index_range: r.read_string()?,
            value: DataValue::decode(r)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WriteRequest {
    pub header: RequestHeader,
    pub nodes_to_write: Vec<WriteValue>,
}

impl WriteRequest {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        w.write_array_len(self.nodes_to_write.len());
        for node in &self.nodes_to_write {
            node.encode(w);
        }
    }

    pub fn decode(r: &mut ByteReader) -> Result<WriteRequest> {
        Ok(WriteRequest {
            header: RequestHeader::decode(r)?,
            nodes_to_write: {
                let n = r.read_array_len()?;
                (0..n)
                    .map(|_| WriteValue::decode(r))
                    .collect::<Result<_>>()?
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WriteResponse {
    pub header: ResponseHeader,
    pub results: Vec<u32>,
}

impl WriteResponse {
    pub fn encode(&self, w: &mut ByteWriter) {
        self.header.encode(w);
        write_status_array(w, &self.results);
        write_diagnostic_infos(w);
    }

    pub fn decode(r: &mut ByteReader) -> Result<WriteResponse> {
        let out = WriteResponse {
            header: ResponseHeader::decode(r)?,
            results: read_status_array(r)?,
        };
        read_diagnostic_infos(r)?;
        Ok(out)
    }
}
