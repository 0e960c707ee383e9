//! OPC UA binary encoding primitives.
//!
//! Everything is little-endian. Strings and byte strings carry an Int32
//! length prefix with -1 meaning null. The reader never trusts a declared
//! length beyond what the buffer actually holds, so arbitrary input yields
//! a structured error rather than an allocation or a panic.

use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::{Error, Result};

/// Offset of the Unix epoch from the OPC UA epoch (1601-01-01), in 100 ns
/// ticks.
pub const UNIX_EPOCH_TICKS: i64 = 116_444_736_000_000_000;

/// Current wall-clock time as an OPC UA DateTime.
pub fn now_ticks() -> i64 {
    ticks_from_system_time(SystemTime::now())
}

pub fn ticks_from_system_time(t: SystemTime) -> i64 {
    match t.duration_since(UNIX_EPOCH) {
        Ok(d) => UNIX_EPOCH_TICKS + (d.as_nanos() / 100) as i64,
        Err(e) => UNIX_EPOCH_TICKS - (e.duration().as_nanos() / 100) as i64,
    }
}

/// Identifier part of a node id. Our nodes are all numeric; the other forms
/// exist so any well-formed id a client sends can be parsed (and then fail
/// lookup) instead of killing the connection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeIdValue {
    Numeric(u32),
    String(String),
    Guid([u8; 16]),
    Bytes(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeId {
    pub namespace: u16,
    pub value: NodeIdValue,
}

impl NodeId {
    pub const fn numeric(namespace: u16, id: u32) -> NodeId {
        NodeId {
            namespace,
            value: NodeIdValue::Numeric(id),
        }
    }

    pub const fn null() -> NodeId {
        NodeId::numeric(0, 0)
    }

    pub fn is_null(&self) -> bool {
        *self == NodeId::null()
    }

    pub fn as_numeric(&self) -> Option<(u16, u32)> {
        match self.value {
            NodeIdValue::Numeric(id) => Some((self.namespace, id)),
            _ => None,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.namespace != 0 {
            write!(f, "ns={};", self.namespace)?;
        }
        match &self.value {
            NodeIdValue::Numeric(id) => write!(f, "i={id}"),
            NodeIdValue::String(s) => write!(f, "s={s}"),
            NodeIdValue::Guid(g) => write!(f, "g={g:02x?}"),
            NodeIdValue::Bytes(b) => write!(f, "b={b:02x?}"),
        }
    }
}

/// A scalar value on the wire, tagged with its OPC UA type id.
#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    Null,
    Boolean(bool),
    Int32(i32),
    UInt32(u32),
    Double(f64),
    String(Option<String>),
    DateTime(i64),
    NodeId(NodeId),
    StatusCode(u32),
}

impl Variant {
    pub fn type_name(&self) -> &'static str {
        match self {
            Variant::Null => "Null",
            Variant::Boolean(_) => "Boolean",
            Variant::Int32(_) => "Int32",
            Variant::UInt32(_) => "UInt32",
            Variant::Double(_) => "Double",
            Variant::String(_) => "String",
            Variant::DateTime(_) => "DateTime",
            Variant::NodeId(_) => "NodeId",
            Variant::StatusCode(_) => "StatusCode",
        }
    }
}

/// Two-part name of a node within its namespace.
#[derive(Debug, Clone, PartialEq)]
pub struct QualifiedName {
    pub namespace: u16,
    pub name: Option<String>,
}

/// Human-readable text with an optional locale.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizedText {
    pub locale: Option<String>,
    pub text: Option<String>,
}

impl LocalizedText {
    pub fn plain(text: &str) -> LocalizedText {
        LocalizedText {
            locale: None,
            text: Some(text.to_string()),
        }
    }
}

/// Opaque structure container: a type id plus its encoded body.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionObject {
    pub type_id: NodeId,
    pub body: Option<Vec<u8>>,
}

impl ExtensionObject {
    pub fn null() -> ExtensionObject {
        ExtensionObject {
            type_id: NodeId::null(),
            body: None,
        }
    }
}

/// Bounds-checked cursor over one received message.
pub struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
    context: &'static str,
}

impl<'a> ByteReader<'a> {
    pub fn new(buf: &'a [u8], context: &'static str) -> ByteReader<'a> {
        ByteReader {
            buf,
            pos: 0,
            context,
        }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    /// Rewinds to a position previously returned by [`position`](Self::position),
    /// so a caller can peek at a common prefix and then re-decode in full.
    pub fn seek(&mut self, pos: usize) {
        assert!(pos <= self.buf.len(), "seek past the end of the buffer");
        self.pos = pos;
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::Truncated {
                context: self.context,
            });
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    pub fn read_u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn read_bool(&mut self) -> Result<bool> {
        Ok(self.read_u8()? != 0)
    }

    pub fn read_u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn read_u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn read_i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn read_i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn read_f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn read_string(&mut self) -> Result<Option<String>> {
        match self.read_bytestring()? {
            None => Ok(None),
            Some(bytes) => match String::from_utf8(bytes) {
                Ok(s) => Ok(Some(s)),
                Err(e) => {
                    let at = e.utf8_error().valid_up_to();
                    Err(Error::InvalidEncodingByte {
                        context: "utf-8 string",
                        byte: e.as_bytes()[at],
                    })
                }
            },
        }
    }

    pub fn read_bytestring(&mut self) -> Result<Option<Vec<u8>>> {
        let len = self.read_i32()?;
        if len == -1 {
            return Ok(None);
        }
        if len < -1 {
            return Err(Error::InvalidEncodingByte {
                context: "byte string length",
                byte: (len & 0xFF) as u8,
            });
        }
        Ok(Some(self.take(len as usize)?.to_vec()))
    }

    /// Array length prefix; null (-1) counts as empty. The declared count is
    /// checked against the bytes actually left so a hostile length cannot
    /// drive a huge allocation.
    pub fn read_array_len(&mut self) -> Result<usize> {
        let len = self.read_i32()?;
        if len <= 0 {
            if len < -1 {
                return Err(Error::InvalidEncodingByte {
                    context: "array length",
                    byte: (len & 0xFF) as u8,
                });
            }
            return Ok(0);
        }
        let len = len as usize;
        if len > self.remaining() {
            return Err(Error::Truncated {
                context: self.context,
            });
        }
        Ok(len)
    }

    pub fn read_node_id(&mut self) -> Result<NodeId> {
        let encoding = self.read_u8()?;
        if encoding & 0xF0 != 0 {
            return Err(Error::InvalidEncodingByte {
                context: "node id",
                byte: encoding,
            });
        }
        self.read_node_id_form(encoding)
    }

    fn read_node_id_form(&mut self, form: u8) -> Result<NodeId> {
        match form & 0x0F {
            0x00 => Ok(NodeId::numeric(0, self.read_u8()? as u32)),
            0x01 => {
                let ns = self.read_u8()? as u16;
                Ok(NodeId::numeric(ns, self.read_u16()? as u32))
            }
            0x02 => {
                let ns = self.read_u16()?;
                Ok(NodeId::numeric(ns, self.read_u32()?))
            }
            0x03 => {
                let ns = self.read_u16()?;
                let s = self.read_string()?.unwrap_or_default();
                Ok(NodeId {
                    namespace: ns,
                    value: NodeIdValue::String(s),
                })
            }
            0x04 => {
                let ns = self.read_u16()?;
                let guid: [u8; 16] = self.take(16)?.try_into().unwrap();
                Ok(NodeId {
                    namespace: ns,
                    value: NodeIdValue::Guid(guid),
                })
            }
            0x05 => {
                let ns = self.read_u16()?;
                let b = self.read_bytestring()?.unwrap_or_default();
                Ok(NodeId {
                    namespace: ns,
                    value: NodeIdValue::Bytes(b),
                })
            }
            byte => Err(Error::InvalidEncodingByte {
                context: "node id",
                byte,
            }),
        }
    }

    /// ExpandedNodeId; any namespace-URI or server-index extras are read and
    /// dropped, we only route on the embedded node id.
    pub fn read_expanded_node_id(&mut self) -> Result<NodeId> {
        let encoding = self.read_u8()?;
        if encoding & 0x30 != 0 {
            return Err(Error::InvalidEncodingByte {
                context: "expanded node id",
                byte: encoding,
            });
        }
        let id = self.read_node_id_form(encoding)?;
        if encoding & 0x80 != 0 {
            self.read_string()?;
        }
        if encoding & 0x40 != 0 {
            self.read_u32()?;
        }
        Ok(id)
    }

    pub fn read_qualified_name(&mut self) -> Result<QualifiedName> {
        Ok(QualifiedName {
            namespace: self.read_u16()?,
            name: self.read_string()?,
        })
    }

    pub fn read_localized_text(&mut self) -> Result<LocalizedText> {
        let mask = self.read_u8()?;
        if mask & !0x03 != 0 {
            return Err(Error::InvalidEncodingByte {
                context: "localized text",
                byte: mask,
            });
        }
        let locale = if mask & 0x01 != 0 {
            self.read_string()?
        } else {
            None
        };
        let text = if mask & 0x02 != 0 {
            self.read_string()?
        } else {
            None
        };
        Ok(LocalizedText { locale, text })
    }

    pub fn read_extension_object(&mut self) -> Result<ExtensionObject> {
        let type_id = self.read_node_id()?;
        let mask = self.read_u8()?;
        let body = match mask {
            0x00 => None,
            0x01 | 0x02 => self.read_bytestring()?,
            byte => {
                return Err(Error::InvalidEncodingByte {
                    context: "extension object",
                    byte,
                })
            }
        };
        Ok(ExtensionObject { type_id, body })
    }

    /// One scalar variant; arrays and matrices are outside this stack's
    /// scope and rejected.
    pub fn read_variant(&mut self) -> Result<Variant> {
        let type_byte = self.read_u8()?;
        if type_byte & 0xC0 != 0 {
            return Err(Error::InvalidEncodingByte {
                context: "variant (arrays unsupported)",
                byte: type_byte,
            });
        }
        match type_byte {
            0 => Ok(Variant::Null),
            1 => Ok(Variant::Boolean(self.read_bool()?)),
            6 => Ok(Variant::Int32(self.read_i32()?)),
            7 => Ok(Variant::UInt32(self.read_u32()?)),
            11 => Ok(Variant::Double(self.read_f64()?)),
            12 => Ok(Variant::String(self.read_string()?)),
            13 => Ok(Variant::DateTime(self.read_i64()?)),
            17 => Ok(Variant::NodeId(self.read_node_id()?)),
            19 => Ok(Variant::StatusCode(self.read_u32()?)),
            byte => Err(Error::InvalidEncodingByte {
                context: "variant type",
                byte,
            }),
        }
    }
}

/// Growable little-endian encoder.
#[derive(Default)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> ByteWriter {
        ByteWriter::default()
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.buf
    }

    pub fn write_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn write_bool(&mut self, v: bool) {
        self.write_u8(v as u8);
    }

    pub fn write_u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn write_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn write_i32(&mut self, v: i32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn write_i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn write_f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn write_string(&mut self, v: Option<&str>) {
        self.write_bytestring(v.map(str::as_bytes));
    }

    pub fn write_str(&mut self, v: &str) {
        self.write_string(Some(v));
    }

    pub fn write_bytestring(&mut self, v: Option<&[u8]>) {
        match v {
            None => self.write_i32(-1),
            Some(bytes) => {
                self.write_i32(bytes.len() as i32);
                self.buf.extend_from_slice(bytes);
            }
        }
    }

    pub fn write_array_len(&mut self, len: usize) {
        self.write_i32(len as i32);
    }

    /// Smallest of the two-byte, four-byte and full numeric forms.
    pub fn write_node_id(&mut self, id: &NodeId) {
        match &id.value {
            NodeIdValue::Numeric(n) => {
                if id.namespace == 0 && *n <= 0xFF {
                    self.write_u8(0x00);
                    self.write_u8(*n as u8);
                } else if id.namespace <= 0xFF && *n <= 0xFFFF {
                    self.write_u8(0x01);
                    self.write_u8(id.namespace as u8);
                    self.write_u16(*n as u16);
                } else {
                    self.write_u8(0x02);
                    self.write_u16(id.namespace);
                    self.write_u32(*n);
                }
            }
            NodeIdValue::String(s) => {
                self.write_u8(0x03);
                self.write_u16(id.namespace);
                self.write_str(s);
            }
            NodeIdValue::Guid(g) => {
                self.write_u8(0x04);
                self.write_u16(id.namespace);
                self.buf.extend_from_slice(g);
            }
            NodeIdValue::Bytes(b) => {
                self.write_u8(0x05);
                self.write_u16(id.namespace);
                self.write_bytestring(Some(b));
            }
        }
    }

    pub fn write_expanded_node_id(&mut self, id: &NodeId) {
        self.write_node_id(id);
    }

    pub fn write_qualified_name(&mut self, q: &QualifiedName) {
        self.write_u16(q.namespace);
        self.write_string(q.name.as_deref());
    }

    pub fn write_localized_text(&mut self, t: &LocalizedText) {
        let mask = (t.locale.is_some() as u8) | ((t.text.is_some() as u8) << 1);
        self.write_u8(mask);
        if let Some(locale) = &t.locale {
            self.write_str(locale);
        }
        if let Some(text) = &t.text {
            self.write_str(text);
        }
    }

    pub fn write_extension_object(&mut self, e: &ExtensionObject) {
        self.write_node_id(&e.type_id);
        match &e.body {
            None => self.write_u8(0x00),
            Some(body) => {
                self.write_u8(0x01);
                self.write_bytestring(Some(body));
            }
        }
    }

    pub fn write_variant(&mut self, v: &Variant) {
        match v {
            Variant::Null => self.write_u8(0),
            Variant::Boolean(b) => {
                self.write_u8(1);
                self.write_bool(*b);
            }
            Variant::Int32(n) => {
                self.write_u8(6);
                self.write_i32(*n);
            }
            Variant::UInt32(n) => {
                self.write_u8(7);
                self.write_u32(*n);
            }
            Variant::Double(d) => {
                self.write_u8(11);
                self.write_f64(*d);
            }
            Variant::String(s) => {
                self.write_u8(12);
                self.write_string(s.as_deref());
            }
            Variant::DateTime(t) => {
                self.write_u8(13);
                self.write_i64(*t);
            }
            Variant::NodeId(id) => {
                self.write_u8(17);
                self.write_node_id(id);
            }
            Variant::StatusCode(c) => {
                self.write_u8(19);
                self.write_u32(*c);
            }
        }
    }
}
