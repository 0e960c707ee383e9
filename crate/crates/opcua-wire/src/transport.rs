//! TCP message framing and the HEL/ACK/ERR connection protocol.
//!
//! Every message starts with an 8-byte header: a 3-byte type code, the
//! chunk byte 'F' (only final, single-chunk messages are supported) and the
//! total message size as a little-endian u32, header included.

use std::io::{Read, Write};

use crate::codec::{ByteReader, ByteWriter};
use crate::{Error, Result, MAX_MESSAGE_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageType {
    Hello,
    Ack,
    Error,
    Open,
    Msg,
    Close,
}

impl MessageType {
    pub fn code(self) -> &'static [u8; 3] {
        match self {
            MessageType::Hello => b"HEL",
            MessageType::Ack => b"ACK",
            MessageType::Error => b"ERR",
            MessageType::Open => b"OPN",
            MessageType::Msg => b"MSG",
            MessageType::Close => b"CLO",
        }
    }

    pub fn from_code(code: &[u8; 3]) -> Option<MessageType> {
        match code {
            b"HEL" => Some(MessageType::Hello),
            b"ACK" => Some(MessageType::Ack),
            b"ERR" => Some(MessageType::Error),
            b"OPN" => Some(MessageType::Open),
            b"MSG" => Some(MessageType::Msg),
            b"CLO" => Some(MessageType::Close),
            _ => None,
        }
    }
}

/// One framed transport message; `body` excludes the 8-byte header.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub kind: MessageType,
    pub body: Vec<u8>,
}

/// Reads one frame. Returns `Ok(None)` on a clean EOF at a frame boundary.
pub fn read_frame(r: &mut impl Read) -> Result<Option<Frame>> {
    let mut header = [0u8; 8];
    let mut got = 0;
    while got < 8 {
        match r.read(&mut header[got..])? {
            0 if got == 0 => return Ok(None),
            0 => {
                return Err(Error::ProtocolViolation(
                    "connection closed mid-header".into(),
                ))
            }
            n => got += n,
        }
    }
    let code: [u8; 3] = header[..3].try_into().unwrap();
    let kind = MessageType::from_code(&code).ok_or_else(|| {
        Error::ProtocolViolation(format!("unknown message type {:02x?}", &header[..3]))
    })?;
    if header[3] != b'F' {
        return Err(Error::ProtocolViolation(format!(
            "unsupported chunk type {:?}",
            header[3] as char
        )));
    }
    let size = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if size < 8 {
        return Err(Error::ProtocolViolation(format!(
            "declared size {size} is smaller than the header"
        )));
    }
    if size > MAX_MESSAGE_SIZE {
        return Err(Error::ProtocolViolation(format!(
            "declared size {size} exceeds the {MAX_MESSAGE_SIZE} limit"
        )));
    }
    let mut body = vec![0u8; size as usize - 8];
    r.read_exact(&mut body)?;
    Ok(Some(Frame { kind, body }))
}

/// Frames and sends one message; the size field covers header plus body.
pub fn write_frame(w: &mut impl Write, kind: MessageType, body: &[u8]) -> Result<()> {
    let total = body.len() + 8;
    if total > MAX_MESSAGE_SIZE as usize {
        return Err(Error::ProtocolViolation(format!(
            "outgoing message of {total} bytes exceeds the {MAX_MESSAGE_SIZE} limit"
        )));
    }
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(kind.code());
    out.push(b'F');
    out.extend_from_slice(&(total as u32).to_le_bytes());
    out.extend_from_slice(body);
    w.write_all(&out)?;
    w.flush()?;
    Ok(())
}

/// Client's opening message.
#[derive(Debug, Clone, PartialEq)]
pub struct Hello {
    pub protocol_version: u32,
    pub receive_buffer_size: u32,
    pub send_buffer_size: u32,
    pub max_message_size: u32,
    pub max_chunk_count: u32,
    pub endpoint_url: Option<String>,
}

impl Hello {
    pub fn encode(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.write_u32(self.protocol_version);
        w.write_u32(self.receive_buffer_size);
        w.write_u32(self.send_buffer_size);
        w.write_u32(self.max_message_size);
        w.write_u32(self.max_chunk_count);
        w.write_string(self.endpoint_url.as_deref());
        w.into_vec()
    }

    pub fn decode(body: &[u8]) -> Result<Hello> {
        let mut r = ByteReader::new(body, "HEL");
        Ok(Hello {
            protocol_version: r.read_u32()?,
            receive_buffer_size: r.read_u32()?,
            send_buffer_size: r.read_u32()?,
            max_message_size: r.read_u32()?,
            max_chunk_count: r.read_u32()?,
            endpoint_url: r.read_string()?,
        })
    }
}

/// Server's answer to HEL with the negotiated limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ack {
    pub protocol_version: u32,
    pub receive_buffer_size: u32,
    pub send_buffer_size: u32,
    pub max_message_size: u32,
    pub max_chunk_count: u32,
}

impl Ack {
    /// Min rule against our fixed limit; a client value of 0 means
    /// "no preference" and gets the server default.
    pub fn negotiate(hello: &Hello) -> Ack {
        let cap = |v: u32| {
            if v == 0 {
                MAX_MESSAGE_SIZE
            } else {
                v.min(MAX_MESSAGE_SIZE)
            }
        };
        Ack {
            protocol_version: 0,
            receive_buffer_size: cap(hello.receive_buffer_size),
            send_buffer_size: cap(hello.send_buffer_size),
            max_message_size: cap(hello.max_message_size),
            max_chunk_count: 1,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.write_u32(self.protocol_version);
        w.write_u32(self.receive_buffer_size);
        w.write_u32(self.send_buffer_size);
        w.write_u32(self.max_message_size);
        w.write_u32(self.max_chunk_count);
        w.into_vec()
    }

    pub fn decode(body: &[u8]) -> Result<Ack> {
        let mut r = ByteReader::new(body, "ACK");
        Ok(Ack {
            protocol_version: r.read_u32()?,
            receive_buffer_size: r.read_u32()?,
            send_buffer_size: r.read_u32()?,
            max_message_size: r.read_u32()?,
            max_chunk_count: r.read_u32()?,
        })
    }
}

/// Transport-level failure notice.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMessage {
    pub code: u32,
    pub reason: Option<String>,
}

impl ErrorMessage {
    pub fn new(code: u32, reason: &str) -> ErrorMessage {
        ErrorMessage {
            code,
            reason: Some(reason.to_string()),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.write_u32(self.code);
        w.write_string(self.reason.as_deref());
        w.into_vec()
    }

    pub fn decode(body: &[u8]) -> Result<ErrorMessage> {
        let mut r = ByteReader::new(body, "ERR");
        Ok(ErrorMessage {
            code: r.read_u32()?,
            reason: r.read_string()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn frame_round_trips_and_size_covers_the_header() {
        let mut buf = Vec::new();
        write_frame(&mut buf, MessageType::Msg, b"payload").unwrap();
        assert_eq!(&buf[..4], b"MSGF");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 15);

        let frame = read_frame(&mut Cursor::new(&buf)).unwrap().unwrap();
        assert_eq!(frame.kind, MessageType::Msg);
        assert_eq!(frame.body, b"payload");
    }

    #[test]
    fn clean_eof_reads_as_none() {
        assert!(read_frame(&mut Cursor::new(&[])).unwrap().is_none());
    }

    #[test]
    fn garbage_type_code_is_a_violation() {
        let buf = b"XYZF\x08\x00\x00\x00";
        assert!(matches!(
            read_frame(&mut Cursor::new(&buf[..])),
            Err(Error::ProtocolViolation(_))
        ));
    }

    #[test]
    fn non_final_chunks_are_rejected() {
        let buf = b"MSGC\x08\x00\x00\x00";
        assert!(read_frame(&mut Cursor::new(&buf[..])).is_err());
    }

    #[test]
    fn size_bounds_are_enforced() {
        let small = b"MSGF\x07\x00\x00\x00";
        assert!(read_frame(&mut Cursor::new(&small[..])).is_err());

        let mut huge = b"MSGF".to_vec();
        huge.extend_from_slice(&(MAX_MESSAGE_SIZE + 1).to_le_bytes());
        assert!(read_frame(&mut Cursor::new(&huge[..])).is_err());

        let body = vec![0u8; MAX_MESSAGE_SIZE as usize];
        let mut out = Vec::new();
        assert!(write_frame(&mut out, MessageType::Msg, &body).is_err());
    }

    #[test]
    fn hello_ack_and_err_round_trip() {
        let hello = Hello {
            protocol_version: 0,
            receive_buffer_size: 8192,
            send_buffer_size: 8192,
            max_message_size: 16384,
            max_chunk_count: 5,
            endpoint_url: Some("opc.tcp://127.0.0.1:4840".into()),
        };
        assert_eq!(Hello::decode(&hello.encode()).unwrap(), hello);

        let ack = Ack::negotiate(&hello);
        assert_eq!(Ack::decode(&ack.encode()).unwrap(), ack);

        let err = ErrorMessage::new(0x80550000, "policy rejected");
        assert_eq!(ErrorMessage::decode(&err.encode()).unwrap(), err);
    }

    #[test]
    fn negotiation_takes_the_minimum() {
        let mut hello = Hello {
            protocol_version: 0,
            receive_buffer_size: 65536,
            send_buffer_size: 65536,
            max_message_size: 65536,
            max_chunk_count: 0,
            endpoint_url: None,
        };
        assert_eq!(Ack::negotiate(&hello).receive_buffer_size, 65536);

        hello.receive_buffer_size = 8192;
        assert_eq!(Ack::negotiate(&hello).receive_buffer_size, 8192);

        hello.receive_buffer_size = 1 << 20;
        assert_eq!(Ack::negotiate(&hello).receive_buffer_size, 65536);

        hello.receive_buffer_size = 0;
        assert_eq!(Ack::negotiate(&hello).receive_buffer_size, 65536);
    }
}
