use super::message::{Message, MessageKind};
use super::quantize::{QuantizedDrive, ELEMENTS_PER_FRAME};
use super::ProtocolError;

pub const MAGIC: [u8; 2] = [0x41, 0x42];
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireHeader {
    pub msg_type: u8,
    pub bot_id: u8,
    pub flags: u8,
    pub seq: u16,
    pub payload_len: u16,
}

/// A decoded frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub header: WireHeader,
    pub message: Message,
}

impl Frame {
    pub fn bot_id(&self) -> u8 {
        self.header.bot_id
    }

    pub fn seq(&self) -> u16 {
        self.header.seq
    }
}

/// Serialize `msg` addressed to `bot_id`. Nothing is produced for a message
/// with an out-of-range field.
pub fn encode(msg: &Message, bot_id: u8, seq: u16) -> Result<Vec<u8>, ProtocolError> {
    msg.validate()?;
    let kind = msg.kind();
    let len = kind.payload_len();
    let mut out = Vec::with_capacity(HEADER_LEN + len);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&[VERSION, kind as u8, bot_id, 0]);
    out.extend_from_slice(&seq.to_le_bytes());
    out.extend_from_slice(&(len as u16).to_le_bytes());
    match msg {
        Message::MoveTo { x, y, yaw, speed } => {
            out.extend_from_slice(&x.to_le_bytes());
            out.extend_from_slice(&y.to_le_bytes());
            out.extend_from_slice(&yaw.to_le_bytes());
            out.extend_from_slice(&speed.to_le_bytes());
        }
        Message::SetHinge { target } => out.extend_from_slice(&target.to_le_bytes()),
        Message::Dispense { count } => out.push(*count),
        Message::AcousticFrame { frame_id, drive } => {
            out.extend_from_slice(&frame_id.to_le_bytes());
            for (p, a) in drive.phase.iter().zip(&drive.amplitude) {
                out.extend_from_slice(&[*p, *a]);
            }
        }
        Message::Stop => {}
        Message::PoseReport { source_id, x, y, z, yaw, timestamp } => {
            out.push(*source_id);
            out.extend_from_slice(&x.to_le_bytes());
            out.extend_from_slice(&y.to_le_bytes());
            out.extend_from_slice(&z.to_le_bytes());
            out.extend_from_slice(&yaw.to_le_bytes());
            out.extend_from_slice(&timestamp.to_le_bytes());
        }
        Message::Ack { acked_seq, status } => {
            out.extend_from_slice(&acked_seq.to_le_bytes());
            out.push(*status);
        }
    }
    debug_assert_eq!(out.len(), HEADER_LEN + len);
    Ok(out)
}

/// Little-endian reader over a payload whose length was already checked.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut buf = [0; N];
        buf.copy_from_slice(&self.bytes[self.pos..self.pos + N]);
        self.pos += N;
        buf
    }

    fn u8(&mut self) -> u8 {
        self.take::<1>()[0]
    }

    fn u16(&mut self) -> u16 {
        u16::from_le_bytes(self.take())
    }

    fn i16(&mut self) -> i16 {
        i16::from_le_bytes(self.take())
    }

    fn i32(&mut self) -> i32 {
        i32::from_le_bytes(self.take())
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }
}

/// Parse exactly one frame. Checks run in header order, so a frame is
/// rejected for the first field that is wrong.
pub fn decode(bytes: &[u8]) -> Result<Frame, ProtocolError> {
    let magic_seen = bytes.len().min(2);
    if bytes[..magic_seen] != MAGIC[..magic_seen] {
        return Err(ProtocolError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(ProtocolError::Truncated { needed: HEADER_LEN, available: bytes.len() });
    }
    if bytes[2] != VERSION {
        return Err(ProtocolError::BadVersion(bytes[2]));
    }
    let kind = MessageKind::from_byte(bytes[3]).ok_or(ProtocolError::UnknownType(bytes[3]))?;
    if bytes[5] != 0 {
        return Err(ProtocolError::BadFlags(bytes[5]));
    }
    let header = WireHeader {
        msg_type: bytes[3],
        bot_id: bytes[4],
        flags: bytes[5],
        seq: u16::from_le_bytes([bytes[6], bytes[7]]),
        payload_len: u16::from_le_bytes([bytes[8], bytes[9]]),
    };
    let declared = usize::from(header.payload_len);
    let expected = kind.payload_len();
    if declared != expected {
        return Err(ProtocolError::LengthMismatch { expected, actual: declared });
    }
    let total = HEADER_LEN + declared;
    if bytes.len() < total {
        return Err(ProtocolError::Truncated { needed: total, available: bytes.len() });
    }
    if bytes.len() > total {
        return Err(ProtocolError::TrailingBytes { extra: bytes.len() - total });
    }

    let mut r = Reader { bytes: &bytes[HEADER_LEN..], pos: 0 };
    let message = match kind {
        MessageKind::MoveTo => Message::MoveTo { x: r.i32(), y: r.i32(), yaw: r.i16(), speed: r.u16() },
        MessageKind::SetHinge => Message::SetHinge { target: r.u16() },
        MessageKind::Dispense => Message::Dispense { count: r.u8() },
        MessageKind::AcousticFrame => {
            let frame_id = r.u16();
            let mut drive = QuantizedDrive::zeroed();
            for j in 0..ELEMENTS_PER_FRAME {
                drive.phase[j] = r.u8();
                drive.amplitude[j] = r.u8();
            }
            Message::AcousticFrame { frame_id, drive }
        }
        MessageKind::Stop => Message::Stop,
        MessageKind::PoseReport => Message::PoseReport {
            source_id: r.u8(),
            x: r.i32(),
            y: r.i32(),
            z: r.i32(),
            yaw: r.i16(),
            timestamp: r.u32(),
        },
        MessageKind::Ack => Message::Ack { acked_seq: r.u16(), status: r.u8() },
    };
    message.validate()?;
    Ok(Frame { header, message })
}
