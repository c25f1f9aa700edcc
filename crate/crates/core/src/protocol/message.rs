use super::quantize::QuantizedDrive;
use super::ProtocolError;

/// Yaw limit in 0.01° units.
pub(crate) const YAW_LIMIT: i16 = 18_000;
/// Hinge target limit in 0.01° units.
pub(crate) const HINGE_LIMIT: u16 = 9_000;

/// Payload of a frame. Integer fields are in wire units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    /// `x`, `y` in 0.1 mm, `yaw` in 0.01°, `speed` in mm/s.
    MoveTo { x: i32, y: i32, yaw: i16, speed: u16 },
    /// Hinge target in 0.01°, 0..=9000.
    SetHinge { target: u16 },
    Dispense { count: u8 },
    AcousticFrame { frame_id: u16, drive: QuantizedDrive },
    Stop,
    /// Tracker observation of one body. Lengths in 0.1 mm, yaw in 0.01°,
    /// timestamp in ms.
    PoseReport { source_id: u8, x: i32, y: i32, z: i32, yaw: i16, timestamp: u32 },
    Ack { acked_seq: u16, status: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum MessageKind {
    MoveTo = 1,
    SetHinge = 2,
    Dispense = 3,
    AcousticFrame = 4,
    Stop = 5,
    PoseReport = 6,
    Ack = 7,
}

impl MessageKind {
    pub const ALL: [MessageKind; 7] = [
        Self::MoveTo,
        Self::SetHinge,
        Self::Dispense,
        Self::AcousticFrame,
        Self::Stop,
        Self::PoseReport,
        Self::Ack,
    ];

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.get(usize::from(b).wrapping_sub(1)).copied()
    }

    pub fn payload_len(self) -> usize {
        match self {
            Self::MoveTo => 12,
            Self::SetHinge => 2,
            Self::Dispense => 1,
            Self::AcousticFrame => 130,
            Self::Stop => 0,
            Self::PoseReport => 19,
            Self::Ack => 3,
        }
    }
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Self::MoveTo { .. } => MessageKind::MoveTo,
            Self::SetHinge { .. } => MessageKind::SetHinge,
            Self::Dispense { .. } => MessageKind::Dispense,
            Self::AcousticFrame { .. } => MessageKind::AcousticFrame,
            Self::Stop => MessageKind::Stop,
            Self::PoseReport { .. } => MessageKind::PoseReport,
            Self::Ack { .. } => MessageKind::Ack,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        match *self {
            Self::MoveTo { yaw, .. } | Self::PoseReport { yaw, .. } => check_yaw(yaw),
            Self::SetHinge { target } if target > HINGE_LIMIT => Err(ProtocolError::FieldOutOfRange {
                field: "hinge target",
                value: target.into(),
            }),
            _ => Ok(()),
        }
    }

    /// MoveTo from SI units: metres, radians, m/s.
    pub fn move_to(x: f64, y: f64, yaw: f64, speed: f64) -> Result<Self, ProtocolError> {
        let msg = Self::MoveTo {
            x: to_wire_i32("x", x * 1e4)?,
            y: to_wire_i32("y", y * 1e4)?,
            yaw: angle_to_wire(yaw)?,
            speed: to_wire_u16("speed", speed * 1e3)?,
        };
        msg.validate()?;
        Ok(msg)
    }

    /// SetHinge from degrees.
    pub fn set_hinge(degrees: f64) -> Result<Self, ProtocolError> {
        let msg = Self::SetHinge { target: to_wire_u16("hinge target", degrees * 100.0)? };
        msg.validate()?;
        Ok(msg)
    }

    /// PoseReport from SI units: metres, radians, seconds.
    pub fn pose_report(source_id: u8, pos: [f64; 3], yaw: f64, time: f64) -> Result<Self, ProtocolError> {
        let timestamp = (time * 1e3).round();
        if !(0.0..=f64::from(u32::MAX)).contains(&timestamp) {
            return Err(ProtocolError::FieldOutOfRange { field: "timestamp", value: timestamp as i64 });
        }
        Ok(Self::PoseReport {
            source_id,
            x: to_wire_i32("x", pos[0] * 1e4)?,
            y: to_wire_i32("y", pos[1] * 1e4)?,
            z: to_wire_i32("z", pos[2] * 1e4)?,
            yaw: angle_to_wire(yaw)?,
            timestamp: timestamp as u32,
        })
    }
}

fn check_yaw(yaw: i16) -> Result<(), ProtocolError> {
    if (-YAW_LIMIT..=YAW_LIMIT).contains(&yaw) {
        Ok(())
    } else {
        Err(ProtocolError::FieldOutOfRange { field: "yaw", value: yaw.into() })
    }
}

fn to_wire_i32(field: &'static str, v: f64) -> Result<i32, ProtocolError> {
    let r = v.round();
    if r.is_finite() && r >= f64::from(i32::MIN) && r <= f64::from(i32::MAX) {
        Ok(r as i32)
    } else {
        Err(ProtocolError::FieldOutOfRange { field, value: saturate(r) })
    }
}

fn to_wire_u16(field: &'static str, v: f64) -> Result<u16, ProtocolError> {
    let r = v.round();
    if (0.0..=f64::from(u16::MAX)).contains(&r) {
        Ok(r as u16)
    } else {
        Err(ProtocolError::FieldOutOfRange { field, value: saturate(r) })
    }
}

fn saturate(v: f64) -> i64 {
    if v.is_nan() {
        0
    } else {
        v as i64
    }
}

/// Radians to 0.01° wire units, wrapped to [−180°, 180°].
pub fn angle_to_wire(radians: f64) -> Result<i16, ProtocolError> {
    if !radians.is_finite() {
        return Err(ProtocolError::FieldOutOfRange { field: "yaw", value: 0 });
    }
    let centi = crate::acoustics::wrap_angle(radians).to_degrees() * 100.0;
    Ok(centi.round().clamp(-f64::from(YAW_LIMIT), f64::from(YAW_LIMIT)) as i16)
}

pub fn angle_from_wire(centi_deg: i16) -> f64 {
    (f64::from(centi_deg) / 100.0).to_radians()
}
