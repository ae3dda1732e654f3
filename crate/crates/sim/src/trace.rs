use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    Press,
    Release,
    Rx,
    Tx,
    Coil,
    Contact,
    Frame,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Press => "press",
            TraceKind::Release => "release",
            TraceKind::Rx => "rx",
            TraceKind::Tx => "tx",
            TraceKind::Coil => "coil",
            TraceKind::Contact => "contact",
            TraceKind::Frame => "frame",
        }
    }
}

/// One line of the trace log: `t_ms kind payload`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub t_ms: f64,
    pub kind: TraceKind,
    pub payload: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} {} {}", self.t_ms, self.kind.as_str(), self.payload)
    }
}
